//! Symmetry and limit properties of the gas-kinetic point flux.

use cgks_core::flux::{gks_flux_point, CollisionTimeModel, InterfaceInput};
use cgks_core::kinetic::{cons_to_equilibrium, moment_table, Half};
use cgks_core::state::Conserved;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA: f64 = 1.4;

fn random_state(rng: &mut impl Rng) -> Conserved {
    Conserved::from_primitive(
        0.3 + rng.gen::<f64>() * 1.7,
        [
            rng.gen::<f64>() * 1.6 - 0.8,
            rng.gen::<f64>() * 1.6 - 0.8,
            rng.gen::<f64>() * 1.6 - 0.8,
        ],
        0.3 + rng.gen::<f64>() * 1.7,
        GAMMA,
    )
}

fn random_grads(rng: &mut impl Rng, scale: f64) -> [Conserved; 3] {
    let mut g = [Conserved::ZERO; 3];
    for gi in &mut g {
        for c in 0..5 {
            gi.0[c] = (rng.gen::<f64>() - 0.5) * scale;
        }
    }
    g
}

/// Mirror a local-frame state through the interface plane (x1 -> -x1).
fn mirror_state(w: &Conserved) -> Conserved {
    Conserved([w.0[0], -w.0[1], w.0[2], w.0[3], w.0[4]])
}

/// Mirror local directional gradients: the normal direction flips, and so
/// does the normal momentum component.
fn mirror_grads(g: &[Conserved; 3]) -> [Conserved; 3] {
    let flip = |w: &Conserved, s: f64| Conserved([s * w.0[0], -s * w.0[1], s * w.0[2], s * w.0[3], s * w.0[4]]);
    [flip(&g[0], -1.0), flip(&g[1], 1.0), flip(&g[2], 1.0)]
}

#[test]
fn antisymmetry_under_swap() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = CollisionTimeModel { mu: 0.003, c1: 0.05, c2: 1.0 };
    for _ in 0..200 {
        let w_l = random_state(&mut rng);
        let w_r = random_state(&mut rng);
        let dw_l = random_grads(&mut rng, 0.4);
        let dw_r = random_grads(&mut rng, 0.4);
        let dt = 0.01;
        let fwd = gks_flux_point(
            &InterfaceInput { w_l, w_r, dw_l, dw_r, dt, point_time: dt, gamma: GAMMA },
            &model,
        )
        .unwrap();
        // Same physical interface described in the opposite frame.
        let rev = gks_flux_point(
            &InterfaceInput {
                w_l: mirror_state(&w_r),
                w_r: mirror_state(&w_l),
                dw_l: mirror_grads(&dw_r),
                dw_r: mirror_grads(&dw_l),
                dt,
                point_time: dt,
                gamma: GAMMA,
            },
            &model,
        )
        .unwrap();
        let scale = fwd.flux_full.abs_max().max(1e-3);
        for i in 0..5 {
            let sign = if i == 1 { 1.0 } else { -1.0 };
            let err = (fwd.flux_full.0[i] - sign * rev.flux_full.0[i]).abs();
            assert!(err <= 1e-12 * scale.max(1.0), "component {i}: {err:.3e}");
            let err_h = (fwd.flux_half.0[i] - sign * rev.flux_half.0[i]).abs();
            assert!(err_h <= 1e-12 * scale.max(1.0));
        }
        // The interface state itself is frame-mirrored, not negated.
        for i in 0..5 {
            let sign = if i == 1 { -1.0 } else { 1.0 };
            let err = (fwd.w_point.0[i] - sign * rev.w_point.0[i]).abs();
            assert!(err <= 1e-12 * fwd.w_point.abs_max());
        }
    }
}

#[test]
fn galilean_shift_of_tangential_momentum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = CollisionTimeModel { mu: 0.0, c1: 0.1, c2: 1.0 };
    for _ in 0..40 {
        let w_l = random_state(&mut rng);
        let w_r = random_state(&mut rng);
        let dt = 0.01;
        let base = gks_flux_point(
            &InterfaceInput {
                w_l,
                w_r,
                dw_l: [Conserved::ZERO; 3],
                dw_r: [Conserved::ZERO; 3],
                dt,
                point_time: dt,
                gamma: GAMMA,
            },
            &model,
        )
        .unwrap();
        // Boost both states by tangential velocity V in t1.
        let v = 0.37;
        let boost = |w: &Conserved| {
            let vel = w.velocity();
            let p = w.pressure(GAMMA);
            Conserved::from_primitive(w.rho(), [vel[0], vel[1] + v, vel[2]], p, GAMMA)
        };
        let boosted = gks_flux_point(
            &InterfaceInput {
                w_l: boost(&w_l),
                w_r: boost(&w_r),
                dw_l: [Conserved::ZERO; 3],
                dw_r: [Conserved::ZERO; 3],
                dt,
                point_time: dt,
                gamma: GAMMA,
            },
            &model,
        )
        .unwrap();
        // Tangential momentum flux shifts by V * mass flux.
        let expect = boosted.flux_full.0[0] * v + base.flux_full.0[2];
        let err = (boosted.flux_full.0[2] - expect).abs();
        assert!(
            err <= 1e-10 * boosted.flux_full.abs_max().max(1.0),
            "tangential shift error {err:.3e}"
        );
    }
}

#[test]
fn large_tau_approaches_kinetic_split_flux() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let w_l = random_state(&mut rng);
        let w_r = random_state(&mut rng);
        let dt = 1e-3;
        // tau_num >> dt via c1; zero gradients and mu = 0.
        let model = CollisionTimeModel { mu: 0.0, c1: 1e12, c2: 0.0 };
        let s = gks_flux_point(
            &InterfaceInput {
                w_l,
                w_r,
                dw_l: [Conserved::ZERO; 3],
                dw_r: [Conserved::ZERO; 3],
                dt,
                point_time: dt,
                gamma: GAMMA,
            },
            &model,
        )
        .unwrap();
        // Half-moment oracle for the free-transport flux.
        let tl = moment_table(&cons_to_equilibrium(&w_l, GAMMA).unwrap());
        let tr = moment_table(&cons_to_equilibrium(&w_r, GAMMA).unwrap());
        let pl = tl.psi(Half::Positive, 1, 0, 0, 0);
        let pr = tr.psi(Half::Negative, 1, 0, 0, 0);
        for i in 0..5 {
            let kfvs = w_l.rho() * pl[i] + w_r.rho() * pr[i];
            let got = s.flux_full.0[i] / dt;
            assert!(
                (got - kfvs).abs() <= 1e-10 * kfvs.abs().max(1.0),
                "component {i}: {got} vs {kfvs}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Per-time flux of a uniform state equals the exact Euler flux for any
    /// admissible tau_num, and the point state stays on the initial value.
    #[test]
    fn uniform_consistency(
        rho in 0.2f64..3.0,
        u in -1.5f64..1.5,
        v in -1.5f64..1.5,
        w in -1.5f64..1.5,
        p in 0.2f64..3.0,
        c1 in 0.0f64..1.0,
    ) {
        let state = Conserved::from_primitive(rho, [u, v, w], p, GAMMA);
        let dt = 0.02;
        let model = CollisionTimeModel { mu: 0.0, c1, c2: 1.0 };
        let s = gks_flux_point(
            &InterfaceInput {
                w_l: state,
                w_r: state,
                dw_l: [Conserved::ZERO; 3],
                dw_r: [Conserved::ZERO; 3],
                dt,
                point_time: dt,
                gamma: GAMMA,
            },
            &model,
        )
        .unwrap();
        let euler = state.euler_flux_x(GAMMA);
        for i in 0..5 {
            prop_assert!((s.flux_full.0[i] / dt - euler.0[i]).abs() <= 1e-12 * euler.abs_max().max(1.0));
            prop_assert!((s.w_point.0[i] - state.0[i]).abs() <= 1e-12 * state.abs_max());
        }
    }
}
