//! Moment tables against direct numerical quadrature and the microslope
//! closed form against a dense solve.

use cgks_core::kinetic::{cons_to_equilibrium, moment_table, solve_microslope, EquilibriumState};
use cgks_core::oracles::{dense_microslope, moment_by_quadrature};
use cgks_core::state::Conserved;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn eq(u: f64, v: f64, w: f64, lambda: f64) -> EquilibriumState {
    EquilibriumState {
        rho: 1.0,
        vel: [u, v, w],
        lambda,
        k_internal: 2.0,
        gamma: 1.4,
    }
}

#[test]
fn moment_table_matches_quadrature_sweep() {
    // (U, lambda) sweep with |U| sqrt(lambda) <= 5.
    let mut worst: f64 = 0.0;
    for iu in 0..10 {
        for il in 0..5 {
            let lambda = 0.3 + 0.9 * il as f64;
            let cap = 5.0 / lambda.sqrt();
            let u = -cap + 2.0 * cap * iu as f64 / 9.0;
            let e = eq(u, 0.0, 0.0, lambda);
            let t = moment_table(&e);
            for n in 0..=6usize {
                let full = moment_by_quadrature(u, lambda, n, 0);
                let pos = moment_by_quadrature(u, lambda, n, 1);
                let neg = moment_by_quadrature(u, lambda, n, -1);
                let scale = full.abs().max(1.0);
                worst = worst
                    .max((t.u1[n] - full).abs() / scale)
                    .max((t.u1_pos[n] - pos).abs() / scale)
                    .max((t.u1_neg[n] - neg).abs() / scale);
            }
        }
    }
    assert!(worst < 1e-10, "worst relative moment error {worst:.3e}");
}

#[test]
fn microslope_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let rho = 0.3 + rng.gen::<f64>() * 2.0;
        let vel = [
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        ];
        let p = 0.2 + rng.gen::<f64>() * 3.0;
        let w = Conserved::from_primitive(rho, vel, p, 1.4);
        let e = cons_to_equilibrium(&w, 1.4).unwrap();
        let dw = Conserved([
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        ]);
        let fast = solve_microslope(&e, &dw);
        let dense = dense_microslope(&e, &dw);
        for i in 0..5 {
            assert!(
                (fast.0[i] - dense[i]).abs() <= 1e-8 * dense[i].abs().max(1.0),
                "component {i}: {} vs {}",
                fast.0[i],
                dense[i]
            );
        }
    }
}

#[test]
fn contact_discontinuity_time_slope_energy() {
    // 1D contact: density gradient at rest. The dense route and the closed
    // form must agree on the induced time slope's energy component.
    let w = Conserved::from_primitive(1.0, [0.0; 3], 1.0, 1.4);
    let e = cons_to_equilibrium(&w, 1.4).unwrap();
    assert!((e.lambda - 0.5).abs() < 1e-14);
    let dw = Conserved([1.0, 0.0, 0.0, 0.0, 0.0]);
    let fast = solve_microslope(&e, &dw);
    let dense = dense_microslope(&e, &dw);
    for i in 0..5 {
        assert!((fast.0[i] - dense[i]).abs() < 1e-9, "{:?} vs {:?}", fast.0, dense);
    }
}
