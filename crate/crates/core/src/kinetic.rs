//! Maxwellian algebra: state conversion, full and half velocity moments,
//! and the closed-form microslope solves feeding the kinetic flux.

use crate::state::Conserved;
use crate::vec3::Vec3;
use crate::{CgksError, Result};

/// Maxwellian parameters recovered from a conservative state.
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumState {
    pub rho: f64,
    pub vel: Vec3,
    /// Inverse of twice the scaled temperature; p = rho / (2 lambda).
    pub lambda: f64,
    /// Internal degrees of freedom, (5 - 3 gamma) / (gamma - 1).
    pub k_internal: f64,
    pub gamma: f64,
}

impl EquilibriumState {
    #[inline]
    pub fn pressure(&self) -> f64 {
        self.rho / (2.0 * self.lambda)
    }

    #[inline]
    pub fn sound_speed(&self) -> f64 {
        (self.gamma / (2.0 * self.lambda)).sqrt()
    }

    /// Conservative state represented by this Maxwellian.
    pub fn conserved(&self) -> Conserved {
        let q2 = self.vel[0] * self.vel[0] + self.vel[1] * self.vel[1] + self.vel[2] * self.vel[2];
        let ene = 0.5 * self.rho * (q2 + (self.k_internal + 3.0) / (2.0 * self.lambda));
        Conserved([
            self.rho,
            self.rho * self.vel[0],
            self.rho * self.vel[1],
            self.rho * self.vel[2],
            ene,
        ])
    }
}

pub fn internal_dof(gamma: f64) -> f64 {
    (5.0 - 3.0 * gamma) / (gamma - 1.0)
}

/// Recover Maxwellian parameters from conservative variables.
pub fn cons_to_equilibrium(w: &Conserved, gamma: f64) -> Result<EquilibriumState> {
    w.check_physical("cons_to_equilibrium")?;
    let k = internal_dof(gamma);
    let lambda = (k + 3.0) * w.rho() / (4.0 * w.internal_energy());
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(CgksError::NonPhysical {
            context: "cons_to_equilibrium",
            component: "lambda",
            value: lambda,
        });
    }
    Ok(EquilibriumState {
        rho: w.rho(),
        vel: w.velocity(),
        lambda,
        k_internal: k,
        gamma,
    })
}

/// Which velocity half-space a u1 moment covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Full,
    Positive,
    Negative,
}

const NMOM: usize = 7; // powers 0..=6

/// Velocity moments of a unit-density Maxwellian: full moments of u1, u2,
/// u3 up to power 6, half moments of u1 over each sign, and the internal
/// variable moments <xi^0>, <xi^2>, <xi^4>.
#[derive(Debug, Clone, Copy)]
pub struct MomentTable {
    pub rho: f64,
    pub u1: [f64; NMOM],
    pub u1_pos: [f64; NMOM],
    pub u1_neg: [f64; NMOM],
    pub u2: [f64; NMOM],
    pub u3: [f64; NMOM],
    pub xi: [f64; 3],
}

fn full_moments(u: f64, lambda: f64) -> [f64; NMOM] {
    let mut m = [0.0; NMOM];
    m[0] = 1.0;
    m[1] = u;
    for n in 0..NMOM - 2 {
        m[n + 2] = u * m[n + 1] + (n + 1) as f64 / (2.0 * lambda) * m[n];
    }
    m
}

/// Build the moment table for an equilibrium state.
pub fn moment_table(eq: &EquilibriumState) -> MomentTable {
    let (u, lambda) = (eq.vel[0], eq.lambda);
    let sql = lambda.sqrt();
    let mut pos = [0.0; NMOM];
    pos[0] = 0.5 * libm::erfc(-sql * u);
    pos[1] = u * pos[0] + 0.5 * (-lambda * u * u).exp() / (std::f64::consts::PI * lambda).sqrt();
    for n in 0..NMOM - 2 {
        pos[n + 2] = u * pos[n + 1] + (n + 1) as f64 / (2.0 * lambda) * pos[n];
    }
    let full = full_moments(u, lambda);
    let mut neg = [0.0; NMOM];
    for n in 0..NMOM {
        neg[n] = full[n] - pos[n];
    }
    let k = eq.k_internal;
    let xi2 = k / (2.0 * lambda);
    let xi4 = (k * k + 2.0 * k) / (4.0 * lambda * lambda);
    MomentTable {
        rho: eq.rho,
        u1: full,
        u1_pos: pos,
        u1_neg: neg,
        u2: full_moments(eq.vel[1], lambda),
        u3: full_moments(eq.vel[2], lambda),
        xi: [1.0, xi2, xi4],
    }
}

impl MomentTable {
    #[inline]
    fn m1(&self, half: Half, n: usize) -> f64 {
        match half {
            Half::Full => self.u1[n],
            Half::Positive => self.u1_pos[n],
            Half::Negative => self.u1_neg[n],
        }
    }

    /// Scalar moment <u1^a u2^b u3^c xi^(2d)> (unit density).
    #[inline]
    pub fn scalar(&self, half: Half, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.m1(half, a) * self.u2[b] * self.u3[c] * self.xi[d]
    }

    /// Moment vector <u1^a u2^b u3^c xi^(2d) psi> (unit density), where
    /// psi = (1, u1, u2, u3, (u^2 + xi^2)/2).
    pub fn psi(&self, half: Half, a: usize, b: usize, c: usize, d: usize) -> [f64; 5] {
        let base = self.scalar(half, a, b, c, d);
        [
            base,
            self.scalar(half, a + 1, b, c, d),
            self.scalar(half, a, b + 1, c, d),
            self.scalar(half, a, b, c + 1, d),
            0.5 * (self.scalar(half, a + 2, b, c, d)
                + self.scalar(half, a, b + 2, c, d)
                + self.scalar(half, a, b, c + 2, d)
                + self.scalar(half, a, b, c, d + 1)),
        ]
    }

    /// Moment vector <s u1^a u2^b u3^c psi> for a microslope expansion s.
    pub fn slope_psi(&self, half: Half, s: &MicroSlope, a: usize, b: usize, c: usize) -> [f64; 5] {
        let mut out = [0.0; 5];
        let p0 = self.psi(half, a, b, c, 0);
        let p1 = self.psi(half, a + 1, b, c, 0);
        let p2 = self.psi(half, a, b + 1, c, 0);
        let p3 = self.psi(half, a, b, c + 1, 0);
        let pe = {
            let q1 = self.psi(half, a + 2, b, c, 0);
            let q2 = self.psi(half, a, b + 2, c, 0);
            let q3 = self.psi(half, a, b, c + 2, 0);
            let qx = self.psi(half, a, b, c, 1);
            let mut e = [0.0; 5];
            for i in 0..5 {
                e[i] = 0.5 * (q1[i] + q2[i] + q3[i] + qx[i]);
            }
            e
        };
        for i in 0..5 {
            out[i] = s.0[0] * p0[i] + s.0[1] * p1[i] + s.0[2] * p2[i] + s.0[3] * p3[i]
                + s.0[4] * pe[i];
        }
        out
    }

    /// Conservative state carried by a half space: rho * <u1^0 psi>_half.
    pub fn half_state(&self, half: Half) -> Conserved {
        let p = self.psi(half, 0, 0, 0, 0);
        Conserved([
            self.rho * p[0],
            self.rho * p[1],
            self.rho * p[2],
            self.rho * p[3],
            self.rho * p[4],
        ])
    }
}

/// Expansion coefficients of a Maxwellian derivative over the collision
/// invariants: s = s1 + s2 u1 + s3 u2 + s4 u3 + s5 (u^2 + xi^2)/2.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MicroSlope(pub [f64; 5]);

/// Solve <a psi> = dw for the microslope a in closed form.
pub fn solve_microslope(eq: &EquilibriumState, dw: &Conserved) -> MicroSlope {
    let inv_rho = 1.0 / eq.rho;
    let h: [f64; 5] = [
        dw.0[0] * inv_rho,
        dw.0[1] * inv_rho,
        dw.0[2] * inv_rho,
        dw.0[3] * inv_rho,
        dw.0[4] * inv_rho,
    ];
    let [u, v, w] = eq.vel;
    let lambda = eq.lambda;
    let kp3 = eq.k_internal + 3.0;
    let q2 = u * u + v * v + w * w;
    let r1 = h[1] - u * h[0];
    let r2 = h[2] - v * h[0];
    let r3 = h[3] - w * h[0];
    let r4 = 2.0 * h[4] - (q2 + kp3 / (2.0 * lambda)) * h[0];
    let s5 = 4.0 * lambda * lambda / kp3 * (r4 - 2.0 * (u * r1 + v * r2 + w * r3));
    let s2 = 2.0 * lambda * r1 - u * s5;
    let s3 = 2.0 * lambda * r2 - v * s5;
    let s4 = 2.0 * lambda * r3 - w * s5;
    let ebar = 0.5 * (q2 + kp3 / (2.0 * lambda));
    let s1 = h[0] - u * s2 - v * s3 - w * s4 - s5 * ebar;
    MicroSlope([s1, s2, s3, s4, s5])
}

/// Moment <(a_x1 u1 + a_x2 u2 + a_x3 u3) psi> of directional microslopes,
/// scaled by density.
pub fn slope_u_moment(tab: &MomentTable, a: &[MicroSlope; 3]) -> Conserved {
    let m1 = tab.slope_psi(Half::Full, &a[0], 1, 0, 0);
    let m2 = tab.slope_psi(Half::Full, &a[1], 0, 1, 0);
    let m3 = tab.slope_psi(Half::Full, &a[2], 0, 0, 1);
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = tab.rho * (m1[i] + m2[i] + m3[i]);
    }
    Conserved(out)
}

/// Time microslope from the compatibility condition
/// <A + a_x1 u1 + a_x2 u2 + a_x3 u3> = 0.
pub fn solve_time_slope(
    eq: &EquilibriumState,
    tab: &MomentTable,
    a: &[MicroSlope; 3],
) -> MicroSlope {
    let rhs = -slope_u_moment(tab, a);
    solve_microslope(eq, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq_state(rho: f64, vel: Vec3, p: f64, gamma: f64) -> EquilibriumState {
        cons_to_equilibrium(&Conserved::from_primitive(rho, vel, p, gamma), gamma).unwrap()
    }

    #[test]
    fn lambda_and_internal_dof() {
        let eq = eq_state(1.0, [0.0; 3], 1.0, 1.4);
        assert!((eq.lambda - 0.5).abs() < 1e-14);
        assert!((eq.k_internal - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_of_moving_state() {
        let w = Conserved::from_primitive(1.0, [1.0, 1.0, 1.0], 1.0, 1.4);
        assert!((w.energy() - 4.0).abs() < 1e-14);
        let eq = cons_to_equilibrium(&w, 1.4).unwrap();
        assert!((eq.lambda - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_energy_below_kinetic() {
        let w = Conserved([1.0, 2.0, 0.0, 0.0, 1.5]);
        assert!(cons_to_equilibrium(&w, 1.4).is_err());
    }

    #[test]
    fn table_symmetry_at_rest() {
        let eq = eq_state(1.0, [0.0; 3], 0.5, 1.4); // lambda = 1
        assert!((eq.lambda - 1.0).abs() < 1e-14);
        let t = moment_table(&eq);
        assert!((t.u1[2] - 0.5).abs() < 1e-14);
        assert!((t.u1_pos[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn table_recursion_values() {
        let eq = eq_state(1.0, [1.0, 0.0, 0.0], 0.5, 1.4); // lambda = 1
        let t = moment_table(&eq);
        assert!((t.u1[1] - 1.0).abs() < 1e-14);
        assert!((t.u1[2] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn half_moments_partition_full() {
        for &(u, lam) in &[(0.3, 0.8), (-1.7, 2.5), (4.0, 0.3), (0.0, 1.0)] {
            let eq = EquilibriumState {
                rho: 1.0,
                vel: [u, 0.2, -0.4],
                lambda: lam,
                k_internal: 2.0,
                gamma: 1.4,
            };
            let t = moment_table(&eq);
            for n in 0..NMOM {
                let err = (t.u1_pos[n] + t.u1_neg[n] - t.u1[n]).abs();
                assert!(
                    err <= 1e-13 * t.u1[n].abs().max(1.0),
                    "n={n} u={u} lam={lam}: {err:.3e}"
                );
            }
        }
    }

    #[test]
    fn conservation_closure() {
        let w = Conserved::from_primitive(1.3, [0.5, -0.2, 0.8], 2.0, 1.4);
        let eq = cons_to_equilibrium(&w, 1.4).unwrap();
        let t = moment_table(&eq);
        let back = t.half_state(Half::Full);
        for i in 0..5 {
            assert!(
                (back.0[i] - w.0[i]).abs() <= 1e-13 * w.abs_max(),
                "component {i}"
            );
        }
        let eq_back = eq.conserved();
        for i in 0..5 {
            assert!((eq_back.0[i] - w.0[i]).abs() <= 1e-13 * w.abs_max());
        }
    }

    #[test]
    fn microslope_round_trip() {
        let eq = eq_state(1.2, [0.4, -0.3, 0.9], 1.7, 1.4);
        let t = moment_table(&eq);
        let dw = Conserved([0.3, -0.2, 0.15, 0.7, -0.4]);
        let a = solve_microslope(&eq, &dw);
        let m = t.slope_psi(Half::Full, &a, 0, 0, 0);
        for i in 0..5 {
            assert!(
                (eq.rho * m[i] - dw.0[i]).abs() <= 1e-12,
                "component {i}: {} vs {}",
                eq.rho * m[i],
                dw.0[i]
            );
        }
    }

    #[test]
    fn zero_gradient_gives_zero_slopes() {
        let eq = eq_state(1.0, [0.3, 0.0, 0.0], 1.0, 1.4);
        let a = solve_microslope(&eq, &Conserved::ZERO);
        assert_eq!(a, MicroSlope::default());
        let t = moment_table(&eq);
        let big_a = solve_time_slope(&eq, &t, &[MicroSlope::default(); 3]);
        assert_eq!(big_a, MicroSlope::default());
    }

    #[test]
    fn time_slope_compatibility() {
        let eq = eq_state(1.4, [0.7, 0.2, -0.5], 2.3, 1.4);
        let t = moment_table(&eq);
        let a = [
            solve_microslope(&eq, &Conserved([0.2, 0.1, -0.3, 0.05, 0.4])),
            solve_microslope(&eq, &Conserved([-0.1, 0.3, 0.2, -0.2, 0.1])),
            solve_microslope(&eq, &Conserved([0.05, -0.15, 0.1, 0.3, -0.2])),
        ];
        let big_a = solve_time_slope(&eq, &t, &a);
        let mut total = slope_u_moment(&t, &a);
        let a_mom = t.slope_psi(Half::Full, &big_a, 0, 0, 0);
        for i in 0..5 {
            total.0[i] += eq.rho * a_mom[i];
            assert!(total.0[i].abs() <= 1e-12, "component {i}: {}", total.0[i]);
        }
    }
}
