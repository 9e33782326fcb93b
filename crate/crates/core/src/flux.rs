//! Second-order time-dependent gas-kinetic interface flux.
//!
//! At each face quadrature point the integral solution of the BGK equation
//! is assembled from an upwind kinetic part (the reconstructed left/right
//! Maxwellians with their Chapman-Enskog corrections) and an equilibrium
//! part relaxing towards the central state. Its velocity moments give the
//! time-integrated fluxes over two horizons plus the time-accurate
//! interface state used for the slope update.

use crate::kinetic::{
    cons_to_equilibrium, moment_table, solve_microslope, solve_time_slope, EquilibriumState, Half,
    MicroSlope, MomentTable,
};
use crate::state::Conserved;
use crate::vec3::{cross, normalize, Vec3};
use crate::Result;

/// Orthonormal face triad; `n` is the unit normal.
#[derive(Debug, Clone, Copy)]
pub struct FaceFrame {
    pub n: Vec3,
    pub t1: Vec3,
    pub t2: Vec3,
}

impl FaceFrame {
    pub fn from_normal(n: Vec3) -> Self {
        // Pick the axis least aligned with n to seed the first tangent.
        let ax = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
            [1.0, 0.0, 0.0]
        } else if n[1].abs() <= n[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let t1 = normalize(cross(n, ax));
        let t2 = cross(n, t1);
        FaceFrame { n, t1, t2 }
    }

    #[inline]
    fn rows(&self) -> [Vec3; 3] {
        [self.n, self.t1, self.t2]
    }

    /// Rotate a conservative state into the face frame.
    pub fn to_local(&self, w: &Conserved) -> Conserved {
        let m = w.momentum();
        let r = self.rows();
        Conserved([
            w.0[0],
            crate::vec3::dot(r[0], m),
            crate::vec3::dot(r[1], m),
            crate::vec3::dot(r[2], m),
            w.0[4],
        ])
    }

    /// Rotate a local-frame conservative vector (state or flux) back to the
    /// global frame.
    pub fn to_global(&self, w: &Conserved) -> Conserved {
        let r = self.rows();
        let mut m = [0.0; 3];
        for g in 0..3 {
            m[g] = r[0][g] * w.0[1] + r[1][g] * w.0[2] + r[2][g] * w.0[3];
        }
        Conserved([w.0[0], m[0], m[1], m[2], w.0[4]])
    }

    /// Rotate global directional gradients of the global state into
    /// directional gradients (along n, t1, t2) of the local state.
    pub fn gradients_to_local(&self, grad: &[Conserved; 3]) -> [Conserved; 3] {
        let r = self.rows();
        let mut out = [Conserved::ZERO; 3];
        for i in 0..3 {
            for comp in [0usize, 4] {
                let mut v = 0.0;
                for g in 0..3 {
                    v += r[i][g] * grad[g].0[comp];
                }
                out[i].0[comp] = v;
            }
            for j in 0..3 {
                let mut v = 0.0;
                for g in 0..3 {
                    for k in 0..3 {
                        v += r[i][g] * r[j][k] * grad[g].0[1 + k];
                    }
                }
                out[i].0[1 + j] = v;
            }
        }
        out
    }
}

/// Physical and numerical collision times.
#[derive(Debug, Clone, Copy)]
pub struct CollisionTimeModel {
    pub mu: f64,
    /// Smooth fraction of the time step added to the numerical time.
    pub c1: f64,
    /// Amplification of the interface pressure jump.
    pub c2: f64,
}

impl Default for CollisionTimeModel {
    fn default() -> Self {
        CollisionTimeModel { mu: 0.0, c1: 0.05, c2: 1.0 }
    }
}

/// Returns (tau, tau_num): the physical relaxation time mu / p_c and its
/// numerically augmented counterpart used in the exponential factors.
pub fn collision_time(
    model: &CollisionTimeModel,
    p_l: f64,
    p_r: f64,
    p_c: f64,
    dt: f64,
) -> (f64, f64) {
    let tau = model.mu / p_c;
    let tau_num = tau + model.c1 * dt + model.c2 * (p_l - p_r).abs() / (p_l + p_r) * dt;
    (tau, tau_num)
}

/// Central interface state: upwind half moments of the left and right
/// Maxwellians.
pub fn central_state(tab_l: &MomentTable, tab_r: &MomentTable) -> Conserved {
    tab_l.half_state(Half::Positive) + tab_r.half_state(Half::Negative)
}

/// Input at one face quadrature point, already rotated to the face frame.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceInput {
    pub w_l: Conserved,
    pub w_r: Conserved,
    /// Directional gradients of the local state along (n, t1, t2).
    pub dw_l: [Conserved; 3],
    pub dw_r: [Conserved; 3],
    pub dt: f64,
    /// Time at which the interface state `w_point` is sampled. Usually dt;
    /// the second stage of the two-stage update samples at dt/2 so the
    /// state lands on t^{n+1}.
    pub point_time: f64,
    pub gamma: f64,
}

/// Per-point flux result in the face frame.
#[derive(Debug, Clone, Copy)]
pub struct FluxSample {
    /// Integral of the flux over [0, dt], per unit area.
    pub flux_full: Conserved,
    /// Integral of the flux over [0, dt/2].
    pub flux_half: Conserved,
    /// Time-accurate interface state at t = dt.
    pub w_point: Conserved,
    /// False when the interface state came out non-physical; the slope
    /// update then sees the central state at this point instead.
    pub w_point_ok: bool,
}

struct TimeIntegrals {
    /// exp(-T/tau_num)
    e: f64,
    /// 1 - exp(-T/tau_num), accurate for small exponents
    em: f64,
    i1: f64,
    i2: f64,
    c1: f64,
    c2: f64,
    c3: f64,
}

fn time_integrals(t: f64, tau_num: f64) -> TimeIntegrals {
    if tau_num <= 0.0 {
        return TimeIntegrals {
            e: 0.0,
            em: 1.0,
            i1: 0.0,
            i2: 0.0,
            c1: t,
            c2: 0.0,
            c3: 0.5 * t * t,
        };
    }
    let x = t / tau_num;
    let e = (-x).exp();
    let em = -(-x).exp_m1();
    TimeIntegrals {
        e,
        em,
        i1: tau_num * em,
        i2: tau_num * tau_num * em - tau_num * t * e,
        c1: t - tau_num * em,
        c2: 2.0 * tau_num * tau_num * em - tau_num * t * (1.0 + e),
        c3: 0.5 * t * t - tau_num * t + tau_num * tau_num * em,
    }
}

struct Side {
    eq: EquilibriumState,
    tab: MomentTable,
    a: [MicroSlope; 3],
}

impl Side {
    fn build(w: &Conserved, dw: &[Conserved; 3], gamma: f64) -> Result<Side> {
        let eq = cons_to_equilibrium(w, gamma)?;
        let tab = moment_table(&eq);
        let a = [
            solve_microslope(&eq, &dw[0]),
            solve_microslope(&eq, &dw[1]),
            solve_microslope(&eq, &dw[2]),
        ];
        Ok(Side { eq, tab, a })
    }

    /// rho * <a_xi u_i u1^e psi> over the half space, e in {0, 1}.
    fn slope_u_moment(&self, half: Half, e: usize) -> [f64; 5] {
        let m1 = self.tab.slope_psi(half, &self.a[0], 1 + e, 0, 0);
        let m2 = self.tab.slope_psi(half, &self.a[1], e, 1, 0);
        let m3 = self.tab.slope_psi(half, &self.a[2], e, 0, 1);
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = self.eq.rho * (m1[i] + m2[i] + m3[i]);
        }
        out
    }

    /// rho * <s u1^e psi> over the half space.
    fn scaled_slope_psi(&self, half: Half, s: &MicroSlope, e: usize) -> [f64; 5] {
        let p = self.tab.slope_psi(half, s, e, 0, 0);
        let mut v = [0.0; 5];
        for i in 0..5 {
            v[i] = self.eq.rho * p[i];
        }
        v
    }
}

#[inline]
fn axpy(acc: &mut [f64; 5], s: f64, v: &[f64; 5]) {
    for i in 0..5 {
        acc[i] += s * v[i];
    }
}

/// Evaluate the time-integrated gas-kinetic flux and the time-accurate
/// interface state at one quadrature point (face-local frame).
pub fn gks_flux_point(input: &InterfaceInput, model: &CollisionTimeModel) -> Result<FluxSample> {
    let gamma = input.gamma;
    let left = Side::build(&input.w_l, &input.dw_l, gamma)?;
    let right = Side::build(&input.w_r, &input.dw_r, gamma)?;

    // Central equilibrium from upwind half moments, with its slopes blended
    // by the same kinetic weighting.
    let w_c = central_state(&left.tab, &right.tab);
    let eq_c = cons_to_equilibrium(&w_c, gamma)?;
    let tab_c = moment_table(&eq_c);
    let mut a_c = [MicroSlope::default(); 3];
    for i in 0..3 {
        let ml = left.tab.slope_psi(Half::Positive, &left.a[i], 0, 0, 0);
        let mr = right.tab.slope_psi(Half::Negative, &right.a[i], 0, 0, 0);
        let mut dw = [0.0; 5];
        for k in 0..5 {
            dw[k] = left.eq.rho * ml[k] + right.eq.rho * mr[k];
        }
        a_c[i] = solve_microslope(&eq_c, &Conserved(dw));
    }
    let big_a_c = solve_time_slope(&eq_c, &tab_c, &a_c);

    let (tau, tau_num) = collision_time(
        model,
        left.eq.pressure(),
        right.eq.pressure(),
        eq_c.pressure(),
        input.dt,
    );

    // Time slopes of the kinetic sides only enter the viscous
    // Chapman-Enskog correction.
    let (big_a_l, big_a_r) = if tau > 0.0 {
        (
            solve_time_slope(&left.eq, &left.tab, &left.a),
            solve_time_slope(&right.eq, &right.tab, &right.a),
        )
    } else {
        (MicroSlope::default(), MicroSlope::default())
    };

    // Equilibrium-part moments (flux weighted by u1; state without).
    let rho_c = eq_c.rho;
    let cu_psi = tab_c.psi(Half::Full, 1, 0, 0, 0);
    let c_psi = tab_c.psi(Half::Full, 0, 0, 0, 0);
    let slope_u_c = |e: usize| -> [f64; 5] {
        let m1 = tab_c.slope_psi(Half::Full, &a_c[0], 1 + e, 0, 0);
        let m2 = tab_c.slope_psi(Half::Full, &a_c[1], e, 1, 0);
        let m3 = tab_c.slope_psi(Half::Full, &a_c[2], e, 0, 1);
        let mut v = [0.0; 5];
        for i in 0..5 {
            v[i] = m1[i] + m2[i] + m3[i];
        }
        v
    };
    let c_slope_u_flux = slope_u_c(1);
    let c_slope_u_state = slope_u_c(0);
    let c_ta_flux = tab_c.slope_psi(Half::Full, &big_a_c, 1, 0, 0);
    let c_ta_state = tab_c.slope_psi(Half::Full, &big_a_c, 0, 0, 0);

    // Kinetic-part moments per upwind side (all scaled by density).
    let k_state_l = left.tab.half_state(Half::Positive).0;
    let k_state_r = right.tab.half_state(Half::Negative).0;
    let k_flux_l = {
        let p = left.tab.psi(Half::Positive, 1, 0, 0, 0);
        let mut v = [0.0; 5];
        for i in 0..5 {
            v[i] = left.eq.rho * p[i];
        }
        v
    };
    let k_flux_r = {
        let p = right.tab.psi(Half::Negative, 1, 0, 0, 0);
        let mut v = [0.0; 5];
        for i in 0..5 {
            v[i] = right.eq.rho * p[i];
        }
        v
    };
    let k_slope_flux_l = left.slope_u_moment(Half::Positive, 1);
    let k_slope_flux_r = right.slope_u_moment(Half::Negative, 1);
    let k_slope_state_l = left.slope_u_moment(Half::Positive, 0);
    let k_slope_state_r = right.slope_u_moment(Half::Negative, 0);
    let (k_ta_flux_l, k_ta_flux_r, k_ta_state_l, k_ta_state_r) = if tau > 0.0 {
        (
            left.scaled_slope_psi(Half::Positive, &big_a_l, 1),
            right.scaled_slope_psi(Half::Negative, &big_a_r, 1),
            left.scaled_slope_psi(Half::Positive, &big_a_l, 0),
            right.scaled_slope_psi(Half::Negative, &big_a_r, 0),
        )
    } else {
        ([0.0; 5], [0.0; 5], [0.0; 5], [0.0; 5])
    };

    let flux_for = |t: f64| -> Conserved {
        let ti = time_integrals(t, tau_num);
        let mut f = [0.0; 5];
        axpy(&mut f, rho_c * ti.c1, &cu_psi);
        axpy(&mut f, rho_c * ti.c2, &c_slope_u_flux);
        axpy(&mut f, rho_c * ti.c3, &c_ta_flux);
        axpy(&mut f, ti.i1, &k_flux_l);
        axpy(&mut f, ti.i1, &k_flux_r);
        axpy(&mut f, -ti.i1 * tau, &k_slope_flux_l);
        axpy(&mut f, -ti.i1 * tau, &k_slope_flux_r);
        axpy(&mut f, -ti.i1 * tau, &k_ta_flux_l);
        axpy(&mut f, -ti.i1 * tau, &k_ta_flux_r);
        axpy(&mut f, -ti.i2, &k_slope_flux_l);
        axpy(&mut f, -ti.i2, &k_slope_flux_r);
        Conserved(f)
    };

    let flux_full = flux_for(input.dt);
    let flux_half = flux_for(0.5 * input.dt);

    // Interface state at the requested sampling time.
    let tp = input.point_time;
    let ti = time_integrals(tp, tau_num);
    let mut wp = [0.0; 5];
    axpy(&mut wp, rho_c * ti.em, &c_psi);
    axpy(&mut wp, rho_c * (tp * ti.e - tau_num * ti.em), &c_slope_u_state);
    axpy(&mut wp, rho_c * (tp - tau_num * ti.em), &c_ta_state);
    axpy(&mut wp, ti.e, &k_state_l);
    axpy(&mut wp, ti.e, &k_state_r);
    axpy(&mut wp, -ti.e * tau, &k_slope_state_l);
    axpy(&mut wp, -ti.e * tau, &k_slope_state_r);
    axpy(&mut wp, -ti.e * tau, &k_ta_state_l);
    axpy(&mut wp, -ti.e * tau, &k_ta_state_r);
    axpy(&mut wp, -ti.e * tp, &k_slope_state_l);
    axpy(&mut wp, -ti.e * tp, &k_slope_state_r);
    let mut w_point = Conserved(wp);
    let w_point_ok = w_point.is_physical();
    if !w_point_ok {
        w_point = w_c;
    }

    Ok(FluxSample { flux_full, flux_half, w_point, w_point_ok })
}

/// Recover the flux value and its time derivative at t = 0 from the two
/// time-integrated fluxes, assuming F(t) = F0 + t dF.
pub fn flux_linear_fit(full: &Conserved, half: &Conserved, dt: f64) -> (Conserved, Conserved) {
    let f0 = (*half * 4.0 - *full) * (1.0 / dt);
    let dfdt = (*full * 4.0 - *half * 8.0) * (1.0 / (dt * dt));
    (f0, dfdt)
}
