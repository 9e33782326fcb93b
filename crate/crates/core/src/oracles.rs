//! Independent reference routes used by the verification suites: numerical
//! quadrature of Maxwellian moments and a dense linear-algebra microslope
//! solve. Nothing here is called by the solver; these exist so tests can
//! check the closed-form implementations against a second path.

use crate::kinetic::EquilibriumState;
use crate::state::Conserved;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Initial guess (Chebyshev-like).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrate `f(u) * M(u; mean, lambda)` over [lo, hi] for a unit-density
/// 1D Maxwellian factor.
pub fn maxwellian_integral(
    mean: f64,
    lambda: f64,
    lo: f64,
    hi: f64,
    n: usize,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    let norm = (lambda / std::f64::consts::PI).sqrt();
    let mut acc = 0.0;
    for (x, w) in gauss_legendre(n) {
        let u = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x;
        acc += w * f(u) * (-lambda * (u - mean) * (u - mean)).exp();
    }
    acc * norm * 0.5 * (hi - lo)
}

/// <u^n> of the 1D Maxwellian factor by quadrature; `half` restricts to a
/// sign of u (+1, -1) or takes the full line (0).
pub fn moment_by_quadrature(mean: f64, lambda: f64, n_pow: usize, half: i32) -> f64 {
    let reach = 30.0 / lambda.sqrt().max(1e-3);
    let (lo, hi) = match half {
        0 => (mean - reach, mean + reach),
        1 => (0.0, (mean + reach).max(reach)),
        _ => ((mean - reach).min(-reach), 0.0),
    };
    maxwellian_integral(mean, lambda, lo, hi, 220, |u| u.powi(n_pow as i32))
}

/// Dense 5x5 microslope solve: assemble <psi psi^T> by quadrature moments
/// and solve with LU, entirely bypassing the closed-form elimination.
pub fn dense_microslope(eq: &EquilibriumState, dw: &Conserved) -> [f64; 5] {
    use nalgebra::{DMatrix, DVector};
    // psi_i expressed over the monomial basis {1, u1, u2, u3, u1^2, u2^2,
    // u3^2, xi^2}; <psi_i psi_j> expands into products of 1D moments.
    let m1: Vec<f64> = (0..5).map(|k| moment_by_quadrature(eq.vel[0], eq.lambda, k, 0)).collect();
    let m2: Vec<f64> = (0..5).map(|k| moment_by_quadrature(eq.vel[1], eq.lambda, k, 0)).collect();
    let m3: Vec<f64> = (0..5).map(|k| moment_by_quadrature(eq.vel[2], eq.lambda, k, 0)).collect();
    let k = eq.k_internal;
    let xi = [1.0, k / (2.0 * eq.lambda), (k * k + 2.0 * k) / (4.0 * eq.lambda * eq.lambda)];
    // Generic scalar moment <u1^a u2^b u3^c xi^(2d)>.
    let mom = |a: usize, b: usize, c: usize, d: usize| m1[a] * m2[b] * m3[c] * xi[d];
    let e_mom = |a: usize, b: usize, c: usize| {
        0.5 * (mom(a + 2, b, c, 0) + mom(a, b + 2, c, 0) + mom(a, b, c + 2, 0) + mom(a, b, c, 1))
    };
    // Row of <psi * u1^a u2^b u3^c ...> for psi entries.
    let psi_row = |a: usize, b: usize, c: usize| -> [f64; 5] {
        [mom(a, b, c, 0), mom(a + 1, b, c, 0), mom(a, b + 1, c, 0), mom(a, b, c + 1, 0), e_mom(a, b, c)]
    };
    let row0 = psi_row(0, 0, 0);
    let row1 = psi_row(1, 0, 0);
    let row2 = psi_row(0, 1, 0);
    let row3 = psi_row(0, 0, 1);
    // <psi_i * (u^2 + xi^2)/2>: energy-weighted row needs fourth moments.
    let mut row4 = [0.0; 5];
    for (j, val) in row4.iter_mut().enumerate() {
        let term = |a: usize, b: usize, c: usize, d: usize| match j {
            0 => mom(a, b, c, d),
            1 => mom(a + 1, b, c, d),
            2 => mom(a, b + 1, c, d),
            3 => mom(a, b, c + 1, d),
            _ => 0.5 * (mom(a + 2, b, c, d) + mom(a, b + 2, c, d) + mom(a, b, c + 2, d) + mom(a, b, c, d + 1)),
        };
        *val = 0.5 * (term(2, 0, 0, 0) + term(0, 2, 0, 0) + term(0, 0, 2, 0) + term(0, 0, 0, 1));
    }
    let mut m = DMatrix::<f64>::zeros(5, 5);
    for (i, row) in [row0, row1, row2, row3, row4].iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    let rhs = DVector::from_iterator(5, dw.0.iter().map(|v| v / eq.rho));
    let sol = m.lu().solve(&rhs).expect("moment matrix is SPD");
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = sol[i];
    }
    out
}

