//! Compact third-order reconstruction over the von Neumann stencil.
//!
//! Every cell carries a quadratic polynomial per conserved variable over
//! the zero-mean basis. Two interchangeable paths build it from the cell
//! averages and the evolved cell-averaged slopes:
//!
//! * the original constrained least-squares formulation, which enforces
//!   neighbor averages exactly, satisfies neighbor slopes in a
//!   least-squares sense, and persists the per-cell system matrix, and
//! * the two-step formulation: linear least-squares fits of the three
//!   slope fields fix the quadratic terms, which then move to the
//!   right-hand side so one more linear fit of the shifted averages yields
//!   the linear terms. Only a 3x3 normal system, assembled on the fly, is
//!   ever factored - nothing is persisted beyond the polynomial itself.
//!
//! Nonlinear limiting combines the quadratic polynomial with a
//! discontinuity-feedback-scaled Green-Gauss linear polynomial through
//! multi-resolution WENO weights.

mod dense;
mod original;

pub use original::OriginalStore;

use crate::mesh::{shifted_monomial_means, Cell, Mesh};
use crate::solver::CellDof;
use crate::state::Conserved;
use crate::vec3::{dot, sub, Vec3};
use arrayvec::ArrayVec;
use rayon::prelude::*;

/// Which large-stencil path builds the quadratic polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconPath {
    TwoStep,
    Original,
}

/// Resolution of the quadratic-coefficient identities in the two-step
/// path. `Matched` uses the derivative-matching values (a4 = b1/2,
/// a7 = (b2 + c1)/2) that reproduce global quadratics exactly on the plain
/// monomial basis; `Printed` keeps the alternative convention (a4 = b1,
/// a7 = (b1 + c1)/2) selectable for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadIdentities {
    Matched,
    Printed,
}

#[derive(Debug, Clone, Copy)]
pub struct ReconConfig {
    pub path: ReconPath,
    pub weno: bool,
    pub df: bool,
    pub quad_identities: QuadIdentities,
    /// Exponent applied to the normalized indicator difference before it
    /// enters the nonlinear weights.
    pub sigma_power: f64,
    pub gamma: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            path: ReconPath::TwoStep,
            weno: true,
            df: true,
            quad_identities: QuadIdentities::Matched,
            sigma_power: 2.0,
            gamma: 1.4,
        }
    }
}

pub const WENO_EPS: f64 = 1e-5;
pub const WENO_FLOOR: f64 = 1e-40;

/// Quadratic polynomial coefficients per conserved variable over the
/// zero-mean basis {1, dx, dy, dz, dx^2, dy^2, dz^2, dxdy, dydz, dxdz}
/// (each non-constant entry minus its cell mean).
#[derive(Debug, Clone, Copy)]
pub struct QuadPoly {
    pub coef: [[f64; 10]; 5],
}

impl Default for QuadPoly {
    fn default() -> Self {
        QuadPoly { coef: [[0.0; 10]; 5] }
    }
}

/// Basis values at offset dx from the cell centroid.
#[inline]
pub fn basis_values(dx: Vec3, m: &[f64; 9]) -> [f64; 10] {
    [
        1.0,
        dx[0] - m[0],
        dx[1] - m[1],
        dx[2] - m[2],
        dx[0] * dx[0] - m[3],
        dx[1] * dx[1] - m[4],
        dx[2] * dx[2] - m[5],
        dx[0] * dx[1] - m[6],
        dx[1] * dx[2] - m[7],
        dx[0] * dx[2] - m[8],
    ]
}

/// Gradients of the nine non-constant basis functions at offset dx.
#[inline]
pub fn basis_gradients(dx: Vec3) -> [[f64; 3]; 9] {
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [2.0 * dx[0], 0.0, 0.0],
        [0.0, 2.0 * dx[1], 0.0],
        [0.0, 0.0, 2.0 * dx[2]],
        [dx[1], dx[0], 0.0],
        [0.0, dx[2], dx[1]],
        [dx[2], 0.0, dx[0]],
    ]
}

impl QuadPoly {
    /// A purely linear polynomial from a mean state and a gradient.
    pub fn linear(w0: &Conserved, grad: &[Conserved; 3]) -> Self {
        let mut coef = [[0.0; 10]; 5];
        for v in 0..5 {
            coef[v][0] = w0.0[v];
            for d in 0..3 {
                coef[v][1 + d] = grad[d].0[v];
            }
        }
        QuadPoly { coef }
    }

    /// Value and gradient of all five variables at global position x.
    pub fn eval(&self, cell: &Cell, x: Vec3) -> (Conserved, [Conserved; 3]) {
        let dx = sub(x, cell.centroid);
        let b = basis_values(dx, &cell.moments);
        let gb = basis_gradients(dx);
        let mut w = [0.0; 5];
        let mut g = [[0.0; 5]; 3];
        for v in 0..5 {
            let c = &self.coef[v];
            let mut acc = 0.0;
            for j in 0..10 {
                acc += c[j] * b[j];
            }
            w[v] = acc;
            for d in 0..3 {
                let mut ga = 0.0;
                for j in 0..9 {
                    ga += c[1 + j] * gb[j][d];
                }
                g[d][v] = ga;
            }
        }
        (
            Conserved(w),
            [Conserved(g[0]), Conserved(g[1]), Conserved(g[2])],
        )
    }

    /// Cell average of the polynomial (the zero-mean construction makes it
    /// the constant coefficient).
    pub fn mean(&self) -> Conserved {
        Conserved([
            self.coef[0][0],
            self.coef[1][0],
            self.coef[2][0],
            self.coef[3][0],
            self.coef[4][0],
        ])
    }
}

/// One neighbor of the target cell, with its basis means about the
/// target's centroid.
#[derive(Debug, Clone, Copy)]
pub struct StencilEntry {
    pub cell: usize,
    /// Means of the target-centered basis monomials over this neighbor
    /// minus the target's own moments (i.e. means of the zero-mean basis).
    pub basis_means: [f64; 9],
}

/// Gather the von Neumann stencil of a full-stencil cell.
pub fn gather_stencil(mesh: &Mesh, ci: usize) -> ArrayVec<StencilEntry, 6> {
    let cell = &mesh.cells[ci];
    let mut out = ArrayVec::new();
    for &f in &cell.faces {
        let (nb, off) = mesh.neighbor_across(ci, f).expect("full stencil");
        let sm = shifted_monomial_means(&mesh.cells[nb], off, cell.centroid);
        let mut bm = [0.0; 9];
        for j in 0..9 {
            bm[j] = sm[j] - cell.moments[j];
        }
        out.push(StencilEntry { cell: nb, basis_means: bm });
    }
    out
}

/// The 3x3 normal-equation operator of the linear least-squares fit over
/// the neighbor mean offsets.
pub struct CellLsOperator {
    pub rows: ArrayVec<[f64; 3], 6>,
    factor: Option<[[f64; 3]; 3]>,
}

impl CellLsOperator {
    pub fn build(stencil: &[StencilEntry]) -> Self {
        let mut rows = ArrayVec::new();
        let mut ata = [[0.0f64; 3]; 3];
        for s in stencil {
            let r = [s.basis_means[0], s.basis_means[1], s.basis_means[2]];
            for i in 0..3 {
                for j in 0..3 {
                    ata[i][j] += r[i] * r[j];
                }
            }
            rows.push(r);
        }
        let factor = dense::cholesky3(&ata);
        CellLsOperator { rows, factor }
    }

    pub fn is_ok(&self) -> bool {
        self.factor.is_some()
    }

    /// Solve min sum_m (v0 + g . delta_m - v_m)^2 for the gradient g.
    pub fn fit(&self, v0: f64, vm: &[f64]) -> Option<[f64; 3]> {
        let l = self.factor.as_ref()?;
        let mut rhs = [0.0; 3];
        for (r, &v) in self.rows.iter().zip(vm.iter()) {
            let res = v - v0;
            for i in 0..3 {
                rhs[i] += r[i] * res;
            }
        }
        Some(dense::cholesky3_solve(l, rhs))
    }
}

/// Green-Gauss linear reconstruction over the face means, scaled by the
/// discontinuity-feedback factor.
pub fn green_gauss_p1(
    mesh: &Mesh,
    ci: usize,
    w0: &Conserved,
    face_means: &[Conserved],
    alpha: f64,
) -> [Conserved; 3] {
    let cell = &mesh.cells[ci];
    let mut grad = [Conserved::ZERO; 3];
    for (k, &f) in cell.faces.iter().enumerate() {
        let face = &mesh.faces[f];
        let n = mesh.outward_normal(ci, f);
        let wf = (face_means[k] + *w0) * 0.5;
        for d in 0..3 {
            grad[d] += wf * (face.area * n[d]);
        }
    }
    let s = alpha / cell.volume;
    [grad[0] * s, grad[1] * s, grad[2] * s]
}

/// Smoothness indicator of a linear polynomial with gradient g.
pub fn beta_linear(g: [f64; 3], cell: &Cell) -> f64 {
    cell.volume.powf(2.0 / 3.0) * dot(g, g)
}

/// Smoothness indicator of a quadratic polynomial (one variable).
pub fn beta_quadratic(c: &[f64; 10], cell: &Cell) -> f64 {
    let m = &cell.moments;
    let vol = cell.volume;
    // First-derivative fields are linear: d/dx p = c0 + cv . dx.
    let deriv: [(f64, [f64; 3]); 3] = [
        (c[1], [2.0 * c[4], c[7], c[9]]),
        (c[2], [c[7], 2.0 * c[5], c[8]]),
        (c[3], [c[8], c[9], 2.0 * c[6]]),
    ];
    let m2 = [
        [m[3], m[6], m[8]],
        [m[6], m[4], m[7]],
        [m[8], m[7], m[5]],
    ];
    let mut grad_part = 0.0;
    for (c0, cv) in deriv {
        let mut q = c0 * c0;
        q += 2.0 * c0 * (cv[0] * m[0] + cv[1] * m[1] + cv[2] * m[2]);
        for i in 0..3 {
            for j in 0..3 {
                q += cv[i] * m2[i][j] * cv[j];
            }
        }
        grad_part += q;
    }
    let quad_part = 4.0 * (c[4] * c[4] + c[5] * c[5] + c[6] * c[6])
        + c[7] * c[7]
        + c[8] * c[8]
        + c[9] * c[9];
    vol.powf(-1.0 / 3.0) * vol * grad_part + vol.powf(1.0 / 3.0) * vol * quad_part
}

/// Multi-resolution WENO combination of the quadratic and linear
/// polynomials for one variable. Returns the limited coefficients and the
/// normalized weight of the quadratic candidate.
pub fn weno_combine(
    p2: &[f64; 10],
    q0: f64,
    p1_grad: [f64; 3],
    beta2: f64,
    beta1: f64,
    sigma_power: f64,
) -> ([f64; 10], f64) {
    let denom = q0 * q0 + beta1 + WENO_FLOOR;
    let b1t = beta1 / denom;
    let b2t = beta2 / denom;
    let sigma = (b2t - b1t).abs().powf(sigma_power);
    let g = 0.5;
    let wt1 = g * (1.0 + (sigma / (WENO_EPS + b1t)).powi(2));
    let wt2 = g * (1.0 + (sigma / (WENO_EPS + b2t)).powi(2));
    let w2 = wt2 / (wt1 + wt2);
    let w1 = wt1 / (wt1 + wt2);
    // P2 = 2 p2 - p1, P1 = p1 (gamma_1 = gamma_2 = 1/2).
    let mut p1 = [0.0; 10];
    p1[0] = q0;
    p1[1] = p1_grad[0];
    p1[2] = p1_grad[1];
    p1[3] = p1_grad[2];
    let mut out = [0.0; 10];
    for j in 0..10 {
        let big_p2 = 2.0 * p2[j] - p1[j];
        out[j] = w2 * big_p2 + w1 * p1[j];
    }
    (out, w2)
}

/// Discontinuity-feedback factor at one quadrature point from the
/// face-local left/right states.
pub fn df_point(w_l: &Conserved, w_r: &Conserved, gamma: f64) -> f64 {
    let p_l = w_l.pressure(gamma);
    let p_r = w_r.pressure(gamma);
    let c_l = (gamma * p_l / w_l.rho()).sqrt();
    let c_r = (gamma * p_r / w_r.rho()).sqrt();
    let v_l = w_l.velocity();
    let v_r = w_r.velocity();
    let man_l = v_l[0] / c_l;
    let man_r = v_r[0] / c_r;
    let mat_l = (v_l[1] * v_l[1] + v_l[2] * v_l[2]).sqrt() / c_l;
    let mat_r = (v_r[1] * v_r[1] + v_r[2] * v_r[2]).sqrt() / c_r;
    let dp = (p_l - p_r).abs();
    let d = dp / p_l + dp / p_r + (man_l - man_r).powi(2) + (mat_l - mat_r).powi(2);
    1.0 / (1.0 + d * d)
}

/// Quadratic coefficients from the three fitted slope-field gradients.
fn quad_from_slopes(bx: [f64; 3], by: [f64; 3], bz: [f64; 3], ids: QuadIdentities) -> [f64; 6] {
    match ids {
        QuadIdentities::Matched => [
            0.5 * bx[0],
            0.5 * by[1],
            0.5 * bz[2],
            0.5 * (bx[1] + by[0]),
            0.5 * (by[2] + bz[1]),
            0.5 * (bx[2] + bz[0]),
        ],
        QuadIdentities::Printed => [
            bx[0],
            by[1],
            bz[2],
            0.5 * (bx[0] + by[0]),
            0.5 * (by[2] + bz[1]),
            0.5 * (bx[2] + bz[0]),
        ],
    }
}

/// Two-step large-stencil reconstruction for all five variables.
/// Returns None if the shared least-squares operator is singular.
pub fn two_step_reconstruct(
    op: &CellLsOperator,
    stencil: &[StencilEntry],
    dof0: &CellDof,
    dofs: &[CellDof],
    ids: QuadIdentities,
) -> Option<[[f64; 10]; 5]> {
    if !op.is_ok() {
        return None;
    }
    let nf = stencil.len();
    let mut coef = [[0.0; 10]; 5];
    let mut vm = [0.0f64; 6];
    for v in 0..5 {
        // Step 1: fit the three evolved slope fields.
        let mut fitted = [[0.0f64; 3]; 3];
        for d in 0..3 {
            for (m, s) in stencil.iter().enumerate() {
                vm[m] = dofs[s.cell].grad[d].0[v];
            }
            fitted[d] = op.fit(dof0.grad[d].0[v], &vm[..nf])?;
        }
        let quad = quad_from_slopes(fitted[0], fitted[1], fitted[2], ids);

        // Step 2: move the quadratic contribution to the right-hand side
        // and fit the linear terms against the shifted neighbor averages.
        for (m, s) in stencil.iter().enumerate() {
            let mut shift = 0.0;
            for j in 0..6 {
                shift += quad[j] * s.basis_means[3 + j];
            }
            vm[m] = dofs[s.cell].w.0[v] - shift;
        }
        let lin = op.fit(dof0.w.0[v], &vm[..nf])?;

        coef[v][0] = dof0.w.0[v];
        coef[v][1] = lin[0];
        coef[v][2] = lin[1];
        coef[v][3] = lin[2];
        for j in 0..6 {
            coef[v][4 + j] = quad[j];
        }
    }
    Some(coef)
}

/// Reconstruction engine: owns the per-cell polynomials, the
/// discontinuity-feedback field, and (for the original path) the persisted
/// per-cell reconstruction matrices.
pub struct ReconEngine {
    pub cfg: ReconConfig,
    pub polys: Vec<QuadPoly>,
    /// Discontinuity feedback per cell; 1 everywhere when DF is off.
    pub alpha: Vec<f64>,
    /// Cells that fell back to the sub-stencil polynomial because of
    /// degenerate stencil geometry.
    pub fallback: Vec<bool>,
    original: Option<OriginalStore>,
    /// When enabled, the per-cell weight of the quadratic WENO candidate
    /// (worst variable) from the most recent sweep. Diagnostics only; not
    /// part of the scheme's persistent state.
    pub weights_diag: Option<Vec<f64>>,
}

impl ReconEngine {
    pub fn new(mesh: &Mesh, cfg: ReconConfig) -> crate::Result<Self> {
        let n = mesh.cells.len();
        let original = match cfg.path {
            ReconPath::Original => Some(OriginalStore::build(mesh)?),
            ReconPath::TwoStep => None,
        };
        Ok(ReconEngine {
            cfg,
            polys: vec![QuadPoly::default(); n],
            alpha: vec![1.0; n],
            fallback: vec![false; n],
            original,
            weights_diag: None,
        })
    }

    pub fn enable_weights_diag(&mut self) {
        self.weights_diag = Some(vec![f64::NAN; self.polys.len()]);
    }

    /// Number of persistent reconstruction doubles per cell: the stored
    /// zero-mean basis moments, the polynomial coefficients, the
    /// discontinuity-feedback factor, and (original path) the per-cell
    /// reconstruction matrix. Diagnostics buffers are excluded.
    pub fn persistent_reals_per_cell(&self, mesh: &Mesh) -> f64 {
        let n = mesh.cells.len() as f64;
        let moments = 9.0;
        let coefs = 50.0;
        let alpha = 1.0;
        let mats = self
            .original
            .as_ref()
            .map(|o| o.matrix_reals() as f64 / n)
            .unwrap_or(0.0);
        moments + coefs + alpha + mats
    }

    /// Total doubles persisted in reconstruction matrices (zero for the
    /// two-step path).
    pub fn persistent_matrix_reals(&self) -> usize {
        self.original.as_ref().map(|o| o.matrix_reals()).unwrap_or(0)
    }

    /// Rebuild every cell polynomial from the current degrees of freedom.
    /// `boundary_means` holds the ghost mean state per face (read only for
    /// boundary faces).
    pub fn reconstruct(&mut self, mesh: &Mesh, dofs: &[CellDof], boundary_means: &[Conserved]) {
        let cfg = self.cfg;
        let original = self.original.as_ref();
        let alpha = &self.alpha;
        let polys = &mut self.polys;
        let fallback = &mut self.fallback;
        let mut weights = self.weights_diag.as_mut();
        let weights_on = weights.is_some();

        let work = |ci: usize, poly: &mut QuadPoly, fb: &mut bool, wdiag: &mut f64| {
            let cell = &mesh.cells[ci];
            let dof0 = &dofs[ci];
            let a_i = if cfg.df { alpha[ci] } else { 1.0 };

            // Face means feed the Green-Gauss sub-stencil polynomial.
            let mut face_means: ArrayVec<Conserved, 6> = ArrayVec::new();
            for &f in &cell.faces {
                match mesh.neighbor_across(ci, f) {
                    Some((nb, _)) => face_means.push(dofs[nb].w),
                    None => face_means.push(boundary_means[f]),
                }
            }
            let gg = green_gauss_p1(mesh, ci, &dof0.w, &face_means, a_i);

            if !mesh.has_full_stencil(ci) {
                *poly = QuadPoly::linear(&dof0.w, &gg);
                *fb = false;
                *wdiag = f64::NAN;
                return;
            }

            let stencil = gather_stencil(mesh, ci);
            let op = CellLsOperator::build(&stencil);
            let p2 = match cfg.path {
                ReconPath::TwoStep => {
                    two_step_reconstruct(&op, &stencil, dof0, dofs, cfg.quad_identities)
                }
                ReconPath::Original => {
                    original.and_then(|o| o.solve(mesh, ci, &stencil, dof0, dofs))
                }
            };
            let p2 = match p2 {
                Some(c) => c,
                None => {
                    *poly = QuadPoly::linear(&dof0.w, &gg);
                    *fb = true;
                    *wdiag = f64::NAN;
                    return;
                }
            };
            *fb = false;

            if !cfg.weno {
                *poly = QuadPoly { coef: p2 };
                *wdiag = f64::NAN;
                return;
            }

            // Nonlinear combination per variable.
            let mut out = [[0.0; 10]; 5];
            let mut worst = 0.5f64;
            let mut vm = [0.0f64; 6];
            for v in 0..5 {
                let gg_grad = [gg[0].0[v], gg[1].0[v], gg[2].0[v]];
                let beta_gg = beta_linear(gg_grad, cell);
                let beta_ls = op
                    .fit(dof0.w.0[v], {
                        for (m, s) in stencil.iter().enumerate() {
                            vm[m] = dofs[s.cell].w.0[v];
                        }
                        &vm[..stencil.len()]
                    })
                    .map(|g| beta_linear(g, cell))
                    .unwrap_or(beta_gg);
                let beta1 = beta_gg.min(beta_ls);
                let beta2 = beta_quadratic(&p2[v], cell);
                let (c, w2) = weno_combine(&p2[v], dof0.w.0[v], gg_grad, beta2, beta1, cfg.sigma_power);
                out[v] = c;
                if (w2 - 0.5).abs() > (worst - 0.5).abs() {
                    worst = w2;
                }
            }
            *poly = QuadPoly { coef: out };
            *wdiag = worst;
        };

        if weights_on {
            let w = weights.as_mut().unwrap();
            polys
                .par_iter_mut()
                .zip(fallback.par_iter_mut())
                .zip(w.par_iter_mut())
                .enumerate()
                .for_each(|(ci, ((poly, fb), wd))| work(ci, poly, fb, wd));
        } else {
            polys
                .par_iter_mut()
                .zip(fallback.par_iter_mut())
                .enumerate()
                .for_each(|(ci, (poly, fb))| {
                    let mut dummy = f64::NAN;
                    work(ci, poly, fb, &mut dummy)
                });
        }
    }
}
