//! The original large-stencil reconstruction: neighbor cell averages are
//! enforced exactly, neighbor cell-averaged slopes enter as least-squares
//! rows, and the per-cell system matrix (4 N_f rows by 9 columns, scaled
//! for conditioning) is assembled once and persisted. Each sweep solves
//! the constrained problem by null-space elimination of the stored matrix,
//! sharing the factorization across the five conserved variables.

use super::dense::{qr_factor, SmallMat, MAX_ROWS};
use super::StencilEntry;
use crate::mesh::Mesh;
use crate::solver::CellDof;
use crate::Result;

pub struct OriginalStore {
    /// Scaled system matrices, flat; `offsets[ci]` is the start of cell
    /// ci's block (rows * 9 entries) or usize::MAX for cells without a
    /// full stencil.
    mats: Vec<f64>,
    offsets: Vec<usize>,
}

fn scale_pow(h: f64) -> [f64; 9] {
    let h2 = h * h;
    [h, h, h, h2, h2, h2, h2, h2, h2]
}

impl OriginalStore {
    pub fn build(mesh: &Mesh) -> Result<Self> {
        let n = mesh.cells.len();
        let mut mats = Vec::new();
        let mut offsets = vec![usize::MAX; n];
        for ci in 0..n {
            if !mesh.has_full_stencil(ci) {
                continue;
            }
            let stencil = super::gather_stencil(mesh, ci);
            let nf = stencil.len();
            let h = mesh.cells[ci].h();
            let sc = scale_pow(h);
            offsets[ci] = mats.len();
            mats.resize(mats.len() + 4 * nf * 9, 0.0);
            let block = offsets[ci];
            // Constraint rows: means of the zero-mean basis over each
            // neighbor.
            for (m, s) in stencil.iter().enumerate() {
                for j in 0..9 {
                    mats[block + m * 9 + j] = s.basis_means[j] / sc[j];
                }
            }
            // Slope rows (scaled by h so all entries stay order one): the
            // mean of each basis derivative over the neighbor, which only
            // needs the neighbor means of the linear monomials.
            for (m, s) in stencil.iter().enumerate() {
                let d = [
                    s.basis_means[0] + mesh.cells[ci].moments[0],
                    s.basis_means[1] + mesh.cells[ci].moments[1],
                    s.basis_means[2] + mesh.cells[ci].moments[2],
                ];
                let rows: [[f64; 9]; 3] = [
                    [1.0, 0.0, 0.0, 2.0 * d[0], 0.0, 0.0, d[1], 0.0, d[2]],
                    [0.0, 1.0, 0.0, 0.0, 2.0 * d[1], 0.0, d[0], d[2], 0.0],
                    [0.0, 0.0, 1.0, 0.0, 0.0, 2.0 * d[2], 0.0, d[1], d[0]],
                ];
                for dir in 0..3 {
                    let r = block + (nf + m * 3 + dir) * 9;
                    for j in 0..9 {
                        mats[r + j] = rows[dir][j] / sc[j] * h;
                    }
                }
            }
        }
        Ok(OriginalStore { mats, offsets })
    }

    pub fn matrix_reals(&self) -> usize {
        self.mats.len()
    }

    /// Solve the constrained least-squares problem for one cell from the
    /// persisted matrix. Returns None on a rank-deficient constraint block
    /// (after an unconstrained fallback is attempted the caller drops to
    /// the sub-stencil polynomial only if that also fails).
    pub fn solve(
        &self,
        mesh: &Mesh,
        ci: usize,
        stencil: &[StencilEntry],
        dof0: &CellDof,
        dofs: &[CellDof],
    ) -> Option<[[f64; 10]; 5]> {
        let block = self.offsets[ci];
        if block == usize::MAX {
            return None;
        }
        let nf = stencil.len();
        
        let h = mesh.cells[ci].h();
        let sc = scale_pow(h);
        let at = |r: usize, j: usize| self.mats[block + r * 9 + j];

        // QR of the transposed constraint block gives the particular
        // solution and the null-space basis.
        let mut ct = SmallMat::zeros(9, nf);
        for m in 0..nf {
            for j in 0..9 {
                ct.a[j][m] = at(m, j);
            }
        }
        let qr_c = qr_factor(ct);
        let rank_ok = qr_c.min_diag > 1e-10 * qr_c.max_diag.max(1e-300);
        if !rank_ok {
            return self.solve_unconstrained(ci, nf, h, stencil, dof0, dofs);
        }
        let nd = 9 - nf;
        let mut null = [[0.0; MAX_ROWS]; 5];
        qr_c.q_columns(nf, &mut null[..nd]);

        // B = G N over the null-space basis.
        let mut b = SmallMat::zeros(3 * nf, nd);
        for r in 0..3 * nf {
            for (k, nk) in null[..nd].iter().enumerate() {
                let mut s = 0.0;
                for j in 0..9 {
                    s += at(nf + r, j) * nk[j];
                }
                b.a[r][k] = s;
            }
        }
        let qr_b = qr_factor(b);

        let mut coef = [[0.0; 10]; 5];
        for v in 0..5 {
            // Particular solution of C a = d with minimum norm.
            let mut y = [0.0; MAX_ROWS];
            for (m, s) in stencil.iter().enumerate() {
                y[m] = dofs[s.cell].w.0[v] - dof0.w.0[v];
            }
            qr_c.forward_sub_t(&mut y[..nf]);
            for e in y[nf..9].iter_mut() {
                *e = 0.0;
            }
            qr_c.apply_q(&mut y[..9]);
            let a_p = y;

            // Residual of the slope rows and its least-squares correction.
            let mut r2 = [0.0; MAX_ROWS];
            for (m, s) in stencil.iter().enumerate() {
                for dir in 0..3 {
                    let row = nf + m * 3 + dir;
                    let mut ga = 0.0;
                    for j in 0..9 {
                        ga += at(row, j) * a_p[j];
                    }
                    r2[m * 3 + dir] = dofs[s.cell].grad[dir].0[v] * h - ga;
                }
            }
            qr_b.solve_ls(&mut r2[..3 * nf]);

            coef[v][0] = dof0.w.0[v];
            for j in 0..9 {
                let mut a = a_p[j];
                for k in 0..nd {
                    a += null[k][j] * r2[k];
                }
                coef[v][1 + j] = a / sc[j];
            }
        }
        Some(coef)
    }

    /// Plain least squares on all rows when the constraint block is
    /// rank-deficient.
    fn solve_unconstrained(
        &self,
        ci: usize,
        nf: usize,
        h: f64,
        stencil: &[StencilEntry],
        dof0: &CellDof,
        dofs: &[CellDof],
    ) -> Option<[[f64; 10]; 5]> {
        let block = self.offsets[ci];
        let rows = 4 * nf;
        let mut m = SmallMat::zeros(rows, 9);
        for r in 0..rows {
            for j in 0..9 {
                m.a[r][j] = self.mats[block + r * 9 + j];
            }
        }
        let qr = qr_factor(m);
        if qr.min_diag <= 1e-12 * qr.max_diag.max(1e-300) {
            return None;
        }
        let sc = scale_pow(h);
        let mut coef = [[0.0; 10]; 5];
        for v in 0..5 {
            let mut rhs = [0.0; MAX_ROWS];
            for (i, s) in stencil.iter().enumerate() {
                rhs[i] = dofs[s.cell].w.0[v] - dof0.w.0[v];
                for dir in 0..3 {
                    rhs[nf + i * 3 + dir] = dofs[s.cell].grad[dir].0[v] * h;
                }
            }
            qr.solve_ls(&mut rhs[..rows]);
            coef[v][0] = dof0.w.0[v];
            for j in 0..9 {
                coef[v][1 + j] = rhs[j] / sc[j];
            }
        }
        Some(coef)
    }
}
