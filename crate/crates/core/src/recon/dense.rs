//! Fixed-capacity Householder QR used by the constrained least-squares
//! reconstruction. Capacities cover the largest per-cell system
//! (hexahedron: 24 rows, 9 columns) so the per-sweep solve never touches
//! the heap.

pub const MAX_ROWS: usize = 24;
pub const MAX_COLS: usize = 9;

#[derive(Clone)]
pub struct SmallMat {
    pub a: [[f64; MAX_COLS]; MAX_ROWS],
    pub m: usize,
    pub n: usize,
}

impl SmallMat {
    pub fn zeros(m: usize, n: usize) -> Self {
        debug_assert!(m <= MAX_ROWS && n <= MAX_COLS);
        SmallMat { a: [[0.0; MAX_COLS]; MAX_ROWS], m, n }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.m {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.a[i][j] * x[j];
            }
            out[i] = s;
        }
    }
}

/// Householder factorization state: reflectors stored below the diagonal
/// with their leading elements and scales on the side.
pub struct Qr {
    pub mat: SmallMat,
    v0: [f64; MAX_COLS],
    beta: [f64; MAX_COLS],
    /// Diagonal magnitude of R before the smallest entry, for rank checks.
    pub min_diag: f64,
    pub max_diag: f64,
}

pub fn qr_factor(mut mat: SmallMat) -> Qr {
    let (m, n) = (mat.m, mat.n);
    let mut v0 = [0.0; MAX_COLS];
    let mut beta = [0.0; MAX_COLS];
    let mut min_diag = f64::INFINITY;
    let mut max_diag = 0.0f64;
    for k in 0..n.min(m) {
        let mut norm2 = 0.0;
        for i in k..m {
            norm2 += mat.a[i][k] * mat.a[i][k];
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            v0[k] = 0.0;
            beta[k] = 0.0;
            min_diag = 0.0;
            continue;
        }
        let alpha = mat.a[k][k];
        let sign = if alpha >= 0.0 { 1.0 } else { -1.0 };
        let vk = alpha + sign * norm;
        let mut vnorm2 = vk * vk;
        for i in k + 1..m {
            vnorm2 += mat.a[i][k] * mat.a[i][k];
        }
        let b = 2.0 / vnorm2;
        // Apply the reflector to the remaining columns.
        for j in k + 1..n {
            let mut dot = vk * mat.a[k][j];
            for i in k + 1..m {
                dot += mat.a[i][k] * mat.a[i][j];
            }
            let s = b * dot;
            mat.a[k][j] -= s * vk;
            for i in k + 1..m {
                mat.a[i][j] -= s * mat.a[i][k];
            }
        }
        mat.a[k][k] = -sign * norm; // R diagonal
        v0[k] = vk;
        beta[k] = b;
        min_diag = min_diag.min(norm);
        max_diag = max_diag.max(norm);
    }
    Qr { mat, v0, beta, min_diag, max_diag }
}

impl Qr {
    /// x <- Q^T x (length m).
    pub fn apply_qt(&self, x: &mut [f64]) {
        let (m, n) = (self.mat.m, self.mat.n);
        for k in 0..n.min(m) {
            if self.beta[k] == 0.0 {
                continue;
            }
            let mut dot = self.v0[k] * x[k];
            for i in k + 1..m {
                dot += self.mat.a[i][k] * x[i];
            }
            let s = self.beta[k] * dot;
            x[k] -= s * self.v0[k];
            for i in k + 1..m {
                x[i] -= s * self.mat.a[i][k];
            }
        }
    }

    /// x <- Q x (length m).
    pub fn apply_q(&self, x: &mut [f64]) {
        let (m, n) = (self.mat.m, self.mat.n);
        for k in (0..n.min(m)).rev() {
            if self.beta[k] == 0.0 {
                continue;
            }
            let mut dot = self.v0[k] * x[k];
            for i in k + 1..m {
                dot += self.mat.a[i][k] * x[i];
            }
            let s = self.beta[k] * dot;
            x[k] -= s * self.v0[k];
            for i in k + 1..m {
                x[i] -= s * self.mat.a[i][k];
            }
        }
    }

    /// Solve R z = y[0..n] in place (upper-triangular back substitution).
    pub fn back_sub(&self, y: &mut [f64]) {
        let n = self.mat.n;
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..n {
                s -= self.mat.a[k][j] * y[j];
            }
            y[k] = s / self.mat.a[k][k];
        }
    }

    /// Solve R^T y = d (forward substitution on the transposed factor).
    pub fn forward_sub_t(&self, d: &mut [f64]) {
        let n = self.mat.n;
        for k in 0..n {
            let mut s = d[k];
            for j in 0..k {
                s -= self.mat.a[j][k] * d[j];
            }
            d[k] = s / self.mat.a[k][k];
        }
    }

    /// Least-squares solve min |A z - rhs|: returns z in rhs[0..n].
    pub fn solve_ls(&self, rhs: &mut [f64]) {
        self.apply_qt(rhs);
        self.back_sub(rhs);
    }

    /// Columns j0..m of Q as explicit vectors (used for the null-space
    /// basis of a transposed constraint matrix).
    pub fn q_columns(&self, j0: usize, out: &mut [[f64; MAX_ROWS]]) {
        let m = self.mat.m;
        for (idx, col) in (j0..m).enumerate() {
            let mut e = [0.0; MAX_ROWS];
            e[col] = 1.0;
            self.apply_q(&mut e[..m]);
            out[idx] = e;
        }
    }
}

/// Symmetric positive-definite 3x3 solve via Cholesky; returns false when
/// the matrix is numerically singular.
pub fn cholesky3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut l = [[0.0f64; 3]; 3];
    let scale = a[0][0].abs().max(a[1][1].abs()).max(a[2][2].abs());
    if scale == 0.0 {
        return None;
    }
    for i in 0..3 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 1e-12 * scale {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

pub fn cholesky3_solve(l: &[[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let mut y = [0.0; 3];
    for i in 0..3 {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = y[i];
        for k in i + 1..3 {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_least_squares_matches_nalgebra() {
        use nalgebra::{DMatrix, DVector};
        let m = 11;
        let n = 5;
        let mut mat = SmallMat::zeros(m, n);
        let mut state = 0x12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut na = DMatrix::<f64>::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let v = next();
                mat.a[i][j] = v;
                na[(i, j)] = v;
            }
        }
        let mut rhs = [0.0; MAX_ROWS];
        let mut nrhs = DVector::<f64>::zeros(m);
        for i in 0..m {
            let v = next();
            rhs[i] = v;
            nrhs[i] = v;
        }
        let qr = qr_factor(mat);
        let mut sol = rhs;
        qr.solve_ls(&mut sol[..m]);
        let expect = na.svd(true, true).solve(&nrhs, 1e-12).unwrap();
        for j in 0..n {
            assert!(
                (sol[j] - expect[j]).abs() < 1e-10,
                "col {j}: {} vs {}",
                sol[j],
                expect[j]
            );
        }
    }

    #[test]
    fn q_columns_orthonormal_and_null() {
        // Q columns beyond the rank span the null space of the transpose.
        let m = 9;
        let n = 6;
        let mut mat = SmallMat::zeros(m, n);
        let mut state = 0x777u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..m {
            for j in 0..n {
                mat.a[i][j] = next();
            }
        }
        let copy = mat.clone();
        let qr = qr_factor(mat);
        let mut cols = vec![[0.0; MAX_ROWS]; m - n];
        qr.q_columns(n, &mut cols);
        for c in &cols {
            // A^T q = 0 (columns of A span the range of Q[..n]).
            for j in 0..n {
                let mut dot = 0.0;
                for i in 0..m {
                    dot += copy.a[i][j] * c[i];
                }
                assert!(dot.abs() < 1e-12, "null-space residual {dot}");
            }
            let norm: f64 = c[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_solves_spd() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]];
        let l = cholesky3(&a).unwrap();
        let x = cholesky3_solve(&l, [1.0, -2.0, 0.7]);
        for i in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                s += a[i][j] * x[j];
            }
            let b = [1.0, -2.0, 0.7][i];
            assert!((s - b).abs() < 1e-13);
        }
        assert!(cholesky3(&[[0.0; 3]; 3]).is_none());
    }
}
