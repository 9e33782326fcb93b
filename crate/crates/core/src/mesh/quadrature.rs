//! Quadrature rules used for face flux integration and exact volume
//! integrals of polynomial basis functions.

use crate::vec3::{add, cross, norm, scale, sub, Vec3};

/// Symmetric 3-point rule on a triangle, exact for total degree 2.
/// Returns (barycentric point, weight) with weights summing to 1.
pub const TRI3: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

/// Gauss-Legendre abscissae on [-1, 1].
pub const GL2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

pub const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// 4-point rule on a tetrahedron, exact for total degree 2.
/// Barycentric coordinates (a, b, b, b) with equal weights.
pub fn tet4() -> [([f64; 4], f64); 4] {
    let a = (5.0 + 3.0 * 5.0f64.sqrt()) / 20.0;
    let b = (5.0 - 5.0f64.sqrt()) / 20.0;
    [
        ([a, b, b, b], 0.25),
        ([b, a, b, b], 0.25),
        ([b, b, a, b], 0.25),
        ([b, b, b, a], 0.25),
    ]
}

/// Map barycentric tet coordinates to physical space.
#[inline]
pub fn tet_point(v: &[Vec3; 4], bc: [f64; 4]) -> Vec3 {
    let mut p = [0.0; 3];
    for (vi, bi) in v.iter().zip(bc.iter()) {
        p = add(p, scale(*vi, *bi));
    }
    p
}

#[inline]
pub fn tet_volume(v: &[Vec3; 4]) -> f64 {
    let a = sub(v[1], v[0]);
    let b = sub(v[2], v[0]);
    let c = sub(v[3], v[0]);
    crate::vec3::dot(a, cross(b, c)) / 6.0
}

/// Integrate `f` over a tetrahedron exactly for quadratic integrands.
pub fn tet_integrate2(v: &[Vec3; 4], mut f: impl FnMut(Vec3) -> f64) -> f64 {
    let vol = tet_volume(v);
    let mut acc = 0.0;
    for (bc, w) in tet4() {
        acc += w * f(tet_point(v, bc));
    }
    acc * vol
}

/// Integrate `f` over a tetrahedron with a Duffy-transformed tensor
/// Gauss rule, exact for total degree <= 5 with the 4-point 1D rule.
pub fn tet_integrate_duffy(v: &[Vec3; 4], mut f: impl FnMut(Vec3) -> f64) -> f64 {
    // Reference simplex x >= 0, y >= 0, z >= 0, x + y + z <= 1 mapped from
    // the unit cube: x = a, y = b (1 - a), z = c (1 - a)(1 - b), with
    // Jacobian (1 - a)^2 (1 - b).
    let vol6 = 6.0 * tet_volume(v);
    let mut acc = 0.0;
    for &(ga, wa) in &GL4 {
        let a = 0.5 * (ga + 1.0);
        for &(gb, wb) in &GL4 {
            let b = 0.5 * (gb + 1.0);
            for &(gc, wc) in &GL4 {
                let c = 0.5 * (gc + 1.0);
                let x = a;
                let y = b * (1.0 - a);
                let z = c * (1.0 - a) * (1.0 - b);
                let jac = (1.0 - a) * (1.0 - a) * (1.0 - b);
                let bc = [1.0 - x - y - z, x, y, z];
                acc += wa * wb * wc * jac * f(tet_point(v, bc));
            }
        }
    }
    // 1/8 from the three [-1,1] -> [0,1] interval maps; the affine map from
    // the reference simplex scales volumes by 6 |Omega|.
    acc * vol6 / 8.0
}

/// Area-weighted quadrature points for a planar or mildly warped
/// quadrilateral face described by its bilinear patch. Returns points and
/// weights (weights normalized to sum 1) plus the scalar integral of the
/// surface Jacobian over the patch.
pub fn quad_face_rule(v: &[Vec3; 4]) -> ([(Vec3, f64); 4], f64) {
    let mut pts = [([0.0; 3], 0.0); 4];
    let mut total = 0.0;
    let mut idx = 0;
    for &gx in &GL2 {
        for &gy in &GL2 {
            // Bilinear map on [-1,1]^2.
            let n0 = 0.25 * (1.0 - gx) * (1.0 - gy);
            let n1 = 0.25 * (1.0 + gx) * (1.0 - gy);
            let n2 = 0.25 * (1.0 + gx) * (1.0 + gy);
            let n3 = 0.25 * (1.0 - gx) * (1.0 + gy);
            let p = add(
                add(scale(v[0], n0), scale(v[1], n1)),
                add(scale(v[2], n2), scale(v[3], n3)),
            );
            let dxi = add(
                add(scale(v[0], -0.25 * (1.0 - gy)), scale(v[1], 0.25 * (1.0 - gy))),
                add(scale(v[2], 0.25 * (1.0 + gy)), scale(v[3], -0.25 * (1.0 + gy))),
            );
            let deta = add(
                add(scale(v[0], -0.25 * (1.0 - gx)), scale(v[1], -0.25 * (1.0 + gx))),
                add(scale(v[2], 0.25 * (1.0 + gx)), scale(v[3], 0.25 * (1.0 - gx))),
            );
            let jac = norm(cross(dxi, deta));
            pts[idx] = (p, jac);
            total += jac;
            idx += 1;
        }
    }
    for p in &mut pts {
        p.1 /= total;
    }
    (pts, total)
}

/// Quadrature points for a triangular face; weights sum to 1.
pub fn tri_face_rule(v: &[Vec3; 3]) -> [(Vec3, f64); 3] {
    let mut out = [([0.0; 3], 0.0); 3];
    for (i, (bc, w)) in TRI3.iter().enumerate() {
        let p = add(
            add(scale(v[0], bc[0]), scale(v[1], bc[1])),
            scale(v[2], bc[2]),
        );
        out[i] = (p, *w);
    }
    out
}
