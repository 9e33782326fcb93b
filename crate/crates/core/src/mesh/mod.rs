//! Unstructured hybrid mesh: topology, geometry, face quadrature and the
//! exact polynomial-basis integrals consumed by the reconstruction
//! operators.

pub mod quadrature;

use crate::vec3::{add, cross, dot, norm, scale, sub, Vec3};
use crate::{CgksError, Result};
use arrayvec::ArrayVec;
use std::collections::HashMap;

/// Supported element kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Tetrahedron,
    Pyramid,
    Prism,
    Hexahedron,
}

impl CellKind {
    pub fn node_count(self) -> usize {
        match self {
            CellKind::Tetrahedron => 4,
            CellKind::Pyramid => 5,
            CellKind::Prism => 6,
            CellKind::Hexahedron => 8,
        }
    }

    pub fn face_count(self) -> usize {
        match self {
            CellKind::Tetrahedron => 4,
            CellKind::Pyramid | CellKind::Prism => 5,
            CellKind::Hexahedron => 6,
        }
    }

    /// Local faces with outward orientation; quads listed with 4 indices.
    pub fn faces(self) -> &'static [&'static [usize]] {
        match self {
            CellKind::Tetrahedron => &[&[0, 2, 1], &[0, 1, 3], &[1, 2, 3], &[0, 3, 2]],
            CellKind::Pyramid => &[
                &[0, 3, 2, 1],
                &[0, 1, 4],
                &[1, 2, 4],
                &[2, 3, 4],
                &[3, 0, 4],
            ],
            CellKind::Prism => &[
                &[0, 2, 1],
                &[3, 4, 5],
                &[0, 1, 4, 3],
                &[1, 2, 5, 4],
                &[2, 0, 3, 5],
            ],
            CellKind::Hexahedron => &[
                &[0, 3, 2, 1],
                &[4, 5, 6, 7],
                &[0, 1, 5, 4],
                &[1, 2, 6, 5],
                &[2, 3, 7, 6],
                &[3, 0, 4, 7],
            ],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Tetrahedron => "tet",
            CellKind::Pyramid => "pyramid",
            CellKind::Prism => "prism",
            CellKind::Hexahedron => "hex",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub position: Vec3,
}

/// Quadrature point on a face; weights over one face sum to 1.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub position: Vec3,
    pub weight: f64,
}

/// What lies on the far side of a face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceNeighbor {
    /// Interior face. `shift` translates a point on the face into the
    /// neighbor cell's frame (non-zero only for merged periodic pairs).
    Interior { cell: usize, shift: Vec3 },
    /// Boundary face belonging to the given patch.
    Boundary { patch: usize },
}

#[derive(Debug, Clone)]
pub struct Face {
    /// Node indices in the owner's outward orientation (3 or 4).
    pub nodes: ArrayVec<usize, 4>,
    pub owner: usize,
    pub neighbor: FaceNeighbor,
    pub area: f64,
    /// Unit normal pointing out of the owner cell.
    pub normal: Vec3,
    pub centroid: Vec3,
    pub qpoints: ArrayVec<QuadPoint, 4>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.neighbor, FaceNeighbor::Boundary { .. })
    }
}

/// Indices of the monomials spanning the quadratic zero-mean basis,
/// in the order x, y, z, xx, yy, zz, xy, yz, xz.
pub const MONOMIALS: [(usize, usize, usize); 9] = [
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (2, 0, 0),
    (0, 2, 0),
    (0, 0, 2),
    (1, 1, 0),
    (0, 1, 1),
    (1, 0, 1),
];

#[derive(Debug, Clone)]
pub struct Cell {
    pub kind: CellKind,
    pub nodes: ArrayVec<usize, 8>,
    pub faces: ArrayVec<usize, 6>,
    pub volume: f64,
    /// Volume centroid; the expansion point of the cell's basis.
    pub centroid: Vec3,
    /// Mean of (x - x0)^k over the cell for the nine monomials of
    /// [`MONOMIALS`]. Degree-1 entries vanish to round-off by construction.
    pub moments: [f64; 9],
}

impl Cell {
    /// Characteristic length used for scaling.
    #[inline]
    pub fn h(&self) -> f64 {
        self.volume.cbrt()
    }
}

#[derive(Debug, Clone)]
pub struct Patch {
    pub name: String,
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodicPair {
    /// The face kept after merging the pair.
    pub face: usize,
    /// Translation from the kept face to its removed partner.
    pub shift: Vec3,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Node>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    pub patches: Vec<Patch>,
    pub periodic: Vec<PeriodicPair>,
    pub bbox: (Vec3, Vec3),
}

/// Raw connectivity handed to [`compute_geometry`].
#[derive(Debug, Clone, Default)]
pub struct RawMesh {
    pub nodes: Vec<Vec3>,
    pub cells: Vec<(CellKind, Vec<usize>)>,
    /// Boundary patches as (name, list of boundary faces by node ids).
    pub patches: Vec<(String, Vec<Vec<usize>>)>,
}

fn face_key(nodes: &[usize]) -> Vec<usize> {
    let mut k: Vec<usize> = nodes.to_vec();
    k.sort_unstable();
    k
}

/// Triangulate a face (fan from its first node).
fn face_triangles(nodes: &[usize]) -> ArrayVec<[usize; 3], 2> {
    let mut tris = ArrayVec::new();
    tris.push([nodes[0], nodes[1], nodes[2]]);
    if nodes.len() == 4 {
        tris.push([nodes[0], nodes[2], nodes[3]]);
    }
    tris
}

/// Build the full mesh geometry from raw connectivity: faces with
/// quadrature rules, volumes, volume centroids and basis moments.
pub fn compute_geometry(raw: RawMesh) -> Result<Mesh> {
    let nodes: Vec<Node> = raw.nodes.iter().map(|&position| Node { position }).collect();
    for (i, n) in nodes.iter().enumerate() {
        if !n.position.iter().all(|v| v.is_finite()) {
            return Err(CgksError::Invalid(format!("node {i} has non-finite coordinates")));
        }
    }

    // Patch lookup by sorted node key.
    let mut patch_lookup: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut patches = Vec::new();
    for (name, face_list) in &raw.patches {
        let id = patches.len();
        patches.push(Patch { name: name.clone() });
        for f in face_list {
            patch_lookup.insert(face_key(f), id);
        }
    }

    // Discover faces from cell templates.
    let mut faces: Vec<Face> = Vec::new();
    let mut face_map: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut cells: Vec<Cell> = Vec::with_capacity(raw.cells.len());

    for (ci, (kind, cnodes)) in raw.cells.iter().enumerate() {
        if cnodes.len() != kind.node_count() {
            return Err(CgksError::Invalid(format!(
                "cell {ci}: {} nodes given for {}",
                cnodes.len(),
                kind.name()
            )));
        }
        for &n in cnodes {
            if n >= nodes.len() {
                return Err(CgksError::Invalid(format!("cell {ci} references missing node {n}")));
            }
        }
        let mut cell = Cell {
            kind: *kind,
            nodes: cnodes.iter().copied().collect(),
            faces: ArrayVec::new(),
            volume: 0.0,
            centroid: [0.0; 3],
            moments: [0.0; 9],
        };
        for lf in kind.faces() {
            let global: Vec<usize> = lf.iter().map(|&l| cnodes[l]).collect();
            let key = face_key(&global);
            let fid = match face_map.get(&key) {
                Some(&fid) => {
                    match faces[fid].neighbor {
                        FaceNeighbor::Boundary { .. } => {
                            faces[fid].neighbor = FaceNeighbor::Interior { cell: ci, shift: [0.0; 3] };
                        }
                        FaceNeighbor::Interior { .. } => {
                            return Err(CgksError::Invalid(format!(
                                "face shared by more than two cells near cell {ci}"
                            )));
                        }
                    }
                    fid
                }
                None => {
                    let fid = faces.len();
                    face_map.insert(key, fid);
                    faces.push(Face {
                        nodes: global.iter().copied().collect(),
                        owner: ci,
                        neighbor: FaceNeighbor::Boundary { patch: usize::MAX },
                        area: 0.0,
                        normal: [0.0; 3],
                        centroid: [0.0; 3],
                        qpoints: ArrayVec::new(),
                    });
                    fid
                }
            };
            cell.faces.push(fid);
        }
        cells.push(cell);
    }

    // Assign boundary patches.
    let unassigned = patches.len();
    let mut any_unassigned = false;
    for face in faces.iter_mut() {
        if let FaceNeighbor::Boundary { patch } = &mut face.neighbor {
            let key = face_key(&face.nodes);
            match patch_lookup.get(&key) {
                Some(&p) => *patch = p,
                None => {
                    *patch = unassigned;
                    any_unassigned = true;
                }
            }
        }
    }
    if any_unassigned {
        patches.push(Patch { name: "unassigned".to_string() });
    }
    // Every listed patch face must exist as a boundary face.
    for (name, face_list) in &raw.patches {
        for f in face_list {
            let key = face_key(f);
            match face_map.get(&key) {
                Some(&fid) if faces[fid].is_boundary() => {}
                Some(_) => {
                    return Err(CgksError::Invalid(format!(
                        "patch '{name}' lists an interior face {f:?}"
                    )))
                }
                None => {
                    return Err(CgksError::Invalid(format!(
                        "patch '{name}' lists unknown face {f:?}"
                    )))
                }
            }
        }
    }

    // Face geometry: triangulated area/normal, bilinear quadrature for quads.
    for face in faces.iter_mut() {
        let pos: Vec<Vec3> = face.nodes.iter().map(|&n| nodes[n].position).collect();
        let mut area_vec = [0.0; 3];
        let mut centroid = [0.0; 3];
        for tri in face_triangles(&face.nodes) {
            let a = nodes[tri[0]].position;
            let b = nodes[tri[1]].position;
            let c = nodes[tri[2]].position;
            let av = scale(cross(sub(b, a), sub(c, a)), 0.5);
            let t_area = norm(av);
            area_vec = add(area_vec, av);
            centroid = add(
                centroid,
                scale(scale(add(add(a, b), c), 1.0 / 3.0), t_area),
            );
        }
        if face.nodes.len() == 3 {
            face.area = norm(area_vec);
            face.centroid = scale(centroid, 1.0 / face.area);
            let v = [pos[0], pos[1], pos[2]];
            for (p, w) in quadrature::tri_face_rule(&v) {
                face.qpoints.push(QuadPoint { position: p, weight: w });
            }
            face.normal = scale(area_vec, 1.0 / face.area);
        } else {
            // The vector area of the two-triangle split defines S and n, so
            // that S n sums to zero over any closed cell even when the face
            // is warped. The 2x2 rule lives on the bilinear patch with
            // Jacobian-proportional weights.
            let tri_area_sum = {
                let mut s = 0.0;
                for tri in face_triangles(&face.nodes) {
                    let a = nodes[tri[0]].position;
                    let b = nodes[tri[1]].position;
                    let c = nodes[tri[2]].position;
                    s += norm(scale(cross(sub(b, a), sub(c, a)), 0.5));
                }
                s
            };
            face.area = norm(area_vec);
            face.centroid = scale(centroid, 1.0 / tri_area_sum);
            let v = [pos[0], pos[1], pos[2], pos[3]];
            let (pts, _jac_area) = quadrature::quad_face_rule(&v);
            for (p, w) in pts {
                face.qpoints.push(QuadPoint { position: p, weight: w });
            }
            face.normal = scale(area_vec, 1.0 / norm(area_vec));
        }
    }

    // Volumes and centroids by the divergence theorem over face triangles.
    for ci in 0..cells.len() {
        let mut vol = 0.0;
        let mut cen = [0.0; 3];
        for &fid in &cells[ci].faces {
            let face = &faces[fid];
            let sign = if face.owner == ci { 1.0 } else { -1.0 };
            for tri in face_triangles(&face.nodes) {
                let a = nodes[tri[0]].position;
                let b = nodes[tri[1]].position;
                let c = nodes[tri[2]].position;
                let av = scale(cross(sub(b, a), sub(c, a)), 0.5 * sign);
                vol += dot(av, add(add(a, b), c)) / 9.0;
                // centroid_i * V = 1/2 * sum over tris of A_i * mean(x_i^2)
                for (bc, w) in quadrature::TRI3 {
                    let p = add(add(scale(a, bc[0]), scale(b, bc[1])), scale(c, bc[2]));
                    for d in 0..3 {
                        cen[d] += 0.5 * av[d] * w * p[d] * p[d];
                    }
                }
            }
        }
        if !(vol > 0.0) || !vol.is_finite() {
            return Err(CgksError::NonPositiveVolume { cell: ci, volume: vol });
        }
        cells[ci].volume = vol;
        cells[ci].centroid = scale(cen, 1.0 / vol);
    }

    // Orientation sanity: a cell's outward face must point away from its
    // centroid.
    for (ci, cell) in cells.iter().enumerate() {
        for &fid in &cell.faces {
            let face = &faces[fid];
            let sign = if face.owner == ci { 1.0 } else { -1.0 };
            let out = scale(face.normal, sign);
            if dot(out, sub(face.centroid, cell.centroid)) <= 0.0 {
                return Err(CgksError::InvertedFace { cell: ci, face: fid });
            }
        }
    }

    // Basis moments via exact tet-decomposition quadrature from the centroid.
    let mut all_moments = Vec::with_capacity(cells.len());
    for ci in 0..cells.len() {
        all_moments.push(cell_monomial_means(ci, &cells, &faces, &nodes)?);
    }
    for (cell, m) in cells.iter_mut().zip(all_moments) {
        cell.moments = m;
    }

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for n in &nodes {
        for d in 0..3 {
            lo[d] = lo[d].min(n.position[d]);
            hi[d] = hi[d].max(n.position[d]);
        }
    }

    Ok(Mesh {
        nodes,
        faces,
        cells,
        patches,
        periodic: Vec::new(),
        bbox: (lo, hi),
    })
}

/// Decompose a cell into tetrahedra spanned from its centroid over the
/// outward-oriented boundary triangles. A face kept from a merged periodic
/// pair is translated into the frame of the cell on the far side.
fn cell_tets(ci: usize, cells: &[Cell], faces: &[Face], nodes: &[Node]) -> Result<Vec<[Vec3; 4]>> {
    let cell = &cells[ci];
    let x0 = cell.centroid;
    let mut tets = Vec::with_capacity(12);
    let mut vol_sum = 0.0;
    for &fid in &cell.faces {
        let face = &faces[fid];
        let outward = face.owner == ci;
        let offset = match face.neighbor {
            FaceNeighbor::Interior { cell: nb, shift } if nb == ci && !outward => shift,
            _ => [0.0; 3],
        };
        for tri in face_triangles(&face.nodes) {
            let (a, b, c) = if outward {
                (tri[0], tri[1], tri[2])
            } else {
                (tri[0], tri[2], tri[1])
            };
            let t = [
                x0,
                add(nodes[a].position, offset),
                add(nodes[b].position, offset),
                add(nodes[c].position, offset),
            ];
            let v = quadrature::tet_volume(&t);
            if v <= -1e-12 * cell.volume {
                return Err(CgksError::DegenerateCell { cell: ci });
            }
            vol_sum += v;
            tets.push(t);
        }
    }
    if (vol_sum - cell.volume).abs() > 1e-12 * cell.volume.max(1e-300) {
        return Err(CgksError::DegenerateCell { cell: ci });
    }
    Ok(tets)
}

/// Mean of each basis monomial (x - x0)^k over the cell, |k| in {1, 2}.
fn cell_monomial_means(
    ci: usize,
    cells: &[Cell],
    faces: &[Face],
    nodes: &[Node],
) -> Result<[f64; 9]> {
    let cell = &cells[ci];
    let x0 = cell.centroid;
    let mut acc = [0.0; 9];
    for tet in cell_tets(ci, cells, faces, nodes)? {
        let vol = quadrature::tet_volume(&tet);
        for (bc, w) in quadrature::tet4() {
            let p = sub(quadrature::tet_point(&tet, bc), x0);
            let contrib = w * vol;
            for (j, (a, b, c)) in MONOMIALS.iter().enumerate() {
                acc[j] += contrib * p[0].powi(*a as i32) * p[1].powi(*b as i32) * p[2].powi(*c as i32);
            }
        }
    }
    for v in &mut acc {
        *v /= cell.volume;
    }
    Ok(acc)
}

/// Mean of the monomials (x_eff - x0)^k over a neighbor cell whose
/// coordinates are shifted by `offset`, expressed through the neighbor's own
/// moments and the centroid offset (exact for quadratics).
pub fn shifted_monomial_means(neighbor: &Cell, offset: Vec3, x0: Vec3) -> [f64; 9] {
    let d = sub(add(neighbor.centroid, offset), x0);
    let m = &neighbor.moments;
    [
        m[0] + d[0],
        m[1] + d[1],
        m[2] + d[2],
        m[3] + 2.0 * d[0] * m[0] + d[0] * d[0],
        m[4] + 2.0 * d[1] * m[1] + d[1] * d[1],
        m[5] + 2.0 * d[2] * m[2] + d[2] * d[2],
        m[6] + d[0] * m[1] + d[1] * m[0] + d[0] * d[1],
        m[7] + d[1] * m[2] + d[2] * m[1] + d[1] * d[2],
        m[8] + d[0] * m[2] + d[2] * m[0] + d[0] * d[2],
    ]
}

impl Mesh {
    /// The neighbor across face `fid` as seen from `cell`, together with the
    /// translation that brings the neighbor's coordinates into `cell`'s
    /// frame. `None` for boundary faces.
    pub fn neighbor_across(&self, cell: usize, fid: usize) -> Option<(usize, Vec3)> {
        let face = &self.faces[fid];
        match face.neighbor {
            FaceNeighbor::Boundary { .. } => None,
            FaceNeighbor::Interior { cell: nb, shift } => {
                if face.owner == cell {
                    Some((nb, scale(shift, -1.0)))
                } else {
                    Some((face.owner, shift))
                }
            }
        }
    }

    /// Outward unit normal of face `fid` with respect to `cell`.
    pub fn outward_normal(&self, cell: usize, fid: usize) -> Vec3 {
        let face = &self.faces[fid];
        if face.owner == cell {
            face.normal
        } else {
            scale(face.normal, -1.0)
        }
    }

    /// Raw monomial integrals of the target cell's basis over a neighbor:
    /// integral over Omega_m of (x - x0)^k dV for |k| in {1, 2}.
    pub fn neighbor_monomial_integrals(&self, cell: usize, fid: usize) -> Option<[f64; 9]> {
        let (nb, offset) = self.neighbor_across(cell, fid)?;
        let target = &self.cells[cell];
        let other = &self.cells[nb];
        let mut means = shifted_monomial_means(other, offset, target.centroid);
        for v in &mut means {
            *v *= other.volume;
        }
        Some(means)
    }

    /// True if the cell has an interior (or periodic) neighbor on every face.
    pub fn has_full_stencil(&self, cell: usize) -> bool {
        self.cells[cell]
            .faces
            .iter()
            .all(|&f| !self.faces[f].is_boundary())
    }

    pub fn patch_id(&self, name: &str) -> Option<usize> {
        self.patches.iter().position(|p| p.name == name)
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Integrate a function over one cell; exact for polynomial integrands
    /// up to total degree 5 (centroid tet decomposition with a Duffy
    /// tensor rule).
    pub fn integrate_cell(&self, ci: usize, mut f: impl FnMut(Vec3) -> f64) -> f64 {
        let tets = cell_tets(ci, &self.cells, &self.faces, &self.nodes)
            .expect("geometry was validated at construction");
        let mut acc = 0.0;
        for tet in tets {
            acc += quadrature::tet_integrate_duffy(&tet, &mut f);
        }
        acc
    }
}
