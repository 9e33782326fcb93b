//! Structured box meshes used by the benchmark cases.

use crate::mesh::{compute_geometry, CellKind, Face, Mesh, RawMesh};
use crate::vec3::Vec3;
use crate::{CgksError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxStyle {
    /// One hexahedron per grid cell.
    Hex,
    /// Each hexahedron split into six tetrahedra sharing the main diagonal.
    Tet6,
}

#[derive(Debug, Clone, Copy)]
pub struct BoxSpec {
    pub lower: Vec3,
    pub upper: Vec3,
    pub n: [usize; 3],
    pub style: BoxStyle,
}

impl BoxSpec {
    pub fn cube(lower: f64, upper: f64, n: usize, style: BoxStyle) -> Self {
        BoxSpec {
            lower: [lower; 3],
            upper: [upper; 3],
            n: [n; 3],
            style,
        }
    }

    fn validate(&self) -> Result<()> {
        for d in 0..3 {
            if self.n[d] < 2 {
                return Err(CgksError::Invalid(format!(
                    "box resolution must be >= 2 per axis, got {:?}",
                    self.n
                )));
            }
            if self.upper[d] <= self.lower[d] {
                return Err(CgksError::Invalid("box upper corner must exceed lower".into()));
            }
        }
        Ok(())
    }
}

struct Grid {
    n: [usize; 3],
}

impl Grid {
    #[inline]
    fn node(&self, i: usize, j: usize, k: usize) -> usize {
        i + (self.n[0] + 1) * (j + (self.n[1] + 1) * k)
    }
}

fn grid_nodes(spec: &BoxSpec) -> Vec<Vec3> {
    let mut nodes = Vec::with_capacity((spec.n[0] + 1) * (spec.n[1] + 1) * (spec.n[2] + 1));
    for k in 0..=spec.n[2] {
        for j in 0..=spec.n[1] {
            for i in 0..=spec.n[0] {
                let f = |d: usize, idx: usize| {
                    spec.lower[d] + (spec.upper[d] - spec.lower[d]) * idx as f64 / spec.n[d] as f64
                };
                nodes.push([f(0, i), f(1, j), f(2, k)]);
            }
        }
    }
    nodes
}

fn hex_corners(g: &Grid, i: usize, j: usize, k: usize) -> [usize; 8] {
    [
        g.node(i, j, k),
        g.node(i + 1, j, k),
        g.node(i + 1, j + 1, k),
        g.node(i, j + 1, k),
        g.node(i, j, k + 1),
        g.node(i + 1, j, k + 1),
        g.node(i + 1, j + 1, k + 1),
        g.node(i, j + 1, k + 1),
    ]
}

/// Six-tet Kuhn subdivision of a hexahedron; conforming across identical
/// subdivisions of neighboring hexes.
fn kuhn_tets(c: &[usize; 8]) -> [[usize; 4]; 6] {
    // Corner index from axis offsets, matching hex_corners layout.
    let idx = |dx: usize, dy: usize, dz: usize| -> usize {
        match (dx, dy, dz) {
            (0, 0, 0) => 0,
            (1, 0, 0) => 1,
            (1, 1, 0) => 2,
            (0, 1, 0) => 3,
            (0, 0, 1) => 4,
            (1, 0, 1) => 5,
            (1, 1, 1) => 6,
            (0, 1, 1) => 7,
            _ => unreachable!(),
        }
    };
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut out = [[0usize; 4]; 6];
    for (t, perm) in perms.iter().enumerate() {
        let mut off = [0usize; 3];
        let mut verts = [c[idx(0, 0, 0)]; 4];
        for (s, &axis) in perm.iter().enumerate() {
            off[axis] = 1;
            verts[s + 1] = c[idx(off[0], off[1], off[2])];
        }
        // Odd permutations produce negatively oriented vertex lists; swap two
        // vertices to restore positive orientation without changing the tet.
        let parity = (perm[0] != 0) as usize + (perm[1] != 1) as usize + (perm[2] != 2) as usize;
        if parity == 2 {
            verts.swap(1, 2);
        }
        out[t] = verts;
    }
    out
}

/// Label the six sides of a box mesh by face centroid.
fn assign_box_patches(mesh: &mut Mesh, lower: Vec3, upper: Vec3) {
    let tol = 1e-9
        * (0..3)
            .map(|d| upper[d] - lower[d])
            .fold(0.0f64, |a, b| a.max(b));
    let names = ["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"];
    mesh.patches.clear();
    for name in names {
        mesh.patches.push(crate::mesh::Patch { name: name.to_string() });
    }
    let classify = |f: &Face| -> usize {
        for d in 0..3 {
            if (f.centroid[d] - lower[d]).abs() < tol {
                return 2 * d;
            }
            if (f.centroid[d] - upper[d]).abs() < tol {
                return 2 * d + 1;
            }
        }
        panic!("boundary face not on a box side");
    };
    for fi in 0..mesh.faces.len() {
        if mesh.faces[fi].is_boundary() {
            let p = classify(&mesh.faces[fi]);
            mesh.faces[fi].neighbor = crate::mesh::FaceNeighbor::Boundary { patch: p };
        }
    }
}

/// Generate a structured box mesh.
pub fn gen_box(spec: &BoxSpec) -> Result<Mesh> {
    spec.validate()?;
    let g = Grid { n: spec.n };
    let nodes = grid_nodes(spec);
    let mut cells = Vec::new();
    for k in 0..spec.n[2] {
        for j in 0..spec.n[1] {
            for i in 0..spec.n[0] {
                let c = hex_corners(&g, i, j, k);
                match spec.style {
                    BoxStyle::Hex => cells.push((CellKind::Hexahedron, c.to_vec())),
                    BoxStyle::Tet6 => {
                        for t in kuhn_tets(&c) {
                            cells.push((CellKind::Tetrahedron, t.to_vec()));
                        }
                    }
                }
            }
        }
    }
    let mut mesh = compute_geometry(RawMesh {
        nodes,
        cells,
        patches: Vec::new(),
    })?;
    assign_box_patches(&mut mesh, spec.lower, spec.upper);
    Ok(mesh)
}

/// A conforming mixed-element box: hexahedra everywhere except one column
/// of prisms and one hexahedron split into six pyramids. With n >= 4 both
/// the pyramids and some prisms sit away from the boundary, so every cell
/// kind (except tetrahedra) appears with a full von Neumann stencil.
pub fn gen_mixed_box(lower: f64, upper: f64, n: usize) -> Result<Mesh> {
    if n < 3 {
        return Err(CgksError::Invalid("mixed box needs n >= 3".into()));
    }
    let spec = BoxSpec::cube(lower, upper, n, BoxStyle::Hex);
    let g = Grid { n: spec.n };
    let mut nodes = grid_nodes(&spec);
    let mut cells: Vec<(CellKind, Vec<usize>)> = Vec::new();
    let center = n / 2;
    // Keep the prism column away from the pyramid cell; with n >= 4 it is
    // interior.
    let prism_col = if n >= 4 { 1 } else { 0 };
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let c = hex_corners(&g, i, j, k);
                if i == prism_col && j == prism_col {
                    // Vertical diagonal cut through nodes 0-2 / 4-6.
                    cells.push((CellKind::Prism, vec![c[0], c[1], c[2], c[4], c[5], c[6]]));
                    cells.push((CellKind::Prism, vec![c[0], c[2], c[3], c[4], c[6], c[7]]));
                } else if i == center && j == center && k == center {
                    // Hex center becomes the shared apex of six pyramids.
                    let apex = nodes.len();
                    let h = (upper - lower) / n as f64;
                    nodes.push([
                        lower + h * (i as f64 + 0.5),
                        lower + h * (j as f64 + 0.5),
                        lower + h * (k as f64 + 0.5),
                    ]);
                    for fl in CellKind::Hexahedron.faces() {
                        // Base ordered counterclockwise as seen from the apex
                        // (reverse of the hex's outward ordering).
                        let base: Vec<usize> = fl.iter().rev().map(|&l| c[l]).collect();
                        cells.push((
                            CellKind::Pyramid,
                            vec![base[0], base[1], base[2], base[3], apex],
                        ));
                    }
                } else {
                    cells.push((CellKind::Hexahedron, c.to_vec()));
                }
            }
        }
    }
    let mut mesh = compute_geometry(RawMesh {
        nodes,
        cells,
        patches: Vec::new(),
    })?;
    assign_box_patches(&mut mesh, spec.lower, spec.upper);
    Ok(mesh)
}

/// Deterministically displace interior nodes to skew a box mesh while
/// keeping it conforming. `amplitude` is the displacement as a fraction of
/// the local spacing.
pub fn jitter_interior_nodes(raw_spec: &BoxSpec, amplitude: f64, seed: u64) -> Result<Mesh> {
    raw_spec.validate()?;
    let mut mesh = gen_box(raw_spec)?;
    let h: Vec3 = [
        (raw_spec.upper[0] - raw_spec.lower[0]) / raw_spec.n[0] as f64,
        (raw_spec.upper[1] - raw_spec.lower[1]) / raw_spec.n[1] as f64,
        (raw_spec.upper[2] - raw_spec.lower[2]) / raw_spec.n[2] as f64,
    ];
    // Small embedded LCG keeps the fixture reproducible without a dependency.
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).max(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let (lo, hi) = mesh.bbox;
    let tol = 1e-9;
    let raw_nodes: Vec<Vec3> = mesh
        .nodes
        .iter()
        .map(|nd| {
            let mut p = nd.position;
            let interior = (0..3).all(|d| p[d] > lo[d] + tol && p[d] < hi[d] - tol);
            if interior {
                for d in 0..3 {
                    p[d] += amplitude * h[d] * next();
                }
            }
            p
        })
        .collect();
    let cells = mesh
        .cells
        .iter()
        .map(|c| (c.kind, c.nodes.to_vec()))
        .collect();
    mesh = compute_geometry(RawMesh {
        nodes: raw_nodes,
        cells,
        patches: Vec::new(),
    })?;
    assign_box_patches(&mut mesh, raw_spec.lower, raw_spec.upper);
    Ok(mesh)
}
