//! Geometry identities and exactness checks for the mesh layer.

use cgks_core::mesh::{compute_geometry, shifted_monomial_means, CellKind, Mesh, RawMesh, MONOMIALS};
use cgks_core::meshtools::{gen_box, gen_mixed_box, pair_periodic, BoxSpec, BoxStyle};
use cgks_core::vec3::{add, norm, scale, sub};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_cube() -> Mesh {
    let raw = RawMesh {
        nodes: vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ],
        cells: vec![(CellKind::Hexahedron, (0..8).collect())],
        patches: Vec::new(),
    };
    compute_geometry(raw).unwrap()
}

#[test]
fn unit_cube_volume_and_centroid() {
    let mesh = unit_cube();
    let c = &mesh.cells[0];
    assert!((c.volume - 1.0).abs() < 1e-14);
    for d in 0..3 {
        assert!((c.centroid[d] - 0.5).abs() < 1e-14);
    }
    assert_eq!(mesh.faces.len(), 6);
}

#[test]
fn unit_cube_basis_moments() {
    let mesh = unit_cube();
    let m = mesh.cells[0].moments;
    // Degree-1 vanish by centroid choice; x^2 mean over [-1/2,1/2] is 1/12.
    for j in 0..3 {
        assert!(m[j].abs() < 1e-13, "degree-1 moment {j} = {}", m[j]);
    }
    for j in 3..6 {
        assert!((m[j] - 1.0 / 12.0).abs() < 1e-14, "moment {j} = {}", m[j]);
    }
    for j in 6..9 {
        assert!(m[j].abs() < 1e-14, "mixed moment {j} = {}", m[j]);
    }
}

#[test]
fn cube_split_into_six_tets_preserves_volume() {
    let spec = BoxSpec::cube(0.0, 1.0, 2, BoxStyle::Tet6);
    let mesh = gen_box(&spec).unwrap();
    assert_eq!(mesh.cells.len(), 6 * 8);
    for c in &mesh.cells {
        assert!((c.volume - 1.0 / 48.0).abs() < 1e-15);
    }
    assert!((mesh.total_volume() - 1.0).abs() < 1e-13);
}

#[test]
fn closed_surface_identity_all_kinds() {
    // Includes skewed cells via jitter and all four element kinds.
    let meshes = [
        gen_box(&BoxSpec::cube(0.0, 2.0, 3, BoxStyle::Hex)).unwrap(),
        gen_box(&BoxSpec::cube(0.0, 2.0, 3, BoxStyle::Tet6)).unwrap(),
        gen_mixed_box(0.0, 2.0, 3).unwrap(),
        cgks_core::meshtools::jitter_interior_nodes(
            &BoxSpec::cube(0.0, 2.0, 4, BoxStyle::Hex),
            0.25,
            7,
        )
        .unwrap(),
    ];
    for mesh in &meshes {
        for (ci, cell) in mesh.cells.iter().enumerate() {
            let mut sum = [0.0; 3];
            let mut area = 0.0;
            for &f in &cell.faces {
                let n = mesh.outward_normal(ci, f);
                sum = add(sum, scale(n, mesh.faces[f].area));
                area += mesh.faces[f].area;
            }
            assert!(
                norm(sum) <= 1e-12 * area,
                "cell {ci}: residual {:.3e}",
                norm(sum)
            );
        }
    }
}

#[test]
fn quadrature_weights_sum_to_one() {
    let mesh = gen_mixed_box(0.0, 1.0, 3).unwrap();
    for f in &mesh.faces {
        let s: f64 = f.qpoints.iter().map(|q| q.weight).sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert!((norm(f.normal) - 1.0).abs() < 1e-12);
        assert_eq!(f.qpoints.len(), if f.nodes.len() == 3 { 3 } else { 4 });
    }
}

#[test]
fn reference_tet_moments_match_monte_carlo() {
    let raw = RawMesh {
        nodes: vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ],
        cells: vec![(CellKind::Tetrahedron, vec![0, 1, 2, 3])],
        patches: Vec::new(),
    };
    let mesh = compute_geometry(raw).unwrap();
    let cell = &mesh.cells[0];
    assert!((cell.volume - 1.0 / 6.0).abs() < 1e-15);

    // Brute-force Monte Carlo oracle: sample the bounding box, keep points
    // inside the tet.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut acc = [0.0f64; 9];
    let mut hits = 0u64;
    let samples = 10_000_000u64;
    for _ in 0..samples {
        let p = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        if p[0] + p[1] + p[2] <= 1.0 {
            hits += 1;
            let d = sub(p, cell.centroid);
            for (j, (a, b, c)) in MONOMIALS.iter().enumerate() {
                acc[j] += d[0].powi(*a as i32) * d[1].powi(*b as i32) * d[2].powi(*c as i32);
            }
        }
    }
    for j in 3..9 {
        let mc = acc[j] / hits as f64;
        let rel = (mc - cell.moments[j]).abs() / cell.moments[j].abs().max(1e-3);
        assert!(
            rel < 1e-2,
            "moment {j}: mc {mc:.6e} vs exact {:.6e}",
            cell.moments[j]
        );
    }
    // Tighter check on the dominant diagonal moments with the large sample.
    for j in 3..6 {
        let mc = acc[j] / hits as f64;
        assert!((mc - cell.moments[j]).abs() / cell.moments[j] < 3e-3);
    }
}

#[test]
fn neighbor_integrals_self_and_adjacent() {
    // Two adjacent unit cubes sharing the x = 1 face.
    let raw = RawMesh {
        nodes: vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
            [2.0, 0.0, 0.0],
            [2.0, 1.0, 0.0],
            [2.0, 0.0, 1.0],
            [2.0, 1.0, 1.0],
        ],
        cells: vec![
            (CellKind::Hexahedron, vec![0, 1, 2, 3, 4, 5, 6, 7]),
            (CellKind::Hexahedron, vec![1, 8, 9, 2, 5, 10, 11, 6]),
        ],
        patches: Vec::new(),
    };
    let mesh = compute_geometry(raw).unwrap();
    let shared = mesh.cells[0]
        .faces
        .iter()
        .copied()
        .find(|&f| !mesh.faces[f].is_boundary())
        .unwrap();

    // Self case via shifted means with zero offset equals own moments.
    let own = shifted_monomial_means(&mesh.cells[0], [0.0; 3], mesh.cells[0].centroid);
    for j in 0..9 {
        assert!((own[j] - mesh.cells[0].moments[j]).abs() < 1e-14);
    }

    let ints = mesh.neighbor_monomial_integrals(0, shared).unwrap();
    // Linear basis: integral of (x - x0) over the neighbor = |Omega| * 1.
    assert!((ints[0] - 1.0).abs() < 1e-13, "dx integral {}", ints[0]);
    assert!(ints[1].abs() < 1e-13 && ints[2].abs() < 1e-13);
    // Parallel-axis identity: integral of (x - x0)^2 = 1^2 + 1/12 = 13/12.
    assert!(
        (ints[3] - 13.0 / 12.0).abs() < 1e-13,
        "dx^2 integral {}",
        ints[3]
    );
    // Transverse moment is unaffected by the x offset: (y - y0)^2 mean 1/12.
    assert!((ints[4] - 1.0 / 12.0).abs() < 1e-13);

    // Independent quadrature route for the same integrals: integrate the
    // target-centered monomials directly over the neighbor's volume.
    use cgks_core::mesh::quadrature::tet_integrate2;
    let x0 = mesh.cells[0].centroid;
    let nb = &mesh.cells[1];
    let corners: Vec<[f64; 3]> = nb.nodes.iter().map(|&n| mesh.nodes[n].position).collect();
    // Cube decomposition into 6 Kuhn-style tets around the main diagonal.
    let tet_ids = [
        [0, 1, 2, 6],
        [0, 2, 3, 6],
        [0, 3, 7, 6],
        [0, 7, 4, 6],
        [0, 4, 5, 6],
        [0, 5, 1, 6],
    ];
    for (j, (a, b, c)) in MONOMIALS.iter().enumerate() {
        let mut direct = 0.0;
        for t in tet_ids {
            let v = [corners[t[0]], corners[t[1]], corners[t[2]], corners[t[3]]];
            direct += tet_integrate2(&v, |p| {
                let d = sub(p, x0);
                d[0].powi(*a as i32) * d[1].powi(*b as i32) * d[2].powi(*c as i32)
            });
        }
        assert!(
            (direct - ints[j]).abs() < 1e-12,
            "monomial {j}: quadrature {direct} vs parallel-axis {}",
            ints[j]
        );
    }
}

#[test]
fn box_counts_and_volumes() {
    let hex = gen_box(&BoxSpec::cube(0.0, 2.0, 10, BoxStyle::Hex)).unwrap();
    assert_eq!(hex.cells.len(), 1000);
    for c in &hex.cells {
        assert!((c.volume - 0.008).abs() < 1e-15);
    }
    let tet = gen_box(&BoxSpec::cube(0.0, 2.0, 5, BoxStyle::Tet6)).unwrap();
    assert_eq!(tet.cells.len(), 750);
    let tet10 = gen_box(&BoxSpec::cube(0.0, 2.0, 10, BoxStyle::Tet6)).unwrap();
    assert!((tet10.total_volume() - 8.0).abs() < 1e-12 * 8.0);
}

#[test]
fn periodic_pairing_box() {
    let mut mesh = gen_box(&BoxSpec::cube(0.0, 2.0, 4, BoxStyle::Hex)).unwrap();
    let before = mesh.faces.len();
    pair_periodic(&mut mesh, 0, 1e-9).unwrap();
    assert_eq!(mesh.periodic.len(), 16);
    assert_eq!(mesh.faces.len(), before - 16);
    pair_periodic(&mut mesh, 1, 1e-9).unwrap();
    pair_periodic(&mut mesh, 2, 1e-9).unwrap();
    // Fully periodic: no boundary faces remain and every cell sees a
    // neighbor through each face.
    assert!(mesh.faces.iter().all(|f| !f.is_boundary()));
    for ci in 0..mesh.cells.len() {
        assert!(mesh.has_full_stencil(ci));
        for &f in &mesh.cells[ci].faces {
            let (nb, off) = mesh.neighbor_across(ci, f).unwrap();
            // Effective neighbor centroid must be one spacing away.
            let d = norm(sub(
                add(mesh.cells[nb].centroid, off),
                mesh.cells[ci].centroid,
            ));
            assert!((d - 0.5).abs() < 1e-12, "cell {ci}: offset distance {d}");
        }
    }
}

#[test]
fn periodic_pairing_detects_missing_face() {
    let mut mesh = gen_box(&BoxSpec::cube(0.0, 1.0, 3, BoxStyle::Hex)).unwrap();
    // Corrupt one xmin boundary face centroid so it cannot match.
    let victim = (0..mesh.faces.len())
        .find(|&f| mesh.faces[f].is_boundary() && mesh.faces[f].centroid[0].abs() < 1e-12)
        .unwrap();
    mesh.faces[victim].centroid[1] += 0.4;
    let err = pair_periodic(&mut mesh, 0, 1e-9);
    assert!(matches!(
        err,
        Err(cgks_core::CgksError::UnmatchedPeriodicFace { .. })
    ));
}

#[test]
fn mixed_box_is_conforming_and_periodic_ready() {
    let mut mesh = gen_mixed_box(0.0, 1.0, 4).unwrap();
    let kinds: std::collections::HashSet<&str> =
        mesh.cells.iter().map(|c| c.kind.name()).collect();
    assert!(kinds.contains("hex") && kinds.contains("prism") && kinds.contains("pyramid"));
    assert!((mesh.total_volume() - 1.0).abs() < 1e-12);
    for axis in 0..3 {
        pair_periodic(&mut mesh, axis, 1e-9).unwrap();
    }
    for ci in 0..mesh.cells.len() {
        assert!(mesh.has_full_stencil(ci), "cell {ci} lost its stencil");
        assert_eq!(
            mesh.cells[ci].faces.len(),
            mesh.cells[ci].kind.face_count()
        );
    }
}

#[test]
fn rejects_tangled_cell() {
    // Swap two nodes of a hex to invert it.
    let raw = RawMesh {
        nodes: vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ],
        cells: vec![(CellKind::Hexahedron, vec![1, 0, 3, 2, 5, 4, 7, 6])],
        patches: Vec::new(),
    };
    assert!(compute_geometry(raw).is_err());
}
