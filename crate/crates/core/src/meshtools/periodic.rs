//! Periodic pairing of opposite boundary faces.

use crate::mesh::{FaceNeighbor, Mesh, PeriodicPair};
use crate::vec3::{add, dot, norm, sub, Vec3};
use crate::{CgksError, Result};

/// Pair boundary faces lying on the two bounding planes normal to `axis`,
/// matching translated centroids within `tol`. Matched pairs are merged into
/// single interior faces carrying the translation.
pub fn pair_periodic(mesh: &mut Mesh, axis: usize, tol: f64) -> Result<()> {
    let (lo, hi) = mesh.bbox;
    let span = hi[axis] - lo[axis];
    let mut shift = [0.0; 3];
    shift[axis] = span;

    let mut lo_faces = Vec::new();
    let mut hi_faces = Vec::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        if !f.is_boundary() {
            continue;
        }
        if (f.centroid[axis] - lo[axis]).abs() <= tol {
            lo_faces.push(fi);
        } else if (f.centroid[axis] - hi[axis]).abs() <= tol {
            hi_faces.push(fi);
        }
    }
    if lo_faces.len() != hi_faces.len() {
        let fi = *lo_faces.first().or(hi_faces.first()).ok_or_else(|| {
            CgksError::Invalid(format!("no boundary faces found on axis {axis} planes"))
        })?;
        return Err(CgksError::UnmatchedPeriodicFace {
            centroid: mesh.faces[fi].centroid,
        });
    }

    // Quantized transverse-centroid lookup for the high-side faces.
    let q = tol.max(1e-300);
    let key = |c: Vec3| -> (i64, i64) {
        let t = transverse(axis);
        ((c[t.0] / q).round() as i64, (c[t.1] / q).round() as i64)
    };
    let mut lookup: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for &fi in &hi_faces {
        lookup.entry(key(mesh.faces[fi].centroid)).or_default().push(fi);
    }

    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(lo_faces.len());
    let mut used = vec![false; mesh.faces.len()];
    for &fl in &lo_faces {
        let target = add(mesh.faces[fl].centroid, shift);
        let (k0, k1) = key(target);
        let mut found = None;
        'probe: for dk0 in -1..=1 {
            for dk1 in -1..=1 {
                if let Some(cands) = lookup.get(&(k0 + dk0, k1 + dk1)) {
                    for &fh in cands {
                        if !used[fh] && norm(sub(mesh.faces[fh].centroid, target)) <= tol {
                            found = Some(fh);
                            break 'probe;
                        }
                    }
                }
            }
        }
        let fh = found.ok_or(CgksError::UnmatchedPeriodicFace {
            centroid: mesh.faces[fl].centroid,
        })?;
        used[fh] = true;

        let (a_lo, a_hi) = (mesh.faces[fl].area, mesh.faces[fh].area);
        if (a_lo - a_hi).abs() > 1e-12 * a_lo.max(a_hi) {
            return Err(CgksError::Invalid(format!(
                "periodic pair area mismatch: {a_lo:.16} vs {a_hi:.16}"
            )));
        }
        if dot(mesh.faces[fl].normal, mesh.faces[fh].normal) > -1.0 + 1e-10 {
            return Err(CgksError::Invalid(
                "periodic pair normals are not opposite".into(),
            ));
        }
        pairs.push((fl, fh));
    }

    // Merge: the low-side face becomes interior; the high-side face is
    // dropped and its owner re-points to the kept face.
    let mut drop = vec![false; mesh.faces.len()];
    for &(fl, fh) in &pairs {
        let hi_owner = mesh.faces[fh].owner;
        mesh.faces[fl].neighbor = FaceNeighbor::Interior {
            cell: hi_owner,
            shift,
        };
        drop[fh] = true;
        for f in mesh.cells[hi_owner].faces.iter_mut() {
            if *f == fh {
                *f = fl;
            }
        }
    }
    let mut remap = vec![usize::MAX; mesh.faces.len()];
    let mut kept = 0;
    for fi in 0..mesh.faces.len() {
        if !drop[fi] {
            remap[fi] = kept;
            kept += 1;
        }
    }
    let mut faces = Vec::with_capacity(kept);
    for (fi, f) in mesh.faces.drain(..).enumerate() {
        if !drop[fi] {
            faces.push(f);
        }
    }
    mesh.faces = faces;
    for cell in &mut mesh.cells {
        for f in cell.faces.iter_mut() {
            *f = remap[*f];
        }
    }
    for pair in &mut mesh.periodic {
        pair.face = remap[pair.face];
    }
    for (fl, _) in pairs {
        mesh.periodic.push(PeriodicPair {
            face: remap[fl],
            shift,
        });
    }
    Ok(())
}

fn transverse(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}
