//! Versioned structured-text mesh format, header `cgksmesh 1`.
//!
//! ```text
//! cgksmesh 1
//! nodes <N>
//! <x> <y> <z>            # N lines
//! cells <M>
//! <kind> <node ids...>   # kind in {tet, pyramid, prism, hex}
//! patches <P>
//! patch <name> <F>
//! <n0 n1 n2 [n3]>        # F lines of boundary-face node ids
//! ```

use crate::mesh::{compute_geometry, CellKind, Mesh, RawMesh};
use crate::{CgksError, Result};
use std::fmt::Write as _;
use std::path::Path;

pub fn write_native(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("cgksmesh 1\n");
    writeln!(out, "nodes {}", mesh.nodes.len()).unwrap();
    for n in &mesh.nodes {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", n.position[0], n.position[1], n.position[2])
            .unwrap();
    }
    writeln!(out, "cells {}", mesh.cells.len()).unwrap();
    for c in &mesh.cells {
        let ids: Vec<String> = c.nodes.iter().map(|n| n.to_string()).collect();
        writeln!(out, "{} {}", c.kind.name(), ids.join(" ")).unwrap();
    }
    // Group boundary faces by patch (merged periodic faces are interior and
    // are therefore not written).
    let mut by_patch: Vec<Vec<&crate::mesh::Face>> = vec![Vec::new(); mesh.patches.len()];
    for f in &mesh.faces {
        if let crate::mesh::FaceNeighbor::Boundary { patch } = f.neighbor {
            by_patch[patch].push(f);
        }
    }
    let nonempty: Vec<usize> = (0..mesh.patches.len())
        .filter(|&p| !by_patch[p].is_empty())
        .collect();
    writeln!(out, "patches {}", nonempty.len()).unwrap();
    for p in nonempty {
        writeln!(out, "patch {} {}", mesh.patches[p].name, by_patch[p].len()).unwrap();
        for f in &by_patch[p] {
            let ids: Vec<String> = f.nodes.iter().map(|n| n.to_string()).collect();
            writeln!(out, "{}", ids.join(" ")).unwrap();
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_native(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let mut next = || -> Result<(usize, &str)> {
        for (ln, line) in lines.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok((ln + 1, t));
            }
        }
        Err(CgksError::MeshParse { line: 0, msg: "unexpected end of file".into() })
    };
    let parse_err = |line: usize, msg: &str| CgksError::MeshParse { line, msg: msg.to_string() };

    let (ln, header) = next()?;
    if header != "cgksmesh 1" {
        return Err(parse_err(ln, "expected header 'cgksmesh 1'"));
    }
    let (ln, nd) = next()?;
    let n_nodes: usize = nd
        .strip_prefix("nodes ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(ln, "expected 'nodes <count>'"))?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = next()?;
        let vals: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(ln, "bad node coordinates"))?;
        if vals.len() != 3 {
            return Err(parse_err(ln, "node line needs 3 coordinates"));
        }
        nodes.push([vals[0], vals[1], vals[2]]);
    }
    let (ln, cd) = next()?;
    let n_cells: usize = cd
        .strip_prefix("cells ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(ln, "expected 'cells <count>'"))?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (ln, l) = next()?;
        let mut toks = l.split_whitespace();
        let kind = match toks.next() {
            Some("tet") => CellKind::Tetrahedron,
            Some("pyramid") => CellKind::Pyramid,
            Some("prism") => CellKind::Prism,
            Some("hex") => CellKind::Hexahedron,
            other => {
                return Err(parse_err(ln, &format!("unknown cell kind {other:?}")));
            }
        };
        let ids: Vec<usize> = toks
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(ln, "bad node id"))?;
        if ids.len() != kind.node_count() {
            return Err(parse_err(ln, "wrong node count for cell kind"));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= nodes.len()) {
            return Err(parse_err(ln, &format!("dangling node reference {bad}")));
        }
        cells.push((kind, ids));
    }
    let (ln, pd) = next()?;
    let n_patches: usize = pd
        .strip_prefix("patches ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(ln, "expected 'patches <count>'"))?;
    let mut patches = Vec::with_capacity(n_patches);
    for _ in 0..n_patches {
        let (ln, l) = next()?;
        let mut toks = l.split_whitespace();
        if toks.next() != Some("patch") {
            return Err(parse_err(ln, "expected 'patch <name> <count>'"));
        }
        let name = toks
            .next()
            .ok_or_else(|| parse_err(ln, "missing patch name"))?
            .to_string();
        let count: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "missing patch face count"))?;
        let mut faces = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = next()?;
            let ids: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(ln, "bad face node id"))?;
            if ids.len() < 3 || ids.len() > 4 {
                return Err(parse_err(ln, "patch face needs 3 or 4 nodes"));
            }
            faces.push(ids);
        }
        patches.push((name, faces));
    }
    compute_geometry(RawMesh { nodes, cells, patches })
}
