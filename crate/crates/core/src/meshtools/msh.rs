//! Reader for the ASCII MSH 2.2 subset: $MeshFormat, $PhysicalNames,
//! $Nodes and $Elements with linear volume elements (tet, pyramid, prism,
//! hex) plus surface triangles/quads carrying physical-group tags.

use crate::mesh::{compute_geometry, CellKind, Mesh, RawMesh};
use crate::{CgksError, Result};
use std::collections::HashMap;
use std::path::Path;

pub fn read_msh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let parse_err =
        |line: usize, msg: String| CgksError::MeshParse { line, msg };

    let mut i = 0;
    let mut node_ids: HashMap<u64, usize> = HashMap::new();
    let mut nodes: Vec<[f64; 3]> = Vec::new();
    let mut cells: Vec<(CellKind, Vec<usize>)> = Vec::new();
    let mut phys_names: HashMap<i64, String> = HashMap::new();
    // physical tag -> surface faces
    let mut surfaces: HashMap<i64, Vec<Vec<usize>>> = HashMap::new();

    while i < lines.len() {
        let line = lines[i].trim();
        match line {
            "$MeshFormat" => {
                let fmt = lines.get(i + 1).map(|l| l.trim()).unwrap_or("");
                let mut toks = fmt.split_whitespace();
                let version = toks.next().unwrap_or("");
                if !version.starts_with("2.") {
                    return Err(parse_err(
                        i + 2,
                        format!("unsupported MSH version '{version}' (need 2.x ASCII)"),
                    ));
                }
                if toks.next() != Some("0") {
                    return Err(parse_err(i + 2, "binary MSH is not supported".into()));
                }
                i = skip_to(&lines, i, "$EndMeshFormat")?;
            }
            "$PhysicalNames" => {
                let count: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.trim().parse().ok())
                    .ok_or_else(|| parse_err(i + 2, "bad $PhysicalNames count".into()))?;
                for k in 0..count {
                    let ln = i + 2 + k;
                    let l = lines
                        .get(ln)
                        .ok_or_else(|| parse_err(ln + 1, "truncated $PhysicalNames".into()))?;
                    let mut toks = l.trim().splitn(3, char::is_whitespace);
                    let _dim: i64 = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(ln + 1, "bad physical dim".into()))?;
                    let tag: i64 = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(ln + 1, "bad physical tag".into()))?;
                    let name = toks
                        .next()
                        .map(|t| t.trim().trim_matches('"').to_string())
                        .unwrap_or_else(|| format!("tag{tag}"));
                    phys_names.insert(tag, name);
                }
                i = skip_to(&lines, i, "$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let count: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.trim().parse().ok())
                    .ok_or_else(|| parse_err(i + 2, "bad $Nodes count".into()))?;
                for k in 0..count {
                    let ln = i + 2 + k;
                    let l = lines
                        .get(ln)
                        .ok_or_else(|| parse_err(ln + 1, "truncated $Nodes".into()))?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    if toks.len() != 4 {
                        return Err(parse_err(ln + 1, "node line needs 'id x y z'".into()));
                    }
                    let id: u64 = toks[0]
                        .parse()
                        .map_err(|_| parse_err(ln + 1, "bad node id".into()))?;
                    let mut pos = [0.0; 3];
                    for d in 0..3 {
                        pos[d] = toks[d + 1]
                            .parse()
                            .map_err(|_| parse_err(ln + 1, "bad node coordinate".into()))?;
                    }
                    node_ids.insert(id, nodes.len());
                    nodes.push(pos);
                }
                i = skip_to(&lines, i, "$EndNodes")?;
            }
            "$Elements" => {
                let count: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.trim().parse().ok())
                    .ok_or_else(|| parse_err(i + 2, "bad $Elements count".into()))?;
                for k in 0..count {
                    let ln = i + 2 + k;
                    let l = lines
                        .get(ln)
                        .ok_or_else(|| parse_err(ln + 1, "truncated $Elements".into()))?;
                    let toks: Vec<i64> = l
                        .split_whitespace()
                        .map(|t| t.parse::<i64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| parse_err(ln + 1, "bad element line".into()))?;
                    if toks.len() < 3 {
                        return Err(parse_err(ln + 1, "element line too short".into()));
                    }
                    let etype = toks[1];
                    let ntags = toks[2] as usize;
                    let node_toks = &toks[3 + ntags..];
                    let resolve = |ids: &[i64]| -> Result<Vec<usize>> {
                        ids.iter()
                            .map(|&id| {
                                node_ids.get(&(id as u64)).copied().ok_or_else(|| {
                                    parse_err(ln + 1, format!("dangling node reference {id}"))
                                })
                            })
                            .collect()
                    };
                    let expect = |n: usize| -> Result<Vec<usize>> {
                        if node_toks.len() != n {
                            return Err(parse_err(
                                ln + 1,
                                format!("element type {etype} needs {n} nodes"),
                            ));
                        }
                        resolve(node_toks)
                    };
                    let phys = if ntags > 0 { toks[3] } else { 0 };
                    match etype {
                        1 | 15 => {} // lines and points: ignored
                        2 => surfaces.entry(phys).or_default().push(expect(3)?),
                        3 => surfaces.entry(phys).or_default().push(expect(4)?),
                        4 => cells.push((CellKind::Tetrahedron, expect(4)?)),
                        5 => cells.push((CellKind::Hexahedron, expect(8)?)),
                        6 => cells.push((CellKind::Prism, expect(6)?)),
                        7 => cells.push((CellKind::Pyramid, expect(5)?)),
                        other => {
                            return Err(CgksError::UnsupportedElement {
                                code: other as i32,
                                line: ln + 1,
                            })
                        }
                    }
                }
                i = skip_to(&lines, i, "$EndElements")?;
            }
            _ => {}
        }
        i += 1;
    }

    if cells.is_empty() {
        return Err(CgksError::Invalid("MSH file contains no volume elements".into()));
    }
    let mut tagged: Vec<(i64, Vec<Vec<usize>>)> = surfaces.into_iter().collect();
    tagged.sort_by_key(|(tag, _)| *tag);
    let patches = tagged
        .into_iter()
        .map(|(tag, faces)| {
            let name = phys_names
                .get(&tag)
                .cloned()
                .unwrap_or_else(|| format!("tag{tag}"));
            (name, faces)
        })
        .collect();
    compute_geometry(RawMesh { nodes, cells, patches })
}

fn skip_to(lines: &[&str], from: usize, marker: &str) -> Result<usize> {
    for (j, l) in lines.iter().enumerate().skip(from) {
        if l.trim() == marker {
            return Ok(j);
        }
    }
    Err(CgksError::MeshParse {
        line: from + 1,
        msg: format!("missing {marker}"),
    })
}
