//! Plain-text file formats.
//!
//! Graph files hold one edge per line as two nonnegative integers; `#`
//! starts a comment line. External ids need not be contiguous and are mapped
//! to `0..n` in increasing order. Every other format refers to vertices by
//! their external ids.

use std::fmt::Write as _;

use crate::calculus::{EdgeDensity, VertexFunction};
use crate::error::{Error, Result};
use crate::generators::{FamilyKind, TruncatedFamily};
use crate::graph::{EdgePath, Graph};

/// Sorted external ids; internal id `i` is `external[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    external: Vec<u64>,
}

impl IdMap {
    pub fn identity(n: usize) -> Self {
        IdMap {
            external: (0..n as u64).collect(),
        }
    }

    pub fn internal(&self, id: u64) -> Option<usize> {
        self.external.binary_search(&id).ok()
    }

    pub fn external(&self, x: usize) -> u64 {
        self.external[x]
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    fn lookup(&self, id: u64, line: usize) -> Result<usize> {
        self.internal(id).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown vertex id {id}"),
        })
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_id(tok: &str, line: usize) -> Result<u64> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a nonnegative integer, found '{tok}'"),
    })
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            msg: format!("expected a finite number, found '{tok}'"),
        }),
    }
}

fn fields<const N: usize>(l: &str, line: usize) -> Result<[&str; N]> {
    let toks: Vec<&str> = l.split_whitespace().collect();
    toks.try_into().map_err(|t: Vec<&str>| Error::Parse {
        line,
        msg: format!("expected {N} fields, found {}", t.len()),
    })
}

pub fn read_graph(text: &str) -> Result<(Graph, IdMap)> {
    let mut raw = Vec::new();
    for (line, l) in content_lines(text) {
        let [a, b] = fields::<2>(l, line)?;
        raw.push((parse_id(a, line)?, parse_id(b, line)?));
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let map = IdMap { external: ids };
    let edges: Vec<(usize, usize)> = raw
        .iter()
        .map(|&(a, b)| (map.internal(a).unwrap(), map.internal(b).unwrap()))
        .collect();
    let g = Graph::from_edges(map.len(), edges)?;
    Ok((g, map))
}

pub fn write_graph(g: &Graph, map: &IdMap) -> String {
    let mut out = String::new();
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", map.external(u), map.external(v));
    }
    out
}

/// Sidecar metadata: labelled sections, one id per line.
pub fn write_meta(fam: &TruncatedFamily, map: &IdMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[family]\n{}", fam.kind);
    let _ = writeln!(out, "[root]\n{}", map.external(fam.root));
    let _ = writeln!(out, "[radius]\n{}", fam.truncation_radius);
    out.push_str("[frontier]\n");
    for &x in &fam.frontier {
        let _ = writeln!(out, "{}", map.external(x));
    }
    for part in &fam.parts {
        out.push_str("[part]\n");
        for &x in part {
            let _ = writeln!(out, "{}", map.external(x));
        }
    }
    if let Some(coords) = &fam.coords {
        out.push_str("[coords]\n");
        for (x, c) in coords.iter().enumerate() {
            let cs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{} {}", map.external(x), cs.join(" "));
        }
    }
    out
}

/// Rebuilds a family from a graph and its metadata. Without metadata the
/// smallest id is the root.
pub fn read_family(g: Graph, map: &IdMap, meta: Option<&str>) -> Result<TruncatedFamily> {
    let Some(meta) = meta else {
        return TruncatedFamily::from_graph(g, FamilyKind::Tree, 0);
    };
    let mut kind = None;
    let mut root = None;
    let mut radius = None;
    let mut frontier = Vec::new();
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut coords: Vec<Option<Vec<i64>>> = Vec::new();
    let mut section = String::new();
    for (line, l) in content_lines(meta) {
        if l.starts_with('[') && l.ends_with(']') {
            section = l[1..l.len() - 1].to_string();
            match section.as_str() {
                "part" => parts.push(Vec::new()),
                "coords" => coords = vec![None; map.len()],
                "family" | "root" | "radius" | "frontier" => {}
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown section [{other}]"),
                    })
                }
            }
            continue;
        }
        match section.as_str() {
            "family" => kind = Some(l.parse::<FamilyKind>()?),
            "root" => root = Some(map.lookup(parse_id(l, line)?, line)?),
            "radius" => radius = Some(parse_id(l, line)? as usize),
            "frontier" => frontier.push(map.lookup(parse_id(l, line)?, line)?),
            "part" => parts
                .last_mut()
                .expect("part section opened")
                .push(map.lookup(parse_id(l, line)?, line)?),
            "coords" => {
                let mut toks = l.split_whitespace();
                let x = map.lookup(parse_id(toks.next().unwrap_or(""), line)?, line)?;
                let c = toks
                    .map(|t| {
                        t.parse::<i64>().map_err(|_| Error::Parse {
                            line,
                            msg: format!("bad coordinate '{t}'"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                coords[x] = Some(c);
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: "content outside any section".into(),
                })
            }
        }
    }
    let kind = kind.unwrap_or(FamilyKind::Tree);
    let root = root.unwrap_or(0);
    let mut fam = TruncatedFamily::from_graph(g, kind, root)?;
    if let Some(r) = radius {
        if r != fam.truncation_radius {
            return Err(Error::domain(format!(
                "metadata radius {r} disagrees with the graph's radius {}",
                fam.truncation_radius
            )));
        }
    }
    frontier.sort_unstable();
    if !frontier.is_empty() && frontier != fam.frontier {
        return Err(Error::domain("metadata frontier disagrees with the graph"));
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    fam.parts = parts;
    if !coords.is_empty() {
        let all: Option<Vec<Vec<i64>>> = coords.into_iter().collect();
        fam.coords = Some(all.ok_or_else(|| Error::domain("coords section misses vertices"))?);
    }
    Ok(fam)
}

/// Vertex set: whitespace-separated ids.
pub fn read_set(text: &str, map: &IdMap) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        for tok in l.split_whitespace() {
            out.push(map.lookup(parse_id(tok, line)?, line)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn write_set(set: &[usize], map: &IdMap) -> String {
    set.iter().map(|&x| format!("{}\n", map.external(x))).collect()
}

pub fn read_function(text: &str, map: &IdMap) -> Result<VertexFunction> {
    let mut pairs = Vec::new();
    for (line, l) in content_lines(text) {
        let [a, v] = fields::<2>(l, line)?;
        pairs.push((map.lookup(parse_id(a, line)?, line)?, parse_value(v, line)?));
    }
    VertexFunction::from_pairs(map.len(), pairs)
}

pub fn write_function(f: &VertexFunction, map: &IdMap) -> String {
    let mut out = String::new();
    for (x, v) in f.iter() {
        let _ = writeln!(out, "{} {}", map.external(x), v);
    }
    out
}

pub fn write_density(g: &Graph, rho: &EdgeDensity, map: &IdMap) -> String {
    let mut out = String::new();
    for (&(u, v), r) in g.edges().iter().zip(rho.values()) {
        let (a, b) = (map.external(u), map.external(v));
        let _ = writeln!(out, "{} {} {}", a.min(b), a.max(b), r);
    }
    out
}

pub fn read_density(text: &str, g: &Graph, map: &IdMap) -> Result<EdgeDensity> {
    let mut values = vec![0.0; g.edge_count()];
    for (line, l) in content_lines(text) {
        let [a, b, v] = fields::<3>(l, line)?;
        let (u, w) = (map.lookup(parse_id(a, line)?, line)?, map.lookup(parse_id(b, line)?, line)?);
        let e = g.edge_id(u, w).ok_or_else(|| Error::Parse {
            line,
            msg: format!("{a} {b} is not an edge"),
        })?;
        values[e] = parse_value(v, line)?;
    }
    EdgeDensity::new(values)
}

/// One path per line as whitespace-separated vertex ids.
pub fn read_paths(text: &str, g: &Graph, map: &IdMap) -> Result<Vec<EdgePath>> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let verts = l
            .split_whitespace()
            .map(|t| map.lookup(parse_id(t, line)?, line))
            .collect::<Result<Vec<_>>>()?;
        out.push(EdgePath::new(g, verts).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}
