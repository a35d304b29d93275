//! Finite truncations of the infinite test families: regular trees, lattice
//! balls, half-lines and wedges.
//!
//! Vertices are numbered in BFS order from the root. The frontier (the
//! vertices at maximal distance) stands for "toward infinity".

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Tree,
    Lattice,
    Wedge,
    Path,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Tree => "tree",
            FamilyKind::Lattice => "lattice",
            FamilyKind::Wedge => "wedge",
            FamilyKind::Path => "path",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(FamilyKind::Tree),
            "lattice" => Ok(FamilyKind::Lattice),
            "wedge" => Ok(FamilyKind::Wedge),
            "path" => Ok(FamilyKind::Path),
            other => Err(Error::domain(format!("unknown family kind '{other}'"))),
        }
    }
}

/// A finite truncation of an infinite graph, with a distinguished root.
#[derive(Debug, Clone)]
pub struct TruncatedFamily {
    pub graph: Graph,
    pub kind: FamilyKind,
    pub truncation_radius: usize,
    pub root: usize,
    /// Vertices at distance `truncation_radius` from the root, sorted.
    pub frontier: Vec<usize>,
    /// Distance of every vertex from the root.
    pub depth: Vec<usize>,
    /// For wedges: the vertices of each part, root excluded.
    pub parts: Vec<Vec<usize>>,
    /// For lattices: integer coordinates of each vertex.
    pub coords: Option<Vec<Vec<i64>>>,
}

impl TruncatedFamily {
    /// Wraps an arbitrary graph, taking the vertices at maximal distance
    /// from `root` as the frontier.
    pub fn from_graph(graph: Graph, kind: FamilyKind, root: usize) -> Result<Self> {
        let depth = graph.distances_from(root)?;
        let radius = depth.iter().copied().max().unwrap_or(0);
        if radius == 0 {
            return Err(Error::domain("truncation needs at least one non-root vertex"));
        }
        let frontier = (0..graph.vertex_count())
            .filter(|&x| depth[x] == radius)
            .collect();
        Ok(TruncatedFamily {
            graph,
            kind,
            truncation_radius: radius,
            root,
            frontier,
            depth,
            parts: Vec::new(),
            coords: None,
        })
    }

    /// Vertices at distance exactly `n` from the root.
    pub fn shell(&self, n: usize) -> Vec<usize> {
        (0..self.graph.vertex_count())
            .filter(|&x| self.depth[x] == n)
            .collect()
    }

    /// Vertices at distance `< n` from the root (the ball `B_n(root)`).
    pub fn ball(&self, n: usize) -> Vec<usize> {
        (0..self.graph.vertex_count())
            .filter(|&x| self.depth[x] < n)
            .collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Branches at the root: components of `V ∖ {root}`.
    pub fn root_branches(&self) -> Vec<Vec<usize>> {
        let rest: Vec<usize> = (0..self.vertex_count()).filter(|&x| x != self.root).collect();
        self.graph.components(&rest)
    }

    /// Default seed sets for massive-set searches: wedge parts when present,
    /// otherwise the branches at the root.
    pub fn seed_branches(&self) -> Vec<Vec<usize>> {
        if self.parts.is_empty() {
            self.root_branches()
        } else {
            self.parts.clone()
        }
    }

    /// Vertex id of a lattice point, if present.
    pub fn lattice_vertex(&self, point: &[i64]) -> Option<usize> {
        let coords = self.coords.as_ref()?;
        coords.iter().position(|c| c.as_slice() == point)
    }
}

/// Renumbers a graph in BFS order from `root`, visiting neighbors in the
/// order they appear in `adjacency`. Returns the relabelled edge list and the
/// old-to-new map.
fn bfs_relabel(adjacency: &[Vec<usize>], root: usize) -> (Vec<(usize, usize)>, Vec<usize>) {
    let n = adjacency.len();
    let mut new_id = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::from([root]);
    new_id[root] = next;
    next += 1;
    while let Some(x) = queue.pop_front() {
        for &y in &adjacency[x] {
            if new_id[y] == usize::MAX {
                new_id[y] = next;
                next += 1;
                queue.push_back(y);
            }
        }
    }
    let mut edges = Vec::new();
    for (x, list) in adjacency.iter().enumerate() {
        for &y in list {
            if x < y {
                edges.push((new_id[x], new_id[y]));
            }
        }
    }
    (edges, new_id)
}

/// The ball of radius `depth` around the root of the infinite `k`-regular
/// tree. `k = 2` gives the segment `[-depth, depth]` of ℤ.
pub fn regular_tree(k: usize, depth: usize) -> Result<TruncatedFamily> {
    if k < 2 {
        return Err(Error::domain(format!("regular tree needs k >= 2, got {k}")));
    }
    if depth == 0 {
        return Err(Error::domain("tree depth must be at least 1"));
    }
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut count = 1;
    for d in 0..depth {
        let mut next_level = Vec::new();
        for &parent in &level {
            let children = if d == 0 { k } else { k - 1 };
            for _ in 0..children {
                edges.push((parent, count));
                next_level.push(count);
                count += 1;
            }
        }
        level = next_level;
    }
    let graph = Graph::from_edges(count, edges)?.with_degree_bound(k)?;
    TruncatedFamily::from_graph(graph, FamilyKind::Tree, 0)
}

/// Nearest-neighbor subgraph of ℤ^d induced on the ℓ¹ ball `Σ|vᵢ| ≤ radius`.
pub fn lattice(dim: usize, radius: usize) -> Result<TruncatedFamily> {
    if dim == 0 {
        return Err(Error::domain("lattice dimension must be at least 1"));
    }
    if radius == 0 {
        return Err(Error::domain("lattice radius must be at least 1"));
    }
    let r = radius as i64;
    let origin = vec![0i64; dim];
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut coords = vec![origin.clone()];
    index.insert(origin, 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let here = coords[x].clone();
        for axis in 0..dim {
            for step in [1i64, -1] {
                let mut there = here.clone();
                there[axis] += step;
                if there.iter().map(|c| c.abs()).sum::<i64>() > r {
                    continue;
                }
                let y = match index.get(&there) {
                    Some(&y) => y,
                    None => {
                        let y = coords.len();
                        index.insert(there.clone(), y);
                        coords.push(there);
                        queue.push_back(y);
                        y
                    }
                };
                if x < y {
                    edges.push((x, y));
                }
            }
        }
    }
    let graph = Graph::from_edges(coords.len(), edges)?.with_degree_bound(2 * dim)?;
    let mut fam = TruncatedFamily::from_graph(graph, FamilyKind::Lattice, 0)?;
    fam.coords = Some(coords);
    Ok(fam)
}

/// A half-line `0 – 1 – … – length` rooted at `0`.
pub fn path(length: usize) -> Result<TruncatedFamily> {
    if length == 0 {
        return Err(Error::domain("path length must be at least 1"));
    }
    let graph = Graph::from_edges(length + 1, (1..=length).map(|i| (i - 1, i)))?
        .with_degree_bound(2)?;
    TruncatedFamily::from_graph(graph, FamilyKind::Path, 0)
}

/// Disjoint union of `parts` with all roots identified to one new root.
pub fn wedge(parts: &[TruncatedFamily]) -> Result<TruncatedFamily> {
    if parts.len() < 2 {
        return Err(Error::domain(format!(
            "wedge needs at least two parts, got {}",
            parts.len()
        )));
    }
    let radius = parts[0].truncation_radius;
    if parts.iter().any(|p| p.truncation_radius != radius) {
        return Err(Error::domain("wedge parts must share a truncation radius"));
    }
    // temporary ids: 0 is the shared root, then each part's non-root vertices
    let mut offsets = Vec::with_capacity(parts.len());
    let mut total = 1;
    for p in parts {
        offsets.push(total);
        total += p.vertex_count() - 1;
    }
    let temp_id = |part: usize, x: usize| -> usize {
        let p = &parts[part];
        if x == p.root {
            0
        } else if x < p.root {
            offsets[part] + x
        } else {
            offsets[part] + x - 1
        }
    };
    let mut adjacency = vec![Vec::new(); total];
    for (i, p) in parts.iter().enumerate() {
        for &(u, v) in p.graph.edges() {
            let (a, b) = (temp_id(i, u), temp_id(i, v));
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    let (edges, new_id) = bfs_relabel(&adjacency, 0);
    let graph = Graph::from_edges(total, edges)?;
    let mut fam = TruncatedFamily::from_graph(graph, FamilyKind::Wedge, 0)?;
    fam.parts = parts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut set: Vec<usize> = (0..p.vertex_count())
                .filter(|&x| x != p.root)
                .map(|x| new_id[temp_id(i, x)])
                .collect();
            set.sort_unstable();
            set
        })
        .collect();
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_counts() {
        let t = regular_tree(3, 2).unwrap();
        assert_eq!(t.vertex_count(), 10);
        assert_eq!(t.frontier.len(), 6);
        assert_eq!(t.graph.degree(t.root), 3);
        assert_eq!(t.graph.degree_bound(), 3);
        for depth in 1..8 {
            let t = regular_tree(3, depth).unwrap();
            assert_eq!(t.frontier.len(), 3 << (depth - 1));
        }
        assert!(regular_tree(1, 3).is_err());
    }

    #[test]
    fn two_regular_tree_is_a_segment() {
        let t = regular_tree(2, 4).unwrap();
        assert_eq!(t.vertex_count(), 9);
        assert_eq!(t.graph.edge_count(), 8);
        assert!((0..9).all(|x| t.graph.degree(x) <= 2));
        assert_eq!(t.frontier.len(), 2);
    }

    #[test]
    fn lattice_counts() {
        let l = lattice(2, 1).unwrap();
        assert_eq!(l.vertex_count(), 5);
        assert_eq!(l.graph.edge_count(), 4);
        for r in 1..7 {
            assert_eq!(lattice(2, r).unwrap().vertex_count(), 2 * r * r + 2 * r + 1);
        }
        assert_eq!(lattice(1, 5).unwrap().vertex_count(), 11);
        assert_eq!(lattice(3, 2).unwrap().graph.degree_bound(), 6);
    }

    #[test]
    fn wedge_of_paths_is_a_star() {
        let arms: Vec<_> = (0..3).map(|_| path(4).unwrap()).collect();
        let w = wedge(&arms).unwrap();
        assert_eq!(w.vertex_count(), 13);
        assert_eq!(w.graph.degree(w.root), 3);
        assert_eq!(w.frontier.len(), 3);
        assert_eq!(w.parts.len(), 3);
        assert!(wedge(&arms[..1]).is_err());
        assert!(wedge(&[]).is_err());
    }

    #[test]
    fn wedge_of_two_halves_is_a_line() {
        let w = wedge(&[path(5).unwrap(), path(5).unwrap()]).unwrap();
        assert_eq!(w.vertex_count(), 11);
        assert!((0..11).all(|x| w.graph.degree(x) <= 2));
    }

    #[test]
    fn tree_truncations_nest() {
        let small = regular_tree(3, 4).unwrap();
        let big = regular_tree(3, 5).unwrap();
        let ball = big.ball(5);
        assert_eq!(ball, (0..small.vertex_count()).collect::<Vec<_>>());
        let (sub, _) = big.graph.induced_subgraph(&ball).unwrap();
        assert_eq!(sub.edges(), small.graph.edges());
    }
}
