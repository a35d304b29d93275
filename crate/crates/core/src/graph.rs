//! Immutable bounded-degree graphs over dense integer vertex ids.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A connected, simple, undirected graph with vertices `0..vertex_count`.
///
/// Adjacency lists are sorted. Every undirected edge has a canonical id,
/// assigned in lexicographic order of its `(min, max)` endpoint pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    // edge id for each adjacency entry, parallel to `adjacency`
    incident: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    degree_bound: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Rejects self-loops, repeated edges, out-of-range endpoints and
    /// disconnected input. The degree bound is the maximum degree.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if vertex_count == 0 {
            return Err(Error::domain("graph must have at least one vertex"));
        }
        let mut canon: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::domain(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if u == v {
                return Err(Error::domain(format!("self-loop at vertex {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }

        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut incident = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in canon.iter().enumerate() {
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        let mut adj_out = Vec::with_capacity(vertex_count);
        for (x, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            adj_out.push(list.iter().map(|&(y, _)| y).collect::<Vec<_>>());
            incident[x] = list.iter().map(|&(_, e)| e).collect();
        }
        let degree_bound = adj_out.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let graph = Graph {
            adjacency: adj_out,
            incident,
            edges: canon,
            degree_bound,
        };
        let reached = graph.bfs_distances(&[0]).iter().filter(|d| d.is_some()).count();
        if reached != vertex_count {
            return Err(Error::domain(format!(
                "graph is disconnected: {reached} of {vertex_count} vertices reachable from 0"
            )));
        }
        Ok(graph)
    }

    /// Declares a degree bound `k`, which must dominate every degree.
    pub fn with_degree_bound(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("degree bound must be positive"));
        }
        if let Some(x) = (0..self.vertex_count()).find(|&x| self.degree(x) > k) {
            return Err(Error::domain(format!(
                "vertex {x} has degree {} exceeding bound {k}",
                self.degree(x)
            )));
        }
        self.degree_bound = k;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    #[inline]
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    /// Edge ids incident to `x`, parallel to [`Graph::neighbors`].
    #[inline]
    pub fn incident_edges(&self, x: usize) -> &[usize] {
        &self.incident[x]
    }

    #[inline]
    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    /// Canonical `(min, max)` endpoint pairs, indexed by edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        let list = self.adjacency.get(u)?;
        list.binary_search(&v).ok().map(|i| self.incident[u][i])
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "vertex {x} out of range 0..{}",
                self.vertex_count()
            )))
        }
    }

    pub(crate) fn check_set(&self, set: &[usize]) -> Result<()> {
        set.iter().try_for_each(|&x| self.check_vertex(x))
    }

    /// Boolean membership mask for a vertex set.
    pub fn mask(&self, set: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.vertex_count()];
        for &x in set {
            m[x] = true;
        }
        m
    }

    /// Multi-source BFS; `None` for unreachable vertices.
    pub(crate) fn bfs_distances(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap_or(0);
            for &y in self.neighbors(x) {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Shortest-path distances from `x` to every vertex.
    pub fn distances_from(&self, x: usize) -> Result<Vec<usize>> {
        self.check_vertex(x)?;
        // connected, so every entry is reached
        Ok(self
            .bfs_distances(&[x])
            .into_iter()
            .map(|d| d.unwrap_or(usize::MAX))
            .collect())
    }

    /// Length of a shortest path between `x` and `y`.
    pub fn distance(&self, x: usize, y: usize) -> Result<usize> {
        self.check_vertex(y)?;
        Ok(self.distances_from(x)?[y])
    }

    /// The metric ball `{ y : d(x, y) < n }`, sorted.
    pub fn ball(&self, x: usize, n: usize) -> Result<Vec<usize>> {
        if n == 0 {
            return Err(Error::domain("ball radius must be at least 1"));
        }
        let dist = self.distances_from(x)?;
        Ok((0..self.vertex_count()).filter(|&y| dist[y] < n).collect())
    }

    /// Vertices outside `set` having at least one neighbor in `set`, sorted.
    pub fn outer_boundary(&self, set: &[usize]) -> Vec<usize> {
        let inside = self.mask(set);
        let mut seen = vec![false; self.vertex_count()];
        let mut out = Vec::new();
        for &x in set {
            for &y in self.neighbors(x) {
                if !inside[y] && !seen[y] {
                    seen[y] = true;
                    out.push(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Connected components of the induced subgraph on `set`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, set: &[usize]) -> Vec<Vec<usize>> {
        let inside = self.mask(set);
        let mut seen = vec![false; self.vertex_count()];
        let mut starts: Vec<usize> = set.to_vec();
        starts.sort_unstable();
        starts.dedup();
        let mut comps = Vec::new();
        for s in starts {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in self.neighbors(x) {
                    if inside[y] && !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Induced subgraph on a connected vertex set. Returns the subgraph and
    /// the original id of each new vertex.
    pub fn induced_subgraph(&self, set: &[usize]) -> Result<(Graph, Vec<usize>)> {
        self.check_set(set)?;
        let mut verts = set.to_vec();
        verts.sort_unstable();
        verts.dedup();
        let mut index = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v)| (index[u], index[v]));
        let sub = Graph::from_edges(verts.len(), edges)?;
        Ok((sub, verts))
    }
}

/// Sorts and deduplicates a vertex list.
pub fn normalize_set(mut set: Vec<usize>) -> Vec<usize> {
    set.sort_unstable();
    set.dedup();
    set
}

/// A finite vertex set `S` together with its outer boundary `∂S`.
#[derive(Debug, Clone)]
pub struct Region<'g> {
    graph: &'g Graph,
    interior: Vec<usize>,
    outer_boundary: Vec<usize>,
}

impl<'g> Region<'g> {
    pub fn new(graph: &'g Graph, interior: Vec<usize>) -> Result<Self> {
        graph.check_set(&interior)?;
        let interior = normalize_set(interior);
        let outer_boundary = graph.outer_boundary(&interior);
        Ok(Region {
            graph,
            interior,
            outer_boundary,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn outer_boundary(&self) -> &[usize] {
        &self.outer_boundary
    }

    /// `S ∪ ∂S`, sorted.
    pub fn closure(&self) -> Vec<usize> {
        let mut all = self.interior.clone();
        all.extend_from_slice(&self.outer_boundary);
        all.sort_unstable();
        all
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }
}

/// A finite path without self-intersections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePath {
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

impl EdgePath {
    pub fn new(graph: &Graph, vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::domain("path must contain at least one vertex"));
        }
        graph.check_set(&vertices)?;
        let mut seen = vec![false; graph.vertex_count()];
        for &x in &vertices {
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::domain(format!("path revisits vertex {x}")));
            }
        }
        let edges = vertices
            .windows(2)
            .map(|w| {
                graph.edge_id(w[0], w[1]).ok_or_else(|| {
                    Error::domain(format!("path step {} -> {} is not an edge", w[0], w[1]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgePath { vertices, edges })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Edge ids `Ed(γ)` in traversal order.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        self.vertices[self.vertices.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Graph::from_edges(3, [(0, 1), (1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(Graph::from_edges(4, [(0, 1), (2, 3)]).is_err());
        assert!(Graph::from_edges(2, [(0, 5)]).is_err());
        assert!(Graph::from_edges(0, []).is_err());
    }

    #[test]
    fn distances_on_path() {
        let g = path(3);
        assert_eq!(g.distance(0, 2).unwrap(), 2);
        assert_eq!(g.distance(1, 1).unwrap(), 0);
        assert!(g.distance(0, 7).is_err());
    }

    #[test]
    fn ball_is_strict() {
        let g = path(4);
        assert_eq!(g.ball(2, 1).unwrap(), vec![2]);
        assert_eq!(g.ball(1, 2).unwrap(), vec![0, 1, 2]);
        assert!(g.ball(1, 0).is_err());
    }

    #[test]
    fn boundary_and_components() {
        let g = path(5);
        assert_eq!(g.outer_boundary(&[1, 2]), vec![0, 3]);
        assert!(g.outer_boundary(&[0, 1, 2, 3, 4]).is_empty());
        assert!(g.outer_boundary(&[]).is_empty());
        assert_eq!(g.components(&[4, 0, 2]), vec![vec![0], vec![2], vec![4]]);
        assert_eq!(g.components(&[1, 2, 3]), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn edge_ids_are_canonical() {
        let g = Graph::from_edges(3, [(2, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.edge_id(2, 1), Some(1));
        assert_eq!(g.edge_id(0, 2), None);
    }

    #[test]
    fn edge_path_validation() {
        let g = path(4);
        let p = EdgePath::new(&g, vec![0, 1, 2]).unwrap();
        assert_eq!(p.len(), 2);
        assert!(EdgePath::new(&g, vec![0, 2]).is_err());
        assert!(EdgePath::new(&g, vec![0, 1, 0]).is_err());
    }

    #[test]
    fn degree_bound_check() {
        let g = path(3);
        assert_eq!(g.degree_bound(), 2);
        assert!(g.clone().with_degree_bound(1).is_err());
        assert_eq!(g.with_degree_bound(4).unwrap().degree_bound(), 4);
    }
}
