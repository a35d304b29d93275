#![allow(dead_code)]

use std::collections::VecDeque;

use pharmonic::{EdgePath, Graph};
use rand::seq::SliceRandom;
use rand::Rng;

/// `w × h` grid, vertex `(i, j)` has id `i * w + j`.
pub fn grid(w: usize, h: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..h {
        for j in 0..w {
            let v = i * w + j;
            if j + 1 < w {
                edges.push((v, v + 1));
            }
            if i + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    Graph::from_edges(w * h, edges).unwrap()
}

pub fn line(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

/// Random spanning tree on `n` vertices plus up to `extra` chords.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !edges.contains(&(a.min(b), a.max(b))) && !edges.contains(&(a.max(b), a.min(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// BFS path from `a` to `b`.
pub fn bfs_path(g: &Graph, a: usize, b: usize) -> EdgePath {
    let mut parent = vec![usize::MAX; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([a]);
    seen[a] = true;
    while let Some(x) = queue.pop_front() {
        if x == b {
            break;
        }
        for &y in g.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut verts = vec![b];
    let mut x = b;
    while x != a {
        x = parent[x];
        verts.push(x);
    }
    verts.reverse();
    EdgePath::new(g, verts).unwrap()
}

/// Random self-avoiding walk from `a` of at most `steps` edges (at least one).
pub fn random_walk_path<R: Rng>(rng: &mut R, g: &Graph, a: usize, steps: usize) -> EdgePath {
    let mut verts = vec![a];
    let mut used = vec![false; g.vertex_count()];
    used[a] = true;
    for _ in 0..steps {
        let x = *verts.last().unwrap();
        let mut options: Vec<usize> = g.neighbors(x).iter().copied().filter(|&y| !used[y]).collect();
        options.shuffle(rng);
        match options.first() {
            Some(&y) => {
                used[y] = true;
                verts.push(y);
            }
            None => break,
        }
    }
    EdgePath::new(g, verts).unwrap()
}

/// Distinct random paths with at least one edge.
pub fn random_family<R: Rng>(rng: &mut R, g: &Graph, count: usize) -> Vec<EdgePath> {
    let mut out: Vec<EdgePath> = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count {
        attempts += 1;
        let a = rng.gen_range(0..g.vertex_count());
        let path = if rng.gen_bool(0.5) {
            let b = rng.gen_range(0..g.vertex_count());
            if a == b {
                continue;
            }
            bfs_path(g, a, b)
        } else {
            let steps = rng.gen_range(1..6);
            random_walk_path(rng, g, a, steps)
        };
        if !path.is_empty() && !out.contains(&path) {
            out.push(path);
        }
    }
    out
}
