//! p-modulus (and extremal length) of path families.
//!
//! The explicit-family solver works on the dual of
//!
//! ```text
//!     minimize Σ_e ρ(e)^p   subject to   Σ_{e∈γ} ρ(e) ≥ 1 for every γ,  ρ ≥ 0.
//! ```
//!
//! With multipliers `λ_γ ≥ 0` and `η_e = Σ_{γ∋e} λ_γ`, stationarity gives
//! `ρ(e) = (η_e / p)^{1/(p−1)}`. Coordinate ascent picks each `λ_γ` so that
//! γ has length exactly one (or zero multiplier if it is already longer).
//! Rescaling ρ by its worst path length gives a feasible primal point, and
//! the dual value gives a lower bound, so every iterate carries a gap.
//!
//! Connecting families are handled by constraint generation: the ρ-shortest
//! path (Dijkstra) is the most violated constraint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::calculus::{self, EdgeDensity, PExponent, VertexFunction};
use crate::dirichlet::{self, DirichletProblem};
use crate::error::{Error, Result};
use crate::graph::{normalize_set, EdgePath, Graph, Region};

#[derive(Debug, Clone)]
pub enum PathFamily {
    Explicit(Vec<EdgePath>),
    /// All simple paths from `from` to `to` inside the induced subgraph on
    /// `within` (every vertex when `None`).
    Connecting {
        from: Vec<usize>,
        to: Vec<usize>,
        within: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct ModulusOptions {
    /// Relative dual gap at which the solver stops.
    pub gap_tolerance: f64,
    pub max_sweeps: usize,
    /// A generated path is added when its length is below `1 − violation`.
    pub violation: f64,
    pub max_rounds: usize,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        ModulusOptions {
            gap_tolerance: 1e-6,
            max_sweeps: 200_000,
            violation: 1e-7,
            max_rounds: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModulusResult {
    /// `λ_p(Q)^{-1}`; infinite when the family contains a zero-edge path.
    pub modulus: f64,
    pub extremal_length: f64,
    pub infinite: bool,
    /// Optimal admissible density.
    pub density: EdgeDensity,
    /// Paths whose density length is within 1e-6 of one.
    pub active_paths: Vec<EdgePath>,
    /// Relative gap between the returned modulus and the dual lower bound.
    pub dual_gap: f64,
    /// Number of paths in the (working) family.
    pub paths_used: usize,
}

impl ModulusResult {
    fn empty(g: &Graph) -> Self {
        ModulusResult {
            modulus: 0.0,
            extremal_length: f64::INFINITY,
            infinite: false,
            density: EdgeDensity::zeros(g.edge_count()),
            active_paths: Vec::new(),
            dual_gap: 0.0,
            paths_used: 0,
        }
    }

    fn unbounded(g: &Graph, paths_used: usize) -> Self {
        ModulusResult {
            modulus: f64::INFINITY,
            extremal_length: 0.0,
            infinite: true,
            density: EdgeDensity::zeros(g.edge_count()),
            active_paths: Vec::new(),
            dual_gap: 0.0,
            paths_used,
        }
    }
}

/// Whether `Σ_{e∈Ed(γ)} ρ(e) ≥ 1` up to summation rounding, together with
/// the slack `Σρ(e) − 1`.
pub fn admissible_check(rho: &EdgeDensity, gamma: &EdgePath) -> Result<(bool, f64)> {
    let len = gamma
        .edges()
        .iter()
        .map(|&e| rho.get(e))
        .sum::<Result<f64>>()?;
    let rounding = 2.0 * f64::EPSILON * gamma.len() as f64;
    Ok((len >= 1.0 - rounding, len - 1.0))
}

fn path_length(rho: &[f64], gamma: &EdgePath) -> f64 {
    gamma.edges().iter().map(|&e| rho[e]).sum()
}

/// Dual coordinate-ascent state over a working set of paths.
struct DualState {
    p: f64,
    expo: f64,
    lambda: Vec<f64>,
    eta: Vec<f64>,
}

impl DualState {
    fn new(edge_count: usize, p: PExponent) -> Self {
        DualState {
            p: p.value(),
            expo: 1.0 / (p.value() - 1.0),
            lambda: Vec::new(),
            eta: vec![0.0; edge_count],
        }
    }

    #[inline]
    fn rho_of(&self, eta: f64) -> f64 {
        if eta <= 0.0 {
            0.0
        } else {
            (eta / self.p).powf(self.expo)
        }
    }

    fn rho(&self) -> Vec<f64> {
        self.eta.iter().map(|&e| self.rho_of(e)).collect()
    }

    /// Sets `λ_γ` to maximize the dual with all other multipliers fixed.
    fn update(&mut self, k: usize, gamma: &EdgePath, base: &mut Vec<f64>) {
        let old = self.lambda[k];
        base.clear();
        base.extend(gamma.edges().iter().map(|&e| (self.eta[e] - old).max(0.0)));
        let len_at = |t: f64| -> f64 { base.iter().map(|&b| self.rho_of(b + t)).sum() };
        let t = if len_at(0.0) >= 1.0 {
            0.0
        } else {
            let mut lo = 0.0;
            let mut hi = self.p * (base.len() as f64).powf(1.0 - self.p);
            while len_at(hi) < 1.0 {
                hi *= 2.0;
            }
            let mut t = 0.5 * (lo + hi);
            for _ in 0..200 {
                let mut h = -1.0;
                let mut dh = 0.0;
                for &b in base.iter() {
                    let x = b + t;
                    if x > 0.0 {
                        let r = self.rho_of(x);
                        h += r;
                        dh += self.expo * r / x;
                    }
                }
                if h.abs() <= 1e-15 {
                    break;
                }
                if h < 0.0 {
                    lo = t;
                } else {
                    hi = t;
                }
                if hi - lo <= 2.0 * f64::EPSILON * hi {
                    break;
                }
                let newton = if dh > 0.0 { t - h / dh } else { f64::NAN };
                t = if newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
            }
            t
        };
        self.lambda[k] = t;
        for (&e, &b) in gamma.edges().iter().zip(base.iter()) {
            self.eta[e] = b + t;
        }
    }

    fn dual_value(&self) -> f64 {
        let linear: f64 = self.lambda.iter().sum();
        let coupling: f64 = self.eta.iter().map(|&e| e * self.rho_of(e)).sum();
        linear - (self.p - 1.0) / self.p * coupling
    }
}

/// Feasible rescaling of `rho` for `paths`, its energy, and the scale used.
fn primal_point(rho: &[f64], paths: &[EdgePath], p: f64) -> (Vec<f64>, f64) {
    let shortest = paths
        .iter()
        .map(|g| path_length(rho, g))
        .fold(f64::INFINITY, f64::min);
    let scaled: Vec<f64> = if shortest > 0.0 && shortest.is_finite() {
        rho.iter().map(|v| v / shortest).collect()
    } else {
        rho.to_vec()
    };
    let energy = scaled.iter().map(|v| v.powf(p)).sum();
    (scaled, energy)
}

fn relative_gap(primal: f64, dual: f64) -> f64 {
    if primal <= 0.0 {
        0.0
    } else {
        ((primal - dual) / primal).max(0.0)
    }
}

const SWEEPS_PER_CHECK: usize = 10;

fn sweep(state: &mut DualState, paths: &[EdgePath], base: &mut Vec<f64>) {
    for (k, gamma) in paths.iter().enumerate() {
        state.update(k, gamma, base);
    }
}

/// Runs coordinate ascent until the relative gap on `paths` is small.
/// Returns the feasible density, its energy and the gap.
fn ascend(
    state: &mut DualState,
    paths: &[EdgePath],
    opts: &ModulusOptions,
) -> Result<(Vec<f64>, f64, f64)> {
    let mut base = Vec::new();
    let mut last = (Vec::new(), f64::INFINITY, f64::INFINITY);
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        let batch = if sweeps < 50 { 1 } else { SWEEPS_PER_CHECK };
        for _ in 0..batch {
            sweep(state, paths, &mut base);
        }
        sweeps += batch;
        let rho = state.rho();
        let (scaled, primal) = primal_point(&rho, paths, state.p);
        let gap = relative_gap(primal, state.dual_value());
        last = (scaled, primal, gap);
        if gap <= opts.gap_tolerance {
            return Ok(last);
        }
    }
    let (scaled, _, gap) = last;
    Err(Error::ModulusConvergence {
        gap,
        best: Box::new(EdgeDensity::new(scaled)?),
    })
}

fn finish(
    paths: Vec<EdgePath>,
    density: Vec<f64>,
    modulus: f64,
    gap: f64,
) -> Result<ModulusResult> {
    let active_paths = paths
        .iter()
        .filter(|g| (path_length(&density, g) - 1.0).abs() <= 1e-6)
        .cloned()
        .collect();
    Ok(ModulusResult {
        modulus,
        extremal_length: if modulus > 0.0 { 1.0 / modulus } else { f64::INFINITY },
        infinite: false,
        density: EdgeDensity::new(density)?,
        active_paths,
        dual_gap: gap,
        paths_used: paths.len(),
    })
}

fn modulus_explicit(
    g: &Graph,
    paths: &[EdgePath],
    p: PExponent,
    opts: &ModulusOptions,
) -> Result<ModulusResult> {
    if paths.is_empty() {
        return Ok(ModulusResult::empty(g));
    }
    if paths.iter().any(EdgePath::is_empty) {
        return Ok(ModulusResult::unbounded(g, paths.len()));
    }
    if let Some(e) = paths
        .iter()
        .flat_map(|p| p.edges())
        .find(|&&e| e >= g.edge_count())
    {
        return Err(Error::domain(format!("path uses edge {e} not in the graph")));
    }
    let mut state = DualState::new(g.edge_count(), p);
    state.lambda = vec![0.0; paths.len()];
    let (density, modulus, gap) = ascend(&mut state, paths, opts)?;
    finish(paths.to_vec(), density, modulus, gap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, vertex)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra inside `allowed`, never expanding from targets.
/// Returns distances and parents.
fn dijkstra(
    g: &Graph,
    lengths: &[f64],
    sources: &[usize],
    targets: &[bool],
    allowed: &[bool],
) -> (Vec<f64>, Vec<usize>) {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(HeapEntry { dist: 0.0, vertex: s });
    }
    while let Some(HeapEntry { dist: d, vertex: x }) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        if targets[x] {
            continue;
        }
        for (&y, &e) in g.neighbors(x).iter().zip(g.incident_edges(x)) {
            if !allowed[y] || done[y] {
                continue;
            }
            let nd = d + lengths[e];
            if nd < dist[y] {
                dist[y] = nd;
                parent[y] = x;
                heap.push(HeapEntry { dist: nd, vertex: y });
            }
        }
    }
    (dist, parent)
}

fn trace_path(g: &Graph, parent: &[usize], end: usize) -> Result<EdgePath> {
    let mut verts = vec![end];
    let mut x = end;
    while parent[x] != usize::MAX {
        x = parent[x];
        verts.push(x);
    }
    verts.reverse();
    EdgePath::new(g, verts)
}

fn modulus_connecting(
    g: &Graph,
    from: &[usize],
    to: &[usize],
    within: Option<&[usize]>,
    p: PExponent,
    opts: &ModulusOptions,
) -> Result<ModulusResult> {
    g.check_set(from)?;
    g.check_set(to)?;
    let allowed = match within {
        Some(s) => {
            g.check_set(s)?;
            g.mask(s)
        }
        None => vec![true; g.vertex_count()],
    };
    let sources: Vec<usize> = normalize_set(from.iter().copied().filter(|&x| allowed[x]).collect());
    let targets_list: Vec<usize> =
        normalize_set(to.iter().copied().filter(|&x| allowed[x]).collect());
    if from.is_empty() || to.is_empty() {
        return Err(Error::domain("connecting family needs nonempty endpoint sets"));
    }
    let targets = g.mask(&targets_list);
    if sources.iter().any(|&x| targets[x]) {
        return Ok(ModulusResult::unbounded(g, 1));
    }
    if sources.is_empty() || targets_list.is_empty() {
        return Ok(ModulusResult::empty(g));
    }

    let ones = vec![1.0; g.edge_count()];
    let (dist, parent) = dijkstra(g, &ones, &sources, &targets, &allowed);
    let Some(first) = targets_list
        .iter()
        .copied()
        .filter(|&b| dist[b].is_finite())
        .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
    else {
        return Ok(ModulusResult::empty(g));
    };

    let mut paths = vec![trace_path(g, &parent, first)?];
    let mut state = DualState::new(g.edge_count(), p);
    state.lambda.push(0.0);
    let mut base = Vec::new();
    let mut best: (Vec<f64>, f64) = (Vec::new(), f64::INFINITY);
    let mut sweeps = 0;
    for _ in 0..opts.max_rounds {
        let batch = if sweeps < 50 { 1 } else { SWEEPS_PER_CHECK };
        for _ in 0..batch {
            sweep(&mut state, &paths, &mut base);
        }
        sweeps += batch;
        let rho = state.rho();
        let (dist, parent) = dijkstra(g, &rho, &sources, &targets, &allowed);
        let shortest = targets_list
            .iter()
            .map(|&b| dist[b])
            .fold(f64::INFINITY, f64::min);
        // the dual value of the working set bounds the full modulus from
        // below, and ρ rescaled by the shortest connecting length is feasible
        if shortest > 0.0 {
            let density: Vec<f64> = rho.iter().map(|v| v / shortest).collect();
            let modulus: f64 = density.iter().map(|v| v.powf(p.value())).sum();
            let gap = relative_gap(modulus, state.dual_value());
            if gap < best.1 {
                best = (density.clone(), gap);
            }
            if gap <= opts.gap_tolerance {
                return finish(paths, density, modulus, gap);
            }
        }
        if sweeps >= opts.max_sweeps {
            break;
        }
        let mut violated: Vec<usize> = targets_list
            .iter()
            .copied()
            .filter(|&b| dist[b] < 1.0 - opts.violation)
            .collect();
        violated.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let mut added = 0;
        for b in violated {
            let path = trace_path(g, &parent, b)?;
            if !paths.contains(&path) {
                paths.push(path);
                state.lambda.push(0.0);
                added += 1;
            }
            if added == 8 {
                break;
            }
        }
    }
    if best.0.is_empty() {
        best.0 = vec![0.0; g.edge_count()];
    }
    Err(Error::ModulusConvergence {
        gap: best.1,
        best: Box::new(EdgeDensity::new(best.0)?),
    })
}

/// `inf { ξ_p(ρ) : ρ admissible for the family }`.
pub fn modulus(g: &Graph, family: &PathFamily, p: PExponent) -> Result<ModulusResult> {
    modulus_with(g, family, p, &ModulusOptions::default())
}

pub fn modulus_with(
    g: &Graph,
    family: &PathFamily,
    p: PExponent,
    opts: &ModulusOptions,
) -> Result<ModulusResult> {
    match family {
        PathFamily::Explicit(paths) => modulus_explicit(g, paths, p, opts),
        PathFamily::Connecting { from, to, within } => {
            modulus_connecting(g, from, to, within.as_deref(), p, opts)
        }
    }
}

/// Modulus of the subfamily on which `holds` fails.
///
/// A value near zero means the property holds for p-almost every path of
/// the (truncated) family.
pub fn exceptional_modulus<F>(
    g: &Graph,
    paths: &[EdgePath],
    holds: F,
    p: PExponent,
) -> Result<ModulusResult>
where
    F: Fn(&EdgePath) -> bool,
{
    let failing: Vec<EdgePath> = paths.iter().filter(|gamma| !holds(gamma)).cloned().collect();
    modulus(g, &PathFamily::Explicit(failing), p)
}

#[derive(Debug, Clone, Copy)]
pub struct DualityReport {
    pub modulus: f64,
    pub capacity: f64,
    pub relative_gap: f64,
}

/// Two-sided capacity: minimal `Σ_e |du|^p` over edges of `Γ_S` with `u = 1`
/// on `A` and `u = 0` on `B`.
pub fn two_sided_capacity(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    s: &[usize],
    p: PExponent,
) -> Result<f64> {
    g.check_set(a)?;
    g.check_set(b)?;
    g.check_set(s)?;
    let a_mask = g.mask(a);
    let b_mask = g.mask(b);
    if (0..g.vertex_count()).any(|x| a_mask[x] && b_mask[x]) {
        return Err(Error::domain("sets A and B must be disjoint"));
    }
    let mut total = 0.0;
    for comp in g.components(s) {
        let touches_a = comp.iter().any(|&x| a_mask[x]);
        let touches_b = comp.iter().any(|&x| b_mask[x]);
        if !(touches_a && touches_b) {
            continue;
        }
        let (sub, orig) = g.induced_subgraph(&comp)?;
        let n = sub.vertex_count();
        let mut u = VertexFunction::constant(n, 0.0);
        for (i, &x) in orig.iter().enumerate() {
            if a_mask[x] {
                u.set(i, 1.0);
            }
        }
        let interior: Vec<usize> = (0..n)
            .filter(|&i| !a_mask[orig[i]] && !b_mask[orig[i]])
            .collect();
        if !interior.is_empty() {
            let region = Region::new(&sub, interior)?;
            let bd = VertexFunction::from_pairs(
                n,
                region
                    .outer_boundary()
                    .iter()
                    .map(|&i| (i, if a_mask[orig[i]] { 1.0 } else { 0.0 })),
            )?;
            // for p < 2 the residual scales like δ^{p−1} in the error δ
            let tol = 1e-9f64.powf((p.value() - 1.0).min(1.0));
            let prob = DirichletProblem::new(region, bd, p)?
                .with_tolerance(tol)
                .with_max_iterations(500_000_000);
            let sol = dirichlet::solve_dirichlet(&prob)?;
            for (i, v) in sol.values.iter() {
                u.set(i, v);
            }
        }
        let all: Vec<usize> = (0..sub.edge_count()).collect();
        total += calculus::edge_energy(&sub, &u, &all, p)?;
    }
    Ok(total)
}

/// Compares the modulus of the connecting family `A → B` in `Γ_S` with the
/// two-sided capacity of `(A, B)` in `Γ_S`.
pub fn duality_check(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    s: &[usize],
    p: PExponent,
) -> Result<DualityReport> {
    let family = PathFamily::Connecting {
        from: a.to_vec(),
        to: b.to_vec(),
        within: Some(s.to_vec()),
    };
    let m = modulus(g, &family, p)?;
    let cap = two_sided_capacity(g, a, b, s, p)?;
    let relative_gap = if m.modulus == 0.0 && cap == 0.0 {
        0.0
    } else {
        (m.modulus - cap).abs() / cap.max(f64::MIN_POSITIVE)
    };
    Ok(DualityReport {
        modulus: m.modulus,
        capacity: cap,
        relative_gap,
    })
}
