//! The p-harmonic Dirichlet problem on a finite region, solved by nonlinear
//! Gauss–Seidel: cyclic exact minimization of Ξ(·, S) one vertex at a time.

use crate::calculus::{self, signed_pow, PExponent, VertexFunction};
use crate::error::{Error, Result};
use crate::graph::{Graph, Region};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

/// Starting values for the interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initialization {
    /// Mean of the boundary data broadcast to every interior vertex.
    BoundaryMean,
    Constant(f64),
}

#[derive(Debug, Clone)]
pub struct DirichletProblem<'g> {
    pub region: Region<'g>,
    pub boundary_data: VertexFunction,
    pub p: PExponent,
    /// Target for `max_{x∈S} |Δ_p f(x)|`.
    pub tolerance: f64,
    /// Budget of single-vertex updates.
    pub max_iterations: usize,
    pub initialization: Initialization,
    /// Record Ξ after every sweep.
    pub record_energy: bool,
}

impl<'g> DirichletProblem<'g> {
    /// Checks that `boundary_data` is defined on exactly `∂S` and that `S`
    /// is nonempty with nonempty boundary.
    pub fn new(region: Region<'g>, boundary_data: VertexFunction, p: PExponent) -> Result<Self> {
        let g = region.graph();
        if boundary_data.vertex_count() != g.vertex_count() {
            return Err(Error::domain("boundary data is sized for a different graph"));
        }
        if region.is_empty() {
            return Err(Error::domain("Dirichlet region must have a nonempty interior"));
        }
        if region.outer_boundary().is_empty() {
            return Err(Error::domain(
                "Dirichlet region has empty outer boundary (interior is the whole graph)",
            ));
        }
        if boundary_data.domain() != region.outer_boundary() {
            return Err(Error::domain(
                "boundary data must be defined on exactly the outer boundary of the region",
            ));
        }
        Ok(DirichletProblem {
            region,
            boundary_data,
            p,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            initialization: Initialization::BoundaryMean,
            record_energy: false,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_initialization(mut self, init: Initialization) -> Self {
        self.initialization = init;
        self
    }

    pub fn recording_energy(mut self) -> Self {
        self.record_energy = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    /// Solution on `S ∪ ∂S`; equal to the boundary data on `∂S`.
    pub values: VertexFunction,
    /// `max_{x∈S} |Δ_p f(x)|`.
    pub residual: f64,
    pub iterations_used: usize,
    /// Final `Ξ(f, S)`.
    pub energy: f64,
    /// `Ξ` after each sweep, when requested (first entry is the initial value).
    pub energy_trace: Vec<f64>,
}

/// Minimizer of `t ↦ Σ_i |t − vᵢ|^p`, i.e. the root of
/// `Σ_i sign(t − vᵢ)|t − vᵢ|^{p−1}`.
///
/// Safeguarded Newton inside the bracket `[min vᵢ, max vᵢ]`, falling back to
/// bisection whenever a step leaves the bracket.
pub fn minimize_local(values: &[f64], p: PExponent, warm: f64) -> f64 {
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if values.is_empty() {
        return warm;
    }
    if hi - lo == 0.0 {
        return lo;
    }
    if p.is_quadratic() {
        return values.iter().sum::<f64>() / values.len() as f64;
    }
    let q = p.value();
    let mut t = if warm > lo && warm < hi { warm } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let mut phi = 0.0;
        let mut dphi = 0.0;
        let mut scale = 0.0;
        let mut singular = false;
        for &v in values {
            let d = t - v;
            if d == 0.0 {
                singular |= q < 2.0;
                continue;
            }
            let a = d.abs();
            let a1 = a.powf(q - 1.0);
            phi += d.signum() * a1;
            scale += a1;
            dphi += a1 / a;
        }
        dphi *= q - 1.0;
        if phi.abs() <= 4.0 * f64::EPSILON * scale {
            return t;
        }
        if phi < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)) {
            return 0.5 * (lo + hi);
        }
        let newton = if singular || dphi <= 0.0 {
            f64::NAN
        } else {
            t - phi / dphi
        };
        t = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    t
}

/// The value at `x` minimizing Ξ with all neighbors held fixed.
pub fn local_update(g: &Graph, f: &VertexFunction, x: usize, p: PExponent) -> Result<f64> {
    g.check_vertex(x)?;
    let vals = g
        .neighbors(x)
        .iter()
        .map(|&y| f.get(y))
        .collect::<Result<Vec<_>>>()?;
    let warm = if f.contains(x) { f.get(x)? } else { f64::NAN };
    Ok(minimize_local(&vals, p, warm))
}

/// `max_{x∈S} |Δ_p f(x)|`.
pub fn residual(g: &Graph, f: &VertexFunction, set: &[usize], p: PExponent) -> Result<f64> {
    set.iter().try_fold(0.0f64, |m, &x| {
        Ok(m.max(calculus::p_laplacian(g, f, x, p)?.abs()))
    })
}

const ROUNDING: f64 = 4.0 * f64::EPSILON;
const MAX_CLUSTER: usize = 64;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= ROUNDING * a.abs().max(b.abs())
}

/// `Σ_v |from − v|^p − |to − v|^p`, accurate when `from` and `to` are close.
fn local_gain(values: &[f64], from: f64, to: f64, p: PExponent) -> f64 {
    let q = p.value();
    values
        .iter()
        .map(|&v| {
            let a = (from - v).abs();
            let b = (to - v).abs();
            if b == 0.0 {
                a.powf(q)
            } else {
                b.powf(q) * (q * ((a - b) / b).ln_1p()).exp_m1()
            }
        })
        .sum()
}

/// Block moves for p < 2.
///
/// An interior neighbor holding the same value as `x` (a dangling leaf, say)
/// pins `x` through the cusp of `|t − v|^p`, and single-vertex updates then
/// crawl. Moving the whole equal-valued cluster as one block removes the
/// cusp; the block move is taken only when it lowers the energy more than
/// the single-vertex move.
struct ClusterScratch {
    member: Vec<bool>,
    cluster: Vec<usize>,
    outer: Vec<f64>,
}

impl ClusterScratch {
    fn new(n: usize) -> Self {
        ClusterScratch {
            member: vec![false; n],
            cluster: Vec::new(),
            outer: Vec::new(),
        }
    }

    /// Applies the block move if it beats the single move to `t`.
    #[allow(clippy::too_many_arguments)]
    fn try_move(
        &mut self,
        g: &Graph,
        vals: &mut [f64],
        inside: &[bool],
        x: usize,
        t: f64,
        single: &[f64],
        p: PExponent,
    ) -> bool {
        let v0 = vals[x];
        if !g.neighbors(x).iter().any(|&y| inside[y] && near(vals[y], v0)) {
            return false;
        }
        self.cluster.clear();
        self.cluster.push(x);
        self.member[x] = true;
        let mut i = 0;
        while i < self.cluster.len() && self.cluster.len() <= MAX_CLUSTER {
            let c = self.cluster[i];
            i += 1;
            for &y in g.neighbors(c) {
                if inside[y] && !self.member[y] && near(vals[y], v0) {
                    self.member[y] = true;
                    self.cluster.push(y);
                }
            }
        }
        let mut moved = false;
        if self.cluster.len() <= MAX_CLUSTER {
            self.outer.clear();
            for &c in &self.cluster {
                for &y in g.neighbors(c) {
                    if !self.member[y] {
                        self.outer.push(vals[y]);
                    }
                }
            }
            let tb = minimize_local(&self.outer, p, v0);
            let gain_single = local_gain(single, v0, t, p);
            let gain_block = local_gain(&self.outer, v0, tb, p);
            if gain_block > gain_single {
                for &c in &self.cluster {
                    vals[c] = tb;
                }
                moved = true;
            }
        }
        for &c in &self.cluster {
            self.member[c] = false;
        }
        moved
    }
}

fn dense_residual(g: &Graph, vals: &[f64], interior: &[usize], p: PExponent) -> f64 {
    let mut worst = 0.0f64;
    for &x in interior {
        let fx = vals[x];
        let lap: f64 = if p.is_quadratic() {
            g.neighbors(x).iter().map(|&y| vals[y] - fx).sum()
        } else {
            // differences at rounding level count as zero; for p < 2 they
            // would otherwise leave a floor of about ε^{p−1}
            g.neighbors(x)
                .iter()
                .map(|&y| {
                    let t = vals[y] - fx;
                    if t.abs() <= ROUNDING * fx.abs().max(vals[y].abs()) {
                        0.0
                    } else {
                        signed_pow(t, p)
                    }
                })
                .sum()
        };
        worst = worst.max(lap.abs());
    }
    worst
}

fn dense_energy(g: &Graph, vals: &[f64], inside: &[bool], interior: &[usize], p: PExponent) -> f64 {
    // every edge touching S exactly once
    let mut total = 0.0;
    for &x in interior {
        for &y in g.neighbors(x) {
            if !inside[y] || x < y {
                total += (vals[y] - vals[x]).abs().powf(p.value());
            }
        }
    }
    total
}

fn to_function(g: &Graph, vals: &[f64], region: &Region<'_>) -> VertexFunction {
    let mut f = VertexFunction::from_pairs(g.vertex_count(), std::iter::empty())
        .expect("empty function");
    for x in region.closure() {
        f.set(x, vals[x]);
    }
    f
}

/// Solves `Δ_p f = 0` on `S` with `f` prescribed on `∂S`.
pub fn solve_dirichlet(prob: &DirichletProblem<'_>) -> Result<DirichletSolution> {
    let region = &prob.region;
    let g = region.graph();
    let p = prob.p;
    let interior = region.interior();
    let inside = g.mask(interior);

    let mut vals = vec![0.0; g.vertex_count()];
    for &x in region.outer_boundary() {
        vals[x] = prob.boundary_data.get(x)?;
    }
    let start = match prob.initialization {
        Initialization::BoundaryMean => {
            let b = region.outer_boundary();
            b.iter().map(|&x| vals[x]).sum::<f64>() / b.len() as f64
        }
        Initialization::Constant(c) => c,
    };
    for &x in interior {
        vals[x] = start;
    }

    let mut trace = Vec::new();
    if prob.record_energy {
        trace.push(dense_energy(g, &vals, &inside, interior, p));
    }
    let mut updates = 0usize;
    let mut buf = Vec::with_capacity(g.degree_bound());
    let mut clusters = ClusterScratch::new(g.vertex_count());
    let mut res = dense_residual(g, &vals, interior, p);
    while res > prob.tolerance && updates < prob.max_iterations {
        for &x in interior {
            if updates >= prob.max_iterations {
                break;
            }
            buf.clear();
            buf.extend(g.neighbors(x).iter().map(|&y| vals[y]));
            let t = minimize_local(&buf, p, vals[x]);
            if p.value() >= 2.0 || !clusters.try_move(g, &mut vals, &inside, x, t, &buf, p) {
                vals[x] = t;
            }
            updates += 1;
        }
        if prob.record_energy {
            trace.push(dense_energy(g, &vals, &inside, interior, p));
        }
        res = dense_residual(g, &vals, interior, p);
    }

    let values = to_function(g, &vals, region);
    if res > prob.tolerance {
        return Err(Error::Convergence {
            residual: res,
            iterations: updates,
            best: Box::new(values),
        });
    }
    let energy = calculus::xi(g, &values, interior, p)?;
    Ok(DirichletSolution {
        values,
        residual: res,
        iterations_used: updates,
        energy,
        energy_trace: trace,
    })
}
