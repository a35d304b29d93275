//! D_p-massive sets: inner-potential certificates, level-set extraction from
//! bounded harmonic witnesses, disjoint searches, and asymptotic checks along
//! rays.
//!
//! Massiveness is a property of the infinite graph, so everything here is
//! evidence gathered on a schedule of truncation radii. For a candidate `U`
//! and radius `n` the exhaustion potential `u_n` is p-harmonic on
//! `U ∩ B_n(root)`, zero on `∂U` and one on the part of `U` in the distance-`n`
//! shell. By comparison `u_n` decreases in `n`; `U` is massive exactly when
//! the limit is nonzero, in which case the limit divided by its supremum is
//! an inner potential.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::calculus::{self, PExponent, VertexFunction};
use crate::capacity::check_schedule;
use crate::dirichlet::{self, DirichletProblem};
use crate::error::{Error, Result};
use crate::extrapolate;
use crate::generators::{FamilyKind, TruncatedFamily};
use crate::graph::{normalize_set, EdgePath, Graph, Region};
use crate::modulus::{self, PathFamily};

pub const DEFAULT_EPSILON: f64 = 0.2;
pub const DEFAULT_RAY_SEED: u64 = 0x5eed_2013;

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    /// Residual target for every Dirichlet solve.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// The fixed window is the part of `U` within this many steps of its
    /// vertices nearest the root.
    pub window_depth: usize,
    /// Minimum agreement of successive limit estimates for a massive verdict.
    pub massive_threshold: f64,
    /// Limit estimates below this count as collapse to zero.
    pub collapse_threshold: f64,
    /// Largest ratio of successive differences accepted as convergence.
    pub max_contraction: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            tolerance: dirichlet::DEFAULT_TOLERANCE,
            max_iterations: 500_000_000,
            window_depth: 2,
            massive_threshold: 0.99,
            collapse_threshold: 1e-3,
            max_contraction: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassiveVerdict {
    Massive,
    NotMassive,
    Undecided,
}

impl fmt::Display for MassiveVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MassiveVerdict::Massive => "massive",
            MassiveVerdict::NotMassive => "not-massive",
            MassiveVerdict::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone)]
pub struct MassiveCertificate {
    /// The candidate set `U` (within the truncation).
    pub candidate: Vec<usize>,
    /// Exhaustion potential at the largest usable radius, on `U ∪ ∂U`
    /// restricted to the truncation.
    pub inner_potential: VertexFunction,
    /// Agreement of the last two extrapolated window suprema (smaller over
    /// larger); this is the normalized inner sup of the limit potential.
    pub sup_value: f64,
    /// Window supremum of `u_n` at the largest radius.
    pub raw_sup: f64,
    /// Extrapolated window supremum as `n → ∞`.
    pub limit_estimate: f64,
    /// Ratio of the last two window-supremum decrements.
    pub contraction: f64,
    /// Supremum of `u_n` over `U ∩ B_{n/2}` at the largest radius.
    pub half_ball_sup: f64,
    /// Largest `max |Δ_p u_n|` over the interiors of all solves.
    pub laplacian_residual: f64,
    /// `max |u|` on `∂U`.
    pub boundary_zero_violation: f64,
    pub min_value: f64,
    /// `(radius, window supremum)` along the schedule.
    pub exhaustion: Vec<(usize, f64)>,
    pub window: Vec<usize>,
    pub verdict: MassiveVerdict,
}

fn require_infinite_intent(fam: &TruncatedFamily, u: &[usize]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::domain("candidate set is empty"));
    }
    if !u.iter().any(|&x| fam.depth[x] == fam.truncation_radius) {
        return Err(Error::domain(
            "candidate set does not reach the frontier (finite sets cannot be massive)",
        ));
    }
    Ok(())
}

/// Solves for the exhaustion potential of `u_set` at each radius and
/// assembles a certificate.
pub fn inner_potential(
    fam: &TruncatedFamily,
    u_set: &[usize],
    p: PExponent,
    schedule: &[usize],
    opts: &CertifyOptions,
) -> Result<MassiveCertificate> {
    let g = &fam.graph;
    g.check_set(u_set)?;
    let u_set = normalize_set(u_set.to_vec());
    check_schedule(schedule, fam.truncation_radius)?;
    require_infinite_intent(fam, &u_set)?;
    let boundary = g.outer_boundary(&u_set);
    if boundary.is_empty() {
        return Err(Error::domain("candidate set has empty outer boundary"));
    }
    let in_u = g.mask(&u_set);
    let d_min = u_set.iter().map(|&x| fam.depth[x]).min().unwrap_or(0);
    let window: Vec<usize> = u_set
        .iter()
        .copied()
        .filter(|&x| fam.depth[x] <= d_min + opts.window_depth)
        .collect();

    let mut exhaustion = Vec::new();
    let mut residual = 0.0f64;
    let mut last: Option<(usize, VertexFunction)> = None;
    for &n in schedule {
        if n <= d_min + opts.window_depth {
            continue;
        }
        let interior: Vec<usize> = u_set.iter().copied().filter(|&x| fam.depth[x] < n).collect();
        if g.components(&interior).len() > 1 {
            return Err(Error::domain(format!(
                "candidate set is disconnected at truncation radius {n}"
            )));
        }
        let region = Region::new(g, interior)?;
        let bd = VertexFunction::from_pairs(
            g.vertex_count(),
            region
                .outer_boundary()
                .iter()
                .map(|&x| (x, if in_u[x] { 1.0 } else { 0.0 })),
        )?;
        let prob = DirichletProblem::new(region, bd, p)?
            .with_tolerance(opts.tolerance)
            .with_max_iterations(opts.max_iterations);
        let sol = dirichlet::solve_dirichlet(&prob)?;
        residual = residual.max(sol.residual);
        let w = window
            .iter()
            .map(|&x| sol.values.get(x))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?;
        exhaustion.push((n, w));
        last = Some((n, sol.values));
    }
    let Some((n_last, potential)) = last else {
        return Err(Error::domain(
            "no schedule radius extends past the candidate's window",
        ));
    };

    let boundary_zero_violation = boundary
        .iter()
        .filter(|&&x| potential.contains(x))
        .map(|&x| potential.get(x).map(f64::abs))
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?;
    let min_value = potential.iter().fold(f64::INFINITY, |m, (_, v)| m.min(v));
    let half = n_last / 2;
    let half_ball_sup = u_set
        .iter()
        .filter(|&&x| fam.depth[x] < half && potential.contains(x))
        .map(|&x| potential.get(x).unwrap_or(0.0))
        .fold(0.0, f64::max);

    let w: Vec<f64> = exhaustion.iter().map(|e| e.1).collect();
    let raw_sup = w[w.len() - 1];
    let limit_estimate = extrapolate::tail_limit(&w)
        .map(|l| l.clamp(0.0, raw_sup))
        .unwrap_or(raw_sup);
    let contraction = match w.as_slice() {
        [.., a, b, c] => extrapolate::contraction(*a, *b, *c),
        _ => f64::NAN,
    };
    let sup_value = if w.len() >= 4 {
        let prev = extrapolate::tail_limit(&w[..w.len() - 1])
            .unwrap_or(0.0)
            .clamp(0.0, w[w.len() - 2]);
        let hi = prev.max(limit_estimate);
        if hi > 0.0 {
            prev.min(limit_estimate) / hi
        } else {
            0.0
        }
    } else {
        0.0
    };

    let sound = residual <= opts.tolerance && boundary_zero_violation <= 1e-12 && min_value >= 0.0;
    let strictly_decreasing = w.windows(2).all(|p| p[1] < p[0]);
    let verdict = if w.len() >= 4
        && sound
        && sup_value >= opts.massive_threshold
        && limit_estimate >= opts.collapse_threshold
        && contraction.abs() <= opts.max_contraction
    {
        MassiveVerdict::Massive
    } else if w.len() >= 3 && strictly_decreasing && limit_estimate < opts.collapse_threshold {
        MassiveVerdict::NotMassive
    } else {
        MassiveVerdict::Undecided
    };

    Ok(MassiveCertificate {
        candidate: u_set,
        inner_potential: potential,
        sup_value,
        raw_sup,
        limit_estimate,
        contraction,
        half_ball_sup,
        laplacian_residual: residual,
        boundary_zero_violation,
        min_value,
        exhaustion,
        window,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSets {
    /// Components of `{x ∈ U : h(x) > b}`.
    pub superlevel: Vec<Vec<usize>>,
    /// Components of `{x ∈ U : h(x) < a}`.
    pub sublevel: Vec<Vec<usize>>,
}

/// Components of the super- and sublevel sets of `h` within `U`, under the
/// sandwich `inf_U h < a < b < sup_U h`.
pub fn level_set_components(
    g: &Graph,
    h: &VertexFunction,
    u_set: &[usize],
    a: f64,
    b: f64,
) -> Result<LevelSets> {
    g.check_set(u_set)?;
    if u_set.is_empty() {
        return Err(Error::domain("level sets need a nonempty set U"));
    }
    let vals = u_set.iter().map(|&x| h.get(x)).collect::<Result<Vec<_>>>()?;
    let inf = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(inf < a && a < b && b < sup) {
        return Err(Error::domain(format!(
            "levels must satisfy inf {inf} < a {a} < b {b} < sup {sup}"
        )));
    }
    let above: Vec<usize> = u_set
        .iter()
        .zip(&vals)
        .filter(|(_, &v)| v > b)
        .map(|(&x, _)| x)
        .collect();
    let below: Vec<usize> = u_set
        .iter()
        .zip(&vals)
        .filter(|(_, &v)| v < a)
        .map(|(&x, _)| x)
        .collect();
    Ok(LevelSets {
        superlevel: g.components(&above),
        sublevel: g.components(&below),
    })
}

/// Approximate element of BHD_p: the p-harmonic function on the truncation
/// equal to 1 on the frontier part of one branch and 0 on the rest.
#[derive(Debug, Clone)]
pub struct HarmonicWitness {
    pub branch: Vec<usize>,
    /// Values at the largest radius of the schedule.
    pub values: VertexFunction,
    /// `(radius, I_p(h_n, B_n))`.
    pub dirichlet_sum_trace: Vec<(usize, f64)>,
    /// `(radius, max − min of h_n on the fixed window B_w(root))`.
    pub window_oscillation: Vec<(usize, f64)>,
    pub bound: f64,
    pub residual: f64,
    /// For every branch passed to [`bhd_basis`], `h` along the first ray
    /// from the root into that branch.
    pub branch_profile: Vec<Vec<f64>>,
}

fn check_disjoint(sets: &[Vec<usize>], n: usize) -> Result<()> {
    let mut owner = vec![usize::MAX; n];
    for (k, s) in sets.iter().enumerate() {
        for &x in s {
            if owner[x] != usize::MAX && owner[x] != k {
                return Err(Error::domain(format!(
                    "sets {} and {k} overlap at vertex {x}",
                    owner[x]
                )));
            }
            owner[x] = k;
        }
    }
    Ok(())
}

/// Geodesic from the root to the lowest-id frontier vertex of `branch`.
fn branch_ray(fam: &TruncatedFamily, branch: &[usize], radius: usize) -> Option<Vec<usize>> {
    let target = branch.iter().copied().find(|&x| fam.depth[x] == radius)?;
    let mut ray = vec![target];
    let mut x = target;
    while x != fam.root {
        x = *fam
            .graph
            .neighbors(x)
            .iter()
            .find(|&&y| fam.depth[y] + 1 == fam.depth[x])?;
        ray.push(x);
    }
    ray.reverse();
    Some(ray)
}

fn witness_for(
    fam: &TruncatedFamily,
    branches: &[Vec<usize>],
    k: usize,
    p: PExponent,
    schedule: &[usize],
    opts: &CertifyOptions,
) -> Result<HarmonicWitness> {
    let g = &fam.graph;
    let in_branch = g.mask(&branches[k]);
    let window_radius = (schedule[0] / 2).max(1);
    let window = fam.ball(window_radius);
    let mut trace = Vec::new();
    let mut osc = Vec::new();
    let mut last = None;
    for &n in schedule {
        let interior = fam.ball(n);
        let region = Region::new(g, interior.clone())?;
        let bd = VertexFunction::from_pairs(
            g.vertex_count(),
            region
                .outer_boundary()
                .iter()
                .map(|&x| (x, if in_branch[x] { 1.0 } else { 0.0 })),
        )?;
        let prob = DirichletProblem::new(region, bd, p)?
            .with_tolerance(opts.tolerance)
            .with_max_iterations(opts.max_iterations);
        let sol = dirichlet::solve_dirichlet(&prob)?;
        trace.push((n, calculus::dirichlet_sum(g, &sol.values, &interior, p)?));
        let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            let v = sol.values.get(x).unwrap_or(0.0);
            (lo.min(v), hi.max(v))
        });
        osc.push((n, hi - lo));
        last = Some((n, sol));
    }
    let (n_last, sol) = last.expect("schedule is nonempty");
    let branch_profile = branches
        .iter()
        .map(|b| {
            branch_ray(fam, b, n_last)
                .map(|ray| ray.iter().map(|&x| sol.values.get(x).unwrap_or(0.0)).collect())
                .unwrap_or_default()
        })
        .collect();
    Ok(HarmonicWitness {
        branch: branches[k].clone(),
        bound: sol.values.sup_norm(),
        residual: sol.residual,
        values: sol.values,
        dirichlet_sum_trace: trace,
        window_oscillation: osc,
        branch_profile,
    })
}

/// One witness per branch; branches must be pairwise disjoint.
pub fn bhd_basis(
    fam: &TruncatedFamily,
    branches: &[Vec<usize>],
    p: PExponent,
    schedule: &[usize],
    opts: &CertifyOptions,
) -> Result<Vec<HarmonicWitness>> {
    if branches.is_empty() {
        return Err(Error::domain("bhd_basis needs at least one branch"));
    }
    for b in branches {
        fam.graph.check_set(b)?;
    }
    check_disjoint(branches, fam.vertex_count())?;
    check_schedule(schedule, fam.truncation_radius)?;
    (0..branches.len())
        .into_par_iter()
        .map(|k| witness_for(fam, branches, k, p, schedule, opts))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    /// Radii for the inner-potential exhaustion.
    pub schedule: Vec<usize>,
    /// Superlevel threshold is `1 − epsilon`.
    pub epsilon: f64,
    pub certify: CertifyOptions,
    /// Seed sets; the family's default seeds when `None`.
    pub seeds: Option<Vec<Vec<usize>>>,
}

impl SearchParams {
    pub fn for_family(fam: &TruncatedFamily) -> Self {
        SearchParams {
            schedule: default_massive_schedule(fam.truncation_radius),
            epsilon: DEFAULT_EPSILON,
            certify: CertifyOptions::default(),
            seeds: None,
        }
    }
}

/// The last six radii up to `max_radius`.
pub fn default_massive_schedule(max_radius: usize) -> Vec<usize> {
    (max_radius.saturating_sub(5).max(1)..=max_radius).collect()
}

/// Certifies the first massive superlevel component of the seed's witness.
fn certify_seed(
    fam: &TruncatedFamily,
    seeds: &[Vec<usize>],
    k: usize,
    p: PExponent,
    params: &SearchParams,
) -> Result<Option<MassiveCertificate>> {
    let witness = witness_for(fam, seeds, k, p, &[fam.truncation_radius], &params.certify)?;
    let seed = &seeds[k];
    let b = 1.0 - params.epsilon;
    let above: Vec<usize> = seed
        .iter()
        .copied()
        .filter(|&x| witness.values.get(x).is_ok_and(|v| v > b))
        .collect();
    for comp in fam.graph.components(&above) {
        match inner_potential(fam, &comp, p, &params.schedule, &params.certify) {
            Ok(cert) if cert.verdict == MassiveVerdict::Massive => return Ok(Some(cert)),
            Ok(_) | Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Searches for up to `n_target` pairwise disjoint massive sets.
///
/// For every seed set: build its harmonic witness, take the components of
/// `{h > 1 − ε}` inside the seed (ordered by smallest vertex), and certify
/// them in order. At most one
/// certificate is kept per seed, so the results are disjoint.
pub fn disjoint_massive_search(
    fam: &TruncatedFamily,
    n_target: usize,
    p: PExponent,
    params: &SearchParams,
) -> Result<Vec<MassiveCertificate>> {
    if n_target == 0 {
        return Err(Error::domain("n_target must be at least 1"));
    }
    if !(params.epsilon > 0.0 && params.epsilon < 0.5) {
        return Err(Error::domain("epsilon must lie in (0, 1/2)"));
    }
    let seeds = params.seeds.clone().unwrap_or_else(|| fam.seed_branches());
    for s in &seeds {
        fam.graph.check_set(s)?;
    }
    check_disjoint(&seeds, fam.vertex_count())?;
    let found = (0..seeds.len())
        .into_par_iter()
        .map(|k| certify_seed(fam, &seeds, k, p, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(found.into_iter().flatten().take(n_target).collect())
}

/// Number of certificates, after checking they are massive and disjoint.
pub fn boundary_lower_bound(certs: &[MassiveCertificate]) -> Result<usize> {
    if let Some(c) = certs.iter().find(|c| c.verdict != MassiveVerdict::Massive) {
        return Err(Error::domain(format!(
            "certificate with verdict {} cannot count toward the bound",
            c.verdict
        )));
    }
    let n = certs
        .iter()
        .flat_map(|c| c.candidate.iter())
        .max()
        .map_or(0, |m| m + 1);
    let sets: Vec<Vec<usize>> = certs.iter().map(|c| c.candidate.clone()).collect();
    check_disjoint(&sets, n)?;
    Ok(certs.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticValue {
    /// Mean of `h` over the last quarter of the ray.
    pub value: f64,
    /// `max − min` of `h` over the same tail.
    pub oscillation: f64,
}

/// Tail estimate of `lim h(x_n)` along a ray that ends on the frontier.
pub fn asymptotic_value(
    fam: &TruncatedFamily,
    h: &VertexFunction,
    ray: &EdgePath,
) -> Result<AsymptoticValue> {
    let verts = ray.vertices();
    if verts.len() < 4 {
        return Err(Error::domain("ray must have at least 4 vertices"));
    }
    if fam.depth[ray.last()] != fam.truncation_radius {
        return Err(Error::domain("ray does not reach the frontier"));
    }
    let tail_len = verts.len().div_ceil(4);
    let tail = verts[verts.len() - tail_len..]
        .iter()
        .map(|&x| h.get(x))
        .collect::<Result<Vec<_>>>()?;
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AsymptoticValue {
        value: tail.iter().sum::<f64>() / tail.len() as f64,
        oscillation: hi - lo,
    })
}

/// Rays inside `Γ_F` ending on the frontier.
///
/// Lattices: the axis rays from the origin plus eight random monotone rays
/// drawn with `seed`. Other families: for each frontier vertex of `F`, the
/// BFS-tree path inside `Γ_F` from the vertices of `F` nearest the root.
pub fn sample_rays(fam: &TruncatedFamily, f_set: &[usize], seed: u64) -> Result<Vec<EdgePath>> {
    let g = &fam.graph;
    g.check_set(f_set)?;
    let in_f = g.mask(f_set);
    let r = fam.truncation_radius;
    let mut rays = Vec::new();
    if let (FamilyKind::Lattice, Some(coords)) = (fam.kind, fam.coords.as_ref()) {
        let dim = coords[0].len();
        let lookup = |pt: &[i64]| fam.lattice_vertex(pt);
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        for axis in 0..dim {
            for sign in [1i64, -1] {
                let ray: Option<Vec<usize>> = (0..=r as i64)
                    .map(|k| {
                        let mut pt = vec![0i64; dim];
                        pt[axis] = sign * k;
                        lookup(&pt)
                    })
                    .collect();
                candidates.extend(ray);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let signs: Vec<i64> = (0..dim).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            let mut pt = vec![0i64; dim];
            let mut ray = vec![lookup(&pt)];
            for _ in 0..r {
                let axis = rng.gen_range(0..dim);
                pt[axis] += signs[axis];
                ray.push(lookup(&pt));
            }
            candidates.extend(ray.into_iter().collect::<Option<Vec<_>>>());
        }
        for c in candidates {
            if c.iter().all(|&x| in_f[x]) {
                rays.push(EdgePath::new(g, c)?);
            }
        }
        return Ok(rays);
    }

    let Some(d_min) = f_set.iter().map(|&x| fam.depth[x]).min() else {
        return Ok(rays);
    };
    let sources: Vec<usize> = normalize_set(
        f_set.iter().copied().filter(|&x| fam.depth[x] == d_min).collect(),
    );
    let mut parent = vec![usize::MAX; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = std::collections::VecDeque::new();
    for &s in &sources {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if in_f[y] && !seen[y] && fam.depth[y] == fam.depth[x] + 1 {
                seen[y] = true;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    for &end in f_set.iter().filter(|&&x| fam.depth[x] == r && seen[x]) {
        let mut verts = vec![end];
        let mut x = end;
        while parent[x] != usize::MAX {
            x = parent[x];
            verts.push(x);
        }
        verts.reverse();
        rays.push(EdgePath::new(g, verts)?);
    }
    Ok(rays)
}

#[derive(Debug, Clone, Copy)]
pub struct AcOptions {
    /// Ray limits farther apart than this start a new cluster.
    pub cluster_gap: f64,
    /// Tails oscillating more than this have no limit at this truncation.
    pub oscillation_tolerance: f64,
    /// Exceptional modulus below this fraction of the whole family's counts
    /// as zero.
    pub negligible: f64,
}

impl Default for AcOptions {
    fn default() -> Self {
        AcOptions {
            cluster_gap: 0.1,
            oscillation_tolerance: 0.05,
            negligible: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AcVerdict {
    Consistent { constant: f64 },
    Violated { clusters: Vec<f64> },
    Undecided,
}

impl fmt::Display for AcVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcVerdict::Consistent { constant } => write!(f, "AC-consistent c={constant:.6}"),
            AcVerdict::Violated { clusters } => {
                write!(f, "AC-violated clusters=")?;
                let parts: Vec<String> = clusters.iter().map(|c| format!("{c:.6}")).collect();
                f.write_str(&parts.join(","))
            }
            AcVerdict::Undecided => f.write_str("undecided"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AcReport {
    pub verdict: AcVerdict,
    /// `(center, ray count)` per cluster, by increasing center.
    pub clusters: Vec<(f64, usize)>,
    /// Rays whose tail oscillation exceeded the tolerance.
    pub divergent: usize,
    pub rays: usize,
    pub exceptional_modulus: f64,
    pub family_modulus: f64,
}

/// Checks whether `h` has the same ray limit along p-almost every sampled ray
/// in `Γ_F`.
pub fn ac_check(
    fam: &TruncatedFamily,
    h: &VertexFunction,
    f_set: &[usize],
    p: PExponent,
    rays: &[EdgePath],
    opts: &AcOptions,
) -> Result<AcReport> {
    let g = &fam.graph;
    g.check_set(f_set)?;
    let in_f = g.mask(f_set);
    if let Some(ray) = rays.iter().find(|r| r.vertices().iter().any(|&x| !in_f[x])) {
        return Err(Error::domain(format!(
            "ray starting at {} leaves the set F",
            ray.first()
        )));
    }
    let reaching: Vec<&EdgePath> = rays
        .iter()
        .filter(|r| fam.depth[r.last()] == fam.truncation_radius && r.vertices().len() >= 4)
        .collect();
    if reaching.is_empty() {
        return Ok(AcReport {
            verdict: AcVerdict::Undecided,
            clusters: Vec::new(),
            divergent: 0,
            rays: 0,
            exceptional_modulus: 0.0,
            family_modulus: 0.0,
        });
    }
    let limits = reaching
        .iter()
        .map(|r| asymptotic_value(fam, h, r))
        .collect::<Result<Vec<_>>>()?;

    // cluster the convergent limits
    let mut order: Vec<usize> = (0..limits.len())
        .filter(|&i| limits[i].oscillation <= opts.oscillation_tolerance)
        .collect();
    let divergent = limits.len() - order.len();
    order.sort_by(|&a, &b| limits[a].value.total_cmp(&limits[b].value).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(grp)
                if limits[i].value - limits[*grp.last().unwrap()].value <= opts.cluster_gap =>
            {
                grp.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }
    let center = |grp: &Vec<usize>| grp.iter().map(|&i| limits[i].value).sum::<f64>() / grp.len() as f64;
    let clusters: Vec<(f64, usize)> = groups.iter().map(|grp| (center(grp), grp.len())).collect();

    let mut in_dominant = vec![false; limits.len()];
    let dominant = groups
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k);
    if let Some(k) = dominant {
        for &i in &groups[k] {
            in_dominant[i] = true;
        }
    }
    let all: Vec<EdgePath> = reaching.iter().map(|&r| r.clone()).collect();
    let exceptional: Vec<EdgePath> = all
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_dominant[*i])
        .map(|(_, r)| r.clone())
        .collect();
    let (exceptional_modulus, family_modulus) = if exceptional.is_empty() {
        (0.0, modulus::modulus(g, &PathFamily::Explicit(all.clone()), p)?.modulus)
    } else {
        (
            modulus::modulus(g, &PathFamily::Explicit(exceptional), p)?.modulus,
            modulus::modulus(g, &PathFamily::Explicit(all.clone()), p)?.modulus,
        )
    };
    let verdict = match dominant {
        Some(k) if exceptional_modulus <= opts.negligible * family_modulus => {
            AcVerdict::Consistent { constant: center(&groups[k]) }
        }
        Some(_) => AcVerdict::Violated {
            clusters: clusters.iter().map(|c| c.0).collect(),
        },
        None => AcVerdict::Undecided,
    };
    Ok(AcReport {
        verdict,
        clusters,
        divergent,
        rays: limits.len(),
        exceptional_modulus,
        family_modulus,
    })
}
