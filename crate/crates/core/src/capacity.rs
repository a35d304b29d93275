//! p-capacity `Cap_p(A, ∞, S)` by exhaustion, and the hyperbolic/parabolic
//! classification built on it.
//!
//! "∞" is the distance shell of the truncation radius, grounded at zero. At
//! radius `n` the admissible functions are `1` on `A`, `0` outside
//! `S ∩ B_n(root)`, and the returned value is the minimal energy counting
//! every edge that touches `S ∩ B_n` once.

use std::fmt;

use rayon::prelude::*;

use crate::calculus::{self, PExponent, VertexFunction};
use crate::dirichlet::{self, DirichletProblem};
use crate::error::{Error, Result};
use crate::extrapolate;
use crate::generators::TruncatedFamily;
use crate::graph::{normalize_set, Region};

pub const DEFAULT_PARABOLIC_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_STABILIZATION: f64 = 0.01;
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Hyperbolic,
    Parabolic,
    Undecided,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Hyperbolic => "hyperbolic",
            Classification::Parabolic => "parabolic",
            Classification::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CapacityProblem<'f> {
    pub host: &'f TruncatedFamily,
    /// Finite set held at 1.
    pub a: Vec<usize>,
    /// The set whose capacity is measured; `None` means every vertex.
    pub s: Option<Vec<usize>>,
    pub p: PExponent,
    pub schedule: Vec<usize>,
    /// Limit estimates below this are classified parabolic.
    pub tolerance: f64,
    /// Relative change below which the sequence counts as stabilized.
    pub stabilization: f64,
    pub solver_tolerance: f64,
    pub max_iterations: usize,
}

impl<'f> CapacityProblem<'f> {
    pub fn new(host: &'f TruncatedFamily, a: Vec<usize>, p: PExponent) -> Result<Self> {
        host.graph.check_set(&a)?;
        let a = normalize_set(a);
        if a.is_empty() {
            return Err(Error::domain("capacity needs a nonempty set A"));
        }
        Ok(CapacityProblem {
            host,
            a,
            s: None,
            p,
            schedule: default_schedule(host.truncation_radius),
            tolerance: DEFAULT_PARABOLIC_TOLERANCE,
            stabilization: DEFAULT_STABILIZATION,
            solver_tolerance: dirichlet::DEFAULT_TOLERANCE,
            max_iterations: 200_000_000,
        })
    }

    pub fn within(mut self, s: Vec<usize>) -> Result<Self> {
        self.host.graph.check_set(&s)?;
        let s = normalize_set(s);
        if let Some(&x) = self.a.iter().find(|x| s.binary_search(x).is_err()) {
            return Err(Error::domain(format!("vertex {x} of A is not in S")));
        }
        self.s = Some(s);
        Ok(self)
    }

    pub fn with_schedule(mut self, schedule: Vec<usize>) -> Self {
        self.schedule = schedule;
        self
    }

    fn in_s(&self, x: usize) -> bool {
        self.s.as_ref().is_none_or(|s| s.binary_search(&x).is_ok())
    }
}

/// Radii doubling from 4 up to the truncation radius (which is always included).
pub fn default_schedule(max_radius: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut r = 4;
    while r < max_radius {
        out.push(r);
        r *= 2;
    }
    out.push(max_radius);
    out
}

pub(crate) fn check_schedule(schedule: &[usize], max_radius: usize) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::domain("schedule must be nonempty"));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("schedule must be strictly increasing"));
    }
    if schedule[0] == 0 || schedule[schedule.len() - 1] > max_radius {
        return Err(Error::domain(format!(
            "schedule radii must lie in 1..={max_radius}"
        )));
    }
    Ok(())
}

/// Minimal energy of functions equal to 1 on `A` and supported in `S ∩ B_radius`.
pub fn capacity_finite(prob: &CapacityProblem<'_>, radius: usize) -> Result<f64> {
    let host = prob.host;
    let g = &host.graph;
    if radius == 0 || radius > host.truncation_radius {
        return Err(Error::domain(format!(
            "radius {radius} outside 1..={}",
            host.truncation_radius
        )));
    }
    if let Some(&x) = prob.a.iter().find(|&&x| host.depth[x] >= radius) {
        return Err(Error::domain(format!(
            "vertex {x} of A lies outside the ball of radius {radius}"
        )));
    }
    let truncated: Vec<usize> = (0..g.vertex_count())
        .filter(|&x| host.depth[x] < radius && prob.in_s(x))
        .collect();
    if g.components(&truncated).len() > 1 {
        return Err(Error::domain(format!(
            "S ∩ B_{radius} is disconnected"
        )));
    }
    let a_mask = g.mask(&prob.a);
    let interior: Vec<usize> = truncated.iter().copied().filter(|&x| !a_mask[x]).collect();

    let mut u = VertexFunction::constant(g.vertex_count(), 0.0);
    for &x in &prob.a {
        u.set(x, 1.0);
    }
    if !interior.is_empty() {
        let region = Region::new(g, interior)?;
        let bd = VertexFunction::from_pairs(
            g.vertex_count(),
            region
                .outer_boundary()
                .iter()
                .map(|&x| (x, if a_mask[x] { 1.0 } else { 0.0 })),
        )?;
        let dp = DirichletProblem::new(region, bd, prob.p)?
            .with_tolerance(prob.solver_tolerance)
            .with_max_iterations(prob.max_iterations);
        let sol = dirichlet::solve_dirichlet(&dp)?;
        for (x, v) in sol.values.iter() {
            u.set(x, v);
        }
    }
    calculus::xi(g, &u, &truncated, prob.p)
}

#[derive(Debug, Clone)]
pub struct ExhaustionReport {
    pub entries: Vec<(usize, f64)>,
    pub monotone_nonincreasing: bool,
    /// Extrapolated limit as the radius grows.
    pub limit_estimate: f64,
    /// Relative change between the last two entries.
    pub relative_change: f64,
    pub verdict: Classification,
    pub tolerance: f64,
    pub stabilization: f64,
}

/// Runs [`capacity_finite`] along the schedule and classifies the set.
///
/// Verdicts: parabolic when the extrapolated limit is below `tolerance`;
/// hyperbolic when the limit is above it and either the last two values or
/// the last two limit estimates agree to within `stabilization`; otherwise
/// undecided.
pub fn classify(prob: &CapacityProblem<'_>) -> Result<ExhaustionReport> {
    check_schedule(&prob.schedule, prob.host.truncation_radius)?;
    let values = prob
        .schedule
        .par_iter()
        .map(|&r| capacity_finite(prob, r))
        .collect::<Result<Vec<f64>>>()?;
    for (i, w) in values.windows(2).enumerate() {
        if w[1] > w[0] + MONOTONE_SLACK * w[0].abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "capacity increased from {} at radius {} to {} at radius {}",
                w[0],
                prob.schedule[i],
                w[1],
                prob.schedule[i + 1]
            )));
        }
    }
    let entries: Vec<(usize, f64)> = prob.schedule.iter().copied().zip(values.iter().copied()).collect();
    Ok(assemble_report(entries, prob.tolerance, prob.stabilization))
}

pub(crate) fn assemble_report(
    entries: Vec<(usize, f64)>,
    tolerance: f64,
    stabilization: f64,
) -> ExhaustionReport {
    let values: Vec<f64> = entries.iter().map(|e| e.1).collect();
    let last = values[values.len() - 1];
    let limit = extrapolate::tail_limit(&values)
        .map(|l| l.clamp(0.0, last))
        .unwrap_or(last);
    let relative_change = match values.as_slice() {
        [.., a, b] => relative(*a, *b),
        _ => f64::INFINITY,
    };
    let limits_settled = values.len() >= 4 && {
        let prev = extrapolate::tail_limit(&values[..values.len() - 1])
            .unwrap_or(f64::NAN)
            .clamp(0.0, f64::INFINITY);
        relative(prev, limit) < stabilization
    };
    let verdict = if (limit < tolerance && values.len() >= 3) || last < tolerance {
        Classification::Parabolic
    } else if limit > tolerance && (relative_change < stabilization || limits_settled) {
        Classification::Hyperbolic
    } else {
        Classification::Undecided
    };
    ExhaustionReport {
        monotone_nonincreasing: values
            .windows(2)
            .all(|w| w[1] <= w[0] + MONOTONE_SLACK * w[0].abs().max(1.0)),
        entries,
        limit_estimate: limit,
        relative_change,
        verdict,
        tolerance,
        stabilization,
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    #[test]
    fn line_capacity_closed_form() {
        let z = generators::regular_tree(2, 10).unwrap();
        let prob = CapacityProblem::new(&z, vec![z.root], p(2.0)).unwrap();
        let c = capacity_finite(&prob, 10).unwrap();
        assert!((c - 0.2).abs() < 1e-8, "{c}");
    }

    #[test]
    fn forced_function_when_a_fills_the_ball() {
        let z = generators::regular_tree(2, 5).unwrap();
        let a = z.ball(2);
        let prob = CapacityProblem::new(&z, a, p(2.0)).unwrap();
        // u = 1 on {-1,0,1}, 0 at ±2: two unit jumps
        assert!((capacity_finite(&prob, 2).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn a_must_fit_in_the_ball() {
        let z = generators::regular_tree(2, 6).unwrap();
        let far = z.shell(4)[0];
        let prob = CapacityProblem::new(&z, vec![far], p(2.0)).unwrap();
        assert!(capacity_finite(&prob, 3).is_err());
        assert!(CapacityProblem::new(&z, vec![], p(2.0)).is_err());
    }

    #[test]
    fn short_schedules_are_undecided() {
        let t = generators::regular_tree(3, 3).unwrap();
        let prob = CapacityProblem::new(&t, vec![t.root], p(2.0))
            .unwrap()
            .with_schedule(vec![2, 3]);
        assert_eq!(classify(&prob).unwrap().verdict, Classification::Undecided);
    }

    #[test]
    fn schedule_validation() {
        assert!(check_schedule(&[], 5).is_err());
        assert!(check_schedule(&[4, 4], 5).is_err());
        assert!(check_schedule(&[4, 8], 5).is_err());
        assert!(check_schedule(&[2, 5], 5).is_ok());
        assert_eq!(default_schedule(20), vec![4, 8, 16, 20]);
        assert_eq!(default_schedule(3), vec![3]);
    }
}
