//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use pharmonic::calculus::{self, PExponent, VertexFunction};
use pharmonic::capacity::{self, CapacityProblem, Classification};
use pharmonic::dirichlet::{self, DirichletProblem};
use pharmonic::generators;
use pharmonic::massive::{self, CertifyOptions, MassiveVerdict, SearchParams};
use pharmonic::modulus::{self, PathFamily};
use pharmonic::{EdgePath, Graph, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn p(v: f64) -> PExponent {
    PExponent::new(v).unwrap()
}

const PS: [f64; 3] = [1.5, 2.0, 3.0];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn solve(g: &Graph, interior: Vec<usize>, bd: &[(usize, f64)], q: f64, tol: f64) -> VertexFunction {
    let region = Region::new(g, interior).unwrap();
    let data = VertexFunction::from_pairs(g.vertex_count(), bd.iter().copied()).unwrap();
    let prob = DirichletProblem::new(region, data, p(q))
        .unwrap()
        .with_tolerance(tol)
        .with_max_iterations(200_000_000);
    dirichlet::solve_dirichlet(&prob).unwrap().values
}

fn dirichlet_exactness() -> Outcome {
    let g = common::line(11);
    let mut worst = 0.0f64;
    for q in PS {
        let start = Instant::now();
        let u = solve(&g, (1..10).collect(), &[(0, 0.0), (10, 1.0)], q, 1e-12);
        within_time(start, Duration::from_secs(1))?;
        for i in 0..=10 {
            worst = worst.max((u.get(i).unwrap() - i as f64 / 10.0).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("sup error {worst:e}"))?;
    Ok(format!("sup error {worst:.1e}"))
}

fn linear_cross_check() -> Outcome {
    let start = Instant::now();
    let w = 32;
    let g = common::grid(w, w);
    let interior: Vec<usize> = (1..w - 1)
        .flat_map(|i| (1..w - 1).map(move |j| i * w + j))
        .collect();
    let region = Region::new(&g, interior.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let bd: Vec<(usize, f64)> = region
        .outer_boundary()
        .iter()
        .map(|&x| (x, rng.gen::<f64>()))
        .collect();
    let u = solve(&g, interior.clone(), &bd, 2.0, 1e-11);

    let index: std::collections::HashMap<usize, usize> =
        interior.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let bd_value: std::collections::HashMap<usize, f64> = bd.iter().copied().collect();
    let n = interior.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (i, &x) in interior.iter().enumerate() {
        a[(i, i)] = g.degree(x) as f64;
        for &y in g.neighbors(x) {
            match index.get(&y) {
                Some(&j) => a[(i, j)] -= 1.0,
                None => b[i] += bd_value[&y],
            }
        }
    }
    let direct = a.lu().solve(&b).ok_or("singular system")?;
    let err = interior
        .iter()
        .enumerate()
        .map(|(i, &x)| (u.get(x).unwrap() - direct[i]).abs())
        .fold(0.0, f64::max);
    within_time(start, Duration::from_secs(30))?;
    ensure(err <= 1e-8, || format!("sup difference {err:e}"))?;
    Ok(format!("sup difference {err:.1e}, {:.2?}", start.elapsed()))
}

fn capacity_closed_forms() -> Outcome {
    let start = Instant::now();
    let z = generators::regular_tree(2, 64).unwrap();
    let mut worst = 0.0f64;
    for q in PS {
        let mut prob = CapacityProblem::new(&z, vec![z.root], p(q)).unwrap();
        prob.solver_tolerance = 1e-12;
        for n in 4..=64 {
            let c = capacity::capacity_finite(&prob, n).map_err(|e| e.to_string())?;
            let exact = 2.0 * (n as f64).powf(1.0 - q);
            worst = worst.max((c - exact).abs() / exact);
        }
        let report = capacity::classify(&prob.clone().with_schedule(vec![4, 8, 16, 32, 64]))
            .map_err(|e| e.to_string())?;
        ensure(report.verdict == Classification::Parabolic, || {
            format!("line at p={q}: verdict {}", report.verdict)
        })?;
    }
    ensure(worst <= 1e-6, || format!("line relative error {worst:e}"))?;

    let t = generators::regular_tree(3, 12).unwrap();
    let report = capacity::classify(&CapacityProblem::new(&t, vec![t.root], p(2.0)).unwrap())
        .map_err(|e| e.to_string())?;
    let lim = report.limit_estimate;
    ensure((lim - 1.5).abs() <= 1e-3, || format!("tree limit {lim}"))?;
    ensure(report.verdict == Classification::Hyperbolic, || {
        format!("tree verdict {}", report.verdict)
    })?;
    within_time(start, Duration::from_secs(60))?;
    Ok(format!(
        "line rel error {worst:.1e}, tree limit {lim:.6}, {:.2?}",
        start.elapsed()
    ))
}

fn theta(lengths: &[usize]) -> (Graph, Vec<EdgePath>) {
    // two hubs 0 and 1 joined by internally disjoint paths
    let mut edges = Vec::new();
    let mut routes = Vec::new();
    let mut next = 2;
    for &l in lengths {
        let mut route = vec![0];
        for _ in 1..l {
            route.push(next);
            next += 1;
        }
        route.push(1);
        for w in route.windows(2) {
            edges.push((w[0], w[1]));
        }
        routes.push(route);
    }
    let g = Graph::from_edges(next, edges).unwrap();
    let paths = routes.into_iter().map(|r| EdgePath::new(&g, r).unwrap()).collect();
    (g, paths)
}

fn modulus_closed_forms() -> Outcome {
    let mut single = 0.0f64;
    for q in PS {
        for l in 1..=20 {
            let g = common::line(l + 1);
            let gamma = EdgePath::new(&g, (0..=l).collect()).unwrap();
            let r = modulus::modulus(&g, &PathFamily::Explicit(vec![gamma]), p(q))
                .map_err(|e| e.to_string())?;
            single = single.max((r.modulus - (l as f64).powf(1.0 - q)).abs());
        }
    }
    ensure(single <= 1e-8, || format!("single path error {single:e}"))?;
    let mut parallel = 0.0f64;
    for lengths in [vec![1, 2, 3], vec![2, 2, 5, 7], vec![3, 4, 6, 10, 12]] {
        let (g, paths) = theta(&lengths);
        for q in PS {
            let exact: f64 = lengths.iter().map(|&l| (l as f64).powf(1.0 - q)).sum();
            let r = modulus::modulus(&g, &PathFamily::Explicit(paths.clone()), p(q))
                .map_err(|e| e.to_string())?;
            parallel = parallel.max((r.modulus - exact).abs());
        }
    }
    ensure(parallel <= 1e-6, || format!("parallel paths error {parallel:e}"))?;
    Ok(format!("single {single:.1e}, parallel {parallel:.1e}"))
}

fn duality() -> Outcome {
    let start = Instant::now();
    let g = common::grid(5, 5);
    let left: Vec<usize> = (0..5).map(|i| 5 * i).collect();
    let right: Vec<usize> = (0..5).map(|i| 5 * i + 4).collect();
    let all: Vec<usize> = (0..25).collect();
    let mut gaps = Vec::new();
    for q in PS {
        let r = modulus::duality_check(&g, &left, &right, &all, p(q)).map_err(|e| e.to_string())?;
        ensure(r.relative_gap < 1e-3, || format!("p={q}: {r:?}"))?;
        gaps.push(format!("{:.1e}", r.relative_gap));
    }
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("gaps {}, {:.2?}", gaps.join("/"), start.elapsed()))
}

fn tree_search() -> Outcome {
    let start = Instant::now();
    let t = generators::regular_tree(3, 12).unwrap();
    let mut sups = Vec::new();
    for q in PS {
        let params = SearchParams::for_family(&t);
        let certs = massive::disjoint_massive_search(&t, 3, p(q), &params).map_err(|e| e.to_string())?;
        ensure(certs.len() == 3, || format!("p={q}: {} certificates", certs.len()))?;
        for c in &certs {
            ensure(c.verdict == MassiveVerdict::Massive, || format!("p={q}: {}", c.verdict))?;
            ensure(c.sup_value >= 0.99, || format!("p={q}: sup {}", c.sup_value))?;
            ensure(c.laplacian_residual <= 1e-8, || {
                format!("p={q}: residual {:e}", c.laplacian_residual)
            })?;
        }
        let bound = massive::boundary_lower_bound(&certs).map_err(|e| e.to_string())?;
        ensure(bound == 3, || format!("p={q}: bound {bound}"))?;
        let min_sup = certs.iter().map(|c| c.sup_value).fold(1.0, f64::min);
        sups.push(format!("{min_sup:.4}"));
    }
    within_time(start, Duration::from_secs(300))?;
    Ok(format!("min sup {}, {:.2?}", sups.join("/"), start.elapsed()))
}

fn parabolic_collapse() -> Outcome {
    let z = generators::regular_tree(2, 64).unwrap();
    let schedule = [8, 16, 32, 64];
    let opts = CertifyOptions {
        tolerance: 1e-11,
        ..CertifyOptions::default()
    };
    let mut decay = 0.0f64;
    for q in PS {
        for half in z.root_branches() {
            let c = massive::inner_potential(&z, &half, p(q), &schedule, &opts)
                .map_err(|e| e.to_string())?;
            ensure(c.verdict == MassiveVerdict::NotMassive, || {
                format!("p={q}: half-line verdict {}", c.verdict)
            })?;
            if q == 2.0 {
                for &(n, w) in &c.exhaustion {
                    decay = decay.max((w - 3.0 / n as f64).abs());
                }
                for (m, &x) in half.iter().take(3).enumerate() {
                    let v = c.inner_potential.get(x).unwrap();
                    decay = decay.max((v - (m + 1) as f64 / 64.0).abs());
                }
            }
        }
        let certs = massive::disjoint_massive_search(&z, 2, p(q), &SearchParams::for_family(&z))
            .map_err(|e| e.to_string())?;
        ensure(certs.is_empty(), || format!("p={q}: search found {}", certs.len()))?;
    }
    ensure(decay <= 1e-6, || format!("m/n decay error {decay:e}"))?;
    Ok(format!("m/n decay error {decay:.1e}"))
}

fn level_set_reflection() -> Outcome {
    let t = generators::regular_tree(3, 12).unwrap();
    let branches = t.seed_branches();
    let all: Vec<usize> = (0..t.vertex_count()).collect();
    let schedule = massive::default_massive_schedule(12);
    let mut summary = Vec::new();
    for q in PS {
        let w = massive::bhd_basis(&t, &branches, p(q), &[12], &CertifyOptions::default())
            .map_err(|e| e.to_string())?;
        let h1 = &w[0].values;
        let levels = massive::level_set_components(&t.graph, h1, &all, 0.2, 0.8)
            .map_err(|e| e.to_string())?;
        let mut massive_count = 0;
        for comp in &levels.superlevel {
            let c = massive::inner_potential(&t, comp, p(q), &schedule, &CertifyOptions::default())
                .map_err(|e| e.to_string())?;
            ensure(c.verdict != MassiveVerdict::NotMassive, || {
                format!("p={q}: component of size {} is not massive", comp.len())
            })?;
            if c.verdict == MassiveVerdict::Massive {
                massive_count += 1;
            }
        }
        ensure(massive_count >= 1, || format!("p={q}: no massive component"))?;
        summary.push(format!("{massive_count}/{}", levels.superlevel.len()));
    }
    Ok(format!("massive components {}", summary.join(" ")))
}

fn invariant_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut identity = 0.0f64;
    let mut grad = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(4..30);
        let g = common::random_connected(&mut rng, n, n / 2);
        let q = rng.gen_range(1.2..4.0);
        let pe = p(q);
        let f = VertexFunction::from_values((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let c = rng.gen_range(-3.0..3.0);
        let scaled = f.map(|v| c * v);
        let shifted = f.map(|v| v + c);
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
        let i0 = calculus::dirichlet_sum(&g, &f, &set, pe).unwrap();
        let x0 = calculus::xi(&g, &f, &set, pe).unwrap();
        identity = identity
            .max(rel(calculus::dirichlet_sum(&g, &scaled, &set, pe).unwrap(), c.abs().powf(q) * i0))
            .max(rel(calculus::dirichlet_sum(&g, &shifted, &set, pe).unwrap(), i0))
            .max(rel(calculus::xi(&g, &scaled, &set, pe).unwrap(), c.abs().powf(q) * x0))
            .max(rel(calculus::xi(&g, &shifted, &set, pe).unwrap(), x0));
        for x in 0..n {
            let l0 = calculus::p_laplacian(&g, &f, x, pe).unwrap();
            let ls = calculus::p_laplacian(&g, &scaled, x, pe).unwrap();
            let lt = calculus::p_laplacian(&g, &shifted, x, pe).unwrap();
            identity = identity
                .max(rel(ls, c.signum() * c.abs().powf(q - 1.0) * l0))
                .max(rel(lt, l0));
        }
        for &x in &set {
            let h = 1e-6;
            let mut plus = f.clone();
            let mut minus = f.clone();
            plus.set(x, f.get(x).unwrap() + h);
            minus.set(x, f.get(x).unwrap() - h);
            let fd = (calculus::xi(&g, &plus, &set, pe).unwrap()
                - calculus::xi(&g, &minus, &set, pe).unwrap())
                / (2.0 * h);
            let exact = -q * calculus::p_laplacian(&g, &f, x, pe).unwrap();
            grad = grad.max((fd - exact).abs() / exact.abs().max(1e-2));
        }
    }
    ensure(identity <= 1e-10, || format!("identity error {identity:e}"))?;
    ensure(grad <= 1e-6, || format!("gradient error {grad:e}"))?;

    // maximum and comparison principles
    for _ in 0..100 {
        let n = rng.gen_range(6..40);
        let g = common::random_connected(&mut rng, n, n / 3);
        let q = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
        let interior: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        let Ok(region) = Region::new(&g, interior.clone()) else {
            continue;
        };
        if region.outer_boundary().is_empty() || interior.is_empty() {
            continue;
        }
        let b1: Vec<(usize, f64)> = region
            .outer_boundary()
            .iter()
            .map(|&x| (x, rng.gen_range(0.0..1.0)))
            .collect();
        let b2: Vec<(usize, f64)> = b1.iter().map(|&(x, v)| (x, v + rng.gen_range(0.0..0.5))).collect();
        let u1 = solve(&g, interior.clone(), &b1, q, 1e-10);
        let u2 = solve(&g, interior.clone(), &b2, q, 1e-10);
        let lo = b1.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
        let hi = b1.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
        for &x in &interior {
            let v1 = u1.get(x).unwrap();
            ensure(v1 >= lo - 1e-12 && v1 <= hi + 1e-12, || {
                format!("maximum principle: {v1} outside [{lo}, {hi}]")
            })?;
            ensure(v1 <= u2.get(x).unwrap() + 1e-7, || "comparison principle violated".into())?;
        }
    }

    // modulus admissibility and monotonicity
    for _ in 0..50 {
        let n = rng.gen_range(5..20);
        let g = common::random_connected(&mut rng, n, n / 2);
        let q = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
        let count = rng.gen_range(2..12);
        let family = common::random_family(&mut rng, &g, count);
        let k = rng.gen_range(1..=family.len());
        let sub = family[..k].to_vec();
        let whole = modulus::modulus(&g, &PathFamily::Explicit(family.clone()), p(q))
            .map_err(|e| e.to_string())?;
        let part = modulus::modulus(&g, &PathFamily::Explicit(sub), p(q)).map_err(|e| e.to_string())?;
        ensure(part.modulus <= whole.modulus * (1.0 + 1e-6), || {
            format!("monotonicity: {} > {}", part.modulus, whole.modulus)
        })?;
        for gamma in &family {
            let (_, slack) = modulus::admissible_check(&whole.density, gamma).unwrap();
            ensure(slack >= -1e-9, || format!("admissibility slack {slack:e}"))?;
        }
        let energy = calculus::xi_p_edges(&g, &whole.density, p(q)).unwrap();
        ensure((energy - whole.modulus).abs() <= 1e-9 * whole.modulus.max(1.0), || {
            "modulus differs from the density's energy".into()
        })?;
    }
    within_time(start, Duration::from_secs(600))?;
    Ok(format!(
        "identities {identity:.1e}, gradient {grad:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn pharm(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pharm"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "pharm {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::write(d.join("left.txt"), "0 5 10 15 20\n").unwrap();
    std::fs::write(d.join("right.txt"), "4 9 14 19 24\n").unwrap();
    let grid: String = common::grid(5, 5)
        .edges()
        .iter()
        .map(|(u, v)| format!("{u} {v}\n"))
        .collect();
    std::fs::write(d.join("grid.txt"), grid).unwrap();
    std::fs::write(d.join("line.txt"), (0..10).map(|i| format!("{i} {}\n", i + 1)).collect::<String>()).unwrap();
    std::fs::write(d.join("inner.txt"), (1..10).map(|i| format!("{i}\n")).collect::<String>()).unwrap();
    std::fs::write(d.join("bd.txt"), "0 0\n10 1\n").unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["generate", "--family", "tree", "--k", "3", "--depth", "6", "--out", "g.txt", "--quiet"],
        vec!["solve", "--graph", "line.txt", "--interior", "inner.txt", "--boundary", "bd.txt", "--p", "3"],
        vec!["capacity", "--family", "tree", "--k", "2", "--depth", "16", "--schedule", "4,8,16"],
        vec!["capacity", "--family", "tree", "--depth", "8", "--p", "1.5"],
        vec!["modulus", "--graph", "grid.txt", "--from", "left.txt", "--to", "right.txt", "--p", "3"],
        vec!["search", "--family", "tree", "--depth", "10", "--n-target", "3"],
        vec!["massive", "--family", "tree", "--k", "2", "--depth", "32", "--set", "a.txt", "--schedule", "8,16,32"],
        vec!["bhd", "--family", "wedge", "--parts", "3", "--part", "path", "--depth", "12"],
        vec!["ac", "--family", "lattice", "--dim", "2", "--depth", "8", "--branch", "0"],
        vec!["report", "--family", "tree", "--depth", "10"],
    ];
    std::fs::write(d.join("a.txt"), "1 3 5 7 9 11 13 15 17 19 21 23 25 27 29 31 33 35 37 39 41 43 45 47 49 51 53 55 57 59 61 63\n").unwrap();
    for args in &runs {
        let first = pharm(args, d)?;
        let g1 = std::fs::read(d.join("g.txt")).ok();
        let second = pharm(args, d)?;
        let g2 = std::fs::read(d.join("g.txt")).ok();
        ensure(first == second && g1 == g2, || format!("output of `{}` differs between runs", args[0]))?;
    }
    Ok(format!("{} invocations byte-identical", runs.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        ("1-D Dirichlet exactness", dirichlet_exactness),
        ("p=2 linear cross-check", linear_cross_check),
        ("capacity closed forms", capacity_closed_forms),
        ("modulus closed forms", modulus_closed_forms),
        ("modulus-capacity duality", duality),
        ("disjoint massive sets on the tree", tree_search),
        ("parabolic collapse on the line", parabolic_collapse),
        ("level-set components of a witness", level_set_reflection),
        ("invariant suite", invariant_suite),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
