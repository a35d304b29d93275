//! The `pharm` command-line tool.
//!
//! Every report starts with a header line carrying the version, `p`, the
//! solver tolerance and the schedule. Diagnostics go to standard error;
//! results go to standard output or to `--out`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::calculus::PExponent;
use crate::capacity::{self, CapacityProblem};
use crate::dirichlet::{self, DirichletProblem};
use crate::error::{Error, Result};
use crate::generators::{self, FamilyKind, TruncatedFamily};
use crate::graph::Region;
use crate::io::{self, IdMap};
use crate::massive::{self, AcOptions, CertifyOptions, MassiveCertificate, SearchParams};
use crate::modulus::{self, PathFamily};
use crate::VERSION;

#[derive(Debug, Parser)]
#[command(name = "pharm", version, about = "Discrete nonlinear potential theory on graphs")]
struct Cli {
    /// Exponent p > 1.
    #[arg(long, global = true, default_value = "2", value_parser = parse_p)]
    p: f64,
    /// Residual tolerance for Dirichlet solves.
    #[arg(long, global = true, value_parser = parse_positive)]
    tol: Option<f64>,
    /// Budget of local updates per Dirichlet solve.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// Seed for lattice ray sampling.
    #[arg(long, global = true, default_value_t = massive::DEFAULT_RAY_SEED)]
    seed: u64,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress diagnostics on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Source {
    /// Graph file (edge list); metadata is read from FILE.meta when present.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Explicit metadata file.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Generate a family instead of reading a graph.
    #[arg(long)]
    family: Option<FamilyKind>,
    /// Tree degree.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Lattice dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Truncation radius.
    #[arg(long, alias = "radius")]
    depth: Option<usize>,
    /// Number of wedge parts.
    #[arg(long, default_value_t = 2)]
    parts: usize,
    /// Family of each wedge part.
    #[arg(long, default_value = "tree")]
    part: FamilyKind,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a truncated family as a graph file plus a `.meta` sidecar.
    Generate {
        #[command(flatten)]
        source: Source,
    },
    /// Solve a Dirichlet problem.
    Solve {
        #[command(flatten)]
        source: Source,
        /// Boundary values ("id value" per line) on the outer boundary.
        #[arg(long)]
        boundary: PathBuf,
        /// Interior vertex set.
        #[arg(long)]
        interior: PathBuf,
        /// Write the solution here instead of inline.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Capacity by exhaustion and the hyperbolic/parabolic verdict.
    Capacity {
        #[command(flatten)]
        source: Source,
        /// Set held at 1 (default: the root).
        #[arg(long = "set-a")]
        set_a: Option<PathBuf>,
        /// Set whose capacity is measured (default: all vertices).
        #[arg(long)]
        within: Option<PathBuf>,
        /// Comma-separated radii.
        #[arg(long, value_parser = parse_schedule)]
        schedule: Option<Schedule>,
    },
    /// p-modulus of an explicit or connecting path family.
    Modulus {
        #[command(flatten)]
        source: Source,
        /// One path per line.
        #[arg(long, conflicts_with_all = ["from", "to"])]
        paths: Option<PathBuf>,
        #[arg(long, requires = "to")]
        from: Option<PathBuf>,
        #[arg(long, requires = "from")]
        to: Option<PathBuf>,
        #[arg(long)]
        within: Option<PathBuf>,
        /// Write the optimal density here instead of inline.
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// Certify one candidate set as massive.
    Massive {
        #[command(flatten)]
        source: Source,
        /// Candidate set.
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_parser = parse_schedule)]
        schedule: Option<Schedule>,
    },
    /// Search for pairwise disjoint massive sets.
    Search {
        #[command(flatten)]
        source: Source,
        #[arg(long = "n-target", default_value_t = 3)]
        n_target: usize,
        #[arg(long, default_value_t = massive::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, value_parser = parse_schedule)]
        schedule: Option<Schedule>,
    },
    /// Bounded harmonic witnesses, one per branch.
    Bhd {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_schedule)]
        schedule: Option<Schedule>,
    },
    /// Asymptotic ray limits of a function and the p-a.e. constancy check.
    Ac {
        #[command(flatten)]
        source: Source,
        /// Function to test ("id value" per line).
        #[arg(long, conflicts_with = "branch")]
        function: Option<PathBuf>,
        /// Test the harmonic witness of this seed branch instead.
        #[arg(long)]
        branch: Option<usize>,
        /// Set F containing the rays (default: all vertices).
        #[arg(long)]
        set: Option<PathBuf>,
    },
    /// Classification, disjoint search and boundary lower bound in one report.
    Report {
        #[command(flatten)]
        source: Source,
        #[arg(long = "n-target", default_value_t = 3)]
        n_target: usize,
    },
}

#[derive(Debug, Clone)]
struct Schedule(Vec<usize>);

fn parse_p(s: &str) -> std::result::Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    PExponent::new(p).map_err(|e| e.to_string())?;
    Ok(p)
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("'{s}' is not a positive number")),
    }
}

fn parse_schedule(s: &str) -> std::result::Result<Schedule, String> {
    let radii = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad radius '{t}'")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if radii.is_empty() || radii[0] == 0 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err("schedule must be positive and strictly increasing".into());
    }
    Ok(Schedule(radii))
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pharm: {e}");
            e.exit_code()
        }
    }
}

struct Loaded {
    fam: TruncatedFamily,
    map: IdMap,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn build(kind: FamilyKind, src: &Source, depth: usize) -> Result<TruncatedFamily> {
    match kind {
        FamilyKind::Tree => generators::regular_tree(src.k, depth),
        FamilyKind::Lattice => generators::lattice(src.dim, depth),
        FamilyKind::Path => generators::path(depth),
        FamilyKind::Wedge => {
            if src.part == FamilyKind::Wedge {
                return Err(Error::Domain("wedge parts cannot be wedges".into()));
            }
            let parts = (0..src.parts)
                .map(|_| build(src.part, src, depth))
                .collect::<Result<Vec<_>>>()?;
            generators::wedge(&parts)
        }
    }
}

fn load(src: &Source) -> Result<Loaded> {
    if let Some(path) = &src.graph {
        let (g, map) = io::read_graph(&read(path)?)?;
        let meta_path = src.meta.clone().or_else(|| {
            let mut m = path.clone().into_os_string();
            m.push(".meta");
            let m = PathBuf::from(m);
            m.exists().then_some(m)
        });
        let meta = meta_path.map(|m| read(&m)).transpose()?;
        let fam = io::read_family(g, &map, meta.as_deref())?;
        return Ok(Loaded { fam, map });
    }
    let Some(kind) = src.family else {
        return Err(Error::Domain("give --graph FILE or --family KIND".into()));
    };
    let Some(depth) = src.depth else {
        return Err(Error::Domain("--family needs --depth".into()));
    };
    let fam = build(kind, src, depth)?;
    let map = IdMap::identity(fam.vertex_count());
    Ok(Loaded { fam, map })
}

fn header(cli: &Cli, tol: f64, schedule: Option<&[usize]>) -> String {
    let sched = schedule.map_or_else(
        || "-".to_string(),
        |s| s.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
    );
    format!("# pharm {VERSION} p={} tol={tol:e} schedule={sched}\n", cli.p)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text)?;
            if !cli.quiet {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_side(cli: &Cli, path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    if !cli.quiet {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn certify_options(cli: &Cli) -> CertifyOptions {
    let mut opts = CertifyOptions::default();
    if let Some(t) = cli.tol {
        opts.tolerance = t;
    }
    if let Some(m) = cli.max_iter {
        opts.max_iterations = m;
    }
    opts
}

fn execute(cli: &Cli) -> Result<()> {
    let p = PExponent::new(cli.p)?;
    let tol = cli.tol.unwrap_or(dirichlet::DEFAULT_TOLERANCE);
    match &cli.command {
        Command::Generate { source } => {
            let Loaded { fam, map } = load(source)?;
            let graph = io::write_graph(&fam.graph, &map);
            let meta = io::write_meta(&fam, &map);
            match &cli.out {
                Some(path) => {
                    write_side(cli, path, &graph)?;
                    let mut m = path.clone().into_os_string();
                    m.push(".meta");
                    write_side(cli, Path::new(&m), &meta)?;
                }
                None => print!("{graph}"),
            }
            Ok(())
        }
        Command::Solve {
            source,
            boundary,
            interior,
            solution,
        } => {
            let Loaded { fam, map } = load(source)?;
            let g = &fam.graph;
            let interior = io::read_set(&read(interior)?, &map)?;
            let bd = io::read_function(&read(boundary)?, &map)?;
            let region = Region::new(g, interior)?;
            let prob = DirichletProblem::new(region, bd, p)?
                .with_tolerance(tol)
                .with_max_iterations(cli.max_iter.unwrap_or(dirichlet::DEFAULT_MAX_ITERATIONS));
            let sol = dirichlet::solve_dirichlet(&prob)?;
            let values = io::write_function(&sol.values, &map);
            let mut out = header(cli, tol, None);
            match solution {
                Some(path) => write_side(cli, path, &values)?,
                None => out.push_str(&values),
            }
            let _ = writeln!(
                out,
                "residual={:e} energy={} iterations={}",
                sol.residual, sol.energy, sol.iterations_used
            );
            emit(cli, &out)
        }
        Command::Capacity {
            source,
            set_a,
            within,
            schedule,
        } => {
            let Loaded { fam, map } = load(source)?;
            let a = match set_a {
                Some(path) => io::read_set(&read(path)?, &map)?,
                None => vec![fam.root],
            };
            let mut prob = CapacityProblem::new(&fam, a, p)?;
            if let Some(path) = within {
                prob = prob.within(io::read_set(&read(path)?, &map)?)?;
            }
            if let Some(s) = schedule {
                prob = prob.with_schedule(s.0.clone());
            }
            prob.solver_tolerance = tol;
            if let Some(m) = cli.max_iter {
                prob.max_iterations = m;
            }
            let report = capacity::classify(&prob)?;
            let mut out = header(cli, tol, Some(&prob.schedule));
            out.push_str("# radius capacity\n");
            for (r, v) in &report.entries {
                let _ = writeln!(out, "{r} {v}");
            }
            let _ = writeln!(out, "monotone: {}", report.monotone_nonincreasing);
            let _ = writeln!(out, "limit: {}", report.limit_estimate);
            let _ = writeln!(out, "relative_change: {}", report.relative_change);
            let _ = writeln!(out, "verdict: {}", report.verdict);
            emit(cli, &out)
        }
        Command::Modulus {
            source,
            paths,
            from,
            to,
            within,
            density,
        } => {
            let Loaded { fam, map } = load(source)?;
            let g = &fam.graph;
            let family = match (paths, from, to) {
                (Some(path), _, _) => PathFamily::Explicit(io::read_paths(&read(path)?, g, &map)?),
                (None, Some(f), Some(t)) => PathFamily::Connecting {
                    from: io::read_set(&read(f)?, &map)?,
                    to: io::read_set(&read(t)?, &map)?,
                    within: within
                        .as_ref()
                        .map(|w| read(w).and_then(|text| io::read_set(&text, &map)))
                        .transpose()?,
                },
                _ => return Err(Error::Domain("give --paths FILE or --from FILE --to FILE".into())),
            };
            let r = modulus::modulus(g, &family, p)?;
            let mut out = header(cli, tol, None);
            let _ = writeln!(out, "modulus={}", r.modulus);
            let _ = writeln!(out, "extremal_length={}", r.extremal_length);
            let _ = writeln!(out, "infinite={}", r.infinite);
            let _ = writeln!(out, "active_paths={}", r.active_paths.len());
            let _ = writeln!(out, "paths_used={}", r.paths_used);
            let _ = writeln!(out, "dual_gap={:e}", r.dual_gap);
            let rho = io::write_density(g, &r.density, &map);
            match density {
                Some(path) => write_side(cli, path, &rho)?,
                None => {
                    out.push_str("# density\n");
                    out.push_str(&rho);
                }
            }
            emit(cli, &out)
        }
        Command::Massive {
            source,
            set,
            schedule,
        } => {
            let Loaded { fam, map } = load(source)?;
            let u = io::read_set(&read(set)?, &map)?;
            let sched = schedule
                .as_ref()
                .map_or_else(|| massive::default_massive_schedule(fam.truncation_radius), |s| s.0.clone());
            let opts = certify_options(cli);
            let cert = massive::inner_potential(&fam, &u, p, &sched, &opts)?;
            let mut out = header(cli, opts.tolerance, Some(&sched));
            write_certificate(&mut out, &cert, &map);
            let _ = writeln!(
                out,
                "verdict={} n={} sup={} residual={:e}",
                cert.verdict,
                cert.candidate.len(),
                cert.sup_value,
                cert.laplacian_residual
            );
            emit(cli, &out)
        }
        Command::Search {
            source,
            n_target,
            epsilon,
            schedule,
        } => {
            let Loaded { fam, map } = load(source)?;
            let mut params = SearchParams::for_family(&fam);
            params.epsilon = *epsilon;
            params.certify = certify_options(cli);
            if let Some(s) = schedule {
                params.schedule = s.0.clone();
            }
            let certs = massive::disjoint_massive_search(&fam, *n_target, p, &params)?;
            let bound = massive::boundary_lower_bound(&certs)?;
            let mut out = header(cli, params.certify.tolerance, Some(&params.schedule));
            for (i, c) in certs.iter().enumerate() {
                let _ = writeln!(out, "[certificate {i}]");
                write_certificate(&mut out, c, &map);
            }
            let _ = writeln!(out, "boundary_lower_bound: {bound}");
            write_search_summary(&mut out, &certs, *n_target);
            emit(cli, &out)
        }
        Command::Bhd { source, schedule } => {
            let Loaded { fam, map } = load(source)?;
            let sched = schedule
                .as_ref()
                .map_or_else(|| capacity::default_schedule(fam.truncation_radius), |s| s.0.clone());
            let opts = certify_options(cli);
            let branches = fam.seed_branches();
            let witnesses = massive::bhd_basis(&fam, &branches, p, &sched, &opts)?;
            let mut out = header(cli, opts.tolerance, Some(&sched));
            let mut bound = 0.0f64;
            let mut residual = 0.0f64;
            for (i, w) in witnesses.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "[witness {i}] branch_size={} first={}",
                    w.branch.len(),
                    map.external(w.branch[0])
                );
                out.push_str("# radius dirichlet_sum window_oscillation\n");
                for ((r, d), (_, o)) in w.dirichlet_sum_trace.iter().zip(&w.window_oscillation) {
                    let _ = writeln!(out, "{r} {d} {o}");
                }
                for (j, prof) in w.branch_profile.iter().enumerate() {
                    let vals: Vec<String> = prof.iter().map(|v| format!("{v:.6}")).collect();
                    let _ = writeln!(out, "profile {j}: {}", vals.join(" "));
                }
                let _ = writeln!(out, "bound: {}", w.bound);
                let _ = writeln!(out, "residual: {:e}", w.residual);
                bound = bound.max(w.bound);
                residual = residual.max(w.residual);
            }
            let _ = writeln!(
                out,
                "verdict=ok n={} sup={} residual={:e}",
                witnesses.len(),
                bound,
                residual
            );
            emit(cli, &out)
        }
        Command::Ac {
            source,
            function,
            branch,
            set,
        } => {
            let Loaded { fam, map } = load(source)?;
            let opts = certify_options(cli);
            let (h, residual) = match (function, branch) {
                (Some(path), _) => (io::read_function(&read(path)?, &map)?, 0.0),
                (None, Some(k)) => {
                    let branches = fam.seed_branches();
                    if *k >= branches.len() {
                        return Err(Error::Domain(format!(
                            "branch {k} out of range (family has {})",
                            branches.len()
                        )));
                    }
                    let w = massive::bhd_basis(&fam, &branches, p, &[fam.truncation_radius], &opts)?;
                    let w = w.into_iter().nth(*k).expect("branch index checked");
                    (w.values, w.residual)
                }
                (None, None) => return Err(Error::Domain("give --function FILE or --branch K".into())),
            };
            let f_set = match set {
                Some(path) => io::read_set(&read(path)?, &map)?,
                None => (0..fam.vertex_count()).collect(),
            };
            let rays = massive::sample_rays(&fam, &f_set, cli.seed)?;
            let report = massive::ac_check(&fam, &h, &f_set, p, &rays, &AcOptions::default())?;
            let mut out = header(cli, opts.tolerance, None);
            let _ = writeln!(out, "seed: {}", cli.seed);
            let _ = writeln!(out, "rays: {}", report.rays);
            let _ = writeln!(out, "divergent: {}", report.divergent);
            out.push_str("# cluster_center rays\n");
            for (c, n) in &report.clusters {
                let _ = writeln!(out, "{c} {n}");
            }
            let _ = writeln!(out, "exceptional_modulus: {}", report.exceptional_modulus);
            let _ = writeln!(out, "family_modulus: {}", report.family_modulus);
            let _ = writeln!(out, "result: {}", report.verdict);
            let (verdict, sup) = match &report.verdict {
                massive::AcVerdict::Consistent { constant } => ("consistent", *constant),
                massive::AcVerdict::Violated { .. } => ("violated", f64::NAN),
                massive::AcVerdict::Undecided => ("undecided", f64::NAN),
            };
            let _ = writeln!(
                out,
                "verdict={verdict} n={} sup={sup} residual={residual:e}",
                report.rays
            );
            emit(cli, &out)
        }
        Command::Report { source, n_target } => {
            let Loaded { fam, map } = load(source)?;
            let mut prob = CapacityProblem::new(&fam, vec![fam.root], p)?;
            prob.solver_tolerance = tol;
            let classification = capacity::classify(&prob)?;
            let mut params = SearchParams::for_family(&fam);
            params.certify = certify_options(cli);
            let certs = massive::disjoint_massive_search(&fam, *n_target, p, &params)?;
            let bound = massive::boundary_lower_bound(&certs)?;
            let mut out = header(cli, tol, Some(&prob.schedule));
            let _ = writeln!(out, "family: {}", fam.kind);
            let _ = writeln!(out, "vertices: {}", fam.vertex_count());
            let _ = writeln!(out, "radius: {}", fam.truncation_radius);
            out.push_str("# radius capacity\n");
            for (r, v) in &classification.entries {
                let _ = writeln!(out, "{r} {v}");
            }
            let _ = writeln!(out, "limit: {}", classification.limit_estimate);
            let _ = writeln!(out, "classification: {}", classification.verdict);
            let _ = writeln!(
                out,
                "# massive schedule {}",
                params.schedule.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
            );
            for (i, c) in certs.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "certificate {i}: first={} size={} sup={} limit={}",
                    map.external(c.candidate[0]),
                    c.candidate.len(),
                    c.sup_value,
                    c.limit_estimate
                );
            }
            let _ = writeln!(out, "boundary_lower_bound: {bound}");
            write_search_summary(&mut out, &certs, *n_target);
            emit(cli, &out)
        }
    }
}

fn write_certificate(out: &mut String, c: &MassiveCertificate, map: &IdMap) {
    let _ = writeln!(out, "candidate_size: {}", c.candidate.len());
    let _ = writeln!(out, "candidate_first: {}", map.external(c.candidate[0]));
    let window: Vec<String> = c.window.iter().map(|&x| map.external(x).to_string()).collect();
    let _ = writeln!(out, "window: {}", window.join(" "));
    out.push_str("# radius window_sup\n");
    for (r, w) in &c.exhaustion {
        let _ = writeln!(out, "{r} {w}");
    }
    let _ = writeln!(out, "raw_sup: {}", c.raw_sup);
    let _ = writeln!(out, "normalized_sup: {}", c.sup_value);
    let _ = writeln!(out, "limit: {}", c.limit_estimate);
    let _ = writeln!(out, "contraction: {}", c.contraction);
    let _ = writeln!(out, "half_ball_sup: {}", c.half_ball_sup);
    let _ = writeln!(out, "boundary_zero_violation: {:e}", c.boundary_zero_violation);
    let _ = writeln!(out, "min_value: {}", c.min_value);
    let _ = writeln!(out, "laplacian_residual: {:e}", c.laplacian_residual);
    let _ = writeln!(out, "verdict: {}", c.verdict);
}

fn write_search_summary(out: &mut String, certs: &[MassiveCertificate], n_target: usize) {
    let sup = certs
        .iter()
        .map(|c| c.sup_value)
        .fold(f64::INFINITY, f64::min);
    let residual = certs.iter().map(|c| c.laplacian_residual).fold(0.0, f64::max);
    let verdict = if certs.len() >= n_target { "complete" } else { "partial" };
    let sup = if certs.is_empty() { f64::NAN } else { sup };
    let _ = writeln!(
        out,
        "verdict={verdict} n={} sup={sup} residual={residual:e}",
        certs.len()
    );
}
