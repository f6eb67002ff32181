//! Command-line interface over the relaxation, cut, oracle, lifting and
//! experiment layers. Matrices travel as JSON ({"n", "re", "im"}), per-trial
//! data as CSV, aggregates as JSON on stdout.

use clap::{Args, Parser, Subcommand};
use cutpoly::conic::SolveOpts;
use cutpoly::linalg::HermitianMatrix;
use cutpoly::relax::{FeasibleSetSpec, RelaxKind};
use cutpoly::{cuts, experiments, extremal, lift, oracle, relax, Complexd, HermitianMatrixd};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "cutpoly", about = "Semidefinite relaxations of the complex cut polytope")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a relaxation of max <C, X> over CUT(n,m).
    Solve(SolveArgs),
    /// Cut catalogs and strengths.
    Cuts {
        #[command(subcommand)]
        sub: CutsCmd,
    },
    /// Exact brute-force oracles.
    Oracle {
        #[command(subcommand)]
        sub: OracleCmd,
    },
    /// Moment liftings.
    Lift {
        #[command(subcommand)]
        sub: LiftCmd,
    },
    /// Extreme-point constructions and tests.
    Extremal {
        #[command(subcommand)]
        sub: ExtremalCmd,
    },
    /// Randomized experiment protocols.
    Exp {
        #[command(subcommand)]
        sub: ExpCmd,
    },
    /// Consistency audits; exits nonzero on any failure.
    Verify {
        #[command(subcommand)]
        sub: VerifyCmd,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Objective matrix JSON file.
    #[arg(long)]
    objective: PathBuf,
    /// Feasible set kind.
    #[arg(long, value_parser = parse_set)]
    set: RelaxKind,
    /// Number of roots of unity (omit for elliptope-inf).
    #[arg(long)]
    m: Option<usize>,
    /// Solver feasibility/gap tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Write the optimizer X to this JSON file.
    #[arg(long)]
    x_out: Option<PathBuf>,
}

fn parse_set(s: &str) -> Result<RelaxKind, String> {
    match s {
        "elliptope" => Ok(RelaxKind::Elliptope),
        "triangle" => Ok(RelaxKind::TriangleStrengthened),
        "real-elliptope" => Ok(RelaxKind::RealElliptope3),
        "real-triangle" => Ok(RelaxKind::RealTriangle3),
        "elliptope-inf" => Ok(RelaxKind::ElliptopeInf),
        _ => Err(format!("unknown set {s}")),
    }
}

#[derive(Subcommand)]
enum CutsCmd {
    /// CSV of the cut catalog for CUT(3,3) plus the closed-form cliques.
    List {
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// CSV (name, numerator, denominator, strength) of the table families.
    Strength {
        #[arg(long)]
        m: usize,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Exact maximum of <Q, xx*> over vertices.
    BruteMax {
        #[arg(long)]
        objective: PathBuf,
        #[arg(long)]
        m: usize,
    },
    /// Audit the facet catalog; nonzero exit when a facet fails.
    VerifyFacets {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
}

#[derive(Subcommand)]
enum LiftCmd {
    /// Maximize an objective over a second-order moment lifting.
    Solve {
        #[arg(long)]
        objective: PathBuf,
        /// b1..b6, atilde, a, or cp:<frac>.
        #[arg(long)]
        basis: String,
        /// Required for the randomized cp basis.
        #[arg(long)]
        seed: Option<u64>,
        /// Dump the basis exponents to this JSON file.
        #[arg(long)]
        basis_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExtremalCmd {
    /// The explicit rank-2 extreme point of E(3,m) with verdicts.
    E3m {
        #[arg(long)]
        m: usize,
    },
    /// Distances of random rank-2 extreme points of E(4,inf) to the first
    /// lifting (CSV trial,distance).
    SampleP {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long)]
    m: Vec<usize>,
    #[arg(long)]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 1e-5)]
    rank_tol: f64,
    #[arg(long, default_value_t = 100)]
    rounding_trials: usize,
    /// Basis fractions for angular synchronization.
    #[arg(long = "p")]
    p_fracs: Vec<f64>,
    /// Per-trial CSV output file (stdout row dump is skipped when absent).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Aggregate JSON output file (always echoed to stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExpCmd {
    StrengthTable(ExpArgs),
    RandomObj(ExpArgs),
    Mimo(ExpArgs),
    Angsync(ExpArgs),
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Facet audit, closed forms, lifting equivalence, P-exclusion.
    All,
}

fn read_matrix(path: &PathBuf) -> cutpoly::Result<HermitianMatrixd> {
    HermitianMatrix::read_json(path)
}

fn opts_with_tol(tol: f64) -> SolveOpts {
    SolveOpts {
        feas_tol: tol,
        gap_tol: tol,
        max_iters: 200,
    }
}

fn cmd_solve(args: &SolveArgs) -> cutpoly::Result<()> {
    let c = read_matrix(&args.objective)?;
    let spec = FeasibleSetSpec::new(args.set, c.order(), args.m)?;
    let (value, x, sol) = relax::solve_relaxation(&c, &spec, &opts_with_tol(args.tol))?;
    let rank = x.numeric_rank(1e-6);
    if let Some(path) = &args.x_out {
        x.write_json(path)?;
    }
    let out = serde_json::json!({
        "value": value,
        "status": format!("{:?}", sol.status),
        "rank": rank,
        "iterations": sol.iterations,
        "x_file": args.x_out.as_ref().map(|p| p.display().to_string()),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_cuts_list(m: usize) -> cutpoly::Result<()> {
    println!("name,family,rhs,provenance");
    if m == 3 {
        for c in cuts::facet_catalog_cut33() {
            println!("{},{:?},{},{}", c.name, c.family, c.rhs, c.provenance);
        }
    }
    for n in [3usize, 4] {
        if let Ok(c) = cuts::clique_cut(n, m) {
            println!("{},{:?},{},{}", c.name, c.family, c.rhs, c.provenance);
        }
    }
    let h = cuts::h_cut();
    println!("{},{:?},{},{}", h.name, h.family, h.rhs, h.provenance);
    Ok(())
}

fn cmd_cuts_strength(m: usize) -> cutpoly::Result<()> {
    let opts = SolveOpts::default();
    println!("name,numerator,denominator,strength");
    for (label, q) in experiments::strength_table_rows()? {
        let (den, _) = oracle::brute_max(&q, m)?;
        let spec = FeasibleSetSpec::new(RelaxKind::Elliptope, q.order(), Some(m))?;
        let (num, _, _) = relax::solve_relaxation(&q, &spec, &opts)?;
        println!("{label},{num},{den},{}", num / den);
    }
    Ok(())
}

fn cmd_brute_max(path: &PathBuf, m: usize) -> cutpoly::Result<()> {
    let q = read_matrix(path)?;
    let (value, argmax) = oracle::brute_max(&q, m)?;
    let phases: Vec<[f64; 2]> = argmax.as_slice().iter().map(|z| [z.re, z.im]).collect();
    let out = serde_json::json!({ "value": value, "argmax": phases });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_verify_facets(n: usize, m: usize) -> cutpoly::Result<bool> {
    let catalog = match (n, m) {
        (3, 3) => cuts::facet_catalog_cut33(),
        _ => {
            return Err(cutpoly::Error::Domain(format!(
                "no facet catalog for n = {n}, m = {m}"
            )))
        }
    };
    let mut all_ok = true;
    for cut in &catalog {
        let rep = oracle::verify_facet(cut, n, m)?;
        let ok = rep.valid && rep.affinely_independent;
        all_ok &= ok;
        println!(
            "{}: {} (tight vertices {}, max violation {:.2e})",
            rep.name,
            if ok { "ok" } else { "FAIL" },
            rep.tight_vertex_count,
            rep.max_violation
        );
    }
    Ok(all_ok)
}

fn parse_basis(
    spec: &str,
    p: usize,
    seed: Option<u64>,
) -> cutpoly::Result<lift::MomentBasis> {
    let bases = lift::standard_bases();
    match spec {
        "b1" | "b2" | "b3" | "b4" | "b5" | "b6" => {
            let idx = spec[1..].parse::<usize>().expect("digit") - 1;
            Ok(bases[idx].clone())
        }
        "atilde" => lift::tilde_a_basis(p),
        "a" => lift::a_basis(p),
        _ => {
            if let Some(frac) = spec.strip_prefix("cp:") {
                let frac: f64 = frac
                    .parse()
                    .map_err(|_| cutpoly::Error::Domain(format!("bad fraction in {spec}")))?;
                let seed = seed.ok_or_else(|| {
                    cutpoly::Error::Domain("cp basis needs --seed".into())
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                lift::cp_basis(p + 1, frac, &mut rng)
            } else {
                Err(cutpoly::Error::Domain(format!("unknown basis {spec}")))
            }
        }
    }
}

fn cmd_lift_solve(
    path: &PathBuf,
    basis_spec: &str,
    seed: Option<u64>,
    basis_out: Option<&PathBuf>,
) -> cutpoly::Result<()> {
    let c = read_matrix(path)?;
    let basis = parse_basis(basis_spec, c.order() - 1, seed)?;
    if let Some(out) = basis_out {
        let dump = serde_json::json!({ "p": basis.p, "exponents": basis.exponents });
        std::fs::write(out, serde_json::to_string_pretty(&dump)?)?;
    }
    let (value, x) = lift::lifted_max(&c, &basis, &SolveOpts::default())?;
    let out = serde_json::json!({
        "value": value,
        "basis": basis_spec,
        "basis_size": basis.len(),
        "rank": x.numeric_rank(1e-6),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_extremal_e3m(m: usize) -> cutpoly::Result<()> {
    let n = extremal::e3m_rank2_extreme(m)?;
    let (extreme, diag) = extremal::is_extreme_rank2_e3m(&n, m)?;
    let (inside, _) = oracle::cut_membership(&n, m)?;
    let out = serde_json::json!({
        "m": m,
        "matrix": n.to_json(),
        "rank": n.numeric_rank(1e-8),
        "polygon_violation": relax::polygon_violation(&n, m)?,
        "in_cut_polytope": inside,
        "extreme": extreme,
        "boundary_entries": diag.boundary,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_extremal_sample_p(count: usize, seed: u64) -> cutpoly::Result<()> {
    let [b1, ..] = lift::standard_bases();
    let opts = SolveOpts::default();
    println!("trial,distance");
    for t in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let a = extremal::random_rank2_extreme_e4inf(&mut rng)?;
        let d = lift::projection_distance(&a, &b1, &opts)?;
        println!("{t},{d}");
    }
    Ok(())
}

fn cmd_exp(kind: experiments::ExperimentKind, args: &ExpArgs) -> cutpoly::Result<()> {
    let config = experiments::ExperimentConfig {
        experiment: kind,
        n: args.n,
        m: args.m.clone(),
        sigma: args.sigma.clone(),
        trials: args.trials,
        seed: args.seed,
        rank_tol: args.rank_tol,
        rounding_trials: args.rounding_trials,
        p_fracs: args.p_fracs.clone(),
    };
    let report = experiments::run(&config)?;
    if let Some(path) = &args.csv {
        report.write_csv(std::fs::File::create(path)?)?;
    }
    if let Some(path) = &args.json {
        report.write_json(std::fs::File::create(path)?)?;
    }
    println!("{}", serde_json::to_string_pretty(&report.aggregate)?);
    Ok(())
}

fn cmd_verify_all() -> cutpoly::Result<bool> {
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool| {
        println!("{name}: {}", if ok { "ok" } else { "FAIL" });
        all_ok &= ok;
    };
    // Facet audit.
    let mut facets_ok = true;
    for cut in &cuts::facet_catalog_cut33() {
        let rep = oracle::verify_facet(cut, 3, 3)?;
        facets_ok &= rep.valid && rep.affinely_independent;
    }
    check("facet-audit", facets_ok);
    // Closed forms vs brute force.
    let mut closed_ok = true;
    for n in [3usize, 4] {
        for m in 2..=12usize {
            let cut = cuts::clique_cut(n, m)?;
            let (brute, _) = oracle::brute_max(&cut.q, m)?;
            closed_ok &= (brute - cut.rhs).abs() <= 1e-9;
        }
    }
    check("clique-closed-forms", closed_ok);
    // Lifting equivalence on random objectives.
    let [b1, b2, _, b4, b5, b6] = lift::standard_bases();
    let opts = SolveOpts::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut lift_ok = true;
    for _ in 0..3 {
        use rand::Rng;
        let mut upper = Vec::new();
        for i in 0..4usize {
            for j in (i + 1)..4 {
                upper.push((
                    i,
                    j,
                    Complexd::new(rng.gen_range(-5..=5) as f64, rng.gen_range(-5..=5) as f64),
                ));
            }
        }
        let c = HermitianMatrix::from_upper(4, &[0.0; 4], &upper)?;
        let vals: Vec<f64> = [&b1, &b2, &b4, &b5, &b6]
            .iter()
            .map(|b| lift::lifted_max(&c, b, &opts).map(|(v, _)| v))
            .collect::<cutpoly::Result<_>>()?;
        let spread = vals.iter().cloned().fold(f64::MIN, f64::max)
            - vals.iter().cloned().fold(f64::MAX, f64::min);
        lift_ok &= spread < 1e-5;
    }
    check("lifting-equivalence", lift_ok);
    // P-exclusion: extreme points of E(4,inf) stay clear of the lifting.
    let mut excl_ok = true;
    for t in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        rng.set_stream(t);
        let a = extremal::random_rank2_extreme_e4inf(&mut rng)?;
        excl_ok &= lift::projection_distance(&a, &b1, &opts)? > 1e-5;
    }
    check("p-exclusion", excl_ok);
    Ok(all_ok)
}

fn run() -> cutpoly::Result<bool> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(args) => cmd_solve(args).map(|()| true),
        Command::Cuts { sub } => match sub {
            CutsCmd::List { m } => cmd_cuts_list(*m).map(|()| true),
            CutsCmd::Strength { m } => cmd_cuts_strength(*m).map(|()| true),
        },
        Command::Oracle { sub } => match sub {
            OracleCmd::BruteMax { objective, m } => cmd_brute_max(objective, *m).map(|()| true),
            OracleCmd::VerifyFacets { n, m } => cmd_verify_facets(*n, *m),
        },
        Command::Lift { sub } => match sub {
            LiftCmd::Solve {
                objective,
                basis,
                seed,
                basis_out,
            } => cmd_lift_solve(objective, basis, *seed, basis_out.as_ref()).map(|()| true),
        },
        Command::Extremal { sub } => match sub {
            ExtremalCmd::E3m { m } => cmd_extremal_e3m(*m).map(|()| true),
            ExtremalCmd::SampleP { count, seed } => {
                cmd_extremal_sample_p(*count, *seed).map(|()| true)
            }
        },
        Command::Exp { sub } => {
            use experiments::ExperimentKind::*;
            match sub {
                ExpCmd::StrengthTable(a) => cmd_exp(StrengthTable, a),
                ExpCmd::RandomObj(a) => cmd_exp(RandomObjectives, a),
                ExpCmd::Mimo(a) => cmd_exp(Mimo, a),
                ExpCmd::Angsync(a) => cmd_exp(AngularSync, a),
            }
            .map(|()| true)
        }
        Command::Verify { sub } => match sub {
            VerifyCmd::All => cmd_verify_all(),
        },
    }
}

fn main() {
    match run() {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
