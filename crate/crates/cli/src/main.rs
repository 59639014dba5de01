use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use prcut::bruteforce::bf_min;
use prcut::instance::DEFAULT_ENUMERATION_LIMIT;
use prcut::solver::{separate, SolveReport};
use prcut::{
    enumerate_feasible, first_return_time, generate_random, min_unconstrained, read_instance, solve,
    write_instance, ConstraintSet, ConstraintSpec, CutFamily, Error, GeneratorSpec, OrderingStrategy, Sense, SolveOptions,
    SolveStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "prcut", version, about = "PageRank optimization with fragile-edge selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CutsArg {
    Lshaped,
    New,
    Lifted,
}

impl From<CutsArg> for CutFamily {
    fn from(c: CutsArg) -> Self {
        match c {
            CutsArg::Lshaped => CutFamily::LShaped,
            CutsArg::New => CutFamily::New,
            CutsArg::Lifted => CutFamily::Lifted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Index,
    Gamma,
}

impl From<OrderingArg> for OrderingStrategy {
    fn from(o: OrderingArg) -> Self {
        match o {
            OrderingArg::Index => OrderingStrategy::Index,
            OrderingArg::Gamma => OrderingStrategy::Gamma,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file.
    Validate { file: PathBuf },
    /// Run the cutting-plane method.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        cuts: CutsArg,
        #[arg(long, value_enum, default_value = "index")]
        ordering: OrderingArg,
        #[arg(long, default_value_t = prcut::solver::DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = prcut::solver::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Write the solve report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimum over the feasible set.
    Brute {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build all three cut families at random feasible incumbents, verify
    /// them by enumeration and emit per-edge coefficients as CSV.
    CompareCuts {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "index")]
        ordering: OrderingArg,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        fragile: usize,
        /// none | card_le:K | card_ge:K | card_eq:K | cover:M
        #[arg(long, default_value = "none")]
        constraint: String,
        #[arg(long, default_value_t = prcut::instance::DEFAULT_DAMPING)]
        damping: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_constraint(spec: &str) -> anyhow::Result<ConstraintSpec> {
    if spec == "none" {
        return Ok(ConstraintSpec::None);
    }
    let Some((kind, value)) = spec.split_once(':') else {
        bail!("unrecognized constraint spec {spec:?}");
    };
    let value: i64 = value
        .parse()
        .with_context(|| format!("bad number in constraint spec {spec:?}"))?;
    let card = |sense| ConstraintSpec::Cardinality { sense, k: value };
    Ok(match kind {
        "card_le" => card(Sense::Le),
        "card_ge" => card(Sense::Ge),
        "card_eq" => card(Sense::Eq),
        "cover" if value >= 1 => ConstraintSpec::Cover { size: value as usize },
        _ => bail!("unrecognized constraint spec {spec:?}"),
    })
}

fn write_report(report: &SolveReport, out: Option<&Path>) -> anyhow::Result<()> {
    if let Some(path) = out {
        fs::write(path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn print_report(report: &SolveReport) {
    let status = match report.status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::IterLimit => "iteration limit",
    };
    println!("status: {status}");
    println!("optimum: {}", report.best_value);
    println!("selection: {}", report.best_y);
    println!("iterations: {}", report.iterations);
    println!("cuts: {}", report.cuts_added);
    println!("gamma calls: {}", report.gamma_calls_total);
}

#[derive(Serialize)]
struct CompareRow<'a> {
    instance_id: &'a str,
    incumbent: String,
    edge_id: usize,
    coeff_lshaped: f64,
    coeff_new: f64,
    coeff_lifted: f64,
    family_iterations_lshaped: usize,
    family_iterations_new: usize,
    family_iterations_lifted: usize,
}

fn compare_cuts(
    file: &Path,
    trials: usize,
    seed: u64,
    ordering: OrderingStrategy,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let problem = read_instance(file)?;
    let inst = &problem.instance;
    let z = inst.fragile_count();
    let feasible: Vec<_> = enumerate_feasible(&problem.constraints, z, DEFAULT_ENUMERATION_LIMIT)?.collect();
    if feasible.is_empty() {
        return Err(Error::Infeasible.into());
    }
    let points: Vec<_> = enumerate_feasible(&ConstraintSet::unconstrained(), z, DEFAULT_ENUMERATION_LIMIT)?.collect();
    let frs = points
        .iter()
        .map(|y| first_return_time(inst, y))
        .collect::<prcut::Result<Vec<_>>>()?;

    let mut iterations = [0usize; 3];
    for (slot, family) in iterations.iter_mut().zip(CutFamily::ALL) {
        let opts = SolveOptions::new(family).with_ordering(ordering);
        *slot = solve(inst, &problem.constraints, &opts)?.iterations;
    }
    let lower = min_unconstrained(inst)?;
    let instance_id = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut violations = 0usize;
    for trial in 0..trials {
        let ybar = &feasible[rng.gen_range(0..feasible.len())];
        let cuts: Vec<_> = CutFamily::ALL
            .iter()
            .map(|&f| separate(inst, ybar, f, ordering, lower).map(|(c, _)| c))
            .collect::<prcut::Result<_>>()?;
        for cut in &cuts {
            for (y, &fr) in points.iter().zip(&frs) {
                let rhs = cut.eval(y)?;
                if fr < rhs - 1e-8 {
                    violations += 1;
                    eprintln!(
                        "trial {trial}: {} cut at {ybar} exceeds fr({y}) = {fr} with {rhs}",
                        cut.family
                    );
                }
            }
        }
        let coeffs: Vec<_> = cuts.iter().map(|c| c.incumbent_form_coeffs()).collect();
        for edge_id in 0..z {
            rows.push((
                trial,
                CompareRow {
                    instance_id: &instance_id,
                    incumbent: ybar.to_string(),
                    edge_id,
                    coeff_lshaped: coeffs[0][edge_id],
                    coeff_new: coeffs[1][edge_id],
                    coeff_lifted: coeffs[2][edge_id],
                    family_iterations_lshaped: iterations[0],
                    family_iterations_new: iterations[1],
                    family_iterations_lifted: iterations[2],
                },
            ));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1.edge_id).cmp(&(b.0, b.1.edge_id)));

    let sink: Box<dyn std::io::Write> = match out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    writer.write_record([
        "instance_id",
        "incumbent",
        "edge_id",
        "coeff_lshaped",
        "coeff_new",
        "coeff_lifted",
        "family_iterations_lshaped",
        "family_iterations_new",
        "family_iterations_lifted",
    ])?;
    for (_, row) in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    if violations > 0 {
        eprintln!("{violations} validity violations");
        return Ok(ExitCode::from(EXIT_INPUT));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Validate { file } => {
            let p = read_instance(&file)?;
            println!(
                "valid: n = {}, target = {}, |E| = {}, |Z| = {}, damping = {}",
                p.instance.node_count(),
                p.instance.target(),
                p.instance.fixed_edges().len(),
                p.instance.fragile_count(),
                p.instance.damping()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            file,
            cuts,
            ordering,
            eps,
            max_iters,
            out,
        } => {
            let p = read_instance(&file)?;
            let mut opts = SolveOptions::new(cuts.into()).with_ordering(ordering.into());
            opts.eps = eps;
            opts.max_iters = max_iters;
            let report = solve(&p.instance, &p.constraints, &opts)?;
            print_report(&report);
            write_report(&report, out.as_deref())?;
            Ok(match report.status {
                SolveStatus::Optimal => ExitCode::SUCCESS,
                SolveStatus::IterLimit => ExitCode::from(EXIT_LIMIT),
            })
        }
        Command::Brute { file, limit, out } => {
            let p = read_instance(&file)?;
            let (best_y, best_value) = bf_min(&p.instance, &p.constraints, limit)?;
            let report = SolveReport {
                status: SolveStatus::Optimal,
                family: CutFamily::New,
                best_y: best_y.clone(),
                best_value,
                lower_bounds: vec![best_value],
                upper_bounds: vec![best_value],
                cuts_added: 0,
                gamma_calls_total: 0,
                iterations: 0,
                incumbents: Vec::new(),
            };
            print_report(&report);
            write_report(&report, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CompareCuts {
            file,
            trials,
            seed,
            ordering,
            out,
        } => compare_cuts(&file, trials, seed, ordering.into(), out.as_deref()),
        Command::Gen {
            n,
            density,
            fragile,
            constraint,
            damping,
            seed,
            out,
        } => {
            let spec = GeneratorSpec::new(n, density, fragile, seed)
                .with_constraints(parse_constraint(&constraint)?)
                .with_damping(damping);
            let problem = generate_random(&spec)?;
            write_instance(&out, &problem)?;
            println!(
                "wrote {}: n = {n}, |E| = {}, |Z| = {}",
                out.display(),
                problem.instance.fixed_edges().len(),
                problem.instance.fragile_count()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible) => EXIT_INFEASIBLE,
        Some(Error::TooLargeToEnumerate { .. } | Error::NonConvergence { .. } | Error::NoConvergence { .. }) => {
            EXIT_LIMIT
        }
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
