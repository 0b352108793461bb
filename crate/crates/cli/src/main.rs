use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use kstree::cnf::{assign_literals, cnf_stats, to_cnf, Assignment, CnfFormula, CnfStats};
use kstree::construction::{build_stage, make_params, Pipeline, StageParams};
use kstree::dimacs::write_dimacs_with_comments;
use kstree::hypergraph::{KsTreeSpec, Stage, TreeHypergraph};
use kstree::verify::{
    certify_unsat_structural, check_base_profile, check_base_start_counts, check_degrees_preserved,
    check_distinct_edges, check_equalized_profile, check_ks_tree, check_split_profile,
    solve_brute_force, solve_dpll, SolveStatus, VerificationReport, WitnessFinder,
    DEFAULT_DPLL_BUDGET,
};

/// Like `println!`, but a closed stdout (e.g. `| head`) is not a panic.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(io::stdout().lock(), $($arg)*);
    }};
}

const FORMAT_VERSION: u32 = 1;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "kstree",
    version,
    about = "Unsatisfiable k-CNF formulas with few occurrences per variable"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the construction and write DIMACS, DOT and statistics.
    Build(BuildArgs),
    /// Check every construction stage and the unsatisfiability certificate.
    Verify(VerifyArgs),
    /// Run a SAT oracle on the generated formula.
    Solve(SolveArgs),
    /// Find the clause falsified by an assignment.
    Witness(WitnessArgs),
    /// Print occurrence statistics of the generated formula as JSON.
    Stats(StatsArgs),
}

#[derive(Args)]
struct KArg {
    /// Clause width; a power of 2, at least 2.
    #[arg(long)]
    k: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Base,
    Split,
    Equalized,
    Final,
    Joined,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Stage {
        match s {
            StageArg::Base => Stage::Base,
            StageArg::Split => Stage::Split,
            StageArg::Equalized => Stage::Equalized,
            StageArg::Final => Stage::Final,
            StageArg::Joined => Stage::Joined,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    k: KArg,
    #[arg(long, value_enum, default_value = "joined")]
    stage: StageArg,
    /// DIMACS output (joined stage only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Graphviz output of the stage's tree.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Statistics JSON output.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    k: KArg,
    /// Report JSON output.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Brute,
    Dpll,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    k: KArg,
    #[arg(long, value_enum, default_value = "dpll")]
    engine: Engine,
    /// DPLL decision limit.
    #[arg(long, default_value_t = DEFAULT_DPLL_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    k: KArg,
    /// One 0/1 character per variable, variable 1 first.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    assignment: Option<String>,
    /// Draw a random assignment instead.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    k: KArg,
    /// Write to a file instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Mismatch(String),
}

impl From<kstree::Error> for Failure {
    fn from(e: kstree::Error) -> Self {
        match e {
            kstree::Error::UnsupportedK { .. }
            | kstree::Error::InvalidParameter(_)
            | kstree::Error::Budget(_) => Failure::Usage(e.to_string()),
            other => Failure::Mismatch(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path)
        .map(|f| BufWriter::with_capacity(1 << 16, f))
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> CmdResult {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn formula_for(p: &StageParams) -> Result<(TreeHypergraph, CnfFormula), Failure> {
    let hg = build_stage(p, Stage::Joined)?;
    let lits = assign_literals(&hg)?;
    let f = to_cnf(&hg, &lits)?;
    Ok((hg, f))
}

fn dimacs_comments(p: &StageParams) -> Vec<String> {
    vec![
        format!("kstree format version {FORMAT_VERSION}"),
        format!(
            "unsatisfiable {k}-CNF from a mirror-joined ({k}, {}) tree",
            2 * p.d,
            k = p.k
        ),
        format!("k = {} d = {}", p.k, p.d),
        format!("occurrence bound 4*2^k/k = {}", 4 * p.d),
    ]
}

#[derive(Serialize)]
struct StageStats {
    k: u32,
    d: u64,
    degree_bound: u64,
    #[serde(flatten)]
    summary: kstree::hypergraph::HypergraphSummary,
}

fn cmd_build(args: BuildArgs) -> CmdResult {
    let p = make_params(args.k.k)?;
    let stage: Stage = args.stage.into();
    let hg = build_stage(&p, stage)?;

    if let Some(path) = &args.dot {
        hg.tree().write_dot(create(path)?)?;
    }

    if stage != Stage::Joined {
        if args.out.is_some() {
            return Err(Failure::Usage("DIMACS output needs --stage joined".into()));
        }
        let summary = hg.summary();
        out!(
            "k={} stage={} nodes={} edges={} max_degree={} bound={}",
            p.k,
            stage,
            summary.nodes,
            summary.distinct_edges,
            summary.max_degree,
            p.degree_bound()
        );
        if let Some(path) = &args.stats {
            write_json(
                &StageStats {
                    k: p.k,
                    d: p.d,
                    degree_bound: p.degree_bound(),
                    summary,
                },
                path,
            )?;
        }
        return Ok(());
    }

    let lits = assign_literals(&hg)?;
    let f = to_cnf(&hg, &lits)?;
    let stats = cnf_stats(&f, p.k);
    if let Some(path) = &args.out {
        write_dimacs_with_comments(&f, &dimacs_comments(&p), create(path)?)?;
    }
    if let Some(path) = &args.stats {
        write_json(&stats, path)?;
    }
    out!(
        "k={} n={} m={} max_occurrences={} bound={} proof_bound={}",
        p.k,
        stats.num_vars,
        stats.num_clauses,
        stats.max_var_occurrences,
        stats.occurrence_bound,
        stats.proof_occurrence_bound
    );
    Ok(())
}

#[derive(Serialize)]
struct VerifySummary {
    k: u32,
    pass: bool,
    reports: Vec<VerificationReport>,
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let p = make_params(args.k.k)?;
    let pipe = Pipeline::run(p.k)?;
    let spec = KsTreeSpec::new(p.k, p.degree_bound())?;
    let reports = vec![
        check_base_profile(&pipe.base, &p)?,
        check_base_start_counts(&pipe.base, &p)?,
        check_split_profile(&pipe.split, &p)?,
        check_degrees_preserved(&pipe.base, &pipe.split),
        check_equalized_profile(&pipe.equalized, &p)?,
        check_degrees_preserved(&pipe.split, &pipe.equalized),
        check_equalized_profile(&pipe.last, &p)?,
        check_ks_tree(&pipe.last, &spec),
        check_distinct_edges(&pipe.last),
        check_ks_tree(&pipe.joined, &spec),
        certify_unsat_structural(&pipe.joined, &p)?,
    ];
    for r in &reports {
        out!(
            "{:<20} {:<10} {}",
            r.check,
            r.stage,
            if r.pass {
                "pass".to_string()
            } else {
                format!("FAIL ({} violations)", r.violation_count)
            }
        );
    }
    let summary = VerifySummary {
        k: p.k,
        pass: reports.iter().all(|r| r.pass),
        reports,
    };
    if let Some(path) = &args.json {
        write_json(&summary, path)?;
    }
    if summary.pass {
        out!("k={} all checks pass", p.k);
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("k={}: verification failed", p.k)))
    }
}

fn cmd_solve(args: SolveArgs) -> CmdResult {
    let p = make_params(args.k.k)?;
    let (_, f) = formula_for(&p)?;
    let r = match args.engine {
        Engine::Brute => solve_brute_force(&f)?,
        Engine::Dpll => solve_dpll(&f, args.budget),
    };
    out!(
        "{} decisions={} propagations={}",
        r.status,
        r.decisions,
        r.propagations
    );
    match r.status {
        SolveStatus::Unsat => Ok(()),
        SolveStatus::Sat => Err(Failure::Mismatch("generated formula reported SAT".into())),
        SolveStatus::BudgetExceeded => Err(Failure::Mismatch(format!(
            "decision budget {} exhausted",
            args.budget
        ))),
    }
}

fn cmd_witness(args: WitnessArgs) -> CmdResult {
    let p = make_params(args.k.k)?;
    let hg = build_stage(&p, Stage::Joined)?;
    let lits = assign_literals(&hg)?;
    let f = to_cnf(&hg, &lits)?;
    let alpha = match &args.assignment {
        Some(bits) => {
            let a = Assignment::from_bits(bits).map_err(|e| Failure::Usage(e.to_string()))?;
            if a.num_vars() != f.num_vars() {
                return Err(Failure::Usage(format!(
                    "assignment has {} bits, formula has {} variables",
                    a.num_vars(),
                    f.num_vars()
                )));
            }
            a
        }
        None => Assignment::random(f.num_vars(), &mut ChaCha8Rng::seed_from_u64(args.seed)),
    };
    let w = WitnessFinder::new(&hg, &lits, &f)?.find(&alpha)?;
    let branch: Vec<String> = w.branch.iter().map(|v| v.to_string()).collect();
    out!("clause {}", w.falsified_clause_index);
    out!("branch {}", branch.join(" "));
    let lits: Vec<String> = f
        .clause(w.falsified_clause_index)
        .iter()
        .map(|l| l.to_string())
        .collect();
    out!("literals {} (all false)", lits.join(" "));
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> CmdResult {
    let p = make_params(args.k.k)?;
    let (_, f) = formula_for(&p)?;
    let stats: CnfStats = cnf_stats(&f, p.k);
    match &args.json {
        Some(path) => write_json(&stats, path)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, &stats)?;
            lock.write_all(b"\n")?;
        }
    }
    Ok(())
}
