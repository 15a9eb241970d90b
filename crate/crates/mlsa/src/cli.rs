//! Command-line front end: solver pipeline, exact oracles, reductions,
//! instance generation, verification, and the benchmark harness.
//!
//! Exit codes: 0 ok, 1 infeasible or check failed, 2 I/O, 3 parse,
//! 4 budget exhausted.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::digraph::{
    self, count_leaves, parse_arb, parse_dag, validate_instance, verify_arborescence, ArbError,
    Digraph,
};
use crate::generators::{self, GenError};
use crate::local_search::{SearchError, SearchOptions, SearchStats, SeedOrder};
use crate::oracles::{self, OracleError};
use crate::packing::{
    self, family_from_json, packing_from_json, packing_to_json, JsonError, Packing, PackingError,
    SetFamily,
};
use crate::reduction::{self, ReductionError, SolveError};

#[derive(Debug)]
enum CliError {
    Io(String),
    Parse(String),
    Check(String),
    Budget(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Io(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Parse(m) | CliError::Check(m) | CliError::Budget(m) => m,
        }
    }
}

impl From<digraph::ParseError> for CliError {
    fn from(e: digraph::ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<JsonError> for CliError {
    fn from(e: JsonError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Budget(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::GenerationTimeout { .. } => CliError::Budget(e.to_string()),
            GenError::UnsupportedParams { .. } => CliError::Parse(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Check(e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        CliError::Check(e.to_string())
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        CliError::Check(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_dag(path: &Path) -> Result<Digraph, CliError> {
    let g = parse_dag(&read_file(path)?)?;
    validate_instance(&g).map_err(|e| CliError::Check(format!("invalid instance: {e}")))?;
    Ok(g)
}

#[derive(Parser)]
#[command(
    name = "mlsa",
    about = "Maximum-leaf spanning arborescence toolkit for rooted DAGs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum SeedOrderArg {
    #[default]
    Sorted,
    Input,
}

impl From<SeedOrderArg> for SeedOrder {
    fn from(v: SeedOrderArg) -> Self {
        match v {
            SeedOrderArg::Sorted => SeedOrder::Sorted,
            SeedOrderArg::Input => SeedOrder::Input,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a rooted-DAG instance and report the leaf count.
    Solve(SolveArgs),
    /// Run an exact oracle on a .dag or family .json instance.
    Exact(ExactArgs),
    /// Emit the out-neighborhood set family of a .dag instance as JSON.
    Reduce(ReduceArgs),
    /// Turn a packing of a graph's family back into a spanning arborescence.
    Lift(LiftArgs),
    /// Generate a random rooted DAG.
    GenDag(GenDagArgs),
    /// Generate a planted worst-case packing instance.
    GenLowerbound(GenLowerboundArgs),
    /// Verify an arborescence against a graph, or a packing against a family.
    Verify(VerifyArgs),
    /// Exhaustively check a packing for local optimality.
    CheckLocalOpt(CheckLocalOptArgs),
    /// Run the solver over a directory or generated batch and emit CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (.dag)
    dag: PathBuf,
    /// Maximum improvement size
    #[arg(long, default_value_t = 10)]
    t: usize,
    /// Candidate iteration order
    #[arg(long, value_enum, default_value_t = SeedOrderArg::Sorted)]
    seed_order: SeedOrderArg,
    /// Exhaustive improvement search (small instances only)
    #[arg(long)]
    exhaustive: bool,
    /// Write the arborescence here (.arb)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-verify the produced arborescence
    #[arg(long)]
    verify: bool,
    /// Write search statistics JSON here instead of stderr
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

fn stats_json(split_weight: usize, residual_weight: usize, s: &SearchStats) -> String {
    serde_json::json!({
        "split_weight": split_weight,
        "residual_weight": residual_weight,
        "candidates": s.candidate_count,
        "iterations": s.iterations,
        "weight_increases": s.weight_increases,
        "plateau_moves": s.plateau_moves,
        "max_plateau_run": s.max_plateau_run,
        "candidates_examined": s.candidates_examined,
    })
    .to_string()
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let g = load_dag(&args.dag)?;
    let opts = SearchOptions {
        t: args.t,
        seed_order: args.seed_order.into(),
        exhaustive: args.exhaustive,
    };
    let (tree, stats) = reduction::solve_mlsa(&g, &opts)?;
    if args.verify {
        verify_arborescence(&g, &tree)
            .map_err(|e| CliError::Check(format!("verification failed: {e}")))?;
        println!("leaves: {}, verified", count_leaves(&tree));
    } else {
        println!("leaves: {}", count_leaves(&tree));
    }
    if let Some(out) = &args.out {
        write_file(out, &digraph::write_arb(&tree))?;
    }
    let stats = stats_json(stats.split_weight, stats.residual_weight, &stats.search);
    match &args.stats_out {
        Some(path) => write_file(path, &stats)?,
        None => eprintln!("{stats}"),
    }
    Ok(())
}

#[derive(Args)]
struct ExactArgs {
    /// Rooted-DAG instance (.dag)
    #[arg(long, conflicts_with = "family")]
    dag: Option<PathBuf>,
    /// Set-family instance (.json)
    #[arg(long)]
    family: Option<PathBuf>,
    /// Vertex budget (graphs) or candidate budget (families)
    #[arg(long)]
    budget: Option<usize>,
    /// Write the witness here (.arb or packing .json)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_exact(args: ExactArgs) -> Result<(), CliError> {
    match (&args.dag, &args.family) {
        (Some(dag), None) => {
            let g = load_dag(dag)?;
            let budget = args.budget.unwrap_or(oracles::DEFAULT_MLSA_BUDGET);
            let (opt, witness) = oracles::exact_mlsa(&g, budget)?;
            println!("leaves: {opt}");
            if let Some(out) = &args.out {
                write_file(out, &digraph::write_arb(&witness))?;
            }
        }
        (None, Some(family)) => {
            let f = family_from_json(&read_file(family)?)?;
            let budget = args.budget.unwrap_or(oracles::DEFAULT_PACKING_BUDGET);
            let (opt, witness) = oracles::exact_packing(&f, budget)?;
            println!("weight: {opt}");
            if let Some(out) = &args.out {
                write_file(out, &packing_to_json(&witness))?;
            }
        }
        _ => {
            return Err(CliError::Parse(
                "pass exactly one of --dag or --family".into(),
            ))
        }
    }
    Ok(())
}

#[derive(Args)]
struct ReduceArgs {
    /// Instance file (.dag)
    dag: PathBuf,
    /// Output family JSON (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_reduce(args: ReduceArgs) -> Result<(), CliError> {
    let g = load_dag(&args.dag)?;
    let family = reduction::family_from_dag(&g);
    let text = packing::family_to_json(&family);
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Args)]
struct LiftArgs {
    /// Instance file (.dag)
    #[arg(long)]
    dag: PathBuf,
    /// Packing over the graph's family (.json)
    #[arg(long)]
    packing: PathBuf,
    /// Output arborescence (.arb; stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_lift(args: LiftArgs) -> Result<(), CliError> {
    let g = load_dag(&args.dag)?;
    let p = packing_from_json(&read_file(&args.packing)?, g.n())?;
    let tree = reduction::packing_to_arborescence(&g, &p)?;
    let text = digraph::write_arb(&tree);
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            println!("leaves: {}", count_leaves(&tree));
        }
        None => {
            print!("{text}");
            eprintln!("leaves: {}", count_leaves(&tree));
        }
    }
    Ok(())
}

#[derive(Args)]
struct GenDagArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_gen_dag(args: GenDagArgs) -> Result<(), CliError> {
    if args.n < 1 || args.density <= 0.0 || args.density > 1.0 {
        return Err(CliError::Parse("need n >= 1 and density in (0, 1]".into()));
    }
    let g = generators::gen_random_dag(args.n, args.density, args.seed);
    write_file(&args.out, &digraph::write_dag(&g))?;
    println!("n={} m={} root={}", g.n(), g.arcs().len(), g.root());
    Ok(())
}

#[derive(Args)]
struct GenLowerboundArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_gen_lowerbound(args: GenLowerboundArgs) -> Result<(), CliError> {
    let inst = generators::gen_lower_bound(args.k, args.t, args.seed)?;
    write_file(&args.out, &generators::lower_bound_to_json(&inst))?;
    println!(
        "k={} t={} girth={} ground={} w(A)={} w(B)={} certified={}",
        inst.k,
        inst.t,
        inst.girth,
        inst.family.ground_size(),
        inst.a_solution.weight(),
        inst.b_solution.weight(),
        inst.certified
    );
    Ok(())
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, requires = "arb")]
    dag: Option<PathBuf>,
    #[arg(long)]
    arb: Option<PathBuf>,
    #[arg(long, requires = "packing")]
    family: Option<PathBuf>,
    #[arg(long)]
    packing: Option<PathBuf>,
}

fn arb_failure(e: &ArbError) -> String {
    let condition = match e {
        ArbError::RootHasParent | ArbError::MissingParent(_) => "partition condition violated",
        ArbError::NotSubgraph(..) => "subgraph condition violated",
        ArbError::Unreachable(_) => "reachability condition violated",
        _ => "arborescence shape violated",
    };
    let name = match e {
        ArbError::WrongLength { .. } => "WrongLength",
        ArbError::ParentOutOfRange { .. } => "ParentOutOfRange",
        ArbError::NoRoot => "NoRoot",
        ArbError::RootHasParent => "RootHasParent",
        ArbError::MissingParent(_) => "MissingParent",
        ArbError::NotSubgraph(..) => "NotSubgraph",
        ArbError::Unreachable(_) => "Unreachable",
    };
    format!("{condition} ({name}: {e})")
}

fn packing_failure(e: &PackingError) -> String {
    let condition = match e {
        PackingError::Overlap(_) => "disjointness violated",
        PackingError::NotInFamily(_) => "membership violated",
        PackingError::WeightMismatch { .. } => "weight check failed",
        _ => "packing shape violated",
    };
    format!("{condition} ({e})")
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    match (&args.dag, &args.arb, &args.family, &args.packing) {
        (Some(dag), Some(arb), None, None) => {
            let g = load_dag(dag)?;
            let t = parse_arb(&read_file(arb)?)?;
            verify_arborescence(&g, &t).map_err(|e| CliError::Check(arb_failure(&e)))?;
            println!("ok: spanning arborescence with {} leaves", count_leaves(&t));
        }
        (None, None, Some(family), Some(packing)) => {
            let f = family_from_json(&read_file(family)?)?;
            let text = read_file(packing)?;
            let p = match packing_from_json(&text, f.ground_size()) {
                Ok(p) => p,
                Err(JsonError::Packing(e)) => return Err(CliError::Check(packing_failure(&e))),
                Err(e) => return Err(e.into()),
            };
            p.feasible_for(&f)
                .map_err(|e| CliError::Check(packing_failure(&e)))?;
            println!("ok: feasible packing of weight {}", p.weight());
        }
        _ => {
            return Err(CliError::Parse(
                "pass --dag with --arb, or --family with --packing".into(),
            ))
        }
    }
    Ok(())
}

#[derive(Args)]
struct CheckLocalOptArgs {
    /// Family JSON (a planted-instance file also works)
    #[arg(long)]
    family: PathBuf,
    /// Packing JSON path, or `A`/`B` for a planted instance's solutions
    #[arg(long)]
    packing: String,
    #[arg(long, default_value_t = 10)]
    t: usize,
    /// Enumeration node budget
    #[arg(long, default_value_t = oracles::DEFAULT_CHECK_BUDGET)]
    budget: u64,
}

/// `A`/`B` select the embedded solutions of a planted-instance file;
/// anything else is a packing JSON path.
fn resolve_packing(selector: &str, family_text: &str, ground: usize) -> Result<Packing, CliError> {
    match selector {
        "A" | "a" | "B" | "b" => {
            let (a, b) = generators::planted_solutions_from_json(family_text)
                .map_err(|e| CliError::Parse(format!("no planted solutions: {e}")))?;
            Ok(if selector.eq_ignore_ascii_case("a") {
                a
            } else {
                b
            })
        }
        path => Ok(packing_from_json(&read_file(Path::new(path))?, ground)?),
    }
}

fn cmd_check_local_opt(args: CheckLocalOptArgs) -> Result<(), CliError> {
    let family_text = read_file(&args.family)?;
    let f = family_from_json(&family_text)?;
    let p = resolve_packing(&args.packing, &family_text, f.ground_size())?;
    p.feasible_for(&f)
        .map_err(|e| CliError::Check(packing_failure(&e)))?;
    match oracles::exhaustive_improvement(&f, &p, args.t, args.budget)? {
        None => {
            println!("locally optimal for improvements of size <= {}", args.t);
            Ok(())
        }
        Some(imp) => {
            let add: Vec<Vec<usize>> = imp.add.iter().map(|s| s.as_slice().to_vec()).collect();
            Err(CliError::Check(format!(
                "improvable: add {:?} removes {:?} (delta weight {}, delta two {})",
                add, imp.remove, imp.delta_weight, imp.delta_two
            )))
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .dag / family .json instances
    #[arg(long, conflicts_with_all = ["seeds"])]
    dir: Option<PathBuf>,
    /// Generate this many random DAGs instead of reading a directory
    #[arg(long)]
    seeds: Option<u64>,
    /// Max vertex count for generated instances
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Comma-separated improvement sizes, one CSV row per instance and size
    #[arg(long, default_value = "10")]
    t: String,
    /// Oracle budget: vertices for graphs, candidates for families
    #[arg(long)]
    budget: Option<usize>,
    /// Start the search from this packing: a JSON path, or `A`/`B` for
    /// planted-instance files (family instances only)
    #[arg(long)]
    force_start: Option<String>,
    /// Output CSV (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub const BENCH_CSV_HEADER: &str = "instance,n,m,t,alg_leaves,opt_leaves,ratio,iterations,ms";

enum BenchInstance {
    Dag(String, Digraph),
    Family {
        name: String,
        text: String,
        family: SetFamily,
    },
}

fn collect_instances(args: &BenchArgs) -> Result<Vec<BenchInstance>, CliError> {
    let mut out = Vec::new();
    if let Some(dir) = &args.dir {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("dag") | Some("json")
                )
            })
            .collect();
        paths.sort();
        for path in paths {
            let name = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match path.extension().and_then(|e| e.to_str()) {
                Some("dag") => out.push(BenchInstance::Dag(name, load_dag(&path)?)),
                _ => {
                    let text = read_file(&path)?;
                    let family = family_from_json(&text)?;
                    out.push(BenchInstance::Family { name, text, family });
                }
            }
        }
    } else if let Some(seeds) = args.seeds {
        use rand::Rng;
        use rand::SeedableRng;
        if args.n < 2 {
            return Err(CliError::Parse(
                "need --n >= 2 for generated instances".into(),
            ));
        }
        for seed in 0..seeds {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=args.n);
            let g = generators::gen_random_dag(n, args.density, seed);
            out.push(BenchInstance::Dag(format!("seed{seed}"), g));
        }
    } else {
        return Err(CliError::Parse("pass --dir or --seeds".into()));
    }
    Ok(out)
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let t_values: Vec<usize> = args
        .t
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Parse(format!("bad t value `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    let instances = collect_instances(&args)?;

    let mut csv = String::new();
    csv.push_str(BENCH_CSV_HEADER);
    csv.push('\n');
    let mut max_ratio: Option<f64> = None;
    for inst in &instances {
        for &t in &t_values {
            let opts = SearchOptions {
                t,
                ..Default::default()
            };
            let row = match inst {
                BenchInstance::Dag(name, g) => bench_dag_row(name, g, &opts, &args),
                BenchInstance::Family { name, text, family } => {
                    bench_family_row(name, text, family, &opts, &args)
                }
            };
            match row {
                Ok((line, ratio)) => {
                    if let Some(r) = ratio {
                        max_ratio = Some(max_ratio.map_or(r, |m: f64| m.max(r)));
                    }
                    csv.push_str(&line);
                    csv.push('\n');
                }
                Err(e) => {
                    eprintln!("instance failed (t={t}): {}", e.message());
                    let name = match inst {
                        BenchInstance::Dag(name, _) => name,
                        BenchInstance::Family { name, .. } => name,
                    };
                    let _ = writeln!(csv, "{name},,,{t},,,,,");
                }
            }
        }
    }
    match max_ratio {
        Some(r) => {
            let _ = writeln!(csv, "summary,,,,,,{r:.6},,");
        }
        None => {
            let _ = writeln!(csv, "summary,,,,,,,,");
        }
    }
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn ratio_of(opt_minus_1: usize, alg_minus_1: usize) -> f64 {
    if alg_minus_1 == 0 {
        1.0
    } else {
        opt_minus_1 as f64 / alg_minus_1 as f64
    }
}

fn bench_dag_row(
    name: &str,
    g: &Digraph,
    opts: &SearchOptions,
    args: &BenchArgs,
) -> Result<(String, Option<f64>), CliError> {
    if args.force_start.is_some() {
        eprintln!("note: --force-start ignored for graph instance {name}");
    }
    let started = Instant::now();
    let (tree, stats) = reduction::solve_mlsa(g, opts)?;
    let ms = started.elapsed().as_millis();
    let alg = count_leaves(&tree);
    let budget = args.budget.unwrap_or(oracles::DEFAULT_MLSA_BUDGET);
    let opt = match oracles::exact_mlsa(g, budget) {
        Ok((opt, _)) => Some(opt),
        Err(OracleError::BudgetExceeded { .. }) => None,
    };
    let (opt_col, ratio_col, ratio) = match opt {
        Some(o) => {
            let r = ratio_of(o - 1, alg - 1);
            (o.to_string(), format!("{r:.6}"), Some(r))
        }
        None => (String::new(), String::new(), None),
    };
    let line = format!(
        "{name},{},{},{},{alg},{opt_col},{ratio_col},{},{ms}",
        g.n(),
        g.arcs().len(),
        opts.t,
        stats.search.iterations
    );
    Ok((line, ratio))
}

fn bench_family_row(
    name: &str,
    text: &str,
    f: &SetFamily,
    opts: &SearchOptions,
    args: &BenchArgs,
) -> Result<(String, Option<f64>), CliError> {
    let start = match &args.force_start {
        Some(sel) => Some(resolve_packing(sel, text, f.ground_size())?),
        None => None,
    };
    let started = Instant::now();
    let (packed, stats) = match start {
        Some(p) => crate::local_search::run_from(f, p, opts)?,
        None => crate::local_search::run_with(f, opts)?,
    };
    let ms = started.elapsed().as_millis();
    // leaf-equivalent columns: a weight-w packing lifts to w+1 leaves
    let alg = packed.weight() + 1;
    let budget = args.budget.unwrap_or(oracles::DEFAULT_PACKING_BUDGET);
    let opt = match oracles::exact_packing(f, budget) {
        Ok((w, _)) => Some(w + 1),
        Err(OracleError::BudgetExceeded { .. }) => None,
    };
    let (opt_col, ratio_col, ratio) = match opt {
        Some(o) => {
            let r = ratio_of(o - 1, alg - 1);
            (o.to_string(), format!("{r:.6}"), Some(r))
        }
        None => (String::new(), String::new(), None),
    };
    let line = format!(
        "{name},{},{},{},{alg},{opt_col},{ratio_col},{},{ms}",
        f.ground_size(),
        f.maximal_sets().len(),
        opts.t,
        stats.iterations
    );
    Ok((line, ratio))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Exact(args) => cmd_exact(args),
        Cmd::Reduce(args) => cmd_reduce(args),
        Cmd::Lift(args) => cmd_lift(args),
        Cmd::GenDag(args) => cmd_gen_dag(args),
        Cmd::GenLowerbound(args) => cmd_gen_lowerbound(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::CheckLocalOpt(args) => cmd_check_local_opt(args),
        Cmd::Bench(args) => cmd_bench(args),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
