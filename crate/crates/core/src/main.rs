use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kcore_dist::{
    aggregate, check_bounds, coreness_exact, engine, gen_chain, gen_random, gen_worst_case,
    graph, oracle, parse_edge_list, run_one_to_many, run_one_to_one, stats, verify_locality,
    write_coreness, write_edge_list, ExecBackend, Graph, ParseMode, Policy,
    RunOptions, RunReport, Schedule,
};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_NO_CONVERGENCE: u8 = 4;

/// k-core decomposition toolkit: exact decomposition, protocol
/// simulation, graph generation, verification, and bound checking.
#[derive(Parser)]
#[command(name = "kcore", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute exact coreness with the peeling oracle and print stats.
    Decompose {
        graph: PathBuf,
        #[command(flatten)]
        input: InputOpts,
        /// Coreness file destination; defaults to <stem>.cores in the
        /// output directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a protocol simulation and emit a report.
    Simulate {
        graph: PathBuf,
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        sim: SimOpts,
        /// Report JSON destination (aggregate + last run); defaults to
        /// stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the per-round error trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the per-core completion CSV here.
        #[arg(long)]
        per_core: Option<PathBuf>,
    },
    /// Generate a graph and write it as an edge list.
    Gen {
        #[arg(value_enum)]
        family: Family,
        /// Node count.
        #[arg(short, long)]
        nodes: usize,
        /// Edge probability (random family only).
        #[arg(short, long)]
        prob: Option<f64>,
        /// RNG seed (random family only).
        #[arg(short, long)]
        seed: Option<u64>,
        /// Edge list destination; defaults to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a coreness file against the oracle and the locality property.
    Verify {
        graph: PathBuf,
        coreness: PathBuf,
        #[command(flatten)]
        input: InputOpts,
    },
    /// Print the bound report for a synchronous plain run.
    Bounds {
        graph: PathBuf,
        #[command(flatten)]
        input: InputOpts,
    },
}

#[derive(Args)]
struct InputOpts {
    /// Treat the edge list as directed and symmetrize it.
    #[arg(long)]
    directed: bool,
    /// Force at least this many nodes (pads isolated trailing ids).
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args)]
struct SimOpts {
    #[arg(long, value_enum, default_value_t = Mode::One2one)]
    mode: Mode,
    /// Host count (one2many only).
    #[arg(long)]
    hosts: Option<usize>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Broadcast)]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Sync)]
    schedule: ScheduleArg,
    /// Seed for the random schedule; repetitions derive seeds 1..reps.
    #[arg(long)]
    seed: Option<u64>,
    /// Send only to neighbors that can still be affected.
    #[arg(long)]
    optimized: bool,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Comma-separated rounds at which the per-core table is sampled.
    #[arg(long, value_delimiter = ',')]
    sample_rounds: Vec<usize>,
    #[arg(long, value_enum, default_value_t = BackendArg::default())]
    backend: BackendArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    One2one,
    One2many,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Broadcast,
    P2p,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Sync,
    Random,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum BackendArg {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[cfg_attr(feature = "parallel", default)]
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Worstcase,
    Chain,
    Random,
}

enum CliError {
    Usage(String),
    Io(String),
    Mismatch(String),
    NoConvergence,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            CliError::NoConvergence => EXIT_NO_CONVERGENCE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<graph::GraphError> for CliError {
    fn from(e: graph::GraphError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<oracle::OracleError> for CliError {
    fn from(e: oracle::OracleError) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) | CliError::Io(msg) | CliError::Mismatch(msg) => {
                    eprintln!("error: {msg}");
                }
                CliError::NoConvergence => {
                    eprintln!("error: did not converge within the round limit");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decompose {
            graph,
            input,
            output,
        } => cmd_decompose(&graph, &input, output),
        Command::Simulate {
            graph,
            input,
            sim,
            output,
            trace,
            per_core,
        } => cmd_simulate(&graph, &input, &sim, output, trace, per_core),
        Command::Gen {
            family,
            nodes,
            prob,
            seed,
            output,
        } => cmd_gen(family, nodes, prob, seed, output),
        Command::Verify {
            graph,
            coreness,
            input,
        } => cmd_verify(&graph, &coreness, &input),
        Command::Bounds { graph, input } => cmd_bounds(&graph, &input),
    }
}

fn load_graph(path: &Path, input: &InputOpts) -> Result<Graph, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mode = if input.directed {
        ParseMode::SymmetrizeDirected
    } else {
        ParseMode::Undirected
    };
    parse_edge_list(BufReader::new(file), mode, input.nodes)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn out_dir() -> PathBuf {
    std::env::var_os("KCORE_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Write via a temp file in the same directory, then rename into place.
fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let mut writer = BufWriter::new(File::create(&tmp)?);
    body(&mut writer)?;
    writer.flush()?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn cmd_decompose(path: &Path, input: &InputOpts, output: Option<PathBuf>) -> Result<(), CliError> {
    let g = load_graph(path, input)?;
    let coreness = coreness_exact(&g);
    let s = stats(&g, &coreness)?;
    let dest = output.unwrap_or_else(|| {
        let stem = path.file_stem().unwrap_or_default().to_owned();
        let mut name = stem;
        name.push(".cores");
        out_dir().join(name)
    });
    write_atomic(&dest, |w| Ok(write_coreness(&g, &coreness, w)?))?;
    println!(
        "{} {} {} {:.2} {}",
        g.node_count(),
        g.edge_count(),
        s.k_max,
        s.k_avg,
        s.min_degree_count
    );
    Ok(())
}

fn cmd_simulate(
    path: &Path,
    input: &InputOpts,
    sim: &SimOpts,
    output: Option<PathBuf>,
    trace: Option<PathBuf>,
    per_core: Option<PathBuf>,
) -> Result<(), CliError> {
    if sim.hosts.is_some() && sim.mode != Mode::One2many {
        return Err(CliError::Usage(
            "--hosts requires --mode one2many".into(),
        ));
    }
    if sim.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if matches!(sim.schedule, ScheduleArg::Sync) && sim.seed.is_some() {
        return Err(CliError::Usage(
            "--seed has no effect with --schedule sync".into(),
        ));
    }
    let g = load_graph(path, input)?;
    let oracle = coreness_exact(&g);
    let backend = match sim.backend {
        BackendArg::Sequential => ExecBackend::Sequential,
        #[cfg(feature = "parallel")]
        BackendArg::Parallel => ExecBackend::Parallel,
    };
    let policy = match sim.policy {
        PolicyArg::Broadcast => Policy::Broadcast,
        PolicyArg::P2p => Policy::PointToPoint,
    };
    let seeds: Vec<u64> = match (sim.schedule, sim.reps, sim.seed) {
        (ScheduleArg::Sync, ..) => vec![0; sim.reps],
        (ScheduleArg::Random, 1, Some(seed)) => vec![seed],
        (ScheduleArg::Random, reps, None) => (1..=reps as u64).collect(),
        (ScheduleArg::Random, _, Some(_)) => {
            return Err(CliError::Usage(
                "--seed conflicts with --reps > 1; seeds are derived as 1..reps".into(),
            ));
        }
    };
    let reports: Vec<RunReport> = seeds
        .iter()
        .map(|&seed| {
            let opts = RunOptions {
                schedule: match sim.schedule {
                    ScheduleArg::Sync => Schedule::Sync,
                    ScheduleArg::Random => Schedule::Random { seed },
                },
                optimized: sim.optimized,
                max_rounds: sim.max_rounds,
                sample_rounds: sim.sample_rounds.clone(),
                backend,
            };
            match sim.mode {
                Mode::One2one => run_one_to_one(&g, &opts, Some(&oracle)),
                Mode::One2many => {
                    let hosts = sim.hosts.unwrap_or(1);
                    run_one_to_many(&g, hosts, policy, &opts, Some(&oracle))
                }
            }
        })
        .collect();

    let agg = aggregate(&reports, g.node_count());
    let first = &reports[0];
    if let Some(path) = trace {
        write_atomic(&path, |w| Ok(engine::write_trace_csv(first, w)?))?;
    }
    if let Some(path) = per_core {
        write_atomic(&path, |w| Ok(engine::write_per_core_csv(first, w)?))?;
    }
    let doc = serde_json::json!({ "aggregate": agg, "run": first });
    let rendered = serde_json::to_string_pretty(&doc).expect("report serializes");
    match output {
        Some(path) => write_atomic(&path, |w| Ok(writeln!(w, "{rendered}")?))?,
        None => println!("{rendered}"),
    }
    if !agg.converged {
        return Err(CliError::NoConvergence);
    }
    Ok(())
}

fn cmd_gen(
    family: Family,
    nodes: usize,
    prob: Option<f64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    if !matches!(family, Family::Random) && (prob.is_some() || seed.is_some()) {
        return Err(CliError::Usage(
            "--prob/--seed only apply to the random family".into(),
        ));
    }
    let g = match family {
        Family::Worstcase => gen_worst_case(nodes),
        Family::Chain => gen_chain(nodes),
        Family::Random => {
            let prob = prob
                .ok_or_else(|| CliError::Usage("random family requires --prob".into()))?;
            let seed = seed
                .ok_or_else(|| CliError::Usage("random family requires --seed".into()))?;
            gen_random(nodes, prob, seed)
        }
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    match output {
        Some(path) => write_atomic(&path, |w| Ok(write_edge_list(&g, w, false)?))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_edge_list(&g, &mut lock, false)?;
        }
    }
    Ok(())
}

fn display_label(g: &Graph, u: kcore_dist::NodeId) -> String {
    g.label(u).map_or_else(|| u.to_string(), str::to_owned)
}

fn cmd_verify(graph_path: &Path, coreness_path: &Path, input: &InputOpts) -> Result<(), CliError> {
    let g = load_graph(graph_path, input)?;
    let file = File::open(coreness_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", coreness_path.display())))?;
    let claimed = oracle::read_coreness(BufReader::new(file))?;
    if claimed.len() != g.node_count() {
        return Err(CliError::Mismatch(format!(
            "coreness file covers {} nodes, graph has {}",
            claimed.len(),
            g.node_count()
        )));
    }
    let exact = coreness_exact(&g);
    let wrong: Vec<_> = g
        .nodes()
        .filter(|&u| claimed.get(u) != exact.get(u))
        .collect();
    if !wrong.is_empty() {
        let listing: Vec<String> = wrong
            .iter()
            .take(20)
            .map(|&u| {
                format!(
                    "{}: claimed {}, actual {}",
                    display_label(&g, u),
                    claimed.get(u),
                    exact.get(u)
                )
            })
            .collect();
        return Err(CliError::Mismatch(format!(
            "{} node(s) disagree with the oracle: {}",
            wrong.len(),
            listing.join("; ")
        )));
    }
    let violations = verify_locality(&g, &claimed)
        .map_err(|e| CliError::Io(e.to_string()))?;
    if !violations.is_empty() {
        let listing: Vec<String> =
            violations.iter().take(20).map(|&u| display_label(&g, u)).collect();
        return Err(CliError::Mismatch(format!(
            "locality violated at node(s): {}",
            listing.join(", ")
        )));
    }
    println!("ok: {} nodes verified", g.node_count());
    Ok(())
}

fn cmd_bounds(path: &Path, input: &InputOpts) -> Result<(), CliError> {
    let g = load_graph(path, input)?;
    let oracle = coreness_exact(&g);
    let report = run_one_to_one(&g, &RunOptions::default(), Some(&oracle));
    let bounds = check_bounds(&g, &oracle, &report);
    println!(
        "{}",
        serde_json::to_string_pretty(&bounds).expect("bounds serialize")
    );
    if !report.converged {
        return Err(CliError::NoConvergence);
    }
    Ok(())
}
