use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logarrange::bench::{self, BenchOptions, ErrorSummary, ERROR_TOLERANCE};
use logarrange::{
    baseline, beta, compare, cost, generators, solve, Arrangement, BaselineKind, Error, Graph,
    ParseOptions, Preset, RunReport, SolverParams,
};

#[derive(Parser)]
#[command(name = "logarrange", version, about = "Multiscale logarithmic arrangement of graphs")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an arrangement and write it with a run report.
    Solve(SolveArgs),
    /// Score a given permutation.
    Eval(EvalArgs),
    /// Run a benchmark suite manifest.
    Bench(BenchArgs),
    /// Compare density placement with exact placement on one graph.
    ErrorDistribution(ErrorArgs),
    /// Write a synthetic graph as an edge list.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Edge list file, or a generator spec such as `gen:grid:100x100`.
    #[arg(long, short)]
    input: String,
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    #[arg(long)]
    undirected: bool,
    /// Read a third column as the edge weight.
    #[arg(long)]
    weighted: bool,
    /// File of `id volume` lines; unlisted nodes get volume 1.
    #[arg(long)]
    volumes: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<Graph, Error> {
        let g = if generators::is_spec(&self.input) {
            generators::from_spec(&self.input)?
        } else {
            let file = File::open(&self.input).map_err(|e| io_context(e, &self.input))?;
            Graph::parse_edge_list(
                BufReader::new(file),
                ParseOptions {
                    weighted: self.weighted,
                    directed: self.directed,
                },
            )?
        };
        match &self.volumes {
            Some(path) => {
                let file = File::open(path).map_err(|e| io_context(e, &path.display().to_string()))?;
                let v = g.read_volumes(BufReader::new(file))?;
                g.with_volumes(v)
            }
            None => Ok(g),
        }
    }

    fn name(&self) -> String {
        Path::new(&self.input)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.input.clone())
    }
}

fn io_context(e: io::Error, path: &str) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{path}: {e}")))
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Default,
    Fast,
    Slow,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, value_enum, default_value = "default")]
    preset: PresetArg,
    /// Coupling share a fine node needs towards the seeds.
    #[arg(long)]
    theta1: Option<f64>,
    /// Weight share a fine node needs towards the seeds.
    #[arg(long)]
    theta2: Option<f64>,
    /// JOR damping factor.
    #[arg(long)]
    omega: Option<f64>,
    /// Number of test vectors.
    #[arg(long = "R")]
    vectors: Option<usize>,
    #[arg(long)]
    jor_iters: Option<usize>,
    /// Interpolation order (seed neighbors per fine node).
    #[arg(long)]
    order: Option<usize>,
    /// Node-by-node window half-width; 0 disables the stage.
    #[arg(long)]
    nn_k: Option<usize>,
    /// Maximum sweeps of each relaxation.
    #[arg(long)]
    sweeps: Option<usize>,
    /// Node count at which coarsening stops.
    #[arg(long)]
    coarsest: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ParamArgs {
    fn params(&self) -> Result<SolverParams<f64>, Error> {
        let preset = match self.preset {
            PresetArg::Default => Preset::Default,
            PresetArg::Fast => Preset::Fast,
            PresetArg::Slow => Preset::Slow,
        };
        let mut p = SolverParams::preset(preset);
        p.seed = self.seed;
        if let Some(x) = self.theta1 {
            p.coarsening.theta_coupling = x;
        }
        if let Some(x) = self.theta2 {
            p.coarsening.theta_weight = x;
        }
        if let Some(x) = self.omega {
            p.couplings.omega = x;
        }
        if let Some(x) = self.vectors {
            p.couplings.vectors = x;
        }
        if let Some(x) = self.jor_iters {
            p.couplings.iterations = x;
        }
        if let Some(x) = self.order {
            p.coarsening.order = x;
        }
        if let Some(x) = self.nn_k {
            p.refine.nn_k = x;
        }
        if let Some(x) = self.sweeps {
            p.refine.compat_sweeps = x;
            p.refine.gs_sweeps = x;
        }
        if let Some(x) = self.coarsest {
            p.coarsest_size = x;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Where to write the permutation (one node id per line, in order).
    #[arg(long)]
    out_perm: Option<PathBuf>,
    /// Where to write the report; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    report_format: ReportFormat,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Permutation file to score.
    #[arg(long)]
    perm: PathBuf,
    /// Also report the natural and random baselines and the ratio.
    #[arg(long)]
    compare: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Manifest with `name path directed beta-lo beta-hi` lines.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    /// Entries run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Nodes sampled per graph for the placement error experiment.
    #[arg(long, default_value_t = 0)]
    errors: usize,
    /// Write the sorted placement error curve here.
    #[arg(long)]
    error_curve: Option<PathBuf>,
    /// Write the suite report as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct ErrorArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Write the sorted error curve here.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec, e.g. `gen:pa:10000:3:1`.
    spec: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status for expectations that did not hold.
const EXIT_EXPECTATION: u8 = 1;
/// Exit status for bad flags or inputs.
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::ErrorDistribution(a) => cmd_errors(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_EXPECTATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_context(e, &path.display().to_string()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<bool, Error> {
    let g = a.input.load()?;
    let params = a.params.params()?;
    let sol = solve(&g, &params)?;
    if let Some(path) = &a.out_perm {
        let mut w = create(path)?;
        sol.arrangement.write_permutation(g.labels(), &mut w)?;
        w.flush()?;
    }
    let report = RunReport::new(&a.input.name(), &g, &params, &sol);
    let text = match a.report_format {
        ReportFormat::Text => report.to_key_values(),
        ReportFormat::Json => report.to_json() + "\n",
    };
    emit(a.report.as_deref(), &text)?;
    Ok(true)
}

fn cmd_eval(a: EvalArgs) -> Result<bool, Error> {
    let g = a.input.load()?;
    let file = File::open(&a.perm).map_err(|e| io_context(e, &a.perm.display().to_string()))?;
    let arr = Arrangement::read_permutation(BufReader::new(file), g.labels(), g.volumes())?;
    let mut out = String::new();
    out += &format!("nodes={}\nedges={}\n", g.n(), g.edge_count());
    out += &format!("cost={}\n", cost(&g, &arr)?);
    match beta(&g, &arr) {
        Ok(b) => out += &format!("beta={b}\n"),
        Err(_) => out += "beta=undefined\n",
    }
    if a.compare {
        let natural = baseline(&g, BaselineKind::Natural);
        let random = baseline(&g, BaselineKind::Random(a.seed));
        let c = compare(&g, &[("input", &arr), ("natural", &natural), ("random", &random)])?;
        for e in &c.entries[1..] {
            out += &format!("cost_{}={}\n", e.name, e.cost);
        }
        match c.ratio {
            Some(r) => out += &format!("ratio={r}\n"),
            None => out += "ratio=undefined\n",
        }
    }
    emit(None, &out)?;
    Ok(true)
}

fn cmd_bench(a: BenchArgs) -> Result<bool, Error> {
    let file = File::open(&a.suite).map_err(|e| io_context(e, &a.suite.display().to_string()))?;
    let entries = bench::parse_manifest(BufReader::new(file))?;
    let opts = BenchOptions {
        params: a.params.params()?,
        repeat: a.repeat,
        jobs: a.jobs.max(1),
        base_dir: a.suite.parent().map(Path::to_path_buf),
        error_samples: a.errors,
    };
    let report = bench::run_suite(&entries, &opts)?;
    emit(None, &report.to_text())?;
    if let Some(path) = &a.json {
        let json = serde_json::to_string_pretty(&report).expect("suite report serializes");
        emit(Some(path), &(json + "\n"))?;
    }
    if let (Some(path), Some(p)) = (&a.error_curve, &report.placement) {
        write_curve(path, p)?;
    }
    let errors_ok = report.placement.as_ref().is_none_or(|p| p.negative == 0);
    Ok(report.all_passed() && errors_ok)
}

fn cmd_errors(a: ErrorArgs) -> Result<bool, Error> {
    let g = a.input.load()?;
    let params = a.params.params()?;
    let sol = solve(&g, &params)?;
    let work = g.un().without_zero_weights();
    let errs = bench::placement_errors(&work, &sol.arrangement, a.samples, params.seed);
    let summary = ErrorSummary::new(&errs, ERROR_TOLERANCE);
    emit(None, &summary.to_text())?;
    if let Some(path) = &a.curve {
        write_curve(path, &summary)?;
    }
    Ok(summary.negative == 0)
}

fn write_curve(path: &Path, s: &ErrorSummary) -> Result<(), Error> {
    let mut w = create(path)?;
    for e in &s.curve {
        writeln!(w, "{e}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<bool, Error> {
    let g: Graph = generators::from_spec(&a.spec)?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            g.write_edge_list(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf)?;
            io::stdout().write_all(&buf)?;
        }
    }
    Ok(true)
}
