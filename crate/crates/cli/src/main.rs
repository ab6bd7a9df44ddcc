//! `renyi`: simulate Rényi-model samples, estimate tail indices, evaluate
//! large-deviation rates and regenerate the reference figures.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use renyi_tail::estimators::{
    ci_hill_self, ci_quantile, ci_spacing, h_minimizer, hill, log_scale, ml_uniform,
    quantile_estimator_log_scale, spacing_sigma,
};
use renyi_tail::experiments::{
    self, log_spaced_grid, Cell, ExperimentConfig, ExperimentKind, ReportTable, Runner,
    DEFAULT_SEED,
};
use renyi_tail::large_deviations::{gamma_family_rates, iid_comparison_rates, rate_function};
use renyi_tail::likelihood::{family_log_likelihood, ml_fit, ModelFamily};
use renyi_tail::renyi::{scaled_log_spacings, simulate};
use renyi_tail::{DistributionSpec, EstimateWithCI, HeavySample, SeedSpec, StreamRng};

const SEED_ENV: &str = "RENYI_SEED";

const AFTER_HELP: &str = "\
Output is a table in CSV (default) or JSON. CSV starts with '# key: value'
metadata lines (invocation, master_seed, config and, for figures,
wall_time_secs) followed by a header row. JSON is {\"meta\": {...}, \"columns\": [...], \"rows\": [{...}]}.
Non-finite values and unavailable entries are written as tags such as
\"inf\" or \"insufficient_events\". Column sets per subcommand are listed in
docs/formats.md.

Distribution specs: exp:gamma=0.5, unif:gamma=0.5, bern:gamma=0.5,
gamma:r=2,gamma=0.5, pareto:gamma=0.5,c=1, hall.

The RENYI_SEED environment variable overrides --seed.

Exit status: 0 on success, 2 on usage or domain errors, 1 on runtime errors
(unreadable or unsorted input, data violating the model).";

#[derive(Parser, Debug)]
#[command(name = "renyi", version, about, after_help = AFTER_HELP)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a Rényi-model sample: columns index, W, scaled_log_spacing.
    Simulate(SimulateArgs),
    /// Estimate γ from a sorted column of positive data.
    Estimate(EstimateArgs),
    /// Maximum-likelihood fit of a spacing family to the top k observations.
    Fit(FitArgs),
    /// Evaluate Cramér rate functions.
    Rate(RateArgs),
    /// Run a figure or distributional check at desk scale.
    Figure(FigureArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    spec: DistributionSpec,
    #[arg(long)]
    n: usize,
    /// Scale C.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EstimateMethod {
    Hill,
    Quantile,
    MlUniform,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Data file, one value per line; stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Scale C (lower bound of the data).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Sort the data instead of rejecting unsorted input.
    #[arg(long)]
    allow_unsorted: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long, value_enum, default_value_t = EstimateMethod::Hill)]
    method: EstimateMethod,
    /// Number of top order statistics (default n).
    #[arg(long)]
    k: Option<usize>,
    /// Quantile level for the quantile method (default s₀ ≈ 0.797).
    #[arg(long)]
    s: Option<f64>,
    /// Confidence intervals have level 1 − eps.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// exponential, uniform or gamma:r=<r>.
    #[arg(long)]
    family: ModelFamily,
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RateFamily {
    /// Gamma spacings: rates of P(γ̂ ≥ (1+c)γ) and P(γ̂ ≤ (1−c)γ).
    Gamma,
    /// Classical iid Pareto comparison rates.
    Iid,
}

#[derive(Args, Debug)]
struct RateArgs {
    #[arg(long, value_enum, conflicts_with_all = ["spec", "z"], requires = "c")]
    family: Option<RateFamily>,
    /// Shape of the gamma family.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Relative deviation.
    #[arg(long)]
    c: Option<f64>,
    /// Evaluate I(z) for this spacing law.
    #[arg(long, requires = "z")]
    spec: Option<DistributionSpec>,
    #[arg(long)]
    z: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FigureId {
    /// Variance curve of the quantile estimator.
    #[value(name = "1")]
    One,
    /// Hill plots.
    #[value(name = "2")]
    Two,
    /// Coverage of the confidence intervals.
    #[value(name = "3")]
    Three,
    /// Convergence to exponential limits.
    #[value(name = "t1")]
    T1,
    /// Exact moment recursions against Monte Carlo.
    #[value(name = "t2")]
    T2,
    /// Large-deviation rates.
    #[value(name = "ld")]
    Ld,
}

impl FigureId {
    fn kind(self) -> ExperimentKind {
        match self {
            FigureId::One => ExperimentKind::VarianceCurve,
            FigureId::Two => ExperimentKind::HillPlot,
            FigureId::Three => ExperimentKind::Coverage,
            FigureId::T1 => ExperimentKind::Theorem1Ks,
            FigureId::T2 => ExperimentKind::Theorem2Moments,
            FigureId::Ld => ExperimentKind::LdCheck,
        }
    }
}

#[derive(Args, Debug)]
struct FigureArgs {
    #[arg(long)]
    id: FigureId,
    /// Laws to include (repeatable); defaults depend on the figure.
    #[arg(long = "spec")]
    specs: Vec<DistributionSpec>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<u64>,
    /// Seeds averaged in the Hill plot.
    #[arg(long, conflicts_with = "reps")]
    avg_seeds: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',')]
    k_grid: Vec<usize>,
    /// Comma-separated sample sizes for t1 and t2.
    #[arg(long, value_delimiter = ',')]
    n_grid: Vec<usize>,
    /// Comma-separated s values for figure 1.
    #[arg(long, value_delimiter = ',')]
    s_grid: Vec<f64>,
    /// Relative deviation c of the threshold (1 + c)γ for ld.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<renyi_tail::Error> for Failure {
    fn from(e: renyi_tail::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn seed_from_env(flag: u64) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn invocation() -> String {
    std::env::args()
        .map(|a| {
            if a.is_empty() || a.contains(|c: char| c.is_whitespace() || c == '\'') {
                format!("'{}'", a.replace('\'', r"'\''"))
            } else {
                a
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> CliResult<()> {
    let mut table = match &cli.command {
        Command::Simulate(a) => simulate_cmd(a)?,
        Command::Estimate(a) => estimate_cmd(a)?,
        Command::Fit(a) => fit_cmd(a)?,
        Command::Rate(a) => rate_cmd(a)?,
        Command::Figure(a) => figure_cmd(a)?,
    };
    table.meta.invocation = Some(invocation());
    emit(&table, cli.format, cli.out.as_ref())
}

fn emit(table: &ReportTable, format: Format, out: Option<&PathBuf>) -> CliResult<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).map_err(|e| {
            Failure::Runtime(format!("cannot create {}: {e}", path.display()))
        })?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => {
            table.write_json(&mut sink)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn simulate_cmd(a: &SimulateArgs) -> CliResult<ReportTable> {
    if a.n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let seed = seed_from_env(a.seed)?;
    let mut rng = StreamRng::new(SeedSpec::new(seed, a.stream));
    let (_, h) = simulate(&a.spec, a.n, a.c, &mut rng)?;
    let spacings = scaled_log_spacings(&h);
    let mut table = ReportTable::new(vec![
        "index".into(),
        "W".into(),
        "scaled_log_spacing".into(),
    ]);
    for (i, (&w, &z)) in h.w().iter().zip(&spacings).enumerate() {
        table.push_row(vec![Cell::from(i + 1), Cell::Real(w), Cell::Real(z)]);
    }
    table.meta.master_seed = Some(seed);
    table.meta.config = json!({
        "subcommand": "simulate",
        "spec": a.spec.to_string(),
        "n": a.n,
        "c": a.c,
        "stream": a.stream,
    });
    Ok(table)
}

/// Reads one positive value per line; blank lines and `#` comments are skipped.
fn read_data(data: &DataArgs) -> CliResult<HeavySample> {
    let (name, reader): (String, Box<dyn Read>) = match &data.input {
        Some(p) => (
            p.display().to_string(),
            Box::new(File::open(p).map_err(|e| {
                Failure::Runtime(format!("cannot read {}: {e}", p.display()))
            })?),
        ),
        None => ("stdin".into(), Box::new(io::stdin())),
    };
    let mut values: Vec<f64> = Vec::new();
    let mut prev: Option<(usize, f64)> = None;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Failure::Runtime(format!("{name}:{lineno}: {e}")))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let v: f64 = text.parse().map_err(|_| {
            Failure::Runtime(format!("{name}:{lineno}: '{text}' is not a number"))
        })?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Failure::Runtime(format!(
                "{name}:{lineno}: {v} is not a positive finite value"
            )));
        }
        if let Some((pl, pv)) = prev {
            if v < pv && !data.allow_unsorted {
                return Err(Failure::Runtime(format!(
                    "{name}:{lineno}: {v} is smaller than {pv} on line {pl}; \
                     data must be sorted ascending (or pass --allow-unsorted)"
                )));
            }
        }
        prev = Some((lineno, v));
        values.push(v);
    }
    if values.is_empty() {
        return Err(Failure::Runtime(format!("{name}: no data")));
    }
    values.sort_by(f64::total_cmp);
    Ok(HeavySample::from_order_statistics(values, data.c)?)
}

fn estimate_row(e: &EstimateWithCI) -> Vec<Cell> {
    let opt = |v: Option<f64>| v.map_or_else(|| Cell::tag("none"), Cell::Real);
    vec![
        Cell::Real(e.gamma_hat),
        opt(e.lower),
        opt(e.upper),
        Cell::from(e.k_used),
        opt(e.level),
        Cell::tag(e.method.as_str()),
        Cell::tag(e.interval_method.as_str()),
    ]
}

fn estimate_cmd(a: &EstimateArgs) -> CliResult<ReportTable> {
    let h = read_data(&a.data)?;
    let n = h.n();
    let k = a.k.unwrap_or(n);
    let mut records = Vec::new();
    match a.method {
        EstimateMethod::Hill => {
            let g = hill(&h, k)?;
            if k >= 2 {
                records.push(ci_spacing(g, spacing_sigma(&h, k)?, k, a.eps)?);
            }
            records.push(ci_hill_self(g, k, a.eps)?);
        }
        EstimateMethod::Quantile => {
            let s = a.s.unwrap_or_else(|| h_minimizer().0);
            let g = quantile_estimator_log_scale(&log_scale(&h), s)?;
            if n >= 2 {
                records.push(ci_quantile(g, spacing_sigma(&h, n)?, s, n, a.eps)?);
            } else {
                records.push(EstimateWithCI::point(g, n, renyi_tail::Method::Quantile));
            }
        }
        EstimateMethod::MlUniform => {
            records.push(EstimateWithCI::point(
                ml_uniform(&h, k)?,
                k,
                renyi_tail::Method::MlUniform,
            ));
        }
    }
    let mut table = ReportTable::new(
        ["gamma_hat", "lower", "upper", "k_used", "level", "method", "interval_method"]
            .iter()
            .map(|c| c.to_string())
            .collect(),
    );
    for r in &records {
        table.push_row(estimate_row(r));
    }
    table.meta.config = json!({
        "subcommand": "estimate",
        "method": a.method.to_possible_value().map(|v| v.get_name().to_string()),
        "n": n,
        "k": a.k,
        "s": a.s,
        "eps": a.eps,
        "c": a.data.c,
    });
    Ok(table)
}

fn fit_cmd(a: &FitArgs) -> CliResult<ReportTable> {
    let h = read_data(&a.data)?;
    let k = a.k.unwrap_or(h.n());
    let g = ml_fit(a.family, &h, k)?;
    let ll = family_log_likelihood(a.family, g, &h, k)?;
    let mut table = ReportTable::new(
        ["family", "k", "gamma_hat", "log_likelihood"]
            .iter()
            .map(|c| c.to_string())
            .collect(),
    );
    let ll_cell = match ll.finite() {
        Some(v) => Cell::Real(v),
        None => Cell::tag(ll.to_string()),
    };
    table.push_row(vec![
        Cell::tag(a.family.to_string()),
        Cell::from(k),
        Cell::Real(g),
        ll_cell,
    ]);
    table.meta.config = json!({
        "subcommand": "fit",
        "family": a.family.to_string(),
        "n": h.n(),
        "k": k,
        "c": a.data.c,
    });
    Ok(table)
}

fn rate_cmd(a: &RateArgs) -> CliResult<ReportTable> {
    let mut table = ReportTable::new(vec!["quantity".into(), "value".into()]);
    let config;
    match (a.family, &a.spec) {
        (Some(family), _) => {
            let c = a.c.expect("clap enforces --c");
            let (upper, lower) = match family {
                RateFamily::Gamma => gamma_family_rates(a.r, c)?,
                RateFamily::Iid => iid_comparison_rates(c)?,
            };
            table.push_row(vec![Cell::tag("upper"), Cell::Real(upper)]);
            table.push_row(vec![Cell::tag("lower"), Cell::Real(lower)]);
            config = json!({
                "subcommand": "rate",
                "family": format!("{family:?}").to_lowercase(),
                "r": (family == RateFamily::Gamma).then_some(a.r),
                "c": c,
            });
        }
        (None, Some(spec)) => {
            let z = a.z.expect("clap enforces --z");
            let i = rate_function(spec, z)?;
            let cell = match i.finite() {
                Some(v) => Cell::Real(v),
                None => Cell::tag(i.to_string()),
            };
            table.push_row(vec![Cell::tag("rate"), cell]);
            config = json!({"subcommand": "rate", "spec": spec.to_string(), "z": z});
        }
        (None, None) => {
            return Err(Failure::Usage(
                "rate needs either --family gamma|iid with --c, or --spec with --z".into(),
            ))
        }
    }
    table.meta.config = config;
    Ok(table)
}

fn figure_cmd(a: &FigureArgs) -> CliResult<ReportTable> {
    let kind = a.id.kind();
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.master_seed = seed_from_env(a.seed)?;
    if !a.specs.is_empty() {
        cfg.specs = a.specs.clone();
    }
    if let Some(n) = a.n {
        cfg.n = n;
        if kind == ExperimentKind::Coverage && a.k_grid.is_empty() {
            cfg.k_grid = log_spaced_grid(10.min(n), n, 50);
        }
    }
    if let Some(reps) = a.reps.or(a.avg_seeds) {
        cfg.reps = reps;
    }
    if let Some(eps) = a.eps {
        cfg.eps = eps;
    }
    if !a.k_grid.is_empty() {
        cfg.k_grid = a.k_grid.clone();
    }
    if !a.n_grid.is_empty() {
        cfg.n_grid = a.n_grid.clone();
    }
    if !a.s_grid.is_empty() {
        cfg.s_grid = a.s_grid.clone();
    }
    if let Some(c) = a.c {
        cfg.ld_c = c;
    }
    let runner = a.workers.map_or_else(Runner::default, Runner::new);
    Ok(experiments::run(&cfg, &runner)?)
}
