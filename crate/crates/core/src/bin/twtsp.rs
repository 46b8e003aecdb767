use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use twtsp::generators::Targets;
use twtsp::harness::{bench, simulate, GenSpec, LambdaPolicy, SimConfig, Suite};
use twtsp::matching::{profile, Matching};
use twtsp::model::{coverage, Instance, Walk};
use twtsp::offline::{offline_solve, OfflineConfig, OrienteeringChoice};
use twtsp::online::DetourMode;
use twtsp::oracle::{opt_twtsp_with_budget, DEFAULT_STATE_BUDGET};
use twtsp::Error;

#[derive(Parser)]
#[command(name = "twtsp", version, about = "Time-windows TSP with predictions: generators, solvers and simulations")]
struct Cli {
    /// Base seed for generators and guesses.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// State budget for the exact oracle.
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_BUDGET)]
    state_budget: u128,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance (and predictions where the generator has them).
    Gen(GenArgs),
    /// Exact optimum of an instance.
    Oracle(OracleArgs),
    /// Offline approximation walk for an instance.
    Offline(OfflineArgs),
    /// Offline walk on the predictions plus the shifted online runs.
    Simulate(SimulateArgs),
    /// Run a JSON suite and write CSV, reports and plot data.
    Bench(BenchArgs),
    /// Check instances, walks, matchings or suite files.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    ManyToOne,
    Chain,
    Chain0,
    Uniform,
    LineService,
    Line0,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Random => "random",
            Kind::ManyToOne => "many-to-one",
            Kind::Chain => "chain",
            Kind::Chain0 => "chain0",
            Kind::Uniform => "uniform",
            Kind::LineService => "line-service",
            Kind::Line0 => "line0",
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Generator parameters as `k=v,k=v`.
    #[arg(long, default_value = "")]
    params: String,
    /// Perturbation targets (`lambda`, `tau`, `rho_num`, `rho_den`,
    /// `conforming`) for generators without their own predictions.
    #[arg(long)]
    perturb: Option<String>,
    #[arg(long)]
    out_instance: PathBuf,
    #[arg(long)]
    out_predictions: Option<PathBuf>,
    #[arg(long)]
    out_matching: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Override the instance's service time.
    #[arg(long)]
    service: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OfflineArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    service: Option<i64>,
    #[arg(long, value_enum, default_value_t = Orienteer::Auto)]
    orienteering: Orienteer,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Orienteer {
    Auto,
    Exact,
    Greedy,
}

impl From<Orienteer> for OrienteeringChoice {
    fn from(o: Orienteer) -> Self {
        match o {
            Orienteer::Auto => OrienteeringChoice::Auto,
            Orienteer::Exact => OrienteeringChoice::Exact,
            Orienteer::Greedy => OrienteeringChoice::Greedy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "one2one")]
    One2One,
    #[value(name = "many2one")]
    Many2One,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// Matching file; enables the error profile in the report.
    #[arg(long)]
    matching: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["guess_lambda", "lambda_from_matching"])]
    lambda: Option<i64>,
    #[arg(long)]
    guess_lambda: bool,
    #[arg(long, requires = "matching")]
    lambda_from_matching: bool,
    /// `-1`, `0`, `1` or `all`.
    #[arg(long, default_value = "all", allow_hyphen_values = true)]
    epsilon: String,
    #[arg(long, value_enum, default_value_t = Mode::One2One)]
    mode: Mode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Walk to check against the instance's graph.
    #[arg(long, requires = "instance")]
    walk: Option<PathBuf>,
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long, requires_all = ["instance", "predictions"])]
    matching: Option<PathBuf>,
    #[arg(long)]
    suite: Option<PathBuf>,
}

/// Failure classes with their exit codes.
enum Failure {
    Validation(anyhow::Error),
    Budget(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Validation(e) | Failure::Budget(e) | Failure::Other(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::StateBudgetExceeded { .. }) => Failure::Budget(e),
            Some(
                Error::DisconnectedGraph(_)
                | Error::NonPositiveEdge { .. }
                | Error::VertexOutOfRange { .. }
                | Error::EmptyGraph
                | Error::InvalidRequest { .. }
                | Error::InvalidInstance(_)
                | Error::InfeasibleWalk(_)
                | Error::InfeasiblePrecomputedWalk(_)
                | Error::IndexOutOfRange { .. }
                | Error::KindMismatch(_)
                | Error::SizeMismatch { .. }
                | Error::BadSuiteFile(_),
            ) => Failure::Validation(e),
            _ if e.downcast_ref::<serde_json::Error>().is_some() => Failure::Validation(e),
            _ => Failure::Other(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

type CliResult = Result<(), Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Other)?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(anyhow::Error::new(e).context(format!("parsing {}", path.display()))))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.into()))?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())).map_err(Failure::Other)
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult {
    match out {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.into()))?);
            Ok(())
        }
    }
}

/// `k=v,k=v` into a JSON object; values become numbers, booleans or null
/// where they parse as such, strings otherwise.
fn parse_params(text: &str) -> anyhow::Result<Map<String, Value>> {
    let mut map = Map::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| anyhow!("parameter '{item}' is not of the form k=v"))?;
        let v = v.trim();
        let value = if let Ok(i) = v.parse::<i64>() {
            Value::from(i)
        } else if let Ok(f) = v.parse::<f64>() {
            Value::from(f)
        } else {
            match v {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                "none" | "null" => Value::Null,
                s => Value::String(s.to_string()),
            }
        };
        map.insert(k.trim().to_string(), value);
    }
    Ok(map)
}

fn with_service(inst: Instance, service: Option<i64>) -> Result<Instance, Failure> {
    match service {
        Some(s) if s < 0 => Err(Failure::Validation(anyhow!("service time must be non-negative"))),
        Some(s) => Ok(inst.with_service(s)),
        None => Ok(inst),
    }
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> CliResult {
    let mut params = parse_params(&a.params).map_err(Failure::Validation)?;
    params.insert("kind".into(), Value::String(a.kind.name().into()));
    let spec = GenSpec::from_value(Value::Object(params)).map_err(|e| Failure::Validation(e.into()))?;
    let targets: Option<Targets> = match &a.perturb {
        Some(p) => Some(
            serde_json::from_value(Value::Object(parse_params(p).map_err(Failure::Validation)?))
                .context("perturbation targets")
                .map_err(Failure::Validation)?,
        ),
        None => None,
    };
    let g = spec.generate(cli.seed, targets.as_ref())?;
    write_json(&a.out_instance, &g.instance)?;
    if let (Some(p), Some(pred)) = (&a.out_predictions, &g.predictions) {
        write_json(p, pred)?;
    }
    if let (Some(p), Some(m)) = (&a.out_matching, &g.matching) {
        write_json(p, m)?;
    }
    Ok(())
}

fn cmd_oracle(cli: &Cli, a: &OracleArgs) -> CliResult {
    let inst = with_service(read_json(&a.instance)?, a.service)?;
    let res = opt_twtsp_with_budget(&inst, cli.state_budget)?;
    if cli.format == Format::Csv && a.out.is_none() {
        println!("value,explored_states\n{},{}", res.value, res.explored_states);
        return Ok(());
    }
    emit(a.out.as_deref(), &res)
}

fn cmd_offline(cli: &Cli, a: &OfflineArgs) -> CliResult {
    let inst = with_service(read_json(&a.instance)?, a.service)?;
    let cfg = OfflineConfig { orienteering: a.orienteering.into(), jobs: None };
    let walk = offline_solve(&inst, &cfg)?;
    let value = coverage(&walk, &inst)?.reward;
    if cli.format == Format::Csv && a.out.is_none() {
        println!("value\n{value}");
        return Ok(());
    }
    #[derive(Serialize)]
    struct Out {
        value: u64,
        walk: Walk,
    }
    emit(a.out.as_deref(), &Out { value, walk })
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> CliResult {
    let inst: Instance = read_json(&a.instance)?;
    let pred: Instance = read_json(&a.predictions)?;
    let matching: Option<Matching> = a.matching.as_deref().map(read_json).transpose()?;
    let policy = if a.guess_lambda {
        LambdaPolicy::Guess
    } else if a.lambda_from_matching {
        LambdaPolicy::Profile
    } else if let Some(l) = a.lambda {
        LambdaPolicy::Fixed(l)
    } else {
        return Err(Failure::Validation(anyhow!("one of --lambda, --guess-lambda, --lambda-from-matching is required")));
    };
    let epsilons = match a.epsilon.as_str() {
        "all" => vec![-1, 0, 1],
        e => vec![e.parse::<i8>().map_err(|_| Failure::Validation(anyhow!("bad --epsilon '{e}'")))?],
    };
    let cfg = SimConfig {
        mode: match a.mode {
            Mode::One2One => DetourMode::OneToOne,
            Mode::Many2One => DetourMode::ManyToOne,
        },
        state_budget: cli.state_budget,
        epsilons,
        ..SimConfig::default()
    };
    let rep = simulate(&inst, &pred, matching.as_ref(), policy, cli.seed, &cfg)?;
    if cli.format == Format::Csv && a.out.is_none() {
        println!("epsilon,reward");
        for (e, r) in &rep.per_epsilon_rewards {
            println!("{e},{r}");
        }
        return Ok(());
    }
    emit(a.out.as_deref(), &rep)
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> CliResult {
    let text = std::fs::read_to_string(&a.suite)
        .with_context(|| format!("reading {}", a.suite.display()))
        .map_err(Failure::Other)?;
    let mut suite = Suite::from_json(&text)?;
    if cli.state_budget != DEFAULT_STATE_BUDGET {
        suite.state_budget = cli.state_budget;
    }
    let summary = bench(&suite, a.out_dir.as_deref(), cli.seed)?;
    match cli.format {
        Format::Csv => twtsp::harness::write_csv(&summary, std::io::stdout().lock())?,
        Format::Json => println!("{}", serde_json::to_string_pretty(&summary.aggregates).map_err(|e| Failure::Other(e.into()))?),
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> CliResult {
    let mut checked = Vec::new();
    let inst: Option<Instance> = a.instance.as_deref().map(read_json).transpose()?;
    if inst.is_some() {
        checked.push("instance");
    }
    if let (Some(inst), Some(p)) = (&inst, &a.walk) {
        let walk: Walk = read_json(p)?;
        walk.validate(inst.graph())
            .map_err(|v| Error::InfeasibleWalk(v.iter().map(|x| x.to_string()).collect()))?;
        checked.push("walk");
    }
    let pred: Option<Instance> = a.predictions.as_deref().map(read_json).transpose()?;
    if pred.is_some() {
        checked.push("predictions");
    }
    if let (Some(inst), Some(pred), Some(p)) = (&inst, &pred, &a.matching) {
        let m: Matching = read_json(p)?;
        profile(inst, pred, &m)?;
        checked.push("matching");
    }
    if let Some(p) = &a.suite {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(Failure::Other)?;
        Suite::from_json(&text)?;
        checked.push("suite");
    }
    if checked.is_empty() {
        return Err(Failure::Validation(anyhow!("nothing to validate")));
    }
    println!("ok: {}", checked.join(", "));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(&cli, a),
        Cmd::Oracle(a) => cmd_oracle(&cli, a),
        Cmd::Offline(a) => cmd_offline(&cli, a),
        Cmd::Simulate(a) => cmd_simulate(&cli, a),
        Cmd::Bench(a) => cmd_bench(&cli, a),
        Cmd::Validate(a) => cmd_validate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
