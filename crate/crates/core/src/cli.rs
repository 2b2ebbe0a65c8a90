//! Experiment driver behind the `alsim` binary.
//!
//! Three commands share one configuration: `run` executes a single
//! model/algorithm/schedule combination and checks the output, `enumerate`
//! does the same for every schedule in a bounded space, and `compare` runs
//! the AsyncLocal and DECOUPLED engines side by side.
//!
//! Exit codes: 0 pass, 1 check failure or execution error, 2 usage or
//! configuration error, 3 size guard.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::algorithms::{Constant, Cv3, Universal};
use crate::async_engine::{execute_async, AsyncAlgorithm, NodeOutcome, ViewDigest};
use crate::decoupled::{execute_decoupled, DecoupledConfig};
use crate::graph::{self, NodeIdx, PortGraph, Topology};
use crate::lcl::{check_partial, Label, LclTask, PartialLabeling};
use crate::local_engine::{run_local, LocalAlgorithm};
use crate::schedule::{enumerate_schedules_with_limit, Fate, Schedule, ScheduleSpace, Wake, DEFAULT_ENUM_LIMIT};
use crate::sweep::{sweep, Strategy};
use crate::transform::Transformed;
use crate::Error;

/// Environment variable overriding the schedule enumeration guard.
pub const MAX_ENUM_ENV: &str = "ALSIM_MAX_ENUM";

#[derive(Parser, Debug)]
#[command(name = "alsim", version, about = "Simulate LOCAL, AsyncLocal and DECOUPLED executions and check their outputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one configuration and check the output against the task.
    Run(ConfigArgs),
    /// Run every schedule of a bounded space and count check failures.
    Enumerate(EnumerateArgs),
    /// Run the AsyncLocal and DECOUPLED engines on the same inputs and compare outputs.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct ConfigArgs {
    /// JSON configuration, or a previous report whose `config` is reused.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `ring:<n>`, `torus:<rows>x<cols>` or a graph JSON file.
    #[arg(long)]
    pub graph: Option<String>,
    /// `coloring:<c>` or `mis`.
    #[arg(long)]
    pub task: Option<String>,
    /// `cv3`, `universal:<task>`, `const:<label>` or `digest:<radius>`.
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Lift the LOCAL algorithm to AsyncLocal through virtual identifiers.
    #[arg(long)]
    pub transform: bool,
    /// `sync`, `never`, `random:seed=S,window=W,never=P,crash=P`,
    /// `enumerate:maxwake=W[,never][,crash]` or a schedule JSON file.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Identifier bound; defaults to the graph's.
    #[arg(long = "N", value_name = "N")]
    pub n_bound: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for random schedules that do not name their own.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Latest wake round; replaces the schedule spec.
    #[arg(long)]
    pub max_wake: Option<u32>,
    /// Include never-waking processes.
    #[arg(long)]
    pub never: bool,
    /// Include crashing processes.
    #[arg(long)]
    pub crash: bool,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Number of consecutive seeds to draw random schedules from.
    #[arg(long)]
    pub seeds: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Local,
    Async,
    Decoupled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Fully resolved configuration, echoed in every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub graph: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    pub algo: String,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub transform: bool,
    #[serde(default = "default_schedule")]
    pub schedule: String,
    #[serde(rename = "N")]
    pub n_bound: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<u64>,
}

fn default_schedule() -> String {
    "sync".into()
}

/// A configuration with every field optional; files and flags are both read
/// into this and merged, flags winning.
#[derive(Clone, Debug, Default, Deserialize)]
struct ConfigLayer {
    graph: Option<String>,
    task: Option<String>,
    algo: Option<String>,
    model: Option<Model>,
    transform: Option<bool>,
    schedule: Option<String>,
    #[serde(rename = "N")]
    n_bound: Option<u64>,
    format: Option<Format>,
    seed: Option<u64>,
    seeds: Option<u64>,
}

impl ConfigLayer {
    fn over(self, base: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            graph: self.graph.or(base.graph),
            task: self.task.or(base.task),
            algo: self.algo.or(base.algo),
            model: self.model.or(base.model),
            transform: self.transform.or(base.transform),
            schedule: self.schedule.or(base.schedule),
            n_bound: self.n_bound.or(base.n_bound),
            format: self.format.or(base.format),
            seed: self.seed.or(base.seed),
            seeds: self.seeds.or(base.seeds),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(Error::SizeLimit { .. }) => 3,
            CliError::Run(Error::Parameter(_) | Error::InvalidTopology(_) | Error::InvalidIds(_)) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

// ---------------------------------------------------------------------------
// Spec parsing

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleSpec {
    Sync,
    Never,
    Random {
        seed: Option<u64>,
        window: u32,
        never: f64,
        crash: f64,
    },
    Enumerate {
        max_wake: u32,
        never: bool,
        crash: bool,
    },
    File(PathBuf),
}

impl ScheduleSpec {
    pub fn parse(spec: &str) -> CliResult<Self> {
        let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
        match head {
            "sync" if rest.is_empty() => Ok(ScheduleSpec::Sync),
            "never" if rest.is_empty() => Ok(ScheduleSpec::Never),
            "random" => {
                let (mut seed, mut window, mut never, mut crash) = (None, 4, 0.0, 0.0);
                for kv in rest.split(',').filter(|s| !s.is_empty()) {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| CliError::Usage(format!("expected key=value in schedule, got {kv:?}")))?;
                    match k {
                        "seed" => seed = Some(parse_num(k, v)?),
                        "window" => window = parse_num(k, v)?,
                        "never" => never = parse_num(k, v)?,
                        "crash" => crash = parse_num(k, v)?,
                        _ => return usage(format!("unknown random schedule key {k:?}")),
                    }
                }
                Ok(ScheduleSpec::Random {
                    seed,
                    window,
                    never,
                    crash,
                })
            }
            "enumerate" => {
                let (mut max_wake, mut never, mut crash) = (None, false, false);
                for item in rest.split(',').filter(|s| !s.is_empty()) {
                    match item.split_once('=') {
                        Some(("maxwake", v)) => max_wake = Some(parse_num("maxwake", v)?),
                        None if item == "never" => never = true,
                        None if item == "crash" => crash = true,
                        _ => return usage(format!("unknown enumerate schedule item {item:?}")),
                    }
                }
                let max_wake = max_wake.ok_or_else(|| CliError::Usage("enumerate schedule needs maxwake=W".into()))?;
                Ok(ScheduleSpec::Enumerate { max_wake, never, crash })
            }
            _ if spec.contains(':') => usage(format!("unknown schedule {spec:?}")),
            _ => Ok(ScheduleSpec::File(PathBuf::from(spec))),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("bad value {v:?} for {key}")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgoSpec {
    Cv3,
    Universal(String),
    Const(u32),
    Digest(u32),
}

impl AlgoSpec {
    pub fn parse(spec: &str) -> CliResult<Self> {
        match spec.split_once(':') {
            None if spec == "cv3" => Ok(AlgoSpec::Cv3),
            Some(("universal", task)) => Ok(AlgoSpec::Universal(task.to_string())),
            Some(("const", l)) => Ok(AlgoSpec::Const(parse_num("const", l)?)),
            Some(("digest", r)) => Ok(AlgoSpec::Digest(parse_num("digest", r)?)),
            _ => usage(format!("unknown algorithm {spec:?}")),
        }
    }

    fn local(&self) -> CliResult<Box<dyn LocalAlgorithm>> {
        Ok(match self {
            AlgoSpec::Cv3 => Box::new(Cv3),
            AlgoSpec::Universal(task) => Box::new(Universal::new(parse_task(task)?)),
            AlgoSpec::Const(l) => Box::new(Constant(Label(*l))),
            AlgoSpec::Digest(_) => return usage("digest is an AsyncLocal diagnostic, not a LOCAL algorithm"),
        })
    }
}

fn parse_task(spec: &str) -> CliResult<LclTask> {
    spec.parse().map_err(|e: Error| CliError::Usage(e.to_string()))
}

/// Builds the graph named by `spec` with identifier bound `n_bound`, or the
/// graph's natural bound when none is given.
pub fn build_graph(spec: &str, n_bound: Option<u64>) -> CliResult<PortGraph> {
    let natural = |n: usize| n_bound.unwrap_or(n as u64);
    if let Some(n) = spec.strip_prefix("ring:") {
        let n: usize = parse_num("ring", n)?;
        return Ok(PortGraph::ring((0..n as u64).collect(), natural(n))?);
    }
    if let Some(dims) = spec.strip_prefix("torus:") {
        let (r, c) = dims
            .split_once('x')
            .ok_or_else(|| CliError::Usage(format!("expected torus:<rows>x<cols>, got {spec:?}")))?;
        let (r, c): (usize, usize) = (parse_num("torus", r)?, parse_num("torus", c)?);
        return Ok(PortGraph::torus(r, c, (0..(r * c) as u64).collect(), natural(r * c))?);
    }
    let g: PortGraph = read_json(Path::new(spec))?;
    match n_bound {
        Some(n) if n != g.id_bound() => Ok(g.with_ids(g.ids().to_vec(), n)?),
        _ => Ok(g),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))
}

fn load_layer(path: &Path) -> CliResult<ConfigLayer> {
    let mut value: serde_json::Value = read_json(path)?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn resolve(args: &ConfigArgs, seeds: Option<u64>, schedule: Option<String>) -> CliResult<(RunConfig, PortGraph)> {
    let flags = ConfigLayer {
        graph: args.graph.clone(),
        task: args.task.clone(),
        algo: args.algo.clone(),
        model: args.model,
        transform: args.transform.then_some(true),
        schedule: schedule.or_else(|| args.schedule.clone()),
        n_bound: args.n_bound,
        format: args.format,
        seed: args.seed,
        seeds,
    };
    let layer = match &args.config {
        Some(path) => flags.over(load_layer(path)?),
        None => flags,
    };
    let graph_spec = layer.graph.ok_or_else(|| CliError::Usage("--graph is required".into()))?;
    let g = build_graph(&graph_spec, layer.n_bound)?;
    let config = RunConfig {
        graph: graph_spec,
        task: layer.task,
        algo: layer.algo.ok_or_else(|| CliError::Usage("--algo is required".into()))?,
        model: layer.model.unwrap_or_default(),
        transform: layer.transform.unwrap_or(false),
        schedule: layer.schedule.unwrap_or_else(default_schedule),
        n_bound: g.id_bound(),
        format: layer.format.unwrap_or_default(),
        seed: layer.seed.unwrap_or(0),
        seeds: layer.seeds,
    };
    Ok((config, g))
}

fn build_schedule(spec: &ScheduleSpec, n: usize, default_seed: u64, offset: u64) -> CliResult<Schedule> {
    match spec {
        ScheduleSpec::Sync => Ok(Schedule::sync(n)),
        ScheduleSpec::Never => Ok(Schedule::all_never(n)),
        ScheduleSpec::Random {
            seed,
            window,
            never,
            crash,
        } => {
            let seed = seed.unwrap_or(default_seed).wrapping_add(offset);
            Ok(Schedule::random(n, seed, *window, *never, *crash)?)
        }
        ScheduleSpec::File(path) => {
            let s: Schedule = read_json(path)?;
            if s.n() != n {
                return usage(format!("schedule covers {} nodes, graph has {n}", s.n()));
            }
            Ok(s)
        }
        ScheduleSpec::Enumerate { .. } => usage("enumerated schedules belong to the enumerate and compare commands"),
    }
}

fn enum_limit() -> CliResult<u128> {
    match std::env::var(MAX_ENUM_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{MAX_ENUM_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_ENUM_LIMIT),
    }
}

fn space_of(max_wake: u32, never: bool, crash: bool, n: usize) -> CliResult<ScheduleSpace> {
    Ok(enumerate_schedules_with_limit(n, max_wake, never, crash, enum_limit()?)?)
}

fn ensure_symmetric(g: &PortGraph) -> CliResult<()> {
    let ok = matches!(g.topology(), Topology::Ring | Topology::Torus { .. })
        || g.is_oriented_ring()
        || graph::is_symmetric(g)?;
    if ok {
        Ok(())
    } else {
        usage("the DECOUPLED model needs a port-symmetric graph")
    }
}

fn ensure_compatible(algo: &AlgoSpec, g: &PortGraph) -> CliResult<()> {
    if *algo == AlgoSpec::Cv3 && !g.is_oriented_ring() {
        return usage("cv3 requires an oriented ring");
    }
    Ok(())
}

/// An asynchronous algorithm ready to execute, with the transform's radii
/// when it wraps a LOCAL algorithm.
struct AsyncRunner {
    algo: Box<dyn AsyncAlgorithm>,
    radii: Option<(u32, u32)>,
}

fn async_runner(spec: &AlgoSpec, transform: bool, n_bound: u64) -> CliResult<AsyncRunner> {
    if let AlgoSpec::Digest(radius) = spec {
        if transform {
            return usage("digest is already an AsyncLocal algorithm; drop --transform");
        }
        return Ok(AsyncRunner {
            algo: Box::new(ViewDigest { radius: *radius }),
            radii: None,
        });
    }
    if !transform {
        return usage("LOCAL algorithms run under async or decoupled only with --transform");
    }
    let t = Transformed::new(spec.local()?, n_bound)?;
    let radii = Some((t.tau(), t.snapshot_radius()));
    Ok(AsyncRunner {
        algo: Box::new(t),
        radii,
    })
}

fn execute(model: Model, g: &PortGraph, s: &Schedule, runner: &AsyncRunner, n_bound: u64) -> crate::Result<Vec<NodeOutcome>> {
    match model {
        Model::Decoupled => Ok(execute_decoupled(g, s, &runner.algo, n_bound, &DecoupledConfig::default())?.outcomes),
        _ => execute_async(g, s, &runner.algo, n_bound),
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub pass: bool,
    pub witness: Option<NodeIdx>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub node: NodeIdx,
    pub id: u64,
    pub wake: Wake,
    pub fate: Fate,
    pub visible: Option<usize>,
    pub output: Option<Label>,
}

impl From<NodeOutcome> for NodeRow {
    fn from(o: NodeOutcome) -> Self {
        NodeRow {
            node: o.node,
            id: o.id,
            wake: o.wake,
            fate: o.fate,
            visible: o.visible,
            output: o.output,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub nodes: Vec<NodeRow>,
    pub tau: Option<u32>,
    pub snapshot_radius: Option<u32>,
    pub verdict: VerdictReport,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: u64,
    pub schedule: Schedule,
    pub witness: Option<NodeIdx>,
    pub outputs: PartialLabeling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerateReport {
    pub command: String,
    pub config: RunConfig,
    pub schedules: u64,
    pub failures: u64,
    pub first_counterexample: Option<Counterexample>,
    pub tau: Option<u32>,
    pub snapshot_radius: Option<u32>,
    pub verdict: VerdictReport,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub index: u64,
    pub schedule: Schedule,
    pub node: NodeIdx,
    #[serde(rename = "async")]
    pub async_output: Option<Label>,
    pub decoupled: Option<Label>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub command: String,
    pub config: RunConfig,
    pub schedules: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<Mismatch>,
    pub tau: Option<u32>,
    pub snapshot_radius: Option<u32>,
    pub verdict: VerdictReport,
    pub wall_time_ms: f64,
}

fn cell<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|x| x.to_string()).unwrap_or_default()
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,id,wake,fate,visible,output,pass,witness,tau,snapshot_radius\n");
        for r in &self.nodes {
            out += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.node,
                r.id,
                r.wake,
                r.fate,
                cell(r.visible),
                cell(r.output),
                self.verdict.pass,
                cell(self.verdict.witness),
                cell(self.tau),
                cell(self.snapshot_radius)
            );
        }
        out
    }
}

impl EnumerateReport {
    pub fn to_csv(&self) -> String {
        let first = self.first_counterexample.as_ref();
        format!(
            "schedules,failures,pass,first_failure,witness,tau,snapshot_radius,wall_time_ms\n{},{},{},{},{},{},{},{:.3}\n",
            self.schedules,
            self.failures,
            self.verdict.pass,
            cell(first.map(|c| c.index)),
            cell(first.and_then(|c| c.witness)),
            cell(self.tau),
            cell(self.snapshot_radius),
            self.wall_time_ms
        )
    }
}

impl CompareReport {
    pub fn to_csv(&self) -> String {
        let first = self.first_mismatch.as_ref();
        format!(
            "schedules,mismatches,pass,first_mismatch,node,async,decoupled,wall_time_ms\n{},{},{},{},{},{},{},{:.3}\n",
            self.schedules,
            self.mismatches,
            self.verdict.pass,
            cell(first.map(|m| m.index)),
            cell(first.map(|m| m.node)),
            cell(first.and_then(|m| m.async_output)),
            cell(first.and_then(|m| m.decoupled)),
            self.wall_time_ms
        )
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

// ---------------------------------------------------------------------------
// Commands

pub fn cmd_run(args: &ConfigArgs) -> CliResult<RunReport> {
    let start = Instant::now();
    let (config, g) = resolve(args, None, None)?;
    let spec = AlgoSpec::parse(&config.algo)?;
    ensure_compatible(&spec, &g)?;
    let task = parse_task(
        config
            .task
            .as_deref()
            .ok_or_else(|| CliError::Usage("--task is required".into()))?,
    )?;
    let n_bound = config.n_bound;
    let (outcomes, radii) = match config.model {
        Model::Local => {
            if config.transform {
                return usage("--transform applies to the async and decoupled models");
            }
            if ScheduleSpec::parse(&config.schedule)? != ScheduleSpec::Sync {
                return usage("the LOCAL model runs synchronously; drop --schedule");
            }
            let labels = run_local(&g, &spec.local()?, n_bound, g.ids())?;
            let outcomes = labels
                .into_iter()
                .enumerate()
                .map(|(v, l)| NodeOutcome {
                    node: v,
                    id: g.id(v),
                    wake: Wake::At(0),
                    fate: Fate::Correct,
                    visible: None,
                    output: Some(l),
                })
                .collect();
            (outcomes, None)
        }
        model => {
            if let AlgoSpec::Digest(_) = spec {
                return usage("digest has no task to check; use it with compare");
            }
            if model == Model::Decoupled {
                ensure_symmetric(&g)?;
            }
            let runner = async_runner(&spec, config.transform, n_bound)?;
            let s = build_schedule(&ScheduleSpec::parse(&config.schedule)?, g.n(), config.seed, 0)?;
            (execute(model, &g, &s, &runner, n_bound)?, runner.radii)
        }
    };
    let labeling = crate::async_engine::outcomes_to_labeling(&outcomes);
    let verdict = check_partial(&task, &g, &labeling)?;
    Ok(RunReport {
        command: "run".into(),
        config,
        nodes: outcomes.into_iter().map(NodeRow::from).collect(),
        tau: radii.map(|r| r.0),
        snapshot_radius: radii.map(|r| r.1),
        verdict: VerdictReport {
            pass: verdict.is_pass(),
            witness: verdict.witness(),
        },
        wall_time_ms: elapsed_ms(start),
    })
}

pub fn cmd_enumerate(args: &EnumerateArgs) -> CliResult<EnumerateReport> {
    let start = Instant::now();
    let schedule = args.max_wake.map(|w| {
        let mut s = format!("enumerate:maxwake={w}");
        if args.never {
            s += ",never";
        }
        if args.crash {
            s += ",crash";
        }
        s
    });
    let (config, g) = resolve(&args.common, None, schedule)?;
    let ScheduleSpec::Enumerate { max_wake, never, crash } = ScheduleSpec::parse(&config.schedule)? else {
        return usage("enumerate needs --max-wake or an enumerate:maxwake=W schedule");
    };
    let spec = AlgoSpec::parse(&config.algo)?;
    ensure_compatible(&spec, &g)?;
    let task = parse_task(
        config
            .task
            .as_deref()
            .ok_or_else(|| CliError::Usage("--task is required".into()))?,
    )?;
    if matches!(spec, AlgoSpec::Digest(_)) {
        return usage("digest has no task to check; use it with compare");
    }
    let model = match config.model {
        Model::Local => return usage("enumerate needs --model async or --model decoupled"),
        Model::Decoupled => {
            ensure_symmetric(&g)?;
            Model::Decoupled
        }
        m => m,
    };
    let runner = async_runner(&spec, config.transform, config.n_bound)?;
    let space = space_of(max_wake, never, crash, g.n())?;
    let count = u64::try_from(space.count()).map_err(|_| {
        CliError::Run(Error::SizeLimit {
            what: "schedule enumeration",
            count: space.count(),
            limit: u64::MAX as u128,
        })
    })?;
    let summary = sweep(count, Strategy::Parallel, |i| {
        let s = space.get(i as u128);
        let outcomes = execute(model, &g, &s, &runner, config.n_bound)?;
        let outputs = crate::async_engine::outcomes_to_labeling(&outcomes);
        let verdict = check_partial(&task, &g, &outputs)?;
        Ok((!verdict.is_pass()).then(|| Counterexample {
            index: i,
            schedule: s,
            witness: verdict.witness(),
            outputs,
        }))
    })?;
    let first = summary.first_failure.map(|(_, c)| c);
    Ok(EnumerateReport {
        command: "enumerate".into(),
        schedules: summary.total,
        failures: summary.failures,
        verdict: VerdictReport {
            pass: summary.failures == 0,
            witness: first.as_ref().and_then(|c| c.witness),
        },
        first_counterexample: first,
        tau: runner.radii.map(|r| r.0),
        snapshot_radius: runner.radii.map(|r| r.1),
        config,
        wall_time_ms: elapsed_ms(start),
    })
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<CompareReport> {
    let start = Instant::now();
    let (config, g) = resolve(&args.common, args.seeds, None)?;
    let spec = AlgoSpec::parse(&config.algo)?;
    ensure_compatible(&spec, &g)?;
    ensure_symmetric(&g)?;
    let runner = async_runner(&spec, config.transform, config.n_bound)?;
    let schedule = ScheduleSpec::parse(&config.schedule)?;
    let space = match schedule {
        ScheduleSpec::Enumerate { max_wake, never, crash } => Some(space_of(max_wake, never, crash, g.n())?),
        _ => None,
    };
    let count = match (&space, &schedule) {
        (Some(space), _) => u64::try_from(space.count()).unwrap_or(u64::MAX),
        (None, ScheduleSpec::Random { .. }) => config.seeds.unwrap_or(1),
        _ => 1,
    };
    let summary = sweep(count, Strategy::Parallel, |i| {
        let s = match &space {
            Some(space) => space.get(i as u128),
            None => build_schedule(&schedule, g.n(), config.seed, i).map_err(|e| match e {
                CliError::Run(e) => e,
                CliError::Usage(msg) => Error::Parameter(msg),
            })?,
        };
        let a = execute(Model::Async, &g, &s, &runner, config.n_bound)?;
        let d = execute(Model::Decoupled, &g, &s, &runner, config.n_bound)?;
        Ok(a.iter().zip(&d).find(|(x, y)| x.output != y.output).map(|(x, y)| Mismatch {
            index: i,
            schedule: s.clone(),
            node: x.node,
            async_output: x.output,
            decoupled: y.output,
        }))
    })?;
    let first = summary.first_failure.map(|(_, m)| m);
    Ok(CompareReport {
        command: "compare".into(),
        schedules: summary.total,
        mismatches: summary.failures,
        verdict: VerdictReport {
            pass: summary.failures == 0,
            witness: first.as_ref().map(|m| m.node),
        },
        first_mismatch: first,
        tau: runner.radii.map(|r| r.0),
        snapshot_radius: runner.radii.map(|r| r.1),
        config,
        wall_time_ms: elapsed_ms(start),
    })
}

fn emit(out: Option<&Path>, body: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Usage(format!("cannot write report: {e}")))
        }
    }
}

fn render<T: Serialize>(report: &T, format: Format, csv: impl FnOnce(&T) -> String) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
        Format::Csv => csv(report),
    }
}

/// Executes a parsed command line, writes its report and returns the exit
/// code.
pub fn run_command(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args).and_then(|r| {
            emit(args.out.as_deref(), &render(&r, r.config.format, RunReport::to_csv))?;
            Ok(r.verdict.pass)
        }),
        Command::Enumerate(args) => cmd_enumerate(args).and_then(|r| {
            emit(args.common.out.as_deref(), &render(&r, r.config.format, EnumerateReport::to_csv))?;
            Ok(r.verdict.pass)
        }),
        Command::Compare(args) => cmd_compare(args).and_then(|r| {
            emit(args.common.out.as_deref(), &render(&r, r.config.format, CompareReport::to_csv))?;
            Ok(r.verdict.pass)
        }),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("alsim: {e}");
            e.exit_code()
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_command(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
