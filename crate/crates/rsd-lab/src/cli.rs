//! Command-line surface: `simulate`, `experiment`, `verify`, `generate`.
//!
//! Exit codes: 0 success, 2 input error, 3 experiment bound failure,
//! 4 property violation. Input errors print one line,
//! `error: <Class>: <message>`, on stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsd_core::generators::sample_permutation;
use rsd_core::rsd::all_demand_trajectories;
use rsd_core::seed::substream;
use rsd_core::verify::Engine;
use rsd_core::{generate_instance, run_rsd, CutoffVector, GeneratorKind, MarketInstance};

use crate::config::{resolve_seed, ConfigError, Format, GeneratorConfig, RunConfig, VerifyConfig, SEED_ENV};
use crate::experiments::{self, ExperimentReport, PhaseTransitionParams, ReportRow};
use crate::io::{instance_json, load_instance, load_permutation, write_text, AssignmentFile, IoError, PermutationFile};
use crate::mc::{labels, McConfig};
use crate::report::{self, Provenance};
use crate::suites::{run_suite, Suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BOUND: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

pub const EXPERIMENTS: [&str; 5] = ["toy-law", "phase-transition", "tail", "uniform-tail", "lottery"];

#[derive(Debug, Parser)]
#[command(name = "rsd-lab", version, about = "Random serial dictatorship simulations, experiments and property checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed (falls back to the config file, then RSD_LAB_SEED).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub reps: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run RSD once under a seeded (or given) order.
    Simulate(SimulateArgs),
    /// Run one of: toy-law, phase-transition, tail, uniform-tail, lottery.
    Experiment(ExperimentArgs),
    /// Run a verifier suite: oracle, lipschitz, insertion, differences, equivalence, all.
    Verify(VerifyArgs),
    /// Generate an instance file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args, Default)]
pub struct InstanceArgs {
    /// Instance file (JSON).
    #[arg(long, value_name = "PATH")]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Args, Default)]
pub struct GeneratorArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub capacities: Option<Vec<u32>>,
    #[arg(long)]
    pub list_length: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Generator seed (defaults to the master seed).
    #[arg(long)]
    pub instance_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Block,
    UniformFull,
    UniformPartial,
    CommonRanking,
    PlackettLuce,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: InstanceArgs,
    /// Order file (`student_at`); drawn from the seed otherwise.
    #[arg(long, value_name = "PATH")]
    pub permutation: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment name (or `experiment.name` in the config).
    pub name: Option<String>,
    #[command(flatten)]
    pub source: InstanceArgs,
    #[arg(long)]
    pub school: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Extra thresholds for the phase-transition study.
    #[arg(long = "t", value_delimiter = ',')]
    pub extra_t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub epsilon_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name (or `verify.suite` in the config); defaults to `all`.
    pub suite: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub random_max_n: Option<usize>,
    #[arg(long)]
    pub exhaustive_max_n: Option<usize>,
    #[arg(long)]
    pub exhaustive_random: Option<usize>,
    #[arg(long, alias = "n")]
    pub oracle_max_n: Option<usize>,
    /// Self-test: run the checks against an RSD engine with a deliberate
    /// capacity off-by-one.
    #[arg(long)]
    pub corrupt: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

/// A failure mapped to an exit code and a one-line message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub class: String,
    pub message: String,
}

impl CliError {
    pub fn input(class: &str, message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, class: class.into(), message: message.into() }
    }

    pub fn line(&self) -> String {
        format!("error: {}: {}", self.class, self.message)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::input(e.class(), e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::input(e.class(), e.to_string())
    }
}

impl From<experiments::ExperimentError> for CliError {
    fn from(e: experiments::ExperimentError) -> Self {
        CliError::input(e.class(), e.to_string())
    }
}

/// What a successful command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub files: Vec<PathBuf>,
    /// Printed on stdout.
    pub stdout: String,
    /// Printed on stderr (failing rows, wall clock).
    pub stderr: String,
}

fn kind_from(args: &GeneratorArgs, kind: KindArg, m: usize) -> Result<GeneratorKind, CliError> {
    Ok(match kind {
        KindArg::Block => GeneratorKind::Block,
        KindArg::UniformFull => GeneratorKind::UniformFull,
        KindArg::UniformPartial => GeneratorKind::UniformPartial {
            list_length: args
                .list_length
                .ok_or_else(|| CliError::input("ConfigInvalid", "uniform-partial needs --list-length"))?,
        },
        KindArg::CommonRanking => GeneratorKind::CommonRanking,
        KindArg::PlackettLuce => GeneratorKind::PlackettLuce { weights: args.weights.clone().unwrap_or_else(|| vec![1.0; m]) },
    })
}

fn merge_generator(file: Option<GeneratorConfig>, args: &GeneratorArgs) -> Result<Option<GeneratorConfig>, CliError> {
    let mut g = match (file, args.kind) {
        (Some(g), _) => g,
        (None, Some(_)) => GeneratorConfig { kind: GeneratorKind::Block, n: 0, m: 0, capacities: None, seed: None },
        (None, None) => return Ok(None),
    };
    g.n = args.n.unwrap_or(g.n);
    g.m = args.m.unwrap_or(g.m);
    if let Some(k) = args.kind {
        g.kind = kind_from(args, k, g.m)?;
    }
    if args.capacities.is_some() {
        g.capacities = args.capacities.clone();
    }
    if args.instance_seed.is_some() {
        g.seed = args.instance_seed;
    }
    Ok(Some(g))
}

/// Effective configuration: file values overridden by flags, seed resolved.
fn effective(global: &GlobalArgs, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.seed = Some(resolve_seed(global.seed, cfg.seed, env_seed)?);
    if global.reps.is_some() {
        cfg.replications = global.reps;
    }
    if global.workers.is_some() {
        cfg.workers = global.workers;
    }
    if global.out.is_some() {
        cfg.out = global.out.clone();
    }
    if let Some(f) = global.format {
        cfg.format = Some(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Text => Format::Text,
        });
    }
    Ok(cfg)
}

struct Ctx {
    cfg: RunConfig,
    seed: u64,
    out: PathBuf,
    format: Format,
    hash: String,
}

impl Ctx {
    fn new(cfg: RunConfig) -> Self {
        let seed = cfg.seed.expect("resolved");
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("rsd-lab-out"));
        let format = cfg.format.unwrap_or_default();
        // neither the output directory nor the worker count changes results
        let hash = RunConfig { out: None, workers: None, ..cfg.clone() }.hash();
        Ctx { cfg, seed, out, format, hash }
    }

    fn provenance(&self, command: &str, replications: u64) -> Provenance {
        Provenance { command: command.into(), master_seed: self.seed, replications, config_hash: self.hash.clone() }
    }

    fn meta(&self, command: &str, replications: u64) -> serde_json::Value {
        serde_json::json!({
            "command": command,
            "master_seed": self.seed,
            "replications": replications,
            "config_hash": self.hash,
            "build_id": report::build_id(),
        })
    }

    fn mc(&self) -> McConfig {
        let mut mc = McConfig::new(self.cfg.replications.unwrap_or(McConfig::default().replications), self.seed);
        mc.parallelism = self.cfg.workers.unwrap_or(1);
        if let Some(g) = &self.cfg.epsilon_grid {
            mc.epsilon_grid = g.clone();
        }
        mc
    }

    fn write(&self, files: &mut Vec<PathBuf>, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        write_text(&path, text)?;
        files.push(path);
        Ok(())
    }

    fn instance(&self) -> Result<MarketInstance, CliError> {
        if let Some(p) = &self.cfg.instance {
            return Ok(load_instance(p)?);
        }
        match &self.cfg.generator {
            Some(g) => generate_instance(&g.spec(self.seed)).map_err(|e| CliError::input("SpecInvalid", e.to_string())),
            None => Err(CliError::input("ConfigInvalid", "no instance: pass --instance PATH or a generator")),
        }
    }
}

fn apply_instance_args(cfg: &mut RunConfig, args: &InstanceArgs) -> Result<(), CliError> {
    if args.instance.is_some() {
        cfg.instance = args.instance.clone();
        cfg.generator = None;
    }
    let g = merge_generator(cfg.generator.take(), &args.generator)?;
    cfg.generator = g;
    Ok(())
}

fn simulate(mut cfg: RunConfig, args: &SimulateArgs) -> Result<Outcome, CliError> {
    apply_instance_args(&mut cfg, &args.source)?;
    if args.permutation.is_some() {
        cfg.permutation = args.permutation.clone();
    }
    let ctx = Ctx::new(cfg);
    let inst = ctx.instance()?;
    let pi = match &ctx.cfg.permutation {
        Some(p) => load_permutation(p)?,
        None => sample_permutation(inst.n(), &mut substream(ctx.seed, labels::ORDER, 0)),
    };
    if pi.len() != inst.n() {
        return Err(CliError::input(
            "LengthMismatch",
            format!("permutation has {} entries, instance has n = {}", pi.len(), inst.n()),
        ));
    }
    let asg = run_rsd(&inst, &pi);
    let cut = CutoffVector::from_assignment(&asg);
    let traj = all_demand_trajectories(&inst, &pi, &asg);
    let prov = ctx.provenance("simulate", 1);
    let mut files = Vec::new();

    let json = |mut v: serde_json::Value| {
        v["meta"] = ctx.meta("simulate", 1);
        serde_json::to_string_pretty(&v).expect("serializable") + "\n"
    };
    ctx.write(&mut files, "assignment.json", &json(serde_json::to_value(AssignmentFile::from(&asg)).expect("json")))?;
    ctx.write(&mut files, "permutation.json", &json(serde_json::to_value(PermutationFile::from(&pi)).expect("json")))?;

    let mut cut_csv = prov.comment_header() + "school,binding,position,gamma\n";
    for k in 0..inst.m() {
        let _ = writeln!(cut_csv, "{k},{},{},{}", cut.binding(k), cut.position(k).map(|p| p.to_string()).unwrap_or_default(), cut.gamma(k));
    }
    let mut traj_csv = prov.comment_header() + "school,t,tau\n";
    for tr in &traj {
        for (t, v) in tr.values.iter().enumerate() {
            let _ = writeln!(traj_csv, "{},{t},{v}", tr.school);
        }
    }
    let stdout = match ctx.format {
        Format::Csv => {
            ctx.write(&mut files, "cutoffs.csv", &cut_csv)?;
            ctx.write(&mut files, "trajectories.csv", &traj_csv)?;
            cut_csv
        }
        Format::Text => {
            let mut s = prov.text_header();
            let _ = writeln!(s, "n = {}\nm = {}", inst.n(), inst.m());
            let _ = writeln!(s, "student_at = {:?}", pi.order());
            let _ = writeln!(s, "school_of = {:?}", asg.to_signed());
            for k in 0..inst.m() {
                let _ = writeln!(s, "gamma[{k}] = {} binding = {}", cut.gamma(k), cut.binding(k));
            }
            for tr in &traj {
                let _ = writeln!(s, "tau[{}] = {:?}", tr.school, tr.values);
            }
            ctx.write(&mut files, "summary.txt", &s)?;
            s
        }
    };
    Ok(Outcome { code: EXIT_OK, files, stdout, stderr: String::new() })
}

fn experiment(mut cfg: RunConfig, args: &ExperimentArgs) -> Result<Outcome, CliError> {
    apply_instance_args(&mut cfg, &args.source)?;
    let mut e = cfg.experiment.take().unwrap_or_default();
    e.name = args.name.clone().or(e.name);
    e.school = args.school.or(e.school);
    e.n = args.source.generator.n.or(e.n);
    e.m = args.source.generator.m.or(e.m);
    e.alpha = args.alpha.or(e.alpha);
    e.epsilon = args.epsilon.or(e.epsilon);
    e.extra_t = args.extra_t.clone().or(e.extra_t);
    if args.epsilon_grid.is_some() {
        cfg.epsilon_grid = args.epsilon_grid.clone();
    }
    let name = e.name.clone().ok_or_else(|| {
        CliError::input("ConfigInvalid", format!("missing experiment name; one of {}", EXPERIMENTS.join(", ")))
    })?;
    cfg.experiment = Some(e.clone());
    let ctx = Ctx::new(cfg);
    let mc = ctx.mc();
    let need = |v: Option<usize>, what: &str| {
        v.ok_or_else(|| CliError::input("ConfigInvalid", format!("{name} needs --{what}")))
    };
    let report: ExperimentReport = match name.as_str() {
        "toy-law" => experiments::toy_model_law_check(need(e.n, "n")?, need(e.m, "m")?, &mc)?,
        "phase-transition" => {
            let params = PhaseTransitionParams {
                m: need(e.m, "m")?,
                alpha: e.alpha.unwrap_or(1.0),
                epsilon: e.epsilon.unwrap_or(0.5),
                extra_t: e.extra_t.clone().unwrap_or_default(),
            };
            experiments::phase_transition_experiment(&params, &mc)?
        }
        "tail" => experiments::cutoff_tail_experiment(&ctx.instance()?, e.school.unwrap_or(0), &mc)?,
        "uniform-tail" => experiments::uniform_tail_experiment(&ctx.instance()?, &mc)?,
        "lottery" => experiments::lottery_experiment(&ctx.instance()?, &mc)?,
        other => {
            return Err(CliError::input(
                "UnknownExperiment",
                format!("{other:?}; expected one of {}", EXPERIMENTS.join(", ")),
            ))
        }
    };
    let prov = ctx.provenance(&format!("experiment {name}"), mc.replications);
    let csv = report::experiment_csv(&prov, &report);
    let text = report::experiment_text(&prov, &report);
    let mut files = Vec::new();
    ctx.write(&mut files, &format!("{name}.csv"), &csv)?;
    ctx.write(&mut files, &format!("{name}.summary.txt"), &text)?;
    let mut stderr = format!("wall_clock_seconds = {:.3}\n", report.wall_clock.as_secs_f64());
    let code = if report.all_pass() {
        EXIT_OK
    } else {
        for r in report.failing_rows() {
            let _ = writeln!(stderr, "failed: {}", report::csv_row(r));
        }
        EXIT_BOUND
    };
    let stdout = match ctx.format {
        Format::Csv => csv,
        Format::Text => text,
    };
    Ok(Outcome { code, files, stdout, stderr })
}

fn verify(mut cfg: RunConfig, args: &VerifyArgs) -> Result<Outcome, CliError> {
    let mut v: VerifyConfig = cfg.verify.take().unwrap_or_default();
    v.suite = args.suite.clone().or(v.suite);
    v.trials = args.trials.or(v.trials);
    v.random_max_n = args.random_max_n.or(v.random_max_n);
    v.exhaustive_max_n = args.exhaustive_max_n.or(v.exhaustive_max_n);
    v.exhaustive_random = args.exhaustive_random.or(v.exhaustive_random);
    v.oracle_max_n = args.oracle_max_n.or(v.oracle_max_n);
    v.corrupt |= args.corrupt;
    cfg.verify = Some(v.clone());
    let ctx = Ctx::new(cfg);
    let name = v.suite.clone().unwrap_or_else(|| "all".into());
    let suite = Suite::parse(&name).ok_or_else(|| {
        CliError::input("UnknownSuite", format!("{name:?}; expected one of {}", Suite::NAMES.join(", ")))
    })?;
    let d = SuiteConfig::default();
    let sc = SuiteConfig {
        seed: ctx.seed,
        trials: v.trials.unwrap_or(d.trials),
        random_max_n: v.random_max_n.unwrap_or(d.random_max_n),
        exhaustive_max_n: v.exhaustive_max_n.unwrap_or(d.exhaustive_max_n),
        exhaustive_random: v.exhaustive_random.unwrap_or(d.exhaustive_random),
        oracle_max_n: v.oracle_max_n.unwrap_or(d.oracle_max_n),
        calibration_reps: ctx.cfg.replications.unwrap_or(d.calibration_reps),
        workers: ctx.cfg.workers.unwrap_or(1),
        engine: if v.corrupt { Engine::CapacityOffByOne } else { Engine::Faithful },
    };
    let r = run_suite(suite, &sc).map_err(|e| CliError::input(e.class(), e.to_string()))?;
    let prov = ctx.provenance(&format!("verify {name}"), sc.calibration_reps);
    let text = prov.text_header() + &r.render();
    let mut files = Vec::new();
    ctx.write(&mut files, &format!("verify-{name}.txt"), &text)?;
    let rows: Vec<ReportRow> = r
        .verdicts
        .iter()
        .map(|v| {
            let mut row = ReportRow::new(v.name.clone(), (v.exhaustive_cases + v.random_cases) as f64).pass(v.passed);
            row.bound = v.max_observed.map(f64::from);
            row
        })
        .collect();
    let stdout = match ctx.format {
        Format::Csv => {
            let csv = report::rows_csv(&prov, &rows);
            ctx.write(&mut files, &format!("verify-{name}.csv"), &csv)?;
            csv
        }
        Format::Text => text,
    };
    let mut stderr = format!("wall_clock_seconds = {:.3}\n", r.wall_clock.as_secs_f64());
    for v in r.verdicts.iter().filter(|v| !v.passed) {
        let w = v.witness.as_ref().map(|(l, w)| format!("{l}: {w}")).unwrap_or_default();
        let _ = writeln!(stderr, "violated: {} {w}", v.name);
    }
    let code = if r.passed() { EXIT_OK } else { EXIT_PROPERTY };
    Ok(Outcome { code, files, stdout, stderr })
}

fn generate(mut cfg: RunConfig, args: &GenerateArgs) -> Result<Outcome, CliError> {
    cfg.generator = merge_generator(cfg.generator.take(), &args.generator)?;
    cfg.instance = None;
    let ctx = Ctx::new(cfg);
    let g = ctx
        .cfg
        .generator
        .as_ref()
        .ok_or_else(|| CliError::input("ConfigInvalid", "generate needs --kind (or a [generator] table)"))?;
    let spec = g.spec(ctx.seed);
    let inst = generate_instance(&spec).map_err(|e| CliError::input("SpecInvalid", e.to_string()))?;
    let mut meta = ctx.meta("generate", 0);
    meta["generator"] = serde_json::to_value(&spec).expect("json");
    let text = instance_json(&inst, Some(meta));
    let mut files = Vec::new();
    ctx.write(&mut files, "instance.json", &text)?;
    Ok(Outcome { code: EXIT_OK, files, stdout: text, stderr: String::new() })
}

/// Runs a parsed command line with an explicit `RSD_LAB_SEED` value.
pub fn execute(cli: &Cli, env_seed: Option<&str>) -> Result<Outcome, CliError> {
    let cfg = effective(&cli.global, env_seed)?;
    match &cli.command {
        Command::Simulate(a) => simulate(cfg, a),
        Command::Experiment(a) => experiment(cfg, a),
        Command::Verify(a) => verify(cfg, a),
        Command::Generate(a) => generate(cfg, a),
    }
}

/// Full entry point: parses `args`, runs, prints, and returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(stderr, "error: UsageError: {first}");
            return EXIT_INPUT;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(&cli, env_seed.as_deref()) {
        Ok(o) => {
            let _ = stdout.write_all(o.stdout.as_bytes());
            let _ = stderr.write_all(o.stderr.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            e.code
        }
    }
}
