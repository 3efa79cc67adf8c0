use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use utilisvm::experiments::{
    comparison_run, convergence_run, emit_report, theorem2_check, write_report, ExperimentPlan, ReportFormat,
    VariantSpec,
};
use utilisvm::oracle::{ExpectationRule, QuadratureSpec};
use utilisvm::trainer::{build_problem_confidence, ConfidenceMap};
use utilisvm::{
    build_problem_knowledge, build_problem_lin, build_problem_standard, load_dataset, load_model, predict,
    sample_dataset, save_dataset, save_model, solve_dual, Error, KernelSpec, KnowledgeConfig, Label, SolverConfig,
    SyntheticDistribution,
};

#[derive(Parser, Debug)]
#[command(name = "utilisvm", version, about = "Region- and label-weighted kernel classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model on a CSV dataset
    Train(TrainArgs),
    /// Predict labels for a CSV dataset
    Predict(PredictArgs),
    /// Score a model against a synthetic distribution
    Eval(EvalArgs),
    /// Sample a dataset from a synthetic distribution
    Synth(SynthArgs),
    /// Convergence run of the knowledge model with C = m^gamma
    Converge(RunArgs),
    /// Train several model families on shared samples
    Compare(CompareArgs),
    /// Random-function sweep of the utility/generalization-error inequality
    CheckTheory(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelKind {
    Gaussian,
    Linear,
    Polynomial,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel: KernelKind,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[arg(long, default_value_t = 1.0)]
    offset: f64,
}

impl KernelArgs {
    fn spec(&self) -> utilisvm::Result<KernelSpec> {
        let k = match self.kernel {
            KernelKind::Gaussian => KernelSpec::Gaussian { sigma: self.sigma },
            KernelKind::Linear => KernelSpec::Linear,
            KernelKind::Polynomial => KernelSpec::Polynomial { degree: self.degree, offset: self.offset },
        };
        k.validate()?;
        Ok(k)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TrainVariant {
    Knowledge,
    Standard,
    Lin,
    Confidence,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Knowledge configuration (region and costs); required except for `standard`
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "C")]
    trade_off: f64,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, value_enum, default_value = "knowledge")]
    variant: TrainVariant,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_passes: usize,
    /// Coordinate shuffle seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV (`f,label`); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    panels: usize,
    /// Seed of the Monte Carlo fallback (dimension above 3)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment plan JSON; the bundled default plan when omitted
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Overrides the plan's base seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated subset of standard,lin,knowledge,confidence,knowledge_points
    #[arg(long, value_delimiter = ',', default_value = "standard,lin,knowledge,confidence,knowledge_points")]
    variants: Vec<String>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numeric() { 2 } else { 1 }, message: e.to_string() }
    }
}

fn numeric(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("UTILISVM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure { code: 1, message: format!("UTILISVM_THREADS must be a positive integer, got {raw:?}") })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 1, message: format!("thread pool: {e}") })?;
    #[cfg(not(feature = "parallel"))]
    log::debug!("sequential build ignores UTILISVM_THREADS={n}");
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e).into())
}

fn io_fail(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Error::io(path, e).into()
}

fn solver_config(tol: f64, max_passes: usize, seed: u64) -> Result<SolverConfig, Failure> {
    let cfg = SolverConfig { tolerance: tol, max_passes, shuffle_seed: seed };
    cfg.validate()?;
    Ok(cfg)
}

fn train(a: &TrainArgs) -> Result<(), Failure> {
    let kernel = a.kernel.spec()?;
    let cfg = solver_config(a.tol, a.max_passes, a.seed)?;
    let knowledge = a.config.as_ref().map(KnowledgeConfig::load).transpose()?;
    let data = load_dataset(&a.data)?;
    let need_config = || Failure { code: 1, message: "--config is required for this variant".into() };
    let problem = match a.variant {
        TrainVariant::Standard => build_problem_standard(&data, a.trade_off, kernel)?,
        TrainVariant::Knowledge => {
            let k = knowledge.as_ref().ok_or_else(need_config)?;
            build_problem_knowledge(&data, &k.costs, &k.region, a.trade_off, kernel)?
        }
        TrainVariant::Lin => {
            let k = knowledge.as_ref().ok_or_else(need_config)?;
            build_problem_lin(&data, &k.costs, a.trade_off, kernel)?
        }
        TrainVariant::Confidence => {
            let conf = data.confidences.clone().ok_or_else(|| Failure {
                code: 1,
                message: "confidence variant needs a `v` column in the data".into(),
            })?;
            build_problem_confidence(&data, &conf, ConfidenceMap::Identity, a.trade_off, kernel)?
        }
    };
    for note in &problem.notes {
        eprintln!("note: {note}");
    }
    let model = solve_dual(&problem, &cfg)?;
    save_model(&model, &a.out)?;
    let d = &model.diagnostics;
    println!(
        "passes={} converged={} primal={} dual={} gap={} norm={} norm_bound={} support={}",
        d.passes,
        d.converged,
        d.primal_objective,
        d.dual_objective,
        d.duality_gap,
        d.rkhs_norm,
        d.norm_bound,
        model.support_indices().len()
    );
    if !d.converged {
        return Err(numeric(format!(
            "solver stopped after {} passes with violation {:.3e}; model written anyway",
            d.passes, d.max_violation
        )));
    }
    Ok(())
}

fn run_predict(a: &PredictArgs) -> Result<(), Failure> {
    let model = load_model(&a.model)?;
    let data = load_dataset(&a.data)?;
    if data.dim() != model.dim() {
        return Err(Error::input(format!("data has {} features, model expects {}", data.dim(), model.dim())).into());
    }
    let f = model.expansion();
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let path = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    writeln!(out, "f,label").map_err(io_fail(&path))?;
    let mut correct = 0;
    for (x, y) in data.features.iter().zip(&data.labels) {
        let v = f.eval(x);
        if !v.is_finite() {
            return Err(numeric("model produced a non-finite decision value"));
        }
        let label = predict(&model, x)?;
        if label == *y {
            correct += 1;
        }
        writeln!(out, "{v},{}", label.sign() as i8).map_err(io_fail(&path))?;
    }
    out.flush().map_err(io_fail(&path))?;
    eprintln!("accuracy={}", correct as f64 / data.len() as f64);
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<(), Failure> {
    let dist = SyntheticDistribution::load(&a.dist)?;
    let k = KnowledgeConfig::load(&a.config)?;
    let model = load_model(&a.model)?;
    if model.dim() != dist.dim() {
        return Err(Error::input("model and distribution dimensions differ").into());
    }
    let quad = QuadratureSpec { nodes_per_axis: a.nodes, panels_per_axis: a.panels, mc_seed: a.seed, ..Default::default() };
    let rule = ExpectationRule::new(&dist, &quad)?;
    let f = model.expansion();
    let values = rule.evaluate(|x| f.eval(x));
    if values.iter().any(|v| !v.is_finite()) {
        return Err(numeric("model produced a non-finite decision value"));
    }
    let labels: Vec<f64> = values.iter().map(|v| Label::from_value(*v).sign()).collect();
    let report = rule.utility_from_labels(&k.costs, &k.region, &labels)?;
    let gen_error = rule.generalization_error_from_values(&k.costs, &k.region, &values)?;
    let out = serde_json::json!({
        "utility": report.utility,
        "optimal_utility": report.optimal_utility,
        "utility_gap": report.utility_gap,
        "expected_cost": report.expected_cost,
        "misclassification_error": report.misclassification_error,
        "generalization_error": gen_error,
        "mode": report.mode,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("plain JSON value"));
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let dist = SyntheticDistribution::load(&a.dist)?;
    let data = sample_dataset(&dist, a.m, a.seed)?;
    save_dataset(&data, &a.out)?;
    println!("wrote {} samples ({:.3} positive) to {}", data.len(), data.positive_fraction(), a.out.display());
    Ok(())
}

fn load_plan(a: &RunArgs) -> Result<ExperimentPlan, Failure> {
    let mut plan = match &a.plan {
        Some(p) => ExperimentPlan::load(p)?,
        None => utilisvm::experiments::default_plan(),
    };
    if let Some(s) = a.seed {
        plan.base_seed = s;
    }
    plan.validate()?;
    Ok(plan)
}

fn write_out(report: &utilisvm::experiments::ExperimentReport, a: &RunArgs) -> Result<(), Failure> {
    match &a.out {
        Some(p) => emit_report(report, p, a.format.into())?,
        None => write_report(report, a.format.into(), std::io::stdout().lock())?,
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    Ok(())
}

fn summarize(report: &utilisvm::experiments::ExperimentReport) {
    for s in &report.summary {
        eprintln!(
            "{} m={} median_gap={:.5} q1={:.5} q3={:.5}",
            s.variant, s.m, s.median, s.lower_quartile, s.upper_quartile
        );
    }
}

fn converge(a: &RunArgs) -> Result<(), Failure> {
    let plan = load_plan(a)?;
    let report = convergence_run(&plan)?;
    write_out(&report, a)?;
    summarize(&report);
    Ok(())
}

fn compare(a: &CompareArgs) -> Result<(), Failure> {
    let plan = load_plan(&a.run)?;
    let defaults = VariantSpec::all_defaults(&plan);
    let variants: Vec<VariantSpec> = a
        .variants
        .iter()
        .map(|name| {
            defaults
                .iter()
                .find(|v| v.name() == name.trim())
                .cloned()
                .ok_or_else(|| Failure { code: 1, message: format!("unknown variant {name:?}") })
        })
        .collect::<Result<_, _>>()?;
    let report = comparison_run(&plan, &variants)?;
    write_out(&report, &a.run)?;
    summarize(&report);
    Ok(())
}

fn check_theory(a: &CheckArgs) -> Result<(), Failure> {
    let dist = SyntheticDistribution::load(&a.dist)?;
    let k = KnowledgeConfig::load(&a.config)?;
    let kernel = a.kernel.spec()?;
    let quad = QuadratureSpec { nodes_per_axis: a.nodes, mc_seed: a.seed, ..Default::default() };
    let r = theorem2_check(&dist, &k.costs, &k.region, &kernel, a.n, a.seed, &quad)?;
    println!("functions={} violations={} max_excess={}", r.n_functions, r.violations, r.max_excess);
    if r.violations > 0 {
        return Err(numeric(format!("{} function(s) violate the inequality", r.violations)));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => run_predict(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
        Command::Converge(a) => converge(a),
        Command::Compare(a) => compare(a),
        Command::CheckTheory(a) => check_theory(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
