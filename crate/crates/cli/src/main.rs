//! `pathgauge`: simulate paths, compute prefix missing-mass estimators and
//! bound reports, run validators and decay studies.
//!
//! All randomness flows from `--seed`. Sub-seeds are `derive(seed, label, i)`
//! from `pathgauge_core::seeds` with the labels `"simulate"`, `"lemma1"`,
//! `"theorem1"`, `"good_turing"` and `"study"` (one index per study seed).
//! Reports are JSON with a fixed field order and no timestamps.

mod specs;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathgauge_core::bounds::{
    corollary_bound, excess_loss_probability_bound, risk_bound, theorem3_worst_case, BoundReport, ClassBounds,
    ConcentrationVariant, MixingProfile,
};
use pathgauge_core::estimators::{missing_mass_g, missing_mass_gt, ExceptionSet, FiniteDistribution, PrefixGaugeProfile};
use pathgauge_core::geometry::{GaugeSpec, Point, SamplePath};
use pathgauge_core::nnindex::{leave_one_out_min, prefix_min_indexed, Backend, SearchStats};
use pathgauge_core::pathio::{read_bin, read_csv, write_bin, write_csv};
use pathgauge_core::processes::{embed, mixing_bounds, simulate, EmbeddingSpec, ProcessKind, ProcessSpec};
use pathgauge_core::seeds::derive;
use pathgauge_core::verify::{
    decay_study, validate_good_turing, validate_lemma1, validate_theorem1_lipschitz, BernoulliChain, DecayConfig, DecayStudy,
    GoodTuringReport, Lemma1Config, TauRule, Theorem1Config, TrialReport,
};
use serde::Serialize;
use specs::{parse_chain, parse_embedding, parse_gauge, parse_list, parse_process, ArgError};

#[derive(Parser, Debug)]
#[command(name = "pathgauge", version, about = "Prefix missing-mass estimators and generalization bounds for sample paths")]
struct Cli {
    /// Worker threads for estimate/validate/study (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a stationary path and write it to a file.
    Simulate(SimulateArgs),
    /// Compute G, G_t and Good-Turing values of a path file.
    Estimate(EstimateArgs),
    /// Write an itemised bound report.
    Bound(BoundArgs),
    /// Run a Monte Carlo validator.
    Validate(ValidateArgs),
    /// Measure the decay of G with the sample size.
    Study(StudyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Bin,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BackendArg {
    Naive,
    Indexed,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Naive => Backend::Naive,
            BackendArg::Indexed => Backend::MetricIndexed,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// e.g. `cycle:states=100,p=0`, `circle:zeta=0.38,p=0.1`, `torus:p=0.1`, `iid:space=circle`.
    #[arg(long)]
    process: String,
    /// `identity`, `fourier:dim=D`, `raster` or `raster-scaled`.
    #[arg(long, default_value = "identity")]
    embedding: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Path format (default: from the file extension, else csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Input path format (default: from the file extension, else csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// e.g. `lipschitz:L=1`, `smooth:gamma=1,lambda=1`, `discrete`.
    #[arg(long, default_value = "lipschitz:L=1")]
    gauge: String,
    #[arg(long)]
    tau: usize,
    /// Threshold for G_t and the Good-Turing estimate.
    #[arg(long)]
    t: Option<f64>,
    /// Exception fraction α; needs `--phi`.
    #[arg(long)]
    alpha: Option<f64>,
    /// File with one Φ(f, X_i) value per line for i < n − τ.
    #[arg(long)]
    phi: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "naive")]
    backend: BackendArg,
    /// Include the full prefix profile in the report.
    #[arg(long)]
    dump_profile: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum BoundKindArg {
    /// Probability of excess loss from G_t.
    Excess,
    /// Risk bound from G.
    Risk,
    /// Risk bound with an exception set and entropy penalty.
    Corollary,
    /// Worst-case tail of G from a covering number.
    WorstCase,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VariantArg {
    Martingale,
    Azuma,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, value_enum, default_value = "risk")]
    kind: BoundKindArg,
    /// Estimator value (G_t for `excess`, G otherwise).
    #[arg(long)]
    estimate: Option<f64>,
    /// Compute the estimator from this path file instead.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value = "lipschitz:L=1")]
    gauge: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tau: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    t: Option<f64>,
    /// Exception fraction for `corollary`; α_τ for `worst-case`.
    #[arg(long)]
    alpha: Option<f64>,
    /// Derive φ(τ), α(τ) from this reset chain.
    #[arg(long)]
    process: Option<String>,
    /// Declared φ(τ) (default 0).
    #[arg(long)]
    phi_tau: Option<f64>,
    /// Declared α(τ) (default φ(τ)).
    #[arg(long)]
    alpha_tau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sup_f: f64,
    #[arg(long, default_value_t = 1.0)]
    sup_g: f64,
    #[arg(long, value_enum, default_value = "martingale")]
    variant: VariantArg,
    /// Covering number for `worst-case`.
    #[arg(long)]
    cover: Option<usize>,
    #[arg(long, value_enum, default_value = "naive")]
    backend: BackendArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum ValidatorArg {
    Lemma1,
    Theorem1,
    GoodTuring,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    validator: ValidatorArg,
    /// `lemma1`: `iid:q=Q` or `markov:p01=A,p10=B,q0=Q0,q1=Q1`.
    #[arg(long, default_value = "iid:q=0.3")]
    chain: String,
    /// `theorem1`: the process.
    #[arg(long)]
    process: Option<String>,
    #[arg(long, default_value = "identity")]
    embedding: String,
    /// `theorem1`: a Lipschitz gauge, `lipschitz:L=1[,metric=discrete]`.
    #[arg(long, default_value = "lipschitz:L=1")]
    gauge: String,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Threshold (`theorem1`, `good-turing`).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// `theorem1`: fresh draws per trial for continuous laws.
    #[arg(long, default_value_t = 2000)]
    mc_fresh: usize,
    /// `good-turing`: size of the uniform alphabet.
    #[arg(long, default_value_t = 20)]
    symbols: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[arg(long)]
    process: String,
    #[arg(long, default_value = "identity")]
    embedding: String,
    #[arg(long, default_value = "lipschitz:L=1")]
    gauge: String,
    /// Fixed gap; when omitted τ = ⌈ln(1/ε)/ln(1/(1−p))⌉ with `--tau-eps`.
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    tau_eps: f64,
    /// Comma-separated ascending sample sizes.
    #[arg(long, default_value = "2,4,8,16,32,64,128,256,512,1024,2048,4096")]
    sizes: String,
    /// Comma-separated reset probabilities (default: the one in `--process`).
    #[arg(long)]
    p_list: Option<String>,
    /// Number of seeded paths per reset probability.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "indexed")]
    backend: BackendArg,
    /// Table output (CSV, or the JSON report with `--format json`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Long-format CSV of ln G and ln(τ/n) against ln n.
    #[arg(long)]
    long_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum CliError {
    Arg(ArgError),
    Core(pathgauge_core::Error),
}

impl From<ArgError> for CliError {
    fn from(e: ArgError) -> Self {
        CliError::Arg(e)
    }
}

impl From<pathgauge_core::Error> for CliError {
    fn from(e: pathgauge_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Arg(_) => "invalid_argument",
            CliError::Core(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Arg(e) => e.to_string(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Arg(ArgError(msg.into())))
}

fn path_format(explicit: Option<Format>, path: Option<&Path>) -> Format {
    explicit.unwrap_or_else(|| match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("bin") => Format::Bin,
        Some("json") => Format::Json,
        _ => Format::Csv,
    })
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = open_out(out)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| pathgauge_core::Error::Format(e.to_string()))?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}

fn read_path(path: &Path, format: Option<Format>) -> Result<SamplePath> {
    let file = BufReader::new(File::open(path).map_err(|e| pathgauge_core::Error::Io(format!("{}: {e}", path.display())))?);
    Ok(match path_format(format, Some(path)) {
        Format::Csv => read_csv(file)?,
        Format::Bin => read_bin(file)?,
        Format::Json => {
            let points: Vec<Point> =
                serde_json::from_reader(file).map_err(|e| pathgauge_core::Error::Format(e.to_string()))?;
            SamplePath::new(points)?
        }
    })
}

fn validate_tau(tau: usize, n: usize) -> Result<()> {
    if tau == 0 || tau >= n {
        return arg_err(format!("--tau must satisfy 1 <= tau < n = {n}, got {tau}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SimulateConfig {
    process: ProcessKind,
    embedding: EmbeddingSpec,
    n: usize,
    seed: u64,
    format: Format,
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let kind = parse_process(&a.process)?;
    let embedding = parse_embedding(&a.embedding)?;
    kind.validate()?;
    embedding.validate()?;
    if a.n == 0 {
        return arg_err("--n must be at least 1");
    }
    let format = path_format(a.format, a.out.as_deref());
    let spec = ProcessSpec::new(kind, derive(a.seed, "simulate", 0));
    let path = embed(&embedding, &simulate(&spec, a.n)?)?;
    let mut w = open_out(a.out.as_deref())?;
    match format {
        Format::Csv => write_csv(&path, &mut w)?,
        Format::Bin => write_bin(&path, &mut w)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: SimulateConfig,
                points: &'a [Point],
            }
            let doc = Doc {
                config: SimulateConfig { process: kind, embedding, n: a.n, seed: a.seed, format },
                points: path.points(),
            };
            serde_json::to_writer(&mut w, &doc).map_err(|e| pathgauge_core::Error::Format(e.to_string()))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EstimateConfig {
    input: String,
    gauge: GaugeSpec,
    tau: usize,
    t: Option<f64>,
    alpha: Option<f64>,
    backend: Backend,
}

#[derive(Serialize)]
struct EstimateReport {
    command: &'static str,
    config: EstimateConfig,
    n: usize,
    exceptions: usize,
    /// `null` for gauges taking the value +∞.
    g: Option<f64>,
    gt: Option<f64>,
    good_turing: Option<f64>,
    stats: SearchStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<PrefixGaugeProfile>,
}

fn read_phi(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.trim();
        if s.is_empty() || (i == 0 && s.parse::<f64>().is_err() && s.chars().all(|c| c.is_alphabetic() || c == '_')) {
            continue;
        }
        out.push(s.parse().map_err(|_| ArgError(format!("{}: line {}: bad value `{s}`", path.display(), i + 1)))?);
    }
    Ok(out)
}

fn exceptions_for(alpha: Option<f64>, phi: Option<&Path>, domain: usize) -> Result<ExceptionSet> {
    match (alpha, phi) {
        (None | Some(0.0), _) => Ok(ExceptionSet::empty(domain)),
        (Some(a), Some(p)) => Ok(ExceptionSet::top_phi(&read_phi(p)?, a, domain)?),
        (Some(_), None) => arg_err("--alpha needs --phi with the per-point Φ values"),
    }
}

fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    let gauge = parse_gauge(&a.gauge)?;
    gauge.validate()?;
    if let Some(t) = a.t {
        if !(t.is_finite() && t > 0.0) {
            return arg_err(format!("--t must be positive, got {t}"));
        }
    }
    let path = read_path(&a.input, a.format)?;
    validate_tau(a.tau, path.len())?;
    let domain = path.len() - a.tau;
    let b = exceptions_for(a.alpha, a.phi.as_deref(), domain)?;
    let backend: Backend = a.backend.into();
    let ip = prefix_min_indexed(&path, &gauge, a.tau, &b, backend)?;
    let g = if gauge.is_finite_valued() { Some(missing_mass_g(&ip.profile)?) } else { None };
    let (gt, good_turing, stats) = match a.t {
        Some(t) => {
            let (loo, loo_stats) = leave_one_out_min(&path, &gauge, backend)?;
            let gt_value = loo.iter().filter(|&&m| m > t).count() as f64 / loo.len() as f64;
            let stats = SearchStats {
                query_evals: ip.stats.query_evals + loo_stats.query_evals,
                build_evals: ip.stats.build_evals + loo_stats.build_evals,
            };
            (Some(missing_mass_gt(&ip.profile, t)?), Some(gt_value), stats)
        }
        None => (None, None, ip.stats),
    };
    let report = EstimateReport {
        command: "estimate",
        config: EstimateConfig {
            input: a.input.display().to_string(),
            gauge,
            tau: a.tau,
            t: a.t,
            alpha: a.alpha,
            backend,
        },
        n: path.len(),
        exceptions: b.len(),
        g,
        gt,
        good_turing,
        stats,
        profile: a.dump_profile.then_some(ip.profile),
    };
    write_json(&report, a.out.as_deref())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BoundConfig {
    kind: BoundKindArg,
    estimate: Option<f64>,
    input: Option<String>,
    n: usize,
    tau: usize,
    delta: f64,
    t: Option<f64>,
    alpha: Option<f64>,
    mixing: Option<MixingProfile>,
    class: ClassBounds,
}

#[derive(Serialize)]
struct BoundOutput {
    command: &'static str,
    config: BoundConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_case: Option<f64>,
}

fn cmd_bound(a: &BoundArgs) -> Result<()> {
    let class = ClassBounds { sup_f: a.sup_f, sup_g: a.sup_g };
    let (estimate, n) = match (&a.input, a.estimate) {
        (Some(_), Some(_)) => return arg_err("give either --estimate or --in, not both"),
        (Some(input), None) => {
            let gauge = parse_gauge(&a.gauge)?;
            gauge.validate()?;
            let path = read_path(input, a.format)?;
            validate_tau(a.tau, path.len())?;
            let b = ExceptionSet::empty(path.len() - a.tau);
            let ip = prefix_min_indexed(&path, &gauge, a.tau, &b, a.backend.into())?;
            let value = match a.kind {
                BoundKindArg::Excess => {
                    let Some(t) = a.t else { return arg_err("--kind excess needs --t") };
                    missing_mass_gt(&ip.profile, t)?
                }
                _ => missing_mass_g(&ip.profile)?,
            };
            (Some(value), path.len())
        }
        (None, est) => match a.n {
            Some(n) => (est, n),
            None => return arg_err("--n is required without --in"),
        },
    };
    let mixing = if a.kind == BoundKindArg::WorstCase {
        None
    } else {
        Some(match &a.process {
            Some(spec) => {
                if a.phi_tau.is_some() || a.alpha_tau.is_some() {
                    return arg_err("give either --process or --phi-tau/--alpha-tau");
                }
                mixing_bounds(&ProcessSpec::new(parse_process(spec)?, 0), a.tau)?
            }
            None => {
                let phi = a.phi_tau.unwrap_or(0.0);
                MixingProfile::declared(a.tau, phi, a.alpha_tau.unwrap_or(phi))?
            }
        })
    };
    let need_estimate = || estimate.ok_or_else(|| CliError::Arg(ArgError("--estimate or --in is required".into())));
    let variant = match a.variant {
        VariantArg::Martingale => ConcentrationVariant::Martingale,
        VariantArg::Azuma => ConcentrationVariant::Azuma,
    };
    let (report, worst_case) = match a.kind {
        BoundKindArg::Excess => (
            Some(excess_loss_probability_bound(need_estimate()?, mixing.as_ref().expect("mixing"), n, a.delta)?),
            None,
        ),
        BoundKindArg::Risk => (
            Some(risk_bound(need_estimate()?, &class, mixing.as_ref().expect("mixing"), n, a.delta, variant)?),
            None,
        ),
        BoundKindArg::Corollary => {
            let Some(alpha) = a.alpha else { return arg_err("--kind corollary needs --alpha") };
            (
                Some(corollary_bound(need_estimate()?, &class, mixing.as_ref().expect("mixing"), n, a.delta, alpha)?),
                None,
            )
        }
        BoundKindArg::WorstCase => {
            let (Some(cover), Some(t)) = (a.cover, a.t) else {
                return arg_err("--kind worst-case needs --cover and --t");
            };
            (None, Some(theorem3_worst_case(cover, n, a.tau, t, a.alpha.unwrap_or(0.0))?))
        }
    };
    let out = BoundOutput {
        command: "bound",
        config: BoundConfig {
            kind: a.kind,
            estimate,
            input: a.input.as_ref().map(|p| p.display().to_string()),
            n,
            tau: a.tau,
            delta: a.delta,
            t: a.t,
            alpha: a.alpha,
            mixing,
            class,
        },
        report,
        worst_case,
    };
    write_json(&out, a.out.as_deref())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(untagged)]
enum ValidateConfig {
    Lemma1(Lemma1Config),
    Theorem1(Theorem1Config),
    GoodTuring { symbols: u64, n: usize, threshold: f64, trials: usize, seed: u64 },
}

#[derive(Serialize)]
#[serde(untagged)]
enum ValidateResult {
    Trials(TrialReport),
    GoodTuring(GoodTuringReport),
}

#[derive(Serialize)]
struct ValidateOutput {
    command: &'static str,
    validator: ValidatorArg,
    config: ValidateConfig,
    report: ValidateResult,
}

fn cmd_validate(a: &ValidateArgs) -> Result<()> {
    let (config, report) = match a.validator {
        ValidatorArg::Lemma1 => {
            let chain: BernoulliChain = parse_chain(&a.chain)?;
            let cfg = Lemma1Config {
                chain,
                n: a.n,
                delta: a.delta,
                trials: a.trials,
                seed: derive(a.seed, "lemma1", 0),
            };
            let r = validate_lemma1(&cfg)?;
            (ValidateConfig::Lemma1(cfg), ValidateResult::Trials(r))
        }
        ValidatorArg::Theorem1 => {
            let Some(process) = &a.process else { return arg_err("--validator theorem1 needs --process") };
            let GaugeSpec::Lipschitz { l, metric } = parse_gauge(&a.gauge)? else {
                return arg_err("--validator theorem1 needs a lipschitz gauge");
            };
            let (Some(tau), Some(t)) = (a.tau, a.t) else { return arg_err("--validator theorem1 needs --tau and --t") };
            let cfg = Theorem1Config {
                process: ProcessSpec::new(parse_process(process)?, derive(a.seed, "theorem1", 0)),
                embedding: parse_embedding(&a.embedding)?,
                l,
                metric,
                t,
                tau,
                n: a.n,
                delta: a.delta,
                trials: a.trials,
                mc_fresh: a.mc_fresh,
            };
            let r = validate_theorem1_lipschitz(&cfg)?;
            (ValidateConfig::Theorem1(cfg), ValidateResult::Trials(r))
        }
        ValidatorArg::GoodTuring => {
            let threshold = a.t.unwrap_or(0.5);
            let seed = derive(a.seed, "good_turing", 0);
            let pi = FiniteDistribution::uniform_symbols(a.symbols)?;
            let r = validate_good_turing(&pi, a.n, threshold, a.trials, seed)?;
            (
                ValidateConfig::GoodTuring { symbols: a.symbols, n: a.n, threshold, trials: a.trials, seed },
                ValidateResult::GoodTuring(r),
            )
        }
    };
    write_json(&ValidateOutput { command: "validate", validator: a.validator, config, report }, a.out.as_deref())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct StudyOutput<'a> {
    command: &'static str,
    config: &'a DecayConfig,
    study: &'a DecayStudy,
}

fn real(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn cmd_study(a: &StudyArgs) -> Result<()> {
    let process = parse_process(&a.process)?;
    let embedding = parse_embedding(&a.embedding)?;
    let gauge = parse_gauge(&a.gauge)?;
    let sizes: Vec<usize> = parse_list("sizes", &a.sizes)?;
    let p_list: Vec<f64> = match &a.p_list {
        Some(text) => parse_list("p-list", text)?,
        None => vec![process.reset_probability()],
    };
    if a.seeds == 0 {
        return arg_err("--seeds must be at least 1");
    }
    if a.format == Format::Bin {
        return arg_err("study output is csv or json");
    }
    let tau = match a.tau {
        Some(tau) => TauRule::Fixed { tau },
        None => TauRule::ResetTv { eps: a.tau_eps },
    };
    let cfg = DecayConfig {
        process,
        embedding,
        gauge,
        tau,
        sizes,
        p_list,
        seeds: (0..a.seeds as u64).map(|i| derive(a.seed, "study", i)).collect(),
        backend: a.backend.into(),
    };
    // Surface parameter errors before any simulation.
    embedding.validate()?;
    gauge.validate()?;
    for &p in &cfg.p_list {
        process.with_reset(p).validate()?;
        cfg.tau.tau_for(p)?;
    }
    let study = decay_study(&cfg)?;
    for s in &study.skipped {
        eprintln!("notice: skipping n={} for p={} (n <= tau={})", s.n, s.p, s.tau);
    }

    match a.format {
        Format::Json => write_json(&StudyOutput { command: "study", config: &cfg, study: &study }, a.out.as_deref())?,
        _ => {
            let mut w = open_out(a.out.as_deref())?;
            writeln!(w, "p,n,tau,mean_g,std_g,tau_over_n")?;
            for r in &study.rows {
                writeln!(w, "{},{},{},{},{},{}", r.p, r.n, r.tau, real(r.mean_g), real(r.std_g), real(r.tau_over_n))?;
            }
            w.flush()?;
        }
    }
    if let Some(long) = &a.long_out {
        let mut w = open_out(Some(long))?;
        writeln!(w, "p,n,ln_n,series,value")?;
        for r in &study.rows {
            let ln_n = (r.n as f64).ln();
            writeln!(w, "{},{},{},ln_g,{}", r.p, r.n, real(ln_n), real(r.mean_g.ln()))?;
            writeln!(w, "{},{},{},ln_tau_over_n,{}", r.p, r.n, real(ln_n), real(r.tau_over_n.ln()))?;
        }
        w.flush()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return arg_err("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Arg(ArgError(e.to_string())))?;
    }
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Study(a) => cmd_study(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({ "error": { "kind": e.kind(), "message": e.message() } });
            eprintln!("{doc}");
            ExitCode::from(1)
        }
    }
}
