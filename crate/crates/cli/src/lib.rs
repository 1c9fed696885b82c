//! Argument parsing and subcommand execution for the `demseq` binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use demseq_core::diagnostics::{
    audit_run, convergence_report, deviation_trace, geometric_checkpoints, LedgerSampling,
};
use demseq_core::io::{parse_partition, parse_weights, write_jsonl, ParseError};
use demseq_core::numeration::{verify_equivalence, BaseSpec, Geometric};
use demseq_core::scalar::{render_ratio, FLOAT_SUM_TOLERANCE};
use demseq_core::torus::{self, beta, BetaWitness};
use demseq_core::{
    generate, FrequencySpec, LazyWeights, LetterId, Mode, Rational, Scalar, ScheduleError,
    SpecError, TorusError,
};
use num_traits::One;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// `--help` / `--version` text; not an error for the exit code.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Certification(String),
    #[error("{0}")]
    Precision(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Other(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Mismatch(_) => 3,
            CliError::Certification(_) => 4,
            CliError::Precision(_) => 5,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<TorusError> for CliError {
    fn from(e: TorusError) -> Self {
        match e {
            TorusError::PrecisionExhausted { .. } => CliError::Precision(e.to_string()),
            TorusError::ImageTooShort { .. } | TorusError::MembershipBreak { .. } => {
                CliError::Certification(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "demseq", version, about = "Democratic sequences: generation, diagnostics, numeration and beta certification")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Generate a sequence as JSON lines.
    Gen(CommonArgs),
    /// Deviation trace and convergence report.
    Diag(CommonArgs),
    /// Compare democratic, counter and substitution words for an integer base.
    Numer(CommonArgs),
    /// Construct and certify β for a cell plan on the torus.
    Beta(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Weights file, one weight per line (decimal or p/q)
    #[arg(long, value_name = "FILE", group = "source")]
    weights: Option<PathBuf>,
    /// Geometric frequencies (1-1/B)·B^(1-n) for integer base B
    #[arg(long, value_name = "B", visible_alias = "base", group = "source")]
    geometric: Option<u64>,
    /// Partition file with lines `lo hi mass`
    #[arg(long, value_name = "FILE", group = "source")]
    partition: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    terms: usize,
    #[arg(long)]
    mode: Option<Mode>,
    /// Prefix tokens, `J` or letter labels, separated by commas or spaces
    #[arg(long, value_name = "TOKENS", allow_hyphen_values = true)]
    prefix: Option<String>,
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    #[arg(long, value_name = "R", default_value_t = 10.0)]
    checkpoint_ratio: f64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Add a timestamp line to reports
    #[arg(long)]
    stamp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Gen,
    Diag,
    Numer,
    Beta,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecSource {
    Weights(PathBuf),
    Geometric(u64),
    Partition(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixToken {
    Joker,
    Label(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: SpecSource,
    pub terms: usize,
    pub mode: Mode,
    pub prefix: Vec<PrefixToken>,
    pub trace: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub checkpoint_ratio: f64,
    pub stamp: bool,
}

fn parse_prefix(text: &str) -> Result<Vec<PrefixToken>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "J" | "j" => Ok(PrefixToken::Joker),
            _ => match t.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(PrefixToken::Label(n)),
                _ => Err(CliError::Usage(format!(
                    "--prefix: `{t}` is neither J nor a positive letter label"
                ))),
            },
        })
        .collect()
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("demseq"))
        .chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;

    let (command, args) = match cli.command {
        CommandArgs::Gen(a) => (Command::Gen, a),
        CommandArgs::Diag(a) => (Command::Diag, a),
        CommandArgs::Numer(a) => (Command::Numer, a),
        CommandArgs::Beta(a) => (Command::Beta, a),
    };
    let source = match (args.weights, args.geometric, args.partition) {
        (Some(p), None, None) => SpecSource::Weights(p),
        (None, Some(b), None) => SpecSource::Geometric(b),
        (None, None, Some(p)) => SpecSource::Partition(p),
        _ => {
            return Err(CliError::Usage(
                "one of --weights, --geometric or --partition is required".into(),
            ))
        }
    };
    match (command, &source) {
        (Command::Numer, SpecSource::Geometric(_)) => {}
        (Command::Numer, _) => return Err(CliError::Usage("numer needs --base B".into())),
        (Command::Beta, SpecSource::Partition(_)) => {}
        (Command::Beta, _) => return Err(CliError::Usage("beta needs --partition FILE".into())),
        (_, SpecSource::Partition(_)) => {
            return Err(CliError::Usage("--partition is only valid for beta".into()))
        }
        _ => {}
    }
    if args.terms == 0 {
        return Err(CliError::Usage("--terms must be at least 1".into()));
    }
    if args.checkpoint_ratio.is_nan() || args.checkpoint_ratio <= 1.0 {
        return Err(CliError::Usage("--checkpoint-ratio must exceed 1".into()));
    }
    let mode = args.mode.unwrap_or(match command {
        Command::Gen => Mode::Float,
        _ => Mode::Exact,
    });
    let prefix = match &args.prefix {
        Some(text) => parse_prefix(text)?,
        None => Vec::new(),
    };
    if !prefix.is_empty() && matches!(command, Command::Numer | Command::Beta) {
        return Err(CliError::Usage("--prefix is only valid for gen and diag".into()));
    }
    Ok(RunConfig {
        command,
        source,
        terms: args.terms,
        mode,
        prefix,
        trace: args.trace,
        out: args.out,
        checkpoint_ratio: args.checkpoint_ratio,
        stamp: args.stamp,
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

fn create_file(path: &Path) -> Result<io::BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(io::BufWriter::new)
        .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

fn stamp_line() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("stamp unix={secs}")
}

/// Weights are validated as exact rationals first; float mode then accepts
/// a residual within the float tolerance.
fn weights_spec<S: Scalar>(path: &Path) -> Result<FrequencySpec<S>, CliError> {
    let weights = parse_weights(&read_file(path)?)?;
    let residual = Rational::one() - weights.iter().sum::<Rational>();
    let ok = match S::MODE {
        Mode::Exact => residual == Rational::from_integer(0.into()),
        Mode::Float => Scalar::to_f64(&residual).abs() <= FLOAT_SUM_TOLERANCE,
    };
    if !ok {
        return Err(SpecError::SumNotOne {
            residual: render_ratio(&residual),
        }
        .into());
    }
    Ok(FrequencySpec::finite(weights.iter().map(S::from_rational).collect())?)
}

fn build_spec<S: Scalar>(source: &SpecSource) -> Result<FrequencySpec<S>, CliError>
where
    Geometric: LazyWeights<S>,
{
    match source {
        SpecSource::Weights(path) => weights_spec(path),
        SpecSource::Geometric(b) => {
            let base = BaseSpec::new(*b).map_err(|e| CliError::Usage(format!("--geometric: {e}")))?;
            Ok(FrequencySpec::lazy(Arc::new(Geometric::new(base)))?)
        }
        SpecSource::Partition(_) => Err(CliError::Usage("--partition is only valid for beta".into())),
    }
}

fn resolve_prefix<S: Scalar>(
    spec: &FrequencySpec<S>,
    tokens: &[PrefixToken],
) -> Result<Vec<LetterId>, CliError> {
    tokens
        .iter()
        .map(|t| match *t {
            PrefixToken::Joker => Ok(LetterId::JOKER),
            PrefixToken::Label(l) => spec
                .index_of_label(l)
                .filter(|&i| spec.contains(i))
                .map(LetterId::new)
                .ok_or_else(|| CliError::Other(ScheduleError::UnknownLetter { index: l }.to_string())),
        })
        .collect()
}

/// Runs a parsed configuration, writing reports to `stdout`.
pub fn run<W: Write>(cfg: &RunConfig, stdout: &mut W) -> Result<(), CliError> {
    match (cfg.command, cfg.mode) {
        (Command::Gen, Mode::Exact) => run_gen::<Rational, _>(cfg, stdout),
        (Command::Gen, Mode::Float) => run_gen::<f64, _>(cfg, stdout),
        (Command::Diag, Mode::Exact) => run_diag::<Rational, _>(cfg, stdout),
        (Command::Diag, Mode::Float) => run_diag::<f64, _>(cfg, stdout),
        (Command::Numer, Mode::Exact) => run_numer::<Rational, _>(cfg, stdout),
        (Command::Numer, Mode::Float) => run_numer::<f64, _>(cfg, stdout),
        (Command::Beta, _) => run_beta(cfg, stdout),
    }
}

fn write_trace<S: Scalar, W: Write>(
    seq: &demseq_core::Sequence<S>,
    ratio: f64,
    out: W,
) -> Result<(), CliError> {
    let checkpoints = geometric_checkpoints(seq.len(), ratio);
    let trace = deviation_trace(seq, &checkpoints, &[]).map_err(|e| CliError::Other(e.to_string()))?;
    trace
        .write_csv(out)
        .map_err(|e| CliError::Other(e.to_string()))
}

fn run_gen<S: Scalar, W: Write>(cfg: &RunConfig, stdout: &mut W) -> Result<(), CliError>
where
    Geometric: LazyWeights<S>,
{
    let spec = build_spec::<S>(&cfg.source)?;
    let prefix = resolve_prefix(&spec, &cfg.prefix)?;
    let seq = generate(&spec, &prefix, cfg.terms)?;
    match &cfg.out {
        Some(path) => write_jsonl(create_file(path)?, &seq.labels())?,
        None => write_jsonl(&mut *stdout, &seq.labels())?,
    }
    if let Some(path) = &cfg.trace {
        write_trace(&seq, cfg.checkpoint_ratio, create_file(path)?)?;
    }
    if cfg.stamp {
        eprintln!("{}", stamp_line());
    }
    Ok(())
}

fn run_diag<S: Scalar, W: Write>(cfg: &RunConfig, stdout: &mut W) -> Result<(), CliError>
where
    Geometric: LazyWeights<S>,
{
    let spec = build_spec::<S>(&cfg.source)?;
    let prefix = resolve_prefix(&spec, &cfg.prefix)?;
    let seq = generate(&spec, &prefix, cfg.terms)?;
    let checkpoints = geometric_checkpoints(seq.len(), cfg.checkpoint_ratio);
    let trace = deviation_trace(&seq, &checkpoints, &[]).map_err(|e| CliError::Other(e.to_string()))?;
    match cfg.trace.as_ref().or(cfg.out.as_ref()) {
        Some(path) => trace.write_csv(create_file(path)?),
        None => trace.write_csv(&mut *stdout),
    }
    .map_err(|e| CliError::Other(e.to_string()))?;

    if cfg.stamp {
        writeln!(stdout, "{}", stamp_line())?;
    }
    if let Some(last) = trace.points.last() {
        writeln!(
            stdout,
            "mode={} N={} max_abs_deviation={}",
            cfg.mode,
            last.n,
            last.max_abs_deviation.render()
        )?;
    }
    match convergence_report(&trace) {
        Ok(report) => writeln!(stdout, "{report}")?,
        Err(e) => writeln!(stdout, "no rate estimate: {e}")?,
    }
    let audit = audit_run(&spec, &prefix, cfg.terms, LedgerSampling::Checkpoints(cfg.checkpoint_ratio))?;
    writeln!(
        stdout,
        "audit steps={} ledgers={} violations conservation={} increment={} cap={} ledger={} selection={}",
        audit.steps_checked,
        audit.ledgers_checked,
        audit.conservation_violations,
        audit.increment_violations,
        audit.cap_violations,
        audit.ledger_violations,
        audit.selection_violations
    )?;
    Ok(())
}

fn run_numer<S: Scalar, W: Write>(cfg: &RunConfig, stdout: &mut W) -> Result<(), CliError>
where
    Geometric: LazyWeights<S>,
{
    let SpecSource::Geometric(b) = cfg.source else {
        return Err(CliError::Usage("numer needs --base B".into()));
    };
    let base = BaseSpec::new(b).map_err(|e| CliError::Usage(format!("--base: {e}")))?;
    let report = verify_equivalence::<S>(base, cfg.terms).map_err(|e| CliError::Other(e.to_string()))?;
    writeln!(stdout, "{report}")?;
    if report.is_equal() {
        Ok(())
    } else {
        Err(CliError::Mismatch(report.to_string()))
    }
}

fn run_beta<W: Write>(cfg: &RunConfig, stdout: &mut W) -> Result<(), CliError> {
    let SpecSource::Partition(path) = &cfg.source else {
        return Err(CliError::Usage("beta needs --partition FILE".into()));
    };
    let ms = parse_partition(&read_file(path)?)?;
    let (plan, _) = torus::cell_sequence::<Rational>(&ms, cfg.terms)?;
    let c_min = ms.partition().min_length();
    let witness: BetaWitness = torus::construct_beta(&plan.intervals(ms.partition()), &c_min)?;

    let json = serde_json::to_string_pretty(&witness.to_json())
        .map_err(|e| CliError::Other(e.to_string()))?;
    // with no --out the witness takes stdout and the report moves to stderr
    let mut err = io::stderr();
    let report: &mut dyn Write = match &cfg.out {
        Some(out) => {
            let mut f = create_file(out)?;
            writeln!(f, "{json}")?;
            f.flush()?;
            stdout
        }
        None => {
            writeln!(stdout, "{json}")?;
            &mut err
        }
    };

    if cfg.stamp {
        writeln!(report, "{}", stamp_line())?;
    }
    writeln!(
        report,
        "B={} N={} precision_bits={} beta~{:.17}",
        beta::start_integer(&c_min),
        witness.horizon(),
        witness.precision_bits,
        beta::beta_estimate(&witness)
    )?;
    let cert = torus::certify(&witness);
    if let Some(m) = cert.failing_m {
        writeln!(report, "certification FAILED at m={m}")?;
        return Err(CliError::Certification(format!("certification failed at m={m}")));
    }
    writeln!(report, "certified m=1..={}", cert.checked)?;
    let emp = torus::empirical_measure(&witness, &ms, &plan)?;
    let freqs: Vec<String> = emp.frequencies.iter().map(render_ratio).collect();
    writeln!(
        report,
        "membership certified={} horizon={} frequencies={} max_deviation={}",
        emp.certified,
        emp.horizon,
        freqs.join(","),
        render_ratio(&emp.max_deviation())
    )?;
    Ok(())
}
