//! The `finitum` command line.
//!
//! Exit status is 0 on success, 1 when a computation rejects its input (the
//! error's name is printed), and 2 for malformed invocations.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use finitum_core::budget::{self, BudgetError};
use finitum_core::calc::{self, Bindings, ModelError};
use finitum_core::certified::{sci_ceil, CertifyError, DEFAULT_PRECISION_BITS};
use finitum_core::closure::{ChainMode, ClosureError, ClosureOptions, DEFAULT_LIMIT};
use finitum_core::divergence::{self, DivergenceError, PartitionSpec};
use finitum_core::entropy::EntropyError;
use finitum_core::indexing::{self, IndexError, ResultSet};
use finitum_core::rational::RoundMode;
use finitum_core::{
    BudgetSpec, CalcError, CertifiedReal, Distribution, JointDistribution, OutcomeModel, Rational,
    Tolerance,
};

pub const PRECISION_ENV: &str = "FINITUM_PRECISION_BITS";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "finitum",
    version,
    about = "Exact rational closure, certified entropy and bounded calculation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the values reachable from seeds by n elementary combinations.
    Closure(ClosureArgs),
    /// Certified entropy of a distribution file.
    Entropy(EntropyArgs),
    /// Certified information quantity of a joint distribution file.
    Information(EntropyArgs),
    /// Entropy growth of finer and finer discretizations.
    Diverge(DivergeArgs),
    /// Outcome count and capacity of a finite measurement.
    Budget(BudgetArgs),
    /// Index labels read one per line.
    Index(IndexArgs),
    /// Evaluate an expression or validate an outcome model.
    Calc(CalcArgs),
}

#[derive(Debug, Args)]
struct ClosureArgs {
    /// Seed value (repeatable), e.g. 1 or 2/3.
    #[arg(long = "seed", required = true, value_parser = parse_rational)]
    seeds: Vec<Rational>,
    /// Number of combination steps.
    #[arg(long)]
    n: usize,
    /// Largest admissible level cardinality.
    #[arg(long, default_value_t = DEFAULT_LIMIT, conflicts_with = "no_limit")]
    limit: usize,
    #[arg(long)]
    no_limit: bool,
    /// Only combine with the seeds at each step.
    #[arg(long)]
    chain_strict: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Print every level instead of only the last.
    #[arg(long)]
    all_levels: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    file: PathBuf,
    #[arg(long, default_value = "1e-12", value_parser = parse_rational)]
    tol: Rational,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("what").required(true).args(["threshold", "table"]))]
struct DivergeArgs {
    /// Probability mass of the discretized interval, at most 5/14.
    #[arg(long, default_value = "1/4", value_parser = parse_rational)]
    mass: Rational,
    #[arg(long, default_value = "0", value_parser = parse_rational)]
    a: Rational,
    #[arg(long, default_value = "1", value_parser = parse_rational)]
    b: Rational,
    /// Find the smallest n = 2^k whose entropy bound exceeds this value.
    #[arg(long, value_parser = parse_rational)]
    threshold: Option<Rational>,
    /// CSV rows for n = 2^k, k in K0:K1.
    #[arg(long, value_parser = parse_range)]
    table: Option<(u32, u32)>,
    #[arg(long, default_value = "1e-12", value_parser = parse_rational)]
    tol: Rational,
    /// Decimal places in CSV output.
    #[arg(long, default_value_t = 15)]
    digits: usize,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Dimensionless,
    Physical,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Free energy (units of hbar per second in dimensionless mode).
    #[arg(long, value_parser = parse_rational)]
    energy: Rational,
    /// Measurement time in seconds.
    #[arg(long, value_parser = parse_rational)]
    time: Rational,
    #[arg(long, default_value_t = 1)]
    sensors: u64,
    /// Distinguishable duration classes.
    #[arg(long, default_value_t = 1)]
    durations: u64,
    /// Exact hbar, physical mode only.
    #[arg(long, value_parser = parse_rational)]
    hbar: Option<Rational>,
    #[arg(long, value_enum, default_value_t = Mode::Dimensionless)]
    mode: Mode,
    /// Also list every sensor assignment if there are at most this many.
    #[arg(long)]
    enumerate: Option<usize>,
    #[arg(long, default_value = "1e-12", value_parser = parse_rational)]
    tol: Rational,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct IndexArgs {
    /// Label file; standard input when absent.
    file: Option<PathBuf>,
    #[arg(long)]
    symmetric: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("program").required(true).args(["expr", "model"]))]
struct CalcArgs {
    expr: Option<String>,
    /// Outcome model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Variable binding name=value (repeatable).
    #[arg(long = "bind", value_parser = parse_binding)]
    bindings: Vec<(String, Rational)>,
    /// Model inputs x1,x2,... (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    x: Vec<Rational>,
    /// Maximum number of elementary combinations.
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or("expected K0:K1")?;
    let a: u32 = a.parse().map_err(|e| format!("{e}"))?;
    let b: u32 = b.parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok((a, b))
}

fn parse_binding(s: &str) -> Result<(String, Rational), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    Ok((name.trim().to_string(), parse_rational(value)?))
}

/// A failure, reported as either a usage problem or a named domain error.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain { name: &'static str, message: String },
}

impl Failure {
    fn domain(name: &'static str, message: impl ToString) -> Self {
        Failure::Domain {
            name,
            message: message.to_string(),
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::domain(e.name(), &e)
            }
        }
    )*};
}

domain_from!(
    ClosureError,
    EntropyError,
    DivergenceError,
    BudgetError,
    IndexError,
    CalcError,
    ModelError
);

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::domain("IoError", e)
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// JSON form of a certified value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: String,
    pub hi: String,
    pub midpoint: String,
    pub radius: String,
}

impl From<&CertifiedReal> for Enclosure {
    fn from(c: &CertifiedReal) -> Self {
        Enclosure {
            lo: c.lo().to_hex(),
            hi: c.hi().to_hex(),
            midpoint: c.midpoint().to_decimal_trimmed(20, RoundMode::Nearest),
            radius: sci_ceil(&c.radius()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyOutput {
    pub format_version: u32,
    pub tolerance: Rational,
    pub entropy_bits: Enclosure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformationOutput {
    pub format_version: u32,
    pub tolerance: Rational,
    pub entropy_bits: Enclosure,
    pub conditional_entropy_bits: Enclosure,
    pub information_bits: Enclosure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessOutput {
    pub format_version: u32,
    pub mass: Rational,
    pub threshold: Rational,
    pub k: u32,
    pub n: String,
    pub bound_bits: Enclosure,
    pub partial_sum_bits: Enclosure,
    pub entropy_bits: Enclosure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetOutput {
    pub format_version: u32,
    pub mode: String,
    pub hbar: Rational,
    pub min_photon_energy: Rational,
    pub max_photons: String,
    pub distinguishable_levels: String,
    pub outcome_count: String,
    pub capacity_bits: Enclosure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub index: i64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexOutput {
    pub format_version: u32,
    pub layout: String,
    pub entries: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalcOutput {
    pub format_version: u32,
    pub value: Rational,
    pub ops_used: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub format_version: u32,
    pub outcomes: Vec<finitum_core::ValidatedOutcome>,
}

struct Context<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    precision_bits: u32,
}

impl Context<'_> {
    fn tolerance(&self, tol: &Rational) -> Result<Tolerance, Failure> {
        Ok(Tolerance::new(tol.clone())?.with_start_bits(self.precision_bits)?)
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::domain("IoError", format!("{}: {e}", path.display())))
}

fn precision_from_env(value: Option<String>) -> Result<u32, Failure> {
    match value {
        None => Ok(DEFAULT_PRECISION_BITS),
        Some(v) => match v.trim().parse::<u32>() {
            Ok(bits) if bits >= 8 => Ok(bits),
            _ => Err(Failure::Usage(format!(
                "{PRECISION_ENV} must be an integer >= 8, got {v:?}"
            ))),
        },
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_precision(
        args,
        std::env::var(PRECISION_ENV).ok(),
        stdin,
        stdout,
        stderr,
    )
}

/// [`run`] with the precision override given explicitly instead of read from
/// the environment.
pub fn run_with_precision<I, T>(
    args: I,
    precision: Option<String>,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    let result = precision_from_env(precision).and_then(|precision_bits| {
        let mut ctx = Context {
            stdin,
            out: stdout,
            precision_bits,
        };
        dispatch(cli.command, &mut ctx)
    });
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Domain { name, message }) => {
            let _ = writeln!(stderr, "error: {name}: {message}");
            1
        }
    }
}

fn dispatch(command: Command, ctx: &mut Context<'_>) -> Result<(), Failure> {
    match command {
        Command::Closure(a) => closure_cmd(a, ctx),
        Command::Entropy(a) => entropy_cmd(a, ctx),
        Command::Information(a) => information_cmd(a, ctx),
        Command::Diverge(a) => diverge_cmd(a, ctx),
        Command::Budget(a) => budget_cmd(a, ctx),
        Command::Index(a) => index_cmd(a, ctx),
        Command::Calc(a) => calc_cmd(a, ctx),
    }
}

fn closure_cmd(a: ClosureArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let opts = ClosureOptions {
        limit: (!a.no_limit).then_some(a.limit),
        workers: a.workers,
        mode: if a.chain_strict {
            ChainMode::ChainStrict
        } else {
            ChainMode::Pairwise
        },
    };
    let cs = finitum_core::enumerate_closure(&a.seeds, a.n, &opts)?;
    match a.format {
        Format::Json => write!(ctx.out, "{}", to_json(&cs.to_export()))?,
        Format::Human if a.all_levels => {
            for k in 0..=cs.depth() {
                write!(ctx.out, "{}", cs.to_text(k))?;
            }
        }
        Format::Human => write!(ctx.out, "{}", cs.to_text(cs.depth()))?,
    }
    Ok(())
}

fn entropy_cmd(a: EntropyArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let d = Distribution::from_json(&read_file(&a.file)?)?;
    let tol = ctx.tolerance(&a.tol)?;
    let h = finitum_core::entropy(&d, &tol);
    match a.format {
        Format::Json => {
            let out = EntropyOutput {
                format_version: FORMAT_VERSION,
                tolerance: a.tol,
                entropy_bits: (&h).into(),
            };
            write!(ctx.out, "{}", to_json(&out))?;
        }
        Format::Human => write_enclosure(ctx.out, "entropy_bits", &h)?,
    }
    Ok(())
}

fn information_cmd(a: EntropyArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let j = JointDistribution::from_json(&read_file(&a.file)?)?;
    let tol = ctx.tolerance(&a.tol)?;
    let h = finitum_core::entropy(&j.col_marginal(), &tol);
    let hc = finitum_core::conditional_entropy(&j, &tol);
    let i = finitum_core::information(&j, &tol);
    match a.format {
        Format::Json => {
            let out = InformationOutput {
                format_version: FORMAT_VERSION,
                tolerance: a.tol,
                entropy_bits: (&h).into(),
                conditional_entropy_bits: (&hc).into(),
                information_bits: (&i).into(),
            };
            write!(ctx.out, "{}", to_json(&out))?;
        }
        Format::Human => {
            write_enclosure(ctx.out, "entropy_bits", &h)?;
            write_enclosure(ctx.out, "conditional_entropy_bits", &hc)?;
            write_enclosure(ctx.out, "information_bits", &i)?;
        }
    }
    Ok(())
}

fn write_enclosure(out: &mut dyn Write, name: &str, c: &CertifiedReal) -> std::io::Result<()> {
    writeln!(out, "{name} {}", c.to_human())?;
    writeln!(out, "{name}_lo {}", c.lo().to_hex())?;
    writeln!(out, "{name}_hi {}", c.hi().to_hex())
}

fn diverge_cmd(a: DivergeArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let tol = ctx.tolerance(&a.tol)?;
    if let Some((k0, k1)) = a.table {
        let rows = divergence::divergence_table(&a.mass, k0..=k1, &tol)?;
        write!(ctx.out, "{}", divergence::table_csv(&rows, a.digits))?;
        return Ok(());
    }
    let threshold = a.threshold.expect("clap enforces threshold or table");
    let spec = PartitionSpec::new(a.a, a.b, 2, a.mass.clone())?;
    let w = divergence::verify_divergence(&spec, &threshold)?;
    match a.format {
        Format::Json => {
            let out = WitnessOutput {
                format_version: FORMAT_VERSION,
                mass: a.mass,
                threshold,
                k: w.k,
                n: w.n.to_string(),
                bound_bits: (&w.bound).into(),
                partial_sum_bits: (&w.partial_sum).into(),
                entropy_bits: (&w.entropy).into(),
            };
            write!(ctx.out, "{}", to_json(&out))?;
        }
        Format::Human => {
            writeln!(ctx.out, "n 2^{} = {}", w.k, w.n)?;
            write_enclosure(ctx.out, "bound_bits", &w.bound)?;
            write_enclosure(ctx.out, "partial_sum_bits", &w.partial_sum)?;
            write_enclosure(ctx.out, "entropy_bits", &w.entropy)?;
        }
    }
    Ok(())
}

fn budget_cmd(a: BudgetArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let spec = match (a.mode, a.hbar) {
        (Mode::Dimensionless, None) => {
            BudgetSpec::dimensionless(a.energy, a.time, a.sensors, a.durations)?
        }
        (Mode::Dimensionless, Some(_)) => {
            return Err(Failure::Usage("--hbar requires --mode physical".into()))
        }
        (Mode::Physical, Some(hbar)) => {
            BudgetSpec::physical(a.energy, a.time, a.sensors, a.durations, hbar)?
        }
        (Mode::Physical, None) => {
            return Err(Failure::Usage("--mode physical requires --hbar".into()))
        }
    };
    let tol = ctx.tolerance(&a.tol)?;
    let report = finitum_core::compute_budget(&spec, &tol);
    let outcomes = match a.enumerate {
        Some(cap) => Some(budget::enumerate_outcomes(&spec, cap)?),
        None => None,
    };
    match a.format {
        Format::Json => {
            let out = BudgetOutput {
                format_version: FORMAT_VERSION,
                mode: match a.mode {
                    Mode::Dimensionless => "dimensionless".into(),
                    Mode::Physical => "physical".into(),
                },
                hbar: spec.hbar().clone(),
                min_photon_energy: report.min_photon_energy.clone(),
                max_photons: report.max_photons.to_string(),
                distinguishable_levels: report.distinguishable_levels.to_string(),
                outcome_count: report.outcome_count.to_string(),
                capacity_bits: (&report.capacity_bits).into(),
                outcomes,
            };
            write!(ctx.out, "{}", to_json(&out))?;
        }
        Format::Human => {
            writeln!(ctx.out, "min_photon_energy {}", report.min_photon_energy)?;
            writeln!(ctx.out, "max_photons {}", report.max_photons)?;
            writeln!(
                ctx.out,
                "distinguishable_levels {}",
                report.distinguishable_levels
            )?;
            writeln!(ctx.out, "outcome_count {}", report.outcome_count)?;
            write_enclosure(ctx.out, "capacity_bits", &report.capacity_bits)?;
            for o in outcomes.iter().flatten() {
                let cells: Vec<String> = o.iter().map(u64::to_string).collect();
                writeln!(ctx.out, "outcome {}", cells.join(" "))?;
            }
        }
    }
    Ok(())
}

fn index_cmd(a: IndexArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    let text = match &a.file {
        Some(path) => read_file(path)?,
        None => {
            let mut s = String::new();
            ctx.stdin.read_to_string(&mut s)?;
            s
        }
    };
    let labels: Vec<String> = text.lines().map(str::to_string).collect();
    let rs = ResultSet::new(labels)?;
    let entries: Vec<IndexEntry> = if a.symmetric {
        indexing::symmetric_index(&rs)
            .assignments
            .into_iter()
            .map(|(index, label)| IndexEntry {
                index,
                label: label.clone(),
            })
            .collect()
    } else {
        indexing::linear_index(&rs)
            .into_iter()
            .map(|(k, label)| IndexEntry {
                index: k as i64,
                label: label.clone(),
            })
            .collect()
    };
    match a.format {
        Format::Json => {
            let out = IndexOutput {
                format_version: FORMAT_VERSION,
                layout: if a.symmetric { "symmetric" } else { "linear" }.into(),
                entries,
            };
            write!(ctx.out, "{}", to_json(&out))?;
        }
        Format::Human => {
            for e in entries {
                writeln!(ctx.out, "{}\t{}", e.index, e.label)?;
            }
        }
    }
    Ok(())
}

fn calc_cmd(a: CalcArgs, ctx: &mut Context<'_>) -> Result<(), Failure> {
    if let Some(path) = &a.model {
        if !a.bindings.is_empty() {
            return Err(Failure::Usage(
                "--bind applies to expressions; use --x for models".into(),
            ));
        }
        let model = OutcomeModel::from_json(&read_file(path)?)?;
        let table = model.validate(&a.x)?;
        match a.format {
            Format::Json => {
                let out = ModelOutput {
                    format_version: FORMAT_VERSION,
                    outcomes: table,
                };
                write!(ctx.out, "{}", to_json(&out))?;
            }
            Format::Human => {
                for o in table {
                    let ys: Vec<String> = o.y.iter().map(Rational::to_string).collect();
                    writeln!(ctx.out, "{}\t{}", o.p, ys.join(" "))?;
                }
            }
        }
        return Ok(());
    }
    let src = a.expr.expect("clap enforces expr or model");
    if !a.x.is_empty() {
        return Err(Failure::Usage(
            "--x applies to models; use --bind for expressions".into(),
        ));
    }
    let expr = calc::parse(&src)?;
    let bindings: Bindings = a.bindings.into_iter().collect();
    let ev = calc::evaluate(&expr, &bindings, a.budget)?;
    match a.format {
        Format::Json => {
            let out = CalcOutput {
                format_version: FORMAT_VERSION,
                value: ev.value,
                ops_used: ev.ops_used,
            };
            write!(ctx.out, "{}", to_json(&out))?;
        }
        Format::Human => writeln!(ctx.out, "{}", ev.value)?,
    }
    Ok(())
}
