use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use popsim::leader_election::DEFAULT_PHASES_MULT;
use popsim::majority::Side;
use popsim::phase_clock::{DEFAULT_BETA, DEFAULT_RHO_MULT, DEFAULT_TC_FRAC};
use popsim::CheckLevel;

#[derive(Parser, Debug)]
#[command(name = "popsim", version, about = "Population protocol simulator and analyzer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run trials of a single configuration, one CSV row (or JSON object) per trial.
    Simulate(SimulateArgs),
    /// Run a grid of configurations; rows in grid order plus per-cell summaries.
    Sweep(SweepArgs),
    /// Exhaustive and trace-based analyses of explicit protocol files (JSON).
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Gap telemetry for a population made only of phase clocks.
    ClockGap(ClockGapArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolKind {
    Majority,
    LeaderElection,
    FourState,
    PhaseClockOnly,
    File(PathBuf),
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "majority" => ProtocolKind::Majority,
            "leader-election" => ProtocolKind::LeaderElection,
            "four-state" => ProtocolKind::FourState,
            "phase-clock-only" => ProtocolKind::PhaseClockOnly,
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => ProtocolKind::File(PathBuf::from(p)),
                _ => {
                    return Err(format!(
                        "unknown protocol '{s}' (majority, leader-election, four-state, phase-clock-only, file:<path>)"
                    ))
                }
            },
        })
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolKind::Majority => f.write_str("majority"),
            ProtocolKind::LeaderElection => f.write_str("leader-election"),
            ProtocolKind::FourState => f.write_str("four-state"),
            ProtocolKind::PhaseClockOnly => f.write_str("phase-clock-only"),
            ProtocolKind::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Initial bias. `p/q` and decimals are fractions of `n`; `k/n` is an
/// absolute discrepancy of `k` agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Epsilon {
    Fraction(u64, u64),
    Agents(u64),
}

impl FromStr for Epsilon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad epsilon '{s}': expected a decimal, p/q or k/n");
        let s = s.trim();
        if let Some(k) = s.strip_suffix("/n") {
            return k.parse().map(Epsilon::Agents).map_err(|_| bad());
        }
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.parse::<u64>().map_err(|_| bad())?, q.parse::<u64>().map_err(|_| bad())?),
            None => {
                let (int, frac) = s.split_once('.').unwrap_or((s, ""));
                if frac.len() > 12 || (int.is_empty() && frac.is_empty()) {
                    return Err(bad());
                }
                let digits = |t: &str| if t.is_empty() { Ok(0) } else { t.parse::<u64>().map_err(|_| bad()) };
                let q = 10u64.pow(frac.len() as u32);
                (digits(int)? * q + digits(frac)?, q)
            }
        };
        if q == 0 || p > q {
            return Err(format!("epsilon {s} outside [0, 1]"));
        }
        Ok(Epsilon::Fraction(p, q))
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Fraction(p, q) => write!(f, "{p}/{q}"),
            Epsilon::Agents(k) => write!(f, "{k}/n"),
        }
    }
}

impl Epsilon {
    /// The discrepancy `εn`, which must be a whole number of agents.
    pub fn discrepancy(self, n: usize) -> Result<usize, String> {
        let d = match self {
            Epsilon::Agents(k) => k as u128,
            Epsilon::Fraction(p, q) => {
                let num = p as u128 * n as u128;
                if !num.is_multiple_of(q as u128) {
                    return Err(format!("epsilon {self} times n = {n} is not a whole number"));
                }
                num / q as u128
            }
        };
        if d > n as u128 {
            return Err(format!("discrepancy {d} exceeds n = {n}"));
        }
        if !(n as u128 - d).is_multiple_of(2) {
            return Err(format!("discrepancy {d} and n = {n} differ in parity"));
        }
        Ok(d as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    None,
    Cheap,
    Full,
}

impl From<Check> for CheckLevel {
    fn from(c: Check) -> Self {
        match c {
            Check::None => CheckLevel::None,
            Check::Cheap => CheckLevel::Cheap,
            Check::Full => CheckLevel::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    A,
    B,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::A => Side::A,
            SideArg::B => Side::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Parameters shared by `simulate` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value = "majority")]
    pub protocol: ProtocolKind,
    /// C in ρ = ⌈C ln n⌉.
    #[arg(long, default_value_t = DEFAULT_RHO_MULT)]
    pub rho_mult: f64,
    /// Clock-creation cutoff T_c as a fraction of ρ.
    #[arg(long, default_value_t = DEFAULT_TC_FRAC)]
    pub tc_frac: f64,
    /// High-probability exponent β, kept with the clock parameters. ρ itself is
    /// set by --rho-mult.
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: u32,
    /// Leader election phase cap m = ⌈mult · log₂ n⌉.
    #[arg(long, default_value_t = DEFAULT_PHASES_MULT)]
    pub phases_mult: f64,
    /// Which input holds the majority.
    #[arg(long, value_enum, default_value_t = SideArg::A)]
    pub majority: SideArg,
    #[arg(long, value_enum, default_value_t = Check::None)]
    pub check: Check,
    /// Budget in parallel time (default depends on the protocol and n).
    #[arg(long)]
    pub max_parallel_time: Option<f64>,
    /// Initial counts for file protocols, e.g. "A:3,B:2".
    #[arg(long)]
    pub init: Option<String>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per configuration (default 1 for simulate, 10 for sweep).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Population size (file protocols take it from --init).
    #[arg(long)]
    pub n: Option<usize>,
    /// Bias as a decimal, a fraction p/q, or k/n for k agents.
    #[arg(long)]
    pub epsilon: Option<Epsilon>,
    /// Absolute discrepancy εn (alternative to --epsilon).
    #[arg(long, conflicts_with = "epsilon")]
    pub discrepancy: Option<usize>,
    /// Record every interaction of the (single) trial as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated population sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Comma-separated biases (majority and four-state only).
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<Epsilon>,
}

#[derive(Args, Debug, Clone)]
pub struct ClockGapArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_RHO_MULT)]
    pub rho_mult: f64,
    #[arg(long, default_value_t = DEFAULT_TC_FRAC)]
    pub tc_frac: f64,
    /// Interactions per run (default ⌈200 n ln n⌉).
    #[arg(long)]
    pub interactions: Option<u64>,
    /// Sampling period in interactions (default n).
    #[arg(long)]
    pub sample_every: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// All configurations reachable from --init.
    Reach(ReachArgs),
    /// Stable decisions reachable from --init.
    Decisions(ReachArgs),
    /// Exhaustive output-dominance check over small populations.
    Dominance(DominanceArgs),
    /// Simulate from --init and list the f-bottleneck steps of the trace.
    Bottlenecks(BottleneckArgs),
    /// Suffix transition ordering on a simulated or generated instance.
    Ordering(OrderingArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ReachArgs {
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub init: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DominanceArgs {
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BottleneckArgs {
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub init: String,
    /// Threshold f(n), e.g. "n/4" or "sqrt(n)*ln(n)".
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_parallel_time: Option<f64>,
    /// Report at most this many bottleneck steps.
    #[arg(long, default_value_t = 100)]
    pub limit: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OrderingArgs {
    /// Explicit protocol; the trace is cut where state --state first runs out.
    #[arg(long, required_unless_present = "generate", conflicts_with = "generate")]
    pub file: Option<PathBuf>,
    #[arg(long, requires = "file")]
    pub init: Option<String>,
    /// The designated input state A (default: the first input).
    #[arg(long, requires = "file")]
    pub state: Option<String>,
    /// Generate random precondition-satisfying instances instead.
    #[arg(long)]
    pub generate: bool,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub b: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_parallel_time: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
