//! `simulate`, `sweep` and `clock-gap`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use popsim::analysis::{parse_protocol, Counts, ProtocolSpec, SpecProtocol};
use popsim::experiment::{
    default_budget, run_four_state_trial, run_leader_trial, run_majority_trial, run_spec_trial, FourStateTrial,
    LeaderTrial, MajorityTrial, SpecTrial, TrialRecord,
};
use popsim::leader_election::{LEParams, LeaderElectionProtocol};
use popsim::majority::{CheckCounts, FourStateProtocol, MajorityParams, MajorityProtocol, PhaseDiagnostics, Side};
use popsim::phase_clock::{clock_gap_run, ClockParams};
use popsim::sim::write_trace;
use popsim::{derive_seed, CheckLevel, Violation};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{ClockGapArgs, Epsilon, Format, ModelArgs, ProtocolKind, SimulateArgs, SweepArgs};

pub const SCHEMA: &str = "# popsim sweep v1";
const COLUMNS: [&str; 9] = [
    "protocol",
    "n",
    "epsilon",
    "seed",
    "interactions_to_certificate",
    "parallel_time",
    "certificate_output",
    "true_majority",
    "invariant_violations",
];

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or inputs; nothing was run.
    Usage(String),
    Runtime(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(runtime)
        }
    }
}

pub fn load_spec(path: &Path) -> Result<ProtocolSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_protocol(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
enum Model {
    Majority(MajorityParams, usize, Side),
    FourState(usize, Side),
    Leader(LEParams),
    ClockOnly(ClockParams),
    File(SpecProtocol, Counts, PathBuf),
}

/// One fully validated configuration of a sweep grid.
#[derive(Debug, Clone)]
pub struct Cell {
    model: Model,
    n: usize,
    check: CheckLevel,
    budget: f64,
}

impl Cell {
    pub fn prepare(m: &ModelArgs, n: Option<usize>, bias: Option<Epsilon>) -> Result<Cell, Failure> {
        let needs_bias = matches!(m.protocol, ProtocolKind::Majority | ProtocolKind::FourState);
        if bias.is_some() && !needs_bias {
            return Err(usage(format!("--epsilon does not apply to {}", m.protocol)));
        }
        if m.init.is_some() && !matches!(m.protocol, ProtocolKind::File(_)) {
            return Err(usage("--init applies only to file protocols"));
        }
        let (model, n) = match &m.protocol {
            ProtocolKind::File(path) => {
                let spec = load_spec(path)?;
                let init = m.init.as_deref().ok_or_else(|| usage("file protocols need --init"))?;
                let c0 = spec.parse_counts(init).map_err(usage)?;
                if c0.size() < 2 {
                    return Err(usage(format!("--init has {} agent(s); at least 2 are required", c0.size())));
                }
                if n.is_some_and(|n| n != c0.size()) {
                    return Err(usage(format!("--n disagrees with --init, which has {} agents", c0.size())));
                }
                let size = c0.size();
                (Model::File(SpecProtocol { spec }, c0, path.clone()), size)
            }
            kind => {
                let n = n.ok_or_else(|| usage("--n is required"))?;
                if n < 2 {
                    return Err(usage(format!("--n {n}: at least 2 agents are required")));
                }
                let clock = ClockParams::for_population(n, m.rho_mult, m.tc_frac)
                    .and_then(|c| c.with_beta(m.beta))
                    .map_err(usage)?;
                let side = Side::from(m.majority);
                let d = match (needs_bias, bias) {
                    (true, Some(e)) => e.discrepancy(n).map_err(usage)?,
                    (true, None) => return Err(usage(format!("{kind} needs --epsilon or --discrepancy"))),
                    (false, _) => 0,
                };
                let model = match kind {
                    ProtocolKind::Majority => Model::Majority(MajorityParams::new(n, clock).map_err(usage)?, d, side),
                    ProtocolKind::FourState => Model::FourState(d, side),
                    ProtocolKind::LeaderElection => Model::Leader(LEParams::new(n, clock, m.phases_mult).map_err(usage)?),
                    ProtocolKind::PhaseClockOnly => Model::ClockOnly(clock),
                    ProtocolKind::File(_) => unreachable!(),
                };
                (model, n)
            }
        };
        let budget = m.max_parallel_time.unwrap_or_else(|| default_budget(&m.protocol.to_string(), n));
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(usage(format!("--max-parallel-time {budget} must be positive")));
        }
        Ok(Cell {
            model,
            n,
            check: m.check.into(),
            budget,
        })
    }

    pub fn run(&self, seed: u64, trace: bool) -> Result<Outcome, Failure> {
        let mut trace_csv = Vec::new();
        let mut diagnostics = None;
        let mut checks = None;
        let record = match &self.model {
            Model::Majority(params, d, side) => {
                let cfg = MajorityTrial {
                    params: *params,
                    discrepancy: *d,
                    majority: *side,
                    check: self.check,
                    max_parallel_time: self.budget,
                    trace,
                };
                let r = run_majority_trial(&cfg, seed).map_err(runtime)?;
                if let Some(ev) = &r.run.trace {
                    write_trace(&mut trace_csv, &MajorityProtocol { params: *params }, ev).map_err(runtime)?;
                }
                diagnostics = Some(r.diagnostics);
                checks = (self.check == CheckLevel::Full).then_some(r.checks);
                r.run.record
            }
            Model::FourState(d, side) => {
                let cfg = FourStateTrial {
                    n: self.n,
                    discrepancy: *d,
                    majority: *side,
                    check: self.check,
                    max_parallel_time: self.budget,
                    trace,
                };
                let r = run_four_state_trial(&cfg, seed).map_err(runtime)?;
                if let Some(ev) = &r.trace {
                    write_trace(&mut trace_csv, &FourStateProtocol, ev).map_err(runtime)?;
                }
                r.record
            }
            Model::Leader(params) => {
                let cfg = LeaderTrial {
                    params: *params,
                    check: self.check,
                    max_parallel_time: self.budget,
                    trace,
                };
                let r = run_leader_trial(&cfg, seed).map_err(runtime)?;
                if let Some(ev) = &r.trace {
                    write_trace(&mut trace_csv, &LeaderElectionProtocol { params: *params }, ev).map_err(runtime)?;
                }
                r.record
            }
            Model::ClockOnly(params) => {
                if trace {
                    return Err(usage("phase-clock-only does not record traces; use clock-gap for telemetry"));
                }
                let steps = (self.budget * self.n as f64).ceil() as u64;
                let g = clock_gap_run(self.n, *params, seed, steps, 0).map_err(runtime)?;
                let mut rec = TrialRecord::new("phase-clock-only", self.n, None, seed);
                rec.finish(None, steps);
                rec.max_clocks = self.n;
                if let Some(step) = g.first_violation {
                    rec.violations.push(Violation {
                        step,
                        invariant: "clock gap",
                        detail: format!("gap reached rho = {}", params.rho()),
                    });
                }
                rec
            }
            Model::File(protocol, init, path) => {
                let cfg = SpecTrial {
                    protocol,
                    init,
                    max_parallel_time: self.budget,
                    trace,
                };
                let r = run_spec_trial(&cfg, seed).map_err(runtime)?;
                if let Some(ev) = &r.trace {
                    write_trace(&mut trace_csv, protocol, ev).map_err(runtime)?;
                }
                let mut rec = r.record;
                rec.protocol = format!("file:{}", path.display());
                rec
            }
        };
        Ok(Outcome {
            record,
            trace_csv: trace.then_some(trace_csv),
            diagnostics,
            checks,
        })
    }
}

#[derive(Debug, Serialize)]
pub struct Outcome {
    #[serde(flatten)]
    pub record: TrialRecord,
    #[serde(skip)]
    pub trace_csv: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<PhaseDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckCounts>,
}

/// 1 on any violation or wrong answer, else 2 if some trial ran out of
/// budget, else 0. Clock-only runs have no certificate and finish at 0.
pub fn exit_status(records: &[&TrialRecord]) -> u8 {
    if records.iter().any(|r| !r.violations.is_empty() || r.wrong()) {
        1
    } else if records
        .iter()
        .any(|r| r.interactions_to_certificate.is_none() && r.protocol != "phase-clock-only")
    {
        2
    } else {
        0
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(r: &TrialRecord) -> [String; 9] {
    let violations: Vec<String> = r.violations.iter().map(|v| format!("{}@{}", v.invariant, v.step)).collect();
    [
        r.protocol.clone(),
        r.n.to_string(),
        opt(r.epsilon),
        r.seed.to_string(),
        opt(r.interactions_to_certificate),
        opt(r.parallel_time),
        r.certificate_output.clone().unwrap_or_else(|| "none".into()),
        r.true_majority.clone().unwrap_or_else(|| "none".into()),
        violations.join(";"),
    ]
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    }
}

fn csv_err(e: impl fmt::Display) -> Failure {
    runtime(format!("csv: {e}"))
}

/// Rows, then (if `cells` is given) a `# summary` section with one line per
/// cell of consecutive rows.
pub fn render_csv(records: &[&TrialRecord], cells: Option<&[usize]>) -> Result<Vec<u8>, Failure> {
    let mut buf = format!("{SCHEMA}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(COLUMNS).map_err(csv_err)?;
        for r in records {
            w.write_record(row(r)).map_err(csv_err)?;
        }
        w.flush().map_err(csv_err)?;
    }
    let Some(sizes) = cells else { return Ok(buf) };
    buf.extend_from_slice(b"# summary\n");
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record([
        "protocol",
        "n",
        "epsilon",
        "trials",
        "certified",
        "wrong",
        "violations",
        "mean_parallel_time",
        "median_parallel_time",
        "p95_parallel_time",
    ])
    .map_err(csv_err)?;
    let mut start = 0;
    for &len in sizes {
        let cell = &records[start..start + len];
        start += len;
        let first = cell[0];
        let mut times: Vec<f64> = cell.iter().filter_map(|r| r.parallel_time).collect();
        times.sort_by(f64::total_cmp);
        let stat = |f: &dyn Fn(&[f64]) -> f64| if times.is_empty() { String::new() } else { format!("{:.4}", f(&times)) };
        w.write_record([
            first.protocol.clone(),
            first.n.to_string(),
            opt(first.epsilon),
            cell.len().to_string(),
            times.len().to_string(),
            cell.iter().filter(|r| r.wrong()).count().to_string(),
            cell.iter().map(|r| r.violations.len()).sum::<usize>().to_string(),
            stat(&|t| t.iter().sum::<f64>() / t.len() as f64),
            stat(&median),
            stat(&|t| percentile(t, 0.95)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)?;
    drop(w);
    Ok(buf)
}

fn report_violations(records: &[&TrialRecord]) {
    for r in records {
        for v in &r.violations {
            let line = serde_json::json!({ "seed": r.seed, "n": r.n, "violation": v });
            eprintln!("violation: {line}");
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<u8, Failure> {
    let trials = a.model.trials.unwrap_or(1);
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if a.trace.is_some() && trials > 1 {
        return Err(usage("--trace records a single trial; drop --trials"));
    }
    let bias = a.epsilon.or(a.discrepancy.map(|d| Epsilon::Agents(d as u64)));
    let cell = Cell::prepare(&a.model, a.n, bias)?;
    // A single trial runs with the seed as given, so any sweep row can be
    // replayed from its seed column.
    let seeds: Vec<u64> = if trials == 1 {
        vec![a.model.seed]
    } else {
        (0..trials as u64).map(|i| derive_seed(a.model.seed, i)).collect()
    };
    let outcomes = seeds
        .iter()
        .map(|&s| cell.run(s, a.trace.is_some()))
        .collect::<Result<Vec<_>, _>>()?;
    if let (Some(path), Some(csv)) = (&a.trace, outcomes.first().and_then(|o| o.trace_csv.as_ref())) {
        emit(Some(path), csv)?;
    }
    let records: Vec<&TrialRecord> = outcomes.iter().map(|o| &o.record).collect();
    let bytes = match a.format {
        Format::Csv => render_csv(&records, None)?,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcomes).map_err(runtime)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(a.model.output.as_deref(), &bytes)?;
    report_violations(&records);
    Ok(exit_status(&records))
}

pub fn sweep(a: &SweepArgs) -> Result<u8, Failure> {
    let trials = a.model.trials.unwrap_or(10);
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if matches!(a.model.protocol, ProtocolKind::File(_)) {
        return Err(usage("sweeps cover the built-in protocols; use simulate --trials for file protocols"));
    }
    let biases: Vec<Option<Epsilon>> = if a.epsilon.is_empty() {
        vec![None]
    } else {
        a.epsilon.iter().copied().map(Some).collect()
    };
    // Reject the whole grid before running anything.
    let mut cells = Vec::new();
    for &n in &a.n {
        for &e in &biases {
            cells.push(Cell::prepare(&a.model, Some(n), e).map_err(|f| match f {
                Failure::Usage(m) => usage(format!("cell n={n}{}: {m}", e.map(|e| format!(" epsilon={e}")).unwrap_or_default())),
                other => other,
            })?);
        }
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..trials).map(move |t| (c, (c * trials + t) as u64)))
        .collect();
    let master = a.model.seed;
    let outcomes = jobs
        .par_iter()
        .map(|&(c, g)| cells[c].run(derive_seed(master, g), false))
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<&TrialRecord> = outcomes.iter().map(|o| &o.record).collect();
    let sizes = vec![trials; cells.len()];
    emit(a.model.output.as_deref(), &render_csv(&records, Some(&sizes))?)?;
    report_violations(&records);
    Ok(exit_status(&records))
}

pub fn clock_gap(a: &ClockGapArgs) -> Result<u8, Failure> {
    if a.n < 2 {
        return Err(usage(format!("--n {}: at least 2 agents are required", a.n)));
    }
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let params = ClockParams::for_population(a.n, a.rho_mult, a.tc_frac).map_err(usage)?;
    let steps = a.interactions.unwrap_or((200.0 * a.n as f64 * (a.n as f64).ln()).ceil() as u64);
    let every = a.sample_every.unwrap_or(a.n as u64);
    if every == 0 {
        return Err(usage("--sample-every must be positive"));
    }
    let seeds: Vec<u64> = if a.trials == 1 {
        vec![a.seed]
    } else {
        (0..a.trials as u64).map(|i| derive_seed(a.seed, i)).collect()
    };
    let runs = seeds
        .par_iter()
        .map(|&s| clock_gap_run(a.n, params, s, steps, every))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let mut buf = format!("# popsim clock-gap v1 n={} rho={} interactions={steps}\n", a.n, params.rho()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["trial", "seed", "interaction", "gap", "gamma"]).map_err(csv_err)?;
        for (t, r) in runs.iter().enumerate() {
            for s in &r.samples {
                w.write_record([t.to_string(), r.seed.to_string(), s.interaction.to_string(), s.gap.to_string(), s.gamma.to_string()])
                    .map_err(csv_err)?;
            }
        }
        w.flush().map_err(csv_err)?;
    }
    buf.extend_from_slice(b"# summary\n");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["trial", "seed", "max_gap", "rho", "first_violation"]).map_err(csv_err)?;
        for (t, r) in runs.iter().enumerate() {
            w.write_record([t.to_string(), r.seed.to_string(), r.max_gap.to_string(), params.rho().to_string(), opt(r.first_violation)])
                .map_err(csv_err)?;
        }
        w.flush().map_err(csv_err)?;
    }
    emit(a.output.as_deref(), &buf)?;
    Ok(0)
}
