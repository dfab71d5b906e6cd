//! Single-trial runners shared by the command line and the test suites.
//!
//! Each runner is a pure function of its configuration and seed.

use serde::Serialize;

use crate::analysis::{Counts, SpecProtocol};
use crate::error::{Error, Result};
use crate::leader_election::{self as le, LEParams, LEState, LeaderElectionProtocol, LeaderMonitor};
use crate::majority::{
    self, backup::FourStateProtocol, certificate_from_tally, four_state_initial, initial_config, Backup4, MajState,
    CheckCounts, MajorityMonitor, MajorityParams, MajorityProtocol, PhaseDiagnostics, Side,
};
use crate::population::StateId;
use crate::rng::RngStream;
use crate::sim::{CheckLevel, InteractionEvent, Simulation, Violation};

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub protocol: String,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub interactions_to_certificate: Option<u64>,
    pub interactions_run: u64,
    /// Certificate parallel time, exact `interactions / n` rounded for output.
    pub parallel_time: Option<f64>,
    /// `WIN_A`, `WIN_B` or `LEADER`.
    pub certificate_output: Option<String>,
    pub true_majority: Option<String>,
    pub violations: Vec<Violation>,
    pub max_clocks: usize,
    /// Some agent entered the backup protocol (majority only).
    pub backup: bool,
}

impl TrialRecord {
    pub fn new(protocol: &str, n: usize, epsilon: Option<f64>, seed: u64) -> Self {
        TrialRecord {
            protocol: protocol.to_string(),
            n,
            epsilon,
            seed,
            interactions_to_certificate: None,
            interactions_run: 0,
            parallel_time: None,
            certificate_output: None,
            true_majority: None,
            violations: Vec::new(),
            max_clocks: 0,
            backup: false,
        }
    }

    pub fn finish(&mut self, hit: Option<u64>, run: u64) {
        self.interactions_to_certificate = hit;
        self.interactions_run = run;
        self.parallel_time = hit.map(|h| h as f64 / self.n as f64);
    }

    /// The certificate disagrees with the input majority.
    pub fn wrong(&self) -> bool {
        matches!((&self.certificate_output, &self.true_majority), (Some(c), Some(t)) if c != t)
    }
}

/// A finished trial with its optional event trace.
#[derive(Debug, Clone)]
pub struct TrialRun<S> {
    pub record: TrialRecord,
    pub trace: Option<Vec<InteractionEvent<S>>>,
}

/// Default parallel-time budget for a protocol at population size `n`.
///
/// Generous multiples of the expected running times: `⌈log₂ n⌉²` for the
/// phased protocols, `n ln n` for the 4-state backup and explicit protocols.
pub fn default_budget(protocol: &str, n: usize) -> f64 {
    let l = majority::ceil_log2(n) as f64;
    let nln = n as f64 * (n.max(2) as f64).ln();
    match protocol {
        "majority" => 100.0 * l * l + 10.0 * nln,
        "leader-election" => 100.0 * l * l,
        "phase-clock-only" => 200.0 * (n.max(2) as f64).ln(),
        _ => 100.0 * nln,
    }
}

fn budget(max_parallel_time: f64, n: usize) -> Result<u64> {
    if !(max_parallel_time > 0.0 && max_parallel_time.is_finite()) {
        return Err(Error::domain(format!("budget {max_parallel_time} must be positive")));
    }
    Ok((max_parallel_time * n as f64).ceil() as u64)
}

#[derive(Debug, Clone, Copy)]
pub struct MajorityTrial {
    pub params: MajorityParams,
    pub discrepancy: usize,
    pub majority: Side,
    pub check: CheckLevel,
    pub max_parallel_time: f64,
    pub trace: bool,
}

#[derive(Debug, Clone)]
pub struct MajorityRun {
    pub run: TrialRun<MajState>,
    pub diagnostics: PhaseDiagnostics,
    pub checks: CheckCounts,
}

pub fn run_majority_trial(cfg: &MajorityTrial, seed: u64) -> Result<MajorityRun> {
    let n = cfg.params.n();
    let max = budget(cfg.max_parallel_time, n)?;
    let pop = initial_config(n, cfg.discrepancy, cfg.majority)?;
    let mut mon = MajorityMonitor::new(&cfg.params, cfg.check, cfg.majority, cfg.discrepancy, pop.agents());
    let mut sim = Simulation::new(MajorityProtocol { params: cfg.params }, pop, RngStream::new(seed));
    if cfg.trace {
        sim = sim.with_trace();
    }
    let mut rec = TrialRecord::new("majority", n, Some(cfg.discrepancy as f64 / n as f64), seed);
    if cfg.discrepancy > 0 {
        rec.true_majority = Some(cfg.majority.win().to_string());
    }
    let (mut max_clocks, mut backup) = (0usize, false);
    let backups = majority::class::BACKUP..majority::class::BACKUP + 4;
    let result = sim.run_observed(
        |t| certificate_from_tally(t).is_some(),
        max,
        |s, e| {
            let t = s.tally();
            max_clocks = max_clocks.max(t.count(majority::class::CLOCK));
            backup |= backups.clone().any(|c| t.count(c) > 0);
            mon.observe(s, e)
        },
    );
    rec.max_clocks = max_clocks;
    rec.backup = backup;
    match result {
        Ok(r) => {
            rec.finish(r.interactions_to_certificate, r.interactions_run);
            rec.certificate_output = certificate_from_tally(sim.tally()).map(|s| s.win().to_string());
        }
        Err(v) => {
            rec.finish(None, sim.steps());
            rec.violations.push(v);
        }
    }
    Ok(MajorityRun {
        run: TrialRun { record: rec, trace: sim.take_trace() },
        diagnostics: mon.diagnostics(),
        checks: mon.counts(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct FourStateTrial {
    pub n: usize,
    pub discrepancy: usize,
    pub majority: Side,
    pub check: CheckLevel,
    pub max_parallel_time: f64,
    pub trace: bool,
}

/// Runs the 4-state protocol alone. With checking enabled, `#A4 − #B4` is
/// compared with its initial value after every step.
pub fn run_four_state_trial(cfg: &FourStateTrial, seed: u64) -> Result<TrialRun<Backup4>> {
    let n = cfg.n;
    let max = budget(cfg.max_parallel_time, n)?;
    let pop = four_state_initial(n, cfg.discrepancy, cfg.majority)?;
    let mut sim = Simulation::new(FourStateProtocol, pop, RngStream::new(seed));
    if cfg.trace {
        sim = sim.with_trace();
    }
    let mut rec = TrialRecord::new("four-state", n, Some(cfg.discrepancy as f64 / n as f64), seed);
    if cfg.discrepancy > 0 {
        rec.true_majority = Some(cfg.majority.win().to_string());
    }
    let diff = |t: &crate::sim::Tally| t.count(Backup4::StrongA.index()) as i64 - t.count(Backup4::StrongB.index()) as i64;
    let d0 = diff(sim.tally());
    let check = cfg.check != CheckLevel::None;
    let result = sim.run_observed(
        |t| FourStateProtocol::certificate(t.counts()).is_some(),
        max,
        |s, e| {
            let d = diff(s.tally());
            if check && d != d0 {
                return Err(Violation {
                    step: e.step_index,
                    invariant: "strong difference",
                    detail: format!("#A4 - #B4 changed from {d0} to {d}"),
                });
            }
            Ok(())
        },
    );
    match result {
        Ok(r) => {
            rec.finish(r.interactions_to_certificate, r.interactions_run);
            rec.certificate_output = FourStateProtocol::certificate(sim.tally().counts()).map(|s| s.win().to_string());
        }
        Err(v) => {
            rec.finish(None, sim.steps());
            rec.violations.push(v);
        }
    }
    Ok(TrialRun { record: rec, trace: sim.take_trace() })
}

#[derive(Debug, Clone, Copy)]
pub struct LeaderTrial {
    pub params: LEParams,
    pub check: CheckLevel,
    pub max_parallel_time: f64,
    pub trace: bool,
}

pub fn run_leader_trial(cfg: &LeaderTrial, seed: u64) -> Result<TrialRun<LEState>> {
    let n = cfg.params.n();
    let max = budget(cfg.max_parallel_time, n)?;
    let pop = le::le_initial(n)?;
    let mut mon = LeaderMonitor::new(cfg.check, pop.agents());
    let mut sim = Simulation::new(LeaderElectionProtocol { params: cfg.params }, pop, RngStream::new(seed));
    if cfg.trace {
        sim = sim.with_trace();
    }
    let mut rec = TrialRecord::new("leader-election", n, None, seed);
    let mut max_clocks = 0usize;
    let result = sim.run_observed(
        |t| t.count(le::class::CONTENDER) == 1,
        max,
        |s, e| {
            max_clocks = max_clocks.max(s.tally().count(le::class::CLOCK));
            mon.observe(s, e)
        },
    );
    rec.max_clocks = max_clocks;
    match result {
        Ok(r) => {
            rec.finish(r.interactions_to_certificate, r.interactions_run);
            if r.interactions_to_certificate.is_some() {
                rec.certificate_output = Some("LEADER".to_string());
            }
        }
        Err(v) => {
            rec.finish(None, sim.steps());
            rec.violations.push(v);
        }
    }
    Ok(TrialRun { record: rec, trace: sim.take_trace() })
}

#[derive(Debug, Clone, Copy)]
pub struct SpecTrial<'a> {
    pub protocol: &'a SpecProtocol,
    pub init: &'a Counts,
    pub max_parallel_time: f64,
    pub trace: bool,
}

/// Runs an explicit protocol until its configuration is silent and
/// output-homogeneous. The record's output is the protocol's own symbol.
pub fn run_spec_trial(cfg: &SpecTrial<'_>, seed: u64) -> Result<TrialRun<StateId>> {
    let pop = cfg.protocol.population(cfg.init)?;
    let n = pop.len();
    let max = budget(cfg.max_parallel_time, n)?;
    let mut sim = Simulation::new(cfg.protocol.clone(), pop, RngStream::new(seed));
    if cfg.trace {
        sim = sim.with_trace();
    }
    let mut rec = TrialRecord::new("file", n, None, seed);
    let r = sim.run_until(|t| cfg.protocol.silent_output(t.counts()).is_some(), max);
    rec.finish(r.interactions_to_certificate, r.interactions_run);
    if r.interactions_to_certificate.is_some() {
        rec.certificate_output = cfg
            .protocol
            .silent_output(sim.tally().counts())
            .map(|o| cfg.protocol.spec.symbol(o).to_string());
    }
    Ok(TrialRun { record: rec, trace: sim.take_trace() })
}
