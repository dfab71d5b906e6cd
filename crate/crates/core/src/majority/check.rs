//! Potentials, certificates and the runtime invariant monitor.

use num_rational::Ratio;
use serde::Serialize;

use super::{class, four_state_certificate, MajState, MajorityParams, MajorityProtocol, Role, Side, Value};
use crate::population::Configuration;
use crate::sim::{CheckLevel, InteractionEvent, Simulation, Tally, Violation};

/// Exact value of the sum potential `Q`.
pub type QValue = Ratio<i128>;

/// Contribution of one state to `2Q` (value counted in halves).
#[inline]
fn q_halves(s: &MajState, log_n: u32) -> i128 {
    match s.role {
        Role::Worker { phase, value, preference } => {
            let shift = log_n.saturating_sub(((phase - 1) / 2) as u32);
            let v = (value.halves() as i128) << shift;
            match preference {
                Side::A => v,
                Side::B => -v,
            }
        }
        _ => 0,
    }
}

/// `Q(c)`: signed sum over workers of `v · 2^(⌈log₂ n⌉ − ⌊(φ−1)/2⌋)`.
pub fn q_potential(c: &Configuration<MajState>, n: usize) -> QValue {
    let log_n = super::ceil_log2(n);
    let twice: i128 = c.iter().map(|(s, k)| q_halves(s, log_n) * k as i128).sum();
    Ratio::new(twice, 2)
}

#[inline]
fn delta_of(s: &MajState) -> i64 {
    match s.role {
        Role::Worker { value: Value::Zero, .. } => 1,
        Role::Worker { value: Value::One, .. } => -1,
        _ => 0,
    }
}

/// Number of weak workers minus number of workers with value 1.
pub fn delta_weak(c: &Configuration<MajState>) -> i64 {
    c.iter().map(|(s, k)| delta_of(s) * k as i64).sum()
}

/// Sound stabilization witness: all agents are `D_X`, or all are backups in
/// a 4-state configuration that can no longer change its output.
pub fn stability_certificate(c: &Configuration<MajState>) -> Option<Side> {
    let mut counts = vec![0usize; class::COUNT];
    for (s, k) in c.iter() {
        counts[super::class_of(s)] += k;
    }
    certificate_from_counts(&counts, c.size())
}

/// [`stability_certificate`] evaluated on a running tally in O(1).
#[inline]
pub fn certificate_from_tally(t: &Tally) -> Option<Side> {
    certificate_from_counts(t.counts(), t.n())
}

fn certificate_from_counts(counts: &[usize], n: usize) -> Option<Side> {
    if n == 0 {
        return None;
    }
    if counts[class::TERM_A] == n {
        return Some(Side::A);
    }
    if counts[class::TERM_B] == n {
        return Some(Side::B);
    }
    let b = &counts[class::BACKUP..class::BACKUP + 4];
    if b.iter().sum::<usize>() == n {
        return four_state_certificate([b[0], b[1], b[2], b[3]]);
    }
    None
}

/// Phase-boundary postconditions; informative only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PhaseDiagnostics {
    pub cancellation_checks: u32,
    pub cancellation_failures: u32,
    pub doubling_checks: u32,
    pub doubling_failures: u32,
}

/// Checks majority invariants along a run. Feed it every event through
/// [`Simulation::run_observed`].
/// How many configurations each full-level invariant was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CheckCounts {
    pub sum_invariant: u64,
    pub weak_monotonicity: u64,
    pub clock_count: u64,
}

#[derive(Debug, Clone)]

pub struct MajorityMonitor {
    level: CheckLevel,
    counts: CheckCounts,
    n: usize,
    log_n: u32,
    majority: Side,
    discrepancy: usize,
    q_halves: i128,
    delta: i64,
    q_active: bool,
    max_phase: u16,
    diagnostics: PhaseDiagnostics,
}

impl MajorityMonitor {
    pub fn new(params: &MajorityParams, level: CheckLevel, majority: Side, discrepancy: usize, agents: &[MajState]) -> Self {
        let log_n = params.log_n();
        let mut m = MajorityMonitor {
            level,
            counts: CheckCounts::default(),
            n: params.n(),
            log_n,
            majority,
            discrepancy,
            q_halves: 0,
            delta: 0,
            q_active: discrepancy > 0,
            max_phase: 1,
            diagnostics: PhaseDiagnostics::default(),
        };
        m.recompute(agents);
        m.q_active &= !agents.iter().any(|s| m.disables_q(s));
        m
    }

    pub fn level(&self) -> CheckLevel {
        self.level
    }

    pub fn diagnostics(&self) -> PhaseDiagnostics {
        self.diagnostics
    }

    pub fn counts(&self) -> CheckCounts {
        self.counts
    }

    /// Current `Q`, tracked incrementally.
    pub fn q(&self) -> QValue {
        Ratio::new(self.q_halves, 2)
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    fn recompute(&mut self, agents: &[MajState]) -> (i128, i64) {
        let q = agents.iter().map(|s| q_halves(s, self.log_n)).sum();
        let d = agents.iter().map(delta_of).sum();
        let old = (self.q_halves, self.delta);
        self.q_halves = q;
        self.delta = d;
        old
    }

    fn disables_q(&self, s: &MajState) -> bool {
        match s.role {
            Role::Backup(_) => true,
            Role::Terminator(x) => x == self.majority,
            _ => false,
        }
    }

    /// Observes one event of a run driven by `sim`.
    pub fn observe(&mut self, sim: &Simulation<MajorityProtocol>, ev: &InteractionEvent<MajState>) -> Result<(), Violation> {
        if self.level == CheckLevel::None {
            return Ok(());
        }
        let step = ev.step_index;
        let fail = |invariant: &'static str, detail: String| Err(Violation { step, invariant, detail });
        for (b, a) in [(ev.before.0, ev.after.0), (ev.before.1, ev.after.1)] {
            if let Some(what) = flag_regression(&b, &a) {
                return fail("flag monotonicity", format!("{what}: {b} -> {a}"));
            }
        }
        if self.level == CheckLevel::Cheap {
            return Ok(());
        }

        let tally = sim.tally();
        self.counts.clock_count += 1;
        if tally.count(class::CLOCK) * 2 > self.n {
            return fail("clock count", format!("{} clocks among {} agents", tally.count(class::CLOCK), self.n));
        }

        let before_delta = self.delta;
        for s in [ev.before.0, ev.before.1] {
            self.q_halves -= q_halves(&s, self.log_n);
            self.delta -= delta_of(&s);
        }
        for s in [ev.after.0, ev.after.1] {
            self.q_halves += q_halves(&s, self.log_n);
            self.delta += delta_of(&s);
        }

        if self.q_active && (self.disables_q(&ev.after.0) || self.disables_q(&ev.after.1)) {
            self.q_active = false;
        }
        if self.q_active {
            self.counts.sum_invariant += 1;
            let bound = 2 * (self.discrepancy as i128) * (self.n as i128);
            let ok = match self.majority {
                Side::A => self.q_halves >= bound,
                Side::B => self.q_halves <= -bound,
            };
            if !ok {
                return fail("sum invariant", format!("Q = {} against threshold {}", self.q(), bound / 2));
            }
        }

        let quiet = tally.count(class::CLOCK) + tally.count(class::WORKER) == self.n
            && [ev.before.0, ev.before.1].iter().all(|s| matches!(s.role, Role::Worker { .. } | Role::Clock { .. }));
        let odd_entry = [(ev.before.0, ev.after.0), (ev.before.1, ev.after.1)]
            .iter()
            .any(|(b, a)| entered_phase(b, a).is_some_and(|p| p % 2 == 1));
        if quiet && !odd_entry {
            self.counts.weak_monotonicity += 1;
        }
        if quiet && !odd_entry && self.delta < before_delta {
            return fail("weak monotonicity", format!("delta fell from {before_delta} to {}", self.delta));
        }

        for (b, a) in [(ev.before.0, ev.after.0), (ev.before.1, ev.after.1)] {
            if let Some(p) = entered_phase(&b, &a) {
                if p > self.max_phase {
                    self.max_phase = p;
                    self.phase_boundary(p - 1, sim.population().agents(), &b);
                }
            }
        }

        let n = self.n as u64;
        if (step + 1).is_multiple_of(n) {
            let (q_old, d_old) = self.recompute(sim.population().agents());
            if (q_old, d_old) != (self.q_halves, self.delta) {
                return fail(
                    "bookkeeping",
                    format!("incremental (Q2={q_old}, delta={d_old}) vs recount (Q2={}, delta={})", self.q_halves, self.delta),
                );
            }
        }
        Ok(())
    }

    /// Postconditions for phase `phase` when the first worker leaves it.
    fn phase_boundary(&mut self, phase: u16, agents: &[MajState], leaver: &MajState) {
        let in_phase = agents
            .iter()
            .filter_map(|s| match s.role {
                Role::Worker { phase: p, value, preference } if p == phase => Some((value, preference)),
                _ => None,
            })
            .chain(match leaver.role {
                Role::Worker { value, preference, .. } => Some((value, preference)),
                _ => None,
            });
        let d = &mut self.diagnostics;
        if phase % 2 == 1 {
            let (mut a, mut b) = (0usize, 0usize);
            for (v, p) in in_phase {
                if v != Value::Zero {
                    match p {
                        Side::A => a += 1,
                        Side::B => b += 1,
                    }
                }
            }
            d.cancellation_checks += 1;
            let tenth = self.n / 10;
            if !(a == 0 || b == 0 || (a <= tenth && b <= tenth)) {
                d.cancellation_failures += 1;
            }
        } else {
            d.doubling_checks += 1;
            if in_phase.into_iter().any(|(v, _)| v == Value::One) {
                d.doubling_failures += 1;
            }
        }
    }
}

/// Phase a worker newly entered in this transition, if any.
fn entered_phase(before: &MajState, after: &MajState) -> Option<u16> {
    match (before.role, after.role) {
        (Role::Worker { phase: p0, .. }, Role::Worker { phase: p1, .. }) if p1 > p0 => Some(p1),
        _ => None,
    }
}

fn flag_regression(b: &MajState, a: &MajState) -> Option<&'static str> {
    if !b.clock_creation && a.clock_creation {
        return Some("clock-creation re-enabled");
    }
    if b.initial != a.initial {
        return Some("initial input changed");
    }
    match (b.role, a.role) {
        (Role::Backup(_), r) if !matches!(r, Role::Backup(_)) => Some("backup left"),
        (Role::Terminator(_), Role::Worker { .. } | Role::Clock { .. }) => Some("terminator reverted"),
        (Role::Clock { .. }, Role::Worker { .. }) => Some("clock reverted to worker"),
        (Role::Worker { phase: p0, .. }, Role::Worker { phase: p1, .. }) if p1 < p0 => Some("phase decreased"),
        _ => None,
    }
}
