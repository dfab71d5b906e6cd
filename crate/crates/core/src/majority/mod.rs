//! Phased exact majority.
//!
//! Agents are workers, clocks, backups or terminators. Workers alternate
//! cancellation (odd) and doubling (even) phases, kept in step by clocks
//! running the leaderless phase clock. Backups run the 4-state protocol and
//! terminators spread a final decision.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_clock::{advance, circular_gap, label, ClockLabel, ClockParams, ClockPosition};
use crate::population::AgentPopulation;
use crate::sim::Protocol;

pub mod backup;
pub mod check;

pub use backup::{backup_rule, four_state_certificate, four_state_initial, Backup4, FourStateProtocol};
pub use crate::sim::CheckLevel;
pub use check::{certificate_from_tally, delta_weak, q_potential, stability_certificate, CheckCounts, MajorityMonitor, PhaseDiagnostics, QValue};

/// One of the two competing inputs. Doubles as preference (`WIN_A`/`WIN_B`),
/// initial input, terminator flavour and protocol output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    /// Output symbol, `WIN_A` or `WIN_B`.
    pub fn win(self) -> &'static str {
        match self {
            Side::A => "WIN_A",
            Side::B => "WIN_B",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

pub type MajOutput = Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Value {
    Zero,
    Half,
    One,
}

impl Value {
    /// The value in units of 1/2.
    #[inline]
    pub fn halves(self) -> u8 {
        match self {
            Value::Zero => 0,
            Value::Half => 1,
            Value::One => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Value::Zero => "0",
            Value::Half => "1/2",
            Value::One => "1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Role {
    Worker { phase: u16, value: Value, preference: Side },
    Clock { position: ClockPosition, preference: Side },
    Backup(Backup4),
    Terminator(Side),
}

/// Full agent state: role plus the two flags every state carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MajState {
    pub role: Role,
    pub initial: Side,
    pub clock_creation: bool,
}

impl MajState {
    /// Input state: phase 1 worker with value 1 preferring its own input.
    pub fn input(side: Side) -> Self {
        MajState {
            role: Role::Worker {
                phase: 1,
                value: Value::One,
                preference: side,
            },
            initial: side,
            clock_creation: true,
        }
    }

    pub fn with_role(self, role: Role) -> Self {
        MajState { role, ..self }
    }

    /// Workers with value 1/2 or 1.
    #[inline]
    pub fn is_strong(&self) -> bool {
        matches!(self.role, Role::Worker { value, .. } if value != Value::Zero)
    }

    pub fn preference(&self) -> Option<Side> {
        match self.role {
            Role::Worker { preference, .. } | Role::Clock { preference, .. } => Some(preference),
            _ => None,
        }
    }

    fn set_preference(&mut self, side: Side) {
        match &mut self.role {
            Role::Worker { preference, .. } | Role::Clock { preference, .. } => *preference = side,
            _ => {}
        }
    }

    #[inline]
    pub fn output(&self) -> Side {
        match self.role {
            Role::Worker { preference, .. } | Role::Clock { preference, .. } => preference,
            Role::Backup(b) => b.output(),
            Role::Terminator(x) => x,
        }
    }

    pub fn is_backup(&self) -> bool {
        matches!(self.role, Role::Backup(_))
    }

    pub fn is_terminator(&self) -> bool {
        matches!(self.role, Role::Terminator(_))
    }
}

impl fmt::Display for MajState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Worker { phase, value, preference } => write!(f, "W({phase},{},{})", value.name(), preference.win())?,
            Role::Clock { position, preference } => write!(f, "C({position},{})", preference.win())?,
            Role::Backup(b) => write!(f, "{b}")?,
            Role::Terminator(x) => write!(f, "D_{x}")?,
        }
        write!(f, "|{}|{}", self.initial, if self.clock_creation { "cc" } else { "-" })
    }
}

/// Which side of the ordered pair an update is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Initiator,
    Responder,
}

/// `⌈log₂ n⌉`, at least 1.
pub fn ceil_log2(n: usize) -> u32 {
    (usize::BITS - (n.max(2) - 1).leading_zeros()).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorityParams {
    n: usize,
    clock: ClockParams,
    log_n: u32,
    m_phases: u16,
}

impl MajorityParams {
    pub fn new(n: usize, clock: ClockParams) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopulation { n, min: 2 });
        }
        let log_n = ceil_log2(n);
        Ok(MajorityParams {
            n,
            clock,
            log_n,
            m_phases: (2 * log_n + 1) as u16,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clock(&self) -> &ClockParams {
        &self.clock
    }

    /// `⌈log₂ n⌉`.
    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    /// Highest phase, `2⌈log₂ n⌉ + 1`.
    pub fn m_phases(&self) -> u16 {
        self.m_phases
    }
}

/// Backup state entered by `s`: the 4-state input matching its original input.
pub fn backup(s: &MajState) -> MajState {
    s.with_role(Role::Backup(Backup4::strong(s.initial)))
}

fn term_side(s: &MajState) -> Option<Side> {
    match s.role {
        Role::Terminator(x) => Some(x),
        _ => s.preference(),
    }
}

/// `D_X` where `X` is the terminator flavour or preference of `s`.
pub fn term_preference(s: &MajState) -> Result<MajState> {
    term_side(s)
        .map(|x| s.with_role(Role::Terminator(x)))
        .ok_or_else(|| Error::domain("backup states carry no preference"))
}

fn pref_conflict(s: &MajState, o: &MajState) -> bool {
    term_side(s) != term_side(o)
}

fn inc_phase(phase: u16, o: &MajState, p: &MajorityParams) -> bool {
    match o.role {
        Role::Worker { phase: op, .. } => phase + 1 == op,
        Role::Clock { position, .. } => match label(position, &p.clock) {
            ClockLabel::Even => phase % 2 == 1,
            ClockLabel::Odd => phase.is_multiple_of(2),
            ClockLabel::Buffer => false,
        },
        _ => false,
    }
}

/// New state of `s` after interacting with `o`.
///
/// Rules are applied in order: backups, terminators, flag and preference
/// propagation, clock/clock ticks, worker phase advance, then same-phase
/// worker rules (cancellation in odd phases, doubling in even ones).
pub fn maj_update(s: &MajState, o: &MajState, p: &MajorityParams, slot: Slot) -> MajState {
    match (s.role, o.role) {
        (Role::Backup(x), Role::Backup(y)) => return s.with_role(Role::Backup(backup_rule(x, y))),
        (Role::Backup(_), _) => return *s,
        (_, Role::Backup(_)) => return backup(s),
        _ => {}
    }

    if s.is_terminator() || o.is_terminator() {
        return match (term_side(s), pref_conflict(s, o)) {
            (Some(x), false) => s.with_role(Role::Terminator(x)),
            _ => backup(s),
        };
    }

    // Both are workers or clocks from here on.
    let mut next = *s;
    if !o.clock_creation {
        next.clock_creation = false;
    }
    if !s.is_strong() && o.is_strong() {
        if let Some(x) = o.preference() {
            next.set_preference(x);
        }
    }

    let (phase, value, preference) = match s.role {
        Role::Clock { position: mine, .. } => {
            if let Role::Clock { position: theirs, .. } = o.role {
                if circular_gap(mine, theirs, &p.clock) >= p.clock.rho() {
                    return backup(&next);
                }
                let moved = match slot {
                    Slot::Initiator => advance(mine, theirs, &p.clock).0,
                    Slot::Responder => advance(theirs, mine, &p.clock).1,
                };
                if let Role::Clock { position, .. } = &mut next.role {
                    *position = moved;
                }
                if mine.value() >= p.clock.tc() {
                    next.clock_creation = false;
                }
            }
            return next;
        }
        Role::Worker { phase, value, preference } => (phase, value, preference),
        _ => unreachable!("backups and terminators handled above"),
    };
    let next_pref = next.preference().unwrap_or(preference);

    if inc_phase(phase, o, p) {
        if phase == p.m_phases || (phase % 2 == 0 && value == Value::One) {
            return next.with_role(Role::Terminator(preference));
        }
        let value = if phase % 2 == 0 && value == Value::Half { Value::One } else { value };
        return next.with_role(Role::Worker {
            phase: phase + 1,
            value,
            preference: next_pref,
        });
    }

    let (o_phase, o_value) = match o.role {
        Role::Worker { phase, value, .. } => (phase, value),
        _ => return next,
    };
    if phase.abs_diff(o_phase) > 1 {
        return backup(&next);
    }
    if phase != o_phase {
        // The other worker is one phase behind; it catches up, we stay.
        return next;
    }

    if phase % 2 == 1 {
        if value == Value::One && o_value == Value::One && pref_conflict(s, o) {
            if next.clock_creation && preference == Side::A {
                return next.with_role(Role::Clock {
                    position: ClockPosition::ZERO,
                    preference,
                });
            }
            return next.with_role(Role::Worker {
                phase,
                value: Value::Zero,
                preference: next_pref,
            });
        }
    } else if value.halves() + o_value.halves() == 2 {
        return next.with_role(Role::Worker {
            phase,
            value: Value::Half,
            preference: next_pref,
        });
    }
    next
}

/// Tally classes used for O(1) certificates.
pub mod class {
    pub const TERM_A: usize = 0;
    pub const TERM_B: usize = 1;
    /// Backups occupy `BACKUP..BACKUP + 4` in `Backup4::index` order.
    pub const BACKUP: usize = 2;
    pub const WORKER: usize = 6;
    pub const CLOCK: usize = 7;
    pub const COUNT: usize = 8;
}

#[inline]
pub fn class_of(s: &MajState) -> usize {
    match s.role {
        Role::Terminator(Side::A) => class::TERM_A,
        Role::Terminator(Side::B) => class::TERM_B,
        Role::Backup(b) => class::BACKUP + b.index(),
        Role::Worker { .. } => class::WORKER,
        Role::Clock { .. } => class::CLOCK,
    }
}

/// Phased majority as a pairwise protocol.
#[derive(Debug, Clone, Copy)]
pub struct MajorityProtocol {
    pub params: MajorityParams,
}

impl Protocol for MajorityProtocol {
    type State = MajState;
    type Output = Side;

    #[inline]
    fn interact(&self, a: &MajState, b: &MajState) -> (MajState, MajState) {
        (
            maj_update(a, b, &self.params, Slot::Initiator),
            maj_update(b, a, &self.params, Slot::Responder),
        )
    }

    #[inline]
    fn output(&self, s: &MajState) -> Side {
        s.output()
    }

    fn state_name(&self, s: &MajState) -> String {
        s.to_string()
    }

    fn classes(&self) -> usize {
        class::COUNT
    }

    #[inline]
    fn class_of(&self, s: &MajState) -> usize {
        class_of(s)
    }
}

/// Majority and minority counts for discrepancy `d`; `n - d` must be even.
pub(crate) fn split_counts(n: usize, discrepancy: usize) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::InvalidPopulation { n, min: 2 });
    }
    if discrepancy > n {
        return Err(Error::domain(format!("discrepancy {discrepancy} exceeds n = {n}")));
    }
    if !(n - discrepancy).is_multiple_of(2) {
        return Err(Error::domain(format!(
            "discrepancy {discrepancy} and n = {n} differ in parity"
        )));
    }
    Ok(((n + discrepancy) / 2, (n - discrepancy) / 2))
}

/// Discrepancy `εn` for a fractional `ε`; `εn` must be an integer.
pub fn discrepancy_from_epsilon(n: usize, epsilon: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let d = epsilon * n as f64;
    if (d - d.round()).abs() > 1e-9 {
        return Err(Error::domain(format!("epsilon * n = {d} is not an integer")));
    }
    Ok(d.round() as usize)
}

/// `(n+εn)/2` input agents on the majority side, the rest on the other.
pub fn initial_config(n: usize, discrepancy: usize, majority: Side) -> Result<AgentPopulation<MajState>> {
    let (maj, min) = split_counts(n, discrepancy)?;
    let mut agents = vec![MajState::input(majority); maj];
    agents.extend(std::iter::repeat_n(MajState::input(majority.other()), min));
    AgentPopulation::new(agents)
}
