//! Phased leader election.
//!
//! Contenders carry a (phase, High/Low) pair and are eliminated by any agent
//! carrying a larger one; followers remember the largest pair they have seen.
//! Equal contenders spawn clocks, and clock labels drive contenders into
//! the next phase, where a synthetic coin picks the new indicator.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_clock::{advance, label, ClockLabel, ClockParams, ClockPosition};
use crate::population::{AgentPopulation, Configuration};
use crate::sim::{CheckLevel, InteractionEvent, Protocol, Simulation, Violation};

pub const DEFAULT_PHASES_MULT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Indicator {
    Low,
    High,
}

/// Phase and indicator, ordered lexicographically with `High > Low`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pair {
    pub phase: u16,
    pub indicator: Indicator,
}

impl Pair {
    pub fn new(phase: u16, indicator: Indicator) -> Self {
        Pair { phase, indicator }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self.indicator {
            Indicator::Low => "L",
            Indicator::High => "H",
        };
        write!(f, "{}{i}", self.phase)
    }
}

pub fn pair_compare(a: Pair, b: Pair) -> Ordering {
    a.cmp(&b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LERole {
    Contender { pair: Pair, created: bool, intermediate: bool },
    Follower { best: Pair },
    Clock { position: ClockPosition },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LEState {
    pub role: LERole,
    pub coin: bool,
    pub clock_creation: bool,
}

impl LEState {
    pub fn initial() -> Self {
        LEState {
            role: LERole::Contender {
                pair: Pair::new(1, Indicator::High),
                created: false,
                intermediate: false,
            },
            coin: false,
            clock_creation: true,
        }
    }

    pub fn is_contender(&self) -> bool {
        matches!(self.role, LERole::Contender { .. })
    }

    pub fn is_clock(&self) -> bool {
        matches!(self.role, LERole::Clock { .. })
    }

    fn is_intermediate(&self) -> bool {
        matches!(self.role, LERole::Contender { intermediate: true, .. })
    }

    /// Pair carried by a non-intermediate contender or a follower.
    pub fn pair(&self) -> Option<Pair> {
        match self.role {
            LERole::Contender { pair, intermediate: false, .. } => Some(pair),
            LERole::Follower { best } => Some(best),
            _ => None,
        }
    }
}

impl fmt::Display for LEState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            LERole::Contender { pair, created, intermediate } => {
                write!(f, "L({pair}{}{})", if created { ",c" } else { "" }, if intermediate { ",i" } else { "" })?
            }
            LERole::Follower { best } => write!(f, "F({best})")?,
            LERole::Clock { position } => write!(f, "C({position})")?,
        }
        write!(f, "|{}|{}", self.coin as u8, if self.clock_creation { "cc" } else { "-" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LEParams {
    n: usize,
    clock: ClockParams,
    m: u16,
}

impl LEParams {
    /// Phase cap `m = ⌈mult · log₂ n⌉`.
    pub fn new(n: usize, clock: ClockParams, phases_mult: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopulation { n, min: 2 });
        }
        if !(phases_mult > 0.0 && phases_mult.is_finite()) {
            return Err(Error::domain(format!("phase multiplier {phases_mult} must be positive")));
        }
        let m = (phases_mult * (n as f64).log2()).ceil().clamp(1.0, u16::MAX as f64) as u16;
        Ok(LEParams { n, clock, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clock(&self) -> &ClockParams {
        &self.clock
    }

    pub fn m(&self) -> u16 {
        self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Initiator,
    Responder,
}

fn advancing(phase: u16, o: &LEState, p: &LEParams) -> bool {
    match o.role {
        LERole::Clock { position } => match label(position, &p.clock) {
            ClockLabel::Even => phase % 2 == 1,
            ClockLabel::Odd => phase.is_multiple_of(2),
            ClockLabel::Buffer => false,
        },
        _ => false,
    }
}

/// New state of `s` after meeting `o`.
pub fn le_update(s: &LEState, o: &LEState, p: &LEParams, slot: Slot) -> LEState {
    let mut next = LEState { coin: !s.coin, ..*s };

    if let LERole::Contender { pair, created, intermediate: true } = s.role {
        let indicator = if o.coin { Indicator::High } else { Indicator::Low };
        next.role = LERole::Contender {
            pair: Pair::new(pair.phase + 1, indicator),
            created,
            intermediate: false,
        };
        return next;
    }
    if o.is_intermediate() {
        return next;
    }

    let both_cc = s.clock_creation && o.clock_creation;
    if !o.clock_creation {
        next.clock_creation = false;
    }

    match s.role {
        LERole::Clock { position: mine } => {
            if let LERole::Clock { position: theirs } = o.role {
                let moved = match slot {
                    Slot::Initiator => advance(mine, theirs, &p.clock).0,
                    Slot::Responder => advance(theirs, mine, &p.clock).1,
                };
                next.role = LERole::Clock { position: moved };
                if mine.value() >= p.clock.tc() {
                    next.clock_creation = false;
                }
            }
        }
        LERole::Follower { best } => {
            if let Some(theirs) = o.pair() {
                next.role = LERole::Follower { best: best.max(theirs) };
            }
        }
        LERole::Contender { pair, created, .. } => {
            if advancing(pair.phase, o, p) {
                if pair.phase < p.m {
                    next.role = LERole::Contender { pair, created, intermediate: true };
                }
                return next;
            }
            let Some(theirs) = o.pair() else { return next };
            match theirs.cmp(&pair) {
                Ordering::Greater => next.role = LERole::Follower { best: theirs },
                Ordering::Less => {}
                Ordering::Equal => {
                    let LERole::Contender { created: o_created, .. } = o.role else { return next };
                    let initiator = slot == Slot::Initiator;
                    if both_cc && !created && !o_created {
                        next.role = if initiator {
                            LERole::Clock { position: ClockPosition::ZERO }
                        } else {
                            LERole::Contender { pair, created: true, intermediate: false }
                        };
                    } else {
                        let demote = if created != o_created { created } else { initiator };
                        if demote {
                            next.role = LERole::Follower { best: pair };
                        }
                    }
                }
            }
        }
    }
    next
}

pub mod class {
    pub const CONTENDER: usize = 0;
    pub const FOLLOWER: usize = 1;
    pub const CLOCK: usize = 2;
    pub const COUNT: usize = 3;
}

#[inline]
pub fn class_of(s: &LEState) -> usize {
    match s.role {
        LERole::Contender { .. } => class::CONTENDER,
        LERole::Follower { .. } => class::FOLLOWER,
        LERole::Clock { .. } => class::CLOCK,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LeaderElectionProtocol {
    pub params: LEParams,
}

impl Protocol for LeaderElectionProtocol {
    type State = LEState;
    /// `true` for the leader output.
    type Output = bool;

    #[inline]
    fn interact(&self, a: &LEState, b: &LEState) -> (LEState, LEState) {
        (
            le_update(a, b, &self.params, Slot::Initiator),
            le_update(b, a, &self.params, Slot::Responder),
        )
    }

    #[inline]
    fn output(&self, s: &LEState) -> bool {
        s.is_contender()
    }

    fn state_name(&self, s: &LEState) -> String {
        s.to_string()
    }

    fn classes(&self) -> usize {
        class::COUNT
    }

    #[inline]
    fn class_of(&self, s: &LEState) -> usize {
        class_of(s)
    }
}

/// Exactly one contender remains.
pub fn le_certificate(c: &Configuration<LEState>) -> bool {
    c.iter().filter(|(s, _)| s.is_contender()).map(|(_, k)| k).sum::<usize>() == 1
}

pub fn le_initial(n: usize) -> Result<AgentPopulation<LEState>> {
    AgentPopulation::uniform(n, LEState::initial())
}

/// Checks leader-election invariants along a run.
#[derive(Debug, Clone)]
pub struct LeaderMonitor {
    level: CheckLevel,
    n: usize,
    contenders: usize,
    best_contender_pair: Pair,
}

impl LeaderMonitor {
    pub fn new(level: CheckLevel, agents: &[LEState]) -> Self {
        LeaderMonitor {
            level,
            n: agents.len(),
            contenders: agents.iter().filter(|s| s.is_contender()).count(),
            best_contender_pair: agents
                .iter()
                .filter_map(|s| match s.role {
                    LERole::Contender { pair, .. } => Some(pair),
                    _ => None,
                })
                .max()
                .unwrap_or(Pair::new(1, Indicator::Low)),
        }
    }

    pub fn observe(&mut self, sim: &Simulation<LeaderElectionProtocol>, ev: &InteractionEvent<LEState>) -> std::result::Result<(), Violation> {
        if self.level == CheckLevel::None {
            return Ok(());
        }
        let step = ev.step_index;
        let fail = |invariant: &'static str, detail: String| Err(Violation { step, invariant, detail });
        for (b, a) in [(ev.before.0, ev.after.0), (ev.before.1, ev.after.1)] {
            if let Some(what) = regression(&b, &a) {
                return fail("monotone fields", format!("{what}: {b} -> {a}"));
            }
        }
        let t = sim.tally();
        let c = t.count(class::CONTENDER);
        if c == 0 || c > self.contenders {
            return fail("contender count", format!("{} -> {c}", self.contenders));
        }
        self.contenders = c;
        if t.count(class::CLOCK) * 2 > self.n {
            return fail("clock count", format!("{} clocks among {} agents", t.count(class::CLOCK), self.n));
        }
        if self.level == CheckLevel::Full {
            for s in [ev.after.0, ev.after.1] {
                match s.role {
                    LERole::Contender { pair, .. } => self.best_contender_pair = self.best_contender_pair.max(pair),
                    LERole::Follower { best } if best > self.best_contender_pair => {
                        return fail("phantom pair", format!("follower holds {best}, best contender pair {}", self.best_contender_pair));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn regression(b: &LEState, a: &LEState) -> Option<&'static str> {
    match (b.role, a.role) {
        (LERole::Clock { .. }, r) if !matches!(r, LERole::Clock { .. }) => Some("clock left"),
        (LERole::Follower { .. }, LERole::Contender { .. }) => Some("follower became contender"),
        (LERole::Follower { best: p0 }, LERole::Follower { best: p1 }) if p1 < p0 => Some("follower pair decreased"),
        (LERole::Contender { pair: p0, .. }, LERole::Contender { pair: p1, .. }) if p1 < p0 => Some("contender pair decreased"),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn params() -> LEParams {
        LEParams::new(64, ClockParams::new(8, 6).unwrap(), 8.0).unwrap()
    }

    fn contender(phase: u16, indicator: Indicator, created: bool) -> LEState {
        LEState {
            role: LERole::Contender {
                pair: Pair::new(phase, indicator),
                created,
                intermediate: false,
            },
            coin: false,
            clock_creation: true,
        }
    }

    fn clock(pos: u32) -> LEState {
        LEState {
            role: LERole::Clock {
                position: ClockPosition::new(pos, params().clock()).unwrap(),
            },
            coin: false,
            clock_creation: true,
        }
    }

    fn both(a: LEState, b: LEState) -> (LEState, LEState) {
        LeaderElectionProtocol { params: params() }.interact(&a, &b)
    }

    #[test]
    fn pair_order() {
        let h3 = Pair::new(3, Indicator::High);
        assert_eq!(pair_compare(h3, Pair::new(3, Indicator::Low)), Ordering::Greater);
        assert_eq!(pair_compare(Pair::new(4, Indicator::Low), h3), Ordering::Greater);
        assert_eq!(pair_compare(Pair::new(2, Indicator::Low), Pair::new(2, Indicator::Low)), Ordering::Equal);
    }

    #[test]
    fn params_phase_cap() {
        assert_eq!(params().m(), 48);
        assert_eq!(LEParams::new(1000, ClockParams::new(8, 6).unwrap(), 8.0).unwrap().m(), 80);
        assert!(LEParams::new(1, ClockParams::new(8, 6).unwrap(), 8.0).is_err());
    }

    #[test]
    fn smaller_pair_follows() {
        let (s, o) = both(contender(2, Indicator::Low, false), contender(2, Indicator::High, false));
        assert_eq!(s.role, LERole::Follower { best: Pair::new(2, Indicator::High) });
        assert_eq!(o.role, contender(2, Indicator::High, false).role);
        assert!(s.coin && o.coin);
    }

    #[test]
    fn equal_contenders_create_clock() {
        let (s, o) = both(contender(2, Indicator::Low, false), contender(2, Indicator::Low, false));
        assert_eq!(s.role, LERole::Clock { position: ClockPosition::ZERO });
        assert_eq!(o.role, contender(2, Indicator::Low, true).role);
    }

    #[test]
    fn created_contender_follows() {
        let mut a = contender(2, Indicator::Low, true);
        a.clock_creation = false;
        let b = contender(2, Indicator::Low, false);
        let (x, y) = both(b, a);
        assert_eq!(y.role, LERole::Follower { best: Pair::new(2, Indicator::Low) });
        assert_eq!(x.role, b.role);
        assert!(!x.clock_creation);
    }

    #[test]
    fn both_created_initiator_follows() {
        let a = contender(2, Indicator::Low, true);
        let (x, y) = both(a, a);
        assert!(matches!(x.role, LERole::Follower { .. }));
        assert_eq!(y.role, a.role);
    }

    #[test]
    fn equal_follower_leaves_contender() {
        let f = LEState {
            role: LERole::Follower { best: Pair::new(3, Indicator::High) },
            ..contender(1, Indicator::High, false)
        };
        let c = contender(3, Indicator::High, false);
        let (x, y) = both(c, f);
        assert_eq!((x.role, y.role), (c.role, f.role));
    }

    #[test]
    fn follower_keeps_max() {
        let f = LEState {
            role: LERole::Follower { best: Pair::new(3, Indicator::Low) },
            ..contender(1, Indicator::High, false)
        };
        let (x, _) = both(f, contender(3, Indicator::High, false));
        assert_eq!(x.role, LERole::Follower { best: Pair::new(3, Indicator::High) });
        let (x, _) = both(f, contender(2, Indicator::High, false));
        assert_eq!(x.role, f.role);
    }

    #[test]
    fn two_step_phase_advance() {
        let c = contender(1, Indicator::High, false);
        let (x, k) = both(c, clock(17));
        assert_eq!(x.role, LERole::Contender { pair: Pair::new(1, Indicator::High), created: false, intermediate: true });
        assert_eq!(k.role, clock(17).role);
        let mut partner = contender(5, Indicator::Low, false);
        partner.coin = true;
        let (y, p2) = both(x, partner);
        assert_eq!(y.role, contender(2, Indicator::High, false).role);
        // The partner of an intermediate agent only flips its coin.
        assert_eq!(p2, LEState { coin: false, ..partner });
        let (y, _) = both(x, contender(5, Indicator::Low, false));
        assert_eq!(y.role, contender(2, Indicator::Low, false).role);
        // Odd-labelled clocks do not advance odd phases.
        let (x, _) = both(c, clock(3));
        assert_eq!(x.role, c.role);
        let (x, _) = both(contender(2, Indicator::Low, false), clock(3));
        assert!(matches!(x.role, LERole::Contender { intermediate: true, .. }));
    }

    #[test]
    fn last_phase_is_frozen() {
        let p = params();
        let c = contender(p.m(), Indicator::Low, false);
        let clk = if p.m() % 2 == 1 { clock(17) } else { clock(3) };
        let (x, _) = both(c, clk);
        assert_eq!(x, LEState { coin: true, ..c });
    }

    #[test]
    fn clocks_tick_and_cut_creation() {
        let (a, b) = both(clock(6), clock(7));
        assert_eq!(a.role, clock(7).role);
        assert_eq!(b.role, clock(7).role);
        assert!(!a.clock_creation && !b.clock_creation);
    }

    #[test]
    fn initial_and_certificate() {
        let pop = le_initial(3).unwrap();
        assert!(pop.agents().iter().all(|s| *s == LEState::initial()));
        assert!(le_initial(1).is_err());
        assert!(!le_certificate(&pop.config_of()));
        let c = Configuration::from_counts([(LEState::initial(), 1), (clock(4), 3)]);
        assert!(le_certificate(&c));
        let proto = LeaderElectionProtocol { params: params() };
        assert!(proto.output(&LEState::initial()));
    }

    #[test]
    fn run_elects_one_leader() {
        let n = 256;
        let clock = ClockParams::for_population(n, 8.0, crate::phase_clock::DEFAULT_TC_FRAC).unwrap();
        let p = LEParams::new(n, clock, DEFAULT_PHASES_MULT).unwrap();
        let mut sim = Simulation::new(LeaderElectionProtocol { params: p }, le_initial(n).unwrap(), RngStream::new(9));
        let mut mon = LeaderMonitor::new(CheckLevel::Full, sim.population().agents());
        let r = sim
            .run_observed(|t| t.count(class::CONTENDER) == 1, 200_000_000, |s, e| mon.observe(s, e))
            .unwrap();
        assert!(r.interactions_to_certificate.is_some());
    }
}
