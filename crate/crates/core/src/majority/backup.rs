//! The 4-state exact-majority protocol used as the slow, always-correct
//! fallback of phased majority.
//!
//! Strong states `A4`/`B4` annihilate into weak states; strong agents convert
//! opposite weak agents. `#A4 - #B4` never changes, so the side with more
//! strong agents survives and eventually converts every weak agent.

use std::fmt;

use serde::Serialize;

use super::Side;
use crate::error::{Error, Result};
use crate::population::AgentPopulation;
use crate::sim::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Backup4 {
    StrongA,
    StrongB,
    WeakA,
    WeakB,
}

impl Backup4 {
    pub const ALL: [Backup4; 4] = [Backup4::StrongA, Backup4::StrongB, Backup4::WeakA, Backup4::WeakB];

    pub fn strong(side: Side) -> Self {
        match side {
            Side::A => Backup4::StrongA,
            Side::B => Backup4::StrongB,
        }
    }

    pub fn output(self) -> Side {
        match self {
            Backup4::StrongA | Backup4::WeakA => Side::A,
            Backup4::StrongB | Backup4::WeakB => Side::B,
        }
    }

    /// Index into `[A4, B4, a4, b4]`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Backup4::StrongA => "A4",
            Backup4::StrongB => "B4",
            Backup4::WeakA => "a4",
            Backup4::WeakB => "b4",
        }
    }
}

impl fmt::Display for Backup4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// New state of `s` after meeting `o`.
#[inline]
pub fn backup_rule(s: Backup4, o: Backup4) -> Backup4 {
    use Backup4::*;
    match (s, o) {
        (StrongA, StrongB) => WeakA,
        (StrongB, StrongA) => WeakB,
        (WeakB, StrongA) => WeakA,
        (WeakA, StrongB) => WeakB,
        _ => s,
    }
}

/// Stable output of a population of backups with counts `[A4, B4, a4, b4]`,
/// if no rule can ever change an output again.
pub fn four_state_certificate(counts: [usize; 4]) -> Option<Side> {
    let [sa, sb, wa, wb] = counts;
    match (sa > 0, sb > 0) {
        (true, true) => None,
        (true, false) => (wb == 0).then_some(Side::A),
        (false, true) => (wa == 0).then_some(Side::B),
        (false, false) => match (wa > 0, wb > 0) {
            (true, false) => Some(Side::A),
            (false, true) => Some(Side::B),
            _ => None,
        },
    }
}

/// The 4-state protocol on its own.
#[derive(Debug, Clone, Copy, Default)]
pub struct FourStateProtocol;

impl Protocol for FourStateProtocol {
    type State = Backup4;
    type Output = Side;

    #[inline]
    fn interact(&self, a: &Backup4, b: &Backup4) -> (Backup4, Backup4) {
        (backup_rule(*a, *b), backup_rule(*b, *a))
    }

    fn output(&self, s: &Backup4) -> Side {
        s.output()
    }

    fn state_name(&self, s: &Backup4) -> String {
        s.name().to_string()
    }

    fn classes(&self) -> usize {
        4
    }

    #[inline]
    fn class_of(&self, s: &Backup4) -> usize {
        s.index()
    }
}

impl FourStateProtocol {
    pub fn certificate(counts: &[usize]) -> Option<Side> {
        four_state_certificate([counts[0], counts[1], counts[2], counts[3]])
    }
}

/// `(n+d)/2` agents in the strong majority state and `(n-d)/2` in the other.
pub fn four_state_initial(n: usize, discrepancy: usize, majority: Side) -> Result<AgentPopulation<Backup4>> {
    let (maj, min) = super::split_counts(n, discrepancy)?;
    let mut agents = vec![Backup4::strong(majority); maj];
    agents.extend(std::iter::repeat_n(Backup4::strong(majority.other()), min));
    AgentPopulation::new(agents).map_err(|_| Error::InvalidPopulation { n, min: 2 })
}
