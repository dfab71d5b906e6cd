//! Transition sequences and f-bottleneck scans.

use serde::Serialize;

use super::{AnalysisError, Counts, Result};
use crate::population::StateId;
use crate::sim::InteractionEvent;

/// `(r1, r2) -> (p1, p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Transition {
    pub r1: StateId,
    pub r2: StateId,
    pub p1: StateId,
    pub p2: StateId,
}

impl Transition {
    pub fn new(r1: StateId, r2: StateId, p1: StateId, p2: StateId) -> Self {
        Transition { r1, r2, p1, p2 }
    }

    /// Applies the transition in place; fails if an input is missing.
    /// The products are the reactants, so applying it changes nothing.
    pub fn is_identity(&self) -> bool {
        (self.r1, self.r2) == (self.p1, self.p2) || (self.r1, self.r2) == (self.p2, self.p1)
    }

    pub fn apply(&self, c: &mut Counts) -> Result<()> {
        let (a, b) = (self.r1.index(), self.r2.index());
        let need_a = if a == b { 2 } else { 1 };
        if c.0.get(a).copied().unwrap_or(0) < need_a || c.0.get(b).copied().unwrap_or(0) < 1 {
            return Err(AnalysisError::Domain(format!(
                "transition ({}, {}) -> ({}, {}) not enabled",
                self.r1, self.r2, self.p1, self.p2
            )));
        }
        c.0[a] -= 1;
        c.0[b] -= 1;
        for p in [self.p1, self.p2] {
            *c.0.get_mut(p.index())
                .ok_or_else(|| AnalysisError::Domain(format!("state {p} out of range")))? += 1;
        }
        Ok(())
    }
}

/// A start configuration and the transitions applied to it in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionSeq {
    start: Counts,
    steps: Vec<Transition>,
}

impl TransitionSeq {
    /// Validates that every step is enabled when it is applied.
    pub fn new(start: Counts, steps: Vec<Transition>) -> Result<Self> {
        let mut c = start.clone();
        for (i, t) in steps.iter().enumerate() {
            t.apply(&mut c)
                .map_err(|e| AnalysisError::Domain(format!("step {i}: {e}")))?;
        }
        Ok(TransitionSeq { start, steps })
    }

    pub fn start(&self) -> &Counts {
        &self.start
    }

    pub fn steps(&self) -> &[Transition] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Configurations `c_0 = start, c_1, ..., c_len`.
    pub fn configurations(&self) -> Vec<Counts> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut c = self.start.clone();
        out.push(c.clone());
        for t in &self.steps {
            t.apply(&mut c).expect("validated on construction");
            out.push(c.clone());
        }
        out
    }

    pub fn final_config(&self) -> Counts {
        let mut c = self.start.clone();
        for t in &self.steps {
            t.apply(&mut c).expect("validated on construction");
        }
        c
    }
}

/// `c(r1) · c(r2) <= f(|c|)`.
pub fn is_bottleneck(t: &Transition, c: &Counts, f: impl Fn(usize) -> f64) -> bool {
    let a = c.0.get(t.r1.index()).copied().unwrap_or(0) as f64;
    let b = c.0.get(t.r2.index()).copied().unwrap_or(0) as f64;
    a * b <= f(c.size())
}

/// Steps of `q` that are f-bottlenecks at the configuration just before them.
/// Steps that leave the configuration unchanged are skipped.
pub fn scan_bottlenecks(q: &TransitionSeq, f: impl Fn(usize) -> f64) -> Vec<(usize, Transition)> {
    let mut c = q.start.clone();
    let n = c.size();
    let bound = f(n);
    let mut out = Vec::new();
    for (i, t) in q.steps.iter().enumerate() {
        if !t.is_identity() && is_bottleneck(t, &c, |_| bound) {
            out.push((i, *t));
        }
        t.apply(&mut c).expect("validated on construction");
    }
    out
}

/// Converts a recorded simulator trace to a transition sequence over `k`
/// states, mapping each state with `id_of`.
pub fn export_trace<S: Copy>(
    k: usize,
    start: &[S],
    events: Option<&[InteractionEvent<S>]>,
    id_of: impl Fn(&S) -> StateId,
) -> Result<TransitionSeq> {
    let events = events.ok_or_else(|| AnalysisError::Domain("run was recorded without a trace".into()))?;
    let mut counts = Counts::zero(k);
    for s in start {
        let i = id_of(s).index();
        *counts
            .0
            .get_mut(i)
            .ok_or_else(|| AnalysisError::Domain(format!("state index {i} outside a {k}-state protocol")))? += 1;
    }
    let steps = events
        .iter()
        .map(|e| Transition::new(id_of(&e.before.0), id_of(&e.before.1), id_of(&e.after.0), id_of(&e.after.1)))
        .collect();
    TransitionSeq::new(counts, steps)
}
