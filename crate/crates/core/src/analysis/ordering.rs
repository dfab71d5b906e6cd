//! Constructive suffix transition ordering and an independent validator.
//!
//! Given `x ⟹_q y` with `x(A) >= β`, `y(A) = 0` and no `β²`-bottleneck in `q`
//! (`β = k²b + kb`), let `Δ` be the states with `y(d) <= b`. The constructor
//! builds an order `d_1 = A, ..., d_m` of states in `Δ`, each with a
//! transition `(d_j, s_j) -> (o_j, o_j')` occurring at least `b` times in `q`
//! whose other states lie outside `Δ` or later in the order.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::seq::{scan_bottlenecks, Transition, TransitionSeq};
use super::Counts;
use crate::population::StateId;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum OrderingError {
    #[error("precondition `{clause}` violated: {detail}")]
    Precondition { clause: &'static str, detail: String },
    #[error("no transition type repeats often enough: {0}")]
    Invariant(String),
}

/// `d_j` with its transition, written with `d_j` as the first input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub state: StateId,
    pub transition: Transition,
    /// Occurrences of the transition in `q`, in either orientation.
    pub occurrences: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderingResult {
    pub order: Vec<StateId>,
    pub witnesses: Vec<Witness>,
    pub delta: Vec<StateId>,
    pub beta: u64,
}

fn pre(clause: &'static str, detail: String) -> OrderingError {
    OrderingError::Precondition { clause, detail }
}

/// `(r1, r2) -> (p1, p2)` rewritten so that its input from `set` comes first.
fn oriented(t: &Transition, set: &BTreeSet<StateId>) -> Transition {
    if set.contains(&t.r1) {
        *t
    } else {
        Transition::new(t.r2, t.r1, t.p2, t.p1)
    }
}

fn occurrences(q: &TransitionSeq, t: &Transition) -> usize {
    let mirror = Transition::new(t.r2, t.r1, t.p2, t.p1);
    q.steps().iter().filter(|s| **s == *t || **s == mirror).count()
}

/// Builds the ordering following the reverse construction: repeatedly take
/// the last configuration with `Φ_j >= β`, collect the `Φ_j`-decreasing
/// transitions after it, and pick a type occurring at least `b` times.
pub fn suffix_ordering(
    x: &Counts,
    y: &Counts,
    q: &TransitionSeq,
    b: u64,
    k: usize,
    a: StateId,
) -> Result<OrderingResult, OrderingError> {
    if x.0.len() != k || y.0.len() != k || a.index() >= k {
        return Err(pre("x ⟹_q y", format!("configurations and A must range over {k} states")));
    }
    if q.start() != x {
        return Err(pre("x ⟹_q y", "q does not start at x".into()));
    }
    if q.final_config() != *y {
        return Err(pre("x ⟹_q y", "q does not end at y".into()));
    }
    let kk = k as u64;
    let beta = kk * kk * b + kk * b;
    if (x.get(a) as u64) < beta {
        return Err(pre("x(A) >= β", format!("x(A) = {} < β = {beta}", x.get(a))));
    }
    if y.get(a) != 0 {
        return Err(pre("y(A) = 0", format!("y(A) = {}", y.get(a))));
    }
    let bb = (beta * beta) as f64;
    if let Some((i, _)) = scan_bottlenecks(q, |_| bb).first() {
        return Err(pre("no β²-bottleneck", format!("step {i} is a {}-bottleneck", beta * beta)));
    }

    let delta: BTreeSet<StateId> = (0..k).map(|i| StateId(i as u16)).filter(|&d| (y.get(d) as u64) <= b).collect();
    let configs = q.configurations();
    let mut delta_j = delta.clone();
    let mut reversed: Vec<Witness> = Vec::new();
    loop {
        let phi = |c: &Counts| delta_j.iter().map(|&d| c.get(d) as u64).sum::<u64>();
        let last = (0..configs.len())
            .rev()
            .find(|&i| phi(&configs[i]) >= beta)
            .expect("Φ_j(x) >= x(A) >= β");
        let decreasing = |from: usize| {
            (from..q.len())
                .filter(|&t| phi(&configs[t + 1]) < phi(&configs[t]))
                .map(|t| oriented(&q.steps()[t], &delta_j))
                .filter(|t| {
                    delta_j.contains(&t.r1) && !delta_j.contains(&t.r2) && !delta_j.contains(&t.p1) && !delta_j.contains(&t.p2)
                })
                .collect::<Vec<_>>()
        };
        let mut u = decreasing(last);
        if u.is_empty() && b == 0 {
            // With b = 0 the suffix is empty; any qualifying type occurring
            // zero or more times will do, so look along all of q.
            u = decreasing(0);
        }
        let mut tally: BTreeMap<Transition, usize> = BTreeMap::new();
        for t in u {
            *tally.entry(t).or_default() += 1;
        }
        let best = tally
            .iter()
            .filter(|(_, &c)| c as u64 >= b)
            .max_by(|(t1, c1), (t2, c2)| c1.cmp(c2).then(t2.cmp(t1)))
            .map(|(t, _)| *t);
        let Some(t) = best else {
            return Err(OrderingError::Invariant(format!(
                "|Δ_j| = {}, no qualifying Φ_j-decreasing type in the suffix occurs {b} times",
                delta_j.len()
            )));
        };
        reversed.push(Witness {
            state: t.r1,
            transition: t,
            occurrences: occurrences(q, &t),
        });
        delta_j.remove(&t.r1);
        if t.r1 == a {
            break;
        }
    }
    reversed.reverse();
    Ok(OrderingResult {
        order: reversed.iter().map(|w| w.state).collect(),
        witnesses: reversed,
        delta: delta.into_iter().collect(),
        beta,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub valid: bool,
    pub reasons: Vec<String>,
}

/// Checks an ordering's three guarantees from scratch.
pub fn validate_ordering(res: &OrderingResult, q: &TransitionSeq, b: u64, y: &Counts, a: StateId) -> Validation {
    let mut reasons = Vec::new();
    let in_delta = |s: StateId| (y.0.get(s.index()).copied().unwrap_or(u32::MAX) as u64) <= b;

    if res.order.first() != Some(&a) {
        reasons.push(format!("d_1 is {:?}, expected {a}", res.order.first()));
    }
    if res.witnesses.len() != res.order.len() {
        reasons.push(format!("{} witnesses for {} states", res.witnesses.len(), res.order.len()));
    }
    let mut seen = BTreeSet::new();
    for (j, &d) in res.order.iter().enumerate() {
        if !seen.insert(d) {
            reasons.push(format!("d_{} = {d} repeats", j + 1));
        }
        if !in_delta(d) {
            reasons.push(format!("d_{} = {d} is not in Δ", j + 1));
        }
    }
    for (j, w) in res.witnesses.iter().enumerate() {
        let Some(&d) = res.order.get(j) else { break };
        let t = w.transition;
        let (s, o1, o2) = if t.r1 == d {
            (t.r2, t.p1, t.p2)
        } else if t.r2 == d {
            (t.r1, t.p2, t.p1)
        } else {
            reasons.push(format!("α_{} does not consume d_{}", j + 1, j + 1));
            continue;
        };
        let count = q
            .steps()
            .iter()
            .filter(|st| {
                (st.r1, st.r2, st.p1, st.p2) == (t.r1, t.r2, t.p1, t.p2) || (st.r1, st.r2, st.p1, st.p2) == (t.r2, t.r1, t.p2, t.p1)
            })
            .count() as u64;
        if count < b {
            reasons.push(format!("α_{} occurs {count} times, fewer than b = {b}", j + 1));
        }
        let later: BTreeSet<StateId> = res.order[j + 1..].iter().copied().collect();
        for (name, v) in [("s", s), ("o", o1), ("o'", o2)] {
            if in_delta(v) && !later.contains(&v) {
                reasons.push(format!("{name}_{} = {v} lies in Δ but not later in the order", j + 1));
            }
        }
    }
    Validation {
        valid: reasons.is_empty(),
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: StateId = StateId(0);
    const X: StateId = StateId(1);

    fn epidemic(n: u32, m: u32) -> TransitionSeq {
        let steps = vec![Transition::new(A, X, X, X); (n - m) as usize];
        TransitionSeq::new(Counts(vec![n - m, m]), steps).unwrap()
    }

    #[test]
    fn epidemic_order() {
        let q = epidemic(100, 10);
        let (x, y) = (q.start().clone(), q.final_config());
        let r = suffix_ordering(&x, &y, &q, 1, 2, A).unwrap();
        assert_eq!(r.order, vec![A]);
        assert_eq!(r.beta, 6);
        assert_eq!(r.witnesses[0].transition, Transition::new(A, X, X, X));
        assert!(r.witnesses[0].occurrences >= 1);
        assert!(validate_ordering(&r, &q, 1, &y, A).valid);
    }

    #[test]
    fn preconditions_are_named() {
        let q = TransitionSeq::new(Counts(vec![4, 0]), vec![Transition::new(A, A, X, X); 2]).unwrap();
        let (x, y) = (q.start().clone(), q.final_config());
        match suffix_ordering(&x, &y, &q, 1, 2, A) {
            Err(OrderingError::Precondition { clause, .. }) => assert_eq!(clause, "x(A) >= β"),
            other => panic!("{other:?}"),
        }
        let half = TransitionSeq::new(Counts(vec![4, 0]), vec![Transition::new(A, A, X, X)]).unwrap();
        match suffix_ordering(&x, &half.final_config(), &half, 0, 2, A) {
            Err(OrderingError::Precondition { clause, .. }) => assert_eq!(clause, "y(A) = 0"),
            other => panic!("{other:?}"),
        }
        match suffix_ordering(&x, &y, &half, 0, 2, A) {
            Err(OrderingError::Precondition { clause, .. }) => assert_eq!(clause, "x ⟹_q y"),
            other => panic!("{other:?}"),
        }
        let q = epidemic(20, 2);
        match suffix_ordering(q.start(), &q.final_config(), &q, 1, 2, A) {
            Err(OrderingError::Precondition { clause, .. }) => assert_eq!(clause, "no β²-bottleneck"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_self_annihilation_has_no_ordering() {
        // (A, A) -> (X, X) consumes a second Δ state, so no transition of the
        // required shape exists even though every precondition holds at b = 0.
        let q = TransitionSeq::new(Counts(vec![4, 0]), vec![Transition::new(A, A, X, X); 2]).unwrap();
        let (x, y) = (q.start().clone(), q.final_config());
        assert!(matches!(suffix_ordering(&x, &y, &q, 0, 2, A), Err(OrderingError::Invariant(_))));
        let forced = OrderingResult {
            order: vec![A],
            witnesses: vec![Witness { state: A, transition: Transition::new(A, A, X, X), occurrences: 2 }],
            delta: vec![A],
            beta: 0,
        };
        let v = validate_ordering(&forced, &q, 0, &y, A);
        assert!(!v.valid);
        assert!(v.reasons[0].contains("s_1"), "{:?}", v.reasons);
    }

    #[test]
    fn validator_catches_tampering() {
        let q = epidemic(100, 10);
        let y = q.final_config();
        let good = suffix_ordering(q.start(), &y, &q, 1, 2, A).unwrap();
        let mut r = good.clone();
        r.witnesses[0].transition = Transition::new(A, X, A, X);
        assert!(!validate_ordering(&r, &q, 1, &y, A).valid);
        // Recounting ignores the stored count.
        let mut r = good.clone();
        r.witnesses[0].occurrences = 0;
        assert!(validate_ordering(&r, &q, 1, &y, A).valid);
        assert!(!validate_ordering(&good, &q, 1000, &y, A).valid);
        let mut r = good.clone();
        r.order = vec![X];
        let v = validate_ordering(&r, &q, 1, &y, A);
        assert!(v.reasons.iter().any(|s| s.contains("not in Δ")));
    }

    #[test]
    fn chain_ordering() {
        // A -> B -> C relay: (A, C) -> (B, C), (B, C) -> (C, C).
        let (b_, c_) = (StateId(1), StateId(2));
        let n = 2000u32;
        let mut steps = vec![Transition::new(A, c_, b_, c_); 150];
        steps.extend(vec![Transition::new(b_, c_, c_, c_); 150]);
        let q = TransitionSeq::new(Counts(vec![150, 0, n - 150]), steps).unwrap();
        let y = q.final_config();
        let r = suffix_ordering(q.start(), &y, &q, 2, 3, A).unwrap();
        assert_eq!(r.order, vec![A, b_]);
        assert!(validate_ordering(&r, &q, 2, &y, A).valid);
    }
}
