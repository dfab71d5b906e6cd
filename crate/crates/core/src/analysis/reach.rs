//! Reachability graphs, stable decisions and output dominance.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use super::{AnalysisError, Counts, ProtocolSpec, Result};
use crate::population::StateId;

/// Configurations reachable in one non-trivial step from `c`, in a fixed
/// order (initiator state, then responder state).
pub fn successors(c: &Counts, spec: &ProtocolSpec) -> Vec<(StateId, StateId, Counts)> {
    let mut out = Vec::new();
    for a in c.support() {
        for b in c.support() {
            if a == b && c.get(a) < 2 {
                continue;
            }
            let (x, y) = spec.delta(a, b);
            if (x, y) == (a, b) {
                continue;
            }
            let mut next = c.clone();
            next.0[a.index()] -= 1;
            next.0[b.index()] -= 1;
            next.0[x.index()] += 1;
            next.0[y.index()] += 1;
            if next != *c {
                out.push((a, b, next));
            }
        }
    }
    out
}

/// Explicit reachability graph in breadth-first discovery order.
#[derive(Debug, Clone)]
pub struct ReachGraph {
    pub nodes: Vec<Counts>,
    pub edges: Vec<Vec<usize>>,
}

impl ReachGraph {
    pub fn explore(c0: &Counts, spec: &ProtocolSpec, cap: usize) -> Result<Self> {
        if c0.0.len() != spec.k() {
            return Err(AnalysisError::Domain(format!(
                "configuration has {} entries for a {}-state protocol",
                c0.0.len(),
                spec.k()
            )));
        }
        let mut index: HashMap<Counts, usize> = HashMap::new();
        let mut nodes = vec![c0.clone()];
        let mut edges = vec![Vec::new()];
        index.insert(c0.clone(), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let mut out = Vec::new();
            for (_, _, next) in successors(&nodes[v], spec) {
                let w = match index.get(&next) {
                    Some(&w) => w,
                    None => {
                        if nodes.len() >= cap {
                            return Err(AnalysisError::CapExceeded { cap });
                        }
                        let w = nodes.len();
                        index.insert(next.clone(), w);
                        nodes.push(next);
                        edges.push(Vec::new());
                        queue.push_back(w);
                        w
                    }
                };
                if !out.contains(&w) {
                    out.push(w);
                }
            }
            edges[v] = out;
        }
        Ok(ReachGraph { nodes, edges })
    }

    /// Output shared by every agent of node `v`, if any.
    fn homogeneous(&self, v: usize, spec: &ProtocolSpec) -> Option<u16> {
        let mut it = self.nodes[v].support().map(|s| spec.output_of(s));
        let o = it.next()?;
        it.all(|x| x == o).then_some(o)
    }

    /// Stable decision of every node: `Some(o)` iff every node reachable
    /// from it (itself included) is homogeneous with output `o`.
    pub fn stable(&self, spec: &ProtocolSpec) -> Vec<Option<u16>> {
        let n = self.nodes.len();
        let mut rev = vec![Vec::new(); n];
        for (v, out) in self.edges.iter().enumerate() {
            for &w in out {
                rev[w].push(v);
            }
        }
        let homog: Vec<Option<u16>> = (0..n).map(|v| self.homogeneous(v, spec)).collect();
        let mut result = vec![None; n];
        for o in 0..spec.symbols().len() as u16 {
            // Nodes that can reach something not homogeneous with `o`.
            let mut bad = vec![false; n];
            let mut queue: VecDeque<usize> = (0..n).filter(|&v| homog[v] != Some(o)).collect();
            for &v in &queue {
                bad[v] = true;
            }
            while let Some(w) = queue.pop_front() {
                for &v in &rev[w] {
                    if !bad[v] {
                        bad[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            for v in 0..n {
                if !bad[v] {
                    result[v] = Some(o);
                }
            }
        }
        result
    }
}

/// Every configuration reachable from `c0`, in breadth-first order.
pub fn reachable(c0: &Counts, spec: &ProtocolSpec, cap: usize) -> Result<Vec<Counts>> {
    Ok(ReachGraph::explore(c0, spec, cap)?.nodes)
}

/// Outputs `o` such that some configuration reachable from `c0` has the
/// stable decision `o`.
pub fn stable_decisions(c0: &Counts, spec: &ProtocolSpec, cap: usize) -> Result<BTreeSet<u16>> {
    let g = ReachGraph::explore(c0, spec, cap)?;
    Ok(g.stable(spec).into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Stable configuration reachable from an initial one.
    pub c: Counts,
    pub decision: u16,
    /// Configuration supported on the support of `c`.
    pub c_prime: Counts,
    /// Configuration reachable from `c_prime` with a different stable decision.
    pub c_double_prime: Counts,
    pub other_decision: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominanceReport {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
    pub initial_configs: usize,
    pub stable_configs: usize,
    pub derived_configs: usize,
}

/// All count vectors over `states` (each count at least 1 if `strict`) with
/// total `n`, in lexicographic order.
fn compositions(states: &[StateId], k: usize, n: u32, strict: bool) -> Vec<Counts> {
    fn go(states: &[StateId], i: usize, left: u32, strict: bool, cur: &mut Counts, out: &mut Vec<Counts>) {
        if i + 1 == states.len() {
            if !strict || left > 0 {
                cur.0[states[i].index()] = left;
                out.push(cur.clone());
                cur.0[states[i].index()] = 0;
            }
            return;
        }
        let lo = strict as u32;
        for c in lo..=left {
            cur.0[states[i].index()] = c;
            go(states, i + 1, left - c, strict, cur, out);
        }
        cur.0[states[i].index()] = 0;
    }
    let mut out = Vec::new();
    if !states.is_empty() {
        go(states, 0, n, strict, &mut Counts::zero(k), &mut out);
    }
    out
}

/// Checks output dominance for all initial configurations of size
/// `2..=n_max`: whenever `c` is a reachable stable configuration with
/// decision `o`, every configuration of size `1..=n_max` supported inside
/// `c`'s support can only reach stable decisions equal to `o`.
pub fn output_dominance_check(spec: &ProtocolSpec, n_max: usize, cap: usize) -> Result<DominanceReport> {
    let k = spec.k();
    let mut report = DominanceReport {
        holds: true,
        counterexample: None,
        initial_configs: 0,
        stable_configs: 0,
        derived_configs: 0,
    };
    let mut stable_cs: Vec<(Counts, u16)> = Vec::new();
    let mut seen = BTreeSet::new();
    for n in 2..=n_max as u32 {
        for c0 in compositions(spec.inputs(), k, n, false) {
            report.initial_configs += 1;
            let g = ReachGraph::explore(&c0, spec, cap)?;
            for (v, d) in g.stable(spec).into_iter().enumerate() {
                if let Some(o) = d {
                    if seen.insert(g.nodes[v].clone()) {
                        stable_cs.push((g.nodes[v].clone(), o));
                    }
                }
            }
        }
    }
    report.stable_configs = stable_cs.len();

    // Stable decisions reachable from each derived configuration, with the
    // first witness per decision.
    let mut memo: HashMap<Counts, Vec<(u16, Counts)>> = HashMap::new();
    for (c, o) in &stable_cs {
        let support: Vec<StateId> = c.support().collect();
        let mut subsets = Vec::new();
        for mask in 1u32..(1 << support.len()) {
            let sub: Vec<StateId> = (0..support.len()).filter(|i| mask >> i & 1 == 1).map(|i| support[i]).collect();
            subsets.push(sub);
        }
        for sub in subsets {
            for size in sub.len() as u32..=n_max as u32 {
                for cp in compositions(&sub, k, size, true) {
                    if !memo.contains_key(&cp) {
                        let g = ReachGraph::explore(&cp, spec, cap)?;
                        let mut found: Vec<(u16, Counts)> = Vec::new();
                        for (v, d) in g.stable(spec).into_iter().enumerate() {
                            if let Some(d) = d {
                                if !found.iter().any(|(x, _)| *x == d) {
                                    found.push((d, g.nodes[v].clone()));
                                }
                            }
                        }
                        memo.insert(cp.clone(), found);
                    }
                    if let Some((d, c2)) = memo[&cp].iter().find(|(d, _)| d != o) {
                        report.holds = false;
                        report.counterexample = Some(Counterexample {
                            c: c.clone(),
                            decision: *o,
                            c_prime: cp,
                            c_double_prime: c2.clone(),
                            other_decision: *d,
                        });
                        report.derived_configs = memo.len();
                        return Ok(report);
                    }
                }
            }
        }
    }
    report.derived_configs = memo.len();
    Ok(report)
}
