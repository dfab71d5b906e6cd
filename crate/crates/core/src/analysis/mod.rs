//! Exhaustive tools for explicit finite protocols: a text format, reachability,
//! stable decisions, output dominance, bottleneck scans and suffix orderings.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::population::{AgentPopulation, Configuration, StateId};
use crate::sim::Protocol;

pub mod expr;
pub mod gen;
pub mod ordering;
pub mod reach;
pub mod seq;

pub use expr::Expr;
pub use ordering::{suffix_ordering, validate_ordering, OrderingError, OrderingResult, Validation, Witness};
pub use reach::{output_dominance_check, reachable, stable_decisions, DominanceReport};
pub use seq::{export_trace, is_bottleneck, scan_bottlenecks, Transition, TransitionSeq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("exploration exceeded the cap of {cap} configurations")]
    CapExceeded { cap: usize },
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// Dense configuration: `counts[s]` agents in state `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Counts(pub Vec<u32>);

impl Counts {
    pub fn zero(k: usize) -> Self {
        Counts(vec![0; k])
    }

    pub fn size(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn get(&self, s: StateId) -> u32 {
        self.0[s.index()]
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| StateId(i as u16))
    }

    pub fn to_config(&self) -> Configuration<StateId> {
        Configuration::from_counts(self.0.iter().enumerate().map(|(i, &c)| (StateId(i as u16), c as usize)))
    }

    pub fn from_config(c: &Configuration<StateId>, k: usize) -> Result<Self> {
        let mut v = vec![0u32; k];
        for (s, n) in c.iter() {
            let slot = v
                .get_mut(s.index())
                .ok_or_else(|| AnalysisError::Domain(format!("state {s} outside a {k}-state protocol")))?;
            *slot = n as u32;
        }
        Ok(Counts(v))
    }
}

/// An explicit protocol over `k` named states. Unlisted ordered pairs are
/// no-ops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolSpec {
    names: Vec<String>,
    outputs: Vec<u16>,
    symbols: Vec<String>,
    inputs: Vec<StateId>,
    delta: Vec<(StateId, StateId)>,
}

impl ProtocolSpec {
    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.index()]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|x| x == name).map(|i| StateId(i as u16))
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.k()).map(|i| StateId(i as u16))
    }

    pub fn inputs(&self) -> &[StateId] {
        &self.inputs
    }

    /// Output symbol index of `s`.
    #[inline]
    pub fn output_of(&self, s: StateId) -> u16 {
        self.outputs[s.index()]
    }

    pub fn symbol(&self, o: u16) -> &str {
        &self.symbols[o as usize]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    #[inline]
    pub fn delta(&self, a: StateId, b: StateId) -> (StateId, StateId) {
        self.delta[a.index() * self.k() + b.index()]
    }

    pub fn is_noop(&self, a: StateId, b: StateId) -> bool {
        self.delta(a, b) == (a, b)
    }

    /// Parses `name:count` pairs separated by commas, e.g. `A:2,B:1`.
    pub fn parse_counts(&self, text: &str) -> Result<Counts> {
        let mut c = Counts::zero(self.k());
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, count) = part
                .split_once(':')
                .ok_or_else(|| AnalysisError::Domain(format!("expected name:count, got `{part}`")))?;
            let s = self
                .state(name.trim())
                .ok_or_else(|| AnalysisError::Domain(format!("unknown state `{}`", name.trim())))?;
            let count: u32 = count
                .trim()
                .parse()
                .map_err(|_| AnalysisError::Domain(format!("bad count in `{part}`")))?;
            c.0[s.index()] += count;
        }
        Ok(c)
    }

    pub fn format_counts(&self, c: &Counts) -> String {
        let parts: Vec<String> = c.support().map(|s| format!("{}:{}", self.name(s), c.get(s))).collect();
        parts.join(",")
    }

    /// Builds a spec directly; `rules` lists non-default ordered transitions.
    pub fn from_parts(
        states: &[(&str, &str, bool)],
        rules: &[((&str, &str), (&str, &str))],
    ) -> Result<Self> {
        let mut text = String::new();
        for (name, out, input) in states {
            text.push_str(&format!("state {name} output={out}{}\n", if *input { " input" } else { "" }));
        }
        for ((a, b), (c, d)) in rules {
            text.push_str(&format!("rule {a} {b} -> {c} {d}\n"));
        }
        parse_protocol(&text)
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.states() {
            write!(f, "state {} output={}", self.name(s), self.symbol(self.output_of(s)))?;
            if self.inputs.contains(&s) {
                f.write_str(" input")?;
            }
            writeln!(f)?;
        }
        for a in self.states() {
            for b in self.states() {
                if !self.is_noop(a, b) {
                    let (c, d) = self.delta(a, b);
                    writeln!(f, "rule {} {} -> {} {}", self.name(a), self.name(b), self.name(c), self.name(d))?;
                }
            }
        }
        Ok(())
    }
}

/// Parses the line format
///
/// ```text
/// state <name> output=<symbol> [input]
/// symmetric
/// rule <s1> <s2> -> <t1> <t2>
/// ```
///
/// `#` starts a comment. After a `symmetric` line every rule also defines its
/// mirror `(s2, s1) -> (t2, t1)` unless that pair is named explicitly.
pub fn parse_protocol(text: &str) -> Result<ProtocolSpec> {
    let mut names: Vec<String> = Vec::new();
    let mut outputs = Vec::new();
    let mut symbols: Vec<String> = Vec::new();
    let mut inputs = Vec::new();
    let mut rules: BTreeMap<(u16, u16), ((u16, u16), usize, bool)> = BTreeMap::new();
    let mut symmetric = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| AnalysisError::Parse { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        match words[0] {
            "state" => {
                if !rules.is_empty() {
                    return Err(err("states must be declared before rules".into()));
                }
                let name = *words.get(1).ok_or_else(|| err("state without a name".into()))?;
                if names.iter().any(|n| n == name) {
                    return Err(err(format!("state `{name}` declared twice")));
                }
                let mut output = None;
                let mut input = false;
                for w in &words[2..] {
                    if let Some(sym) = w.strip_prefix("output=") {
                        if sym.is_empty() {
                            return Err(err(format!("empty output symbol for `{name}`")));
                        }
                        output = Some(sym);
                    } else if *w == "input" {
                        input = true;
                    } else {
                        return Err(err(format!("unexpected `{w}`")));
                    }
                }
                let sym = output.ok_or_else(|| err(format!("state `{name}` has no output symbol")))?;
                let o = match symbols.iter().position(|s| s == sym) {
                    Some(o) => o,
                    None => {
                        symbols.push(sym.to_string());
                        symbols.len() - 1
                    }
                };
                if names.len() >= u16::MAX as usize {
                    return Err(err("too many states".into()));
                }
                if input {
                    inputs.push(StateId(names.len() as u16));
                }
                names.push(name.to_string());
                outputs.push(o as u16);
            }
            "symmetric" if words.len() == 1 => symmetric = true,
            "rule" => {
                if words.len() != 6 || words[3] != "->" {
                    return Err(err("expected `rule <s1> <s2> -> <t1> <t2>`".into()));
                }
                let id = |w: &str| {
                    names
                        .iter()
                        .position(|n| n == w)
                        .map(|i| i as u16)
                        .ok_or_else(|| err(format!("unknown state `{w}`")))
                };
                let (a, b, c, d) = (id(words[1])?, id(words[2])?, id(words[4])?, id(words[5])?);
                if let Some((_, prev, false)) = rules.get(&(a, b)) {
                    return Err(err(format!("duplicate rule for ({}, {}), first given on line {prev}", words[1], words[2])));
                }
                rules.insert((a, b), ((c, d), line, false));
                if symmetric && a != b {
                    match rules.get(&(b, a)) {
                        Some((_, _, false)) => {}
                        _ => {
                            rules.insert((b, a), ((d, c), line, true));
                        }
                    }
                }
            }
            w => return Err(err(format!("unknown directive `{w}`"))),
        }
    }

    if names.is_empty() {
        return Err(AnalysisError::Parse { line: 0, msg: "no states declared".into() });
    }
    if inputs.is_empty() {
        return Err(AnalysisError::Parse { line: 0, msg: "no input states declared".into() });
    }
    let k = names.len();
    let mut delta: Vec<(StateId, StateId)> = (0..k * k)
        .map(|i| (StateId((i / k) as u16), StateId((i % k) as u16)))
        .collect();
    for ((a, b), ((c, d), _, _)) in rules {
        delta[a as usize * k + b as usize] = (StateId(c), StateId(d));
    }
    Ok(ProtocolSpec {
        names,
        outputs,
        symbols,
        inputs,
        delta,
    })
}

/// Runs an explicit protocol in the simulator.
#[derive(Debug, Clone)]
pub struct SpecProtocol {
    pub spec: ProtocolSpec,
}

impl Protocol for SpecProtocol {
    type State = StateId;
    type Output = u16;

    #[inline]
    fn interact(&self, a: &StateId, b: &StateId) -> (StateId, StateId) {
        self.spec.delta(*a, *b)
    }

    #[inline]
    fn output(&self, s: &StateId) -> u16 {
        self.spec.output_of(*s)
    }

    fn state_name(&self, s: &StateId) -> String {
        self.spec.name(*s).to_string()
    }

    fn classes(&self) -> usize {
        self.spec.k()
    }

    #[inline]
    fn class_of(&self, s: &StateId) -> usize {
        s.index()
    }
}

impl SpecProtocol {
    /// Output symbol if the configuration with these counts is terminal (no
    /// enabled transition changes a state) and output-homogeneous.
    pub fn silent_output(&self, counts: &[usize]) -> Option<u16> {
        let present: Vec<StateId> = (0..counts.len()).filter(|&i| counts[i] > 0).map(|i| StateId(i as u16)).collect();
        let o = self.spec.output_of(*present.first()?);
        if present.iter().any(|&s| self.spec.output_of(s) != o) {
            return None;
        }
        for &a in &present {
            for &b in &present {
                if (a != b || counts[a.index()] >= 2) && !self.spec.is_noop(a, b) {
                    return None;
                }
            }
        }
        Some(o)
    }

    pub fn population(&self, c: &Counts) -> crate::Result<AgentPopulation<StateId>> {
        let mut agents = Vec::with_capacity(c.size());
        for s in c.support() {
            agents.extend(std::iter::repeat_n(s, c.get(s) as usize));
        }
        AgentPopulation::new(agents)
    }
}
