//! The sequential simulation driver shared by every protocol.

use std::fmt::{self, Debug};
use std::io::{self, Write};

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::population::{AgentPopulation, Configuration};
use crate::rng::{select_pair_unchecked, RngStream};

/// A pairwise update rule `δ(initiator, responder)` together with its output
/// map and a small classification of states used for O(1) certificates.
pub trait Protocol {
    type State: Copy + Ord + Debug;
    type Output: Copy + Eq + Debug;

    fn interact(&self, initiator: &Self::State, responder: &Self::State) -> (Self::State, Self::State);

    fn output(&self, state: &Self::State) -> Self::Output;

    /// Canonical rendering used by trace dumps.
    fn state_name(&self, state: &Self::State) -> String {
        format!("{state:?}")
    }

    /// Number of tally classes maintained during simulation.
    fn classes(&self) -> usize {
        1
    }

    /// Tally class of a state, in `0..self.classes()`.
    fn class_of(&self, _state: &Self::State) -> usize {
        0
    }
}

/// Running count of agents per tally class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    counts: Vec<usize>,
    n: usize,
}

impl Tally {
    fn build<P: Protocol>(protocol: &P, agents: &[P::State]) -> Self {
        let mut counts = vec![0; protocol.classes()];
        for s in agents {
            counts[protocol.class_of(s)] += 1;
        }
        Tally {
            counts,
            n: agents.len(),
        }
    }

    #[inline]
    pub fn count(&self, class: usize) -> usize {
        self.counts[class]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// One application of the update rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionEvent<S> {
    pub step_index: u64,
    pub initiator: usize,
    pub responder: usize,
    pub before: (S, S),
    pub after: (S, S),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CheckLevel {
    #[default]
    None,
    /// Per-agent monotone fields plus O(1) count checks.
    Cheap,
    /// Every invariant the protocol's monitor knows, on every step.
    Full,
}

/// A broken invariant observed during a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step: u64,
    pub invariant: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}: {}", self.step, self.invariant, self.detail)
    }
}

/// Outcome of [`Simulation::run_until`].
#[derive(Debug, Clone)]
pub struct ConvergenceReport<S: Ord> {
    /// Interactions after which the certificate first held.
    pub interactions_to_certificate: Option<u64>,
    /// Last interaction that changed some agent's output; only known once a
    /// certificate has fired.
    pub interactions_to_convergence: Option<u64>,
    pub parallel_time_certificate: Option<Ratio<u64>>,
    pub interactions_run: u64,
    pub final_config: Configuration<S>,
    pub seed: u64,
}

/// `interactions / n` as an exact rational.
pub fn parallel_time(interactions: u64, n: usize) -> Result<Ratio<u64>> {
    if n == 0 {
        return Err(Error::InvalidPopulation { n, min: 1 });
    }
    Ok(Ratio::new(interactions, n as u64))
}

/// Converts an exact parallel time to a float for reporting.
pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A single simulation run: protocol, agent array and random stream.
pub struct Simulation<P: Protocol> {
    protocol: P,
    pop: AgentPopulation<P::State>,
    rng: RngStream,
    steps: u64,
    tally: Tally,
    last_output_change: u64,
    trace: Option<Vec<InteractionEvent<P::State>>>,
}

impl<P: Protocol> Simulation<P> {
    pub fn new(protocol: P, pop: AgentPopulation<P::State>, rng: RngStream) -> Self {
        let tally = Tally::build(&protocol, pop.agents());
        Simulation {
            protocol,
            pop,
            rng,
            steps: 0,
            tally,
            last_output_change: 0,
            trace: None,
        }
    }

    /// Enables recording of every interaction event.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    pub fn population(&self) -> &AgentPopulation<P::State> {
        &self.pop
    }

    pub fn n(&self) -> usize {
        self.pop.len()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn tally(&self) -> &Tally {
        &self.tally
    }

    pub fn seed(&self) -> u64 {
        self.rng.seed()
    }

    pub fn trace(&self) -> Option<&[InteractionEvent<P::State>]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Option<Vec<InteractionEvent<P::State>>> {
        self.trace.take()
    }

    /// One scheduler step: draw a uniform ordered pair and apply the rule.
    #[inline]
    pub fn step(&mut self) -> InteractionEvent<P::State> {
        let (i, j) = select_pair_unchecked(&mut self.rng, self.pop.len());
        self.apply(i, j)
    }

    /// Applies the rule to a caller-chosen ordered pair.
    pub fn step_pair(&mut self, initiator: usize, responder: usize) -> Result<InteractionEvent<P::State>> {
        let n = self.pop.len();
        if initiator == responder || initiator >= n || responder >= n {
            return Err(Error::domain(format!(
                "invalid interaction pair ({initiator}, {responder}) for n = {n}"
            )));
        }
        Ok(self.apply(initiator, responder))
    }

    #[inline]
    fn apply(&mut self, i: usize, j: usize) -> InteractionEvent<P::State> {
        let a = self.pop.get(i);
        let b = self.pop.get(j);
        let (a2, b2) = self.protocol.interact(&a, &b);
        self.steps += 1;
        if a2 != a {
            self.reclassify(&a, &a2);
        }
        if b2 != b {
            self.reclassify(&b, &b2);
        }
        self.pop.set(i, a2);
        self.pop.set(j, b2);
        let ev = InteractionEvent {
            step_index: self.steps - 1,
            initiator: i,
            responder: j,
            before: (a, b),
            after: (a2, b2),
        };
        if let Some(t) = self.trace.as_mut() {
            t.push(ev.clone());
        }
        ev
    }

    #[inline]
    fn reclassify(&mut self, old: &P::State, new: &P::State) {
        let (c0, c1) = (self.protocol.class_of(old), self.protocol.class_of(new));
        if c0 != c1 {
            self.tally.counts[c0] -= 1;
            self.tally.counts[c1] += 1;
        }
        if self.protocol.output(old) != self.protocol.output(new) {
            self.last_output_change = self.steps;
        }
    }

    /// Steps until `certificate` holds on the tally or `max_interactions`
    /// further steps have been taken.
    pub fn run_until<C>(&mut self, certificate: C, max_interactions: u64) -> ConvergenceReport<P::State>
    where
        C: FnMut(&Tally) -> bool,
    {
        match self.run_observed(certificate, max_interactions, |_, _| Ok::<(), ()>(())) {
            Ok(r) => r,
            Err(()) => unreachable!(),
        }
    }

    /// Like [`run_until`](Self::run_until), calling `hook` after every step.
    /// A hook error aborts the run and is returned unchanged.
    pub fn run_observed<C, H, V>(
        &mut self,
        mut certificate: C,
        max_interactions: u64,
        mut hook: H,
    ) -> std::result::Result<ConvergenceReport<P::State>, V>
    where
        C: FnMut(&Tally) -> bool,
        H: FnMut(&Self, &InteractionEvent<P::State>) -> std::result::Result<(), V>,
    {
        let start = self.steps;
        let mut hit = certificate(&self.tally).then_some(self.steps);
        while hit.is_none() && self.steps - start < max_interactions {
            let ev = self.step();
            hook(self, &ev)?;
            if certificate(&self.tally) {
                hit = Some(self.steps);
            }
        }
        Ok(self.report(hit))
    }

    fn report(&self, hit: Option<u64>) -> ConvergenceReport<P::State> {
        let n = self.pop.len();
        ConvergenceReport {
            interactions_to_certificate: hit,
            interactions_to_convergence: hit.map(|h| self.last_output_change.min(h)),
            parallel_time_certificate: hit.map(|h| Ratio::new(h, n as u64)),
            interactions_run: self.steps,
            final_config: self.pop.config_of(),
            seed: self.rng.seed(),
        }
    }
}

/// Writes `step,initiator,responder,before1,before2,after1,after2` lines.
pub fn write_trace<P: Protocol, W: Write>(
    out: &mut W,
    protocol: &P,
    events: &[InteractionEvent<P::State>],
) -> io::Result<()> {
    writeln!(out, "step,initiator,responder,before1,before2,after1,after2")?;
    for ev in events {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            ev.step_index,
            ev.initiator,
            ev.responder,
            protocol.state_name(&ev.before.0),
            protocol.state_name(&ev.before.1),
            protocol.state_name(&ev.after.0),
            protocol.state_name(&ev.after.1),
        )?;
    }
    Ok(())
}
