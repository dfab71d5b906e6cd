//! Leaderless phase clock.
//!
//! Each clock holds a position on a loop of size `Ψ = 4ρ`. When two clocks
//! meet, the one with the lower position advances, except across the wrap
//! point, where the higher one (the one about to wrap) advances. Analysed in
//! weight space the process is the two-choice balls-into-bins process, which
//! keeps every clock within `O(log n)` of the mean.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::population::{AgentPopulation, Configuration};
use crate::rng::{select_pair_unchecked, RngStream};
use crate::sim::{Protocol, Simulation};

pub const DEFAULT_RHO_MULT: f64 = 8.0;
/// Keeps `T_c / ρ` at the ratio 23/29 used by the clock-creation analysis.
pub const DEFAULT_TC_FRAC: f64 = 23.0 / 29.0;
pub const DEFAULT_ALPHA: f64 = 0.25;
pub const DEFAULT_BETA: u32 = 1;

/// Phase clock parameters. `psi` is always `4 * rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockParams {
    rho: u32,
    psi: u32,
    tc: u32,
    alpha: f64,
    beta: u32,
}

impl ClockParams {
    pub fn new(rho: u32, tc: u32) -> Result<Self> {
        if rho < 2 || rho > (u16::MAX as u32) / 4 {
            return Err(Error::domain(format!("rho = {rho} out of range")));
        }
        if tc == 0 || tc >= rho {
            return Err(Error::domain(format!("clock-creation threshold {tc} must lie in (0, {rho})")));
        }
        Ok(ClockParams {
            rho,
            psi: 4 * rho,
            tc,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
        })
    }

    /// `ρ = ⌈C ln n⌉` and `T_c = ⌈f ρ⌉`, clamped into `(0, ρ)`.
    pub fn for_population(n: usize, rho_mult: f64, tc_frac: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPopulation { n, min: 2 });
        }
        if !(rho_mult > 0.0) || !rho_mult.is_finite() {
            return Err(Error::domain(format!("rho multiplier {rho_mult} must be positive")));
        }
        if !(tc_frac > 0.0 && tc_frac < 1.0) {
            return Err(Error::domain(format!("tc fraction {tc_frac} must lie in (0, 1)")));
        }
        let rho = ((rho_mult * (n as f64).ln()).ceil() as u32).max(2);
        let tc = ((tc_frac * rho as f64).ceil() as u32).clamp(1, rho - 1);
        Self::new(rho, tc)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: u32) -> Result<Self> {
        if beta == 0 {
            return Err(Error::domain("beta must be positive"));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn psi(&self) -> u32 {
        self.psi
    }

    pub fn tc(&self) -> u32 {
        self.tc
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    pub fn position(&self, pos: u32) -> Result<ClockPosition> {
        ClockPosition::new(pos, self)
    }
}

/// Position on the clock loop, `0 <= pos < Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ClockPosition(u16);

impl ClockPosition {
    pub const ZERO: ClockPosition = ClockPosition(0);

    pub fn new(pos: u32, p: &ClockParams) -> Result<Self> {
        if pos >= p.psi {
            return Err(Error::domain(format!("clock position {pos} outside [0, {})", p.psi)));
        }
        Ok(ClockPosition(pos as u16))
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }
}

impl fmt::Display for ClockPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClockLabel {
    Odd,
    Even,
    Buffer,
}

/// `[0, ρ)` is ODD, `[2ρ, 3ρ)` is EVEN, everything else is buffer.
#[inline]
pub fn label(pos: ClockPosition, p: &ClockParams) -> ClockLabel {
    let v = pos.value();
    if v < p.rho {
        ClockLabel::Odd
    } else if (2 * p.rho..3 * p.rho).contains(&v) {
        ClockLabel::Even
    } else {
        ClockLabel::Buffer
    }
}

/// Distance between two positions around the loop.
#[inline]
pub fn circular_gap(i: ClockPosition, j: ClockPosition, p: &ClockParams) -> u32 {
    let d = i.value().abs_diff(j.value());
    d.min(p.psi - d)
}

/// Result of a checked clock interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tick {
    Advanced(ClockPosition, ClockPosition),
    /// The two clocks were at least `ρ` apart.
    GapViolation { gap: u32 },
}

#[inline]
fn increment(pos: ClockPosition, p: &ClockParams) -> ClockPosition {
    let v = pos.value() + 1;
    ClockPosition(if v == p.psi { 0 } else { v as u16 })
}

/// The position-update rule without the gap check.
///
/// The lower position advances, unless the lower one is in `[0, ρ)` and the
/// higher one in `[Ψ-ρ, Ψ)`, in which case the higher one advances. Reaching
/// `Ψ` wraps to 0. On equal positions the responder advances.
#[inline]
pub fn advance(i: ClockPosition, j: ClockPosition, p: &ClockParams) -> (ClockPosition, ClockPosition) {
    let (a, b) = (i.value(), j.value());
    if a == b {
        return (i, increment(j, p));
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let wrap = lo < p.rho && hi >= p.psi - p.rho;
    let bump_first = if wrap { a == hi } else { a == lo };
    if bump_first {
        (increment(i, p), j)
    } else {
        (i, increment(j, p))
    }
}

/// One clock/clock interaction, reporting a violation when the two
/// positions are at least `ρ` apart around the loop.
pub fn clock_tick(i: ClockPosition, j: ClockPosition, p: &ClockParams) -> Result<Tick> {
    if i.value() >= p.psi || j.value() >= p.psi {
        return Err(Error::domain(format!("clock positions ({i}, {j}) invalid for psi = {}", p.psi)));
    }
    let gap = circular_gap(i, j, p);
    if gap >= p.rho {
        return Ok(Tick::GapViolation { gap });
    }
    let (a, b) = advance(i, j, p);
    Ok(Tick::Advanced(a, b))
}

fn top_occupied(c: &Configuration<ClockPosition>, p: &ClockParams) -> bool {
    c.support().any(|pos| pos.value() >= p.psi - p.rho)
}

#[inline]
fn weight_with(pos: u32, top: bool, p: &ClockParams) -> u32 {
    if top && pos < p.rho {
        pos + p.psi
    } else {
        pos
    }
}

/// Wrap-adjusted weight of an agent at `pos`: positions in `[0, ρ)` count as
/// `pos + Ψ` whenever some agent sits in `[Ψ-ρ, Ψ)`.
pub fn weight(pos: ClockPosition, c: &Configuration<ClockPosition>, p: &ClockParams) -> Result<u32> {
    if c.get(&pos) == 0 {
        return Err(Error::domain(format!("position {pos} not occupied")));
    }
    Ok(weight_with(pos.value(), top_occupied(c, p), p))
}

/// `G(c)`: largest minus smallest weight.
pub fn gap(c: &Configuration<ClockPosition>, p: &ClockParams) -> Result<u32> {
    if c.is_empty() {
        return Err(Error::domain("gap of an empty configuration"));
    }
    let top = top_occupied(c, p);
    let ws = c.support().map(|pos| weight_with(pos.value(), top, p));
    let (lo, hi) = ws.fold((u32::MAX, 0), |(lo, hi), w| (lo.min(w), hi.max(w)));
    Ok(hi - lo)
}

/// Weights minus their mean, one entry per agent.
pub fn centered_weights(positions: &[ClockPosition], p: &ClockParams) -> Vec<f64> {
    let top = positions.iter().any(|pos| pos.value() >= p.psi - p.rho);
    let w: Vec<f64> = positions
        .iter()
        .map(|pos| weight_with(pos.value(), top, p) as f64)
        .collect();
    center(&w)
}

fn center(w: &[f64]) -> Vec<f64> {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    w.iter().map(|x| x - mean).collect()
}

/// `Γ = Σ 2 cosh(α x)` over centered weights `x`.
pub fn gamma_potential(x: &[f64], alpha: f64) -> f64 {
    x.iter().map(|&v| (alpha * v).exp() + (-alpha * v).exp()).sum()
}

/// Maintains `G(c)` under single-agent moves in amortized O(1).
#[derive(Debug, Clone)]
pub struct GapTracker {
    params: ClockParams,
    hist: Vec<u32>,
    top: u32,
    lo: u32,
    hi: u32,
}

impl GapTracker {
    pub fn new(positions: &[ClockPosition], params: ClockParams) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain("gap of an empty configuration"));
        }
        let mut hist = vec![0u32; params.psi as usize];
        for pos in positions {
            hist[pos.value() as usize] += 1;
        }
        let top = hist[(params.psi - params.rho) as usize..].iter().sum();
        let mut t = GapTracker {
            params,
            hist,
            top,
            lo: 0,
            hi: 0,
        };
        t.recompute();
        Ok(t)
    }

    #[inline]
    fn w(&self, pos: u32) -> u32 {
        weight_with(pos, self.top > 0, &self.params)
    }

    #[inline]
    fn occupied_weight(&self, w: u32) -> bool {
        let pos = if w >= self.params.psi { w - self.params.psi } else { w };
        self.hist[pos as usize] > 0 && self.w(pos) == w
    }

    fn recompute(&mut self) {
        let (mut lo, mut hi) = (u32::MAX, 0);
        for (pos, &h) in self.hist.iter().enumerate() {
            if h > 0 {
                let w = self.w(pos as u32);
                lo = lo.min(w);
                hi = hi.max(w);
            }
        }
        self.lo = lo;
        self.hi = hi;
    }

    /// Moves one agent from `old` to `new`.
    pub fn apply(&mut self, old: ClockPosition, new: ClockPosition) {
        if old == new {
            return;
        }
        let boundary = self.params.psi - self.params.rho;
        let (o, nw) = (old.value(), new.value());
        let had_top = self.top > 0;
        let w_old = self.w(o);
        self.hist[o as usize] -= 1;
        self.hist[nw as usize] += 1;
        if o >= boundary {
            self.top -= 1;
        }
        if nw >= boundary {
            self.top += 1;
        }
        if had_top != (self.top > 0) {
            self.recompute();
            return;
        }
        let w_new = self.w(nw);
        self.lo = self.lo.min(w_new);
        self.hi = self.hi.max(w_new);
        if self.hist[o as usize] == 0 {
            if w_old == self.lo {
                while !self.occupied_weight(self.lo) {
                    self.lo += 1;
                }
            }
            if w_old == self.hi {
                while !self.occupied_weight(self.hi) {
                    self.hi -= 1;
                }
            }
        }
    }

    pub fn gap(&self) -> u32 {
        self.hi - self.lo
    }
}

/// Unbounded two-choice process: of two sampled bins, the less loaded one
/// receives a ball (ties go to the second).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoChoiceProcess {
    loads: Vec<u64>,
}

impl TwoChoiceProcess {
    pub fn new(loads: Vec<u64>) -> Self {
        TwoChoiceProcess { loads }
    }

    pub fn loads(&self) -> &[u64] {
        &self.loads
    }

    #[inline]
    pub fn step(&mut self, i: usize, j: usize) {
        if self.loads[i] < self.loads[j] {
            self.loads[i] += 1;
        } else {
            self.loads[j] += 1;
        }
    }

    pub fn centered(&self) -> Vec<f64> {
        let w: Vec<f64> = self.loads.iter().map(|&l| l as f64).collect();
        center(&w)
    }

    pub fn gap(&self) -> u64 {
        let lo = self.loads.iter().min().copied().unwrap_or(0);
        let hi = self.loads.iter().max().copied().unwrap_or(0);
        hi - lo
    }
}

/// Monte Carlo estimate of the one-step potential drift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftEstimate {
    pub gamma_before: f64,
    pub gamma_after_mean: f64,
    /// `mean_after - (1 - α/n) Γ_before`.
    pub theta_hat: f64,
    pub sample_count: usize,
}

/// Estimates `E[Γ(t+1) | Γ(t)]` from the loads in `start` under the
/// unbounded two-choice process.
pub fn estimate_drift(start: &[u64], p: &ClockParams, samples: usize, rng: &mut RngStream) -> Result<DriftEstimate> {
    let n = start.len();
    if n < 2 {
        return Err(Error::InvalidPopulation { n, min: 2 });
    }
    if samples == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    let base = TwoChoiceProcess::new(start.to_vec());
    let gamma_before = gamma_potential(&base.centered(), p.alpha);
    let mut sum = 0.0;
    for _ in 0..samples {
        let mut proc = base.clone();
        let (i, j) = select_pair_unchecked(rng, n);
        proc.step(i, j);
        sum += gamma_potential(&proc.centered(), p.alpha);
    }
    let gamma_after_mean = sum / samples as f64;
    Ok(DriftEstimate {
        gamma_before,
        gamma_after_mean,
        theta_hat: gamma_after_mean - (1.0 - p.alpha / n as f64) * gamma_before,
        sample_count: samples,
    })
}

/// A population made only of clocks (no gap check: violations are observed,
/// not acted upon).
#[derive(Debug, Clone, Copy)]
pub struct PhaseClockProtocol {
    pub params: ClockParams,
}

impl Protocol for PhaseClockProtocol {
    type State = ClockPosition;
    type Output = ClockLabel;

    #[inline]
    fn interact(&self, a: &ClockPosition, b: &ClockPosition) -> (ClockPosition, ClockPosition) {
        advance(*a, *b, &self.params)
    }

    fn output(&self, s: &ClockPosition) -> ClockLabel {
        label(*s, &self.params)
    }

    fn state_name(&self, s: &ClockPosition) -> String {
        format!("V{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSample {
    pub interaction: u64,
    pub gap: u32,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRun {
    pub n: usize,
    pub seed: u64,
    pub interactions: u64,
    pub max_gap: u32,
    /// First interaction after which `G(c) >= ρ`.
    pub first_violation: Option<u64>,
    pub samples: Vec<GapSample>,
}

/// Runs `n` clocks from position 0 for `interactions` steps, tracking the gap
/// after every step and sampling `(gap, Γ)` every `sample_every` steps
/// (0 disables sampling).
pub fn clock_gap_run(n: usize, params: ClockParams, seed: u64, interactions: u64, sample_every: u64) -> Result<GapRun> {
    let pop = AgentPopulation::uniform(n, ClockPosition::ZERO)?;
    let mut tracker = GapTracker::new(pop.agents(), params)?;
    let mut sim = Simulation::new(PhaseClockProtocol { params }, pop, RngStream::new(seed));
    let mut run = GapRun {
        n,
        seed,
        interactions,
        max_gap: 0,
        first_violation: None,
        samples: Vec::new(),
    };
    let sample = |sim: &Simulation<PhaseClockProtocol>, gap: u32| GapSample {
        interaction: sim.steps(),
        gap,
        gamma: gamma_potential(&centered_weights(sim.population().agents(), &params), params.alpha),
    };
    if sample_every > 0 {
        run.samples.push(sample(&sim, tracker.gap()));
    }
    sim.run_observed(
        |_| false,
        interactions,
        |sim, ev| {
            tracker.apply(ev.before.0, ev.after.0);
            tracker.apply(ev.before.1, ev.after.1);
            let g = tracker.gap();
            run.max_gap = run.max_gap.max(g);
            if g >= params.rho && run.first_violation.is_none() {
                run.first_violation = Some(sim.steps());
            }
            if sample_every > 0 && sim.steps() % sample_every == 0 {
                run.samples.push(sample(sim, g));
            }
            Ok::<(), ()>(())
        },
    )
    .expect("hook never fails");
    Ok(run)
}

/// Uniformly random start loads, used by drift experiments.
pub fn random_loads(n: usize, max: u64, rng: &mut RngStream) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..=max)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> ClockParams {
        ClockParams::new(4, 3).unwrap()
    }

    fn pos(v: u32) -> ClockPosition {
        p4().position(v).unwrap()
    }

    fn cfg(pairs: &[(u32, usize)]) -> Configuration<ClockPosition> {
        Configuration::from_counts(pairs.iter().map(|&(v, c)| (pos(v), c)))
    }

    #[test]
    fn params_validation() {
        let p = p4();
        assert_eq!(p.psi(), 16);
        assert!(ClockParams::new(4, 4).is_err());
        assert!(ClockParams::new(4, 0).is_err());
        assert!(ClockParams::new(1, 0).is_err());
        let q = ClockParams::for_population(1024, 8.0, DEFAULT_TC_FRAC).unwrap();
        assert_eq!(q.rho(), (8.0 * 1024f64.ln()).ceil() as u32);
        assert_eq!(q.psi(), 4 * q.rho());
        assert!(q.tc() < q.rho());
        assert_eq!(q.tc(), (23.0 / 29.0 * q.rho() as f64).ceil() as u32);
    }

    #[test]
    fn labels() {
        let p = p4();
        assert_eq!(label(pos(0), &p), ClockLabel::Odd);
        assert_eq!(label(pos(8), &p), ClockLabel::Even);
        assert_eq!(label(pos(5), &p), ClockLabel::Buffer);
        assert_eq!(label(pos(15), &p), ClockLabel::Buffer);
        let count = |l| (0..16).filter(|&v| label(pos(v), &p) == l).count();
        assert_eq!(count(ClockLabel::Odd), 4);
        assert_eq!(count(ClockLabel::Even), 4);
        assert_eq!(count(ClockLabel::Buffer), 8);
    }

    #[test]
    fn lower_advances() {
        let p = p4();
        assert_eq!(clock_tick(pos(5), pos(7), &p).unwrap(), Tick::Advanced(pos(6), pos(7)));
        assert_eq!(clock_tick(pos(7), pos(5), &p).unwrap(), Tick::Advanced(pos(7), pos(6)));
    }

    #[test]
    fn wrap_case_advances_higher() {
        let p = p4();
        assert_eq!(advance(pos(3), pos(14), &p), (pos(3), pos(15)));
        assert_eq!(advance(pos(14), pos(3), &p), (pos(15), pos(3)));
        assert_eq!(advance(pos(0), pos(15), &p), (pos(0), pos(0)));
        // (3, 14) are 5 apart around a 16-loop, so the checked tick flags it for rho = 4.
        assert_eq!(clock_tick(pos(3), pos(14), &p).unwrap(), Tick::GapViolation { gap: 5 });
        assert_eq!(clock_tick(pos(1), pos(14), &p).unwrap(), Tick::Advanced(pos(1), pos(15)));
    }

    #[test]
    fn top_tie_wraps_responder() {
        let p = p4();
        assert_eq!(clock_tick(pos(15), pos(15), &p).unwrap(), Tick::Advanced(pos(15), pos(0)));
        assert_eq!(clock_tick(pos(6), pos(6), &p).unwrap(), Tick::Advanced(pos(6), pos(7)));
    }

    #[test]
    fn far_apart_is_violation() {
        let p = p4();
        assert_eq!(clock_tick(pos(2), pos(9), &p).unwrap(), Tick::GapViolation { gap: 7 });
        let bad = ClockPosition(16);
        assert!(clock_tick(bad, pos(1), &p).is_err());
    }

    #[test]
    fn weights_and_gaps() {
        let p = p4();
        let c = cfg(&[(2, 1), (14, 1)]);
        assert_eq!(weight(pos(2), &c, &p).unwrap(), 18);
        assert_eq!(weight(pos(14), &c, &p).unwrap(), 14);
        assert_eq!(weight(pos(5), &cfg(&[(5, 3)]), &p).unwrap(), 5);
        assert!(weight(pos(6), &cfg(&[(5, 3)]), &p).is_err());
        assert_eq!(gap(&cfg(&[(5, 7)]), &p).unwrap(), 0);
        assert_eq!(gap(&c, &p).unwrap(), 4);
        assert_eq!(gap(&cfg(&[(0, 1), (15, 1)]), &p).unwrap(), 1);
        assert!(gap(&Configuration::new(), &p).is_err());
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_potential(&[0.0; 5], 0.3), 10.0);
        let g = gamma_potential(&[1.0, -1.0], 2f64.ln());
        assert!((g - 5.0).abs() < 1e-12);
        let a = gamma_potential(&[0.5, -2.0, 1.5], 0.7);
        let b = gamma_potential(&[-1.5, 2.0, -0.5], 0.7);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn drift_from_balanced_start_is_nonnegative() {
        let p = p4();
        let mut rng = RngStream::new(1);
        let d = estimate_drift(&[0; 64], &p, 200, &mut rng).unwrap();
        assert!(d.gamma_after_mean >= d.gamma_before);
        assert_eq!(d.gamma_before, 128.0);
    }

    #[test]
    fn drift_single_sample_is_the_observation() {
        let p = p4();
        let start = vec![0, 3, 1, 1];
        let mut rng = RngStream::new(5);
        let d = estimate_drift(&start, &p, 1, &mut rng).unwrap();
        let mut rng = RngStream::new(5);
        let (i, j) = select_pair_unchecked(&mut rng, 4);
        let mut proc = TwoChoiceProcess::new(start);
        proc.step(i, j);
        assert_eq!(d.gamma_after_mean, gamma_potential(&proc.centered(), p.alpha()));
        assert!(estimate_drift(&[0, 0], &p, 0, &mut rng).is_err());
    }

    #[test]
    fn drift_from_skewed_start_is_negative() {
        let p = p4().with_alpha(0.25).unwrap();
        let mut start = vec![0u64; 256];
        start[0] = 20;
        let mut rng = RngStream::new(17);
        let d = estimate_drift(&start, &p, 10_000, &mut rng).unwrap();
        assert!(d.gamma_after_mean < d.gamma_before, "{d:?}");
    }

    #[test]
    fn tracker_matches_direct_gap() {
        let p = ClockParams::new(5, 3).unwrap();
        let mut rng = RngStream::new(8);
        let mut positions = vec![ClockPosition::ZERO; 30];
        let mut tracker = GapTracker::new(&positions, p).unwrap();
        for _ in 0..20_000 {
            let (i, j) = select_pair_unchecked(&mut rng, positions.len());
            let (a, b) = advance(positions[i], positions[j], &p);
            tracker.apply(positions[i], a);
            tracker.apply(positions[j], b);
            positions[i] = a;
            positions[j] = b;
            let direct = gap(&positions.iter().copied().collect(), &p).unwrap();
            assert_eq!(tracker.gap(), direct);
        }
    }

    #[test]
    fn gap_run_stays_small() {
        let n = 256;
        let p = ClockParams::for_population(n, 8.0, DEFAULT_TC_FRAC).unwrap();
        let steps = (200.0 * n as f64 * (n as f64).ln()) as u64;
        let run = clock_gap_run(n, p, 3, steps, n as u64).unwrap();
        assert!(run.first_violation.is_none(), "max gap {}", run.max_gap);
        assert_eq!(run.samples.len() as u64, steps / n as u64 + 1);
    }
}
