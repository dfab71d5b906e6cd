//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each demo owns a running simulation that the page advances in small
//! batches between animation frames. Interaction counts are returned as
//! `f64` so JavaScript sees plain numbers rather than `BigInt`s.

use popsim::leader_election::{self as le, LEParams, LEState, LeaderElectionProtocol};
use popsim::majority::{self, certificate_from_tally, initial_config, MajorityParams, MajorityProtocol, Side};
use popsim::phase_clock::{
    centered_weights, gamma_potential, ClockParams, ClockPosition, GapTracker, PhaseClockProtocol, DEFAULT_RHO_MULT,
    DEFAULT_TC_FRAC,
};
use popsim::{AgentPopulation, RngStream, Simulation};
use wasm_bindgen::prelude::*;

/// Largest population the page may request.
pub const MAX_N: usize = 1 << 16;

fn check_n(n: usize) -> Result<(), String> {
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("n must lie in 2..={MAX_N}"));
    }
    Ok(())
}

fn clock_for(n: usize, rho_mult: f64) -> Result<ClockParams, String> {
    ClockParams::for_population(n, rho_mult, DEFAULT_TC_FRAC).map_err(|e| e.to_string())
}

/// `n` bare clocks started at position 0.
#[wasm_bindgen]
pub struct ClockDemo {
    sim: Simulation<PhaseClockProtocol>,
    tracker: GapTracker,
    params: ClockParams,
    max_gap: u32,
}

#[wasm_bindgen]
impl ClockDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, rho_mult: f64, seed: u32) -> Result<ClockDemo, String> {
        check_n(n)?;
        let params = clock_for(n, rho_mult)?;
        let pop = AgentPopulation::uniform(n, ClockPosition::ZERO).map_err(|e| e.to_string())?;
        let tracker = GapTracker::new(pop.agents(), params).map_err(|e| e.to_string())?;
        let sim = Simulation::new(PhaseClockProtocol { params }, pop, RngStream::new(seed as u64));
        Ok(ClockDemo { sim, tracker, params, max_gap: 0 })
    }

    /// Runs `steps` interactions and returns the gap afterwards.
    pub fn advance(&mut self, steps: u32) -> u32 {
        for _ in 0..steps {
            let ev = self.sim.step();
            self.tracker.apply(ev.before.0, ev.after.0);
            self.tracker.apply(ev.before.1, ev.after.1);
            self.max_gap = self.max_gap.max(self.tracker.gap());
        }
        self.tracker.gap()
    }

    pub fn gap(&self) -> u32 {
        self.tracker.gap()
    }

    pub fn max_gap(&self) -> u32 {
        self.max_gap
    }

    pub fn rho(&self) -> u32 {
        self.params.rho()
    }

    pub fn gamma(&self) -> f64 {
        gamma_potential(&centered_weights(self.sim.population().agents(), &self.params), self.params.alpha())
    }

    pub fn interactions(&self) -> f64 {
        self.sim.steps() as f64
    }

    /// Number of clocks at each position `0..Ψ`.
    pub fn histogram(&self) -> Vec<u32> {
        let mut h = vec![0u32; self.params.psi() as usize];
        for p in self.sim.population().agents() {
            h[p.value() as usize] += 1;
        }
        h
    }
}

/// Phased majority on `n` agents with `discrepancy` more votes for the
/// chosen side.
#[wasm_bindgen]
pub struct MajorityDemo {
    sim: Simulation<MajorityProtocol>,
    majority: Side,
}

#[wasm_bindgen]
impl MajorityDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, discrepancy: usize, majority_b: bool, seed: u32) -> Result<MajorityDemo, String> {
        check_n(n)?;
        let majority = if majority_b { Side::B } else { Side::A };
        let params = MajorityParams::new(n, clock_for(n, DEFAULT_RHO_MULT)?).map_err(|e| e.to_string())?;
        let pop = initial_config(n, discrepancy, majority).map_err(|e| e.to_string())?;
        let sim = Simulation::new(MajorityProtocol { params }, pop, RngStream::new(seed as u64));
        Ok(MajorityDemo { sim, majority })
    }

    /// Runs up to `steps` interactions, stopping early once every agent is a
    /// terminator of one side. Returns whether that has happened.
    pub fn advance(&mut self, steps: u32) -> bool {
        self.sim.run_until(|t| certificate_from_tally(t).is_some(), steps as u64);
        self.done()
    }

    pub fn done(&self) -> bool {
        certificate_from_tally(self.sim.tally()).is_some()
    }

    /// `"WIN_A"` or `"WIN_B"` once certified.
    pub fn output(&self) -> Option<String> {
        certificate_from_tally(self.sim.tally()).map(|s| s.win().to_string())
    }

    pub fn expected(&self) -> String {
        self.majority.win().to_string()
    }

    /// Agents per role: terminator A, terminator B, backup, worker, clock.
    pub fn roles(&self) -> Vec<u32> {
        use majority::class::*;
        let t = self.sim.tally();
        let backups: usize = (BACKUP..BACKUP + 4).map(|c| t.count(c)).sum();
        [t.count(TERM_A), t.count(TERM_B), backups, t.count(WORKER), t.count(CLOCK)]
            .map(|c| c as u32)
            .to_vec()
    }

    pub fn interactions(&self) -> f64 {
        self.sim.steps() as f64
    }

    pub fn parallel_time(&self) -> f64 {
        self.sim.steps() as f64 / self.sim.n() as f64
    }
}

/// Phased leader election on `n` agents, all starting as contenders.
#[wasm_bindgen]
pub struct LeaderDemo {
    sim: Simulation<LeaderElectionProtocol>,
}

#[wasm_bindgen]
impl LeaderDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, seed: u32) -> Result<LeaderDemo, String> {
        check_n(n)?;
        let params = LEParams::new(n, clock_for(n, DEFAULT_RHO_MULT)?, 8.0).map_err(|e| e.to_string())?;
        let pop = AgentPopulation::uniform(n, LEState::initial()).map_err(|e| e.to_string())?;
        let sim = Simulation::new(LeaderElectionProtocol { params }, pop, RngStream::new(seed as u64));
        Ok(LeaderDemo { sim })
    }

    /// Runs up to `steps` interactions, stopping once a single contender is
    /// left. Returns the number of contenders.
    pub fn advance(&mut self, steps: u32) -> u32 {
        self.sim.run_until(|t| t.count(le::class::CONTENDER) == 1, steps as u64);
        self.contenders()
    }

    pub fn contenders(&self) -> u32 {
        self.sim.tally().count(le::class::CONTENDER) as u32
    }

    pub fn clocks(&self) -> u32 {
        self.sim.tally().count(le::class::CLOCK) as u32
    }

    pub fn interactions(&self) -> f64 {
        self.sim.steps() as f64
    }

    pub fn parallel_time(&self) -> f64 {
        self.sim.steps() as f64 / self.sim.n() as f64
    }
}
