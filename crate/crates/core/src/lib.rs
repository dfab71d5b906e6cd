//! Population protocol simulation and analysis.
//!
//! * [`sim`]: uniform random pairwise scheduler over an agent array.
//! * [`phase_clock`]: the leaderless phase clock and its gap diagnostics.
//! * [`majority`]: phased exact majority with its 4-state backup.
//! * [`leader_election`]: phased leader election driven by the same clock.
//! * [`analysis`]: reachability, stable decisions, output dominance,
//!   bottlenecks and suffix transition orderings for explicit protocols.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod leader_election;
pub mod majority;
pub mod phase_clock;
pub mod population;
pub mod rng;
pub mod rumor;
pub mod sim;

pub use error::{Error, Result};
pub use population::{AgentPopulation, Configuration, StateId};
pub use rng::{derive_seed, select_pair, RngStream};
pub use sim::{parallel_time, ConvergenceReport, InteractionEvent, Protocol, Simulation, Tally, Violation, CheckLevel};
