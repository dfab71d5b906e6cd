//! Simulator and analysis properties over random inputs.

use popsim::analysis::seq::{is_bottleneck, Transition};
use popsim::analysis::Counts;
use popsim::majority::{backup_rule, Backup4, FourStateProtocol};
use popsim::{parallel_time, AgentPopulation, Protocol, RngStream, Simulation, StateId};
use proptest::prelude::*;

fn backup() -> impl Strategy<Value = Backup4> {
    prop::sample::select(Backup4::ALL.to_vec())
}

proptest! {
    #[test]
    fn four_state_conserves_strong_difference(s in backup(), o in backup()) {
        let (x, y) = FourStateProtocol.interact(&s, &o);
        let strong = |b: Backup4| match b {
            Backup4::StrongA => 1i32,
            Backup4::StrongB => -1,
            _ => 0,
        };
        prop_assert_eq!(strong(s) + strong(o), strong(x) + strong(y));
        prop_assert_eq!(x, backup_rule(s, o));
    }

    #[test]
    fn runs_are_deterministic_and_local(seed in any::<u64>(), n in 2usize..40, steps in 0u64..400) {
        let agents: Vec<Backup4> = (0..n).map(|i| Backup4::ALL[i % 4]).collect();
        let pop = AgentPopulation::new(agents).unwrap();
        let mut a = Simulation::new(FourStateProtocol, pop.clone(), RngStream::new(seed));
        let mut b = Simulation::new(FourStateProtocol, pop, RngStream::new(seed));
        for _ in 0..steps {
            let before = a.population().agents().to_vec();
            let ev = a.step();
            prop_assert_eq!(&ev, &b.step());
            prop_assert_ne!(ev.initiator, ev.responder);
            let after = a.population().agents();
            for i in 0..n {
                if i != ev.initiator && i != ev.responder {
                    prop_assert_eq!(before[i], after[i]);
                }
            }
            prop_assert_eq!(after.len(), n);
        }
        prop_assert_eq!(a.population().config_of(), b.population().config_of());
        prop_assert_eq!(a.tally(), b.tally());
    }

    #[test]
    fn parallel_time_is_additive(a in 0u64..1_000_000, b in 0u64..1_000_000, n in 1usize..5000) {
        prop_assert_eq!(parallel_time(a + b, n).unwrap(), parallel_time(a, n).unwrap() + parallel_time(b, n).unwrap());
    }

    #[test]
    fn bottleneck_is_monotone_in_f(c1 in 0u32..50, c2 in 0u32..50, f in 0.0f64..3000.0, g in 0.0f64..3000.0) {
        let t = Transition::new(StateId(0), StateId(1), StateId(1), StateId(1));
        let c = Counts(vec![c1, c2]);
        let (lo, hi) = if f <= g { (f, g) } else { (g, f) };
        if is_bottleneck(&t, &c, |_| lo) {
            prop_assert!(is_bottleneck(&t, &c, |_| hi));
        }
    }
}
