//! Random protocols and transition sequences meeting the suffix ordering
//! preconditions.

use rand::seq::SliceRandom;
use rand::Rng;

use super::seq::{is_bottleneck, Transition, TransitionSeq};
use super::{parse_protocol, Counts, ProtocolSpec};
use crate::population::StateId;

/// A generated `x ⟹_q y` instance.
#[derive(Debug, Clone)]
pub struct OrderingInstance {
    pub spec: ProtocolSpec,
    pub q: TransitionSeq,
    pub x: Counts,
    pub y: Counts,
    pub b: u64,
    pub a: StateId,
}

/// A `k`-state protocol where each ordered pair gets a random rule with
/// probability `density`. State 0 is the designated input `A`.
pub fn random_spec<R: Rng>(k: usize, density: f64, rng: &mut R) -> ProtocolSpec {
    let mut text = String::new();
    for i in 0..k {
        let out = if i % 2 == 0 { "WIN_A" } else { "WIN_B" };
        text.push_str(&format!("state S{i} output={out}{}\n", if i < 2 { " input" } else { "" }));
    }
    for a in 0..k {
        for b in 0..k {
            if rng.gen_bool(density) {
                let (c, d) = (rng.gen_range(0..k), rng.gen_range(0..k));
                text.push_str(&format!("rule S{a} S{b} -> S{c} S{d}\n"));
            }
        }
    }
    parse_protocol(&text).expect("generated text is well formed")
}

/// Walks from a random `x` with `x(A) >= β` using only enabled,
/// state-changing transitions that are not `β²`-bottlenecks, until `A` is
/// exhausted. Returns `None` if the walk gets stuck or runs too long.
pub fn try_instance<R: Rng>(spec: &ProtocolSpec, n: u32, b: u64, rng: &mut R) -> Option<OrderingInstance> {
    let k = spec.k();
    let a = StateId(0);
    let kk = k as u64;
    let beta = kk * kk * b + kk * b;
    if beta > n as u64 {
        return None;
    }
    let mut x = Counts::zero(k);
    let xa = rng.gen_range(beta.max(1)..=n as u64) as u32;
    x.0[0] = xa;
    for _ in xa..n {
        x.0[rng.gen_range(1..k)] += 1;
    }
    let bound = (beta * beta) as f64;
    let mut c = x.clone();
    let mut steps = Vec::new();
    let limit = 40 * n as usize;
    while c.get(a) > 0 {
        if steps.len() >= limit {
            return None;
        }
        let mut options = Vec::new();
        for r1 in c.support() {
            for r2 in c.support() {
                if r1 == r2 && c.get(r1) < 2 {
                    continue;
                }
                let (p1, p2) = spec.delta(r1, r2);
                let t = Transition::new(r1, r2, p1, p2);
                if spec.is_noop(r1, r2) || is_bottleneck(&t, &c, |_| bound) {
                    continue;
                }
                options.push(t);
            }
        }
        // Prefer transitions touching A so walks terminate.
        let touching: Vec<Transition> = options.iter().copied().filter(|t| t.r1 == a || t.r2 == a).collect();
        let pool = if !touching.is_empty() && rng.gen_bool(0.5) { &touching } else { &options };
        let t = *pool.choose(rng)?;
        t.apply(&mut c).expect("enabled");
        steps.push(t);
    }
    let q = TransitionSeq::new(x.clone(), steps).expect("replayed while building");
    Some(OrderingInstance {
        spec: spec.clone(),
        y: c,
        x,
        q,
        b,
        a,
    })
}

/// Retries random protocols until an instance is produced.
pub fn ordering_instance<R: Rng>(k: usize, n: u32, b: u64, rng: &mut R) -> OrderingInstance {
    loop {
        let spec = random_spec(k, 0.6, rng);
        if let Some(inst) = try_instance(&spec, n, b, rng) {
            return inst;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn instances_meet_preconditions() {
        let mut rng = RngStream::new(2);
        for _ in 0..20 {
            let inst = ordering_instance(3, 10, 0, &mut rng);
            assert_eq!(inst.y.get(inst.a), 0);
            assert_eq!(inst.q.final_config(), inst.y);
            assert_eq!(inst.x.size(), 10);
        }
    }
}
