//! One-bit rumor spreading inside a designated agent subset.

use crate::error::{Error, Result};
use crate::rng::{select_pair_unchecked, RngStream};

/// Interactions until every member of a set `S` of `s` agents knows a rumor
/// that starts at a single source agent.
///
/// Agent 0 is the source and `S` is the last `s` agents (so for `s = n` the
/// source belongs to `S`). An uninformed member of `S` learns the rumor when
/// it meets an informed agent; agents outside `S ∪ {source}` never carry it.
pub fn rumor_experiment(n: usize, s: usize, rng: &mut RngStream) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidPopulation { n, min: 2 });
    }
    if s == 0 || s > n {
        return Err(Error::domain(format!("subset size {s} outside 1..={n}")));
    }
    let first_member = n - s;
    let in_set = |i: usize| i >= first_member;
    let mut informed = vec![false; n];
    informed[0] = true;
    let mut remaining = (first_member..n).filter(|&i| !informed[i]).count();
    let mut steps = 0u64;
    while remaining > 0 {
        let (i, j) = select_pair_unchecked(rng, n);
        steps += 1;
        match (informed[i], informed[j]) {
            (true, false) if in_set(j) => {
                informed[j] = true;
                remaining -= 1;
            }
            (false, true) if in_set(i) => {
                informed[i] = true;
                remaining -= 1;
            }
            _ => {}
        }
    }
    Ok(steps)
}
