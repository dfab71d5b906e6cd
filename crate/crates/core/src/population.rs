//! Configurations (count vectors) and agent arrays.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a state inside an explicit finite protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub u16);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Multiset of agent states: how many agents occupy each state.
///
/// States with zero count are never stored, so two configurations are equal
/// exactly when they have the same counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration<K: Ord> {
    counts: BTreeMap<K, usize>,
}

impl<K: Ord> Default for Configuration<K> {
    fn default() -> Self {
        Configuration {
            counts: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> Configuration<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(pairs: impl IntoIterator<Item = (K, usize)>) -> Self {
        let mut c = Self::new();
        for (k, v) in pairs {
            c.add(k, v);
        }
        c
    }

    pub fn add(&mut self, state: K, count: usize) {
        if count > 0 {
            *self.counts.entry(state).or_insert(0) += count;
        }
    }

    /// Removes `count` agents in `state`. Fails if fewer are present.
    pub fn remove(&mut self, state: &K, count: usize) -> Result<()> {
        let cur = self.get(state);
        if cur < count {
            return Err(Error::domain("removing more agents than present"));
        }
        if cur == count {
            self.counts.remove(state);
        } else if let Some(v) = self.counts.get_mut(state) {
            *v -= count;
        }
        Ok(())
    }

    pub fn get(&self, state: &K) -> usize {
        self.counts.get(state).copied().unwrap_or(0)
    }

    /// `|c|`, the number of agents.
    pub fn size(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, usize)> {
        self.counts.iter().map(|(k, v)| (k, *v))
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.counts.keys()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

impl<K: Ord + Clone> FromIterator<K> for Configuration<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut c = Configuration::new();
        for k in iter {
            c.add(k, 1);
        }
        c
    }
}

/// Indexed array of agent states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentPopulation<S> {
    agents: Vec<S>,
}

impl<S: Copy> AgentPopulation<S> {
    /// Wraps an agent array; populations need at least two agents.
    pub fn new(agents: Vec<S>) -> Result<Self> {
        if agents.len() < 2 {
            return Err(Error::InvalidPopulation {
                n: agents.len(),
                min: 2,
            });
        }
        Ok(AgentPopulation { agents })
    }

    pub fn uniform(n: usize, state: S) -> Result<Self> {
        Self::new(vec![state; n])
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[S] {
        &self.agents
    }

    #[inline]
    pub fn get(&self, i: usize) -> S {
        self.agents[i]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, s: S) {
        self.agents[i] = s;
    }

    pub fn config_of(&self) -> Configuration<S>
    where
        S: Ord,
    {
        self.agents.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_counts_agents() {
        let pop = AgentPopulation::new(vec!['A', 'A', 'B']).unwrap();
        let c = pop.config_of();
        assert_eq!(c.get(&'A'), 2);
        assert_eq!(c.get(&'B'), 1);
        assert_eq!(c.size(), 3);
    }

    #[test]
    fn tiny_populations_rejected() {
        assert!(AgentPopulation::<u8>::new(vec![]).is_err());
        assert_eq!(
            AgentPopulation::new(vec![1u8]),
            Err(Error::InvalidPopulation { n: 1, min: 2 })
        );
    }

    #[test]
    fn remove_drops_zero_entries() {
        let mut c = Configuration::from_counts([(1u8, 2), (2, 1)]);
        c.remove(&2, 1).unwrap();
        assert_eq!(c.distinct(), 1);
        assert!(c.remove(&1, 3).is_err());
        assert_eq!(c, Configuration::from_counts([(1u8, 2)]));
    }
}
