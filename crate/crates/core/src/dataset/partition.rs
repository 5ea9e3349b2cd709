use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetSizes {
    pub authorized: usize,
    pub known: usize,
    pub unseen: usize,
}

impl SetSizes {
    pub const fn new(authorized: usize, known: usize, unseen: usize) -> Self {
        SetSizes {
            authorized,
            known,
            unseen,
        }
    }

    pub fn total(&self) -> usize {
        self.authorized + self.known + self.unseen
    }

    /// Errors unless `|A| >= 1` and the three sets fit in `pool` transmitters.
    pub fn check_feasible(&self, pool: usize) -> Result<()> {
        if self.authorized == 0 {
            return Err(Error::Config("the authorized set needs at least one transmitter".into()));
        }
        if self.total() > pool {
            return Err(Error::Infeasible(format!(
                "|A|+|K|+|O| = {}+{}+{} = {} exceeds the pool of {pool} transmitters",
                self.authorized,
                self.known,
                self.unseen,
                self.total()
            )));
        }
        Ok(())
    }
}

/// Disjoint authorized (ordered), known-outlier and unseen-outlier sets.
///
/// The position of a transmitter in `authorized` is its class index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetPartition {
    pub authorized: Vec<u32>,
    pub known_outliers: BTreeSet<u32>,
    pub unseen_outliers: BTreeSet<u32>,
}

impl SetPartition {
    pub fn sizes(&self) -> SetSizes {
        SetSizes::new(self.authorized.len(), self.known_outliers.len(), self.unseen_outliers.len())
    }

    pub fn authorized_index(&self, tx_id: u32) -> Option<usize> {
        self.authorized.iter().position(|&t| t == tx_id)
    }

    pub fn is_disjoint(&self) -> bool {
        let a: BTreeSet<u32> = self.authorized.iter().copied().collect();
        a.len() == self.authorized.len()
            && a.is_disjoint(&self.known_outliers)
            && a.is_disjoint(&self.unseen_outliers)
            && self.known_outliers.is_disjoint(&self.unseen_outliers)
    }
}

/// Uniform random disjoint draw of the three sets from `pool`.
///
/// The pool is sorted before shuffling, so the result depends only on the
/// pool's contents and `rng_seed`.
pub fn partition_transmitters(pool: &[u32], sizes: SetSizes, rng_seed: u64) -> Result<SetPartition> {
    let mut ids = pool.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != pool.len() {
        return Err(Error::Config("transmitter pool contains duplicate ids".into()));
    }
    sizes.check_feasible(ids.len())?;

    let mut rng = seed::rng(rng_seed, &[seed::tag::PARTITION]);
    ids.shuffle(&mut rng);
    let (a, rest) = ids.split_at(sizes.authorized);
    let (k, rest) = rest.split_at(sizes.known);
    Ok(SetPartition {
        authorized: a.to_vec(),
        known_outliers: k.iter().copied().collect(),
        unseen_outliers: rest[..sizes.unseen].iter().copied().collect(),
    })
}
