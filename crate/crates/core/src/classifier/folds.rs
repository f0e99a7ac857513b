use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

/// Rotating train/dev/test assignment.
///
/// Keys are sorted, shuffled once with the seed and cut into `n_folds`
/// contiguous blocks whose sizes differ by at most one. Fold `k` tests on
/// block `k`, tunes on block `(k + 1) % n_folds` and trains on the rest, so
/// five folds give a 6:2:2 split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub n_folds: usize,
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn new(keys: &[String], n_folds: usize, seed: u64) -> Result<Self> {
        if n_folds < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 folds for disjoint train/dev/test, got {n_folds}"
            )));
        }
        let mut order: Vec<String> = keys.to_vec();
        order.sort();
        if order.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate keys in fold plan".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);

        let n = order.len();
        let base = n / n_folds;
        let extra = n % n_folds;
        let mut blocks = Vec::with_capacity(n_folds);
        let mut start = 0;
        for b in 0..n_folds {
            let len = base + usize::from(b < extra);
            blocks.push(order[start..start + len].to_vec());
            start += len;
        }

        let folds = (0..n_folds)
            .map(|k| {
                let dev_block = (k + 1) % n_folds;
                let train = blocks
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != k && *b != dev_block)
                    .flat_map(|(_, keys)| keys.iter().cloned())
                    .collect();
                Fold {
                    train,
                    dev: blocks[dev_block].clone(),
                    test: blocks[k].clone(),
                }
            })
            .collect();
        Ok(FoldPlan {
            seed,
            n_folds,
            folds,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
