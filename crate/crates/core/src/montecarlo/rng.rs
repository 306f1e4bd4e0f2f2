use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reproducibility contract for every sampling routine: replicate `i` always
/// draws from the ChaCha stream `i` under key `seed`, whichever worker runs it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub reps: usize,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(seed: u64, reps: usize, workers: usize) -> Self {
        SimConfig {
            seed,
            reps,
            workers,
        }
    }

    /// The `#`-prefixed line embedded in sample outputs. Worker count is an
    /// execution detail and does not appear.
    pub fn comment_line(&self) -> String {
        format!(
            "# simconfig seed={} reps={} rng=chacha8-stream-per-replicate",
            self.seed, self.reps
        )
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::validation("workers must be >= 1"));
        }
        Ok(())
    }
}

/// Counter-based generator for replicate `index`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f(i, rng_i)` for every replicate, splitting contiguous blocks of
/// replicates across `cfg.workers` threads; results come back in replicate order.
pub(crate) fn par_replicates<T, F>(cfg: &SimConfig, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    let mut out = vec![T::default(); cfg.reps];
    if cfg.reps == 0 {
        return out;
    }
    let chunk = cfg.reps.div_ceil(cfg.workers.max(1));
    std::thread::scope(|scope| {
        for (block, slots) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (j, slot) in slots.iter_mut().enumerate() {
                    let i = block * chunk + j;
                    let mut rng = substream(cfg.seed, i as u64);
                    *slot = f(i, &mut rng);
                }
            });
        }
    });
    out
}
