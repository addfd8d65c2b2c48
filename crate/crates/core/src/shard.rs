//! Deterministic work sharding.
//!
//! Work is split into a fixed number of shards, each with its own ChaCha stream derived from the
//! run seed. Results are combined in shard order, so output never depends on how many worker
//! threads rayon happens to use.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const SHARDS: u64 = 16;

pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Number of items shard `shard` handles when `total` items are split across [`SHARDS`].
pub fn shard_len(total: u64, shard: u64) -> u64 {
    total / SHARDS + u64::from(shard < total % SHARDS)
}

/// Runs `f` on every shard in parallel and returns the first `Some` in shard order.
pub fn first_hit<T, F>(seed: u64, total: u64, f: F) -> Option<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Option<T> + Sync,
{
    let hits: Vec<Option<T>> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| f(&mut shard_rng(seed, shard), shard_len(total, shard)))
        .collect();
    hits.into_iter().flatten().next()
}

/// Runs `f` on every shard in parallel, concatenating outputs in shard order.
pub fn collect<T, F>(seed: u64, total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Vec<T> + Sync,
{
    (0..SHARDS)
        .into_par_iter()
        .map(|shard| f(&mut shard_rng(seed, shard), shard_len(total, shard)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn lengths_sum_to_total() {
        for total in [0, 1, 15, 16, 17, 1000, 1_000_003] {
            assert_eq!((0..SHARDS).map(|s| shard_len(total, s)).sum::<u64>(), total);
        }
    }

    #[test]
    fn independent_of_pool_size() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| collect(7, 100, |rng, n| (0..n).map(|_| rng.gen::<u32>()).collect()))
        };
        assert_eq!(run(1), run(4));
    }
}
