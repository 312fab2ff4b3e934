//! Deterministic ensemble fan-out.
//!
//! Every realization draws from its own counter-derived stream, a pure
//! function of (seed, index), so results are identical whatever the thread
//! count — parallel execution only changes wall time. The `parallel` feature
//! selects rayon dispatch; the sequential path is always compiled so the two
//! can be compared in one binary.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use std::sync::OnceLock;

/// Independent stream for realization `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(feature = "parallel")]
static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();

/// Cap worker threads. First call wins; the LOOPTREE_THREADS environment
/// variable applies when no explicit cap was set. No-op without `parallel`.
pub fn set_thread_cap(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = POOL.set(build_pool(threads.max(1)));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

#[cfg(feature = "parallel")]
fn build_pool(threads: usize) -> Option<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .ok()
}

#[cfg(feature = "parallel")]
fn pool() -> &'static Option<rayon::ThreadPool> {
    POOL.get_or_init(|| {
        std::env::var("LOOPTREE_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .and_then(build_pool)
    })
}

/// Run `f` inside the capped pool when one is configured, inline otherwise.
/// Long kernels use this so a thread cap applies to them too, not just to
/// ensemble fan-out.
pub(crate) fn install<R, F>(f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match pool() {
            Some(p) => p.install(f),
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    f()
}

/// Map `f` over realization indices 0..count, each with its own substream.
/// Output order is by index; aggregation downstream stays deterministic.
pub fn pmap<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || {
            (0..count)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(seed, i as u64);
                    f(i, &mut rng)
                })
                .collect()
        };
        match pool() {
            Some(p) => p.install(run),
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    pmap_seq(seed, count, f)
}

/// Sequential reference path; same substreams, same results as `pmap`.
pub fn pmap_seq<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..count)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_and_sequential_agree() {
        let par: Vec<u64> = pmap(3, 64, |i, rng| rng.random::<u64>() ^ i as u64);
        let seq: Vec<u64> = pmap_seq(3, 64, |i, rng| rng.random::<u64>() ^ i as u64);
        assert_eq!(par, seq);
    }

    #[test]
    fn substreams_differ() {
        let a: u64 = substream(1, 0).random();
        let b: u64 = substream(1, 1).random();
        let c: u64 = substream(2, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
