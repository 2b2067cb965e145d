//! Parallel Monte Carlo runs with a thread-count independent result.
//!
//! Seed splitting: samples are cut into chunks of [`CHUNK`] draws. Chunk `i`
//! uses `ChaCha8Rng::seed_from_u64(seed)` moved to stream `i`, so every chunk
//! has its own non-overlapping keystream and the merged histogram depends
//! only on `(seed, samples)`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use quadbound_core::coding::BoundaryCode;
use quadbound_core::sampler::{DistanceSampler, Histogram, Sampler, SamplerError};

pub const CHUNK: u64 = 4096;

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunks(samples: u64) -> Vec<(u64, u64)> {
    (0..samples.div_ceil(CHUNK)).map(|c| (c, CHUNK.min(samples - c * CHUNK))).collect()
}

/// Histogram of `samples` distances.
pub fn sample_distances(sampler: &DistanceSampler, samples: u64, seed: u64) -> Result<Histogram, SamplerError> {
    chunks(samples)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            let mut h = Histogram::new();
            for _ in 0..len {
                h.add(sampler.sample(&mut rng)?);
            }
            Ok(h)
        })
        .try_reduce(Histogram::new, |mut a, b| {
            a.merge(&b);
            Ok(a)
        })
}

/// `count` codes in a deterministic order.
pub fn sample_codes(sampler: &Sampler, count: u64, seed: u64) -> Result<Vec<BoundaryCode>, SamplerError> {
    let parts: Vec<Vec<BoundaryCode>> = chunks(count)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            (0..len).map(|_| sampler.sample_code(&mut rng)).collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(parts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadbound_core::genfun::{Ensemble, Statistic};
    use quadbound_core::sampler::Backend;

    #[test]
    fn chunking_covers_every_sample() {
        let c = chunks(2 * CHUNK + 5);
        assert_eq!(c.len(), 3);
        assert_eq!(c.iter().map(|x| x.1).sum::<u64>(), 2 * CHUNK + 5);
        assert!(chunks(0).is_empty());
    }

    #[test]
    fn result_does_not_depend_on_thread_count() {
        let s = DistanceSampler::new(Ensemble::FixedNp { n: 6, p: 2 }, Statistic::BulkBoundary, Backend::Conjugation).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample_distances(&s, 3 * CHUNK + 17, 9)).unwrap();
        let b = four.install(|| sample_distances(&s, 3 * CHUNK + 17, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 3 * CHUNK + 17);
        let c = sample_distances(&s, 3 * CHUNK + 17, 10).unwrap();
        assert_ne!(a, c);
    }
}
