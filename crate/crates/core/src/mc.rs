//! Seeded, stream-split random numbers and reproducible parallel sampling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::dist::{DistSpec, Sampler, SamplingOptions};
use crate::error::{Error, Result};

/// A ChaCha12 keystream addressed by `(seed, stream_id)`.
///
/// The generator is counter based, so two streams with different ids never
/// overlap and each one can be replayed from any recorded position.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

pub fn stream(seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    RngStream { seed, stream_id, rng }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position in the keystream, counted in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn set_counter(&mut self, pos: u128) {
        self.rng.set_word_pos(pos);
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Child seed for a named sub-experiment. Stable across runs and platforms.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    splitmix64(seed ^ fnv1a(tag))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub dist: DistSpec,
    pub seed: u64,
    /// First stream id used; chunk `i` draws from `stream_id + i`.
    pub stream_id: u64,
    pub chunks: usize,
    pub values: Vec<f64>,
}

/// `n` draws from a single stream.
pub fn sample(d: &DistSpec, s: &mut RngStream, n: usize) -> Result<Vec<f64>> {
    d.draw(s, n)
}

fn chunk_sizes(n: usize, chunks: usize) -> impl Iterator<Item = usize> {
    let base = n / chunks;
    let extra = n % chunks;
    (0..chunks).map(move |i| base + usize::from(i < extra))
}

/// `n` draws split over `chunks` substreams, generated concurrently on the
/// current rayon pool and concatenated in chunk order.
pub fn parallel_sample(d: &DistSpec, seed: u64, n: usize, chunks: usize) -> Result<SampleBatch> {
    parallel_sample_with(d, seed, n, chunks, &SamplingOptions::default())
}

/// [`parallel_sample`] with explicit rejection-sampler settings.
pub fn parallel_sample_with(
    d: &DistSpec,
    seed: u64,
    n: usize,
    chunks: usize,
    opts: &SamplingOptions,
) -> Result<SampleBatch> {
    if chunks == 0 {
        return Err(Error::InvalidParameter {
            name: "chunks",
            value: 0.0,
            reason: "need at least one chunk",
        });
    }
    let sampler = Sampler::new(d, opts)?;
    let sizes: Vec<usize> = chunk_sizes(n, chunks).collect();
    let parts: Vec<Result<Vec<f64>>> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &m)| {
            let mut s = stream(seed, i as u64);
            sampler.fill(&mut s, m).map_err(|e| Error::Chunk {
                chunk: i,
                source: Box::new(e),
            })
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    for p in parts {
        values.extend(p?);
    }
    Ok(SampleBatch {
        dist: d.clone(),
        seed,
        stream_id: 0,
        chunks,
        values,
    })
}

/// Seed and chunking shared by the draws of one experiment. Every named
/// draw gets its own derived seed, so adding a draw does not perturb the
/// others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub seed: u64,
    pub chunks: usize,
}

impl MonteCarlo {
    pub fn new(seed: u64, chunks: usize) -> Self {
        MonteCarlo {
            seed,
            chunks: chunks.max(1),
        }
    }

    pub fn batch(&self, d: &DistSpec, tag: &str, n: usize) -> Result<SampleBatch> {
        parallel_sample(d, derive_seed(self.seed, tag), n, self.chunks)
    }

    pub fn draw(&self, d: &DistSpec, tag: &str, n: usize) -> Result<Vec<f64>> {
        Ok(self.batch(d, tag, n)?.values)
    }

    pub fn stream(&self, tag: &str) -> RngStream {
        stream(derive_seed(self.seed, tag), 0)
    }

    pub fn child(&self, tag: &str) -> MonteCarlo {
        MonteCarlo {
            seed: derive_seed(self.seed, tag),
            chunks: self.chunks,
        }
    }
}
