//! Deterministic seed derivation.
//!
//! Every stochastic component draws from a `ChaCha12` stream whose seed is
//! derived from the run seed by a counter construction, so results are
//! reproducible bit-for-bit across platforms and independent of worker
//! count or scheduling.

/// Named sub-streams of a run seed. Keeping the stream ids stable is what
/// makes e.g. monotone coupling in the sink count work: adding one more
/// static copy never perturbs the seeds of the existing ones.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Replica = 1,
    Nodes = 2,
    Sinks = 3,
    Typical = 4,
    StaticCopy = 5,
    SinkCount = 6,
    Brownian = 7,
    Pairs = 8,
}

/// Derives a child seed from `(base, stream, index)` via splitmix64 mixing.
pub fn derive(base: u64, stream: Stream, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(stream as u64 + 1))
        .wrapping_add(0xbf58476d1ce4e5b9u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
