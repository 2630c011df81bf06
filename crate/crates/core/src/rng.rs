//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator. A run seed
//! is expanded into a ChaCha key, and each purpose gets its own 64-bit stream
//! id: the top 16 bits name the [`Stream`], the low 48 bits carry an index
//! (a chunk number, a query number, ...). ChaCha is counter based, so two
//! streams with the same key never overlap and can be consumed from
//! different threads in any order without changing what either one yields.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const INDEX_BITS: u32 = 48;

/// Purpose tags for substreams derived from a single run seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum Stream {
    Data = 1,
    Queries = 2,
    Build = 3,
    Pairs = 4,
    Witness = 5,
    Trials = 6,
    Oracle = 7,
    Concepts = 8,
}

/// Returns the generator for `(seed, stream, index)`.
pub fn substream(seed: u64, stream: Stream, index: u64) -> StreamRng {
    debug_assert!(index < (1u64 << INDEX_BITS));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << INDEX_BITS) | (index & ((1u64 << INDEX_BITS) - 1)));
    rng
}
