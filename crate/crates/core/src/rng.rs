//! Random stream derivation.
//!
//! Path `p` of a simulation seeded with `seed` draws from
//! `ChaCha8Rng::seed_from_u64(seed ^ domain)` positioned on stream `p`. The
//! domain constant separates independent sources (the Lévy driver and the
//! CIR driver) that share one configured seed. Antithetic pairs share the
//! stream of their pair index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DRIVER_DOMAIN: u64 = 0x4c45_5659_0000_0001;
pub const CIR_DOMAIN: u64 = 0x4349_5200_0000_0002;

pub fn path_rng(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(stream);
    rng
}
