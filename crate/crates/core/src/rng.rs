//! Deterministic seed derivation and per-session random streams.
//!
//! Every random draw in a session comes from one of three ChaCha8 streams:
//!
//! - `coherence`: one `f64` uniform per trial (prior sampling).
//! - `agent`: one `f64` uniform per action selection, one `bool` per
//!   zero-coherence outcome.
//! - `evidence`: a fresh stream per trial index, so the `t`-th evidence
//!   sample of trial `u` is identical across conditions that share a seed
//!   no matter how long the agent waited in other trials.
//!
//! Replication `r` of an experiment seeded with `base` uses the session seed
//! `derive_seed(base, &[r])`; sweep points and paired conditions reuse the
//! same replication seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TAG_COHERENCE: u64 = 0x636f_6865;
const TAG_AGENT: u64 = 0x6167_656e;
const TAG_EVIDENCE: u64 = 0x6576_6964;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a path of integer labels into a child seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x5851_f42d_4c95_7f2d))))
}

/// Seed for replication `rep` of an experiment.
pub fn replication_seed(base: u64, rep: u64) -> u64 {
    derive_seed(base, &[rep])
}

/// The random streams owned by one learning session.
#[derive(Clone, Debug)]
pub struct SessionRng {
    pub coherence: ChaCha8Rng,
    pub agent: ChaCha8Rng,
    evidence_seed: u64,
}

impl SessionRng {
    pub fn new(session_seed: u64) -> Self {
        Self {
            coherence: ChaCha8Rng::seed_from_u64(derive_seed(session_seed, &[TAG_COHERENCE])),
            agent: ChaCha8Rng::seed_from_u64(derive_seed(session_seed, &[TAG_AGENT])),
            evidence_seed: derive_seed(session_seed, &[TAG_EVIDENCE]),
        }
    }

    /// Evidence stream for trial `u`.
    pub fn evidence_for_trial(&self, u: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.evidence_seed);
        rng.set_stream(u);
        rng
    }
}
