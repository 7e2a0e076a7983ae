//! Counter-based random streams.
//!
//! Every random number is a hash of a key tuple rather than the next state
//! of a sequential generator, so the value drawn for `(seed, trial, arm,
//! draw)` does not depend on which policy asked for it, in which order, or
//! on which thread. This gives paired comparisons between policies and
//! output that is independent of parallel scheduling.
//!
//! The mixer is SplitMix64's finalizer applied as a sponge over the key.

/// Domain-separation tags so distinct uses of the same indices never collide.
pub mod tag {
    pub const PAYOFF: u64 = 0x7061_796f_6666_0001;
    pub const MEANS: u64 = 0x6d65_616e_7300_0002;
    pub const ROLLOUT: u64 = 0x726f_6c6c_6f75_0003;
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a key tuple to 64 uniformly distributed bits.
#[inline]
pub fn hash(key: &[u64]) -> u64 {
    let mut state = GOLDEN;
    for &word in key {
        state = finalize(state.wrapping_add(word).wrapping_add(GOLDEN));
    }
    finalize(state ^ key.len() as u64)
}

/// Uniform double in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn uniform(key: &[u64]) -> f64 {
    (hash(key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A Bernoulli(`p`) draw: 1.0 with probability `p`, else 0.0.
#[inline]
pub fn bernoulli(p: f64, key: &[u64]) -> f64 {
    if uniform(key) < p {
        1.0
    } else {
        0.0
    }
}

/// Payoff stream of one trial.
///
/// The `round` component separates successive searches within one episode
/// (round 0 for a flat trial or the first move of a tree episode).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayoffStream {
    pub seed: u64,
    pub trial: u64,
    pub round: u64,
}

impl PayoffStream {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            seed,
            trial,
            round: 0,
        }
    }

    pub fn with_round(self, round: u64) -> Self {
        Self { round, ..self }
    }

    /// The `draw`-th payoff of `arm`, a Bernoulli(`p`) sample.
    pub fn payoff(&self, arm: usize, draw: u64, p: f64) -> f64 {
        bernoulli(
            p,
            &[
                self.seed,
                tag::PAYOFF,
                self.trial,
                self.round,
                arm as u64,
                draw,
            ],
        )
    }

    /// Uniform in `[0,1)` for the `step`-th random move of rollout `rollout`.
    pub fn rollout_uniform(&self, rollout: u64, step: u64) -> f64 {
        uniform(&[
            self.seed,
            tag::ROLLOUT,
            self.trial,
            self.round,
            rollout,
            step,
        ])
    }
}

/// True mean of `arm` in trial `trial`, uniform on `[0,1)`.
pub fn trial_mean(seed: u64, trial: u64, arm: u64) -> f64 {
    uniform(&[seed, tag::MEANS, trial, arm])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_in_unit_interval_and_roughly_flat() {
        let n = 100_000u64;
        let mut bins = [0u32; 10];
        for i in 0..n {
            let u = uniform(&[7, i]);
            assert!((0.0..1.0).contains(&u));
            bins[(u * 10.0) as usize] += 1;
        }
        for b in bins {
            // ±5 sigma around 10_000
            assert!((b as f64 - 10_000.0).abs() < 500.0, "{bins:?}");
        }
    }

    #[test]
    fn keys_differ_in_every_position() {
        let base = hash(&[1, 2, 3, 4]);
        assert_ne!(base, hash(&[0, 2, 3, 4]));
        assert_ne!(base, hash(&[1, 2, 3, 5]));
        assert_ne!(base, hash(&[1, 2, 3]));
        assert_ne!(hash(&[1, 2]), hash(&[2, 1]));
    }

    #[test]
    fn bernoulli_extremes() {
        for i in 0..1000 {
            assert_eq!(bernoulli(1.0, &[i]), 1.0);
            assert_eq!(bernoulli(0.0, &[i]), 0.0);
        }
    }

    #[test]
    fn bernoulli_frequency() {
        let s = PayoffStream::new(99, 3);
        let hits: f64 = (0..200_000).map(|d| s.payoff(4, d, 0.3)).sum();
        let freq = hits / 200_000.0;
        assert!((freq - 0.3).abs() < 0.005, "{freq}");
    }
}
