//! Deterministic random number generation.
//!
//! Every stochastic component of the simulator draws from a [`SeededRng`],
//! a xoshiro256++ generator whose 256-bit state is expanded from a 64-bit
//! seed with SplitMix64. The algorithm is fixed: changing it changes every
//! simulation trace, so it must not be swapped within a major version.
//!
//! Subsystems never share a generator. Each one derives its own stream via
//! [`SeededRng::for_stream`], which XORs the master seed with a stable
//! per-stream constant before expansion. Adding a new stream therefore never
//! perturbs the draws of an existing one.

/// Stable stream identifiers. Append only; reordering or renumbering
/// changes every derived seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Fading chains (device and jammer links, bandwidth, user density).
    OffloadChannels,
    /// Chain start bins drawn at reset.
    OffloadStart,
    /// Observation noise perturbations.
    OffloadObsNoise,
    /// Smart-jammer exploration.
    Jammer,
    /// Message truth draws and channel-estimate noise.
    AuthMessages,
    /// Channel record and spoofer sign pattern.
    AuthInit,
    /// Defender exploration (epsilon-greedy draws).
    AgentExplore,
    /// Network weight initialization.
    AgentInit,
    /// Replay-pool minibatch sampling.
    Replay,
    /// Planning-model sampling (hypothetical experience).
    Planning,
    /// Scenario perturbations during pretraining.
    Pretrain,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::OffloadChannels => 0x6fe1_9c29_b402_f3a1,
            Stream::OffloadStart => 0x2545_f491_4f6c_dd1d,
            Stream::OffloadObsNoise => 0x9e6c_63d0_76cc_4311,
            Stream::Jammer => 0x17de_3b5e_8a7f_0c55,
            Stream::AuthMessages => 0xc3a5_c85c_97cb_3127,
            Stream::AuthInit => 0x5851_f42d_4c95_7f2d,
            Stream::AgentExplore => 0xb504_6e1f_6c1e_65bb,
            Stream::AgentInit => 0x0d1f_49a1_37f6_ef13,
            Stream::Replay => 0x8f83_2cd7_a3c1_90e7,
            Stream::Planning => 0x41c6_4e6d_9a3b_5f77,
            Stream::Pretrain => 0x7f4a_7c15_9e37_79b9,
        }
    }
}

/// xoshiro256++ generator with SplitMix64 seeding.
///
/// Same seed and same call sequence give the same output sequence,
/// bit for bit, on every platform.
#[derive(Clone, Debug)]
pub struct SeededRng {
    state: [u64; 4],
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let state = [
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
        ];
        SeededRng { state }
    }

    /// Derive the generator for one subsystem stream of a master seed.
    pub fn for_stream(master_seed: u64, stream: Stream) -> Self {
        Self::new(master_seed ^ stream.tag())
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in [0, n). Panics if n == 0.
    ///
    /// Multiply-shift mapping; the bias is below 2^-64 * n and irrelevant
    /// at simulation scale.
    pub fn next_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_below requires n > 0");
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Bernoulli trial with success probability p.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform draw in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw via Box-Muller. Consumes exactly two uniforms.
    pub fn normal(&mut self) -> f64 {
        // First uniform shifted into (0, 1] so ln() is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Sample an index from a discrete distribution given as weights
    /// summing to ~1. Residual mass from rounding goes to the last index.
    pub fn sample_discrete(&mut self, probs: &[f64]) -> usize {
        debug_assert!(!probs.is_empty());
        let x = self.next_f64();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if x < acc {
                return i;
            }
        }
        probs.len() - 1
    }
}
