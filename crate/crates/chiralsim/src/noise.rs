//! Reproducible complex Wiener increments for the stochastic integrator.
//!
//! Each trajectory draws from its own counter-based stream keyed by the pair
//! `(ensemble seed, trajectory index)`, so a trajectory's noise is a pure
//! function of that pair: results are bit-identical across runs, across
//! thread counts, and independent of how trajectories are scheduled.
//!
//! The increment `dη = dW₁ + i dW₂` has independent real and imaginary
//! parts of variance `dt/2` each, so `E[|dη|²] = dt` and `E[dη²] = 0` — the
//! standard normalized complex Wiener process.

use num_complex::Complex64;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 2⁶⁴/φ, the Weyl constant used by splitmix64.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of the splitmix64 output function.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trajectory noise stream: a ChaCha8 generator keyed from
/// `(seed, trajectory_index)` through a splitmix64 expansion.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, trajectory_index: u64) -> Self {
        // Mixing the index through the Weyl constant before expansion keeps
        // (seed, index) and (seed + 1, index − 1) far apart in key space.
        let mut state = seed ^ trajectory_index.wrapping_mul(GOLDEN).rotate_left(17);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Uniform in (0, 1]; never 0, so it is safe under `ln`.
    fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, 1).
    fn uniform_half_open(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Next complex Wiener increment over a step of length `dt`.
    ///
    /// Consumes exactly two generator words per call (one Box–Muller pair),
    /// so stream positions stay aligned no matter how callers interleave
    /// steps.
    pub fn next_increment(&mut self, dt: f64) -> Complex64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform_half_open();
        let r = (-2.0 * u1.ln()).sqrt() * (0.5 * dt).sqrt();
        let theta = std::f64::consts::TAU * u2;
        Complex64::new(r * theta.cos(), r * theta.sin())
    }
}
