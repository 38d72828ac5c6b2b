//! Sampling models for the scalar Gaussian channel and the wiretap pair.
//!
//! Signals are real-valued. All randomness flows through [`RngStream`], a
//! counter-based seed/stream pair: the same pair always yields the same
//! noise sequence, which is what makes parallel Monte Carlo reproducible.

use crate::capacity::WiretapParams;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Power-constrained input block: `sum x_i^2 <= n * P + 1e-9`.
///
/// Enforced at construction; a rejected block is never silently rescaled,
/// because rescaling would corrupt downstream error-probability estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    samples: Vec<f64>,
    power_budget: f64,
}

/// Slack on the block energy check, absorbing accumulation error in the sum.
pub const POWER_SLACK: f64 = 1e-9;

impl Codeword {
    /// Validates the energy constraint against the declared budget.
    pub fn new(samples: Vec<f64>, power_budget: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("codeword must contain at least one sample".into()));
        }
        if !(power_budget.is_finite() && power_budget >= 0.0) {
            return Err(Error::Domain(format!(
                "power budget is {power_budget}, expected a nonnegative finite value"
            )));
        }
        for (i, &s) in samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::Domain(format!("sample {i} is {s}, expected finite")));
            }
        }
        let energy: f64 = samples.iter().map(|s| s * s).sum();
        let cap = samples.len() as f64 * power_budget + POWER_SLACK;
        if energy > cap {
            return Err(Error::Invariant(format!(
                "block energy {energy} exceeds n*P = {cap}"
            )));
        }
        Ok(Self {
            samples,
            power_budget,
        })
    }

    /// The signal amplitudes.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Declared per-sample power budget.
    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// Blocklength.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Never true: construction rejects empty blocks.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Seed and stream index naming one reproducible noise sequence.
///
/// Identical pairs yield identical samples on any host and under any
/// parallel schedule. A single stream must not be shared across threads;
/// give each unit of work its own index instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
}

impl RngStream {
    /// Names the stream `stream_index` of the generator keyed by `seed`.
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// The generator seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The stream index within the seed's family.
    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Instantiates the generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Sends a block through the additive Gaussian channel: `y_i = x_i + xi_i`
/// with `xi_i` independent zero-mean Gaussians of the given variance.
///
/// A zero variance is the exact noiseless limit (`y = x`). Errors on a
/// negative or non-finite variance.
pub fn awgn_transmit(x: &Codeword, noise_variance: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(noise_variance.is_finite() && noise_variance >= 0.0) {
        return Err(Error::Domain(format!(
            "noise variance is {noise_variance}, expected a nonnegative finite value"
        )));
    }
    let sigma = noise_variance.sqrt();
    Ok(x.samples()
        .iter()
        .map(|&s| {
            let g: f64 = rng.sample(StandardNormal);
            s + sigma * g
        })
        .collect())
}

/// Sends one block through the wiretap pair: the legitimate receiver gets
/// `y = x + xi`, the eavesdropper gets `z = x + phi`, with `xi` and `phi`
/// independent across branches and samples.
pub fn gwc_transmit(
    x: &Codeword,
    params: &WiretapParams<f64>,
    rng: &mut impl Rng,
) -> (Vec<f64>, Vec<f64>) {
    let y = awgn_transmit(x, params.main_variance(), rng).expect("validated variance");
    let z = awgn_transmit(x, params.eve_variance(), rng).expect("validated variance");
    (y, z)
}
