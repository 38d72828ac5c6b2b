//! Closed-form capacities and bounds for Gaussian channels: point-to-point
//! and identification capacity, wiretap secrecy capacity and the secure-ID
//! dichotomy, converse bounds on the mutual information available to each
//! receiver, MIMO waterfilling, and correlation-assisted rates.

use crate::num::Real;
use crate::prob::{binary_entropy, conditional_entropy, mutual_information, JointPmf, LogBase};
use crate::{Error, Result};

/// Scalar Gaussian channel: noise variance, input power budget, and an
/// optional blocklength for operations that need one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannelParams<R: Real = f64> {
    noise_variance: R,
    power: R,
    blocklength: Option<usize>,
}

impl<R: Real> GaussianChannelParams<R> {
    /// Validates `noise_variance > 0` and `power >= 0`.
    pub fn new(noise_variance: R, power: R) -> Result<Self> {
        if !(noise_variance.is_finite() && noise_variance > R::zero()) {
            return Err(Error::Domain(format!(
                "noise variance is {noise_variance}, expected a positive finite value"
            )));
        }
        if !(power.is_finite() && power >= R::zero()) {
            return Err(Error::Domain(format!(
                "power budget is {power}, expected a nonnegative finite value"
            )));
        }
        Ok(Self {
            noise_variance,
            power,
            blocklength: None,
        })
    }

    /// Attaches a blocklength (must be at least 1).
    pub fn with_blocklength(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("blocklength must be at least 1".into()));
        }
        self.blocklength = Some(n);
        Ok(self)
    }

    /// Noise variance of the channel.
    pub fn noise_variance(&self) -> R {
        self.noise_variance
    }

    /// Input power budget per channel use.
    pub fn power(&self) -> R {
        self.power
    }

    /// Blocklength, when one was attached.
    pub fn blocklength(&self) -> Option<usize> {
        self.blocklength
    }
}

/// Gaussian wiretap channel: the legitimate receiver sees noise variance
/// `main_variance`, the eavesdropper sees `eve_variance`, both fed by the
/// same power-constrained input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiretapParams<R: Real = f64> {
    main_variance: R,
    eve_variance: R,
    power: R,
}

impl<R: Real> WiretapParams<R> {
    /// Validates both noise variances positive and the power nonnegative.
    pub fn new(main_variance: R, eve_variance: R, power: R) -> Result<Self> {
        if !(eve_variance.is_finite() && eve_variance > R::zero()) {
            return Err(Error::Domain(format!(
                "eavesdropper noise variance is {eve_variance}, expected a positive finite value"
            )));
        }
        // Main-channel validation (and the power check) via the scalar type.
        GaussianChannelParams::new(main_variance, power)?;
        Ok(Self {
            main_variance,
            eve_variance,
            power,
        })
    }

    /// Noise variance seen by the legitimate receiver.
    pub fn main_variance(&self) -> R {
        self.main_variance
    }

    /// Noise variance seen by the eavesdropper.
    pub fn eve_variance(&self) -> R {
        self.eve_variance
    }

    /// Shared input power budget.
    pub fn power(&self) -> R {
        self.power
    }

    /// The legitimate receiver's channel on its own.
    pub fn main_channel(&self) -> GaussianChannelParams<R> {
        GaussianChannelParams::new(self.main_variance, self.power)
            .expect("validated at construction")
    }

    /// The eavesdropper's channel on its own.
    pub fn eve_channel(&self) -> GaussianChannelParams<R> {
        GaussianChannelParams::new(self.eve_variance, self.power)
            .expect("validated at construction")
    }
}

/// Power split across parallel channels produced by [`waterfill`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation<R: Real = f64> {
    powers: Vec<R>,
    water_level: R,
}

impl<R: Real> PowerAllocation<R> {
    /// Per-channel powers, one entry per singular value.
    pub fn powers(&self) -> &[R] {
        &self.powers
    }

    /// The common water level: every active channel satisfies
    /// `power + noise_variance / lambda^2 = water_level`.
    pub fn water_level(&self) -> R {
        self.water_level
    }

    /// Total allocated power.
    pub fn total(&self) -> R {
        self.powers.iter().copied().sum()
    }
}

/// A capacity value together with its base and regime flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityReport<R: Real = f64> {
    /// Information per channel use; always nonnegative.
    pub value: R,
    /// Base the value is measured in.
    pub base: LogBase,
    /// Whether the secrecy capacity of the underlying wiretap pair is
    /// strictly positive.
    pub secrecy_positive: bool,
}

/// Result of [`cr_capacity`]: the closed form applies only when the channel
/// capacity covers the source's conditional entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrCapacity<R: Real = f64> {
    /// `capacity + mutual information`, valid because `C >= H(X|Y)`.
    InRegime { value: R },
    /// `C < H(X|Y)`: the general characterization (a maximization over an
    /// auxiliary variable subject to an information-difference constraint)
    /// has no closed form and is not computed. The fields report the two
    /// sides of the failed regime check, in the requested base.
    OutOfRegime { capacity: R, conditional_entropy: R },
}

/// Shannon capacity of the scalar Gaussian channel: `1/2 log(1 + P / sigma^2)`.
pub fn awgn_capacity<R: Real>(params: &GaussianChannelParams<R>, base: LogBase) -> R {
    let snr = params.power() / params.noise_variance();
    base.log(R::one() + snr) * R::of(0.5)
}

/// Identification capacity of the scalar Gaussian channel.
///
/// Equals [`awgn_capacity`]: with local randomness at the encoder, the
/// double-exponential identification rate is limited exactly by the Shannon
/// capacity.
pub fn id_capacity_awgn<R: Real>(params: &GaussianChannelParams<R>, base: LogBase) -> R {
    awgn_capacity(params, base)
}

/// Secrecy capacity of the Gaussian wiretap pair.
///
/// Uses the degraded-Gaussian closed form
/// `max(0, 1/2 log(1 + P/sigma^2) - 1/2 log(1 + P/sigma'^2))`.
pub fn gwc_secrecy_capacity<R: Real>(params: &WiretapParams<R>, base: LogBase) -> R {
    let main = awgn_capacity(&params.main_channel(), base);
    let eve = awgn_capacity(&params.eve_channel(), base);
    (main - eve).max(R::zero())
}

/// Secure identification capacity of the Gaussian wiretap pair.
///
/// Dichotomy: as soon as the secrecy capacity is strictly positive, secure
/// identification is possible at the full main-channel Shannon capacity;
/// otherwise the capacity is zero. The report's `secrecy_positive` flag
/// records which side of the dichotomy applied.
pub fn secure_id_capacity<R: Real>(params: &WiretapParams<R>, base: LogBase) -> CapacityReport<R> {
    let secrecy_positive = gwc_secrecy_capacity(params, base) > R::zero();
    let value = if secrecy_positive {
        awgn_capacity(&params.main_channel(), base)
    } else {
        R::zero()
    };
    CapacityReport {
        value,
        base,
        secrecy_positive,
    }
}

// Golden-section search for the minimum of a unimodal function on [a, b].
// Terminates when the bracket width falls below rel_tol times the midpoint.
fn golden_min<R: Real>(mut a: R, mut b: R, rel_tol: R, f: impl Fn(R) -> R) -> R {
    let inv_phi = R::of(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        let mid = (a + b) * R::of(0.5);
        if b - a <= rel_tol * mid.abs() {
            break;
        }
    }
    f((a + b) * R::of(0.5))
}

/// Upper bound on the information an eavesdropper can extract when its
/// output laws across identities are within total variation `lambda` of one
/// another:
/// `inf over x in (0, 2/lambda) of 2/x + log2(1 / (1 - x lambda / 2))`.
///
/// The infimum is found by bracketed 1-D minimization to relative tolerance
/// 1e-9 on the minimizer. Errors unless `0 < lambda < 1`.
pub fn eve_mi_upper_bound<R: Real>(lambda: R) -> Result<R> {
    if !(lambda > R::zero() && lambda < R::one()) {
        return Err(Error::Domain(format!(
            "total variation level is {lambda}, expected a value strictly inside (0, 1)"
        )));
    }
    let top = R::of(2.0) / lambda;
    let f = |x: R| {
        let denom = R::one() - x * lambda / R::of(2.0);
        R::of(2.0) / x - LogBase::Bits.log(denom)
    };
    // The objective diverges at both endpoints; shave them off.
    let margin = top * R::of(1e-12);
    Ok(golden_min(margin, top - margin, R::of(1e-9), f))
}

/// Lower bound on the information the legitimate receiver obtains from a
/// working identification code: `H2(1/2 (1 - 2 lambda - 2 delta'))` in bits,
/// where `lambda` measures how close the two conditional output laws are
/// and `delta'` is a slack term.
///
/// Errors unless `0 <= 2 lambda + 2 delta' < 1`.
pub fn bob_mi_lower_bound<R: Real>(lambda: R, delta_prime: R) -> Result<R> {
    let two = R::of(2.0);
    let s = two * lambda + two * delta_prime;
    if !(s >= R::zero() && s < R::one()) {
        return Err(Error::Domain(format!(
            "2*lambda + 2*delta' is {s}, expected a value in [0, 1)"
        )));
    }
    binary_entropy((R::one() - s) * R::of(0.5), LogBase::Bits)
}

fn validate_singular_values<R: Real>(singular_values: &[R]) -> Result<()> {
    if singular_values.is_empty() {
        return Err(Error::Domain("singular value vector is empty".into()));
    }
    for (i, &s) in singular_values.iter().enumerate() {
        if !(s.is_finite() && s > R::zero()) {
            return Err(Error::Domain(format!(
                "singular value at index {i} is {s}, expected a positive finite value"
            )));
        }
    }
    for w in singular_values.windows(2) {
        if w[0] < w[1] {
            return Err(Error::Domain(
                "singular values must be in descending order".into(),
            ));
        }
    }
    Ok(())
}

/// Waterfilling power allocation across parallel Gaussian subchannels with
/// gains `singular_values` (descending, positive) and common noise variance.
///
/// The water level `mu` solves `sum_l max(0, mu - sigma^2/lambda_l^2) = P`
/// by bisection to 1e-12 absolute. A subchannel whose floor equals the water
/// level exactly is treated as inactive.
pub fn waterfill<R: Real>(
    singular_values: &[R],
    noise_variance: R,
    total_power: R,
) -> Result<PowerAllocation<R>> {
    validate_singular_values(singular_values)?;
    if !(noise_variance.is_finite() && noise_variance > R::zero()) {
        return Err(Error::Domain(format!(
            "noise variance is {noise_variance}, expected a positive finite value"
        )));
    }
    if !(total_power.is_finite() && total_power >= R::zero()) {
        return Err(Error::Domain(format!(
            "power budget is {total_power}, expected a nonnegative finite value"
        )));
    }

    let floors: Vec<R> = singular_values
        .iter()
        .map(|&s| noise_variance / (s * s))
        .collect();
    if total_power == R::zero() {
        // Water sits exactly at the lowest floor; nothing is wet.
        return Ok(PowerAllocation {
            powers: vec![R::zero(); floors.len()],
            water_level: floors[0],
        });
    }
    let allocated = |mu: R| -> R {
        floors
            .iter()
            .map(|&f| (mu - f).max(R::zero()))
            .sum()
    };

    // floors[0] is the lowest floor (largest gain first), so allocation
    // starts at zero there and reaches at least P at the upper bracket end.
    let mut lo = floors[0];
    let mut hi = *floors.last().unwrap() + total_power;
    let tol = R::of(1e-12);
    while hi - lo > tol {
        let mid = (lo + hi) * R::of(0.5);
        if mid <= lo || mid >= hi {
            break; // bracket narrower than representable spacing
        }
        if allocated(mid) < total_power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let water_level = (lo + hi) * R::of(0.5);
    let powers = floors
        .iter()
        .map(|&f| (water_level - f).max(R::zero()))
        .collect();
    Ok(PowerAllocation {
        powers,
        water_level,
    })
}

/// Capacity of the MIMO channel with the given singular values under total
/// power `P`: `sum_l log(1 + lambda_l^2 P_l / sigma^2)` with the
/// waterfilling allocation.
pub fn mimo_capacity<R: Real>(
    singular_values: &[R],
    noise_variance: R,
    total_power: R,
    base: LogBase,
) -> Result<R> {
    let allocation = waterfill(singular_values, noise_variance, total_power)?;
    let mut sum = R::zero();
    for (&s, &p) in singular_values.iter().zip(allocation.powers()) {
        sum += base.log(R::one() + s * s * p / noise_variance);
    }
    Ok(sum)
}

/// Lower bound on the MIMO identification capacity; equals [`mimo_capacity`]
/// (any transmission rate is achievable as an identification rate).
pub fn mimo_id_capacity_lower_bound<R: Real>(
    singular_values: &[R],
    noise_variance: R,
    total_power: R,
    base: LogBase,
) -> Result<R> {
    mimo_capacity(singular_values, noise_variance, total_power, base)
}

/// Common-randomness capacity of a two-source model whose terminals also
/// share the Gaussian channel.
///
/// When `awgn_capacity >= H(X|Y)` the closed form `C + I(X;Y)` applies.
/// Otherwise an out-of-regime marker is returned; see [`CrCapacity`].
pub fn cr_capacity<R: Real>(
    dmms: &JointPmf<R>,
    channel: &GaussianChannelParams<R>,
    base: LogBase,
) -> CrCapacity<R> {
    let capacity = awgn_capacity(channel, base);
    let h_cond = conditional_entropy(dmms, base);
    if capacity >= h_cond {
        CrCapacity::InRegime {
            value: capacity + mutual_information(dmms, base),
        }
    } else {
        CrCapacity::OutOfRegime {
            capacity,
            conditional_entropy: h_cond,
        }
    }
}

/// Lower bound on the identification capacity when the terminals share a
/// correlated source next to the channel: channel capacity plus the source's
/// mutual information.
///
/// The two terms take separate bases. Benchmark tables for this bound mix
/// bases (capacity in nats, information offset in bits), and passing
/// `(Nats, Bits)` reproduces them; pass the same base twice for a
/// dimensionally consistent sum.
pub fn correlation_assisted_id_lower_bound<R: Real>(
    dmms: &JointPmf<R>,
    channel: &GaussianChannelParams<R>,
    cap_base: LogBase,
    mi_base: LogBase,
) -> R {
    awgn_capacity(channel, cap_base) + mutual_information(dmms, mi_base)
}
