//! Concatenated identification codes over the Gaussian wiretap channel.
//!
//! A code for `N` identities is assembled from three parts:
//!
//! - an inner transmission code: `M'` Gaussian codewords of length `n`
//!   carrying a uniformly random index `j`,
//! - an outer color code: `M''` bins of `B` codewords of length
//!   `q = ceil(sqrt(n))`, sent through a stochastic (uniform-in-bin)
//!   encoder to hide the color from the eavesdropper,
//! - a coloring family `T_i: {0..M'-1} -> {0..M''-1}`, one map per
//!   identity.
//!
//! To claim identity `i`, the sender draws `j` uniformly and transmits the
//! inner codeword of `j` followed by an outer codeword of color `T_i(j)`.
//! The verifier for identity `i` decodes both parts and accepts when the
//! decoded color equals `T_i` of the decoded index. Two identities are
//! confusable exactly as often as their colorings collide, which is what
//! makes small pairwise collision fractions the designable quantity.

use crate::capacity::{awgn_capacity, gwc_secrecy_capacity, GaussianChannelParams, WiretapParams};
use crate::channel::Codeword;
use crate::channel::RngStream;
use crate::prob::LogBase;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::{Read, Write};

/// Default materialization budget for inner codebooks: exhaustive collision
/// counting and minimum-distance decoding stay tractable up to this size.
pub const DEFAULT_MAX_CODEWORDS: u64 = 1 << 16;

/// Budget on the total floats stored by an outer color code.
pub const MAX_OUTER_FLOATS: u64 = 1 << 22;

// Arithmetic in a small finite field GF(p^k), elements indexed 0..p^k-1 as
// base-p coefficient vectors of polynomials modulo a found irreducible.
mod smallfield {
    use crate::{Error, Result};

    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct Field {
        p: u32,
        k: u32,
        size: u32,
        // Monic irreducible of degree k, coefficients low-to-high, len k+1.
        irreducible: Vec<u32>,
    }

    // Smallest prime factor, or None for size < 2.
    fn smallest_prime_factor(x: u32) -> Option<u32> {
        if x < 2 {
            return None;
        }
        let mut d = 2;
        while d * d <= x {
            if x % d == 0 {
                return Some(d);
            }
            d += 1;
        }
        Some(x)
    }

    fn digits(mut x: u32, p: u32, len: usize) -> Vec<u32> {
        let mut out = vec![0; len];
        for slot in out.iter_mut() {
            *slot = x % p;
            x /= p;
        }
        out
    }

    // Polynomial remainder of a by b over F_p, b monic.
    fn poly_rem(mut a: Vec<u32>, b: &[u32], p: u32) -> Vec<u32> {
        let db = b.len() - 1;
        while a.len() > db {
            let lead = *a.last().unwrap();
            let shift = a.len() - 1 - db;
            if lead != 0 {
                for i in 0..=db {
                    let idx = shift + i;
                    a[idx] = (a[idx] + p * p - (lead * b[i]) % p) % p;
                }
            }
            a.pop();
        }
        a
    }

    fn poly_is_zero(a: &[u32]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    // True when the monic polynomial (low-to-high, len deg+1) has no monic
    // divisor of degree 1..=deg/2.
    fn is_irreducible(cand: &[u32], p: u32) -> bool {
        let deg = cand.len() - 1;
        for d in 1..=deg / 2 {
            let count = p.pow(d as u32);
            for lower in 0..count {
                let mut div = vec![0u32; d + 1];
                let mut x = lower;
                for slot in div.iter_mut().take(d) {
                    *slot = x % p;
                    x /= p;
                }
                div[d] = 1;
                if poly_is_zero(&poly_rem(cand.to_vec(), &div, p)) {
                    return false;
                }
            }
        }
        true
    }

    impl Field {
        /// Builds GF(size); errors unless `size` is a prime power >= 2.
        pub fn new(size: u32) -> Result<Self> {
            let p = smallest_prime_factor(size)
                .ok_or_else(|| Error::Config(format!("field size {size} is below 2")))?;
            let mut k = 0;
            let mut rem = size;
            while rem % p == 0 {
                rem /= p;
                k += 1;
            }
            if rem != 1 {
                return Err(Error::Config(format!(
                    "field size {size} is not a prime power"
                )));
            }
            let irreducible = if k == 1 {
                vec![0, 1] // placeholder; degree-1 reduction never triggers
            } else {
                // Exhaustive search over monic degree-k candidates.
                let mut found = None;
                let count = p.pow(k);
                'outer: for lower in 0..count {
                    let mut cand = vec![0u32; k as usize + 1];
                    let mut x = lower;
                    for slot in cand.iter_mut().take(k as usize) {
                        *slot = x % p;
                        x /= p;
                    }
                    cand[k as usize] = 1;
                    if is_irreducible(&cand, p) {
                        found = Some(cand);
                        break 'outer;
                    }
                }
                found.expect("an irreducible polynomial of every degree exists")
            };
            Ok(Self {
                p,
                k,
                size,
                irreducible,
            })
        }

        pub fn size(&self) -> u32 {
            self.size
        }

        pub fn add(&self, a: u32, b: u32) -> u32 {
            let p = self.p;
            let mut out = 0;
            let mut mult = 1;
            let (mut a, mut b) = (a, b);
            for _ in 0..self.k {
                out += ((a % p + b % p) % p) * mult;
                a /= p;
                b /= p;
                mult *= p;
            }
            out
        }

        pub fn mul(&self, a: u32, b: u32) -> u32 {
            let p = self.p;
            let k = self.k as usize;
            let da = digits(a, p, k);
            let db = digits(b, p, k);
            let mut conv = vec![0u32; 2 * k - 1];
            for (i, &ca) in da.iter().enumerate() {
                if ca == 0 {
                    continue;
                }
                for (j, &cb) in db.iter().enumerate() {
                    conv[i + j] = (conv[i + j] + ca * cb) % p;
                }
            }
            let rem = if self.k == 1 {
                vec![conv[0] % p]
            } else {
                poly_rem(conv, &self.irreducible, p)
            };
            let mut out = 0;
            let mut mult = 1;
            for i in 0..k {
                out += rem.get(i).copied().unwrap_or(0) * mult;
                mult *= p;
            }
            out
        }
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn prime_field_is_modular_arithmetic() {
            let f = Field::new(7).unwrap();
            assert_eq!(f.add(5, 4), 2);
            assert_eq!(f.mul(5, 4), 6);
            assert_eq!(f.mul(0, 6), 0);
        }

        #[test]
        fn gf16_has_group_structure() {
            let f = Field::new(16).unwrap();
            // Every nonzero element is invertible: row of the mult table is
            // a permutation hitting 1.
            for a in 1..16 {
                let mut seen = [false; 16];
                let mut hits_one = false;
                for b in 0..16 {
                    let m = f.mul(a, b);
                    assert!(!seen[m as usize] || m == 0);
                    seen[m as usize] = true;
                    if m == 1 {
                        hits_one = true;
                    }
                }
                assert!(hits_one, "element {a} has an inverse");
            }
            // Characteristic 2: a + a = 0.
            for a in 0..16 {
                assert_eq!(f.add(a, a), 0);
            }
        }

        #[test]
        fn non_prime_power_rejected() {
            assert!(Field::new(12).is_err());
            assert!(Field::new(1).is_err());
            assert!(Field::new(0).is_err());
        }
    }
}

/// How a coloring family generates its per-identity maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColoringVariant {
    /// Seeded hash of (seed, identity, index), scaled to the color range.
    Pseudorandom,
    /// Index read as a degree-`< s` polynomial over GF(M''), evaluated at a
    /// per-identity field point; collision fraction provably `(s-1)/M''`.
    Polynomial,
}

#[derive(Debug, Clone, PartialEq)]
enum ColoringKind {
    Pseudorandom {
        seed: u64,
    },
    Polynomial {
        field: smallfield::Field,
        s: u32,
    },
    Explicit {
        tables: Vec<Vec<u32>>,
    },
}

/// Per-identity maps from the inner index set to the color set, with a
/// stored pairwise collision bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoringFamily {
    identities: usize,
    domain_size: u64,
    color_count: u32,
    collision_bound: f64,
    kind: ColoringKind,
}

// splitmix64 finalizer; full-avalanche 64-bit mix.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

// Keyed hash of (seed, identity, index) used by the pseudorandom variant
// and by subsampled collision counting.
fn keyed_hash(seed: u64, identity: u64, index: u64) -> u64 {
    let h = mix64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let h = mix64(h ^ identity.wrapping_mul(0xc2b2_ae3d_27d4_eb4f));
    mix64(h ^ index.wrapping_mul(0x1656_67b1_9e37_79f9))
}

impl ColoringFamily {
    /// Number of identities `N`.
    pub fn identities(&self) -> usize {
        self.identities
    }

    /// Domain size `M'` (the inner index set).
    pub fn domain_size(&self) -> u64 {
        self.domain_size
    }

    /// Color-set size `M''`.
    pub fn color_count(&self) -> u32 {
        self.color_count
    }

    /// Stored bound on the pairwise collision fraction. Exact guarantee for
    /// the polynomial variant; the expected-fraction level (with its
    /// binomial fluctuation) for the pseudorandom variant.
    pub fn collision_bound(&self) -> f64 {
        self.collision_bound
    }

    /// The color identity `i` assigns to inner index `j`.
    pub fn color(&self, identity: usize, index: u64) -> u32 {
        debug_assert!(identity < self.identities && index < self.domain_size);
        match &self.kind {
            ColoringKind::Pseudorandom { seed } => {
                let key = keyed_hash(*seed, identity as u64, index);
                ((u128::from(key) * u128::from(self.color_count)) >> 64) as u32
            }
            ColoringKind::Polynomial { field, s } => {
                // Index digits are the coefficients; Horner at the
                // identity's own field point.
                let m2 = u64::from(field.size());
                let point = identity as u32;
                let mut digits = [0u32; 16];
                let mut x = index;
                for d in digits.iter_mut().take(*s as usize) {
                    *d = (x % m2) as u32;
                    x /= m2;
                }
                let mut acc = 0u32;
                for t in (0..*s as usize).rev() {
                    acc = field.add(field.mul(acc, point), digits[t]);
                }
                acc
            }
            ColoringKind::Explicit { tables } => tables[identity][index as usize],
        }
    }

    /// Fraction of the domain on which identities `i` and `j` agree.
    ///
    /// Counted exhaustively when the domain has at most 2^16 points,
    /// otherwise on a deterministic 2^16-point subsample.
    pub fn collision_fraction(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.identities && j < self.identities);
        let exhaustive = self.domain_size <= DEFAULT_MAX_CODEWORDS;
        let samples = self.domain_size.min(DEFAULT_MAX_CODEWORDS);
        let mut hits = 0u64;
        for t in 0..samples {
            let index = if exhaustive {
                t
            } else {
                keyed_hash(0x5b5a_d4d3, t, 0) % self.domain_size
            };
            if self.color(i, index) == self.color(j, index) {
                hits += 1;
            }
        }
        hits as f64 / samples as f64
    }

    /// Wraps explicit per-identity color tables, for hand-built families.
    pub fn from_tables(tables: Vec<Vec<u32>>, color_count: u32, collision_bound: f64) -> Result<Self> {
        if tables.len() < 2 {
            return Err(Error::Config("a coloring family needs at least 2 identities".into()));
        }
        let domain = tables[0].len();
        if domain == 0 {
            return Err(Error::Config("coloring tables must be nonempty".into()));
        }
        for (i, t) in tables.iter().enumerate() {
            if t.len() != domain {
                return Err(Error::Config(format!(
                    "coloring table {i} has {} entries, expected {domain}",
                    t.len()
                )));
            }
            if let Some(&c) = t.iter().find(|&&c| c >= color_count) {
                return Err(Error::Config(format!(
                    "coloring table {i} contains color {c}, expected values below {color_count}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&collision_bound) {
            return Err(Error::Config(format!(
                "collision bound is {collision_bound}, expected a value in [0, 1]"
            )));
        }
        Ok(Self {
            identities: tables.len(),
            domain_size: domain as u64,
            color_count,
            collision_bound,
            kind: ColoringKind::Explicit { tables },
        })
    }

    fn variant_tag(&self) -> u8 {
        match self.kind {
            ColoringKind::Pseudorandom { .. } => 0,
            ColoringKind::Polynomial { .. } => 1,
            ColoringKind::Explicit { .. } => 2,
        }
    }

    fn seed(&self) -> u64 {
        match &self.kind {
            ColoringKind::Pseudorandom { seed } => *seed,
            _ => 0,
        }
    }
}

/// Builds a coloring family for `identities` identities over domain size
/// `domain_size` with `color_count` colors.
///
/// The polynomial variant requires `color_count` to be a prime power,
/// `domain_size = color_count^s` for an integer `s >= 2`, and
/// `identities <= color_count` (each identity needs its own evaluation
/// point); its stored collision bound `(s-1)/color_count` is a theorem, not
/// a measurement. The pseudorandom variant works for any sizes and stores
/// the expected fraction `1/color_count` plus three binomial standard
/// deviations.
pub fn build_coloring_family(
    identities: usize,
    domain_size: u64,
    color_count: u32,
    seed: u64,
    variant: ColoringVariant,
) -> Result<ColoringFamily> {
    if identities < 2 {
        return Err(Error::Config(format!(
            "coloring family needs at least 2 identities, got {identities}"
        )));
    }
    if color_count < 2 {
        return Err(Error::Config(format!(
            "coloring family needs at least 2 colors, got {color_count}"
        )));
    }
    if domain_size < u64::from(color_count) {
        return Err(Error::Config(format!(
            "domain size {domain_size} is below the color count {color_count}"
        )));
    }
    let kind = match variant {
        ColoringVariant::Pseudorandom => ColoringKind::Pseudorandom { seed },
        ColoringVariant::Polynomial => {
            let field = smallfield::Field::new(color_count)?;
            // domain must be an exact power color_count^s with s >= 2.
            let mut s = 0u32;
            let mut rest = domain_size;
            let base = u64::from(color_count);
            while rest > 1 && rest % base == 0 {
                rest /= base;
                s += 1;
            }
            if rest != 1 || s < 2 {
                return Err(Error::Config(format!(
                    "polynomial colorings need domain size = {color_count}^s with s >= 2, got {domain_size}"
                )));
            }
            if identities as u64 > u64::from(color_count) {
                return Err(Error::Config(format!(
                    "polynomial colorings support at most {color_count} identities, got {identities}"
                )));
            }
            ColoringKind::Polynomial { field, s }
        }
    };
    let collision_bound = match &kind {
        ColoringKind::Polynomial { s, .. } => f64::from(*s - 1) / f64::from(color_count),
        _ => {
            let p = 1.0 / f64::from(color_count);
            p + 3.0 * (p * (1.0 - p) / domain_size as f64).sqrt()
        }
    };
    Ok(ColoringFamily {
        identities,
        domain_size,
        color_count,
        collision_bound,
        kind,
    })
}

/// Inner transmission code: an i.i.d. Gaussian codebook with a
/// minimum-distance decoder.
///
/// The nominal size is `ceil(2^(n * rate_fraction * C))` with `C` the
/// main-channel capacity in bits. Codebooks past the materialization budget
/// either fail construction (strict builder) or are truncated to the budget
/// with the nominal size kept for rate bookkeeping (capped builder).
#[derive(Debug, Clone, PartialEq)]
pub struct InnerTransmissionCode {
    n: usize,
    power: f64,
    noise_variance: f64,
    rate_fraction: f64,
    seed: u64,
    nominal_log2_size: f64,
    clamped: bool,
    max_codewords: u64,
    size: u64,
    codebook: Vec<f64>,
}

impl InnerTransmissionCode {
    /// Blocklength `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Materialized codebook size.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Per-sample power budget.
    pub fn power(&self) -> f64 {
        self.power
    }

    /// Main-channel noise variance the rate was computed against.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Configured fraction of capacity.
    pub fn rate_fraction(&self) -> f64 {
        self.rate_fraction
    }

    /// Construction seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// log2 of the nominal (un-truncated) codebook size.
    pub fn nominal_log2_size(&self) -> f64 {
        self.nominal_log2_size
    }

    /// The nominal size itself when it fits an integer.
    pub fn nominal_size(&self) -> Option<u64> {
        if self.nominal_log2_size < 63.0 {
            Some((2f64.powf(self.nominal_log2_size)).ceil() as u64)
        } else {
            None
        }
    }

    /// Whether the codebook was truncated to the budget.
    pub fn is_clamped(&self) -> bool {
        self.clamped
    }

    /// Budget the construction ran under.
    pub fn max_codewords(&self) -> u64 {
        self.max_codewords
    }

    /// Codeword of index `j`.
    pub fn word(&self, j: u64) -> &[f64] {
        let start = j as usize * self.n;
        &self.codebook[start..start + self.n]
    }

    /// Minimum-distance decoding of a received block of length `n`.
    ///
    /// Ties resolve to the lowest index; the scan abandons a candidate as
    /// soon as its partial distance exceeds the best found so far.
    pub fn decode(&self, block: &[f64]) -> Result<u64> {
        if block.len() != self.n {
            return Err(Error::Shape(format!(
                "received block has {} samples, expected {}",
                block.len(),
                self.n
            )));
        }
        let mut best = f64::INFINITY;
        let mut best_idx = 0u64;
        for j in 0..self.size {
            let word = self.word(j);
            let mut dist = 0.0;
            for (t, &w) in word.iter().enumerate() {
                let e = block[t] - w;
                dist += e * e;
                if dist >= best {
                    break;
                }
            }
            if dist < best {
                best = dist;
                best_idx = j;
            }
        }
        Ok(best_idx)
    }
}

// Draws one power-feasible Gaussian codeword: i.i.d. entries at 90% of the
// budget, redrawing the rare block that still lands outside the constraint.
fn draw_power_feasible_word(n: usize, power: f64, rng: &mut impl Rng) -> Vec<f64> {
    let sigma = (0.9 * power).sqrt();
    loop {
        let word: Vec<f64> = (0..n)
            .map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                sigma * g
            })
            .collect();
        let energy: f64 = word.iter().map(|x| x * x).sum();
        if energy <= n as f64 * power {
            return word;
        }
    }
}

fn inner_code_with_budget(
    n: usize,
    rate_fraction: f64,
    noise_variance: f64,
    power: f64,
    seed: u64,
    max_codewords: u64,
    clamp: bool,
) -> Result<InnerTransmissionCode> {
    if n < 2 {
        return Err(Error::Domain(format!("blocklength is {n}, expected at least 2")));
    }
    if !(rate_fraction > 0.0 && rate_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "rate fraction is {rate_fraction}, expected a value strictly inside (0, 1)"
        )));
    }
    let params = GaussianChannelParams::new(noise_variance, power)?;
    let capacity = awgn_capacity(&params, LogBase::Bits);
    let nominal_log2_size = n as f64 * rate_fraction * capacity;
    let nominal = if nominal_log2_size < 63.0 {
        Some(2f64.powf(nominal_log2_size).ceil() as u64)
    } else {
        None
    };
    if let Some(m) = nominal {
        if m < 2 {
            return Err(Error::Domain(format!(
                "nominal codebook size {m} is below 2; raise the rate or the blocklength"
            )));
        }
    }
    let size = match nominal {
        Some(m) if m <= max_codewords => m,
        _ if clamp => max_codewords,
        _ => {
            return Err(Error::Resource(format!(
                "nominal codebook size 2^{nominal_log2_size:.2} exceeds the budget of {max_codewords} codewords"
            )))
        }
    };
    let clamped = nominal.map_or(true, |m| m > max_codewords) && size == max_codewords;
    let mut codebook = Vec::with_capacity(size as usize * n);
    for j in 0..size {
        // One stream per codeword keeps construction order-independent.
        let mut rng = RngStream::new(seed, j).rng();
        codebook.extend_from_slice(&draw_power_feasible_word(n, power, &mut rng));
    }
    Ok(InnerTransmissionCode {
        n,
        power,
        noise_variance,
        rate_fraction,
        seed,
        nominal_log2_size,
        clamped,
        max_codewords,
        size,
        codebook,
    })
}

/// Builds the inner code at the default budget, rejecting configurations
/// whose nominal codebook does not fit it.
pub fn build_inner_code(
    n: usize,
    rate_fraction: f64,
    noise_variance: f64,
    power: f64,
    seed: u64,
) -> Result<InnerTransmissionCode> {
    inner_code_with_budget(
        n,
        rate_fraction,
        noise_variance,
        power,
        seed,
        DEFAULT_MAX_CODEWORDS,
        false,
    )
}

/// Builds the inner code with an explicit budget, truncating the
/// materialized codebook to it when the nominal size is larger. The nominal
/// size stays recorded for rate bookkeeping.
pub fn build_inner_code_capped(
    n: usize,
    rate_fraction: f64,
    noise_variance: f64,
    power: f64,
    seed: u64,
    max_codewords: u64,
) -> Result<InnerTransmissionCode> {
    if max_codewords < 2 {
        return Err(Error::Domain(format!(
            "codebook budget is {max_codewords}, expected at least 2"
        )));
    }
    inner_code_with_budget(n, rate_fraction, noise_variance, power, seed, max_codewords, true)
}

/// Outer wiretap color code: `M''` disjoint bins of `B` codewords each,
/// length `q`, with a uniform-in-bin stochastic encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapColorCode {
    q: usize,
    color_count: u32,
    bin_size: u32,
    power: f64,
    main_variance: f64,
    eve_variance: f64,
    seed: u64,
    words: Vec<f64>,
}

impl WiretapColorCode {
    /// Outer blocklength `q`.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of colors `M''`.
    pub fn color_count(&self) -> u32 {
        self.color_count
    }

    /// Bin size `B`; 1 degenerates to a plain transmission code.
    pub fn bin_size(&self) -> u32 {
        self.bin_size
    }

    /// Per-sample power budget.
    pub fn power(&self) -> f64 {
        self.power
    }

    /// Main-channel noise variance recorded at construction.
    pub fn main_variance(&self) -> f64 {
        self.main_variance
    }

    /// Eavesdropper noise variance recorded at construction.
    pub fn eve_variance(&self) -> f64 {
        self.eve_variance
    }

    /// Construction seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Codeword `member` of the bin for `color`.
    pub fn word(&self, color: u32, member: u32) -> &[f64] {
        let idx = (color as usize * self.bin_size as usize + member as usize) * self.q;
        &self.words[idx..idx + self.q]
    }

    /// Stochastic encoding: a uniformly drawn member of the color's bin.
    pub fn encode_color<'a>(&'a self, color: u32, rng: &mut impl Rng) -> &'a [f64] {
        assert!(color < self.color_count, "color out of range");
        let member = rng.gen_range(0..self.bin_size);
        self.word(color, member)
    }

    /// Minimum-distance decoding over all bin members; returns the color
    /// owning the nearest codeword.
    pub fn decode_color(&self, block: &[f64]) -> Result<u32> {
        if block.len() != self.q {
            return Err(Error::Shape(format!(
                "received block has {} samples, expected {}",
                block.len(),
                self.q
            )));
        }
        let total = self.color_count as usize * self.bin_size as usize;
        let mut best = f64::INFINITY;
        let mut best_word = 0usize;
        for w in 0..total {
            let word = &self.words[w * self.q..(w + 1) * self.q];
            let mut dist = 0.0;
            for (t, &c) in word.iter().enumerate() {
                let e = block[t] - c;
                dist += e * e;
                if dist >= best {
                    break;
                }
            }
            if dist < best {
                best = dist;
                best_word = w;
            }
        }
        Ok((best_word / self.bin_size as usize) as u32)
    }
}

/// Builds the outer color code.
///
/// Refuses construction when the secrecy capacity of the declared wiretap
/// pair is zero: the binning argument has nothing to hide behind. With
/// `bin_size = 1` the result is a plain transmission code for the color
/// (the insecure baseline).
pub fn build_wiretap_color_code(
    q: usize,
    color_count: u32,
    main_variance: f64,
    eve_variance: f64,
    power: f64,
    bin_size: u32,
    seed: u64,
) -> Result<WiretapColorCode> {
    if q == 0 {
        return Err(Error::Domain("outer blocklength must be at least 1".into()));
    }
    if color_count < 2 {
        return Err(Error::Domain(format!(
            "color count is {color_count}, expected at least 2"
        )));
    }
    if bin_size == 0 {
        return Err(Error::Domain("bin size must be at least 1".into()));
    }
    let params = WiretapParams::new(main_variance, eve_variance, power)?;
    if gwc_secrecy_capacity(&params, LogBase::Bits) <= 0.0 {
        return Err(Error::Refused(
            "wiretap color code needs strictly positive secrecy capacity".into(),
        ));
    }
    let floats = color_count as u64 * u64::from(bin_size) * q as u64;
    if floats > MAX_OUTER_FLOATS {
        return Err(Error::Resource(format!(
            "outer code needs {floats} stored samples, budget is {MAX_OUTER_FLOATS}"
        )));
    }
    let mut words = Vec::with_capacity(floats as usize);
    for idx in 0..(color_count as u64 * u64::from(bin_size)) {
        let mut rng = RngStream::new(seed, idx).rng();
        words.extend_from_slice(&draw_power_feasible_word(q, power, &mut rng));
    }
    Ok(WiretapColorCode {
        q,
        color_count,
        bin_size,
        power,
        main_variance,
        eve_variance,
        seed,
        words,
    })
}

/// The assembled identification code; see the module docs for the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationCode {
    inner: InnerTransmissionCode,
    outer: WiretapColorCode,
    colorings: ColoringFamily,
}

impl IdentificationCode {
    /// Composes the three parts, checking they agree on sizes, power, and
    /// the outer-blocklength rule `q = ceil(sqrt(n))`.
    pub fn new(
        inner: InnerTransmissionCode,
        outer: WiretapColorCode,
        colorings: ColoringFamily,
    ) -> Result<Self> {
        if colorings.domain_size() != inner.size() {
            return Err(Error::Invariant(format!(
                "coloring domain {} does not match the inner codebook size {}",
                colorings.domain_size(),
                inner.size()
            )));
        }
        if colorings.color_count() != outer.color_count() {
            return Err(Error::Invariant(format!(
                "coloring range {} does not match the outer color count {}",
                colorings.color_count(),
                outer.color_count()
            )));
        }
        let expected_q = (inner.n() as f64).sqrt().ceil() as usize;
        if outer.q() != expected_q {
            return Err(Error::Invariant(format!(
                "outer blocklength {} does not equal ceil(sqrt({})) = {expected_q}",
                outer.q(),
                inner.n()
            )));
        }
        if inner.power() != outer.power() {
            return Err(Error::Invariant(format!(
                "inner power {} and outer power {} disagree",
                inner.power(),
                outer.power()
            )));
        }
        Ok(Self {
            inner,
            outer,
            colorings,
        })
    }

    /// The inner transmission code.
    pub fn inner(&self) -> &InnerTransmissionCode {
        &self.inner
    }

    /// The outer color code.
    pub fn outer(&self) -> &WiretapColorCode {
        &self.outer
    }

    /// The coloring family.
    pub fn colorings(&self) -> &ColoringFamily {
        &self.colorings
    }

    /// Number of identities.
    pub fn identities(&self) -> usize {
        self.colorings.identities()
    }

    /// Inner blocklength `n`.
    pub fn n(&self) -> usize {
        self.inner.n()
    }

    /// Outer blocklength `q`.
    pub fn q(&self) -> usize {
        self.outer.q()
    }

    /// Total blocklength `m = n + q`.
    pub fn m(&self) -> usize {
        self.inner.n() + self.outer.q()
    }

    /// Shared per-sample power budget.
    pub fn power(&self) -> f64 {
        self.inner.power()
    }

    /// Identification rate `log2 log2 (N) / m`.
    pub fn identification_rate(&self) -> f64 {
        (self.identities() as f64).log2().log2() / self.m() as f64
    }
}

/// Encodes a claim of `identity`: uniform index `j`, inner codeword of `j`,
/// then a stochastic outer codeword of color `T_identity(j)`.
pub fn id_encode(
    code: &IdentificationCode,
    identity: usize,
    rng: &mut impl Rng,
) -> Result<Codeword> {
    if identity >= code.identities() {
        return Err(Error::Domain(format!(
            "identity {identity} out of range, code has {}",
            code.identities()
        )));
    }
    // Draw order (index, then bin member) is part of the format: replaying
    // a stream must reproduce the transmission.
    let j = rng.gen_range(0..code.inner.size());
    let color = code.colorings.color(identity, j);
    let outer = code.outer.encode_color(color, rng);
    let mut samples = Vec::with_capacity(code.m());
    samples.extend_from_slice(code.inner.word(j));
    samples.extend_from_slice(outer);
    Codeword::new(samples, code.power())
}

/// Verifies a claim of `identity` on a received block of length `m`:
/// decodes the inner index and the outer color, accepts when the color
/// matches the identity's coloring of the index.
pub fn id_verify(code: &IdentificationCode, identity: usize, received: &[f64]) -> Result<bool> {
    if identity >= code.identities() {
        return Err(Error::Domain(format!(
            "identity {identity} out of range, code has {}",
            code.identities()
        )));
    }
    if received.len() != code.m() {
        return Err(Error::Shape(format!(
            "received block has {} samples, expected {}",
            received.len(),
            code.m()
        )));
    }
    let n = code.n();
    let j_hat = code.inner.decode(&received[..n])?;
    let c_hat = code.outer.decode_color(&received[n..])?;
    Ok(code.colorings.color(identity, j_hat) == c_hat)
}

const MAGIC: &[u8; 4] = b"SIDC";
const FORMAT_VERSION: u16 = 1;

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_bits().to_le_bytes())?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

impl IdentificationCode {
    /// Writes the self-describing container: a versioned header carrying
    /// `m, n, q, N, M', M''`, the seeds, and the variant, plus every knob
    /// needed to rebuild the code bit for bit. Loading reconstructs the
    /// codebooks deterministically and cross-checks them against the
    /// header, so sender, receiver, and eavesdropper processes share
    /// identical codes.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        write_u64(w, self.m() as u64)?;
        write_u64(w, self.n() as u64)?;
        write_u64(w, self.q() as u64)?;
        write_u64(w, self.identities() as u64)?;
        write_u64(w, self.inner.size())?;
        write_u64(w, u64::from(self.outer.color_count()))?;
        write_u64(w, self.colorings.seed())?;
        w.write_all(&[self.colorings.variant_tag()])?;
        // Inner construction knobs.
        write_u64(w, self.inner.seed())?;
        write_u64(w, self.inner.max_codewords())?;
        write_f64(w, self.inner.rate_fraction())?;
        write_f64(w, self.inner.noise_variance())?;
        write_f64(w, self.inner.power())?;
        // Outer construction knobs.
        write_u64(w, self.outer.seed())?;
        write_u64(w, u64::from(self.outer.bin_size()))?;
        write_f64(w, self.outer.main_variance())?;
        write_f64(w, self.outer.eve_variance())?;
        write_f64(w, self.outer.power())?;
        // Explicit coloring tables carry their data inline.
        if let ColoringKind::Explicit { tables } = &self.colorings.kind {
            write_f64(w, self.colorings.collision_bound())?;
            for t in tables {
                for &c in t {
                    write_u64(w, u64::from(c))?;
                }
            }
        }
        Ok(())
    }

    /// Loads a container written by [`Self::write_to`]; see there.
    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an identification-code container".into()));
        }
        let mut ver = [0u8; 2];
        r.read_exact(&mut ver)?;
        let version = u16::from_le_bytes(ver);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "container version {version} is not supported (expected {FORMAT_VERSION})"
            )));
        }
        let m = read_u64(r)?;
        let n = read_u64(r)? as usize;
        let q = read_u64(r)? as usize;
        let identities = read_u64(r)? as usize;
        let inner_size = read_u64(r)?;
        let color_count_u64 = read_u64(r)?;
        let coloring_seed = read_u64(r)?;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let inner_seed = read_u64(r)?;
        let max_codewords = read_u64(r)?;
        let rate_fraction = read_f64(r)?;
        let inner_noise = read_f64(r)?;
        let inner_power = read_f64(r)?;
        let outer_seed = read_u64(r)?;
        let bin_size = read_u64(r)?;
        let outer_main = read_f64(r)?;
        let outer_eve = read_f64(r)?;
        let outer_power = read_f64(r)?;

        let color_count = u32::try_from(color_count_u64)
            .map_err(|_| Error::Format("color count does not fit 32 bits".into()))?;
        let bin_size = u32::try_from(bin_size)
            .map_err(|_| Error::Format("bin size does not fit 32 bits".into()))?;

        let inner = build_inner_code_capped(
            n,
            rate_fraction,
            inner_noise,
            inner_power,
            inner_seed,
            max_codewords,
        )?;
        let outer = build_wiretap_color_code(
            q, color_count, outer_main, outer_eve, outer_power, bin_size, outer_seed,
        )?;
        let colorings = match tag[0] {
            0 => build_coloring_family(
                identities,
                inner.size(),
                color_count,
                coloring_seed,
                ColoringVariant::Pseudorandom,
            )?,
            1 => build_coloring_family(
                identities,
                inner.size(),
                color_count,
                coloring_seed,
                ColoringVariant::Polynomial,
            )?,
            2 => {
                let collision_bound = read_f64(r)?;
                let mut tables = Vec::with_capacity(identities);
                for _ in 0..identities {
                    let mut t = Vec::with_capacity(inner_size as usize);
                    for _ in 0..inner_size {
                        let c = read_u64(r)?;
                        t.push(u32::try_from(c).map_err(|_| {
                            Error::Format("coloring entry does not fit 32 bits".into())
                        })?);
                    }
                    tables.push(t);
                }
                ColoringFamily::from_tables(tables, color_count, collision_bound)?
            }
            other => {
                return Err(Error::Format(format!("unknown coloring variant tag {other}")))
            }
        };
        // Rebuilt sizes must agree with the header before the code is used.
        if inner.size() != inner_size {
            return Err(Error::Format(format!(
                "rebuilt codebook size {} does not match the header value {inner_size}",
                inner.size()
            )));
        }
        let code = Self::new(inner, outer, colorings)?;
        if code.m() as u64 != m {
            return Err(Error::Format(format!(
                "rebuilt blocklength {} does not match the header value {m}",
                code.m()
            )));
        }
        Ok(code)
    }
}
