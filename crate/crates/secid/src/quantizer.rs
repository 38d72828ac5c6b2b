//! Continuous-to-discrete approximation of the Gaussian wiretap channel.
//!
//! The pipeline has three stages, each costing a bounded amount of total
//! variation: inputs snap to a lattice of span `delta_x`, outputs are
//! clipped to `[-z0, z0]` with all out-of-range mass sent to a single atom
//! at `+z0`, and the clipped output density is replaced by a
//! piecewise-constant density on a lattice of span `eps_lat`. With the
//! spans chosen by [`compute_spans`] each stage moves at most `2 * delta`
//! of mass, so the end-to-end gap between the continuous and the quantized
//! output laws is at most `6 * delta`. The dense estimator below measures
//! those gaps by direct numeric integration; past small blocklengths only
//! a Monte Carlo discriminator lower bound is available.

use crate::channel::{Codeword, RngStream};
use crate::num::Real;
use crate::prob::Pmf;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Largest transition matrix (entries) a build will materialize.
pub const MAX_MATRIX_ENTRIES: u64 = 1 << 24;

/// Largest blocklength the dense grid estimator accepts.
pub const MAX_DENSE_BLOCKLENGTH: usize = 4;

/// Regularity constants and derived spans for one quantization run.
///
/// The constants are pinned: `k1 = 1`, `gamma = 2`, `alpha = 3`, and
/// `k_max = max(1/sigma2_main, 1/sigma2_eve)`. They satisfy the smoothness
/// and tail conditions a noise density needs for the stage bounds, and for
/// Gaussian noise that holds by construction; a numeric spot check lives in
/// the tests.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationSpec<R: Real = f64> {
    n: usize,
    delta: R,
    amplitude: R,
    sigma2_main: R,
    sigma2_eve: R,
    k_max: R,
    k1: R,
    gamma: R,
    alpha: R,
    delta_x: R,
    z0: R,
    eps_lat: R,
}

impl<R: Real> QuantizationSpec<R> {
    /// Blocklength the spans were derived for.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Target approximation parameter.
    pub fn delta(&self) -> R {
        self.delta
    }

    /// Input amplitude bound `a`.
    pub fn amplitude(&self) -> R {
        self.amplitude
    }

    /// Main-channel noise variance.
    pub fn sigma2_main(&self) -> R {
        self.sigma2_main
    }

    /// Eavesdropper noise variance.
    pub fn sigma2_eve(&self) -> R {
        self.sigma2_eve
    }

    /// `max(1/sigma2_main, 1/sigma2_eve)`.
    pub fn k_max(&self) -> R {
        self.k_max
    }

    /// Input lattice span.
    pub fn delta_x(&self) -> R {
        self.delta_x
    }

    /// Output clipping radius; also the location of the boundary atom.
    pub fn z0(&self) -> R {
        self.z0
    }

    /// Output lattice span.
    pub fn eps_lat(&self) -> R {
        self.eps_lat
    }

    /// Upper bound `2a/delta_x + 2` on the input lattice size.
    pub fn input_cardinality_bound(&self) -> R {
        R::of(2.0) * self.amplitude / self.delta_x + R::of(2.0)
    }

    /// Upper bound `2 z0/eps_lat + 4` on the output lattice size.
    pub fn output_cardinality_bound(&self) -> R {
        R::of(2.0) * self.z0 / self.eps_lat + R::of(4.0)
    }

    fn noise_variance(&self, side: ChannelSide) -> R {
        match side {
            ChannelSide::Main => self.sigma2_main,
            ChannelSide::Eve => self.sigma2_eve,
        }
    }
}

/// Derives the lattice spans and clipping radius for the given channel
/// pair, blocklength, approximation target, and amplitude bound:
/// `delta_x = eps_lat = (delta^2 / (n k_max))^(1/gamma)` and
/// `z0 = a + (k1 n / delta)^(1/alpha)`.
pub fn compute_spans<R: Real>(
    sigma2_main: R,
    sigma2_eve: R,
    n: usize,
    delta: R,
    amplitude: R,
) -> Result<QuantizationSpec<R>> {
    if n == 0 {
        return Err(Error::Domain("blocklength must be positive".into()));
    }
    for (name, v) in [
        ("main noise variance", sigma2_main),
        ("eavesdropper noise variance", sigma2_eve),
        ("approximation parameter", delta),
        ("amplitude bound", amplitude),
    ] {
        if !(v > R::zero()) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive and finite")));
        }
    }
    let k_max = (R::one() / sigma2_main).max(R::one() / sigma2_eve);
    let k1 = R::one();
    let gamma = R::of(2.0);
    let alpha = R::of(3.0);
    let nn = R::of(n as f64);
    let delta_x = (delta * delta / (nn * k_max)).powf(R::one() / gamma);
    let z0 = amplitude + (k1 * nn / delta).powf(R::one() / alpha);
    let eps_lat = delta_x;
    Ok(QuantizationSpec {
        n,
        delta,
        amplitude,
        sigma2_main,
        sigma2_eve,
        k_max,
        k1,
        gamma,
        alpha,
        delta_x,
        z0,
        eps_lat,
    })
}

/// Which receiver's noise variance a discretization uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSide {
    Main,
    Eve,
}

/// How the boundary atom is computed.
///
/// `IntegralOnly` assigns the atom exactly the clipped tail mass, so rows
/// are normalized by construction. `WithDensityTerm` additionally adds the
/// noise density value at the atom (a fidelity quirk of the source
/// construction, dimensionally odd) and renormalizes the row to restore
/// stochasticity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    IntegralOnly,
    WithDensityTerm,
}

/// Symmetric input lattice `{k delta_x : |k delta_x| <= a}`.
pub fn input_lattice<R: Real>(spec: &QuantizationSpec<R>) -> Vec<R> {
    let k_top = (spec.amplitude / spec.delta_x).to_f64().unwrap().floor() as i64;
    (-k_top..=k_top)
        .map(|k| spec.delta_x * R::of(k as f64))
        .collect()
}

// Interior half-count of the output lattice: points k*eps for |k| <= K,
// with the outermost cells widened to end exactly at +-z0.
fn output_half_count<R: Real>(spec: &QuantizationSpec<R>) -> i64 {
    let ratio = (spec.z0 / spec.eps_lat).to_f64().unwrap();
    let mut k = (ratio - 0.5).floor() as i64;
    let half = R::of(0.5);
    while k > 0 && spec.eps_lat * (R::of(k as f64) + half) > spec.z0 {
        k -= 1;
    }
    k.max(0)
}

/// Output lattice: interior points plus the boundary atom `z0` last.
pub fn output_lattice<R: Real>(spec: &QuantizationSpec<R>) -> Vec<R> {
    let k_top = output_half_count(spec);
    let mut pts: Vec<R> = (-k_top..=k_top)
        .map(|k| spec.eps_lat * R::of(k as f64))
        .collect();
    pts.push(spec.z0);
    pts
}

// Bounds of the output cell owned by interior lattice index k (offset from
// -K): ordinary cells have width eps_lat, the two outermost stretch to z0.
fn output_cell_bounds<R: Real>(spec: &QuantizationSpec<R>, k: i64, k_top: i64) -> (R, R) {
    let half = spec.eps_lat * R::of(0.5);
    let center = spec.eps_lat * R::of(k as f64);
    let lo = if k == -k_top { -spec.z0 } else { center - half };
    let hi = if k == k_top { spec.z0 } else { center + half };
    (lo, hi)
}

/// Snaps every sample of a power-feasible block to the input lattice,
/// choosing the nearest lattice point that does not increase the
/// magnitude. Power can only decrease, so the returned block keeps the
/// original budget.
pub fn quantize_input(block: &Codeword, spec: &QuantizationSpec<f64>) -> Result<Codeword> {
    let tol = 1e-9;
    let mut out = Vec::with_capacity(block.len());
    for &x in block.samples() {
        if x.abs() > spec.amplitude + tol {
            return Err(Error::Domain(format!(
                "sample {x} exceeds the amplitude bound {}",
                spec.amplitude
            )));
        }
        let t = x / spec.delta_x;
        // Round-toward-zero with a tolerance so on-lattice points stay put.
        let k = if (t - t.round()).abs() < tol * t.abs().max(1.0) {
            t.round()
        } else {
            t.trunc()
        };
        out.push(k * spec.delta_x);
    }
    Codeword::new(out, block.power_budget())
}

/// Clips an output sample into `[-z0, z0]`; everything outside, on either
/// side, maps to the single boundary value `+z0`.
pub fn clip_output<R: Real>(y: R, z0: R) -> R {
    if y.abs() <= z0 {
        y
    } else {
        z0
    }
}

// Gaussian interval mass P(lo <= X <= hi) for X ~ N(mean, variance), via
// the error function.
fn gaussian_interval_mass<R: Real>(lo: R, hi: R, mean: R, variance: R) -> R {
    let s = (variance * R::of(2.0)).sqrt();
    (R::erf((hi - mean) / s) - R::erf((lo - mean) / s)) * R::of(0.5)
}

// Two-sided Gaussian tail mass P(|X| > z0) for X ~ N(mean, variance),
// computed with erfc so tiny tails keep full relative precision.
fn gaussian_clip_mass<R: Real>(z0: R, mean: R, variance: R) -> R {
    let s = (variance * R::of(2.0)).sqrt();
    (R::erfc((z0 - mean) / s) + R::erfc((z0 + mean) / s)) * R::of(0.5)
}

fn gaussian_density<R: Real>(u: R, variance: R) -> R {
    let two_pi = R::of(std::f64::consts::TAU);
    (-(u * u) / (variance * R::of(2.0))).exp() / (two_pi * variance).sqrt()
}

fn check_on_input_lattice<R: Real>(x: R, spec: &QuantizationSpec<R>) -> Result<()> {
    let t = (x / spec.delta_x).to_f64().unwrap();
    let tol = 1e-9 * t.abs().max(1.0);
    if (t - t.round()).abs() > tol || x.abs() > spec.amplitude + spec.delta_x * R::of(1e-9) {
        return Err(Error::Domain(format!(
            "input {} is not on the lattice of span {}",
            x.to_f64().unwrap(),
            spec.delta_x.to_f64().unwrap()
        )));
    }
    Ok(())
}

/// One transition row: the distribution of the quantized, clipped output
/// for a lattice input `x`. Cell masses are exact Gaussian integrals; the
/// final entry is the boundary atom.
pub fn discretized_noise_row<R: Real>(
    x: R,
    spec: &QuantizationSpec<R>,
    side: ChannelSide,
    rule: BoundaryRule,
) -> Result<Pmf<R>> {
    check_on_input_lattice(x, spec)?;
    let variance = spec.noise_variance(side);
    let k_top = output_half_count(spec);
    let mut masses = Vec::with_capacity((2 * k_top + 2) as usize);
    for k in -k_top..=k_top {
        let (lo, hi) = output_cell_bounds(spec, k, k_top);
        masses.push(gaussian_interval_mass(lo, hi, x, variance));
    }
    let mut atom = gaussian_clip_mass(spec.z0, x, variance);
    if rule == BoundaryRule::WithDensityTerm {
        atom = atom + gaussian_density(spec.z0 - x, variance);
        masses.push(atom);
        let total: R = masses.iter().copied().fold(R::zero(), |a, b| a + b);
        for m in masses.iter_mut() {
            *m = *m / total;
        }
    } else {
        masses.push(atom);
    }
    Pmf::new(masses)
}

/// A discretized channel: both lattices and the row-stochastic transition
/// matrix between them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedChannel<R: Real = f64> {
    input_lattice: Vec<R>,
    output_lattice: Vec<R>,
    matrix: Vec<R>,
}

impl<R: Real> QuantizedChannel<R> {
    /// Sorted input lattice.
    pub fn input_lattice(&self) -> &[R] {
        &self.input_lattice
    }

    /// Sorted output lattice; the last point is the boundary atom.
    pub fn output_lattice(&self) -> &[R] {
        &self.output_lattice
    }

    /// Transition row of input index `i`.
    pub fn row(&self, i: usize) -> &[R] {
        let w = self.output_lattice.len();
        &self.matrix[i * w..(i + 1) * w]
    }

    /// Number of input lattice points.
    pub fn n_inputs(&self) -> usize {
        self.input_lattice.len()
    }

    /// Number of output lattice points, boundary atom included.
    pub fn n_outputs(&self) -> usize {
        self.output_lattice.len()
    }

    /// Writes both lattices as `kind,index,value` CSV rows.
    pub fn export_lattices_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "kind,index,value")?;
        for (i, x) in self.input_lattice.iter().enumerate() {
            writeln!(w, "input,{i},{}", x.to_f64().unwrap())?;
        }
        for (i, y) in self.output_lattice.iter().enumerate() {
            writeln!(w, "output,{i},{}", y.to_f64().unwrap())?;
        }
        Ok(())
    }
}

/// Builds the full transition matrix for one side of the channel pair.
/// Rows are independent and assembled in parallel.
pub fn build_discrete_channel<R: Real>(
    spec: &QuantizationSpec<R>,
    side: ChannelSide,
    rule: BoundaryRule,
) -> Result<QuantizedChannel<R>> {
    let inputs = input_lattice(spec);
    let outputs = output_lattice(spec);
    let entries = inputs.len() as u64 * outputs.len() as u64;
    if entries > MAX_MATRIX_ENTRIES {
        return Err(Error::Resource(format!(
            "transition matrix needs {entries} entries, budget is {MAX_MATRIX_ENTRIES}"
        )));
    }
    let rows: Vec<Pmf<R>> = inputs
        .par_iter()
        .map(|&x| discretized_noise_row(x, spec, side, rule))
        .collect::<Result<_>>()?;
    let mut matrix = Vec::with_capacity(entries as usize);
    for r in &rows {
        matrix.extend_from_slice(r.probs());
    }
    Ok(QuantizedChannel {
        input_lattice: inputs,
        output_lattice: outputs,
        matrix,
    })
}

const MAGIC: &[u8; 4] = b"SQCH";
const FORMAT_VERSION: u16 = 1;

impl QuantizedChannel<f64> {
    /// Writes the versioned container: lattice sizes, both lattices, and
    /// the row-major matrix.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.input_lattice.len() as u64).to_le_bytes())?;
        w.write_all(&(self.output_lattice.len() as u64).to_le_bytes())?;
        for &v in self.input_lattice.iter().chain(&self.output_lattice).chain(&self.matrix) {
            w.write_all(&v.to_bits().to_le_bytes())?;
        }
        Ok(())
    }

    /// Loads a container written by [`Self::write_to`], re-validating
    /// ordering, nonnegativity, and row sums before returning.
    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a quantized-channel container".into()));
        }
        let mut ver = [0u8; 2];
        r.read_exact(&mut ver)?;
        let version = u16::from_le_bytes(ver);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "container version {version} is not supported (expected {FORMAT_VERSION})"
            )));
        }
        let mut buf8 = [0u8; 8];
        let mut read_u64 = |r: &mut dyn Read| -> Result<u64> {
            r.read_exact(&mut buf8)?;
            Ok(u64::from_le_bytes(buf8))
        };
        let n_in = read_u64(r)? as usize;
        let n_out = read_u64(r)? as usize;
        let total = n_in
            .checked_add(n_out)
            .and_then(|s| n_in.checked_mul(n_out).map(|m| s + m))
            .ok_or_else(|| Error::Format("container sizes overflow".into()))?;
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            values.push(f64::from_bits(u64::from_le_bytes(b)));
        }
        let input_lattice: Vec<f64> = values[..n_in].to_vec();
        let output_lattice: Vec<f64> = values[n_in..n_in + n_out].to_vec();
        let matrix: Vec<f64> = values[n_in + n_out..].to_vec();
        for lat in [&input_lattice, &output_lattice] {
            if lat.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Format("lattice is not strictly ascending".into()));
            }
        }
        for i in 0..n_in {
            let row = &matrix[i * n_out..(i + 1) * n_out];
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::Format(format!("row {i} has an invalid entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-10 {
                return Err(Error::Format(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self {
            input_lattice,
            output_lattice,
            matrix,
        })
    }
}

/// A finitely supported distribution over input blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    support: Vec<(Vec<f64>, f64)>,
}

impl InputDistribution {
    /// Wraps `(block, probability)` pairs; blocks must share one length
    /// and the probabilities must form a distribution.
    pub fn new(support: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Config("input distribution needs support points".into()));
        }
        let n = support[0].0.len();
        if n == 0 {
            return Err(Error::Config("input blocks must be nonempty".into()));
        }
        let mut total = 0.0;
        for (block, p) in &support {
            if block.len() != n {
                return Err(Error::Config("input blocks must share one length".into()));
            }
            if !block.iter().all(|x| x.is_finite()) {
                return Err(Error::Config("input blocks must be finite".into()));
            }
            if !(*p >= 0.0) || !p.is_finite() {
                return Err(Error::Config(format!("weight {p} is not a probability")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { support })
    }

    /// The `(block, probability)` pairs.
    pub fn support(&self) -> &[(Vec<f64>, f64)] {
        &self.support
    }

    fn blocklength(&self) -> usize {
        self.support[0].0.len()
    }

    fn check_amplitude(&self, spec: &QuantizationSpec<f64>) -> Result<()> {
        for (block, _) in &self.support {
            for &x in block {
                if x.abs() > spec.amplitude + 1e-9 {
                    return Err(Error::Domain(format!(
                        "support point {x} exceeds the amplitude bound {}",
                        spec.amplitude
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How a TV gap figure was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvMethod {
    /// Deterministic grid integration; the figure is the gap itself.
    DenseGrid,
    /// Sampling discriminator; the figure is a lower bound on the gap.
    MonteCarloLowerBound,
}

/// Result of a TV gap measurement, checked against the `6 delta` budget.
#[derive(Debug, Clone, PartialEq)]
pub struct TvGapReport {
    /// The measured gap (dense) or lower bound (Monte Carlo).
    pub estimate: f64,
    /// 95% interval for the Monte Carlo variant; `None` when dense.
    pub ci: Option<(f64, f64)>,
    /// The budget `6 delta`.
    pub bound: f64,
    /// Whether the estimate respects the budget.
    pub pass: bool,
    /// Which estimator ran.
    pub method: TvMethod,
}

/// Per-stage dense TV figures at blocklength 1; each stage is budgeted
/// `2 delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageGaps {
    /// Moving the inputs onto the lattice.
    pub input_quantization: f64,
    /// Clipping the outputs into `[-z0, z0]`.
    pub clipping: f64,
    /// Replacing the clipped density by the piecewise-constant one.
    pub lattice_rounding: f64,
}

// Continuous mixture density at a block y (no clipping, true inputs).
fn continuous_density(dist: &InputDistribution, variance: f64, y: &[f64]) -> f64 {
    let mut total = 0.0;
    for (block, w) in dist.support() {
        let mut d = *w;
        for (t, &x) in block.iter().enumerate() {
            d *= gaussian_density(y[t] - x, variance);
        }
        total += d;
    }
    total
}

// Per-letter quantized-output description for one lattice input: interior
// cell masses, widths, and the boundary atom.
struct QuantizedLetter {
    masses: Vec<f64>,
    k_top: i64,
}

impl QuantizedLetter {
    fn build(x: f64, spec: &QuantizationSpec<f64>, variance: f64) -> Self {
        let k_top = output_half_count(spec);
        let mut masses = Vec::with_capacity((2 * k_top + 1) as usize);
        for k in -k_top..=k_top {
            let (lo, hi) = output_cell_bounds(spec, k, k_top);
            masses.push(gaussian_interval_mass(lo, hi, x, variance));
        }
        Self { masses, k_top }
    }

    // Piecewise-constant density at an interior point |y| < z0.
    fn density(&self, y: f64, spec: &QuantizationSpec<f64>) -> f64 {
        let k = ((y / spec.eps_lat).round() as i64).clamp(-self.k_top, self.k_top);
        let (lo, hi) = output_cell_bounds(spec, k, self.k_top);
        self.masses[(k + self.k_top) as usize] / (hi - lo)
    }

    fn interior_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

// Quantized-law density at an interior grid block, mixed over the support.
fn quantized_density(
    letters: &[Vec<QuantizedLetter>],
    weights: &[f64],
    spec: &QuantizationSpec<f64>,
    y: &[f64],
) -> f64 {
    let mut total = 0.0;
    for (s, &w) in weights.iter().enumerate() {
        let mut d = w;
        for (t, &yt) in y.iter().enumerate() {
            d *= letters[s][t].density(yt, spec);
        }
        total += d;
    }
    total
}

// Integrates |f - g| over the open box (-z0, z0)^n with the midpoint rule
// at cell size eps_lat/10, streaming over the product grid.
fn box_l1_distance<F, G>(spec: &QuantizationSpec<f64>, n: usize, f: F, g: G) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    let cell = spec.eps_lat / 10.0;
    let count = (2.0 * spec.z0 / cell).ceil() as usize;
    let step = 2.0 * spec.z0 / count as f64;
    let coord = |j: usize| -spec.z0 + (j as f64 + 0.5) * step;
    let volume = step.powi(n as i32);
    match n {
        1 => (0..count)
            .into_par_iter()
            .map(|j| {
                let y = [coord(j)];
                (f(&y) - g(&y)).abs()
            })
            .sum::<f64>()
            * volume,
        _ => (0..count)
            .into_par_iter()
            .map(|j0| {
                let mut idx = vec![0usize; n];
                idx[0] = j0;
                let mut y = vec![0.0; n];
                y[0] = coord(j0);
                let mut acc = 0.0;
                loop {
                    for t in 1..n {
                        y[t] = coord(idx[t]);
                    }
                    acc += (f(&y) - g(&y)).abs();
                    // Odometer over dimensions 1..n.
                    let mut t = n - 1;
                    loop {
                        idx[t] += 1;
                        if idx[t] < count {
                            break;
                        }
                        idx[t] = 0;
                        if t == 1 {
                            return acc;
                        }
                        t -= 1;
                    }
                }
            })
            .sum::<f64>()
            * volume,
    }
}

fn quantize_support(
    dist: &InputDistribution,
    spec: &QuantizationSpec<f64>,
) -> Result<Vec<Vec<f64>>> {
    dist.support()
        .iter()
        .map(|(block, _)| {
            let budget = block.iter().map(|x| x * x).sum::<f64>() / block.len() as f64;
            let cw = Codeword::new(block.clone(), budget)?;
            Ok(quantize_input(&cw, spec)?.samples().to_vec())
        })
        .collect()
}

/// Dense-grid TV gap between the continuous output law (true inputs, no
/// clipping) and the fully quantized law (lattice inputs, clipped and
/// rounded outputs), under the main channel. Deterministic; supports
/// blocklengths up to [`MAX_DENSE_BLOCKLENGTH`].
pub fn tv_gap_dense(
    dist: &InputDistribution,
    spec: &QuantizationSpec<f64>,
) -> Result<TvGapReport> {
    let n = dist.blocklength();
    if n != spec.n {
        return Err(Error::Config(format!(
            "distribution blocklength {n} does not match the spec blocklength {}",
            spec.n
        )));
    }
    if n > MAX_DENSE_BLOCKLENGTH {
        return Err(Error::Config(format!(
            "dense integration supports blocklengths up to {MAX_DENSE_BLOCKLENGTH}, got {n}"
        )));
    }
    dist.check_amplitude(spec)?;
    let variance = spec.sigma2_main;
    let quantized = quantize_support(dist, spec)?;
    let weights: Vec<f64> = dist.support().iter().map(|(_, w)| *w).collect();
    let letters: Vec<Vec<QuantizedLetter>> = quantized
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|&x| QuantizedLetter::build(x, spec, variance))
                .collect()
        })
        .collect();

    let l1 = box_l1_distance(
        spec,
        n,
        |y| continuous_density(dist, variance, y),
        |y| quantized_density(&letters, &weights, spec, y),
    );
    // Continuous mass escaping the box, exactly.
    let mut outside = 0.0;
    for (block, w) in dist.support() {
        let mut inside = *w;
        for &x in block {
            inside *= 1.0 - gaussian_clip_mass(spec.z0, x, variance);
        }
        outside += w - inside;
    }
    // Quantized mass sitting on at least one boundary atom, exactly.
    let mut on_atom = 0.0;
    for (s, &w) in weights.iter().enumerate() {
        let mut interior = w;
        for letter in &letters[s] {
            interior *= letter.interior_mass();
        }
        on_atom += w - interior;
    }
    let estimate = 0.5 * (l1 + outside + on_atom);
    let bound = 6.0 * spec.delta;
    Ok(TvGapReport {
        estimate,
        ci: None,
        bound,
        pass: estimate <= bound,
        method: TvMethod::DenseGrid,
    })
}

// Wilson 95% interval for a binomial proportion.
fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Monte Carlo discriminator lower bound on the TV gap: samples from both
/// laws, applies the density-comparison test, and reports the advantage
/// with a 95% interval. The figure is a lower bound, not the gap itself.
pub fn tv_gap_monte_carlo(
    dist: &InputDistribution,
    spec: &QuantizationSpec<f64>,
    trials: u64,
    seed: u64,
) -> Result<TvGapReport> {
    let n = dist.blocklength();
    if n != spec.n {
        return Err(Error::Config(format!(
            "distribution blocklength {n} does not match the spec blocklength {}",
            spec.n
        )));
    }
    if trials < 100 {
        return Err(Error::Config(format!("need at least 100 trials, got {trials}")));
    }
    dist.check_amplitude(spec)?;
    let variance = spec.sigma2_main;
    let quantized = quantize_support(dist, spec)?;
    let weights: Vec<f64> = dist.support().iter().map(|(_, w)| *w).collect();
    let letters: Vec<Vec<QuantizedLetter>> = quantized
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|&x| QuantizedLetter::build(x, spec, variance))
                .collect()
        })
        .collect();
    let k_top = output_half_count(spec);

    let pick_support = |rng: &mut rand_chacha::ChaCha8Rng| -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (s, &w) in weights.iter().enumerate() {
            acc += w;
            if u <= acc {
                return s;
            }
        }
        weights.len() - 1
    };

    // Accept set: continuous density strictly above the quantized density;
    // atom-touching blocks are never accepted (the quantized law dominates
    // there outright).
    let in_favor_of_continuous = |y: &[f64], atom_hit: bool| -> bool {
        if atom_hit {
            return false;
        }
        continuous_density(dist, variance, y) > quantized_density(&letters, &weights, spec, y)
    };

    let count_cont: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(seed, t).rng();
            let s = pick_support(&mut rng);
            let y: Vec<f64> = dist.support()[s]
                .0
                .iter()
                .map(|&x| {
                    let g: f64 = rng.sample(StandardNormal);
                    x + variance.sqrt() * g
                })
                .collect();
            u64::from(in_favor_of_continuous(&y, false))
        })
        .sum();
    let count_quant: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(seed ^ 0x51ac_3b97, t).rng();
            let s = pick_support(&mut rng);
            let mut atom_hit = false;
            let y: Vec<f64> = letters[s]
                .iter()
                .map(|letter| {
                    // Sample the row: interior cell or boundary atom.
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    for (idx, &m) in letter.masses.iter().enumerate() {
                        acc += m;
                        if u <= acc {
                            let k = idx as i64 - k_top;
                            let (lo, hi) = output_cell_bounds(spec, k, k_top);
                            return lo + (hi - lo) * rng.gen::<f64>();
                        }
                    }
                    atom_hit = true;
                    spec.z0
                })
                .collect();
            u64::from(in_favor_of_continuous(&y, atom_hit))
        })
        .sum();

    let p_cont = count_cont as f64 / trials as f64;
    let p_quant = count_quant as f64 / trials as f64;
    let estimate = p_cont - p_quant;
    let (lo_c, hi_c) = wilson(count_cont, trials);
    let (lo_q, hi_q) = wilson(count_quant, trials);
    // Newcombe difference interval from the per-arm Wilson bounds.
    let lo = estimate - ((p_cont - lo_c).powi(2) + (hi_q - p_quant).powi(2)).sqrt();
    let hi = estimate + ((hi_c - p_cont).powi(2) + (p_quant - lo_q).powi(2)).sqrt();
    let bound = 6.0 * spec.delta;
    Ok(TvGapReport {
        estimate,
        ci: Some((lo, hi)),
        bound,
        pass: estimate <= bound,
        method: TvMethod::MonteCarloLowerBound,
    })
}

/// Measures the gap between the continuous and quantized output laws:
/// dense grid integration through blocklength [`MAX_DENSE_BLOCKLENGTH`],
/// Monte Carlo discriminator beyond (where `trials` and `seed` apply).
pub fn tv_gap_estimate(
    dist: &InputDistribution,
    spec: &QuantizationSpec<f64>,
    trials: u64,
    seed: u64,
) -> Result<TvGapReport> {
    if dist.blocklength() <= MAX_DENSE_BLOCKLENGTH {
        tv_gap_dense(dist, spec)
    } else {
        tv_gap_monte_carlo(dist, spec, trials, seed)
    }
}

/// Dense per-stage gaps at blocklength 1 (configuration error otherwise);
/// each stage is budgeted `2 delta` and the composed gap obeys the
/// triangle inequality against their sum.
pub fn stage_gaps_dense(
    dist: &InputDistribution,
    spec: &QuantizationSpec<f64>,
) -> Result<StageGaps> {
    if dist.blocklength() != 1 || spec.n != 1 {
        return Err(Error::Config(
            "stage-wise dense gaps are defined at blocklength 1".into(),
        ));
    }
    dist.check_amplitude(spec)?;
    let variance = spec.sigma2_main;
    let quantized = quantize_support(dist, spec)?;
    let weights: Vec<f64> = dist.support().iter().map(|(_, w)| *w).collect();
    let qdist = InputDistribution::new(
        quantized
            .iter()
            .zip(&weights)
            .map(|(b, &w)| (b.clone(), w))
            .collect(),
    )?;

    // Stage 1 lives on the whole line; integrate far enough out that the
    // truncated tails are negligible against the 1e-3 accuracy target.
    let reach = spec.z0 + 8.0 * variance.sqrt() + spec.amplitude;
    let cell = spec.eps_lat / 10.0;
    let count = (2.0 * reach / cell).ceil() as usize;
    let step = 2.0 * reach / count as f64;
    let input_quantization: f64 = 0.5
        * (0..count)
            .into_par_iter()
            .map(|j| {
                let y = [-reach + (j as f64 + 0.5) * step];
                (continuous_density(dist, variance, &y)
                    - continuous_density(&qdist, variance, &y))
                .abs()
            })
            .sum::<f64>()
        * step;

    // Stage 2 is the exact clipped tail mass of the lattice-input law.
    let mut clipping = 0.0;
    for (block, w) in qdist.support() {
        clipping += w * gaussian_clip_mass(spec.z0, block[0], variance);
    }

    // Stage 3 compares the clipped law with the piecewise-constant one;
    // their boundary atoms are identical and cancel.
    let letters: Vec<Vec<QuantizedLetter>> = quantized
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|&x| QuantizedLetter::build(x, spec, variance))
                .collect()
        })
        .collect();
    let lattice_rounding = 0.5
        * box_l1_distance(
            spec,
            1,
            |y| continuous_density(&qdist, variance, y),
            |y| quantized_density(&letters, &weights, spec, y),
        );

    Ok(StageGaps {
        input_quantization,
        clipping,
        lattice_rounding,
    })
}
