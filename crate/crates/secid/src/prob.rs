//! Discrete probability primitives: mass functions, entropies, mutual
//! information, total variation distance, and the Gaussian log-density.
//!
//! All entropic quantities take an explicit [`LogBase`] so bits and nats
//! never mix silently. The `0 log 0 = 0` convention applies throughout.

use crate::num::Real;
use crate::{Error, Result};

/// Logarithm base for entropic quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    /// Base 2: entropies in bits.
    Bits,
    /// Base e: entropies in nats.
    Nats,
}

impl LogBase {
    /// Converts a quantity measured in nats into this base.
    pub fn from_nats<R: Real>(self, nats: R) -> R {
        match self {
            LogBase::Nats => nats,
            LogBase::Bits => nats / R::ln_2(),
        }
    }

    /// Logarithm of `x` in this base.
    pub fn log<R: Real>(self, x: R) -> R {
        self.from_nats(x.ln())
    }
}

fn validate_masses<R: Real>(probs: &[R]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Domain("probability vector is empty".into()));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < R::zero() {
            return Err(Error::Domain(format!(
                "probability mass at index {i} is {p}, expected a finite nonnegative value"
            )));
        }
    }
    let sum: R = probs.iter().copied().sum();
    if (sum - R::one()).abs() > R::pmf_tolerance(probs.len()) {
        return Err(Error::Domain(format!(
            "probability masses sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

// -p ln p with the 0 log 0 = 0 convention.
fn neg_p_ln_p<R: Real>(p: R) -> R {
    if p > R::zero() {
        -p * p.ln()
    } else {
        R::zero()
    }
}

/// Probability mass function on a finite alphabet `{0, .., len-1}`.
///
/// Construction validates that every mass is finite and nonnegative and that
/// the total is 1 within a tolerance of 1e-12 (scaled up for scalars coarser
/// than `f64`).
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<R: Real = f64> {
    probs: Vec<R>,
}

impl<R: Real> Pmf<R> {
    /// Builds a validated mass function from raw masses.
    pub fn new(probs: Vec<R>) -> Result<Self> {
        validate_masses(&probs)?;
        Ok(Self { probs })
    }

    /// Uniform distribution on `len` outcomes.
    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Domain("uniform pmf needs a nonempty alphabet".into()));
        }
        let p = R::one() / R::from_usize(len).unwrap();
        Ok(Self {
            probs: vec![p; len],
        })
    }

    /// Distribution putting all mass on `index`.
    pub fn point_mass(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::Domain(format!(
                "point mass index {index} outside alphabet of size {len}"
            )));
        }
        let mut probs = vec![R::zero(); len];
        probs[index] = R::one();
        Ok(Self { probs })
    }

    /// The underlying masses.
    pub fn probs(&self) -> &[R] {
        &self.probs
    }

    /// Alphabet size.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// True when the alphabet is empty; never holds for a validated pmf.
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Mass at `index`.
    pub fn get(&self, index: usize) -> R {
        self.probs[index]
    }

    /// Shannon entropy in the given base.
    pub fn entropy(&self, base: LogBase) -> R {
        let nats: R = self.probs.iter().copied().map(neg_p_ln_p).sum();
        base.from_nats(nats)
    }
}

/// Joint mass function on a product alphabet, stored row-major: `prob(x, y)`
/// lives at `x * ny + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<R: Real = f64> {
    nx: usize,
    ny: usize,
    probs: Vec<R>,
}

impl<R: Real> JointPmf<R> {
    /// Builds a validated joint mass function over `nx * ny` outcomes.
    pub fn new(nx: usize, ny: usize, probs: Vec<R>) -> Result<Self> {
        if probs.len() != nx * ny {
            return Err(Error::Shape(format!(
                "joint pmf over {nx}x{ny} alphabet needs {} masses, got {}",
                nx * ny,
                probs.len()
            )));
        }
        validate_masses(&probs)?;
        Ok(Self { nx, ny, probs })
    }

    /// Doubly symmetric binary source: uniform marginals with crossover
    /// probability `mu`, i.e. joint masses `[(1-mu)/2, mu/2; mu/2, (1-mu)/2]`.
    pub fn binary_symmetric(mu: R) -> Result<Self> {
        if !(mu >= R::zero() && mu <= R::one()) {
            return Err(Error::Domain(format!(
                "crossover probability is {mu}, expected a value in [0, 1]"
            )));
        }
        let half = R::of(0.5);
        let agree = (R::one() - mu) * half;
        let cross = mu * half;
        Self::new(2, 2, vec![agree, cross, cross, agree])
    }

    /// First-coordinate alphabet size.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Second-coordinate alphabet size.
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Joint mass at `(x, y)`.
    pub fn prob(&self, x: usize, y: usize) -> R {
        self.probs[x * self.ny + y]
    }

    /// Marginal distribution of the first coordinate.
    pub fn x_marginal(&self) -> Pmf<R> {
        let probs = (0..self.nx)
            .map(|x| (0..self.ny).map(|y| self.prob(x, y)).sum())
            .collect();
        // Row sums of a validated joint pmf; revalidation cannot fail.
        Pmf::new(probs).expect("marginal of a valid joint pmf")
    }

    /// Marginal distribution of the second coordinate.
    pub fn y_marginal(&self) -> Pmf<R> {
        let probs = (0..self.ny)
            .map(|y| (0..self.nx).map(|x| self.prob(x, y)).sum())
            .collect();
        Pmf::new(probs).expect("marginal of a valid joint pmf")
    }

    /// Joint entropy `H(X, Y)` in the given base.
    pub fn joint_entropy(&self, base: LogBase) -> R {
        let nats: R = self.probs.iter().copied().map(neg_p_ln_p).sum();
        base.from_nats(nats)
    }
}

/// Binary entropy `H2(p)` in the given base.
///
/// Errors unless `0 <= p <= 1`.
pub fn binary_entropy<R: Real>(p: R, base: LogBase) -> Result<R> {
    if !(p >= R::zero() && p <= R::one()) {
        return Err(Error::Domain(format!(
            "binary entropy argument is {p}, expected a value in [0, 1]"
        )));
    }
    Ok(base.from_nats(neg_p_ln_p(p) + neg_p_ln_p(R::one() - p)))
}

/// Mutual information `I(X; Y)` of a joint distribution, in the given base.
pub fn mutual_information<R: Real>(joint: &JointPmf<R>, base: LogBase) -> R {
    let px = joint.x_marginal();
    let py = joint.y_marginal();
    let mut nats = R::zero();
    for x in 0..joint.nx() {
        for y in 0..joint.ny() {
            let pxy = joint.prob(x, y);
            if pxy > R::zero() {
                nats += pxy * (pxy / (px.get(x) * py.get(y))).ln();
            }
        }
    }
    base.from_nats(nats)
}

/// Conditional entropy `H(X | Y) = H(X, Y) - H(Y)`, in the given base.
pub fn conditional_entropy<R: Real>(joint: &JointPmf<R>, base: LogBase) -> R {
    joint.joint_entropy(base) - joint.y_marginal().entropy(base)
}

/// Total variation distance between two distributions on the same alphabet:
/// half the L1 distance between their mass vectors.
pub fn total_variation<R: Real>(p: &Pmf<R>, q: &Pmf<R>) -> Result<R> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!(
            "total variation needs matching alphabets, got sizes {} and {}",
            p.len(),
            q.len()
        )));
    }
    let l1: R = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(&a, &b)| (a - b).abs())
        .sum();
    Ok(l1 * R::of(0.5))
}

/// Natural logarithm of the scalar Gaussian density with the given mean and
/// variance, evaluated at `y`.
///
/// Errors unless the variance is strictly positive.
pub fn gaussian_log_density<R: Real>(y: R, mean: R, variance: R) -> Result<R> {
    if !(variance > R::zero()) {
        return Err(Error::Domain(format!(
            "gaussian variance is {variance}, expected a positive value"
        )));
    }
    let two = R::of(2.0);
    let two_pi = R::of(2.0 * std::f64::consts::PI);
    let diff = y - mean;
    Ok(-(two_pi * variance).ln() / two - diff * diff / (two * variance))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn binary_entropy_known_values() {
        let h = binary_entropy(0.1f64, LogBase::Bits).unwrap();
        assert!((h - 0.468995593589281).abs() < TOL, "H2(0.1) = {h}");
        assert_eq!(binary_entropy(0.0f64, LogBase::Bits).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64, LogBase::Bits).unwrap(), 0.0);
        let half = binary_entropy(0.5f64, LogBase::Bits).unwrap();
        assert!((half - 1.0).abs() < TOL, "H2(1/2) = 1 bit");
        let nats = binary_entropy(0.5f64, LogBase::Nats).unwrap();
        assert!((nats - std::f64::consts::LN_2).abs() < TOL, "H2(1/2) = ln 2 nats");
    }

    #[test]
    fn binary_entropy_rejects_out_of_range() {
        assert!(binary_entropy(-0.01f64, LogBase::Bits).is_err());
        assert!(binary_entropy(1.01f64, LogBase::Bits).is_err());
        assert!(binary_entropy(f64::NAN, LogBase::Bits).is_err());
    }

    #[test]
    fn doubly_symmetric_source_mutual_information() {
        let joint = JointPmf::binary_symmetric(0.1f64).unwrap();
        let mi = mutual_information(&joint, LogBase::Bits);
        assert!((mi - 0.531004406410719).abs() < TOL, "I = {mi}");
        // Uniform marginals, so I = 1 - H2(mu) in bits.
        let h = binary_entropy(0.1f64, LogBase::Bits).unwrap();
        assert!((mi - (1.0 - h)).abs() < TOL);
    }

    #[test]
    fn marginals_of_binary_symmetric_are_uniform() {
        let joint = JointPmf::binary_symmetric(0.3f64).unwrap();
        for m in [joint.x_marginal(), joint.y_marginal()] {
            assert_eq!(m.len(), 2);
            assert!((m.get(0) - 0.5).abs() < TOL);
            assert!((m.get(1) - 0.5).abs() < TOL);
        }
    }

    #[test]
    fn independent_joint_has_zero_information() {
        let joint = JointPmf::new(2, 3, vec![0.1f64, 0.2, 0.2, 0.1, 0.2, 0.2]).unwrap();
        // Rows are proportional, so the coordinates are independent.
        let mi = mutual_information(&joint, LogBase::Bits);
        assert!(mi.abs() < TOL, "I = {mi}");
    }

    #[test]
    fn conditional_entropy_decomposition() {
        let joint = JointPmf::binary_symmetric(0.1f64).unwrap();
        let h_cond = conditional_entropy(&joint, LogBase::Bits);
        // H(X|Y) = H2(mu) for the doubly symmetric source.
        assert!((h_cond - 0.468995593589281).abs() < TOL, "H(X|Y) = {h_cond}");
        // Chain rule: I = H(X) - H(X|Y).
        let mi = mutual_information(&joint, LogBase::Bits);
        let hx = joint.x_marginal().entropy(LogBase::Bits);
        assert!((mi - (hx - h_cond)).abs() < TOL);
    }

    #[test]
    fn conditional_entropy_of_deterministic_copy_is_zero() {
        let joint = JointPmf::new(2, 2, vec![0.5f64, 0.0, 0.0, 0.5]).unwrap();
        assert!(conditional_entropy(&joint, LogBase::Bits).abs() < TOL);
    }

    #[test]
    fn total_variation_examples() {
        let p = Pmf::new(vec![0.5f64, 0.5]).unwrap();
        let q = Pmf::new(vec![1.0f64, 0.0]).unwrap();
        assert!((total_variation(&p, &q).unwrap() - 0.5).abs() < TOL);

        let a = Pmf::new(vec![1.0f64, 0.0]).unwrap();
        let b = Pmf::new(vec![0.0f64, 1.0]).unwrap();
        assert!((total_variation(&a, &b).unwrap() - 1.0).abs() < TOL, "disjoint supports");

        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn total_variation_rejects_mismatched_alphabets() {
        let p = Pmf::new(vec![0.5, 0.5]).unwrap();
        let q = Pmf::uniform(3).unwrap();
        assert!(matches!(total_variation(&p, &q), Err(Error::Shape(_))));
    }

    #[test]
    fn gaussian_log_density_standard_normal() {
        let at_mean = gaussian_log_density(0.0f64, 0.0, 1.0).unwrap();
        let expected = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((at_mean - expected).abs() < TOL);

        let off = gaussian_log_density(1.0f64, 0.0, 1.0).unwrap();
        assert!((off - (expected - 0.5)).abs() < TOL);

        // Shift invariance: density depends on y - mean only.
        let shifted = gaussian_log_density(4.0f64, 3.0, 1.0).unwrap();
        assert!((shifted - off).abs() < TOL);
    }

    #[test]
    fn gaussian_log_density_rejects_bad_variance() {
        assert!(gaussian_log_density(0.0f64, 0.0, 0.0).is_err());
        assert!(gaussian_log_density(0.0f64, 0.0, -1.0).is_err());
        assert!(gaussian_log_density(0.0f64, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn pmf_validation_catches_bad_inputs() {
        assert!(Pmf::<f64>::new(vec![]).is_err());
        assert!(Pmf::new(vec![0.5, 0.6]).is_err(), "sums above tolerance");
        assert!(Pmf::new(vec![1.5, -0.5]).is_err(), "negative mass");
        assert!(Pmf::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Pmf::new(vec![0.5, 0.5 + 1e-13]).is_ok(), "within tolerance");
    }

    #[test]
    fn joint_pmf_shape_is_checked() {
        assert!(matches!(
            JointPmf::new(2, 2, vec![0.5, 0.5]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn point_mass_and_uniform() {
        let pm = Pmf::<f64>::point_mass(4, 2).unwrap();
        assert_eq!(pm.get(2), 1.0);
        assert_eq!(pm.entropy(LogBase::Bits), 0.0, "0 log 0 = 0");
        let u = Pmf::<f64>::uniform(8).unwrap();
        assert!((u.entropy(LogBase::Bits) - 3.0).abs() < TOL);
        assert!(Pmf::<f64>::point_mass(4, 4).is_err());
        assert!(Pmf::<f64>::uniform(0).is_err());
    }

    #[test]
    fn f32_smoke_test() {
        let joint = JointPmf::<f32>::binary_symmetric(0.1).unwrap();
        let mi: f32 = mutual_information(&joint, LogBase::Bits);
        assert!((mi - 0.531).abs() < 1e-3, "I = {mi}");
        let h = binary_entropy(0.1f32, LogBase::Bits).unwrap();
        assert!((h - 0.469).abs() < 1e-3);
    }
}
