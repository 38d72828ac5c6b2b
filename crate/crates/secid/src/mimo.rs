//! Complex MIMO channel with SVD pre/post-processing.
//!
//! A full-rank gain matrix `H = U diag(lambda) V^H` turns the vector channel
//! into `min(N_T, N_R)` parallel scalar channels: the transmitter multiplies
//! by `V` (pre-processing), the receiver by `U^H` (post-processing), and the
//! noise law is unchanged because both factors are unitary.

use crate::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Complex scalar of the MIMO signal path.
pub type C64 = Complex<f64>;
/// Complex matrix with runtime dimensions.
pub type CMatrix = DMatrix<C64>;
/// Complex column vector with runtime dimensions.
pub type CVector = DVector<C64>;

/// Tolerance of the full-rank check: the smallest singular value must
/// exceed this fraction of the largest.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// MIMO channel description: gains, noise power, transmit power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoParams {
    h: CMatrix,
    noise_variance: f64,
    power: f64,
}

impl MimoParams {
    /// Validates dimensions, full rank, and the scalar parameters.
    ///
    /// A zero noise variance is allowed (exact noiseless transmission).
    pub fn new(h: CMatrix, noise_variance: f64, power: f64) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::Domain("gain matrix must be at least 1x1".into()));
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::Domain(format!(
                "noise variance is {noise_variance}, expected a nonnegative finite value"
            )));
        }
        if !(power.is_finite() && power >= 0.0) {
            return Err(Error::Domain(format!(
                "power budget is {power}, expected a nonnegative finite value"
            )));
        }
        let svals = h.clone().singular_values();
        let largest = svals.max();
        let smallest = svals.min();
        if !(largest > 0.0) || smallest <= RANK_TOLERANCE * largest {
            return Err(Error::Domain(format!(
                "gain matrix is rank deficient: singular values span [{smallest}, {largest}]"
            )));
        }
        Ok(Self {
            h,
            noise_variance,
            power,
        })
    }

    /// The gain matrix.
    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    /// Noise power per receive antenna.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Total transmit power budget (expectation per symbol).
    pub fn power(&self) -> f64 {
        self.power
    }

    /// Number of transmit antennas.
    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    /// Number of receive antennas.
    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    /// Number of parallel subchannels, `min(N_T, N_R)`.
    pub fn n_min(&self) -> usize {
        self.n_t().min(self.n_r())
    }
}

/// Singular value decomposition with square unitary factors.
///
/// Guarantees: `||U L V^H - H||_F <= 1e-9 ||H||_F`, both factors unitary to
/// 1e-10 in Frobenius norm, singular values strictly positive and
/// descending. The sign/phase ambiguity is fixed by making the
/// largest-magnitude entry of each column of `V` real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdDecomposition {
    u: CMatrix,
    singular_values: Vec<f64>,
    v: CMatrix,
}

impl SvdDecomposition {
    /// Left factor, `N_R x N_R` unitary.
    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    /// Singular values, descending, length `min(N_T, N_R)`.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Right factor, `N_T x N_T` unitary.
    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// Number of parallel subchannels.
    pub fn n_min(&self) -> usize {
        self.singular_values.len()
    }
}

// Extends d x k orthonormal columns to a d x d unitary matrix by projecting
// standard basis vectors onto the orthogonal complement.
fn complete_unitary(cols: &CMatrix) -> CMatrix {
    let d = cols.nrows();
    let mut basis: Vec<CVector> = cols.column_iter().map(|c| c.into_owned()).collect();
    for j in 0..d {
        if basis.len() == d {
            break;
        }
        let mut cand: CVector = CVector::zeros(d);
        cand[j] = C64::new(1.0, 0.0);
        // Two Gram-Schmidt passes keep orthogonality at machine precision.
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&cand);
                cand -= b * coef;
            }
        }
        let norm = cand.norm();
        if norm > 1e-6 {
            basis.push(cand / C64::new(norm, 0.0));
        }
    }
    assert_eq!(basis.len(), d, "orthonormal completion found a full basis");
    CMatrix::from_columns(&basis)
}

// Phase of the largest-magnitude entry of a column; ties broken by the
// lowest index.
fn anchor_phase(col: &CVector) -> C64 {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, e) in col.iter().enumerate() {
        let m = e.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    let e = col[best];
    e / C64::new(e.norm(), 0.0)
}

/// Decomposes the gain matrix as `H = U diag(lambda) V^H` with full square
/// unitary factors; see [`SvdDecomposition`] for the guarantees.
pub fn svd_decompose(params: &MimoParams) -> Result<SvdDecomposition> {
    let h = params.h();
    let n = params.n_min();
    let svd = nalgebra::SVD::new(h.clone(), true, true);
    let u_thin = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");

    // Order subchannels by descending gain.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_cols: Vec<CVector> = order.iter().map(|&i| u_thin.column(i).into_owned()).collect();
    let v_cols: Vec<CVector> = order
        .iter()
        .map(|&i| v_t.row(i).adjoint().column(0).into_owned())
        .collect();
    let mut u = complete_unitary(&CMatrix::from_columns(&u_cols));
    let mut v = complete_unitary(&CMatrix::from_columns(&v_cols));

    // Fix the phase ambiguity: anchor entry of each V column made real
    // positive; paired U columns absorb the same rotation so the product
    // U diag V^H is unchanged.
    for k in 0..v.ncols() {
        let phase = anchor_phase(&v.column(k).into_owned()).conj();
        let mut col = v.column_mut(k);
        col *= phase;
        if k < n {
            let mut ucol = u.column_mut(k);
            ucol *= phase;
        }
    }
    // Leftover U columns never enter the product; fix them the same way so
    // the output is deterministic.
    for k in n..u.ncols() {
        let phase = anchor_phase(&u.column(k).into_owned()).conj();
        let mut col = u.column_mut(k);
        col *= phase;
    }

    let dec = SvdDecomposition {
        u,
        singular_values,
        v,
    };
    verify_decomposition(&dec, h)?;
    Ok(dec)
}

fn verify_decomposition(dec: &SvdDecomposition, h: &CMatrix) -> Result<()> {
    let n = dec.n_min();
    let (nr, nt) = (h.nrows(), h.ncols());
    let mut recon = CMatrix::zeros(nr, nt);
    for k in 0..n {
        let uk = dec.u.column(k);
        let vk = dec.v.column(k);
        let s = C64::new(dec.singular_values[k], 0.0);
        recon += (uk * vk.adjoint()) * s;
    }
    let h_norm = h.norm();
    if (recon - h).norm() > 1e-9 * h_norm {
        return Err(Error::Invariant("decomposition does not reconstruct the gain matrix".into()));
    }
    let iu = dec.u.adjoint() * &dec.u;
    let iv = dec.v.adjoint() * &dec.v;
    let eye_r = CMatrix::identity(nr, nr);
    let eye_t = CMatrix::identity(nt, nt);
    if (iu - eye_r).norm() > 1e-10 || (iv - eye_t).norm() > 1e-10 {
        return Err(Error::Invariant("decomposition factors are not unitary".into()));
    }
    for w in dec.singular_values.windows(2) {
        if w[0] < w[1] {
            return Err(Error::Invariant("singular values are not descending".into()));
        }
    }
    Ok(())
}

/// Transmit-side processing: pads the parallel-channel input to `N_T`
/// entries and rotates it by `V`. Unitary, so the norm is preserved.
pub fn mimo_pre_process(x_tilde: &CVector, dec: &SvdDecomposition) -> Result<CVector> {
    if x_tilde.len() != dec.n_min() {
        return Err(Error::Shape(format!(
            "parallel-channel input has {} entries, expected {}",
            x_tilde.len(),
            dec.n_min()
        )));
    }
    let nt = dec.v.nrows();
    let mut padded = CVector::zeros(nt);
    for i in 0..x_tilde.len() {
        padded[i] = x_tilde[i];
    }
    Ok(&dec.v * padded)
}

/// Receive-side processing: rotates the channel output by `U^H`. The first
/// `min(N_T, N_R)` entries then read `lambda_l x_l + noise` with noise of
/// the original law.
pub fn mimo_post_process(y: &CVector, dec: &SvdDecomposition) -> Result<CVector> {
    if y.len() != dec.u.nrows() {
        return Err(Error::Shape(format!(
            "received vector has {} entries, expected {}",
            y.len(),
            dec.u.nrows()
        )));
    }
    Ok(dec.u.adjoint() * y)
}

/// Sends a sequence of transmit vectors through `y = H x + xi` with
/// circularly symmetric complex Gaussian noise of covariance
/// `noise_variance * I`.
///
/// The power budget is enforced in expectation per symbol: the mean of
/// `||x_i||^2` over the sequence must not exceed the budget.
pub fn mimo_transmit(
    xs: &[CVector],
    params: &MimoParams,
    rng: &mut impl Rng,
) -> Result<Vec<CVector>> {
    if xs.is_empty() {
        return Err(Error::Domain("transmit sequence is empty".into()));
    }
    for (i, x) in xs.iter().enumerate() {
        if x.len() != params.n_t() {
            return Err(Error::Shape(format!(
                "transmit vector {i} has {} entries, expected {}",
                x.len(),
                params.n_t()
            )));
        }
    }
    let mean_energy: f64 = xs.iter().map(|x| x.norm_squared()).sum::<f64>() / xs.len() as f64;
    if mean_energy > params.power() + 1e-9 {
        return Err(Error::Invariant(format!(
            "mean symbol energy {mean_energy} exceeds the power budget {}",
            params.power()
        )));
    }
    // Each complex component splits the noise power evenly between the real
    // and imaginary parts.
    let comp_sigma = (params.noise_variance() / 2.0).sqrt();
    let nr = params.n_r();
    Ok(xs
        .iter()
        .map(|x| {
            let mut y = params.h() * x;
            for i in 0..nr {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                y[i] += C64::new(comp_sigma * re, comp_sigma * im);
            }
            y
        })
        .collect())
}
