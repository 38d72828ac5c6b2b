//! Statistical oracles for the channel sampling models: moment checks
//! against the declared noise laws, independence across wiretap branches,
//! and covariance of the MIMO pipeline noise.

use nalgebra::{Complex, DMatrix};
use secid::capacity::WiretapParams;
use secid::channel::{awgn_transmit, gwc_transmit, Codeword, RngStream};
use secid::mimo::{
    mimo_post_process, mimo_pre_process, mimo_transmit, svd_decompose, C64, CMatrix, CVector,
    MimoParams,
};

#[test]
fn awgn_noise_moments_match_declared_law() {
    let n = 1000;
    let trials = 1000; // one million samples in total
    let sigma2 = 1.7;
    let x = Codeword::new(vec![0.0; n], 1.0).unwrap();
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut sum3 = 0.0;
    let mut sum4 = 0.0;
    for t in 0..trials {
        let y = awgn_transmit(&x, sigma2, &mut RngStream::new(42, t).rng()).unwrap();
        for v in y {
            sum += v;
            sum2 += v * v;
            sum3 += v * v * v;
            sum4 += v * v * v * v;
        }
    }
    let count = (n * trials as usize) as f64;
    let mean = sum / count;
    let var = sum2 / count - mean * mean;
    let sd = var.sqrt();
    // Mean within 3 sigma of zero.
    assert!(
        mean.abs() < 3.0 * sigma2.sqrt() / count.sqrt(),
        "sample mean {mean}"
    );
    // Variance within 1%.
    assert!((var - sigma2).abs() < 0.01 * sigma2, "sample variance {var}");
    // Skewness and excess kurtosis within 4-sigma sampling bands.
    let m3 = sum3 / count - 3.0 * mean * var - mean.powi(3);
    let skew = m3 / sd.powi(3);
    assert!(skew.abs() < 4.0 * (6.0 / count).sqrt(), "skewness {skew}");
    let m4 = sum4 / count - 4.0 * mean * m3 - 6.0 * mean * mean * var - mean.powi(4);
    let ex_kurt = m4 / (var * var) - 3.0;
    assert!(ex_kurt.abs() < 4.0 * (24.0 / count).sqrt(), "excess kurtosis {ex_kurt}");
}

#[test]
fn wiretap_branches_are_independent_with_declared_variances() {
    let n = 100;
    let trials = 10_000; // one million paired samples
    let params = WiretapParams::new(1.0, 4.0, 1.0).unwrap();
    let x = Codeword::new(vec![0.5; n], 1.0).unwrap();
    let mut sum_y = 0.0;
    let mut sum_z = 0.0;
    let mut sum_yy = 0.0;
    let mut sum_zz = 0.0;
    let mut sum_yz = 0.0;
    for t in 0..trials {
        let (y, z) = gwc_transmit(&x, &params, &mut RngStream::new(7, t).rng());
        for i in 0..n {
            let ny = y[i] - x.samples()[i];
            let nz = z[i] - x.samples()[i];
            sum_y += ny;
            sum_z += nz;
            sum_yy += ny * ny;
            sum_zz += nz * nz;
            sum_yz += ny * nz;
        }
    }
    let count = (n * trials as usize) as f64;
    let mean_y = sum_y / count;
    let mean_z = sum_z / count;
    let var_y = sum_yy / count - mean_y * mean_y;
    let var_z = sum_zz / count - mean_z * mean_z;
    let cov = sum_yz / count - mean_y * mean_z;
    assert!((var_y - 1.0).abs() < 0.01, "main branch variance {var_y}");
    assert!((var_z - 4.0).abs() < 0.04, "eavesdropper branch variance {var_z}");
    // Covariance of independent branches: 0 within 4 sigma, sd = sqrt(v1 v2 / count).
    let band = 4.0 * (var_y * var_z / count).sqrt();
    assert!(cov.abs() < band, "cross covariance {cov} (band {band})");
}

#[test]
fn random_tall_matrix_reconstructs_to_tolerance() {
    let entries: Vec<C64> = vec![
        Complex::new(0.31, -0.44),
        Complex::new(1.02, 0.15),
        Complex::new(-0.73, 0.62),
        Complex::new(0.05, -1.31),
        Complex::new(0.88, 0.09),
        Complex::new(-0.27, 0.41),
    ];
    let h = DMatrix::from_row_slice(3, 2, &entries);
    let params = MimoParams::new(h.clone(), 1.0, 1.0).unwrap();
    let dec = svd_decompose(&params).unwrap();
    let n = dec.n_min();
    let mut recon = CMatrix::zeros(3, 2);
    for k in 0..n {
        recon += (dec.u().column(k) * dec.v().column(k).adjoint())
            * Complex::new(dec.singular_values()[k], 0.0);
    }
    assert!((recon - &h).norm() <= 1e-9 * h.norm());
    let iu = dec.u().adjoint() * dec.u();
    let iv = dec.v().adjoint() * dec.v();
    assert!((iu - CMatrix::identity(3, 3)).norm() <= 1e-10);
    assert!((iv - CMatrix::identity(2, 2)).norm() <= 1e-10);
}

#[test]
fn unitary_pre_processing_preserves_norm_on_random_vectors() {
    let entries: Vec<C64> = vec![
        Complex::new(0.9, 0.2),
        Complex::new(-0.1, 0.7),
        Complex::new(0.4, -0.6),
        Complex::new(1.2, 0.3),
        Complex::new(-0.5, 0.8),
        Complex::new(0.2, -0.9),
    ];
    let h = DMatrix::from_row_slice(3, 2, &entries);
    let dec = svd_decompose(&MimoParams::new(h, 1.0, 1.0).unwrap()).unwrap();
    let mut rng = RngStream::new(99, 0).rng();
    use rand::Rng;
    for _ in 0..200 {
        let x = CVector::from_fn(2, |_, _| {
            C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        });
        let tx = mimo_pre_process(&x, &dec).unwrap();
        assert!(((tx.norm_squared() - x.norm_squared()).abs()) < 1e-12);
    }
}

#[test]
fn pipeline_noise_covariance_is_isotropic() {
    let entries: Vec<C64> = vec![
        Complex::new(0.6, 0.2),
        Complex::new(-0.3, 1.1),
        Complex::new(1.4, -0.5),
        Complex::new(0.2, 0.9),
        Complex::new(-0.8, 0.1),
        Complex::new(0.5, 0.4),
    ];
    let h = DMatrix::from_row_slice(3, 2, &entries);
    let sigma2 = 0.8;
    let params = MimoParams::new(h, sigma2, 4.0).unwrap();
    let dec = svd_decompose(&params).unwrap();
    let x_tilde = CVector::from_vec(vec![C64::new(1.0, 0.5), C64::new(-0.4, 0.9)]);
    let tx = mimo_pre_process(&x_tilde, &dec).unwrap();

    let trials = 50_000;
    let lam = dec.singular_values();
    let mut cov = CMatrix::zeros(3, 3);
    let mut mean = CVector::zeros(3);
    for t in 0..trials {
        let rx = mimo_transmit(
            std::slice::from_ref(&tx),
            &params,
            &mut RngStream::new(1234, t).rng(),
        )
        .unwrap();
        let out = mimo_post_process(&rx[0], &dec).unwrap();
        // Subtract the deterministic parallel-channel signal part.
        let mut noise = out;
        noise[0] -= C64::new(lam[0], 0.0) * x_tilde[0];
        noise[1] -= C64::new(lam[1], 0.0) * x_tilde[1];
        mean += &noise;
        cov += &noise * noise.adjoint();
    }
    let tf = trials as f64;
    mean /= C64::new(tf, 0.0);
    cov /= C64::new(tf, 0.0);
    // Post-processing is unitary, so the rotated noise keeps covariance
    // sigma^2 I. Diagonal: |xi|^2 is exponential with sd sigma^2, so the
    // sample mean has sd sigma^2/sqrt(T). Off-diagonal parts have sd
    // sigma^2/sqrt(2T).
    let diag_band = 3.0 * sigma2 / tf.sqrt();
    let off_band = 3.0 * sigma2 / (2.0 * tf).sqrt();
    for i in 0..3 {
        for j in 0..3 {
            let e = cov[(i, j)];
            if i == j {
                assert!(
                    (e.re - sigma2).abs() < diag_band && e.im.abs() < 1e-9,
                    "diagonal entry ({i},{i}) = {e}"
                );
            } else {
                assert!(
                    e.re.abs() < off_band && e.im.abs() < off_band,
                    "off-diagonal entry ({i},{j}) = {e}"
                );
            }
        }
    }
    let mean_band = 3.0 * (sigma2 / 2.0 / tf).sqrt();
    for i in 0..3 {
        assert!(mean[i].re.abs() < mean_band && mean[i].im.abs() < mean_band);
    }
}

#[test]
fn identical_streams_are_identical_across_schedulers() {
    // The reproducibility contract: a stream's output depends only on the
    // (seed, index) pair, not on which order streams are consumed in.
    let x = Codeword::new(vec![0.0; 16], 1.0).unwrap();
    let forward: Vec<Vec<f64>> = (0..8)
        .map(|i| awgn_transmit(&x, 1.0, &mut RngStream::new(5, i).rng()).unwrap())
        .collect();
    let mut backward: Vec<Vec<f64>> = (0..8).rev()
        .map(|i| awgn_transmit(&x, 1.0, &mut RngStream::new(5, i).rng()).unwrap())
        .collect();
    backward.reverse();
    assert_eq!(forward, backward);
}
