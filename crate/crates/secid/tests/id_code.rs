//! End-to-end behavior of the concatenated identification construction:
//! noiseless error oracles, decoding under noise, eavesdropper-side mixing
//! as the bin size grows, and coupled-noise monotonicity in the SNR.

use rand::Rng;
use rand_distr::StandardNormal;
use secid::channel::RngStream;
use secid::id_code::{
    build_coloring_family, build_inner_code_capped, build_wiretap_color_code, id_encode,
    id_verify, ColoringVariant, IdentificationCode, WiretapColorCode,
};

fn test_code(seed: u64) -> IdentificationCode {
    let inner = build_inner_code_capped(64, 0.9, 1.0, 4.0, seed, 256).unwrap();
    let outer = build_wiretap_color_code(8, 16, 1.0, 4.0, 4.0, 4, seed ^ 0xa5).unwrap();
    let colorings =
        build_coloring_family(8, 256, 16, seed ^ 0x5a, ColoringVariant::Pseudorandom).unwrap();
    IdentificationCode::new(inner, outer, colorings).unwrap()
}

#[test]
fn noiseless_errors_match_collision_oracle() {
    let code = test_code(1);
    let trials = 4000u64;

    // Claimed identity always accepted without noise.
    let mut false_rejects = 0u64;
    for t in 0..trials {
        let cw = id_encode(&code, 3, &mut RngStream::new(100, t).rng()).unwrap();
        if !id_verify(&code, 3, cw.samples()).unwrap() {
            false_rejects += 1;
        }
    }
    assert_eq!(false_rejects, 0);

    // A different identity is accepted exactly on coloring collisions, so
    // the false-accept fraction converges to the exhaustive collision
    // fraction of the pair.
    let (a, b) = (2usize, 6usize);
    let exact = code.colorings().collision_fraction(a, b);
    let mut false_accepts = 0u64;
    for t in 0..trials {
        let cw = id_encode(&code, a, &mut RngStream::new(200, t).rng()).unwrap();
        if id_verify(&code, b, cw.samples()).unwrap() {
            false_accepts += 1;
        }
    }
    let measured = false_accepts as f64 / trials as f64;
    let band = 4.0 * (exact * (1.0 - exact) / trials as f64).sqrt() + 1e-9;
    assert!(
        (measured - exact).abs() <= band,
        "measured {measured}, exhaustive {exact}, band {band}"
    );
}

#[test]
fn inner_decoding_survives_main_channel_noise() {
    // Rate well below capacity: no decoding errors across 500 noisy trials.
    let inner = build_inner_code_capped(64, 0.9, 1.0, 4.0, 7, 256).unwrap();
    let mut errors = 0;
    for t in 0..500u64 {
        let mut rng = RngStream::new(900, t).rng();
        let j = rng.gen_range(0..inner.size());
        let noisy: Vec<f64> = inner
            .word(j)
            .iter()
            .map(|&x| {
                let g: f64 = rng.sample(StandardNormal);
                x + g
            })
            .collect();
        if inner.decode(&noisy).unwrap() != j {
            errors += 1;
        }
    }
    assert_eq!(errors, 0, "decoding failed {errors} times");
}

// Exact log-likelihood of an outer block under the bin mixture of `color`.
fn log_mixture_likelihood(outer: &WiretapColorCode, color: u32, block: &[f64], var: f64) -> f64 {
    let b = outer.bin_size();
    let mut terms = Vec::with_capacity(b as usize);
    for member in 0..b {
        let word = outer.word(color, member);
        let d2: f64 = block
            .iter()
            .zip(word)
            .map(|(&z, &w)| (z - w) * (z - w))
            .sum();
        terms.push(-d2 / (2.0 * var));
    }
    let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln() - (f64::from(b)).ln()
}

// Empirical advantage of the likelihood-ratio test between the bin
// mixtures of colors 0 and 1, as seen through eavesdropper noise.
fn color_pair_advantage(outer: &WiretapColorCode, eve_var: f64, trials: u64, seed: u64) -> f64 {
    let q = outer.q();
    let sigma = eve_var.sqrt();
    let mut accept = [0u64; 2];
    for (which, count) in accept.iter_mut().enumerate() {
        for t in 0..trials {
            let mut rng = RngStream::new(seed ^ (which as u64) << 32, t).rng();
            let clean = outer.encode_color(which as u32, &mut rng).to_vec();
            let z: Vec<f64> = clean
                .iter()
                .map(|&x| {
                    let g: f64 = rng.sample(StandardNormal);
                    x + sigma * g
                })
                .collect();
            let l0 = log_mixture_likelihood(outer, 0, &z, eve_var);
            let l1 = log_mixture_likelihood(outer, 1, &z, eve_var);
            if l0 >= l1 {
                *count += 1;
            }
        }
        assert_eq!(q, outer.q());
    }
    accept[0] as f64 / trials as f64 - accept[1] as f64 / trials as f64
}

#[test]
fn eavesdropper_color_advantage_decreases_with_bin_size() {
    // Same shape and power, growing bins: the two color mixtures become
    // harder to tell apart through the eavesdropper channel.
    let trials = 3000;
    let advantage: Vec<f64> = [1u32, 8, 64]
        .iter()
        .map(|&bins| {
            let outer = build_wiretap_color_code(6, 4, 1.0, 4.0, 4.0, bins, 303).unwrap();
            color_pair_advantage(&outer, 4.0, trials, 555)
        })
        .collect();
    assert!(
        advantage[0] > advantage[1] - 0.02 && advantage[1] > advantage[2] - 0.02,
        "advantages {advantage:?} not decreasing"
    );
    assert!(
        advantage[0] > advantage[2] + 0.2,
        "binning gained too little: {advantage:?}"
    );
}

#[test]
fn rejection_rate_monotone_in_noise_with_shared_draws() {
    // Same per-trial randomness, three noise levels scaling the same
    // standard-normal draws: more noise can only hurt the verifier.
    let code = test_code(2);
    let trials = 2000u64;
    let mut rejects = [0u64; 3];
    let sigmas = [0.5f64, 1.0, 2.0];
    for t in 0..trials {
        let mut per_sigma_reject = [false; 3];
        for (s, &sigma) in sigmas.iter().enumerate() {
            let mut rng = RngStream::new(4040, t).rng();
            let cw = id_encode(&code, 5, &mut rng).unwrap();
            let noisy: Vec<f64> = cw
                .samples()
                .iter()
                .map(|&x| {
                    let g: f64 = rng.sample(StandardNormal);
                    x + sigma * g
                })
                .collect();
            per_sigma_reject[s] = !id_verify(&code, 5, &noisy).unwrap();
        }
        for (s, &r) in per_sigma_reject.iter().enumerate() {
            if r {
                rejects[s] += 1;
            }
        }
    }
    let rates: Vec<f64> = rejects.iter().map(|&r| r as f64 / trials as f64).collect();
    assert!(
        rates[0] <= rates[1] + 0.01 && rates[1] <= rates[2] + 0.01,
        "rejection rates {rates:?} not monotone in noise"
    );
    assert!(rates[2] > rates[0], "noise had no visible effect: {rates:?}");
}

#[test]
fn polynomial_family_every_pair_collides_exactly_once_per_color() {
    let fam = build_coloring_family(16, 256, 16, 0, ColoringVariant::Polynomial).unwrap();
    for i in 0..16 {
        for j in (i + 1)..16 {
            let frac = fam.collision_fraction(i, j);
            assert!(
                (frac - 1.0 / 16.0).abs() < 1e-15,
                "pair ({i},{j}) collides at {frac}"
            );
        }
    }
}
