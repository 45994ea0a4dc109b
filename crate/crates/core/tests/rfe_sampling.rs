use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use rfe_lab::rfe::{
    decode, draw_shot, expected_spectrum, outcome_probability, run_rfe, run_rfe_trial, shot_estimate,
    FourierSpectrum, RfeConfig, Sampler,
};
use rfe_lab::rng;

fn cfg(theta: f64, lambda: f64, grid: u64, depth: u64, shots: u64, seed: u64) -> RfeConfig {
    RfeConfig::new(theta, TAU / grid as f64, lambda, grid, depth, shots, seed).unwrap()
}

proptest! {
    #[test]
    fn expected_spectrum_is_bounded_and_peaks_next_to_theta(
        theta in 0.0..TAU,
        grid in 4u64..200,
        depth_frac in 0.0..1.0f64,
        lambda in 0.0..0.05f64,
    ) {
        let depth = (2 + ((grid - 2) as f64 * depth_frac) as u64).min(grid);
        let f = expected_spectrum(theta, grid, depth, lambda);
        for v in &f {
            prop_assert!(v.norm() <= 1.0 + 1e-12);
        }
        let peak = (0..f.len()).max_by(|&a, &b| f[a].norm().total_cmp(&f[b].norm())).unwrap();
        let hat = TAU * peak as f64 / grid as f64;
        let d = (hat - theta).rem_euclid(TAU);
        prop_assert!(d.min(TAU - d) <= TAU / grid as f64 + 1e-12);
    }

    #[test]
    fn noiseless_on_grid_bin_is_one(j_frac in 0.0..1.0f64, grid in 2u64..300) {
        let j = ((grid as f64 * j_frac) as u64).min(grid - 1);
        let theta = TAU * j as f64 / grid as f64;
        let f = expected_spectrum(theta, grid, grid, 0.0);
        prop_assert!((f[j as usize] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn decode_of_exact_spectrum_is_within_resolution(theta in 0.0..TAU, grid in 8u64..128) {
        let mut spec = FourierSpectrum::new(grid as usize);
        let exact = expected_spectrum(theta, grid, grid, 0.0);
        // a spectrum with one shot whose sums are the exact expectation
        let depth_sums: Vec<Complex64> = (0..grid)
            .map(|k| Complex64::from_polar(1.0, k as f64 * theta))
            .collect();
        spec.merge(&FourierSpectrum::from_depth_sums(&depth_sums, grid, grid as usize));
        for (a, b) in spec.values().iter().zip(&exact) {
            prop_assert!((a - b).norm() < 1e-9);
        }
        let est = decode(&spec, theta, TAU / grid as f64);
        prop_assert!(est.success);
    }
}

#[test]
fn per_shot_and_bucketed_accumulation_agree() {
    let c = cfg(1.234, 0.02, 50, 37, 5000, 11);
    let mut r = rng::stream(c.seed, 0);
    let shots: Vec<_> = (0..c.shots).map(|_| draw_shot(&c, &mut r)).collect();

    let mut incremental = FourierSpectrum::new(c.grid as usize);
    for s in &shots {
        incremental.push_shot(s);
    }
    let mut depth_sums = vec![Complex64::new(0.0, 0.0); c.max_depth as usize];
    for s in &shots {
        depth_sums[s.k as usize] += Complex64::from_polar(2.0 * f64::from(s.z), -s.phi);
    }
    let bucketed = FourierSpectrum::from_depth_sums(&depth_sums, c.shots, c.grid as usize);
    let direct: Vec<Complex64> = (0..c.grid)
        .map(|j| shots.iter().map(|s| shot_estimate(s, j, c.grid)).sum::<Complex64>() / c.shots as f64)
        .collect();
    for ((a, b), d) in incremental.values().iter().zip(bucketed.values()).zip(direct) {
        assert!((a - b).norm() < 1e-9);
        assert!((b - d).norm() < 1e-9);
    }
}

#[test]
fn merged_halves_equal_whole() {
    let c = cfg(0.7, 0.0, 16, 16, 1000, 5);
    let mut r = rng::stream(c.seed, 0);
    let shots: Vec<_> = (0..c.shots).map(|_| draw_shot(&c, &mut r)).collect();
    let mut whole = FourierSpectrum::new(16);
    let mut left = FourierSpectrum::new(16);
    let mut right = FourierSpectrum::new(16);
    for (i, s) in shots.iter().enumerate() {
        whole.push_shot(s);
        if i % 2 == 0 {
            left.push_shot(s);
        } else {
            right.push_shot(s);
        }
    }
    left.merge(&right);
    assert_eq!(left.shots(), whole.shots());
    for (a, b) in left.values().iter().zip(whole.values()) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn sampled_spectrum_is_unbiased() {
    let c = cfg(2.0, 0.05, 24, 24, 1_000_000, 3);
    let (spec, _) = run_rfe(&c).unwrap();
    let exact = expected_spectrum(c.theta, c.grid, c.max_depth, c.lambda);
    // each per-shot estimate has modulus 2, so each component has std ≤ 2/√M
    let sigma = 2.0 / (c.shots as f64).sqrt();
    for (a, b) in spec.values().iter().zip(&exact) {
        assert!((a.re - b.re).abs() < 5.0 * sigma, "{a} vs {b}");
        assert!((a.im - b.im).abs() < 5.0 * sigma, "{a} vs {b}");
    }
}

#[test]
fn peak_lands_near_theta_in_almost_every_trial() {
    let theta = TAU * 5.3 / 64.0;
    let c = cfg(theta, 0.0, 64, 64, 10_000, 2024);
    let hits = (0..100)
        .filter(|&t| {
            let (spec, _) = run_rfe_trial(&c, t, Sampler::PerShot).unwrap();
            (4..=6).contains(&spec.peak_index())
        })
        .count();
    assert!(hits >= 99, "{hits}/100");
}

#[test]
fn outcomes_become_fair_coins_under_heavy_decay() {
    for k in 1..10 {
        for phi in [0.0, 1.0, PI] {
            assert!((outcome_probability(k, phi, 0.4, 1e3) - 0.5).abs() < f64::EPSILON);
        }
    }
    let c = cfg(0.4, 1e3, 8, 8, 200_000, 9);
    let mut r = rng::stream(c.seed, 0);
    let (mut plus, mut total) = (0u64, 0u64);
    for _ in 0..c.shots {
        let s = draw_shot(&c, &mut r);
        if s.k > 0 {
            total += 1;
            plus += u64::from(s.z == 1);
        }
    }
    let p = plus as f64 / total as f64;
    assert!((p - 0.5).abs() < 5.0 * 0.5 / (total as f64).sqrt(), "{p}");
}

#[test]
fn two_depth_spectrum_at_half_turn() {
    // K = 2, θ = π: f_j = (1 + e^{i(π − 2πj/J)})/2
    let grid = 10;
    let f = expected_spectrum(PI, grid, 2, 0.0);
    for (j, v) in f.iter().enumerate() {
        let want = (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, PI - TAU * j as f64 / grid as f64)) / 2.0;
        assert!((v - want).norm() < 1e-14);
    }
    assert!((f[5].norm() - 1.0).abs() < 1e-14);
    assert!(f[0].norm() < 1e-14);
}

#[test]
fn aggregated_sampler_matches_per_shot_failure_rate() {
    // heavy decay keeps failures common at thousands of shots per depth;
    // threshold 0 forces the Gaussian path
    let c = RfeConfig::new(0.0, 0.2, 1.0, 32, 8, 16_000, 77).unwrap();
    let trials = 2000u64;
    let rate = |sampler: Sampler, offset: u64| {
        let fails = (0..trials)
            .filter(|&t| {
                let mut r = rng::stream(c.seed, offset + t);
                let theta = TAU * rand::Rng::random::<f64>(&mut r);
                let cfg = c.with_theta(theta);
                let (_, est) = rfe_lab::rfe::run_with_rng(&cfg, sampler, &mut r).unwrap();
                !est.success
            })
            .count();
        fails as f64 / trials as f64
    };
    let exact = rate(Sampler::PerShot, 0);
    let gauss = rate(Sampler::Aggregated { exact_limit: 0 }, 1 << 20);
    let pooled = 0.5 * (exact + gauss);
    let se = (2.0 * pooled * (1.0 - pooled) / trials as f64).sqrt();
    assert!(exact > 0.05, "configuration should fail sometimes: {exact}");
    assert!((exact - gauss).abs() < 4.0 * se, "per-shot {exact} vs aggregated {gauss}");
}
