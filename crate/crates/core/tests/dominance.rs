//! `R` and `S` against an independent evaluation of `|f|²` in the regime the
//! depth rule actually produces: `λ ≤ 1/(2K)` for `K > 2`, any `λ` for `K = 2`.

use std::f64::consts::PI;

use rfe_lab::bounds::{r_bound, s_bound};

fn cosh_minus_cos(a: f64, b: f64) -> f64 {
    2.0 * (0.5 * a).sinh().powi(2) + 2.0 * (0.5 * b).sin().powi(2)
}

fn power(y: f64, k: u64, lambda: f64) -> f64 {
    let kf = k as f64;
    (-(kf - 1.0) * lambda).exp() / (kf * kf) * cosh_minus_cos(kf * lambda, kf * y) / cosh_minus_cos(lambda, y)
}

fn check(k: u64, lambdas: &[f64]) {
    for j in 2 * k..=10 * k {
        let jf = j as f64;
        for &lambda in lambdas {
            let s = s_bound(k, j, lambda);
            let r = r_bound(k, j, lambda);
            let far = (0..=1000)
                .map(|i| power(2.0 * PI / jf + (PI - 2.0 * PI / jf) * i as f64 / 1000.0, k, lambda))
                .fold(0.0, f64::max);
            let near = (1..=64).map(|i| power(PI / jf * i as f64 / 64.0, k, lambda)).fold(f64::INFINITY, f64::min);
            assert!(far <= s * (1.0 + 1e-12), "S: K={k} J={j} λ={lambda}: {far} > {s}");
            assert!(r <= near * (1.0 + 1e-12), "R: K={k} J={j} λ={lambda}: {r} > {near}");
        }
    }
}

#[test]
fn bounds_dominate_below_half_inverse_depth() {
    for k in [3u64, 10, 20, 50] {
        let top = 1.0 / (2.0 * k as f64);
        let lambdas: Vec<f64> = (1..=15).map(|i| top * i as f64 / 15.0).collect();
        check(k, &lambdas);
    }
}

#[test]
fn two_depth_bounds_dominate_for_any_decay() {
    let lambdas: Vec<f64> = (0..=20).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect();
    check(2, &lambdas);
}
