use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use super::{draw_outcome, draw_shot, RfeConfig};

/// Strategy for producing the per-depth sums `G_k = Σ 2z·e^{−iφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Draws every shot individually.
    PerShot,
    /// Draws the multinomial depth histogram exactly, then each depth's sum
    /// either shot by shot (count ≤ `exact_limit`) or from the bivariate
    /// normal with the same mean and covariance as the sum.
    Aggregated { exact_limit: u64 },
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::Aggregated { exact_limit: 4096 }
    }
}

impl Sampler {
    pub fn depth_sums<R: Rng + ?Sized>(&self, config: &RfeConfig, rng: &mut R) -> Vec<Complex64> {
        let depth = config.max_depth as usize;
        let mut sums = vec![Complex64::new(0.0, 0.0); depth];
        match *self {
            Sampler::PerShot => {
                for _ in 0..config.shots {
                    let shot = draw_shot(config, rng);
                    sums[shot.k as usize] +=
                        Complex64::from_polar(2.0 * f64::from(shot.z), -shot.phi);
                }
            }
            Sampler::Aggregated { exact_limit } => {
                let counts = multinomial_uniform(config.shots, depth, rng);
                for (k, (&n, sum)) in counts.iter().zip(sums.iter_mut()).enumerate() {
                    if n == 0 {
                        continue;
                    }
                    *sum = if n <= exact_limit {
                        exact_depth_sum(k as u64, n, config, rng)
                    } else {
                        gaussian_depth_sum(k as u64, n, config, rng)
                    };
                }
            }
        }
        sums
    }
}

/// Counts of `n` uniform draws over `bins` categories, via sequential
/// conditional binomials.
fn multinomial_uniform<R: Rng + ?Sized>(n: u64, bins: usize, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let mut left = n;
    for (i, c) in counts.iter_mut().enumerate() {
        let remaining_bins = (bins - i) as f64;
        if left == 0 {
            break;
        }
        if i + 1 == bins {
            *c = left;
            break;
        }
        let draw = Binomial::new(left, 1.0 / remaining_bins)
            .expect("binomial parameters are in range")
            .sample(rng);
        *c = draw;
        left -= draw;
    }
    counts
}

fn exact_depth_sum<R: Rng + ?Sized>(k: u64, n: u64, config: &RfeConfig, rng: &mut R) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let phi = TAU * rng.random::<f64>();
        let z = draw_outcome(k, phi, config.theta, config.lambda, rng);
        sum += Complex64::from_polar(2.0 * f64::from(z), -phi);
    }
    sum
}

/// A single shot at depth `k` has mean `e^{−λk}·e^{ikθ}` and, since
/// `|2z·e^{−iφ}| = 2` with `φ` uniform, second moments `E[re²] = E[im²] = 2`
/// and `E[re·im] = 0`.
fn gaussian_depth_sum<R: Rng + ?Sized>(
    k: u64,
    n: u64,
    config: &RfeConfig,
    rng: &mut R,
) -> Complex64 {
    let kf = k as f64;
    let mean = Complex64::from_polar((-config.lambda * kf).exp(), kf * config.theta);
    let nf = n as f64;
    let c11 = 2.0 - mean.re * mean.re;
    let c12 = -mean.re * mean.im;
    let c22 = 2.0 - mean.im * mean.im;
    let l11 = c11.sqrt();
    let l21 = c12 / l11;
    let l22 = (c22 - l21 * l21).max(0.0).sqrt();
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    let scale = nf.sqrt();
    Complex64::new(
        nf * mean.re + scale * l11 * g1,
        nf * mean.im + scale * (l21 * g1 + l22 * g2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn multinomial_conserves_total() {
        let mut r = rng::stream(3, 0);
        for n in [0u64, 1, 7, 1000, 5_000_000_000] {
            for bins in [1usize, 2, 13] {
                let c = multinomial_uniform(n, bins, &mut r);
                assert_eq!(c.iter().sum::<u64>(), n);
                assert_eq!(c.len(), bins);
            }
        }
    }

    #[test]
    fn gaussian_moments_match_exact() {
        let cfg = RfeConfig::new(1.1, TAU / 32.0, 0.05, 32, 8, 1, 0).unwrap();
        let mut r = rng::stream(11, 0);
        let trials = 20_000;
        let n = 50u64;
        let k = 3u64;
        let mut acc = [0.0f64; 5];
        let mut acc_exact = [0.0f64; 5];
        for _ in 0..trials {
            let g = gaussian_depth_sum(k, n, &cfg, &mut r);
            let e = exact_depth_sum(k, n, &cfg, &mut r);
            for (a, v) in [(&mut acc, g), (&mut acc_exact, e)] {
                a[0] += v.re;
                a[1] += v.im;
                a[2] += v.re * v.re;
                a[3] += v.im * v.im;
                a[4] += v.re * v.im;
            }
        }
        let t = trials as f64;
        let mean = |a: &[f64; 5]| (a[0] / t, a[1] / t);
        let (gr, gi) = mean(&acc);
        let (er, ei) = mean(&acc_exact);
        // standard error of the mean of the sum is about √(2n/t) = 0.07
        assert!((gr - er).abs() < 0.35 && (gi - ei).abs() < 0.35);
        let var = |a: &[f64; 5], i: usize, m: f64| a[i] / t - m * m;
        assert!((var(&acc, 2, gr) / var(&acc_exact, 2, er) - 1.0).abs() < 0.06);
        assert!((var(&acc, 3, gi) / var(&acc_exact, 3, ei) - 1.0).abs() < 0.06);
    }
}
