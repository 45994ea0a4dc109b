use std::f64::consts::TAU;

use num_complex::Complex64;

use super::ShotRecord;

/// Running sum of single-shot Fourier estimates over a `J`-point grid.
///
/// Values are stored as sums so that partial spectra from independent
/// workers can be merged by addition; [`FourierSpectrum::values`] divides
/// by the shot count.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    sums: Vec<Complex64>,
    shots: u64,
}

impl FourierSpectrum {
    pub fn new(grid: usize) -> Self {
        Self {
            sums: vec![Complex64::new(0.0, 0.0); grid],
            shots: 0,
        }
    }

    /// Builds the spectrum from per-depth sums `G_k = Σ_{shots at k} 2z·e^{−iφ}`:
    /// `sum_j = Σ_k G_k·e^{−i2πkj/J}`.
    pub fn from_depth_sums(depth_sums: &[Complex64], shots: u64, grid: usize) -> Self {
        let roots = roots_of_unity(grid);
        let mut sums = vec![Complex64::new(0.0, 0.0); grid];
        for (k, g) in depth_sums.iter().enumerate() {
            if *g == Complex64::new(0.0, 0.0) {
                continue;
            }
            let k = k % grid;
            let mut idx = 0usize;
            for s in sums.iter_mut() {
                *s += g * roots[idx];
                idx += k;
                if idx >= grid {
                    idx -= grid;
                }
            }
        }
        Self { sums, shots }
    }

    /// Adds one shot to every bin, stepping the twiddle `e^{−i2πk/J}` across
    /// the grid instead of evaluating a phase per bin.
    pub fn push_shot(&mut self, shot: &ShotRecord) {
        let grid = self.sums.len();
        let mut cur = Complex64::from_polar(2.0 * f64::from(shot.z), -shot.phi);
        let step = Complex64::from_polar(1.0, -TAU * (shot.k as usize % grid) as f64 / grid as f64);
        for s in self.sums.iter_mut() {
            *s += cur;
            cur *= step;
        }
        self.shots += 1;
    }

    pub fn merge(&mut self, other: &FourierSpectrum) {
        assert_eq!(self.sums.len(), other.sums.len(), "grid sizes differ");
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.shots += other.shots;
    }

    pub fn grid(&self) -> usize {
        self.sums.len()
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Mean single-shot estimate per bin.
    pub fn values(&self) -> Vec<Complex64> {
        let inv = if self.shots == 0 { 0.0 } else { 1.0 / self.shots as f64 };
        self.sums.iter().map(|s| s * inv).collect()
    }

    /// Index of the largest `|value|`; the lowest index wins ties.
    pub fn peak_index(&self) -> usize {
        argmax_norm(&self.sums)
    }
}

/// `e^{−i2πm/J}` for `m = 0..J`.
pub(crate) fn roots_of_unity(grid: usize) -> Vec<Complex64> {
    (0..grid)
        .map(|m| Complex64::from_polar(1.0, -TAU * m as f64 / grid as f64))
        .collect()
}

pub(crate) fn argmax_norm(values: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_norm = f64::NEG_INFINITY;
    for (i, v) in values.iter().enumerate() {
        let n = v.norm_sqr();
        if n > best_norm {
            best = i;
            best_norm = n;
        }
    }
    best
}
