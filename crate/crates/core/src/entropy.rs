//! Estimators of the phase-space functional `H = integral of f log f`.
//!
//! Two estimators are provided: a histogram with Scott-rule bin widths
//! (cheap, biased low-dimensional workhorse; empty cells are excluded,
//! which biases dilute tails) and a k-nearest-neighbor estimator for
//! higher-dimensional variables. Both are deterministic functions of the
//! sample set and their parameters.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyEstimator {
    /// Regular grid; `bins_per_dim = None` selects Scott's rule.
    Histogram {
        bins_per_dim: Option<usize>,
    },
    Knn {
        k: usize,
    },
}

impl EntropyEstimator {
    /// Histogram up to three dimensions, neighbor-based above.
    pub fn default_for_dim(dim: usize) -> Self {
        if dim <= 3 {
            EntropyEstimator::Histogram { bins_per_dim: None }
        } else {
            EntropyEstimator::Knn { k: 4 }
        }
    }
}

/// Estimate `integral f log f` (the negative differential entropy) from
/// samples, together with the standard error of the sample-mean estimate.
pub fn h_estimate(samples: &[Vec<f64>], estimator: EntropyEstimator) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 1000 {
        return Err(Error::DegenerateEnsemble(format!(
            "entropy estimation needs at least 1000 samples, got {n}"
        )));
    }
    let dim = samples[0].len();
    if dim == 0 || samples.iter().any(|s| s.len() != dim) {
        return Err(Error::Config("inconsistent sample dimensions".into()));
    }
    let log_density: Vec<f64> = match estimator {
        EntropyEstimator::Histogram { bins_per_dim } => {
            histogram_log_density(samples, dim, bins_per_dim)?
        }
        EntropyEstimator::Knn { k } => knn_log_density(samples, dim, k)?,
    };
    let mean = log_density.iter().sum::<f64>() / n as f64;
    let var = log_density
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (n as f64 - 1.0);
    Ok((mean, (var / n as f64).sqrt()))
}

fn histogram_log_density(
    samples: &[Vec<f64>],
    dim: usize,
    bins_per_dim: Option<usize>,
) -> Result<Vec<f64>> {
    let n = samples.len() as f64;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let mut mean = vec![0.0; dim];
    for s in samples {
        for d in 0..dim {
            lo[d] = lo[d].min(s[d]);
            hi[d] = hi[d].max(s[d]);
            mean[d] += s[d];
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut sd = vec![0.0; dim];
    for s in samples {
        for d in 0..dim {
            sd[d] += (s[d] - mean[d]) * (s[d] - mean[d]);
        }
    }
    let mut bins = vec![0usize; dim];
    let mut width = vec![0.0; dim];
    for d in 0..dim {
        sd[d] = (sd[d] / n).sqrt();
        let range = hi[d] - lo[d];
        if range <= 0.0 || sd[d] == 0.0 {
            return Err(Error::DegenerateEnsemble(format!(
                "degenerate sample spread along dimension {d}"
            )));
        }
        let count = match bins_per_dim {
            Some(b) => b.max(1),
            None => {
                // Scott's rule for the bin width of a d-dimensional grid.
                let h = 3.49 * sd[d] * n.powf(-1.0 / (dim as f64 + 2.0));
                ((range / h).ceil() as usize).clamp(2, 256)
            }
        };
        bins[d] = count;
        // Pad the upper edge so the maximum lands inside the last cell.
        width[d] = range / count as f64 * (1.0 + 1e-12);
    }
    let mut counts: std::collections::HashMap<Vec<usize>, usize> = std::collections::HashMap::new();
    let cell_of = |s: &Vec<f64>| -> Vec<usize> {
        (0..dim)
            .map(|d| (((s[d] - lo[d]) / width[d]) as usize).min(bins[d] - 1))
            .collect()
    };
    for s in samples {
        *counts.entry(cell_of(s)).or_insert(0) += 1;
    }
    let cell_volume: f64 = width.iter().product();
    Ok(samples
        .iter()
        .map(|s| {
            let c = counts[&cell_of(s)] as f64;
            (c / (n * cell_volume)).ln()
        })
        .collect())
}

fn knn_log_density(samples: &[Vec<f64>], dim: usize, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let n = samples.len();
    if k >= n {
        return Err(Error::Config(format!("k = {k} too large for {n} samples")));
    }
    // log f(x_i) ~ digamma(k) - digamma(n) - log(c_d) - d log(r_ik), the
    // Kozachenko-Leonenko density surrogate whose sample mean estimates
    // integral f log f.
    let unit_ball = unit_ball_log_volume(dim);
    let base = digamma(k as f64) - digamma(n as f64) - unit_ball;
    let mut out = Vec::with_capacity(n);
    let mut dists = vec![0.0f64; k];
    for (i, a) in samples.iter().enumerate() {
        // Running top-k of the smallest distances.
        let mut filled = 0usize;
        for (j, b) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            let d = d2.sqrt();
            if filled < k {
                dists[filled] = d;
                filled += 1;
                if filled == k {
                    dists.sort_by(f64::total_cmp);
                }
            } else if d < dists[k - 1] {
                dists[k - 1] = d;
                let mut idx = k - 1;
                while idx > 0 && dists[idx] < dists[idx - 1] {
                    dists.swap(idx, idx - 1);
                    idx -= 1;
                }
            }
        }
        let r = dists[k - 1].max(f64::MIN_POSITIVE);
        out.push(base - dim as f64 * r.ln());
    }
    Ok(out)
}

fn unit_ball_log_volume(dim: usize) -> f64 {
    let d = dim as f64;
    0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d + 1.0)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + x.ln()
        - 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// Closed-form value `-log(2 pi e)/2` of a standard Gaussian.
    const GAUSSIAN_1D_H: f64 = -1.418_938_533_204_672_7;

    fn gaussian_samples(n: usize, dim: usize, sd: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|_| (0..dim).map(|_| sd * rng.normal()).collect())
            .collect()
    }

    #[test]
    fn rejects_small_ensembles() {
        let samples = gaussian_samples(100, 1, 1.0, 1);
        assert!(h_estimate(&samples, EntropyEstimator::Knn { k: 4 }).is_err());
    }

    #[test]
    fn gaussian_1d_both_estimators() {
        let samples = gaussian_samples(8000, 1, 1.0, 42);
        for est in [
            EntropyEstimator::Histogram { bins_per_dim: None },
            EntropyEstimator::Knn { k: 4 },
        ] {
            let (h, _sigma) = h_estimate(&samples, est).unwrap();
            assert!(
                (h - GAUSSIAN_1D_H).abs() < 0.05,
                "{est:?}: H = {h}, want {GAUSSIAN_1D_H}"
            );
        }
    }

    #[test]
    fn scaling_shifts_h_by_log_factor() {
        let base = gaussian_samples(6000, 2, 1.0, 7);
        let c = 2.5;
        let scaled: Vec<Vec<f64>> = base
            .iter()
            .map(|s| s.iter().map(|v| c * v).collect())
            .collect();
        for est in [
            EntropyEstimator::Histogram { bins_per_dim: None },
            EntropyEstimator::Knn { k: 4 },
        ] {
            let (h0, _) = h_estimate(&base, est).unwrap();
            let (h1, _) = h_estimate(&scaled, est).unwrap();
            let shift = h0 - h1;
            let expected = 2.0 * c.ln();
            assert!(
                (shift - expected).abs() < 0.08,
                "{est:?}: shift {shift} vs {expected}"
            );
        }
    }

    #[test]
    fn uniform_box_matches_log_volume() {
        let mut rng = Rng::new(3);
        let (a, b) = (2.0, 0.5);
        let samples: Vec<Vec<f64>> = (0..8000)
            .map(|_| vec![rng.range(0.0, a), rng.range(0.0, b)])
            .collect();
        let expected = -(a * b).ln();
        let (h, _) =
            h_estimate(&samples, EntropyEstimator::Histogram { bins_per_dim: None }).unwrap();
        assert!((h - expected).abs() < 0.05, "H {h} vs {expected}");
    }

    #[test]
    fn default_estimator_switches_on_dimension() {
        assert!(matches!(
            EntropyEstimator::default_for_dim(3),
            EntropyEstimator::Histogram { .. }
        ));
        assert!(matches!(
            EntropyEstimator::default_for_dim(4),
            EntropyEstimator::Knn { k: 4 }
        ));
    }

    #[test]
    fn digamma_recurrence_and_known_value() {
        // digamma(1) = -euler_mascheroni.
        assert!((digamma(1.0) + 0.577_215_664_901_532_9).abs() < 1e-10);
        for x in [0.5, 1.7, 3.2, 9.0] {
            let lhs = digamma(x + 1.0);
            let rhs = digamma(x) + 1.0 / x;
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        assert!((ln_gamma(2.0)).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-10);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-10);
    }
}
