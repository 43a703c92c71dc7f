//! Mean-field alignment dynamics of planar rod ensembles.
//!
//! Each particle carries an angle and an angular velocity; the mean field
//! pulls angles toward a preferred direction, either fixed or recomputed
//! every step from the ensemble's embedded mean. Angles are integrated on
//! the real line (the linear dynamics never wraps them), which keeps the
//! reported statistics meaningful both for converging and for diverging
//! parameter regimes.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// Restoring force `-alpha (theta - theta_hat) - beta omega`.
    Quadratic,
    /// Torque `-sin(theta - theta_hat)` of an external-field potential.
    Cosine,
    /// Tabulated force over `theta - theta_hat`, linearly interpolated,
    /// clamped at the table ends.
    CustomTable(Vec<(f64, f64)>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaHatMode {
    Fixed(f64),
    /// Direction of the ensemble's embedded mean, recomputed every step.
    EnsembleMean,
}

#[derive(Clone, Debug)]
pub struct MeanFieldSpec {
    pub potential: PotentialKind,
    pub alpha: f64,
    pub beta: f64,
    pub theta_hat_mode: ThetaHatMode,
    /// Multiplier on the angle transport speed; 1 advects angles with
    /// omega, 2 reproduces the doubled transport coefficient that appears
    /// when the circle gradient is pushed through its embedding.
    pub transport_factor: f64,
}

impl MeanFieldSpec {
    pub fn new(
        potential: PotentialKind,
        alpha: f64,
        beta: f64,
        mode: ThetaHatMode,
    ) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Config("alpha and beta must be finite".into()));
        }
        if let PotentialKind::CustomTable(table) = &potential {
            if table.len() < 2 {
                return Err(Error::Config(
                    "force table needs at least two points".into(),
                ));
            }
            if table.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Config("force table abscissae must increase".into()));
            }
        }
        Ok(MeanFieldSpec {
            potential,
            alpha,
            beta,
            theta_hat_mode: mode,
            transport_factor: 1.0,
        })
    }

    pub fn with_transport_factor(mut self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Config(format!(
                "transport factor must be finite and > 0, got {factor}"
            )));
        }
        self.transport_factor = factor;
        Ok(self)
    }
}

/// One alignment particle: angle and angular velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub theta: f64,
    pub omega: f64,
}

/// Per-checkpoint summary of the ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleStats {
    pub t: f64,
    pub mean_theta: f64,
    pub std_theta: f64,
    pub mean_omega: f64,
    pub std_omega: f64,
}

/// Direction of the embedded ensemble mean.
pub fn mean_direction(ensemble: &[PhasePoint]) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::DegenerateEnsemble("empty ensemble".into()));
    }
    let (mut x, mut y) = (0.0, 0.0);
    for p in ensemble {
        x += p.theta.cos();
        y += p.theta.sin();
    }
    let n = ensemble.len() as f64;
    x /= n;
    y /= n;
    if (x * x + y * y).sqrt() < 1e-12 {
        return Err(Error::DegenerateEnsemble(
            "embedded mean vanishes; preferred direction undefined".into(),
        ));
    }
    Ok(y.atan2(x))
}

pub fn theta_hat(spec: &MeanFieldSpec, ensemble: &[PhasePoint]) -> Result<f64> {
    match spec.theta_hat_mode {
        ThetaHatMode::Fixed(value) => Ok(value),
        ThetaHatMode::EnsembleMean => mean_direction(ensemble),
    }
}

/// Mean-field force on the angular momentum at `(theta, omega)`.
pub fn vlasov_force(
    spec: &MeanFieldSpec,
    ensemble: &[PhasePoint],
    theta: f64,
    omega: f64,
) -> Result<f64> {
    let hat = theta_hat(spec, ensemble)?;
    Ok(force_at(spec, theta - hat, omega))
}

fn force_at(spec: &MeanFieldSpec, delta: f64, omega: f64) -> f64 {
    match &spec.potential {
        PotentialKind::Quadratic => -spec.alpha * delta - spec.beta * omega,
        PotentialKind::Cosine => -delta.sin(),
        PotentialKind::CustomTable(table) => {
            let first = table[0];
            let last = table[table.len() - 1];
            if delta <= first.0 {
                return first.1;
            }
            if delta >= last.0 {
                return last.1;
            }
            let idx = table
                .partition_point(|(x, _)| *x <= delta)
                .min(table.len() - 1);
            let (x0, y0) = table[idx - 1];
            let (x1, y1) = table[idx];
            y0 + (y1 - y0) * (delta - x0) / (x1 - x0)
        }
    }
}

/// Evolve the ensemble with the semi-implicit kick-drift scheme: the
/// angular velocity is kicked first, the angle then drifts with the new
/// velocity. Emits statistics at the start and every `checkpoint_every`
/// steps (and always at the final step).
pub fn integrate_ensemble(
    ensemble: &mut [PhasePoint],
    spec: &MeanFieldSpec,
    dt: f64,
    steps: usize,
    checkpoint_every: usize,
) -> Result<Vec<EnsembleStats>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!(
            "dt must be finite and > 0, got {dt}"
        )));
    }
    if ensemble.is_empty() {
        return Err(Error::DegenerateEnsemble("empty ensemble".into()));
    }
    let stride = checkpoint_every.max(1);
    let mut out = Vec::with_capacity(steps / stride + 2);
    out.push(stats(ensemble, 0.0));
    for step in 1..=steps {
        let hat = theta_hat(spec, ensemble)?;
        for p in ensemble.iter_mut() {
            let force = force_at(spec, p.theta - hat, p.omega);
            p.omega += dt * force;
            p.theta += dt * spec.transport_factor * p.omega;
        }
        if step % stride == 0 || step == steps {
            out.push(stats(ensemble, step as f64 * dt));
        }
    }
    Ok(out)
}

fn stats(ensemble: &[PhasePoint], t: f64) -> EnsembleStats {
    let n = ensemble.len() as f64;
    let mut mt = 0.0;
    let mut mo = 0.0;
    for p in ensemble {
        mt += p.theta;
        mo += p.omega;
    }
    mt /= n;
    mo /= n;
    let mut vt = 0.0;
    let mut vo = 0.0;
    for p in ensemble {
        vt += (p.theta - mt) * (p.theta - mt);
        vo += (p.omega - mo) * (p.omega - mo);
    }
    EnsembleStats {
        t,
        mean_theta: mt,
        std_theta: (vt / n).sqrt(),
        mean_omega: mo,
        std_omega: (vo / n).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointClass {
    Center,
    Saddle,
    StableSpiral,
    StableNode,
    UnstableSpiral,
    UnstableNode,
    Degenerate,
}

impl fmt::Display for FixedPointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FixedPointClass::Center => "center",
            FixedPointClass::Saddle => "saddle",
            FixedPointClass::StableSpiral => "stable_spiral",
            FixedPointClass::StableNode => "stable_node",
            FixedPointClass::UnstableSpiral => "unstable_spiral",
            FixedPointClass::UnstableNode => "unstable_node",
            FixedPointClass::Degenerate => "degenerate",
        };
        f.write_str(name)
    }
}

/// Eigenvalues `(-beta +- sqrt(beta^2 - 4 alpha)) / 2` of the linearized
/// alignment dynamics, as (re, im) pairs.
pub fn eigenvalues(alpha: f64, beta: f64) -> [(f64, f64); 2] {
    let disc = beta * beta - 4.0 * alpha;
    if disc >= 0.0 {
        let root = disc.sqrt();
        [((-beta + root) / 2.0, 0.0), ((-beta - root) / 2.0, 0.0)]
    } else {
        let imag = (-disc).sqrt() / 2.0;
        [(-beta / 2.0, imag), (-beta / 2.0, -imag)]
    }
}

/// Classification of the aligned fixed point from the eigenvalue pair.
pub fn classify_fixed_point(alpha: f64, beta: f64) -> FixedPointClass {
    if alpha < 0.0 {
        return FixedPointClass::Saddle;
    }
    if alpha == 0.0 {
        return FixedPointClass::Degenerate;
    }
    if beta == 0.0 {
        return FixedPointClass::Center;
    }
    let oscillatory = alpha > beta * beta / 4.0;
    match (beta > 0.0, oscillatory) {
        (true, true) => FixedPointClass::StableSpiral,
        (true, false) => FixedPointClass::StableNode,
        (false, true) => FixedPointClass::UnstableSpiral,
        (false, false) => FixedPointClass::UnstableNode,
    }
}

/// Slowest decay rate `-max Re(lambda)` of a stable configuration; zero for
/// a center, an error for unstable or degenerate parameters.
pub fn linear_decay_rate(alpha: f64, beta: f64) -> Result<f64> {
    match classify_fixed_point(alpha, beta) {
        FixedPointClass::Center => Ok(0.0),
        FixedPointClass::StableSpiral | FixedPointClass::StableNode => {
            let max_re = eigenvalues(alpha, beta)
                .iter()
                .map(|(re, _)| *re)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(-max_re)
        }
        other => Err(Error::NotApplicable(format!(
            "decay rate undefined for a {other} fixed point"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use std::f64::consts::PI;

    fn quadratic(alpha: f64, beta: f64, hat: f64) -> MeanFieldSpec {
        MeanFieldSpec::new(
            PotentialKind::Quadratic,
            alpha,
            beta,
            ThetaHatMode::Fixed(hat),
        )
        .unwrap()
    }

    #[test]
    fn force_vanishes_at_fixed_point() {
        let spec = quadratic(1.0, 1.0, 0.4);
        let f = vlasov_force(&spec, &[], 0.4, 0.0).unwrap();
        assert_eq!(f, 0.0);
        let cosine =
            MeanFieldSpec::new(PotentialKind::Cosine, 0.0, 0.0, ThetaHatMode::Fixed(0.4)).unwrap();
        assert_eq!(vlasov_force(&cosine, &[], 0.4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn cosine_force_quarter_turn() {
        let spec =
            MeanFieldSpec::new(PotentialKind::Cosine, 0.0, 0.0, ThetaHatMode::Fixed(0.0)).unwrap();
        let f = vlasov_force(&spec, &[], PI / 2.0, 0.0).unwrap();
        assert!((f + 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_force_matches_potential_gradient() {
        // Independent oracle: central difference of the potential
        // W = alpha (theta - hat)^2 / 2 + beta omega theta.
        let (alpha, beta, hat) = (1.3, 0.7, 0.4);
        let spec = quadratic(alpha, beta, hat);
        let potential = |theta: f64, omega: f64| {
            0.5 * alpha * (theta - hat) * (theta - hat) + beta * omega * theta
        };
        let mut rng = Rng::new(5);
        let eps = 1e-5;
        for _ in 0..200 {
            let theta = rng.range(-PI, PI);
            let omega = rng.normal();
            let fd = -(potential(theta + eps, omega) - potential(theta - eps, omega)) / (2.0 * eps);
            let force = vlasov_force(&spec, &[], theta, omega).unwrap();
            assert!((fd - force).abs() < 1e-8, "fd {fd} vs force {force}");
        }
    }

    #[test]
    fn ensemble_mean_direction_and_degenerate_error() {
        let ensemble = vec![
            PhasePoint {
                theta: 0.3,
                omega: 0.0,
            },
            PhasePoint {
                theta: 0.5,
                omega: 0.0,
            },
        ];
        let hat = mean_direction(&ensemble).unwrap();
        assert!((hat - 0.4).abs() < 1e-12);
        // Antipodal pair: embedded mean cancels.
        let opposed = vec![
            PhasePoint {
                theta: 0.0,
                omega: 0.0,
            },
            PhasePoint {
                theta: PI,
                omega: 0.0,
            },
        ];
        assert!(matches!(
            mean_direction(&opposed),
            Err(Error::DegenerateEnsemble(_))
        ));
    }

    #[test]
    fn free_transport_is_exact() {
        let spec = quadratic(0.0, 0.0, 0.0);
        let mut ensemble = vec![
            PhasePoint {
                theta: 0.1,
                omega: 0.5,
            },
            PhasePoint {
                theta: -1.0,
                omega: -0.25,
            },
        ];
        let initial = ensemble.clone();
        let steps = 400;
        let dt = 0.01;
        integrate_ensemble(&mut ensemble, &spec, dt, steps, steps).unwrap();
        let t = steps as f64 * dt;
        for (p, p0) in ensemble.iter().zip(&initial) {
            // Kick is exactly zero, so the drift telescopes exactly up to
            // the accumulated fp rounding of repeated addition.
            assert!((p.theta - (p0.theta + p0.omega * t)).abs() < 1e-12);
            assert_eq!(p.omega, p0.omega);
        }
    }

    #[test]
    fn ensemble_mean_mode_contracts_around_its_own_mean() {
        let spec = MeanFieldSpec::new(
            PotentialKind::Quadratic,
            1.0,
            1.0,
            ThetaHatMode::EnsembleMean,
        )
        .unwrap();
        // Symmetric pair about 0.7: the recomputed preferred direction
        // starts at the midpoint and the spread dies out.
        let mut ensemble = vec![
            PhasePoint {
                theta: 0.6,
                omega: 0.0,
            },
            PhasePoint {
                theta: 0.8,
                omega: 0.0,
            },
        ];
        let stats = integrate_ensemble(&mut ensemble, &spec, 0.01, 3000, 3000).unwrap();
        let last = stats.last().unwrap();
        assert!((last.mean_theta - 0.7).abs() < 1e-6, "mean {}", last.mean_theta);
        assert!(last.std_theta < 1e-6, "std {}", last.std_theta);
        // A concentrated ensemble at its own mean is exactly stationary.
        let mut fixed = vec![
            PhasePoint {
                theta: 0.7,
                omega: 0.0,
            };
            8
        ];
        integrate_ensemble(&mut fixed, &spec, 0.01, 50, 50).unwrap();
        for p in &fixed {
            assert!((p.theta - 0.7).abs() < 1e-12);
            assert_eq!(p.omega, 0.0);
        }
    }

    #[test]
    fn delta_ensemble_at_fixed_point_is_stationary() {
        for potential in [PotentialKind::Quadratic, PotentialKind::Cosine] {
            let spec = MeanFieldSpec::new(potential, 1.0, 1.0, ThetaHatMode::Fixed(0.4)).unwrap();
            let mut ensemble = vec![
                PhasePoint {
                    theta: 0.4,
                    omega: 0.0
                };
                16
            ];
            integrate_ensemble(&mut ensemble, &spec, 0.01, 100, 100).unwrap();
            for p in &ensemble {
                assert_eq!(p.theta, 0.4);
                assert_eq!(p.omega, 0.0);
            }
        }
    }

    #[test]
    fn classification_table() {
        use FixedPointClass::*;
        assert_eq!(classify_fixed_point(1.0, 1.0), StableSpiral);
        assert_eq!(classify_fixed_point(-1.0, 0.0), Saddle);
        assert_eq!(classify_fixed_point(1.0, 0.0), Center);
        assert_eq!(classify_fixed_point(0.25, 1.0), StableNode);
        assert_eq!(classify_fixed_point(0.1, 1.0), StableNode);
        assert_eq!(classify_fixed_point(1.0, -1.0), UnstableSpiral);
        assert_eq!(classify_fixed_point(0.1, -1.0), UnstableNode);
        assert_eq!(classify_fixed_point(0.0, 1.0), Degenerate);
        assert_eq!(classify_fixed_point(-0.5, 2.0), Saddle);
    }

    #[test]
    fn decay_rates() {
        assert!((linear_decay_rate(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((linear_decay_rate(0.25, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(linear_decay_rate(1.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            linear_decay_rate(-1.0, 0.0),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn small_perturbation_rates_match_eigenvalues() {
        // Stable spiral: measure oscillation period and decay of the
        // envelope from a single slightly perturbed particle.
        let (alpha, beta) = (1.0, 1.0);
        let spec = quadratic(alpha, beta, 0.0);
        let dt = 1e-3;
        let mut ensemble = vec![PhasePoint {
            theta: 1e-3,
            omega: 0.0,
        }];
        let mut crossings = Vec::new();
        let mut previous = ensemble[0].theta;
        let steps = 40_000;
        for step in 1..=steps {
            integrate_ensemble(&mut ensemble, &spec, dt, 1, 1).unwrap();
            let current = ensemble[0].theta;
            if previous > 0.0 && current <= 0.0 {
                crossings.push(step as f64 * dt);
            }
            previous = current;
        }
        assert!(crossings.len() >= 4);
        let period = (crossings[3] - crossings[0]) / 3.0;
        let expected_freq = (alpha - beta * beta / 4.0_f64).sqrt();
        let measured_freq = 2.0 * PI / period;
        assert!(
            ((measured_freq - expected_freq) / expected_freq).abs() < 0.05,
            "frequency {measured_freq} vs {expected_freq}"
        );
        // Amplitude decay between successive downward crossings of zero:
        // envelope shrinks by exp(-decay * period).
        let decay = linear_decay_rate(alpha, beta).unwrap();
        let mut probe = vec![PhasePoint {
            theta: 1e-3,
            omega: 0.0,
        }];
        let mut maxima = Vec::new();
        let mut last = probe[0].theta;
        let mut rising = false;
        for _ in 0..steps {
            integrate_ensemble(&mut probe, &spec, dt, 1, 1).unwrap();
            let current = probe[0].theta;
            if current < last && rising {
                maxima.push(last);
            }
            rising = current > last;
            last = current;
        }
        assert!(maxima.len() >= 3);
        let measured_decay = (maxima[0] / maxima[2]).ln() / (2.0 * period);
        assert!(
            ((measured_decay - decay) / decay).abs() < 0.05,
            "decay {measured_decay} vs {decay}"
        );
    }

    #[test]
    fn cosine_linearizes_to_unit_quadratic() {
        // |sin(x) - x| <= |x|^3 / 6 on the linearization scale.
        let cosine =
            MeanFieldSpec::new(PotentialKind::Cosine, 0.0, 0.0, ThetaHatMode::Fixed(0.0)).unwrap();
        let quad = quadratic(1.0, 0.0, 0.0);
        for &x in &[1e-3, -2e-3, 5e-3, -1e-2] {
            let fc = vlasov_force(&cosine, &[], x, 0.0).unwrap();
            let fq = vlasov_force(&quad, &[], x, 0.0).unwrap();
            assert!((fc - fq).abs() <= x.abs().powi(3) / 6.0 * 1.0001);
        }
    }

    #[test]
    fn custom_table_interpolates_and_clamps() {
        let table = vec![(-1.0, 1.0), (0.0, 0.0), (1.0, -1.0)];
        let spec = MeanFieldSpec::new(
            PotentialKind::CustomTable(table),
            0.0,
            0.0,
            ThetaHatMode::Fixed(0.0),
        )
        .unwrap();
        assert_eq!(vlasov_force(&spec, &[], 0.5, 0.0).unwrap(), -0.5);
        assert_eq!(vlasov_force(&spec, &[], 2.0, 0.0).unwrap(), -1.0);
        assert_eq!(vlasov_force(&spec, &[], -2.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn transport_factor_doubles_drift() {
        let spec = quadratic(0.0, 0.0, 0.0).with_transport_factor(2.0).unwrap();
        let mut ensemble = vec![PhasePoint {
            theta: 0.0,
            omega: 1.0,
        }];
        integrate_ensemble(&mut ensemble, &spec, 0.5, 1, 1).unwrap();
        assert!((ensemble[0].theta - 1.0).abs() < 1e-15);
    }
}
