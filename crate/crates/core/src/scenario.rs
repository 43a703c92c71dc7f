//! Run orchestration: builds ensembles from a config, drives the solver or
//! the mean-field integrator, applies the scenario's built-in property
//! checks, and writes self-describing CSV output atomically.

use crate::collisions::{collide, parity_adjusted_first, sample_geometry, CollisionRule};
use crate::config::{serialize, ScenarioConfig, ScenarioKind};
use crate::dsmc::{
    dsmc_step, ensemble_moments, h_functional, random_state, sample_maxwellian, weak_form_test,
    Ensemble, MaxwellianParams, Observable, StepDiagnostics,
};
use crate::entropy::EntropyEstimator;
use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{Coeffs, ManifoldSpec};
use crate::meanfield::{classify_fixed_point, eigenvalues, integrate_ensemble, PhasePoint};
use crate::mechanics::{invariant_set, AngularMomentum, ParticleState};
use crate::rng::Rng;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub threads: usize,
    pub seed_override: Option<u64>,
    pub out_override: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: 1,
            seed_override: None,
            out_override: None,
        }
    }
}

/// What a run produced: report lines for stdout, output files, and any
/// property-check failures (non-empty means a nonzero exit).
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub report: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub failures: Vec<String>,
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Execute the configured scenario.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunSummary> {
    let mut effective = cfg.clone();
    if let Some(seed) = opts.seed_override {
        effective.seed = seed;
    }
    if let Some(out) = &opts.out_override {
        effective.output_path = Some(out.clone());
    }
    match effective.scenario {
        ScenarioKind::Relaxation => run_relaxation(&effective, opts.threads),
        ScenarioKind::Alignment => run_alignment(&effective),
        ScenarioKind::Stability => run_stability(&effective),
        ScenarioKind::InvariantFuzz => run_invariant_fuzz(&effective),
        ScenarioKind::WeakForm => run_weakform(&effective),
    }
}

/// Bimodal-velocity ensemble used by relaxation runs: two counter-moving
/// beams with Gaussian noise, spins at the noise temperature, order
/// parameters uniform.
pub fn bimodal_ensemble(cfg: &ScenarioConfig) -> Result<Ensemble> {
    let spec = cfg.manifold;
    let mut rng = Rng::new(cfg.seed);
    let speed = cfg.init.bimodal_speed;
    let noise = cfg.init.noise;
    let planar = spec.spatial_dim() == 2;
    let particles: Vec<ParticleState> = (0..cfg.n_particles)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let momentum = if planar {
                [
                    sign * speed + noise * rng.normal(),
                    noise * rng.normal(),
                    0.0,
                ]
            } else {
                [
                    sign * speed + noise * rng.normal(),
                    noise * rng.normal(),
                    noise * rng.normal(),
                ]
            };
            let order = spec.random_point(&mut rng);
            let order_momentum = match spec {
                ManifoldSpec::SphereS2 => {
                    let raw = [
                        noise * rng.normal(),
                        noise * rng.normal(),
                        noise * rng.normal(),
                    ];
                    Coeffs::Vec3(linalg::reject(raw, order.director()))
                }
                _ => Coeffs::Scalar(noise * rng.normal()),
            };
            ParticleState::new(spec, [0.0; 3], momentum, order, order_momentum, 1.0, 1.0)
        })
        .collect::<Result<_>>()?;
    Ensemble::new(spec, particles, cfg.seed ^ 0x0D5C_57E9)
}

fn run_relaxation(cfg: &ScenarioConfig, threads: usize) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let kernel = cfg.kernel_spec()?;
    let mut ens = bimodal_ensemble(cfg)?;
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    let planar = cfg.manifold.spatial_dim() == 2;
    let estimator = EntropyEstimator::default_for_dim(if planar { 3 } else { 5 });

    let mut columns: Vec<&str> = vec!["t", "H", "H_sigma", "Px", "Py"];
    if !planar {
        columns.push("Pz");
    }
    if planar {
        columns.push("L");
    } else {
        columns.extend_from_slice(&["L_x", "L_y", "L_z"]);
    }
    columns.extend_from_slice(&["E", "m2_px", "m2_py", "kurt_px", "n_collisions"]);

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut h_series: Vec<(f64, f64)> = Vec::new();
    let mut diag_total = StepDiagnostics::default();
    let checkpoint = |ens: &Ensemble,
                      rows: &mut Vec<Vec<String>>,
                      h_series: &mut Vec<(f64, f64)>|
     -> Result<()> {
        let (h, h_sigma) = h_functional(ens, estimator)?;
        let m = ensemble_moments(ens)?;
        let mut row = vec![
            fmt_float(ens.time),
            fmt_float(h),
            fmt_float(h_sigma),
            fmt_float(m.momentum[0]),
            fmt_float(m.momentum[1]),
        ];
        if !planar {
            row.push(fmt_float(m.momentum[2]));
        }
        match m.angular {
            AngularMomentum::Planar(l) => row.push(fmt_float(l)),
            AngularMomentum::Spatial(l) => {
                row.extend(l.iter().map(|v| fmt_float(*v)));
            }
        }
        row.push(fmt_float(m.energy));
        row.push(fmt_float(m.m2_px));
        row.push(fmt_float(m.m2_py));
        row.push(fmt_float(m.kurt_px));
        row.push(format!("{}", ens.total_collisions));
        rows.push(row);
        h_series.push((h, h_sigma));
        Ok(())
    };

    checkpoint(&ens, &mut rows, &mut h_series)?;
    for step in 1..=steps {
        diag_total.absorb(&dsmc_step(&mut ens, &kernel, cfg.dt, threads)?);
        if step % cfg.checkpoint_every == 0 || step == steps {
            checkpoint(&ens, &mut rows, &mut h_series)?;
        }
    }

    // Entropy must not rise beyond the combined estimator noise.
    for pair in h_series.windows(2) {
        let (h0, s0) = pair[0];
        let (h1, s1) = pair[1];
        let band = 3.0 * (s0 * s0 + s1 * s1).sqrt();
        if h1 > h0 + band {
            summary.failures.push(format!(
                "entropy_increase h_prev={h0} h_next={h1} band={band}"
            ));
        }
    }
    if diag_total.majorant_violations > 0 {
        summary.failures.push(format!(
            "majorant_violations count={}",
            diag_total.majorant_violations
        ));
    }
    summary.report.push(format!(
        "relaxation: steps={steps} collisions={} accepted={} conflicts={} max_drift(P,L,E)=({:.3e},{:.3e},{:.3e})",
        ens.total_collisions,
        diag_total.accepted,
        diag_total.conflict_skipped,
        diag_total.max_momentum_drift,
        diag_total.max_angular_drift,
        diag_total.max_energy_drift,
    ));
    if let Some(path) = &cfg.output_path {
        write_csv(Path::new(path), cfg, &columns, &rows)?;
        summary.outputs.push(PathBuf::from(path));
    }
    Ok(summary)
}

/// Alignment initial data: angles uniform on [-pi, pi], angular velocities
/// uniform on [-1, 1].
pub fn alignment_ensemble(n: usize, seed: u64) -> Vec<PhasePoint> {
    let mut rng = Rng::new(seed);
    (0..n)
        .map(|_| PhasePoint {
            theta: rng.range(-PI, PI),
            omega: rng.range(-1.0, 1.0),
        })
        .collect()
}

fn run_alignment(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let spec = cfg.mean_field_spec()?;
    let mut ensemble = alignment_ensemble(cfg.n_particles, cfg.seed);
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    let stats = integrate_ensemble(&mut ensemble, &spec, cfg.dt, steps, cfg.checkpoint_every)?;
    let columns = ["t", "mean_theta", "std_theta", "mean_omega", "std_omega"];
    let rows: Vec<Vec<String>> = stats
        .iter()
        .map(|s| {
            vec![
                fmt_float(s.t),
                fmt_float(s.mean_theta),
                fmt_float(s.std_theta),
                fmt_float(s.mean_omega),
                fmt_float(s.std_omega),
            ]
        })
        .collect();
    let last = stats.last().expect("at least the initial checkpoint");
    summary.report.push(format!(
        "alignment: t={} mean_theta={} std_theta={}",
        last.t, last.mean_theta, last.std_theta
    ));
    if let Some(path) = &cfg.output_path {
        write_csv(Path::new(path), cfg, &columns, &rows)?;
        summary.outputs.push(PathBuf::from(path));
    }
    Ok(summary)
}

fn run_stability(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let (alpha, beta) = (cfg.potential.alpha, cfg.potential.beta);
    summary.report.extend(stability_report(alpha, beta));
    Ok(summary)
}

/// Classification lines shared by the scenario and the CLI flag form.
pub fn stability_report(alpha: f64, beta: f64) -> Vec<String> {
    let class = classify_fixed_point(alpha, beta);
    let eigs = eigenvalues(alpha, beta);
    vec![
        format!("alpha = {alpha}"),
        format!("beta = {beta}"),
        format!("classification = {class}"),
        format!(
            "eigenvalues = {}{}{}i, {}{}{}i",
            eigs[0].0,
            if eigs[0].1 >= 0.0 { " + " } else { " - " },
            eigs[0].1.abs(),
            eigs[1].0,
            if eigs[1].1 >= 0.0 { " + " } else { " - " },
            eigs[1].1.abs(),
        ),
    ]
}

/// One fuzzed event: random pair, random geometry, contact-consistent
/// positions, invariants before and after.
pub struct FuzzReport {
    pub events: u64,
    pub max_event_drift: f64,
    pub cumulative_drift: f64,
}

/// Conservation fuzz for one rule. Parity-1 head-tail events are compared
/// in the rotation-sense gauge the rule actually preserves.
pub fn conservation_fuzz(rule: CollisionRule, events: u64, seed: u64) -> Result<FuzzReport> {
    let spec = rule.canonical_manifold();
    let mut rng = Rng::new(seed);
    let mut max_event = 0.0f64;
    let n_components = match spec {
        ManifoldSpec::CircleS1 | ManifoldSpec::ProjectiveRp1 => 5,
        _ => 7,
    };
    let mut cumulative = vec![0.0f64; n_components];
    for _ in 0..events {
        let s1 = random_state(spec, &mut rng);
        let s2 = random_state(spec, &mut rng);
        let geom = sample_geometry(rule, &s1, &s2, &mut rng)?;
        // Positions consistent with the sampled contact point.
        let mut a = s1;
        let mut b = s2;
        a.position = linalg::scale(geom.r1, -1.0);
        b.position = linalg::scale(geom.r2, -1.0);
        let out = collide(rule, &a, &b, &geom)?;
        let pre_first = if rule == CollisionRule::HeadTail2d {
            parity_adjusted_first(&a, geom.parity)
        } else {
            a
        };
        let pre = invariant_set(&[pre_first, b], spec)?;
        let mut post_first = out.first;
        let mut post_second = out.second;
        post_first.position = a.position;
        post_second.position = b.position;
        let post = invariant_set(&[post_first, post_second], spec)?;
        max_event = max_event.max(pre.max_relative_drift(&post));
        for (acc, (x, y)) in cumulative
            .iter_mut()
            .zip(pre.components().iter().zip(post.components()))
        {
            *acc += y - x;
        }
    }
    Ok(FuzzReport {
        events,
        max_event_drift: max_event,
        cumulative_drift: cumulative.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

fn run_invariant_fuzz(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let report = conservation_fuzz(cfg.rule, cfg.n_events, cfg.seed)?;
    summary.report.push(format!(
        "invariant_fuzz: rule={} events={} max_event_drift={:.3e} cumulative_drift={:.3e}",
        cfg.rule.name(),
        report.events,
        report.max_event_drift,
        report.cumulative_drift
    ));
    if report.max_event_drift >= 1e-10 {
        summary.failures.push(format!(
            "event_drift max={:.3e} bound=1e-10",
            report.max_event_drift
        ));
    }
    if report.cumulative_drift >= 1e-8 {
        summary.failures.push(format!(
            "cumulative_drift max={:.3e} bound=1e-8",
            report.cumulative_drift
        ));
    }
    if let Some(path) = &cfg.output_path {
        let columns = ["events", "max_event_drift", "cumulative_drift"];
        let rows = vec![vec![
            format!("{}", report.events),
            fmt_float(report.max_event_drift),
            fmt_float(report.cumulative_drift),
        ]];
        write_csv(Path::new(path), cfg, &columns, &rows)?;
        summary.outputs.push(PathBuf::from(path));
    }
    Ok(summary)
}

fn run_weakform(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let kernel = cfg.kernel_spec()?;
    let ens = sample_maxwellian(
        &MaxwellianParams::centered(-0.5),
        cfg.manifold,
        cfg.n_particles,
        cfg.seed,
        1.0,
        1.0,
    )?;
    let mut observables = vec![
        Observable::One,
        Observable::MomentumX,
        Observable::MomentumY,
    ];
    if cfg.manifold.spatial_dim() == 3 {
        observables.push(Observable::MomentumZ);
    }
    if cfg.manifold != ManifoldSpec::Interval01 {
        observables.push(Observable::Angular);
    }
    observables.push(Observable::Energy);

    let columns = ["psi", "estimate", "std_error", "pass"];
    let mut rows = Vec::new();
    for (k, psi) in observables.iter().enumerate() {
        let (estimate, std_error) = weak_form_test(
            &ens,
            &kernel,
            *psi,
            cfg.n_events as usize,
            cfg.seed.wrapping_add(k as u64 + 1),
        )?;
        let pass = estimate.abs() <= 3.0 * std_error + 1e-12;
        summary.report.push(format!(
            "weakform: psi={} estimate={:.6e} std_error={:.6e} {}",
            psi.name(),
            estimate,
            std_error,
            if pass { "pass" } else { "FAIL" }
        ));
        if !pass {
            summary.failures.push(format!(
                "weak_form psi={} estimate={estimate} std_error={std_error}",
                psi.name()
            ));
        }
        rows.push(vec![
            psi.name().to_string(),
            fmt_float(estimate),
            fmt_float(std_error),
            format!("{}", u8::from(pass)),
        ]);
    }
    if let Some(path) = &cfg.output_path {
        write_csv(Path::new(path), cfg, &columns, &rows)?;
        summary.outputs.push(PathBuf::from(path));
    }
    Ok(summary)
}

/// Write a CSV with `#`-prefixed header comments carrying the schema
/// version, build identifier, seed, and the full canonical config. The
/// file appears atomically (temp file plus rename).
pub fn write_csv(
    path: &Path,
    cfg: &ScenarioConfig,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("# ordered-kinetics csv schema={SCHEMA_VERSION}\n"));
    text.push_str(&format!(
        "# build = ordered-kinetics {}\n",
        env!("CARGO_PKG_VERSION")
    ));
    text.push_str(&format!("# seed = {}\n", cfg.seed));
    for line in serialize(cfg).lines().filter(|l| !l.is_empty()) {
        text.push_str(&format!("# config.{line}\n"));
    }
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Config(format!(
                "row width {} does not match {} columns",
                row.len(),
                columns.len()
            )));
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let tmp = path.with_extension("csv.tmp");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
