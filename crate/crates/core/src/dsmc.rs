//! Stochastic solver for the spatially homogeneous collision dynamics.
//!
//! Candidate pairs are drawn uniformly, accepted against a user-supplied
//! majorant of the transition rate, given contact geometry from the rule's
//! reference measure, and updated with the matching conservative collision
//! rule. Candidate evaluation runs against the step-initial state with one
//! derived random substream per candidate, so the outcome multiset is
//! independent of how candidates are partitioned across worker threads;
//! accepted events touching an already-updated particle are skipped.

use crate::collisions::{
    collide, parity_adjusted_first, sample_geometry, CollisionGeometry, CollisionRule,
};
use crate::entropy::{h_estimate, EntropyEstimator};
use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::manifold::{Coeffs, ManifoldSpec, Point};
use crate::mechanics::{
    generalized_angular_momentum, validate_homogeneous, AngularMomentum, ParticleState,
};
use crate::rng::Rng;

/// Transition-rate prefactor `S(nu1, nu2)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PrefactorKind {
    Unit,
    /// Mean volume fraction `(nu1 + nu2) / 2`: larger bubbles collide more.
    BubbleMean,
    /// Interpolated table over the mean chart value of the pair.
    CustomTable(Vec<(f64, f64)>),
}

impl PrefactorKind {
    fn evaluate(&self, s1: &ParticleState, s2: &ParticleState) -> Result<f64> {
        let value = match self {
            PrefactorKind::Unit => 1.0,
            PrefactorKind::BubbleMean => 0.5 * (s1.order.fraction() + s2.order.fraction()),
            PrefactorKind::CustomTable(table) => {
                let mid = 0.5 * (chart_value(&s1.order) + chart_value(&s2.order));
                interp_clamped(table, mid)
            }
        };
        if value < 0.0 {
            return Err(Error::Config(format!("negative rate prefactor {value}")));
        }
        Ok(value)
    }
}

fn chart_value(p: &Point) -> f64 {
    match p {
        Point::Fraction(v) => *v,
        Point::Angle(t) => *t,
        Point::Director(v) => v[2],
    }
}

fn interp_clamped(table: &[(f64, f64)], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let idx = table.partition_point(|(a, _)| *a <= x).min(table.len() - 1);
    let (x0, y0) = table[idx - 1];
    let (x1, y1) = table[idx];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Transition-kernel description: rule, prefactor, and an upper bound on
/// the per-pair event rate used for acceptance-rejection.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    pub rule: CollisionRule,
    pub prefactor: PrefactorKind,
    pub majorant: f64,
}

impl KernelSpec {
    pub fn new(rule: CollisionRule, prefactor: PrefactorKind, majorant: f64) -> Result<Self> {
        if !(majorant.is_finite() && majorant > 0.0) {
            return Err(Error::Config(format!(
                "majorant must be finite and > 0, got {majorant}"
            )));
        }
        if let PrefactorKind::CustomTable(table) = &prefactor {
            if table.len() < 2 || table.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Config(
                    "prefactor table needs at least two increasing abscissae".into(),
                ));
            }
            if table.iter().any(|(_, y)| *y < 0.0) {
                return Err(Error::Config("prefactor table must be nonnegative".into()));
            }
        }
        Ok(KernelSpec {
            rule,
            prefactor,
            majorant,
        })
    }
}

/// Homogeneous particle ensemble with its own deterministic random stream.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub particles: Vec<ParticleState>,
    pub manifold: ManifoldSpec,
    pub time: f64,
    pub total_collisions: u64,
    rng: Rng,
}

impl Ensemble {
    pub fn new(manifold: ManifoldSpec, particles: Vec<ParticleState>, seed: u64) -> Result<Self> {
        validate_homogeneous(&particles)?;
        for p in &particles {
            manifold.validate_point(&p.order)?;
        }
        Ok(Ensemble {
            particles,
            manifold,
            time: 0.0,
            total_collisions: 0,
            rng: Rng::new(seed),
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// Relative velocity of the contact points of two bodies (first minus
/// second). The offsets `r1`, `r2` point from the shared contact point to
/// each center of mass, matching the kinetic-kernel convention; the
/// negated center-of-mass-to-contact arms of a [`CollisionGeometry`] fit
/// directly.
pub fn contact_velocity(s1: &ParticleState, s2: &ParticleState, r1: Vec3, r2: Vec3) -> Vec3 {
    let translational = linalg::sub(s1.velocity(), s2.velocity());
    let spin1 = spin_velocity(s1, r1);
    let spin2 = spin_velocity(s2, r2);
    linalg::sub(linalg::add(translational, spin2), spin1)
}

/// omega x r for the stored rotational state; zero for volume fractions.
fn spin_velocity(s: &ParticleState, r: Vec3) -> Vec3 {
    match (&s.order, &s.order_momentum) {
        (Point::Angle(_), Coeffs::Scalar(_)) => {
            let omega = s.omega_scalar();
            [-omega * r[1], omega * r[0], 0.0]
        }
        (Point::Director(_), Coeffs::Vec3(_)) => linalg::cross(s.omega_vector(), r),
        _ => [0.0; 3],
    }
}

/// Event rate of a candidate pair at the sampled geometry: the approaching
/// normal contact speed times the prefactor, zero for receding contacts.
pub fn kernel_rate(
    spec: &KernelSpec,
    s1: &ParticleState,
    s2: &ParticleState,
    geom: &CollisionGeometry,
) -> Result<f64> {
    let g = contact_velocity(
        s1,
        s2,
        linalg::scale(geom.r1, -1.0),
        linalg::scale(geom.r2, -1.0),
    );
    let approach = linalg::dot(g, geom.normal).max(0.0);
    Ok(approach * spec.prefactor.evaluate(s1, s2)?)
}

/// Diagnostics of one solver step (or an aggregate of several).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    pub candidates: u64,
    pub accepted: u64,
    pub applied: u64,
    pub conflict_skipped: u64,
    pub majorant_violations: u64,
    pub max_momentum_drift: f64,
    pub max_energy_drift: f64,
    pub max_angular_drift: f64,
}

impl StepDiagnostics {
    pub fn absorb(&mut self, other: &StepDiagnostics) {
        self.candidates += other.candidates;
        self.accepted += other.accepted;
        self.applied += other.applied;
        self.conflict_skipped += other.conflict_skipped;
        self.majorant_violations += other.majorant_violations;
        self.max_momentum_drift = self.max_momentum_drift.max(other.max_momentum_drift);
        self.max_energy_drift = self.max_energy_drift.max(other.max_energy_drift);
        self.max_angular_drift = self.max_angular_drift.max(other.max_angular_drift);
    }
}

struct AcceptedEvent {
    candidate: usize,
    i: usize,
    j: usize,
    first: ParticleState,
    second: ParticleState,
    geom: CollisionGeometry,
    violated_majorant: bool,
}

/// Advance the ensemble by one collision step of length `dt`.
///
/// `threads` > 1 partitions candidate evaluation across scoped workers;
/// the result is bit-identical to the serial schedule.
pub fn dsmc_step(
    ens: &mut Ensemble,
    spec: &KernelSpec,
    dt: f64,
    threads: usize,
) -> Result<StepDiagnostics> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::Config(format!(
            "dt must be finite and >= 0, got {dt}"
        )));
    }
    if !spec.rule.compatible_with(ens.manifold) {
        return Err(Error::Config(format!(
            "rule '{}' is incompatible with manifold '{}'",
            spec.rule.name(),
            ens.manifold.name()
        )));
    }
    if ens.len() < 2 {
        return Err(Error::DegenerateEnsemble(
            "collision steps need at least two particles".into(),
        ));
    }
    if spec.majorant * dt > 0.5 {
        return Err(Error::Config(format!(
            "expected collisions per particle per step {} exceeds 0.5; shrink dt",
            spec.majorant * dt
        )));
    }
    let n = ens.len();
    // Per-pair rate bound majorant / n keeps the total collision rate
    // proportional to n (unit number density).
    let expected = 0.5 * (n as f64 - 1.0) * spec.majorant * dt;
    let step_key = ens.rng.next_u64();
    let mut deciders = Rng::new(step_key);
    let candidates = expected.floor() as usize + usize::from(deciders.f64() < expected.fract());

    let root = Rng::new(step_key ^ 0x5312_AB01);
    let evaluate = |k: usize| -> Option<AcceptedEvent> {
        let mut rng = root.substream(k as u64);
        let (i, j) = rng.pair(n);
        let s1 = &ens.particles[i];
        let s2 = &ens.particles[j];
        let geom = sample_geometry(spec.rule, s1, s2, &mut rng).ok()?;
        let rate = kernel_rate(spec, s1, s2, &geom).ok()?;
        let violated = rate > spec.majorant * (1.0 + 1e-12);
        if rng.f64() * spec.majorant >= rate {
            return None;
        }
        let out = collide(spec.rule, s1, s2, &geom).ok()?;
        Some(AcceptedEvent {
            candidate: k,
            i,
            j,
            first: out.first,
            second: out.second,
            geom,
            violated_majorant: violated,
        })
    };

    let mut events: Vec<AcceptedEvent> = if threads > 1 && candidates > 64 {
        let chunk = candidates.div_ceil(threads);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..threads {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(candidates);
                let evaluate = &evaluate;
                handles
                    .push(scope.spawn(move || (lo..hi).filter_map(evaluate).collect::<Vec<_>>()));
            }
            let mut all = Vec::new();
            for h in handles {
                all.extend(h.join().expect("candidate worker panicked"));
            }
            all
        })
    } else {
        (0..candidates).filter_map(&evaluate).collect()
    };
    events.sort_by_key(|e| e.candidate);

    let mut diag = StepDiagnostics {
        candidates: candidates as u64,
        accepted: events.len() as u64,
        ..StepDiagnostics::default()
    };
    let mut busy = vec![false; n];
    for event in events {
        if event.violated_majorant {
            diag.majorant_violations += 1;
        }
        if busy[event.i] || busy[event.j] {
            diag.conflict_skipped += 1;
            continue;
        }
        track_event_conservation(ens.manifold, spec.rule, ens, &event, &mut diag);
        ens.particles[event.i] = event.first;
        ens.particles[event.j] = event.second;
        busy[event.i] = true;
        busy[event.j] = true;
        diag.applied += 1;
    }
    ens.total_collisions += diag.applied;
    ens.time += dt;
    Ok(diag)
}

/// Per-event conservation bookkeeping at contact-consistent virtual
/// positions; parity-1 head-tail events are compared against the
/// parity-adjusted pre-state, the gauge in which the rule conserves spin.
fn track_event_conservation(
    manifold: ManifoldSpec,
    rule: CollisionRule,
    ens: &Ensemble,
    event: &AcceptedEvent,
    diag: &mut StepDiagnostics,
) {
    let place = |mut s: ParticleState, at: Vec3| {
        s.position = at;
        s
    };
    let x1 = linalg::scale(event.geom.r1, -1.0);
    let x2 = linalg::scale(event.geom.r2, -1.0);
    let pre1 = if rule == CollisionRule::HeadTail2d {
        parity_adjusted_first(&ens.particles[event.i], event.geom.parity)
    } else {
        ens.particles[event.i]
    };
    let pre = [place(pre1, x1), place(ens.particles[event.j], x2)];
    let post = [place(event.first, x1), place(event.second, x2)];

    let dp = linalg::sub(
        linalg::add(pre[0].momentum, pre[1].momentum),
        linalg::add(post[0].momentum, post[1].momentum),
    );
    let p_scale = linalg::norm(pre[0].momentum)
        .max(linalg::norm(pre[1].momentum))
        .max(1.0);
    diag.max_momentum_drift = diag.max_momentum_drift.max(linalg::norm(dp) / p_scale);

    let e_pre = pre[0].translational_energy()
        + pre[1].translational_energy()
        + pre[0].rotational_energy()
        + pre[1].rotational_energy();
    let e_post = post[0].translational_energy()
        + post[1].translational_energy()
        + post[0].rotational_energy()
        + post[1].rotational_energy();
    diag.max_energy_drift = diag
        .max_energy_drift
        .max((e_pre - e_post).abs() / e_pre.abs().max(1.0));

    let l_pre = generalized_angular_momentum(&pre, manifold);
    let l_post = generalized_angular_momentum(&post, manifold);
    if let (Ok(l0), Ok(l1)) = (l_pre, l_post) {
        let drift = match (l0, l1) {
            (AngularMomentum::Planar(a), AngularMomentum::Planar(b)) => {
                (a - b).abs() / a.abs().max(1.0)
            }
            (AngularMomentum::Spatial(a), AngularMomentum::Spatial(b)) => {
                linalg::norm(linalg::sub(a, b)) / linalg::norm(a).max(1.0)
            }
            _ => 0.0,
        };
        diag.max_angular_drift = diag.max_angular_drift.max(drift);
    }
}

/// Variables monitored by the entropy estimate: momentum components plus
/// order-momentum coordinates (tangent-frame components on the sphere),
/// optionally the chart coordinate of the order parameter itself.
pub fn phase_samples(ens: &Ensemble, include_order: bool) -> Vec<Vec<f64>> {
    ens.particles
        .iter()
        .map(|s| {
            let mut row = Vec::with_capacity(6);
            let d = ens.manifold.spatial_dim();
            row.extend_from_slice(&s.momentum[..d]);
            match (&s.order, &s.order_momentum) {
                (Point::Director(dir), Coeffs::Vec3(sig)) => {
                    let (e1, e2) = linalg::tangent_basis(*dir);
                    row.push(linalg::dot(*sig, e1));
                    row.push(linalg::dot(*sig, e2));
                }
                (_, Coeffs::Scalar(sig)) => row.push(*sig),
                _ => {}
            }
            if include_order {
                match &s.order {
                    Point::Fraction(v) => row.push(*v),
                    Point::Angle(t) => row.push(*t),
                    Point::Director(_) => {}
                }
            }
            row
        })
        .collect()
}

/// Estimate of `integral f log f` over the reduced phase variables, with
/// its standard error. Deterministic given the ensemble and estimator.
pub fn h_functional(ens: &Ensemble, estimator: EntropyEstimator) -> Result<(f64, f64)> {
    h_estimate(&phase_samples(ens, false), estimator)
}

/// Observable tested against the collision operator in weak form.
#[derive(Clone, Copy, Debug)]
pub enum Observable {
    One,
    MomentumX,
    MomentumY,
    MomentumZ,
    /// Generalized angular momentum (orbital plus spin part); the weak-form
    /// sampler evaluates it at the event's contact configuration, where the
    /// rules conserve it pointwise.
    Angular,
    Energy,
    Custom(fn(&ParticleState) -> f64),
}

impl Observable {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "one" => Ok(Observable::One),
            "px" => Ok(Observable::MomentumX),
            "py" => Ok(Observable::MomentumY),
            "pz" => Ok(Observable::MomentumZ),
            "angular" => Ok(Observable::Angular),
            "energy" => Ok(Observable::Energy),
            other => Err(Error::Config(format!("unknown observable '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Observable::One => "one",
            Observable::MomentumX => "px",
            Observable::MomentumY => "py",
            Observable::MomentumZ => "pz",
            Observable::Angular => "angular",
            Observable::Energy => "energy",
            Observable::Custom(_) => "custom",
        }
    }

    pub fn evaluate(&self, s: &ParticleState) -> f64 {
        match self {
            Observable::One => 1.0,
            Observable::MomentumX => s.momentum[0],
            Observable::MomentumY => s.momentum[1],
            Observable::MomentumZ => s.momentum[2],
            Observable::Angular => {
                let orbital = s.position[0] * s.momentum[1] - s.position[1] * s.momentum[0];
                match &s.order_momentum {
                    Coeffs::Scalar(sig) => orbital + sig,
                    Coeffs::Vec3(sig) => orbital + linalg::cross(s.order.director(), *sig)[2],
                }
            }
            Observable::Energy => s.translational_energy() + s.rotational_energy(),
            Observable::Custom(f) => f(s),
        }
    }
}

/// Monte Carlo estimate of the observable tested against the collision
/// operator: the rate-weighted mean of the observable's change over
/// sampled pair/geometry events, with its standard error. Collision
/// invariants come out statistically indistinguishable from zero.
pub fn weak_form_test(
    ens: &Ensemble,
    spec: &KernelSpec,
    psi: Observable,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if ens.len() < 2 {
        return Err(Error::DegenerateEnsemble(
            "weak-form sampling needs at least two particles".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    if !spec.rule.compatible_with(ens.manifold) {
        return Err(Error::Config(format!(
            "rule '{}' is incompatible with manifold '{}'",
            spec.rule.name(),
            ens.manifold.name()
        )));
    }
    let root = Rng::new(seed);
    let n = ens.len();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let place = |mut s: ParticleState, at: Vec3| {
        s.position = at;
        s
    };
    for k in 0..samples {
        let mut rng = root.substream(k as u64);
        let (i, j) = rng.pair(n);
        let s1 = &ens.particles[i];
        let s2 = &ens.particles[j];
        let geom = sample_geometry(spec.rule, s1, s2, &mut rng)?;
        let rate = kernel_rate(spec, s1, s2, &geom)?;
        let contribution = if rate > 0.0 {
            let out = collide(spec.rule, s1, s2, &geom)?;
            // Observables see the event's contact configuration: both
            // bodies touching the sampled contact point, the head-tail
            // rotation sense fixed by the parity gauge.
            let x1 = linalg::scale(geom.r1, -1.0);
            let x2 = linalg::scale(geom.r2, -1.0);
            let pre1 = if spec.rule == CollisionRule::HeadTail2d {
                parity_adjusted_first(s1, geom.parity)
            } else {
                *s1
            };
            let delta = psi.evaluate(&place(out.first, x1)) + psi.evaluate(&place(out.second, x2))
                - psi.evaluate(&place(pre1, x1))
                - psi.evaluate(&place(*s2, x2));
            0.5 * rate * delta
        } else {
            0.0
        };
        sum += contribution;
        sum_sq += contribution * contribution;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0);
    Ok((mean, (var / m).sqrt()))
}

/// Worst deviations of the fixed-geometry momentum map from volume
/// preservation and from being its own inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReciprocityReport {
    pub max_det_deviation: f64,
    pub max_involution_error: f64,
}

/// Numeric Jacobian determinant of the pre-to-post momentum map at fixed
/// geometry, and the error of applying the rule twice, over random trials.
pub fn reciprocity_check(
    rule: CollisionRule,
    trials: usize,
    seed: u64,
) -> Result<ReciprocityReport> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let spec = rule.canonical_manifold();
    let mut rng = Rng::new(seed);
    let mut report = ReciprocityReport {
        max_det_deviation: 0.0,
        max_involution_error: 0.0,
    };
    let mut done = 0;
    while done < trials {
        let s1 = random_state(spec, &mut rng);
        let s2 = random_state(spec, &mut rng);
        let geom = sample_geometry(rule, &s1, &s2, &mut rng)?;
        let coords = momentum_coords(rule, &s1, &s2);
        let map = |x: &[f64]| -> Result<Vec<f64>> {
            let (a, b) = with_momentum_coords(rule, &s1, &s2, x);
            let out = collide(rule, &a, &b, &geom)?;
            Ok(momentum_coords(rule, &out.first, &out.second))
        };
        if map(&coords).is_err() {
            continue;
        }
        let dim = coords.len();
        let eps = 1e-6;
        let mut jac = vec![vec![0.0; dim]; dim];
        let mut x = coords.clone();
        let mut ok = true;
        for c in 0..dim {
            x[c] = coords[c] + eps;
            let plus = match map(&x) {
                Ok(v) => v,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            x[c] = coords[c] - eps;
            let minus = match map(&x) {
                Ok(v) => v,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            x[c] = coords[c];
            for r in 0..dim {
                jac[r][c] = (plus[r] - minus[r]) / (2.0 * eps);
            }
        }
        if !ok {
            continue;
        }
        let det = linalg::determinant(&jac);
        report.max_det_deviation = report.max_det_deviation.max((det.abs() - 1.0).abs());

        // Involution at the same geometry; the parity flip is a gauge
        // relabeling, so head-tail uses its co-rotating branch.
        let inv_geom = if rule == CollisionRule::HeadTail2d {
            let mut g = geom;
            g.parity = 0;
            g
        } else {
            geom
        };
        let once = collide(rule, &s1, &s2, &inv_geom)?;
        let twice = collide(rule, &once.first, &once.second, &inv_geom)?;
        let d1 = momentum_coords(rule, &twice.first, &twice.second);
        let involution = momentum_coords(rule, &s1, &s2)
            .iter()
            .zip(&d1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.max_involution_error = report.max_involution_error.max(involution);
        done += 1;
    }
    Ok(report)
}

fn momentum_coords(rule: CollisionRule, a: &ParticleState, b: &ParticleState) -> Vec<f64> {
    match rule {
        CollisionRule::HardSphere | CollisionRule::Bubbles => {
            let va = a.velocity();
            let vb = b.velocity();
            vec![va[0], va[1], va[2], vb[0], vb[1], vb[2]]
        }
        CollisionRule::Calamitic2d | CollisionRule::HeadTail2d => {
            let va = a.velocity();
            let vb = b.velocity();
            vec![
                va[0],
                va[1],
                vb[0],
                vb[1],
                a.omega_scalar(),
                b.omega_scalar(),
            ]
        }
        CollisionRule::Calamitic3d => {
            let va = a.velocity();
            let vb = b.velocity();
            let mut out = vec![va[0], va[1], va[2], vb[0], vb[1], vb[2]];
            for s in [a, b] {
                let (e1, e2) = linalg::tangent_basis(s.order.director());
                let rate = s.order_rate().vec3();
                out.push(linalg::dot(rate, e1));
                out.push(linalg::dot(rate, e2));
            }
            out
        }
    }
}

fn with_momentum_coords(
    rule: CollisionRule,
    a: &ParticleState,
    b: &ParticleState,
    x: &[f64],
) -> (ParticleState, ParticleState) {
    let mut first = *a;
    let mut second = *b;
    match rule {
        CollisionRule::HardSphere | CollisionRule::Bubbles => {
            first.momentum = linalg::scale([x[0], x[1], x[2]], a.mass);
            second.momentum = linalg::scale([x[3], x[4], x[5]], b.mass);
        }
        CollisionRule::Calamitic2d | CollisionRule::HeadTail2d => {
            first.momentum = linalg::scale([x[0], x[1], 0.0], a.mass);
            second.momentum = linalg::scale([x[2], x[3], 0.0], b.mass);
            first.order_momentum = Coeffs::Scalar(a.inertia * x[4]);
            second.order_momentum = Coeffs::Scalar(b.inertia * x[5]);
        }
        CollisionRule::Calamitic3d => {
            first.momentum = linalg::scale([x[0], x[1], x[2]], a.mass);
            second.momentum = linalg::scale([x[3], x[4], x[5]], b.mass);
            let (e1a, e2a) = linalg::tangent_basis(a.order.director());
            let (e1b, e2b) = linalg::tangent_basis(b.order.director());
            first.order_momentum = Coeffs::Vec3(linalg::scale(
                linalg::add(linalg::scale(e1a, x[6]), linalg::scale(e2a, x[7])),
                a.inertia,
            ));
            second.order_momentum = Coeffs::Vec3(linalg::scale(
                linalg::add(linalg::scale(e1b, x[8]), linalg::scale(e2b, x[9])),
                b.inertia,
            ));
        }
    }
    (first, second)
}

/// Unit-scale random state for fuzzing: standard normal momenta and spins,
/// uniform order parameter, zero position.
pub fn random_state(spec: ManifoldSpec, rng: &mut Rng) -> ParticleState {
    let planar = spec.spatial_dim() == 2;
    let momentum = if planar {
        [rng.normal(), rng.normal(), 0.0]
    } else {
        [rng.normal(), rng.normal(), rng.normal()]
    };
    let order = spec.random_point(rng);
    let order_momentum = match spec {
        ManifoldSpec::SphereS2 => {
            let raw = [rng.normal(), rng.normal(), rng.normal()];
            Coeffs::Vec3(linalg::reject(raw, order.director()))
        }
        _ => Coeffs::Scalar(rng.normal()),
    };
    ParticleState::new(spec, [0.0; 3], momentum, order, order_momentum, 1.0, 1.0)
        .expect("unit-scale state is always valid")
}

/// Parameters of the stationary exponential-family distribution: the
/// exponent is `a + b . p + c L(state) + d (p.p / m + sigma . B^-1 sigma)`,
/// Gaussian for `d < 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxwellianParams {
    /// Normalization offset; no effect on sampling.
    pub log_scale: f64,
    /// Mean-drift coupling per momentum component.
    pub drift: Vec3,
    /// Coupling to the generalized angular momentum about the z axis.
    pub rotation: f64,
    /// Energy coupling; must be negative for integrability.
    pub energy: f64,
}

impl MaxwellianParams {
    pub fn centered(energy: f64) -> Self {
        MaxwellianParams {
            log_scale: 0.0,
            drift: [0.0; 3],
            rotation: 0.0,
            energy,
        }
    }
}

/// Draw an ensemble from the stationary exponential family: Gaussian in
/// momenta and order momenta after completing the square, order parameters
/// uniform on the manifold. Deterministic given the seed.
pub fn sample_maxwellian(
    params: &MaxwellianParams,
    spec: ManifoldSpec,
    n: usize,
    seed: u64,
    mass: f64,
    inertia: f64,
) -> Result<Ensemble> {
    if params.energy >= 0.0 {
        return Err(Error::Config(format!(
            "energy coupling must be negative for an integrable family, got {}",
            params.energy
        )));
    }
    if n == 0 {
        return Err(Error::Config("need at least one particle".into()));
    }
    let planar = spec.spatial_dim() == 2;
    if planar && params.drift[2] != 0.0 {
        return Err(Error::Config(
            "planar manifolds take a two-component drift".into(),
        ));
    }
    let mut rng = Rng::new(seed);
    let p_var = -mass / (2.0 * params.energy);
    let p_sd = p_var.sqrt();
    let s_var = -inertia / (2.0 * params.energy);
    let s_sd = s_var.sqrt();
    let p_mean_base = linalg::scale(params.drift, -mass / (2.0 * params.energy));
    let mut particles = Vec::with_capacity(n);
    for _ in 0..n {
        let order = spec.random_point(&mut rng);
        let momentum = if planar {
            [
                p_mean_base[0] + p_sd * rng.normal(),
                p_mean_base[1] + p_sd * rng.normal(),
                0.0,
            ]
        } else {
            [
                p_mean_base[0] + p_sd * rng.normal(),
                p_mean_base[1] + p_sd * rng.normal(),
                p_mean_base[2] + p_sd * rng.normal(),
            ]
        };
        let order_momentum = match spec {
            ManifoldSpec::SphereS2 => {
                let dir = order.director();
                let (e1, e2) = linalg::tangent_basis(dir);
                // Rotation coupling shifts the tangent mean along z x nu.
                let shift = linalg::scale(
                    linalg::reject([-dir[1], dir[0], 0.0], dir),
                    -inertia * params.rotation / (2.0 * params.energy),
                );
                let g = linalg::add(
                    linalg::add(
                        linalg::scale(e1, s_sd * rng.normal()),
                        linalg::scale(e2, s_sd * rng.normal()),
                    ),
                    shift,
                );
                Coeffs::Vec3(g)
            }
            _ => Coeffs::Scalar(
                -inertia * params.rotation / (2.0 * params.energy) + s_sd * rng.normal(),
            ),
        };
        particles.push(ParticleState::new(
            spec,
            [0.0; 3],
            momentum,
            order,
            order_momentum,
            mass,
            inertia,
        )?);
    }
    Ensemble::new(spec, particles, seed ^ 0x00E2_17D5)
}

/// Scalar moments tracked per checkpoint.
#[derive(Clone, Debug)]
pub struct EnsembleMoments {
    pub momentum: Vec3,
    pub angular: AngularMomentum,
    pub energy: f64,
    pub m2_px: f64,
    pub m2_py: f64,
    pub kurt_px: f64,
}

pub fn ensemble_moments(ens: &Ensemble) -> Result<EnsembleMoments> {
    let states = &ens.particles;
    let momentum = crate::mechanics::linear_momentum(states)?;
    let angular = generalized_angular_momentum(states, ens.manifold)?;
    let energy = crate::mechanics::kinetic_energy(states)?;
    let n = states.len() as f64;
    let mean_px = states.iter().map(|s| s.momentum[0]).sum::<f64>() / n;
    let mean_py = states.iter().map(|s| s.momentum[1]).sum::<f64>() / n;
    let m2_px = states
        .iter()
        .map(|s| (s.momentum[0] - mean_px) * (s.momentum[0] - mean_px))
        .sum::<f64>()
        / n;
    let m2_py = states
        .iter()
        .map(|s| (s.momentum[1] - mean_py) * (s.momentum[1] - mean_py))
        .sum::<f64>()
        / n;
    let m4_px = states
        .iter()
        .map(|s| (s.momentum[0] - mean_px).powi(4))
        .sum::<f64>()
        / n;
    Ok(EnsembleMoments {
        momentum,
        angular,
        energy,
        m2_px,
        m2_py,
        kurt_px: if m2_px > 0.0 {
            m4_px / (m2_px * m2_px)
        } else {
            0.0
        },
    })
}
