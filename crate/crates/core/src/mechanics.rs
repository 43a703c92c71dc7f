//! Particle phase-space states and the quantities binary interactions
//! conserve: linear momentum, a generalized angular momentum built from the
//! manifold's rotation generators, and kinetic energy. Also hosts the
//! numerical frame-indifference check for single-particle Lagrangians.

use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::manifold::{act, Coeffs, ManifoldSpec, Point, RotationElement, TangentVector};
use crate::rng::Rng;
use std::f64::consts::PI;

/// Phase-space state of one constituent: position, linear momentum, order
/// parameter, conjugate order momentum, mass, and the scalar generalized
/// inertia of the order variable.
///
/// The conjugate momentum convention per manifold:
/// - interval: sigma = inertia * (volume-fraction rate), a scalar;
/// - circle / projective line: sigma = inertia * omega, a scalar;
/// - sphere: sigma = inertia * (director rate), a tangent 3-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleState {
    pub position: Vec3,
    pub momentum: Vec3,
    pub order: Point,
    pub order_momentum: Coeffs,
    pub mass: f64,
    pub inertia: f64,
}

impl ParticleState {
    pub fn new(
        spec: ManifoldSpec,
        position: Vec3,
        momentum: Vec3,
        order: Point,
        order_momentum: Coeffs,
        mass: f64,
        inertia: f64,
    ) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Config(format!(
                "mass must be finite and > 0, got {mass}"
            )));
        }
        if !(inertia.is_finite() && inertia > 0.0) {
            return Err(Error::Config(format!(
                "inertia must be finite and > 0, got {inertia}"
            )));
        }
        spec.validate_point(&order)?;
        if spec.spatial_dim() == 2 && (position[2] != 0.0 || momentum[2] != 0.0) {
            return Err(Error::Config(
                "planar manifolds require zero z components of position and momentum".into(),
            ));
        }
        let order_momentum = match (spec, order_momentum) {
            (ManifoldSpec::SphereS2, Coeffs::Vec3(s)) => {
                let dir = order.director();
                let parallel = linalg::dot(s, dir).abs();
                if parallel > 1e-9 * (1.0 + linalg::norm(s)) {
                    return Err(Error::Config(
                        "sphere order momentum must be orthogonal to the director".into(),
                    ));
                }
                Coeffs::Vec3(linalg::reject(s, dir))
            }
            (ManifoldSpec::SphereS2, other) => {
                return Err(Error::Config(format!(
                    "sphere order momentum must be a tangent vector, got {other:?}"
                )))
            }
            (_, Coeffs::Scalar(s)) => Coeffs::Scalar(s),
            (spec, other) => {
                return Err(Error::Config(format!(
                    "manifold '{}' stores a scalar order momentum, got {other:?}",
                    spec.name()
                )))
            }
        };
        Ok(ParticleState {
            position,
            momentum,
            order,
            order_momentum,
            mass,
            inertia,
        })
    }

    pub fn velocity(&self) -> Vec3 {
        linalg::scale(self.momentum, 1.0 / self.mass)
    }

    /// Rate of change of the order parameter, `B^-1 sigma`.
    pub fn order_rate(&self) -> Coeffs {
        self.order_momentum.scale(1.0 / self.inertia)
    }

    /// Scalar angular velocity for planar rods.
    pub fn omega_scalar(&self) -> f64 {
        self.order_momentum.scalar() / self.inertia
    }

    /// Angular velocity vector of a spherical rod (orthogonal to the
    /// director; spin about the rod axis carries no state).
    pub fn omega_vector(&self) -> Vec3 {
        let dir = self.order.director();
        linalg::scale(
            linalg::cross(dir, self.order_momentum.vec3()),
            1.0 / self.inertia,
        )
    }

    /// Rotational kinetic energy, `sigma . B^-1 sigma / 2`.
    pub fn rotational_energy(&self) -> f64 {
        let s = self.order_momentum.norm();
        0.5 * s * s / self.inertia
    }

    pub fn translational_energy(&self) -> f64 {
        0.5 * linalg::dot(self.momentum, self.momentum) / self.mass
    }
}

/// Conserved quantities of an interaction: total linear momentum, total
/// generalized angular momentum, total kinetic energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantSet {
    pub momentum: Vec3,
    pub angular: AngularMomentum,
    pub energy: f64,
}

/// One component per rotation generator: a scalar in the plane, a 3-vector
/// in space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AngularMomentum {
    Planar(f64),
    Spatial(Vec3),
}

impl InvariantSet {
    /// Flat component list `[P..., L..., E]` for drift bookkeeping.
    pub fn components(&self) -> Vec<f64> {
        let mut out = self.momentum.to_vec();
        match self.angular {
            AngularMomentum::Planar(l) => out.push(l),
            AngularMomentum::Spatial(l) => out.extend_from_slice(&l),
        }
        out.push(self.energy);
        out
    }

    /// Largest componentwise drift against `other`, scaled by
    /// `max(1, |component|)`.
    pub fn max_relative_drift(&self, other: &InvariantSet) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Sum of linear momenta. Deterministic left-to-right reduction.
pub fn linear_momentum(states: &[ParticleState]) -> Result<Vec3> {
    if states.is_empty() {
        return Err(Error::Config("momentum of an empty ensemble".into()));
    }
    let mut total = [0.0; 3];
    for s in states {
        total = linalg::add(total, s.momentum);
    }
    Ok(total)
}

/// Total generalized angular momentum.
///
/// Planar rods contribute the scalar `x^x p^y - x^y p^x + sigma`; spherical
/// rods the 3-vector `x cross p + nu cross sigma` (the segment inertia
/// tensor contracted with omega); the trivial action contributes only the
/// orbital part.
pub fn generalized_angular_momentum(
    states: &[ParticleState],
    spec: ManifoldSpec,
) -> Result<AngularMomentum> {
    if states.is_empty() {
        return Err(Error::Config(
            "angular momentum of an empty ensemble".into(),
        ));
    }
    match spec {
        ManifoldSpec::CircleS1 | ManifoldSpec::ProjectiveRp1 => {
            let mut total = 0.0;
            for s in states {
                total += s.position[0] * s.momentum[1] - s.position[1] * s.momentum[0];
                total += s.order_momentum.scalar();
            }
            Ok(AngularMomentum::Planar(total))
        }
        ManifoldSpec::SphereS2 => {
            let mut total = [0.0; 3];
            for s in states {
                total = linalg::add(total, linalg::cross(s.position, s.momentum));
                total = linalg::add(
                    total,
                    linalg::cross(s.order.director(), s.order_momentum.vec3()),
                );
            }
            Ok(AngularMomentum::Spatial(total))
        }
        ManifoldSpec::Interval01 => {
            let mut total = [0.0; 3];
            for s in states {
                total = linalg::add(total, linalg::cross(s.position, s.momentum));
            }
            Ok(AngularMomentum::Spatial(total))
        }
    }
}

/// Total kinetic energy, translational plus order-parameter part.
pub fn kinetic_energy(states: &[ParticleState]) -> Result<f64> {
    let mut total = 0.0;
    for s in states {
        if s.inertia <= 0.0 {
            return Err(Error::Config("inertia must be positive definite".into()));
        }
        total += s.translational_energy() + s.rotational_energy();
    }
    Ok(total)
}

pub fn invariant_set(states: &[ParticleState], spec: ManifoldSpec) -> Result<InvariantSet> {
    Ok(InvariantSet {
        momentum: linear_momentum(states)?,
        angular: generalized_angular_momentum(states, spec)?,
        energy: kinetic_energy(states)?,
    })
}

/// Ensembles must be homogeneous: identical mass and inertia throughout.
pub fn validate_homogeneous(states: &[ParticleState]) -> Result<()> {
    if let Some(first) = states.first() {
        for s in states.iter().skip(1) {
            if s.mass != first.mass || s.inertia != first.inertia {
                return Err(Error::Config(
                    "mixed masses or inertias in a homogeneous ensemble".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Spin angular momentum of a head-tail rod evaluated through the
/// projective-line generator: the dyad-rate matrix of the action generator
/// double-contracted with the tensor inertia applied to the dyad rate.
/// Numerically equal to the scalar `inertia * omega` bookkeeping.
pub fn projective_spin_contraction(state: &ParticleState) -> f64 {
    let theta = state.order.angle();
    let omega = state.omega_scalar();
    let (s2, c2) = (2.0 * theta).sin_cos();
    // Generator matrix d/dtheta of the dyad, and the dyad rate omega * same.
    let gen = [[-s2, c2], [c2, s2]];
    // Tensor inertia acts as (inertia / 2) times the identity on dyad rates.
    let b_rate = [
        [
            0.5 * state.inertia * omega * gen[0][0],
            0.5 * state.inertia * omega * gen[0][1],
        ],
        [
            0.5 * state.inertia * omega * gen[1][0],
            0.5 * state.inertia * omega * gen[1][1],
        ],
    ];
    let mut total = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            total += gen[i][j] * b_rate[i][j];
        }
    }
    total
}

/// A single-particle Lagrangian of the order variables, evaluated on chart
/// coefficients (scalar rate for one-dimensional manifolds, embedded
/// tangent 3-vector for the sphere).
pub type OrderLagrangian<'a> = &'a dyn Fn(&Point, &Coeffs) -> f64;

/// Numerical frame-indifference check: draw random rotations, points, and
/// rates; transport the rate with a finite-difference tangent map; return
/// the largest deviation of the Lagrangian under the transformation.
///
/// Isotropic quadratic Lagrangians on transitive manifolds come out below
/// 1e-10; anisotropic inertia on the sphere is flagged with an O(1) value.
pub fn check_frame_indifference(
    spec: ManifoldSpec,
    lagrangian: OrderLagrangian,
    samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Config(
            "frame-indifference check needs samples >= 1".into(),
        ));
    }
    let mut rng = Rng::new(rng_seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let point = match spec {
            // Keep the finite-difference curve away from the clamped endpoints.
            ManifoldSpec::Interval01 => Point::Fraction(rng.range(0.25, 0.75)),
            _ => spec.random_point(&mut rng),
        };
        let rate = random_rate(spec, &point, &mut rng);
        let rotation = spec.random_rotation(&mut rng);
        let moved = act(spec, &rotation, &point)?;
        // Both rates go through the same finite-difference pipeline so the
        // retraction bias of the curve cancels in the comparison.
        let identity = RotationElement::identity(rotation.dimension());
        let reference = pushforward_fd(spec, &identity, &point, &rate)?;
        let pushed = pushforward_fd(spec, &rotation, &point, &rate)?;
        let deviation = (lagrangian(&moved, &pushed) - lagrangian(&point, &reference)).abs();
        worst = worst.max(deviation);
    }
    Ok(worst)
}

fn random_rate(spec: ManifoldSpec, point: &Point, rng: &mut Rng) -> Coeffs {
    match spec {
        ManifoldSpec::SphereS2 => {
            let raw = [rng.normal(), rng.normal(), rng.normal()];
            Coeffs::Vec3(linalg::reject(raw, point.director()))
        }
        _ => Coeffs::Scalar(rng.normal()),
    }
}

/// Tangent map of the action at fixed rotation, realized by central finite
/// differences along a chart curve through `point` with velocity `rate`.
/// The action is linear along the curve, so the step size only sets the
/// rounding floor; a coarse step keeps it around 1e-13.
fn pushforward_fd(
    spec: ManifoldSpec,
    rotation: &RotationElement,
    point: &Point,
    rate: &Coeffs,
) -> Result<Coeffs> {
    let eps = 1e-3;
    let curve = |e: f64| -> Point {
        match (point, rate) {
            (Point::Fraction(v), Coeffs::Scalar(r)) => Point::Fraction(v + e * r),
            (Point::Angle(t), Coeffs::Scalar(r)) => spec.canonical(Point::Angle(t + e * r)),
            (Point::Director(v), Coeffs::Vec3(w)) => {
                Point::Director(linalg::normalize(linalg::add(*v, linalg::scale(*w, e))))
            }
            _ => unreachable!("rate representation checked by the caller"),
        }
    };
    let plus = act(spec, rotation, &curve(eps))?;
    let minus = act(spec, rotation, &curve(-eps))?;
    Ok(match (plus, minus) {
        (Point::Fraction(a), Point::Fraction(b)) => Coeffs::Scalar((a - b) / (2.0 * eps)),
        (Point::Angle(a), Point::Angle(b)) => {
            let period = match spec {
                ManifoldSpec::ProjectiveRp1 => PI,
                _ => 2.0 * PI,
            };
            let mut d = a - b;
            if d > period / 2.0 {
                d -= period;
            }
            if d < -period / 2.0 {
                d += period;
            }
            Coeffs::Scalar(d / (2.0 * eps))
        }
        (Point::Director(a), Point::Director(b)) => Coeffs::Vec3([
            (a[0] - b[0]) / (2.0 * eps),
            (a[1] - b[1]) / (2.0 * eps),
            (a[2] - b[2]) / (2.0 * eps),
        ]),
        _ => unreachable!("action preserves the point representation"),
    })
}

/// The isotropic quadratic kinetic Lagrangian `inertia |rate|^2 / 2`.
pub fn isotropic_kinetic(inertia: f64) -> impl Fn(&Point, &Coeffs) -> f64 {
    move |_point: &Point, rate: &Coeffs| {
        let r = rate.norm();
        0.5 * inertia * r * r
    }
}

/// Generalized inertia extracted from a Lagrangian by second differences
/// on the tangent space at `point`; rows/cols follow the chart basis
/// (a deterministic orthonormal tangent frame on the sphere).
pub fn extract_inertia(
    spec: ManifoldSpec,
    lagrangian: OrderLagrangian,
    point: &Point,
) -> Vec<Vec<f64>> {
    // Power-of-two step keeps the quadratic second difference exact.
    let h = 1.0 / 1024.0;
    match spec {
        ManifoldSpec::SphereS2 => {
            let dir = point.director();
            let (e1, e2) = linalg::tangent_basis(dir);
            let basis = [e1, e2];
            let eval = |a: f64, b: f64| {
                let v = linalg::add(linalg::scale(basis[0], a), linalg::scale(basis[1], b));
                lagrangian(point, &Coeffs::Vec3(v))
            };
            let mut m = vec![vec![0.0; 2]; 2];
            let l0 = eval(0.0, 0.0);
            m[0][0] = (eval(h, 0.0) - 2.0 * l0 + eval(-h, 0.0)) / (h * h);
            m[1][1] = (eval(0.0, h) - 2.0 * l0 + eval(0.0, -h)) / (h * h);
            let mixed = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
            m[0][1] = mixed;
            m[1][0] = mixed;
            m
        }
        _ => {
            let eval = |r: f64| lagrangian(point, &Coeffs::Scalar(r));
            vec![vec![(eval(h) - 2.0 * eval(0.0) + eval(-h)) / (h * h)]]
        }
    }
}

/// Infinitesimal generator of the planar orbital action, the 2D analogue of
/// the position cross product; used by the angular-momentum bookkeeping and
/// exposed for tests.
pub fn planar_orbital(position: Vec3, momentum: Vec3) -> f64 {
    position[0] * momentum[1] - position[1] * momentum[0]
}

/// Convenience: tangent vector of the order variable for transport steps.
pub fn order_tangent(state: &ParticleState) -> TangentVector {
    TangentVector {
        base: state.order,
        coeffs: state.order_rate(),
    }
}

/// Free transport of the order variable: advance the chart coordinate with
/// `B^-1 sigma` and re-normalize. A volume fraction that reaches an
/// endpoint sticks there with its conjugate momentum zeroed.
pub fn advect_order(state: &mut ParticleState, spec: ManifoldSpec, dt: f64) {
    let rate = state.order_rate();
    state.order = crate::manifold::chart_step(spec, &state.order, &rate, dt);
    if spec == ManifoldSpec::Interval01 {
        let v = state.order.fraction();
        if v == 0.0 || v == 1.0 {
            state.order_momentum = Coeffs::Scalar(0.0);
        }
    }
    if spec == ManifoldSpec::SphereS2 {
        // Keep the momentum in the tangent plane of the moved director.
        let dir = state.order.director();
        state.order_momentum = Coeffs::Vec3(linalg::reject(state.order_momentum.vec3(), dir));
    }
}
