//! Order-parameter manifolds and the rotation action on them.
//!
//! Four manifolds cover the supported microstructures: a volume fraction on
//! the unit interval (rotations act trivially), rod directors on the circle
//! and the sphere (rotations rotate the director), and head-tail symmetric
//! directors on the projective line, parametrized by an angle modulo pi and
//! embedded as the rank-one dyad of the director with itself.
//!
//! Points are stored in chart coordinates (a unit vector for the sphere);
//! embeddings and chart round trips are provided for all four kinds.

use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::rng::Rng;
use std::f64::consts::PI;

pub const TAU: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManifoldSpec {
    /// Volume fraction in [0,1]; trivial rotation action.
    Interval01,
    /// Unit circle, chart angle in [0, 2pi).
    CircleS1,
    /// Projective line, chart angle in [0, pi); theta and theta + pi are
    /// the same point.
    ProjectiveRp1,
    /// Unit sphere, stored as a unit 3-vector.
    SphereS2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionKind {
    Trivial,
    VectorRotation,
    Conjugation,
}

impl ManifoldSpec {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "interval" => Ok(ManifoldSpec::Interval01),
            "s1" => Ok(ManifoldSpec::CircleS1),
            "rp1" => Ok(ManifoldSpec::ProjectiveRp1),
            "s2" => Ok(ManifoldSpec::SphereS2),
            other => Err(Error::Config(format!(
                "unknown manifold '{other}' (expected interval, s1, rp1, s2)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ManifoldSpec::Interval01 => "interval",
            ManifoldSpec::CircleS1 => "s1",
            ManifoldSpec::ProjectiveRp1 => "rp1",
            ManifoldSpec::SphereS2 => "s2",
        }
    }

    /// Intrinsic dimension of the manifold.
    pub fn chart_dim(&self) -> usize {
        match self {
            ManifoldSpec::SphereS2 => 2,
            _ => 1,
        }
    }

    /// Dimension of the linear space the manifold embeds into.
    pub fn embed_dim(&self) -> usize {
        match self {
            ManifoldSpec::Interval01 => 1,
            ManifoldSpec::CircleS1 => 2,
            ManifoldSpec::ProjectiveRp1 => 4,
            ManifoldSpec::SphereS2 => 3,
        }
    }

    /// Spatial dimension of the fluid carrying this microstructure.
    pub fn spatial_dim(&self) -> usize {
        match self {
            ManifoldSpec::CircleS1 | ManifoldSpec::ProjectiveRp1 => 2,
            _ => 3,
        }
    }

    pub fn action_kind(&self) -> ActionKind {
        match self {
            ManifoldSpec::Interval01 => ActionKind::Trivial,
            ManifoldSpec::CircleS1 | ManifoldSpec::SphereS2 => ActionKind::VectorRotation,
            ManifoldSpec::ProjectiveRp1 => ActionKind::Conjugation,
        }
    }

    /// Whether every point is reachable from every other by a rotation.
    pub fn transitive(&self) -> bool {
        !matches!(self, ManifoldSpec::Interval01)
    }

    /// Dimension of the rotation group acting on this manifold (2 or 3).
    pub fn rotation_dim(&self) -> usize {
        self.spatial_dim()
    }

    /// Map a chart value into the fundamental domain.
    pub fn canonical(&self, point: Point) -> Point {
        match (self, point) {
            (ManifoldSpec::Interval01, Point::Fraction(v)) => Point::Fraction(v.clamp(0.0, 1.0)),
            (ManifoldSpec::CircleS1, Point::Angle(t)) => Point::Angle(t.rem_euclid(TAU)),
            (ManifoldSpec::ProjectiveRp1, Point::Angle(t)) => Point::Angle(t.rem_euclid(PI)),
            (ManifoldSpec::SphereS2, Point::Director(v)) => Point::Director(linalg::normalize(v)),
            (_, p) => p,
        }
    }

    pub fn validate_point(&self, point: &Point) -> Result<()> {
        match (self, point) {
            (ManifoldSpec::Interval01, Point::Fraction(v)) => {
                if (0.0..=1.0).contains(v) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("fraction {v} outside [0,1]")))
                }
            }
            (ManifoldSpec::CircleS1, Point::Angle(t)) => {
                if (0.0..TAU).contains(t) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("angle {t} outside [0, 2pi)")))
                }
            }
            (ManifoldSpec::ProjectiveRp1, Point::Angle(t)) => {
                if (0.0..PI).contains(t) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("angle {t} outside [0, pi)")))
                }
            }
            (ManifoldSpec::SphereS2, Point::Director(v)) => {
                if (linalg::norm(*v) - 1.0).abs() < 1e-9 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("director {v:?} is not unit length")))
                }
            }
            (spec, p) => Err(Error::Config(format!(
                "point {p:?} has the wrong representation for manifold '{}'",
                spec.name()
            ))),
        }
    }

    /// Uniform random point (uniform chart value; area measure on the sphere).
    pub fn random_point(&self, rng: &mut Rng) -> Point {
        match self {
            ManifoldSpec::Interval01 => Point::Fraction(rng.f64()),
            ManifoldSpec::CircleS1 => Point::Angle(rng.range(0.0, TAU)),
            ManifoldSpec::ProjectiveRp1 => Point::Angle(rng.range(0.0, PI)),
            ManifoldSpec::SphereS2 => Point::Director(rng.unit_sphere()),
        }
    }

    pub fn random_rotation(&self, rng: &mut Rng) -> RotationElement {
        match self.rotation_dim() {
            2 => RotationElement::Planar {
                angle: rng.range(-PI, PI),
            },
            _ => {
                let axis = rng.unit_sphere();
                let angle = rng.range(-PI, PI);
                RotationElement::Spatial {
                    rotation_vector: linalg::scale(axis, angle),
                }
            }
        }
    }
}

/// A point on one of the four manifolds, in chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Fraction(f64),
    Angle(f64),
    Director(Vec3),
}

impl Point {
    pub fn fraction(&self) -> f64 {
        match self {
            Point::Fraction(v) => *v,
            other => panic!("expected fraction point, got {other:?}"),
        }
    }

    pub fn angle(&self) -> f64 {
        match self {
            Point::Angle(t) => *t,
            other => panic!("expected angle point, got {other:?}"),
        }
    }

    pub fn director(&self) -> Vec3 {
        match self {
            Point::Director(v) => *v,
            other => panic!("expected director point, got {other:?}"),
        }
    }

    /// Director as a 3-vector for any manifold kind (planar charts embed
    /// with zero z); fractions have no direction and report an error.
    pub fn direction(&self) -> Result<Vec3> {
        match self {
            Point::Angle(t) => Ok([t.cos(), t.sin(), 0.0]),
            Point::Director(v) => Ok(*v),
            Point::Fraction(_) => Err(Error::Config("volume fraction carries no direction".into())),
        }
    }
}

/// Tangent-space coefficients: one chart rate for the one-dimensional
/// manifolds, a tangent 3-vector for the sphere. The same representation
/// stores conjugate momenta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coeffs {
    Scalar(f64),
    Vec3(Vec3),
}

impl Coeffs {
    pub fn zero(spec: ManifoldSpec) -> Self {
        match spec {
            ManifoldSpec::SphereS2 => Coeffs::Vec3([0.0; 3]),
            _ => Coeffs::Scalar(0.0),
        }
    }

    pub fn scalar(&self) -> f64 {
        match self {
            Coeffs::Scalar(v) => *v,
            other => panic!("expected scalar coefficients, got {other:?}"),
        }
    }

    pub fn vec3(&self) -> Vec3 {
        match self {
            Coeffs::Vec3(v) => *v,
            other => panic!("expected vector coefficients, got {other:?}"),
        }
    }

    pub fn scale(&self, s: f64) -> Coeffs {
        match self {
            Coeffs::Scalar(v) => Coeffs::Scalar(v * s),
            Coeffs::Vec3(v) => Coeffs::Vec3(linalg::scale(*v, s)),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Coeffs::Scalar(v) => v.abs(),
            Coeffs::Vec3(v) => linalg::norm(*v),
        }
    }
}

/// Embedded representation of points and tangent vectors.
#[derive(Clone, Debug, PartialEq)]
pub enum Embedded {
    Scalar(f64),
    Vec2([f64; 2]),
    Mat2([[f64; 2]; 2]),
    Vec3(Vec3),
}

impl Embedded {
    pub fn flat(&self) -> Vec<f64> {
        match self {
            Embedded::Scalar(v) => vec![*v],
            Embedded::Vec2(v) => v.to_vec(),
            Embedded::Mat2(m) => vec![m[0][0], m[0][1], m[1][0], m[1][1]],
            Embedded::Vec3(v) => v.to_vec(),
        }
    }
}

/// Embed a chart point into the manifold's ambient linear space.
pub fn embed(spec: ManifoldSpec, point: &Point) -> Embedded {
    match (spec, point) {
        (ManifoldSpec::Interval01, Point::Fraction(v)) => Embedded::Scalar(*v),
        (ManifoldSpec::CircleS1, Point::Angle(t)) => Embedded::Vec2([t.cos(), t.sin()]),
        (ManifoldSpec::ProjectiveRp1, Point::Angle(t)) => {
            let (c, s) = (t.cos(), t.sin());
            Embedded::Mat2([[c * c, c * s], [c * s, s * s]])
        }
        (ManifoldSpec::SphereS2, Point::Director(v)) => Embedded::Vec3(*v),
        (spec, p) => panic!("point {p:?} does not belong to '{}'", spec.name()),
    }
}

/// Recover the chart point from an embedded representation, lands in the
/// fundamental domain.
pub fn chart_from_embedding(spec: ManifoldSpec, e: &Embedded) -> Result<Point> {
    match (spec, e) {
        (ManifoldSpec::Interval01, Embedded::Scalar(v)) => {
            Ok(ManifoldSpec::Interval01.canonical(Point::Fraction(*v)))
        }
        (ManifoldSpec::CircleS1, Embedded::Vec2(v)) => {
            Ok(Point::Angle(v[1].atan2(v[0]).rem_euclid(TAU)))
        }
        (ManifoldSpec::ProjectiveRp1, Embedded::Mat2(m)) => {
            // nu nu^T has cos(2t) = m00 - m11 and sin(2t) = 2 m01.
            let two_t = (2.0 * m[0][1]).atan2(m[0][0] - m[1][1]);
            Ok(Point::Angle((0.5 * two_t).rem_euclid(PI)))
        }
        (ManifoldSpec::SphereS2, Embedded::Vec3(v)) => {
            if linalg::norm(*v) == 0.0 {
                return Err(Error::Config("cannot normalize the zero vector".into()));
            }
            Ok(Point::Director(linalg::normalize(*v)))
        }
        (spec, e) => Err(Error::Config(format!(
            "embedding {e:?} does not match manifold '{}'",
            spec.name()
        ))),
    }
}

/// Spherical chart (polar, azimuth) for the sphere; the two-dimensional
/// chart backing `chart_dim() == 2`.
pub fn sphere_chart(point: &Point) -> [f64; 2] {
    let v = point.director();
    [
        v[2].clamp(-1.0, 1.0).acos(),
        v[1].atan2(v[0]).rem_euclid(TAU),
    ]
}

pub fn sphere_from_chart(chart: [f64; 2]) -> Point {
    let (polar, azimuth) = (chart[0], chart[1]);
    Point::Director([
        polar.sin() * azimuth.cos(),
        polar.sin() * azimuth.sin(),
        polar.cos(),
    ])
}

/// A rotation, parametrized by an angle in the plane or by an axis-angle
/// rotation vector in space. The same storage doubles as the corresponding
/// algebra element (an angular rate) where generators are concerned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RotationElement {
    Planar { angle: f64 },
    Spatial { rotation_vector: Vec3 },
}

impl RotationElement {
    pub fn identity(dim: usize) -> Self {
        match dim {
            2 => RotationElement::Planar { angle: 0.0 },
            _ => RotationElement::Spatial {
                rotation_vector: [0.0; 3],
            },
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            RotationElement::Planar { .. } => 2,
            RotationElement::Spatial { .. } => 3,
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            RotationElement::Planar { angle } => RotationElement::Planar { angle: -angle },
            RotationElement::Spatial { rotation_vector } => RotationElement::Spatial {
                rotation_vector: linalg::scale(*rotation_vector, -1.0),
            },
        }
    }

    /// Scale the underlying algebra element; `exp(eps q)` for generators.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            RotationElement::Planar { angle } => RotationElement::Planar {
                angle: angle * factor,
            },
            RotationElement::Spatial { rotation_vector } => RotationElement::Spatial {
                rotation_vector: linalg::scale(*rotation_vector, factor),
            },
        }
    }

    /// Apply to a 3-vector. Planar rotations act on the xy components and
    /// keep z; spatial rotations use the closed axis-angle form with a
    /// series fallback near zero angle.
    pub fn apply(&self, v: Vec3) -> Vec3 {
        match self {
            RotationElement::Planar { angle } => {
                let (s, c) = angle.sin_cos();
                [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
            }
            RotationElement::Spatial { rotation_vector: q } => {
                let theta2 = linalg::dot(*q, *q);
                let (a, b) = if theta2 < 1e-8 {
                    // sin(t)/t and (1-cos(t))/t^2 expanded around zero.
                    (
                        1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
                        0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
                    )
                } else {
                    let theta = theta2.sqrt();
                    ((theta.sin()) / theta, (1.0 - theta.cos()) / theta2)
                };
                let qv = linalg::cross(*q, v);
                let qqv = linalg::cross(*q, qv);
                linalg::add(v, linalg::add(linalg::scale(qv, a), linalg::scale(qqv, b)))
            }
        }
    }

    /// Group composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (RotationElement::Planar { angle: a }, RotationElement::Planar { angle: b }) => {
                Ok(RotationElement::Planar { angle: a + b })
            }
            (
                RotationElement::Spatial { rotation_vector: a },
                RotationElement::Spatial { rotation_vector: b },
            ) => {
                let qa = quat_from_rotvec(*a);
                let qb = quat_from_rotvec(*b);
                Ok(RotationElement::Spatial {
                    rotation_vector: rotvec_from_quat(quat_mul(qa, qb)),
                })
            }
            _ => Err(Error::Config(
                "cannot compose planar and spatial rotations".into(),
            )),
        }
    }
}

fn quat_from_rotvec(q: Vec3) -> [f64; 4] {
    let theta = linalg::norm(q);
    if theta < 1e-12 {
        [1.0, 0.5 * q[0], 0.5 * q[1], 0.5 * q[2]]
    } else {
        let half = 0.5 * theta;
        let s = half.sin() / theta;
        [half.cos(), s * q[0], s * q[1], s * q[2]]
    }
}

fn rotvec_from_quat(q: [f64; 4]) -> Vec3 {
    let v = [q[1], q[2], q[3]];
    let n = linalg::norm(v);
    if n < 1e-12 {
        return linalg::scale(v, 2.0 / q[0].max(1e-300));
    }
    let angle = 2.0 * n.atan2(q[0]);
    linalg::scale(v, angle / n)
}

fn quat_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Tangent vector at a point, stored as chart coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub coeffs: Coeffs,
}

impl TangentVector {
    /// Embedded representation of the tangent vector.
    pub fn embedded(&self, spec: ManifoldSpec) -> Embedded {
        match (spec, &self.base, &self.coeffs) {
            (ManifoldSpec::Interval01, Point::Fraction(_), Coeffs::Scalar(r)) => {
                Embedded::Scalar(*r)
            }
            (ManifoldSpec::CircleS1, Point::Angle(t), Coeffs::Scalar(r)) => {
                Embedded::Vec2([-r * t.sin(), r * t.cos()])
            }
            (ManifoldSpec::ProjectiveRp1, Point::Angle(t), Coeffs::Scalar(r)) => {
                let (s2, c2) = (2.0 * t).sin_cos();
                Embedded::Mat2([[-r * s2, r * c2], [r * c2, r * s2]])
            }
            (ManifoldSpec::SphereS2, Point::Director(_), Coeffs::Vec3(v)) => Embedded::Vec3(*v),
            (spec, base, coeffs) => panic!(
                "tangent ({base:?}, {coeffs:?}) does not match manifold '{}'",
                spec.name()
            ),
        }
    }
}

fn check_dimensions(spec: ManifoldSpec, rotation: &RotationElement) -> Result<()> {
    // The trivial action absorbs rotations of either dimension.
    if spec == ManifoldSpec::Interval01 {
        return Ok(());
    }
    if rotation.dimension() != spec.rotation_dim() {
        return Err(Error::Config(format!(
            "{}-dimensional rotation applied to manifold '{}' (expects {}d)",
            rotation.dimension(),
            spec.name(),
            spec.rotation_dim()
        )));
    }
    Ok(())
}

/// Apply a rotation to an order parameter.
pub fn act(spec: ManifoldSpec, rotation: &RotationElement, point: &Point) -> Result<Point> {
    check_dimensions(spec, rotation)?;
    spec.validate_point(point)?;
    let out = match (spec, rotation) {
        (ManifoldSpec::Interval01, _) => *point,
        (ManifoldSpec::CircleS1, RotationElement::Planar { angle }) => {
            Point::Angle((point.angle() + angle).rem_euclid(TAU))
        }
        (ManifoldSpec::ProjectiveRp1, RotationElement::Planar { angle }) => {
            Point::Angle((point.angle() + angle).rem_euclid(PI))
        }
        (ManifoldSpec::SphereS2, rot @ RotationElement::Spatial { .. }) => {
            Point::Director(linalg::normalize(rot.apply(point.director())))
        }
        _ => unreachable!("dimension check rules out the remaining combinations"),
    };
    Ok(out)
}

/// Differential of the orbit map at the identity: the tangent vector the
/// algebra element `rate` induces at `point`.
pub fn infinitesimal_generator(
    spec: ManifoldSpec,
    point: &Point,
    rate: &RotationElement,
) -> Result<TangentVector> {
    check_dimensions(spec, rate)?;
    spec.validate_point(point)?;
    let coeffs = match (spec, rate) {
        (ManifoldSpec::Interval01, _) => Coeffs::Scalar(0.0),
        (ManifoldSpec::CircleS1, RotationElement::Planar { angle })
        | (ManifoldSpec::ProjectiveRp1, RotationElement::Planar { angle }) => {
            Coeffs::Scalar(*angle)
        }
        (ManifoldSpec::SphereS2, RotationElement::Spatial { rotation_vector }) => {
            Coeffs::Vec3(linalg::cross(*rotation_vector, point.director()))
        }
        _ => unreachable!("dimension check rules out the remaining combinations"),
    };
    Ok(TangentVector {
        base: *point,
        coeffs,
    })
}

/// First-order retraction: advance the chart coordinate by `rate * dt` and
/// re-normalize into the fundamental domain. The interval clamps at its
/// endpoints; the caller is responsible for zeroing the conjugate momentum
/// on contact.
pub fn chart_step(spec: ManifoldSpec, point: &Point, rate: &Coeffs, dt: f64) -> Point {
    match (spec, point, rate) {
        (ManifoldSpec::Interval01, Point::Fraction(v), Coeffs::Scalar(r)) => {
            Point::Fraction((v + r * dt).clamp(0.0, 1.0))
        }
        (ManifoldSpec::CircleS1, Point::Angle(t), Coeffs::Scalar(r)) => {
            Point::Angle((t + r * dt).rem_euclid(TAU))
        }
        (ManifoldSpec::ProjectiveRp1, Point::Angle(t), Coeffs::Scalar(r)) => {
            Point::Angle((t + r * dt).rem_euclid(PI))
        }
        (ManifoldSpec::SphereS2, Point::Director(v), Coeffs::Vec3(step)) => {
            Point::Director(linalg::normalize(linalg::add(*v, linalg::scale(*step, dt))))
        }
        (spec, p, r) => panic!(
            "chart_step({p:?}, {r:?}) does not match manifold '{}'",
            spec.name()
        ),
    }
}
