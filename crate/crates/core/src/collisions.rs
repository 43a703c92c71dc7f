//! Binary collision rules.
//!
//! All rules are elastic (unit restitution in both the linear and the
//! angular channel) and instantaneous: order parameters are left unchanged
//! except for the bubble volume exchange. Offsets `r1`, `r2` in
//! [`CollisionGeometry`] point from each center of mass to the shared
//! contact point, and the unit normal points from particle 1 toward
//! particle 2. With contact-consistent positions the rules conserve linear
//! momentum, generalized angular momentum, and kinetic energy to machine
//! precision.

use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::manifold::{Coeffs, ManifoldSpec, Point};
use crate::mechanics::ParticleState;
use crate::rng::Rng;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollisionRule {
    HardSphere,
    Bubbles,
    Calamitic3d,
    Calamitic2d,
    HeadTail2d,
}

pub const ALL_RULES: [CollisionRule; 5] = [
    CollisionRule::HardSphere,
    CollisionRule::Bubbles,
    CollisionRule::Calamitic3d,
    CollisionRule::Calamitic2d,
    CollisionRule::HeadTail2d,
];

impl CollisionRule {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "hard_sphere" => Ok(CollisionRule::HardSphere),
            "bubbles" => Ok(CollisionRule::Bubbles),
            "calamitic3d" => Ok(CollisionRule::Calamitic3d),
            "calamitic2d" => Ok(CollisionRule::Calamitic2d),
            "headtail2d" => Ok(CollisionRule::HeadTail2d),
            other => Err(Error::Config(format!(
                "unknown collision rule '{other}' (expected hard_sphere, bubbles, calamitic3d, calamitic2d, headtail2d)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CollisionRule::HardSphere => "hard_sphere",
            CollisionRule::Bubbles => "bubbles",
            CollisionRule::Calamitic3d => "calamitic3d",
            CollisionRule::Calamitic2d => "calamitic2d",
            CollisionRule::HeadTail2d => "headtail2d",
        }
    }

    /// Manifold this rule's internal variables live on. Hard spheres carry
    /// no internal exchange and combine with any manifold.
    pub fn compatible_with(&self, spec: ManifoldSpec) -> bool {
        match self {
            CollisionRule::HardSphere => true,
            CollisionRule::Bubbles => spec == ManifoldSpec::Interval01,
            CollisionRule::Calamitic3d => spec == ManifoldSpec::SphereS2,
            CollisionRule::Calamitic2d => spec == ManifoldSpec::CircleS1,
            CollisionRule::HeadTail2d => spec == ManifoldSpec::ProjectiveRp1,
        }
    }

    /// Canonical manifold used when the rule fixes one.
    pub fn canonical_manifold(&self) -> ManifoldSpec {
        match self {
            CollisionRule::HardSphere => ManifoldSpec::Interval01,
            CollisionRule::Bubbles => ManifoldSpec::Interval01,
            CollisionRule::Calamitic3d => ManifoldSpec::SphereS2,
            CollisionRule::Calamitic2d => ManifoldSpec::CircleS1,
            CollisionRule::HeadTail2d => ManifoldSpec::ProjectiveRp1,
        }
    }

    pub fn spatial_dim(&self) -> usize {
        match self {
            CollisionRule::Calamitic2d | CollisionRule::HeadTail2d => 2,
            _ => 3,
        }
    }
}

/// Contact data of one binary event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionGeometry {
    /// Unit contact normal, pointing from particle 1 toward particle 2.
    pub normal: Vec3,
    /// Offset from particle 1's center of mass to the contact point.
    pub r1: Vec3,
    /// Offset from particle 2's center of mass to the contact point.
    pub r2: Vec3,
    /// Head-tail co/counter-rotation selector.
    pub parity: u8,
    /// Fraction of volume exchanged in a bubble event.
    pub exchange_fraction: f64,
}

impl CollisionGeometry {
    pub fn new(normal: Vec3, r1: Vec3, r2: Vec3) -> Result<Self> {
        if (linalg::norm(normal) - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "contact normal must be unit length, |n| = {}",
                linalg::norm(normal)
            )));
        }
        Ok(CollisionGeometry {
            normal,
            r1,
            r2,
            parity: 0,
            exchange_fraction: 0.0,
        })
    }

    pub fn with_parity(mut self, parity: u8) -> Result<Self> {
        if parity > 1 {
            return Err(Error::Config(format!(
                "parity must be 0 or 1, got {parity}"
            )));
        }
        self.parity = parity;
        Ok(self)
    }

    pub fn with_exchange_fraction(mut self, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Config(format!(
                "exchange fraction must lie in [0,1], got {q}"
            )));
        }
        self.exchange_fraction = q;
        Ok(self)
    }
}

/// Post-collision pair plus the scalar impulse that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionOutcome {
    pub first: ParticleState,
    pub second: ParticleState,
    pub impulse: f64,
}

/// Classical elastic exchange of the normal velocity components.
pub fn hard_sphere_collide(v1: Vec3, v2: Vec3, n: Vec3) -> Result<(Vec3, Vec3)> {
    if (linalg::norm(n) - 1.0).abs() > 1e-12 {
        return Err(Error::Config(
            "hard-sphere normal must be unit length".into(),
        ));
    }
    let vn = linalg::dot(n, linalg::sub(v1, v2));
    Ok((
        linalg::sub(v1, linalg::scale(n, vn)),
        linalg::add(v2, linalg::scale(n, vn)),
    ))
}

/// Volume-exchanging bubble collision: hard-sphere velocities plus a convex
/// mix of the volume fractions; the fraction sum is exactly conserved.
pub fn bubble_collide(
    s1: &ParticleState,
    s2: &ParticleState,
    geom: &CollisionGeometry,
) -> Result<CollisionOutcome> {
    let q = geom.exchange_fraction;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Config(format!(
            "exchange fraction must lie in [0,1], got {q}"
        )));
    }
    let impulse =
        -0.5 * s1.mass * linalg::dot(geom.normal, linalg::sub(s2.velocity(), s1.velocity()));
    let (v1, v2) = hard_sphere_collide(s1.velocity(), s2.velocity(), geom.normal)?;
    let n1 = s1.order.fraction();
    let n2 = s2.order.fraction();
    let mut first = *s1;
    let mut second = *s2;
    first.momentum = linalg::scale(v1, s1.mass);
    second.momentum = linalg::scale(v2, s2.mass);
    first.order = Point::Fraction((1.0 - q) * n1 + q * n2);
    second.order = Point::Fraction((1.0 - q) * n2 + q * n1);
    Ok(CollisionOutcome {
        first,
        second,
        impulse,
    })
}

/// Scalar collision impulse of the rigid response model.
///
/// `relative_velocity` is the contact-point velocity of particle 2 minus
/// that of particle 1; `w1`, `w2` are the inverse inertia tensors applied
/// to `r1 x n` and `r2 x n` (minimum-norm pseudo-inverse for singular rod
/// inertias).
pub fn rigid_impulse(
    relative_velocity: Vec3,
    n: Vec3,
    r1: Vec3,
    r2: Vec3,
    w1: Vec3,
    w2: Vec3,
    mass: f64,
) -> Result<f64> {
    let denom =
        2.0 / mass + linalg::dot(linalg::add(linalg::cross(w1, r1), linalg::cross(w2, r2)), n);
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "impulse denominator {denom} is not positive"
        )));
    }
    Ok(-linalg::dot(relative_velocity, n) / denom)
}

/// Pseudo-inverse of the segment inertia tensor `inertia (I - nu nu^T)`
/// applied to a vector: forbids torque along the rod axis.
fn rod_inv_inertia(inertia: f64, director: Vec3, torque: Vec3) -> Vec3 {
    linalg::scale(linalg::reject(torque, director), 1.0 / inertia)
}

/// Rod-rod collision on the sphere: linear and angular velocities updated
/// by the impulse rule, directors untouched.
pub fn calamitic_collide_3d(
    s1: &ParticleState,
    s2: &ParticleState,
    geom: &CollisionGeometry,
) -> Result<CollisionOutcome> {
    let nu1 = s1.order.director();
    let nu2 = s2.order.director();
    let omega1 = s1.omega_vector();
    let omega2 = s2.omega_vector();
    let u1 = linalg::add(s1.velocity(), linalg::cross(omega1, geom.r1));
    let u2 = linalg::add(s2.velocity(), linalg::cross(omega2, geom.r2));
    let w1 = rod_inv_inertia(s1.inertia, nu1, linalg::cross(geom.r1, geom.normal));
    let w2 = rod_inv_inertia(s2.inertia, nu2, linalg::cross(geom.r2, geom.normal));
    let j = rigid_impulse(
        linalg::sub(u2, u1),
        geom.normal,
        geom.r1,
        geom.r2,
        w1,
        w2,
        s1.mass,
    )?;

    let mut first = *s1;
    let mut second = *s2;
    first.momentum = linalg::sub(s1.momentum, linalg::scale(geom.normal, 2.0 * j));
    second.momentum = linalg::add(s2.momentum, linalg::scale(geom.normal, 2.0 * j));
    let omega1_post = linalg::sub(omega1, linalg::scale(w1, 2.0 * j));
    let omega2_post = linalg::add(omega2, linalg::scale(w2, 2.0 * j));
    first.order_momentum = Coeffs::Vec3(linalg::scale(linalg::cross(omega1_post, nu1), s1.inertia));
    second.order_momentum =
        Coeffs::Vec3(linalg::scale(linalg::cross(omega2_post, nu2), s2.inertia));
    Ok(CollisionOutcome {
        first,
        second,
        impulse: j,
    })
}

/// Planar rod-rod collision: the spatial rule restricted to the plane, with
/// the scalar inertia acting about the out-of-plane axis.
pub fn calamitic_collide_2d(
    s1: &ParticleState,
    s2: &ParticleState,
    geom: &CollisionGeometry,
) -> Result<CollisionOutcome> {
    if s1.inertia <= 0.0 || s2.inertia <= 0.0 {
        return Err(Error::Config(
            "planar rods need positive scalar inertia".into(),
        ));
    }
    let omega1 = s1.omega_scalar();
    let omega2 = s2.omega_scalar();
    // omega z-hat cross r, in-plane.
    let spin_vel = |omega: f64, r: Vec3| [-omega * r[1], omega * r[0], 0.0];
    let u1 = linalg::add(s1.velocity(), spin_vel(omega1, geom.r1));
    let u2 = linalg::add(s2.velocity(), spin_vel(omega2, geom.r2));
    let c1 = geom.r1[0] * geom.normal[1] - geom.r1[1] * geom.normal[0];
    let c2 = geom.r2[0] * geom.normal[1] - geom.r2[1] * geom.normal[0];
    let w1 = [0.0, 0.0, c1 / s1.inertia];
    let w2 = [0.0, 0.0, c2 / s2.inertia];
    let j = rigid_impulse(
        linalg::sub(u2, u1),
        geom.normal,
        geom.r1,
        geom.r2,
        w1,
        w2,
        s1.mass,
    )?;

    let mut first = *s1;
    let mut second = *s2;
    first.momentum = linalg::sub(s1.momentum, linalg::scale(geom.normal, 2.0 * j));
    second.momentum = linalg::add(s2.momentum, linalg::scale(geom.normal, 2.0 * j));
    let omega1_post = omega1 - 2.0 * j * c1 / s1.inertia;
    let omega2_post = omega2 + 2.0 * j * c2 / s2.inertia;
    first.order_momentum = Coeffs::Scalar(s1.inertia * omega1_post);
    second.order_momentum = Coeffs::Scalar(s2.inertia * omega2_post);
    Ok(CollisionOutcome {
        first,
        second,
        impulse: j,
    })
}

/// Head-tail variant of the planar rule: the parity bit selects the
/// rotation sense of the first molecule before the impulse is resolved.
pub fn headtail_collide_2d(
    s1: &ParticleState,
    s2: &ParticleState,
    geom: &CollisionGeometry,
) -> Result<CollisionOutcome> {
    if geom.parity > 1 {
        return Err(Error::Config(format!(
            "parity must be 0 or 1, got {}",
            geom.parity
        )));
    }
    let adjusted = parity_adjusted_first(s1, geom.parity);
    let mut out = calamitic_collide_2d(&adjusted, s2, geom)?;
    out.first.order = ManifoldSpec::ProjectiveRp1.canonical(out.first.order);
    out.second.order = ManifoldSpec::ProjectiveRp1.canonical(out.second.order);
    Ok(out)
}

/// The first particle with its rotation sense fixed by the parity gauge.
/// Conservation accounting for parity-1 events compares the outcome against
/// this adjusted pre-state.
pub fn parity_adjusted_first(s1: &ParticleState, parity: u8) -> ParticleState {
    let mut adjusted = *s1;
    if parity == 1 {
        adjusted.order_momentum = Coeffs::Scalar(-s1.order_momentum.scalar());
    }
    adjusted
}

/// Hard-sphere rule lifted to particle states (order variables untouched).
pub fn hard_sphere_states(
    s1: &ParticleState,
    s2: &ParticleState,
    geom: &CollisionGeometry,
) -> Result<CollisionOutcome> {
    let impulse =
        -0.5 * s1.mass * linalg::dot(geom.normal, linalg::sub(s2.velocity(), s1.velocity()));
    let (v1, v2) = hard_sphere_collide(s1.velocity(), s2.velocity(), geom.normal)?;
    let mut first = *s1;
    let mut second = *s2;
    first.momentum = linalg::scale(v1, s1.mass);
    second.momentum = linalg::scale(v2, s2.mass);
    Ok(CollisionOutcome {
        first,
        second,
        impulse,
    })
}

/// Apply the named rule.
pub fn collide(
    rule: CollisionRule,
    s1: &ParticleState,
    s2: &ParticleState,
    geom: &CollisionGeometry,
) -> Result<CollisionOutcome> {
    match rule {
        CollisionRule::HardSphere => hard_sphere_states(s1, s2, geom),
        CollisionRule::Bubbles => bubble_collide(s1, s2, geom),
        CollisionRule::Calamitic3d => calamitic_collide_3d(s1, s2, geom),
        CollisionRule::Calamitic2d => calamitic_collide_2d(s1, s2, geom),
        CollisionRule::HeadTail2d => headtail_collide_2d(s1, s2, geom),
    }
}

/// Rod half-length used when sampling contact offsets along an axis.
pub const ROD_HALF_LENGTH: f64 = 0.5;

/// Draw contact geometry from the rule's reference measure: normals uniform
/// on the circle or sphere, contact offsets uniform along each rod axis,
/// parity and exchange fraction uniform.
pub fn sample_geometry(
    rule: CollisionRule,
    s1: &ParticleState,
    s2: &ParticleState,
    rng: &mut Rng,
) -> Result<CollisionGeometry> {
    let geom = match rule {
        CollisionRule::HardSphere => {
            let n = if rule_is_planar(s1) {
                rng.unit_circle()
            } else {
                rng.unit_sphere()
            };
            CollisionGeometry::new(n, [0.0; 3], [0.0; 3])?
        }
        CollisionRule::Bubbles => {
            let q = rng.f64();
            CollisionGeometry::new(rng.unit_sphere(), [0.0; 3], [0.0; 3])?
                .with_exchange_fraction(q)?
        }
        CollisionRule::Calamitic3d => {
            let n = rng.unit_sphere();
            let r1 = linalg::scale(
                s1.order.director(),
                rng.range(-ROD_HALF_LENGTH, ROD_HALF_LENGTH),
            );
            let r2 = linalg::scale(
                s2.order.director(),
                rng.range(-ROD_HALF_LENGTH, ROD_HALF_LENGTH),
            );
            CollisionGeometry::new(n, r1, r2)?
        }
        CollisionRule::Calamitic2d | CollisionRule::HeadTail2d => {
            let n = rng.unit_circle();
            let axis = |p: &Point| {
                let t = p.angle();
                [t.cos(), t.sin(), 0.0]
            };
            let r1 = linalg::scale(
                axis(&s1.order),
                rng.range(-ROD_HALF_LENGTH, ROD_HALF_LENGTH),
            );
            let r2 = linalg::scale(
                axis(&s2.order),
                rng.range(-ROD_HALF_LENGTH, ROD_HALF_LENGTH),
            );
            let parity = (rng.f64() < 0.5) as u8;
            CollisionGeometry::new(n, r1, r2)?.with_parity(parity)?
        }
    };
    Ok(geom)
}

fn rule_is_planar(s: &ParticleState) -> bool {
    matches!(s.order, Point::Angle(_))
}

/// Dimension of the set of post-collision variables compatible with the
/// rule's conservation constraints.
///
/// The exchanged variables span the ambient space; the constraint Jacobian
/// (linear momentum, the angular quantity the rule constrains, volume sum
/// for bubbles, kinetic energy) is differentiated numerically at post
/// states reached from the base pair through random contact geometry, and
/// its numeric rank is subtracted from the ambient dimension. For the
/// sphere rule the tabled dimension is realized at aligned director pairs,
/// where rotations about the common axis act trivially on the pair.
pub fn post_collision_manifold_dim(
    rule: CollisionRule,
    base: (&ParticleState, &ParticleState),
    probes: usize,
    seed: u64,
) -> Result<usize> {
    let (s1, s2) = base;
    if linalg::norm(linalg::sub(s1.velocity(), s2.velocity())) < 1e-9 {
        return Err(Error::DegenerateGeometry(
            "base pair has vanishing relative velocity".into(),
        ));
    }
    if probes == 0 {
        return Err(Error::Config("need at least one probe".into()));
    }
    let mut rng = Rng::new(seed);
    let ambient = ambient_dim(rule);
    let mut rank_seen: Option<usize> = None;
    let mut produced = 0;
    for _ in 0..probes.max(4) * 4 {
        if produced == probes {
            break;
        }
        let geom = sample_geometry(rule, s1, s2, &mut rng)?;
        let out = match collide(rule, s1, s2, &geom) {
            Ok(out) => out,
            Err(Error::DegenerateGeometry(_)) => continue,
            Err(e) => return Err(e),
        };
        let coords = pack_state(rule, &out.first, &out.second);
        let jac = constraint_jacobian(rule, base, &coords);
        let rank = linalg::numeric_rank(&jac, 1e-8);
        match rank_seen {
            None => rank_seen = Some(rank),
            Some(r) if r != rank => {
                return Err(Error::DegenerateGeometry(format!(
                    "constraint rank varies across probes ({r} vs {rank})"
                )))
            }
            _ => {}
        }
        produced += 1;
    }
    let rank = rank_seen.ok_or_else(|| {
        Error::DegenerateGeometry("no feasible post states found for rank probing".into())
    })?;
    if rank >= ambient {
        return Err(Error::DegenerateGeometry(
            "constraints fill the ambient space".into(),
        ));
    }
    Ok(ambient - rank)
}

fn ambient_dim(rule: CollisionRule) -> usize {
    match rule {
        CollisionRule::HardSphere => 6,
        CollisionRule::Bubbles => 8,
        CollisionRule::Calamitic3d => 10,
        CollisionRule::Calamitic2d | CollisionRule::HeadTail2d => 6,
    }
}

/// Flatten exchanged post-collision variables into ambient coordinates.
fn pack_state(rule: CollisionRule, a: &ParticleState, b: &ParticleState) -> Vec<f64> {
    match rule {
        CollisionRule::HardSphere => {
            let va = a.velocity();
            let vb = b.velocity();
            vec![va[0], va[1], va[2], vb[0], vb[1], vb[2]]
        }
        CollisionRule::Bubbles => {
            let va = a.velocity();
            let vb = b.velocity();
            vec![
                va[0],
                va[1],
                va[2],
                vb[0],
                vb[1],
                vb[2],
                a.order.fraction(),
                b.order.fraction(),
            ]
        }
        CollisionRule::Calamitic3d => {
            let va = a.velocity();
            let vb = b.velocity();
            let rate = |s: &ParticleState| {
                let dir = s.order.director();
                let (e1, e2) = linalg::tangent_basis(dir);
                let nd = s.order_rate().vec3();
                [linalg::dot(nd, e1), linalg::dot(nd, e2)]
            };
            let ta = rate(a);
            let tb = rate(b);
            vec![
                va[0], va[1], va[2], vb[0], vb[1], vb[2], ta[0], ta[1], tb[0], tb[1],
            ]
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
    }
}

/// Conserved quantities as functions of the packed coordinates. Base states
/// supply masses, inertias, and the (unchanged) directors.
fn constraints(rule: CollisionRule, base: (&ParticleState, &ParticleState), x: &[f64]) -> Vec<f64> {
    let (s1, s2) = base;
    let m = s1.mass;
    match rule {
        CollisionRule::HardSphere => {
            let e = 0.5 * m * (x[..3].iter().map(|v| v * v).sum::<f64>())
                + 0.5 * m * (x[3..6].iter().map(|v| v * v).sum::<f64>());
            vec![m * (x[0] + x[3]), m * (x[1] + x[4]), m * (x[2] + x[5]), e]
        }
        CollisionRule::Bubbles => {
            let e = 0.5 * m * (x[..3].iter().map(|v| v * v).sum::<f64>())
                + 0.5 * m * (x[3..6].iter().map(|v| v * v).sum::<f64>());
            vec![
                m * (x[0] + x[3]),
                m * (x[1] + x[4]),
                m * (x[2] + x[5]),
                x[6] + x[7],
                e,
            ]
        }
        CollisionRule::Calamitic3d => {
            let inertia = s1.inertia;
            let (e1a, e2a) = linalg::tangent_basis(s1.order.director());
            let (e1b, e2b) = linalg::tangent_basis(s2.order.director());
            let rate_a = linalg::add(linalg::scale(e1a, x[6]), linalg::scale(e2a, x[7]));
            let rate_b = linalg::add(linalg::scale(e1b, x[8]), linalg::scale(e2b, x[9]));
            let spin = linalg::add(
                linalg::cross(s1.order.director(), linalg::scale(rate_a, inertia)),
                linalg::cross(s2.order.director(), linalg::scale(rate_b, inertia)),
            );
            let e = 0.5 * m * (x[..3].iter().map(|v| v * v).sum::<f64>())
                + 0.5 * m * (x[3..6].iter().map(|v| v * v).sum::<f64>())
                + 0.5 * inertia * linalg::dot(rate_a, rate_a)
                + 0.5 * inertia * linalg::dot(rate_b, rate_b);
            vec![
                m * (x[0] + x[3]),
                m * (x[1] + x[4]),
                m * (x[2] + x[5]),
                spin[0],
                spin[1],
                spin[2],
                e,
            ]
        }
        CollisionRule::Calamitic2d => {
            let inertia = s1.inertia;
            let e = 0.5 * m * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3])
                + 0.5 * inertia * (x[4] * x[4] + x[5] * x[5]);
            vec![
                m * (x[0] + x[2]),
                m * (x[1] + x[3]),
                inertia * (x[4] + x[5]),
                e,
            ]
        }
        CollisionRule::HeadTail2d => {
            // The parity branch spans both rotation senses of the first
            // molecule, so no single angular level set confines the
            // outcome; momentum and energy remain.
            let inertia = s1.inertia;
            let e = 0.5 * m * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3])
                + 0.5 * inertia * (x[4] * x[4] + x[5] * x[5]);
            vec![m * (x[0] + x[2]), m * (x[1] + x[3]), e]
        }
    }
}

fn constraint_jacobian(
    rule: CollisionRule,
    base: (&ParticleState, &ParticleState),
    x: &[f64],
) -> Vec<Vec<f64>> {
    let eps = 1e-5;
    let rows = constraints(rule, base, x).len();
    let cols = x.len();
    let mut jac = vec![vec![0.0; cols]; rows];
    let mut xp = x.to_vec();
    for c in 0..cols {
        xp[c] = x[c] + eps;
        let plus = constraints(rule, base, &xp);
        xp[c] = x[c] - eps;
        let minus = constraints(rule, base, &xp);
        xp[c] = x[c];
        for r in 0..rows {
            jac[r][c] = (plus[r] - minus[r]) / (2.0 * eps);
        }
    }
    jac
}

/// Reflect a state through the y = 0 plane; used by symmetry tests.
pub fn mirror_state(s: &ParticleState) -> ParticleState {
    let flip = |v: Vec3| [v[0], -v[1], v[2]];
    let mut out = *s;
    out.position = flip(s.position);
    out.momentum = flip(s.momentum);
    out.order = match s.order {
        Point::Director(v) => Point::Director(flip(v)),
        Point::Angle(t) => Point::Angle((-t).rem_euclid(2.0 * PI)),
        Point::Fraction(v) => Point::Fraction(v),
    };
    out.order_momentum = match s.order_momentum {
        Coeffs::Vec3(v) => Coeffs::Vec3(flip(v)),
        Coeffs::Scalar(v) => Coeffs::Scalar(-v),
    };
    out
}

pub fn mirror_geometry(g: &CollisionGeometry) -> CollisionGeometry {
    let flip = |v: Vec3| [v[0], -v[1], v[2]];
    CollisionGeometry {
        normal: flip(g.normal),
        r1: flip(g.r1),
        r2: flip(g.r2),
        parity: g.parity,
        exchange_fraction: g.exchange_fraction,
    }
}
