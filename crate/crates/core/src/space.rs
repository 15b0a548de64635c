//! Compact metric spaces used by the built-in scenarios.
//!
//! A [`Point`] carries a scenario tag and stratum-aware coordinates. The
//! [`MetricSpace`] owns the metric, the diameter bound, the stratified sampler
//! and a neighbourhood sampler used by the stability probes.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Two points closer than this are treated as the same point.
pub const POINT_EQ_TOL: f64 = 1e-9;

/// Names of the built-in scenarios. Doubles as the scenario tag on points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    Rotation,
    RationalRotation,
    VaryingAngleCylinder,
    SpiralTwoCircles,
    SpiralIdentified,
    TripleCone,
    DyadicProduct,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::Rotation,
        ScenarioId::RationalRotation,
        ScenarioId::VaryingAngleCylinder,
        ScenarioId::SpiralTwoCircles,
        ScenarioId::SpiralIdentified,
        ScenarioId::TripleCone,
        ScenarioId::DyadicProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Rotation => "rotation",
            ScenarioId::RationalRotation => "rational_rotation",
            ScenarioId::VaryingAngleCylinder => "varying_angle_cylinder",
            ScenarioId::SpiralTwoCircles => "spiral_two_circles",
            ScenarioId::SpiralIdentified => "spiral_identified",
            ScenarioId::TripleCone => "triple_cone",
            ScenarioId::DyadicProduct => "dyadic_product",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown scenario `{s}`")))
    }
}

/// A coordinate of the sequence J = {0} ∪ {1/n : n ≥ 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JLevel {
    Limit,
    Inv(u32),
}

impl JLevel {
    pub fn value(self) -> f64 {
        match self {
            JLevel::Limit => 0.0,
            JLevel::Inv(n) => 1.0 / n as f64,
        }
    }
}

impl fmt::Display for JLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JLevel::Limit => f.write_str("0"),
            JLevel::Inv(n) => write!(f, "1/{n}"),
        }
    }
}

impl FromStr for JLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(JLevel::Limit);
        }
        let n = match s.strip_prefix("1/") {
            Some(rest) => rest.parse::<u32>().ok(),
            None if s == "1" => Some(1),
            None => None,
        };
        match n {
            Some(n) if n >= 1 => Ok(JLevel::Inv(n)),
            _ => Err(Error::domain(format!("bad J-level `{s}` (expected 0 or 1/n)"))),
        }
    }
}

/// Coordinates on the spiral scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpiralCoord {
    /// S₊ at height +1.
    Upper { t: f64 },
    /// S₋ at height −1.
    Lower { t: f64 },
    /// The single circle of the identified variant.
    Circle { t: f64 },
    /// The spiral Σ, parameter τ.
    Spiral { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConeCoord {
    Apex,
    /// Circle number `ring` (nonzero, sign gives the nappe) of cone `copy`.
    Ring { ring: i32, copy: u8, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coords {
    Circle { t: f64 },
    Cylinder { level: JLevel, t: f64 },
    Spiral(SpiralCoord),
    Cone(ConeCoord),
    /// `bits` holds d_k in bit k-1.
    Dyadic { level: JLevel, bits: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub scenario: ScenarioId,
    pub coords: Coords,
}

impl Point {
    pub fn new(scenario: ScenarioId, coords: Coords) -> Self {
        Point { scenario, coords }
    }

    pub fn stratum(&self) -> Stratum {
        match self.coords {
            Coords::Circle { .. } => Stratum::Circle,
            Coords::Cylinder { level, .. } | Coords::Dyadic { level, .. } => Stratum::Level(level),
            Coords::Spiral(SpiralCoord::Upper { .. }) => Stratum::UpperCircle,
            Coords::Spiral(SpiralCoord::Lower { .. }) => Stratum::LowerCircle,
            Coords::Spiral(SpiralCoord::Circle { .. }) => Stratum::Circle,
            Coords::Spiral(SpiralCoord::Spiral { .. }) => Stratum::Spiral,
            Coords::Cone(ConeCoord::Apex) => Stratum::Apex,
            Coords::Cone(ConeCoord::Ring { ring, .. }) => Stratum::Ring(ring),
        }
    }

    /// Angular coordinate in [0, 1), where one is defined.
    pub fn angle(&self) -> Option<f64> {
        match self.coords {
            Coords::Circle { t } | Coords::Cylinder { t, .. } => Some(t),
            Coords::Spiral(SpiralCoord::Upper { t } | SpiralCoord::Lower { t } | SpiralCoord::Circle { t }) => Some(t),
            Coords::Spiral(SpiralCoord::Spiral { tau }) => Some(wrap_unit(tau)),
            Coords::Cone(ConeCoord::Ring { t, .. }) => Some(t),
            _ => None,
        }
    }

    /// J coordinate for the leveled spaces.
    pub fn level(&self) -> Option<JLevel> {
        match self.coords {
            Coords::Cylinder { level, .. } | Coords::Dyadic { level, .. } => Some(level),
            _ => None,
        }
    }

    /// Position in the ambient R³ for the spiral and cone scenarios.
    pub fn ambient(&self) -> Option<[f64; 3]> {
        match self.coords {
            Coords::Spiral(c) => Some(match c {
                SpiralCoord::Upper { t } => circle_at(t, 1.0, 1.0),
                SpiralCoord::Lower { t } => circle_at(t, 1.0, -1.0),
                SpiralCoord::Circle { t } => circle_at(t, 1.0, 1.0),
                SpiralCoord::Spiral { tau } => circle_at(tau, 1.0, spiral_height(tau)),
            }),
            Coords::Cone(ConeCoord::Apex) => Some([0.0; 3]),
            Coords::Cone(ConeCoord::Ring { ring, t, .. }) => {
                let h = ring_height(ring);
                Some(circle_at(t, h.abs(), h))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coords {
            Coords::Circle { t } => write!(f, "t={t}"),
            Coords::Cylinder { level, t } => write!(f, "j={level};t={t}"),
            Coords::Spiral(SpiralCoord::Upper { t }) => write!(f, "plus;t={t}"),
            Coords::Spiral(SpiralCoord::Lower { t }) => write!(f, "minus;t={t}"),
            Coords::Spiral(SpiralCoord::Circle { t }) => write!(f, "circle;t={t}"),
            Coords::Spiral(SpiralCoord::Spiral { tau }) => write!(f, "sigma;tau={tau}"),
            Coords::Cone(ConeCoord::Apex) => f.write_str("apex"),
            Coords::Cone(ConeCoord::Ring { ring, copy, t }) => write!(f, "ring={ring};copy={copy};t={t}"),
            Coords::Dyadic { level, bits } => {
                write!(f, "j={level};bits=")?;
                // Trailing zeros are dropped; at least one digit is printed.
                let len = (64 - bits.leading_zeros()).max(1);
                for k in 0..len {
                    f.write_str(if bits >> k & 1 == 1 { "1" } else { "0" })?;
                }
                Ok(())
            }
        }
    }
}

/// Height of the spiral Σ at parameter τ.
pub fn spiral_height(tau: f64) -> f64 {
    FRAC_PI_2.recip() * tau.atan()
}

/// Height of cone circle `ring`: sign(ring)/|ring|.
pub fn ring_height(ring: i32) -> f64 {
    (ring.signum() as f64) / (ring.unsigned_abs() as f64)
}

pub(crate) fn wrap_unit(t: f64) -> f64 {
    let w = t.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn circle_at(t: f64, radius: f64, z: f64) -> [f64; 3] {
    let (s, c) = (TAU * t).sin_cos();
    [radius * c, radius * s, z]
}

/// Distance on the circle R/Z.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn euclid<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Σ_k 2^{-k} over the set bits of `diff` (bit k-1 is coordinate k).
pub fn dyadic_weight(mut diff: u64) -> f64 {
    let mut w = 0.0;
    while diff != 0 {
        let k = diff.trailing_zeros() as i32;
        w += 2f64.powi(-(k + 1));
        diff &= diff - 1;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stratum {
    Circle,
    UpperCircle,
    LowerCircle,
    Spiral,
    Apex,
    Ring(i32),
    Level(JLevel),
}

/// Metric model of a scenario's space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// R/Z with the arc metric.
    Circle,
    /// J × S¹ with |Δj| + arc distance.
    Cylinder { levels: u32 },
    /// S₊ ∪ S₋ ∪ Σ in R³ with the chord metric.
    Spiral,
    /// The quotient S₊ = S₋, measured through an injective R⁴ embedding.
    SpiralIdentified,
    /// Three double cones glued at the apex.
    TripleCone { levels: u32 },
    /// J × D with D truncated to `depth` binary coordinates.
    Dyadic { levels: u32, depth: u32 },
}

/// Coordinates for spatial hashing: every feature moves by at most the
/// distance between two points.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Features {
    pub values: [f64; 4],
    pub dims: usize,
}

#[derive(Debug, Clone)]
pub struct MetricSpace {
    scenario: ScenarioId,
    geometry: Geometry,
    strata: Vec<Stratum>,
}

impl MetricSpace {
    pub fn new(scenario: ScenarioId, geometry: Geometry) -> Self {
        let strata = match geometry {
            Geometry::Circle => vec![Stratum::Circle],
            Geometry::Spiral => vec![Stratum::UpperCircle, Stratum::LowerCircle, Stratum::Spiral],
            Geometry::SpiralIdentified => vec![Stratum::Circle, Stratum::Spiral],
            Geometry::Cylinder { levels } | Geometry::Dyadic { levels, .. } => std::iter::once(JLevel::Limit)
                .chain((1..=levels).map(JLevel::Inv))
                .map(Stratum::Level)
                .collect(),
            Geometry::TripleCone { levels } => std::iter::once(Stratum::Apex)
                .chain((1..=levels as i32).flat_map(|k| [Stratum::Ring(k), Stratum::Ring(-k)]))
                .collect(),
        };
        MetricSpace { scenario, geometry, strata }
    }

    pub fn scenario(&self) -> ScenarioId {
        self.scenario
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Strata the sampler draws from, in round-robin order.
    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn diameter(&self) -> f64 {
        match self.geometry {
            Geometry::Circle => 0.5,
            Geometry::Cylinder { .. } => 1.5,
            Geometry::Spiral | Geometry::TripleCone { .. } => 2.0 * SQRT_2,
            // (x, y) spans 2, 1 - z² spans 1, z(1 - z²) spans 4/(3√3).
            Geometry::SpiralIdentified => (4.0 + 1.0 + (4.0 / (3.0 * 3f64.sqrt())).powi(2)).sqrt(),
            Geometry::Dyadic { depth, .. } => 2.0 - 2f64.powi(-(depth as i32)),
        }
    }

    pub fn depth(&self) -> Option<u32> {
        match self.geometry {
            Geometry::Dyadic { depth, .. } => Some(depth),
            _ => None,
        }
    }

    /// Checks the scenario tag and the stratum constraints of `p`.
    pub fn validate(&self, p: &Point) -> Result<()> {
        if p.scenario != self.scenario {
            return Err(Error::domain(format!(
                "point from `{}` used in `{}`",
                p.scenario, self.scenario
            )));
        }
        let unit = |t: f64| (0.0..1.0).contains(&t);
        let level_ok = |l: JLevel| !matches!(l, JLevel::Inv(0));
        let ok = match (self.geometry, p.coords) {
            (Geometry::Circle, Coords::Circle { t }) => unit(t),
            (Geometry::Cylinder { .. }, Coords::Cylinder { level, t }) => unit(t) && level_ok(level),
            (Geometry::Spiral, Coords::Spiral(c)) => match c {
                SpiralCoord::Upper { t } | SpiralCoord::Lower { t } => unit(t),
                SpiralCoord::Spiral { tau } => tau.is_finite(),
                SpiralCoord::Circle { .. } => false,
            },
            (Geometry::SpiralIdentified, Coords::Spiral(c)) => match c {
                SpiralCoord::Circle { t } => unit(t),
                SpiralCoord::Spiral { tau } => tau.is_finite(),
                _ => false,
            },
            (Geometry::TripleCone { .. }, Coords::Cone(c)) => match c {
                ConeCoord::Apex => true,
                ConeCoord::Ring { ring, copy, t } => ring != 0 && copy < 3 && unit(t),
            },
            (Geometry::Dyadic { depth, .. }, Coords::Dyadic { level, bits }) => {
                level_ok(level) && (depth >= 64 || bits >> depth == 0)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("point `{p}` violates the constraints of `{}`", self.scenario)))
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        if x.scenario != self.scenario || y.scenario != self.scenario {
            return Err(Error::domain(format!(
                "distance between `{}` and `{}` points in `{}`",
                x.scenario, y.scenario, self.scenario
            )));
        }
        self.metric(x, y)
            .ok_or_else(|| Error::domain(format!("points `{x}` and `{y}` do not belong to `{}`", self.scenario)))
    }

    /// The metric without scenario checks; `None` on coordinate mismatch.
    pub(crate) fn metric(&self, x: &Point, y: &Point) -> Option<f64> {
        Some(match (self.geometry, x.coords, y.coords) {
            (Geometry::Circle, Coords::Circle { t: a }, Coords::Circle { t: b }) => arc_distance(a, b),
            (Geometry::Cylinder { .. }, Coords::Cylinder { level: la, t: a }, Coords::Cylinder { level: lb, t: b }) => {
                (la.value() - lb.value()).abs() + arc_distance(a, b)
            }
            (Geometry::Spiral, Coords::Spiral(_), Coords::Spiral(_)) => euclid(&x.ambient()?, &y.ambient()?),
            (Geometry::SpiralIdentified, Coords::Spiral(a), Coords::Spiral(b)) => {
                euclid(&identified_embedding(a), &identified_embedding(b))
            }
            (Geometry::TripleCone { .. }, Coords::Cone(a), Coords::Cone(b)) => cone_distance(a, b),
            (Geometry::Dyadic { .. }, Coords::Dyadic { level: la, bits: a }, Coords::Dyadic { level: lb, bits: b }) => {
                (la.value() - lb.value()).abs() + dyadic_weight(a ^ b)
            }
            _ => return None,
        })
    }

    /// Distance for points already known to be valid members of this space.
    pub(crate) fn dist(&self, x: &Point, y: &Point) -> f64 {
        self.metric(x, y).expect("points validated against this space")
    }

    pub fn same_point(&self, x: &Point, y: &Point) -> bool {
        self.metric(x, y).is_some_and(|d| d <= POINT_EQ_TOL)
    }

    pub(crate) fn features(&self, p: &Point) -> Features {
        let circ = |t: f64| {
            let (s, c) = (TAU * t).sin_cos();
            (c / TAU, s / TAU)
        };
        match p.coords {
            Coords::Circle { t } => {
                let (a, b) = circ(t);
                Features { values: [a, b, 0.0, 0.0], dims: 2 }
            }
            Coords::Cylinder { level, t } => {
                let (a, b) = circ(t);
                Features { values: [level.value(), a, b, 0.0], dims: 3 }
            }
            Coords::Spiral(c) if self.geometry == Geometry::SpiralIdentified => {
                Features { values: identified_embedding(c), dims: 4 }
            }
            Coords::Spiral(_) => {
                let [a, b, c] = p.ambient().unwrap_or([0.0; 3]);
                Features { values: [a, b, c, 0.0], dims: 3 }
            }
            Coords::Cone(c) => {
                let [a, b, h] = p.ambient().unwrap_or([0.0; 3]);
                // Each copy is turned about the x-axis so the copies separate.
                let copy = match c {
                    ConeCoord::Apex => 0,
                    ConeCoord::Ring { copy, .. } => copy,
                };
                let (s, co) = (TAU * copy as f64 / 3.0).sin_cos();
                Features { values: [a, co * b - s * h, s * b + co * h, 0.0], dims: 3 }
            }
            Coords::Dyadic { level, bits } => {
                let v: f64 = (0..64).filter(|k| bits >> k & 1 == 1).map(|k| 2f64.powi(-(k + 1))).sum();
                Features { values: [level.value(), v, 0.0, 0.0], dims: 2 }
            }
        }
    }

    /// Parses the textual point form produced by `Display`.
    pub fn parse_point(&self, s: &str) -> Result<Point> {
        let s = s.trim();
        let mut tag = None;
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    fields.insert(k.trim(), v.trim());
                }
                None => tag = Some(part),
            }
        }
        let bad = |what: &str| Error::domain(format!("cannot parse point `{s}`: {what}"));
        let real = |key: &str| -> Result<f64> {
            fields
                .get(key)
                .ok_or_else(|| bad(&format!("missing `{key}`")))?
                .parse::<f64>()
                .map_err(|_| bad(&format!("bad number for `{key}`")))
        };
        let coords = match self.geometry {
            Geometry::Circle => Coords::Circle { t: real("t")? },
            Geometry::Cylinder { .. } => Coords::Cylinder {
                level: fields.get("j").ok_or_else(|| bad("missing `j`"))?.parse()?,
                t: real("t")?,
            },
            Geometry::Spiral | Geometry::SpiralIdentified => Coords::Spiral(match tag {
                Some("plus") => SpiralCoord::Upper { t: real("t")? },
                Some("minus") => SpiralCoord::Lower { t: real("t")? },
                Some("circle") => SpiralCoord::Circle { t: real("t")? },
                Some("sigma") => SpiralCoord::Spiral { tau: real("tau")? },
                _ => return Err(bad("expected plus, minus, circle or sigma")),
            }),
            Geometry::TripleCone { .. } => Coords::Cone(match tag {
                Some("apex") => ConeCoord::Apex,
                _ => ConeCoord::Ring {
                    ring: real("ring")? as i32,
                    copy: real("copy")? as u8,
                    t: real("t")?,
                },
            }),
            Geometry::Dyadic { .. } => {
                let raw = fields.get("bits").copied().unwrap_or("0");
                if raw.len() > 64 || !raw.chars().all(|c| c == '0' || c == '1') {
                    return Err(bad("bits must be a 0/1 string of length at most 64"));
                }
                let bits = raw
                    .chars()
                    .enumerate()
                    .fold(0u64, |acc, (k, c)| if c == '1' { acc | 1 << k } else { acc });
                Coords::Dyadic {
                    level: fields.get("j").ok_or_else(|| bad("missing `j`"))?.parse()?,
                    bits,
                }
            }
        };
        let p = Point::new(self.scenario, coords);
        self.validate(&p)?;
        Ok(p)
    }

    /// Draws `count` points, cycling through the strata so that each one gets
    /// a positive share. The sequence for `count` is a prefix of the sequence
    /// for any larger count with the same seed.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| {
                let stratum = self.strata[i % self.strata.len()];
                self.sample_in(stratum, &mut rng)
            })
            .collect()
    }

    fn sample_in(&self, stratum: Stratum, rng: &mut ChaCha8Rng) -> Point {
        let t: f64 = rng.random();
        let coords = match (self.geometry, stratum) {
            (Geometry::Circle, _) => Coords::Circle { t },
            (Geometry::Cylinder { .. }, Stratum::Level(level)) => Coords::Cylinder { level, t },
            (Geometry::Spiral | Geometry::SpiralIdentified, s) => Coords::Spiral(match s {
                Stratum::UpperCircle => SpiralCoord::Upper { t },
                Stratum::LowerCircle => SpiralCoord::Lower { t },
                Stratum::Circle => SpiralCoord::Circle { t },
                _ => {
                    // Uniform height in (-0.95, 0.95) keeps τ moderate.
                    let z: f64 = rng.random_range(-0.95..0.95);
                    SpiralCoord::Spiral { tau: (z * FRAC_PI_2).tan() }
                }
            }),
            (Geometry::TripleCone { .. }, Stratum::Ring(ring)) => Coords::Cone(ConeCoord::Ring {
                ring,
                copy: rng.random_range(0..3),
                t,
            }),
            (Geometry::TripleCone { .. }, _) => Coords::Cone(ConeCoord::Apex),
            (Geometry::Dyadic { depth, .. }, Stratum::Level(level)) => Coords::Dyadic {
                level,
                bits: rng.random::<u64>() & low_mask(depth),
            },
            _ => unreachable!("strata are built from the geometry"),
        };
        Point::new(self.scenario, coords)
    }

    /// Draws a point strictly within `radius` of `x`, or `None` after a bounded
    /// number of rejected proposals.
    pub fn sample_near(&self, x: &Point, radius: f64, rng: &mut impl Rng) -> Option<Point> {
        for _ in 0..64 {
            let scale = radius * rng.random_range(0.05..1.0);
            let y = Point::new(self.scenario, self.propose_near(x, scale, rng)?);
            if self.dist(x, &y) < radius {
                return Some(y);
            }
        }
        None
    }

    fn propose_near(&self, x: &Point, r: f64, rng: &mut impl Rng) -> Option<Coords> {
        let jitter = |rng: &mut dyn rand::RngCore, t: f64, w: f64| wrap_unit(t + rng.random_range(-w..w));
        let far_level = |rng: &mut dyn rand::RngCore| {
            let m = (2.0 / r).ceil() as u32 + 1;
            JLevel::Inv(rng.random_range(m..=4 * m))
        };
        Some(match x.coords {
            Coords::Circle { t } => Coords::Circle { t: jitter(rng, t, r) },
            Coords::Cylinder { level, t } => {
                if level == JLevel::Limit && rng.random_bool(0.5) {
                    Coords::Cylinder { level: far_level(rng), t: jitter(rng, t, r / 2.0) }
                } else {
                    Coords::Cylinder { level, t: jitter(rng, t, r) }
                }
            }
            Coords::Spiral(c) => {
                let step = r / (TAU * 1.5);
                // Σ enters the r/2-neighbourhood of the circles once |τ| > 4/(πr).
                let far = (4.0 / (PI * r)).ceil() + 1.0;
                let tail = |rng: &mut dyn rand::RngCore, t: f64, sign: f64| {
                    let k = rng.random_range(far..4.0 * far).floor();
                    SpiralCoord::Spiral { tau: sign * k + t + rng.random_range(-step..step) }
                };
                Coords::Spiral(match c {
                    SpiralCoord::Upper { t } if rng.random_bool(0.5) => tail(rng, t, 1.0),
                    SpiralCoord::Lower { t } if rng.random_bool(0.5) => tail(rng, t, -1.0),
                    SpiralCoord::Circle { t } if rng.random_bool(0.5) => {
                        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                        tail(rng, t, sign)
                    }
                    SpiralCoord::Upper { t } => SpiralCoord::Upper { t: jitter(rng, t, step) },
                    SpiralCoord::Lower { t } => SpiralCoord::Lower { t: jitter(rng, t, step) },
                    SpiralCoord::Circle { t } => SpiralCoord::Circle { t: jitter(rng, t, step) },
                    SpiralCoord::Spiral { tau } => SpiralCoord::Spiral { tau: tau + rng.random_range(-step..step) },
                })
            }
            Coords::Cone(ConeCoord::Apex) => {
                let m = (2.0 * SQRT_2 / r).ceil() as i32 + 1;
                let k = rng.random_range(m..=4 * m);
                Coords::Cone(ConeCoord::Ring {
                    ring: if rng.random_bool(0.5) { k } else { -k },
                    copy: rng.random_range(0..3),
                    t: rng.random(),
                })
            }
            Coords::Cone(ConeCoord::Ring { ring, copy, t }) => {
                let radius = ring_height(ring).abs();
                Coords::Cone(ConeCoord::Ring { ring, copy, t: jitter(rng, t, r / (TAU * radius)) })
            }
            Coords::Dyadic { level, bits } => {
                let depth = self.depth()?;
                // Coordinates beyond `first` weigh less than r/2 in total.
                let first = ((2.0 / r).log2().ceil().max(0.0) as u32).min(depth);
                let flips = rng.random::<u64>() & low_mask(depth) & !low_mask(first);
                let level = if level == JLevel::Limit && rng.random_bool(0.5) {
                    far_level(rng)
                } else {
                    level
                };
                Coords::Dyadic { level, bits: bits ^ flips }
            }
        })
    }
}

pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// (x, y, 1 − z², z(1 − z²)): injective on the quotient where the two limit
/// circles are identified.
fn identified_embedding(c: SpiralCoord) -> [f64; 4] {
    let (t, z) = match c {
        SpiralCoord::Upper { t } | SpiralCoord::Circle { t } => (t, 1.0),
        SpiralCoord::Lower { t } => (t, -1.0),
        SpiralCoord::Spiral { tau } => (tau, spiral_height(tau)),
    };
    let (s, co) = (TAU * t).sin_cos();
    let w = 1.0 - z * z;
    [co, s, w, z * w]
}

fn cone_distance(a: ConeCoord, b: ConeCoord) -> f64 {
    let pos = |c: ConeCoord| match c {
        ConeCoord::Apex => (None, [0.0; 3]),
        ConeCoord::Ring { ring, copy, t } => {
            let h = ring_height(ring);
            (Some(copy), circle_at(t, h.abs(), h))
        }
    };
    let ((ca, pa), (cb, pb)) = (pos(a), pos(b));
    match (ca, cb) {
        (Some(x), Some(y)) if x != y => {
            // Paths between different cones run through the shared apex.
            euclid(&pa, &[0.0; 3]) + euclid(&pb, &[0.0; 3])
        }
        _ => euclid(&pa, &pb),
    }
}

/// Farthest-point ε-net over `n` items. Starts from item 0 and keeps adding
/// the item farthest from the current net until every item is within `eps`,
/// or until the net holds more than `limit` items. Returned indices are
/// pairwise more than `eps` apart.
pub fn farthest_point_net(n: usize, eps: f64, limit: usize, mut dist: impl FnMut(usize, usize) -> f64) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut net = vec![0];
    let mut gap: Vec<f64> = (0..n).map(|i| dist(0, i)).collect();
    loop {
        let (far, &d) = gap
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if d <= eps || net.len() > limit {
            return net;
        }
        net.push(far);
        for (i, g) in gap.iter_mut().enumerate() {
            *g = g.min(dist(far, i));
        }
    }
}

/// Farthest-point ε-net of `points`: every input lies within `eps` of the net
/// and net points are pairwise more than `eps` apart.
pub fn greedy_epsilon_net(space: &MetricSpace, points: &[Point], eps: f64) -> Result<Vec<Point>> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    for p in points {
        space.validate(p)?;
    }
    let net = farthest_point_net(points.len(), eps, usize::MAX, |i, j| space.dist(&points[i], &points[j]));
    Ok(net.into_iter().map(|i| points[i]).collect())
}

/// Uniform-grid spatial hash over point features. Supports "is there a stored
/// point within r" queries for any r up to the cell size.
#[derive(Debug, Clone)]
pub struct PointGrid<'a> {
    space: &'a MetricSpace,
    cell: f64,
    cells: HashMap<[i64; 4], Vec<usize>>,
    points: Vec<Point>,
}

impl<'a> PointGrid<'a> {
    pub fn new(space: &'a MetricSpace, cell: f64) -> Self {
        PointGrid { space, cell: cell.max(1e-12), cells: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, f: &Features) -> [i64; 4] {
        let mut k = [0i64; 4];
        for (slot, v) in k.iter_mut().zip(&f.values[..f.dims]) {
            *slot = (v / self.cell).floor() as i64;
        }
        k
    }

    pub fn insert(&mut self, p: Point) -> usize {
        let key = self.key(&self.space.features(&p));
        let id = self.points.len();
        self.points.push(p);
        self.cells.entry(key).or_default().push(id);
        id
    }

    /// Index of some stored point strictly closer than `r` to `p`.
    pub fn find_within(&self, p: &Point, r: f64) -> Option<usize> {
        debug_assert!(r <= self.cell * (1.0 + 1e-12));
        let f = self.space.features(p);
        let base = self.key(&f);
        let mut offset = [-1i64; 4];
        for slot in offset.iter_mut().skip(f.dims) {
            *slot = 0;
        }
        loop {
            let mut key = base;
            for d in 0..f.dims {
                key[d] += offset[d];
            }
            if let Some(ids) = self.cells.get(&key) {
                if let Some(&i) = ids.iter().find(|&&i| self.space.dist(&self.points[i], p) < r) {
                    return Some(i);
                }
            }
            // Odometer over {-1, 0, 1}^dims.
            let mut d = 0;
            loop {
                if d == f.dims {
                    return None;
                }
                offset[d] += 1;
                if offset[d] <= 1 {
                    break;
                }
                offset[d] = -1;
                d += 1;
            }
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A region of a scenario space, given by an exact membership rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Half-open arc [start, start + len) of a circle coordinate.
    Arc { start: f64, len: f64 },
    /// Open metric ball.
    Ball { center: Point, radius: f64 },
    /// Points of the limit fiber {0} × D whose first `len` coordinates equal `prefix`.
    DyadicCylinder { prefix: u64, len: u32 },
    /// Open `radius`-neighbourhood of another region.
    Neighborhood { core: Box<Region>, radius: f64 },
}

impl Region {
    pub fn contains(&self, space: &MetricSpace, p: &Point) -> bool {
        match self {
            Region::Arc { start, len } => match p.coords {
                Coords::Circle { t } => arc_holds(*start, *len, t),
                _ => false,
            },
            Region::Ball { center, radius } => space.metric(center, p).is_some_and(|d| d < *radius),
            Region::DyadicCylinder { prefix, len } => match p.coords {
                Coords::Dyadic { level: JLevel::Limit, bits } => (bits ^ prefix) & low_mask(*len) == 0,
                _ => false,
            },
            Region::Neighborhood { core, radius } => core.distance_to(space, p) < *radius,
        }
    }

    /// Distance from `p` to the region (zero inside). Infinite when `p` has
    /// no coordinates comparable with the region.
    pub fn distance_to(&self, space: &MetricSpace, p: &Point) -> f64 {
        match self {
            Region::Arc { start, len } => match p.coords {
                Coords::Circle { t } => {
                    if arc_holds(*start, *len, t) {
                        0.0
                    } else {
                        arc_distance(t, *start).min(arc_distance(t, start + len))
                    }
                }
                _ => f64::INFINITY,
            },
            Region::Ball { center, radius } => {
                space.metric(center, p).map_or(f64::INFINITY, |d| (d - radius).max(0.0))
            }
            Region::DyadicCylinder { prefix, len } => match p.coords {
                Coords::Dyadic { level, bits } => level.value() + dyadic_weight((bits ^ prefix) & low_mask(*len)),
                _ => f64::INFINITY,
            },
            Region::Neighborhood { core, radius } => (core.distance_to(space, p) - radius).max(0.0),
        }
    }

    pub fn neighborhood(&self, radius: f64) -> Region {
        Region::Neighborhood { core: Box::new(self.clone()), radius }
    }
}

/// A compact set given by its membership rule plus a dense finite sample of
/// members on which covering questions are decided.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSubset {
    region: Region,
    witness: Vec<Point>,
}

/// Half-open arc membership; offsets within rounding of the far end count as outside.
fn arc_holds(start: f64, len: f64, t: f64) -> bool {
    len >= 1.0 || (t - start).rem_euclid(1.0) < len - 1e-12
}

impl CompactSubset {
    pub fn new(space: &MetricSpace, region: Region, witness: Vec<Point>) -> Result<Self> {
        if witness.is_empty() {
            return Err(Error::domain("compact subset needs a nonempty witness sample"));
        }
        if let Some(p) = witness.iter().find(|p| !region.contains(space, p)) {
            return Err(Error::domain(format!("witness point `{p}` lies outside the region")));
        }
        Ok(CompactSubset { region, witness })
    }

    /// Keeps the members of `lattice`; falls back to `anchor` when the
    /// lattice misses a very small region.
    pub fn from_lattice(space: &MetricSpace, region: Region, lattice: &[Point], anchor: Option<Point>) -> Result<Self> {
        let mut witness: Vec<Point> = lattice.iter().copied().filter(|p| region.contains(space, p)).collect();
        if witness.is_empty() {
            witness.extend(anchor.filter(|a| region.contains(space, a)));
        }
        Self::new(space, region, witness)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn witness(&self) -> &[Point] {
        &self.witness
    }

    pub fn contains(&self, space: &MetricSpace, p: &Point) -> bool {
        self.region.contains(space, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> MetricSpace {
        MetricSpace::new(ScenarioId::Rotation, Geometry::Circle)
    }

    fn at(t: f64) -> Point {
        Point::new(ScenarioId::Rotation, Coords::Circle { t })
    }

    #[test]
    fn antipodal_circle_points() {
        assert_eq!(circle().distance(&at(0.0), &at(0.5)).unwrap(), 0.5);
        assert_eq!(circle().distance(&at(0.3), &at(0.3)).unwrap(), 0.0);
        assert!((circle().distance(&at(0.95), &at(0.05)).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn spiral_chord_between_sigma_and_upper_circle() {
        let s = MetricSpace::new(ScenarioId::SpiralTwoCircles, Geometry::Spiral);
        let sigma = Point::new(ScenarioId::SpiralTwoCircles, Coords::Spiral(SpiralCoord::Spiral { tau: 0.0 }));
        let upper = Point::new(ScenarioId::SpiralTwoCircles, Coords::Spiral(SpiralCoord::Upper { t: 0.0 }));
        assert!((s.distance(&sigma, &upper).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_scenarios_are_rejected() {
        let other = Point::new(ScenarioId::RationalRotation, Coords::Circle { t: 0.1 });
        assert!(matches!(circle().distance(&at(0.1), &other), Err(Error::Domain(_))));
    }

    #[test]
    fn cone_paths_between_copies_pass_through_apex() {
        let s = MetricSpace::new(ScenarioId::TripleCone, Geometry::TripleCone { levels: 4 });
        let p = |copy| Point::new(ScenarioId::TripleCone, Coords::Cone(ConeCoord::Ring { ring: 2, copy, t: 0.0 }));
        let apex = Point::new(ScenarioId::TripleCone, Coords::Cone(ConeCoord::Apex));
        let leg = s.distance(&p(0), &apex).unwrap();
        assert!((leg - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((s.distance(&p(0), &p(1)).unwrap() - 2.0 * leg).abs() < 1e-15);
    }

    #[test]
    fn dyadic_metric_weights_coordinates() {
        let s = MetricSpace::new(ScenarioId::DyadicProduct, Geometry::Dyadic { levels: 3, depth: 20 });
        let p = |level, bits| Point::new(ScenarioId::DyadicProduct, Coords::Dyadic { level, bits });
        let d = s.distance(&p(JLevel::Inv(2), 0b101), &p(JLevel::Limit, 0b001)).unwrap();
        assert!((d - (0.5 + 0.125)).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_stratified() {
        let s = MetricSpace::new(ScenarioId::SpiralTwoCircles, Geometry::Spiral);
        let a = s.sample_points(100, 1);
        assert_eq!(a, s.sample_points(100, 1));
        for stratum in [Stratum::UpperCircle, Stratum::LowerCircle, Stratum::Spiral] {
            assert!(a.iter().any(|p| p.stratum() == stratum));
        }
        assert_eq!(&s.sample_points(40, 1)[..], &a[..40]);
        let c = circle().sample_points(3, 7);
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|p| circle().validate(p).is_ok()));
    }

    #[test]
    fn dyadic_samples_respect_constraints() {
        let s = MetricSpace::new(ScenarioId::DyadicProduct, Geometry::Dyadic { levels: 6, depth: 20 });
        for p in s.sample_points(10, 2) {
            s.validate(&p).unwrap();
            match p.coords {
                Coords::Dyadic { bits, .. } => assert_eq!(bits >> 20, 0),
                _ => panic!("wrong coordinates"),
            }
        }
    }

    #[test]
    fn farthest_point_net_on_equispaced_circle() {
        let pts: Vec<Point> = (0..100).map(|i| at(i as f64 / 100.0)).collect();
        // Frozen from an exhaustive run; the minimum cover by closed 0.3-balls is 2.
        assert_eq!(greedy_epsilon_net(&circle(), &pts, 0.3).unwrap().len(), 2);
        assert_eq!(greedy_epsilon_net(&circle(), &pts[..1], 0.01).unwrap().len(), 1);
        assert_eq!(greedy_epsilon_net(&circle(), &pts, 0.5).unwrap().len(), 1);
        assert!(greedy_epsilon_net(&circle(), &[], 0.1).unwrap().is_empty());
        assert!(greedy_epsilon_net(&circle(), &pts, 0.0).is_err());
    }

    #[test]
    fn point_text_round_trips() {
        let spaces = [
            MetricSpace::new(ScenarioId::SpiralTwoCircles, Geometry::Spiral),
            MetricSpace::new(ScenarioId::TripleCone, Geometry::TripleCone { levels: 5 }),
            MetricSpace::new(ScenarioId::DyadicProduct, Geometry::Dyadic { levels: 5, depth: 20 }),
            MetricSpace::new(ScenarioId::VaryingAngleCylinder, Geometry::Cylinder { levels: 5 }),
        ];
        for s in &spaces {
            for p in s.sample_points(30, 3) {
                let q = s.parse_point(&p.to_string()).unwrap();
                assert_eq!(p, q);
            }
        }
        assert!(circle().parse_point("t=1.5").is_err());
        assert!(circle().parse_point("x=0.2").is_err());
    }

    #[test]
    fn grid_finds_wrapped_neighbours() {
        let s = circle();
        let mut g = PointGrid::new(&s, 1e-3);
        g.insert(at(0.9999));
        assert!(g.find_within(&at(0.0002), 1e-3).is_some());
        assert!(g.find_within(&at(0.002), 1e-3).is_none());
    }

    #[test]
    fn regions_and_neighbourhoods() {
        let s = circle();
        let arc = Region::Arc { start: 0.9, len: 0.2 };
        assert!(arc.contains(&s, &at(0.05)));
        assert!(!arc.contains(&s, &at(0.2)));
        assert!((arc.distance_to(&s, &at(0.2)) - 0.1).abs() < 1e-12);
        assert!(arc.neighborhood(0.15).contains(&s, &at(0.2)));
        let lattice: Vec<Point> = (0..100).map(|i| at(i as f64 / 100.0)).collect();
        let k = CompactSubset::from_lattice(&s, arc, &lattice, None).unwrap();
        assert_eq!(k.witness().len(), 20);
        assert!(CompactSubset::new(&s, Region::Arc { start: 0.0, len: 0.1 }, vec![at(0.5)]).is_err());
    }
}
