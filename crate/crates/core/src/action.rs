//! Group actions on the scenario spaces and their test-function catalogs.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::census::ModuleLabel;
use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupElement};
use crate::space::{low_mask, wrap_unit, ConeCoord, Coords, JLevel, MetricSpace, Point, ScenarioId, SpiralCoord};

/// Rotation number of the circle actions on J × S¹ at level 1/i.
pub fn cylinder_angle(alpha: f64, level: JLevel) -> f64 {
    match level {
        JLevel::Limit => alpha,
        JLevel::Inv(i) => alpha + 1.0 / (i as f64 * SQRT_2),
    }
}

/// Rotation number on cone circle `ring`.
pub fn cone_angle(alpha: f64, ring: i32) -> f64 {
    alpha / (ring.unsigned_abs() as f64 + 1.0)
}

/// Fractional part of n·a, with the rounding error of the product folded back in.
fn frac_mul(n: i64, a: f64) -> f64 {
    let n = n as f64;
    let p = n * a;
    let err = n.mul_add(a, -p);
    wrap_unit((p - p.floor()) + err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Action {
    Rotation { alpha: f64 },
    RationalRotation { p: i64, q: i64 },
    Cylinder { alpha: f64 },
    /// Shared by both spiral scenarios: t ↦ t + α, τ ↦ τ + α.
    Spiral { alpha: f64 },
    Cone { alpha: f64 },
    Dyadic { depth: u32 },
}

impl Action {
    fn apply(&self, g: &GroupElement, x: &Point) -> Point {
        let n = g.int(0);
        let coords = match (*self, x.coords) {
            (Action::Rotation { alpha }, Coords::Circle { t }) => Coords::Circle { t: wrap_unit(t + frac_mul(n, alpha)) },
            (Action::RationalRotation { p, q }, Coords::Circle { t }) => {
                let step = (n as i128 * p as i128).rem_euclid(q as i128) as f64 / q as f64;
                Coords::Circle { t: wrap_unit(t + step) }
            }
            (Action::Cylinder { alpha }, Coords::Cylinder { level, t }) => Coords::Cylinder {
                level,
                t: wrap_unit(t + frac_mul(n, cylinder_angle(alpha, level))),
            },
            (Action::Spiral { alpha }, Coords::Spiral(c)) => {
                let shift = frac_mul(n, alpha);
                Coords::Spiral(match c {
                    SpiralCoord::Upper { t } => SpiralCoord::Upper { t: wrap_unit(t + shift) },
                    SpiralCoord::Lower { t } => SpiralCoord::Lower { t: wrap_unit(t + shift) },
                    SpiralCoord::Circle { t } => SpiralCoord::Circle { t: wrap_unit(t + shift) },
                    SpiralCoord::Spiral { tau } => SpiralCoord::Spiral { tau: tau + n as f64 * alpha },
                })
            }
            (Action::Cone { alpha }, Coords::Cone(ConeCoord::Ring { ring, copy, t })) => {
                let m = g.int(1);
                Coords::Cone(ConeCoord::Ring {
                    ring,
                    copy: (copy as i64 + m).rem_euclid(3) as u8,
                    t: wrap_unit(t + frac_mul(n, cone_angle(alpha, ring))),
                })
            }
            (Action::Cone { .. }, Coords::Cone(ConeCoord::Apex)) => x.coords,
            (Action::Dyadic { depth }, Coords::Dyadic { level, bits }) => {
                let active = match level {
                    JLevel::Limit => depth,
                    JLevel::Inv(k) => k.min(depth),
                };
                Coords::Dyadic { level, bits: bits ^ (g.bits() & low_mask(active)) }
            }
            _ => unreachable!("points are validated before the action is applied"),
        };
        Point::new(x.scenario, coords)
    }
}

/// Continuous test functions. Angles are the circle coordinate in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    Const,
    Cos(u32),
    Sin(u32),
    CosSquared(u32),
    /// exp(2πi·k·t).
    Exp(i32),
    AmbientX,
    AmbientY,
    AmbientZ,
    ZSquared,
    /// (1 − z²)·cos 2πt, vanishing on the limit circles.
    Collar,
    /// The J coordinate.
    Level,
    /// Dyadic coordinate d_k.
    Bit(u32),
    /// Indicator of the dyadic cylinder fixing the first `len` coordinates.
    DyadicCylinder { prefix: u64, len: u32 },
}

impl Observable {
    pub fn eval(&self, p: &Point) -> Complex64 {
        let angle = || p.angle().unwrap_or(0.0);
        let amb = || p.ambient().unwrap_or([0.0; 3]);
        let real = match *self {
            Observable::Const => 1.0,
            Observable::Cos(k) => (TAU * k as f64 * angle()).cos(),
            Observable::Sin(k) => (TAU * k as f64 * angle()).sin(),
            Observable::CosSquared(k) => (TAU * k as f64 * angle()).cos().powi(2),
            Observable::Exp(k) => {
                let (s, c) = (TAU * k as f64 * angle()).sin_cos();
                return Complex64::new(c, s);
            }
            Observable::AmbientX => amb()[0],
            Observable::AmbientY => amb()[1],
            Observable::AmbientZ => amb()[2],
            Observable::ZSquared => amb()[2].powi(2),
            Observable::Collar => (1.0 - amb()[2].powi(2)) * (TAU * angle()).cos(),
            Observable::Level => p.level().map_or(0.0, JLevel::value),
            Observable::Bit(k) => match p.coords {
                Coords::Dyadic { bits, .. } if (1..=64).contains(&k) => (bits >> (k - 1) & 1) as f64,
                _ => 0.0,
            },
            Observable::DyadicCylinder { prefix, len } => match p.coords {
                Coords::Dyadic { bits, .. } => ((bits ^ prefix) & low_mask(len) == 0) as u8 as f64,
                _ => 0.0,
            },
        };
        Complex64::new(real, 0.0)
    }
}

/// Structural facts a scenario declares about itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioFlags {
    pub metric: bool,
    pub lyapunov_stable: bool,
    pub continuous_average: bool,
    /// Every group element preserves the metric exactly.
    pub isometric: bool,
}

/// A reference mean recorded with a fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTruth {
    pub point: &'static str,
    pub function: &'static str,
    pub value: f64,
    pub tol: f64,
}

/// Known answers attached to a fixture and checked by the batch runner.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub label: Option<ModuleLabel>,
    /// Whether the expectation field of `field_function` has a jump.
    pub field_jump: Option<bool>,
    pub field_function: Option<&'static str>,
    pub means: Vec<MeanTruth>,
}

/// Invariant measure on the orbit closure of a point, as a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Closure {
    /// Equal-weight nodes.
    Nodes(Vec<Point>),
    /// The orbit is finite and carries the counting measure.
    FiniteOrbit,
}

/// A space, a group acting on it, and a catalog of named test functions.
#[derive(Debug, Clone)]
pub struct ActionScenario {
    pub(crate) space: MetricSpace,
    pub(crate) group: GroupDescriptor,
    pub(crate) action: Action,
    pub(crate) catalog: Vec<(&'static str, Observable)>,
    pub(crate) flags: ScenarioFlags,
    pub(crate) truth: GroundTruth,
    pub(crate) metadata: String,
}

impl ActionScenario {
    pub fn id(&self) -> ScenarioId {
        self.space.scenario()
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn flags(&self) -> ScenarioFlags {
        self.flags
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }

    pub fn function_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.catalog.iter().map(|(n, _)| *n)
    }

    pub fn function(&self, name: &str) -> Result<Observable> {
        self.catalog
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| *f)
            .ok_or_else(|| Error::domain(format!("`{}` has no function `{name}`", self.id())))
    }

    /// g·x, checked against the group and the space.
    pub fn apply(&self, g: &GroupElement, x: &Point) -> Result<Point> {
        if g.group_id() != self.group.id() {
            return Err(Error::domain(format!("group element does not act on `{}`", self.id())));
        }
        self.space.validate(x)?;
        Ok(self.action.apply(g, x))
    }

    /// g·x for inputs already known to be valid.
    pub(crate) fn act(&self, g: &GroupElement, x: &Point) -> Point {
        self.action.apply(g, x)
    }

    /// Generators through which the action on the stratum of `x` factors.
    pub fn orbit_generators(&self, x: &Point) -> Vec<GroupElement> {
        match (self.action, x.coords) {
            (Action::Dyadic { depth }, Coords::Dyadic { level, .. }) => {
                let active = match level {
                    JLevel::Limit => depth,
                    JLevel::Inv(k) => k.min(depth),
                };
                self.group.generators(active)
            }
            _ => self.group.generators(0),
        }
    }

    /// Uniform draw from the Følner set at `index`.
    pub fn random_element(&self, index: u64, rng: &mut impl Rng) -> GroupElement {
        let size = self.group.folner_size(index);
        self.group.folner_element(index, rng.random_range(0..size))
    }

    /// Quadrature for the invariant measure on the orbit closure of `x`.
    pub fn closure(&self, x: &Point, size: usize) -> Result<Closure> {
        self.space.validate(x)?;
        let m = size.max(1);
        let mid = |i: usize, m: usize| (i as f64 + 0.5) / m as f64;
        let circle = |make: &dyn Fn(f64) -> Coords| {
            Closure::Nodes((0..m).map(|i| Point::new(x.scenario, make(mid(i, m)))).collect())
        };
        Ok(match (self.action, x.coords) {
            (Action::Rotation { .. }, _) => circle(&|t| Coords::Circle { t }),
            (Action::RationalRotation { .. }, _) => Closure::FiniteOrbit,
            (Action::Cylinder { .. }, Coords::Cylinder { level, .. }) => circle(&|t| Coords::Cylinder { level, t }),
            (Action::Spiral { .. }, Coords::Spiral(c)) => match c {
                SpiralCoord::Upper { .. } => circle(&|t| Coords::Spiral(SpiralCoord::Upper { t })),
                SpiralCoord::Lower { .. } => circle(&|t| Coords::Spiral(SpiralCoord::Lower { t })),
                // On the quotient both tails of Σ accumulate on the single circle.
                SpiralCoord::Circle { .. } | SpiralCoord::Spiral { .. }
                    if self.id() == ScenarioId::SpiralIdentified =>
                {
                    circle(&|t| Coords::Spiral(SpiralCoord::Circle { t }))
                }
                SpiralCoord::Spiral { .. } | SpiralCoord::Circle { .. } => {
                    return Err(Error::unsupported(
                        "the spiral stratum has no declared orbit-closure measure in this scenario",
                    ))
                }
            },
            (Action::Cone { .. }, Coords::Cone(ConeCoord::Apex)) => Closure::Nodes(vec![*x]),
            (Action::Cone { .. }, Coords::Cone(ConeCoord::Ring { ring, .. })) => {
                let per = (m / 3).max(1);
                Closure::Nodes(
                    (0..3u8)
                        .flat_map(|copy| {
                            (0..per).map(move |i| {
                                Point::new(x.scenario, Coords::Cone(ConeCoord::Ring { ring, copy, t: mid(i, per) }))
                            })
                        })
                        .collect(),
                )
            }
            (Action::Dyadic { .. }, Coords::Dyadic { level: JLevel::Inv(_), .. }) => Closure::FiniteOrbit,
            (Action::Dyadic { depth }, Coords::Dyadic { level: JLevel::Limit, bits }) => {
                // The fiber measure is the product of fair coins; coordinates
                // beyond the enumerated prefix keep the values of x.
                let k = (m.ilog2()).min(depth).min(24);
                let tail = bits & !low_mask(k);
                Closure::Nodes(
                    (0..1u64 << k)
                        .map(|prefix| Point::new(x.scenario, Coords::Dyadic { level: JLevel::Limit, bits: tail | prefix }))
                        .collect(),
                )
            }
            _ => unreachable!("validated point"),
        })
    }
}

impl fmt::Display for ActionScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.id(), self.group.kind(), self.metadata)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_mul_matches_wide_arithmetic() {
        let alpha = 0.618_033_988_749_894_9_f64;
        for n in [1i64, -1, 7, 1 << 22, -(1 << 30)] {
            // n·alpha evaluated in exact binary arithmetic through i128 scaling.
            let (mant, exp) = {
                let bits = alpha.to_bits();
                ((bits & ((1 << 52) - 1)) | (1 << 52), ((bits >> 52) & 0x7ff) as i32 - 1075)
            };
            let prod = n as i128 * mant as i128;
            let scale = 1i128 << (-exp);
            let frac = prod.rem_euclid(scale) as f64 / scale as f64;
            assert!((frac_mul(n, alpha) - frac).abs() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn observables_on_circle() {
        let p = Point::new(ScenarioId::Rotation, Coords::Circle { t: 0.25 });
        assert!(Observable::Cos(1).eval(&p).re.abs() < 1e-15);
        assert!((Observable::Sin(1).eval(&p).re - 1.0).abs() < 1e-15);
        assert!((Observable::Exp(1).eval(&p) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn dyadic_cylinder_indicator() {
        let p = Point::new(ScenarioId::DyadicProduct, Coords::Dyadic { level: JLevel::Limit, bits: 0b10 });
        assert_eq!(Observable::DyadicCylinder { prefix: 0b10, len: 2 }.eval(&p).re, 1.0);
        assert_eq!(Observable::DyadicCylinder { prefix: 0b00, len: 2 }.eval(&p).re, 0.0);
        assert_eq!(Observable::Bit(2).eval(&p).re, 1.0);
    }
}
