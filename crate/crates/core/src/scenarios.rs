//! The built-in example systems.

use crate::action::{cone_angle, cylinder_angle, Action, ActionScenario, GroundTruth, MeanTruth, Observable, ScenarioFlags};
use crate::census::ModuleLabel;
use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupKind};
use crate::space::{ConeCoord, Coords, Geometry, JLevel, MetricSpace, Point, ScenarioId, SpiralCoord};

/// (√5 − 1)/2, continued fraction [0; 1, 1, 1, …].
pub const GOLDEN_ALPHA: f64 = 0.618_033_988_749_894_848_204_586_834_366;

pub const DEFAULT_DYADIC_DEPTH: u32 = 20;

/// Parameters of a built-in scenario. Unset fields take the defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioSpec {
    pub name: Option<ScenarioId>,
    /// Rotation number for the irrational scenarios.
    pub alpha: Option<f64>,
    /// Rotation number p/q for `rational_rotation`.
    pub rational: Option<(i64, i64)>,
    /// Number of J-levels (or cone circles per nappe) drawn by the sampler.
    pub levels: Option<u32>,
    /// Truncation depth of the dyadic factor.
    pub depth: Option<u32>,
}

impl ScenarioSpec {
    pub fn named(name: ScenarioId) -> Self {
        ScenarioSpec { name: Some(name), ..Default::default() }
    }
}

/// Builds a scenario with its default parameters.
pub fn fixture(name: ScenarioId) -> ActionScenario {
    build(&ScenarioSpec::named(name)).expect("default parameters are valid")
}

/// Detects p/q with q ≤ 10⁴ within 1e-12 through the continued fraction.
pub fn looks_rational(x: f64) -> bool {
    let (mut h0, mut h1) = (0f64, 1f64);
    let (mut k0, mut k1) = (1f64, 0f64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > 1e4 {
            return false;
        }
        if (x - h2 / k2).abs() < 1e-12 {
            return true;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let f = r - a;
        if f.abs() < 1e-15 {
            return true;
        }
        r = 1.0 / f;
    }
    false
}

fn require_irrational(what: &str, x: f64) -> Result<()> {
    if !x.is_finite() || looks_rational(x) {
        Err(Error::Construction(format!("{what} = {x} must be irrational")))
    } else {
        Ok(())
    }
}

pub fn build(spec: &ScenarioSpec) -> Result<ActionScenario> {
    let name = spec.name.ok_or_else(|| Error::Construction("scenario name is required".into()))?;
    let alpha = spec.alpha.unwrap_or(GOLDEN_ALPHA);
    if name != ScenarioId::RationalRotation {
        if spec.rational.is_some() {
            return Err(Error::Construction(format!("`{name}` takes no rational rotation number")));
        }
        require_irrational("alpha", alpha)?;
    } else if spec.alpha.is_some() {
        return Err(Error::Construction("rational_rotation takes `rational = p/q`, not alpha".into()));
    }
    let levels = spec.levels.unwrap_or(match name {
        ScenarioId::TripleCone => 8,
        ScenarioId::DyadicProduct => 6,
        _ => 16,
    });
    if levels == 0 {
        return Err(Error::Construction("levels must be positive".into()));
    }
    let depth = spec.depth.unwrap_or(DEFAULT_DYADIC_DEPTH);
    if name == ScenarioId::DyadicProduct && !(1..=60).contains(&depth) {
        return Err(Error::Construction(format!("dyadic depth {depth} outside 1..=60")));
    }
    let stable = ScenarioFlags { metric: true, lyapunov_stable: true, continuous_average: true, isometric: true };
    let z = GroupDescriptor::integers;

    let scenario = match name {
        ScenarioId::Rotation => ActionScenario {
            space: MetricSpace::new(name, Geometry::Circle),
            group: z(),
            action: Action::Rotation { alpha },
            catalog: circle_catalog(),
            flags: stable,
            truth: GroundTruth {
                field_jump: Some(false),
                field_function: Some("cos1"),
                means: vec![
                    mean("t=0.2", "cos1", 0.0, 1e-2),
                    mean("t=0.7", "cos1_sq", 0.5, 1e-2),
                ],
                ..Default::default()
            },
            metadata: format!("irrational rotation of the circle by alpha = {alpha}"),
        },
        ScenarioId::RationalRotation => {
            let (p, q) = spec.rational.unwrap_or((1, 7));
            if q <= 0 || p.rem_euclid(q) == 0 {
                return Err(Error::Construction(format!("rational rotation {p}/{q} needs q > 0 and p not divisible by q")));
            }
            ActionScenario {
                space: MetricSpace::new(name, Geometry::Circle),
                group: z(),
                action: Action::RationalRotation { p, q },
                catalog: circle_catalog(),
                flags: stable,
                truth: GroundTruth {
                    label: (gcd(p, q) == 1).then_some(ModuleLabel::SelfDual),
                    field_jump: Some(false),
                    field_function: Some("cos1"),
                    means: vec![mean("t=0.1", "const", 1.0, 1e-12)],
                },
                metadata: format!("rotation of the circle by {p}/{q}; every orbit has {} points", q / gcd(p, q)),
            }
        }
        ScenarioId::VaryingAngleCylinder => {
            for i in 1..=levels {
                let a = cylinder_angle(alpha, JLevel::Inv(i));
                require_irrational(&format!("alpha_{i}"), a)?;
                require_irrational(&format!("alpha/alpha_{i}"), alpha / a)?;
            }
            ActionScenario {
                space: MetricSpace::new(name, Geometry::Cylinder { levels }),
                group: z(),
                action: Action::Cylinder { alpha },
                catalog: vec![
                    ("const", Observable::Const),
                    ("level", Observable::Level),
                    ("cos1", Observable::Cos(1)),
                    ("sin1", Observable::Sin(1)),
                    ("exp1", Observable::Exp(1)),
                ],
                flags: ScenarioFlags { lyapunov_stable: false, isometric: false, ..stable },
                truth: GroundTruth {
                    field_jump: Some(false),
                    field_function: Some("cos1"),
                    means: vec![mean("j=0;t=0.3", "cos1", 0.0, 1e-2), mean("j=1/3;t=0.3", "level", 1.0 / 3.0, 1e-12)],
                    ..Default::default()
                },
                metadata: format!("J x S^1; level 1/i rotates by alpha + 1/(i sqrt 2), the limit circle by alpha = {alpha}"),
            }
        }
        ScenarioId::SpiralTwoCircles => ActionScenario {
            space: MetricSpace::new(name, Geometry::Spiral),
            group: z(),
            action: Action::Spiral { alpha },
            catalog: vec![
                ("const", Observable::Const),
                ("z", Observable::AmbientZ),
                ("cos1", Observable::Cos(1)),
                ("sin1", Observable::Sin(1)),
            ],
            flags: ScenarioFlags { lyapunov_stable: false, continuous_average: false, isometric: false, ..stable },
            truth: GroundTruth {
                field_jump: Some(true),
                field_function: Some("z"),
                means: vec![
                    mean("plus;t=0.1", "z", 1.0, 1e-12),
                    mean("minus;t=0.4", "z", -1.0, 1e-12),
                    mean("sigma;tau=0", "z", 0.0, 5e-2),
                    mean("sigma;tau=-20", "z", 0.0, 5e-2),
                ],
                ..Default::default()
            },
            metadata: format!("circles at z = +1 and z = -1 and the spiral z = (2/pi) atan(tau) in R^3, shifted by alpha = {alpha}"),
        },
        ScenarioId::SpiralIdentified => ActionScenario {
            space: MetricSpace::new(name, Geometry::SpiralIdentified),
            group: z(),
            action: Action::Spiral { alpha },
            catalog: vec![
                ("const", Observable::Const),
                ("z_sq", Observable::ZSquared),
                ("collar", Observable::Collar),
                ("cos1", Observable::Cos(1)),
                ("sin1", Observable::Sin(1)),
            ],
            flags: ScenarioFlags { lyapunov_stable: false, isometric: false, ..stable },
            truth: GroundTruth {
                field_jump: Some(false),
                field_function: Some("z_sq"),
                means: vec![mean("circle;t=0.2", "z_sq", 1.0, 1e-12), mean("sigma;tau=5", "z_sq", 1.0, 5e-2)],
                ..Default::default()
            },
            metadata: format!("the spiral scenario with the two limit circles identified, alpha = {alpha}"),
        },
        ScenarioId::TripleCone => {
            for k in 1..=levels as i32 {
                require_irrational(&format!("alpha_{k}"), cone_angle(alpha, k))?;
            }
            ActionScenario {
                space: MetricSpace::new(name, Geometry::TripleCone { levels }),
                group: GroupDescriptor::new(GroupKind::DirectSum(vec![GroupKind::FreeAbelian(1), GroupKind::FiniteCyclic(3)]))?,
                action: Action::Cone { alpha },
                catalog: vec![
                    ("const", Observable::Const),
                    ("z", Observable::AmbientZ),
                    ("x", Observable::AmbientX),
                    ("y", Observable::AmbientY),
                    ("z_sq", Observable::ZSquared),
                ],
                flags: ScenarioFlags { isometric: false, ..stable },
                truth: GroundTruth {
                    label: Some(ModuleLabel::NotSelfDual),
                    field_jump: Some(false),
                    field_function: Some("z"),
                    means: vec![mean("ring=2;copy=0;t=0.1", "z", 0.5, 1e-12), mean("apex", "x", 0.0, 1e-12)],
                },
                metadata: format!(
                    "three double cones over the circles z = +-1/k glued at the apex; Z rotates circle k by alpha/(|k|+1), Z_3 permutes the cones; alpha = {alpha}"
                ),
            }
        }
        ScenarioId::DyadicProduct => ActionScenario {
            space: MetricSpace::new(name, Geometry::Dyadic { levels, depth }),
            group: GroupDescriptor::new(GroupKind::InfiniteSumZ2)?,
            action: Action::Dyadic { depth },
            catalog: vec![
                ("const", Observable::Const),
                ("level", Observable::Level),
                ("bit1", Observable::Bit(1)),
                ("bit2", Observable::Bit(2)),
                ("bit3", Observable::Bit(3)),
                ("cyl00", Observable::DyadicCylinder { prefix: 0b00, len: 2 }),
                ("cyl01", Observable::DyadicCylinder { prefix: 0b10, len: 2 }),
            ],
            // Levels are flipped on different numbers of coordinates.
            flags: ScenarioFlags { isometric: false, ..stable },
            truth: GroundTruth {
                label: Some(ModuleLabel::Reflexive),
                field_jump: Some(false),
                field_function: Some("bit1"),
                means: vec![
                    mean("j=1/2;bits=1", "bit1", 0.5, 1e-12),
                    mean("j=1/2;bits=001", "bit3", 1.0, 1e-12),
                    mean("j=0;bits=0", "cyl01", 0.25, 1e-12),
                ],
            },
            metadata: format!("J x D with D cut to {depth} binary coordinates; level 1/n is acted on by the first n coordinates"),
        },
    };
    Ok(scenario)
}

/// Largest |τ| on the spiral grid; its tails lie within 0.013 of the circles.
pub const FIELD_GRID_TAU: f64 = 50.0;

/// Deterministic grid of about `n` points spread over every stratum, used
/// for expectation-field scans.
pub fn field_grid(scenario: &ActionScenario, n: usize) -> Vec<Point> {
    let id = scenario.id();
    let n = n.max(1);
    let ts = |m: usize| (0..m.max(1)).map(move |i| i as f64 / m.max(1) as f64);
    let levels = |count: u32| std::iter::once(JLevel::Limit).chain((1..=count).map(JLevel::Inv));
    let coords: Vec<Coords> = match scenario.space().geometry() {
        Geometry::Circle => ts(n).map(|t| Coords::Circle { t }).collect(),
        Geometry::Cylinder { levels: l } => {
            let per = n / (l as usize + 1);
            levels(l).flat_map(|level| ts(per).map(move |t| Coords::Cylinder { level, t })).collect()
        }
        Geometry::Spiral => {
            let third = n / 3;
            let sigma = (n - 2 * third).max(2);
            ts(third)
                .map(|t| SpiralCoord::Upper { t })
                .chain(ts(third).map(|t| SpiralCoord::Lower { t }))
                .chain((0..sigma).map(|i| SpiralCoord::Spiral {
                    tau: FIELD_GRID_TAU * (2.0 * i as f64 / (sigma - 1) as f64 - 1.0),
                }))
                .map(Coords::Spiral)
                .collect()
        }
        Geometry::SpiralIdentified => {
            let half = n / 2;
            let sigma = (n - half).max(2);
            ts(half)
                .map(|t| SpiralCoord::Circle { t })
                .chain((0..sigma).map(|i| SpiralCoord::Spiral {
                    tau: FIELD_GRID_TAU * (2.0 * i as f64 / (sigma - 1) as f64 - 1.0),
                }))
                .map(Coords::Spiral)
                .collect()
        }
        Geometry::TripleCone { levels: l } => {
            let rings: Vec<i32> = (1..=l as i32).flat_map(|k| [k, -k]).collect();
            let per = n.saturating_sub(1) / (3 * rings.len());
            let mut out = vec![Coords::Cone(ConeCoord::Apex)];
            for copy in 0..3u8 {
                for &ring in &rings {
                    out.extend(ts(per).map(|t| Coords::Cone(ConeCoord::Ring { ring, copy, t })));
                }
            }
            out
        }
        Geometry::Dyadic { levels: l, depth } => {
            let per = (n / (l as usize + 1)).max(1) as u64;
            let mask = if depth >= 64 { u64::MAX } else { (1u64 << depth) - 1 };
            levels(l).flat_map(|level| (0..per).map(move |b| Coords::Dyadic { level, bits: b & mask })).collect()
        }
    };
    let mut out: Vec<Point> = Vec::with_capacity(coords.len());
    for c in coords {
        let p = Point::new(id, c);
        if !out.iter().any(|q| scenario.space().same_point(q, &p)) {
            out.push(p);
        }
    }
    out
}

fn circle_catalog() -> Vec<(&'static str, Observable)> {
    vec![
        ("const", Observable::Const),
        ("cos1", Observable::Cos(1)),
        ("sin1", Observable::Sin(1)),
        ("cos2", Observable::Cos(2)),
        ("sin2", Observable::Sin(2)),
        ("cos1_sq", Observable::CosSquared(1)),
        ("exp1", Observable::Exp(1)),
    ]
}

fn mean(point: &'static str, function: &'static str, value: f64, tol: f64) -> MeanTruth {
    MeanTruth { point, function, value, tol }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_literal_matches_closed_form() {
        assert_eq!(GOLDEN_ALPHA, (5f64.sqrt() - 1.0) / 2.0);
        assert!(!looks_rational(GOLDEN_ALPHA));
        assert!(looks_rational(1.0 / 7.0));
        assert!(looks_rational(0.5));
    }

    #[test]
    fn rational_alpha_is_refused() {
        let spec = ScenarioSpec { alpha: Some(0.25), ..ScenarioSpec::named(ScenarioId::Rotation) };
        assert!(matches!(build(&spec), Err(Error::Construction(_))));
        let spec = ScenarioSpec { rational: Some((3, 3)), ..ScenarioSpec::named(ScenarioId::RationalRotation) };
        assert!(matches!(build(&spec), Err(Error::Construction(_))));
    }

    #[test]
    fn spiral_step_follows_arctan() {
        let s = fixture(ScenarioId::SpiralTwoCircles);
        let x = Point::new(s.id(), Coords::Spiral(SpiralCoord::Spiral { tau: 0.0 }));
        let g = s.group().element(&[5], 0).unwrap();
        let y = s.apply(&g, &x).unwrap();
        let z = y.ambient().unwrap()[2];
        assert!((z - 2.0 / std::f64::consts::PI * (5.0 * GOLDEN_ALPHA).atan()).abs() < 1e-15);
    }

    #[test]
    fn field_grids_cover_every_stratum() {
        for id in ScenarioId::ALL {
            let s = fixture(id);
            let grid = field_grid(&s, 120);
            assert!(grid.len() >= 60 && grid.len() <= 121, "{id}: {}", grid.len());
            for stratum in s.space().strata() {
                assert!(grid.iter().any(|p| p.stratum() == *stratum), "{id} misses {stratum:?}");
            }
        }
    }

    #[test]
    fn every_truth_point_and_function_resolves() {
        for id in ScenarioId::ALL {
            let s = fixture(id);
            for m in &s.ground_truth().means {
                s.space().parse_point(m.point).unwrap();
                s.function(m.function).unwrap();
            }
        }
    }
}
