//! Lyapunov-stability probes, the stabilizer-restricted continuity probe, and
//! the sampled almost-periodicity test.
//!
//! "For every g" is truncated to a Følner horizon, so witnesses are conclusive
//! while margins hold only at the probed resolution.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::action::ActionScenario;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::space::{farthest_point_net, Point, POINT_EQ_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeParams {
    pub eps: f64,
    /// Perturbations y are drawn with d(x, y) below this radius.
    pub probe_radius: f64,
    /// Følner index of the tested group elements.
    pub horizon: u64,
    pub trials: usize,
    pub seed: u64,
}

impl ProbeParams {
    pub fn new(eps: f64, probe_radius: f64) -> Self {
        ProbeParams { eps, probe_radius, horizon: 1 << 16, trials: 256, seed: 0 }
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.probe_radius > 0.0) {
            return Err(Error::domain("eps and probe_radius must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub y: Point,
    pub g: GroupElement,
    /// d(g·x, g·y), at least eps.
    pub attained_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub x: Point,
    pub eps: f64,
    pub probe_radius: f64,
    /// No sampled y closer than this to x was separated to eps by a tested g.
    pub delta_estimate: Option<f64>,
    /// First violating pair in sample order.
    pub witness: Option<Witness>,
    /// Number of perturbations actually tested.
    pub trials: usize,
    pub horizon: u64,
    /// Size of the detected stabilizer for the continuity probe.
    pub stabilizer_size: Option<usize>,
}

/// Re-evaluates a witness: d(g·x, g·y).
pub fn replay_witness(scenario: &ActionScenario, x: &Point, w: &Witness) -> Result<f64> {
    let gx = scenario.apply(&w.g, x)?;
    let gy = scenario.apply(&w.g, &w.y)?;
    scenario.space().distance(&gx, &gy)
}

fn perturbations(scenario: &ActionScenario, x: &Point, p: &ProbeParams) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    (0..p.trials).filter_map(|_| scenario.space().sample_near(x, p.probe_radius, &mut rng)).collect()
}

/// Tests every y against the listed group elements; returns the first
/// violating element for each y.
fn scan(
    scenario: &ActionScenario,
    x: &Point,
    ys: &[Point],
    eps: f64,
    elements: &(dyn Fn(u64) -> GroupElement + Sync),
    count: u64,
) -> Vec<Option<Witness>> {
    let space = scenario.space();
    ys.par_iter()
        .map(|y| {
            (0..count).find_map(|i| {
                let g = elements(i);
                let d = space.dist(&scenario.act(&g, x), &scenario.act(&g, y));
                (d >= eps).then_some(Witness { y: *y, g, attained_distance: d })
            })
        })
        .collect()
}

fn summarize(
    scenario: &ActionScenario,
    x: &Point,
    p: &ProbeParams,
    ys: &[Point],
    hits: Vec<Option<Witness>>,
    stabilizer_size: Option<usize>,
) -> StabilityReport {
    let space = scenario.space();
    let witness = hits.iter().flatten().next().copied();
    let delta_estimate = if ys.is_empty() {
        None
    } else {
        let closest_violation = hits
            .iter()
            .flatten()
            .map(|w| space.dist(x, &w.y))
            .fold(f64::INFINITY, f64::min);
        Some(closest_violation.min(p.probe_radius))
    };
    StabilityReport {
        x: *x,
        eps: p.eps,
        probe_radius: p.probe_radius,
        delta_estimate,
        witness,
        trials: ys.len(),
        horizon: p.horizon,
        stabilizer_size,
    }
}

/// Samples y near x and searches the Følner set at `horizon` for g with
/// d(g·x, g·y) ≥ eps.
pub fn stability_probe(scenario: &ActionScenario, x: &Point, p: &ProbeParams) -> Result<StabilityReport> {
    p.check()?;
    scenario.space().validate(x)?;
    let group = scenario.group();
    let size = group.folner_size(p.horizon);
    let ys = perturbations(scenario, x, p);
    let hits = scan(scenario, x, &ys, p.eps, &|i| group.folner_element(p.horizon, i), size);
    Ok(summarize(scenario, x, p, &ys, hits, None))
}

/// Elements of the Følner set at `horizon` that fix x within the point tolerance.
pub fn detect_stabilizer(scenario: &ActionScenario, x: &Point, horizon: u64) -> Result<Vec<GroupElement>> {
    scenario.space().validate(x)?;
    let group = scenario.group();
    let space = scenario.space();
    let size = group.folner_size(horizon);
    let found: Vec<Vec<GroupElement>> = (0..size.div_ceil(1 << 14))
        .into_par_iter()
        .map(|c| {
            (c << 14..((c + 1) << 14).min(size))
                .map(|i| group.folner_element(horizon, i))
                .filter(|g| space.dist(&scenario.act(g, x), x) < POINT_EQ_TOL)
                .collect()
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// The stability probe restricted to the detected stabilizer of x. A trivial
/// stabilizer gives the full probe radius as margin.
pub fn uniform_continuity_probe(scenario: &ActionScenario, x: &Point, p: &ProbeParams) -> Result<StabilityReport> {
    p.check()?;
    let stabilizer = detect_stabilizer(scenario, x, p.horizon)?;
    let size = Some(stabilizer.len());
    if stabilizer.len() <= 1 {
        return Ok(StabilityReport {
            x: *x,
            eps: p.eps,
            probe_radius: p.probe_radius,
            delta_estimate: Some(p.probe_radius),
            witness: None,
            trials: 0,
            horizon: p.horizon,
            stabilizer_size: size,
        });
    }
    let ys = perturbations(scenario, x, p);
    let hits = scan(scenario, x, &ys, p.eps, &|i| stabilizer[i as usize], stabilizer.len() as u64);
    Ok(summarize(scenario, x, p, &ys, hits, size))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApParams {
    pub eps: f64,
    pub translate_count: usize,
    pub probe_count: usize,
    pub net_cap: usize,
    /// Følner index the translates g are drawn from.
    pub translate_horizon: u64,
    /// Følner index the evaluation points h are drawn from.
    pub probe_horizon: u64,
    pub seed: u64,
}

impl ApParams {
    pub fn new(eps: f64) -> Self {
        ApParams { eps, translate_count: 256, probe_count: 1024, net_cap: 64, translate_horizon: 1 << 12, probe_horizon: 1 << 13, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApVerdict {
    ApAtResolution,
    NotAp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlmostPeriodicityReport {
    pub x: Point,
    pub fname: String,
    pub eps: f64,
    pub net_size: Option<usize>,
    /// Size of the pairwise eps-separated family of translates found.
    pub separated_family_size: usize,
    pub verdict: ApVerdict,
    /// The sampled translates g.
    pub translates: Vec<GroupElement>,
    /// Indices into `translates` of the net (or of the separated family).
    pub net: Vec<usize>,
}

/// Values of L_g φ_x at the shared probe points h: φ((g + h)·x).
pub fn translate_profiles(
    scenario: &ActionScenario,
    fname: &str,
    x: &Point,
    translates: &[GroupElement],
    probes: &[GroupElement],
) -> Result<Vec<Vec<Complex64>>> {
    let f = scenario.function(fname)?;
    let group = scenario.group();
    translates
        .par_iter()
        .map(|g| {
            probes
                .iter()
                .map(|h| Ok(f.eval(&scenario.act(&group.compose(g, h)?, x))))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Empirical sup-distance between two translate profiles.
pub fn sup_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
}

/// Farthest-point net of sampled translates under the empirical sup metric.
pub fn almost_periodicity_test(scenario: &ActionScenario, fname: &str, x: &Point, p: &ApParams) -> Result<AlmostPeriodicityReport> {
    if p.eps.is_nan() || p.eps <= 0.0 {
        return Err(Error::domain("eps must be positive"));
    }
    if p.translate_count == 0 || p.probe_count == 0 {
        return Err(Error::domain("translate_count and probe_count must be positive"));
    }
    scenario.space().validate(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let translates: Vec<GroupElement> =
        (0..p.translate_count).map(|_| scenario.random_element(p.translate_horizon, &mut rng)).collect();
    let probes: Vec<GroupElement> = (0..p.probe_count).map(|_| scenario.random_element(p.probe_horizon, &mut rng)).collect();
    let profiles = translate_profiles(scenario, fname, x, &translates, &probes)?;
    let net = farthest_point_net(profiles.len(), p.eps, p.net_cap, |i, j| sup_distance(&profiles[i], &profiles[j]));
    let ap = net.len() <= p.net_cap;
    Ok(AlmostPeriodicityReport {
        x: *x,
        fname: fname.to_string(),
        eps: p.eps,
        net_size: ap.then_some(net.len()),
        separated_family_size: net.len(),
        verdict: if ap { ApVerdict::ApAtResolution } else { ApVerdict::NotAp },
        translates,
        net,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::fixture;
    use crate::space::ScenarioId;

    #[test]
    fn rotation_keeps_full_margin() {
        let s = fixture(ScenarioId::Rotation);
        let x = s.space().parse_point("t=0.3").unwrap();
        let p = ProbeParams { horizon: 1 << 10, trials: 64, ..ProbeParams::new(0.1, 0.1) };
        let r = stability_probe(&s, &x, &p).unwrap();
        assert!(r.witness.is_none());
        assert_eq!(r.delta_estimate, Some(0.1));
    }

    #[test]
    fn spiral_has_trivial_stabilizer() {
        let s = fixture(ScenarioId::SpiralTwoCircles);
        let x = s.space().parse_point("sigma;tau=2").unwrap();
        let p = ProbeParams { horizon: 1 << 12, ..ProbeParams::new(0.5, 0.05) };
        let r = uniform_continuity_probe(&s, &x, &p).unwrap();
        assert_eq!(r.stabilizer_size, Some(1));
        assert_eq!(r.delta_estimate, Some(0.05));
    }

    #[test]
    fn constant_function_is_almost_periodic() {
        let s = fixture(ScenarioId::SpiralTwoCircles);
        let x = s.space().parse_point("sigma;tau=0").unwrap();
        let p = ApParams { translate_count: 32, probe_count: 32, ..ApParams::new(0.1) };
        let r = almost_periodicity_test(&s, "const", &x, &p).unwrap();
        assert_eq!(r.net_size, Some(1));
        assert_eq!(r.verdict, ApVerdict::ApAtResolution);
    }
}
