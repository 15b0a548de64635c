//! Invariant means by Følner averaging, orbit-closure quadrature, the
//! pointwise inner product and the sampled conditional-expectation field.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::action::{ActionScenario, Closure, Observable};
use crate::census::{orbit_probe, OrbitVerdict, DEFAULT_ORBIT_CUTOFF};
use crate::error::{Error, Result};
use crate::space::{Point, Region};
use crate::sum::{exact_sum_complex, Compensated};

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingConfig {
    /// Stop once two successive stages differ by less than this.
    pub tol: f64,
    /// Largest Følner index for groups with an integer summand; for ⊕Z₂ the
    /// largest index is ⌊log₂ n_max⌋.
    pub n_max: u64,
    /// First stage of the doubling schedule.
    pub n_start: u64,
    /// Orbit size above which the finite-orbit fast path is abandoned.
    pub orbit_cutoff: usize,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        AveragingConfig { tol: 1e-3, n_max: 1 << 20, n_start: 1024, orbit_cutoff: DEFAULT_ORBIT_CUTOFF }
    }
}

impl AveragingConfig {
    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.n_max == 0 || self.orbit_cutoff == 0 {
            return Err(Error::domain("n_max and orbit_cutoff must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageReport {
    pub value: Complex64,
    /// (Følner index, average over that Følner set).
    pub stages: Vec<(u64, Complex64)>,
    pub converged: bool,
    pub tol_used: f64,
    /// Largest |φ| over every point the run evaluated.
    pub sup_norm: f64,
    /// Orbit size when the finite-orbit fast path was taken.
    pub finite_orbit: Option<usize>,
}

/// Exact mean of φ over a finite orbit: correctly rounded sum, then one division.
pub(crate) fn finite_orbit_mean(points: &[Point], f: impl Fn(&Point) -> Complex64) -> (Complex64, f64) {
    let values: Vec<Complex64> = points.iter().map(f).collect();
    let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    (exact_sum_complex(values.iter().copied()) / points.len() as f64, sup)
}

/// Sum of f(g·x) over the Følner set at `index` minus the one at `prev`.
/// Chunks are summed in parallel and combined in index order.
fn shell_sum(
    scenario: &ActionScenario,
    x: &Point,
    prev: Option<u64>,
    index: u64,
    f: &(impl Fn(&Point) -> Complex64 + Sync),
) -> (Complex64, f64) {
    let group = scenario.group();
    let size = group.folner_size(index);
    let chunks: Vec<(Complex64, f64)> = (0..size.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Compensated::new();
            let mut sup = 0f64;
            for i in c * CHUNK..((c + 1) * CHUNK).min(size) {
                let g = group.folner_element(index, i);
                if prev.is_some_and(|p| group.in_folner(&g, p)) {
                    continue;
                }
                let v = f(&scenario.act(&g, x));
                sup = sup.max(v.norm());
                acc.add(v);
            }
            (acc.value(), sup)
        })
        .collect();
    let mut total = Compensated::new();
    let mut sup = 0f64;
    for (s, m) in chunks {
        total.add(s);
        sup = sup.max(m);
    }
    (total.value(), sup)
}

/// Følner average of an arbitrary function of the orbit points.
pub fn average_with(
    scenario: &ActionScenario,
    x: &Point,
    cfg: &AveragingConfig,
    f: impl Fn(&Point) -> Complex64 + Sync,
) -> Result<AverageReport> {
    cfg.check()?;
    scenario.space().validate(x)?;
    let probe = orbit_probe(scenario, x, cfg.orbit_cutoff)?;
    if let OrbitVerdict::Finite(c) = probe.verdict {
        let (value, sup_norm) = finite_orbit_mean(&probe.visited, &f);
        return Ok(AverageReport {
            value,
            stages: vec![(0, value)],
            converged: true,
            tol_used: cfg.tol,
            sup_norm,
            finite_orbit: Some(c),
        });
    }

    let group = scenario.group();
    let max_index = group.max_index(cfg.n_max);
    let mut index = if group.has_integer() {
        cfg.n_start.min(max_index)
    } else if group.has_bits() {
        (cfg.n_start.max(1).ilog2() as u64).min(max_index)
    } else {
        0
    };
    let mut prev: Option<u64> = None;
    let mut sum = Compensated::new();
    let mut sup_norm = 0f64;
    let mut stages: Vec<(u64, Complex64)> = Vec::new();
    let mut converged = false;
    loop {
        let (s, m) = shell_sum(scenario, x, prev, index, &f);
        sum.add(s);
        sup_norm = sup_norm.max(m);
        let value = sum.value() / group.folner_size(index) as f64;
        if let Some(&(_, last)) = stages.last() {
            if (value - last).norm() < cfg.tol {
                converged = true;
            }
        }
        stages.push((index, value));
        let next = group.next_index(index);
        if converged || next > max_index {
            // A finite group's Følner set is the whole group.
            converged |= group.is_finite();
            break;
        }
        prev = Some(index);
        index = next;
    }
    let value = stages.last().map(|s| s.1).unwrap_or_default();
    Ok(AverageReport { value, stages, converged, tol_used: cfg.tol, sup_norm, finite_orbit: None })
}

/// M(φ_x): the invariant mean of g ↦ φ(g·x).
pub fn folner_average(scenario: &ActionScenario, fname: &str, x: &Point, cfg: &AveragingConfig) -> Result<AverageReport> {
    let f = scenario.function(fname)?;
    average_with(scenario, x, cfg, move |p| f.eval(p))
}

/// ⟨φ, ψ⟩(x) = M(φ_x · conj ψ_x).
pub fn inner_product(scenario: &ActionScenario, phi: &str, psi: &str, x: &Point, cfg: &AveragingConfig) -> Result<AverageReport> {
    let (f, g) = (scenario.function(phi)?, scenario.function(psi)?);
    average_with(scenario, x, cfg, move |p| f.eval(p) * g.eval(p).conj())
}

/// Følner frequency of orbit visits of `x` to `region`.
pub fn visit_frequency(scenario: &ActionScenario, x: &Point, region: &Region, cfg: &AveragingConfig) -> Result<AverageReport> {
    let space = scenario.space();
    average_with(scenario, x, cfg, |p| Complex64::new(region.contains(space, p) as u8 as f64, 0.0))
}

/// ∫ φ dμ over the orbit closure of x with its invariant measure.
pub fn orbit_closure_average(scenario: &ActionScenario, fname: &str, x: &Point, quadrature_size: usize) -> Result<Complex64> {
    let f = scenario.function(fname)?;
    closure_average_with(scenario, x, quadrature_size, |p| f.eval(p))
}

pub(crate) fn closure_average_with(
    scenario: &ActionScenario,
    x: &Point,
    quadrature_size: usize,
    f: impl Fn(&Point) -> Complex64,
) -> Result<Complex64> {
    if quadrature_size == 0 {
        return Err(Error::domain("quadrature_size must be positive"));
    }
    match scenario.closure(x, quadrature_size)? {
        Closure::Nodes(nodes) => Ok(finite_orbit_mean(&nodes, f).0),
        Closure::FiniteOrbit => {
            let probe = orbit_probe(scenario, x, DEFAULT_ORBIT_CUTOFF)?;
            match probe.verdict {
                OrbitVerdict::Finite(_) => Ok(finite_orbit_mean(&probe.visited, f).0),
                OrbitVerdict::InfiniteLikely => Err(Error::unsupported("declared finite orbit exceeds the probe cutoff")),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    /// Pairs closer than this are compared; defaults to twice the grid mesh.
    pub jump_window: Option<f64>,
    pub jump_threshold: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams { jump_window: None, jump_threshold: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuityVerdict {
    ContinuousAtResolution,
    JumpDetected { location: (Point, Point), magnitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldReport {
    pub grid: Vec<Point>,
    pub values: Vec<Complex64>,
    pub reports: Vec<AverageReport>,
    pub max_jump: f64,
    pub jump_window: f64,
    pub verdict: ContinuityVerdict,
}

impl FieldReport {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }
}

/// Largest nearest-neighbour distance within the grid.
pub fn grid_mesh(scenario: &ActionScenario, grid: &[Point]) -> f64 {
    let space = scenario.space();
    if grid.len() < 2 {
        return 0.0;
    }
    grid.par_iter()
        .enumerate()
        .map(|(i, p)| {
            grid.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| space.dist(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// E_Γ(φ) sampled on `grid`, with a scan for jumps between nearby points.
pub fn expectation_field(
    scenario: &ActionScenario,
    fname: &str,
    grid: &[Point],
    cfg: &AveragingConfig,
    params: &FieldParams,
) -> Result<FieldReport> {
    if grid.is_empty() {
        return Err(Error::domain("expectation field needs a nonempty grid"));
    }
    let f: Observable = scenario.function(fname)?;
    for p in grid {
        scenario.space().validate(p)?;
    }
    let reports = grid
        .par_iter()
        .map(|x| average_with(scenario, x, cfg, |p| f.eval(p)))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<Complex64> = reports.iter().map(|r| r.value).collect();
    let window = params.jump_window.unwrap_or_else(|| 2.0 * grid_mesh(scenario, grid));
    let space = scenario.space();
    let (max_jump, location) = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (0.0, None);
            for j in i + 1..grid.len() {
                if space.dist(&grid[i], &grid[j]) < window {
                    let jump = (values[i] - values[j]).norm();
                    if jump > best.0 {
                        best = (jump, Some((i, j)));
                    }
                }
            }
            best
        })
        .reduce(|| (0.0, None), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1 && b.1.is_some()) { b } else { a });
    let verdict = match location {
        Some((i, j)) if max_jump > params.jump_threshold => {
            ContinuityVerdict::JumpDetected { location: (grid[i], grid[j]), magnitude: max_jump }
        }
        _ => ContinuityVerdict::ContinuousAtResolution,
    };
    Ok(FieldReport { grid: grid.to_vec(), values, reports, max_jump, jump_window: window, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::fixture;
    use crate::space::{Coords, ScenarioId};

    #[test]
    fn rotation_cosine_mean_vanishes() {
        let s = fixture(ScenarioId::Rotation);
        let x = Point::new(s.id(), Coords::Circle { t: 0.2 });
        let r = folner_average(&s, "cos1", &x, &AveragingConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.value.norm() < 1e-2);
        assert!(r.value.norm() <= r.sup_norm);
        let last = r.stages.len() - 1;
        assert!((r.stages[last].1 - r.stages[last - 1].1).norm() < r.tol_used);
    }

    #[test]
    fn unknown_function_is_a_domain_error() {
        let s = fixture(ScenarioId::Rotation);
        let x = Point::new(s.id(), Coords::Circle { t: 0.2 });
        assert!(matches!(folner_average(&s, "nope", &x, &AveragingConfig::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn dyadic_finite_level_mean() {
        let s = fixture(ScenarioId::DyadicProduct);
        let x = s.space().parse_point("j=1/2;bits=101").unwrap();
        let r = folner_average(&s, "bit3", &x, &AveragingConfig::default()).unwrap();
        assert_eq!(r.finite_orbit, Some(4));
        assert_eq!(r.value.re, 1.0);
        let r = folner_average(&s, "cyl00", &x, &AveragingConfig::default()).unwrap();
        assert_eq!(r.value.re, 0.25);
    }

    #[test]
    fn non_convergence_is_reported() {
        let s = fixture(ScenarioId::SpiralTwoCircles);
        let x = s.space().parse_point("sigma;tau=-40").unwrap();
        let cfg = AveragingConfig { n_max: 2048, ..Default::default() };
        let r = folner_average(&s, "z", &x, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.stages.len(), 2);
    }

    #[test]
    fn closure_quadrature_of_cos_squared() {
        let s = fixture(ScenarioId::Rotation);
        let x = Point::new(s.id(), Coords::Circle { t: 0.9 });
        let v = orbit_closure_average(&s, "cos1_sq", &x, 64).unwrap();
        assert!((v.re - 0.5).abs() < 1e-14);
        let spiral = fixture(ScenarioId::SpiralTwoCircles);
        let sigma = spiral.space().parse_point("sigma;tau=1").unwrap();
        assert!(matches!(orbit_closure_average(&spiral, "z", &sigma, 64), Err(Error::Unsupported(_))));
    }
}
