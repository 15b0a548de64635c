//! Finite-orbit detection, clustering of infinite orbit closures, and the
//! orbit-census classification of the Hilbert module.

use std::fmt;

use rayon::prelude::*;

use crate::action::{ActionScenario, ScenarioFlags};
use crate::error::{Error, Result};
use crate::space::{MetricSpace, Point, PointGrid, POINT_EQ_TOL};

/// Default number of distinct points after which an orbit is judged infinite.
pub const DEFAULT_ORBIT_CUTOFF: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitVerdict {
    Finite(usize),
    InfiniteLikely,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitProbe {
    pub x: Point,
    pub verdict: OrbitVerdict,
    /// Distinct orbit points in discovery order.
    pub visited: Vec<Point>,
    pub cutoff_used: usize,
}

/// Enumerates g·x over growing Følner sets, merging points within the point
/// tolerance, until the visited set is closed under the generators acting on
/// x's stratum or more than `cutoff` distinct points are found.
pub fn orbit_probe(scenario: &ActionScenario, x: &Point, cutoff: usize) -> Result<OrbitProbe> {
    if cutoff == 0 {
        return Err(Error::domain("orbit cutoff must be at least 1"));
    }
    scenario.space().validate(x)?;
    let group = scenario.group();
    let generators = scenario.orbit_generators(x);
    let mut grid = PointGrid::new(scenario.space(), POINT_EQ_TOL);
    let mut prev: Option<u64> = None;
    let mut index = if group.is_finite() { 0 } else { 1 };
    loop {
        for g in group.shell(prev, index) {
            let y = scenario.act(&g, x);
            if grid.find_within(&y, POINT_EQ_TOL).is_none() {
                if grid.len() == cutoff {
                    return Ok(OrbitProbe {
                        x: *x,
                        verdict: OrbitVerdict::InfiniteLikely,
                        visited: grid.points().to_vec(),
                        cutoff_used: cutoff,
                    });
                }
                grid.insert(y);
            }
        }
        let closed = grid.points().iter().all(|p| {
            generators
                .iter()
                .all(|s| grid.find_within(&scenario.act(s, p), POINT_EQ_TOL).is_some())
        });
        if closed {
            let visited = grid.points().to_vec();
            return Ok(OrbitProbe { x: *x, verdict: OrbitVerdict::Finite(visited.len()), visited, cutoff_used: cutoff });
        }
        prev = Some(index);
        index = group.next_index(index);
    }
}

/// Brute-force Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(space: &MetricSpace, a: &[Point], b: &[Point]) -> f64 {
    let one_way = |from: &[Point], to: &[Point]| {
        from.par_iter()
            .map(|p| to.iter().map(|q| space.dist(p, q)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Evenly strided subsample of at most `count` points.
fn stride_sample(points: &[Point], count: usize) -> Vec<Point> {
    if points.len() <= count {
        return points.to_vec();
    }
    (0..count).map(|i| points[i * points.len() / count]).collect()
}

/// Whether every sampled point of each set lies within `sep` of the other set.
fn hausdorff_within(space: &MetricSpace, a: &[Point], b: &[Point], sep: f64, samples: usize) -> bool {
    let covers = |from: &[Point], to: &[Point]| {
        let mut grid = PointGrid::new(space, sep);
        for p in to {
            grid.insert(*p);
        }
        stride_sample(from, samples).iter().all(|p| grid.find_within(p, sep).is_some())
    };
    covers(a, b) && covers(b, a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusParams {
    pub sample_size: usize,
    pub cutoff: usize,
    /// Hausdorff threshold for merging closures; defaults to 5% of the diameter.
    pub cluster_sep: Option<f64>,
    /// Points drawn from each orbit when comparing two closures.
    pub hausdorff_samples: usize,
    pub seed: u64,
}

impl Default for CensusParams {
    fn default() -> Self {
        CensusParams { sample_size: 64, cutoff: DEFAULT_ORBIT_CUTOFF, cluster_sep: None, hausdorff_samples: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCensus {
    pub samples: usize,
    /// Cardinalities of the finite orbits, in sample order.
    pub finite_cardinalities: Vec<usize>,
    pub infinite_closure_clusters: usize,
    pub max_finite_card: Option<usize>,
    pub cluster_sep: f64,
    /// Starting point of the first orbit in each cluster.
    pub cluster_leaders: Vec<Point>,
}

impl OrbitCensus {
    pub fn distinct_cardinalities(&self) -> Vec<usize> {
        let mut v = self.finite_cardinalities.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Probes sampled points and clusters the infinite orbits by sampled
/// Hausdorff distance (leader clustering in sample order).
pub fn census(scenario: &ActionScenario, params: &CensusParams) -> Result<OrbitCensus> {
    if params.sample_size == 0 {
        return Err(Error::domain("census needs at least one sample"));
    }
    let space = scenario.space();
    let sep = params.cluster_sep.unwrap_or(0.05 * space.diameter());
    if sep <= 0.0 || !sep.is_finite() {
        return Err(Error::domain(format!("cluster_sep must be positive, got {sep}")));
    }
    let points = space.sample_points(params.sample_size, params.seed);
    let probes = points
        .par_iter()
        .map(|x| orbit_probe(scenario, x, params.cutoff))
        .collect::<Result<Vec<_>>>()?;

    let mut finite = Vec::new();
    let mut leaders: Vec<&OrbitProbe> = Vec::new();
    for probe in &probes {
        match probe.verdict {
            OrbitVerdict::Finite(c) => finite.push(c),
            OrbitVerdict::InfiniteLikely => {
                let known = leaders
                    .iter()
                    .any(|l| hausdorff_within(space, &l.visited, &probe.visited, sep, params.hausdorff_samples));
                if !known {
                    leaders.push(probe);
                }
            }
        }
    }
    Ok(OrbitCensus {
        samples: params.sample_size,
        max_finite_card: finite.iter().copied().max(),
        finite_cardinalities: finite,
        infinite_closure_clusters: leaders.len(),
        cluster_sep: sep,
        cluster_leaders: leaders.iter().map(|l| l.x).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModuleLabel {
    SelfDual,
    Reflexive,
    /// The self-duality criterion fails: too many infinite closures.
    NotSelfDual,
    Inconclusive,
}

impl ModuleLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ModuleLabel::SelfDual => "SelfDual",
            ModuleLabel::Reflexive => "Reflexive",
            ModuleLabel::NotSelfDual => "NotSelfDual-SelfDualFails",
            ModuleLabel::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for ModuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification rules, each a sufficient condition or its failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// The declared conditional expectation is discontinuous; no module rule applies.
    DiscontinuousAverage,
    /// Finitely many infinite closures and a single finite-orbit cardinality.
    UniformOrbits,
    /// One finite-orbit cardinality but more infinite closures than the bound.
    TooManyClosures,
    /// Lyapunov stable, finite-orbit cardinalities bounded, finitely many closures.
    BoundedOrbits,
    /// Compact metric space with a Lyapunov stable action.
    MetricStable,
    /// None of the sufficient conditions could be confirmed.
    NoRuleApplies,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::DiscontinuousAverage => "discontinuous-average rule",
            Rule::UniformOrbits => "uniform-orbit rule",
            Rule::TooManyClosures => "closure-count rule",
            Rule::BoundedOrbits => "bounded-orbit rule",
            Rule::MetricStable => "metric-stable rule",
            Rule::NoRuleApplies => "no rule",
        }
    }

    fn label(self) -> ModuleLabel {
        match self {
            Rule::UniformOrbits => ModuleLabel::SelfDual,
            Rule::TooManyClosures => ModuleLabel::NotSelfDual,
            Rule::BoundedOrbits | Rule::MetricStable => ModuleLabel::Reflexive,
            Rule::DiscontinuousAverage | Rule::NoRuleApplies => ModuleLabel::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyParams {
    /// Largest number of infinite closures still treated as "finitely many".
    pub cluster_bound: usize,
    /// More distinct finite cardinalities than this count as unbounded growth.
    pub distinct_card_limit: usize,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams { cluster_bound: 4, distinct_card_limit: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleClassification {
    pub label: ModuleLabel,
    /// The rule that decided the label.
    pub rule: Rule,
    /// Every rule that fired, with its evidence.
    pub fired: Vec<Rule>,
    pub reasons: Vec<String>,
}

/// Applies every rule to the census and flags, then picks the label of the
/// strongest rule that fired.
pub fn classify_module(census: &OrbitCensus, flags: ScenarioFlags, params: &ClassifyParams) -> ModuleClassification {
    let distinct = census.distinct_cardinalities();
    let clusters = census.infinite_closure_clusters;
    let few_closures = clusters <= params.cluster_bound;
    let stable = flags.lyapunov_stable;
    let mut hits: Vec<(Rule, String)> = Vec::new();
    let mut fire = |rule: Rule, why: String| hits.push((rule, why));

    if !flags.continuous_average {
        fire(Rule::DiscontinuousAverage, "the scenario declares a discontinuous conditional expectation".into());
    }
    if distinct.len() <= 1 && few_closures {
        fire(
            Rule::UniformOrbits,
            format!(
                "finite orbits share cardinality {:?} and {clusters} infinite closure(s) ≤ {} at resolution {:.4}",
                distinct.first(),
                params.cluster_bound,
                census.cluster_sep
            ),
        );
    }
    if distinct.len() <= 1 && !few_closures {
        fire(
            Rule::TooManyClosures,
            format!(
                "{clusters} infinite closures exceed the bound {} at resolution {:.4}; the self-duality criterion fails",
                params.cluster_bound, census.cluster_sep
            ),
        );
    }
    if stable && distinct.len() <= params.distinct_card_limit && few_closures {
        fire(
            Rule::BoundedOrbits,
            format!("stable action, finite cardinalities {distinct:?} bounded, {clusters} infinite closure(s)"),
        );
    }
    if flags.metric && stable {
        fire(Rule::MetricStable, "compact metric space with a Lyapunov stable action".into());
    }
    if hits.is_empty() {
        hits.push((
            Rule::NoRuleApplies,
            format!("{} distinct finite cardinalities and {clusters} infinite closures", distinct.len()),
        ));
    }
    let fired: Vec<Rule> = hits.iter().map(|(r, _)| *r).collect();
    let reasons: Vec<String> = hits.iter().map(|(r, why)| format!("{}: {why}", r.name())).collect();

    let priority = [
        Rule::DiscontinuousAverage,
        Rule::UniformOrbits,
        Rule::TooManyClosures,
        Rule::BoundedOrbits,
        Rule::MetricStable,
        Rule::NoRuleApplies,
    ];
    let rule = priority.into_iter().find(|r| fired.contains(r)).unwrap_or(Rule::NoRuleApplies);
    ModuleClassification { label: rule.label(), rule, fired, reasons }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn census_of(cards: &[usize], clusters: usize) -> OrbitCensus {
        OrbitCensus {
            samples: cards.len() + clusters,
            finite_cardinalities: cards.to_vec(),
            infinite_closure_clusters: clusters,
            max_finite_card: cards.iter().copied().max(),
            cluster_sep: 0.1,
            cluster_leaders: Vec::new(),
        }
    }

    const STABLE: ScenarioFlags = ScenarioFlags { metric: true, lyapunov_stable: true, continuous_average: true, isometric: true };
    const UNSTABLE: ScenarioFlags = ScenarioFlags { metric: true, lyapunov_stable: false, continuous_average: true, isometric: false };

    #[test]
    fn uniform_cardinalities_are_self_dual() {
        let c = classify_module(&census_of(&[3, 3, 3], 0), UNSTABLE, &ClassifyParams::default());
        assert_eq!(c.label, ModuleLabel::SelfDual);
        assert_eq!(c.rule, Rule::UniformOrbits);
    }

    #[test]
    fn growing_cardinalities_fall_back_to_metric_rule() {
        let c = classify_module(&census_of(&[2, 4, 8, 16, 32], 1), STABLE, &ClassifyParams::default());
        assert_eq!(c.label, ModuleLabel::Reflexive);
        assert_eq!(c.rule, Rule::MetricStable);
        assert!(!c.fired.contains(&Rule::BoundedOrbits));
    }

    #[test]
    fn bounded_cardinalities_with_stability() {
        let c = classify_module(&census_of(&[1, 2, 2], 2), ScenarioFlags { metric: false, ..STABLE }, &ClassifyParams::default());
        assert_eq!(c.rule, Rule::BoundedOrbits);
    }

    #[test]
    fn many_closures_fail_self_duality() {
        let c = classify_module(&census_of(&[1, 1], 16), STABLE, &ClassifyParams::default());
        assert_eq!(c.label, ModuleLabel::NotSelfDual);
        assert!(c.fired.contains(&Rule::MetricStable));
        assert_eq!(c.reasons.len(), c.fired.len());
    }

    #[test]
    fn discontinuity_and_no_rule_are_inconclusive() {
        let flags = ScenarioFlags { continuous_average: false, ..UNSTABLE };
        assert_eq!(classify_module(&census_of(&[], 2), flags, &ClassifyParams::default()).label, ModuleLabel::Inconclusive);
        let c = classify_module(&census_of(&[2, 4, 8, 16], 9), UNSTABLE, &ClassifyParams::default());
        assert_eq!(c.rule, Rule::NoRuleApplies);
    }

    #[test]
    fn classification_is_pure() {
        let c = census_of(&[7, 7], 0);
        assert_eq!(classify_module(&c, STABLE, &ClassifyParams::default()), classify_module(&c, STABLE, &ClassifyParams::default()));
    }
}
