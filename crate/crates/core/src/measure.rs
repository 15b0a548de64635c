//! Invariant measures on orbit closures from covering indices by group
//! translates: (A:B), the ratios λ, the limit functional λ′, and the check
//! λ′(K₁)·ν(K₂) = λ′(K₂)·ν(K₁) against orbit visit frequencies.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::action::ActionScenario;
use crate::averaging::{visit_frequency, AveragingConfig};
use crate::census::{orbit_probe, OrbitVerdict, DEFAULT_ORBIT_CUTOFF};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::space::{Coords, CompactSubset, Geometry, JLevel, Point, Region};

/// Witness lattice resolution on circles: i / CIRCLE_LATTICE.
pub const CIRCLE_LATTICE: usize = 8192;
/// Enumerated dyadic prefix length for fiber witnesses.
pub const DYADIC_LATTICE_BITS: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringResult {
    pub index_value: usize,
    /// Group translates g with the sets gB used by the greedy cover.
    pub chosen_translates: Vec<GroupElement>,
    /// Rotation offsets of the arcs used by the exhaustive arc cover.
    pub arc_offsets: Vec<f64>,
    /// Size of a witness family no single pool translate covers two of.
    pub lower_bound: usize,
    pub exhaustive: bool,
}

/// Dense finite sample of the scenario space used as covering witnesses.
pub fn witness_lattice(scenario: &ActionScenario) -> Result<Vec<Point>> {
    let id = scenario.id();
    match scenario.space().geometry() {
        Geometry::Circle => {
            Ok((0..CIRCLE_LATTICE).map(|i| Point::new(id, Coords::Circle { t: i as f64 / CIRCLE_LATTICE as f64 })).collect())
        }
        Geometry::Dyadic { depth, .. } => {
            let bits = DYADIC_LATTICE_BITS.min(depth);
            Ok((0..1u64 << bits).map(|b| Point::new(id, Coords::Dyadic { level: JLevel::Limit, bits: b })).collect())
        }
        _ => Err(Error::unsupported(format!("no covering lattice for `{id}`"))),
    }
}

/// Compact subset with its witness sample taken from the scenario lattice.
pub fn lattice_subset(scenario: &ActionScenario, region: Region, anchor: Option<Point>) -> Result<CompactSubset> {
    let lattice = witness_lattice(scenario)?;
    CompactSubset::from_lattice(scenario.space(), region, &lattice, anchor)
}

/// Greedy cover of A's witnesses by translates gB, g from the first
/// `pool_size` Følner elements (shuffled by `seed` to break ties), plus a
/// packing lower bound valid for covers drawn from the same pool.
pub fn covering_index(
    scenario: &ActionScenario,
    a: &CompactSubset,
    b: &CompactSubset,
    pool_size: usize,
    seed: u64,
) -> Result<CoveringResult> {
    if pool_size == 0 {
        return Err(Error::domain("translate pool must be nonempty"));
    }
    let group = scenario.group();
    let space = scenario.space();
    let mut index = 0;
    while (group.folner_size(index) as usize) < pool_size && !group.is_finite() {
        index = group.next_index(index).max(index + 1);
    }
    let available = (group.folner_size(index) as usize).min(pool_size);
    let mut pool: Vec<GroupElement> = (0..available as u64).map(|i| group.folner_element(index, i)).collect();
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let witness = a.witness();
    let words = witness.len().div_ceil(64);
    // covers[k] marks the witnesses inside pool[k]·B, i.e. with pool[k]⁻¹·w ∈ B.
    let covers: Vec<Vec<u64>> = pool
        .par_iter()
        .map(|g| {
            let inv = group.inverse(g)?;
            let mut bits = vec![0u64; words];
            for (i, w) in witness.iter().enumerate() {
                if b.contains(space, &scenario.act(&inv, w)) {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            Ok(bits)
        })
        .collect::<Result<_>>()?;

    let mut covered = vec![0u64; words];
    let mut left = witness.len();
    let mut chosen = Vec::new();
    while left > 0 {
        let gain = |c: &Vec<u64>| c.iter().zip(&covered).map(|(x, y)| (x & !y).count_ones() as usize).sum::<usize>();
        let (best, best_gain) = covers
            .par_iter()
            .enumerate()
            .map(|(k, c)| (k, gain(c)))
            .reduce(|| (usize::MAX, 0), |p, q| if q.1 > p.1 || (q.1 == p.1 && q.0 < p.0) { q } else { p });
        if best_gain == 0 {
            return Err(Error::Coverage { uncovered: left, total: witness.len() });
        }
        for (c, x) in covered.iter_mut().zip(&covers[best]) {
            *c |= x;
        }
        left -= best_gain;
        chosen.push(pool[best]);
    }

    // Packing: accept a witness when every translate covering it is still unused.
    let mut used = vec![false; pool.len()];
    let mut packing = 0;
    for i in 0..witness.len() {
        let holders: Vec<usize> = (0..pool.len()).filter(|&k| covers[k][i / 64] >> (i % 64) & 1 == 1).collect();
        if holders.iter().all(|&k| !used[k]) {
            packing += 1;
            for k in holders {
                used[k] = true;
            }
        }
    }
    Ok(CoveringResult {
        index_value: chosen.len(),
        chosen_translates: chosen,
        arc_offsets: Vec::new(),
        lower_bound: packing,
        exhaustive: false,
    })
}

/// Length of an arc-shaped region: arcs and neighbourhoods of arcs.
fn arc_extent(region: &Region) -> Option<(f64, f64)> {
    match region {
        Region::Arc { start, len } => Some((*start, *len)),
        Region::Neighborhood { core, radius } => {
            let (s, l) = arc_extent(core)?;
            Some((s - radius, l + 2.0 * radius))
        }
        Region::Ball { center, radius } => match center.coords {
            Coords::Circle { t } => Some((t - radius, 2.0 * radius)),
            _ => None,
        },
        Region::DyadicCylinder { .. } => None,
    }
}

/// Minimal number of rotated copies of the arc B covering A's witnesses,
/// over all real rotations. Every optimal cover can be slid until each arc
/// starts at a witness, so it suffices to try each start near the first
/// witness and cover greedily around the circle.
pub fn exact_arc_cover(a: &CompactSubset, b: &CompactSubset) -> Result<CoveringResult> {
    let (_, len) = arc_extent(b.region()).ok_or_else(|| Error::unsupported("exhaustive covers need an arc-shaped B"))?;
    let mut ts: Vec<f64> = a
        .witness()
        .iter()
        .map(|p| match p.coords {
            Coords::Circle { t } => Ok(t),
            _ => Err(Error::unsupported("exhaustive covers need circle witnesses")),
        })
        .collect::<Result<_>>()?;
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let n = ts.len();
    if len >= 1.0 {
        return Ok(CoveringResult { index_value: 1, chosen_translates: Vec::new(), arc_offsets: vec![ts[0]], lower_bound: 1, exhaustive: true });
    }
    if len <= 0.0 {
        return Err(Error::Coverage { uncovered: n, total: n });
    }
    // Unrolled positions: ts[i] + k for wrap-around.
    let pos = |i: usize| ts[i % n] + (i / n) as f64;
    // Candidate first arcs start at witnesses in (t0 - len, t0], taken circularly.
    let mut starts = vec![0usize];
    for i in (1..n).rev() {
        if ts[0] + 1.0 - ts[i] < len {
            starts.push(i);
        } else {
            break;
        }
    }
    let cover_from = |s: usize| -> Vec<f64> {
        let mut offsets = Vec::new();
        let mut i = s;
        while i < s + n {
            let start = pos(i);
            offsets.push(start);
            while i < s + n && pos(i) < start + len {
                i += 1;
            }
        }
        offsets
    };
    let best = starts
        .par_iter()
        .map(|&s| cover_from(s))
        .min_by(|x, y| x.len().cmp(&y.len()))
        .unwrap_or_default();
    let m = best.len();
    Ok(CoveringResult {
        index_value: m,
        chosen_translates: Vec::new(),
        arc_offsets: best.into_iter().map(|o| o.rem_euclid(1.0)).collect(),
        lower_bound: m,
        exhaustive: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureParams {
    /// Strictly decreasing radii; the default is 2^{-k}, k = 2..=10.
    pub eps_schedule: Vec<f64>,
    pub tol: f64,
    pub pool_size: usize,
    pub seed: u64,
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams { eps_schedule: (2..=10).map(|k| 2f64.powi(-k)).collect(), tol: 1e-2, pool_size: 4096, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureStage {
    pub eps: f64,
    /// (K_eps : U_eps(a)).
    pub k_index: usize,
    /// (A0 : U_eps(a)).
    pub a0_index: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureEstimate {
    pub k: CompactSubset,
    pub a0: CompactSubset,
    pub base_point: Point,
    pub stages: Vec<MeasureStage>,
    pub value: f64,
    pub converged: bool,
    pub exhaustive: bool,
    /// The neighbourhood of K and the ball around a shrink together along one schedule.
    pub diagonal_schedule: bool,
}

/// λ′(K) relative to A0 along the diagonal schedule: at each eps the ratio
/// (K_eps : U_eps(a)) / (A0 : U_eps(a)), with K_eps the eps-neighbourhood of K.
pub fn invariant_measure_estimate(
    scenario: &ActionScenario,
    k: &CompactSubset,
    a0: &CompactSubset,
    a: &Point,
    params: &MeasureParams,
) -> Result<MeasureEstimate> {
    let flags = scenario.flags();
    // Bit flips preserve the dyadic metric on the limit level, where the lattice lives.
    let lattice_isometric = matches!(scenario.space().geometry(), Geometry::Dyadic { .. });
    if !flags.isometric && !lattice_isometric {
        return Err(Error::unsupported(format!(
            "`{}` is not isometric; metric balls are not invariant neighbourhoods there",
            scenario.id()
        )));
    }
    scenario.space().validate(a)?;
    if params.eps_schedule.is_empty() || params.eps_schedule.windows(2).any(|w| w[1] >= w[0]) || params.eps_schedule[0] <= 0.0 {
        return Err(Error::domain("eps schedule must be nonempty, positive and strictly decreasing"));
    }
    if orbit_probe(scenario, a, DEFAULT_ORBIT_CUTOFF)?.verdict != OrbitVerdict::InfiniteLikely {
        return Err(Error::unsupported("the base point must have a dense (infinite) orbit"));
    }
    let exhaustive = scenario.space().geometry() == Geometry::Circle;
    let stages = params
        .eps_schedule
        .iter()
        .map(|&eps| {
            let ball = Region::Ball { center: *a, radius: eps };
            let u = lattice_subset(scenario, ball, Some(*a))?;
            let k_eps = lattice_subset(scenario, k.region().neighborhood(eps), k.witness().first().copied())?;
            let cover = |set: &CompactSubset| -> Result<usize> {
                Ok(if exhaustive {
                    exact_arc_cover(set, &u)?.index_value
                } else {
                    covering_index(scenario, set, &u, params.pool_size, params.seed)?.index_value
                })
            };
            let (k_index, a0_index) = (cover(&k_eps)?, cover(a0)?);
            Ok(MeasureStage { eps, k_index, a0_index, lambda: k_index as f64 / a0_index as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = stages.len();
    let converged = n >= 2 && (stages[n - 1].lambda - stages[n - 2].lambda).abs() < params.tol;
    Ok(MeasureEstimate {
        k: k.clone(),
        a0: a0.clone(),
        base_point: *a,
        value: stages[n - 1].lambda,
        stages,
        converged,
        exhaustive,
        diagonal_schedule: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessCheck {
    /// λ′(K₁)·ν(K₂).
    pub lhs: f64,
    /// λ′(K₂)·ν(K₁).
    pub rhs: f64,
    pub pass: bool,
    pub lambda: (f64, f64),
    pub nu: (f64, f64),
}

/// Compares λ′(K₁)·ν(K₂) with λ′(K₂)·ν(K₁), where ν is the Følner visit
/// frequency of the orbit of `a`.
pub fn uniqueness_check(
    scenario: &ActionScenario,
    k1: &CompactSubset,
    k2: &CompactSubset,
    a0: &CompactSubset,
    a: &Point,
    params: &MeasureParams,
    averaging: &AveragingConfig,
) -> Result<UniquenessCheck> {
    let l1 = invariant_measure_estimate(scenario, k1, a0, a, params)?.value;
    let l2 = invariant_measure_estimate(scenario, k2, a0, a, params)?.value;
    let n1 = visit_frequency(scenario, a, k1.region(), averaging)?.value.re;
    let n2 = visit_frequency(scenario, a, k2.region(), averaging)?.value.re;
    let (lhs, rhs) = (l1 * n2, l2 * n1);
    Ok(UniquenessCheck { lhs, rhs, pass: (lhs - rhs).abs() < params.tol * lhs.abs().max(1.0), lambda: (l1, l2), nu: (n1, n2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::fixture;
    use crate::space::ScenarioId;

    fn arc(s: &ActionScenario, start: f64, len: f64) -> CompactSubset {
        let anchor = Point::new(s.id(), Coords::Circle { t: start.rem_euclid(1.0) });
        lattice_subset(s, Region::Arc { start, len }, Some(anchor)).unwrap()
    }

    #[test]
    fn subset_of_b_needs_one_translate() {
        let s = fixture(ScenarioId::Rotation);
        let r = covering_index(&s, &arc(&s, 0.1, 0.05), &arc(&s, 0.05, 0.2), 64, 0).unwrap();
        assert_eq!(r.index_value, 1);
        assert_eq!(r.lower_bound, 1);
    }

    #[test]
    fn exhaustive_arc_covers() {
        let s = fixture(ScenarioId::Rotation);
        assert_eq!(exact_arc_cover(&arc(&s, 0.0, 1.0), &arc(&s, 0.0, 0.1)).unwrap().index_value, 10);
        let r = exact_arc_cover(&arc(&s, 0.3, 0.25), &arc(&s, 0.0, 0.1)).unwrap();
        assert_eq!(r.index_value, 3);
    }

    #[test]
    fn too_small_pool_reports_residue() {
        let s = fixture(ScenarioId::Rotation);
        let err = covering_index(&s, &arc(&s, 0.0, 1.0), &arc(&s, 0.0, 0.1), 3, 0).unwrap_err();
        assert!(matches!(err, Error::Coverage { uncovered, total: CIRCLE_LATTICE } if uncovered > 0));
    }

    #[test]
    fn non_isometric_scenarios_are_refused() {
        let s = fixture(ScenarioId::SpiralTwoCircles);
        let a = s.space().parse_point("plus;t=0").unwrap();
        let r = Region::Ball { center: a, radius: 0.1 };
        let k = CompactSubset::new(s.space(), r, vec![a]).unwrap();
        let err = invariant_measure_estimate(&s, &k, &k, &a, &MeasureParams::default()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }
}
