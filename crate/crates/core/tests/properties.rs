use orbital::{
    covering_index, invariant_measure_estimate, MeasureParams, exact_arc_cover, fixture, folner_average, inner_product, lattice_subset, ActionScenario,
    AveragingConfig, Complex64, Coords, GroupElement, Point, Region, ScenarioId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario_strategy() -> impl Strategy<Value = ScenarioId> {
    prop::sample::select(ScenarioId::ALL.to_vec())
}

fn element(s: &ActionScenario, rng: &mut ChaCha8Rng) -> GroupElement {
    let ints: Vec<i64> = match s.id() {
        ScenarioId::TripleCone => vec![rng.random_range(-500..=500), rng.random_range(-5..=5)],
        ScenarioId::DyadicProduct => vec![],
        _ => vec![rng.random_range(-500..=500)],
    };
    let bits = if s.group().has_bits() { rng.random::<u64>() } else { 0 };
    s.group().element(&ints, bits).unwrap()
}

#[test]
fn triangle_inequality_on_ten_thousand_triples() {
    let mut worst = f64::NEG_INFINITY;
    for (k, id) in ScenarioId::ALL.into_iter().enumerate() {
        let s = fixture(id);
        let pts = s.space().sample_points(3 * 1430, k as u64);
        for tri in pts.chunks_exact(3) {
            let d = |a: &Point, b: &Point| s.space().distance(a, b).unwrap();
            let (ab, bc, ac) = (d(&tri[0], &tri[1]), d(&tri[1], &tri[2]), d(&tri[0], &tri[2]));
            assert!(ab >= 0.0 && ab <= s.space().diameter() + 1e-12, "{id}: {ab}");
            assert_eq!(ab, d(&tri[1], &tri[0]), "{id}: symmetry");
            worst = worst.max(ac - ab - bc);
        }
    }
    assert!(worst <= 1e-12, "triangle inequality violated by {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_axioms(id in scenario_strategy(), seed in any::<u64>()) {
        let s = fixture(id);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = s.space().sample_points(1, seed).pop().unwrap();
        let e = s.group().identity();
        prop_assert!(s.space().same_point(&s.apply(&e, &x).unwrap(), &x));
        let (g, h) = (element(&s, &mut rng), element(&s, &mut rng));
        let gh = s.group().compose(&g, &h).unwrap();
        let stepwise = s.apply(&g, &s.apply(&h, &x).unwrap()).unwrap();
        let direct = s.apply(&gh, &x).unwrap();
        prop_assert!(s.space().distance(&stepwise, &direct).unwrap() < 1e-9, "{id}: {stepwise} vs {direct}");
        let back = s.apply(&s.group().inverse(&g).unwrap(), &s.apply(&g, &x).unwrap()).unwrap();
        prop_assert!(s.space().same_point(&back, &x));
        if s.flags().isometric {
            let y = s.space().sample_points(2, seed ^ 1).pop().unwrap();
            let before = s.space().distance(&x, &y).unwrap();
            let after = s.space().distance(&s.apply(&g, &x).unwrap(), &s.apply(&g, &y).unwrap()).unwrap();
            prop_assert!((before - after).abs() < 1e-9);
        }
        if id == ScenarioId::DyadicProduct {
            // Each level is acted on isometrically.
            let mut y = s.space().sample_points(64, seed ^ 1).into_iter().find(|y| y.level() == x.level()).unwrap();
            if let Coords::Dyadic { bits, .. } = &mut y.coords {
                *bits ^= 1 << (seed % 20);
            }
            let before = s.space().distance(&x, &y).unwrap();
            let after = s.space().distance(&s.apply(&g, &x).unwrap(), &s.apply(&g, &y).unwrap()).unwrap();
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn means_are_bounded_and_linear(id in scenario_strategy(), seed in any::<u64>()) {
        let s = fixture(id);
        let x = s.space().sample_points(1, seed).pop().unwrap();
        let cfg = AveragingConfig { n_max: 1 << 16, ..AveragingConfig::default() };
        let c = folner_average(&s, "const", &x, &cfg).unwrap();
        prop_assert_eq!(c.value, Complex64::new(1.0, 0.0));
        let names: Vec<&str> = s.function_names().collect();
        let f = names[(seed % names.len() as u64) as usize];
        let r = folner_average(&s, f, &x, &cfg).unwrap();
        prop_assert!(r.value.norm() <= r.sup_norm + 1e-12);
        // <f, 1> is the mean of f.
        let ip = inner_product(&s, f, "const", &x, &cfg).unwrap();
        prop_assert!((ip.value - r.value).norm() < 1e-12);
        // <f, g> is the conjugate of <g, f>.
        let g = names[((seed >> 8) % names.len() as u64) as usize];
        let fg = inner_product(&s, f, g, &x, &cfg).unwrap();
        let gf = inner_product(&s, g, f, &x, &cfg).unwrap();
        prop_assert!((fg.value - gf.value.conj()).norm() < 1e-12);
    }

    #[test]
    fn covering_indices_are_monotone_and_bounded(start in 0.0..1.0f64, len in 0.05..0.6f64, grow in 0.0..0.3f64, b_len in 0.05..0.3f64) {
        let s = fixture(ScenarioId::Rotation);
        let arc = |start: f64, len: f64| {
            let anchor = Point::new(s.id(), Coords::Circle { t: start.rem_euclid(1.0) });
            lattice_subset(&s, Region::Arc { start, len }, Some(anchor)).unwrap()
        };
        let (a, bigger, b) = (arc(start, len), arc(start, len + grow), arc(0.0, b_len));
        let small = exact_arc_cover(&a, &b).unwrap().index_value;
        let large = exact_arc_cover(&bigger, &b).unwrap().index_value;
        prop_assert!(small <= large);
        // Lebesgue bound for arcs of the lattice.
        prop_assert!(small as f64 >= (len / b_len).floor());
        let greedy = covering_index(&s, &a, &b, 4096, 3).unwrap();
        prop_assert!(greedy.lower_bound <= small && small <= greedy.index_value);
    }
}

#[test]
fn dyadic_cylinder_cover_counts_are_exact() {
    let s = fixture(ScenarioId::DyadicProduct);
    let cyl = |prefix: u64, len: u32| {
        let anchor = Point::new(s.id(), Coords::Dyadic { level: orbital::JLevel::Limit, bits: prefix });
        lattice_subset(&s, Region::DyadicCylinder { prefix, len }, Some(anchor)).unwrap()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let (la, lb) = (rng.random_range(0..4u32), rng.random_range(0..6u32));
        let (a, b) = (cyl(rng.random::<u64>() & 0xF, la), cyl(rng.random::<u64>() & 0x3F, lb));
        let r = covering_index(&s, &a, &b, 1 << 12, 0).unwrap();
        // Translates are bit flips; a cylinder of length la needs 2^(lb - la) copies of one of length lb.
        let expected = 1usize << lb.saturating_sub(la);
        assert_eq!(r.index_value, expected, "len {la} by len {lb}");
        assert_eq!(r.lower_bound, expected);
    }
}

#[test]
fn dyadic_measure_halves_with_each_coordinate() {
    let s = fixture(ScenarioId::DyadicProduct);
    let base = s.space().parse_point("j=0;bits=0").unwrap();
    let cyl = |prefix: u64, len: u32| {
        let anchor = Point::new(s.id(), Coords::Dyadic { level: orbital::JLevel::Limit, bits: prefix });
        lattice_subset(&s, Region::DyadicCylinder { prefix, len }, Some(anchor)).unwrap()
    };
    let params = MeasureParams { eps_schedule: vec![0.25, 0.125, 0.0625], ..MeasureParams::default() };
    for (len, expected) in [(1, 1.0), (2, 0.5), (3, 0.25)] {
        let m = invariant_measure_estimate(&s, &cyl(0b101, len), &cyl(1, 1), &base, &params).unwrap();
        assert!((m.value - expected).abs() < 1e-2, "len {len}: {}", m.value);
    }
}
