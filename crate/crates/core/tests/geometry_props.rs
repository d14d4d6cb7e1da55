use num_traits::Zero;
use proptest::prelude::*;
use salemlab::geometry::{
    disjoint_from_compact, hausdorff_metric, intersects_open, one_sided_distance,
    simplex_partition_1d, subset_of_open, unit_interval, Interval, IntervalUnion, OpenInterval,
};
use salemlab::rational::{rat, to_f64, Rational};

const DEN: i64 = 32;

fn union_strategy(max_pieces: usize) -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec((0..=DEN, 0..=DEN), 0..=max_pieces).prop_map(|ps| {
        let pieces = ps
            .into_iter()
            .map(|(a, b)| Interval::new(rat(a.min(b), DEN), rat(a.max(b), DEN)))
            .collect();
        IntervalUnion::from_unsorted(unit_interval(), pieces)
    })
}

fn nonempty(max_pieces: usize) -> impl Strategy<Value = IntervalUnion> {
    union_strategy(max_pieces).prop_filter("nonempty", |u| !u.is_empty())
}

fn opens_strategy() -> impl Strategy<Value = Vec<OpenInterval>> {
    prop::collection::vec((-2..=DEN + 2, -2..=DEN + 2), 0..5).prop_map(|ps| {
        ps.into_iter()
            .map(|(a, b)| OpenInterval::new(rat(a.min(b), DEN), rat(a.max(b), DEN)))
            .collect()
    })
}

fn d(a: &IntervalUnion, b: &IntervalUnion) -> Rational {
    hausdorff_metric(a, b).unwrap().rational.unwrap()
}

/// Brute-force point-to-set distance in floating point.
fn float_distance(x: f64, b: &IntervalUnion) -> f64 {
    b.pieces()
        .iter()
        .map(|p| {
            let (lo, hi) = (to_f64(&p.lo), to_f64(&p.hi));
            if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn grid_one_sided(a: &IntervalUnion, b: &IntervalUnion, step: f64) -> f64 {
    let mut best = 0f64;
    for p in a.pieces() {
        let (lo, hi) = (to_f64(&p.lo), to_f64(&p.hi));
        let n = ((hi - lo) / step).ceil() as usize;
        for i in 0..=n {
            let x = (lo + i as f64 * step).min(hi);
            best = best.max(float_distance(x, b));
        }
    }
    best
}

/// Grid points `j / (4 DEN)` of `[0,1]`; fine enough to witness every
/// predicate on unions with endpoints in `Z / DEN`.
fn grid() -> impl Iterator<Item = Rational> {
    (0..=4 * DEN).map(|j| rat(j, 4 * DEN))
}

fn in_open(x: &Rational, u: &[OpenInterval]) -> bool {
    u.iter().any(|o| &o.lo < x && x < &o.hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hausdorff_matches_dense_grid(a in nonempty(5), b in nonempty(5)) {
        let exact = hausdorff_metric(&a, &b).unwrap().value;
        let oracle = grid_one_sided(&a, &b, 1e-4).max(grid_one_sided(&b, &a, 1e-4));
        prop_assert!((exact - oracle).abs() <= 1e-3, "exact {exact} oracle {oracle}");
    }

    #[test]
    fn metric_axioms(a in union_strategy(4), b in union_strategy(4), c in union_strategy(4)) {
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &a).is_zero());
        prop_assert_eq!(d(&a, &b).is_zero(), a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn contained_sets_have_zero_one_sided_distance(a in nonempty(4), b in nonempty(4)) {
        let common = a.intersection(&b);
        prop_assume!(!common.is_empty());
        prop_assert!(one_sided_distance(&common, &a).is_zero());
        prop_assert!(one_sided_distance(&common, &b).is_zero());
    }

    #[test]
    fn metric_scales_under_similarities(a in nonempty(4), b in nonempty(4), num in 1i64..8, t in 0i64..8) {
        let s = rat(num, 8);
        let shift = rat(t, 16);
        let space = Interval::new(rat(0, 1), rat(2, 1));
        let fa = a.map_affine(&s, &shift, space.clone()).unwrap();
        let fb = b.map_affine(&s, &shift, space).unwrap();
        prop_assert_eq!(d(&fa, &fb), s * d(&a, &b));
    }

    #[test]
    fn subset_of_open_matches_grid(k in union_strategy(3), u in opens_strategy()) {
        let oracle = grid().filter(|x| k.contains_point(x)).all(|x| in_open(&x, &u));
        prop_assert_eq!(subset_of_open(&k, &u), oracle);
    }

    #[test]
    fn intersects_open_matches_grid(k in union_strategy(3), u in opens_strategy()) {
        let oracle = grid().any(|x| k.contains_point(&x) && in_open(&x, &u));
        prop_assert_eq!(intersects_open(&k, &u), oracle);
    }

    #[test]
    fn disjoint_from_compact_matches_grid(a in union_strategy(3), b in union_strategy(3)) {
        let oracle = !grid().any(|x| a.contains_point(&x) && b.contains_point(&x));
        prop_assert_eq!(disjoint_from_compact(&a, &b), oracle);
    }

    #[test]
    fn simplex_cells_reunite(a in union_strategy(5), g in 1i64..9) {
        let grid = rat(1, g);
        let cells = simplex_partition_1d(&a, &grid).unwrap();
        prop_assert_eq!(cells.len() as i64, g);
        for (n, c) in cells.iter().enumerate() {
            let cell = Interval::new(rat(n as i64, g), rat(n as i64 + 1, g));
            prop_assert!(c.pieces().iter().all(|p| cell.contains_interval(p)));
        }
        prop_assert_eq!(IntervalUnion::union_all(unit_interval(), &cells), a);
    }

    #[test]
    fn json_round_trip(a in union_strategy(6)) {
        prop_assert_eq!(IntervalUnion::from_json(&a.to_json()).unwrap(), a);
    }
}
