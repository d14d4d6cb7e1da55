use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salemlab::constructions::cantor_stage;
use salemlab::geometry::Interval;
use salemlab::measures::{
    fourier_eval, fourier_eval_product, natural_measure, FourierTransform, PiecewiseUniformMeasure,
    SelfSimilarProductMeasure,
};
use salemlab::rational::{rat, to_f64};

fn measure_from(raw: Vec<(i64, i64, u32)>) -> PiecewiseUniformMeasure {
    let mut cuts: Vec<(i64, i64, u32)> = raw;
    cuts.sort();
    // disjoint pieces: each piece starts at or after the previous end
    let mut pieces = Vec::new();
    let mut floor = -1;
    for (a, len, w) in cuts {
        let lo = a.max(floor + 1);
        let hi = lo + len;
        floor = hi;
        pieces.push((lo, hi, w));
    }
    let total: u32 = pieces.iter().map(|p| p.2).sum();
    PiecewiseUniformMeasure::new(
        pieces
            .into_iter()
            .map(|(lo, hi, w)| {
                (
                    Interval::new(rat(lo, 16), rat(hi, 16)),
                    w as f64 / total as f64,
                )
            })
            .collect(),
    )
    .unwrap()
}

fn measure_strategy() -> impl Strategy<Value = PiecewiseUniformMeasure> {
    prop::collection::vec((0i64..32, 0i64..6, 1u32..10), 1..5).prop_map(measure_from)
}

/// Composite five-point Gauss-Legendre quadrature of `e^{-iξx}` over each
/// piece, normalised by piece length.
fn quadrature(mu: &PiecewiseUniformMeasure, xi: f64) -> Complex64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let mut total = Complex64::new(0.0, 0.0);
    for (p, w) in mu.pieces() {
        let (a, b) = (to_f64(&p.lo), to_f64(&p.hi));
        if a == b {
            total += Complex64::from_polar(*w, -xi * a);
            continue;
        }
        let cells = ((b - a) * xi.abs() * 4.0).ceil().max(8.0) as usize;
        let h = (b - a) / cells as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..cells {
            let mid = a + (c as f64 + 0.5) * h;
            for (x, wt) in NODES.iter().zip(WEIGHTS) {
                acc += Complex64::from_polar(wt * h / 2.0, -xi * (mid + x * h / 2.0));
            }
        }
        total += acc * (*w / (b - a));
    }
    total
}

#[test]
fn fourier_eval_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.gen_range(1..5);
        let raw = (0..n)
            .map(|_| {
                (
                    rng.gen_range(0..32),
                    rng.gen_range(0..6),
                    rng.gen_range(1..10),
                )
            })
            .collect();
        let mu = measure_from(raw);
        let xi = rng.gen_range(-200.0..200.0);
        let err = (fourier_eval(&mu, xi) - quadrature(&mu, xi)).norm();
        assert!(err <= 1e-9, "ξ={xi} err={err}");
    }
}

#[test]
fn product_measure_is_limit_of_stage_measures() {
    // coupling each stage-k piece with its own mass moves points by at most 3^-k
    let k = 10;
    let stage = natural_measure(&cantor_stage(3, k).unwrap()).unwrap();
    let mu = SelfSimilarProductMeasure::middle_third();
    for i in 0..50 {
        let xi = i as f64 * 4.0;
        let err = (mu.fourier(xi) - fourier_eval(&stage, xi)).norm();
        assert!(
            err <= xi * 3f64.powi(-(k as i32)) + 1e-3,
            "ξ={xi} err={err}"
        );
    }
    // a depth-k product is the uniform law on the left endpoints
    let ends = PiecewiseUniformMeasure::new(
        cantor_stage(3, 6)
            .unwrap()
            .pieces()
            .iter()
            .map(|p| (Interval::point(p.lo.clone()), 1.0 / 64.0))
            .collect(),
    )
    .unwrap();
    for xi in [1.0, 17.5, 230.0] {
        assert!((fourier_eval_product(&mu, xi, 6) - fourier_eval(&ends, xi)).norm() < 1e-12);
    }
}

proptest! {
    #[test]
    fn conjugate_symmetry(mu in measure_strategy(), xi in -500.0f64..500.0) {
        let (a, b) = (fourier_eval(&mu, -xi), fourier_eval(&mu, xi).conj());
        prop_assert!((a - b).norm() <= 1e-14);
    }

    #[test]
    fn transform_is_one_at_zero_and_bounded(mu in measure_strategy(), xi in -500.0f64..500.0) {
        prop_assert!((fourier_eval(&mu, 0.0) - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        prop_assert!(fourier_eval(&mu, xi).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn pushforward_identity(mu in measure_strategy(), xi in -300.0f64..300.0, an in -6i64..6, t in -4i64..4) {
        prop_assume!(an != 0);
        let id = mu.affine_pushforward(&rat(1, 1), &rat(0, 1)).unwrap();
        prop_assert!((fourier_eval(&id, xi) - fourier_eval(&mu, xi)).norm() <= 1e-12);
        let (a, t) = (rat(an, 3), rat(t, 4));
        let pushed = mu.affine_pushforward(&a, &t).unwrap();
        let want = Complex64::from_polar(1.0, -xi * to_f64(&t)) * fourier_eval(&mu, to_f64(&a) * xi);
        prop_assert!((fourier_eval(&pushed, xi) - want).norm() <= 1e-12);
    }

    #[test]
    fn product_pushforward_identity(xi in -300.0f64..300.0, an in 1i64..6, t in -4i64..4) {
        let mu = SelfSimilarProductMeasure::middle_third();
        let (a, t) = (rat(an, 2), rat(t, 4));
        let pushed = mu.affine_pushforward(&a, &t).unwrap();
        let want = Complex64::from_polar(1.0, -xi * to_f64(&t)) * fourier_eval_product(&mu, to_f64(&a) * xi, 30);
        prop_assert!((fourier_eval_product(&pushed, xi, 30) - want).norm() <= 1e-12);
    }

    #[test]
    fn ball_mass_monotone(mu in measure_strategy(), c in 0i64..40, r1 in 1i64..40, r2 in 1i64..40) {
        let x = rat(c, 16);
        let (small, big) = (rat(r1.min(r2), 16), rat(r1.max(r2), 16));
        let (m1, m2) = (mu.ball_mass(&x, &small), mu.ball_mass(&x, &big));
        prop_assert!(m1 <= m2 + 1e-15);
        prop_assert!(m2 <= 1.0);
        prop_assert!((mu.ball_mass(&x, &rat(100, 1)) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn json_round_trip(mu in measure_strategy()) {
        prop_assert_eq!(PiecewiseUniformMeasure::from_json(&mu.to_json()).unwrap(), mu);
    }
}
