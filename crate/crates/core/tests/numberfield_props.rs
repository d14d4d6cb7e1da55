use proptest::prelude::*;
use salemlab::numberfield::{
    gaussian_jarnik_stage, residue_system, GaussianInt, MultiplicationMatrix,
};
use salemlab::rational::{int, rat};

fn modulus() -> impl Strategy<Value = GaussianInt> {
    (-7i64..=7, -7i64..=7)
        .prop_map(|(a, b)| GaussianInt::new(a, b))
        .prop_filter("nonzero", |q| !q.is_zero())
}

proptest! {
    #[test]
    fn every_integer_has_exactly_one_residue(q in modulus(), a in -40i64..40, b in -40i64..40) {
        let z = GaussianInt::new(a, b);
        let hits = residue_system(q).unwrap().into_iter().filter(|r| r.congruent(z, q)).count();
        prop_assert_eq!(hits, 1);
    }

    #[test]
    fn residues_sit_in_the_unit_square(q in modulus()) {
        let inv = MultiplicationMatrix::of(q).inverse().unwrap();
        for r in residue_system(q).unwrap() {
            let c = salemlab::numberfield::apply(&inv, [r.a, r.b]);
            prop_assert!(c.iter().all(|x| *x >= int(0) && *x < int(1)));
        }
    }

    #[test]
    fn norm_is_multiplicative(a in -30i64..30, b in -30i64..30, c in -30i64..30, d in -30i64..30) {
        let (x, y) = (GaussianInt::new(a, b), GaussianInt::new(c, d));
        prop_assert_eq!((x * y).norm(), x.norm() * y.norm());
        prop_assert_eq!(MultiplicationMatrix::of(x).determinant(), x.norm());
    }
}

#[test]
fn inverse_of_one_plus_two_i() {
    let inv = MultiplicationMatrix::of(GaussianInt::new(1, 2))
        .inverse()
        .unwrap();
    assert_eq!(inv, [[rat(1, 5), rat(2, 5)], [rat(-2, 5), rat(1, 5)]]);
}

#[test]
fn gaussian_boxes_have_disjoint_interiors() {
    let stage = gaussian_jarnik_stage(&int(2), 2).unwrap();
    let boxes = stage.pieces();
    for (i, x) in boxes.iter().enumerate() {
        for y in &boxes[i + 1..] {
            let overlap = x.iter().zip(y).all(|(p, q)| p.lo < q.hi && q.lo < p.hi);
            assert!(!overlap);
        }
    }
}
