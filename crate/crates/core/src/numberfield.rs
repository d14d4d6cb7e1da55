//! Gaussian integers and the sets `E(Q(i), {1, i}, α)` in `[0,1]^2`.

use crate::geometry::{AxisBox, BoxUnion, Interval};
use crate::rational::{self, int, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::ops::{Mul, Sub};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumberFieldError {
    #[error("zero modulus")]
    Zero,
    #[error("α must be >= 0 and the block index >= 1")]
    Domain,
}

/// `a + b i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianInt {
    pub a: i64,
    pub b: i64,
}

impl GaussianInt {
    pub const fn new(a: i64, b: i64) -> GaussianInt {
        GaussianInt { a, b }
    }

    pub fn norm(self) -> i64 {
        self.a * self.a + self.b * self.b
    }

    pub fn conj(self) -> GaussianInt {
        GaussianInt::new(self.a, -self.b)
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// True iff `q` divides `self`.
    pub fn divisible_by(self, q: GaussianInt) -> bool {
        let n = q.norm();
        let t = self * q.conj();
        n != 0 && t.a % n == 0 && t.b % n == 0
    }

    pub fn congruent(self, other: GaussianInt, q: GaussianInt) -> bool {
        (self - other).divisible_by(q)
    }

    /// Prime norm, or an inert rational prime `p ≡ 3 (mod 4)` up to units.
    pub fn is_prime(self) -> bool {
        let n = self.norm();
        if is_prime_u64(n as u64) {
            return true;
        }
        let (a, b) = (self.a.abs(), self.b.abs());
        let p = if a == 0 {
            b
        } else if b == 0 {
            a
        } else {
            return false;
        };
        p % 4 == 3 && is_prime_u64(p as u64)
    }
}

impl Mul for GaussianInt {
    type Output = GaussianInt;
    fn mul(self, o: GaussianInt) -> GaussianInt {
        GaussianInt::new(self.a * o.a - self.b * o.b, self.a * o.b + self.b * o.a)
    }
}

impl Sub for GaussianInt {
    type Output = GaussianInt;
    fn sub(self, o: GaussianInt) -> GaussianInt {
        GaussianInt::new(self.a - o.a, self.b - o.b)
    }
}

pub fn norm(q: GaussianInt) -> i64 {
    q.norm()
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Matrix of `z -> q z` on `Z^2 = Z[i]`: `[[a, -b], [b, a]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiplicationMatrix {
    pub entries: [[i64; 2]; 2],
}

pub type RationalMatrix = [[Rational; 2]; 2];

impl MultiplicationMatrix {
    pub fn of(q: GaussianInt) -> MultiplicationMatrix {
        MultiplicationMatrix {
            entries: [[q.a, -q.b], [q.b, q.a]],
        }
    }

    pub fn determinant(&self) -> i64 {
        let e = self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn inverse(&self) -> Option<RationalMatrix> {
        let det = self.determinant();
        if det == 0 {
            return None;
        }
        let e = self.entries;
        let f = |x: i64| rational::rat(x, det);
        Some([[f(e[1][1]), f(-e[0][1])], [f(-e[1][0]), f(e[0][0])]])
    }

    pub fn as_rational(&self) -> RationalMatrix {
        self.entries.map(|row| row.map(int))
    }
}

pub fn mat_mul(x: &RationalMatrix, y: &RationalMatrix) -> RationalMatrix {
    std::array::from_fn(|i| std::array::from_fn(|j| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j]))
}

pub fn apply(m: &RationalMatrix, v: [i64; 2]) -> [Rational; 2] {
    std::array::from_fn(|i| &m[i][0] * int(v[0]) + &m[i][1] * int(v[1]))
}

/// Representatives `r` of `Z[i] / q` with `A_q^{-1} r ∈ [0,1)^2`: the
/// lattice points of the half-open fundamental parallelogram of `q Z[i]`.
pub fn residue_system(q: GaussianInt) -> Result<Vec<GaussianInt>, NumberFieldError> {
    if q.is_zero() {
        return Err(NumberFieldError::Zero);
    }
    let (a, b, n) = (q.a, q.b, q.norm());
    let xs = [0, a, -b, a - b];
    let ys = [0, b, a, a + b];
    let (x0, x1) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let (y0, y1) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
    let mut out = Vec::with_capacity(n as usize);
    for x in x0..=x1 {
        for y in y0..=y1 {
            // n · A_q^{-1} (x, y)
            let u = a * x + b * y;
            let v = -b * x + a * y;
            if (0..n).contains(&u) && (0..n).contains(&v) {
                out.push(GaussianInt::new(x, y));
            }
        }
    }
    Ok(out)
}

/// One prime per associate class (`a > 0`, `b >= 0`) with norm in
/// `[lo, hi)`.
pub fn gaussian_primes(lo: i64, hi: i64) -> Vec<GaussianInt> {
    let r = (hi as f64).sqrt().ceil() as i64 + 1;
    let mut out: Vec<GaussianInt> = (1..=r)
        .flat_map(|a| (0..=r).map(move |b| GaussianInt::new(a, b)))
        .filter(|q| (lo..hi).contains(&q.norm()) && q.is_prime())
        .collect();
    out.sort_by_key(|q| (q.norm(), q.a));
    out
}

pub fn block_primes(j: u32) -> Vec<GaussianInt> {
    gaussian_primes(1 << (2 * j), 1 << (2 * (j + 1)))
}

/// `|q|^(-2-α) = N(q)^(-(2+α)/2)`, exact when `α` is an even integer.
pub fn gaussian_radius(q: GaussianInt, alpha: &Rational) -> Rational {
    let e = (alpha + int(2)) / int(2);
    norm_pow_neg(q.norm(), &e)
}

fn norm_pow_neg(n: i64, e: &Rational) -> Rational {
    if e.is_integer() {
        let k = e.to_integer();
        let k: usize = k.try_into().expect("small exponent");
        Rational::new(BigInt::one(), num_traits::pow(BigInt::from(n), k))
    } else {
        rational::rationalize((n as f64).powf(-rational::to_f64(e)))
    }
}

/// Centers `A_q^{-1} r` and half-sides for block `j`, before merging.
pub fn gaussian_jarnik_centers(alpha: &Rational, j: u32) -> Vec<([Rational; 2], Rational)> {
    let mut out = Vec::new();
    for q in block_primes(j) {
        let inv = MultiplicationMatrix::of(q)
            .inverse()
            .expect("nonzero prime");
        let h = gaussian_radius(q, alpha);
        for r in residue_system(q).expect("nonzero prime") {
            out.push((apply(&inv, [r.a, r.b]), h.clone()));
        }
    }
    out
}

fn interiors_overlap(x: &AxisBox, y: &AxisBox) -> bool {
    x.iter().zip(y).all(|(p, q)| p.lo < q.hi && q.lo < p.hi)
}

fn hull(x: &AxisBox, y: &AxisBox) -> AxisBox {
    x.iter()
        .zip(y)
        .map(|(p, q)| {
            Interval::new(
                p.lo.clone().min(q.lo.clone()),
                p.hi.clone().max(q.hi.clone()),
            )
        })
        .collect()
}

/// Merges boxes with overlapping interiors into bounding boxes until none
/// overlap.
pub fn merge_overlapping(mut boxes: Vec<AxisBox>) -> Vec<AxisBox> {
    loop {
        boxes.sort_by(|x, y| x[0].lo.cmp(&y[0].lo));
        let mut out: Vec<AxisBox> = Vec::with_capacity(boxes.len());
        let mut widest = Rational::zero();
        let mut merged = false;
        for b in boxes {
            // out is sorted by left edge, so only boxes within `widest` of
            // b's left edge can reach it
            let reach = &b[0].lo - &widest;
            let hit = out
                .iter()
                .rev()
                .take_while(|o| o[0].lo >= reach)
                .position(|o| interiors_overlap(o, &b))
                .map(|i| out.len() - 1 - i);
            let placed = match hit {
                Some(i) => {
                    out[i] = hull(&out[i], &b);
                    merged = true;
                    i
                }
                None => {
                    out.push(b);
                    out.len() - 1
                }
            };
            let w = out[placed][0].length();
            if w > widest {
                widest = w;
            }
        }
        boxes = out;
        if !merged {
            return boxes;
        }
    }
}

/// Block `j` of the Gaussian Jarník set: squares of half-side `|q|^(-2-α)`
/// around `A_q^{-1} r` for Gaussian primes with `N(q) ∈ [4^j, 4^(j+1))`,
/// clamped to `[0,1]^2`.
pub fn gaussian_jarnik_stage(alpha: &Rational, j: u32) -> Result<BoxUnion, NumberFieldError> {
    if alpha.is_negative() || j == 0 {
        return Err(NumberFieldError::Domain);
    }
    let mut by_center: BTreeMap<[Rational; 2], Rational> = BTreeMap::new();
    for (c, h) in gaussian_jarnik_centers(alpha, j) {
        let e = by_center.entry(c).or_insert_with(Rational::zero);
        if h > *e {
            *e = h;
        }
    }
    let (zero, one) = (Rational::zero(), int(1));
    let boxes = by_center
        .into_iter()
        .map(|(c, h)| {
            c.iter()
                .map(|x| Interval::new((x - &h).max(zero.clone()), (x + &h).min(one.clone())))
                .collect()
        })
        .collect();
    Ok(BoxUnion::new(2, merge_overlapping(boxes)).expect("two-dimensional boxes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    const fn g(a: i64, b: i64) -> GaussianInt {
        GaussianInt::new(a, b)
    }

    #[test]
    fn norms() {
        assert_eq!(norm(g(1, 1)), 2);
        assert_eq!(norm(g(2, 1)), 5);
        assert_eq!(norm(g(0, 0)), 0);
    }

    #[test]
    fn small_residue_systems() {
        let r = residue_system(g(1, 1)).unwrap();
        assert_eq!(r.len(), 2);
        assert!(!r[0].congruent(r[1], g(1, 1)));
        let mut r2 = residue_system(g(2, 0)).unwrap();
        r2.sort();
        assert_eq!(r2, vec![g(0, 0), g(0, 1), g(1, 0), g(1, 1)]);
        assert_eq!(residue_system(g(0, 0)), Err(NumberFieldError::Zero));
    }

    #[test]
    fn inverse_example() {
        let inv = MultiplicationMatrix::of(g(1, 2)).inverse().unwrap();
        assert_eq!(apply(&inv, [1, 0]), [rat(1, 5), rat(-2, 5)]);
        for r in residue_system(g(1, 2)).unwrap() {
            let u = apply(&inv, [r.a, r.b]);
            assert!(u.iter().all(|c| *c >= Rational::zero() && *c < int(1)));
        }
    }

    #[test]
    fn primality() {
        assert!(g(1, 1).is_prime());
        assert!(g(3, 0).is_prime());
        assert!(g(0, 7).is_prime());
        assert!(!g(5, 0).is_prime());
        assert!(!g(2, 0).is_prime());
        assert!(g(1, 2).is_prime());
        let b1 = block_primes(1);
        assert!(b1.contains(&g(1, 2)) && b1.contains(&g(2, 1)) && b1.contains(&g(3, 0)));
        assert!(b1.iter().all(|q| (4..16).contains(&q.norm())));
    }

    #[test]
    fn block_center_count() {
        let expected: i64 = block_primes(1).iter().map(|q| q.norm()).sum();
        assert_eq!(gaussian_jarnik_centers(&int(0), 1).len() as i64, expected);
    }

    #[test]
    fn merging_removes_overlaps() {
        let b = |a: i64, c: i64| {
            vec![
                Interval::new(rat(a, 10), rat(c, 10)),
                Interval::new(int(0), rat(1, 10)),
            ]
        };
        let m = merge_overlapping(vec![b(0, 2), b(1, 3), b(5, 6)]);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0][0], Interval::new(int(0), rat(3, 10)));
    }
}
