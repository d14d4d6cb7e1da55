//! Probability measures with closed-form Fourier transforms.

use crate::geometry::{Interval, IntervalUnion};
use crate::rational::{self, parse_rational, Rational};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("measure of the empty set")]
    EmptySupport,
    #[error("weights sum to {0}, not 1")]
    Mass(f64),
    #[error("weights must be positive")]
    Weight,
    #[error("pieces must be sorted and disjoint")]
    Layout,
    #[error("affine scale must be nonzero")]
    ZeroScale,
    #[error("bad product measure: {0}")]
    Product(&'static str),
    #[error("malformed measure: {0}")]
    Parse(String),
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Anything with a Fourier transform `μ̂(ξ) = ∫ e^{-iξx} dμ(x)`.
pub trait FourierTransform: Sync {
    fn fourier(&self, xi: f64) -> Complex64;
}

/// Finitely many weighted pieces, uniform on each; singleton pieces are
/// point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseUniformMeasure {
    pieces: Vec<(Interval, f64)>,
    // midpoint, half-length, weight
    cache: Vec<(f64, f64, f64)>,
    prefix: Vec<f64>,
}

impl PiecewiseUniformMeasure {
    pub fn new(pieces: Vec<(Interval, f64)>) -> Result<PiecewiseUniformMeasure, MeasureError> {
        if pieces.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        if pieces.iter().any(|(_, w)| !w.is_finite() || *w <= 0.0) {
            return Err(MeasureError::Weight);
        }
        if pieces.windows(2).any(|w| w[0].0.hi >= w[1].0.lo) {
            return Err(MeasureError::Layout);
        }
        let total: CompensatedSum = pieces.iter().map(|(_, w)| *w).collect();
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(MeasureError::Mass(total.value()));
        }
        Ok(Self::build(pieces))
    }

    fn build(pieces: Vec<(Interval, f64)>) -> PiecewiseUniformMeasure {
        let cache = pieces
            .iter()
            .map(|(p, w)| {
                (
                    rational::to_f64(&p.midpoint()),
                    rational::to_f64(&p.length()) / 2.0,
                    *w,
                )
            })
            .collect();
        let mut acc = CompensatedSum::default();
        let mut prefix = vec![0.0];
        for (_, w) in &pieces {
            acc.add(*w);
            prefix.push(acc.value());
        }
        PiecewiseUniformMeasure {
            pieces,
            cache,
            prefix,
        }
    }

    pub fn uniform(i: Interval) -> PiecewiseUniformMeasure {
        Self::build(vec![(i, 1.0)])
    }

    pub fn dirac(x: Rational) -> PiecewiseUniformMeasure {
        Self::build(vec![(Interval::point(x), 1.0)])
    }

    pub fn pieces(&self) -> &[(Interval, f64)] {
        &self.pieces
    }

    /// `μ([x - r, x + r])`, with overlaps computed in rational arithmetic.
    pub fn ball_mass(&self, x: &Rational, r: &Rational) -> f64 {
        assert!(r.is_positive(), "radius must be positive");
        let (lo, hi) = (x - r, x + r);
        let i0 = self.pieces.partition_point(|(p, _)| p.hi < lo);
        let i1 = self.pieces.partition_point(|(p, _)| p.lo <= hi);
        if i0 >= i1 {
            return 0.0;
        }
        let part = |i: usize| {
            let (p, w) = &self.pieces[i];
            if p.is_point() {
                return *w;
            }
            let a = rational::max(&p.lo, &lo);
            let b = rational::min(&p.hi, &hi);
            if a >= b {
                return 0.0;
            }
            if a == &p.lo && b == &p.hi {
                return *w;
            }
            w * rational::to_f64(&((b - a) / p.length()))
        };
        let mut s = CompensatedSum::default();
        s.add(part(i0));
        if i1 - i0 >= 2 {
            s.add(self.prefix[i1 - 1] - self.prefix[i0 + 1]);
            s.add(part(i1 - 1));
        }
        s.value().min(1.0)
    }

    /// Pushforward under `x -> a x + t`.
    pub fn affine_pushforward(
        &self,
        a: &Rational,
        t: &Rational,
    ) -> Result<PiecewiseUniformMeasure, MeasureError> {
        if a.is_zero() {
            return Err(MeasureError::ZeroScale);
        }
        let mut pieces: Vec<(Interval, f64)> = self
            .pieces
            .iter()
            .map(|(p, w)| {
                let (u, v) = (a * &p.lo + t, a * &p.hi + t);
                let iv = if u <= v {
                    Interval::new(u, v)
                } else {
                    Interval::new(v, u)
                };
                (iv, *w)
            })
            .collect();
        if a.is_negative() {
            pieces.reverse();
        }
        Ok(Self::build(pieces))
    }

    pub fn to_json(&self) -> String {
        let raw = MeasureJson {
            pieces: self
                .pieces
                .iter()
                .map(|(p, w)| PieceJson {
                    a: rational::format_rational(&p.lo),
                    b: rational::format_rational(&p.hi),
                    w: *w,
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<PiecewiseUniformMeasure, MeasureError> {
        let raw: MeasureJson =
            serde_json::from_str(s).map_err(|e| MeasureError::Parse(e.to_string()))?;
        let parse = |s: &str| parse_rational(s).map_err(|e| MeasureError::Parse(e.to_string()));
        let pieces = raw
            .pieces
            .iter()
            .map(|p| {
                let (a, b) = (parse(&p.a)?, parse(&p.b)?);
                if a > b {
                    return Err(MeasureError::Layout);
                }
                Ok((Interval::new(a, b), p.w))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PiecewiseUniformMeasure::new(pieces)
    }
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    a: String,
    b: String,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    pieces: Vec<PieceJson>,
}

impl FourierTransform for PiecewiseUniformMeasure {
    fn fourier(&self, xi: f64) -> Complex64 {
        fourier_eval(self, xi)
    }
}

/// Equal mass per piece, uniform within each piece.
pub fn natural_measure(a: &IntervalUnion) -> Result<PiecewiseUniformMeasure, MeasureError> {
    if a.is_empty() {
        return Err(MeasureError::EmptySupport);
    }
    let w = 1.0 / a.len() as f64;
    Ok(PiecewiseUniformMeasure::build(
        a.pieces().iter().map(|p| (p.clone(), w)).collect(),
    ))
}

/// `Σ_j w_j e^{-iξ m_j} sinc(ξ h_j)` with midpoints `m_j` and half-lengths
/// `h_j`.
pub fn fourier_eval(mu: &PiecewiseUniformMeasure, xi: f64) -> Complex64 {
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for &(m, h, w) in &mu.cache {
        let amp = w * sinc(xi * h);
        let (s, c) = (xi * m).sin_cos();
        re.add(amp * c);
        im.add(-amp * s);
    }
    Complex64::new(re.value(), im.value())
}

/// Law of `shift + scale · Σ_j s_j o_j`, where `o_j` is uniform on the stage
/// offsets and `s_j = c_1 ⋯ c_{j-1}`. Stage lists repeat their last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarProductMeasure {
    branching: usize,
    offsets: Vec<Vec<Rational>>,
    contractions: Vec<Rational>,
    scale: Rational,
    shift: Rational,
}

impl SelfSimilarProductMeasure {
    pub fn new(
        offsets: Vec<Vec<Rational>>,
        contractions: Vec<Rational>,
    ) -> Result<Self, MeasureError> {
        let b = offsets
            .first()
            .ok_or(MeasureError::Product("no offsets"))?
            .len();
        if b == 0 || offsets.iter().any(|o| o.len() != b) {
            return Err(MeasureError::Product("inconsistent branching"));
        }
        let zero = Rational::zero();
        let one = rational::int(1);
        if offsets.iter().flatten().any(|o| o < &zero || o >= &one) {
            return Err(MeasureError::Product("offsets must lie in [0,1)"));
        }
        if contractions.is_empty() || contractions.iter().any(|c| c <= &zero || c >= &one) {
            return Err(MeasureError::Product("contractions must lie in (0,1)"));
        }
        Ok(SelfSimilarProductMeasure {
            branching: b,
            offsets,
            contractions,
            scale: one,
            shift: zero,
        })
    }

    /// Natural measure of the symmetric two-piece Cantor set with ratio `r`.
    pub fn two_piece(r: &Rational) -> Result<Self, MeasureError> {
        Self::new(
            vec![vec![Rational::zero(), rational::int(1) - r]],
            vec![r.clone()],
        )
    }

    pub fn middle_third() -> Self {
        Self::two_piece(&rational::rat(1, 3)).expect("valid")
    }

    /// Natural measure of the three-piece set with left, centre and right
    /// pieces of ratio `r <= 1/3`.
    pub fn three_piece(r: &Rational) -> Result<Self, MeasureError> {
        let one = rational::int(1);
        Self::new(
            vec![vec![
                Rational::zero(),
                (&one - r) / rational::int(2),
                one - r,
            ]],
            vec![r.clone()],
        )
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    fn stage(&self, j: usize) -> (&[Rational], &Rational) {
        (
            &self.offsets[j.min(self.offsets.len() - 1)],
            &self.contractions[j.min(self.contractions.len() - 1)],
        )
    }

    /// Depth after which the remaining factors differ from 1 by at most
    /// about `1e-3` at frequency `xi`.
    pub fn auto_depth(&self, xi: f64) -> usize {
        let target = 1e-3 / xi.abs().max(1.0) / rational::to_f64(&self.scale).abs().max(1e-300);
        let mut s = 1.0f64;
        let mut j = 0;
        while s >= target && j < 10_000 {
            s *= rational::to_f64(self.stage(j).1);
            j += 1;
        }
        j.max(1)
    }

    pub fn affine_pushforward(&self, a: &Rational, t: &Rational) -> Result<Self, MeasureError> {
        if a.is_zero() {
            return Err(MeasureError::ZeroScale);
        }
        let mut out = self.clone();
        out.scale = a * &self.scale;
        out.shift = a * &self.shift + t;
        Ok(out)
    }
}

/// `e^{-iξ t} ∏_{j<depth} b^{-1} Σ_o e^{-iξ a s_j o}`.
pub fn fourier_eval_product(mu: &SelfSimilarProductMeasure, xi: f64, depth: usize) -> Complex64 {
    let a = rational::to_f64(&mu.scale);
    let mut value = Complex64::from_polar(1.0, -xi * rational::to_f64(&mu.shift));
    let mut s = 1.0f64;
    let inv_b = 1.0 / mu.branching as f64;
    for j in 0..depth {
        let (offs, c) = mu.stage(j);
        let factor: Complex64 = offs
            .iter()
            .map(|o| Complex64::from_polar(inv_b, -xi * a * s * rational::to_f64(o)))
            .sum();
        value *= factor;
        s *= rational::to_f64(c);
    }
    value
}

impl FourierTransform for SelfSimilarProductMeasure {
    fn fourier(&self, xi: f64) -> Complex64 {
        fourier_eval_product(self, xi, self.auto_depth(xi))
    }
}

/// A measure of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Piecewise(PiecewiseUniformMeasure),
    Product(SelfSimilarProductMeasure),
}

impl Measure {
    pub fn affine_pushforward(&self, a: &Rational, t: &Rational) -> Result<Measure, MeasureError> {
        Ok(match self {
            Measure::Piecewise(m) => Measure::Piecewise(m.affine_pushforward(a, t)?),
            Measure::Product(m) => Measure::Product(m.affine_pushforward(a, t)?),
        })
    }
}

impl FourierTransform for Measure {
    fn fourier(&self, xi: f64) -> Complex64 {
        match self {
            Measure::Piecewise(m) => m.fourier(xi),
            Measure::Product(m) => m.fourier(xi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierSample {
    pub xi: f64,
    pub value: Complex64,
}

/// Evaluates `μ̂` at every frequency; each sample is independent, so the
/// result does not depend on scheduling.
pub fn sweep<M: FourierTransform + ?Sized>(mu: &M, xis: &[f64]) -> Vec<FourierSample> {
    let eval = |&xi: &f64| FourierSample {
        xi,
        value: mu.fourier(xi),
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        xis.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xis.iter().map(eval).collect()
    }
}

impl FourierSample {
    pub const CSV_HEADER: [&'static str; 4] = ["xi", "re", "im", "modulus"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.xi.to_string(),
            self.value.re.to_string(),
            self.value.im.to_string(),
            self.value.norm().to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::cantor_stage;
    use crate::geometry::unit_interval;
    use crate::rational::{int, rat};
    use std::f64::consts::PI;

    #[test]
    fn natural_measure_examples() {
        assert!(natural_measure(&IntervalUnion::empty(unit_interval())).is_err());
        let m = natural_measure(&cantor_stage(3, 1).unwrap()).unwrap();
        assert_eq!(m.pieces().len(), 2);
        assert!(m.pieces().iter().all(|(_, w)| *w == 0.5));
        let d = PiecewiseUniformMeasure::dirac(int(0));
        assert_eq!(d.ball_mass(&int(0), &rat(1, 1000)), 1.0);
    }

    #[test]
    fn fourier_examples() {
        let u = PiecewiseUniformMeasure::uniform(unit_interval());
        assert_eq!(fourier_eval(&u, 0.0), Complex64::new(1.0, 0.0));
        assert!(fourier_eval(&u, 2.0 * PI).norm() < 1e-15);
        let d = PiecewiseUniformMeasure::dirac(rat(1, 2));
        for xi in [0.3, 7.0, -120.5] {
            assert!((fourier_eval(&d, xi).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn product_examples() {
        let m = SelfSimilarProductMeasure::middle_third();
        assert_eq!(fourier_eval_product(&m, 0.0, 10), Complex64::new(1.0, 0.0));
        let base = fourier_eval_product(&m, 2.0 * PI, 40).norm();
        assert!(base > 0.1);
        for k in 1..=8 {
            let xi = 3f64.powi(k) * 2.0 * PI;
            let v = fourier_eval_product(&m, xi, 40 + k as usize).norm();
            assert!((v - base).abs() < 1e-9, "k={k}: {v} vs {base}");
        }
    }

    #[test]
    fn ball_mass_examples() {
        let u = PiecewiseUniformMeasure::uniform(unit_interval());
        assert_eq!(u.ball_mass(&rat(1, 2), &rat(1, 4)), 0.5);
        let c = natural_measure(&cantor_stage(3, 2).unwrap()).unwrap();
        assert_eq!(c.ball_mass(&int(0), &rat(1, 9)), 0.25);
        assert_eq!(c.ball_mass(&rat(1, 2), &rat(1, 10)), 0.0);
        assert!((c.ball_mass(&rat(1, 2), &int(1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pushforward_examples() {
        let u = PiecewiseUniformMeasure::uniform(unit_interval());
        assert_eq!(u.affine_pushforward(&int(1), &int(0)).unwrap(), u);
        let third = u.affine_pushforward(&rat(1, 3), &int(0)).unwrap();
        assert_eq!(
            third,
            PiecewiseUniformMeasure::uniform(Interval::new(int(0), rat(1, 3)))
        );
        assert!(u.affine_pushforward(&int(0), &int(0)).is_err());
        let flipped = natural_measure(&cantor_stage(3, 1).unwrap())
            .unwrap()
            .affine_pushforward(&int(-1), &int(0))
            .unwrap();
        assert!(flipped.pieces()[0].0.lo < flipped.pieces()[1].0.lo);
    }

    #[test]
    fn json_round_trip() {
        let m = natural_measure(&cantor_stage(3, 1).unwrap()).unwrap();
        let s = m.to_json();
        assert_eq!(
            s,
            r#"{"pieces":[{"a":"0/1","b":"1/3","w":0.5},{"a":"2/3","b":"1/1","w":0.5}]}"#
        );
        assert_eq!(PiecewiseUniformMeasure::from_json(&s).unwrap(), m);
        assert!(PiecewiseUniformMeasure::from_json(
            r#"{"pieces":[{"a":"0/1","b":"1/3","w":0.4}]}"#
        )
        .is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let s: CompensatedSum = xs.iter().copied().collect();
        assert_eq!(s.value(), 2.0);
    }
}
