//! Stagewise fractal builders and the reduction maps `f_p`, `Φ`, `f`, `h`
//! and the Weihrauch encoding.

use crate::bits::{BitMatrix, BitSequence};
use crate::geometry::{unit_interval, AxisBox, BoxUnion, GeometryError, Interval, IntervalUnion};
use crate::rational::{self, int, rat, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("stage {0} became empty")]
    Empty(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// Piece count and extreme piece diameters of one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: usize,
    pub pieces: usize,
    pub min_diam: Rational,
    pub max_diam: Rational,
}

impl StageReport {
    pub fn of(stage: usize, set: &IntervalUnion) -> StageReport {
        StageReport {
            stage,
            pieces: set.len(),
            min_diam: set.min_piece_diameter().unwrap_or_else(Rational::zero),
            max_diam: set.max_piece_diameter().unwrap_or_else(Rational::zero),
        }
    }

    pub const CSV_HEADER: [&'static str; 4] = ["stage", "pieces", "min_diam", "max_diam"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.stage.to_string(),
            self.pieces.to_string(),
            rational::sci(&self.min_diam),
            rational::sci(&self.max_diam),
        ]
    }
}

/// Replaces each piece `[a, b]` by `[a + c·(b-a), a + (c+r)·(b-a)]` for every
/// `(c, r)` in `children`. Touching children merge.
fn refine(set: &IntervalUnion, children: &[(Rational, Rational)]) -> IntervalUnion {
    let mut out = Vec::with_capacity(set.len() * children.len());
    for p in set.pieces() {
        let len = p.length();
        for (c, r) in children {
            let lo = &p.lo + c * &len;
            let hi = &lo + r * &len;
            out.push(Interval::new(lo, hi));
        }
    }
    IntervalUnion::from_unsorted(set.space().clone(), out)
}

fn two_ends(r: &Rational) -> [(Rational, Rational); 2] {
    [(Rational::zero(), r.clone()), (int(1) - r, r.clone())]
}

/// Symmetric Cantor set with dissection ratio `1/n`.
pub fn cantor_stage(n: u32, k: usize) -> Result<IntervalUnion> {
    if n < 3 {
        return Err(ConstructionError::Domain(format!(
            "cantor needs n >= 3, got {n}"
        )));
    }
    generalized_cantor_stage(&[rat(1, n as i64)], k)
}

/// Two-piece Cantor set with ratio `ratios[i]` at step `i`; the last ratio
/// repeats.
pub fn generalized_cantor_stage(ratios: &[Rational], k: usize) -> Result<IntervalUnion> {
    if ratios.is_empty() || ratios.iter().any(|r| !r.is_positive() || r > &rat(1, 2)) {
        return Err(ConstructionError::Domain(
            "ratios must lie in (0, 1/2]".into(),
        ));
    }
    let mut set = IntervalUnion::unit();
    for i in 0..k {
        set = refine(&set, &two_ends(&ratios[i.min(ratios.len() - 1)]));
    }
    Ok(set)
}

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    let hi = hi as usize;
    let mut sieve = vec![true; hi.max(2)];
    sieve[0] = false;
    if hi > 1 {
        sieve[1] = false;
    }
    let mut i = 2;
    while i * i < hi {
        if sieve[i] {
            (i * i..hi).step_by(i).for_each(|j| sieve[j] = false);
        }
        i += 1;
    }
    (lo as usize..hi)
        .filter(|&n| sieve[n])
        .map(|n| n as u64)
        .collect()
}

/// `q^(-2-α)`: exact for integer `α`.
pub fn jarnik_radius(q: u64, alpha: &Rational) -> Rational {
    let e = alpha + int(2);
    if e.is_integer() {
        let e = e.to_integer().to_u32().expect("small exponent");
        Rational::new(BigInt::one(), num_traits::pow(BigInt::from(q), e as usize))
    } else {
        rational::rationalize((q as f64).powf(-rational::to_f64(&e)))
    }
}

/// Centers `p/q` and radii of block `j` before clamping and merging.
pub fn jarnik_centers(alpha: &Rational, j: u32) -> Vec<(Rational, Rational)> {
    let primes = primes_in(1 << j, 1 << (j + 1));
    assert!(!primes.is_empty(), "empty prime block");
    primes
        .iter()
        .flat_map(|&q| {
            let r = jarnik_radius(q, alpha);
            (0..=q).map(move |p| (rat(p as i64, q as i64), r.clone()))
        })
        .collect()
}

/// Block `j` of the Jarník set: intervals of radius `q^(-2-α)` around `p/q`
/// for primes `q` in `[2^j, 2^(j+1))`, clamped to `[0,1]` and merged.
pub fn jarnik_stage(alpha: &Rational, j: u32) -> Result<IntervalUnion> {
    if alpha.is_negative() || j == 0 {
        return Err(ConstructionError::Domain(
            "jarnik needs α >= 0 and j >= 1".into(),
        ));
    }
    let pieces = jarnik_centers(alpha, j)
        .into_iter()
        .map(|(c, r)| Interval::new(&c - &r, &c + &r))
        .collect();
    Ok(IntervalUnion::from_unsorted(unit_interval(), pieces))
}

/// `p = 2/(2+α)`.
pub fn alpha_to_p(alpha: &Rational) -> Rational {
    int(2) / (alpha + int(2))
}

/// Contraction `3^(-1/p)` of the three-piece generator of dimension `p`.
pub fn s_ratio(p: &Rational) -> Rational {
    rational::pow_neg(3, &p.recip())
}

fn s_children(ratio: &Rational) -> [(Rational, Rational); 3] {
    [
        (Rational::zero(), ratio.clone()),
        ((int(1) - ratio) / int(2), ratio.clone()),
        (int(1) - ratio, ratio.clone()),
    ]
}

fn s_refine(set: &IntervalUnion, ratio: &Rational) -> IntervalUnion {
    refine(set, &s_children(ratio))
}

/// Stage `k` of `S(α)` scaled onto `target`. Each piece is replaced by three
/// equal subpieces at its left end, centre and right end, with contraction
/// `3^(-1/p)`, `p = 2/(2+α)`.
pub fn s_alpha_stage(alpha: &Rational, k: usize, target: &Interval) -> Result<IntervalUnion> {
    if alpha.is_negative() {
        return Err(ConstructionError::Domain("α must be >= 0".into()));
    }
    if target.is_point() {
        return Err(ConstructionError::Domain(
            "target interval is degenerate".into(),
        ));
    }
    let ratio = s_ratio(&alpha_to_p(alpha));
    let mut set = IntervalUnion::unit();
    for i in 0..k {
        set = s_refine(&set, &ratio);
        if set.is_empty() {
            return Err(ConstructionError::Empty(i + 1));
        }
    }
    Ok(set.map_affine(&target.length(), &target.lo, target.clone())?)
}

/// `(2^-k / n)^(2^k)`.
pub fn shrink_length(k: usize, n: usize) -> Rational {
    let base = rational::two_pow_neg(k as u32) / Rational::from_integer(BigInt::from(n));
    num_traits::pow(base, 1usize << k)
}

/// Exact check of `Σ len_i^(2^-k) <= 2^-k`, using upper bounds on the
/// roots. Returns `None` if the bound could not be decided.
pub fn verify_shrink_bound(lengths: &[Rational], k: usize) -> Option<bool> {
    let bound = rational::two_pow_neg(k as u32);
    for bits in [64u64, 256, 1024] {
        let upper: Rational = lengths
            .iter()
            .map(|l| rational::root_pow2_upper(l, k as u32, bits))
            .sum();
        if upper <= bound {
            return Some(true);
        }
    }
    // upper bounds failed; a true violation needs a lower bound
    let lower: Rational = lengths
        .iter()
        .map(|l| {
            let u = rational::root_pow2_upper(l, k as u32, 1024);
            u * (int(1) - rational::two_pow_neg(900))
        })
        .sum();
    (lower > bound).then_some(false)
}

/// One shrink step as applied by [`FpBuilder`].
#[derive(Debug, Clone)]
pub struct ShrinkRecord {
    pub stage: usize,
    pub lengths: Vec<Rational>,
}

/// Incremental builder for the stages `F_x^(k)` of `f_p(x)`.
///
/// Stage `k+1` is obtained from stage `k` by reading `x(k+1)`: a one
/// shrinks every piece to a centred subinterval of length
/// `min(diam, (2^-k / N_k)^(2^k))`, a zero applies one more step of the
/// `S(α)` refinement. Because `S(α)` is self-similar, resuming it inside
/// the shrunken pieces is the same step everywhere.
#[derive(Debug, Clone)]
pub struct FpBuilder {
    x: BitSequence,
    ratio: Option<Rational>,
    k: usize,
    current: IntervalUnion,
    log: Vec<ShrinkRecord>,
}

impl FpBuilder {
    /// `p = 0` yields the empty set at every stage.
    pub fn new(p: &Rational, x: BitSequence) -> Result<FpBuilder> {
        if p.is_negative() || p > &int(1) {
            return Err(ConstructionError::Domain(format!(
                "p must lie in [0,1], got {}",
                rational::format_rational(p)
            )));
        }
        let (ratio, current) = if p.is_zero() {
            (None, IntervalUnion::empty(unit_interval()))
        } else {
            (Some(s_ratio(p)), IntervalUnion::unit())
        };
        Ok(FpBuilder {
            x,
            ratio,
            k: 0,
            current,
            log: Vec::new(),
        })
    }

    pub fn stage(&self) -> usize {
        self.k
    }

    pub fn current(&self) -> &IntervalUnion {
        &self.current
    }

    pub fn shrink_log(&self) -> &[ShrinkRecord] {
        &self.log
    }

    pub fn step(&mut self) {
        let Some(ratio) = &self.ratio else {
            self.k += 1;
            return;
        };
        let k = self.k;
        if self.x.get(k + 1) {
            let cap = shrink_length(k, self.current.len());
            let pieces: Vec<Interval> = self
                .current
                .pieces()
                .iter()
                .map(|p| {
                    if p.length() <= cap {
                        p.clone()
                    } else {
                        let m = p.midpoint();
                        let half = &cap / int(2);
                        Interval::new(&m - &half, &m + &half)
                    }
                })
                .collect();
            self.log.push(ShrinkRecord {
                stage: k,
                lengths: pieces.iter().map(Interval::length).collect(),
            });
            self.current = IntervalUnion::new(self.current.space().clone(), pieces)
                .expect("shrunken pieces stay disjoint");
        } else {
            self.current = s_refine(&self.current, ratio);
        }
        self.k += 1;
    }

    pub fn advance_to(&mut self, k: usize) -> &IntervalUnion {
        while self.k < k {
            self.step();
        }
        &self.current
    }
}

fn check_p(p: &Rational) -> Result<()> {
    if !p.is_positive() || p > &int(1) {
        return Err(ConstructionError::Domain(format!(
            "p must lie in (0,1], got {}",
            rational::format_rational(p)
        )));
    }
    Ok(())
}

/// Stage `k` of `f_p(x)`.
pub fn f_p_stage(p: &Rational, x: &BitSequence, k: usize) -> Result<IntervalUnion> {
    check_p(p)?;
    let mut b = FpBuilder::new(p, x.clone())?;
    Ok(b.advance_to(k).clone())
}

/// All stages `0..=k` of `f_p(x)`.
pub fn f_p_stages(p: &Rational, x: &BitSequence, k: usize) -> Result<Vec<IntervalUnion>> {
    let mut b = FpBuilder::new(p, x.clone())?;
    let mut out = vec![b.current().clone()];
    for _ in 0..k {
        b.step();
        out.push(b.current().clone());
    }
    Ok(out)
}

/// `T_m = [2^(-m-1), 2^(-m)]`.
pub fn block_interval(m: usize) -> Interval {
    let hi = rational::two_pow_neg(m as u32);
    Interval::new(&hi / int(2), hi)
}

/// Middle half of `T_m`, where block `m` is placed.
pub fn block_window(m: usize) -> Interval {
    let t = block_interval(m);
    let q = t.length() / int(4);
    Interval::new(&t.lo + &q, &t.hi - &q)
}

fn place(set: &IntervalUnion, m: usize) -> Result<IntervalUnion> {
    let w = block_window(m);
    Ok(set.map_affine(&w.length(), &w.lo, unit_interval())?)
}

/// `q_m = p(1 - 2^-m)`.
pub fn q_m(p: &Rational, m: usize) -> Rational {
    p * (int(1) - rational::two_pow_neg(m as u32))
}

/// A placed block of a union-of-blocks stage.
#[derive(Debug, Clone)]
pub struct Block {
    pub index: usize,
    pub window: Interval,
    pub declared_dim: f64,
}

fn with_origin(blocks: Vec<IntervalUnion>) -> IntervalUnion {
    let origin = IntervalUnion::new(unit_interval(), vec![Interval::point(Rational::zero())])
        .expect("singleton");
    IntervalUnion::union_all(
        unit_interval(),
        std::iter::once(&origin).chain(blocks.iter()),
    )
}

fn fp_dim(p: &Rational, x: &BitSequence) -> f64 {
    if x.is_eventually_zero() {
        rational::to_f64(p)
    } else {
        0.0
    }
}

/// Stage `k` of `f(x) = {0} ∪ ⋃_m g_m(x_m)`, with `g_m(x_m)` the stage-`k`
/// set of `f_{q_m}(x_m)` placed in `T_m`, for rows `m <= k`.
pub fn pi03_stage(p: &Rational, x: &BitMatrix, k: usize) -> Result<IntervalUnion> {
    check_p(p)?;
    let blocks = (0..=k)
        .map(|m| {
            let mut b = FpBuilder::new(&q_m(p, m), x.row(m).clone())?;
            place(b.advance_to(k), m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(with_origin(blocks))
}

pub fn pi03_blocks(p: &Rational, x: &BitMatrix, k: usize) -> Vec<Block> {
    (0..=k)
        .map(|m| Block {
            index: m,
            window: block_window(m),
            declared_dim: fp_dim(&q_m(p, m), x.row(m)),
        })
        .collect()
}

/// Ratios `2^(-1/p)` of the two-piece Cantor set `h_0` of dimension `p`.
pub fn h0_ratio(p: &Rational) -> Rational {
    rational::pow_neg(2, &p.recip())
}

/// Stage `k` of `h(x) = {0} ∪ h_0 ∪ ⋃_m g_{m+1}(x_m)`: `T_0` holds a
/// two-piece Cantor set of dimension `p` and `T_{m+1}` holds
/// `f_{q_{m+1}}(x_m)`, for rows `m <= k`.
pub fn salem_gap_stage(p: &Rational, x: &BitMatrix, k: usize) -> Result<IntervalUnion> {
    check_p(p)?;
    let mut blocks = vec![place(&generalized_cantor_stage(&[h0_ratio(p)], k)?, 0)?];
    for m in 0..=k {
        let mut b = FpBuilder::new(&q_m(p, m + 1), x.row(m).clone())?;
        blocks.push(place(b.advance_to(k), m + 1)?);
    }
    Ok(with_origin(blocks))
}

pub fn salem_gap_blocks(p: &Rational, x: &BitMatrix, k: usize) -> Vec<Block> {
    let mut out = vec![Block {
        index: 0,
        window: block_window(0),
        declared_dim: rational::to_f64(p),
    }];
    out.extend((0..=k).map(|m| Block {
        index: m + 1,
        window: block_window(m + 1),
        declared_dim: fp_dim(&q_m(p, m + 1), x.row(m)),
    }));
    out
}

/// `F_k` = set bits of `k + 1`: every nonempty subset of `0..n` once.
pub fn binary_enumeration(n: usize) -> Vec<Vec<usize>> {
    (1usize..1 << n)
        .map(|c| (0..n).filter(|i| c >> i & 1 == 1).collect())
        .collect()
}

/// `p_F = Σ_{i ∈ F} 2^-(i+1)`.
pub fn weihrauch_weight(f: &[usize]) -> Rational {
    f.iter().map(|&i| rational::two_pow_neg(i as u32 + 1)).sum()
}

fn weihrauch_parts(
    sets: &[Vec<usize>],
    xs: &[BitSequence],
) -> Result<Vec<(Rational, BitSequence)>> {
    sets.iter()
        .map(|f| {
            if f.is_empty() || f.iter().any(|&i| i >= xs.len()) {
                return Err(ConstructionError::Domain(format!("bad index set {f:?}")));
            }
            let y = f
                .iter()
                .fold(BitSequence::zeros(), |acc, &i| acc.max(&xs[i]));
            Ok((weihrauch_weight(f), y))
        })
        .collect()
}

/// `{0} ∪ ⋃_k f_{p_k}(y_k)` at stage `depth`, block `k` placed in `T_k`,
/// with `y_k = max_{i ∈ F_k} x_i`.
pub fn weihrauch_encode(
    sets: &[Vec<usize>],
    xs: &[BitSequence],
    depth: usize,
) -> Result<IntervalUnion> {
    let blocks = weihrauch_parts(sets, xs)?
        .into_iter()
        .enumerate()
        .map(|(k, (p, y))| {
            let mut b = FpBuilder::new(&p, y)?;
            place(b.advance_to(depth), k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(with_origin(blocks))
}

pub fn weihrauch_blocks(sets: &[Vec<usize>], xs: &[BitSequence]) -> Result<Vec<Block>> {
    Ok(weihrauch_parts(sets, xs)?
        .iter()
        .enumerate()
        .map(|(k, (p, y))| Block {
            index: k,
            window: block_window(k),
            declared_dim: fp_dim(p, y),
        })
        .collect())
}

/// `Σ_{x_i ∈ Q₂} 2^-(i+1)`.
pub fn weihrauch_dimension(xs: &[BitSequence]) -> f64 {
    xs.iter()
        .enumerate()
        .filter(|(_, x)| x.is_eventually_zero())
        .map(|(i, _)| 0.5f64.powi(i as i32 + 1))
        .sum()
}

/// Grid boxes of side `resolution` in `[-1,1]^2` meeting `{x : |x| ∈ a}`.
pub fn radial_lift(a: &IntervalUnion, resolution: &Rational) -> Result<BoxUnion> {
    if !resolution.is_positive() {
        return Err(ConstructionError::Domain(
            "resolution must be positive".into(),
        ));
    }
    if a.pieces()
        .iter()
        .any(|p| p.lo.is_negative() || p.hi > int(1))
    {
        return Err(ConstructionError::Domain("radii must lie in [0,1]".into()));
    }
    let n = (-rational::floor(&(-int(1) / resolution)))
        .to_i64()
        .expect("grid size");
    let radii: Vec<(Rational, Rational)> = a
        .pieces()
        .iter()
        .map(|p| (&p.lo * &p.lo, &p.hi * &p.hi))
        .collect();
    let coord = |i: i64| Rational::from_integer(BigInt::from(i)) * resolution;
    let axis: Vec<(Interval, Rational, Rational)> = (-n..n)
        .map(|i| {
            let iv = Interval::new(coord(i), coord(i + 1));
            let near = if iv.lo.is_positive() {
                &iv.lo * &iv.lo
            } else if iv.hi.is_negative() {
                &iv.hi * &iv.hi
            } else {
                Rational::zero()
            };
            let far = rational::max(&(&iv.lo * &iv.lo), &(&iv.hi * &iv.hi)).clone();
            (iv, near, far)
        })
        .collect();
    let mut boxes: Vec<AxisBox> = Vec::new();
    for (ix, nx, fx) in &axis {
        for (iy, ny, fy) in &axis {
            let (near, far) = (nx + ny, fx + fy);
            let i = radii.partition_point(|(_, hi)| hi < &near);
            if i < radii.len() && radii[i].0 <= far {
                boxes.push(vec![ix.clone(), iy.clone()]);
            }
        }
    }
    Ok(BoxUnion::new(2, boxes)?)
}

/// The families of constructions the crate can stage.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    Interval,
    Cantor(u32),
    GeneralizedCantor(Vec<Rational>),
    Jarnik(Rational),
    SAlpha(Rational),
    Fp { p: Rational, x: BitSequence },
    Pi03 { p: Rational, x: BitMatrix },
    SalemGap { p: Rational, x: BitMatrix },
    Weihrauch { xs: Vec<BitSequence> },
}

/// A construction with declared target dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionScheme {
    pub kind: SchemeKind,
    pub label: String,
}

impl ConstructionScheme {
    pub fn new(kind: SchemeKind, label: impl Into<String>) -> Result<ConstructionScheme> {
        match &kind {
            SchemeKind::Cantor(n) if *n < 3 => {
                return Err(ConstructionError::Domain(format!(
                    "cantor needs n >= 3, got {n}"
                )))
            }
            SchemeKind::GeneralizedCantor(r) => {
                generalized_cantor_stage(r, 0)?;
            }
            SchemeKind::Jarnik(a) | SchemeKind::SAlpha(a) if a.is_negative() => {
                return Err(ConstructionError::Domain("α must be >= 0".into()))
            }
            SchemeKind::Fp { p, .. }
            | SchemeKind::Pi03 { p, .. }
            | SchemeKind::SalemGap { p, .. } => check_p(p)?,
            _ => {}
        }
        Ok(ConstructionScheme {
            kind,
            label: label.into(),
        })
    }

    pub fn declared_hdim(&self) -> Option<f64> {
        let f = rational::to_f64;
        Some(match &self.kind {
            SchemeKind::Interval => 1.0,
            SchemeKind::Cantor(n) => 2f64.ln() / (*n as f64).ln(),
            SchemeKind::GeneralizedCantor(r) => 2f64.ln() / -rational::ln(r.last()?),
            SchemeKind::Jarnik(a) | SchemeKind::SAlpha(a) => f(&alpha_to_p(a)),
            SchemeKind::Fp { p, x } => fp_dim(p, x),
            SchemeKind::Pi03 { p, x } => matrix_sup(p, x, 0),
            SchemeKind::SalemGap { p, .. } => f(p),
            SchemeKind::Weihrauch { xs } => weihrauch_dimension(xs),
        })
    }

    pub fn declared_fdim(&self) -> Option<f64> {
        match &self.kind {
            SchemeKind::Cantor(_) => Some(0.0),
            SchemeKind::GeneralizedCantor(_) => None,
            SchemeKind::SalemGap { p, x } => Some(matrix_sup(p, x, 1)),
            _ => self.declared_hdim(),
        }
    }

    /// Index of the first meaningful stage (Jarník stages are blocks `j >= 1`).
    pub fn first_stage(&self) -> usize {
        match self.kind {
            SchemeKind::Jarnik(_) => 1,
            _ => 0,
        }
    }

    /// Whether `stage(k+1) ⊆ stage(k)` for every `k`. Block schemes are
    /// nested block by block.
    pub fn is_nested(&self) -> bool {
        !matches!(
            self.kind,
            SchemeKind::Jarnik(_)
                | SchemeKind::Pi03 { .. }
                | SchemeKind::SalemGap { .. }
                | SchemeKind::Weihrauch { .. }
        )
    }

    pub fn stage(&self, k: usize) -> Result<IntervalUnion> {
        match &self.kind {
            SchemeKind::Interval => Ok(IntervalUnion::unit()),
            SchemeKind::Cantor(n) => cantor_stage(*n, k),
            SchemeKind::GeneralizedCantor(r) => generalized_cantor_stage(r, k),
            SchemeKind::Jarnik(a) => jarnik_stage(a, k.max(1) as u32),
            SchemeKind::SAlpha(a) => s_alpha_stage(a, k, &unit_interval()),
            SchemeKind::Fp { p, x } => f_p_stage(p, x, k),
            SchemeKind::Pi03 { p, x } => pi03_stage(p, x, k),
            SchemeKind::SalemGap { p, x } => salem_gap_stage(p, x, k),
            SchemeKind::Weihrauch { xs } => weihrauch_encode(&binary_enumeration(xs.len()), xs, k),
        }
    }

    /// Stages `first_stage()..=k`.
    pub fn stages(&self, k: usize) -> Result<Vec<IntervalUnion>> {
        match &self.kind {
            SchemeKind::Fp { p, x } => f_p_stages(p, x, k),
            SchemeKind::Cantor(_) | SchemeKind::GeneralizedCantor(_) | SchemeKind::SAlpha(_) => {
                let mut out = vec![self.stage(0)?];
                let step = self.step_children();
                for _ in 0..k {
                    let next = refine(out.last().unwrap(), &step(out.len() - 1));
                    out.push(next);
                }
                Ok(out)
            }
            SchemeKind::Pi03 { .. }
            | SchemeKind::SalemGap { .. }
            | SchemeKind::Weihrauch { .. } => {
                let mut b = BlockBuilder::new(self)?;
                let mut out = vec![b.assemble()?];
                for _ in 0..k {
                    b.step()?;
                    out.push(b.assemble()?);
                }
                Ok(out)
            }
            _ => (self.first_stage()..=k).map(|i| self.stage(i)).collect(),
        }
    }

    fn step_children(&self) -> Box<dyn Fn(usize) -> Vec<(Rational, Rational)> + '_> {
        match &self.kind {
            SchemeKind::Cantor(n) => {
                let r = rat(1, *n as i64);
                Box::new(move |_| two_ends(&r).to_vec())
            }
            SchemeKind::GeneralizedCantor(rs) => {
                Box::new(move |i| two_ends(&rs[i.min(rs.len() - 1)]).to_vec())
            }
            SchemeKind::SAlpha(a) => {
                let r = s_ratio(&alpha_to_p(a));
                Box::new(move |_| s_children(&r).to_vec())
            }
            _ => unreachable!("not a refinement scheme"),
        }
    }

    pub fn reports(&self, k: usize) -> Result<Vec<StageReport>> {
        let first = self.first_stage();
        Ok(self
            .stages(k)?
            .iter()
            .enumerate()
            .map(|(i, s)| StageReport::of(first + i, s))
            .collect())
    }

    /// Block layout for union-of-blocks schemes at stage `k`.
    pub fn blocks(&self, k: usize) -> Option<Vec<Block>> {
        match &self.kind {
            SchemeKind::Pi03 { p, x } => Some(pi03_blocks(p, x, k)),
            SchemeKind::SalemGap { p, x } => Some(salem_gap_blocks(p, x, k)),
            SchemeKind::Weihrauch { xs } => {
                weihrauch_blocks(&binary_enumeration(xs.len()), xs).ok()
            }
            _ => None,
        }
    }
}

/// Incremental stages of the union-of-blocks schemes: one builder per
/// block, created when the block first appears.
struct BlockBuilder<'a> {
    scheme: &'a ConstructionScheme,
    k: usize,
    blocks: Vec<(usize, FpBuilder)>,
    h0: Option<(Rational, IntervalUnion)>,
}

impl<'a> BlockBuilder<'a> {
    fn new(scheme: &'a ConstructionScheme) -> Result<BlockBuilder<'a>> {
        let mut b = BlockBuilder {
            scheme,
            k: 0,
            blocks: Vec::new(),
            h0: None,
        };
        match &scheme.kind {
            SchemeKind::Weihrauch { xs } => {
                for (i, (p, y)) in weihrauch_parts(&binary_enumeration(xs.len()), xs)?
                    .into_iter()
                    .enumerate()
                {
                    b.blocks.push((i, FpBuilder::new(&p, y)?));
                }
            }
            SchemeKind::SalemGap { p, .. } => b.h0 = Some((h0_ratio(p), IntervalUnion::unit())),
            _ => {}
        }
        b.open_rows()?;
        Ok(b)
    }

    fn open_rows(&mut self) -> Result<()> {
        let k = self.k;
        match &self.scheme.kind {
            SchemeKind::Pi03 { p, x } => {
                let mut f = FpBuilder::new(&q_m(p, k), x.row(k).clone())?;
                f.advance_to(k);
                self.blocks.push((k, f));
            }
            SchemeKind::SalemGap { p, x } => {
                let mut f = FpBuilder::new(&q_m(p, k + 1), x.row(k).clone())?;
                f.advance_to(k);
                self.blocks.push((k + 1, f));
            }
            _ => {}
        }
        Ok(())
    }

    fn step(&mut self) -> Result<()> {
        self.k += 1;
        for (_, f) in &mut self.blocks {
            f.step();
        }
        if let Some((r, set)) = &mut self.h0 {
            *set = refine(set, &two_ends(r));
        }
        self.open_rows()
    }

    fn assemble(&self) -> Result<IntervalUnion> {
        let mut placed = Vec::with_capacity(self.blocks.len() + 1);
        if let Some((_, set)) = &self.h0 {
            placed.push(place(set, 0)?);
        }
        for (m, f) in &self.blocks {
            placed.push(place(f.current(), *m)?);
        }
        Ok(with_origin(placed))
    }
}

/// `sup { q_{m+shift} : row m eventually zero }`, `p` if the tail row is.
fn matrix_sup(p: &Rational, x: &BitMatrix, shift: usize) -> f64 {
    if x.tail().is_eventually_zero() {
        return rational::to_f64(p);
    }
    x.explicit_rows()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_eventually_zero())
        .map(|(m, _)| rational::to_f64(&q_m(p, m + shift)))
        .fold(0.0, f64::max)
}

/// Stages `i` at which `stage(i+1) ⊄ stage(i)`, restricted to `window`
/// when given.
pub fn nesting_violations(stages: &[IntervalUnion], window: Option<&Interval>) -> Vec<usize> {
    let clip = |s: &IntervalUnion| match window {
        Some(w) => s.intersection(
            &IntervalUnion::new(s.space().clone(), vec![w.clone()]).expect("window in space"),
        ),
        None => s.clone(),
    };
    stages
        .windows(2)
        .enumerate()
        .filter(|(_, w)| !clip(&w[0]).contains_union(&clip(&w[1])))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> BitSequence {
        s.parse().unwrap()
    }

    #[test]
    fn cantor_examples() {
        assert_eq!(cantor_stage(3, 0).unwrap(), IntervalUnion::unit());
        let c1 = cantor_stage(3, 1).unwrap();
        assert_eq!(
            c1.pieces(),
            &[
                Interval::new(int(0), rat(1, 3)),
                Interval::new(rat(2, 3), int(1))
            ]
        );
        let c2 = cantor_stage(3, 2).unwrap();
        let starts: Vec<_> = c2.pieces().iter().map(|p| p.lo.clone()).collect();
        assert_eq!(starts, vec![int(0), rat(2, 9), rat(2, 3), rat(8, 9)]);
        assert!(c2.pieces().iter().all(|p| p.length() == rat(1, 9)));
        assert!(cantor_stage(2, 1).is_err());
    }

    #[test]
    fn jarnik_block_centers() {
        assert_eq!(jarnik_centers(&int(0), 1).len(), 7);
        let c = jarnik_centers(&int(1), 2);
        assert_eq!(c.len(), 14);
        assert!(c.iter().any(|(_, r)| *r == rat(1, 125)));
        assert!(c.iter().any(|(_, r)| *r == rat(1, 343)));
        assert_eq!(primes_in(256, 512).len(), 43);
    }

    #[test]
    fn s_alpha_examples() {
        let u = unit_interval();
        assert_eq!(
            s_alpha_stage(&int(1), 0, &u).unwrap(),
            IntervalUnion::unit()
        );
        assert_eq!(
            s_alpha_stage(&int(0), 3, &u).unwrap(),
            IntervalUnion::unit()
        );
        let s1 = s_alpha_stage(&int(1), 1, &u).unwrap();
        let s2 = s_alpha_stage(&int(1), 2, &u).unwrap();
        assert_eq!(s2.len(), 9);
        assert!(s1.contains_union(&s2));
        let t = Interval::new(rat(1, 2), rat(3, 4));
        let mapped = s2.map_affine(&rat(1, 4), &rat(1, 2), t.clone()).unwrap();
        assert_eq!(s_alpha_stage(&int(1), 2, &t).unwrap(), mapped);
    }

    #[test]
    fn f_p_zero_sequence_is_s_alpha() {
        let p = rat(1, 2);
        let alpha = int(2);
        for k in 0..5 {
            assert_eq!(
                f_p_stage(&p, &BitSequence::zeros(), k).unwrap(),
                s_alpha_stage(&alpha, k, &unit_interval()).unwrap()
            );
        }
        assert!(f_p_stage(&int(0), &BitSequence::zeros(), 1).is_err());
        assert!(f_p_stage(&rat(3, 2), &BitSequence::zeros(), 1).is_err());
    }

    #[test]
    fn f_p_shrink_bound_and_nesting() {
        let mut b = FpBuilder::new(&rat(2, 3), seq("(0110)^ω")).unwrap();
        let mut stages = vec![b.current().clone()];
        for _ in 0..8 {
            b.step();
            stages.push(b.current().clone());
        }
        assert!(nesting_violations(&stages, None).is_empty());
        assert!(!b.shrink_log().is_empty());
        for rec in b.shrink_log() {
            assert_eq!(verify_shrink_bound(&rec.lengths, rec.stage), Some(true));
        }
    }

    #[test]
    fn shrink_bound_detects_violation() {
        let lengths = vec![rat(1, 2), rat(1, 2)];
        assert_eq!(verify_shrink_bound(&lengths, 1), Some(false));
        assert_eq!(
            verify_shrink_bound(&vec![shrink_length(3, 5); 5], 3),
            Some(true)
        );
    }

    #[test]
    fn pi03_layout() {
        let p = rat(4, 5);
        let s = pi03_stage(&p, &BitMatrix::zero(), 3).unwrap();
        assert_eq!(s.pieces()[0], Interval::point(int(0)));
        let blocks: Vec<IntervalUnion> = (0..=3)
            .map(|m| {
                let w = IntervalUnion::new(unit_interval(), vec![block_interval(m)]).unwrap();
                s.intersection(&w)
            })
            .collect();
        assert!(crate::geometry::blocks_almost_disjoint(&blocks));
        // q_0 = 0 leaves T_0 empty
        assert!(blocks[0].is_empty());
        assert!(blocks[1..].iter().all(|b| !b.is_empty()));
        let dims: Vec<f64> = pi03_blocks(&p, &BitMatrix::zero(), 30)
            .iter()
            .map(|b| b.declared_dim)
            .collect();
        let sup = dims.iter().cloned().fold(0.0, f64::max);
        assert!((sup - 0.8).abs() < 1e-6);
    }

    #[test]
    fn salem_gap_h0_for_log2_log3_is_middle_third() {
        let p = rational::from_f64(2f64.ln() / 3f64.ln());
        assert_eq!(h0_ratio(&p), rat(1, 3));
        let s = ConstructionScheme::new(
            SchemeKind::SalemGap {
                p: rat(1, 2),
                x: BitMatrix::zero(),
            },
            "g",
        )
        .unwrap();
        assert_eq!(s.declared_fdim(), Some(0.5));
        assert_eq!(s.declared_hdim(), Some(0.5));
    }

    #[test]
    fn weihrauch_examples() {
        let xs = vec![BitSequence::zeros(), BitSequence::zeros()];
        assert!((weihrauch_dimension(&xs) - 0.75).abs() < 1e-15);
        assert_eq!(binary_enumeration(2), vec![vec![0], vec![1], vec![0, 1]]);
        let xs = vec![seq("(10)^ω")];
        let b = weihrauch_blocks(&binary_enumeration(1), &xs).unwrap();
        assert_eq!(b[0].declared_dim, 0.0);
        let e = weihrauch_encode(&[], &[], 4).unwrap();
        assert_eq!(e.pieces(), &[Interval::point(int(0))]);
        assert!(weihrauch_encode(&[vec![2]], &xs, 1).is_err());
    }

    #[test]
    fn incremental_block_stages_match_direct_builds() {
        let x: BitMatrix = "1,(10)^ω,0".parse().unwrap();
        let xs = vec![BitSequence::zeros(), seq("(01)^ω")];
        for kind in [
            SchemeKind::Pi03 {
                p: rat(3, 4),
                x: x.clone(),
            },
            SchemeKind::SalemGap { p: rat(1, 2), x },
            SchemeKind::Weihrauch { xs },
        ] {
            let s = ConstructionScheme::new(kind, "t").unwrap();
            let staged = s.stages(4).unwrap();
            for (k, st) in staged.iter().enumerate() {
                assert_eq!(st, &s.stage(k).unwrap(), "stage {k}");
            }
        }
    }

    #[test]
    fn radial_lift_counts() {
        let ring =
            IntervalUnion::new(unit_interval(), vec![Interval::new(rat(1, 2), int(1))]).unwrap();
        let r = rat(1, 16);
        let boxes = radial_lift(&ring, &r).unwrap();
        let area = std::f64::consts::PI * 0.75 * 256.0;
        let n = boxes.len() as f64;
        assert!(n > area && n < area * 1.6, "{n} vs {area}");
        let circle = IntervalUnion::new(unit_interval(), vec![Interval::point(int(1))]).unwrap();
        let c = radial_lift(&circle, &r).unwrap().len() as f64;
        let perim = 2.0 * std::f64::consts::PI * 16.0;
        assert!(c > perim && c < 2.0 * perim, "{c} vs {perim}");
    }
}
