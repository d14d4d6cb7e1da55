//! Exact-rational interval and box unions, the Hausdorff metric and the
//! Vietoris/Fell prebase predicates.

use crate::rational::{self, parse_rational, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("space bounds differ")]
    SpaceMismatch,
    #[error("interval [{0}, {1}] has lo > hi")]
    Inverted(String, String),
    #[error("pieces overlap or are out of order at index {0}")]
    Unsorted(usize),
    #[error("piece {0} leaves the space bound")]
    OutOfSpace(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("grid step must be positive")]
    BadGrid,
    #[error("malformed set: {0}")]
    Parse(String),
}

/// Closed interval `[lo, hi]`; `lo == hi` is a singleton.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Interval {
        assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Interval {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / rational::int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = rational::max(&self.lo, &other.lo).clone();
        let hi = rational::min(&self.hi, &other.hi).clone();
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Image under `x -> scale * x + shift` with `scale > 0`.
    pub fn map(&self, scale: &Rational, shift: &Rational) -> Interval {
        Interval {
            lo: scale * &self.lo + shift,
            hi: scale * &self.hi + shift,
        }
    }
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl OpenInterval {
    pub fn new(lo: Rational, hi: Rational) -> OpenInterval {
        OpenInterval { lo, hi }
    }
}

/// Finite union of disjoint closed intervals inside an explicit ambient
/// interval. An empty piece list is the empty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalUnion {
    space: Interval,
    pieces: Vec<Interval>,
}

impl IntervalUnion {
    /// Checked constructor: pieces must be sorted, pairwise disjoint and
    /// inside `space`.
    pub fn new(space: Interval, pieces: Vec<Interval>) -> Result<IntervalUnion, GeometryError> {
        for (i, p) in pieces.iter().enumerate() {
            if p.lo > p.hi {
                return Err(GeometryError::Inverted(
                    rational::format_rational(&p.lo),
                    rational::format_rational(&p.hi),
                ));
            }
            if !space.contains_interval(p) {
                return Err(GeometryError::OutOfSpace(i));
            }
            if i > 0 && pieces[i - 1].hi >= p.lo {
                return Err(GeometryError::Unsorted(i));
            }
        }
        Ok(IntervalUnion { space, pieces })
    }

    /// Sorts and merges overlapping or touching pieces, clipping to `space`.
    pub fn from_unsorted(space: Interval, mut pieces: Vec<Interval>) -> IntervalUnion {
        pieces.retain_mut(|p| match p.intersect(&space) {
            Some(c) => {
                *p = c;
                true
            }
            None => false,
        });
        pieces.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match merged.last_mut() {
                Some(last) if p.lo <= last.hi => {
                    if p.hi > last.hi {
                        last.hi = p.hi;
                    }
                }
                _ => merged.push(p),
            }
        }
        IntervalUnion {
            space,
            pieces: merged,
        }
    }

    pub fn empty(space: Interval) -> IntervalUnion {
        IntervalUnion {
            space,
            pieces: Vec::new(),
        }
    }

    /// `[0,1]` as a subset of itself.
    pub fn unit() -> IntervalUnion {
        let s = unit_interval();
        IntervalUnion {
            pieces: vec![s.clone()],
            space: s,
        }
    }

    pub fn space(&self) -> &Interval {
        &self.space
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Interval> {
        self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn with_space(self, space: Interval) -> Result<IntervalUnion, GeometryError> {
        IntervalUnion::new(space, self.pieces)
    }

    /// Distance between the extreme points; 0 for the empty set.
    pub fn diameter(&self) -> Rational {
        match (self.pieces.first(), self.pieces.last()) {
            (Some(f), Some(l)) => &l.hi - &f.lo,
            _ => Rational::zero(),
        }
    }

    pub fn min_piece_diameter(&self) -> Option<Rational> {
        self.pieces.iter().map(Interval::length).min()
    }

    pub fn max_piece_diameter(&self) -> Option<Rational> {
        self.pieces.iter().map(Interval::length).max()
    }

    /// Index of the piece containing `x`, if any.
    pub fn locate(&self, x: &Rational) -> Option<usize> {
        let i = self.pieces.partition_point(|p| &p.lo <= x);
        (i > 0 && x <= &self.pieces[i - 1].hi).then(|| i - 1)
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        self.locate(x).is_some()
    }

    /// `other ⊆ self`, piece by piece.
    pub fn contains_union(&self, other: &IntervalUnion) -> bool {
        other.pieces.iter().all(|p| {
            self.locate(&p.lo)
                .is_some_and(|i| self.pieces[i].contains_interval(p))
        })
    }

    /// Distance from `x` to the set. Panics on the empty set.
    pub fn point_distance(&self, x: &Rational) -> Rational {
        assert!(!self.pieces.is_empty());
        let i = self.pieces.partition_point(|p| &p.lo <= x);
        let mut best: Option<Rational> = None;
        if i > 0 {
            let p = &self.pieces[i - 1];
            best = Some(if x <= &p.hi {
                Rational::zero()
            } else {
                x - &p.hi
            });
        }
        if i < self.pieces.len() {
            let d = &self.pieces[i].lo - x;
            best = Some(match best {
                Some(b) if b <= d => b,
                _ => d,
            });
        }
        best.unwrap()
    }

    /// Image under `x -> scale * x + shift` (scale > 0) placed in `space`.
    pub fn map_affine(
        &self,
        scale: &Rational,
        shift: &Rational,
        space: Interval,
    ) -> Result<IntervalUnion, GeometryError> {
        assert!(scale.is_positive(), "affine map needs positive scale");
        let pieces = self.pieces.iter().map(|p| p.map(scale, shift)).collect();
        IntervalUnion::new(space, pieces)
    }

    /// Closed intersection; touching pieces produce singletons.
    pub fn intersection(&self, other: &IntervalUnion) -> IntervalUnion {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a, b) = (&self.pieces[i], &other.pieces[j]);
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion::from_unsorted(self.space.clone(), out)
    }

    /// Union of sets over a common space.
    pub fn union_all<'a, I>(space: Interval, parts: I) -> IntervalUnion
    where
        I: IntoIterator<Item = &'a IntervalUnion>,
    {
        let pieces = parts
            .into_iter()
            .flat_map(|u| u.pieces.iter().cloned())
            .collect();
        IntervalUnion::from_unsorted(space, pieces)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&IntervalUnionJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<IntervalUnion, GeometryError> {
        let raw: IntervalUnionJson =
            serde_json::from_str(s).map_err(|e| GeometryError::Parse(e.to_string()))?;
        raw.try_into()
    }
}

pub fn unit_interval() -> Interval {
    Interval::new(Rational::zero(), rational::int(1))
}

#[derive(Serialize, Deserialize)]
struct IntervalUnionJson {
    space: [String; 2],
    pieces: Vec<[String; 2]>,
}

fn pair_to_strings(i: &Interval) -> [String; 2] {
    [
        rational::format_rational(&i.lo),
        rational::format_rational(&i.hi),
    ]
}

fn strings_to_pair(p: &[String; 2]) -> Result<Interval, GeometryError> {
    let parse = |s: &String| parse_rational(s).map_err(|e| GeometryError::Parse(e.to_string()));
    let (lo, hi) = (parse(&p[0])?, parse(&p[1])?);
    if lo > hi {
        return Err(GeometryError::Inverted(p[0].clone(), p[1].clone()));
    }
    Ok(Interval { lo, hi })
}

impl From<&IntervalUnion> for IntervalUnionJson {
    fn from(u: &IntervalUnion) -> Self {
        IntervalUnionJson {
            space: pair_to_strings(&u.space),
            pieces: u.pieces.iter().map(pair_to_strings).collect(),
        }
    }
}

impl TryFrom<IntervalUnionJson> for IntervalUnion {
    type Error = GeometryError;
    fn try_from(raw: IntervalUnionJson) -> Result<Self, Self::Error> {
        let space = strings_to_pair(&raw.space)?;
        let pieces = raw
            .pieces
            .iter()
            .map(strings_to_pair)
            .collect::<Result<_, _>>()?;
        IntervalUnion::new(space, pieces)
    }
}

impl Serialize for IntervalUnion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntervalUnionJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalUnion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        IntervalUnionJson::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Result of a Hausdorff-metric evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffDistance {
    pub value: f64,
    /// The rational value when `exact` is true.
    pub rational: Option<Rational>,
    pub exact: bool,
}

impl HausdorffDistance {
    fn exact(r: Rational) -> HausdorffDistance {
        HausdorffDistance {
            value: rational::to_f64(&r),
            rational: Some(r),
            exact: true,
        }
    }
}

/// `max_{x in a} d(x, b)` for nonempty `a`, `b`.
///
/// `d(., b)` is piecewise linear with local maxima only at midpoints of the
/// gaps of `b`, so it suffices to look at endpoints of `a` and at those
/// midpoints that fall inside `a`.
pub fn one_sided_distance(a: &IntervalUnion, b: &IntervalUnion) -> Rational {
    assert!(!a.is_empty() && !b.is_empty());
    let mids: Vec<Rational> = b
        .pieces
        .windows(2)
        .map(|w| (&w[0].hi + &w[1].lo) / rational::int(2))
        .collect();
    let mut best = Rational::zero();
    let mut consider = |x: &Rational| {
        let d = b.point_distance(x);
        if d > best {
            best = d;
        }
    };
    for p in &a.pieces {
        consider(&p.lo);
        consider(&p.hi);
        let start = mids.partition_point(|m| m < &p.lo);
        for m in mids[start..].iter().take_while(|m| *m <= &p.hi) {
            consider(m);
        }
    }
    best
}

/// Hausdorff metric on the hyperspace of the common ambient interval, with
/// the empty set at distance `diam(space)` from every nonempty set.
pub fn hausdorff_metric(
    a: &IntervalUnion,
    b: &IntervalUnion,
) -> Result<HausdorffDistance, GeometryError> {
    if a.space != b.space {
        return Err(GeometryError::SpaceMismatch);
    }
    let value = match (a.is_empty(), b.is_empty()) {
        (true, true) => Rational::zero(),
        (true, false) | (false, true) => a.space.length(),
        (false, false) => {
            let ab = one_sided_distance(a, b);
            let ba = one_sided_distance(b, a);
            ab.max(ba)
        }
    };
    Ok(HausdorffDistance::exact(value))
}

/// True iff every piece of `k` lies in the open set `⋃ u`.
pub fn subset_of_open(k: &IntervalUnion, u: &[OpenInterval]) -> bool {
    if k.is_empty() {
        return true;
    }
    // Components of the open union: merge only strictly overlapping
    // intervals, since (a,b) ∪ (b,c) misses b.
    let mut opens: Vec<&OpenInterval> = u.iter().filter(|o| o.lo < o.hi).collect();
    opens.sort_by(|x, y| x.lo.cmp(&y.lo));
    let mut comps: Vec<(Rational, Rational)> = Vec::new();
    for o in opens {
        match comps.last_mut() {
            Some((_, h)) if o.lo < *h => {
                if o.hi > *h {
                    *h = o.hi.clone();
                }
            }
            _ => comps.push((o.lo.clone(), o.hi.clone())),
        }
    }
    k.pieces.iter().all(|p| {
        let i = comps.partition_point(|(l, _)| l < &p.lo);
        i > 0 && p.hi < comps[i - 1].1
    })
}

/// True iff `k` meets the open set `⋃ u`.
pub fn intersects_open(k: &IntervalUnion, u: &[OpenInterval]) -> bool {
    u.iter().any(|o| {
        k.pieces
            .iter()
            .any(|p| p.lo < o.hi && p.hi > o.lo && o.lo < o.hi)
    })
}

/// True iff the closed sets share no point.
pub fn disjoint_from_compact(f: &IntervalUnion, k: &IntervalUnion) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < f.pieces.len() && j < k.pieces.len() {
        let (a, b) = (&f.pieces[i], &k.pieces[j]);
        if a.lo <= b.hi && b.lo <= a.hi {
            return false;
        }
        if a.hi < b.hi {
            i += 1;
        } else {
            j += 1;
        }
    }
    true
}

/// `a ∩ [n·grid, (n+1)·grid]` for every grid cell meeting the space bound.
///
/// A nondegenerate piece that only touches a cell boundary contributes
/// nothing to the neighbouring cell; singletons go to every cell holding
/// them.
pub fn simplex_partition_1d(
    a: &IntervalUnion,
    grid: &Rational,
) -> Result<Vec<IntervalUnion>, GeometryError> {
    if !grid.is_positive() {
        return Err(GeometryError::BadGrid);
    }
    let first = rational::floor(&(&a.space.lo / grid));
    let mut last = -rational::floor(&(-&a.space.hi / grid)) - 1u32;
    if last < first {
        last = first.clone();
    }
    let mut cells = Vec::new();
    let mut n = first;
    while n <= last {
        let lo = Rational::from_integer(n.clone()) * grid;
        let cell = Interval::new(lo.clone(), lo + grid);
        let pieces = a
            .pieces
            .iter()
            .filter_map(|p| p.intersect(&cell).filter(|c| !c.is_point() || p.is_point()))
            .collect();
        cells.push(IntervalUnion::from_unsorted(a.space.clone(), pieces));
        n += 1u32;
    }
    Ok(cells)
}

/// True iff every pair of blocks shares at most one point.
pub fn blocks_almost_disjoint(blocks: &[IntervalUnion]) -> bool {
    for (i, x) in blocks.iter().enumerate() {
        for y in &blocks[i + 1..] {
            let common = x.intersection(y);
            match common.pieces() {
                [] => {}
                [p] if p.is_point() => {}
                _ => return false,
            }
        }
    }
    true
}

/// Closed axis-aligned box as per-coordinate intervals.
pub type AxisBox = Vec<Interval>;

/// Finite union of axis-aligned boxes with disjoint interiors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxUnion {
    dimension: usize,
    pieces: Vec<AxisBox>,
}

impl BoxUnion {
    pub fn new(dimension: usize, pieces: Vec<AxisBox>) -> Result<BoxUnion, GeometryError> {
        assert!(dimension > 0);
        for b in &pieces {
            if b.len() != dimension {
                return Err(GeometryError::Dimension {
                    expected: dimension,
                    found: b.len(),
                });
            }
        }
        Ok(BoxUnion { dimension, pieces })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn pieces(&self) -> &[AxisBox] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Squared Euclidean diameter, exact. Quadratic in the piece count.
    pub fn diameter_squared(&self) -> Rational {
        let mut best = Rational::zero();
        for (i, x) in self.pieces.iter().enumerate() {
            for y in &self.pieces[i..] {
                let d: Rational = x
                    .iter()
                    .zip(y)
                    .map(|(p, q)| {
                        let s = (&p.hi - &q.lo).max(&q.hi - &p.lo);
                        &s * &s
                    })
                    .sum();
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// Rational diameter when the squared diameter is a rational square.
    pub fn diameter_exact(&self) -> Option<Rational> {
        let sq = self.diameter_squared();
        let r = rational::sqrt_upper(&sq, 64);
        (&r * &r == sq).then_some(r)
    }

    pub fn diameter(&self) -> f64 {
        rational::to_f64(&self.diameter_squared()).sqrt()
    }

    pub fn box_diameter_squared(b: &AxisBox) -> Rational {
        b.iter().map(|i| i.length() * i.length()).sum()
    }

    fn point_distance_squared(&self, x: &[Rational]) -> Rational {
        self.pieces
            .iter()
            .map(|b| {
                b.iter()
                    .zip(x)
                    .map(|(i, c)| {
                        let gap = match (c.cmp(&i.lo), c.cmp(&i.hi)) {
                            (Ordering::Less, _) => &i.lo - c,
                            (_, Ordering::Greater) => c - &i.hi,
                            _ => Rational::zero(),
                        };
                        &gap * &gap
                    })
                    .sum::<Rational>()
            })
            .min()
            .expect("nonempty")
    }

    fn vertices(b: &AxisBox) -> impl Iterator<Item = Vec<Rational>> + '_ {
        (0..1usize << b.len()).map(move |mask| {
            b.iter()
                .enumerate()
                .map(|(k, i)| {
                    if mask >> k & 1 == 1 {
                        i.hi.clone()
                    } else {
                        i.lo.clone()
                    }
                })
                .collect()
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BoxUnionJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<BoxUnion, GeometryError> {
        let raw: BoxUnionJson =
            serde_json::from_str(s).map_err(|e| GeometryError::Parse(e.to_string()))?;
        let pieces = raw
            .pieces
            .iter()
            .map(|b| b.iter().map(strings_to_pair).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        BoxUnion::new(raw.dimension, pieces)
    }
}

#[derive(Serialize, Deserialize)]
struct BoxUnionJson {
    dimension: usize,
    pieces: Vec<Vec<[String; 2]>>,
}

impl From<&BoxUnion> for BoxUnionJson {
    fn from(u: &BoxUnion) -> Self {
        BoxUnionJson {
            dimension: u.dimension,
            pieces: u
                .pieces
                .iter()
                .map(|b| b.iter().map(pair_to_strings).collect())
                .collect(),
        }
    }
}

/// Hausdorff distance between box unions from vertex samples; flagged
/// inexact since the supremum over a box need not sit at a vertex.
pub fn hausdorff_metric_boxes(
    a: &BoxUnion,
    b: &BoxUnion,
) -> Result<HausdorffDistance, GeometryError> {
    if a.dimension != b.dimension {
        return Err(GeometryError::Dimension {
            expected: a.dimension,
            found: b.dimension,
        });
    }
    let sided = |x: &BoxUnion, y: &BoxUnion| {
        x.pieces
            .iter()
            .flat_map(BoxUnion::vertices)
            .map(|v| y.point_distance_squared(&v))
            .max()
            .unwrap_or_else(Rational::zero)
    };
    let value = match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (false, false) => {
            let sq = sided(a, b).max(sided(b, a));
            rational::to_f64(&sq).sqrt()
        }
        // no ambient space on boxes: unit cube diagonal
        _ => (a.dimension as f64).sqrt(),
    };
    Ok(HausdorffDistance {
        value,
        rational: None,
        exact: false,
    })
}
