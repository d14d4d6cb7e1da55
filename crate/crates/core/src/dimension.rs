//! Box-counting, covering-sum, Frostman and Fourier-decay estimators.

use crate::constructions::{
    h0_ratio, Block, ConstructionError, ConstructionScheme, SchemeKind, StageReport,
};
use crate::geometry::{blocks_almost_disjoint, unit_interval, Interval, IntervalUnion};
use crate::measures::{
    natural_measure, sweep, CompensatedSum, FourierTransform, Measure, MeasureError,
    PiecewiseUniformMeasure, SelfSimilarProductMeasure,
};
use crate::rational::{self, int, Rational};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DimensionError {
    #[error("fit needs at least {needed} distinct scales, got {got}")]
    Scales { needed: usize, got: usize },
    #[error("bad frequency range: {0}")]
    Frequencies(String),
    #[error("blocks are not almost disjoint")]
    NotAlmostDisjoint,
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

type Result<T> = std::result::Result<T, DimensionError>;

/// Least-squares line through log-log data.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub scale_range: (f64, f64),
    pub sample_count: usize,
}

/// Fits `y = exponent · x + intercept`; `scale_range` is the range of `x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<DecayFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    if distinct.len() < 2 {
        return Err(DimensionError::Scales {
            needed: 2,
            got: distinct.len(),
        });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        exponent: slope,
        intercept: my - slope * mx,
        r_squared,
        scale_range: (distinct[0], distinct[distinct.len() - 1]),
        sample_count: n,
    })
}

/// `Σ diam(E_i)^s`.
pub fn covering_sum(diameters: &[Rational], s: f64) -> f64 {
    diameters
        .iter()
        .map(|d| {
            if d.is_zero() {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (s * rational::ln(d)).exp()
            }
        })
        .collect::<CompensatedSum>()
        .value()
}

pub fn covering_sum_of(set: &IntervalUnion, s: f64) -> f64 {
    let d: Vec<Rational> = set.pieces().iter().map(Interval::length).collect();
    covering_sum(&d, s)
}

/// Slope of `ln N_k` against `-ln δ_k` (maximal piece diameter).
pub fn box_count_fit(reports: &[StageReport]) -> Result<DecayFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = reports
        .iter()
        .filter(|r| r.pieces > 0 && r.max_diam.is_positive())
        .map(|r| (-rational::ln(&r.max_diam), (r.pieces as f64).ln()))
        .unzip();
    least_squares(&xs, &ys)
}

/// Slope of `ln N` against `-ln` of the largest box diameter, one point
/// per box union.
pub fn box_union_count_fit(stages: &[crate::geometry::BoxUnion]) -> Result<DecayFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = stages
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let d2 = s
                .pieces()
                .iter()
                .map(crate::geometry::BoxUnion::box_diameter_squared)
                .max()
                .expect("nonempty");
            (-rational::ln(&d2) / 2.0, (s.len() as f64).ln())
        })
        .unzip();
    least_squares(&xs, &ys)
}

/// Number of cells `[n 2^-i, (n+1) 2^-i)` of the space met by `set`, for
/// each level `i`.
pub fn grid_box_counts(set: &IntervalUnion, levels: &[u32]) -> Vec<(u32, usize)> {
    let lo = &set.space().lo;
    let span = set.space().length();
    levels
        .iter()
        .map(|&i| {
            let eps = &span * rational::two_pow_neg(i);
            let cells = num_bigint::BigInt::from(1u8) << i;
            let mut count = num_bigint::BigInt::zero();
            let mut last: Option<num_bigint::BigInt> = None;
            for p in set.pieces() {
                let a = rational::floor(&((&p.lo - lo) / &eps));
                let b = if p.is_point() {
                    a.clone()
                } else {
                    -rational::floor(&(-(&p.hi - lo) / &eps)) - 1u8
                };
                let b = b.min(&cells - 1u8).max(a.clone());
                let start = match &last {
                    Some(l) if l >= &a => l + 1u8,
                    _ => a,
                };
                if b >= start {
                    count += &b - &start + 1u8;
                    last = Some(b);
                }
            }
            (i, usize::try_from(count).expect("count fits"))
        })
        .collect()
}

/// Slope of `ln N(2^-i)` against `i ln 2`.
pub fn grid_box_fit(set: &IntervalUnion, levels: &[u32]) -> Result<DecayFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid_box_counts(set, levels)
        .into_iter()
        .filter(|(_, n)| *n > 0)
        .map(|(i, n)| (i as f64 * std::f64::consts::LN_2, (n as f64).ln()))
        .unzip();
    least_squares(&xs, &ys)
}

/// Slope of `ln sup_x μ(B(x, r))` against `ln r`, clamped to `[0, d]`.
pub fn frostman_fit(
    mu: &PiecewiseUniformMeasure,
    centers: &[Rational],
    radii: &[Rational],
    d: f64,
) -> Result<DecayFit> {
    let mut rs: Vec<&Rational> = radii.iter().filter(|r| r.is_positive()).collect();
    rs.sort();
    rs.dedup();
    if rs.len() < 4 {
        return Err(DimensionError::Scales {
            needed: 4,
            got: rs.len(),
        });
    }
    if centers.is_empty() {
        return Err(DimensionError::Scales { needed: 4, got: 0 });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rs
        .iter()
        .map(|r| {
            let sup = centers
                .iter()
                .map(|c| mu.ball_mass(c, r))
                .fold(0.0, f64::max);
            (rational::ln(r), sup.ln())
        })
        .unzip();
    let mut fit = least_squares(&xs, &ys)?;
    fit.exponent = fit.exponent.clamp(0.0, d);
    Ok(fit)
}

/// Frequency sampling for [`fourier_decay_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FourierParams {
    pub xi_max: f64,
    pub bands: usize,
    /// Floor on samples per band.
    pub min_per_band: usize,
    /// Samples per unit frequency before capping.
    pub density: f64,
    pub max_per_band: usize,
    pub seed: u64,
}

impl Default for FourierParams {
    fn default() -> Self {
        FourierParams {
            xi_max: 65536.0,
            bands: 12,
            min_per_band: 64,
            density: 2.0,
            max_per_band: 1 << 16,
            seed: 0,
        }
    }
}

/// Band suprema and the fitted exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierDecay {
    pub fit: DecayFit,
    /// `-2 × slope`.
    pub raw_exponent: f64,
    /// `raw_exponent` clamped to `[0, d]`.
    pub dimension: f64,
    /// `(ξ, |μ̂(ξ)|)` at the sample attaining each band supremum.
    pub band_sups: Vec<(f64, f64)>,
    /// The sample attaining each band supremum.
    pub peaks: Vec<crate::measures::FourierSample>,
}

/// Dyadic bands `[ξ_max 2^-(b+1), ξ_max 2^-b)`, lowest first, each with a
/// logarithmic lattice shifted by a golden-ratio sequence from a seeded
/// start.
pub fn band_frequencies(params: &FourierParams) -> Result<Vec<(f64, f64, Vec<f64>)>> {
    if params.bands < 4 {
        return Err(DimensionError::Frequencies(format!(
            "need >= 4 bands, got {}",
            params.bands
        )));
    }
    let lowest = params.xi_max / 2f64.powi(params.bands as i32);
    if lowest.is_nan() || lowest < 1.0 || !params.xi_max.is_finite() {
        return Err(DimensionError::Frequencies(format!(
            "xi_max {} too small for {} bands",
            params.xi_max, params.bands
        )));
    }
    const PHI_INV: f64 = 0.618_033_988_749_894_9;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut out = Vec::with_capacity(params.bands);
    for b in (0..params.bands).rev() {
        let hi = params.xi_max / 2f64.powi(b as i32);
        let lo = hi / 2.0;
        let want = ((hi - lo) * params.density).ceil() as usize;
        let n = want.min(params.max_per_band).max(params.min_per_band);
        let u0: f64 = rng.gen();
        let xis = (0..n)
            .map(|i| {
                let jitter = (u0 + i as f64 * PHI_INV).fract();
                lo * 2f64.powf((i as f64 + jitter) / n as f64)
            })
            .collect();
        out.push((lo, hi, xis));
    }
    Ok(out)
}

/// Band suprema of `|μ̂|` regressed against the log of the frequency where
/// each is attained, so an oscillating envelope is fitted through its peaks
/// rather than through band centres.
pub fn fourier_decay_fit<M: FourierTransform + ?Sized>(
    mu: &M,
    params: &FourierParams,
    d: f64,
) -> Result<FourierDecay> {
    let bands = band_frequencies(params)?;
    let all: Vec<f64> = bands
        .iter()
        .flat_map(|(_, _, x)| x.iter().copied())
        .collect();
    let samples = sweep(mu, &all);
    let mut at = 0;
    let mut band_sups = Vec::with_capacity(bands.len());
    let mut peaks = Vec::with_capacity(bands.len());
    for (lo, hi, xis) in &bands {
        let peak = samples[at..at + xis.len()]
            .iter()
            .copied()
            .max_by(|a, b| a.value.norm().total_cmp(&b.value.norm()))
            .expect("nonempty band");
        at += xis.len();
        debug_assert!(peak.xi >= *lo && peak.xi <= *hi);
        band_sups.push((peak.xi, peak.value.norm().max(f64::MIN_POSITIVE)));
        peaks.push(peak);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = band_sups.iter().map(|(c, s)| (c.ln(), s.ln())).unzip();
    let fit = least_squares(&xs, &ys)?;
    let raw_exponent = 0.0 - 2.0 * fit.exponent;
    Ok(FourierDecay {
        raw_exponent,
        dimension: raw_exponent.clamp(0.0, d),
        fit,
        band_sups,
        peaks,
    })
}

/// `sup` of block estimates, refused unless blocks meet in at most a point.
pub fn countable_union_sup(estimates: &[f64], almost_disjoint: bool) -> Result<f64> {
    if !almost_disjoint {
        return Err(DimensionError::NotAlmostDisjoint);
    }
    Ok(estimates.iter().copied().fold(0.0, f64::max))
}

/// Estimators run on one scheme at one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub scheme: String,
    pub stage: usize,
    pub pieces: usize,
    pub min_diam: Rational,
    pub hdim_est: f64,
    pub frostman_est: Option<f64>,
    pub fourier_raw: f64,
    pub fdim_est: f64,
    pub salem_defect: f64,
    pub box_fit: DecayFit,
    pub frostman_fit: Option<DecayFit>,
    pub fourier: FourierDecay,
    pub declared_hdim: Option<f64>,
    pub declared_fdim: Option<f64>,
    /// Per-block `(hdim, fdim)` for union-of-blocks schemes.
    pub blocks: Vec<(f64, f64)>,
}

impl DimensionReport {
    pub const CSV_HEADER: [&'static str; 11] = [
        "scheme",
        "stage",
        "pieces",
        "min_diam",
        "hdim_est",
        "frostman_est",
        "fourier_raw",
        "fourier_dim",
        "salem_defect",
        "r2_box",
        "r2_fourier",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.6}");
        vec![
            self.scheme.clone(),
            self.stage.to_string(),
            self.pieces.to_string(),
            rational::sci(&self.min_diam),
            f(self.hdim_est),
            self.frostman_est.map_or("NaN".to_string(), f),
            f(self.fourier_raw),
            f(self.fdim_est),
            f(self.salem_defect),
            f(self.box_fit.r_squared),
            f(self.fourier.fit.r_squared),
        ]
    }

    /// The CSV columns plus declared targets, per-block estimates and band
    /// suprema. Non-finite numbers become `null`.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "scheme": self.scheme,
            "stage": self.stage,
            "pieces": self.pieces,
            "min_diam": rational::sci(&self.min_diam),
            "hdim_est": self.hdim_est,
            "frostman_est": self.frostman_est,
            "fourier_raw": self.fourier_raw,
            "fourier_dim": self.fdim_est,
            "salem_defect": self.salem_defect,
            "r2_box": self.box_fit.r_squared,
            "r2_fourier": self.fourier.fit.r_squared,
            "declared_hdim": self.declared_hdim,
            "declared_fdim": self.declared_fdim,
            "blocks": self.blocks,
            "band_sups": self.fourier.band_sups,
        })
    }
}

struct Estimate {
    box_fit: DecayFit,
    frostman: Option<DecayFit>,
    fourier: FourierDecay,
}

fn grid_levels(set: &IntervalUnion) -> Vec<u32> {
    let span = set.space().length();
    let fine = set
        .min_piece_diameter()
        .filter(|d| d.is_positive())
        .map_or(12, |d| {
            (-rational::ln(&(d / &span)) / std::f64::consts::LN_2).floor() as u32
        });
    (1..=fine.clamp(4, 12)).collect()
}

fn frostman_for(set: &IntervalUnion, max_centers: usize) -> Option<DecayFit> {
    let mu = natural_measure(set).ok()?;
    let step = (set.len() / max_centers.max(1)).max(1);
    let centers: Vec<Rational> = set
        .pieces()
        .iter()
        .step_by(step)
        .flat_map(|p| [p.lo.clone(), p.midpoint(), p.hi.clone()])
        .collect();
    let diam = set.diameter();
    if !diam.is_positive() {
        return None;
    }
    let floor = if set.len() > 1 {
        set.min_piece_diameter()
    } else {
        None
    };
    let radii: Vec<Rational> = (1..=40)
        .map(|j| &diam * rational::two_pow_neg(j))
        .take_while(|r| floor.as_ref().is_none_or(|f| r >= f))
        .collect();
    frostman_fit(&mu, &centers, &radii, 1.0).ok()
}

fn fourier_for(
    measure: &Measure,
    set: &IntervalUnion,
    params: &FourierParams,
) -> Result<FourierDecay> {
    let mut p = params.clone();
    if let Measure::Piecewise(m) = measure {
        // stage measures are absolutely continuous; stay below 1/min_diam
        if m.pieces().len() > 1 {
            if let Some(d) = set.min_piece_diameter().filter(|d| d.is_positive()) {
                let cap = 1.0 / rational::to_f64(&d);
                while p.xi_max > cap && p.xi_max / 2f64.powi(p.bands as i32 + 1) >= 1.0 {
                    p.xi_max /= 2.0;
                }
            }
        }
        let budget = ((1usize << 20) / m.pieces().len().max(1)).max(p.min_per_band);
        p.max_per_band = p.max_per_band.min(budget);
    }
    fourier_decay_fit(measure, &p, 1.0)
}

/// Counting fit over stages, or a grid fit of the last stage when all
/// stages share one scale.
fn fit_reports(reports: &[StageReport], last: &IntervalUnion) -> Result<DecayFit> {
    match box_count_fit(reports) {
        Err(DimensionError::Scales { .. }) => grid_box_fit(last, &grid_levels(last)),
        r => r,
    }
}

fn estimate(
    reports: &[StageReport],
    last: &IntervalUnion,
    measure: &Measure,
    params: &ReportParams,
) -> Result<Estimate> {
    Ok(Estimate {
        box_fit: fit_reports(reports, last)?,
        frostman: frostman_for(last, params.frostman_centers),
        fourier: fourier_for(measure, last, &params.fourier)?,
    })
}

/// Limit measure of a scheme when one is available in closed form,
/// otherwise the natural measure of the stage.
pub fn scheme_measure(scheme: &ConstructionScheme, stage_set: &IntervalUnion) -> Result<Measure> {
    Ok(match &scheme.kind {
        SchemeKind::Interval => {
            Measure::Piecewise(PiecewiseUniformMeasure::uniform(unit_interval()))
        }
        SchemeKind::Cantor(n) => Measure::Product(SelfSimilarProductMeasure::two_piece(
            &rational::rat(1, *n as i64),
        )?),
        SchemeKind::GeneralizedCantor(r) if r.len() == 1 => {
            Measure::Product(SelfSimilarProductMeasure::two_piece(&r[0])?)
        }
        SchemeKind::SAlpha(a) => {
            let r = crate::constructions::s_ratio(&crate::constructions::alpha_to_p(a));
            Measure::Product(SelfSimilarProductMeasure::three_piece(&r)?)
        }
        _ => Measure::Piecewise(natural_measure(stage_set)?),
    })
}

/// Parameters of [`salem_report`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportParams {
    pub fourier: FourierParams,
    pub frostman_centers: usize,
}

impl ReportParams {
    pub fn new(fourier: FourierParams) -> ReportParams {
        ReportParams {
            fourier,
            frostman_centers: 128,
        }
    }
}

/// Jarník stages are blocks; the counting fit starts at block 2 because
/// block 1 is a single merged interval for small `α`.
pub const JARNIK_FIRST_FIT_BLOCK: usize = 2;

fn block_view(set: &IntervalUnion, window: &Interval) -> IntervalUnion {
    let w =
        IntervalUnion::new(set.space().clone(), vec![window.clone()]).expect("window inside space");
    let part = set.intersection(&w);
    let scale = int(1) / window.length();
    let shift = -(&window.lo * &scale);
    part.map_affine(&scale, &shift, unit_interval())
        .expect("window maps onto [0,1]")
}

/// Box, Frostman and Fourier estimates of `scheme` at `stage`.
/// Union-of-blocks schemes are estimated block by block and combined with
/// [`countable_union_sup`].
pub fn salem_report(
    scheme: &ConstructionScheme,
    stage: usize,
    params: &ReportParams,
) -> Result<DimensionReport> {
    let stages = scheme.stages(stage)?;
    let last = stages.last().expect("at least one stage").clone();
    let first = scheme.first_stage();
    let min_diam = last.min_piece_diameter().unwrap_or_else(Rational::zero);
    let base =
        |hdim_est: f64, box_fit, frostman_fit: Option<DecayFit>, fourier: FourierDecay, blocks| {
            let fdim_est = fourier.dimension;
            DimensionReport {
                scheme: scheme.label.clone(),
                stage,
                pieces: last.len(),
                min_diam: min_diam.clone(),
                hdim_est,
                frostman_est: frostman_fit.as_ref().map(|f: &DecayFit| f.exponent),
                fourier_raw: fourier.raw_exponent,
                fdim_est,
                salem_defect: hdim_est - fdim_est,
                box_fit,
                frostman_fit,
                fourier,
                declared_hdim: scheme.declared_hdim(),
                declared_fdim: scheme.declared_fdim(),
                blocks,
            }
        };

    if let Some(blocks) = scheme.blocks(stage) {
        let views = block_views(scheme, &stages, &blocks);
        let mut per_block = Vec::new();
        for (b, reports, fin) in &views {
            let measure = match (&scheme.kind, b.index) {
                (SchemeKind::SalemGap { p, .. }, 0) => {
                    Measure::Product(SelfSimilarProductMeasure::two_piece(&h0_ratio(p))?)
                }
                _ => Measure::Piecewise(natural_measure(fin)?),
            };
            per_block.push(estimate(reports, fin, &measure, params)?);
        }
        let disjoint = views_disjoint(&last, &views);
        let hd: Vec<f64> = per_block
            .iter()
            .map(|e| e.box_fit.exponent.clamp(0.0, 1.0))
            .collect();
        let fd: Vec<f64> = per_block.iter().map(|e| e.fourier.dimension).collect();
        let hdim = countable_union_sup(&hd, disjoint)?;
        countable_union_sup(&fd, disjoint)?;
        let frost = per_block
            .iter()
            .filter_map(|e| e.frostman.clone())
            .max_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let pairs = hd.iter().copied().zip(fd.iter().copied()).collect();
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j]));
        let (Some(ih), Some(iff)) = (argmax(&hd), argmax(&fd)) else {
            // nothing but the origin
            let fourier = fourier_decay_fit(
                &PiecewiseUniformMeasure::dirac(Rational::zero()),
                &params.fourier,
                1.0,
            )?;
            let fit = DecayFit {
                exponent: 0.0,
                intercept: 0.0,
                r_squared: 1.0,
                scale_range: (0.0, 0.0),
                sample_count: 0,
            };
            return Ok(base(0.0, fit, None, fourier, Vec::new()));
        };
        let box_fit = per_block[ih].box_fit.clone();
        let fourier = per_block[iff].fourier.clone();
        return Ok(base(hdim, box_fit, frost, fourier, pairs));
    }

    let from = match scheme.kind {
        SchemeKind::Jarnik(_) => JARNIK_FIRST_FIT_BLOCK,
        _ => 1,
    };
    let reports: Vec<StageReport> = stages
        .iter()
        .enumerate()
        .map(|(i, s)| StageReport::of(first + i, s))
        .filter(|r| r.stage >= from)
        .collect();
    let measure = scheme_measure(scheme, &last)?;
    let e = estimate(&reports, &last, &measure, params)?;
    let hdim = e.box_fit.exponent.clamp(0.0, 1.0);
    Ok(base(hdim, e.box_fit, e.frostman, e.fourier, Vec::new()))
}

type BlockView<'a> = (&'a Block, Vec<StageReport>, IntervalUnion);

/// Each block rescaled to `[0,1]` at every stage where it is present.
/// Blocks seen at fewer than two stages have no scaling history and are
/// left out.
fn block_views<'a>(
    scheme: &ConstructionScheme,
    stages: &[IntervalUnion],
    blocks: &'a [Block],
) -> Vec<BlockView<'a>> {
    let first = scheme.first_stage();
    blocks
        .iter()
        .filter_map(|b| {
            let views: Vec<(usize, IntervalUnion)> = stages
                .iter()
                .enumerate()
                .map(|(k, s)| (first + k, block_view(s, &b.window)))
                .filter(|(_, v)| !v.is_empty())
                .collect();
            if views.len() < 2 {
                return None;
            }
            let reports = views.iter().map(|(k, v)| StageReport::of(*k, v)).collect();
            let fin = views.into_iter().last().expect("nonempty").1;
            Some((b, reports, fin))
        })
        .collect()
}

fn views_disjoint(last: &IntervalUnion, views: &[BlockView<'_>]) -> bool {
    let placed: Vec<IntervalUnion> = views
        .iter()
        .map(|(b, _, _)| block_placed(last, &b.window))
        .collect();
    blocks_almost_disjoint(&placed)
}

/// Box-counting dimension alone: one fit for plain schemes, the sup of
/// per-block fits for union-of-blocks schemes. Returns the estimate and
/// the per-block values.
pub fn box_dimension(scheme: &ConstructionScheme, stage: usize) -> Result<(f64, Vec<f64>)> {
    let stages = scheme.stages(stage)?;
    let last = stages.last().expect("at least one stage");
    if let Some(blocks) = scheme.blocks(stage) {
        let views = block_views(scheme, &stages, &blocks);
        let dims = views
            .iter()
            .map(|(_, reports, fin)| Ok(fit_reports(reports, fin)?.exponent.clamp(0.0, 1.0)))
            .collect::<Result<Vec<f64>>>()?;
        let sup = countable_union_sup(&dims, views_disjoint(last, &views))?;
        return Ok((sup, dims));
    }
    let from = match scheme.kind {
        SchemeKind::Jarnik(_) => JARNIK_FIRST_FIT_BLOCK,
        _ => 1,
    };
    let first = scheme.first_stage();
    let reports: Vec<StageReport> = stages
        .iter()
        .enumerate()
        .map(|(i, s)| StageReport::of(first + i, s))
        .filter(|r| r.stage >= from)
        .collect();
    Ok((
        fit_reports(&reports, last)?.exponent.clamp(0.0, 1.0),
        Vec::new(),
    ))
}

fn block_placed(set: &IntervalUnion, window: &Interval) -> IntervalUnion {
    let w =
        IntervalUnion::new(set.space().clone(), vec![window.clone()]).expect("window inside space");
    set.intersection(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::cantor_stage;
    use crate::rational::rat;

    #[test]
    fn covering_sum_examples() {
        assert_eq!(covering_sum(&[int(1)], 1.0), 1.0);
        assert!((covering_sum_of(&cantor_stage(3, 2).unwrap(), 1.0) - 4.0 / 9.0).abs() < 1e-15);
        let s = 2f64.ln() / 3f64.ln();
        for k in 0..8 {
            assert!((covering_sum_of(&cantor_stage(3, k).unwrap(), s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn box_fit_needs_two_scales() {
        let r = StageReport::of(1, &cantor_stage(3, 1).unwrap());
        assert!(matches!(
            box_count_fit(&[r]),
            Err(DimensionError::Scales { .. })
        ));
    }

    #[test]
    fn grid_counts_of_interval_and_point() {
        let u = IntervalUnion::unit();
        assert_eq!(grid_box_counts(&u, &[1, 3]), vec![(1, 2), (3, 8)]);
        let half =
            IntervalUnion::new(unit_interval(), vec![Interval::new(int(0), rat(1, 2))]).unwrap();
        assert_eq!(grid_box_counts(&half, &[2]), vec![(2, 2)]);
        let pt = IntervalUnion::new(unit_interval(), vec![Interval::point(int(1))]).unwrap();
        assert_eq!(grid_box_counts(&pt, &[4]), vec![(4, 1)]);
        assert!((grid_box_fit(&u, &[1, 2, 3, 4]).unwrap().exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frostman_examples() {
        let radii: Vec<Rational> = (1..=8).map(rational::two_pow_neg).collect();
        let u = PiecewiseUniformMeasure::uniform(unit_interval());
        let centers: Vec<Rational> = (0..=16).map(|i| rat(i, 16)).collect();
        assert!((frostman_fit(&u, &centers, &radii, 1.0).unwrap().exponent - 1.0).abs() < 1e-9);
        let d = PiecewiseUniformMeasure::dirac(int(0));
        assert_eq!(
            frostman_fit(&d, &centers, &radii, 1.0).unwrap().exponent,
            0.0
        );
        assert!(frostman_fit(&u, &centers, &radii[..3], 1.0).is_err());
    }

    #[test]
    fn fourier_params_are_checked() {
        let mut p = FourierParams {
            bands: 3,
            ..Default::default()
        };
        let u = PiecewiseUniformMeasure::uniform(unit_interval());
        assert!(fourier_decay_fit(&u, &p, 1.0).is_err());
        p.bands = 20;
        assert!(fourier_decay_fit(&u, &p, 1.0).is_err());
    }

    #[test]
    fn union_sup_gate() {
        assert_eq!(countable_union_sup(&[0.2, 0.7, 0.5], true).unwrap(), 0.7);
        assert_eq!(countable_union_sup(&[0.4], true).unwrap(), 0.4);
        assert!(countable_union_sup(&[0.4], false).is_err());
    }
}
