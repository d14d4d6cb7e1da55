//! Browser bindings: stage builder, Fourier sweep, dimension report. Every
//! entry point takes a scheme string and returns JSON text.

use salemlab::constructions::StageReport;
use salemlab::dimension::{salem_report, scheme_measure, FourierParams, ReportParams};
use salemlab::measures::sweep;
use salemlab::parse::parse_scheme;
use salemlab::rational::to_f64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
struct StageJson {
    pieces: Vec<[f64; 2]>,
    exact: serde_json::Value,
    stages: Vec<[String; 4]>,
}

/// Stage `stage` of `scheme`: float pieces for drawing, the exact set JSON
/// and the per-stage table.
#[wasm_bindgen]
pub fn build_stage(scheme: &str, stage: usize) -> Result<String, JsValue> {
    let s = parse_scheme(scheme).map_err(fail)?;
    let stages = s.stages(stage).map_err(fail)?;
    let last = stages.last().expect("nonempty");
    let first = s.first_stage();
    let out = StageJson {
        pieces: last
            .pieces()
            .iter()
            .map(|p| [to_f64(&p.lo), to_f64(&p.hi)])
            .collect(),
        exact: serde_json::from_str(&last.to_json()).map_err(fail)?,
        stages: stages
            .iter()
            .enumerate()
            .map(|(i, st)| {
                let r = StageReport::of(first + i, st).csv_record();
                [r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone()]
            })
            .collect(),
    };
    serde_json::to_string(&out).map_err(fail)
}

/// `[ξ, |μ̂(ξ)|]` on `samples` log-spaced frequencies in `[1, xi_max]`.
#[wasm_bindgen]
pub fn fourier_sweep(
    scheme: &str,
    stage: usize,
    xi_max: f64,
    samples: usize,
) -> Result<String, JsValue> {
    if xi_max.is_nan() || xi_max <= 1.0 || samples < 2 {
        return Err(fail("need xi_max > 1 and at least 2 samples"));
    }
    let s = parse_scheme(scheme).map_err(fail)?;
    let set = s.stage(stage).map_err(fail)?;
    let mu = scheme_measure(&s, &set).map_err(fail)?;
    let xis: Vec<f64> = (0..samples)
        .map(|i| xi_max.powf(i as f64 / (samples - 1) as f64))
        .collect();
    let rows: Vec<[f64; 2]> = sweep(&mu, &xis)
        .iter()
        .map(|v| [v.xi, v.value.norm()])
        .collect();
    serde_json::to_string(&rows).map_err(fail)
}

#[wasm_bindgen]
pub fn dimension_report(
    scheme: &str,
    stage: usize,
    xi_max: f64,
    bands: usize,
    seed: u64,
) -> Result<String, JsValue> {
    let s = parse_scheme(scheme).map_err(fail)?;
    let params = ReportParams::new(FourierParams {
        xi_max,
        bands,
        seed,
        ..FourierParams::default()
    });
    let r = salem_report(&s, stage, &params).map_err(fail)?;
    Ok(r.to_json_value().to_string())
}
