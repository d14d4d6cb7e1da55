//! `salemlab`: build stages, compare sets, drive the reductions and
//! produce dimension reports.

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use salemlab::bits::{p3_member, phi_transform, q2_member, BitMatrix, BitSequence};
use salemlab::constructions::{f_p_stage, pi03_stage, salem_gap_stage, StageReport};
use salemlab::dimension::{salem_report, DimensionReport, FourierParams, ReportParams};
use salemlab::geometry::{hausdorff_metric, hausdorff_metric_boxes, BoxUnion, IntervalUnion};
use salemlab::measures::{sweep, FourierSample};
use salemlab::parse::parse_scheme;
use salemlab::rational::{format_rational, parse_rational, Rational};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "salemlab",
    version,
    about = "Salem-set constructions and dimension estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Clone)]
struct Fourier {
    #[arg(long, default_value_t = 65536.0)]
    xi_max: f64,
    #[arg(long, default_value_t = 12)]
    bands: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Build a stage: set JSON plus per-stage piece counts.
    Build {
        scheme: String,
        #[arg(long, default_value_t = 4)]
        stage: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Hausdorff distance between two set files.
    Metric {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Drive the reduction maps.
    Reduce {
        #[command(subcommand)]
        map: Reduction,
    },
    /// Box, Frostman and Fourier estimates for a scheme.
    Report {
        scheme: String,
        #[arg(long, default_value_t = 8)]
        stage: usize,
        #[command(flatten)]
        fourier: Fourier,
        #[command(flatten)]
        output: Output,
    },
    /// Fourier transform of the scheme's measure on a log-spaced grid.
    Sweep {
        scheme: String,
        #[arg(long, default_value_t = 8)]
        stage: usize,
        #[arg(long, default_value_t = 65536.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum Reduction {
    /// Φ(x)(m,n) = max over i <= m of x(i,n).
    Phi { rows: String },
    /// Stage of f_p(x).
    Fp {
        p: String,
        x: String,
        #[arg(long, default_value_t = 4)]
        stage: usize,
    },
    /// Stage of f(x) = {0} ∪ ⋃ g_m(x_m), optionally after Φ.
    Pi03 {
        p: String,
        rows: String,
        #[arg(long, default_value_t = 4)]
        stage: usize,
        #[arg(long)]
        phi: bool,
    },
    /// Stage of h(x), optionally after Φ.
    Salemgap {
        p: String,
        rows: String,
        #[arg(long, default_value_t = 4)]
        stage: usize,
        #[arg(long)]
        phi: bool,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Parse(String),
    Numeric(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn numeric(e: impl std::fmt::Display) -> Failure {
    Failure::Numeric(e.to_string())
}

fn parse_err(e: impl std::fmt::Display) -> Failure {
    Failure::Parse(e.to_string())
}

/// First 16 hex digits of SHA-256 over the canonical config string.
fn config_hash(parts: &[(&str, String)]) -> String {
    let canon: Vec<String> = parts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let digest = Sha256::digest(canon.join(";").as_bytes());
    hex::encode(digest)[..16].to_string()
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or("out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_csv(out: Box<dyn Write>, header: &[&str], rows: &[Vec<String>], hash: &str) -> Outcome {
    let mut w = csv::Writer::from_writer(out);
    let mut h: Vec<&str> = header.to_vec();
    h.push("config_hash");
    w.write_record(&h)?;
    for r in rows {
        let mut r = r.clone();
        r.push(hash.to_string());
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_text(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

fn build(scheme: &str, stage: usize, output: &Output) -> Outcome {
    let s = parse_scheme(scheme).map_err(parse_err)?;
    let stages = s.stages(stage).map_err(numeric)?;
    let last = stages.last().expect("stage list is nonempty");
    let first = s.first_stage();
    let rows: Vec<Vec<String>> = stages
        .iter()
        .enumerate()
        .map(|(i, st)| StageReport::of(first + i, st).csv_record())
        .collect();
    let hash = config_hash(&[
        ("cmd", "build".into()),
        ("scheme", scheme.into()),
        ("stage", stage.to_string()),
    ]);
    match (&output.out, output.format) {
        (Some(path), _) => {
            write_text(&mut *sink(Some(path))?, &last.to_json())?;
            write_csv(
                sink(Some(&sibling(path, "stages.csv")))?,
                &StageReport::CSV_HEADER,
                &rows,
                &hash,
            )
        }
        (None, Format::Json) => write_text(&mut *sink(None)?, &last.to_json()),
        (None, Format::Csv) => write_csv(sink(None)?, &StageReport::CSV_HEADER, &rows, &hash),
    }
}

enum SetFile {
    Line(IntervalUnion),
    Boxes(BoxUnion),
}

fn read_set(path: &Path) -> Result<SetFile, Failure> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(u) = IntervalUnion::from_json(&text) {
        return Ok(SetFile::Line(u));
    }
    BoxUnion::from_json(&text)
        .map(SetFile::Boxes)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn metric(a: &Path, b: &Path, format: Format) -> Outcome {
    let d = match (read_set(a)?, read_set(b)?) {
        (SetFile::Line(x), SetFile::Line(y)) => hausdorff_metric(&x, &y).map_err(numeric)?,
        (SetFile::Boxes(x), SetFile::Boxes(y)) => {
            hausdorff_metric_boxes(&x, &y).map_err(numeric)?
        }
        _ => return Err(numeric("cannot compare an interval union with a box union")),
    };
    let exact = d.rational.as_ref().map(format_rational);
    let text = match format {
        Format::Json => serde_json::json!({
            "value": d.value,
            "exact": d.exact,
            "rational": exact,
        })
        .to_string(),
        Format::Csv => match exact {
            Some(r) => format!("{r}\t{}", d.value),
            None => format!("~{}", d.value),
        },
    };
    write_text(&mut *sink(None)?, &text)
}

fn matrix(rows: &str, phi: bool) -> Result<BitMatrix, Failure> {
    let x: BitMatrix = rows.parse().map_err(parse_err)?;
    Ok(if phi { phi_transform(&x) } else { x })
}

fn rational_arg(s: &str) -> Result<Rational, Failure> {
    parse_rational(s).map_err(parse_err)
}

fn reduce(map: &Reduction) -> Outcome {
    let mut out = sink(None)?;
    let text = match map {
        Reduction::Phi { rows } => {
            let x = matrix(rows, false)?;
            let y = phi_transform(&x);
            serde_json::json!({
                "input": x.to_string(),
                "phi": y.to_string(),
                "input_in_p3": p3_member(&x),
                "phi_in_p3": p3_member(&y),
            })
            .to_string()
        }
        Reduction::Fp { p, x, stage } => {
            let x: BitSequence = x.parse().map_err(parse_err)?;
            let set = f_p_stage(&rational_arg(p)?, &x, *stage).map_err(numeric)?;
            eprintln!("x in Q2: {}", q2_member(&x));
            set.to_json()
        }
        Reduction::Pi03 {
            p,
            rows,
            stage,
            phi,
        } => pi03_stage(&rational_arg(p)?, &matrix(rows, *phi)?, *stage)
            .map_err(numeric)?
            .to_json(),
        Reduction::Salemgap {
            p,
            rows,
            stage,
            phi,
        } => salem_gap_stage(&rational_arg(p)?, &matrix(rows, *phi)?, *stage)
            .map_err(numeric)?
            .to_json(),
    };
    write_text(&mut *out, &text)
}

fn report_json(r: &DimensionReport, hash: &str) -> String {
    let mut v = r.to_json_value();
    v["config_hash"] = hash.into();
    v.to_string()
}

fn report(scheme: &str, stage: usize, fourier: &Fourier, output: &Output) -> Outcome {
    let s = parse_scheme(scheme).map_err(parse_err)?;
    let params = ReportParams::new(FourierParams {
        xi_max: fourier.xi_max,
        bands: fourier.bands,
        seed: fourier.seed,
        ..FourierParams::default()
    });
    let hash = config_hash(&[
        ("cmd", "report".into()),
        ("scheme", scheme.into()),
        ("stage", stage.to_string()),
        ("xi_max", fourier.xi_max.to_string()),
        ("bands", fourier.bands.to_string()),
        ("seed", fourier.seed.to_string()),
    ]);
    let r = salem_report(&s, stage, &params).map_err(numeric)?;
    match output.format {
        Format::Json => write_text(&mut *sink(output.out.as_deref())?, &report_json(&r, &hash))?,
        Format::Csv => write_csv(
            sink(output.out.as_deref())?,
            &DimensionReport::CSV_HEADER,
            &[r.csv_record()],
            &hash,
        )?,
    }
    if let Some(path) = &output.out {
        let rows: Vec<Vec<String>> = r
            .fourier
            .peaks
            .iter()
            .map(FourierSample::csv_record)
            .collect();
        write_csv(
            sink(Some(&sibling(path, "sweep.csv")))?,
            &FourierSample::CSV_HEADER,
            &rows,
            &hash,
        )?;
    }
    Ok(())
}

fn sweep_cmd(
    scheme: &str,
    stage: usize,
    xi_max: f64,
    samples: usize,
    seed: u64,
    output: &Output,
) -> Outcome {
    let s = parse_scheme(scheme).map_err(parse_err)?;
    if xi_max.is_nan() || xi_max <= 1.0 || samples < 2 {
        return Err(numeric("sweep needs xi_max > 1 and at least 2 samples"));
    }
    let set = s.stage(stage).map_err(numeric)?;
    let mu = salemlab::dimension::scheme_measure(&s, &set).map_err(numeric)?;
    // log grid from 1 to xi_max with a seeded sub-cell offset
    let shift = (seed as f64 * 0.618_033_988_749_894_9).fract();
    let xis: Vec<f64> = (0..samples)
        .map(|i| xi_max.powf((i as f64 + shift) / samples as f64))
        .collect();
    let values = sweep(&mu, &xis);
    let hash = config_hash(&[
        ("cmd", "sweep".into()),
        ("scheme", scheme.into()),
        ("stage", stage.to_string()),
        ("xi_max", xi_max.to_string()),
        ("samples", samples.to_string()),
        ("seed", seed.to_string()),
    ]);
    match output.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = values.iter().map(FourierSample::csv_record).collect();
            write_csv(
                sink(output.out.as_deref())?,
                &FourierSample::CSV_HEADER,
                &rows,
                &hash,
            )
        }
        Format::Json => {
            let arr: Vec<serde_json::Value> = values
                .iter()
                .map(|v| serde_json::json!({"xi": v.xi, "re": v.value.re, "im": v.value.im, "modulus": v.value.norm()}))
                .collect();
            let doc = serde_json::json!({"config_hash": hash, "samples": arr});
            write_text(&mut *sink(output.out.as_deref())?, &doc.to_string())
        }
    }
}

fn configure_threads() -> Outcome {
    if let Ok(v) = std::env::var("SALEMLAB_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            Failure::Parse(format!(
                "SALEMLAB_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        if n == 0 {
            return Err(Failure::Parse("SALEMLAB_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.into()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Build {
            scheme,
            stage,
            output,
        } => build(scheme, *stage, output),
        Command::Metric { a, b, format } => metric(a, b, *format),
        Command::Reduce { map } => reduce(map),
        Command::Report {
            scheme,
            stage,
            fourier,
            output,
        } => report(scheme, *stage, fourier, output),
        Command::Sweep {
            scheme,
            stage,
            xi_max,
            samples,
            seed,
            output,
        } => sweep_cmd(scheme, *stage, *xi_max, *samples, *seed, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Parse(m) => eprintln!("error: {m}"),
                Failure::Numeric(m) => eprintln!("error: {m}"),
                Failure::Io(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
