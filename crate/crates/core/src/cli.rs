//! JSON-config driver: dispatches to norms, checkers and experiments, and
//! writes reports (JSON always, CSV for tabular commands, optional SVG).
//!
//! Artifacts are written to a temp file and renamed into place, so a failed
//! run never leaves a partial report.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::integrate::QuadratureSpec;
use crate::series::{PowerSeries, SeriesLiteral};
use crate::spaces::{self, compute_norm, NormKind, NormRoute, NormSpec};
use crate::verify::{self, ConvergenceRow, DensityRow, GridSpec};
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norm,
    CheckCondition,
    FindK,
    CheckMonotone,
    DilateConverge,
    TaylorError,
    Density,
}

/// Weight source: a builtin name (possibly with an embedded expression,
/// e.g. `"angular:2+cos(th1)"`) plus numeric parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub name: String,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

/// Inline series literal or a path to one.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeriesSource {
    File { file: PathBuf },
    Inline(SeriesLiteral),
}

/// Partial override of the default quadrature resolution.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverride {
    pub radial_nodes: Option<usize>,
    pub angular_nodes: Option<usize>,
    pub sphere_samples: Option<usize>,
    pub seed: Option<u64>,
}

impl QuadratureOverride {
    fn apply(&self, mut q: QuadratureSpec) -> QuadratureSpec {
        if let Some(v) = self.radial_nodes {
            q.radial_nodes = v;
        }
        if let Some(v) = self.angular_nodes {
            q.angular_nodes = v;
        }
        if let Some(v) = self.sphere_samples {
            q.sphere_samples = v;
        }
        if let Some(v) = self.seed {
            q.seed = v;
        }
        q
    }
}

/// The single JSON config document driving a run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub dimension: usize,
    pub weight: WeightConfig,
    /// Norm kind fields, e.g. {"kind": "bergman_polydisk", "p": 2.0, "alpha": 0.0}.
    pub norm: Option<NormKind>,
    #[serde(default)]
    pub route: Option<NormRoute>,
    #[serde(default)]
    pub seminorm: bool,
    pub series: Option<SeriesSource>,
    #[serde(default)]
    pub quadrature: QuadratureOverride,
    pub rho_max: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub degrees: Option<Vec<usize>>,
    pub r: Option<f64>,
    pub r0: Option<f64>,
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub bound: Option<f64>,
    pub r_min: Option<f64>,
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub plot: bool,
}

impl RunConfig {
    pub fn from_json(src: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(src)
            .map_err(|e| Error::InvalidArgument(format!("bad config: {e}")))?;
        if cfg.dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(cfg)
    }

    fn weight(&self) -> Result<Weight> {
        Weight::builtin(
            &self.weight.name,
            self.dimension,
            self.weight.alpha,
            self.weight.beta,
        )
    }

    fn series(&self) -> Result<PowerSeries> {
        let src = self
            .series
            .as_ref()
            .ok_or_else(|| Error::invalid("command requires a series"))?;
        let literal = match src {
            SeriesSource::Inline(lit) => lit.clone(),
            SeriesSource::File { file } => {
                let text = fs::read_to_string(file)?;
                serde_json::from_str(&text)?
            }
        };
        PowerSeries::from_literal(&literal)
    }

    fn norm_spec(&self) -> Result<NormSpec> {
        let kind = self
            .norm
            .ok_or_else(|| Error::invalid("command requires a norm spec"))?;
        let mut s = NormSpec::new(self.dimension, kind, self.weight()?);
        s.quadrature = self.quadrature.apply(s.quadrature);
        if let Some(rm) = self.rho_max {
            s.rho_max = rm;
        }
        if let Some(route) = self.route {
            s.route = route;
        }
        s.seminorm = self.seminorm;
        s.validate()?;
        Ok(s)
    }

    fn grid(&self) -> GridSpec {
        self.grid.unwrap_or_default()
    }
}

/// 0 success, 2 validation error, 3 numerical/domain error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::Parse { .. }
        | Error::InvalidSpec(_) => 2,
        Error::WeightDomain { .. } | Error::Integration { .. } | Error::Io(_) | Error::Json(_) => 3,
    }
}

struct Artifacts {
    report: serde_json::Value,
    /// (header, rows) written to rows.csv when present
    csv: Option<(&'static str, Vec<Vec<String>>)>,
    /// (x, y) points plotted on a log-y axis when --plot is requested
    plot: Option<Vec<(f64, f64)>>,
    summary: String,
}

/// Runs one command and writes its artifacts under `out`.
/// Returns the one-line summary printed to stderr by the binary.
pub fn run(config: &RunConfig, out: &Path, reproducible: bool) -> Result<String> {
    let a = dispatch(config)?;
    fs::create_dir_all(out)?;
    let mut doc = json!({
        "command": config.command,
        "report": a.report,
    });
    if !reproducible {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        doc["generated_at_unix"] = json!(now);
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    atomic_write(&out.join("report.json"), text.as_bytes())?;
    if let Some((header, rows)) = &a.csv {
        let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
        wtr.write_record(header.split(','))
            .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        for row in rows {
            wtr.write_record(row)
                .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        atomic_write(&out.join("rows.csv"), &bytes)?;
    }
    if config.plot {
        let points = a.plot.clone().unwrap_or_default();
        let svg = render_plot(&points);
        atomic_write(&out.join("plot.svg"), svg.as_bytes())?;
    }
    Ok(a.summary)
}

fn dispatch(config: &RunConfig) -> Result<Artifacts> {
    match config.command {
        Command::Norm => {
            let f = config.series()?;
            let s = config.norm_spec()?;
            let result = compute_norm(&f, &s)?;
            Ok(Artifacts {
                summary: format!("norm = {:.12e}", result.value),
                report: serde_json::to_value(&result)?,
                csv: None,
                plot: None,
            })
        }
        Command::CheckCondition => {
            let w = config.weight()?;
            let k = config.k.ok_or_else(|| Error::invalid("check-condition requires k"))?;
            let rep = verify::check_condition(
                &w,
                k,
                config.r0.unwrap_or(0.5),
                &config.grid(),
                config.bound.unwrap_or(verify::DEFAULT_BOUND),
            )?;
            Ok(Artifacts {
                summary: format!(
                    "k = {} passed = {} C = {:.6e}",
                    rep.k_tested, rep.passed, rep.c_estimate
                ),
                report: serde_json::to_value(&rep)?,
                csv: None,
                plot: None,
            })
        }
        Command::FindK => {
            let w = config.weight()?;
            let (found, reports) = verify::find_min_k(
                &w,
                config.k_max.unwrap_or(16),
                config.r0.unwrap_or(0.5),
                &config.grid(),
                config.bound.unwrap_or(verify::DEFAULT_BOUND),
            )?;
            let rows = reports
                .iter()
                .map(|r| {
                    vec![
                        r.k_tested.to_string(),
                        fmt(r.c_estimate),
                        r.passed.to_string(),
                    ]
                })
                .collect();
            Ok(Artifacts {
                summary: match found {
                    Some(k) => format!("min k = {k}"),
                    None => "no k passed".into(),
                },
                report: json!({ "min_k": found, "reports": reports }),
                csv: Some(("k,c_estimate,passed", rows)),
                plot: None,
            })
        }
        Command::CheckMonotone => {
            let w = config.weight()?;
            let k = config.k.ok_or_else(|| Error::invalid("check-monotone requires k"))?;
            let rep = verify::check_monotone(&w, k, &config.grid(), config.r_min)?;
            Ok(Artifacts {
                summary: format!(
                    "monotone = {} fraction = {:.4} worst slope = {:.3e}",
                    rep.monotone, rep.fraction_monotone, rep.worst_slope
                ),
                report: serde_json::to_value(&rep)?,
                csv: None,
                plot: None,
            })
        }
        Command::DilateConverge => {
            let f = config.series()?;
            let s = config.norm_spec()?;
            let radii = config
                .radii
                .as_deref()
                .ok_or_else(|| Error::invalid("dilate-converge requires radii"))?;
            let rep = verify::dilation_convergence(&f, &s, radii)?;
            let rows = rep
                .rows
                .iter()
                .map(|r: &ConvergenceRow| vec![fmt(r.r), fmt(r.norm_fr), fmt(r.norm_diff)])
                .collect();
            let plot = rep.rows.iter().map(|r| (r.r, r.norm_diff)).collect();
            Ok(Artifacts {
                summary: format!(
                    "limsup = {} vanishing = {} final diff = {:.6e}",
                    rep.limsup_check,
                    rep.vanishing_check,
                    rep.rows.last().map_or(f64::NAN, |r| r.norm_diff)
                ),
                report: serde_json::to_value(&rep)?,
                csv: Some(("r,norm_fr,norm_diff", rows)),
                plot: Some(plot),
            })
        }
        Command::TaylorError => {
            let f = config.series()?;
            let w = config.weight()?;
            let degrees = config
                .degrees
                .as_deref()
                .ok_or_else(|| Error::invalid("taylor-error requires degrees"))?;
            let q = config.quadrature.apply(QuadratureSpec::default());
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for &k in degrees {
                let err = spaces::taylor_error(&f, k, &w, config.weight.alpha, &q)?;
                points.push((k as f64, err));
                rows.push(vec![k.to_string(), fmt(err)]);
            }
            let table: Vec<serde_json::Value> = degrees
                .iter()
                .zip(&points)
                .map(|(&k, &(_, e))| json!({ "k": k, "error": e }))
                .collect();
            Ok(Artifacts {
                summary: format!(
                    "taylor tail at max degree = {:.6e}",
                    points.last().map_or(f64::NAN, |p| p.1)
                ),
                report: json!({ "rows": table }),
                csv: Some(("k,error", rows)),
                plot: Some(points),
            })
        }
        Command::Density => {
            let f = config.series()?;
            let s = config.norm_spec()?;
            let r = config.r.ok_or_else(|| Error::invalid("density requires r"))?;
            let degrees = config
                .degrees
                .as_deref()
                .ok_or_else(|| Error::invalid("density requires degrees"))?;
            let rows = verify::density_experiment(&f, &s, r, degrees)?;
            let csv = rows
                .iter()
                .map(|d: &DensityRow| vec![d.degree.to_string(), fmt(d.error)])
                .collect();
            let plot = rows.iter().map(|d| (d.degree as f64, d.error)).collect();
            Ok(Artifacts {
                summary: format!(
                    "final density error = {:.6e}",
                    rows.last().map_or(f64::NAN, |d| d.error)
                ),
                report: json!({ "r": r, "rows": rows }),
                csv: Some(("degree,error", csv)),
                plot: Some(plot),
            })
        }
    }
}

/// Full round-trip float formatting for CSV cells.
fn fmt(x: f64) -> String {
    let mut buf = ryu_like(x);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(x: f64) -> String {
    // {:?} on f64 is the shortest representation that round-trips
    format!("{x:?}")
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Minimal static SVG: points and a polyline on a log10 y-axis.
pub fn render_plot(points: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 48.0;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n  <line x1=\"{M}\" y1=\"{}\" \
         x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n  <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" \
         y2=\"{}\" stroke=\"black\"/>\n",
        H - M,
        W - M,
        H - M,
        H - M
    ));
    let finite: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| x.is_finite() && y.is_finite() && y > 0.0)
        .collect();
    if !finite.is_empty() {
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &finite {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y.log10());
            y1 = y1.max(y.log10());
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let py = |y: f64| (H - M) - (y.log10() - y0) / (y1 - y0) * (H - 2.0 * M);
        let path: Vec<String> = finite
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        svg.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\"/>\n",
            path.join(" ")
        ));
        for &(x, y) in &finite {
            svg.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n",
                px(x),
                py(y)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
