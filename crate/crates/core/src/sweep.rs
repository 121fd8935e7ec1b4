//! Tradeoff sweeps and their CSV / JSON / SVG renderings.
//!
//! Every numeric field is rounded to 12 significant digits before it is
//! written, so the CSV and JSON outputs carry identical values.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::{format_sig, round_sig};
use crate::protocol::{run_session, StrategyVariant};
use crate::qsim::Basis;
use crate::strategy::{analyze_channel, ProbeParams};

/// Exact CSV header.
pub const CSV_HEADER: &str = "d_xy,d_uv,delta_xy,delta_uv,bound_xy_nats,bound_uv_nats,mi_xy_nats,mi_uv_nats,emp_err_xy,emp_err_uv,emp_mi_xy_nats,emp_mi_uv_nats";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    /// `D_xy = D_uv = D` for each grid value.
    Symmetric,
    /// Every `(D_xy, D_uv)` pair, `D_xy` outer.
    Full,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(SweepMode::Symmetric),
            "full" => Ok(SweepMode::Full),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected sym or full)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?} (expected csv, json or svg)"
            ))),
        }
    }
}

/// Default grid: 0 to 0.5 in steps of 0.05.
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| round_sig(i as f64 * 0.05)).collect()
}

fn parse_number(token: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("grid value {token:?} is not a number")))
}

/// Parses `a,b,c` or `start:step:stop` (inclusive of `stop`).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "range {spec:?} must be start:step:stop"
            )));
        }
        let (start, step, stop) = (
            parse_number(parts[0])?,
            parse_number(parts[1])?,
            parse_number(parts[2])?,
        );
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "range step {step} must be positive"
            )));
        }
        if stop < start {
            return Err(Error::InvalidArgument(format!(
                "range stop {stop} is below start {start}"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| round_sig(start + i as f64 * step))
            .collect()
    } else {
        spec.split(',').map(parse_number).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    Ok(values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub d_grid: Vec<f64>,
    pub mode: SweepMode,
    pub variant: StrategyVariant,
    /// Monte Carlo rounds per point; 0 means analytic only.
    pub n_rounds: u64,
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_grid: default_grid(),
            mode: SweepMode::Symmetric,
            variant: StrategyVariant::TwoQubitStorage,
            n_rounds: 0,
            seed: 42,
            format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_grid.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        for &d in &self.d_grid {
            if !(0.0..=0.5).contains(&d) {
                return Err(Error::Domain {
                    name: "grid value",
                    value: d,
                    domain: "[0, 1/2]",
                });
            }
        }
        if self.format == OutputFormat::Svg && self.mode != SweepMode::Symmetric {
            return Err(Error::InvalidArgument(
                "svg output is only available for the symmetric sweep".into(),
            ));
        }
        Ok(())
    }

    /// `(D_xy, D_uv)` pairs in output order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self.mode {
            SweepMode::Symmetric => self.d_grid.iter().map(|&d| (d, d)).collect(),
            SweepMode::Full => self
                .d_grid
                .iter()
                .flat_map(|&dxy| self.d_grid.iter().map(move |&duv| (dxy, duv)))
                .collect(),
        }
    }
}

/// One row of a sweep. Empirical fields are present iff the sweep ran
/// Monte Carlo rounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub d_xy: f64,
    pub d_uv: f64,
    pub delta_xy: f64,
    pub delta_uv: f64,
    pub bound_xy_nats: f64,
    pub bound_uv_nats: f64,
    pub mi_xy_nats: f64,
    pub mi_uv_nats: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emp_err_xy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emp_err_uv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emp_mi_xy_nats: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emp_mi_uv_nats: Option<f64>,
}

impl TradeoffPoint {
    pub fn analytic(params: &ProbeParams) -> Self {
        let xy = analyze_channel(params, Basis::Xy);
        let uv = analyze_channel(params, Basis::Uv);
        Self {
            d_xy: params.d_xy(),
            d_uv: params.d_uv(),
            delta_xy: params.delta_xy(),
            delta_uv: params.delta_uv(),
            bound_xy_nats: xy.bound_nats,
            bound_uv_nats: uv.bound_nats,
            mi_xy_nats: xy.mutual_information_nats,
            mi_uv_nats: uv.mutual_information_nats,
            emp_err_xy: None,
            emp_err_uv: None,
            emp_mi_xy_nats: None,
            emp_mi_uv_nats: None,
        }
    }

    /// Copy with every value rounded to the printed precision.
    pub fn rounded(&self) -> Self {
        let r = |o: Option<f64>| o.map(round_sig);
        Self {
            d_xy: round_sig(self.d_xy),
            d_uv: round_sig(self.d_uv),
            delta_xy: round_sig(self.delta_xy),
            delta_uv: round_sig(self.delta_uv),
            bound_xy_nats: round_sig(self.bound_xy_nats),
            bound_uv_nats: round_sig(self.bound_uv_nats),
            mi_xy_nats: round_sig(self.mi_xy_nats),
            mi_uv_nats: round_sig(self.mi_uv_nats),
            emp_err_xy: r(self.emp_err_xy),
            emp_err_uv: r(self.emp_err_uv),
            emp_mi_xy_nats: r(self.emp_mi_xy_nats),
            emp_mi_uv_nats: r(self.emp_mi_uv_nats),
        }
    }

    fn csv_row(&self) -> String {
        let opt = |o: Option<f64>| o.map(format_sig).unwrap_or_default();
        [
            format_sig(self.d_xy),
            format_sig(self.d_uv),
            format_sig(self.delta_xy),
            format_sig(self.delta_uv),
            format_sig(self.bound_xy_nats),
            format_sig(self.bound_uv_nats),
            format_sig(self.mi_xy_nats),
            format_sig(self.mi_uv_nats),
            opt(self.emp_err_xy),
            opt(self.emp_err_uv),
            opt(self.emp_mi_xy_nats),
            opt(self.emp_mi_uv_nats),
        ]
        .join(",")
    }
}

/// Evaluates every grid point. Each Monte Carlo point uses the config seed,
/// so all points share the same per-round random streams. Rows come back in
/// grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<TradeoffPoint>> {
    config.validate()?;
    config
        .points()
        .into_par_iter()
        .map(|(dxy, duv)| {
            let params = ProbeParams::new(dxy, duv)?;
            let mut point = TradeoffPoint::analytic(&params);
            if config.n_rounds > 0 {
                let stats = run_session(config.n_rounds, &params, config.variant, config.seed)?;
                point.emp_err_xy = stats.empirical_error_rate(Basis::Xy);
                point.emp_err_uv = stats.empirical_error_rate(Basis::Uv);
                point.emp_mi_xy_nats = stats.empirical_mi(Basis::Xy);
                point.emp_mi_uv_nats = stats.empirical_mi(Basis::Uv);
            }
            Ok(point)
        })
        .collect()
}

pub fn to_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&p.csv_row());
        out.push('\n');
    }
    out
}

pub fn to_json(points: &[TradeoffPoint]) -> String {
    let rounded: Vec<TradeoffPoint> = points.iter().map(TradeoffPoint::rounded).collect();
    let mut s = serde_json::to_string_pretty(&rounded).expect("plain data serializes");
    s.push('\n');
    s
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

struct Series<'a> {
    name: &'a str,
    color: &'a str,
    dashed: bool,
    values: Vec<(f64, f64)>,
}

/// Line chart of information (nats) against `D` for a symmetric sweep:
/// one polyline per series.
pub fn to_svg(points: &[TradeoffPoint]) -> Result<String> {
    if points.iter().any(|p| p.d_xy != p.d_uv) {
        return Err(Error::InvalidArgument(
            "svg output needs a symmetric sweep".into(),
        ));
    }
    let pick = |f: fn(&TradeoffPoint) -> Option<f64>| -> Vec<(f64, f64)> {
        points.iter().filter_map(|p| f(p).map(|v| (p.d_xy, v))).collect()
    };
    let mut series = vec![
        Series {
            name: "bound (nats)",
            color: "#444444",
            dashed: true,
            values: pick(|p| Some(p.bound_xy_nats)),
        },
        Series {
            name: "MI xy (nats)",
            color: "#1f77b4",
            dashed: false,
            values: pick(|p| Some(p.mi_xy_nats)),
        },
        Series {
            name: "MI uv (nats)",
            color: "#ff7f0e",
            dashed: false,
            values: pick(|p| Some(p.mi_uv_nats)),
        },
    ];
    if points.iter().any(|p| p.emp_mi_xy_nats.is_some()) {
        series.push(Series {
            name: "empirical MI xy (nats)",
            color: "#2ca02c",
            dashed: true,
            values: pick(|p| p.emp_mi_xy_nats),
        });
        series.push(Series {
            name: "empirical MI uv (nats)",
            color: "#d62728",
            dashed: true,
            values: pick(|p| p.emp_mi_uv_nats),
        });
    }

    let y_max = std::f64::consts::LN_2 * 1.05;
    let sx = |d: f64| MARGIN + d / 0.5 * (SVG_WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| SVG_HEIGHT - MARGIN - v / y_max * (SVG_HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (sx(0.0), sx(0.5), sy(0.0), sy(y_max));
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#
    );
    for i in 0..=5 {
        let d = i as f64 * 0.1;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            sx(d),
            y0 + 16.0,
            format_sig(d)
        );
    }
    for i in 0..=3 {
        let v = i as f64 * 0.2;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            sy(v) + 4.0,
            format_sig(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">D</text>"#,
        (x0 + x1) / 2.0,
        SVG_HEIGHT - 12.0
    );
    for (k, s) in series.iter().enumerate() {
        let coords: Vec<String> = s
            .values
            .iter()
            .map(|&(d, v)| format!("{:.2},{:.2}", sx(d), sy(v)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"><title>{}</title></polyline>"#,
            s.color,
            coords.join(" "),
            s.name
        );
        let ly = MARGIN + 14.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" font-size="11" fill="{}">{}</text>"#,
            x1 - 150.0,
            s.color,
            s.name
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders `points` in `format`.
pub fn render(points: &[TradeoffPoint], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(to_csv(points)),
        OutputFormat::Json => Ok(to_json(points)),
        OutputFormat::Svg => to_svg(points),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0,0.25,0.5").unwrap(), vec![0.0, 0.25, 0.5]);
        assert_eq!(parse_grid("0:0.05:0.5").unwrap(), default_grid());
        assert_eq!(default_grid().len(), 11);
        assert_eq!(*default_grid().last().unwrap(), 0.5);
        assert!(parse_grid("0,abc").unwrap_err().to_string().contains("abc"));
        assert!(parse_grid("0:0:1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn validation_names_offending_value() {
        let config = SweepConfig {
            d_grid: vec![0.1, 0.7],
            ..SweepConfig::default()
        };
        let msg = config.validate().unwrap_err().to_string();
        assert!(msg.contains("0.7"), "{msg}");
    }

    #[test]
    fn symmetric_analytic_sweep() {
        let config = SweepConfig {
            d_grid: vec![0.0, 0.25, 0.5],
            ..SweepConfig::default()
        };
        let rows = run_sweep(&config).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[2].bound_xy_nats - LN_2).abs() < 1e-12);
        assert!(rows[0].mi_xy_nats.abs() < 1e-12);
        assert!(rows.iter().all(|r| r.emp_err_xy.is_none()));
        for r in &rows {
            assert!(r.mi_xy_nats <= r.bound_xy_nats + 1e-10);
            assert!(r.mi_uv_nats <= r.bound_uv_nats + 1e-10);
        }
    }

    #[test]
    fn empirical_zero_errors_at_zero_disturbance() {
        let config = SweepConfig {
            d_grid: vec![0.0],
            n_rounds: 2_000,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&config).unwrap();
        assert_eq!(rows[0].emp_err_xy, Some(0.0));
        assert_eq!(rows[0].emp_err_uv, Some(0.0));
    }

    #[test]
    fn full_mode_order() {
        let config = SweepConfig {
            d_grid: vec![0.1, 0.2],
            mode: SweepMode::Full,
            ..SweepConfig::default()
        };
        assert_eq!(
            config.points(),
            vec![(0.1, 0.1), (0.1, 0.2), (0.2, 0.1), (0.2, 0.2)]
        );
    }

    #[test]
    fn csv_shape() {
        let rows = run_sweep(&SweepConfig::default()).unwrap();
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 12);
        assert!(first.ends_with(",,,,"));
    }

    #[test]
    fn svg_requires_symmetric_rows() {
        let config = SweepConfig {
            d_grid: vec![0.1, 0.2],
            mode: SweepMode::Full,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&config).unwrap();
        assert!(to_svg(&rows).is_err());
        let bad = SweepConfig {
            format: OutputFormat::Svg,
            ..config
        };
        assert!(bad.validate().is_err());
    }
}
