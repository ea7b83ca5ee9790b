//! Parameter families: grid sweeps, fairness-curve tracing and sign-change
//! counting, plus CSV output.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{self, Method, SpectralReport};
use crate::composer::CompositionSchedule;
use crate::error::{Error, Result};
use crate::game::Classification;

mod figures;

pub use figures::{figure_family, FigureSelection, FIGURE_IDS};

/// Target `|ln c|` when bisecting for a fairness point.
pub const TRACE_TOLERANCE: f64 = 1e-10;

/// Number of intervals each column is probed at before bisection.
pub const TRACE_PROBES: usize = 64;

pub type Binding = Arc<dyn Fn(&[f64]) -> Result<CompositionSchedule> + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamAxis {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl ParamAxis {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
        }
    }

    /// `n` cell midpoints; the endpoints are inset by half a step.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let step = (self.upper - self.lower) / n as f64;
        (0..n).map(|i| self.lower + (i as f64 + 0.5) * step).collect()
    }
}

/// A parameter family: named free parameters bound to a composite game.
#[derive(Clone)]
pub struct Family {
    pub id: String,
    pub axes: Vec<ParamAxis>,
    binding: Binding,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Family")
            .field("id", &self.id)
            .field("axes", &self.axes)
            .finish_non_exhaustive()
    }
}

impl Family {
    pub fn new(
        id: impl Into<String>,
        axes: Vec<ParamAxis>,
        binding: impl Fn(&[f64]) -> Result<CompositionSchedule> + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            axes,
            binding: Arc::new(binding),
        }
    }

    pub fn schedule(&self, params: &[f64]) -> Result<CompositionSchedule> {
        if params.len() != self.axes.len() {
            return Err(Error::InvalidArgument(format!(
                "family {} takes {} parameters, got {}",
                self.id,
                self.axes.len(),
                params.len()
            )));
        }
        (self.binding)(params)
    }

    pub fn classify(&self, params: &[f64], tol: f64) -> Result<SpectralReport> {
        self.schedule(params)
            .and_then(|s| classifier::classify_schedule(&s, tol))
            .map_err(|e| e.at_point(params))
    }

    fn ln_c(&self, params: &[f64], tol: f64) -> Result<f64> {
        self.classify(params, tol).map(|r| r.ln_c)
    }

    fn require_axes(&self, count: usize) -> Result<()> {
        if self.axes.len() == count {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "family {} has {} free parameters, expected {count}",
                self.id,
                self.axes.len()
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub ln_c: f64,
    pub verdict: Classification,
    pub method: Method,
}

/// Classifies every point of the inset grid, first axis varying slowest.
pub fn sweep_grid(family: &Family, resolution: &[usize], tol: f64) -> Result<Vec<SweepRow>> {
    if resolution.len() != family.axes.len() {
        return Err(Error::InvalidArgument(format!(
            "need one resolution per axis ({}), got {}",
            family.axes.len(),
            resolution.len()
        )));
    }
    if let Some(&n) = resolution.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {n}"
        )));
    }
    let grids: Vec<Vec<f64>> = family
        .axes
        .iter()
        .zip(resolution)
        .map(|(axis, &n)| axis.grid(n))
        .collect();
    let total: usize = resolution.iter().product();
    (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut params = vec![0.0; grids.len()];
            for (axis, grid) in grids.iter().enumerate().rev() {
                params[axis] = grid[rest % grid.len()];
                rest /= grid.len();
            }
            let report = family.classify(&params, tol)?;
            Ok(SweepRow {
                params,
                ln_c: report.ln_c,
                verdict: report.verdict,
                method: report.method,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    LosingToWinning,
    WinningToLosing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LosingToWinning => "LosingToWinning",
            Direction::WinningToLosing => "WinningToLosing",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub param_value: f64,
    pub bracket_width: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignChanges {
    pub crossings: Vec<Crossing>,
    /// Every grid point was fair within tolerance.
    pub degenerate: bool,
}

fn band_sign(ln_c: f64, tol: f64) -> i8 {
    match Classification::from_ln_c(ln_c, tol) {
        Classification::Losing => -1,
        Classification::Fair => 0,
        Classification::Winning => 1,
    }
}

/// Brackets each change of verdict along a one-parameter family and narrows
/// it by bisection to at most `(upper - lower) / 10^6`.
pub fn count_sign_changes(family: &Family, resolution: usize, tol: f64) -> Result<SignChanges> {
    family.require_axes(1)?;
    let rows = sweep_grid(family, &[resolution], tol)?;
    let signs: Vec<i8> = rows.iter().map(|r| band_sign(r.ln_c, tol)).collect();
    if signs.iter().all(|&s| s == 0) {
        return Ok(SignChanges {
            crossings: Vec::new(),
            degenerate: true,
        });
    }
    let axis = &family.axes[0];
    let target = (axis.upper - axis.lower) / 1e6;

    let mut brackets = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for (row, &sign) in rows.iter().zip(&signs) {
        if sign == 0 {
            continue;
        }
        if let Some((x, s)) = last {
            if s != sign {
                brackets.push((x, row.params[0], s));
            }
        }
        last = Some((row.params[0], sign));
    }

    let crossings = brackets
        .into_par_iter()
        .map(|(mut lo, mut hi, lo_sign)| {
            while hi - lo > target {
                let mid = 0.5 * (lo + hi);
                if band_sign(family.ln_c(&[mid], tol)?, tol) == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(Crossing {
                param_value: 0.5 * (lo + hi),
                bracket_width: hi - lo,
                direction: if lo_sign < 0 {
                    Direction::LosingToWinning
                } else {
                    Direction::WinningToLosing
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignChanges {
        crossings,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ColumnOutcome {
    /// Fair points found in the bracket, ascending.
    Crossings(Vec<f64>),
    NoCrossing,
    /// Fair within tolerance at every probe.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceColumn {
    pub x: f64,
    pub outcome: ColumnOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessTrace {
    pub columns: Vec<TraceColumn>,
    /// Every column was degenerate.
    pub degenerate: bool,
}

impl FairnessTrace {
    /// All traced `(x, y)` fairness points.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.columns
            .iter()
            .flat_map(|c| match &c.outcome {
                ColumnOutcome::Crossings(ys) => ys.iter().map(|&y| (c.x, y)).collect(),
                _ => Vec::new(),
            })
            .collect()
    }
}

/// Traces `ln c = 0` in a two-parameter family: the first axis is gridded,
/// the second is probed across `y_bracket` and bisected at each sign change.
pub fn trace_fairness(
    family: &Family,
    x_resolution: usize,
    y_bracket: (f64, f64),
    tol: f64,
) -> Result<FairnessTrace> {
    family.require_axes(2)?;
    if x_resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {x_resolution}"
        )));
    }
    let (y_lo, y_hi) = y_bracket;
    if !(y_lo < y_hi) {
        return Err(Error::InvalidArgument(format!(
            "empty y bracket ({y_lo}, {y_hi})"
        )));
    }
    let columns = family.axes[0]
        .grid(x_resolution)
        .into_par_iter()
        .map(|x| trace_column(family, x, y_lo, y_hi, tol).map(|outcome| TraceColumn { x, outcome }))
        .collect::<Result<Vec<_>>>()?;
    let degenerate = columns.iter().all(|c| c.outcome == ColumnOutcome::Degenerate);
    Ok(FairnessTrace {
        columns,
        degenerate,
    })
}

fn trace_column(family: &Family, x: f64, y_lo: f64, y_hi: f64, tol: f64) -> Result<ColumnOutcome> {
    let ln_c = |y: f64| family.ln_c(&[x, y], tol);
    let ys: Vec<f64> = (0..=TRACE_PROBES)
        .map(|i| y_lo + (y_hi - y_lo) * i as f64 / TRACE_PROBES as f64)
        .collect();
    let values = ys.iter().map(|&y| ln_c(y)).collect::<Result<Vec<_>>>()?;
    if values.iter().all(|v| v.abs() <= tol) {
        return Ok(ColumnOutcome::Degenerate);
    }
    let mut found = Vec::new();
    for i in 0..TRACE_PROBES {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            found.push(ys[i]);
        } else if a.signum() != b.signum() && b != 0.0 {
            found.push(bisect(&ln_c, ys[i], ys[i + 1], a)?);
        }
    }
    if values[TRACE_PROBES] == 0.0 {
        found.push(ys[TRACE_PROBES]);
    }
    Ok(if found.is_empty() {
        ColumnOutcome::NoCrossing
    } else {
        ColumnOutcome::Crossings(found)
    })
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, lo_value: f64) -> Result<f64> {
    let lo_positive = lo_value > 0.0;
    let mut best = (lo_value.abs(), lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(best.1);
        }
        let v = f(mid)?;
        if v.abs() < best.0 {
            best = (v.abs(), mid);
        }
        if v.abs() < TRACE_TOLERANCE {
            return Ok(mid);
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rows_csv<W: Write>(out: W, family: &Family, rows: &[SweepRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = family.axes.iter().map(|a| a.name.as_str()).collect();
    header.extend(["ln_c", "verdict", "method"]);
    writer.write_record(&header).map_err(csv_error)?;
    for row in rows {
        let mut record: Vec<String> = row.params.iter().map(|&x| format_float(x)).collect();
        record.push(format_float(row.ln_c));
        record.push(row.verdict.to_string());
        record.push(row.method.to_string());
        writer.write_record(&record).map_err(csv_error)?;
    }
    writer.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn write_crossings_csv<W: Write>(out: W, crossings: &[Crossing]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["param_value", "bracket_width", "direction"])
        .map_err(csv_error)?;
    for c in crossings {
        writer
            .write_record([
                format_float(c.param_value),
                format_float(c.bracket_width),
                c.direction.to_string(),
            ])
            .map_err(csv_error)?;
    }
    writer.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// One row per traced point; columns without a crossing get an empty `y`.
pub fn write_trace_csv<W: Write>(out: W, family: &Family, trace: &FairnessTrace) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record([family.axes[0].name.as_str(), family.axes[1].name.as_str(), "status"])
        .map_err(csv_error)?;
    for column in &trace.columns {
        let x = format_float(column.x);
        match &column.outcome {
            ColumnOutcome::Crossings(ys) => {
                for &y in ys {
                    writer
                        .write_record([x.as_str(), &format_float(y), "fair"])
                        .map_err(csv_error)?;
                }
            }
            ColumnOutcome::NoCrossing => writer
                .write_record([x.as_str(), "", "no_crossing"])
                .map_err(csv_error)?,
            ColumnOutcome::Degenerate => writer
                .write_record([x.as_str(), "", "degenerate"])
                .map_err(csv_error)?,
        }
    }
    writer.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn csv_error(err: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {err}"))
}
