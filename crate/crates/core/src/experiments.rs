//! Residual series against main-term models and log-log slope fits that
//! estimate the growth exponent of an error term.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::Float;

use crate::asymptotics::MainTermModel;
use crate::cw_sums::{g_sum_f64, GSumSpec, Point, Root};
use crate::divisors::{DivisorSpec, SumValue};
use crate::error::{invalid, CwError, Result};
use crate::numeric::{hp, Exponent, PREC};
use crate::summatory::summatory_total;

/// Largest grid point accepted by the residual and slope experiments.
pub const MAX_GRID_X: u64 = 1_000_000_000_000;

/// Geometric grid `round(x0 * ratio^i)`, `i < count`, deduplicated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x0: u64,
    ratio: f64,
    count: usize,
}

impl GridSpec {
    pub fn new(x0: u64, ratio: f64, count: usize) -> Result<Self> {
        if x0 < 10 {
            return Err(invalid(format!("grid start {x0} must be >= 10")));
        }
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(invalid(format!("grid ratio {ratio} must be > 1")));
        }
        if count < 3 {
            return Err(invalid(format!(
                "grid needs at least 3 points, got {count}"
            )));
        }
        let last = x0 as f64 * ratio.powi(count as i32 - 1);
        if last >= 1.8e19 {
            return Err(invalid("grid exceeds the 64-bit range"));
        }
        Ok(GridSpec { x0, ratio, count })
    }

    pub fn x0(&self) -> u64 {
        self.x0
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Strictly increasing integer points, all `>= x0`.
    pub fn points(&self) -> Vec<u64> {
        let mut pts: Vec<u64> = (0..self.count)
            .map(|i| (self.x0 as f64 * self.ratio.powi(i as i32)).round() as u64)
            .map(|x| x.max(self.x0))
            .collect();
        pts.dedup();
        pts
    }
}

impl Default for GridSpec {
    /// `x0 = 10^4`, `ratio = 2`, 24 points.
    fn default() -> Self {
        GridSpec {
            x0: 10_000,
            ratio: 2.0,
            count: 24,
        }
    }
}

impl FromStr for GridSpec {
    type Err = CwError;

    /// `"x0:ratio:count"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [x0, ratio, count] = parts[..] else {
            return Err(CwError::Parse(format!(
                "grid must be x0:ratio:count, got {s:?}"
            )));
        };
        let x0 = x0
            .parse()
            .map_err(|_| CwError::Parse(format!("bad grid start {x0:?}")))?;
        let ratio = ratio
            .parse()
            .map_err(|_| CwError::Parse(format!("bad grid ratio {ratio:?}")))?;
        let count = count
            .parse()
            .map_err(|_| CwError::Parse(format!("bad grid count {count:?}")))?;
        GridSpec::new(x0, ratio, count)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.x0, self.ratio, self.count)
    }
}

/// One row of a residual series.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPoint {
    pub x: u64,
    pub exact: SumValue,
    pub model_value: Float,
    pub residual: Float,
}

fn check_grid_range(points: &[u64]) -> Result<()> {
    match points.last() {
        Some(&x) if x > MAX_GRID_X => Err(CwError::Refused(format!(
            "grid reaches {x}, beyond the supported {MAX_GRID_X}"
        ))),
        _ => Ok(()),
    }
}

/// `exact - model` at every grid point, with the exact value from the
/// floor-form summatory sum and the subtraction done at 128 bits.
pub fn residual_series(
    spec: &DivisorSpec,
    model: &MainTermModel,
    grid: &GridSpec,
) -> Result<Vec<ResidualPoint>> {
    let points = grid.points();
    check_grid_range(&points)?;
    points
        .into_par_iter()
        .map(|x| residual_at(x, spec, model))
        .collect()
}

/// A single residual.
pub fn residual_at(x: u64, spec: &DivisorSpec, model: &MainTermModel) -> Result<ResidualPoint> {
    let exact = summatory_total(x, spec)?;
    let exact_hp = match exact {
        SumValue::Exact(v) => hp(&v.to_integer()),
        SumValue::Real(v) => hp(v),
    };
    let model_value = model.eval_u64(x);
    let residual = Float::with_val(PREC, &exact_hp - &model_value);
    Ok(ResidualPoint {
        x,
        exact,
        model_value,
        residual,
    })
}

/// Least-squares line through `(ln x, ln |r|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|ln |r| - (intercept + slope ln x)|` over the used points.
    pub max_abs_log_residual: f64,
    pub n_points_used: usize,
    /// Points whose residual is exactly zero; dropped, never clamped.
    pub n_dropped_zero: usize,
}

/// Fits `ln |residual| = intercept + slope ln x` by ordinary least squares.
pub fn fit_loglog(series: &[(f64, f64)]) -> Result<FitReport> {
    let mut used = Vec::with_capacity(series.len());
    let mut dropped = 0usize;
    for &(x, r) in series {
        if !(x.is_finite() && x > 0.0 && r.is_finite()) {
            return Err(invalid(format!(
                "series point ({x}, {r}) is not a positive x with finite residual"
            )));
        }
        if r == 0.0 {
            dropped += 1;
        } else {
            used.push((x.ln(), r.abs().ln()));
        }
    }
    if used.len() < 2 {
        return Err(CwError::InsufficientData(format!(
            "{} nonzero residuals; at least 2 are needed",
            used.len()
        )));
    }
    let n = used.len() as f64;
    let mean_u = used.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_v = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mean_u).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mean_u) * (p.1 - mean_v)).sum();
    if sxx == 0.0 {
        return Err(CwError::InsufficientData("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_v - slope * mean_u;
    let max_abs_log_residual = used
        .iter()
        .map(|&(u, v)| (v - intercept - slope * u).abs())
        .fold(0.0, f64::max);
    Ok(FitReport {
        slope,
        intercept,
        max_abs_log_residual,
        n_points_used: used.len(),
        n_dropped_zero: dropped,
    })
}

/// `(x, residual)` pairs in double precision, ready for [`fit_loglog`].
pub fn as_fit_input(series: &[ResidualPoint]) -> Vec<(f64, f64)> {
    series
        .iter()
        .map(|p| (p.x as f64, p.residual.to_f64()))
        .collect()
}

/// Change in slope when the largest point is dropped.
pub fn slope_stability(series: &[(f64, f64)]) -> Result<f64> {
    let full = fit_loglog(series)?;
    let trimmed = fit_loglog(&series[..series.len().saturating_sub(1)])?;
    Ok((full.slope - trimmed.slope).abs())
}

/// `G_{a,alpha,j}(x)` at every grid point (floating-point path, integer `x`).
pub fn cw_series(a: Root, alpha: Exponent, j: u32, grid: &GridSpec) -> Result<Vec<(u64, f64)>> {
    let points = grid.points();
    check_grid_range(&points)?;
    let base = GSumSpec::new(a, alpha, j, Point::Int(points[0]))?;
    points
        .into_par_iter()
        .map(|x| Ok((x, g_sum_f64(&base.with_x(Point::Int(x))?)?)))
        .collect()
}

/// Slope of `ln |G_{a,alpha,j}(x)|` against `ln x` over the grid.
pub fn cw_slope_test(a: Root, alpha: Exponent, j: u32, grid: &GridSpec) -> Result<FitReport> {
    if j == 0 {
        return Err(invalid("the slope test is for j >= 1"));
    }
    let series: Vec<(f64, f64)> = cw_series(a, alpha, j, grid)?
        .into_iter()
        .map(|(x, g)| (x as f64, g))
        .collect();
    fit_loglog(&series)
}

/// The conjectured exponent `alpha/a + 1/(2a)` (without `epsilon`).
pub fn conjectured_exponent(a: f64, alpha: f64) -> f64 {
    alpha / a + 1.0 / (2.0 * a)
}
