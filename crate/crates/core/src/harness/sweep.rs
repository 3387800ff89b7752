use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SweepConfig;
use super::run::{run_once, RunRecord};
use crate::error::{invalid, Result};
use crate::homogenize::Method;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub record: Option<RunRecord>,
    pub error: Option<String>,
}

/// Least-squares line through `(ln R, ln err)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub fit: Option<SlopeFit>,
    /// Guide-line slope for the configured method and filter order.
    pub reference_slope: Option<f64>,
}

impl SweepReport {
    pub fn records(&self) -> Vec<&RunRecord> {
        self.rows.iter().filter_map(|r| r.record.as_ref()).collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Fits `ln err = slope · ln R + c` over points with `err > floor`.
pub fn fit_loglog(points: &[(f64, f64)], floor: f64) -> Result<SlopeFit> {
    let used: Vec<(f64, f64)> =
        points.iter().filter(|(r, e)| *r > 0.0 && *e > floor && e.is_finite()).map(|(r, e)| (r.ln(), e.ln())).collect();
    if used.len() < 2 {
        return invalid(format!("slope fit needs two points above the floor {floor:e}, got {}", used.len()));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("slope fit needs distinct R values");
    }
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (used.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SlopeFit { slope, intercept, residual, points: used.len() })
}

pub fn reference_slope(method: Method, q: u32) -> Option<f64> {
    match (method, q) {
        (Method::Elliptic, _) => Some(-1.0),
        (Method::Parabolic | Method::ModifiedElliptic, 1) => Some(-2.0),
        (Method::Parabolic | Method::ModifiedElliptic, 3) => Some(-4.0),
        _ => None,
    }
}

/// Runs every `R` of the sweep. Point failures are recorded per row; rows
/// are returned sorted by `R` whatever the execution order.
pub fn run_sweep(sweep: &SweepConfig) -> Result<SweepReport> {
    sweep.validate()?;
    if sweep.r_values.len() < 4 {
        return invalid(format!("a sweep needs at least 4 R values for slope fitting, got {}", sweep.r_values.len()));
    }
    let run_point = |&r: &f64| {
        let mut cfg = sweep.base.clone();
        cfg.r = r;
        match run_once(&cfg) {
            Ok(mut rec) => {
                if sweep.deterministic {
                    rec.wall_time_ms = 0.0;
                    rec.result.diagnostics.wall_time_ms = 0.0;
                }
                log::info!("R = {r}: error {:.3e}", rec.frobenius_error);
                SweepRow { r, record: Some(rec), error: None }
            }
            Err(e) => {
                log::warn!("R = {r} failed: {e}");
                SweepRow { r, record: None, error: Some(e.to_string()) }
            }
        }
    };
    let jobs = if sweep.deterministic { 1 } else { sweep.jobs.max(1) };
    let mut rows: Vec<SweepRow> = if jobs == 1 {
        sweep.r_values.iter().map(run_point).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| crate::error::Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| sweep.r_values.par_iter().map(run_point).collect())
    };
    rows.sort_by(|a, b| a.r.total_cmp(&b.r));
    if rows.iter().all(|r| r.record.is_none()) {
        return invalid("every sweep point failed");
    }
    let points: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| r.record.as_ref().map(|rec| (r.r, rec.frobenius_error))).collect();
    let fit = fit_loglog(&points, sweep.error_floor).ok();
    Ok(SweepReport { rows, fit, reference_slope: reference_slope(sweep.base.method, sweep.base.q) })
}
