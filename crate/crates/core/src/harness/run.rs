use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::homogenize::{
    solve_elliptic, solve_modified_elliptic, solve_parabolic, solve_periodic_reference, HomogenizedTensor, Method,
    SolverOptions,
};
use crate::matrix::Matrix;
use crate::tensor_field::TensorField;

pub const CACHE_ENV: &str = "CELLHOM_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub result: HomogenizedTensor,
    pub reference: Matrix,
    /// `‖result.values - reference‖_F`.
    pub frobenius_error: f64,
    pub wall_time_ms: f64,
}

impl RunRecord {
    pub fn recomputed_error(&self) -> f64 {
        self.result.error_against(&self.reference)
    }
}

fn memory_cache() -> &'static Mutex<HashMap<String, Matrix>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Matrix>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cache_key(field: &TensorField, h: f64, opts: &SolverOptions) -> String {
    let raw = format!("{}-d{}-h{:e}-qp{}-cg{:e}", field.name(), field.dim(), h, opts.quad_points, opts.cg_tol);
    raw.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Periodic reference `a⁰` at mesh size `h`, memoized in memory and, when
/// `CELLHOM_CACHE_DIR` is set, as JSON files in that directory.
pub fn reference_tensor(field: &TensorField, h: f64, opts: &SolverOptions) -> Result<Matrix> {
    let key = cache_key(field, h, opts);
    if let Some(m) = memory_cache().lock().expect("cache lock").get(&key) {
        return Ok(*m);
    }
    let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    let file = dir.as_ref().map(|d| d.join(format!("{key}.json")));
    if let Some(path) = file.as_ref().filter(|p| p.exists()) {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let m: Matrix = serde_json::from_str(&text)?;
        log::debug!("reference loaded from {}", path.display());
        memory_cache().lock().expect("cache lock").insert(key, m);
        return Ok(m);
    }
    let m = compute_reference(field, h, opts)?;
    if let (Some(dir), Some(path)) = (dir, file) {
        std::fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
        std::fs::write(&path, serde_json::to_string(&m)?)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    }
    memory_cache().lock().expect("cache lock").insert(key, m);
    Ok(m)
}

/// Uncached periodic reference.
pub fn compute_reference(field: &TensorField, h: f64, opts: &SolverOptions) -> Result<Matrix> {
    Ok(solve_periodic_reference(field, h, opts)?.values)
}

/// Runs the configured method and compares against the periodic reference.
pub fn run_once(config: &RunConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let field = config.tensor_field()?;
    let params = config.params(&field)?;
    let opts = &config.solver;
    let context = |e: Error| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{} at R = {}: {m}", config.method, config.r)),
        other => other,
    };
    let result = match config.method {
        Method::Periodic => solve_periodic_reference(&field, config.h, opts),
        Method::Elliptic => solve_elliptic(&field, config.r, config.h, config.bc, opts),
        Method::Parabolic => solve_parabolic(&field, &params, config.h, &config.time, opts),
        Method::ModifiedElliptic => solve_modified_elliptic(&field, &params, config.h, opts),
    }
    .map_err(context)?;
    let reference = reference_tensor(&field, config.h, opts)?;
    Ok(RunRecord {
        config: config.clone(),
        frobenius_error: result.error_against(&reference),
        result,
        reference,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
