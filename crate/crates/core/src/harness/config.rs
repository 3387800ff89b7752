use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Boundary;
use crate::homogenize::{optimal_params, Method, MethodParams, ModeRule, SolverOptions, TimeOptions};
use crate::tensor_field::TensorField;

/// Flat `key = value` settings; keys mirror the long CLI flags.
pub type ConfigMap = BTreeMap<String, String>;

/// Reads a key-value file. Blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value, got '{raw}'", no + 1)));
        };
        map.insert(normalize_key(k.trim()), v.trim().to_string());
    }
    Ok(map)
}

fn normalize_key(k: &str) -> String {
    let k = k.trim_start_matches("--").replace('_', "-");
    match k.as_str() {
        "r" => "R".into(),
        "t" => "T".into(),
        "n" => "N".into(),
        "filter-q" => "q".into(),
        _ => k,
    }
}

fn take<T: FromStr>(map: &ConfigMap, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|e| Error::Config(format!("bad value '{v}' for {key}: {e}"))),
    }
}

fn take_bool(map: &ConfigMap, key: &str) -> Result<Option<bool>> {
    match map.get(key).map(|s| s.to_ascii_lowercase()) {
        None => Ok(None),
        Some(v) => match v.as_str() {
            "true" | "1" | "yes" | "on" => Ok(Some(true)),
            "false" | "0" | "no" | "off" => Ok(Some(false)),
            _ => Err(Error::Config(format!("bad boolean '{v}' for {key}"))),
        },
    }
}

/// One homogenization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Name understood by [`TensorField::from_name`].
    pub field: String,
    pub dim: usize,
    pub method: Method,
    pub r: f64,
    pub k_o: f64,
    pub q: u32,
    /// Overrides the `T = k_T R` rule.
    pub t: Option<f64>,
    /// Overrides the mode rule with a fixed count.
    pub n_modes: Option<usize>,
    /// Switches to `N = ⌈c_N R^d⌉`.
    pub c_n: Option<f64>,
    /// Mesh size per unit period.
    pub h: f64,
    pub bc: Boundary,
    pub time: TimeOptions,
    pub solver: SolverOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            field: "paper-2d".into(),
            dim: 2,
            method: Method::Parabolic,
            r: 4.49,
            k_o: 0.5,
            q: 1,
            t: None,
            n_modes: None,
            c_n: None,
            h: 1.0 / 32.0,
            bc: Boundary::Dirichlet,
            time: TimeOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.update(map)?;
        Ok(cfg)
    }

    /// Overwrites every field present in `map`.
    pub fn update(&mut self, map: &ConfigMap) -> Result<()> {
        if let Some(v) = map.get("field") {
            self.field = v.clone();
        }
        if let Some(v) = take(map, "dim")? {
            self.dim = v;
        }
        if let Some(v) = take(map, "method")? {
            self.method = v;
        }
        if let Some(v) = take(map, "R")? {
            self.r = v;
        }
        if let Some(v) = take(map, "k-o")? {
            self.k_o = v;
        }
        if let Some(v) = take(map, "q")? {
            self.q = v;
        }
        if let Some(v) = take(map, "T")? {
            self.t = Some(v);
        }
        if let Some(v) = take(map, "N")? {
            self.n_modes = Some(v);
        }
        if let Some(v) = take(map, "c-n")? {
            self.c_n = Some(v);
        }
        if let Some(v) = take(map, "h")? {
            self.h = v;
        }
        if let Some(v) = take(map, "bc")? {
            self.bc = v;
        }
        if let Some(v) = take(map, "tol-time")? {
            self.time.tol = v;
        }
        if let Some(v) = take(map, "cg-tol")? {
            self.solver.cg_tol = v;
        }
        if let Some(v) = take(map, "eig-tol")? {
            self.solver.eig_tol = v;
        }
        if let Some(v) = take(map, "seed")? {
            self.solver.seed = v;
        }
        if let Some(v) = take(map, "quad-points")? {
            self.solver.quad_points = v;
        }
        if let Some(v) = take_bool(map, "symmetrize")? {
            self.solver.symmetrize = v;
        }
        Ok(())
    }

    pub fn tensor_field(&self) -> Result<TensorField> {
        TensorField::from_name(&self.field, self.dim).map_err(|e| Error::Config(format!("field '{}': {e}", self.field)))
    }

    pub fn mode_rule(&self) -> ModeRule {
        match (self.n_modes, self.c_n) {
            (Some(n), _) => ModeRule::Fixed(n),
            (None, Some(c_n)) => ModeRule::Scaled { c_n },
            (None, None) => ModeRule::default(),
        }
    }

    /// Method parameters from the `L`, `T`, `N` rules plus explicit overrides.
    pub fn params(&self, field: &TensorField) -> Result<MethodParams> {
        if self.method == Method::Periodic {
            return Ok(MethodParams::full_cell(1.0));
        }
        let mut p = optimal_params(self.method, self.r, self.q, self.k_o, field.alpha(), field.beta(), self.mode_rule(), self.dim)?;
        if let (Some(t), Some(_)) = (self.t, p.t) {
            p.t = Some(t);
            p.k_t = t / p.r;
        }
        Ok(p)
    }
}

/// Convergence study over a list of `R` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub r_values: Vec<f64>,
    /// Points with error at or below this value are left out of the fit.
    pub error_floor: f64,
    pub jobs: usize,
    /// Zero wall times and run serially so repeated runs are bitwise equal.
    pub deterministic: bool,
}

impl SweepConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let base = RunConfig::from_map(map)?;
        let r_values = match (map.get("r-values"), map.get("preset").map(String::as_str)) {
            (Some(list), _) => list
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad R value '{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?,
            (None, None) | (None, Some("desk")) => desk_r_grid(),
            (None, Some("full")) => full_r_grid(),
            (None, Some(other)) => return Err(Error::Config(format!("unknown preset '{other}'"))),
        };
        let cfg = SweepConfig {
            base,
            r_values,
            error_floor: take(map, "error-floor")?.unwrap_or(1e-7),
            jobs: take(map, "jobs")?.unwrap_or(1),
            deterministic: take_bool(map, "deterministic")?.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_values.iter().any(|&r| !(r > 1.0 && r.is_finite())) {
            return Err(Error::Config("all R values must be finite and exceed 1".into()));
        }
        if self.r_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("R values must be strictly ascending".into()));
        }
        Ok(())
    }
}

/// Six non-integer values in `[2, 8]`.
pub fn desk_r_grid() -> Vec<f64> {
    vec![2.3, 3.1, 4.2, 5.4, 6.6, 7.7]
}

/// Sixty geometrically spaced values in `[1.1, 12.7]`, nudged away from
/// integers.
pub fn full_r_grid() -> Vec<f64> {
    let (lo, hi, n) = (1.1f64, 12.7f64, 60);
    (0..n)
        .map(|i| {
            let r = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            let d = r - r.round();
            if d.abs() < 0.05 {
                r.round() + 0.05f64.copysign(d)
            } else {
                r
            }
        })
        .collect()
}
