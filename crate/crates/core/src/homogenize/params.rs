use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Periodic,
    Elliptic,
    Parabolic,
    ModifiedElliptic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Periodic => "periodic",
            Method::Elliptic => "elliptic",
            Method::Parabolic => "parabolic",
            Method::ModifiedElliptic => "modified-elliptic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Method::Periodic),
            "elliptic" => Ok(Method::Elliptic),
            "parabolic" => Ok(Method::Parabolic),
            "modified-elliptic" => Ok(Method::ModifiedElliptic),
            _ => Err(Error::Config(format!("unknown method '{s}'"))),
        }
    }
}

/// Cell-problem parameters.
///
/// `t` is `None` when the method has no time horizon (periodic and
/// elliptic), which corresponds to `T = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    /// Side of the computational cell `K_R`.
    pub r: f64,
    /// Side of the averaging box `K_L`.
    pub l: f64,
    pub t: Option<f64>,
    /// Number of eigenmodes in the spectral correction.
    pub n_modes: usize,
    /// Filter order.
    pub q: u32,
    pub k_o: f64,
    pub k_t: f64,
}

impl MethodParams {
    /// Parameters of the plain truncated cell problem: average over all of
    /// `K_R` with the box filter and no time horizon.
    pub fn full_cell(r: f64) -> Self {
        MethodParams { r, l: r, t: None, n_modes: 0, q: 0, k_o: 0.0, k_t: 0.0 }
    }

    pub fn validate(&self, method: Method) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return invalid(format!("R must be positive, got {}", self.r));
        }
        if !(self.l > 0.0 && self.l <= self.r * (1.0 + 1e-12)) {
            return invalid(format!("L must lie in (0, R], got L = {} with R = {}", self.l, self.r));
        }
        match method {
            Method::Parabolic | Method::ModifiedElliptic => match self.t {
                Some(t) if t > 0.0 && t.is_finite() => {}
                other => return invalid(format!("{method} needs a finite T > 0, got {other:?}")),
            },
            Method::Periodic | Method::Elliptic => {}
        }
        if method == Method::ModifiedElliptic && self.n_modes == 0 {
            return invalid("modified-elliptic needs at least one eigenmode");
        }
        Ok(())
    }
}

/// How the number of eigenmodes depends on `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeRule {
    Fixed(usize),
    /// `N = ⌈c_N R^d⌉`.
    Scaled { c_n: f64 },
}

impl Default for ModeRule {
    fn default() -> Self {
        ModeRule::Fixed(60)
    }
}

impl ModeRule {
    pub fn modes(&self, r: f64, dim: usize) -> usize {
        match *self {
            ModeRule::Fixed(n) => n,
            ModeRule::Scaled { c_n } => (c_n * r.powi(dim as i32)).ceil().max(1.0) as usize,
        }
    }
}

/// Time scaling `k_T` with `T = k_T R`.
pub fn time_scaling(method: Method, k_o: f64, alpha: f64, beta: f64) -> f64 {
    match method {
        Method::Parabolic => k_o / (PI * (4.0 * beta * alpha).sqrt()),
        Method::ModifiedElliptic => k_o / (PI * (2.0 * beta * alpha).sqrt()),
        Method::Periodic | Method::Elliptic => 0.0,
    }
}

/// Parameter rule `L = (1 - k_o) R`, `T = k_T R` with the method-specific
/// `k_T`, and `N` from `mode_rule`.
#[allow(clippy::too_many_arguments)]
pub fn optimal_params(
    method: Method,
    r: f64,
    q: u32,
    k_o: f64,
    alpha: f64,
    beta: f64,
    mode_rule: ModeRule,
    dim: usize,
) -> Result<MethodParams> {
    if !(k_o > 0.0 && k_o < 1.0) {
        return invalid(format!("k_o must lie in (0, 1), got {k_o}"));
    }
    if !(r > 1.0 && r.is_finite()) {
        return invalid(format!("R must exceed 1, got {r}"));
    }
    if !(alpha > 0.0 && beta >= alpha) {
        return invalid(format!("need 0 < alpha <= beta, got ({alpha}, {beta})"));
    }
    match method {
        Method::Periodic | Method::Elliptic => Ok(MethodParams::full_cell(r)),
        Method::Parabolic | Method::ModifiedElliptic => {
            let l = (1.0 - k_o) * r;
            if l >= r.floor() {
                log::warn!("L = {l:.4} is not below floor(R) = {} (R = {r})", r.floor());
            }
            let k_t = time_scaling(method, k_o, alpha, beta);
            let n_modes = if method == Method::ModifiedElliptic { mode_rule.modes(r, dim) } else { 0 };
            Ok(MethodParams { r, l, t: Some(k_t * r), n_modes, q, k_o, k_t })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_field::benchmark_tensor_2d;

    #[test]
    fn parabolic_rule() {
        let f = benchmark_tensor_2d();
        let (a, b) = (f.alpha(), f.beta());
        let p = optimal_params(Method::Parabolic, 8.0, 1, 0.5, a, b, ModeRule::default(), 2).unwrap();
        assert_eq!(p.l, 4.0);
        let expect = 8.0 / (2.0 * PI * (4.0 * b * a).sqrt());
        assert!((p.t.unwrap() - expect).abs() < 1e-14 * expect);
        assert_eq!(p.t.unwrap(), p.k_t * p.r);
        assert_eq!(p.n_modes, 0);
    }

    #[test]
    fn modified_rule_keeps_fixed_modes() {
        for r in [2.5, 8.0, 12.7] {
            let p = optimal_params(Method::ModifiedElliptic, r, 3, 0.5, 0.1, 2.0, ModeRule::Fixed(60), 2).unwrap();
            assert_eq!(p.n_modes, 60);
            assert!((p.k_t - 0.5 / (PI * (4.0f64 * 0.1).sqrt())).abs() < 1e-15);
        }
        let p = optimal_params(Method::ModifiedElliptic, 3.0, 1, 0.5, 0.1, 2.0, ModeRule::Scaled { c_n: 0.7 }, 2).unwrap();
        assert_eq!(p.n_modes, 7);
    }

    #[test]
    fn rejects_open_interval_violations() {
        assert!(optimal_params(Method::Parabolic, 4.0, 1, 0.0, 0.1, 1.0, ModeRule::default(), 2).is_err());
        assert!(optimal_params(Method::Parabolic, 4.0, 1, 1.0, 0.1, 1.0, ModeRule::default(), 2).is_err());
        assert!(optimal_params(Method::Parabolic, 1.0, 1, 0.5, 0.1, 1.0, ModeRule::default(), 2).is_err());
    }

    #[test]
    fn method_names_roundtrip() {
        for m in [Method::Periodic, Method::Elliptic, Method::Parabolic, Method::ModifiedElliptic] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("wave".parse::<Method>().is_err());
    }
}
