//! Multiscale coefficient fields `a(y)`.
//!
//! A [`TensorField`] wraps a symmetric, uniformly elliptic matrix-valued map
//! together with its ellipticity bounds `alpha <= a(y) <= beta` and an optional
//! period. A few fields are built in and can be selected by name:
//!
//! * `constant:<c>`: `a = c I`
//! * `paper-2d`: the two-dimensional diagonal laminate-type benchmark tensor
//! * `checkerboard:<a1>:<a2>`: two phases alternating on half-period cubes

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::matrix::Matrix;

type EvalFn = dyn Fn(&[f64]) -> Matrix + Send + Sync;

/// Symmetric matrix-valued coefficient with ellipticity bounds.
#[derive(Clone)]
pub struct TensorField {
    name: String,
    dim: usize,
    alpha: f64,
    beta: f64,
    period: Option<f64>,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("period", &self.period)
            .finish()
    }
}

impl TensorField {
    /// Wraps a user-supplied coefficient. The closure must return a symmetric
    /// `dim x dim` matrix whose spectrum lies in `[alpha, beta]`.
    pub fn new<F>(
        name: impl Into<String>,
        dim: usize,
        alpha: f64,
        beta: f64,
        period: Option<f64>,
        eval: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        if !(1..=3).contains(&dim) {
            return invalid(format!("dimension must be 1, 2 or 3, got {dim}"));
        }
        if !(alpha > 0.0 && beta >= alpha && beta.is_finite()) {
            return invalid(format!("ellipticity bounds must satisfy 0 < alpha <= beta, got ({alpha}, {beta})"));
        }
        if let Some(p) = period {
            if !(p > 0.0 && p.is_finite()) {
                return invalid(format!("period must be positive, got {p}"));
            }
        }
        Ok(TensorField {
            name: name.into(),
            dim,
            alpha,
            beta,
            period,
            eval: Arc::new(eval),
        })
    }

    /// `a = c I`.
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return invalid(format!("constant coefficient must be positive, got {c}"));
        }
        Self::new(format!("constant:{c}"), dim, c, c, Some(1.0), move |_| {
            Matrix::scaled_identity(dim, c)
        })
    }

    /// Two phases `a1 I`, `a2 I` on alternating cubes of side 1/2 (period 1).
    /// In one dimension this is the two-phase laminate.
    pub fn checkerboard(dim: usize, a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
            return invalid(format!("checkerboard phases must be positive, got ({a1}, {a2})"));
        }
        Self::new(
            format!("checkerboard:{a1}:{a2}"),
            dim,
            a1.min(a2),
            a1.max(a2),
            Some(1.0),
            move |y| {
                let parity: i64 = y.iter().map(|&yi| (2.0 * yi).floor() as i64).sum();
                let c = if parity.rem_euclid(2) == 0 { a1 } else { a2 };
                Matrix::scaled_identity(dim, c)
            },
        )
    }

    /// Resolves a catalog name (`constant:<c>`, `paper-2d`, `checkerboard:<a1>:<a2>`).
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| crate::Error::Config(format!("cannot parse number '{s}' in field name '{name}'")))
        };
        match parts.as_slice() {
            ["constant", c] => Self::constant(dim, num(c)?),
            ["paper-2d"] => {
                if dim != 2 {
                    return Err(crate::Error::Config(format!("paper-2d is two-dimensional, requested dim {dim}")));
                }
                Ok(benchmark_tensor_2d())
            }
            ["checkerboard", a1, a2] => Self::checkerboard(dim, num(a1)?, num(a2)?),
            _ => Err(crate::Error::Config(format!("unknown field '{name}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    /// Evaluates without argument checks; used on quadrature hot paths.
    #[inline]
    pub fn eval(&self, y: &[f64]) -> Matrix {
        (self.eval)(y)
    }

    /// Dense-sampling estimate of the extreme eigenvalues over one period
    /// (or over `[0,1]^d` for non-periodic fields). Diagnostics only.
    pub fn estimate_bounds(&self, samples_per_axis: usize) -> (f64, f64) {
        let extent = self.period.unwrap_or(1.0);
        let n = samples_per_axis.max(1);
        let total = n.pow(self.dim as u32);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut y = vec![0.0; self.dim];
        for idx in 0..total {
            let mut rem = idx;
            for yk in y.iter_mut() {
                *yk = extent * (rem % n) as f64 / n as f64;
                rem /= n;
            }
            let ev = self.eval(&y).symmetric_eigenvalues();
            lo = lo.min(ev[0]);
            hi = hi.max(ev[ev.len() - 1]);
        }
        (lo, hi)
    }
}

/// Evaluates `a(y)` with input validation.
pub fn eval_tensor(field: &TensorField, y: &[f64]) -> Result<Matrix> {
    if y.len() != field.dim {
        return invalid(format!("point has {} coordinates, field dimension is {}", y.len(), field.dim));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return invalid(format!("non-finite evaluation point {y:?}"));
    }
    Ok(field.eval(y))
}

/// `a_11(y_1)` of the benchmark tensor.
pub fn benchmark_a11(y1: f64) -> f64 {
    let s17 = 17f64.sqrt();
    1.0 / (3.0 + 2.0 * s17 / (8.0 * (2.0 * PI * y1).sin() + 9.0))
}

/// `a_22(y_2)` of the benchmark tensor.
pub fn benchmark_a22(y2: f64) -> f64 {
    let s17 = 17f64.sqrt();
    1.0 / (0.05 + 2.0 * s17 / (8.0 * (2.0 * PI * y2).cos() + 9.0))
}

/// The diagonal two-dimensional benchmark tensor with period 1.
///
/// `alpha` and `beta` are the exact extrema of the diagonal entries: the
/// denominators `8 sin + 9` and `8 cos + 9` range over `[1, 17]`.
pub fn benchmark_tensor_2d() -> TensorField {
    let s17 = 17f64.sqrt();
    let a11_min = 1.0 / (3.0 + 2.0 * s17);
    let a22_min = 1.0 / (0.05 + 2.0 * s17);
    let a22_max = 1.0 / (0.05 + 2.0 * s17 / 17.0);
    let a11_max = 1.0 / (3.0 + 2.0 * s17 / 17.0);
    TensorField::new(
        "paper-2d",
        2,
        a11_min.min(a22_min),
        a11_max.max(a22_max),
        Some(1.0),
        |y| Matrix::diagonal(&[benchmark_a11(y[0]), benchmark_a22(y[1])]),
    )
    .expect("benchmark tensor parameters are valid")
}

/// Exact homogenized tensor of the benchmark: each diagonal entry depends on
/// one coordinate only, so the effective value is its harmonic mean, using
/// `∫_0^1 dy / (8 sin 2πy + 9) = 1/√17`.
pub fn benchmark_homogenized_2d() -> Matrix {
    Matrix::diagonal(&[1.0 / 5.0, 20.0 / 41.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_field_is_identity() {
        let f = TensorField::constant(2, 1.0).unwrap();
        assert_eq!(eval_tensor(&f, &[0.3, -0.4]).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn benchmark_values_at_origin() {
        let f = benchmark_tensor_2d();
        let a = eval_tensor(&f, &[0.0, 0.0]).unwrap();
        let s17 = 17f64.sqrt();
        assert!((a.get(0, 0) - 1.0 / (3.0 + 2.0 * s17 / 9.0)).abs() < 1e-15);
        assert!((a.get(1, 1) - 1.0 / (0.05 + 2.0 * s17 / 17.0)).abs() < 1e-15);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn benchmark_is_period_one() {
        let f = benchmark_tensor_2d();
        assert_eq!(f.period(), Some(1.0));
        let a0 = f.eval(&[0.0, 0.0]);
        let a1 = f.eval(&[1.0, 1.0]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a0.get(i, j) - a1.get(i, j)).abs() < 1e-14);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let y = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            for k in 0..2 {
                let mut ys = y;
                ys[k] += 1.0;
                let d = f.eval(&y).sub(&f.eval(&ys)).frobenius_norm();
                assert!(d < 1e-12, "period shift mismatch {d}");
            }
        }
    }

    #[test]
    fn benchmark_alpha_matches_brute_force_minimum() {
        let f = benchmark_tensor_2d();
        let n = 200_000;
        let min11 = (0..n).map(|k| benchmark_a11(k as f64 / n as f64)).fold(f64::INFINITY, f64::min);
        assert!((min11 - f.alpha()).abs() < 1e-8, "{min11} vs {}", f.alpha());
        let max22 = (0..n).map(|k| benchmark_a22(k as f64 / n as f64)).fold(0.0, f64::max);
        assert!((max22 - f.beta()).abs() < 1e-8);
    }

    #[test]
    fn benchmark_is_separable_and_diagonal() {
        let f = benchmark_tensor_2d();
        for i in 0..20 {
            for j in 0..20 {
                let y = [i as f64 / 20.0, j as f64 / 20.0];
                let a = f.eval(&y);
                assert_eq!(a.get(0, 1), 0.0);
                assert_eq!(a.get(1, 0), 0.0);
                assert_eq!(a.get(0, 0), f.eval(&[y[0], 0.37]).get(0, 0));
                assert_eq!(a.get(1, 1), f.eval(&[0.81, y[1]]).get(1, 1));
            }
        }
    }

    #[test]
    fn fields_are_symmetric_and_bounded_on_samples() {
        let fields = [
            benchmark_tensor_2d(),
            TensorField::checkerboard(2, 1.0, 10.0).unwrap(),
            TensorField::constant(3, 2.5).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in &fields {
            for _ in 0..500 {
                let y: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let a = f.eval(&y);
                assert_eq!(a.asymmetry(), 0.0);
                let z: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let zz: f64 = z.iter().map(|v| v * v).sum();
                let q = a.quad_form(&z);
                assert!(q >= f.alpha() * zz * (1.0 - 1e-12) && q <= f.beta() * zz * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let f = benchmark_tensor_2d();
        let y = [0.123456789, -0.987654321];
        assert_eq!(f.eval(&y).get(0, 0).to_bits(), f.eval(&y).get(0, 0).to_bits());
        assert_eq!(f.eval(&y).get(1, 1).to_bits(), f.eval(&y).get(1, 1).to_bits());
    }

    #[test]
    fn rejects_bad_points_and_names() {
        let f = benchmark_tensor_2d();
        assert!(eval_tensor(&f, &[f64::NAN, 0.0]).is_err());
        assert!(eval_tensor(&f, &[0.0]).is_err());
        assert!(TensorField::from_name("nope", 2).is_err());
        assert!(TensorField::from_name("constant:abc", 2).is_err());
        assert!(TensorField::from_name("paper-2d", 1).is_err());
        assert!(TensorField::constant(2, -1.0).is_err());
    }

    #[test]
    fn catalog_names_resolve() {
        let c = TensorField::from_name("constant:2.5", 3).unwrap();
        assert_eq!(c.eval(&[0.0, 0.0, 0.0]), Matrix::scaled_identity(3, 2.5));
        let cb = TensorField::from_name("checkerboard:1:4", 1).unwrap();
        assert_eq!(cb.eval(&[0.25]).get(0, 0), 1.0);
        assert_eq!(cb.eval(&[0.75]).get(0, 0), 4.0);
        assert_eq!(cb.eval(&[-0.25]).get(0, 0), 4.0);
        assert_eq!(TensorField::from_name("paper-2d", 2).unwrap().name(), "paper-2d");
    }

    #[test]
    fn sampled_bounds_bracket_declared_bounds() {
        let f = benchmark_tensor_2d();
        let (lo, hi) = f.estimate_bounds(64);
        assert!(lo >= f.alpha() - 1e-12 && hi <= f.beta() + 1e-12);
        assert!((lo - f.alpha()).abs() < 1e-2 && (hi - f.beta()).abs() < 1e-2);
    }
}
