//! Averaging filters.
//!
//! A filter of order `q` is a nonnegative weight on `[-1/2, 1/2]` with unit
//! mass whose derivatives of order `0..q-1` vanish at both endpoints. Order 0
//! is the characteristic function of the interval. For `q >= 1` the family
//! used here is `μ(y) = c_q (1/4 - y²)^q`, with `c_q = (2q+1)! / (q!)²`.
//!
//! [`BoxFilter`] extends a 1D filter to the cube `K_L = [-L/2, L/2]^d` as
//! `μ_L(y) = L^{-d} ∏ μ(y_i / L)`.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Filter {
    q: u32,
    normalization: f64,
}

/// Builds the order-`q` filter. Negative orders are rejected.
pub fn make_filter(q: i64) -> Result<Filter> {
    if q < 0 {
        return invalid(format!("filter order must be nonnegative, got {q}"));
    }
    if q > 60 {
        return invalid(format!("filter order {q} is too large to normalize in double precision"));
    }
    let q = q as u32;
    Ok(Filter { q, normalization: normalizer(q) })
}

/// `(2q+1)! / (q!)²`, the reciprocal of `∫_{-1/2}^{1/2} (1/4 - y²)^q dy`.
fn normalizer(q: u32) -> f64 {
    // (2q+1)!/(q!)^2 = (2q+1) * C(2q, q)
    let mut binom = 1.0f64;
    for k in 1..=q {
        binom *= (q + k) as f64 / k as f64;
    }
    (2 * q + 1) as f64 * binom
}

impl Filter {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `μ(y)`; zero outside `[-1/2, 1/2]`.
    #[inline]
    pub fn eval1d(&self, y: f64) -> f64 {
        if !(-0.5..=0.5).contains(&y) {
            return 0.0;
        }
        if self.q == 0 {
            return 1.0;
        }
        let base = (0.25 - y * y).max(0.0);
        self.normalization * base.powi(self.q as i32)
    }
}

/// Tensor-product filter on `K_L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxFilter {
    base: Filter,
    side: f64,
    dim: usize,
}

impl BoxFilter {
    pub fn new(base: Filter, side: f64, dim: usize) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return invalid(format!("filter side must be positive, got {side}"));
        }
        if !(1..=3).contains(&dim) {
            return invalid(format!("filter dimension must be 1, 2 or 3, got {dim}"));
        }
        Ok(BoxFilter { base, side, dim })
    }

    pub fn base(&self) -> Filter {
        self.base
    }

    pub fn q(&self) -> u32 {
        self.base.q
    }

    /// Side length `L` of the support `K_L`.
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 1D factor `μ(t / L) / L`.
    #[inline]
    pub fn factor(&self, t: f64) -> f64 {
        self.base.eval1d(t / self.side) / self.side
    }

    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        y.iter().map(|&t| self.factor(t)).product()
    }
}

/// `μ_L(y)`, zero outside `K_L`.
pub fn eval_box_filter(f: &BoxFilter, y: &[f64]) -> f64 {
    f.eval(y)
}
