//! Reference Q1 element on `[0,1]^d`.

use crate::quadrature::GaussLegendre;

pub(crate) const MAX_CORNERS: usize = 8;

/// Shape values and reference gradients of the `2^d` corner functions at `xi`.
#[inline]
pub(crate) fn shape(dim: usize, xi: &[f64; 3]) -> ([f64; MAX_CORNERS], [[f64; 3]; MAX_CORNERS]) {
    let mut vals = [0.0; MAX_CORNERS];
    let mut grads = [[0.0; 3]; MAX_CORNERS];
    for a in 0..(1 << dim) {
        let mut v = 1.0;
        let mut fac = [0.0; 3];
        let mut dfac = [0.0; 3];
        for k in 0..dim {
            if (a >> k) & 1 == 1 {
                fac[k] = xi[k];
                dfac[k] = 1.0;
            } else {
                fac[k] = 1.0 - xi[k];
                dfac[k] = -1.0;
            }
            v *= fac[k];
        }
        vals[a] = v;
        for k in 0..dim {
            let mut g = dfac[k];
            for l in 0..dim {
                if l != k {
                    g *= fac[l];
                }
            }
            grads[a][k] = g;
        }
    }
    (vals, grads)
}

/// Tensor Gauss rule on the reference cell with precomputed shape data.
#[derive(Clone, Debug)]
pub(crate) struct RefElement {
    pub corners: usize,
    pub points: Vec<[f64; 3]>,
    /// Reference weights, summing to 1.
    pub weights: Vec<f64>,
    pub vals: Vec<[f64; MAX_CORNERS]>,
    pub grads: Vec<[[f64; 3]; MAX_CORNERS]>,
}

impl RefElement {
    pub fn new(dim: usize, points_per_axis: usize) -> Self {
        let g = GaussLegendre::new(points_per_axis);
        let mut rule1d = Vec::new();
        g.mapped(0.0, 1.0, &mut rule1d);
        let total = points_per_axis.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut xi = [0.0; 3];
            let mut w = 1.0;
            for x in xi.iter_mut().take(dim) {
                let (p, pw) = rule1d[rem % points_per_axis];
                *x = p;
                w *= pw;
                rem /= points_per_axis;
            }
            points.push(xi);
            weights.push(w);
        }
        let (vals, grads) = points.iter().map(|xi| shape(dim, xi)).unzip();
        RefElement { corners: 1 << dim, points, weights, vals, grads }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        for dim in 1..=3 {
            let e = RefElement::new(dim, 3);
            for q in 0..e.points.len() {
                let s: f64 = e.vals[q][..e.corners].iter().sum();
                assert!((s - 1.0).abs() < 1e-15);
                for k in 0..dim {
                    let g: f64 = e.grads[q][..e.corners].iter().map(|g| g[k]).sum();
                    assert!(g.abs() < 1e-15);
                }
            }
            assert!((e.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}
