//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson slopes,
//! the same shape-preserving rule used by `pchip` in R and SciPy).

use alloc::vec::Vec;

use crate::Error;

/// A shape-preserving cubic interpolant through `(x_i, y_i)`.
///
/// Monotone data yield a monotone interpolant. Evaluation outside
/// `[x_0, x_{n-1}]` clamps to the end nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// Build the interpolant. `x` must be strictly increasing and finite.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, Error> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput("pchip: x and y lengths differ"));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput("pchip: need at least two nodes"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("pchip: x must be strictly increasing and finite"));
        }
        let d = slopes(&x, &y);
        Ok(Self { x, y, d })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index `i` of the interval `[x_i, x_{i+1}]` containing `t`.
    #[inline]
    fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= t);
        i.saturating_sub(1).min(n - 2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        self.eval_in(self.interval(t), t)
    }

    /// Evaluate with a caller-supplied interval guess (used for uniform grids).
    #[inline]
    pub(crate) fn eval_in(&self, i: usize, t: f64) -> f64 {
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1];
        // Rounding in the basis can overshoot a flat or nearly flat segment.
        let (lo, hi) = if self.y[i] <= self.y[i + 1] {
            (self.y[i], self.y[i + 1])
        } else {
            (self.y[i + 1], self.y[i])
        };
        v.clamp(lo, hi)
    }

    /// Evaluate on a grid whose nodes are known to be `x_i = x_0 + i·step`
    /// up to rounding; falls back to a local search when the guess is off.
    #[inline]
    pub(crate) fn eval_uniform(&self, t: f64, x0: f64, step: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let mut i = (((t - x0) / step) as usize).min(n - 2);
        while i > 0 && self.x[i] > t {
            i -= 1;
        }
        while i + 2 < n && self.x[i + 1] <= t {
            i += 1;
        }
        self.eval_in(i, t)
    }
}

fn slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = alloc::vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || (a > 0.0) != (b > 0.0) {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// One-sided three-point estimate with the shape-preserving adjustments.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() || del0 == 0.0 {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn reproduces_nodes() {
        let x = vec![0.0, 1.0, 2.5, 3.0, 7.0];
        let y = vec![1.0, 1.0, 4.0, 4.5, 100.0];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(p.eval(*xi), *yi);
        }
    }

    #[test]
    fn flat_segment_stays_flat() {
        let p = Pchip::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 2.0, 2.0, 5.0]).unwrap();
        for i in 0..=100 {
            let t = 1.0 + i as f64 / 100.0;
            assert_eq!(p.eval(t), 2.0);
        }
    }

    #[test]
    fn reproduces_linear_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let p = Pchip::new(x, y).unwrap();
        assert!((p.eval(2.2) - 5.6).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(Pchip::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn clamps_outside_range() {
        let p = Pchip::new(vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 40.0]).unwrap();
        assert_eq!(p.eval(-5.0), 10.0);
        assert_eq!(p.eval(9.0), 40.0);
    }
}
