use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Continuous, SeverityFamily, LIMIT_EPS};
use crate::pchip::Pchip;
use crate::special::{norm_cdf, norm_ln_cdf, norm_ln_pdf, norm_ln_sf, norm_quantile, norm_sf, norm_sf_inv};
use crate::{Error, Result};

/// Number of nodes in the inversion grid.
pub const GRID_LEN: usize = 4001;
/// The grid covers `z ∈ [-GRID_Z_MAX, GRID_Z_MAX]`.
pub const GRID_Z_MAX: f64 = 8.0;

/// Tukey g-and-h: `X = a + b·A(Z)` with `A(z) = (e^{gz} - 1)/g · e^{hz²/2}`.
///
/// `A` has no closed-form inverse. Construction tabulates it on a uniform
/// z-grid and builds a monotone cubic interpolant of `z` against `A(z)`;
/// each inversion starts from that interpolant and is polished with Newton
/// steps. Targets beyond the grid fall back to bracketed root finding.
#[derive(Debug, Clone, PartialEq)]
pub struct GandH {
    pub a: f64,
    pub b: f64,
    pub g: f64,
    pub h: f64,
    ln_b: f64,
    inverse: Arc<Pchip>,
}

impl GandH {
    pub fn new(a: f64, b: f64, g: f64, h: f64) -> Result<Self> {
        let err = |reason| Error::InvalidParameter { family: SeverityFamily::GandH, reason };
        if !a.is_finite() || !g.is_finite() {
            return Err(err("location and skewness must be finite"));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(err("scale must be positive"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(err("elongation h must be positive"));
        }
        let step = 2.0 * GRID_Z_MAX / (GRID_LEN - 1) as f64;
        let mut ys = Vec::with_capacity(GRID_LEN);
        let mut zs = Vec::with_capacity(GRID_LEN);
        for i in 0..GRID_LEN {
            let z = -GRID_Z_MAX + i as f64 * step;
            let y = transform(g, h, z);
            // Overflow or a flat spot in floating point would break the
            // interpolant; the root finder covers whatever is dropped.
            if y.is_finite() && ys.last().is_none_or(|&last| y > last) {
                ys.push(y);
                zs.push(z);
            }
        }
        let inverse = Pchip::new(ys, zs).map_err(|_| err("transform cannot be tabulated"))?;
        Ok(Self { a, b, g, h, ln_b: b.ln(), inverse: Arc::new(inverse) })
    }

    /// The standardised transform `A(z)`.
    #[inline]
    pub fn transform(&self, z: f64) -> f64 {
        transform(self.g, self.h, z)
    }

    /// Solve `a + b·A(z) = x` for `z`.
    pub fn inverse_transform(&self, x: f64) -> f64 {
        let y = (x - self.a) / self.b;
        if y.is_nan() {
            return f64::NAN;
        }
        if y.is_infinite() {
            return y;
        }
        let (ys, zs) = self.inverse.nodes();
        let n = ys.len();
        if y >= ys[0] && y <= ys[n - 1] {
            let i = ys.partition_point(|&v| v <= y).saturating_sub(1).min(n - 2);
            let z0 = self.inverse.eval_in(i, y);
            // One Newton step from the interpolant is normally enough.
            let (r, d) = self.residual(z0, y);
            if r == 0.0 {
                return z0;
            }
            let z1 = z0 - r / d;
            if z1 >= zs[i] && z1 <= zs[i + 1] && (z1 - z0).abs() <= 1e-6 * (1.0 + z0.abs()) {
                return z1;
            }
            return self.solve(y, zs[i], zs[i + 1], z0);
        }
        // Outside the tabulated range: expand a bracket geometrically.
        if y > ys[n - 1] {
            let mut lo = zs[n - 1];
            let mut hi = lo.max(1.0) * 2.0;
            while self.transform(hi) < y && hi < 1e300 {
                lo = hi;
                hi *= 2.0;
            }
            self.solve(y, lo, hi, 0.5 * (lo + hi))
        } else {
            let mut hi = zs[0];
            let mut lo = hi.min(-1.0) * 2.0;
            while self.transform(lo) > y && lo > -1e300 {
                hi = lo;
                lo *= 2.0;
            }
            self.solve(y, lo, hi, 0.5 * (lo + hi))
        }
    }

    /// `(A(z) - y, A'(z))`.
    #[inline]
    fn residual(&self, z: f64, y: f64) -> (f64, f64) {
        let em1 = (self.g * z).exp_m1();
        let skew = if self.g.abs() < LIMIT_EPS { z } else { em1 / self.g };
        let e2 = (0.5 * self.h * z * z).exp();
        (skew * e2 - y, e2 * (em1 + 1.0 + self.h * z * skew))
    }

    /// Newton iteration safeguarded by bisection on `[lo, hi]`.
    fn solve(&self, y: f64, mut lo: f64, mut hi: f64, mut z: f64) -> f64 {
        let tol = 1e-14 * y.abs().max(1.0);
        for _ in 0..200 {
            let (r, d) = self.residual(z, y);
            if r.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * (1.0 + z.abs()) {
                return z;
            }
            if r < 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            let newton = z - r / d;
            z = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        z
    }

    /// `ln A'(z)`.
    #[inline]
    fn ln_derivative(&self, z: f64) -> f64 {
        let em1 = (self.g * z).exp_m1();
        let skew = if self.g.abs() < LIMIT_EPS { z } else { em1 / self.g };
        0.5 * self.h * z * z + (em1 + 1.0 + self.h * z * skew).ln()
    }
}

#[inline]
fn transform(g: f64, h: f64, z: f64) -> f64 {
    let skew = if g.abs() < LIMIT_EPS { z } else { (g * z).exp_m1() / g };
    skew * (0.5 * h * z * z).exp()
}

impl Continuous for GandH {
    fn ln_pdf(&self, x: f64) -> f64 {
        let z = self.inverse_transform(x);
        if !z.is_finite() {
            return f64::NEG_INFINITY;
        }
        norm_ln_pdf(z) - self.ln_b - self.ln_derivative(z)
    }

    fn cdf(&self, x: f64) -> f64 {
        norm_cdf(self.inverse_transform(x))
    }

    fn sf(&self, x: f64) -> f64 {
        norm_sf(self.inverse_transform(x))
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        norm_ln_cdf(self.inverse_transform(x))
    }

    fn ln_sf(&self, x: f64) -> f64 {
        norm_ln_sf(self.inverse_transform(x))
    }

    fn quantile(&self, p: f64) -> f64 {
        self.a + self.b * self.transform(norm_quantile(p))
    }

    fn inverse_sf(&self, s: f64) -> f64 {
        self.a + self.b * self.transform(norm_sf_inv(s))
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.a + self.b * self.transform(z)
    }
}
