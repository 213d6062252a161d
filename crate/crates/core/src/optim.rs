//! Unconstrained minimisation: Nelder–Mead simplex followed by a BFGS polish
//! with central-difference gradients.
//!
//! Objectives may return `inf` or NaN outside their domain; both are treated
//! as `+inf`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
#[allow(unused_imports)]
use num_traits::Float;

/// Stopping rules shared by both stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub max_iter: usize,
    /// Relative objective change, `|Δf| ≤ f_tol·(1 + |f|)`.
    pub f_tol: f64,
    /// Infinity-norm of the last step.
    pub x_tol: f64,
    /// Gradient infinity-norm that counts as stationary, relative to `1 + |f|`.
    pub g_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { max_iter: 2000, f_tol: 1e-10, x_tol: 1e-8, g_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<'a, F> {
    f: &'a mut F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    #[inline]
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Nelder–Mead with dimension-adaptive coefficients (Gao & Han).
pub fn nelder_mead<F>(f: &mut F, x0: &[f64], step: f64, opts: &Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut obj = Counted { f, evals: 0 };
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1.0 { step * v[i].abs() } else { step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| obj.call(v)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];

        let f_best = values[best];
        let f_spread = values[worst] - f_best;
        let x_spread = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_best.is_finite() && f_spread <= opts.f_tol * (1.0 + f_best.abs()) && x_spread <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / nf;
            }
        }
        for j in 0..n {
            trial[j] = centroid[j] + alpha * (centroid[j] - simplex[worst][j]);
        }
        let f_r = obj.call(&trial);
        if f_r < f_best {
            for j in 0..n {
                trial2[j] = centroid[j] + beta * (trial[j] - centroid[j]);
            }
            let f_e = obj.call(&trial2);
            if f_e < f_r {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_e;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_r;
            continue;
        }
        // Contraction, outside or inside.
        let outside = f_r < values[worst];
        for j in 0..n {
            trial2[j] = if outside {
                centroid[j] + gamma * (trial[j] - centroid[j])
            } else {
                centroid[j] - gamma * (centroid[j] - simplex[worst][j])
            };
        }
        let f_c = obj.call(&trial2);
        if (outside && f_c <= f_r) || (!outside && f_c < values[worst]) {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = f_c;
            continue;
        }
        // Shrink towards the best vertex.
        let xb = simplex[best].clone();
        for &i in &order[1..] {
            for j in 0..n {
                simplex[i][j] = xb[j] + delta * (simplex[i][j] - xb[j]);
            }
            values[i] = obj.call(&simplex[i]);
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        f: values[best],
        iterations,
        evaluations: obj.evals,
        converged,
    }
}

#[inline]
fn diff_step(x: f64) -> f64 {
    // cube root of machine epsilon, scaled
    6.055e-6 * x.abs().max(1.0)
}

/// Central-difference gradient. Falls back to a one-sided difference when
/// one neighbour is outside the objective's domain.
pub fn numeric_gradient<F>(f: &mut F, x: &[f64], fx: f64, grad: &mut [f64])
where
    F: FnMut(&[f64]) -> f64,
{
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = diff_step(x[i]);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        grad[i] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => f64::NAN,
        };
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton minimisation with BFGS inverse-Hessian updates and an
/// Armijo backtracking line search.
pub fn bfgs<F>(f: &mut F, x0: &[f64], opts: &Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    const MAX_STEP: f64 = 4.0;
    let n = x0.len();
    let mut obj = Counted { f, evals: 0 };
    let mut x = x0.to_vec();
    let mut fx = obj.call(&x);
    if !fx.is_finite() {
        return Minimum { x, f: fx, iterations: 0, evaluations: obj.evals, converged: false };
    }
    let mut g = vec![0.0; n];
    numeric_gradient(&mut |v: &[f64]| obj.call(v), &x, fx, &mut g);

    let identity = |h: &mut Vec<f64>, scale: f64| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    let mut hinv = vec![0.0; n * n];
    identity(&mut hinv, 1.0);
    let mut fresh = true;
    let mut p = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut hy = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        if g.iter().any(|v| !v.is_finite()) {
            break;
        }
        if inf_norm(&g) <= opts.g_tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        for i in 0..n {
            p[i] = -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            identity(&mut hinv, 1.0);
            fresh = true;
            p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi = -gi);
            slope = dot(&g, &p);
        }
        let pn = inf_norm(&p);
        if pn > MAX_STEP {
            let r = MAX_STEP / pn;
            p.iter_mut().for_each(|v| *v *= r);
            slope *= r;
        }

        let mut t = 1.0;
        let mut f_new = f64::INFINITY;
        let mut accepted = false;
        for _ in 0..50 {
            for i in 0..n {
                x_new[i] = x[i] + t * p[i];
            }
            f_new = obj.call(&x_new);
            if f_new <= fx + 1e-4 * t * slope {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            if fresh {
                // Steepest descent cannot make progress: stationary up to noise.
                converged = inf_norm(&g) <= 1e2 * opts.g_tol * (1.0 + fx.abs());
                break;
            }
            identity(&mut hinv, 1.0);
            fresh = true;
            continue;
        }

        for i in 0..n {
            s[i] = x_new[i] - x[i];
        }
        numeric_gradient(&mut |v: &[f64]| obj.call(v), &x_new, f_new, &mut g_new);
        for i in 0..n {
            y[i] = g_new[i] - g[i];
        }
        let df = (fx - f_new).abs();
        let step = inf_norm(&s);
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        let f_old = fx;
        fx = f_new;
        if df <= opts.f_tol * (1.0 + f_old.abs()) && step <= opts.x_tol {
            converged = true;
            break;
        }

        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if fresh {
                let scale = sy / dot(&y, &y);
                identity(&mut hinv, scale);
            }
            for i in 0..n {
                hy[i] = (0..n).map(|j| hinv[i * n + j] * y[j]).sum();
            }
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
            fresh = false;
        }
    }

    Minimum { x, f: fx, iterations, evaluations: obj.evals, converged }
}

/// Simplex search, then a BFGS polish from the simplex's best vertex.
pub fn minimize<F>(f: &mut F, x0: &[f64], opts: &Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let coarse = Options { f_tol: opts.f_tol.max(1e-9), x_tol: opts.x_tol.max(1e-6), ..*opts };
    let nm = nelder_mead(f, x0, 0.5, &coarse);
    let start = if nm.f.is_finite() { nm.x.clone() } else { x0.to_vec() };
    let qn = bfgs(f, &start, opts);
    let evaluations = nm.evaluations + qn.evaluations;
    let iterations = nm.iterations + qn.iterations;
    if qn.f <= nm.f || !nm.f.is_finite() {
        Minimum { iterations, evaluations, ..qn }
    } else {
        Minimum { iterations, evaluations, converged: false, ..nm }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn rosenbrock_minimum() {
        let m = minimize(&mut rosenbrock, &[-1.2, 1.0], &Options::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn nelder_mead_alone_finds_quadratic_minimum() {
        let mut q = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2) + (x[2] - 0.5).powi(2);
        let opts = Options { f_tol: 1e-14, x_tol: 1e-7, ..Options::default() };
        let m = nelder_mead(&mut q, &[0.0, 0.0, 0.0], 1.0, &opts);
        assert!(m.converged);
        assert!((m.x[0] - 3.0).abs() < 1e-5);
        assert!((m.x[1] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn respects_infinite_barrier() {
        // minimum of (x-2)^2 restricted to x < 1 sits on the barrier
        let mut f = |x: &[f64]| if x[0] >= 1.0 { f64::INFINITY } else { (x[0] - 2.0).powi(2) };
        let m = minimize(&mut f, &[0.0], &Options::default());
        assert!(m.f.is_finite());
        assert!(m.x[0] < 1.0 && m.x[0] > 0.99);
    }

    #[test]
    fn gradient_matches_analytic() {
        let mut f = |x: &[f64]| x[0].exp() + x[0] * x[1] * x[1];
        let x = [0.3, -1.2];
        let mut g = [0.0; 2];
        let fx = f(&x);
        numeric_gradient(&mut f, &x, fx, &mut g);
        assert!((g[0] - (0.3f64.exp() + 1.44)).abs() < 1e-8);
        assert!((g[1] - 2.0 * 0.3 * -1.2).abs() < 1e-8);
    }
}
