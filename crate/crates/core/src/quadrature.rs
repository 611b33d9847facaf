//! Adaptive composite Simpson quadrature and monotone cubic interpolation.

use crate::error::{ModelError, Result};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` by recursive interval bisection.
///
/// A panel is accepted once the Richardson-corrected Simpson delta drops
/// below its share of `tol`. Panels that exhaust the depth budget are kept
/// but their error is accumulated, and the call fails if that sum exceeds
/// `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(ModelError::Domain(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut unresolved = 0.0;
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut unresolved);
    if !value.is_finite() {
        return Err(ModelError::Numeric(format!(
            "integrand produced a non-finite value on [{a}, {b}]"
        )));
    }
    if unresolved > tol {
        return Err(ModelError::Quadrature {
            requested: tol,
            achieved: unresolved,
        });
    }
    Ok(value)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *unresolved += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, unresolved)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, unresolved)
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson).
///
/// Monotone runs in the data stay monotone in the interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(ModelError::Domain(
                "interpolation needs at least two (x, y) pairs of equal length".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ModelError::Domain(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            let (d0, d1) = (secants[k - 1], secants[k]);
            if d0 * d1 <= 0.0 {
                slopes[k] = 0.0;
            } else {
                // weighted harmonic mean
                let h0 = xs[k] - xs[k - 1];
                let h1 = xs[k + 1] - xs[k];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                slopes[k] = (w0 + w1) / (w0 / d0 + w1 / d1);
            }
        }
        for k in 0..n - 1 {
            let d = secants[k];
            if d == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let a = slopes[k] / d;
            let b = slopes[k + 1] / d;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                slopes[k] = t * a * d;
                slopes[k + 1] = t * b * d;
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    /// Evaluates the interpolant, clamping `x` to the data range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let x = x.clamp(self.xs[0], self.xs[n - 1]);
        let k = match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }
}
