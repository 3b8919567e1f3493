//! Classical one-sided differences and Grünwald-Letnikov operators.
//!
//! Sign convention: `forward_diff` returns `(Q_k - Q_{k+1}) / h`, the
//! negative of the usual forward difference, so that the discrete analogue of
//! `d/dt` is `-sigma * Delta_sigma` for both orientations.
//!
//! Index ranges: applied to a series on `s..=e`, left-type operators
//! (`backward_diff`, `gl_left`) return a series on `s+1..=e` and right-type
//! operators (`forward_diff`, `gl_right`) one on `s..=e-1`. On a trajectory
//! (`s = 0`, `e = N`) these are `1..=N` and `0..=N-1`.

use crate::error::{Error, Result};
use crate::series::Series;

/// Grünwald-Letnikov weights `alpha_0, ..., alpha_n` for a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct GlCoefficients {
    alpha: f64,
    coeffs: Vec<f64>,
}

impl GlCoefficients {
    /// Tabulates `n + 1` weights by `alpha_r = alpha_{r-1} (r - 1 - alpha) / r`.
    ///
    /// `alpha = 1` is accepted; the table is then `(1, -1, 0, 0, ...)`.
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidOrder(alpha));
        }
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(1.0);
        for r in 1..=n {
            let prev = coeffs[r - 1];
            coeffs.push(prev * ((r as f64 - 1.0 - alpha) / r as f64));
        }
        Ok(Self { alpha, coeffs })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `alpha_r`, panicking past the end of the table.
    pub fn get(&self, r: usize) -> f64 {
        self.coeffs[r]
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.coeffs.len() < needed {
            return Err(Error::InsufficientCoefficients {
                available: self.coeffs.len(),
                needed,
            });
        }
        Ok(())
    }
}

/// Free-function form of [`GlCoefficients::new`].
pub fn gl_coefficients(alpha: f64, n: usize) -> Result<GlCoefficients> {
    GlCoefficients::new(alpha, n)
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive {
            name: "h",
            value: h,
        })
    }
}

fn check_len(q: &Series) -> Result<()> {
    if q.len() < 2 {
        return Err(Error::TooFewSteps {
            min: 1,
            got: q.len() - 1,
        });
    }
    Ok(())
}

/// `Delta_-`: `(Q_k - Q_{k-1}) / h` on `first+1..=last`.
pub fn backward_diff(q: &Series, h: f64) -> Result<Series> {
    check_step(h)?;
    check_len(q)?;
    let d = q.dim();
    let mut out = Series::zeros(q.first() + 1, q.len() - 1, d);
    for k in out.range() {
        let (cur, prev) = (q.get(k), q.get(k - 1));
        for (o, (c, p)) in out.get_mut(k).iter_mut().zip(cur.iter().zip(prev)) {
            *o = (c - p) / h;
        }
    }
    Ok(out)
}

/// `Delta_+`: `(Q_k - Q_{k+1}) / h` on `first..=last-1`.
pub fn forward_diff(q: &Series, h: f64) -> Result<Series> {
    check_step(h)?;
    check_len(q)?;
    let d = q.dim();
    let mut out = Series::zeros(q.first(), q.len() - 1, d);
    for k in out.range() {
        let (cur, next) = (q.get(k), q.get(k + 1));
        for (o, (c, n)) in out.get_mut(k).iter_mut().zip(cur.iter().zip(next)) {
            *o = (c - n) / h;
        }
    }
    Ok(out)
}

/// `Delta^alpha_-`: `h^-alpha * sum_{r=0}^{k-first} alpha_r Q_{k-r}` on `first+1..=last`.
pub fn gl_left(q: &Series, h: f64, c: &GlCoefficients) -> Result<Series> {
    check_step(h)?;
    check_len(q)?;
    c.require(q.len())?;
    let d = q.dim();
    let scale = h.powf(c.alpha());
    let mut out = Series::zeros(q.first() + 1, q.len() - 1, d);
    let mut acc = vec![0.0; d];
    for k in out.range() {
        acc.fill(0.0);
        for r in 0..=k - q.first() {
            let w = c.get(r);
            for (a, x) in acc.iter_mut().zip(q.get(k - r)) {
                *a += w * x;
            }
        }
        for (o, a) in out.get_mut(k).iter_mut().zip(&acc) {
            *o = a / scale;
        }
    }
    Ok(out)
}

/// `Delta^alpha_+`: `h^-alpha * sum_{r=0}^{last-k} alpha_r Q_{k+r}` on `first..=last-1`.
pub fn gl_right(q: &Series, h: f64, c: &GlCoefficients) -> Result<Series> {
    check_step(h)?;
    check_len(q)?;
    c.require(q.len())?;
    let d = q.dim();
    let scale = h.powf(c.alpha());
    let mut out = Series::zeros(q.first(), q.len() - 1, d);
    let mut acc = vec![0.0; d];
    for k in out.range() {
        acc.fill(0.0);
        for r in 0..=q.last() - k {
            let w = c.get(r);
            for (a, x) in acc.iter_mut().zip(q.get(k + r)) {
                *a += w * x;
            }
        }
        for (o, a) in out.get_mut(k).iter_mut().zip(&acc) {
            *o = a / scale;
        }
    }
    Ok(out)
}
