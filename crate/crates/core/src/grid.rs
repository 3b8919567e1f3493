//! Uniform time grids and the one-sided Gauss quadrature.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::series::Series;

/// Orientation of a one-sided discretization: backward (`Minus`) or forward (`Plus`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sigma {
    Minus,
    Plus,
}

impl Sigma {
    /// `-1.0` for `Minus`, `+1.0` for `Plus`.
    pub fn sign(self) -> f64 {
        match self {
            Sigma::Minus => -1.0,
            Sigma::Plus => 1.0,
        }
    }

    pub fn opposite(self) -> Sigma {
        match self {
            Sigma::Minus => Sigma::Plus,
            Sigma::Plus => Sigma::Minus,
        }
    }

    /// Quadrature nodes: `1..=n` for `Minus`, `0..=n-1` for `Plus`.
    pub fn index_set(self, n: usize) -> RangeInclusive<usize> {
        match self {
            Sigma::Minus => 1..=n,
            Sigma::Plus => 0..=n - 1,
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sigma::Minus => "-",
            Sigma::Plus => "+",
        })
    }
}

impl FromStr for Sigma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "-" | "minus" | "backward" => Ok(Sigma::Minus),
            "+" | "plus" | "forward" => Ok(Sigma::Plus),
            other => Err(format!("expected one of -, +, minus, plus; got {other:?}")),
        }
    }
}

/// Uniform partition `t_k = a + k h`, `h = (b - a) / N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    steps: usize,
    h: f64,
    tau: Vec<f64>,
}

impl Grid {
    pub fn new(a: f64, b: f64, steps: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::EmptyInterval { a, b });
        }
        if steps < 2 {
            return Err(Error::TooFewSteps { min: 2, got: steps });
        }
        let h = (b - a) / steps as f64;
        let mut tau: Vec<f64> = (0..=steps).map(|k| a + k as f64 * h).collect();
        tau[steps] = b;
        Ok(Self {
            a,
            b,
            steps,
            h,
            tau,
        })
    }

    /// Grid `[0, steps * h]` for a prescribed step size.
    pub fn with_step(h: f64, steps: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::NonPositive {
                name: "h",
                value: h,
            });
        }
        Self::new(0.0, h * steps as f64, steps)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Step count `N`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn t(&self, k: usize) -> f64 {
        self.tau[k]
    }

    pub fn index_set(&self, sigma: Sigma) -> RangeInclusive<usize> {
        sigma.index_set(self.steps)
    }

    /// Interior nodes `1..=N-1`, the support of discrete variations.
    pub fn interior(&self) -> RangeInclusive<usize> {
        1..=self.steps - 1
    }

    /// `h * sum of values`, with `values` aligned with `I_sigma`.
    ///
    /// The weights are uniform, so `sigma` only fixes which nodes the caller
    /// sampled; the length check is the same for both orientations.
    pub fn quadrature(&self, _sigma: Sigma, values: &[f64]) -> Result<f64> {
        if values.len() != self.steps {
            return Err(Error::LengthMismatch {
                expected: self.steps,
                got: values.len(),
            });
        }
        Ok(self.h * values.iter().sum::<f64>())
    }

    /// Componentwise quadrature of a vector-valued series living on `I_sigma`.
    pub fn quadrature_series(&self, sigma: Sigma, values: &Series) -> Result<Vec<f64>> {
        let expected = self.index_set(sigma);
        if values.range() != expected {
            return Err(Error::RangeMismatch {
                expected,
                got: values.range(),
            });
        }
        let mut acc = vec![0.0; values.dim()];
        for (_, p) in values.points() {
            for (a, x) in acc.iter_mut().zip(p) {
                *a += x;
            }
        }
        Ok(acc.into_iter().map(|s| self.h * s).collect())
    }
}
