//! Lagrangians `L(x, v, t)` with their first (and optionally second) partials.
//!
//! Implementations must be pure: the schemes evaluate them in arbitrary order
//! and possibly from several threads. Smoothness (`L` of class C²) is a caller
//! obligation that cannot be checked here.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default central-difference step for [`FiniteDifferenceLagrangian`].
pub const DEFAULT_FD_EPS: f64 = 1e-5;

/// Second partial derivatives at one point, each `d x d`.
///
/// `xv[(a, b)]` is `d²L / dx_a dv_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hessian {
    pub xx: DMatrix<f64>,
    pub xv: DMatrix<f64>,
    pub vv: DMatrix<f64>,
}

pub trait Lagrangian {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64], v: &[f64], t: f64) -> f64;

    /// Writes `dL/dx` into `out`.
    fn grad_x(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]);

    /// Writes `dL/dv` into `out`.
    fn grad_v(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]);

    /// Second derivatives, when the model supplies them.
    fn hessian(&self, _x: &[f64], _v: &[f64], _t: f64) -> Option<Hessian> {
        None
    }

    /// `true` when `L` is a quadratic form in `(x, v)`, so every discrete
    /// Euler-Lagrange residual is affine in the trajectory.
    fn is_quadratic(&self) -> bool {
        false
    }
}

impl<L: Lagrangian + ?Sized> Lagrangian for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64], v: &[f64], t: f64) -> f64 {
        (**self).value(x, v, t)
    }
    fn grad_x(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
        (**self).grad_x(x, v, t, out)
    }
    fn grad_v(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
        (**self).grad_v(x, v, t, out)
    }
    fn hessian(&self, x: &[f64], v: &[f64], t: f64) -> Option<Hessian> {
        (**self).hessian(x, v, t)
    }
    fn is_quadratic(&self) -> bool {
        (**self).is_quadratic()
    }
}

impl<L: Lagrangian + ?Sized> Lagrangian for Box<L> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64], v: &[f64], t: f64) -> f64 {
        (**self).value(x, v, t)
    }
    fn grad_x(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
        (**self).grad_x(x, v, t, out)
    }
    fn grad_v(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
        (**self).grad_v(x, v, t, out)
    }
    fn hessian(&self, x: &[f64], v: &[f64], t: f64) -> Option<Hessian> {
        (**self).hessian(x, v, t)
    }
    fn is_quadratic(&self) -> bool {
        (**self).is_quadratic()
    }
}

/// `L = (|v|² - |x|²) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Harmonic {
    dim: usize,
}

impl Harmonic {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self { dim }
    }
}

/// Free-function constructor used by configuration front-ends.
pub fn harmonic_oscillator(dim: usize) -> Harmonic {
    Harmonic::new(dim)
}

impl Lagrangian for Harmonic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64], v: &[f64], _t: f64) -> f64 {
        0.5 * (dot(v, v) - dot(x, x))
    }

    fn grad_x(&self, x: &[f64], _v: &[f64], _t: f64, out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = -xi;
        }
    }

    fn grad_v(&self, _x: &[f64], v: &[f64], _t: f64, out: &mut [f64]) {
        out.copy_from_slice(v);
    }

    fn hessian(&self, _x: &[f64], _v: &[f64], _t: f64) -> Option<Hessian> {
        let d = self.dim;
        Some(Hessian {
            xx: -DMatrix::identity(d, d),
            xv: DMatrix::zeros(d, d),
            vv: DMatrix::identity(d, d),
        })
    }

    fn is_quadratic(&self) -> bool {
        true
    }
}

/// `L = x · v`; a quadratic model with a mixed second derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bilinear {
    dim: usize,
}

impl Bilinear {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self { dim }
    }
}

impl Lagrangian for Bilinear {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64], v: &[f64], _t: f64) -> f64 {
        dot(x, v)
    }

    fn grad_x(&self, _x: &[f64], v: &[f64], _t: f64, out: &mut [f64]) {
        out.copy_from_slice(v);
    }

    fn grad_v(&self, x: &[f64], _v: &[f64], _t: f64, out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn hessian(&self, _x: &[f64], _v: &[f64], _t: f64) -> Option<Hessian> {
        let d = self.dim;
        Some(Hessian {
            xx: DMatrix::zeros(d, d),
            xv: DMatrix::identity(d, d),
            vv: DMatrix::zeros(d, d),
        })
    }

    fn is_quadratic(&self) -> bool {
        true
    }
}

/// Uncoupled pendula, `L = |v|² / 2 + sum_i cos(x_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pendulum {
    dim: usize,
}

impl Pendulum {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self { dim }
    }
}

impl Lagrangian for Pendulum {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64], v: &[f64], _t: f64) -> f64 {
        0.5 * dot(v, v) + x.iter().map(|xi| xi.cos()).sum::<f64>()
    }

    fn grad_x(&self, x: &[f64], _v: &[f64], _t: f64, out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = -xi.sin();
        }
    }

    fn grad_v(&self, _x: &[f64], v: &[f64], _t: f64, out: &mut [f64]) {
        out.copy_from_slice(v);
    }

    fn hessian(&self, x: &[f64], _v: &[f64], _t: f64) -> Option<Hessian> {
        let d = self.dim;
        Some(Hessian {
            xx: DMatrix::from_fn(d, d, |i, j| if i == j { -x[i].cos() } else { 0.0 }),
            xv: DMatrix::zeros(d, d),
            vv: DMatrix::identity(d, d),
        })
    }
}

/// A Lagrangian given only by its value; gradients come from central
/// differences with step `eps`.
#[derive(Clone)]
pub struct FiniteDifferenceLagrangian<F> {
    dim: usize,
    eps: f64,
    f: F,
}

impl<F> FiniteDifferenceLagrangian<F>
where
    F: Fn(&[f64], &[f64], f64) -> f64,
{
    pub fn new(dim: usize, f: F, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::NonPositive {
                name: "eps",
                value: eps,
            });
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self { dim, eps, f })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Wraps a value-only Lagrangian with central-difference gradients.
pub fn finite_difference_gradients<F>(
    dim: usize,
    f: F,
    eps: f64,
) -> Result<FiniteDifferenceLagrangian<F>>
where
    F: Fn(&[f64], &[f64], f64) -> f64,
{
    FiniteDifferenceLagrangian::new(dim, f, eps)
}

impl<F> Lagrangian for FiniteDifferenceLagrangian<F>
where
    F: Fn(&[f64], &[f64], f64) -> f64,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64], v: &[f64], t: f64) -> f64 {
        (self.f)(x, v, t)
    }

    fn grad_x(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
        let mut probe = x.to_vec();
        for (i, o) in out.iter_mut().enumerate() {
            probe[i] = x[i] + self.eps;
            let up = (self.f)(&probe, v, t);
            probe[i] = x[i] - self.eps;
            let down = (self.f)(&probe, v, t);
            probe[i] = x[i];
            *o = (up - down) / (2.0 * self.eps);
        }
    }

    fn grad_v(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
        let mut probe = v.to_vec();
        for (i, o) in out.iter_mut().enumerate() {
            probe[i] = v[i] + self.eps;
            let up = (self.f)(x, &probe, t);
            probe[i] = v[i] - self.eps;
            let down = (self.f)(x, &probe, t);
            probe[i] = v[i];
            *o = (up - down) / (2.0 * self.eps);
        }
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_MODELS: &[&str] = &["harmonic", "bilinear-test", "pendulum"];

/// Looks up a built-in model by name.
pub fn builtin(name: &str, dim: usize) -> Option<Box<dyn Lagrangian + Send + Sync>> {
    if dim == 0 {
        return None;
    }
    match name {
        "harmonic" => Some(Box::new(Harmonic::new(dim))),
        "bilinear-test" | "bilinear" => Some(Box::new(Bilinear::new(dim))),
        "pendulum" => Some(Box::new(Pendulum::new(dim))),
        _ => None,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
