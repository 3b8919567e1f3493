//! Discrete actions, direct and variational Euler-Lagrange residuals, and the
//! coherence check between them.
//!
//! For an embedding scheme with orientation `sigma` the discrete velocity is
//! `v = -sigma Delta_sigma Q` (or `-sigma Delta^alpha_sigma Q`), living on the
//! quadrature nodes `I_sigma`. With `p_k = dL/dv(Q_k, v_k, t_k)`:
//!
//! * the **direct** residual substitutes the discrete operators into a written
//!   form of the Euler-Lagrange equation. The symmetric writing applies
//!   `Delta_sigma` twice (`dL/dx + sigma Delta_sigma p`); the asymmetric and
//!   fractional writings apply the opposite-orientation operator to `p`
//!   (`dL/dx - sigma Delta_{-sigma} p`).
//! * the **variational** residual is `(1/h) dS/dQ_k` on interior nodes, where
//!   `S` is the discrete action. It is assembled by scattering each `p_j`
//!   through the transpose of the velocity stencil, which is summation by
//!   parts written out; it never calls the opposite-orientation operator.
//!
//! The two routes share only the evaluation of `dL/dx` and `p`, so agreement
//! between them is a real check of the coherence identity.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, Sigma};
use crate::lagrangian::Lagrangian;
use crate::operators::{backward_diff, forward_diff, gl_left, gl_right, GlCoefficients};
use crate::series::{Series, Trajectory};

/// Default central-difference step for [`action_gradient_fd`] in reports.
pub const ACTION_FD_EPS: f64 = 1e-5;

/// Number of leading samples a coherence report also gradient-checks.
pub const GRADIENT_CHECK_SAMPLES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Direct embedding of the usual Euler-Lagrange equation.
    SymmetricClassical,
    /// Direct embedding of the one-sided (asymmetric) rewriting.
    AsymmetricClassical,
    /// Grünwald-Letnikov embedding of the fractional equation.
    Fractional,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::SymmetricClassical => "symmetric-classical",
            SchemeKind::AsymmetricClassical => "asymmetric-classical",
            SchemeKind::Fractional => "fractional",
        }
    }

    pub fn is_classical(self) -> bool {
        !matches!(self, SchemeKind::Fractional)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "symmetric-classical" | "symmetric" => Ok(SchemeKind::SymmetricClassical),
            "asymmetric-classical" | "asymmetric" => Ok(SchemeKind::AsymmetricClassical),
            "fractional" => Ok(SchemeKind::Fractional),
            other => Err(format!(
                "expected symmetric-classical, asymmetric-classical or fractional; got {other:?}"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingScheme {
    sigma: Sigma,
    alpha: f64,
    kind: SchemeKind,
}

impl EmbeddingScheme {
    /// Classical kinds require `alpha == 1`; fractional admits `(0, 1]`.
    pub fn new(kind: SchemeKind, sigma: Sigma, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidOrder(alpha));
        }
        if kind.is_classical() && alpha != 1.0 {
            return Err(Error::ClassicalOrder(alpha));
        }
        Ok(Self { sigma, alpha, kind })
    }

    pub fn symmetric(sigma: Sigma) -> Self {
        Self {
            sigma,
            alpha: 1.0,
            kind: SchemeKind::SymmetricClassical,
        }
    }

    pub fn asymmetric(sigma: Sigma) -> Self {
        Self {
            sigma,
            alpha: 1.0,
            kind: SchemeKind::AsymmetricClassical,
        }
    }

    pub fn fractional(sigma: Sigma, alpha: f64) -> Result<Self> {
        Self::new(SchemeKind::Fractional, sigma, alpha)
    }

    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// Weights of the velocity map `Q -> v`, shared by the variational
    /// residual and the solver's Jacobian.
    pub(crate) fn stencil(&self, g: &Grid) -> Result<VelocityStencil> {
        let (coeffs, scale) = match self.kind {
            SchemeKind::Fractional => (
                GlCoefficients::new(self.alpha, g.steps())?
                    .coeffs()
                    .to_vec(),
                g.h().powf(self.alpha),
            ),
            _ => (vec![1.0, -1.0], g.h()),
        };
        Ok(VelocityStencil {
            sigma: self.sigma,
            steps: g.steps(),
            coeffs,
            scale,
        })
    }
}

/// `v_j = sum_i weight(j, i) Q_i` for `j` in `I_sigma`.
#[derive(Clone, Debug)]
pub(crate) struct VelocityStencil {
    sigma: Sigma,
    steps: usize,
    coeffs: Vec<f64>,
    scale: f64,
}

impl VelocityStencil {
    /// `dv_j / dQ_i`.
    pub(crate) fn weight(&self, j: usize, i: usize) -> f64 {
        let (r, sign) = match self.sigma {
            Sigma::Minus if i <= j => (j - i, 1.0),
            Sigma::Plus if i >= j => (i - j, -1.0),
            _ => return 0.0,
        };
        match self.coeffs.get(r) {
            Some(c) => sign * c / self.scale,
            None => 0.0,
        }
    }

    /// Node indices `i` with a (possibly) nonzero `weight(j, i)`.
    pub(crate) fn support(&self, j: usize) -> RangeInclusive<usize> {
        let reach = self.coeffs.len() - 1;
        match self.sigma {
            Sigma::Minus => j.saturating_sub(reach)..=j,
            Sigma::Plus => j..=(j + reach).min(self.steps),
        }
    }

    /// `sum_j weight(j, i) p_j` for interior `i`, accumulated by scattering.
    fn transpose_apply(&self, p: &Series) -> Series {
        let n = self.steps;
        let d = p.dim();
        let mut acc = Series::zeros(1, n - 1, d);
        for (j, pj) in p.points() {
            for i in self.support(j) {
                if i == 0 || i == n {
                    continue;
                }
                let r = i.abs_diff(j);
                let c = self.coeffs[r];
                for (a, x) in acc.get_mut(i).iter_mut().zip(pj) {
                    *a += c * x;
                }
            }
        }
        let sign = match self.sigma {
            Sigma::Minus => 1.0,
            Sigma::Plus => -1.0,
        };
        for a in acc.as_mut_slice() {
            *a = sign * *a / self.scale;
        }
        acc
    }
}

fn check_shapes(g: &Grid, m: &impl Lagrangian, q: &Trajectory) -> Result<()> {
    if q.steps() != g.steps() {
        return Err(Error::LengthMismatch {
            expected: g.steps() + 1,
            got: q.len(),
        });
    }
    if q.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: q.dim(),
        });
    }
    Ok(())
}

/// `-sigma Delta_sigma Q` (classical) or `-sigma Delta^alpha_sigma Q`, on `I_sigma`.
pub fn discrete_velocity(s: &EmbeddingScheme, g: &Grid, q: &Trajectory) -> Result<Series> {
    if q.steps() != g.steps() {
        return Err(Error::LengthMismatch {
            expected: g.steps() + 1,
            got: q.len(),
        });
    }
    let h = g.h();
    match (s.kind, s.sigma) {
        (SchemeKind::Fractional, sigma) => {
            let c = GlCoefficients::new(s.alpha, g.steps())?;
            match sigma {
                Sigma::Minus => gl_left(q, h, &c),
                Sigma::Plus => Ok(gl_right(q, h, &c)?.scaled(-1.0)),
            }
        }
        (_, Sigma::Minus) => backward_diff(q, h),
        (_, Sigma::Plus) => Ok(forward_diff(q, h)?.scaled(-1.0)),
    }
}

/// `dL/dx` and `dL/dv` along `(Q_k, v_k, t_k)` for `k` in `I_sigma`.
fn partials(g: &Grid, m: &impl Lagrangian, q: &Trajectory, v: &Series) -> (Series, Series) {
    let d = q.dim();
    let mut gx = Series::zeros(v.first(), v.len(), d);
    let mut p = Series::zeros(v.first(), v.len(), d);
    for (k, vk) in v.points() {
        m.grad_x(q.get(k), vk, g.t(k), gx.get_mut(k));
        m.grad_v(q.get(k), vk, g.t(k), p.get_mut(k));
    }
    (gx, p)
}

/// Discrete action `h sum_{k in I_sigma} L(Q_k, v_k, t_k)`.
pub fn discrete_action(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
) -> Result<f64> {
    check_shapes(g, m, q)?;
    let v = discrete_velocity(s, g, q)?;
    let values: Vec<f64> = v
        .points()
        .map(|(k, vk)| m.value(q.get(k), vk, g.t(k)))
        .collect();
    g.quadrature(s.sigma, &values)
}

/// Residual of the direct discrete embedding.
///
/// Index ranges: symmetric-classical lives on `2..=N` (`sigma = -`) or
/// `0..=N-2` (`sigma = +`); the other kinds on `1..=N-1`.
pub fn direct_residual(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
) -> Result<Series> {
    check_shapes(g, m, q)?;
    let v = discrete_velocity(s, g, q)?;
    let (gx, p) = partials(g, m, q, &v);
    let h = g.h();
    let sig = s.sigma.sign();
    // outer operator applied to the momenta, with its sign in the equation
    let (outer, sign) = match (s.kind, s.sigma) {
        (SchemeKind::SymmetricClassical, Sigma::Minus) => (backward_diff(&p, h)?, sig),
        (SchemeKind::SymmetricClassical, Sigma::Plus) => (forward_diff(&p, h)?, sig),
        (SchemeKind::AsymmetricClassical, Sigma::Minus) => (forward_diff(&p, h)?, -sig),
        (SchemeKind::AsymmetricClassical, Sigma::Plus) => (backward_diff(&p, h)?, -sig),
        (SchemeKind::Fractional, sigma) => {
            let c = GlCoefficients::new(s.alpha, g.steps())?;
            let op = match sigma {
                Sigma::Minus => gl_right(&p, h, &c)?,
                Sigma::Plus => gl_left(&p, h, &c)?,
            };
            (op, -sig)
        }
    };
    gx.restrict(outer.range())?.axpy(sign, &outer)
}

/// Residual of the variational integrator on `1..=N-1`: `(1/h) dS/dQ_k`.
pub fn variational_residual(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
) -> Result<Series> {
    check_shapes(g, m, q)?;
    let v = discrete_velocity(s, g, q)?;
    let (gx, p) = partials(g, m, q, &v);
    let adjoint = s.stencil(g)?.transpose_apply(&p);
    gx.restrict(g.interior())?.axpy(1.0, &adjoint)
}

/// Central-difference gradient of [`discrete_action`] with respect to the
/// interior nodes, endpoints held fixed.
pub fn action_gradient_fd(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
    eps: f64,
) -> Result<Series> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::NonPositive {
            name: "eps",
            value: eps,
        });
    }
    check_shapes(g, m, q)?;
    let d = q.dim();
    let mut out = Series::zeros(1, g.steps() - 1, d);
    let mut probe = q.clone();
    for k in g.interior() {
        for c in 0..d {
            let x = q.get(k)[c];
            probe.get_mut(k)[c] = x + eps;
            let up = discrete_action(s, g, m, &probe)?;
            probe.get_mut(k)[c] = x - eps;
            let down = discrete_action(s, g, m, &probe)?;
            probe.get_mut(k)[c] = x;
            out.get_mut(k)[c] = (up - down) / (2.0 * eps);
        }
    }
    Ok(out)
}

/// Trajectory with components drawn uniformly from `[-1, 1]`.
pub fn random_trajectory(g: &Grid, dim: usize, rng: &mut impl Rng) -> Trajectory {
    let data = (0..(g.steps() + 1) * dim)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    Trajectory::new(dim, data).expect("grid has at least two steps")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport {
    pub max_abs_discrepancy: f64,
    pub compared_indices: RangeInclusive<usize>,
    /// Largest `|fd_gradient / h - variational|` relative to the larger
    /// max-norm of the two, over the first [`GRADIENT_CHECK_SAMPLES`] samples.
    pub gradient_check_error: f64,
    pub samples: usize,
}

/// Largest componentwise `|direct - variational|` over seeded random
/// trajectories, compared on the intersection of the two index ranges.
pub fn coherence_report(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    samples: usize,
    rng_seed: u64,
) -> Result<CoherenceReport> {
    if samples == 0 {
        return Err(Error::NonPositive {
            name: "samples",
            value: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst = 0.0_f64;
    let mut grad_err = 0.0_f64;
    let mut compared = None;
    for sample in 0..samples {
        let q = random_trajectory(g, m.dim(), &mut rng);
        let direct = direct_residual(s, g, m, &q)?;
        let var = variational_residual(s, g, m, &q)?;
        let lo = *direct.range().start().max(var.range().start());
        let hi = *direct.range().end().min(var.range().end());
        if lo > hi {
            return Err(Error::TooFewSteps {
                min: 3,
                got: g.steps(),
            });
        }
        let common = lo..=hi;
        worst = worst.max(
            direct
                .restrict(common.clone())?
                .max_abs_diff(&var.restrict(common.clone())?)?,
        );
        compared = Some(common);

        if sample < GRADIENT_CHECK_SAMPLES {
            let fd = action_gradient_fd(s, g, m, &q, ACTION_FD_EPS)?.scaled(1.0 / g.h());
            grad_err = grad_err.max(relative_gap(&fd, &var)?);
        }
    }
    Ok(CoherenceReport {
        max_abs_discrepancy: worst,
        compared_indices: compared.expect("samples >= 1"),
        gradient_check_error: grad_err,
        samples,
    })
}

/// `max|a - b| / max(max|a|, max|b|)`, zero when both vanish.
pub fn relative_gap(a: &Series, b: &Series) -> Result<f64> {
    let diff = a.max_abs_diff(b)?;
    let scale = a.max_abs().max(b.max_abs());
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

/// Direct embedding of `q'' + q' + q = 0` with backward differences, on `2..=N`:
/// `(Q_k - 2Q_{k-1} + Q_{k-2})/h² + (Q_k - Q_{k-1})/h + Q_k`.
pub fn embed_friction_residual(g: &Grid, q: &Trajectory) -> Result<Series> {
    if q.steps() != g.steps() {
        return Err(Error::LengthMismatch {
            expected: g.steps() + 1,
            got: q.len(),
        });
    }
    let h = g.h();
    let d = q.dim();
    let mut out = Series::zeros(2, g.steps() - 1, d);
    for k in out.range() {
        let (q0, q1, q2) = (q.get(k - 2), q.get(k - 1), q.get(k));
        for c in 0..d {
            out.get_mut(k)[c] =
                (q2[c] - 2.0 * q1[c] + q0[c]) / (h * h) + (q2[c] - q1[c]) / h + q2[c];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{Bilinear, Harmonic, Pendulum};
    use approx::assert_abs_diff_eq;

    fn traj(v: &[f64]) -> Trajectory {
        Trajectory::from_scalars(v).unwrap()
    }

    fn all_schemes() -> Vec<EmbeddingScheme> {
        let mut out = vec![];
        for sigma in [Sigma::Minus, Sigma::Plus] {
            out.push(EmbeddingScheme::symmetric(sigma));
            out.push(EmbeddingScheme::asymmetric(sigma));
            for a in [0.25, 0.5, 0.75, 1.0] {
                out.push(EmbeddingScheme::fractional(sigma, a).unwrap());
            }
        }
        out
    }

    #[test]
    fn scheme_invariants() {
        assert_eq!(
            EmbeddingScheme::new(SchemeKind::AsymmetricClassical, Sigma::Minus, 0.5),
            Err(Error::ClassicalOrder(0.5))
        );
        assert!(EmbeddingScheme::fractional(Sigma::Plus, 1.2).is_err());
        assert!(EmbeddingScheme::fractional(Sigma::Plus, 1.0).is_ok());
        assert_eq!(
            "asymmetric-classical".parse::<SchemeKind>(),
            Ok(SchemeKind::AsymmetricClassical)
        );
    }

    #[test]
    fn velocity_examples() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let q = traj(&[1.0, 3.0, 7.0]);
        let v = discrete_velocity(&EmbeddingScheme::asymmetric(Sigma::Minus), &g, &q).unwrap();
        assert_eq!((v.range(), v.as_slice()), (1..=2, &[4.0, 8.0][..]));
        let v = discrete_velocity(&EmbeddingScheme::asymmetric(Sigma::Plus), &g, &q).unwrap();
        assert_eq!((v.range(), v.as_slice()), (0..=1, &[4.0, 8.0][..]));
        let f = EmbeddingScheme::fractional(Sigma::Minus, 1.0).unwrap();
        let vf = discrete_velocity(&f, &g, &q).unwrap();
        assert_eq!(vf.as_slice(), &[4.0, 8.0]);
    }

    #[test]
    fn action_examples() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let m = Harmonic::new(1);
        let s = EmbeddingScheme::asymmetric(Sigma::Minus);
        assert_abs_diff_eq!(
            discrete_action(&s, &g, &m, &traj(&[1.0, 1.0, 0.0])).unwrap(),
            0.75
        );
        assert_eq!(discrete_action(&s, &g, &m, &traj(&[0.0; 3])).unwrap(), 0.0);
    }

    #[test]
    fn direct_residual_examples() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let m = Harmonic::new(1);
        let q = traj(&[1.0, 1.0, 0.0]);
        let r = direct_residual(&EmbeddingScheme::symmetric(Sigma::Minus), &g, &m, &q).unwrap();
        assert_eq!(r.range(), 2..=2);
        assert_abs_diff_eq!(r.get(2)[0], 4.0);
        let r = direct_residual(&EmbeddingScheme::asymmetric(Sigma::Minus), &g, &m, &q).unwrap();
        assert_eq!(r.range(), 1..=1);
        assert_abs_diff_eq!(r.get(1)[0], 3.0);
        let r = direct_residual(&EmbeddingScheme::symmetric(Sigma::Plus), &g, &m, &q).unwrap();
        assert_eq!(r.range(), 0..=0);
    }

    #[test]
    fn variational_residual_examples() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let m = Harmonic::new(1);
        let s = EmbeddingScheme::asymmetric(Sigma::Minus);
        let r = variational_residual(&s, &g, &m, &traj(&[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(r.range(), 1..=1);
        assert_abs_diff_eq!(r.get(1)[0], 3.0);

        let g = Grid::new(0.0, 0.2, 2).unwrap();
        let r = variational_residual(&s, &g, &m, &traj(&[1.0, 1.0, 0.99])).unwrap();
        assert_abs_diff_eq!(r.get(1)[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn equilibrium_has_zero_residuals() {
        let g = Grid::new(0.0, 1.0, 6).unwrap();
        let m = Harmonic::new(2);
        let q = Trajectory::zeros(6, 2);
        for s in all_schemes() {
            assert_eq!(direct_residual(&s, &g, &m, &q).unwrap().max_abs(), 0.0);
            assert_eq!(variational_residual(&s, &g, &m, &q).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn action_gradient_examples() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let m = Harmonic::new(1);
        let s = EmbeddingScheme::asymmetric(Sigma::Minus);
        let fd = action_gradient_fd(&s, &g, &m, &traj(&[1.0, 1.0, 0.0]), 1e-5).unwrap();
        assert_abs_diff_eq!(fd.get(1)[0], 1.5, epsilon = 1e-8);
        // (2 - h^2) Q_1 = Q_0 + Q_2 makes Q an extremal
        let g = Grid::new(0.0, 0.2, 2).unwrap();
        let fd = action_gradient_fd(&s, &g, &m, &traj(&[1.0, 1.0, 0.99]), 1e-5).unwrap();
        assert_abs_diff_eq!(fd.get(1)[0], 0.0, epsilon = 1e-8);
        let zero = crate::lagrangian::finite_difference_gradients(1, |_, _, _| 0.0, 1e-5).unwrap();
        let fd = action_gradient_fd(&s, &g, &zero, &traj(&[1.0, 2.0, 3.0]), 1e-5).unwrap();
        assert_eq!(fd.max_abs(), 0.0);
    }

    #[test]
    fn gradient_pairing_for_every_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Grid::new(0.0, 1.0, 9).unwrap();
        for s in all_schemes() {
            for m in [
                Box::new(Harmonic::new(2)) as Box<dyn Lagrangian>,
                Box::new(Pendulum::new(2)),
                Box::new(Bilinear::new(1)),
            ] {
                let q = random_trajectory(&g, m.dim(), &mut rng);
                let fd = action_gradient_fd(&s, &g, &m, &q, 1e-5).unwrap();
                let var = variational_residual(&s, &g, &m, &q).unwrap().scaled(g.h());
                assert!(relative_gap(&fd, &var).unwrap() < 1e-6, "{s:?}");
            }
        }
    }

    #[test]
    fn coherent_kinds() {
        let g = Grid::new(0.0, 1.0, 12).unwrap();
        let m = Harmonic::new(2);
        for s in all_schemes() {
            if s.kind() == SchemeKind::SymmetricClassical {
                continue;
            }
            let r = coherence_report(&s, &g, &m, 10, 1).unwrap();
            assert!(r.max_abs_discrepancy <= 1e-10, "{s:?}: {r:?}");
            assert_eq!(r.compared_indices, 1..=11);
            assert!(r.gradient_check_error < 1e-6);
        }
    }

    #[test]
    fn symmetric_kind_is_not_coherent() {
        let g = Grid::new(0.0, 4.0, 8).unwrap();
        for sigma in [Sigma::Minus, Sigma::Plus] {
            let s = EmbeddingScheme::symmetric(sigma);
            let r = coherence_report(&s, &g, &Harmonic::new(1), 20, 9).unwrap();
            assert!(r.max_abs_discrepancy > 0.1);
            let expect = match sigma {
                Sigma::Minus => 2..=7,
                Sigma::Plus => 1..=6,
            };
            assert_eq!(r.compared_indices, expect);
        }
        // N = 2 leaves no common index
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let s = EmbeddingScheme::symmetric(Sigma::Minus);
        assert!(coherence_report(&s, &g, &Harmonic::new(1), 1, 0).is_err());
    }

    #[test]
    fn coherence_report_is_deterministic() {
        let g = Grid::new(0.0, 1.0, 10).unwrap();
        let s = EmbeddingScheme::fractional(Sigma::Plus, 0.3).unwrap();
        let a = coherence_report(&s, &g, &Pendulum::new(2), 5, 42).unwrap();
        let b = coherence_report(&s, &g, &Pendulum::new(2), 5, 42).unwrap();
        assert_eq!(a, b);
        assert!(coherence_report(&s, &g, &Pendulum::new(2), 0, 42).is_err());
    }

    #[test]
    fn translation_shifts_harmonic_residuals_by_minus_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = Grid::new(0.0, 2.0, 10).unwrap();
        let m = Harmonic::new(3);
        let schemes = [
            EmbeddingScheme::symmetric(Sigma::Minus),
            EmbeddingScheme::asymmetric(Sigma::Plus),
            EmbeddingScheme::fractional(Sigma::Minus, 1.0).unwrap(),
        ];
        for s in schemes {
            let q = random_trajectory(&g, 3, &mut rng);
            let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let shifted = q.shifted(&c);
            type Route = fn(&EmbeddingScheme, &Grid, &Harmonic, &Trajectory) -> Result<Series>;
            let routes: [Route; 2] = [direct_residual, variational_residual];
            for f in routes {
                let r0 = f(&s, &g, &m, &q).unwrap();
                let r1 = f(&s, &g, &m, &shifted).unwrap();
                for (k, p) in r1.points() {
                    for i in 0..3 {
                        assert_abs_diff_eq!(p[i], r0.get(k)[i] - c[i], epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn shape_mismatches_rejected() {
        let g = Grid::new(0.0, 1.0, 4).unwrap();
        let s = EmbeddingScheme::asymmetric(Sigma::Minus);
        let m = Harmonic::new(1);
        assert!(matches!(
            variational_residual(&s, &g, &m, &traj(&[0.0; 4])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            direct_residual(&s, &g, &Harmonic::new(2), &traj(&[0.0; 5])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(action_gradient_fd(&s, &g, &m, &traj(&[0.0; 5]), 0.0).is_err());
    }

    #[test]
    fn friction_examples() {
        let g = Grid::with_step(1.0, 2).unwrap();
        let r = embed_friction_residual(&g, &traj(&[1.0, 1.0, 2.0 / 3.0])).unwrap();
        assert_eq!(r.range(), 2..=2);
        assert_abs_diff_eq!(r.get(2)[0], 0.0, epsilon = 1e-15);
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        let r = embed_friction_residual(&g, &traj(&[-0.7; 6])).unwrap();
        assert!(r.as_slice().iter().all(|&x| x == -0.7));
        let r = embed_friction_residual(&g, &traj(&[0.0; 6])).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }
}
