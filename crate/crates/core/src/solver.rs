//! Solvers for the discrete Euler-Lagrange systems.
//!
//! * [`solve_bvp`]: damped Newton on the interior nodes with both endpoints fixed.
//! * [`linear_oracle`]: direct solve of the affine interior system of a quadratic model.
//! * [`step_classical`]: forward marching of the three-point classical stencil.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Grid, Sigma};
use crate::lagrangian::{Hessian, Lagrangian};
use crate::schemes::{variational_residual, EmbeddingScheme, SchemeKind};
use crate::series::Trajectory;

const MAX_HALVINGS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// From the model's second derivatives; falls back to finite differences
    /// when the model has none.
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// Max-norm tolerance on the residual.
    pub tol: f64,
    pub max_iters: usize,
    pub jacobian_mode: JacobianMode,
    /// Forward-difference step for Jacobian columns.
    pub fd_eps: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 50,
            jacobian_mode: JacobianMode::Analytic,
            fd_eps: 1e-7,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::NonPositive {
                name: "tol",
                value: self.tol,
            });
        }
        if !(self.fd_eps.is_finite() && self.fd_eps > 0.0) {
            return Err(Error::NonPositive {
                name: "fd_eps",
                value: self.fd_eps,
            });
        }
        if self.max_iters == 0 {
            return Err(Error::NonPositive {
                name: "max_iters",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub trajectory: Trajectory,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Straight line from `q0` to `qn` on the grid nodes.
pub fn linear_interpolation(g: &Grid, q0: &[f64], qn: &[f64]) -> Result<Trajectory> {
    if q0.len() != qn.len() {
        return Err(Error::DimensionMismatch {
            expected: q0.len(),
            got: qn.len(),
        });
    }
    let n = g.steps();
    let mut data = Vec::with_capacity((n + 1) * q0.len());
    for k in 0..=n {
        let s = k as f64 / n as f64;
        data.extend(q0.iter().zip(qn).map(|(a, b)| a + s * (b - a)));
    }
    let mut q = Trajectory::new(q0.len(), data)?;
    q.get_mut(n).copy_from_slice(qn);
    Ok(q)
}

fn flat_residual(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(
        variational_residual(s, g, m, q)?.into_vec(),
    ))
}

fn max_norm(r: &DVector<f64>) -> f64 {
    r.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn fd_jacobian(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
    r0: &DVector<f64>,
    eps: f64,
) -> Result<DMatrix<f64>> {
    let n = r0.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = q.clone();
    for c in 0..n {
        let x = q.interior()[c];
        let step = eps * x.abs().max(1.0);
        probe.interior_mut()[c] = x + step;
        let r = flat_residual(s, g, m, &probe)?;
        probe.interior_mut()[c] = x;
        jac.set_column(c, &((r - r0) / step));
    }
    Ok(jac)
}

/// Jacobian of the variational residual from second derivatives, or `None`
/// when the model does not supply them.
///
/// With `R_i = Lx(i) + sum_j W(j,i) Lv(j)` and `v_j = sum_l W(j,l) Q_l`:
/// `dR_i/dQ_l = d_il Lxx(i) + W(i,l) Lxv(i) + sum_j W(j,i) (d_jl Lvx(j) + W(j,l) Lvv(j))`.
fn analytic_jacobian(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
) -> Result<Option<DMatrix<f64>>> {
    let n = g.steps();
    let d = q.dim();
    let stencil = s.stencil(g)?;
    let v = crate::schemes::discrete_velocity(s, g, q)?;
    let mut hess: Vec<Hessian> = Vec::with_capacity(v.len());
    for (k, vk) in v.points() {
        match m.hessian(q.get(k), vk, g.t(k)) {
            Some(h) => hess.push(h),
            None => return Ok(None),
        }
    }
    let hess_at = |k: usize| &hess[k - v.first()];
    let size = (n - 1) * d;
    let mut jac = DMatrix::zeros(size, size);
    let add_block =
        |jac: &mut DMatrix<f64>, i: usize, l: usize, w: f64, b: &DMatrix<f64>, transpose: bool| {
            if w == 0.0 {
                return;
            }
            for a in 0..d {
                for c in 0..d {
                    let e = if transpose { b[(c, a)] } else { b[(a, c)] };
                    jac[((i - 1) * d + a, (l - 1) * d + c)] += w * e;
                }
            }
        };
    for i in g.interior() {
        let h = hess_at(i);
        add_block(&mut jac, i, i, 1.0, &h.xx, false);
        for l in stencil.support(i) {
            if l >= 1 && l < n {
                add_block(&mut jac, i, l, stencil.weight(i, l), &h.xv, false);
            }
        }
    }
    for j in v.range() {
        let h = hess_at(j);
        for i in stencil.support(j) {
            if i == 0 || i == n {
                continue;
            }
            let wji = stencil.weight(j, i);
            if wji == 0.0 {
                continue;
            }
            if j >= 1 && j < n {
                add_block(&mut jac, i, j, wji, &h.xv, true);
            }
            for l in stencil.support(j) {
                if l >= 1 && l < n {
                    add_block(&mut jac, i, l, wji * stencil.weight(j, l), &h.vv, false);
                }
            }
        }
    }
    Ok(Some(jac))
}

fn jacobian(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q: &Trajectory,
    r0: &DVector<f64>,
    cfg: &SolveConfig,
) -> Result<DMatrix<f64>> {
    if cfg.jacobian_mode == JacobianMode::Analytic {
        if let Some(j) = analytic_jacobian(s, g, m, q)? {
            return Ok(j);
        }
    }
    fd_jacobian(s, g, m, q, r0, cfg.fd_eps)
}

fn check_boundary(m: &impl Lagrangian, q0: &[f64], qn: &[f64]) -> Result<()> {
    for end in [q0, qn] {
        if end.len() != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                got: end.len(),
            });
        }
    }
    Ok(())
}

/// Solves the variational residual for the interior nodes with `Q_0 = q0`,
/// `Q_N = qn`, starting from `init`.
///
/// Newton steps are halved up to 30 times until the residual max-norm
/// decreases. A stalled or exhausted iteration returns `converged = false`
/// with the best iterate; a singular Jacobian is an error.
pub fn solve_bvp(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q0: &[f64],
    qn: &[f64],
    init: &Trajectory,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    check_boundary(m, q0, qn)?;
    if init.steps() != g.steps() {
        return Err(Error::LengthMismatch {
            expected: g.steps() + 1,
            got: init.len(),
        });
    }
    if init.get(0) != q0 {
        return Err(Error::BoundaryMismatch { which: "q0" });
    }
    if init.get(g.steps()) != qn {
        return Err(Error::BoundaryMismatch { which: "qN" });
    }

    let mut q = init.clone();
    let mut r = flat_residual(s, g, m, &q)?;
    let mut norm = max_norm(&r);
    let mut iterations = 0;
    while norm > cfg.tol && iterations < cfg.max_iters {
        let jac = jacobian(s, g, m, &q, &r, cfg)?;
        let delta = jac
            .lu()
            .solve(&(-&r))
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or(Error::SingularJacobian {
                iteration: iterations,
            })?;
        iterations += 1;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = q.clone();
            for (x, dx) in trial.interior_mut().iter_mut().zip(delta.iter()) {
                *x += step * dx;
            }
            let rt = flat_residual(s, g, m, &trial)?;
            let nt = max_norm(&rt);
            if nt < norm {
                accepted = Some((trial, rt, nt));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, rt, nt)) => {
                q = trial;
                r = rt;
                norm = nt;
            }
            None => break,
        }
    }
    Ok(SolveResult {
        trajectory: q,
        residual_norm: norm,
        iterations,
        converged: norm <= cfg.tol,
    })
}

/// Exact solution of the interior system for a quadratic Lagrangian.
///
/// The residual is affine in the interior unknowns, so its matrix is
/// assembled column by column from residuals at unit vectors and solved by LU.
pub fn linear_oracle(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q0: &[f64],
    qn: &[f64],
) -> Result<Trajectory> {
    if !m.is_quadratic() {
        return Err(Error::NotQuadratic);
    }
    let (matrix, offset) = assemble_linear_system(s, g, m, q0, qn)?;
    let x = matrix
        .lu()
        .solve(&(-offset))
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(Error::SingularMatrix)?;
    let mut q = Trajectory::zeros(g.steps(), m.dim());
    q.get_mut(0).copy_from_slice(q0);
    q.get_mut(g.steps()).copy_from_slice(qn);
    q.interior_mut().copy_from_slice(x.as_slice());
    Ok(q)
}

/// `(A, r0)` with `residual(Q) = A x + r0`, `x` the flattened interior of `Q`.
pub fn assemble_linear_system(
    s: &EmbeddingScheme,
    g: &Grid,
    m: &impl Lagrangian,
    q0: &[f64],
    qn: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_boundary(m, q0, qn)?;
    let mut base = Trajectory::zeros(g.steps(), m.dim());
    base.get_mut(0).copy_from_slice(q0);
    base.get_mut(g.steps()).copy_from_slice(qn);
    let r0 = flat_residual(s, g, m, &base)?;
    let n = r0.len();
    let mut a = DMatrix::zeros(n, n);
    for c in 0..n {
        base.interior_mut()[c] = 1.0;
        let r = flat_residual(s, g, m, &base)?;
        base.interior_mut()[c] = 0.0;
        a.set_column(c, &(r - &r0));
    }
    Ok((a, r0))
}

/// Marches the classical backward-oriented stencil from `Q_0, Q_1`.
///
/// Node `k + 1` solves `Lx(k) + (Lv(k) - Lv(k+1)) / h = 0` with
/// `v_k = (Q_k - Q_{k-1}) / h`, by Newton from the extrapolation `2Q_k - Q_{k-1}`.
pub fn step_classical(
    g: &Grid,
    m: &impl Lagrangian,
    q0: &[f64],
    q1: &[f64],
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_boundary(m, q0, q1)?;
    let n = g.steps();
    let d = m.dim();
    let h = g.h();
    let mut q = Trajectory::zeros(n, d);
    q.get_mut(0).copy_from_slice(q0);
    q.get_mut(1).copy_from_slice(q1);

    let mut gx = vec![0.0; d];
    let mut pk = vec![0.0; d];
    let mut pn = vec![0.0; d];
    let mut vk = vec![0.0; d];
    let mut vn = vec![0.0; d];
    let mut res = vec![0.0; d];

    for k in 1..n {
        let (prev, cur) = (q.get(k - 1).to_vec(), q.get(k).to_vec());
        for c in 0..d {
            vk[c] = (cur[c] - prev[c]) / h;
        }
        m.grad_x(&cur, &vk, g.t(k), &mut gx);
        m.grad_v(&cur, &vk, g.t(k), &mut pk);
        let mut next: Vec<f64> = (0..d).map(|c| 2.0 * cur[c] - prev[c]).collect();

        let eval = |next: &[f64], vn: &mut [f64], pn: &mut [f64], res: &mut [f64]| {
            for c in 0..d {
                vn[c] = (next[c] - cur[c]) / h;
            }
            m.grad_v(next, vn, g.t(k + 1), pn);
            for c in 0..d {
                res[c] = gx[c] + (pk[c] - pn[c]) / h;
            }
        };

        eval(&next, &mut vn, &mut pn, &mut res);
        let mut norm = res.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let mut iters = 0;
        while norm > cfg.tol {
            if iters == cfg.max_iters {
                return Err(Error::StepFailed {
                    index: k + 1,
                    residual: norm,
                });
            }
            // d res / d Q_{k+1} = -(Lvx + Lvv / h) / h at node k + 1
            let jac = match (cfg.jacobian_mode, m.hessian(&next, &vn, g.t(k + 1))) {
                (JacobianMode::Analytic, Some(hs)) => -(hs.xv.transpose() + hs.vv / h) / h,
                _ => {
                    let mut jac = DMatrix::zeros(d, d);
                    let mut probe = next.clone();
                    let (mut vt, mut pt, mut rt) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
                    for c in 0..d {
                        let step = cfg.fd_eps * next[c].abs().max(1.0);
                        probe[c] = next[c] + step;
                        eval(&probe, &mut vt, &mut pt, &mut rt);
                        probe[c] = next[c];
                        for a in 0..d {
                            jac[(a, c)] = (rt[a] - res[a]) / step;
                        }
                    }
                    jac
                }
            };
            let delta = jac
                .lu()
                .solve(&DVector::from_iterator(d, res.iter().map(|x| -x)))
                .filter(|x| x.iter().all(|v| v.is_finite()))
                .ok_or(Error::StepFailed {
                    index: k + 1,
                    residual: norm,
                })?;
            for (x, dx) in next.iter_mut().zip(delta.iter()) {
                *x += dx;
            }
            eval(&next, &mut vn, &mut pn, &mut res);
            norm = res.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            iters += 1;
        }
        q.get_mut(k + 1).copy_from_slice(&next);
    }
    Ok(q)
}

/// Marches the backward-difference friction scheme
/// `(Q_k - 2Q_{k-1} + Q_{k-2})/h² + (Q_k - Q_{k-1})/h + Q_k = 0` from `Q_0, Q_1`.
pub fn march_friction(g: &Grid, q0: &[f64], q1: &[f64]) -> Result<Trajectory> {
    if q0.len() != q1.len() {
        return Err(Error::DimensionMismatch {
            expected: q0.len(),
            got: q1.len(),
        });
    }
    let h = g.h();
    let d = q0.len();
    let mut q = Trajectory::zeros(g.steps(), d);
    q.get_mut(0).copy_from_slice(q0);
    q.get_mut(1).copy_from_slice(q1);
    let diag = 1.0 / (h * h) + 1.0 / h + 1.0;
    for k in 2..=g.steps() {
        for c in 0..d {
            let (a, b) = (q.get(k - 2)[c], q.get(k - 1)[c]);
            q.get_mut(k)[c] = ((2.0 * b - a) / (h * h) + b / h) / diag;
        }
    }
    Ok(q)
}

/// Max-node error of the classical harmonic boundary-value solution against
/// `cos(t)` on `[0, 1]`, one row `(N, h, error)` per step count.
pub fn harmonic_refinement(sigma: Sigma, steps: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    let m = crate::lagrangian::Harmonic::new(1);
    let s = EmbeddingScheme::new(SchemeKind::AsymmetricClassical, sigma, 1.0)?;
    let mut rows = Vec::with_capacity(steps.len());
    for &n in steps {
        let g = Grid::new(0.0, 1.0, n)?;
        let (q0, qn) = ([1.0], [1.0_f64.cos()]);
        let init = linear_interpolation(&g, &q0, &qn)?;
        let sol = solve_bvp(&s, &g, &m, &q0, &qn, &init, &SolveConfig::default())?;
        if !sol.converged {
            return Err(Error::StepFailed {
                index: n,
                residual: sol.residual_norm,
            });
        }
        let err = sol
            .trajectory
            .points()
            .map(|(k, p)| (p[0] - g.t(k).cos()).abs())
            .fold(0.0_f64, f64::max);
        rows.push((n, g.h(), err));
    }
    Ok(rows)
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn fitted_order(rows: &[(usize, f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(_, h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
