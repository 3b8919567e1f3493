use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use discrete_embedding::lagrangian::builtin;
use discrete_embedding::schemes::{coherence_report, variational_residual};
use discrete_embedding::solver::{
    fitted_order, harmonic_refinement, linear_interpolation, march_friction, solve_bvp, SolveConfig,
};
use discrete_embedding::{EmbeddingScheme, GlCoefficients, Grid, Lagrangian};
use thiserror::Error;

use crate::config::{Command, ConfigError, RunConfig, SchemeConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Library(#[from] discrete_embedding::Error),
    #[error("no convergence after {iterations} iterations: residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl RunError {
    pub fn status(&self) -> i32 {
        use discrete_embedding::Error as E;
        match self {
            RunError::Config(_) => 2,
            RunError::Library(
                E::SingularJacobian { .. } | E::SingularMatrix | E::StepFailed { .. },
            ) => 3,
            RunError::Library(_) => 2,
            RunError::NotConverged { .. } => 3,
            RunError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.status() {
            2 => "invalid-config",
            3 => "no-convergence",
            _ => "io",
        }
    }

    /// Single line: `error status=S kind=K [field=F] message="..."`.
    pub fn line(&self) -> String {
        let mut s = format!("error status={} kind={}", self.status(), self.kind());
        if let RunError::Config(c) = self {
            if let Some(f) = c.field() {
                let _ = write!(s, " field={f}");
            }
        }
        let _ = write!(s, " message={:?}", self.to_string());
        s
    }
}

fn stdout_err(e: io::Error) -> RunError {
    RunError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

/// Fixed 15-significant-digit float format used in every CSV cell.
pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

/// Executes `cfg`, writing the CSV to `cfg.out` (or `stdout`) followed by a
/// `#`-prefixed summary line on `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), RunError> {
    let mut csv = String::new();
    let outcome = produce(&cfg.command, &mut csv);
    // partial results are still written when the solver gives up
    let summary = match &outcome {
        Ok(s) => s.clone(),
        Err((s, _)) => s.clone(),
    };
    emit(&cfg.out, &csv, stdout)?;
    if !summary.is_empty() {
        writeln!(stdout, "# {summary}").map_err(stdout_err)?;
    }
    outcome.map(|_| ()).map_err(|(_, e)| e)
}

fn emit(out: &Option<PathBuf>, csv: &str, stdout: &mut dyn Write) -> Result<(), RunError> {
    if csv.is_empty() {
        return Ok(());
    }
    match out {
        Some(p) => fs::write(p, csv).map_err(|e| RunError::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => stdout.write_all(csv.as_bytes()).map_err(stdout_err),
    }
}

type Produced = Result<String, (String, RunError)>;

fn fail(e: impl Into<RunError>) -> (String, RunError) {
    (String::new(), e.into())
}

fn produce(cmd: &Command, csv: &mut String) -> Produced {
    match cmd {
        Command::Coeffs { alpha, n } => {
            let c = GlCoefficients::new(*alpha, *n).map_err(fail)?;
            csv.push_str("r,alpha_r\n");
            for (r, a) in c.coeffs().iter().enumerate() {
                let _ = writeln!(csv, "{r},{}", num(*a));
            }
            Ok(format!("coeffs alpha={alpha} n={n}"))
        }
        Command::Coherence {
            scheme,
            samples,
            seed,
        } => {
            let (s, g, m) = setup(scheme).map_err(fail)?;
            let rep = coherence_report(&s, &g, &m, *samples, *seed).map_err(fail)?;
            csv.push_str("kind,sigma,alpha,N,max_abs_discrepancy,gradient_check_error\n");
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                s.kind(),
                s.sigma(),
                num(s.alpha()),
                g.steps(),
                num(rep.max_abs_discrepancy),
                num(rep.gradient_check_error)
            );
            Ok(format!(
                "coherence max_abs_discrepancy={:e} gradient_check_error={:e} samples={} indices={}..={}",
                rep.max_abs_discrepancy,
                rep.gradient_check_error,
                rep.samples,
                rep.compared_indices.start(),
                rep.compared_indices.end()
            ))
        }
        Command::Solve {
            scheme,
            q0,
            qn,
            tol,
            max_iters,
            jacobian,
        } => {
            let (s, g, m) = setup(scheme).map_err(fail)?;
            let solve_cfg = SolveConfig {
                tol: *tol,
                max_iters: *max_iters,
                jacobian_mode: *jacobian,
                ..SolveConfig::default()
            };
            let init = linear_interpolation(&g, q0, qn).map_err(fail)?;
            let sol = solve_bvp(&s, &g, &m, q0, qn, &init, &solve_cfg).map_err(fail)?;
            let res = variational_residual(&s, &g, &m, &sol.trajectory).map_err(fail)?;
            let d = scheme.dim;
            csv.push_str("k,t_k");
            for c in 0..d {
                let _ = write!(csv, ",Q_{c}");
            }
            for c in 0..d {
                let _ = write!(csv, ",residual_{c}");
            }
            csv.push('\n');
            for (k, p) in sol.trajectory.points() {
                let _ = write!(csv, "{k},{}", num(g.t(k)));
                for x in p {
                    let _ = write!(csv, ",{}", num(*x));
                }
                // endpoints are fixed and carry no residual
                match res.try_get(k) {
                    Some(r) => r.iter().for_each(|x| {
                        let _ = write!(csv, ",{}", num(*x));
                    }),
                    None => csv.push_str(&",".repeat(d)),
                }
                csv.push('\n');
            }
            let summary = format!(
                "solve converged={} iterations={} residual_norm={:e}",
                sol.converged, sol.iterations, sol.residual_norm
            );
            if sol.converged {
                Ok(summary)
            } else {
                Err((
                    summary,
                    RunError::NotConverged {
                        iterations: sol.iterations,
                        residual: sol.residual_norm,
                    },
                ))
            }
        }
        Command::Converge { sigma, steps } => {
            let rows = harmonic_refinement(*sigma, steps).map_err(fail)?;
            csv.push_str("N,h,max_error\n");
            for (n, h, e) in &rows {
                let _ = writeln!(csv, "{n},{},{}", num(*h), num(*e));
            }
            Ok(format!("converge fitted_order={:.6}", fitted_order(&rows)))
        }
        Command::FrictionDemo { steps, h, q0, q1 } => {
            let g = Grid::with_step(*h, *steps).map_err(fail)?;
            let q = march_friction(&g, q0, q1).map_err(fail)?;
            csv.push_str("k,t_k");
            for c in 0..q0.len() {
                let _ = write!(csv, ",Q_{c}");
            }
            csv.push('\n');
            for (k, p) in q.points() {
                let _ = write!(csv, "{k},{}", num(g.t(k)));
                for x in p {
                    let _ = write!(csv, ",{}", num(*x));
                }
                csv.push('\n');
            }
            let last: Vec<String> = q.get(*steps).iter().map(|x| format!("{x:.6}")).collect();
            Ok(format!("Q_{steps} = {}", last.join(", ")))
        }
    }
}

fn setup(
    c: &SchemeConfig,
) -> Result<(EmbeddingScheme, Grid, Box<dyn Lagrangian + Send + Sync>), RunError> {
    let s = EmbeddingScheme::new(c.kind, c.sigma, c.alpha)?;
    let g = Grid::new(c.a, c.b, c.steps)?;
    let m = builtin(&c.model, c.dim).ok_or_else(|| ConfigError::Invalid {
        field: "model",
        message: format!("unknown model {:?}", c.model),
    })?;
    Ok((s, g, m))
}
