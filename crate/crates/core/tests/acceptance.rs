//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p discrete-embedding --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use discrete_embedding::grid::{Grid, Sigma};
use discrete_embedding::lagrangian::{Bilinear, Harmonic, Lagrangian, Pendulum};
use discrete_embedding::operators::{
    backward_diff, forward_diff, gl_left, gl_right, GlCoefficients,
};
use discrete_embedding::schemes::embed_friction_residual;
use discrete_embedding::schemes::{
    action_gradient_fd, direct_residual, discrete_action, discrete_velocity, random_trajectory,
    relative_gap, variational_residual, EmbeddingScheme,
};
use discrete_embedding::series::Trajectory;
use discrete_embedding::solver::{
    fitted_order, harmonic_refinement, linear_interpolation, linear_oracle, march_friction,
    solve_bvp, step_classical, SolveConfig,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const COHERENCE_TOL: f64 = 1e-10;
const WITNESS_MIN: f64 = 0.1;
const PAIRING_REL_TOL: f64 = 1e-6;
const REDUCTION_TOL: f64 = 1e-12;
const TELESCOPING_REL_TOL: f64 = 1e-12;
const GL_REL_TOL: f64 = 1e-14;
const ORACLE_TOL: f64 = 1e-8;
const ORDER_BAND: (f64, f64) = (0.8, 1.2);
const BOUNDEDNESS: f64 = 2.0;

type Outcome = Result<String, String>;

fn sigmas() -> [Sigma; 2] {
    [Sigma::Minus, Sigma::Plus]
}

fn within(elapsed: Duration, limit_s: f64, detail: String) -> Outcome {
    if elapsed.as_secs_f64() < limit_s {
        Ok(format!(
            "{detail}, {:.3}s < {limit_s}s",
            elapsed.as_secs_f64()
        ))
    } else {
        Err(format!(
            "{detail}, runtime {:.3}s exceeds {limit_s}s",
            elapsed.as_secs_f64()
        ))
    }
}

/// Max |direct - variational| over seeded random trajectories, on common indices.
fn scan_discrepancy(s: &EmbeddingScheme, g: &Grid, dim: usize, samples: usize, seed: u64) -> f64 {
    let m = Harmonic::new(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let q = random_trajectory(g, dim, &mut rng);
        let d = direct_residual(s, g, &m, &q).unwrap();
        let v = variational_residual(s, g, &m, &q).unwrap();
        let lo = *d.range().start().max(v.range().start());
        let hi = *d.range().end().min(v.range().end());
        let gap = d
            .restrict(lo..=hi)
            .unwrap()
            .max_abs_diff(&v.restrict(lo..=hi).unwrap())
            .unwrap();
        worst = worst.max(gap);
    }
    worst
}

fn c1_asymmetric_coherence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for sigma in sigmas() {
        for n in [8, 32] {
            for dim in [1, 3] {
                let g = Grid::new(0.0, 1.0, n).unwrap();
                let s = EmbeddingScheme::asymmetric(sigma);
                worst = worst.max(scan_discrepancy(&s, &g, dim, 100, 1));
            }
        }
    }
    let detail = format!("max discrepancy {worst:.3e} (tol {COHERENCE_TOL:e})");
    if worst > COHERENCE_TOL {
        return Err(detail);
    }
    within(start.elapsed(), 1.0, detail)
}

fn c2_fractional_coherence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for sigma in sigmas() {
        for alpha in [0.25, 0.5, 0.75] {
            for n in [8, 32, 64] {
                for dim in [1, 3] {
                    let g = Grid::new(0.0, 1.0, n).unwrap();
                    let s = EmbeddingScheme::fractional(sigma, alpha).unwrap();
                    worst = worst.max(scan_discrepancy(&s, &g, dim, 100, 2));
                }
            }
        }
    }
    let detail = format!("max discrepancy {worst:.3e} (tol {COHERENCE_TOL:e})");
    if worst > COHERENCE_TOL {
        return Err(detail);
    }
    within(start.elapsed(), 5.0, detail)
}

fn c3_symmetric_witness() -> Outcome {
    let start = Instant::now();
    // N = 8, h = 0.5
    let g = Grid::with_step(0.5, 8).unwrap();
    let mut found = f64::INFINITY;
    for sigma in sigmas() {
        let s = EmbeddingScheme::symmetric(sigma);
        found = found.min(scan_discrepancy(&s, &g, 1, 100, 3));
    }
    let detail = format!("smallest per-sigma max discrepancy {found:.3} (need >= {WITNESS_MIN})");
    if found < WITNESS_MIN {
        return Err(detail);
    }
    within(start.elapsed(), 1.0, detail)
}

fn c4_gradient_pairing() -> Outcome {
    let start = Instant::now();
    let g = Grid::new(0.0, 1.0, 16).unwrap();
    let mut schemes = vec![];
    for sigma in sigmas() {
        schemes.push(EmbeddingScheme::symmetric(sigma));
        schemes.push(EmbeddingScheme::asymmetric(sigma));
        for alpha in [0.25, 0.5, 1.0] {
            schemes.push(EmbeddingScheme::fractional(sigma, alpha).unwrap());
        }
    }
    let models: Vec<Box<dyn Lagrangian>> =
        vec![Box::new(Harmonic::new(2)), Box::new(Pendulum::new(2))];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    for s in &schemes {
        for m in &models {
            for _ in 0..20 {
                let q = random_trajectory(&g, m.dim(), &mut rng);
                let fd = action_gradient_fd(s, &g, m, &q, 1e-5).unwrap();
                let var = variational_residual(s, &g, m, &q).unwrap().scaled(g.h());
                worst = worst.max(relative_gap(&fd, &var).unwrap());
            }
        }
    }
    let detail = format!(
        "{} schemes x 2 models x 20 trajectories, max relative gap {worst:.3e} (tol {PAIRING_REL_TOL:e})",
        schemes.len()
    );
    if worst > PAIRING_REL_TOL {
        return Err(detail);
    }
    within(start.elapsed(), 10.0, detail)
}

fn c5_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for n in [2, 5, 17, 64] {
        let g = Grid::new(-0.5, 1.5, n).unwrap();
        let c = GlCoefficients::new(1.0, n).unwrap();
        for dim in [1, 3] {
            let m = Pendulum::new(dim);
            for _ in 0..10 {
                let q = random_trajectory(&g, dim, &mut rng);
                worst = worst.max(
                    gl_left(&q, g.h(), &c)
                        .unwrap()
                        .max_abs_diff(&backward_diff(&q, g.h()).unwrap())
                        .unwrap(),
                );
                worst = worst.max(
                    gl_right(&q, g.h(), &c)
                        .unwrap()
                        .max_abs_diff(&forward_diff(&q, g.h()).unwrap())
                        .unwrap(),
                );
                for sigma in sigmas() {
                    let a = EmbeddingScheme::asymmetric(sigma);
                    let f = EmbeddingScheme::fractional(sigma, 1.0).unwrap();
                    worst = worst.max(
                        discrete_velocity(&f, &g, &q)
                            .unwrap()
                            .max_abs_diff(&discrete_velocity(&a, &g, &q).unwrap())
                            .unwrap(),
                    );
                    worst = worst.max(
                        (discrete_action(&f, &g, &m, &q).unwrap()
                            - discrete_action(&a, &g, &m, &q).unwrap())
                        .abs(),
                    );
                    worst = worst.max(
                        direct_residual(&f, &g, &m, &q)
                            .unwrap()
                            .max_abs_diff(&direct_residual(&a, &g, &m, &q).unwrap())
                            .unwrap(),
                    );
                    worst = worst.max(
                        variational_residual(&f, &g, &m, &q)
                            .unwrap()
                            .max_abs_diff(&variational_residual(&a, &g, &m, &q).unwrap())
                            .unwrap(),
                    );
                }
            }
        }
    }
    let detail = format!("max deviation {worst:.3e} (tol {REDUCTION_TOL:e})");
    if worst > REDUCTION_TOL {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn c6_telescoping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let n = [2, 7, 32, 64, 100][i % 5];
        let g = Grid::new(0.0, 3.0, n).unwrap();
        let q = random_trajectory(&g, 2, &mut rng);
        for sigma in sigmas() {
            let s = EmbeddingScheme::asymmetric(sigma);
            let v = discrete_velocity(&s, &g, &q).unwrap();
            let total = g.quadrature_series(sigma, &v).unwrap();
            let scale = q.max_abs();
            for (c, t) in total.iter().enumerate() {
                let exact = q.get(n)[c] - q.get(0)[c];
                worst = worst.max((t - exact).abs() / scale);
            }
        }
    }
    let detail = format!("max relative error {worst:.3e} (tol {TELESCOPING_REL_TOL:e})");
    if worst > TELESCOPING_REL_TOL {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn exact_gl(num: i64, den: i64, n: usize) -> Vec<BigRational> {
    let alpha = BigRational::new(BigInt::from(num), BigInt::from(den));
    let mut out = vec![BigRational::from_integer(BigInt::from(1))];
    for r in 1..=n {
        let factor = (BigRational::from_integer(BigInt::from(r as i64 - 1)) - &alpha)
            / BigRational::from_integer(BigInt::from(r as i64));
        let next = &out[r - 1] * factor;
        out.push(next);
    }
    out
}

fn c7_gl_table() -> Outcome {
    let n = 256;
    let mut worst = 0.0_f64;
    for (num, den) in [(1, 4), (1, 2), (3, 4)] {
        let alpha = num as f64 / den as f64;
        let c = GlCoefficients::new(alpha, n).unwrap();
        let exact = exact_gl(num, den, n);
        for (r, e) in exact.iter().enumerate() {
            let e = e.to_f64().unwrap();
            worst = worst.max(((c.get(r) - e) / e).abs());
        }
        if c.get(0) != 1.0 || c.get(1) != -alpha {
            return Err(format!("alpha {alpha}: leading coefficients wrong"));
        }
        for r in 1..=n {
            if c.get(r) >= 0.0 {
                return Err(format!("alpha {alpha}: coefficient {r} not negative"));
            }
            if r >= 2 && c.get(r).abs() >= c.get(r - 1).abs() {
                return Err(format!("alpha {alpha}: |alpha_{r}| not decreasing"));
            }
        }
    }
    let detail = format!("max relative error vs exact rationals {worst:.3e} (tol {GL_REL_TOL:e})");
    if worst > GL_REL_TOL {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn c8_solver_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    let mut count = 0;
    let cfg = SolveConfig::default();
    for n in [2, 8, 33, 64] {
        let g = Grid::new(0.0, 1.0, n).unwrap();
        for sigma in sigmas() {
            let mut schemes = vec![
                EmbeddingScheme::symmetric(sigma),
                EmbeddingScheme::asymmetric(sigma),
            ];
            for alpha in [0.25, 0.5, 1.0] {
                schemes.push(EmbeddingScheme::fractional(sigma, alpha).unwrap());
            }
            let models: Vec<Box<dyn Lagrangian>> =
                vec![Box::new(Harmonic::new(2)), Box::new(Bilinear::new(1))];
            for s in &schemes {
                for m in &models {
                    let ends = random_trajectory(&g, m.dim(), &mut rng);
                    let (q0, qn) = (ends.get(0), ends.get(n));
                    let init = linear_interpolation(&g, q0, qn).unwrap();
                    let sol = solve_bvp(s, &g, m, q0, qn, &init, &cfg).unwrap();
                    if !sol.converged {
                        return Err(format!("{s:?} N={n}: Newton did not converge"));
                    }
                    let exact = linear_oracle(s, &g, m, q0, qn).unwrap();
                    worst = worst.max(sol.trajectory.max_abs_diff(&exact).unwrap());
                    count += 1;
                }
            }
        }
    }
    // stepping vs boundary-value route
    let mut step_gap = 0.0_f64;
    for n in [10, 40, 64] {
        let g = Grid::new(0.0, 2.0, n).unwrap();
        let m = Harmonic::new(2);
        let stepped = step_classical(&g, &m, &[1.0, -0.3], &[0.98, -0.25], &cfg).unwrap();
        let (q0, qn) = (stepped.get(0).to_vec(), stepped.get(n).to_vec());
        let init = linear_interpolation(&g, &q0, &qn).unwrap();
        let s = EmbeddingScheme::asymmetric(Sigma::Minus);
        let sol = solve_bvp(&s, &g, &m, &q0, &qn, &init, &cfg).unwrap();
        step_gap = step_gap.max(sol.trajectory.max_abs_diff(&stepped).unwrap());
    }
    let detail = format!(
        "{count} Newton/oracle pairs max gap {worst:.3e}, stepping/BVP gap {step_gap:.3e} (tol {ORACLE_TOL:e})"
    );
    if worst > ORACLE_TOL || step_gap > ORACLE_TOL {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn c9_friction() -> Outcome {
    let g = Grid::with_step(1.0, 2).unwrap();
    let q = march_friction(&g, &[1.0], &[1.0]).unwrap();
    let root = q.get(2)[0];
    let at_root = embed_friction_residual(
        &g,
        &Trajectory::from_scalars(&[1.0, 1.0, 2.0 / 3.0]).unwrap(),
    )
    .unwrap()
    .get(2)[0];
    let mut worst_const = 0.0_f64;
    let g = Grid::new(0.0, 1.0, 12).unwrap();
    for c in [-2.0, 0.0, 0.37, 5.0] {
        let r = embed_friction_residual(&g, &Trajectory::from_scalars(&[c; 13]).unwrap()).unwrap();
        worst_const = worst_const.max(
            r.as_slice()
                .iter()
                .fold(0.0_f64, |m, x| m.max((x - c).abs())),
        );
    }
    let detail = format!(
        "Q_2 = {root:.15}, residual at 2/3 = {at_root:.1e}, constant-trajectory deviation {worst_const:.1e}"
    );
    if (root - 2.0 / 3.0).abs() > 1e-15 || at_root.abs() > 1e-15 || worst_const != 0.0 {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn c10_refinement() -> Outcome {
    let start = Instant::now();
    let rows = harmonic_refinement(Sigma::Minus, &[8, 16, 32, 64]).unwrap();
    let order = fitted_order(&rows);
    let decreasing = rows.windows(2).all(|w| w[1].2 < w[0].2);

    let h = 0.1;
    let g = Grid::with_step(h, 10_000).unwrap();
    let q = step_classical(
        &g,
        &Harmonic::new(1),
        &[1.0],
        &[h.cos()],
        &SolveConfig::default(),
    )
    .unwrap();
    let peak = q.max_abs();

    let errs: Vec<String> = rows
        .iter()
        .map(|(n, _, e)| format!("N={n}:{e:.2e}"))
        .collect();
    let detail = format!(
        "errors [{}], fitted order {order:.3} (band [{}, {}]), max|Q_k| over 1e4 steps {peak:.6} (<= {BOUNDEDNESS})",
        errs.join(" "),
        ORDER_BAND.0,
        ORDER_BAND.1
    );
    if !decreasing || !(ORDER_BAND.0..=ORDER_BAND.1).contains(&order) || peak > BOUNDEDNESS {
        return Err(detail);
    }
    within(start.elapsed(), 5.0, detail)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "C1 asymmetric classical embedding is coherent",
            c1_asymmetric_coherence,
        ),
        (
            "C2 Grunwald-Letnikov embedding is coherent",
            c2_fractional_coherence,
        ),
        (
            "C3 symmetric embedding non-coherence witness",
            c3_symmetric_witness,
        ),
        (
            "C4 discrete variational principle (gradient pairing)",
            c4_gradient_pairing,
        ),
        ("C5 reduction at alpha = 1", c5_reduction),
        ("C6 telescoping identity", c6_telescoping),
        ("C7 GL coefficient table", c7_gl_table),
        ("C8 solver oracle equivalence", c8_solver_oracles),
        ("C9 friction scheme", c9_friction),
        ("C10 refinement order and boundedness", c10_refinement),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
