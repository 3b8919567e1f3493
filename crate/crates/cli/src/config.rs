use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use discrete_embedding::lagrangian::BUILTIN_MODELS;
use discrete_embedding::solver::JacobianMode;
use discrete_embedding::{SchemeKind, Sigma};
use thiserror::Error;

#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, help: &'static str) -> Key {
    Key { name, help }
}

const OUT: Key = key("out", "write the CSV here instead of standard output");
const KIND: Key = key(
    "kind",
    "scheme: symmetric-classical, asymmetric-classical or fractional (required)",
);
const SIGMA: Key = key("sigma", "orientation, - or + [default: -]");
const ALPHA: Key = key(
    "alpha",
    "derivative order in (0,1]; required for fractional, must be 1 for classical kinds",
);
const A: Key = key("a", "left end of the time interval [default: 0]");
const B: Key = key("b", "right end of the time interval [default: 1]");
const STEPS: Key = key("N", "number of grid steps, at least 2 [default: 32]");
const MODEL: Key = key(
    "model",
    "built-in Lagrangian: harmonic, bilinear-test or pendulum [default: harmonic]",
);
const DIM: Key = key(
    "dim",
    "configuration dimension [default: 1, or the length of q0]",
);

pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
}

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "coeffs",
        about: "Grünwald-Letnikov coefficient table",
        keys: &[
            key("alpha", "derivative order in (0,1] (required)"),
            key("n", "highest coefficient index (required)"),
            OUT,
        ],
    },
    CommandSpec {
        name: "coherence",
        about: "Compare direct and variational residuals on seeded random trajectories",
        keys: &[
            KIND,
            SIGMA,
            ALPHA,
            A,
            B,
            STEPS,
            MODEL,
            DIM,
            key("samples", "number of random trajectories [default: 100]"),
            key("seed", "RNG seed [default: 0]"),
            OUT,
        ],
    },
    CommandSpec {
        name: "solve",
        about: "Solve the two-point boundary-value problem of a discrete scheme",
        keys: &[
            KIND,
            SIGMA,
            ALPHA,
            A,
            B,
            STEPS,
            MODEL,
            DIM,
            key("q0", "left boundary value, comma separated (required)"),
            key("qN", "right boundary value, comma separated (required)"),
            key(
                "tol",
                "Newton tolerance on the residual max-norm [default: 1e-10]",
            ),
            key("max_iters", "Newton iteration limit [default: 50]"),
            key("jacobian", "analytic or fd [default: analytic]"),
            OUT,
        ],
    },
    CommandSpec {
        name: "converge",
        about: "Error of the classical harmonic solution against cos(t) under refinement",
        keys: &[
            key("model", "only harmonic is supported [default: harmonic]"),
            SIGMA,
            key("Ns", "comma-separated step counts [default: 8,16,32,64]"),
            OUT,
        ],
    },
    CommandSpec {
        name: "friction-demo",
        about: "March the embedded linear friction equation from two initial values",
        keys: &[
            key("N", "number of steps, at least 2 [default: 2]"),
            key("h", "step size [default: 1]"),
            key("q0", "first value, comma separated (required)"),
            key("q1", "second value, comma separated (required)"),
            OUT,
        ],
    },
];

pub fn command_spec(name: &str) -> Option<&'static CommandSpec> {
    COMMANDS.iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("unknown key {key:?} for {command}")]
    UnknownKey { command: &'static str, key: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: key {key:?} repeated")]
    Duplicate { line: usize, key: String },
    #[error("missing required fields: {}", .0.join(", "))]
    Missing(Vec<&'static str>),
    #[error("{field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

impl ConfigError {
    /// Offending field(s), comma separated.
    pub fn field(&self) -> Option<String> {
        match self {
            ConfigError::UnknownKey { key, .. } | ConfigError::Duplicate { key, .. } => {
                Some(key.clone())
            }
            ConfigError::Missing(f) => Some(f.join(",")),
            ConfigError::Invalid { field, .. } => Some(field.to_string()),
            _ => None,
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::Duplicate {
                line: i + 1,
                key: k.to_string(),
            });
        }
    }
    Ok(map)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub sigma: Sigma,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub steps: usize,
    pub model: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Coeffs {
        alpha: f64,
        n: usize,
    },
    Coherence {
        scheme: SchemeConfig,
        samples: usize,
        seed: u64,
    },
    Solve {
        scheme: SchemeConfig,
        q0: Vec<f64>,
        qn: Vec<f64>,
        tol: f64,
        max_iters: usize,
        jacobian: JacobianMode,
    },
    Converge {
        sigma: Sigma,
        steps: Vec<usize>,
    },
    FrictionDemo {
        steps: usize,
        h: f64,
        q0: Vec<f64>,
        q1: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Coeffs { .. } => "coeffs",
            Command::Coherence { .. } => "coherence",
            Command::Solve { .. } => "solve",
            Command::Converge { .. } => "converge",
            Command::FrictionDemo { .. } => "friction-demo",
        }
    }
}

struct Fields<'a> {
    map: &'a BTreeMap<String, String>,
    missing: Vec<&'static str>,
}

impl Fields<'_> {
    fn raw(&self, field: &'static str) -> Option<&str> {
        self.map.get(field).map(String::as_str)
    }

    fn opt<T>(&self, field: &'static str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.raw(field)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| invalid(field, format!("cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    fn or<T>(&self, field: &'static str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.opt(field)?.unwrap_or(default))
    }

    /// Records a missing field instead of failing, so all of them can be
    /// reported at once.
    fn required<T>(&mut self, field: &'static str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let v = self.opt(field)?;
        if v.is_none() {
            self.missing.push(field);
        }
        Ok(v)
    }

    fn required_list(&mut self, field: &'static str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(field) {
            None => {
                self.missing.push(field);
                Ok(None)
            }
            Some(v) => parse_list(field, v).map(Some),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if self.missing.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Missing(self.missing))
        }
    }
}

fn parse_list<T>(field: &'static str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    let out = v
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| invalid(field, format!("cannot parse {s:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err(invalid(field, "empty list"));
    }
    Ok(out)
}

fn check_alpha(alpha: f64) -> Result<f64, ConfigError> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(alpha)
    } else {
        Err(invalid("alpha", format!("must lie in (0,1], got {alpha}")))
    }
}

fn check_positive(field: &'static str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(
            field,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

fn check_steps(field: &'static str, n: usize) -> Result<usize, ConfigError> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(invalid(field, format!("must be at least 2, got {n}")))
    }
}

fn check_finite(field: &'static str, xs: &[f64]) -> Result<(), ConfigError> {
    match xs.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(invalid(field, format!("must be finite, got {x}"))),
        None => Ok(()),
    }
}

fn parse_sigma(f: &Fields) -> Result<Sigma, ConfigError> {
    f.or("sigma", Sigma::Minus)
}

fn parse_scheme(
    f: &mut Fields,
    dim_hint: Option<usize>,
) -> Result<Option<SchemeConfig>, ConfigError> {
    let kind: Option<SchemeKind> = f.required("kind")?;
    let sigma = parse_sigma(f)?;
    let alpha: Option<f64> = f.opt("alpha")?;
    let alpha = match (kind, alpha) {
        (_, Some(a)) => {
            let a = check_alpha(a)?;
            if kind.is_some_and(SchemeKind::is_classical) && a != 1.0 {
                return Err(invalid(
                    "alpha",
                    format!("classical kinds require alpha = 1, got {a}"),
                ));
            }
            a
        }
        (Some(SchemeKind::Fractional), None) => {
            f.missing.push("alpha");
            1.0
        }
        _ => 1.0,
    };
    let a: f64 = f.or("a", 0.0)?;
    let b: f64 = f.or("b", 1.0)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("a", "interval ends must be finite"));
    }
    if b <= a {
        return Err(invalid("b", format!("must exceed a = {a}, got {b}")));
    }
    let steps = check_steps("N", f.or("N", 32)?)?;
    let model: String = f.or("model", "harmonic".to_string())?;
    if !BUILTIN_MODELS.contains(&model.as_str()) {
        return Err(invalid(
            "model",
            format!(
                "unknown model {model:?}; expected one of {}",
                BUILTIN_MODELS.join(", ")
            ),
        ));
    }
    let dim: usize = f.or("dim", dim_hint.unwrap_or(1))?;
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    Ok(kind.map(|kind| SchemeConfig {
        kind,
        sigma,
        alpha,
        a,
        b,
        steps,
        model,
        dim,
    }))
}

/// Builds a [`RunConfig`] from merged key-value pairs. Every key must belong
/// to `command`; defaults fill the rest.
pub fn parse_config(
    command: &str,
    map: &BTreeMap<String, String>,
) -> Result<RunConfig, ConfigError> {
    let spec = command_spec(command).ok_or_else(|| ConfigError::UnknownCommand(command.into()))?;
    if let Some(k) = map
        .keys()
        .find(|k| !spec.keys.iter().any(|s| s.name == k.as_str()))
    {
        return Err(ConfigError::UnknownKey {
            command: spec.name,
            key: k.clone(),
        });
    }
    let mut f = Fields {
        map,
        missing: Vec::new(),
    };
    let out = f.opt::<PathBuf>("out")?;

    let cmd = match spec.name {
        "coeffs" => {
            let alpha = f.required::<f64>("alpha")?.map(check_alpha).transpose()?;
            let n = f.required::<usize>("n")?;
            f.finish()?;
            Command::Coeffs {
                alpha: alpha.unwrap(),
                n: n.unwrap(),
            }
        }
        "coherence" => {
            let scheme = parse_scheme(&mut f, None)?;
            let samples: usize = f.or("samples", 100)?;
            if samples == 0 {
                return Err(invalid("samples", "must be at least 1"));
            }
            let seed = f.or("seed", 0u64)?;
            f.finish()?;
            Command::Coherence {
                scheme: scheme.unwrap(),
                samples,
                seed,
            }
        }
        "solve" => {
            let q0 = f.required_list("q0")?;
            let qn = f.required_list("qN")?;
            let scheme = parse_scheme(&mut f, q0.as_ref().map(Vec::len))?;
            let tol = check_positive("tol", f.or("tol", 1e-10)?)?;
            let max_iters: usize = f.or("max_iters", 50)?;
            if max_iters == 0 {
                return Err(invalid("max_iters", "must be at least 1"));
            }
            let jacobian = match f.raw("jacobian").unwrap_or("analytic") {
                "analytic" => JacobianMode::Analytic,
                "fd" | "finite-difference" => JacobianMode::FiniteDifference,
                other => {
                    return Err(invalid(
                        "jacobian",
                        format!("expected analytic or fd, got {other:?}"),
                    ))
                }
            };
            f.finish()?;
            let (scheme, q0, qn) = (scheme.unwrap(), q0.unwrap(), qn.unwrap());
            for (field, q) in [("q0", &q0), ("qN", &qn)] {
                check_finite(field, q)?;
                if q.len() != scheme.dim {
                    return Err(invalid(
                        field,
                        format!("has {} components, dim is {}", q.len(), scheme.dim),
                    ));
                }
            }
            Command::Solve {
                scheme,
                q0,
                qn,
                tol,
                max_iters,
                jacobian,
            }
        }
        "converge" => {
            let model = f.raw("model").unwrap_or("harmonic");
            if model != "harmonic" {
                return Err(invalid(
                    "model",
                    format!("only harmonic has a reference solution, got {model:?}"),
                ));
            }
            let sigma = parse_sigma(&f)?;
            let steps = match f.raw("Ns") {
                Some(v) => parse_list("Ns", v)?,
                None => vec![8, 16, 32, 64],
            };
            if steps.len() < 2 {
                return Err(invalid(
                    "Ns",
                    "need at least two step counts to fit an order",
                ));
            }
            for &n in &steps {
                check_steps("Ns", n)?;
            }
            Command::Converge { sigma, steps }
        }
        "friction-demo" => {
            let steps = check_steps("N", f.or("N", 2)?)?;
            let h = check_positive("h", f.or("h", 1.0)?)?;
            let q0 = f.required_list("q0")?;
            let q1 = f.required_list("q1")?;
            f.finish()?;
            let (q0, q1) = (q0.unwrap(), q1.unwrap());
            check_finite("q0", &q0)?;
            check_finite("q1", &q1)?;
            if q1.len() != q0.len() {
                return Err(invalid(
                    "q1",
                    format!("has {} components, q0 has {}", q1.len(), q0.len()),
                ));
            }
            Command::FrictionDemo { steps, h, q0, q1 }
        }
        _ => unreachable!("command table and dispatch disagree"),
    };
    Ok(RunConfig { command: cmd, out })
}
