//! Line-based `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Every key may appear once.
//! Missing physical constants default to the reference configuration
//! (c1 = 1, d = 0.1, ρ = 1, c = 1, constant vertical force).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_body_force, derive_constants, BodyForceModel, ForceDescription, ModelParams, Mode};
use crate::nonlinear::NewtonOptions;

const KEYS: &[&str] = &[
    "d",
    "c1",
    "rho",
    "c",
    "force.kind",
    "force.table_path",
    "mode",
    "c2",
    "c3",
    "tolerances",
    "epsilon0",
    "xi_max",
    "eigen.n",
    "newton.tol",
    "newton.max_iter",
];

/// Parameters plus the stage options a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub force: ForceDescription,
    /// Resolved path of the force table, for tabulated forces.
    pub table_path: Option<PathBuf>,
    /// Grid intervals of the eigen-solvers.
    pub eigen_n: usize,
    pub newton: NewtonOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let params = ModelParams::reference();
        Self {
            force: ForceDescription::constant(params.c1),
            params,
            table_path: None,
            eigen_n: 1024,
            newton: NewtonOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn body_force(&self) -> Result<BodyForceModel> {
        build_body_force(&self.force)
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Parsed {
    path: PathBuf,
    entries: BTreeMap<String, Entry>,
}

impl Parsed {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(self.err(e.line, format!("{key}: expected a finite number, got '{}'", e.value))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .parse::<usize>()
            .map(Some)
            .map_err(|_| self.err(e.line, format!("{key}: expected a nonnegative integer, got '{}'", e.value)))
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.number(key)?.unwrap_or(default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(self.line(key), format!("{key} must be positive, got {v}")))
        }
    }
}

fn tokenize(text: &str, path: &Path) -> Result<Parsed> {
    let mut parsed = Parsed {
        path: path.to_path_buf(),
        entries: BTreeMap::new(),
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parsed.err(line, format!("expected 'key = value', got '{content}'")));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(parsed.err(line, format!("unknown key '{key}'")));
        }
        if let Some(first) = parsed.entries.get(key) {
            return Err(parsed.err(
                line,
                format!("duplicate key '{key}' (first set on line {})", first.line),
            ));
        }
        parsed.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(parsed)
}

/// Parses configuration text; `path` is used for messages and to resolve a
/// relative force table path.
pub fn parse_config_str(text: &str, path: &Path) -> Result<RunConfig> {
    let p = tokenize(text, path)?;
    let defaults = RunConfig::default();
    let reference = defaults.params;

    let d = p.positive("d", reference.d)?;
    let c1 = p.positive("c1", reference.c1)?;
    let rho = p.positive("rho", reference.rho)?;
    let c = p.positive("c", reference.c)?;
    let tol = p.positive("tolerances", reference.tol)?;
    let epsilon0 = p.positive("epsilon0", reference.epsilon0)?;
    let xi_max = p.positive("xi_max", reference.xi_max)?;

    let mode = match p.entries.get("mode").map(|e| e.value.as_str()) {
        None | Some("physical") => Mode::Physical,
        Some("abstract") => Mode::Abstract,
        Some(other) => {
            return Err(p.err(p.line("mode"), format!("mode must be 'physical' or 'abstract', got '{other}'")))
        }
    };

    let kind = p.entries.get("force.kind").map_or("constant", |e| e.value.as_str());
    let table_path = p.entries.get("force.table_path").map(|e| {
        let rel = PathBuf::from(&e.value);
        match path.parent() {
            Some(dir) if rel.is_relative() => dir.join(rel),
            _ => rel,
        }
    });
    let force = match kind {
        "constant" | "constant_vertical" => {
            if table_path.is_some() {
                return Err(p.err(p.line("force.table_path"), "force.table_path given for a constant force"));
            }
            ForceDescription::constant(c1)
        }
        "tabulated" => {
            let Some(tp) = &table_path else {
                return Err(p.err(p.line("force.kind"), "tabulated force needs force.table_path"));
            };
            ForceDescription::tabulated(crate::io::read_force_table(tp)?)
        }
        other => return Err(p.err(p.line("force.kind"), format!("unknown force kind '{other}'"))),
    };

    let mut params = ModelParams::physical(d, c1)
        .with_density(rho)
        .with_wave_speed(c)
        .with_xi_range(epsilon0, xi_max);
    params.tol = tol;
    let (c2, c3) = (p.number("c2")?, p.number("c3")?);
    match mode {
        Mode::Physical => {
            let (dc2, dc3) = derive_constants(&build_body_force(&force)?, &params)?;
            let scale = c1.max(1.0);
            for (key, given, derived) in [("c2", c2, dc2), ("c3", c3, dc3)] {
                if let Some(v) = given {
                    if (v - derived).abs() > tol * scale {
                        return Err(p.err(
                            p.line(key),
                            format!("{key} = {v} contradicts physical mode, which derives {key} = {derived}"),
                        ));
                    }
                }
            }
            params = params.with_constants(dc2, dc3);
        }
        Mode::Abstract => {
            let c2 = c2.ok_or_else(|| p.err(0, "c2 required in abstract mode"))?;
            let c3 = c3.ok_or_else(|| p.err(0, "c3 required in abstract mode"))?;
            params = ModelParams::abstract_constants(d, c1, c2, c3)
                .with_density(rho)
                .with_wave_speed(c)
                .with_xi_range(epsilon0, xi_max);
            params.tol = tol;
        }
    }
    params.validate().map_err(|e| p.err(0, e.to_string()))?;

    let eigen_n = p.count("eigen.n")?.unwrap_or(defaults.eigen_n);
    let newton = NewtonOptions {
        tol: p.positive("newton.tol", defaults.newton.tol)?,
        max_iter: p.count("newton.max_iter")?.unwrap_or(defaults.newton.max_iter),
        ..defaults.newton
    };
    Ok(RunConfig {
        params,
        force,
        table_path,
        eigen_n,
        newton,
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}
