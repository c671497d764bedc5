//! Scenario configuration: JSON schema, validation and resolution into
//! library values.
//!
//! Series literals use the `tmotive::parse` grammar, where T stands for theta. A lattice
//! basis entry `{"pi": a, "add": b}` stands for a * pi~ + b, since most useful
//! periods are not finite Laurent series in T.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;
use tmotive::analytic::carlitz_pi;
use tmotive::parse::parse_series;
use tmotive::{CInf, FieldConfig, Rat};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario {scenario:?}: {msg}")]
    Invalid { scenario: String, msg: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u32,
    pub f: u32,
    pub s: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSpec {
    /// Nominal precision P in theta-digits.
    pub theta_prec: i64,
    /// Truncation degree in t for Tate-algebra series.
    pub t_degree: usize,
    /// Upper bound on the AGF truncation level; the level itself is chosen
    /// from the measured decay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agf_level: Option<usize>,
    /// Degree guard as a rational string; defaults to P/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
    /// Working precision; defaults to 6P + 60.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_scale: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub add: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModuleSpec {
    Lattice { basis: Vec<BasisEntry> },
    Carlitz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaSpec {
    pub betas: Vec<String>,
}

/// Parameters of the symbolic tasks (frames, dual_frames, asp).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolicSpec {
    /// Ranks to check; defaults to the lattice rank, or 2 and 3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    pub e: Vec<usize>,
    /// Characteristic of the coefficient ring; 0 works over Z.
    pub char: u32,
    pub goldens: bool,
}

impl Default for SymbolicSpec {
    fn default() -> Self {
        SymbolicSpec { ranks: None, e: vec![0, 1], char: 0, goldens: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<ModuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaSpec>,
    #[serde(default)]
    pub symbolic: SymbolicSpec,
    pub tasks: Vec<String>,
}

/// A config file holds one scenario or `{"scenarios": [...]}`.
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigFile {
    Single(ScenarioConfig),
    Batch(Vec<ScenarioConfig>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchSpec {
    scenarios: Vec<ScenarioConfig>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<ConfigFile, ConfigError> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.get("scenarios").is_some() {
            Ok(ConfigFile::Batch(serde_json::from_value::<BatchSpec>(v)?.scenarios))
        } else {
            Ok(ConfigFile::Single(serde_json::from_value(v)?))
        }
    }

    pub fn load(path: &Path) -> Result<ConfigFile, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        ConfigFile::from_json(&text)
    }

    pub fn scenarios(self) -> Vec<ScenarioConfig> {
        match self {
            ConfigFile::Single(c) => vec![c],
            ConfigFile::Batch(v) => v,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Symbolic {
    pub ranks: Vec<usize>,
    pub es: Vec<usize>,
    pub char: u32,
    pub goldens: bool,
}

impl Symbolic {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.ranks.iter().flat_map(|&r| self.es.iter().map(move |&e| (r, e))).collect()
    }
}

#[derive(Clone, Debug)]
pub enum Module {
    Carlitz,
    Lattice(Vec<CInf>),
}

#[derive(Clone, Debug)]
pub struct Numeric {
    pub field: FieldConfig,
    pub prec: i64,
    pub work: i64,
    pub guard: Rat,
    pub t_deg: usize,
    pub agf_level: Option<usize>,
    pub max_scale: u32,
    pub module: Option<Module>,
    pub betas: Option<Vec<CInf>>,
}

/// A validated config with every literal parsed.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub symbolic: Symbolic,
    pub numeric: Option<Numeric>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub(crate) fn invalid(&self, msg: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { scenario: self.name.clone(), msg: msg.into() }
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        if self.tasks.is_empty() {
            return Err(self.invalid("no tasks"));
        }
        let numeric = match (&self.field, &self.precision) {
            (Some(f), Some(p)) => Some(self.resolve_numeric(f, p)?),
            (None, None) => None,
            _ => return Err(self.invalid("field and precision must be given together")),
        };
        if numeric.is_none() && (self.module.is_some() || self.delta.is_some()) {
            return Err(self.invalid("module and delta need field and precision"));
        }
        let lattice_rank = match numeric.as_ref().and_then(|n| n.module.as_ref()) {
            Some(Module::Lattice(b)) => Some(b.len()),
            _ => None,
        };
        let s = &self.symbolic;
        let ranks = s.ranks.clone().unwrap_or_else(|| lattice_rank.map_or(vec![2, 3], |r| vec![r]));
        if ranks.iter().any(|&r| r < 2) {
            return Err(self.invalid("symbolic ranks must be at least 2"));
        }
        let symbolic = Symbolic { ranks, es: s.e.clone(), char: s.char, goldens: s.goldens };
        Ok(Resolved { symbolic, numeric })
    }

    fn resolve_numeric(&self, f: &FieldSpec, p: &PrecisionSpec) -> Result<Numeric, ConfigError> {
        let field = FieldConfig::new(f.p, f.f, f.s).map_err(|e| self.invalid(format!("field: {e}")))?;
        if p.theta_prec <= 0 || p.t_degree == 0 {
            return Err(self.invalid("precision must be positive"));
        }
        let work = p.work.unwrap_or(6 * p.theta_prec + 60);
        if work < p.theta_prec {
            return Err(self.invalid("working precision below theta_prec"));
        }
        let guard = match &p.guard {
            Some(g) => g.parse::<Rat>().map_err(|_| self.invalid(format!("guard {g:?} is not a rational")))?,
            None => Rat::new(p.theta_prec, 2),
        };
        if guard <= Rat::from_integer(0) {
            return Err(self.invalid("guard must be positive"));
        }
        let series = |s: &str| -> Result<CInf, ConfigError> {
            parse_series(&field, s).map_err(|e| self.invalid(format!("series {s:?}: {e}")))
        };
        let module = match &self.module {
            None => None,
            Some(ModuleSpec::Carlitz) => Some(Module::Carlitz),
            Some(ModuleSpec::Lattice { basis }) => {
                let pi = carlitz_pi(&field, work + 80).map_err(|e| self.invalid(e.to_string()))?;
                let mut out = Vec::new();
                for b in basis {
                    let mut w = CInf::zero(&field);
                    if let Some(s) = &b.pi {
                        w = w.add(&series(s)?.mul(&pi));
                    }
                    if let Some(s) = &b.add {
                        w = w.add(&series(s)?);
                    }
                    out.push(w);
                }
                if out.len() < 2 {
                    return Err(self.invalid("a lattice needs rank at least 2"));
                }
                Some(Module::Lattice(out))
            }
        };
        let betas = match &self.delta {
            None => None,
            Some(d) => {
                let b = d.betas.iter().map(|s| series(s)).collect::<Result<Vec<_>, _>>()?;
                match &module {
                    Some(Module::Lattice(basis)) if b.len() + 1 == basis.len() => {}
                    Some(Module::Lattice(basis)) => {
                        return Err(self.invalid(format!("rank {} needs {} betas", basis.len(), basis.len() - 1)))
                    }
                    _ => return Err(self.invalid("delta needs a lattice module")),
                }
                Some(b)
            }
        };
        Ok(Numeric {
            field,
            prec: p.theta_prec,
            work,
            guard,
            t_deg: p.t_degree,
            agf_level: p.agf_level,
            max_scale: p.max_scale.unwrap_or(16),
            module,
            betas,
        })
    }
}
