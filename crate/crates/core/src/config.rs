//! Declarative TOML experiment configs.
//!
//! ```toml
//! name = "worst_ell20"
//! trials = 10
//! seed = 0
//! grid = [100, 1000, 10000, 20000, 30000]
//! methods = ["GD", "BF-SSD"]
//!
//! [problem]
//! kind = "worst"
//!
//! [params]            # shared optimizer settings
//! subdim = 20
//!
//! [method.BF-SSD]     # per-method overrides, merged over [params]
//! linesearch = { shrink = 0.9 }
//! ```
//!
//! Overrides given as `dotted.key=value` are applied to the parsed document
//! before it is interpreted, so they obey the same validation as the file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::bench::{default_grid, ExperimentSpec, MethodRun};
use crate::error::{Error, Result};
use crate::optimizers::{Method, OptimizerConfig};
use crate::problems::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Equivalent-HF budget; defaults to the last grid point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    /// Reporting grid; defaults depend on the problem kind.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub log_y: bool,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub params: Table,
    #[serde(default)]
    pub method: BTreeMap<String, Table>,
}

fn default_trials() -> usize {
    10
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

/// Splits `a.b.c=value`; the value is read as a TOML literal and falls back
/// to a bare string.
pub fn parse_override(s: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{s}` is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(|p| p.trim().to_string()).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::config(format!("override `{s}` has an empty key segment")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((path, value))
}

/// Sets `path` in `root`, creating intermediate tables.
pub fn apply_override(root: &mut Table, path: &[String], value: Value) -> Result<()> {
    let (last, parents) = path
        .split_last()
        .ok_or_else(|| Error::config("empty override key"))?;
    let mut table = root;
    for (depth, seg) in parents.iter().enumerate() {
        let entry = table
            .entry(seg.clone())
            .or_insert_with(|| Value::Table(Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            Error::config(format!("`{}` is not a table", path[..=depth].join(".")))
        })?;
    }
    table.insert(last.clone(), value);
    Ok(())
}

fn merge(base: &mut Table, over: &Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config(e.message().to_string()))?;
        for o in overrides {
            let (path, value) = parse_override(o)?;
            apply_override(&mut doc, &path, value)?;
        }
        let cfg = ExperimentConfig::deserialize(Value::Table(doc))
            .map_err(|e| Error::config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, overrides)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize config: {e}")))
    }

    fn validate(&self) -> Result<()> {
        for reserved in ["method", "budget"] {
            if self.params.contains_key(reserved) {
                return Err(Error::config(format!(
                    "params.{reserved} is not allowed; set it at the top level"
                )));
            }
        }
        for (name, section) in &self.method {
            name.parse::<Method>()?;
            if section.contains_key("method") || section.contains_key("budget") {
                return Err(Error::config(format!(
                    "method.{name} may not set `method` or `budget`"
                )));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods is empty"));
        }
        Ok(())
    }

    /// Optimizer config for `m`: defaults, then `[params]`, then the method's
    /// own section.
    pub fn optimizer_config(&self, m: Method, budget: f64) -> Result<OptimizerConfig> {
        let mut t = self.params.clone();
        for (name, section) in &self.method {
            if name.parse::<Method>()? == m {
                merge(&mut t, section);
            }
        }
        t.insert("method".into(), Value::String(m.name().into()));
        t.insert("budget".into(), Value::Float(budget));
        OptimizerConfig::deserialize(Value::Table(t))
            .map_err(|e| Error::config(format!("method {m}: {}", e.message())))
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.grid.is_empty() {
            default_grid(&self.problem)
        } else {
            self.grid.clone()
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget
            .unwrap_or_else(|| self.grid().last().copied().unwrap_or(0.0))
    }

    pub fn experiment(&self) -> Result<ExperimentSpec> {
        let budget = self.budget();
        let runs = self
            .methods
            .iter()
            .map(|m| self.optimizer_config(*m, budget).map(MethodRun::new))
            .collect::<Result<Vec<_>>>()?;
        let spec = ExperimentSpec {
            name: self.name.clone(),
            problem: self.problem.clone(),
            runs,
            trials: self.trials,
            seed: self.seed,
            budget,
            grid: self.grid(),
            workers: self.workers,
        };
        spec.validate()?;
        Ok(spec)
    }
}
