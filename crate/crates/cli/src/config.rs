//! Experiment configuration: a JSON file merged with command-line overrides,
//! validated before any computation.

use std::path::{Path, PathBuf};

use lcmg_spectra::{Error, GroupElement, GroupModel, QuotientChain, Result, RingElement, Schedule};
use serde::Deserialize;
use serde_json::Value;

use crate::expr;

/// A ring element given either as an expression or as a JSON term list.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Expr(String),
    Terms(Value),
}

impl ElementSpec {
    pub fn build(&self, model: &GroupModel) -> Result<RingElement<GroupElement>> {
        match self {
            Self::Expr(s) => expr::parse(s, model),
            Self::Terms(v) => RingElement::from_json(model, v),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Text(String),
    Range { min: f64, max: f64, count: usize },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    pub dim: Option<usize>,
    pub table: Option<Vec<Vec<usize>>>,
    pub schedule: Option<String>,
    pub base: Option<u64>,
    pub levels: Option<usize>,
    pub moduli: Option<Vec<u64>>,
    pub subgroups: Option<Vec<Vec<usize>>>,
    pub w: Option<ElementSpec>,
    pub z: Option<ElementSpec>,
    pub grid: Option<GridSpec>,
    pub k: Option<usize>,
    pub radius: Option<usize>,
    pub modulus: Option<u64>,
    pub level: Option<usize>,
    pub order_cap: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
    }

    /// Fills unset fields from `other`.
    pub fn or(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            model: self.model.or(other.model),
            dim: self.dim.or(other.dim),
            table: self.table.or(other.table),
            schedule: self.schedule.or(other.schedule),
            base: self.base.or(other.base),
            levels: self.levels.or(other.levels),
            moduli: self.moduli.or(other.moduli),
            subgroups: self.subgroups.or(other.subgroups),
            w: self.w.or(other.w),
            z: self.z.or(other.z),
            grid: self.grid.or(other.grid),
            k: self.k.or(other.k),
            radius: self.radius.or(other.radius),
            modulus: self.modulus.or(other.modulus),
            level: self.level.or(other.level),
            order_cap: self.order_cap.or(other.order_cap),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
        }
    }

    pub fn model(&self) -> Result<GroupModel> {
        let spec = self.model.as_deref().ok_or_else(|| Error::Config("no model given (use --model)".into()))?;
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        match name {
            "lattice" | "Z" => {
                let dim = match arg {
                    Some(a) => a.parse().map_err(|_| Error::Config(format!("bad lattice rank {a:?}")))?,
                    None => self.dim.unwrap_or(1),
                };
                if dim == 0 {
                    return Err(Error::Config("lattice rank must be at least 1".into()));
                }
                Ok(GroupModel::lattice(dim))
            }
            "heisenberg" if arg.is_none() => Ok(GroupModel::Heisenberg),
            "finite" if arg.is_none() => {
                let table = self.table.clone().ok_or_else(|| Error::Config("finite model needs \"table\"".into()))?;
                GroupModel::finite(table).map_err(|e| Error::Config(format!("bad multiplication table: {e}")))
            }
            _ => Err(Error::Config(format!("unknown model {spec:?}; expected lattice:d, heisenberg or finite"))),
        }
    }

    /// The quotient chain. A single `modulus` overrides the schedule.
    pub fn chain(&self, model: &GroupModel) -> Result<QuotientChain> {
        if let Some(m) = self.modulus {
            return QuotientChain::new(model.clone(), Schedule::Moduli(vec![m]));
        }
        let default = if matches!(model, GroupModel::Finite(_)) { "subgroups" } else { "powers" };
        match self.schedule.as_deref().unwrap_or(default) {
            "powers" => QuotientChain::powers(model.clone(), self.base.unwrap_or(2), self.levels.unwrap_or(4)),
            "moduli" => {
                let moduli = self.moduli.clone().ok_or_else(|| Error::Config("schedule \"moduli\" needs \"moduli\"".into()))?;
                let mut moduli = moduli;
                if let Some(n) = self.levels {
                    moduli.truncate(n);
                }
                QuotientChain::new(model.clone(), Schedule::Moduli(moduli))
            }
            "subgroups" => {
                let subgroups =
                    self.subgroups.clone().ok_or_else(|| Error::Config("schedule \"subgroups\" needs \"subgroups\"".into()))?;
                QuotientChain::new(model.clone(), Schedule::Subgroups(subgroups))
            }
            other => Err(Error::Config(format!("unknown schedule {other:?}; expected powers, moduli or subgroups"))),
        }
    }

    pub fn w(&self, model: &GroupModel) -> Result<Option<RingElement<GroupElement>>> {
        self.w.as_ref().map(|s| s.build(model)).transpose()
    }

    /// `z` as given, or `w·w*`.
    pub fn z(&self, model: &GroupModel) -> Result<RingElement<GroupElement>> {
        match (&self.z, self.w(model)?) {
            (Some(z), _) => z.build(model),
            (None, Some(w)) => w.times_adjoint(model),
            (None, None) => Err(Error::Config("no ring element given (use --w or --z)".into())),
        }
    }

    /// λ grid; defaults to 101 points on `[0, Σ|λ_g|]`, which contains the
    /// support of the distribution function of `w`.
    pub fn grid(&self, w: &RingElement<GroupElement>) -> Result<Vec<f64>> {
        let (min, max, count) = match &self.grid {
            None => {
                let l1: f64 = w.terms().map(|(_, c)| c.norm()).sum();
                (0.0, if l1 > 0.0 { l1 } else { 1.0 }, 101)
            }
            Some(GridSpec::Range { min, max, count }) => (*min, *max, *count),
            Some(GridSpec::Text(s)) => parse_grid(s)?,
        };
        if !(min.is_finite() && max.is_finite()) || min < 0.0 || max < min {
            return Err(Error::Config(format!("grid needs 0 <= min <= max, got {min}:{max}")));
        }
        if count == 0 || count > 100_000 {
            return Err(Error::Config(format!("grid count must be in 1..=100000, got {count}")));
        }
        if count == 1 {
            return Ok(vec![min]);
        }
        Ok((0..count).map(|i| min + (max - min) * i as f64 / (count - 1) as f64).collect())
    }
}

pub fn parse_grid(s: &str) -> Result<(f64, f64, usize)> {
    let bad = || Error::Config(format!("grid must look like min:max:count, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        n.trim().parse().map_err(|_| bad())?,
    ))
}
