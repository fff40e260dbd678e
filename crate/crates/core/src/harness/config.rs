//! Run configuration, read from strict JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::manufactured::RobinSign;
use crate::refelem::MAX_ORDER;
use crate::solve::{SolverChoice, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Solve,
    Convergence,
    Pollution,
    Trace,
    Surface,
    Coercivity,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::Convergence => "convergence",
            Experiment::Pollution => "pollution",
            Experiment::Trace => "trace",
            Experiment::Surface => "surface",
            Experiment::Coercivity => "coercivity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Radial benchmark on `[-0.5, 0.5]²` with `f = sin(kr)/r`.
    #[default]
    Bessel,
    /// `u = x + y` on the unit square; lies in every discrete space.
    Polynomial,
}

/// A single value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub choice: SolverChoice,
    /// CG stopping tolerance on the relative residual.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self { choice: d.choice, tolerance: d.cg_tolerance, max_iterations: d.cg_max_iterations }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    pub max_dofs: usize,
    /// Budget for the estimated Cholesky factor, in GiB.
    pub max_memory_gib: f64,
    pub probe_max_dofs: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_dofs: 500_000, max_memory_gib: 8.0, probe_max_dofs: crate::metrics::PROBE_MAX_DOFS }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Self { max_dofs: usize::MAX, max_memory_gib: f64::INFINITY, probe_max_dofs: usize::MAX }
    }

    pub fn max_factor_bytes(&self) -> u64 {
        let b = self.max_memory_gib * (1u64 << 30) as f64;
        if b >= u64::MAX as f64 {
            u64::MAX
        } else {
            b as u64
        }
    }
}

fn default_sigma() -> i64 {
    -1
}
fn default_samples() -> usize {
    2048
}
fn default_grid() -> usize {
    64
}
fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub problem: ProblemKind,
    pub k: OneOrMany<f64>,
    pub p_plus_1: OneOrMany<usize>,
    /// Cells per side; exclusive with `ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<OneOrMany<usize>>,
    /// Target mesh condition `k h / (p+1) <= ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Robin sign in `∂u/∂n - σ i k u = g`.
    #[serde(default = "default_sigma")]
    pub sigma: i64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Points along the trace line.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub trace_y: f64,
    /// Points per side of the surface grid.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub limits: Limits,
    /// Also write the assembled matrix and rhs (solve only).
    #[serde(default, skip_serializing_if = "is_default")]
    pub dump_system: bool,
}

/// How meshes are chosen for each `(k, p+1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshPlan {
    Cells(Vec<usize>),
    Ratio(f64),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn ks(&self) -> Vec<f64> {
        self.k.to_vec()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.p_plus_1.to_vec()
    }

    pub fn robin_sign(&self) -> Result<RobinSign> {
        RobinSign::from_value(self.sigma).map_err(|_| Error::Config(format!("sigma must be 1 or -1, got {}", self.sigma)))
    }

    pub fn mesh_plan(&self) -> Result<MeshPlan> {
        match (&self.n, self.ratio) {
            (Some(n), None) => Ok(MeshPlan::Cells(n.to_vec())),
            (None, Some(c)) => Ok(MeshPlan::Ratio(c)),
            (Some(_), Some(_)) => Err(Error::Config("give either `n` or `ratio`, not both".into())),
            (None, None) => Err(Error::Config("one of `n` or `ratio` is required".into())),
        }
    }

    pub fn solver_options(&self, limits: &Limits) -> SolverOptions {
        SolverOptions {
            choice: self.solver.choice,
            cg_tolerance: self.solver.tolerance,
            cg_max_iterations: self.solver.max_iterations,
            max_factor_bytes: limits.max_factor_bytes(),
        }
    }

    /// SHA-256 of the canonical (compact) JSON form, in hex.
    pub fn hash(&self) -> Result<String> {
        let canonical = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&canonical)))
    }

    pub fn validate(&self) -> Result<()> {
        let ks = self.ks();
        if ks.is_empty() {
            return Err(Error::Config("`k` must not be empty".into()));
        }
        if let Some(k) = ks.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
            return Err(Error::Config(format!("`k` entries must be positive, got {k}")));
        }
        let ps = self.orders();
        if ps.is_empty() {
            return Err(Error::Config("`p_plus_1` must not be empty".into()));
        }
        if let Some(p) = ps.iter().find(|p| **p == 0 || **p > MAX_ORDER) {
            return Err(Error::Config(format!("`p_plus_1` entries must lie in 1..={MAX_ORDER}, got {p}")));
        }
        match self.mesh_plan()? {
            MeshPlan::Cells(ns) => {
                if ns.is_empty() {
                    return Err(Error::Config("`n` must not be empty".into()));
                }
                if ns.contains(&0) {
                    return Err(Error::Config("`n` entries must be at least 1".into()));
                }
            }
            MeshPlan::Ratio(c) => {
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::Config(format!("`ratio` must be positive, got {c}")));
                }
            }
        }
        self.robin_sign()?;
        if !(self.solver.tolerance > 0.0) {
            return Err(Error::Config(format!("`solver.tolerance` must be positive, got {}", self.solver.tolerance)));
        }
        if self.samples == 0 || self.grid == 0 {
            return Err(Error::Config("`samples` and `grid` must be positive".into()));
        }
        if let Some(e) = self.experiment {
            self.validate_for(e)?;
        }
        Ok(())
    }

    /// Checks that depend on the experiment being run.
    pub fn validate_for(&self, experiment: Experiment) -> Result<()> {
        let single = |what: &str, len: usize| {
            if len != 1 {
                Err(Error::Config(format!("{} needs a single `{what}`, got {len}", experiment.name())))
            } else {
                Ok(())
            }
        };
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(Error::Config(format!("config is for `{}`, not `{}`", e.name(), experiment.name())));
            }
        }
        match experiment {
            Experiment::Solve | Experiment::Trace | Experiment::Surface => {
                single("k", self.ks().len())?;
                single("p_plus_1", self.orders().len())?;
                if let MeshPlan::Cells(ns) = self.mesh_plan()? {
                    single("n", ns.len())?;
                }
            }
            Experiment::Convergence => {
                single("k", self.ks().len())?;
                if !matches!(self.mesh_plan()?, MeshPlan::Cells(_)) {
                    return Err(Error::Config("convergence needs an `n` list".into()));
                }
            }
            Experiment::Pollution => {
                if !matches!(self.mesh_plan()?, MeshPlan::Ratio(_)) {
                    return Err(Error::Config("pollution needs a mesh `ratio`".into()));
                }
            }
            Experiment::Coercivity => {}
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_json(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"k": 5, "p_plus_1": [1, 2], "n": [8, 16]}"#;

    #[test]
    fn minimal_round_trip() {
        let a = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(a.sigma, -1);
        assert_eq!(a.limits.max_dofs, 500_000);
        let b = RunConfig::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_json(r#"{"k": 5, "p_plus_1": 1, "n": 4, "mesh_sizee": 3}"#).unwrap_err();
        assert!(err.to_string().contains("mesh_sizee"), "{err}");
        let err = RunConfig::from_json(r#"{"k": 5, "p_plus_1": 1, "n": 4, "solver": {"tol": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("tol"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            r#"{"k": [], "p_plus_1": 1, "n": 4}"#,
            r#"{"k": 5, "p_plus_1": [], "n": 4}"#,
            r#"{"k": 5, "p_plus_1": 1, "n": []}"#,
            r#"{"k": 5, "p_plus_1": 5, "n": 4}"#,
            r#"{"k": 5, "p_plus_1": 1, "ratio": 0}"#,
            r#"{"k": 5, "p_plus_1": 1}"#,
            r#"{"k": 5, "p_plus_1": 1, "n": 4, "ratio": 0.5}"#,
            r#"{"k": 5, "p_plus_1": 1, "n": 4, "sigma": 2}"#,
            r#"{"k": -1, "p_plus_1": 1, "n": 4}"#,
            r#"{"experiment": "convergence", "k": 5, "p_plus_1": 1, "ratio": 0.5}"#,
            r#"{"experiment": "solve", "k": [5, 6], "p_plus_1": 1, "n": 4}"#,
        ] {
            assert!(RunConfig::from_json(bad).is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn experiment_mismatch() {
        let cfg = RunConfig::from_json(r#"{"experiment": "pollution", "k": [5], "p_plus_1": 1, "ratio": 0.5}"#).unwrap();
        assert!(cfg.validate_for(Experiment::Pollution).is_ok());
        assert!(cfg.validate_for(Experiment::Solve).is_err());
    }
}
