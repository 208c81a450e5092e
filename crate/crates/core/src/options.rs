//! Numerical tolerances and solver knobs.
//!
//! Defaults can be overridden from the environment with variables prefixed
//! `SWEEP_` (`SWEEP_TOL_FEAS`, `SWEEP_TOL_PROJ`, `SWEEP_TOL_ACTIVE`,
//! `SWEEP_DEDUP_RADIUS`, `SWEEP_MULTISTART`, `SWEEP_SEED`).

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::{Error, Result};

/// Membership slack for iteratively projected sets.
pub const TOL_FEAS: f64 = 1e-9;
/// Absolute coordinate tolerance on projections.
pub const TOL_PROJ: f64 = 1e-8;
/// Band in which a contact or wall constraint counts as active.
pub const TOL_ACTIVE: f64 = 1e-8;
/// Minimizers closer than this are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Relative cost gap under which two local minima count as tied.
pub const TIE_RELATIVE: f64 = 1e-6;
/// Number of multistart seeds for nonconvex projections.
pub const MULTISTART: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub feas: f64,
    pub proj: f64,
    pub active: f64,
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: TOL_FEAS,
            proj: TOL_PROJ,
            active: TOL_ACTIVE,
            dedup: DEDUP_RADIUS,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("feas", self.feas),
            ("proj", self.proj),
            ("active", self.active),
            ("dedup", self.dedup),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: Tolerances,
    pub multistart: usize,
    pub seed: u64,
    pub execution: Execution,
    /// Iteration cap for the sequential linearization in disk projections.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: Tolerances::default(),
            multistart: MULTISTART,
            seed: 0,
            execution: Execution::default(),
            max_iterations: 500,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Applies `SWEEP_*` overrides from the process environment.
    pub fn from_env(self) -> Result<Self> {
        self.apply_overrides(|key| std::env::var(key).ok())
    }

    /// Applies overrides from an arbitrary key lookup (the environment in
    /// production, a map in tests).
    pub fn apply_overrides(mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        fn parse<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
            raw.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("cannot parse {key}={raw:?}")))
        }
        let fields: [(&str, &mut f64); 4] = [
            ("SWEEP_TOL_FEAS", &mut self.tol.feas),
            ("SWEEP_TOL_PROJ", &mut self.tol.proj),
            ("SWEEP_TOL_ACTIVE", &mut self.tol.active),
            ("SWEEP_DEDUP_RADIUS", &mut self.tol.dedup),
        ];
        for (key, slot) in fields {
            if let Some(raw) = lookup(key) {
                *slot = parse(key, &raw)?;
            }
        }
        if let Some(raw) = lookup("SWEEP_MULTISTART") {
            self.multistart = parse("SWEEP_MULTISTART", &raw)?;
        }
        if let Some(raw) = lookup("SWEEP_SEED") {
            self.seed = parse("SWEEP_SEED", &raw)?;
        }
        self.tol.validate()?;
        if self.multistart == 0 {
            return Err(Error::invalid("SWEEP_MULTISTART must be at least 1"));
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn overrides_replace_defaults() {
        let env: HashMap<&str, &str> =
            [("SWEEP_TOL_FEAS", "1e-7"), ("SWEEP_MULTISTART", "4")].into_iter().collect();
        let opts = SolverOptions::default()
            .apply_overrides(|k| env.get(k).map(|s| s.to_string()))
            .unwrap();
        assert_eq!(opts.tol.feas, 1e-7);
        assert_eq!(opts.multistart, 4);
        assert_eq!(opts.tol.proj, TOL_PROJ);
    }

    #[test]
    fn bad_override_is_rejected() {
        let r = SolverOptions::default().apply_overrides(|k| {
            (k == "SWEEP_TOL_PROJ").then(|| "-1".to_string())
        });
        assert!(r.is_err());
    }
}
