//! Solver configuration and its `key=value` text form.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// How general linear rows `A x <= b` are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearMode {
    /// Rows become ordinary inequalities inside the merit function; bounds stay hard.
    Penalty,
    /// Rows stay hard and poll directions follow the epsilon-tangent cone.
    Conforming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierMode {
    Logds,
    /// Merit is `f` on the feasible set and `+inf` elsewhere.
    ExtremeBarrier,
}

impl FromStr for LinearMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "penalty" => Ok(LinearMode::Penalty),
            "conforming" => Ok(LinearMode::Conforming),
            _ => Err(Error::Config(format!("linear_mode must be penalty or conforming, got `{s}`"))),
        }
    }
}

impl FromStr for BarrierMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logds" => Ok(BarrierMode::Logds),
            "extreme_barrier" | "extreme-barrier" => Ok(BarrierMode::ExtremeBarrier),
            _ => Err(Error::Config(format!(
                "barrier_mode must be logds or extreme_barrier, got `{s}`"
            ))),
        }
    }
}

impl LinearMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinearMode::Penalty => "penalty",
            LinearMode::Conforming => "conforming",
        }
    }
}

impl BarrierMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BarrierMode::Logds => "logds",
            BarrierMode::ExtremeBarrier => "extreme_barrier",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub alpha0: f64,
    /// Step contraction on unsuccessful iterations.
    pub theta_alpha: f64,
    /// Step expansion on successful iterations.
    pub phi: f64,
    pub gamma: f64,
    pub nu: f64,
    pub beta: f64,
    pub zeta: f64,
    pub rho0_log: f64,
    pub eps_active: f64,
    pub max_evals: usize,
    pub alpha_min: f64,
    pub max_iter: u64,
    pub linear_mode: LinearMode,
    pub search_enabled: bool,
    pub barrier_mode: BarrierMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha0: 1.0,
            theta_alpha: 0.5,
            phi: 1.0,
            gamma: 1e-9,
            nu: 2.0,
            beta: 1.0 + 1e-9,
            zeta: 1e-2,
            rho0_log: 1e-1,
            eps_active: 1e-5,
            max_evals: 2000,
            alpha_min: 1e-8,
            max_iter: 1_000_000,
            linear_mode: LinearMode::Penalty,
            search_enabled: true,
            barrier_mode: BarrierMode::Logds,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "alpha0",
    "theta_alpha",
    "phi",
    "gamma",
    "nu",
    "beta",
    "zeta",
    "rho0_log",
    "eps_active",
    "max_evals",
    "alpha_min",
    "max_iter",
    "linear_mode",
    "search_enabled",
    "barrier_mode",
];

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.alpha0) {
            return bad("alpha0 must be positive");
        }
        if !(self.theta_alpha > 0.0 && self.theta_alpha < 1.0) {
            return bad("theta_alpha must lie in (0, 1)");
        }
        if !(self.phi >= 1.0 && self.phi.is_finite()) {
            return bad("phi must be at least 1");
        }
        if !pos(self.eps_active) {
            return bad("eps_active must be positive");
        }
        if !pos(self.alpha_min) {
            return bad("alpha_min must be positive");
        }
        if self.max_evals == 0 {
            return bad("max_evals must be positive");
        }
        crate::merit::check_params(self.rho0_log, 1.0, self.nu, self.gamma, self.beta, self.zeta)
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let float = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: expected a number, got `{value}`")))
        };
        match key {
            "alpha0" => self.alpha0 = float()?,
            "theta_alpha" => self.theta_alpha = float()?,
            "phi" => self.phi = float()?,
            "gamma" => self.gamma = float()?,
            "nu" => self.nu = float()?,
            "beta" => self.beta = float()?,
            "zeta" => self.zeta = float()?,
            "rho0_log" => self.rho0_log = float()?,
            "eps_active" => self.eps_active = float()?,
            "alpha_min" => self.alpha_min = float()?,
            "max_evals" => {
                self.max_evals = value
                    .parse()
                    .map_err(|_| Error::Config(format!("max_evals: expected a count, got `{value}`")))?
            }
            "max_iter" => {
                self.max_iter = value
                    .parse()
                    .map_err(|_| Error::Config(format!("max_iter: expected a count, got `{value}`")))?
            }
            "linear_mode" => self.linear_mode = value.parse()?,
            "barrier_mode" => self.barrier_mode = value.parse()?,
            "search_enabled" => {
                self.search_enabled = value
                    .parse()
                    .map_err(|_| Error::Config(format!("search_enabled: expected true/false, got `{value}`")))?
            }
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// One `key=value` line per field. Floats use the shortest representation
    /// that parses back to the same value.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        line("alpha0", format!("{:?}", self.alpha0));
        line("theta_alpha", format!("{:?}", self.theta_alpha));
        line("phi", format!("{:?}", self.phi));
        line("gamma", format!("{:?}", self.gamma));
        line("nu", format!("{:?}", self.nu));
        line("beta", format!("{:?}", self.beta));
        line("zeta", format!("{:?}", self.zeta));
        line("rho0_log", format!("{:?}", self.rho0_log));
        line("eps_active", format!("{:?}", self.eps_active));
        line("max_evals", self.max_evals.to_string());
        line("alpha_min", format!("{:?}", self.alpha_min));
        line("max_iter", self.max_iter.to_string());
        line("linear_mode", self.linear_mode.as_str().into());
        line("search_enabled", self.search_enabled.to_string());
        line("barrier_mode", self.barrier_mode.as_str().into());
        s
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments
    /// are ignored.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                msg: "expected `key=value`".into(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = SolverConfig::default();
        c.apply_kv(text)?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_are_valid() {
        let c = SolverConfig::default();
        c.validate().unwrap();
        assert_eq!(c.beta, 1.0 + 1e-9);
        assert_eq!(SolverConfig::from_kv(&c.to_kv()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = SolverConfig::default();
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("alpha0", "x").is_err());
        c.set("theta_alpha", "1").unwrap();
        assert!(c.validate().is_err());
        let mut c = SolverConfig::default();
        c.set("nu", "2.5").unwrap();
        assert!(c.validate().is_err());
        assert!(SolverConfig::from_kv("phi 2").is_err());
    }

    proptest! {
        #[test]
        fn kv_round_trip(
            alpha0 in 1e-6f64..10.0,
            theta in 0.01f64..0.99,
            nu in 1.01f64..2.0,
            zeta in 1e-4f64..0.9,
            evals in 1usize..100_000,
            conf in any::<bool>(),
            search in any::<bool>(),
        ) {
            let c = SolverConfig {
                alpha0,
                theta_alpha: theta,
                nu,
                zeta,
                max_evals: evals,
                linear_mode: if conf { LinearMode::Conforming } else { LinearMode::Penalty },
                search_enabled: search,
                ..SolverConfig::default()
            };
            let text = c.to_kv();
            let back = SolverConfig::from_kv(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_kv(), text);
        }
    }
}
