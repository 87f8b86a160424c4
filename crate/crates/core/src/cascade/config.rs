use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Tolerances;

/// Which synthesized couplings are switched on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every intra-stage coupling and every structural source.
    #[default]
    Generic,
    /// Weyl families only couple to themselves within a stage.
    SameBwDecoupled,
    /// As above, and `T̂` no longer sources the lower stages.
    THatDecoupled,
    /// No cross-family couplings and no sources at all.
    FullyDecoupled,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Generic,
        Mode::SameBwDecoupled,
        Mode::THatDecoupled,
        Mode::FullyDecoupled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Generic => "generic",
            Mode::SameBwDecoupled => "same_bw_decoupled",
            Mode::THatDecoupled => "t_hat_decoupled",
            Mode::FullyDecoupled => "fully_decoupled",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}` (expected one of generic, same_bw_decoupled, t_hat_decoupled, fully_decoupled)")))
    }
}

/// Deliberate defects used to check that the acceptance suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultInjection {
    /// Flips the sign of the `-(d-3)` diagonal entry of the boost-weight −1 system.
    CheckvSign,
}

/// Everything needed to reproduce a cascade run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeConfig {
    pub d: usize,
    /// Decay order of `Ĥ`.
    pub nu: u32,
    pub mode: Mode,
    pub r0: f64,
    pub r_max: f64,
    pub seed: u64,
    pub coupling_scale: f64,
    /// Amplitude `h` in `Ĥ = h r^{-ν}`; seeded when absent.
    pub hat_h: Option<Vec<Vec<f64>>>,
    /// `Y = rF + E` at `r0`; identity when absent.
    pub f: Option<Vec<Vec<f64>>>,
    /// Zero when absent.
    pub e: Option<Vec<Vec<f64>>>,
    pub tolerances: Tolerances,
    /// Fit window: the last `tail_decades` decades below `r_max`.
    pub tail_decades: f64,
    /// Allowed shortfall of a measured exponent below its table value.
    pub exponent_tol: f64,
    #[serde(skip)]
    pub fault_injection: Option<FaultInjection>,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            d: 5,
            nu: 4,
            mode: Mode::Generic,
            r0: 1.0,
            r_max: 1e6,
            seed: 0,
            coupling_scale: 1.0,
            hat_h: None,
            f: None,
            e: None,
            tolerances: Tolerances::default(),
            tail_decades: 2.0,
            exponent_tol: 0.1,
            fault_injection: None,
        }
    }
}

impl CascadeConfig {
    pub fn new(d: usize, nu: u32, mode: Mode, seed: u64) -> Self {
        Self {
            d,
            nu,
            mode,
            seed,
            ..Default::default()
        }
    }

    /// Transverse dimension `d - 2`.
    pub fn n(&self) -> usize {
        self.d - 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 4 {
            return Err(Error::Config(format!("d = {} must be at least 4", self.d)));
        }
        if self.nu < 4 {
            return Err(Error::Config(format!(
                "nu = {} must be at least 4",
                self.nu
            )));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::Config(format!("r0 = {} must be positive", self.r0)));
        }
        if !(self.r_max > self.r0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!(
                "r_max = {} must exceed r0 = {}",
                self.r_max, self.r0
            )));
        }
        if !(self.coupling_scale >= 0.0 && self.coupling_scale.is_finite()) {
            return Err(Error::Config(format!(
                "coupling_scale = {} must be finite and nonnegative",
                self.coupling_scale
            )));
        }
        if !(self.tail_decades > 0.0 && self.r_max / self.r0 >= 10f64.powf(self.tail_decades)) {
            return Err(Error::Config(format!(
                "tail_decades = {} must be positive and fit inside [r0, r_max]",
                self.tail_decades
            )));
        }
        if !(self.exponent_tol >= 0.0 && self.exponent_tol.is_finite()) {
            return Err(Error::Config(format!(
                "exponent_tol = {} must be nonnegative",
                self.exponent_tol
            )));
        }
        let t = &self.tolerances;
        if !(t.rtol > 0.0 && t.atol >= 0.0 && t.max_step > 0.0 && t.samples_per_decade > 0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        for (name, m) in [("hat_h", &self.hat_h), ("f", &self.f), ("e", &self.e)] {
            if let Some(m) = m {
                check_square(name, m, self.n())?;
            }
        }
        Ok(())
    }
}

fn check_square(name: &str, m: &[Vec<f64>], n: usize) -> Result<()> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::Config(format!("{name} must be a {n}x{n} matrix")));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{name} has non-finite entries")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!("GENERIC".parse::<Mode>().unwrap(), Mode::Generic);
        assert_eq!(
            "same-bw-decoupled".parse::<Mode>().unwrap(),
            Mode::SameBwDecoupled
        );
        assert_eq!(
            "T_HAT_DECOUPLED".parse::<Mode>().unwrap(),
            Mode::THatDecoupled
        );
        assert!("partly".parse::<Mode>().is_err());
    }

    #[test]
    fn validation() {
        assert!(CascadeConfig::default().validate().is_ok());
        assert!(CascadeConfig {
            nu: 3,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CascadeConfig {
            d: 3,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CascadeConfig {
            r_max: 50.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        let bad = CascadeConfig {
            f: Some(vec![vec![1.0, 0.0]]),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
