use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaConfig {
    pub rho0: f64,
    pub alpha: f64,
    pub rho_u1: f64,
    pub rho_u2: f64,
    pub rho_u3: f64,
    pub limit_1: usize,
    pub limit_2: usize,
    pub limit_3: usize,
    pub limit_4: usize,
    pub limit_5: usize,
    pub controliter: usize,
    pub fix_share: f64,
    pub max_iterations: usize,
    /// Seconds.
    pub time_limit: Option<f64>,
    /// Use `1 / (alpha * rho)` instead of `rho / alpha` when only the consensus drift grew.
    pub literal_reciprocal: bool,
    /// Spacing of tangent anchors placed on `[0, horizon]` before the first penalized iteration; 0 disables.
    pub seed_cut_step: u32,
}

impl Default for PhaConfig {
    fn default() -> Self {
        PhaConfig {
            rho0: 0.02,
            alpha: 1.1,
            rho_u1: 0.05,
            rho_u2: 0.25,
            rho_u3: 1.0,
            limit_1: 25,
            limit_2: 50,
            limit_3: 60,
            limit_4: 70,
            limit_5: 90,
            controliter: 100,
            fix_share: 0.8,
            max_iterations: 1000,
            time_limit: None,
            literal_reciprocal: false,
            seed_cut_step: 10,
        }
    }
}

impl PhaConfig {
    /// Same rules with every iteration limit compressed, for quick runs on small instances.
    pub fn compact() -> Self {
        PhaConfig {
            limit_1: 3,
            limit_2: 6,
            limit_3: 8,
            limit_4: 10,
            limit_5: 12,
            controliter: 4,
            max_iterations: 200,
            ..PhaConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Validation(format!("pha config: {msg}")));
        if !(self.rho0 >= 0.0 && self.rho0.is_finite()) {
            return bad("rho0 must be a finite nonnegative number");
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return bad("alpha must exceed 1");
        }
        if !(0.0 < self.rho_u1 && self.rho_u1 < self.rho_u2 && self.rho_u2 < self.rho_u3) {
            return bad("penalty limits must satisfy 0 < rho_u1 < rho_u2 < rho_u3");
        }
        let l = [self.limit_1, self.limit_2, self.limit_3, self.limit_4, self.limit_5];
        if l[0] == 0 || l.windows(2).any(|w| w[0] >= w[1]) {
            return bad("iteration limits must satisfy 0 < limit_1 < limit_2 < ... < limit_5");
        }
        if self.controliter == 0 {
            return bad("controliter must be positive");
        }
        if !(self.fix_share > 0.5 && self.fix_share <= 1.0) {
            return bad("fix_share must lie in (0.5, 1]");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        Ok(())
    }
}
