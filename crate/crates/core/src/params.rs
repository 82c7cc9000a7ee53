//! Fluid coefficients and the pressure law.

use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum PressureLaw {
    /// `P(rho) = coefficient * rho^exponent`.
    Gamma { coefficient: f64, exponent: f64 },
    /// `P(rho) = sum_k coefficients[k] * rho^k`.
    Polynomial { coefficients: Vec<f64> },
}

impl PressureLaw {
    /// Gamma law whose sound speed at `rho_star` equals `gamma`.
    pub fn gamma_with_sound_speed(gamma: f64, exponent: f64, rho_star: f64) -> Self {
        let coefficient = gamma * gamma / (exponent * rho_star.powf(exponent - 1.0));
        PressureLaw::Gamma { coefficient, exponent }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        match self {
            PressureLaw::Gamma { coefficient, exponent } => coefficient * rho.powf(*exponent),
            PressureLaw::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * rho + c)
            }
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match self {
            PressureLaw::Gamma { coefficient, exponent } => {
                coefficient * exponent * rho.powf(exponent - 1.0)
            }
            PressureLaw::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * rho + k as f64 * c),
        }
    }

    fn violations(&self, rho_star: f64, out: &mut Vec<String>) {
        match self {
            PressureLaw::Gamma { coefficient, exponent } => {
                if !(coefficient.is_finite() && *coefficient > 0.0) {
                    out.push(format!("pressure.coefficient must be positive, got {coefficient}"));
                }
                if !(exponent.is_finite() && *exponent >= 1.0) {
                    out.push(format!("pressure.exponent must be >= 1, got {exponent}"));
                }
            }
            PressureLaw::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    out.push("pressure.coefficients must be a nonempty list of finite numbers".into());
                }
            }
        }
        let dp = self.derivative(rho_star);
        if !(dp > 0.0) {
            out.push(format!("P'(rho*) must be positive (P'(rho*) > 0), got {dp}"));
        }
    }
}

/// Coefficients of the momentum equation around `(rho*, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub mu: f64,
    pub lam: f64,
    pub kappa: f64,
    #[serde(default = "one")]
    pub rho_star: f64,
    pub pressure: PressureLaw,
}

fn one() -> f64 {
    1.0
}

/// Constant coefficients of the linearized system in `(a, m)` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearCoeffs {
    pub mu: f64,
    /// `lam + mu`
    pub lam_mu: f64,
    /// `lam + 2 mu`
    pub nu: f64,
    pub kappa: f64,
    /// `P'(rho*)`
    pub gamma2: f64,
}

impl FluidParams {
    /// Gamma law (exponent 1.4) with the requested sound speed at `rho* = 1`.
    pub fn new(mu: f64, lam: f64, kappa: f64, gamma: f64) -> Self {
        Self {
            mu,
            lam,
            kappa,
            rho_star: 1.0,
            pressure: PressureLaw::gamma_with_sound_speed(gamma, 1.4, 1.0),
        }
    }

    pub fn nu(&self) -> f64 {
        self.lam + 2.0 * self.mu
    }

    pub fn gamma2(&self) -> f64 {
        self.pressure.derivative(self.rho_star)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma2().sqrt()
    }

    /// Every violated standing assumption, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            out.push(format!("mu must satisfy mu > 0, got {}", self.mu));
        }
        if !(self.nu() > 0.0 && self.nu().is_finite()) {
            out.push(format!("nu = lam + 2 mu must satisfy nu > 0, got {}", self.nu()));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            out.push(format!("kappa must satisfy kappa > 0, got {}", self.kappa));
        }
        if !(self.rho_star > 0.0 && self.rho_star.is_finite()) {
            out.push(format!("rho_star must be positive, got {}", self.rho_star));
        } else {
            self.pressure.violations(self.rho_star, &mut out);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(NskError::InvalidParams(v.join("; ")))
        }
    }

    /// Coefficients after dividing the momentum equation through by `rho*`.
    pub fn linear(&self) -> LinearCoeffs {
        let r = self.rho_star;
        LinearCoeffs {
            mu: self.mu / r,
            lam_mu: (self.lam + self.mu) / r,
            nu: self.nu() / r,
            kappa: self.kappa * r,
            gamma2: self.gamma2(),
        }
    }

    /// `Q(a) = P(rho* + a) - P(rho*) - P'(rho*) a`.
    pub fn pressure_potential(&self, a: f64) -> f64 {
        let r = self.rho_star;
        self.pressure.pressure(r + a) - self.pressure.pressure(r) - self.gamma2() * a
    }

    /// `I_P(a) = P'(rho* + a) - P'(rho*)`.
    pub fn pressure_remainder_at(&self, a: f64) -> f64 {
        self.pressure.derivative(self.rho_star + a) - self.gamma2()
    }
}
