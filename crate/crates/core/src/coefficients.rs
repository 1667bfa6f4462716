//! Time-dependent coefficients γ(t), 𝒟(t) and f(t) of the QBM master equation.
//!
//! Units throughout have ħ = 1.

use std::fmt;
use std::sync::Arc;

use crate::error::ConfigError;

/// A scalar coefficient as a function of time.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// Arbitrary time dependence. `max_abs` must bound |f(t)| over any run;
    /// the stability estimate relies on it.
    Function {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        max_abs: f64,
    },
}

impl Coefficient {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static, max_abs: f64) -> Self {
        Self::Function {
            f: Arc::new(f),
            max_abs,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Function { f, .. } => f(t),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Self::Constant(c) => Some(*c),
            Self::Function { .. } => None,
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Constant(c) => c.abs(),
            Self::Function { max_abs, .. } => *max_abs,
        }
    }

    /// ∫₀ᵗ c(s) ds; composite Simpson with 256 panels, exact for constants.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            Self::Constant(c) => c * t,
            Self::Function { f, .. } => {
                const PANELS: usize = 256;
                let h = t / PANELS as f64;
                let mut acc = f(0.0) + f(t);
                for k in 1..PANELS {
                    let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * f(k as f64 * h);
                }
                acc * h / 3.0
            }
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Function { max_abs, .. } => write!(f, "Function(|c| <= {max_abs})"),
        }
    }
}

/// Coefficients sampled at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSample {
    pub gamma: f64,
    pub diffusion: f64,
    pub anomalous: f64,
}

/// Environment seen by the particle: dissipation γ(t), diffusion 𝒟(t) and
/// anomalous diffusion f(t).
#[derive(Debug, Clone)]
pub struct BathModel {
    pub gamma: Coefficient,
    pub diffusion: Coefficient,
    pub anomalous: Coefficient,
    pub description: String,
}

impl BathModel {
    /// No environment at all.
    pub fn isolated() -> Self {
        Self::constant(0.0, 0.0, 0.0, "isolated")
    }

    pub fn constant(
        gamma: f64,
        diffusion: f64,
        anomalous: f64,
        description: impl Into<String>,
    ) -> Self {
        Self {
            gamma: Coefficient::Constant(gamma),
            diffusion: Coefficient::Constant(diffusion),
            anomalous: Coefficient::Constant(anomalous),
            description: description.into(),
        }
    }

    /// Ohmic bath in the high-temperature limit: γ = γ₀, 𝒟 = 2Mγ₀k_BT,
    /// f = 1/k_BT. An uncoupled bath (γ₀ = 0) also has f = 0.
    pub fn ohmic_high_temperature(gamma0: f64, mass: f64, kbt: f64) -> Result<Self, ConfigError> {
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(ConfigError::InvalidParameter {
                name: "gamma0",
                value: gamma0,
            });
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(ConfigError::InvalidParameter {
                name: "mass",
                value: mass,
            });
        }
        if !(kbt > 0.0 && kbt.is_finite()) {
            return Err(ConfigError::InvalidParameter {
                name: "kbt",
                value: kbt,
            });
        }
        let anomalous = if gamma0 == 0.0 { 0.0 } else { 1.0 / kbt };
        Ok(Self::constant(
            gamma0,
            2.0 * mass * gamma0 * kbt,
            anomalous,
            format!("ohmic high-T (gamma0={gamma0}, M={mass}, kBT={kbt})"),
        ))
    }

    /// Scattering model −Λ[x,[x,ρ]]: γ = f = 0 and 𝒟 = 4Λ so that
    /// −𝒟(x−x′)²/4 reproduces −Λ(x−x′)².
    pub fn scattering_model(lambda: f64) -> Result<Self, ConfigError> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ConfigError::InvalidParameter {
                name: "lambda",
                value: lambda,
            });
        }
        Ok(Self::constant(
            0.0,
            4.0 * lambda,
            0.0,
            format!("scattering (Lambda={lambda})"),
        ))
    }

    pub fn sample(&self, t: f64) -> CoefficientSample {
        CoefficientSample {
            gamma: self.gamma.at(t),
            diffusion: self.diffusion.at(t),
            anomalous: self.anomalous.at(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.gamma.constant_value().is_some()
            && self.diffusion.constant_value().is_some()
            && self.anomalous.constant_value().is_some()
    }

    /// Same bath with f(t) ≡ 0.
    pub fn without_anomalous(&self) -> Self {
        Self {
            anomalous: Coefficient::Constant(0.0),
            description: format!("{} [f=0]", self.description),
            ..self.clone()
        }
    }
}
