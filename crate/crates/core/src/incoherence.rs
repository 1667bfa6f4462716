//! Time-independent fringe attenuation Γ_C = J₀(|C|) from classical phase
//! noise, and the visibility it implies.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::analytic::pattern_with_coherence;
use crate::error::ConfigError;
use crate::lattice::SuperpositionParams;
use crate::observables::{VisibilityDefinition, VisibilitySeries};

/// First positive zero of J₀.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Largest |z| accepted by [`bessel_j0`].
pub const J0_MAX_ARGUMENT: f64 = 50.0;

/// Below this |z| the power series is used, above it the Hankel expansion.
pub const J0_SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order zero.
///
/// |z| ≤ 12: the Maclaurin series Σ (−z²/4)ᵏ/(k!)², summed until terms fall
/// below 1e-17 (cancellation costs at most ~1e-12 at z = 12).
/// 12 < |z| ≤ 50: Hankel's asymptotic expansion truncated at its smallest
/// term, which is below 1e-11 on this range.
pub fn bessel_j0(z: f64) -> Result<f64, ConfigError> {
    let z = z.abs();
    if !(z <= J0_MAX_ARGUMENT) {
        return Err(ConfigError::OutOfRange(z));
    }
    if z <= J0_SERIES_LIMIT {
        Ok(j0_series(z))
    } else {
        Ok(j0_asymptotic(z))
    }
}

fn j0_series(z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..100 {
        let k = k as f64;
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum
}

fn j0_asymptotic(z: f64) -> f64 {
    // aₖ = ((1)(9)(25)…((2k−1)²)) / (k! 8ᵏ)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= odd * odd / (k as f64 * 8.0 * z);
        }
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        // Odd coefficients carry an extra minus sign for order zero.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q -= sign * a;
        }
    }
    let chi = z - FRAC_PI_4;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncoherenceParams {
    pub c: f64,
    pub species_label: String,
}

impl IncoherenceParams {
    pub fn new(c: f64, species_label: impl Into<String>) -> Result<Self, ConfigError> {
        if !c.is_finite() {
            return Err(ConfigError::InvalidParameter {
                name: "c",
                value: c,
            });
        }
        Ok(Self {
            c,
            species_label: species_label.into(),
        })
    }

    /// Γ_C = J₀(|C|).
    pub fn attenuation(&self) -> Result<f64, ConfigError> {
        bessel_j0(self.c)
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.c.abs() >= J0_FIRST_ZERO {
            vec![format!(
                "|C| = {} is beyond the first zero of J0; fringe term is no longer positive",
                self.c.abs()
            )]
        } else {
            Vec::new()
        }
    }
}

/// ν_C(t) = J₀(|C|) / (ρ₁₁ + ρ₂₂), with the diagonals already evaluated at
/// `eval_point`.
pub fn visibility_incoherence(
    params: &IncoherenceParams,
    rho11: &[f64],
    rho22: &[f64],
    times: &[f64],
    eval_point: f64,
) -> Result<VisibilitySeries, ConfigError> {
    if rho11.len() != times.len() || rho22.len() != times.len() {
        return Err(ConfigError::Mismatch(format!(
            "{} times, {} and {} diagonal samples",
            times.len(),
            rho11.len(),
            rho22.len()
        )));
    }
    let gamma_c = params.attenuation()?;
    let nu = rho11
        .iter()
        .zip(rho22)
        .map(|(a, b)| gamma_c / (a + b))
        .collect();
    Ok(VisibilitySeries {
        times: times.to_vec(),
        nu,
        eval_point,
        definition: VisibilityDefinition::Incoherence,
    })
}

/// Screen pattern with the interference term scaled by J₀(|C|).
pub fn incoherent_pattern(
    p: &SuperpositionParams,
    params: &IncoherenceParams,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64, ConfigError> {
    Ok(pattern_with_coherence(p, params.attenuation()?, x, y, t))
}
