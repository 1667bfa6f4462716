//! Closed-form references: free Gaussian packets, the decoherence factor
//! Γ(t), the decohered screen pattern and the decoherence time.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::coefficients::BathModel;
use crate::error::ConfigError;
use crate::lattice::SuperpositionParams;

/// Prefactor κ in Γ(t) = exp(−κ Δx² ∫₀ᵗ 𝒟 ds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaConvention {
    /// κ = 1/4, the decay rate the integrated master equation applies to a
    /// frozen off-diagonal element.
    MasterEq,
    /// κ = 1.
    #[default]
    PaperText,
}

impl GammaConvention {
    pub fn kappa(self) -> f64 {
        match self {
            Self::MasterEq => 0.25,
            Self::PaperText => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::MasterEq => "master-eq",
            Self::PaperText => "paper-text",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "master-eq" => Some(Self::MasterEq),
            "paper-text" => Some(Self::PaperText),
            _ => None,
        }
    }
}

/// Free Gaussian of initial width `sigma` (amplitude std of |ψ|²), mean
/// position `center` and mean momentum `k`, evolved for time `t`.
fn gaussian_packet(center: f64, sigma: f64, k: f64, mass: f64, x: f64, t: f64) -> Complex64 {
    let s2 = sigma * sigma;
    let spread = Complex64::new(1.0, t / (2.0 * mass * s2));
    let norm = (2.0 * PI * s2).powf(-0.25);
    let d = x - center - k * t / mass;
    let phase = Complex64::new(0.0, k * x - k * k * t / (2.0 * mass));
    let envelope = -Complex64::new(d * d, 0.0) / (spread * (4.0 * s2));
    norm / spread.sqrt() * (envelope + phase).exp()
}

/// Normalised free packet φ(x, t) started at `center` with width sigma_x0
/// and no mean momentum.
pub fn free_packet(center: f64, p: &SuperpositionParams, x: f64, t: f64) -> Complex64 {
    gaussian_packet(center, p.sigma_x0, 0.0, p.mass, x, t)
}

/// Width of the free packet, σ(t) = σ₀ √(1 + t²/(4M²σ₀⁴)).
pub fn packet_width(p: &SuperpositionParams, t: f64) -> f64 {
    let s2 = p.sigma_x0 * p.sigma_x0;
    p.sigma_x0 * (1.0 + t * t / (4.0 * p.mass * p.mass * s2 * s2)).sqrt()
}

/// ⟨φ₁|φ₂⟩ for packets at ±l0; real and constant under free evolution.
pub fn packet_overlap(p: &SuperpositionParams) -> f64 {
    (-p.l0 * p.l0 / (2.0 * p.sigma_x0 * p.sigma_x0)).exp()
}

/// Normalised isolated two-slit wavefunction ψ(x, t) = (φ₁ + φ₂)/√(2(1+S)).
pub fn free_superposition(p: &SuperpositionParams, x: f64, t: f64) -> Complex64 {
    let norm = (2.0 * (1.0 + packet_overlap(p))).sqrt();
    (free_packet(p.l0, p, x, t) + free_packet(-p.l0, p, x, t)) / norm
}

/// Transverse packet χ(y, t): width sigma_y0, momentum k_y.
pub fn chi_envelope(p: &SuperpositionParams, y: f64, t: f64) -> Complex64 {
    gaussian_packet(0.0, p.sigma_y0, p.k_y, p.mass, y, t)
}

/// Γ(t) = exp(−κ Δx² ∫₀ᵗ 𝒟(s) ds).
pub fn gamma_factor(bath: &BathModel, dx: f64, t: f64, conv: GammaConvention) -> f64 {
    (-conv.kappa() * dx * dx * bath.diffusion.integral(t)).exp()
}

/// Screen density (|φ₁|² + |φ₂|² + 2Γ Re φ₁*φ₂)|χ|², normalised over (x, y).
///
/// `coherence` is the factor multiplying the interference term.
pub fn pattern_with_coherence(
    p: &SuperpositionParams,
    coherence: f64,
    x: f64,
    y: f64,
    t: f64,
) -> f64 {
    let f1 = free_packet(p.l0, p, x, t);
    let f2 = free_packet(-p.l0, p, x, t);
    let transverse = chi_envelope(p, y, t).norm_sqr();
    let norm = 2.0 * (1.0 + coherence * packet_overlap(p));
    (f1.norm_sqr() + f2.norm_sqr() + 2.0 * coherence * (f1.conj() * f2).re) * transverse / norm
}

/// Pattern with the QBM decoherence factor for a separation `dx`.
pub fn decohered_pattern(
    p: &SuperpositionParams,
    bath: &BathModel,
    x: f64,
    y: f64,
    t: f64,
    dx: f64,
    conv: GammaConvention,
) -> f64 {
    pattern_with_coherence(p, gamma_factor(bath, dx, t, conv), x, y, t)
}

/// t_D = 1/(κ 𝒟 Δx²); infinite when 𝒟 = 0.
pub fn decoherence_time(
    bath: &BathModel,
    dx: f64,
    conv: GammaConvention,
) -> Result<f64, ConfigError> {
    let d = bath
        .diffusion
        .constant_value()
        .ok_or(ConfigError::NotConstant("decoherence time"))?;
    if d < 0.0 {
        return Err(ConfigError::InvalidParameter {
            name: "diffusion",
            value: d,
        });
    }
    if d == 0.0 || dx == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (conv.kappa() * d * dx * dx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> SuperpositionParams {
        SuperpositionParams {
            l0: 2.0,
            sigma_x0: 0.5,
            sigma_y0: 10.0,
            k_y: 50.0,
            mass: 1.0,
        }
    }

    fn fig1_bath() -> BathModel {
        BathModel::ohmic_high_temperature(0.001, 1.0, 300.0).unwrap()
    }

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * f(a + k as f64 * h)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn free_packet_starts_as_the_initial_gaussian() {
        let p = fig1();
        for x in [-1.0, 0.3, 2.0, 2.7] {
            let expected = (2.0 * PI * 0.25f64).powf(-0.25) * (-(x - 2.0f64).powi(2) / 1.0).exp();
            let got = free_packet(2.0, &p, x, 0.0);
            assert!((got.re - expected).abs() < 1e-15 && got.im.abs() < 1e-15);
        }
    }

    #[test]
    fn free_packet_spreads_and_stays_normalised() {
        let p = fig1();
        assert!((packet_width(&p, 2.0) - 0.5 * 17f64.sqrt()).abs() < 1e-14);
        for t in [0.0, 0.5, 2.0] {
            let mass = integrate(|x| free_packet(2.0, &p, x, t).norm_sqr(), -40.0, 40.0, 8000);
            assert!((mass - 1.0).abs() < 1e-10, "t={t}: {mass}");
            let mean = integrate(
                |x| x * free_packet(2.0, &p, x, t).norm_sqr(),
                -40.0,
                40.0,
                8000,
            );
            let var = integrate(
                |x| (x - mean).powi(2) * free_packet(2.0, &p, x, t).norm_sqr(),
                -40.0,
                40.0,
                8000,
            );
            assert!((var.sqrt() - packet_width(&p, t)).abs() < 1e-9);
        }
    }

    #[test]
    fn chi_moves_with_group_velocity() {
        let p = SuperpositionParams {
            k_y: 3.0,
            sigma_y0: 1.0,
            ..fig1()
        };
        let peak = 1.0 / (2.0 * PI).sqrt();
        assert!((chi_envelope(&p, 0.0, 0.0).norm_sqr() - peak).abs() < 1e-15);
        let t = 1.5;
        let mean = integrate(
            |y| y * chi_envelope(&p, y, t).norm_sqr(),
            -30.0,
            40.0,
            14000,
        );
        assert!((mean - 3.0 * t).abs() < 1e-9);
    }

    #[test]
    fn gamma_factor_conventions() {
        let bath = fig1_bath();
        assert_eq!(
            gamma_factor(&bath, 2.0, 0.0, GammaConvention::PaperText),
            1.0
        );
        let t_d = 1.0 / 2.4;
        let g = gamma_factor(&bath, 2.0, t_d, GammaConvention::PaperText);
        assert!((g - (-1.0f64).exp()).abs() < 1e-14);
        let m = gamma_factor(&bath, 2.0, t_d, GammaConvention::MasterEq);
        assert!((m - g.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn decoherence_time_matches_figure_caption() {
        let t_d = decoherence_time(&fig1_bath(), 2.0, GammaConvention::PaperText).unwrap();
        assert!((t_d - 0.416_666_666_666_666_7).abs() < 1e-12);
        assert!((t_d - 0.41).abs() < 0.01);
        let hot = BathModel::ohmic_high_temperature(0.001, 1.0, 600.0).unwrap();
        let t_hot = decoherence_time(&hot, 2.0, GammaConvention::PaperText).unwrap();
        assert!((t_hot - t_d / 2.0).abs() < 1e-14);
        let wide = decoherence_time(&fig1_bath(), 4.0, GammaConvention::PaperText).unwrap();
        assert!((wide - t_d / 4.0).abs() < 1e-14);
        assert!(
            decoherence_time(&BathModel::isolated(), 2.0, GammaConvention::PaperText)
                .unwrap()
                .is_infinite()
        );
    }

    #[test]
    fn pattern_limits() {
        let p = fig1();
        let t = 2.0;
        let y = p.k_y * t / p.mass;
        // Isolated: where the relative phase is an odd multiple of π the
        // interference term takes its full value −2|φ₁||φ₂|, leaving only
        // (|φ₁| − |φ₂|)².
        let tau = t / (2.0 * p.mass * p.sigma_x0 * p.sigma_x0);
        let theta_per_x = p.l0 * tau / (p.sigma_x0 * p.sigma_x0 * (1.0 + tau * tau));
        let dark = PI / theta_per_x;
        let (a, b) = (
            free_packet(2.0, &p, dark, t).norm(),
            free_packet(-2.0, &p, dark, t).norm(),
        );
        let chi2 = chi_envelope(&p, y, t).norm_sqr();
        let residual = (a - b).powi(2) * chi2 / (2.0 * (1.0 + packet_overlap(&p)));
        assert!((pattern_with_coherence(&p, 1.0, dark, y, t) - residual).abs() < 1e-15);
        // At the symmetric centre the isolated minima are exactly dark.
        let centre_dark = free_packet(2.0, &p, 0.0, t).conj() * free_packet(-2.0, &p, 0.0, t);
        assert!((centre_dark.re - free_packet(2.0, &p, 0.0, t).norm_sqr()).abs() < 1e-15);

        // Decohered: no exact zeros.
        let open = decohered_pattern(&p, &fig1_bath(), dark, y, t, 2.0, GammaConvention::MasterEq);
        assert!(open > 1e-4);

        // Fully decohered: plain sum of the two spread packets.
        let x = 0.7;
        let sum = (free_packet(2.0, &p, x, t).norm_sqr() + free_packet(-2.0, &p, x, t).norm_sqr())
            * chi_envelope(&p, y, t).norm_sqr()
            / 2.0;
        assert!((pattern_with_coherence(&p, 0.0, x, y, t) - sum).abs() < 1e-15);
    }

    #[test]
    fn pattern_is_normalised_in_x_and_y() {
        let p = SuperpositionParams {
            sigma_y0: 1.0,
            k_y: 2.0,
            ..fig1()
        };
        for (t, c) in [(0.0, 1.0), (0.8, 0.3), (2.0, 0.0)] {
            let yc = p.k_y * t / p.mass;
            let total = integrate(
                |x| {
                    integrate(
                        |y| pattern_with_coherence(&p, c, x, y, t),
                        yc - 12.0,
                        yc + 12.0,
                        400,
                    )
                },
                -25.0,
                25.0,
                1000,
            );
            assert!((total - 1.0).abs() < 1e-8, "t={t} c={c}: {total}");
        }
    }

    #[test]
    fn gamma_is_monotone() {
        let bath = fig1_bath();
        let stronger = BathModel::ohmic_high_temperature(0.002, 1.0, 300.0).unwrap();
        let mut prev = 1.0;
        for k in 1..50 {
            let t = k as f64 * 0.05;
            let g = gamma_factor(&bath, 2.0, t, GammaConvention::MasterEq);
            assert!(g <= prev);
            assert!(gamma_factor(&bath, 3.0, t, GammaConvention::MasterEq) <= g);
            assert!(gamma_factor(&stronger, 2.0, t, GammaConvention::MasterEq) <= g);
            prev = g;
        }
    }
}
