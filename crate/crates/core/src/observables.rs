//! Measured quantities: screen density, fringe visibility and the Wigner
//! function.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{free_packet, packet_overlap};
use crate::coefficients::BathModel;
use crate::dynamics::{evolve, EvolutionRecord, EvolveError, IntegratorConfig};
use crate::error::ConfigError;
use crate::lattice::{
    make_single_packet_state, packet_norm_sqr, superposition_norm_sqr, DensityMatrixGrid, Grid1D,
    SuperpositionParams,
};

/// P(xᵢ) = Re ρ(xᵢ, xᵢ).
pub fn probability_density(rho: &DensityMatrixGrid) -> Vec<f64> {
    rho.diagonal()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisibilityDefinition {
    /// |ρ_int| / (ρ₁₁ + ρ₂₂).
    Dynamical,
    /// J₀(|C|) / (ρ₁₁ + ρ₂₂).
    Incoherence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilitySeries {
    pub times: Vec<f64>,
    pub nu: Vec<f64>,
    pub eval_point: f64,
    pub definition: VisibilityDefinition,
}

impl VisibilitySeries {
    /// Index and value of the largest ν.
    pub fn peak(&self) -> Option<(usize, f64)> {
        self.nu
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Where ρ₁₁ and ρ₂₂ come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinglePacketSource {
    /// Each packet evolved on its own under the same master equation.
    #[default]
    Evolved,
    /// |φᵢ(x, t)|² of the isolated free packets.
    ClosedForm,
}

fn check_aligned(what: &str, a: &[f64], b: &[f64]) -> Result<(), ConfigError> {
    if a.len() != b.len() {
        return Err(ConfigError::Mismatch(format!(
            "{what}: {} vs {} samples",
            a.len(),
            b.len()
        )));
    }
    if let Some((x, y)) = a
        .iter()
        .zip(b)
        .find(|(x, y)| (*x - *y).abs() > 1e-9 * x.abs().max(1.0))
    {
        return Err(ConfigError::Mismatch(format!("{what}: time {x} vs {y}")));
    }
    Ok(())
}

/// ν(t) = |P_full − P₁₁ − P₂₂| / (P₁₁ + P₂₂) at `eval_point`, from diagonals
/// sampled on `grid` at `times`. The single-packet diagonals must carry the
/// weights they have inside the superposition.
pub fn visibility_from_diagonals(
    grid: &Grid1D,
    times: &[f64],
    full: &[Vec<f64>],
    rho11: &[Vec<f64>],
    rho22: &[Vec<f64>],
    eval_point: f64,
) -> Result<VisibilitySeries, ConfigError> {
    if full.len() != times.len() || rho11.len() != times.len() || rho22.len() != times.len() {
        return Err(ConfigError::Mismatch(
            "diagonal series differ in length".into(),
        ));
    }
    let at = |d: &Vec<f64>| {
        grid.interpolate(d, eval_point)
            .ok_or(ConfigError::OutOfRange(eval_point))
    };
    let mut nu = Vec::with_capacity(times.len());
    for ((f, a), b) in full.iter().zip(rho11).zip(rho22) {
        let (f, a, b) = (at(f)?, at(a)?, at(b)?);
        nu.push((f - a - b).abs() / (a + b));
    }
    Ok(VisibilitySeries {
        times: times.to_vec(),
        nu,
        eval_point,
        definition: VisibilityDefinition::Dynamical,
    })
}

/// Weighted single-packet diagonals (ρ₁₁, ρ₂₂) at each recorded step.
pub struct SinglePacketDiagonals {
    pub rho11: Vec<Vec<f64>>,
    pub rho22: Vec<Vec<f64>>,
}

/// ρ₁₁ and ρ₂₂ consistent with `record`, either evolved or closed-form.
pub fn single_packet_diagonals(
    record: &EvolutionRecord,
    p: &SuperpositionParams,
    bath: &BathModel,
    cfg: &IntegratorConfig,
    source: SinglePacketSource,
) -> Result<SinglePacketDiagonals, EvolveError> {
    let initial = &record.snapshots[0];
    let grid = initial.grid;
    let times = record.step_times();
    match source {
        SinglePacketSource::Evolved => {
            let t_final = times.last().copied().unwrap_or(initial.time) - initial.time;
            if t_final <= 0.0 {
                return Err(ConfigError::Mismatch("record has no evolution".into()).into());
            }
            let n2 = superposition_norm_sqr(p, &grid);
            let mut out = Vec::with_capacity(2);
            for center in [p.l0, -p.l0] {
                let weight = n2 / packet_norm_sqr(center, p, &grid);
                let mut single = make_single_packet_state(center, p, grid)?.scaled(weight);
                single.time = initial.time;
                let run = evolve(&single, p.mass, bath, cfg, t_final, usize::MAX)?;
                check_aligned("single-packet run", &times, &run.step_times())?;
                out.push(run.diagonals);
            }
            let rho22 = out.pop().expect("two runs");
            let rho11 = out.pop().expect("two runs");
            Ok(SinglePacketDiagonals { rho11, rho22 })
        }
        SinglePacketSource::ClosedForm => {
            let weight = 1.0 / (2.0 * (1.0 + packet_overlap(p)));
            let series = |center: f64| -> Vec<Vec<f64>> {
                times
                    .iter()
                    .map(|&t| {
                        grid.points()
                            .map(|x| weight * free_packet(center, p, x, t).norm_sqr())
                            .collect()
                    })
                    .collect()
            };
            Ok(SinglePacketDiagonals {
                rho11: series(p.l0),
                rho22: series(-p.l0),
            })
        }
    }
}

/// Dynamical visibility of a superposition run.
///
/// ρ₁₁, ρ₂₂ come from `source`; with [`SinglePacketSource::Evolved`] two
/// extra runs are made with the same bath and integrator settings.
pub fn visibility_dynamical(
    record: &EvolutionRecord,
    p: &SuperpositionParams,
    bath: &BathModel,
    cfg: &IntegratorConfig,
    eval_point: f64,
    source: SinglePacketSource,
) -> Result<VisibilitySeries, EvolveError> {
    let singles = single_packet_diagonals(record, p, bath, cfg, source)?;
    Ok(visibility_from_diagonals(
        &record.snapshots[0].grid,
        &record.step_times(),
        &record.diagonals,
        &singles.rho11,
        &singles.rho22,
        eval_point,
    )?)
}

/// Michelson contrast (P_max − P_min)/(P_max + P_min) of the bright fringe
/// closest to `center` and its deeper neighbouring dark fringe.
pub fn fringe_contrast(x: &[f64], values: &[f64], center: f64) -> Option<f64> {
    let n = values.len();
    if n < 3 || x.len() != n {
        return None;
    }
    let is_max = |i: usize| values[i] >= values[i - 1] && values[i] > values[i + 1];
    let is_min = |i: usize| values[i] <= values[i - 1] && values[i] < values[i + 1];
    let bright = (1..n - 1)
        .filter(|&i| is_max(i))
        .min_by(|&a, &b| (x[a] - center).abs().total_cmp(&(x[b] - center).abs()))?;
    let left = (1..bright).rev().find(|&i| is_min(i));
    let right = (bright + 1..n - 1).find(|&i| is_min(i));
    let dark = match (left, right) {
        (Some(l), Some(r)) => values[l].min(values[r]),
        (Some(l), None) => values[l],
        (None, Some(r)) => values[r],
        (None, None) => return None,
    };
    let bright = values[bright];
    Some((bright - dark) / (bright + dark))
}

/// W(x, p) on the x grid of a density matrix and a symmetric momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_grid: Grid1D,
    pub p_grid: Grid1D,
    /// Indexed `[x, p]`.
    pub values: Array2<f64>,
    pub time: f64,
    /// Largest discarded imaginary part, relative to max |W|.
    pub imag_residue: f64,
}

impl WignerGrid {
    /// Trapezoid weights on the momentum grid.
    fn p_weight(&self, k: usize) -> f64 {
        let h = self.p_grid.spacing();
        if k == 0 || k + 1 == self.p_grid.len() {
            0.5 * h
        } else {
            h
        }
    }

    /// ∫ W dp at every x node.
    pub fn marginal_x(&self) -> Vec<f64> {
        self.values
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, w)| w * self.p_weight(k))
                    .sum()
            })
            .collect()
    }

    /// ∬ W dx dp.
    pub fn normalization(&self) -> f64 {
        self.marginal_x().iter().sum::<f64>() * self.x_grid.spacing()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest |p| the transform resolves on `grid`: chords are sampled every
/// 2h, so W is periodic in p with period π/h.
pub fn wigner_momentum_limit(grid: &Grid1D) -> f64 {
    PI / (2.0 * grid.spacing())
}

/// W(x, p) = (1/2π) ∫ ds e^{ips} ρ(x + s/2, x − s/2) at every x node.
///
/// Along the anti-diagonal through (xᵢ, xᵢ) the grid nodes (xᵢ₊ₘ, xᵢ₋ₘ) sit
/// at chords s = 2mh, so ρ is sampled exactly and the integral is a plain
/// Riemann sum. Chords leaving the grid contribute nothing. The momentum
/// grid may be any grid inside ±π/(2h); when it spans exactly that range,
/// the trapezoid marginal ∫W dp reproduces ρ(x, x) to rounding.
pub fn wigner_transform(
    rho: &DensityMatrixGrid,
    p_grid: Grid1D,
) -> Result<WignerGrid, ConfigError> {
    let limit = wigner_momentum_limit(&rho.grid);
    let p_max = p_grid.x_min().abs().max(p_grid.x_max().abs());
    if p_max > limit * (1.0 + 1e-12) {
        return Err(ConfigError::Nyquist { p_max, limit });
    }
    let n = rho.dim();
    let h = rho.grid.spacing();
    let prefactor = 2.0 * h / (2.0 * PI);
    let momenta: Vec<f64> = p_grid.points().collect();

    let standard = rho.values.as_standard_layout();
    let values = standard.as_slice().expect("standard layout");

    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let reach = i.min(n - 1 - i);
            // ρ(xᵢ₊ₘ, xᵢ₋ₘ) for m = −reach..=reach.
            let samples: Vec<Complex64> = (0..=2 * reach)
                .map(|k| {
                    let a = i + k - reach;
                    let b = i + reach - k;
                    values[a * n + b]
                })
                .collect();
            let mut worst_im = 0.0f64;
            let row = momenta
                .iter()
                .map(|&p| {
                    let step = Complex64::from_polar(1.0, 2.0 * p * h);
                    let mut phase = Complex64::from_polar(1.0, -2.0 * p * h * reach as f64);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, r) in samples.iter().enumerate() {
                        acc += phase * r;
                        phase *= step;
                        // Re-anchor the phase recursion periodically.
                        if k % 64 == 63 {
                            let m = (k + 1) as f64 - reach as f64;
                            phase = Complex64::from_polar(1.0, 2.0 * p * h * m);
                        }
                    }
                    let w = acc * prefactor;
                    worst_im = worst_im.max(w.im.abs());
                    w.re
                })
                .collect();
            (row, worst_im)
        })
        .collect();

    let mut out = Array2::zeros((n, p_grid.len()));
    let mut worst_im = 0.0f64;
    for (i, (row, im)) in rows.into_iter().enumerate() {
        worst_im = worst_im.max(im);
        for (k, w) in row.into_iter().enumerate() {
            out[[i, k]] = w;
        }
    }
    let scale = out.iter().fold(0.0f64, |a, w: &f64| a.max(w.abs()));
    Ok(WignerGrid {
        x_grid: rho.grid,
        p_grid,
        values: out,
        time: rho.time,
        imag_residue: if scale > 0.0 { worst_im / scale } else { 0.0 },
    })
}

/// (min W, Σ_{W<0} |W| h_x h_p).
pub fn wigner_negativity(w: &WignerGrid) -> (f64, f64) {
    let cell = w.x_grid.spacing() * w.p_grid.spacing();
    let negative: f64 = w.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
    (w.min(), negative * cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_superposition_state;

    fn params(l0: f64) -> SuperpositionParams {
        SuperpositionParams {
            l0,
            sigma_x0: 0.5,
            sigma_y0: 10.0,
            k_y: 50.0,
            mass: 1.0,
        }
    }

    #[test]
    fn gaussian_wigner_is_positive_and_normalised() {
        let rho =
            make_superposition_state(&params(0.0), Grid1D::symmetric(8.0, 128).unwrap()).unwrap();
        let p_grid = Grid1D::symmetric(6.0, 97).unwrap();
        let w = wigner_transform(&rho, p_grid).unwrap();
        let (min, neg) = wigner_negativity(&w);
        assert!(min >= -1e-8 * w.max(), "min {min}");
        assert!(neg < 1e-8);
        assert!((w.normalization() - 1.0).abs() < 1e-6);
        assert!(w.imag_residue < 1e-8);
    }

    #[test]
    fn cat_state_has_negative_regions() {
        let rho =
            make_superposition_state(&params(2.0), Grid1D::symmetric(8.0, 128).unwrap()).unwrap();
        let w = wigner_transform(&rho, Grid1D::symmetric(6.0, 129).unwrap()).unwrap();
        let (min, neg) = wigner_negativity(&w);
        assert!(min < 0.0 && neg > 0.0);
    }

    #[test]
    fn marginal_reproduces_the_density() {
        let rho =
            make_superposition_state(&params(2.0), Grid1D::symmetric(8.0, 128).unwrap()).unwrap();
        let limit = wigner_momentum_limit(&rho.grid);
        let w = wigner_transform(&rho, Grid1D::symmetric(limit, 101).unwrap()).unwrap();
        let marginal = w.marginal_x();
        let density = probability_density(&rho);
        let worst = marginal
            .iter()
            .zip(&density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn momentum_range_beyond_nyquist_is_rejected() {
        let rho =
            make_superposition_state(&params(2.0), Grid1D::symmetric(8.0, 64).unwrap()).unwrap();
        let limit = wigner_momentum_limit(&rho.grid);
        let err = wigner_transform(&rho, Grid1D::symmetric(limit * 1.1, 65).unwrap()).unwrap_err();
        assert!(matches!(err, ConfigError::Nyquist { .. }));
        assert!(wigner_transform(&rho, Grid1D::new(-limit * 1.2, 0.0, 65).unwrap()).is_err());
        assert!(wigner_transform(&rho, Grid1D::new(-limit, 0.0, 65).unwrap()).is_ok());
    }

    #[test]
    fn visibility_rejects_misaligned_series() {
        let g = Grid1D::symmetric(5.0, 32).unwrap();
        let d = vec![vec![1.0; 32]; 3];
        let short = vec![vec![1.0; 32]; 2];
        assert!(visibility_from_diagonals(&g, &[0.0, 0.1, 0.2], &d, &d, &short, 0.0).is_err());
        assert!(visibility_from_diagonals(&g, &[0.0, 0.1, 0.2], &d, &d, &d, 9.0).is_err());
    }

    #[test]
    fn contrast_of_a_cosine_pattern() {
        let x: Vec<f64> = (0..2001).map(|k| -10.0 + k as f64 * 0.01).collect();
        let v: Vec<f64> = x.iter().map(|x| 1.0 + 0.4 * (2.0 * x).cos()).collect();
        let c = fringe_contrast(&x, &v, 0.0).unwrap();
        assert!((c - 0.4).abs() < 1e-4);
    }
}
