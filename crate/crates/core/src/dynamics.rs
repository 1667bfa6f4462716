//! Method-of-lines integration of the QBM master equation
//!
//! ```text
//! ∂ρ/∂t = (i/2M)(∂²ₓ − ∂²ₓ′)ρ − (𝒟/4)(x−x′)²ρ
//!         − γ(x−x′)(∂ₓ − ∂ₓ′)ρ + 2f(x−x′)(∂ₓ + ∂ₓ′)ρ
//! ```
//!
//! with ħ = 1, central finite differences in space, zero values outside the
//! grid, and classical RK4 in time. After every step the state is projected
//! back onto Hermitian matrices.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::BathModel;
use crate::error::{ConfigError, RunAbort};
use crate::lattice::DensityMatrixGrid;

/// RK4 stability radius on the negative real axis (the imaginary-axis
/// radius 2√2 is larger).
pub const RK4_STABILITY_RADIUS: f64 = 2.78;

/// Runs stop once |Tr ρ / Tr ρ₀ − 1| exceeds this.
pub const TRACE_ABORT: f64 = 1e-3;

/// Runs stop once the boundary band holds this fraction of the initial trace.
pub const BOUNDARY_ABORT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialOrder {
    Second,
    Fourth,
}

impl SpatialOrder {
    /// Stencil weights for offsets −2..=2: (second derivative · h², first
    /// derivative · h).
    fn stencils(self) -> ([f64; 5], [f64; 5]) {
        match self {
            Self::Second => ([0.0, 1.0, -2.0, 1.0, 0.0], [0.0, -0.5, 0.0, 0.5, 0.0]),
            Self::Fourth => (
                [
                    -1.0 / 12.0,
                    16.0 / 12.0,
                    -30.0 / 12.0,
                    16.0 / 12.0,
                    -1.0 / 12.0,
                ],
                [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
            ),
        }
    }

    /// Spectral radii (·h², ·h) of the second- and first-derivative stencils.
    fn spectral_radii(self) -> (f64, f64) {
        match self {
            Self::Second => (4.0, 1.0),
            Self::Fourth => (16.0 / 3.0, 1.372_162_2),
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Self::Second => 2,
            Self::Fourth => 4,
        }
    }

    pub fn from_int(order: u8) -> Option<Self> {
        match order {
            2 => Some(Self::Second),
            4 => Some(Self::Fourth),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub spatial_order: SpatialOrder,
    /// Fraction of the stability bound that `dt` may use, in (0, 1].
    pub stability_margin: f64,
    /// `false` drops the kinetic term (the M → ∞ limit).
    pub kinetic: bool,
    /// `false` zeroes f(t).
    pub anomalous: bool,
}

impl IntegratorConfig {
    /// Largest admissible step for the given problem at `margin`.
    pub fn at_margin(
        grid: &crate::lattice::Grid1D,
        mass: f64,
        bath: &BathModel,
        margin: f64,
    ) -> Self {
        let mut cfg = Self {
            dt: 0.0,
            spatial_order: SpatialOrder::Fourth,
            stability_margin: margin,
            kinetic: true,
            anomalous: true,
        };
        cfg.dt = margin * cfg.stability_limit(grid, mass, bath);
        cfg
    }

    fn effective_mass(&self, mass: f64) -> f64 {
        if self.kinetic {
            mass
        } else {
            f64::INFINITY
        }
    }

    pub fn stability_limit(
        &self,
        grid: &crate::lattice::Grid1D,
        mass: f64,
        bath: &BathModel,
    ) -> f64 {
        let bath = if self.anomalous {
            bath.clone()
        } else {
            bath.without_anomalous()
        };
        stability_limit(grid, self.effective_mass(mass), &bath, self.spatial_order)
    }

    pub fn check(
        &self,
        grid: &crate::lattice::Grid1D,
        mass: f64,
        bath: &BathModel,
    ) -> Result<(), ConfigError> {
        if !(self.stability_margin > 0.0 && self.stability_margin <= 1.0) {
            return Err(ConfigError::InvalidParameter {
                name: "stability_margin",
                value: self.stability_margin,
            });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ConfigError::InvalidParameter {
                name: "dt",
                value: self.dt,
            });
        }
        let bound = self.stability_margin * self.stability_limit(grid, mass, bath);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(ConfigError::Stability { dt: self.dt, bound });
        }
        Ok(())
    }
}

/// Conservative explicit step bound:
///
/// ```text
/// dt = 2.78 / (λ₂/(M h²) + 𝒟 W²/4 + (2|γ| + 4|f|) W λ₁/h)
/// ```
///
/// where W is the grid width and λ₂, λ₁ are the spectral radii of the
/// second- and first-derivative stencils. Pass `mass = ∞` to drop the
/// kinetic contribution.
pub fn stability_limit(
    grid: &crate::lattice::Grid1D,
    mass: f64,
    bath: &BathModel,
    order: SpatialOrder,
) -> f64 {
    let h = grid.spacing();
    let w = grid.width();
    let (l2, l1) = order.spectral_radii();
    let kinetic = if mass.is_finite() {
        l2 / (mass * h * h)
    } else {
        0.0
    };
    let diffusion = bath.diffusion.max_abs() * w * w / 4.0;
    let drift = (2.0 * bath.gamma.max_abs() + 4.0 * bath.anomalous.max_abs()) * w * l1 / h;
    let rate = kinetic + diffusion + drift;
    if rate == 0.0 {
        f64::INFINITY
    } else {
        RK4_STABILITY_RADIUS / rate
    }
}

/// The right-hand side operator for one particle mass and bath.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    pub mass: f64,
    pub bath: BathModel,
    pub spatial_order: SpatialOrder,
    pub kinetic: bool,
    pub anomalous: bool,
}

impl MasterEquation {
    pub fn new(mass: f64, bath: BathModel, cfg: &IntegratorConfig) -> Self {
        Self {
            mass,
            bath,
            spatial_order: cfg.spatial_order,
            kinetic: cfg.kinetic,
            anomalous: cfg.anomalous,
        }
    }

    /// dρ/dt for a row-major n×n matrix.
    pub fn rhs_into(&self, h: f64, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = (rho.len() as f64).sqrt() as usize;
        assert_eq!(n * n, rho.len());
        assert_eq!(out.len(), rho.len());

        let c = self.bath.sample(t);
        let kin = if self.kinetic { 0.5 / self.mass } else { 0.0 };
        let dq = 0.25 * c.diffusion;
        let gamma = c.gamma;
        let f2 = if self.anomalous {
            2.0 * c.anomalous
        } else {
            0.0
        };

        let (s2, s1) = self.spatial_order.stencils();
        let (a2, b2) = (s2[0] / (h * h), s2[1] / (h * h));
        let (a1, b1) = (s1[4] / h, s1[3] / h);

        let zero_row = vec![Complex64::new(0.0, 0.0); n];
        let row = |k: isize| -> &[Complex64] {
            if k < 0 || k >= n as isize {
                &zero_row
            } else {
                let k = k as usize;
                &rho[k * n..(k + 1) * n]
            }
        };

        out.par_chunks_mut(n).enumerate().for_each(|(i, out_row)| {
            let ii = i as isize;
            let (dn2, dn1, ctr, up1, up2) =
                (row(ii - 2), row(ii - 1), row(ii), row(ii + 1), row(ii + 2));
            let zero = Complex64::new(0.0, 0.0);
            let at = |j: isize| -> Complex64 {
                if j < 0 || j >= n as isize {
                    zero
                } else {
                    ctr[j as usize]
                }
            };
            for j in 0..n {
                let (l2, l1, r1, r2) = if j >= 2 && j + 2 < n {
                    (ctr[j - 2], ctr[j - 1], ctr[j + 1], ctr[j + 2])
                } else {
                    let jj = j as isize;
                    (at(jj - 2), at(jj - 1), at(jj + 1), at(jj + 2))
                };
                let v = ctr[j];
                // ∂²ₓ − ∂²ₓ′: the centre weights cancel.
                let lap = (up2[j] + dn2[j] - l2 - r2) * a2 + (up1[j] + dn1[j] - l1 - r1) * b2;
                let dx = (up1[j] - dn1[j]) * b1 + (up2[j] - dn2[j]) * a1;
                let dxp = (r1 - l1) * b1 + (r2 - l2) * a1;
                let r = (i as f64 - j as f64) * h;
                let kinetic = Complex64::new(-lap.im * kin, lap.re * kin);
                out_row[j] =
                    kinetic - v * (dq * r * r) + dx * ((f2 - gamma) * r) + dxp * ((f2 + gamma) * r);
            }
        });
    }

    pub fn rhs(&self, rho: &DensityMatrixGrid, t: f64) -> Array2<Complex64> {
        let n = rho.dim();
        let input = rho.values.as_standard_layout();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        self.rhs_into(
            rho.grid.spacing(),
            t,
            input.as_slice().expect("standard layout"),
            &mut out,
        );
        Array2::from_shape_vec((n, n), out).expect("shape")
    }
}

/// dρ/dt at time `t`.
pub fn rhs(
    rho: &DensityMatrixGrid,
    mass: f64,
    bath: &BathModel,
    cfg: &IntegratorConfig,
    t: f64,
) -> Array2<Complex64> {
    MasterEquation::new(mass, bath.clone(), cfg).rhs(rho, t)
}

/// Per-step health of the state, recorded after projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub time: f64,
    pub trace: f64,
    pub hermiticity_defect: f64,
    /// Anti-Hermitian residue removed by the projection.
    pub projection_residue: f64,
    pub boundary_mass: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    /// Times of `snapshots`.
    pub times: Vec<f64>,
    pub snapshots: Vec<DensityMatrixGrid>,
    /// One entry per step, starting with the initial state.
    pub diagnostics: Vec<StepDiagnostics>,
    /// Re ρ(x, x) at every diagnostics time.
    pub diagonals: Vec<Vec<f64>>,
    pub dt: f64,
}

impl EvolutionRecord {
    pub fn step_times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.time).collect()
    }

    pub fn final_state(&self) -> &DensityMatrixGrid {
        self.snapshots
            .last()
            .expect("record holds at least the initial state")
    }

    pub fn max_trace_error(&self) -> f64 {
        let t0 = self.diagnostics[0].trace;
        self.diagnostics
            .iter()
            .map(|d| (d.trace - t0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.hermiticity_defect)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run aborted: {reason}")]
    Aborted {
        reason: RunAbort,
        partial: Box<EvolutionRecord>,
    },
}

fn diagnose(rho: &DensityMatrixGrid, residue: f64) -> StepDiagnostics {
    StepDiagnostics {
        time: rho.time,
        trace: rho.trace(),
        hermiticity_defect: rho.hermiticity_defect(),
        projection_residue: residue,
        boundary_mass: rho.boundary_mass(),
    }
}

/// Integrates from `rho0.time` to `rho0.time + t_final`.
///
/// The step is shrunk so that an integer number of steps lands exactly on
/// the final time. Every `snapshot_stride` steps the full state is kept;
/// the initial and final states are always kept.
pub fn evolve(
    rho0: &DensityMatrixGrid,
    mass: f64,
    bath: &BathModel,
    cfg: &IntegratorConfig,
    t_final: f64,
    snapshot_stride: usize,
) -> Result<EvolutionRecord, EvolveError> {
    if !(mass > 0.0) {
        return Err(ConfigError::InvalidParameter {
            name: "mass",
            value: mass,
        }
        .into());
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(ConfigError::InvalidParameter {
            name: "t_final",
            value: t_final,
        }
        .into());
    }
    cfg.check(&rho0.grid, mass, bath)?;
    let stride = snapshot_stride.max(1);

    let steps = (t_final / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let eq = MasterEquation::new(mass, bath.clone(), cfg);

    let n = rho0.dim();
    let h = rho0.grid.spacing();
    let t0 = rho0.time;
    let mut state = rho0.clone();
    state.values = state.values.as_standard_layout().into_owned();
    let trace0 = state.trace();

    let mut record = EvolutionRecord {
        times: vec![t0],
        snapshots: vec![state.clone()],
        diagnostics: vec![diagnose(&state, 0.0)],
        diagonals: vec![state.diagonal()],
        dt,
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut k = vec![zero; n * n];
    let mut acc = vec![zero; n * n];
    let mut tmp = vec![zero; n * n];

    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * dt;
        {
            let y = state.values.as_slice_mut().expect("standard layout");
            eq.rhs_into(h, t, y, &mut k);
            stage(y, &k, dt / 6.0, dt / 2.0, &mut acc, &mut tmp, true);
            eq.rhs_into(h, t + 0.5 * dt, &tmp, &mut k);
            stage(y, &k, dt / 3.0, dt / 2.0, &mut acc, &mut tmp, false);
            eq.rhs_into(h, t + 0.5 * dt, &tmp, &mut k);
            stage(y, &k, dt / 3.0, dt, &mut acc, &mut tmp, false);
            eq.rhs_into(h, t + dt, &tmp, &mut k);
            acc.par_iter_mut()
                .zip(k.par_iter())
                .for_each(|(a, k)| *a += k * (dt / 6.0));
            y.copy_from_slice(&acc);
        }
        state.time = t0 + step as f64 * dt;
        let residue = state.symmetrize();
        let diag = diagnose(&state, residue);
        record.diagnostics.push(diag);
        record.diagonals.push(state.diagonal());

        let abort = if !diag.trace.is_finite() {
            Some(RunAbort::NonFinite { time: state.time })
        } else if (diag.trace / trace0 - 1.0).abs() > TRACE_ABORT {
            Some(RunAbort::TraceDrift {
                trace: diag.trace,
                time: state.time,
            })
        } else if diag.boundary_mass > BOUNDARY_ABORT * trace0.abs() {
            Some(RunAbort::BoundaryMass {
                mass: diag.boundary_mass,
                time: state.time,
            })
        } else {
            None
        };
        if let Some(reason) = abort {
            record.times.push(state.time);
            record.snapshots.push(state);
            return Err(EvolveError::Aborted {
                reason,
                partial: Box::new(record),
            });
        }
        if step % stride == 0 || step == steps {
            record.times.push(state.time);
            record.snapshots.push(state.clone());
        }
    }
    Ok(record)
}

/// acc (+)= w_acc k;  tmp = y + w_tmp k.
fn stage(
    y: &[Complex64],
    k: &[Complex64],
    w_acc: f64,
    w_tmp: f64,
    acc: &mut [Complex64],
    tmp: &mut [Complex64],
    first: bool,
) {
    acc.par_iter_mut()
        .zip(tmp.par_iter_mut())
        .zip(y.par_iter().zip(k.par_iter()))
        .for_each(|((a, t), (y, k))| {
            if first {
                *a = y + k * w_acc;
            } else {
                *a += k * w_acc;
            }
            *t = y + k * w_tmp;
        });
}
