//! Spatial grids, the density-matrix container and the initial states.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::ConfigError;

/// Boundary mass allowed in a freshly constructed state, relative to the trace.
pub const INITIAL_BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Uniform, endpoint-inclusive 1-D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 16;

    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, ConfigError> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(ConfigError::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < Self::MIN_POINTS {
            return Err(ConfigError::InvalidGrid(format!(
                "need at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid on `[-extent, extent]`.
    pub fn symmetric(extent: f64, n_points: usize) -> Result<Self, ConfigError> {
        Self::new(-extent, extent, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.width()
    }

    /// Lower node index and linear weight of the upper node for `x`, or `None`
    /// outside the grid.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if x < self.x_min || x > self.x_max {
            return None;
        }
        let u = (x - self.x_min) / self.spacing();
        let i = (u.floor() as usize).min(self.n_points - 2);
        Some((i, u - i as f64))
    }

    /// Linear interpolation of nodal `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Option<f64> {
        debug_assert_eq!(values.len(), self.n_points);
        let (i, w) = self.locate(x)?;
        Some(values[i] * (1.0 - w) + values[i + 1] * w)
    }

    /// Number of nodes on each side counted as the absorbing boundary band.
    pub fn boundary_band(&self) -> usize {
        (self.n_points / 32).max(4)
    }
}

/// Parameters of the two-Gaussian initial state and the free transverse packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionParams {
    /// Half-separation of the slit centres.
    pub l0: f64,
    pub sigma_x0: f64,
    pub sigma_y0: f64,
    /// Mean momentum along the beam (hbar = 1).
    pub k_y: f64,
    pub mass: f64,
}

impl SuperpositionParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            ("l0", self.l0, self.l0 >= 0.0),
            ("sigma_x0", self.sigma_x0, self.sigma_x0 > 0.0),
            ("sigma_y0", self.sigma_y0, self.sigma_y0 > 0.0),
            ("k_y", self.k_y, self.k_y > 0.0),
            ("mass", self.mass, self.mass > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(ConfigError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// 2π/k_y.
    pub fn de_broglie_wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.k_y
    }

    /// Distance between the two packet centres.
    pub fn slit_separation(&self) -> f64 {
        2.0 * self.l0
    }

    /// Soft violations: overlapping packets and a beam whose momentum is not
    /// sharp compared to its transverse width.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.l0 > 0.0 && self.l0 < self.sigma_x0 {
            out.push(format!(
                "packets overlap: l0/sigma_x0 = {:.3} < 1",
                self.l0 / self.sigma_x0
            ));
        }
        let lambda = self.de_broglie_wavelength();
        if lambda > 0.1 * self.sigma_y0 {
            out.push(format!(
                "beam momentum not sharp: lambda_dB = {lambda:.4e} is not << sigma_y0 = {:.4e}",
                self.sigma_y0
            ));
        }
        out
    }

    /// Half-width the grid must cover so the initial packets fit with six
    /// standard deviations to spare.
    pub fn required_extent(&self) -> f64 {
        self.l0 + 6.0 * self.sigma_x0
    }
}

/// ρ(x, x′) on a square grid, row index for x and column index for x′.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixGrid {
    pub grid: Grid1D,
    pub values: Array2<Complex64>,
    pub time: f64,
}

impl DensityMatrixGrid {
    pub fn new(grid: Grid1D, values: Array2<Complex64>, time: f64) -> Self {
        assert_eq!(
            values.dim(),
            (grid.len(), grid.len()),
            "matrix shape must match grid"
        );
        Self { grid, values, time }
    }

    /// ρ = ψ ψ† for nodal amplitudes ψ.
    pub fn from_wavefunction(grid: Grid1D, psi: &[Complex64], time: f64) -> Self {
        let n = grid.len();
        assert_eq!(psi.len(), n);
        let values = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self { grid, values, time }
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn trace(&self) -> f64 {
        self.values.diag().iter().map(|z| z.re).sum::<f64>() * self.grid.spacing()
    }

    /// Real part of the diagonal, the position probability density.
    pub fn diagonal(&self) -> Vec<f64> {
        self.values.diag().iter().map(|z| z.re).collect()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let v = &self.values;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((v[[i, j]] - v[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// max |ρ(x, x′) − ρ(−x, −x′)|; only meaningful on a symmetric grid.
    pub fn mirror_defect(&self) -> f64 {
        let n = self.dim();
        let v = &self.values;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((v[[i, j]] - v[[n - 1 - i, n - 1 - j]]).norm());
            }
        }
        worst
    }

    /// Tr ρ² with the grid measure.
    pub fn purity(&self) -> f64 {
        let h = self.grid.spacing();
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * h * h
    }

    /// Probability carried by the outer band of nodes on both sides.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.dim();
        let band = self.grid.boundary_band().min(n / 2);
        let diag = self.values.diag();
        let edge: f64 = (0..band).chain(n - band..n).map(|i| diag[i].re.abs()).sum();
        edge * self.grid.spacing()
    }

    /// Replaces ρ by (ρ + ρ†)/2 and returns the defect removed.
    pub fn symmetrize(&mut self) -> f64 {
        let n = self.dim();
        let v = &mut self.values;
        let mut worst = 0.0f64;
        for i in 0..n {
            let d = v[[i, i]];
            worst = worst.max(2.0 * d.im.abs());
            v[[i, i]] = Complex64::new(d.re, 0.0);
            for j in i + 1..n {
                let a = v[[i, j]];
                let b = v[[j, i]];
                worst = worst.max((a - b.conj()).norm());
                let avg = (a + b.conj()) * 0.5;
                v[[i, j]] = avg;
                v[[j, i]] = avg.conj();
            }
        }
        worst
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.mapv_inplace(|z| z * factor);
        self
    }
}

fn gaussian(x: f64, center: f64, sigma: f64) -> f64 {
    let d = x - center;
    (-d * d / (4.0 * sigma * sigma)).exp()
}

/// Grid normalisation constant N with Σ|N u_i|² h = 1.
fn grid_norm(grid: &Grid1D, amplitudes: &[f64]) -> f64 {
    let norm2: f64 = amplitudes.iter().map(|a| a * a).sum::<f64>() * grid.spacing();
    1.0 / norm2.sqrt()
}

fn pure_state(grid: Grid1D, amplitudes: Vec<f64>) -> Result<DensityMatrixGrid, ConfigError> {
    let norm = grid_norm(&grid, &amplitudes);
    let psi: Vec<Complex64> = amplitudes
        .into_iter()
        .map(|a| Complex64::new(a * norm, 0.0))
        .collect();
    let rho = DensityMatrixGrid::from_wavefunction(grid, &psi, 0.0);
    let mass = rho.boundary_mass();
    if mass > INITIAL_BOUNDARY_TOLERANCE {
        return Err(ConfigError::BoundaryMass {
            mass,
            limit: INITIAL_BOUNDARY_TOLERANCE,
        });
    }
    Ok(rho)
}

/// Unnormalised amplitudes u₁ + u₂ of the two-slit state on the grid.
pub fn superposition_amplitudes(p: &SuperpositionParams, grid: &Grid1D) -> Vec<f64> {
    grid.points()
        .map(|x| gaussian(x, p.l0, p.sigma_x0) + gaussian(x, -p.l0, p.sigma_x0))
        .collect()
}

/// Unnormalised amplitude of one packet centred at `center`.
pub fn packet_amplitudes(center: f64, p: &SuperpositionParams, grid: &Grid1D) -> Vec<f64> {
    grid.points()
        .map(|x| gaussian(x, center, p.sigma_x0))
        .collect()
}

/// Squared grid normalisation constant of the two-slit state, N².
pub fn superposition_norm_sqr(p: &SuperpositionParams, grid: &Grid1D) -> f64 {
    grid_norm(grid, &superposition_amplitudes(p, grid)).powi(2)
}

/// Squared grid normalisation constant of one packet.
pub fn packet_norm_sqr(center: f64, p: &SuperpositionParams, grid: &Grid1D) -> f64 {
    grid_norm(grid, &packet_amplitudes(center, p, grid)).powi(2)
}

/// Two Gaussian packets at ±l0, coherently superposed, with unit grid trace.
pub fn make_superposition_state(
    p: &SuperpositionParams,
    grid: Grid1D,
) -> Result<DensityMatrixGrid, ConfigError> {
    p.validate()?;
    pure_state(grid, superposition_amplitudes(p, &grid))
}

/// A single packet of width sigma_x0 at `center`, with unit grid trace.
pub fn make_single_packet_state(
    center: f64,
    p: &SuperpositionParams,
    grid: Grid1D,
) -> Result<DensityMatrixGrid, ConfigError> {
    p.validate()?;
    pure_state(grid, packet_amplitudes(center, p, &grid))
}
