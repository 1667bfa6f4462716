//! Reduced density-matrix dynamics of a massive particle in a two-slit
//! experiment coupled to a quantum-Brownian-motion bath.
//!
//! Everything uses ħ = 1. The main pieces are
//!
//! - [`lattice`]: grids, the density-matrix container and initial states,
//! - [`coefficients`]: the bath coefficients γ(t), 𝒟(t), f(t),
//! - [`dynamics`]: the finite-difference RK4 master-equation integrator,
//! - [`analytic`]: free-packet references, Γ(t) and the decoherence time,
//! - [`observables`]: screen density, visibility and the Wigner function,
//! - [`incoherence`]: the J₀(|C|) attenuation model.

pub mod analytic;
pub mod coefficients;
pub mod dynamics;
pub mod error;
pub mod incoherence;
pub mod lattice;
pub mod observables;

pub use analytic::GammaConvention;
pub use coefficients::{BathModel, Coefficient};
pub use dynamics::{evolve, EvolutionRecord, EvolveError, IntegratorConfig, SpatialOrder};
pub use error::{ConfigError, RunAbort};
pub use incoherence::{bessel_j0, IncoherenceParams};
pub use lattice::{DensityMatrixGrid, Grid1D, SuperpositionParams};
pub use observables::{VisibilitySeries, WignerGrid};
