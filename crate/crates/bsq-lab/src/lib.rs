//! Numerical laboratory for the strongly dispersive one-dimensional Boussinesq
//! system
//!
//! ```text
//! ∂tζ + (1 + ε∂x²)∂x v + ε∂x(ζv) = 0
//! ∂tv + (1 + ε∂x²)∂x ζ + (ε/2)∂x(v²) = 0
//! ```
//!
//! and its unit-scale version (ε = 1 in every coefficient).
//!
//! Modules, bottom up:
//!
//! * [`spectral`]: periodic grids, fields, Fourier multipliers, norms, dealiasing.
//! * [`littlewood_paley`]: dyadic cutoffs, projections, para-products `T_f g` and
//!   remainders `R(f,g)`.
//! * [`phases`]: dispersion `Λ_ε`, quadratic phases `Φ_{μ,ν}` with closed forms,
//!   modulation functions and small-modulation set measures.
//! * [`good_unknowns`]: the bilinear correction `B`, good unknowns `(ζ, u, V)`,
//!   profiles, symbol families, O(n²) pseudo-products and the symmetrized
//!   right-hand side with its residual checks.
//! * [`evolution`]: Lawson-RK4 time stepping for the Boussinesq and diagonal
//!   KdV-type systems, conserved quantities, trajectory I/O.
//! * [`experiments`]: scaling, convergence, resonance atlas and energy-budget studies.
//! * [`cli`]: configuration parsing and command dispatch for the `bsqlab` binary.

use serde::{Deserialize, Serialize};

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod good_unknowns;
pub mod littlewood_paley;
pub mod phases;
pub mod plot;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{ComplexField, FourierMultiplier, Grid, Norm, RealField};

/// Scaling of the system: the unit model has every ε set to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Unit,
    Eps(f64),
}

impl Model {
    /// Validated ε-model with `0 < ε < 1`.
    pub fn eps_model(eps: f64) -> Result<Model> {
        if eps > 0.0 && eps < 1.0 {
            Ok(Model::Eps(eps))
        } else {
            Err(Error::Config(format!("epsilon = {eps} must lie in (0, 1)")))
        }
    }

    /// ε entering the coefficients (1 for the unit model).
    pub fn eps(&self) -> f64 {
        match self {
            Model::Unit => 1.0,
            Model::Eps(e) => *e,
        }
    }
}
