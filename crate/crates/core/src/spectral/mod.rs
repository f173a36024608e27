//! The linearized Sturm–Liouville problem (a³M_z)_z = −μ a M on [0, z0] with
//! M(0) = 0 and M_z(z0) = β M(z0), and the bifurcation diagnostics built on it.

mod bifurcation;
mod eigen;
mod fourier;

pub use bifurcation::{
    depth_condition, find_xi_star, find_xi_star_with, kernel_report, mu_lower_bound,
    mu_lower_bound_printed, mu_scan, transversality, transversality_at, DepthReport,
    KernelReport, ModeEntry, ScanOptions, ScanRow, TransversalityReport, XiStarReport,
};
pub use eigen::{
    mu_matrix, mu_matrix_raw, mu_shooting, rayleigh_quotient, EigenMethod, EigenResult,
    DEFAULT_SHOOTING_TOL,
};
pub use fourier::{cosine_decompose, CosineModes};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laminar::{laminar_head, z0_of_xi, Coefficient};
use crate::model::ModelParams;

/// How the Robin coefficient β at the top boundary is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryConvention {
    /// β = c2/(ξ(Q/2 − c3)) with the laminar head Q = ξ + 2c3, so β = 2c2/ξ².
    /// This is the linearization of the nonlinear surface condition.
    LaminarHead,
    /// β = c2/(ξ(ξ/2 − c3)), i.e. the same formula with Q replaced by ξ.
    AsPrinted,
    Explicit(f64),
}

impl BoundaryConvention {
    pub fn beta(&self, xi: f64, params: &ModelParams) -> Result<f64> {
        let beta = match *self {
            BoundaryConvention::LaminarHead => {
                let q = laminar_head(xi, params);
                params.c2 / (xi * (q / 2.0 - params.c3))
            }
            BoundaryConvention::AsPrinted => {
                if xi / 2.0 <= params.c3 {
                    return Err(Error::InvalidParameter(format!(
                        "boundary coefficient needs xi/2 > c3 (xi = {xi}, c3 = {})",
                        params.c3
                    )));
                }
                params.c2 / (xi * (xi / 2.0 - params.c3))
            }
            BoundaryConvention::Explicit(b) => b,
        };
        if beta.is_finite() {
            Ok(beta)
        } else {
            Err(Error::InvalidParameter(format!("boundary coefficient not finite at xi = {xi}")))
        }
    }
}

/// Discretized Sturm–Liouville problem at one ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SLProblem {
    pub xi: f64,
    /// Fourier mode the problem is attached to; −mode² is the target eigenvalue.
    pub mode: u32,
    pub beta: f64,
    pub z0: f64,
    pub c1: f64,
    /// Number of grid intervals.
    pub n: usize,
    pub z: Vec<f64>,
    pub a: Vec<f64>,
}

pub const MIN_INTERVALS: usize = 32;

impl SLProblem {
    /// Problem for mode 1 with the [`BoundaryConvention::LaminarHead`] coefficient.
    pub fn new(xi: f64, params: &ModelParams, n: usize) -> Result<Self> {
        Self::with_convention(xi, params, n, BoundaryConvention::LaminarHead)
    }

    pub fn with_convention(
        xi: f64,
        params: &ModelParams,
        n: usize,
        convention: BoundaryConvention,
    ) -> Result<Self> {
        let z0 = z0_of_xi(xi, params)?;
        let beta = convention.beta(xi, params)?;
        Self::from_parts(xi, params.c1, z0, beta, n)
    }

    /// Problem with all data given explicitly (z0 need not follow the laminar relation).
    pub fn from_parts(xi: f64, c1: f64, z0: f64, beta: f64, n: usize) -> Result<Self> {
        if n < MIN_INTERVALS {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_INTERVALS} intervals, got {n}"
            )));
        }
        if !(xi > 0.0 && c1 > 0.0 && z0 > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bad problem data xi = {xi}, c1 = {c1}, z0 = {z0}, beta = {beta}"
            )));
        }
        let coef = Coefficient { xi, c1, z0 };
        let z: Vec<f64> = (0..=n).map(|i| z0 * i as f64 / n as f64).collect();
        let a = z.iter().map(|&z| coef.a(z)).collect();
        Ok(Self {
            xi,
            mode: 1,
            beta,
            z0,
            c1,
            n,
            z,
            a,
        })
    }

    pub fn with_mode(mut self, mode: u32) -> Self {
        self.mode = mode;
        self
    }

    pub fn coefficient(&self) -> Coefficient {
        Coefficient {
            xi: self.xi,
            c1: self.c1,
            z0: self.z0,
        }
    }

    pub fn step(&self) -> f64 {
        self.z0 / self.n as f64
    }

    /// Same problem on a grid with `n` intervals.
    pub fn regrid(&self, n: usize) -> Result<Self> {
        Ok(Self::from_parts(self.xi, self.c1, self.z0, self.beta, n)?.with_mode(self.mode))
    }
}
