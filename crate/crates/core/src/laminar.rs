//! The w-independent solution family H(z, ξ).
//!
//! With a = √(ξ² + 2c1(z0 − z)) the profile is H = d + (ξ − a)/c1, so that
//! H_z = 1/a, H(z0) = d and H(0) = 0 once z0 = d(d c1 + 2ξ)/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

fn check_xi(xi: f64) -> Result<()> {
    if xi.is_finite() && xi > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("xi must be positive, got {xi}")))
    }
}

/// Flow-force height of the rectangle on the laminar branch.
pub fn z0_of_xi(xi: f64, params: &ModelParams) -> Result<f64> {
    check_xi(xi)?;
    Ok(params.d * (params.d * params.c1 + 2.0 * xi) / 2.0)
}

/// Inverse of [`z0_of_xi`].
pub fn xi_of_z0(z0: f64, params: &ModelParams) -> f64 {
    (2.0 * z0 / params.d - params.d * params.c1) / 2.0
}

/// Bernoulli head of the laminar flow, Q = ξ + 2 F(surface) = ξ + 2 c3.
pub fn laminar_head(xi: f64, params: &ModelParams) -> f64 {
    xi + 2.0 * params.c3
}

/// The coefficient a(z) = √(ξ² + 2c1(z0 − z)) for one ξ.
///
/// `z0` is stored separately so that a can also be evaluated off the laminar
/// relation between z0 and ξ (fixed-height variations in ξ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub xi: f64,
    pub c1: f64,
    pub z0: f64,
}

impl Coefficient {
    pub fn new(xi: f64, params: &ModelParams) -> Result<Self> {
        Ok(Self {
            xi,
            c1: params.c1,
            z0: z0_of_xi(xi, params)?,
        })
    }

    #[inline]
    pub fn a(&self, z: f64) -> f64 {
        (self.xi * self.xi + 2.0 * self.c1 * (self.z0 - z)).sqrt()
    }

    #[inline]
    pub fn a_z(&self, z: f64) -> f64 {
        -self.c1 / self.a(z)
    }

    /// ∂a/∂ξ with z0 held fixed.
    pub fn a_xi_fixed_height(&self, z: f64) -> f64 {
        self.xi / self.a(z)
    }

    /// ∂a/∂ξ with z0 = z0(ξ) following the laminar relation (dz0/dξ = d).
    pub fn a_xi_laminar(&self, z: f64, d: f64) -> f64 {
        (self.xi + self.c1 * d) / self.a(z)
    }
}

/// Checked evaluation of a(z, ξ) on [0, z0].
pub fn coefficient_a(z: f64, xi: f64, params: &ModelParams) -> Result<f64> {
    let coef = Coefficient::new(xi, params)?;
    if !(0.0..=coef.z0).contains(&z) {
        return Err(Error::InvalidParameter(format!(
            "z = {z} outside [0, z0 = {}]",
            coef.z0
        )));
    }
    Ok(coef.a(z))
}

/// Closed-form height H(z) for given ξ.
pub fn laminar_height(z: f64, coef: &Coefficient, d: f64) -> f64 {
    d + (coef.xi - coef.a(z)) / coef.c1
}

/// Sampled laminar solution on a uniform grid of [0, z0].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminarProfile {
    pub xi: f64,
    pub z0: f64,
    /// Bernoulli head.
    pub q: f64,
    pub c1: f64,
    pub d: f64,
    pub z: Vec<f64>,
    pub h: Vec<f64>,
    pub hz: Vec<f64>,
    pub a: Vec<f64>,
}

impl LaminarProfile {
    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    pub fn coefficient(&self) -> Coefficient {
        Coefficient {
            xi: self.xi,
            c1: self.c1,
            z0: self.z0,
        }
    }
}

pub fn laminar_profile(xi: f64, n: usize, params: &ModelParams) -> Result<LaminarProfile> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!("need at least 8 intervals, got {n}")));
    }
    let coef = Coefficient::new(xi, params)?;
    let z: Vec<f64> = (0..=n).map(|i| coef.z0 * i as f64 / n as f64).collect();
    let a: Vec<f64> = z.iter().map(|&z| coef.a(z)).collect();
    let mut h: Vec<f64> = z.iter().map(|&z| laminar_height(z, &coef, params.d)).collect();
    // Pin the end values: they are exact by construction.
    h[0] = 0.0;
    h[n] = params.d;
    Ok(LaminarProfile {
        xi,
        z0: coef.z0,
        q: laminar_head(xi, params),
        c1: params.c1,
        d: params.d,
        hz: a.iter().map(|a| 1.0 / a).collect(),
        z,
        h,
        a,
    })
}

/// Outcome of the independent ODE check of a laminar profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaminarCheck {
    /// max |H_rk4 − H_closed| over the grid.
    pub ode_residual: f64,
    /// |1 − [Q − 2F(H(z0) − d)] H_z(z0)|.
    pub surface_residual: f64,
}

/// Integrates H_zz = c1 H_z³ from z = 0 by classical RK4 on the profile grid and
/// compares with the closed form. The surface relation uses the potential of the
/// constant model, F(y) = c1(y + d).
pub fn verify_laminar_ode(profile: &LaminarProfile) -> LaminarCheck {
    let c1 = profile.c1;
    let n = profile.n();
    let step = profile.z0 / n as f64;
    let rhs = |s: [f64; 2]| [s[1], c1 * s[1].powi(3)];
    let mut state = [0.0, 1.0 / profile.a[0]];
    let mut worst = 0.0f64;
    for i in 0..n {
        let k1 = rhs(state);
        let k2 = rhs([state[0] + 0.5 * step * k1[0], state[1] + 0.5 * step * k1[1]]);
        let k3 = rhs([state[0] + 0.5 * step * k2[0], state[1] + 0.5 * step * k2[1]]);
        let k4 = rhs([state[0] + step * k3[0], state[1] + step * k3[1]]);
        for c in 0..2 {
            state[c] += step / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        worst = worst.max((state[0] - profile.h[i + 1]).abs());
    }
    let surface_potential = c1 * profile.h[n];
    let surface_residual = (1.0 - (profile.q - 2.0 * surface_potential) * profile.hz[n]).abs();
    LaminarCheck {
        ode_residual: worst,
        surface_residual,
    }
}
