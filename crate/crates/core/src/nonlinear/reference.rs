//! The w-independent discrete solution and the discrete bifurcation point on a
//! given grid. These are the exact ε = 0 member and kernel direction of the
//! discrete branch, free of the O(spacing²) offset of their continuous analogues.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laminar::{laminar_head, laminar_height, xi_of_z0, z0_of_xi, Coefficient};
use crate::linalg::TridiagonalLu;
use crate::model::{BodyForceModel, ModelParams};

/// Discrete laminar column: h_0 = 0, h_nz = d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaminar {
    pub z0: f64,
    pub q: f64,
    pub h: Vec<f64>,
    /// Sensitivities of the column and head to z0.
    pub dh_dz0: Vec<f64>,
    pub dq_dz0: f64,
}

impl DiscreteLaminar {
    fn top_slope(&self) -> f64 {
        let n = self.h.len() - 1;
        (3.0 * self.h[n] - 4.0 * self.h[n - 1] + self.h[n - 2]) * n as f64 / 2.0
    }
}

/// Solves the one-dimensional discrete system for the laminar column at height z0.
pub fn discrete_laminar(
    z0: f64,
    nz: usize,
    params: &ModelParams,
    force: &BodyForceModel,
) -> Result<DiscreteLaminar> {
    let xi = xi_of_z0(z0, params);
    if !(xi > 0.0) {
        return Err(Error::InvalidParameter(format!("z0 = {z0} below the laminar range")));
    }
    let coef = Coefficient { xi, c1: params.c1, z0 };
    let d = params.d;
    let c1 = params.c1;
    let ds = 1.0 / nz as f64;
    let mut h: Vec<f64> = (0..=nz)
        .map(|i| laminar_height(z0 * i as f64 / nz as f64, &coef, d))
        .collect();
    h[0] = 0.0;
    h[nz] = d;
    let mut q = laminar_head(xi, params);
    let head = |q: f64| q - 2.0 * force.potential(0.0, 0.0, d);

    // Unknowns h_1..h_{nz-1}, Q.
    let size = nz;
    let mut last_norm = f64::NAN;
    for iter in 0..50 {
        let mut jac = DMatrix::<f64>::zeros(size, size);
        let mut res = DVector::<f64>::zeros(size);
        let mut d_z0 = DVector::<f64>::zeros(size);
        for i in 1..nz {
            let hs = (h[i + 1] - h[i - 1]) / (2.0 * ds);
            let hss = (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (ds * ds);
            res[i - 1] = hss - c1 * hs.powi(3) / z0;
            d_z0[i - 1] = c1 * hs.powi(3) / (z0 * z0);
            let d_hs = -3.0 * c1 * hs * hs / z0;
            let r = i - 1;
            jac[(r, r)] += -2.0 / (ds * ds);
            if i > 1 {
                jac[(r, r - 1)] += 1.0 / (ds * ds) - d_hs / (2.0 * ds);
            }
            if i + 1 < nz {
                jac[(r, r + 1)] += 1.0 / (ds * ds) + d_hs / (2.0 * ds);
            }
        }
        let hs_top = (3.0 * h[nz] - 4.0 * h[nz - 1] + h[nz - 2]) / (2.0 * ds);
        let r = nz - 1;
        res[r] = 1.0 - head(q) * hs_top / z0;
        d_z0[r] = head(q) * hs_top / (z0 * z0);
        jac[(r, nz - 2)] += -head(q) / z0 * (-4.0) / (2.0 * ds);
        if nz >= 3 {
            jac[(r, nz - 3)] += -head(q) / z0 / (2.0 * ds);
        }
        jac[(r, nz - 1)] += -hs_top / z0;

        let norm = res.amax();
        let lu = jac.lu();
        let step = lu
            .solve(&(-&res))
            .ok_or_else(|| Error::Singular("discrete laminar Jacobian".into()))?;
        let converged = step.amax() <= 1e-15 * (1.0 + q.abs()) || (iter > 0 && norm >= last_norm && norm <= 1e-13);
        if converged {
            let sens = lu
                .solve(&(-&d_z0))
                .ok_or_else(|| Error::Singular("discrete laminar Jacobian".into()))?;
            let mut dh_dz0 = vec![0.0; nz + 1];
            dh_dz0[1..nz].copy_from_slice(&sens.as_slice()[..nz - 1]);
            return Ok(DiscreteLaminar {
                z0,
                q,
                h,
                dh_dz0,
                dq_dz0: sens[nz - 1],
            });
        }
        last_norm = norm;
        for i in 1..nz {
            h[i] += step[i - 1];
        }
        q += step[nz - 1];
    }
    Err(Error::NotConverged {
        what: "discrete laminar",
        iterations: 50,
        residual: last_norm,
    })
}

/// Mode-one discrete kernel at the discrete bifurcation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub nw: usize,
    pub nz: usize,
    pub z0: f64,
    /// ξ corresponding to z0 on the laminar relation.
    pub xi: f64,
    pub q: f64,
    pub laminar: Vec<f64>,
    /// Kernel profile with value 1 at the top.
    pub mode: Vec<f64>,
    /// Top-row residual of the kernel profile.
    pub determinant_residual: f64,
}

/// Symbol of the discrete second w-difference on cos w.
fn mode_one_symbol(nw: usize) -> f64 {
    let dw = 2.0 * std::f64::consts::PI / nw as f64;
    (2.0 - 2.0 * dw.cos()) / (dw * dw)
}

/// Solves the interior mode-one rows with v_0 = 0, v_nz = 1 and returns
/// (top-row residual, v).
fn mode_one_shot(lam: &DiscreteLaminar, nw: usize, params: &ModelParams, force: &BodyForceModel) -> (f64, Vec<f64>) {
    let nz = lam.h.len() - 1;
    let ds = 1.0 / nz as f64;
    let k2 = mode_one_symbol(nw);
    let c1 = params.c1;
    let z0 = lam.z0;
    let h = &lam.h;
    let m = nz - 1;
    let mut sub = vec![0.0; m.saturating_sub(1)];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m.saturating_sub(1)];
    let mut rhs = vec![0.0; m];
    for i in 1..nz {
        let hs = (h[i + 1] - h[i - 1]) / (2.0 * ds);
        let d_hs = -3.0 * c1 * hs * hs / z0;
        let lower = 1.0 / (ds * ds) - d_hs / (2.0 * ds);
        let upper = 1.0 / (ds * ds) + d_hs / (2.0 * ds);
        let r = i - 1;
        diag[r] = -2.0 / (ds * ds) - hs * hs * k2;
        if i > 1 {
            sub[r - 1] = lower;
        }
        if i + 1 < nz {
            sup[r] = upper;
        } else {
            rhs[r] = -upper;
        }
    }
    TridiagonalLu::factor(&sub, &diag, &sup).solve_in_place(&mut rhs);
    let mut v = Vec::with_capacity(nz + 1);
    v.push(0.0);
    v.extend_from_slice(&rhs);
    v.push(1.0);
    let d = params.d;
    let head = lam.q - 2.0 * force.potential(0.0, h[nz] - d, d);
    let vs = (3.0 * v[nz] - 4.0 * v[nz - 1] + v[nz - 2]) / (2.0 * ds);
    let g = -head * vs / z0 + 2.0 * force.f2(0.0, h[nz] - d) * lam.top_slope() / z0 * v[nz];
    (g, v)
}

/// Top-row residual of the mode-one kernel candidate at height z0; zero at the
/// discrete bifurcation point.
pub fn mode_one_residual(
    z0: f64,
    nw: usize,
    nz: usize,
    params: &ModelParams,
    force: &BodyForceModel,
) -> Result<f64> {
    let lam = discrete_laminar(z0, nz, params, force)?;
    Ok(mode_one_shot(&lam, nw, params, force).0)
}

/// Locates the discrete bifurcation point near the continuous ξ*.
pub fn discrete_bifurcation_point(
    xi_star: f64,
    nw: usize,
    nz: usize,
    params: &ModelParams,
    force: &BodyForceModel,
) -> Result<BifurcationPoint> {
    let g = |z0: f64| mode_one_residual(z0, nw, nz, params, force);
    let mut x0 = z0_of_xi(xi_star, params)?;
    let mut x1 = x0 * (1.0 + 1e-3);
    let (mut g0, mut g1) = (g(x0)?, g(x1)?);
    let mut iterations = 0;
    while (x1 - x0).abs() > 4.0 * f64::EPSILON * x1.abs() && g1 != 0.0 {
        let next = x1 - g1 * (x1 - x0) / (g1 - g0);
        if !next.is_finite() || next <= 0.0 {
            return Err(Error::NotConverged {
                what: "discrete bifurcation point",
                iterations,
                residual: g1.abs(),
            });
        }
        x0 = x1;
        g0 = g1;
        x1 = next;
        g1 = g(x1)?;
        iterations += 1;
        if iterations > 60 {
            return Err(Error::NotConverged {
                what: "discrete bifurcation point",
                iterations,
                residual: g1.abs(),
            });
        }
    }
    let lam = discrete_laminar(x1, nz, params, force)?;
    let (residual, mode) = mode_one_shot(&lam, nw, params, force);
    Ok(BifurcationPoint {
        nw,
        nz,
        z0: x1,
        xi: xi_of_z0(x1, params),
        q: lam.q,
        laminar: lam.h,
        mode,
        determinant_residual: residual.abs(),
    })
}
