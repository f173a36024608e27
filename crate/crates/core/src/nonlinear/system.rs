//! Discrete residual of the height-function system and its analytic Jacobian.
//!
//! Interior rows carry the PDE multiplied by z0², written in σ = z/z0:
//! (1 + h_w²)h_σσ − 2h_σ h_w h_wσ + h_σ² h_ww − c1 h_σ³/z0.
//! Top rows carry 1 + h_w² − [Q − 2F(w, h − d)] h_σ/z0 with a one-sided h_σ.

use serde::{Deserialize, Serialize};

use super::HeightField;
use crate::error::Result;
use crate::model::BodyForceModel;

/// One residual row with its stencil derivatives.
#[derive(Debug, Clone, Copy)]
pub struct LocalRow {
    pub value: f64,
    /// (column offset, row offset, ∂row/∂h) for each stencil node.
    pub entries: [(isize, isize, f64); 9],
    pub len: usize,
    pub d_q: f64,
    pub d_z0: f64,
}

impl LocalRow {
    fn new(value: f64) -> Self {
        Self {
            value,
            entries: [(0, 0, 0.0); 9],
            len: 0,
            d_q: 0.0,
            d_z0: 0.0,
        }
    }

    fn add(&mut self, dj: isize, di: isize, v: f64) {
        if let Some(e) = self.entries[..self.len].iter_mut().find(|e| e.0 == dj && e.1 == di) {
            e.2 += v;
        } else {
            self.entries[self.len] = (dj, di, v);
            self.len += 1;
        }
    }

    pub fn stencil(&self) -> &[(isize, isize, f64)] {
        &self.entries[..self.len]
    }
}

/// Interior row at periodic column j and 1 ≤ i < nz.
pub fn interior_row(field: &HeightField, force: &BodyForceModel, j: usize, i: usize) -> LocalRow {
    let _ = force;
    let (ds, dw) = (field.dsigma(), field.dw());
    let c1 = field.params.c1;
    let z0 = field.z0;
    let j = j as isize;
    let v = |dj: isize, di: isize| field.at(j + dj, (i as isize + di) as usize);

    let hs = (v(0, 1) - v(0, -1)) / (2.0 * ds);
    let hss = (v(0, 1) - 2.0 * v(0, 0) + v(0, -1)) / (ds * ds);
    let hw = (v(1, 0) - v(-1, 0)) / (2.0 * dw);
    let hww = (v(1, 0) - 2.0 * v(0, 0) + v(-1, 0)) / (dw * dw);
    let hws = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * dw * ds);

    let value = (1.0 + hw * hw) * hss - 2.0 * hs * hw * hws + hs * hs * hww - c1 * hs.powi(3) / z0;
    let mut row = LocalRow::new(value);

    let d_hw = 2.0 * hw * hss - 2.0 * hs * hws;
    let d_hss = 1.0 + hw * hw;
    let d_hs = -2.0 * hw * hws + 2.0 * hs * hww - 3.0 * c1 * hs * hs / z0;
    let d_hws = -2.0 * hs * hw;
    let d_hww = hs * hs;

    row.add(0, 1, d_hs / (2.0 * ds) + d_hss / (ds * ds));
    row.add(0, -1, -d_hs / (2.0 * ds) + d_hss / (ds * ds));
    row.add(0, 0, -2.0 * d_hss / (ds * ds) - 2.0 * d_hww / (dw * dw));
    row.add(1, 0, d_hw / (2.0 * dw) + d_hww / (dw * dw));
    row.add(-1, 0, -d_hw / (2.0 * dw) + d_hww / (dw * dw));
    let c = d_hws / (4.0 * dw * ds);
    row.add(1, 1, c);
    row.add(1, -1, -c);
    row.add(-1, 1, -c);
    row.add(-1, -1, c);
    row.d_z0 = c1 * hs.powi(3) / (z0 * z0);
    row
}

/// Top row at periodic column j.
pub fn top_row(field: &HeightField, force: &BodyForceModel, j: usize) -> LocalRow {
    let n = field.nz;
    let (ds, dw) = (field.dsigma(), field.dw());
    let d = field.params.d;
    let z0 = field.z0;
    let jj = j as isize;
    let top = |dj: isize| field.at(jj + dj, n);

    let w = field.w(j);
    let ht = top(0);
    let hs = (3.0 * ht - 4.0 * field.at(jj, n - 1) + field.at(jj, n - 2)) / (2.0 * ds);
    let hw = (top(1) - top(-1)) / (2.0 * dw);
    let head = field.q - 2.0 * force.potential(w, ht - d, d);
    let value = 1.0 + hw * hw - head * hs / z0;
    let mut row = LocalRow::new(value);

    row.add(1, 0, 2.0 * hw / (2.0 * dw));
    row.add(-1, 0, -2.0 * hw / (2.0 * dw));
    let d_hs = -head / z0;
    row.add(0, 0, 3.0 * d_hs / (2.0 * ds) + 2.0 * force.f2(w, ht - d) * hs / z0);
    row.add(0, -1, -4.0 * d_hs / (2.0 * ds));
    row.add(0, -2, d_hs / (2.0 * ds));
    row.d_q = -hs / z0;
    row.d_z0 = head * hs / (z0 * z0);
    row
}

/// All residuals of a field on the full periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBundle {
    /// `interior[j * (nz − 1) + (i − 1)]` for 1 ≤ i < nz, j < nw.
    pub interior: Vec<f64>,
    pub top: Vec<f64>,
    pub mass: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

impl ResidualBundle {
    pub fn interior_norm(&self) -> f64 {
        max_abs(&self.interior)
    }

    pub fn top_norm(&self) -> f64 {
        max_abs(&self.top)
    }

    pub fn max_norm(&self) -> f64 {
        self.interior_norm().max(self.top_norm()).max(self.mass.abs())
    }
}

/// Residual bundle of a field; fails on a stagnation breach.
pub fn residual(field: &HeightField, force: &BodyForceModel) -> Result<ResidualBundle> {
    field.check_monotone()?;
    Ok(residual_unchecked(field, force))
}

pub(crate) fn residual_unchecked(field: &HeightField, force: &BodyForceModel) -> ResidualBundle {
    let (nw, nz) = (field.nw, field.nz);
    let mut interior = Vec::with_capacity(nw * (nz - 1));
    for j in 0..nw {
        for i in 1..nz {
            interior.push(interior_row(field, force, j, i).value);
        }
    }
    let top = (0..nw).map(|j| top_row(field, force, j).value).collect();
    ResidualBundle {
        interior,
        top,
        mass: field.mean_surface() - field.params.d,
    }
}

/// Jacobian-vector product on the full grid. `dh` uses the field layout; its
/// bottom row is ignored (Dirichlet).
pub fn jacobian_apply(
    field: &HeightField,
    force: &BodyForceModel,
    dh: &[f64],
    dq: f64,
    dz0: f64,
) -> ResidualBundle {
    let (nw, nz) = (field.nw, field.nz);
    let at = |j: isize, i: isize| -> f64 {
        if i == 0 {
            0.0
        } else {
            dh[field.idx(j.rem_euclid(nw as isize) as usize, i as usize)]
        }
    };
    let apply = |row: &LocalRow, j: usize, i: usize| -> f64 {
        row.stencil()
            .iter()
            .map(|&(dj, di, c)| c * at(j as isize + dj, i as isize + di))
            .sum::<f64>()
            + row.d_q * dq
            + row.d_z0 * dz0
    };
    let mut interior = Vec::with_capacity(nw * (nz - 1));
    for j in 0..nw {
        for i in 1..nz {
            interior.push(apply(&interior_row(field, force, j, i), j, i));
        }
    }
    let top = (0..nw).map(|j| apply(&top_row(field, force, j), j, nz)).collect();
    let mass = (0..nw).map(|j| dh[field.idx(j, nz)]).sum::<f64>() / nw as f64;
    ResidualBundle { interior, top, mass }
}
