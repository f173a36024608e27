use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laminar::{laminar_head, laminar_height, Coefficient};
use crate::model::ModelParams;

/// Height function h(w, σ) on [−π, π] × [0, 1] with σ = z/z0.
///
/// Samples include both w = −π and w = π, so there are (nw + 1) × (nz + 1) of
/// them; `h[j * (nz + 1) + i]` sits at w_j = −π + jΔw, σ_i = i/nz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub nw: usize,
    pub nz: usize,
    pub h: Vec<f64>,
    /// Bernoulli head.
    pub q: f64,
    pub z0: f64,
    pub params: ModelParams,
}

impl HeightField {
    pub fn check_grid(nw: usize, nz: usize) -> Result<()> {
        if nw < 4 || nw % 2 == 1 || nz < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid needs even nw >= 4 and nz >= 4, got {nw} x {nz}"
            )));
        }
        Ok(())
    }

    /// Samples `f(w, z)` with z in physical units.
    pub fn from_fn(
        nw: usize,
        nz: usize,
        z0: f64,
        q: f64,
        params: &ModelParams,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        Self::check_grid(nw, nz)?;
        let mut h = Vec::with_capacity((nw + 1) * (nz + 1));
        for j in 0..=nw {
            let w = -PI + 2.0 * PI * j as f64 / nw as f64;
            for i in 0..=nz {
                h.push(if i == 0 { 0.0 } else { f(w, z0 * i as f64 / nz as f64) });
            }
        }
        let mut field = Self {
            nw,
            nz,
            h,
            q,
            z0,
            params: *params,
        };
        field.close_period();
        Ok(field)
    }

    /// Sampled closed-form laminar state with its head.
    pub fn laminar(xi: f64, params: &ModelParams, nw: usize, nz: usize) -> Result<Self> {
        let coef = Coefficient::new(xi, params)?;
        let mut field = Self::from_fn(nw, nz, coef.z0, laminar_head(xi, params), params, |_, z| {
            laminar_height(z, &coef, params.d)
        })?;
        for j in 0..=nw {
            field.h[j * (nz + 1) + nz] = params.d;
        }
        Ok(field)
    }

    /// Field built from a w-independent column profile.
    pub fn from_column(column: &[f64], nw: usize, z0: f64, q: f64, params: &ModelParams) -> Result<Self> {
        let nz = column.len() - 1;
        Self::check_grid(nw, nz)?;
        let mut h = Vec::with_capacity((nw + 1) * (nz + 1));
        for _ in 0..=nw {
            h.extend_from_slice(column);
        }
        h[0] = 0.0;
        Ok(Self {
            nw,
            nz,
            h,
            q,
            z0,
            params: *params,
        })
    }

    #[inline]
    pub fn idx(&self, j: usize, i: usize) -> usize {
        j * (self.nz + 1) + i
    }

    /// Value at periodic column j (any integer) and row i.
    #[inline]
    pub fn at(&self, j: isize, i: usize) -> f64 {
        let nw = self.nw as isize;
        let jj = j.rem_euclid(nw) as usize;
        self.h[self.idx(jj, i)]
    }

    pub fn w(&self, j: usize) -> f64 {
        -PI + self.dw() * j as f64
    }

    pub fn dw(&self) -> f64 {
        2.0 * PI / self.nw as f64
    }

    pub fn dsigma(&self) -> f64 {
        1.0 / self.nz as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z0 * i as f64 / self.nz as f64
    }

    /// Copies column 0 onto the duplicate column at w = π.
    pub fn close_period(&mut self) {
        let nz1 = self.nz + 1;
        let (head, tail) = self.h.split_at_mut(self.nw * nz1);
        tail.copy_from_slice(&head[..nz1]);
    }

    /// Replaces h by its even part (h(w) + h(−w))/2.
    pub fn symmetrize(&mut self) {
        let nz1 = self.nz + 1;
        for j in 0..=self.nw / 2 {
            let mirror = (self.nw - j) % self.nw;
            for i in 0..nz1 {
                let avg = 0.5 * (self.h[j * nz1 + i] + self.h[mirror * nz1 + i]);
                self.h[j * nz1 + i] = avg;
                self.h[mirror * nz1 + i] = avg;
            }
        }
        self.close_period();
    }

    /// max |h(w) − h(−w)|.
    pub fn evenness_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.nw {
            let mirror = (self.nw - j) % self.nw;
            for i in 0..=self.nz {
                worst = worst.max((self.h[self.idx(j, i)] - self.h[self.idx(mirror, i)]).abs());
            }
        }
        worst
    }

    pub fn surface(&self) -> Vec<f64> {
        (0..=self.nw).map(|j| self.h[self.idx(j, self.nz)]).collect()
    }

    /// (1/2π)∫ h(w, z0) dw by the periodic trapezoid rule.
    pub fn mean_surface(&self) -> f64 {
        (0..self.nw).map(|j| self.h[self.idx(j, self.nz)]).sum::<f64>() / self.nw as f64
    }

    /// Samples without the duplicate column, as taken by the cosine decomposition.
    pub fn periodic_values(&self) -> &[f64] {
        &self.h[..self.nw * (self.nz + 1)]
    }

    /// Physical h_z at a node: centered inside, second-order one-sided at the ends.
    pub fn h_z(&self, j: usize, i: usize) -> f64 {
        let n = self.nz;
        let ds = self.dsigma();
        let c = |i| self.h[self.idx(j, i)];
        let hs = if i == 0 {
            (-3.0 * c(0) + 4.0 * c(1) - c(2)) / (2.0 * ds)
        } else if i == n {
            (3.0 * c(n) - 4.0 * c(n - 1) + c(n - 2)) / (2.0 * ds)
        } else {
            (c(i + 1) - c(i - 1)) / (2.0 * ds)
        };
        hs / self.z0
    }

    /// Fails with a stagnation breach at the first node where h_z ≤ 0.
    pub fn check_monotone(&self) -> Result<()> {
        for j in 0..self.nw {
            for i in 0..=self.nz {
                let hz = self.h_z(j, i);
                if !(hz > 0.0) {
                    return Err(Error::StagnationBreach { j, i, hz });
                }
            }
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &HeightField) -> f64 {
        self.h
            .iter()
            .zip(&other.h)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}
