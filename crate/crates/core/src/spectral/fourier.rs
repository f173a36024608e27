use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cosine coefficients m_k(z) of a grid function even in w, with
/// g(w, z) = Σ_k m_k(z) cos(k w).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineModes {
    /// `coeffs[k][i]` is m_k at the i-th z sample.
    pub coeffs: Vec<Vec<f64>>,
    /// Energy of the odd part relative to the total.
    pub odd_ratio: f64,
}

impl CosineModes {
    pub fn kmax(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mode(&self, k: usize) -> &[f64] {
        &self.coeffs[k]
    }

    /// Largest |m_k| over z.
    pub fn amplitude(&self, k: usize) -> f64 {
        self.coeffs[k].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Resynthesized values on the same layout as the input.
    pub fn reconstruct(&self, nw: usize) -> Vec<f64> {
        let nz1 = self.coeffs[0].len();
        let mut out = vec![0.0; nw * nz1];
        for j in 0..nw {
            let w = sample_w(j, nw);
            for (k, mk) in self.coeffs.iter().enumerate() {
                let c = (k as f64 * w).cos();
                for i in 0..nz1 {
                    out[j * nz1 + i] += mk[i] * c;
                }
            }
        }
        out
    }
}

/// w_j = −π + 2πj/nw.
pub(crate) fn sample_w(j: usize, nw: usize) -> f64 {
    -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / nw as f64
}

/// Discrete cosine decomposition of a periodic grid function.
///
/// `values[j * nz1 + i]` is g(w_j, z_i) with w_j = −π + 2πj/nw, j < nw (the
/// periodic copy at w = π is not stored). Modes 0..=kmax are returned, kmax < nw/2.
pub fn cosine_decompose(values: &[f64], nw: usize, kmax: usize, tol: f64) -> Result<CosineModes> {
    if nw < 4 || values.is_empty() || values.len() % nw != 0 {
        return Err(Error::InvalidParameter(format!(
            "{} samples do not form {nw} periodic columns",
            values.len()
        )));
    }
    if 2 * kmax >= nw {
        return Err(Error::InvalidParameter(format!(
            "kmax = {kmax} not resolved by {nw} columns"
        )));
    }
    let nz1 = values.len() / nw;
    let mut odd = 0.0;
    let mut total = 0.0;
    for j in 0..nw {
        let mirror = (nw - j) % nw;
        for i in 0..nz1 {
            let g = values[j * nz1 + i];
            let diff = 0.5 * (g - values[mirror * nz1 + i]);
            odd += diff * diff;
            total += g * g;
        }
    }
    let odd_ratio = if total > 0.0 { odd / total } else { 0.0 };
    if odd_ratio > tol {
        return Err(Error::NotEven { ratio: odd_ratio });
    }
    let coeffs = (0..=kmax)
        .map(|k| {
            let weight = if k == 0 { 1.0 } else { 2.0 } / nw as f64;
            (0..nz1)
                .map(|i| {
                    weight
                        * (0..nw)
                            .map(|j| values[j * nz1 + i] * (k as f64 * sample_w(j, nw)).cos())
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();
    Ok(CosineModes { coeffs, odd_ratio })
}
