//! Physical velocity and pressure from a height field, and conservation audits.
//!
//! The flow-force function z has z_x = s1 = −h_w/h_z and z_y = s2 = 1/h_z, with
//! s1 = −(u − c)v and s2 = p/ρ + (u − c)². Eliminating v and p with Bernoulli
//! gives α⁴ + Kα² − s1² = 0 for α = u − c, K = Q − 2F − 2 s2; the root with
//! α < 0 is the one without stagnation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BodyForceModel;
use crate::nonlinear::HeightField;

/// Node-wise physical fields in the wave frame on the mapped grid x = w,
/// y = h(w, z) − d, stored like the height field: index j * (nz + 1) + i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalFields {
    pub nw: usize,
    pub nz: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    /// Surface elevation Ω(x) = h(x, z0) − d, one value per column.
    pub omega: Vec<f64>,
    pub q: f64,
    /// Mean over columns of ∫(u − c) dy.
    pub flux: f64,
    pub c: f64,
    pub rho: f64,
}

impl PhysicalFields {
    #[inline]
    pub fn idx(&self, j: usize, i: usize) -> usize {
        j * (self.nz + 1) + i
    }

    /// Trapezoid mean of Ω over one period.
    pub fn mean_omega(&self) -> f64 {
        self.omega[..self.nw].iter().sum::<f64>() / self.nw as f64
    }
}

/// h_w by periodic central differences.
fn h_w(field: &HeightField, j: usize, i: usize) -> f64 {
    let j = j as isize;
    (field.at(j + 1, i) - field.at(j - 1, i)) / (2.0 * field.dw())
}

/// Pointwise inversion of the flow-force variables.
pub fn physical_fields(field: &HeightField, force: &BodyForceModel) -> Result<PhysicalFields> {
    field.check_monotone()?;
    let params = &field.params;
    let (nw, nz) = (field.nw, field.nz);
    let d = params.d;
    let n = (nw + 1) * (nz + 1);
    let (mut x, mut y, mut u, mut v, mut p) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..=nw {
        let w = field.w(j);
        for i in 0..=nz {
            let hz = field.h_z(j, i);
            let s1 = -h_w(field, j, i) / hz;
            let s2 = 1.0 / hz;
            let yy = field.h[field.idx(j, i)] - d;
            let k = field.q - 2.0 * force.potential(w, yy, d) - 2.0 * s2;
            let alpha_sq = 0.5 * (-k + (k * k + 4.0 * s1 * s1).sqrt());
            if !(alpha_sq > 0.0) {
                return Err(Error::InversionBreakdown { j, i, alpha_sq });
            }
            let alpha = -alpha_sq.sqrt();
            x.push(w);
            y.push(yy);
            u.push(params.c + alpha);
            v.push(-s1 / alpha);
            p.push(params.rho * (s2 - alpha_sq));
        }
    }
    let omega = field.surface().iter().map(|h| h - d).collect();
    let mut fields = PhysicalFields {
        nw,
        nz,
        x,
        y,
        u,
        v,
        p,
        omega,
        q: field.q,
        flux: 0.0,
        c: params.c,
        rho: params.rho,
    };
    let fluxes = column_integrals(&fields, |f, k| f.u[k] - f.c);
    fields.flux = fluxes[..nw].iter().sum::<f64>() / nw as f64;
    Ok(fields)
}

/// Trapezoid integral in the physical y of each column, j = 0..=nw.
fn column_integrals(f: &PhysicalFields, g: impl Fn(&PhysicalFields, usize) -> f64) -> Vec<f64> {
    (0..=f.nw)
        .map(|j| {
            (0..f.nz)
                .map(|i| {
                    let (a, b) = (f.idx(j, i), f.idx(j, i + 1));
                    0.5 * (g(f, a) + g(f, b)) * (f.y[b] - f.y[a])
                })
                .sum()
        })
        .collect()
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// max − min over nodes of (u−c)² + v² + 2p/ρ + 2F.
    pub bernoulli_spread: f64,
    /// max |(u−c)² + v² + 2p/ρ + 2F − Q|.
    pub bernoulli_vs_head: f64,
    /// Column values of ∫[p/ρ + (u−c)²] dy, their spread, and the worst gap to z0.
    pub flow_force_columns: Vec<f64>,
    pub flow_force_spread: f64,
    pub flow_force_vs_z0: f64,
    /// Column values of ∫(u − c) dy and their spread.
    pub flux_columns: Vec<f64>,
    pub flux_spread: f64,
    /// max |u_x + v_y| and max |u_y − v_x| over rows 2..nz−2.
    pub divergence: f64,
    pub vorticity: f64,
    /// min(c − u).
    pub stagnation_margin: f64,
    /// max |p| on the surface.
    pub surface_pressure: f64,
    pub mean_omega: f64,
}

/// All audits; findings are reported, never raised.
pub fn diagnostics(fields: &PhysicalFields, field: &HeightField, force: &BodyForceModel) -> Diagnostics {
    let (nw, nz) = (fields.nw, fields.nz);
    let d = field.params.d;
    let mut bernoulli = Vec::with_capacity(fields.u.len());
    for j in 0..nw {
        for i in 0..=nz {
            let k = fields.idx(j, i);
            let a = fields.u[k] - fields.c;
            bernoulli.push(
                a * a + fields.v[k].powi(2) + 2.0 * fields.p[k] / fields.rho + 2.0 * force.potential(fields.x[k], fields.y[k], d),
            );
        }
    }
    let flow_force_columns = column_integrals(fields, |f, k| f.p[k] / f.rho + (f.u[k] - f.c).powi(2));
    let flux_columns = column_integrals(fields, |f, k| f.u[k] - f.c);

    // Derivatives on the mapped grid: f_y = f_σ / h_σ, f_x = f_w − h_w f_σ / h_σ.
    // Rows next to the ends are skipped: the one-sided h_z there leaves an
    // O(spacing²) value error that central differences turn into O(spacing).
    let (dw, ds) = (field.dw(), field.dsigma());
    let (mut divergence, mut vorticity) = (0.0f64, 0.0f64);
    for j in 0..nw {
        let (jp, jm) = ((j + 1) % nw, (j + nw - 1) % nw);
        for i in 2..nz.saturating_sub(1) {
            let at = |g: &[f64], jj: usize, ii: usize| g[fields.idx(jj, ii)];
            let dw_of = |g: &[f64]| (at(g, jp, i) - at(g, jm, i)) / (2.0 * dw);
            let ds_of = |g: &[f64]| (at(g, j, i + 1) - at(g, j, i - 1)) / (2.0 * ds);
            let (hw, hs) = (dw_of(&fields.y), ds_of(&fields.y));
            let dx = |g: &[f64]| dw_of(g) - hw * ds_of(g) / hs;
            let dy = |g: &[f64]| ds_of(g) / hs;
            divergence = divergence.max((dx(&fields.u) + dy(&fields.v)).abs());
            vorticity = vorticity.max((dy(&fields.u) - dx(&fields.v)).abs());
        }
    }

    let stagnation_margin = fields.u.iter().map(|u| fields.c - u).fold(f64::MAX, f64::min);
    let surface_pressure = (0..nw).map(|j| fields.p[fields.idx(j, nz)].abs()).fold(0.0f64, f64::max);
    Diagnostics {
        bernoulli_spread: spread(&bernoulli),
        bernoulli_vs_head: bernoulli.iter().map(|b| (b - fields.q).abs()).fold(0.0f64, f64::max),
        flow_force_spread: spread(&flow_force_columns[..nw]),
        flow_force_vs_z0: flow_force_columns.iter().map(|z| (z - field.z0).abs()).fold(0.0f64, f64::max),
        flow_force_columns,
        flux_spread: spread(&flux_columns[..nw]),
        flux_columns,
        divergence,
        vorticity,
        stagnation_margin,
        surface_pressure,
        mean_omega: fields.mean_omega(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::nonlinear::{discrete_bifurcation_point, newton_solve, AmplitudeFunctional, Constraint, NewtonOptions};
    use proptest::prelude::*;

    fn constant(p: &ModelParams) -> BodyForceModel {
        BodyForceModel::ConstantVertical { c1: p.c1 }
    }

    fn wave(p: &ModelParams, nw: usize, nz: usize, eps: f64) -> HeightField {
        let force = constant(p);
        let bp = discrete_bifurcation_point(0.1f64.tanh(), nw, nz, p, &force).unwrap();
        let guess = HeightField::from_fn(nw, nz, bp.z0, bp.q, p, |w, z| {
            let i = (z / bp.z0 * nz as f64).round() as usize;
            bp.laminar[i] + eps * bp.mode[i] * w.cos()
        })
        .unwrap();
        let c = Constraint::Amplitude {
            functional: AmplitudeFunctional::new(bp.mode.clone()),
            eps,
        };
        newton_solve(&guess, &force, &c, eps, &NewtonOptions::default()).unwrap().field
    }

    #[test]
    fn laminar_surface_values() {
        let p = ModelParams::physical(1.0, 1.0);
        let force = constant(&p);
        let mut last_gap = f64::MAX;
        for nz in [64, 128] {
            let f = HeightField::laminar(1.0, &p, 8, nz).unwrap();
            let pf = physical_fields(&f, &force).unwrap();
            assert!(pf.v.iter().all(|v| *v == 0.0));
            let k = pf.idx(3, nz);
            let gap = (pf.u[k] - pf.c + 1.0).abs().max(pf.p[k].abs());
            assert!(gap < 1e-3, "{gap}");
            assert!(gap < last_gap / 3.5 || last_gap == f64::MAX);
            last_gap = gap;
            let diag = diagnostics(&pf, &f, &force);
            assert!(diag.bernoulli_spread < 1e-13 && diag.bernoulli_vs_head < 1e-13);
            assert!(diag.flow_force_spread < 1e-15 && diag.flux_spread < 1e-15);
            assert!(diag.stagnation_margin > 0.0);
        }
    }

    #[test]
    fn round_trip_recovers_flow_force_slopes() {
        let p = ModelParams::reference();
        let force = constant(&p);
        let f = wave(&p, 32, 16, 1e-4);
        let pf = physical_fields(&f, &force).unwrap();
        for j in 0..=f.nw {
            for i in 0..=f.nz {
                let k = pf.idx(j, i);
                let a = pf.u[k] - pf.c;
                let (s1, s2) = (-a * pf.v[k], pf.p[k] / pf.rho + a * a);
                let hz = f.h_z(j, i);
                assert!((s1 + h_w(&f, j, i) / hz).abs() <= 1e-12 * (1.0 + s2));
                assert!((s2 - 1.0 / hz).abs() <= 1e-13 * s2);
                assert!(s2 > 0.0);
            }
        }
        assert!(pf.mean_omega().abs() < 1e-12);
    }

    #[test]
    fn vertical_velocity_scales_with_amplitude() {
        let p = ModelParams::reference();
        let force = constant(&p);
        let vmax = |eps: f64| {
            let pf = physical_fields(&wave(&p, 32, 16, eps), &force).unwrap();
            pf.v.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let (a, b) = (vmax(1e-4), vmax(5e-5));
        assert!((1.9..2.1).contains(&(a / b)), "{a} {b}");
    }

    #[test]
    fn column_audits_are_second_order() {
        let p = ModelParams::reference();
        let force = constant(&p);
        // Coarser grids are still pre-asymptotic (ratios near 3).
        let diags: Vec<Diagnostics> = [(64, 32), (128, 64), (256, 128)]
            .iter()
            .map(|&(nw, nz)| {
                let f = wave(&p, nw, nz, 1e-4);
                diagnostics(&physical_fields(&f, &force).unwrap(), &f, &force)
            })
            .collect();
        for w in diags.windows(2) {
            let ratios = [
                w[0].flow_force_spread / w[1].flow_force_spread,
                w[0].flux_spread / w[1].flux_spread,
                w[0].divergence / w[1].divergence,
                w[0].vorticity / w[1].vorticity,
            ];
            assert!(ratios.iter().all(|r| (3.2..4.6).contains(r)), "{ratios:?}");
        }
        // The inversion closes Bernoulli identically.
        assert!(diags.iter().all(|d| d.bernoulli_spread < 1e-12));
        assert!(diags.iter().all(|d| d.stagnation_margin > 0.0));
    }

    #[test]
    fn corrupted_field_is_flagged() {
        use rand::{Rng, SeedableRng};
        let p = ModelParams::reference();
        let force = constant(&p);
        let f = wave(&p, 32, 16, 1e-4);
        let clean = diagnostics(&physical_fields(&f, &force).unwrap(), &f, &force);
        let mut noisy = f.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for j in 0..noisy.nw {
            for i in 1..noisy.nz {
                let k = noisy.idx(j, i);
                noisy.h[k] *= 1.0 + 0.01 * rng.gen_range(-1.0..1.0);
            }
        }
        noisy.close_period();
        let bad = diagnostics(&physical_fields(&noisy, &force).unwrap(), &noisy, &force);
        assert!(bad.flux_spread > 100.0 * clean.flux_spread);
        assert!(bad.divergence > 100.0 * clean.divergence);
        assert!(bad.bernoulli_spread < 1e-12);
    }

    #[test]
    fn breakdown_reported() {
        let p = ModelParams::reference();
        let force = constant(&p);
        let mut f = HeightField::laminar(0.2, &p, 8, 8).unwrap();
        f.q = 10.0;
        assert!(matches!(physical_fields(&f, &force), Err(Error::InversionBreakdown { .. })));
    }

    proptest! {
        #[test]
        fn inversion_solves_the_quartic(s1 in -5.0f64..5.0, k in -5.0f64..5.0) {
            let alpha_sq = 0.5 * (-k + (k * k + 4.0 * s1 * s1).sqrt());
            prop_assume!(alpha_sq > 1e-6);
            let r = alpha_sq * alpha_sq + k * alpha_sq - s1 * s1;
            prop_assert!(r.abs() <= 1e-12 * (1.0 + k * k + s1 * s1));
        }
    }
}
