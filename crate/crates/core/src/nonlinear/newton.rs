//! Damped Newton iteration on the half period w ∈ [0, π].
//!
//! Unknown `m * nz + (i − 1)` is h at w = mΔw, σ_i (1 ≤ i ≤ nz, 0 ≤ m ≤ nw/2);
//! columns at negative w are mirror copies. The banded block holds the PDE and
//! top rows; scalar unknowns and constraint rows form a dense border.
//! Convergence is judged on the unscaled rows in every formulation.

use serde::{Deserialize, Serialize};

use super::reference::{discrete_laminar, DiscreteLaminar};
use super::system::{interior_row, top_row, LocalRow};
use super::HeightField;
use crate::error::{Error, Result};
use crate::linalg::{BandedMatrix, BorderedSystem};
use crate::model::BodyForceModel;

/// Linear amplitude functional ε(h) = ⟨h, φ⟩/⟨φ, φ⟩ with φ = M(σ) cos w.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeFunctional {
    pub mode: Vec<f64>,
}

impl AmplitudeFunctional {
    pub fn new(mode: Vec<f64>) -> Self {
        Self { mode }
    }

    fn sigma_weight(i: usize, nz: usize) -> f64 {
        if i == nz {
            0.5
        } else {
            1.0
        }
    }

    fn norm_sq(&self, nw: usize) -> f64 {
        let nz = self.mode.len() - 1;
        let cos_sq: f64 = (0..nw)
            .map(|j| {
                let w = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / nw as f64;
                w.cos().powi(2)
            })
            .sum();
        let radial: f64 = (0..=nz).map(|i| Self::sigma_weight(i, nz) * self.mode[i].powi(2)).sum();
        cos_sq * radial
    }

    pub fn eval(&self, field: &HeightField) -> f64 {
        let (nw, nz) = (field.nw, field.nz);
        let mut acc = 0.0;
        for j in 0..nw {
            let c = field.w(j).cos();
            for i in 1..=nz {
                acc += Self::sigma_weight(i, nz) * c * self.mode[i] * field.h[field.idx(j, i)];
            }
        }
        acc / self.norm_sq(nw)
    }

    /// Gradient with respect to the half-period unknowns.
    fn gradient(&self, layout: &Layout) -> Vec<f64> {
        let norm = self.norm_sq(layout.nw);
        let dw = 2.0 * std::f64::consts::PI / layout.nw as f64;
        let mut g = vec![0.0; layout.n_h];
        for m in 0..layout.half {
            let c = (m as f64 * dw).cos() * layout.column_weight(m);
            for i in 1..=layout.nz {
                g[layout.unknown(m, i)] = Self::sigma_weight(i, layout.nz) * c * self.mode[i] / norm;
            }
        }
        g
    }
}

/// The equations closing the system besides the PDE and top rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// Unknowns h, Q; rows add the mass constraint. z0 is data.
    FixedHeight,
    /// Unknowns h, Q, z0; rows add mass and ε(h) = eps.
    Amplitude { functional: AmplitudeFunctional, eps: f64 },
    /// Unknowns h, Q, z0, ε; rows add mass, ε(h) = ε, and
    /// tangent · (x − anchor) = step, with x = [h, Q, z0, ε].
    Arclength {
        functional: AmplitudeFunctional,
        tangent: Vec<f64>,
        anchor: Vec<f64>,
        step: f64,
    },
}

impl Constraint {
    fn scalars(&self) -> usize {
        match self {
            Constraint::FixedHeight => 1,
            Constraint::Amplitude { .. } => 2,
            Constraint::Arclength { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Bound on the max-norm of all rows.
    pub tol: f64,
    pub max_iter: usize,
    /// One extra step after convergence, kept only if it does not increase the residual.
    pub polish: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 25,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    pub field: HeightField,
    /// Amplitude unknown (Arclength) or ε(h) of the solution when a functional is present.
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub nw: usize,
    pub nz: usize,
    pub half: usize,
    pub n_h: usize,
}

impl Layout {
    pub fn new(nw: usize, nz: usize) -> Self {
        let half = nw / 2 + 1;
        Self {
            nw,
            nz,
            half,
            n_h: half * nz,
        }
    }

    #[inline]
    pub fn unknown(&self, m: usize, i: usize) -> usize {
        m * self.nz + (i - 1)
    }

    /// Full-grid column of half column m.
    #[inline]
    pub fn column(&self, m: usize) -> usize {
        self.nw / 2 + m
    }

    /// Half column holding periodic column j.
    #[inline]
    pub fn fold(&self, j: isize) -> usize {
        let jj = j.rem_euclid(self.nw as isize);
        (jj - (self.nw / 2) as isize).unsigned_abs()
    }

    /// Number of periodic columns represented by half column m.
    pub fn column_weight(&self, m: usize) -> f64 {
        if m == 0 || m == self.half - 1 {
            1.0
        } else {
            2.0
        }
    }
}

/// Half-period unknowns followed by Q, z0 and `eps`.
pub fn state_vector(field: &HeightField, eps: f64) -> Vec<f64> {
    let layout = Layout::new(field.nw, field.nz);
    let mut x = Vec::with_capacity(layout.n_h + 3);
    for m in 0..layout.half {
        let j = layout.column(m);
        for i in 1..=layout.nz {
            x.push(field.h[field.idx(j, i)]);
        }
    }
    x.push(field.q);
    x.push(field.z0);
    x.push(eps);
    x
}

/// Inverse of [`state_vector`]; the field is written evenly.
pub fn apply_state_vector(field: &mut HeightField, x: &[f64]) -> f64 {
    let layout = Layout::new(field.nw, field.nz);
    for m in 0..layout.half {
        for i in 1..=layout.nz {
            let v = x[layout.unknown(m, i)];
            let (a, b) = (layout.nw / 2 + m, layout.nw / 2 - m);
            let (ka, kb) = (field.idx(a, i), field.idx(b, i));
            field.h[ka] = v;
            field.h[kb] = v;
        }
    }
    field.close_period();
    field.q = x[layout.n_h];
    field.z0 = x[layout.n_h + 1];
    x[layout.n_h + 2]
}

/// One evaluation of the unknown vector.
struct Evaluation {
    field: HeightField,
    eps: f64,
    /// Rows seen by the linear solve.
    rows: Vec<f64>,
    /// Max-norm of the unscaled residual and constraints, the convergence measure.
    merit: f64,
    laminar: Option<DiscreteLaminar>,
}

/// Amplitude mode runs in blown-up variables h = H(z0) + ε v, Q = Q_lam(z0) + ε q̃
/// with the rows divided by ε, where H is the discrete laminar column. At fixed
/// ε the direct Jacobian has a singular value of order ε along the kernel and
/// the Newton basin collapses; the blown-up one stays regular as ε → 0.
struct Solver<'a> {
    force: &'a BodyForceModel,
    constraint: &'a Constraint,
    layout: Layout,
    template: HeightField,
}

impl<'a> Solver<'a> {
    fn blown_up(&self) -> Option<(&AmplitudeFunctional, f64)> {
        match self.constraint {
            Constraint::Amplitude { functional, eps } => Some((functional, *eps)),
            _ => None,
        }
    }

    fn row(&self, field: &HeightField, m: usize, i: usize) -> LocalRow {
        let j = self.layout.column(m);
        if i == self.layout.nz {
            top_row(field, self.force, j)
        } else {
            interior_row(field, self.force, j, i)
        }
    }

    fn pde_rows(&self, field: &HeightField) -> Vec<f64> {
        let l = self.layout;
        let mut out = Vec::with_capacity(l.n_h + 3);
        for m in 0..l.half {
            for i in 1..=l.nz {
                out.push(self.row(field, m, i).value);
            }
        }
        out
    }

    fn mass_gradient(&self) -> Vec<f64> {
        let l = self.layout;
        let mut mass = vec![0.0; l.n_h];
        for m in 0..l.half {
            mass[l.unknown(m, l.nz)] = l.column_weight(m) / l.nw as f64;
        }
        mass
    }

    /// Unknown vector of a field: state vector for the direct forms,
    /// [v, q̃, z0] for the blown-up form.
    fn unknowns(&self, field: &HeightField, eps: f64) -> Result<Vec<f64>> {
        let l = self.layout;
        let mut x = state_vector(field, eps);
        match self.constraint {
            Constraint::FixedHeight => x.truncate(l.n_h + 1),
            Constraint::Arclength { .. } => {}
            Constraint::Amplitude { eps, .. } => {
                let lam = discrete_laminar(field.z0, l.nz, &field.params, self.force)?;
                for m in 0..l.half {
                    for i in 1..=l.nz {
                        let k = l.unknown(m, i);
                        x[k] = (x[k] - lam.h[i]) / eps;
                    }
                }
                x[l.n_h] = (field.q - lam.q) / eps;
                x.truncate(l.n_h + 2);
            }
        }
        Ok(x)
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let l = self.layout;
        let mut field = self.template.clone();
        let mut state = x.to_vec();
        state.resize(l.n_h + 3, 0.0);
        if x.len() == l.n_h + 1 {
            state[l.n_h + 1] = self.template.z0;
        }
        if let Some((functional, eps)) = self.blown_up() {
            let z0 = x[l.n_h + 1];
            let lam = discrete_laminar(z0, l.nz, &field.params, self.force)?;
            for m in 0..l.half {
                for i in 1..=l.nz {
                    let k = l.unknown(m, i);
                    state[k] = lam.h[i] + eps * x[k];
                }
            }
            state[l.n_h] = lam.q + eps * x[l.n_h];
            apply_state_vector(&mut field, &state);
            field.check_monotone()?;
            let mut rows = self.pde_rows(&field);
            let merit = max_abs(&rows);
            let v = &x[..l.n_h];
            let mass: f64 = self.mass_gradient().iter().zip(v).map(|(g, v)| g * v).sum();
            let amp: f64 = functional.gradient(&l).iter().zip(v).map(|(g, v)| g * v).sum::<f64>() - 1.0;
            rows.iter_mut().for_each(|r| *r /= eps);
            rows.push(mass);
            rows.push(amp);
            let merit = merit.max(eps.abs() * mass.abs()).max(eps.abs() * amp.abs());
            return Ok(Evaluation {
                field,
                eps,
                rows,
                merit,
                laminar: Some(lam),
            });
        }
        let eps = apply_state_vector(&mut field, &state);
        field.check_monotone()?;
        let mut rows = self.pde_rows(&field);
        rows.push(field.mean_surface() - field.params.d);
        if let Constraint::Arclength {
            functional,
            tangent,
            anchor,
            step,
        } = self.constraint
        {
            rows.push(functional.eval(&field) - eps);
            let s: f64 = tangent.iter().zip(state.iter().zip(anchor)).map(|(t, (x, a))| t * (x - a)).sum();
            rows.push(s - step);
        }
        let merit = max_abs(&rows);
        Ok(Evaluation {
            field,
            eps,
            rows,
            merit,
            laminar: None,
        })
    }

    /// Σ (stencil · H_z0) + d_q Q_z0 + d_z0 for every row: the derivative of the
    /// rows along the laminar family at fixed perturbation.
    fn laminar_derivative(&self, field: &HeightField, lam: &DiscreteLaminar) -> Vec<f64> {
        let l = self.layout;
        let mut out = Vec::with_capacity(l.n_h);
        for m in 0..l.half {
            for i in 1..=l.nz {
                let row = self.row(field, m, i);
                let stencil: f64 = row
                    .stencil()
                    .iter()
                    .map(|&(_, di, c)| c * lam.dh_dz0[(i as isize + di) as usize])
                    .sum();
                out.push(stencil + row.d_q * lam.dq_dz0 + row.d_z0);
            }
        }
        out
    }

    fn assemble(&self, eval: &Evaluation) -> Result<BorderedSystem> {
        let l = self.layout;
        let field = &eval.field;
        let k = self.constraint.scalars();
        let mut a = BandedMatrix::zeros(l.n_h, l.nz + 1, l.nz + 1);
        let mut b = vec![vec![0.0; l.n_h]; k];
        for m in 0..l.half {
            let j = l.column(m) as isize;
            for i in 1..=l.nz {
                let r = l.unknown(m, i);
                let row = self.row(field, m, i);
                for &(dj, di, c) in row.stencil() {
                    let ii = i as isize + di;
                    if ii == 0 {
                        continue;
                    }
                    a.add(r, l.unknown(l.fold(j + dj), ii as usize), c);
                }
                b[0][r] = row.d_q;
                if k > 1 {
                    b[1][r] = row.d_z0;
                }
            }
        }
        let mut c = vec![self.mass_gradient()];
        let mut d = vec![0.0; k * k];
        match self.constraint {
            Constraint::FixedHeight => {}
            Constraint::Amplitude { functional, eps } => {
                c.push(functional.gradient(&l));
                let lam = eval.laminar.as_ref().expect("blown-up evaluations carry the laminar column");
                let base = HeightField::from_column(&lam.h, l.nw, lam.z0, lam.q, &field.params)?;
                let at_field = self.laminar_derivative(field, lam);
                let at_base = self.laminar_derivative(&base, lam);
                // The laminar family solves the rows identically, so the z0 column
                // is a difference of order ε; subtracting the base value removes
                // the rounding left in it before dividing.
                b[1] = at_field.iter().zip(&at_base).map(|(f, g)| (f - g) / eps).collect();
            }
            Constraint::Arclength { functional, tangent, .. } => {
                c.push(functional.gradient(&l));
                d[k + 2] = -1.0;
                c.push(tangent[..l.n_h].to_vec());
                for s in 0..3 {
                    d[2 * k + s] = tangent[l.n_h + s];
                }
            }
        }
        Ok(BorderedSystem { a, b, c, d })
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration for the even solution closest to `initial`.
///
/// For [`Constraint::Arclength`] the amplitude unknown starts at `eps`; for
/// [`Constraint::Amplitude`] the target amplitude must be nonzero.
pub fn newton_solve(
    initial: &HeightField,
    force: &BodyForceModel,
    constraint: &Constraint,
    eps: f64,
    options: &NewtonOptions,
) -> Result<NewtonOutcome> {
    HeightField::check_grid(initial.nw, initial.nz)?;
    let layout = Layout::new(initial.nw, initial.nz);
    match constraint {
        Constraint::Arclength { tangent, anchor, .. } => {
            if tangent.len() != layout.n_h + 3 || anchor.len() != layout.n_h + 3 {
                return Err(Error::InvalidParameter("arclength vectors do not match the grid".into()));
            }
        }
        Constraint::Amplitude { eps, .. } if *eps == 0.0 || !eps.is_finite() => {
            return Err(Error::InvalidParameter(
                "amplitude target must be finite and nonzero; the ε = 0 member is the fixed-height solve".into(),
            ));
        }
        _ => {}
    }
    let mut template = initial.clone();
    template.symmetrize();
    for j in 0..=template.nw {
        let k = template.idx(j, 0);
        template.h[k] = 0.0;
    }
    let solver = Solver {
        force,
        constraint,
        layout,
        template: template.clone(),
    };
    let mut x = solver.unknowns(&template, eps)?;
    let mut current = solver.evaluate(&x)?;
    let mut history = vec![current.merit];
    let mut iterations = 0;
    let mut polished = !options.polish;

    loop {
        if current.merit <= options.tol && polished {
            break;
        }
        let polishing = current.merit <= options.tol;
        if !polishing && iterations >= options.max_iter {
            return Err(Error::NotConverged {
                what: "newton",
                iterations,
                residual: current.merit,
            });
        }
        let system = solver.assemble(&current)?;
        let (fh, fs) = current.rows.split_at(layout.n_h);
        let neg_h: Vec<f64> = fh.iter().map(|v| -v).collect();
        let neg_s: Vec<f64> = fs.iter().map(|v| -v).collect();
        let (dh, ds) = system.solve(&neg_h, &neg_s)?;
        let step: Vec<f64> = dh.into_iter().chain(ds).collect();

        let mut lambda = 1.0;
        let mut last_error = None;
        let accepted = loop {
            let trial_x: Vec<f64> = x.iter().zip(&step).map(|(x, s)| x + lambda * s).collect();
            match solver.evaluate(&trial_x) {
                Ok(trial) => {
                    if trial.merit < current.merit || (polishing && trial.merit <= current.merit) {
                        break Some((trial_x, trial));
                    }
                    if polishing {
                        break None;
                    }
                }
                Err(e) => last_error = Some(e),
            }
            lambda *= 0.5;
            if lambda < 1.0 / 1024.0 {
                if polishing {
                    break None;
                }
                return Err(last_error.unwrap_or(Error::NotConverged {
                    what: "newton line search",
                    iterations,
                    residual: current.merit,
                }));
            }
        };
        match accepted {
            Some((nx, next)) => {
                x = nx;
                current = next;
                history.push(current.merit);
            }
            None => {
                debug_assert!(polishing);
            }
        }
        if polishing {
            polished = true;
        } else {
            iterations += 1;
        }
    }

    let eps = match constraint {
        Constraint::FixedHeight => 0.0,
        Constraint::Amplitude { functional, .. } => functional.eval(&current.field),
        Constraint::Arclength { .. } => current.eps,
    };
    Ok(NewtonOutcome {
        field: current.field,
        eps,
        iterations,
        residual: current.merit,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminar::z0_of_xi;
    use crate::model::ModelParams;
    use crate::nonlinear::reference::{discrete_bifurcation_point, discrete_laminar};
    use crate::nonlinear::system::residual;

    fn constant(p: &ModelParams) -> BodyForceModel {
        BodyForceModel::ConstantVertical { c1: p.c1 }
    }

    #[test]
    fn trivial_branch_recovers_laminar() {
        let p = ModelParams::reference();
        let force = constant(&p);
        for xi in [0.2, 1.0] {
            let mut guess = HeightField::laminar(xi, &p, 16, 32).unwrap();
            guess.q *= 1.01;
            for (k, v) in guess.h.iter_mut().enumerate() {
                *v *= 1.0 + 1e-3 * ((k % 7) as f64 / 7.0);
            }
            guess.symmetrize();
            let out = newton_solve(&guess, &force, &Constraint::FixedHeight, 0.0, &NewtonOptions::default()).unwrap();
            assert!(out.residual <= 1e-10);
            let lam = discrete_laminar(z0_of_xi(xi, &p).unwrap(), 32, &p, &force).unwrap();
            for j in 0..=16 {
                for i in 0..=32 {
                    assert!((out.field.h[out.field.idx(j, i)] - lam.h[i]).abs() < 1e-12);
                }
            }
            assert!((out.field.q - lam.q).abs() < 1e-12);
            assert!((out.field.q - (xi + 2.0 * p.c3)).abs() < 1e-3);
            assert!((out.field.mean_surface() - p.d).abs() < 1e-12);
            assert!(out.field.evenness_defect() == 0.0);
        }
    }

    #[test]
    fn predictor_converges_quickly() {
        let p = ModelParams::reference();
        let force = constant(&p);
        let (nw, nz) = (32, 16);
        let bp = discrete_bifurcation_point(0.1f64.tanh(), nw, nz, &p, &force).unwrap();
        let functional = AmplitudeFunctional::new(bp.mode.clone());
        let mut deviations = Vec::new();
        for eps in [1e-3 * p.d, 0.5e-3 * p.d] {
            let guess = HeightField::from_fn(nw, nz, bp.z0, bp.q, &p, |w, z| {
                let i = (z / bp.z0 * nz as f64).round() as usize;
                bp.laminar[i] + eps * bp.mode[i] * w.cos()
            })
            .unwrap();
            let c = Constraint::Amplitude { functional: functional.clone(), eps };
            let out = newton_solve(&guess, &force, &c, eps, &NewtonOptions::default()).unwrap();
            assert!(out.iterations <= 5, "{}", out.iterations);
            assert!(out.residual <= 1e-10);
            assert!((functional.eval(&out.field) - eps).abs() < 1e-12 * eps.max(1e-3));
            assert!(out.field.evenness_defect() == 0.0);
            let r = residual(&out.field, &force).unwrap();
            assert!(r.max_norm() <= 1e-10);
            deviations.push(out.field.max_abs_diff(&guess));
        }
        let ratio = deviations[0] / deviations[1];
        assert!((3.6..4.4).contains(&ratio), "deviation ratio {ratio}");
    }

    #[test]
    fn amplitude_zero_is_rejected() {
        let p = ModelParams::reference();
        let force = constant(&p);
        let f = HeightField::laminar(0.2, &p, 8, 8).unwrap();
        let c = Constraint::Amplitude { functional: AmplitudeFunctional::new(vec![1.0; 9]), eps: 0.0 };
        assert!(matches!(
            newton_solve(&f, &force, &c, 0.0, &NewtonOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn large_amplitude_breaches_stagnation() {
        let p = ModelParams::reference();
        let force = constant(&p);
        let bp = discrete_bifurcation_point(0.1f64.tanh(), 16, 16, &p, &force).unwrap();
        let eps = 0.5;
        let guess = HeightField::from_fn(16, 16, bp.z0, bp.q, &p, |w, z| {
            let i = (z / bp.z0 * 16.0).round() as usize;
            bp.laminar[i] + eps * bp.mode[i] * w.cos()
        })
        .unwrap();
        let c = Constraint::Amplitude { functional: AmplitudeFunctional::new(bp.mode.clone()), eps };
        let err = newton_solve(&guess, &force, &c, eps, &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, Error::StagnationBreach { .. }), "{err}");
    }

    #[test]
    fn blown_up_jacobian_matches_differences() {
        let p = ModelParams::reference();
        let force = constant(&p);
        let (nw, nz) = (16, 12);
        let bp = discrete_bifurcation_point(0.1f64.tanh(), nw, nz, &p, &force).unwrap();
        let eps = 1e-3;
        let guess = HeightField::from_fn(nw, nz, bp.z0 * 1.001, bp.q, &p, |w, z| {
            let s = z / (bp.z0 * 1.001);
            let i = (s * nz as f64).round() as usize;
            bp.laminar[i] + eps * bp.mode[i] * (w.cos() + 0.3 * s * (2.0 * w).cos())
        })
        .unwrap();
        let c = Constraint::Amplitude { functional: AmplitudeFunctional::new(bp.mode.clone()), eps };
        let solver = Solver {
            force: &force,
            constraint: &c,
            layout: Layout::new(nw, nz),
            template: guess.clone(),
        };
        let x = solver.unknowns(&guess, eps).unwrap();
        let ev = solver.evaluate(&x).unwrap();
        let sys = solver.assemble(&ev).unwrap();
        let n = x.len();
        let n_h = solver.layout.n_h;
        for col in [0, 5, n_h - 1, n_h, n_h + 1] {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            let (jh, js) = sys.apply(&e[..n_h], &e[n_h..]);
            let an: Vec<f64> = jh.into_iter().chain(js).collect();
            let t = 1e-6 * x[col].abs().max(1e-3);
            let shifted = |s: f64| {
                let mut y = x.clone();
                y[col] += s;
                solver.evaluate(&y).unwrap().rows
            };
            let (a, b) = (shifted(t), shifted(-t));
            let scale = max_abs(&an).max(1e-8);
            let gap = a.iter().zip(&b).zip(&an).fold(0.0f64, |m, ((a, b), j)| m.max(((a - b) / (2.0 * t) - j).abs()));
            assert!(gap <= 1e-5 * scale, "column {col}: gap {gap} scale {scale}");
        }
    }

    #[test]
    fn layout_folding() {
        let l = Layout::new(8, 4);
        assert_eq!(l.half, 5);
        assert_eq!(l.fold(4), 0);
        assert_eq!(l.fold(3), 1);
        assert_eq!(l.fold(5), 1);
        assert_eq!(l.fold(8), 4);
        assert_eq!(l.fold(9), 3);
        assert_eq!(l.fold(-1), 3);
    }
}
