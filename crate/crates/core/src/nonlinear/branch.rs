//! Natural-parameter continuation in the amplitude from the bifurcation point,
//! with a pseudo-arclength fallback.

use serde::{Deserialize, Serialize};

use super::newton::{apply_state_vector, newton_solve, state_vector, AmplitudeFunctional, Constraint, NewtonOptions};
use super::reference::{discrete_bifurcation_point, BifurcationPoint};
use super::system::residual;
use super::HeightField;
use crate::error::{Error, Result};
use crate::model::{BodyForceModel, ModelParams};
use crate::spectral::EigenResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchOptions {
    pub n_steps: usize,
    /// Amplitude increment per step, in height units.
    pub d_eps: f64,
    pub nw: usize,
    pub nz: usize,
    pub newton: NewtonOptions,
    /// Every this many steps the record is flagged for a checkpoint; 0 flags none.
    pub checkpoint_every: usize,
    /// Use the arclength solve for every step after the second; exercises the fallback.
    pub force_arclength: bool,
}

impl BranchOptions {
    pub fn new(n_steps: usize, d_eps: f64, nw: usize, nz: usize) -> Self {
        Self {
            n_steps,
            d_eps,
            nw,
            nz,
            newton: NewtonOptions::default(),
            checkpoint_every: 0,
            force_arclength: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Laminar,
    Natural,
    Arclength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub step: usize,
    pub eps: f64,
    pub q: f64,
    pub z0: f64,
    pub surface_min: f64,
    pub surface_max: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub kind: StepKind,
    /// max over rows of the spread of h across w.
    pub w_spread: f64,
    pub checkpoint: Option<String>,
}

impl BranchRecord {
    /// True when the field does not depend on w beyond rounding.
    pub fn is_w_independent(&self, d: f64) -> bool {
        self.w_spread <= 1e-12 * d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub xi_star: f64,
    pub point: BifurcationPoint,
    pub records: Vec<BranchRecord>,
    /// One field per record.
    pub fields: Vec<HeightField>,
    /// Largest gap between the continuous kernel profile and the discrete one,
    /// both scaled to 1 at the top.
    pub mode_gap: f64,
    /// Reason the continuation stopped before `n_steps`, if it did.
    pub stopped: Option<String>,
}

impl Branch {
    pub fn functional(&self) -> AmplitudeFunctional {
        AmplitudeFunctional::new(self.point.mode.clone())
    }

    /// ‖h − H − ε M cos w‖∞ of record k against the discrete bifurcation data.
    pub fn expansion_deviation(&self, k: usize) -> f64 {
        expansion_deviation(&self.fields[k], self.records[k].eps, &self.point)
    }

    /// max_w |h(w, z0) − d − ε M(z0) cos w| / (ε M(z0)) of record k.
    pub fn surface_linear_error(&self, k: usize) -> f64 {
        let f = &self.fields[k];
        let eps = self.records[k].eps;
        let top = self.point.mode[f.nz];
        let worst = (0..f.nw)
            .map(|j| (f.h[f.idx(j, f.nz)] - f.params.d - eps * top * f.w(j).cos()).abs())
            .fold(0.0f64, f64::max);
        worst / (eps * top).abs()
    }
}

/// ‖h − H − ε M cos w‖∞ in the rescaled coordinate.
pub fn expansion_deviation(field: &HeightField, eps: f64, point: &BifurcationPoint) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..field.nw {
        let c = field.w(j).cos();
        for i in 0..=field.nz {
            let linear = point.laminar[i] + eps * point.mode[i] * c;
            worst = worst.max((field.h[field.idx(j, i)] - linear).abs());
        }
    }
    worst
}

/// Least-squares fit of log y = log K + p log x; returns (p, K).
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("power-law fit needs two positive points".into()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("power-law fit needs distinct abscissae".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

fn w_spread(field: &HeightField) -> f64 {
    (0..=field.nz)
        .map(|i| {
            let (lo, hi) = (0..field.nw).fold((f64::MAX, f64::MIN), |(lo, hi), j| {
                let v = field.h[field.idx(j, i)];
                (lo.min(v), hi.max(v))
            });
            hi - lo
        })
        .fold(0.0f64, f64::max)
}

/// Continuous kernel profile interpolated onto the discrete σ nodes, scaled to 1 at the top.
fn mode_gap(eigen: &EigenResult, point: &BifurcationPoint) -> f64 {
    let n = eigen.m.len() - 1;
    let top = eigen.m[n];
    let nz = point.mode.len() - 1;
    (0..=nz)
        .map(|i| {
            let s = i as f64 / nz as f64 * n as f64;
            let k = (s.floor() as usize).min(n - 1);
            let t = s - k as f64;
            let m = (eigen.m[k] * (1.0 - t) + eigen.m[k + 1] * t) / top;
            (m - point.mode[i]).abs()
        })
        .fold(0.0f64, f64::max)
}

fn record(
    step: usize,
    field: &HeightField,
    eps: f64,
    iterations: usize,
    residual: f64,
    kind: StepKind,
    options: &BranchOptions,
) -> BranchRecord {
    let surface = field.surface();
    let checkpoint = (options.checkpoint_every > 0 && step % options.checkpoint_every == 0)
        .then(|| format!("step_{step:04}"));
    BranchRecord {
        step,
        eps,
        q: field.q,
        z0: field.z0,
        surface_min: surface.iter().copied().fold(f64::MAX, f64::min),
        surface_max: surface.iter().copied().fold(f64::MIN, f64::max),
        newton_iterations: iterations,
        residual,
        kind,
        w_spread: w_spread(field),
        checkpoint,
    }
}

/// Continues the even branch from the discrete bifurcation point nearest `xi_star`.
///
/// Record 0 is the laminar member. Each later step targets ε_prev + d_eps from a
/// secant predictor; a failed step is retried with pseudo-arclength from the last
/// two members. Failure of the first step is an error; a later failure ends the
/// branch and is reported in [`Branch::stopped`].
pub fn continue_branch(
    xi_star: f64,
    eigen: &EigenResult,
    params: &ModelParams,
    force: &BodyForceModel,
    options: &BranchOptions,
) -> Result<Branch> {
    if !(options.d_eps > 0.0) || options.n_steps == 0 {
        return Err(Error::InvalidParameter("branch needs d_eps > 0 and at least one step".into()));
    }
    HeightField::check_grid(options.nw, options.nz)?;
    let point = discrete_bifurcation_point(xi_star, options.nw, options.nz, params, force)?;
    let functional = AmplitudeFunctional::new(point.mode.clone());
    let laminar = HeightField::from_column(&point.laminar, options.nw, point.z0, point.q, params)?;
    let lam_residual = residual(&laminar, force)?.max_norm();

    let mut records = vec![record(0, &laminar, 0.0, 0, lam_residual, StepKind::Laminar, options)];
    let mut fields = vec![laminar];
    let mut stopped = None;

    for step in 1..=options.n_steps {
        let n = fields.len();
        let prev = &fields[n - 1];
        let prev_eps = records[n - 1].eps;
        let target = prev_eps + options.d_eps;
        let guess = if n == 1 {
            let mut g = prev.clone();
            for j in 0..=g.nw {
                let c = g.w(j).cos();
                for i in 1..=g.nz {
                    let k = g.idx(j, i);
                    g.h[k] += target * point.mode[i] * c;
                }
            }
            g
        } else {
            let (x1, x0) = (state_vector(prev, prev_eps), state_vector(&fields[n - 2], records[n - 2].eps));
            let r = (target - prev_eps) / (prev_eps - records[n - 2].eps);
            let x: Vec<f64> = x1.iter().zip(&x0).map(|(a, b)| a + r * (a - b)).collect();
            let mut g = prev.clone();
            apply_state_vector(&mut g, &x);
            g
        };

        let natural = if options.force_arclength && n >= 2 {
            None
        } else {
            let c = Constraint::Amplitude {
                functional: functional.clone(),
                eps: target,
            };
            match newton_solve(&guess, force, &c, target, &options.newton) {
                Ok(out) => Some(Ok(out)),
                Err(e) => Some(Err(e)),
            }
        };
        let outcome = match natural {
            Some(Ok(out)) => Ok((out, StepKind::Natural)),
            Some(Err(e)) if n < 2 => Err(e),
            _ => {
                let (x1, x0) = (state_vector(prev, prev_eps), state_vector(&fields[n - 2], records[n - 2].eps));
                let delta: Vec<f64> = x1.iter().zip(&x0).map(|(a, b)| a - b).collect();
                let len = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
                let tangent: Vec<f64> = delta.iter().map(|v| v / len).collect();
                let step_len = len * options.d_eps / (prev_eps - records[n - 2].eps);
                let c = Constraint::Arclength {
                    functional: functional.clone(),
                    tangent,
                    anchor: x1,
                    step: step_len,
                };
                newton_solve(&guess, force, &c, target, &options.newton).map(|out| (out, StepKind::Arclength))
            }
        };
        match outcome {
            Ok((out, kind)) => {
                let eps = out.eps;
                if !(eps > prev_eps) {
                    stopped = Some(format!("step {step}: amplitude turned back to {eps:.6e}"));
                    break;
                }
                records.push(record(step, &out.field, eps, out.iterations, out.residual, kind, options));
                fields.push(out.field);
            }
            Err(e) if step == 1 => {
                return Err(Error::Continuation {
                    step,
                    reason: format!(
                        "first step from the bifurcation point failed ({e}); check the kernel dimension and transversality at xi* = {xi_star}"
                    ),
                });
            }
            Err(e) => {
                stopped = Some(format!("step {step}: {e}"));
                break;
            }
        }
    }
    if let Some(last) = records.last_mut() {
        if options.checkpoint_every > 0 && last.checkpoint.is_none() {
            last.checkpoint = Some(format!("step_{:04}", last.step));
        }
    }
    Ok(Branch {
        xi_star,
        mode_gap: mode_gap(eigen, &point),
        point,
        records,
        fields,
        stopped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{mu_shooting, SLProblem, DEFAULT_SHOOTING_TOL};

    fn setup() -> (ModelParams, BodyForceModel, f64, EigenResult) {
        let p = ModelParams::reference();
        let force = BodyForceModel::ConstantVertical { c1: p.c1 };
        let xi = 0.1f64.tanh();
        let eigen = mu_shooting(&SLProblem::new(xi, &p, 512).unwrap(), DEFAULT_SHOOTING_TOL).unwrap();
        (p, force, xi, eigen)
    }

    #[test]
    fn power_law_fit_recovers_exponent() {
        let x = [1e-5, 1e-4, 1e-3];
        let y: Vec<f64> = x.iter().map(|x| 3.0 * x * x).collect();
        let (p, k) = power_law_fit(&x, &y).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        assert!((k - 3.0).abs() < 1e-9);
        assert!(power_law_fit(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn short_branch_is_quadratic_near_onset() {
        let (p, force, xi, eigen) = setup();
        let mut opts = BranchOptions::new(8, 1e-5, 32, 16);
        opts.checkpoint_every = 4;
        let b = continue_branch(xi, &eigen, &p, &force, &opts).unwrap();
        assert_eq!(b.records.len(), 9);
        assert!(b.stopped.is_none());
        assert!(b.records[0].is_w_independent(p.d));
        assert!(b.records[1..].iter().all(|r| !r.is_w_independent(p.d)));
        assert!(b.records.windows(2).all(|w| w[1].eps > w[0].eps));
        assert!(b.records.iter().all(|r| r.residual <= 1e-10));
        assert!(b.records[1..].iter().all(|r| r.kind == StepKind::Natural && r.newton_iterations <= 5));
        assert_eq!(b.records[4].checkpoint.as_deref(), Some("step_0004"));
        assert_eq!(b.records[8].checkpoint.as_deref(), Some("step_0008"));
        assert!(b.records[3].checkpoint.is_none());

        let eps: Vec<f64> = b.records[1..].iter().map(|r| r.eps).collect();
        let dq: Vec<f64> = b.records[1..].iter().map(|r| (r.q - b.point.q).abs()).collect();
        let (pq, _) = power_law_fit(&eps, &dq).unwrap();
        assert!((pq - 2.0).abs() < 0.05, "Q exponent {pq}");
        let dev: Vec<f64> = (1..b.records.len()).map(|k| b.expansion_deviation(k)).collect();
        let (pd, _) = power_law_fit(&eps, &dev).unwrap();
        assert!((pd - 2.0).abs() < 0.05, "deviation exponent {pd}");
        // The grid's kernel is close to the continuous one.
        assert!(b.mode_gap < 2e-2, "{}", b.mode_gap);
    }

    #[test]
    fn surface_follows_linear_mode_at_small_amplitude() {
        let (p, force, xi, eigen) = setup();
        let b = continue_branch(xi, &eigen, &p, &force, &BranchOptions::new(4, 2.5e-5, 32, 16)).unwrap();
        let last = b.records.len() - 1;
        assert!((b.records[last].eps - 1e-3 * p.d).abs() < 1e-12);
        let err = b.surface_linear_error(last);
        assert!(err <= 0.1, "relative surface error {err}");
        // The relative error is first order in the amplitude.
        let ratio = b.surface_linear_error(last) / b.surface_linear_error(2);
        assert!((1.7..2.3).contains(&ratio), "{ratio}");
    }

    #[test]
    fn resolve_from_stored_field_reproduces_head() {
        let (p, force, xi, eigen) = setup();
        let b = continue_branch(xi, &eigen, &p, &force, &BranchOptions::new(3, 2e-5, 32, 16)).unwrap();
        let k = 3;
        let c = Constraint::Amplitude {
            functional: b.functional(),
            eps: b.records[k].eps,
        };
        let again = newton_solve(&b.fields[k], &force, &c, b.records[k].eps, &NewtonOptions::default()).unwrap();
        assert!((again.field.q - b.records[k].q).abs() <= 1e-10);
        assert!(again.iterations <= 1);
    }

    #[test]
    fn arclength_steps_follow_the_same_branch() {
        let (p, force, xi, eigen) = setup();
        let natural = continue_branch(xi, &eigen, &p, &force, &BranchOptions::new(5, 1e-5, 32, 16)).unwrap();
        let mut opts = BranchOptions::new(5, 1e-5, 32, 16);
        opts.force_arclength = true;
        let arc = continue_branch(xi, &eigen, &p, &force, &opts).unwrap();
        assert!(arc.records[3..].iter().all(|r| r.kind == StepKind::Arclength));
        assert!(arc.records.windows(2).all(|w| w[1].eps > w[0].eps));
        // Same curve: Q(ε) agrees with the natural branch to the quadratic law.
        let k = natural.records[1..]
            .iter()
            .map(|r| (r.q - natural.point.q) / (r.eps * r.eps))
            .sum::<f64>()
            / 5.0;
        for r in &arc.records[3..] {
            assert!(r.residual <= 1e-10);
            let predicted = natural.point.q + k * r.eps * r.eps;
            assert!((r.q - predicted).abs() <= 1e-2 * (r.q - natural.point.q).abs(), "{} vs {predicted}", r.q);
        }
    }

    #[test]
    fn zero_step_is_rejected() {
        let (p, force, xi, eigen) = setup();
        let opts = BranchOptions::new(3, 0.0, 32, 16);
        assert!(matches!(
            continue_branch(xi, &eigen, &p, &force, &opts),
            Err(Error::InvalidParameter(_))
        ));
    }
}
