use serde::{Deserialize, Serialize};

use super::SLProblem;
use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;

/// Default bound on |ζ(0)| for the shooting root.
pub const DEFAULT_SHOOTING_TOL: f64 = 1e-12;

const MU_CAP: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    Shooting,
    Matrix,
}

/// Lowest eigenpair, normalized so that M(z0) = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub mu: f64,
    pub xi: f64,
    pub beta: f64,
    pub z: Vec<f64>,
    pub m: Vec<f64>,
    pub m_z: Vec<f64>,
    pub method: EigenMethod,
    /// Shooting: |ζ(0)|. Matrix: max-norm of the discrete eigen-equation residual
    /// relative to the largest stiffness term.
    pub residual: f64,
}

impl EigenResult {
    /// |M_z(z0) − β M(z0)|.
    pub fn boundary_residual(&self) -> f64 {
        let n = self.m.len() - 1;
        (self.m_z[n] - self.beta * self.m[n]).abs()
    }
}

fn midpoint_cubes(problem: &SLProblem) -> Vec<f64> {
    let coef = problem.coefficient();
    let h = problem.step();
    (0..problem.n)
        .map(|i| coef.a((i as f64 + 0.5) * h).powi(3))
        .collect()
}

/// Stiffness and lumped mass of the flux-form discretization, unknowns M_1..M_n.
struct Discretization {
    diag: Vec<f64>,
    off: Vec<f64>,
    mass: Vec<f64>,
}

fn discretize(problem: &SLProblem) -> Discretization {
    let n = problem.n;
    let h = problem.step();
    let flux = midpoint_cubes(problem);
    let top = problem.a[n].powi(3);
    let mut diag = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    for i in 1..=n {
        if i < n {
            diag.push((flux[i - 1] + flux[i]) / h);
            mass.push(h * problem.a[i]);
        } else {
            diag.push(flux[n - 1] / h - problem.beta * top);
            mass.push(0.5 * h * problem.a[n]);
        }
    }
    let off = (1..n).map(|i| -flux[i] / h).collect();
    Discretization { diag, off, mass }
}

/// Smallest eigenvalue and eigenfunction of the discrete problem on the problem grid.
pub fn mu_matrix_raw(problem: &SLProblem) -> Result<EigenResult> {
    let n = problem.n;
    let h = problem.step();
    let disc = discretize(problem);
    let scale: Vec<f64> = disc.mass.iter().map(|w| 1.0 / w.sqrt()).collect();
    let sym = symmetric_operator(problem);
    let mu = sym.eigenvalue(0);
    if !mu.is_finite() {
        return Err(Error::NotConverged {
            what: "tridiagonal bisection",
            iterations: 200,
            residual: f64::NAN,
        });
    }
    let y = sym.eigenvector(mu);
    let mut m = Vec::with_capacity(n + 1);
    m.push(0.0);
    m.extend(y.iter().zip(&scale).map(|(y, s)| y * s));
    let top = m[n];
    if top == 0.0 || !top.is_finite() {
        return Err(Error::NotConverged {
            what: "inverse iteration",
            iterations: 3,
            residual: f64::NAN,
        });
    }
    m.iter_mut().for_each(|v| *v /= top);

    let mut worst = 0.0f64;
    let mut stiff = 0.0f64;
    for i in 1..=n {
        let k = i - 1;
        let mut km = disc.diag[k] * m[i];
        if k > 0 {
            km += disc.off[k - 1] * m[i - 1];
        }
        if i < n {
            km += disc.off[k] * m[i + 1];
        }
        worst = worst.max((km - mu * disc.mass[k] * m[i]).abs());
        stiff = stiff.max(disc.diag[k].abs() * m[i].abs());
    }

    let mut m_z = vec![0.0; n + 1];
    m_z[0] = (-3.0 * m[0] + 4.0 * m[1] - m[2]) / (2.0 * h);
    for i in 1..n {
        m_z[i] = (m[i + 1] - m[i - 1]) / (2.0 * h);
    }
    // The Robin condition is imposed through the ghost node.
    m_z[n] = problem.beta * m[n];

    Ok(EigenResult {
        mu,
        xi: problem.xi,
        beta: problem.beta,
        z: problem.z.clone(),
        m,
        m_z,
        method: EigenMethod::Matrix,
        residual: worst / stiff.max(f64::MIN_POSITIVE),
    })
}

fn symmetric_operator(problem: &SLProblem) -> SymTridiagonal {
    let disc = discretize(problem);
    let scale: Vec<f64> = disc.mass.iter().map(|w| 1.0 / w.sqrt()).collect();
    SymTridiagonal::new(
        disc.diag.iter().zip(&scale).map(|(d, s)| d * s * s).collect(),
        disc.off
            .iter()
            .enumerate()
            .map(|(i, o)| o * scale[i] * scale[i + 1])
            .collect(),
    )
}

/// The j-th eigenvalue (j = 0 lowest), Richardson-extrapolated like [`mu_matrix`].
pub(crate) fn matrix_eigenvalue(problem: &SLProblem, j: usize) -> Result<f64> {
    let coarse = symmetric_operator(problem).eigenvalue(j);
    let fine = symmetric_operator(&problem.regrid(2 * problem.n)?).eigenvalue(j);
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Smallest eigenvalue by the flux-form finite-difference discretization,
/// Richardson-extrapolated from the problem grid and its two-fold refinement.
/// The eigenfunction is the one on the problem grid.
pub fn mu_matrix(problem: &SLProblem) -> Result<EigenResult> {
    let coarse = mu_matrix_raw(problem)?;
    let fine = mu_matrix_raw(&problem.regrid(2 * problem.n)?)?;
    Ok(EigenResult {
        mu: (4.0 * fine.mu - coarse.mu) / 3.0,
        ..coarse
    })
}

/// Classical RK4 for (ζ, p = a³ζ_z) from z0 down to 0.
struct Shooter<'a> {
    problem: &'a SLProblem,
    a_mid: Vec<f64>,
}

struct Shot {
    zeta0: f64,
    crossed: bool,
}

impl<'a> Shooter<'a> {
    fn new(problem: &'a SLProblem) -> Self {
        let coef = problem.coefficient();
        let h = problem.step();
        let a_mid = (0..problem.n).map(|i| coef.a((i as f64 + 0.5) * h)).collect();
        Self { problem, a_mid }
    }

    fn run(&self, mu: f64, mut record: Option<(&mut [f64], &mut [f64])>) -> Shot {
        let prob = self.problem;
        let n = prob.n;
        let h = -prob.step();
        let rhs = |a: f64, s: [f64; 2]| [s[1] / (a * a * a), -mu * a * s[0]];
        let mut s = [1.0, prob.a[n].powi(3) * prob.beta];
        let mut crossed = false;
        if let Some((zeta, p)) = record.as_mut() {
            zeta[n] = s[0];
            p[n] = s[1];
        }
        for i in (1..=n).rev() {
            let (a0, am, a1) = (prob.a[i], self.a_mid[i - 1], prob.a[i - 1]);
            let k1 = rhs(a0, s);
            let k2 = rhs(am, [s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(am, [s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(a1, [s[0] + h * k3[0], s[1] + h * k3[1]]);
            for c in 0..2 {
                s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if s[0] <= 0.0 {
                crossed = true;
            }
            if let Some((zeta, p)) = record.as_mut() {
                zeta[i - 1] = s[0];
                p[i - 1] = s[1];
            }
        }
        Shot {
            zeta0: s[0],
            crossed,
        }
    }
}

/// Lowest eigenvalue by shooting from the top with ζ(z0) = 1, ζ_z(z0) = β.
///
/// A μ lies above the lowest eigenvalue exactly when the shot solution vanishes
/// somewhere in [0, z0); that predicate brackets the root, which is then polished
/// with the Illinois variant of regula falsi on ζ(0; μ).
pub fn mu_shooting(problem: &SLProblem, tol: f64) -> Result<EigenResult> {
    let shooter = Shooter::new(problem);
    let crossed = |mu: f64| shooter.run(mu, None).crossed;

    let beta_plus = problem.beta.max(0.0);
    let mut lo = -(beta_plus * problem.a[0]).powi(2) - 1.0;
    let mut guard = 0;
    while crossed(lo) {
        lo = 2.0 * lo - 1.0;
        guard += 1;
        if guard > 200 || lo < -MU_CAP {
            return Err(Error::NoSignChange { mu_max: lo });
        }
    }
    let mut hi = 1.0f64.max(lo.abs());
    while !crossed(hi) {
        hi = 2.0 * hi + 1.0;
        if hi > MU_CAP {
            return Err(Error::NoSignChange { mu_max: hi });
        }
    }

    let mut f_lo = shooter.run(lo, None).zeta0;
    let mut f_hi = shooter.run(hi, None).zeta0;
    let mut iterations = 0;
    while !(f_lo > 0.0 && f_hi < 0.0 && hi - lo <= 1e-3 * (1.0 + lo.abs().max(hi.abs()))) {
        let mid = 0.5 * (lo + hi);
        let shot = shooter.run(mid, None);
        if shot.crossed {
            hi = mid;
            f_hi = shot.zeta0;
        } else {
            lo = mid;
            f_lo = shot.zeta0;
        }
        iterations += 1;
        if iterations > 400 {
            return Err(Error::NotConverged {
                what: "shooting bracket",
                iterations,
                residual: f_lo.abs().min(f_hi.abs()),
            });
        }
    }

    let mut side = 0i8;
    let mut mu = lo;
    let mut f_mu = f_lo;
    for _ in 0..200 {
        mu = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(mu > lo && mu < hi) {
            mu = 0.5 * (lo + hi);
        }
        f_mu = shooter.run(mu, None).zeta0;
        if f_mu.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if f_mu > 0.0 {
            lo = mu;
            f_lo = f_mu;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mu;
            f_hi = f_mu;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }

    let n = problem.n;
    let mut m = vec![0.0; n + 1];
    let mut flux = vec![0.0; n + 1];
    shooter.run(mu, Some((&mut m, &mut flux)));
    let m_z = flux
        .iter()
        .zip(&problem.a)
        .map(|(p, a)| p / (a * a * a))
        .collect();
    Ok(EigenResult {
        mu,
        xi: problem.xi,
        beta: problem.beta,
        z: problem.z.clone(),
        m,
        m_z,
        method: EigenMethod::Shooting,
        residual: f_mu.abs(),
    })
}

/// Energy and mass of the discrete quadratic forms on a grid with spacing
/// `stride · h` (stride 1 or 2).
fn forms(zeta: &[f64], problem: &SLProblem, flux: &[f64], stride: usize) -> (f64, f64) {
    let n = problem.n;
    let h = problem.step() * stride as f64;
    let mut energy = -problem.beta * problem.a[n].powi(3) * zeta[n] * zeta[n];
    let mut mass = 0.5 * h * problem.a[n] * zeta[n] * zeta[n];
    let mut i = 0;
    while i < n {
        let j = i + stride;
        let a3 = if stride == 1 { flux[i] } else { problem.a[i + 1].powi(3) };
        let dz = zeta[j] - zeta[i];
        energy += a3 * dz * dz / h;
        if i > 0 {
            mass += h * problem.a[i] * zeta[i] * zeta[i];
        }
        i = j;
    }
    (energy, mass)
}

/// Rayleigh quotient [∫a³ζ_z² − β a³(z0) ζ(z0)²] / ∫aζ² of a grid function.
///
/// Derivatives are centered on cell midpoints and both integrals use trapezoid
/// weights; when the grid has an even number of intervals the forms are
/// Richardson-combined with the every-other-node grid, which makes the quotient
/// fourth-order accurate for smooth ζ.
pub fn rayleigh_quotient(zeta: &[f64], problem: &SLProblem) -> Result<f64> {
    let n = problem.n;
    if zeta.len() != n + 1 {
        return Err(Error::InvalidParameter(format!(
            "grid function has {} samples, problem has {}",
            zeta.len(),
            n + 1
        )));
    }
    let size = zeta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if size == 0.0 {
        return Err(Error::InvalidParameter("grid function is identically zero".into()));
    }
    if zeta[0].abs() > 1e-8 * size {
        return Err(Error::InvalidParameter(format!(
            "grid function must vanish at z = 0, got {}",
            zeta[0]
        )));
    }
    let flux = midpoint_cubes(problem);
    let (e1, w1) = forms(zeta, problem, &flux, 1);
    let (energy, mass) = if n % 2 == 0 {
        let (e2, w2) = forms(zeta, problem, &flux, 2);
        ((4.0 * e1 - e2) / 3.0, (4.0 * w1 - w2) / 3.0)
    } else {
        (e1, w1)
    };
    if mass <= 0.0 {
        return Err(Error::InvalidParameter("zero denominator in Rayleigh quotient".into()));
    }
    Ok(energy / mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::spectral::BoundaryConvention;
    use proptest::prelude::*;

    /// Lowest root of the constant-coefficient relation β tan(κ z0) = κ
    /// (or β tanh(κ z0) = κ below zero), returned as μ = ±ξ²κ².
    fn constant_coefficient_mu(xi: f64, z0: f64, beta: f64) -> f64 {
        let bisect = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) > 0.0) == (f(lo) > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        if beta * z0 > 1.0 {
            // κ z0 = t solves t = β z0 tanh t, t in (0, β z0].
            let g = |t: f64| t - beta * z0 * t.tanh();
            let t = bisect(&g, 1e-9, beta * z0);
            -(xi * t / z0).powi(2)
        } else {
            // t cos t − β z0 sin t = 0 on (0, π).
            let g = |t: f64| t * t.cos() - beta * z0 * t.sin();
            let t = bisect(&g, 1e-9, std::f64::consts::PI - 1e-12);
            (xi * t / z0).powi(2)
        }
    }

    fn nearly_constant(d: f64) -> ModelParams {
        ModelParams::abstract_constants(d, 1e-8, 1.0, 0.1)
    }

    #[test]
    fn quarter_wave_with_neumann_top() {
        let p = nearly_constant(0.5);
        let prob = SLProblem::with_convention(1.3, &p, 512, BoundaryConvention::Explicit(0.0)).unwrap();
        let expected = (1.3 * std::f64::consts::PI / (2.0 * prob.z0)).powi(2);
        let sh = mu_shooting(&prob, DEFAULT_SHOOTING_TOL).unwrap();
        let mx = mu_matrix(&prob).unwrap();
        assert!((sh.mu - expected).abs() <= 1e-6, "{} vs {expected}", sh.mu);
        assert!((mx.mu - expected).abs() <= 1e-6, "{} vs {expected}", mx.mu);
        for (m, z) in sh.m.iter().zip(&sh.z) {
            let exact = (std::f64::consts::PI * z / (2.0 * prob.z0)).sin();
            assert!((m - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_coefficient_transcendental_oracle() {
        for &(d, xi, conv) in &[
            (0.1, 0.8, BoundaryConvention::LaminarHead),
            (0.1, 2.2, BoundaryConvention::LaminarHead),
            (1.0, 1.5, BoundaryConvention::LaminarHead),
            (0.1, 2.2, BoundaryConvention::AsPrinted),
            (0.4, 0.5, BoundaryConvention::AsPrinted),
            (0.3, 1.0, BoundaryConvention::Explicit(-2.0)),
        ] {
            let p = nearly_constant(d);
            let prob = SLProblem::with_convention(xi, &p, 1024, conv).unwrap();
            let expected = constant_coefficient_mu(xi, prob.z0, prob.beta);
            let sh = mu_shooting(&prob, DEFAULT_SHOOTING_TOL).unwrap();
            let mx = mu_matrix(&prob).unwrap();
            let scale = 1.0f64.max(expected.abs());
            assert!((sh.mu - expected).abs() <= 1e-6 * scale, "{conv:?} {xi}: {} vs {expected}", sh.mu);
            assert!((mx.mu - expected).abs() <= 1e-6 * scale, "{conv:?} {xi}: {} vs {expected}", mx.mu);
        }
    }

    #[test]
    fn matrix_and_shooting_agree_on_reference() {
        let p = ModelParams::reference();
        for xi in [0.05, 0.0997, 0.3, 2.2, 3.0] {
            let prob = SLProblem::new(xi, &p, 1024).unwrap();
            let sh = mu_shooting(&prob, DEFAULT_SHOOTING_TOL).unwrap();
            let mx = mu_matrix(&prob).unwrap();
            assert!((sh.mu - mx.mu).abs() <= 1e-6, "xi {xi}: {} vs {}", sh.mu, mx.mu);
        }
    }

    #[test]
    fn eigenfunction_contract() {
        let p = ModelParams::reference();
        let prob = SLProblem::new(2.2, &p, 1024).unwrap();
        for r in [mu_shooting(&prob, DEFAULT_SHOOTING_TOL).unwrap(), mu_matrix(&prob).unwrap()] {
            let n = r.m.len() - 1;
            assert_eq!(r.m[n], 1.0);
            assert!(r.m[0].abs() <= 1e-12);
            assert!(r.boundary_residual() <= 1e-8, "{:?}", r.method);
            assert!(r.m[1..].iter().all(|&v| v > 0.0));
        }
        let sh = mu_shooting(&prob, 1e-12).unwrap();
        assert!(sh.residual <= 1e-12);
    }

    #[test]
    fn matrix_method_is_second_order_before_extrapolation() {
        let p = ModelParams::reference();
        let exact = mu_shooting(&SLProblem::new(1.0, &p, 4096).unwrap(), 1e-13).unwrap().mu;
        let err = |n| (mu_matrix_raw(&SLProblem::new(1.0, &p, n).unwrap()).unwrap().mu - exact).abs();
        let ratio = err(128) / err(256);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn quotient_closed_form_linear_trial() {
        let p = nearly_constant(0.2);
        let prob = SLProblem::with_convention(1.7, &p, 64, BoundaryConvention::Explicit(0.0)).unwrap();
        let q = rayleigh_quotient(&prob.z, &prob).unwrap();
        let expected = 3.0 * 1.7 * 1.7 / (prob.z0 * prob.z0);
        assert!((q - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn quotient_of_eigenfunction_is_eigenvalue() {
        let p = ModelParams::reference();
        for xi in [0.0997, 2.2] {
            let prob = SLProblem::new(xi, &p, 1024).unwrap();
            let sh = mu_shooting(&prob, DEFAULT_SHOOTING_TOL).unwrap();
            let mut m = sh.m.clone();
            m[0] = 0.0;
            let q = rayleigh_quotient(&m, &prob).unwrap();
            assert!((q - sh.mu).abs() <= 1e-6, "{q} vs {}", sh.mu);
        }
    }

    #[test]
    fn quotient_rejects_bad_trials() {
        let p = ModelParams::reference();
        let prob = SLProblem::new(2.2, &p, 64).unwrap();
        assert!(rayleigh_quotient(&vec![0.0; 65], &prob).is_err());
        assert!(rayleigh_quotient(&vec![1.0; 65], &prob).is_err());
        assert!(rayleigh_quotient(&vec![0.0; 10], &prob).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn quotient_bounds_lowest_eigenvalue(
            xi in 0.06f64..3.0,
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..6),
            noise in proptest::collection::vec(-1.0f64..1.0, 129),
            lead in 0.1f64..2.0,
        ) {
            let p = ModelParams::reference();
            let prob = SLProblem::new(xi, &p, 128).unwrap();
            let mu = mu_shooting(&prob, DEFAULT_SHOOTING_TOL).unwrap().mu;
            let mut zeta: Vec<f64> = prob.z.iter().enumerate().map(|(i, z)| {
                let s = z / prob.z0;
                let smooth: f64 = coeffs.iter().enumerate()
                    .map(|(k, c)| c * ((k as f64 + 0.5) * std::f64::consts::PI * s).sin())
                    .sum();
                lead * s + smooth + 1e-3 * noise[i]
            }).collect();
            zeta[0] = 0.0;
            if zeta.iter().any(|v| v.abs() > 1e-6) {
                let q = rayleigh_quotient(&zeta, &prob).unwrap();
                prop_assert!(q >= mu - 1e-8 * (1.0 + mu.abs()), "q {} < mu {}", q, mu);
            }
        }
    }
}
