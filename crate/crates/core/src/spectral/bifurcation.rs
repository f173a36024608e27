use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{matrix_eigenvalue, mu_matrix, mu_shooting, EigenResult};
use super::{BoundaryConvention, SLProblem};
use crate::error::{Error, Result};
use crate::laminar::{z0_of_xi, Coefficient};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The explicit depth inequality lhs < rhs guaranteeing a crossing μ = −1.
pub fn depth_condition(params: &ModelParams) -> DepthReport {
    let (c1, d, c2, c3) = (params.c1, params.d, params.c2, params.c3);
    let s = c2 + c3;
    let b = 2.0 * s * s / c1 + d * (d * c1 + 4.0 * c2 + 4.0 * c3) / 2.0;
    let r2 = std::f64::consts::SQRT_2;
    let lhs = r2 / 24.0 * c1.powf(2.5) * b.powf(1.5) + r2 / 20.0 * c1.powf(1.5) * b.powf(2.5);
    let rhs = s.powi(4);
    DepthReport {
        lhs,
        rhs,
        holds: lhs < rhs,
    }
}

/// Lower bound −4β²(ξ + √(2c1 z0))² on the lowest eigenvalue.
pub fn mu_lower_bound(problem: &SLProblem) -> f64 {
    let r = problem.xi + (2.0 * problem.c1 * problem.z0).sqrt();
    -4.0 * problem.beta * problem.beta * r * r
}

/// The bound −4c3²(ξ + √(2c1 z0))²/(ξ²(ξ/2 − c2)²) in its printed constants.
/// Diagnostic only: it does not bound μ for the consistent boundary coefficient.
pub fn mu_lower_bound_printed(xi: f64, params: &ModelParams) -> Result<f64> {
    let z0 = z0_of_xi(xi, params)?;
    let r = xi + (2.0 * params.c1 * z0).sqrt();
    let q = xi / 2.0 - params.c2;
    Ok(-4.0 * params.c3 * params.c3 * r * r / (xi * xi * q * q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    /// Grid intervals of the eigen-solvers.
    pub n: usize,
    /// Bound on |μ(ξ*) + 1|.
    pub tol: f64,
    pub convention: BoundaryConvention,
}

impl ScanOptions {
    pub fn for_params(params: &ModelParams) -> Self {
        Self {
            from: params.epsilon0,
            to: params.xi_max,
            points: 200,
            n: 1024,
            tol: 1e-10,
            convention: BoundaryConvention::LaminarHead,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub xi: f64,
    pub mu: f64,
    /// |μ_matrix − μ_shooting|.
    pub method_gap: f64,
}

fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect()
}

fn check_range(from: f64, to: f64, points: usize) -> Result<()> {
    if !(from > 0.0 && to > from && from.is_finite() && to.is_finite()) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "bad scan range [{from}, {to}] with {points} points"
        )));
    }
    Ok(())
}

/// μ(ξ) by shooting, with the gap to the matrix method, on a uniform ξ grid.
pub fn mu_scan(params: &ModelParams, options: &ScanOptions) -> Result<Vec<ScanRow>> {
    check_range(options.from, options.to, options.points)?;
    linspace(options.from, options.to, options.points)
        .par_iter()
        .map(|&xi| {
            let prob = SLProblem::with_convention(xi, params, options.n, options.convention)?;
            let sh = mu_shooting(&prob, 0.0)?;
            let mx = mu_matrix(&prob)?;
            Ok(ScanRow {
                xi,
                mu: sh.mu,
                method_gap: (mx.mu - sh.mu).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiStarReport {
    pub xi_star: f64,
    pub mu_at_root: f64,
    /// Every refined crossing of μ = −1 in the range, ascending.
    pub roots: Vec<f64>,
    /// Sorted (ξ, μ(ξ)) samples.
    pub scan: Vec<(f64, f64)>,
    pub bracket: (f64, f64),
    /// dμ/dξ at ξ* by central differences.
    pub slope: f64,
    /// μ increasing through the crossing.
    pub monotone: bool,
    /// Scan intervals on which μ decreases.
    pub decreasing_intervals: usize,
    pub mu_matrix: f64,
    pub mu_shooting: f64,
    pub depth_condition: DepthReport,
    /// 2(c2 + c3), the threshold the kernel argument is stated against.
    pub threshold: f64,
    pub above_threshold: bool,
    pub n: usize,
    pub warnings: Vec<String>,
}

/// Locates ξ* with μ(ξ*) = −1 using the default scan of the parameter range.
pub fn find_xi_star(params: &ModelParams, xi_range: (f64, f64), n_scan: usize) -> Result<XiStarReport> {
    let options = ScanOptions {
        from: xi_range.0,
        to: xi_range.1,
        points: n_scan,
        ..ScanOptions::for_params(params)
    };
    find_xi_star_with(params, &options)
}

pub fn find_xi_star_with(params: &ModelParams, options: &ScanOptions) -> Result<XiStarReport> {
    check_range(options.from, options.to, options.points)?;
    if options.from < params.epsilon0 {
        return Err(Error::InvalidParameter(format!(
            "scan starts at {} below epsilon0 = {}",
            options.from, params.epsilon0
        )));
    }
    let depth = depth_condition(params);
    let mut warnings = Vec::new();
    if !depth.holds {
        warnings.push(format!(
            "depth condition fails: lhs {:.6e} >= rhs {:.6e}",
            depth.lhs, depth.rhs
        ));
    }

    let mu = |xi: f64| -> Result<f64> {
        let prob = SLProblem::with_convention(xi, params, options.n, options.convention)?;
        Ok(mu_shooting(&prob, 0.0)?.mu)
    };
    let scan: Vec<(f64, f64)> = linspace(options.from, options.to, options.points)
        .par_iter()
        .map(|&xi| mu(xi).map(|m| (xi, m)))
        .collect::<Result<_>>()?;

    let mut brackets = Vec::new();
    for w in scan.windows(2) {
        let (f0, f1) = (w[0].1 + 1.0, w[1].1 + 1.0);
        if f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0 {
            brackets.push((w[0].0, w[1].0));
        }
    }
    if let Some(last) = scan.last() {
        if last.1 + 1.0 == 0.0 {
            brackets.push((last.0, last.0));
        }
    }
    if brackets.is_empty() {
        return Err(Error::NoCrossing {
            from: options.from,
            to: options.to,
        });
    }

    let mut roots = Vec::with_capacity(brackets.len());
    for &(a, b) in &brackets {
        roots.push(bisect_crossing(&mu, a, b, options.tol)?);
    }
    let xi_star = roots[0];
    let bracket = brackets[0];

    let h = 1e-6 * xi_star;
    let slope = (mu(xi_star + h)? - mu(xi_star - h)?) / (2.0 * h);
    let decreasing_intervals = scan.windows(2).filter(|w| w[1].1 < w[0].1).count();
    let prob = SLProblem::with_convention(xi_star, params, options.n, options.convention)?;
    let shooting = mu_shooting(&prob, 0.0)?.mu;
    let matrix = mu_matrix(&prob)?.mu;
    let threshold = 2.0 * (params.c2 + params.c3);
    if roots.len() > 1 {
        warnings.push(format!("{} crossings of mu = -1 in range", roots.len()));
    }

    Ok(XiStarReport {
        xi_star,
        mu_at_root: shooting,
        roots,
        scan,
        bracket,
        slope,
        monotone: slope > 0.0,
        decreasing_intervals,
        mu_matrix: matrix,
        mu_shooting: shooting,
        depth_condition: depth,
        threshold,
        above_threshold: xi_star > threshold,
        n: options.n,
        warnings,
    })
}

fn bisect_crossing(mu: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut f_lo = mu(lo)? + 1.0;
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    let mut best = (f64::INFINITY, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = mu(mid)? + 1.0;
        if f_mid.abs() < best.0 {
            best = (f_mid.abs(), mid);
        }
        if f_mid.abs() <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NotConverged {
        what: "xi* bisection",
        iterations: 200,
        residual: best.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k: u32,
    /// −k², the eigenvalue a mode-k kernel element requires (k ≥ 1).
    pub target: f64,
    /// Distance of the target from the computed spectrum; for k = 0 the value of ∫a⁻³.
    pub margin: f64,
    pub solvable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub xi_star: f64,
    pub mu_star: f64,
    /// ∫₀^z0 a⁻³ dz by Simpson quadrature.
    pub integral_inverse_cube: f64,
    /// The same integral in closed form, (1/c1)(1/ξ − 1/a(0)).
    pub integral_inverse_cube_exact: f64,
    pub modes: Vec<ModeEntry>,
    pub dimension: usize,
}

/// Distance below which −k² counts as an eigenvalue.
const KERNEL_TOL: f64 = 1e-6;

/// Per-mode solvability of the linearized problem at ξ*.
pub fn kernel_report(xi_star: f64, kmax: u32, params: &ModelParams, n: usize) -> Result<KernelReport> {
    let prob = SLProblem::new(xi_star, params, n)?;
    let lowest = mu_shooting(&prob, 0.0)?.mu;
    let coef = prob.coefficient();
    let integral = simpson(&prob.a.iter().map(|a| a.powi(-3)).collect::<Vec<_>>(), prob.step());
    let exact = (1.0 / coef.xi - 1.0 / coef.a(0.0)) / coef.c1;

    let mut modes = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let entry = if k == 0 {
            ModeEntry {
                k,
                target: 0.0,
                margin: integral,
                solvable: integral == 0.0,
            }
        } else {
            let target = -f64::from(k * k);
            let margin = if target <= lowest + KERNEL_TOL {
                lowest - target
            } else {
                nearest_higher_eigenvalue(&prob, target)?
            };
            ModeEntry {
                k,
                target,
                margin,
                solvable: margin.abs() <= KERNEL_TOL,
            }
        };
        modes.push(entry);
    }
    Ok(KernelReport {
        xi_star,
        mu_star: lowest,
        integral_inverse_cube: integral,
        integral_inverse_cube_exact: exact,
        dimension: modes.iter().filter(|m| m.solvable).count(),
        modes,
    })
}

/// Signed distance from `target` to the nearest eigenvalue above the lowest one.
fn nearest_higher_eigenvalue(prob: &SLProblem, target: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    let mut j = 1;
    loop {
        let mu = matrix_eigenvalue(prob, j)?;
        if (mu - target).abs() < best.abs() {
            best = mu - target;
        }
        if mu > target || j >= prob.n - 1 {
            return Ok(best);
        }
        j += 1;
    }
}

fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    if n % 2 == 1 {
        let trap: f64 = values.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
        return trap * h;
    }
    let mut s = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    s * h / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub xi_star: f64,
    /// Interior plus boundary pairing.
    pub value: f64,
    pub interior: f64,
    pub boundary: f64,
    /// ∬ ζ*² over the rectangle.
    pub norm_sq: f64,
    /// ∫ ζ*² along the top boundary.
    pub boundary_norm_sq: f64,
    /// The lower-bound expression {2c2 + [√3 − c2/(ξ/2 − c3)]ξ} ∫ ζ*² along the top.
    pub lower_bound_expression: f64,
    pub dmu_dxi: Option<f64>,
    pub nw: usize,
    pub nz: usize,
}

impl TransversalityReport {
    pub fn relative(&self) -> f64 {
        self.value.abs() / self.norm_sq
    }
}

/// The pairing of the ξ-derivative of the linearized operator with the kernel
/// mode ζ* = M(z) cos w, by a periodic trapezoid rule in w and Simpson's rule in z.
pub fn transversality(
    xi_star: f64,
    eig: &EigenResult,
    params: &ModelParams,
    nw: usize,
) -> Result<TransversalityReport> {
    let n = eig.m.len() - 1;
    if n % 2 == 1 || nw < 4 {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs an even z grid and nw >= 4 (n = {n}, nw = {nw})"
        )));
    }
    let z0 = eig.z[n];
    let coef = Coefficient {
        xi: xi_star,
        c1: params.c1,
        z0,
    };
    let h = z0 / n as f64;
    let dw = 2.0 * std::f64::consts::PI / nw as f64;
    let cos: Vec<f64> = (0..nw).map(|j| super::fourier::sample_w(j, nw).cos()).collect();

    let mut interior_z = vec![0.0; n + 1];
    let mut norm_z = vec![0.0; n + 1];
    for i in 0..=n {
        let a = coef.a(eig.z[i]);
        let a_z = coef.a_z(eig.z[i]);
        let (m, mz) = (eig.m[i], eig.m_z[i]);
        let mut acc = 0.0;
        let mut sq = 0.0;
        for &c in &cos {
            let zeta = m * c;
            let zeta_ww = -m * c;
            let zeta_z = mz * c;
            acc += a.powi(3) * zeta * 2.0 * xi_star * (zeta_ww / a.powi(4) + 3.0 * a_z * zeta_z / a.powi(3));
            sq += zeta * zeta;
        }
        interior_z[i] = acc * dw;
        norm_z[i] = sq * dw;
    }
    let interior = simpson(&interior_z, h);
    let norm_sq = simpson(&norm_z, h);

    let (mt, mzt) = (eig.m[n], eig.m_z[n]);
    let mut boundary = 0.0;
    let mut boundary_norm_sq = 0.0;
    for &c in &cos {
        let zeta = mt * c;
        boundary += (2.0 * params.c2 * zeta * zeta + xi_star * xi_star * zeta * mzt * c) * dw;
        boundary_norm_sq += zeta * zeta * dw;
    }
    let bracket = 2.0 * params.c2
        + (3f64.sqrt() - params.c2 / (xi_star / 2.0 - params.c3)) * xi_star;

    Ok(TransversalityReport {
        xi_star,
        value: interior + boundary,
        interior,
        boundary,
        norm_sq,
        boundary_norm_sq,
        lower_bound_expression: bracket * boundary_norm_sq,
        dmu_dxi: None,
        nw,
        nz: n,
    })
}

/// [`transversality`] on a fresh shooting eigenfunction with n intervals, plus dμ/dξ.
pub fn transversality_at(
    xi_star: f64,
    params: &ModelParams,
    n: usize,
    nw: usize,
) -> Result<TransversalityReport> {
    let mu = |xi: f64| -> Result<f64> { Ok(mu_shooting(&SLProblem::new(xi, params, n)?, 0.0)?.mu) };
    let eig = mu_shooting(&SLProblem::new(xi_star, params, n)?, 0.0)?;
    let mut report = transversality(xi_star, &eig, params, nw)?;
    let h = 1e-6 * xi_star;
    report.dmu_dxi = Some((mu(xi_star + h)? - mu(xi_star - h)?) / (2.0 * h));
    Ok(report)
}
