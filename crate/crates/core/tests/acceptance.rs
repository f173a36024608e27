//! Acceptance criteria 1–9. Each test prints one `PASS`/`FAIL` line and then
//! asserts it. Thresholds are pinned as constants next to each test.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vesselwave::laminar::{laminar_profile, z0_of_xi};
use vesselwave::nonlinear::{
    continue_branch, jacobian_apply, linearized_operator_check, power_law_fit, residual, BranchOptions, HeightField,
    TestField,
};
use vesselwave::reconstruct::{diagnostics, physical_fields, Diagnostics};
use vesselwave::spectral::{
    depth_condition, find_xi_star, kernel_report, mu_matrix, mu_scan, mu_shooting, transversality_at, ScanOptions,
    SLProblem, DEFAULT_SHOOTING_TOL,
};
use vesselwave::{BodyForceModel, ModelParams};

fn report(criterion: u32, name: &str, pass: bool, detail: String, elapsed: Duration) {
    println!(
        "criterion {criterion} ({name}): {} [{detail}; {:.3} s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn reference() -> (ModelParams, BodyForceModel) {
    let p = ModelParams::reference();
    (p, BodyForceModel::ConstantVertical { c1: p.c1 })
}

/// Classical RK4 for H'' = c1 H'^3 from H(0) = 0, H'(0) = 1/a(0).
fn rk4_laminar(c1: f64, xi: f64, z0: f64, n: usize) -> Vec<f64> {
    let f = |p: f64| c1 * p * p * p;
    let h = z0 / n as f64;
    let (mut y, mut p) = (0.0f64, 1.0 / (xi * xi + 2.0 * c1 * z0).sqrt());
    let mut out = vec![y];
    for _ in 0..n {
        let (k1y, k1p) = (p, f(p));
        let (k2y, k2p) = (p + 0.5 * h * k1p, f(p + 0.5 * h * k1p));
        let (k3y, k3p) = (p + 0.5 * h * k2p, f(p + 0.5 * h * k2p));
        let (k4y, k4p) = (p + h * k3p, f(p + h * k3p));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        out.push(y);
    }
    out
}

const C1_ODE_GAP: f64 = 1e-8;
const C1_ENDPOINTS: f64 = 1e-12;
const C1_RUNTIME: Duration = Duration::from_secs(1);

#[test]
fn criterion_1_laminar_exactness() {
    let t = Instant::now();
    let p = ModelParams::physical(1.0, 1.0);
    let prof = laminar_profile(1.0, 1000, &p).unwrap();
    let oracle = rk4_laminar(1.0, 1.0, 1.5, 1000);
    let gap = prof.h.iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let ends = prof.h[0].abs().max((prof.h[1000] - 1.0).abs());
    let z0 = z0_of_xi(1.0, &p).unwrap();
    let elapsed = t.elapsed();
    let pass = gap <= C1_ODE_GAP && ends <= C1_ENDPOINTS && z0 == 1.5 && prof.z0 == 1.5 && elapsed < C1_RUNTIME;
    report(1, "laminar exactness", pass, format!("ode gap {gap:.2e}, endpoint error {ends:.2e}, z0 {z0}"), elapsed);
}

const C2_REL_TOL: f64 = 1e-3;
const C2_RUNTIME: Duration = Duration::from_millis(1);

/// The depth inequality evaluated term by term.
fn depth_oracle(c1: f64, d: f64, c2: f64, c3: f64) -> (f64, f64) {
    let s = c2 + c3;
    let b = 2.0 * s * s / c1 + d * d * c1 / 2.0 + 2.0 * d * s;
    let lhs = 2f64.sqrt() * (c1.powf(2.5) * b.powf(1.5) / 24.0 + c1.powf(1.5) * b.powf(2.5) / 20.0);
    (lhs, s.powi(4))
}

#[test]
fn criterion_2_depth_condition() {
    let t = Instant::now();
    let on_r = depth_condition(&ModelParams::reference());
    let deep = depth_condition(&ModelParams::abstract_constants(1.0, 1.0, 1.0, 1.0));
    let elapsed = t.elapsed();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let (lr, rr) = depth_oracle(1.0, 0.1, 1.0, 0.1);
    let (ld, rd) = depth_oracle(1.0, 1.0, 1.0, 1.0);
    let errs = [
        rel(on_r.lhs, lr),
        rel(on_r.rhs, rr),
        rel(deep.lhs, ld),
        rel(deep.rhs, rd),
        rel(on_r.lhs, 1.0581),
        rel(on_r.rhs, 1.4641),
        rel(deep.lhs, 41.67),
        rel(deep.rhs, 16.0),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let pass = on_r.holds && !deep.holds && worst <= C2_REL_TOL && elapsed < C2_RUNTIME;
    report(
        2,
        "depth condition",
        pass,
        format!(
            "R: {:.4} < {:.4}; (1,1,1,1): {:.2} > {:.0}; worst relative error {worst:.1e}",
            on_r.lhs, on_r.rhs, deep.lhs, deep.rhs
        ),
        elapsed,
    );
}

const C3_METHOD_GAP: f64 = 1e-6;
const C3_ORACLE_GAP: f64 = 1e-6;
const C3_RUNTIME: Duration = Duration::from_secs(30);

/// Lowest eigenvalue of ξ³M'' = −μξM, M(0) = 0, M'(z0) = βM(z0).
fn constant_coefficient_mu(xi: f64, z0: f64, beta: f64) -> f64 {
    let bisect = |g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0) == (g(lo) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let b = beta * z0;
    if b > 1.0 {
        let t = bisect(&|t: f64| t - b * t.tanh(), 1e-9, b);
        -(xi * t / z0).powi(2)
    } else {
        let t = bisect(&|t: f64| t * t.cos() - b * t.sin(), 1e-9, std::f64::consts::PI - 1e-12);
        (xi * t / z0).powi(2)
    }
}

#[test]
fn criterion_3_eigen_cross_validation() {
    let t = Instant::now();
    let (p, _) = reference();
    let options = ScanOptions {
        from: p.epsilon0,
        to: p.xi_max,
        points: 50,
        n: 1024,
        ..ScanOptions::for_params(&p)
    };
    let rows = mu_scan(&p, &options).unwrap();
    let method_gap = rows.iter().map(|r| r.method_gap).fold(0.0, f64::max);

    let mut oracle_gap = 0.0f64;
    for &(d, xi) in &[(0.1, 0.5), (0.1, 2.2), (1.0, 1.0), (1.0, 3.0), (0.5, 1.5)] {
        let q = ModelParams::abstract_constants(d, 1e-8, 1.0, 0.1);
        let prob = SLProblem::new(xi, &q, 1024).unwrap();
        let exact = constant_coefficient_mu(xi, prob.z0, prob.beta);
        let scale = exact.abs().max(1.0);
        for mu in [mu_shooting(&prob, DEFAULT_SHOOTING_TOL).unwrap().mu, mu_matrix(&prob).unwrap().mu] {
            oracle_gap = oracle_gap.max((mu - exact).abs() / scale);
        }
    }
    let elapsed = t.elapsed();
    let pass = rows.len() == 50 && method_gap <= C3_METHOD_GAP && oracle_gap <= C3_ORACLE_GAP && elapsed < C3_RUNTIME;
    report(
        3,
        "eigen cross-validation",
        pass,
        format!("max method gap {method_gap:.2e} over 50 points, oracle gap {oracle_gap:.2e}"),
        elapsed,
    );
}

const C4_ROOT_TOL: f64 = 1e-10;
const C4_STABILITY: f64 = 1e-6;
const C4_RUNTIME: Duration = Duration::from_secs(60);

#[test]
fn criterion_4_bifurcation_point() {
    let t = Instant::now();
    let (p, _) = reference();
    let coarse = find_xi_star(&p, (p.epsilon0, p.xi_max), 200).unwrap();
    let fine_opts = ScanOptions {
        n: 2048,
        ..ScanOptions::for_params(&p)
    };
    let fine = vesselwave::spectral::find_xi_star_with(&p, &fine_opts).unwrap();
    let xi = coarse.xi_star;
    let mu = |x: f64| mu_shooting(&SLProblem::new(x, &p, 1024).unwrap(), DEFAULT_SHOOTING_TOL).unwrap().mu;
    let h = 1e-4 * xi;
    let slope = (mu(xi + h) - mu(xi - h)) / (2.0 * h);
    let stability = (coarse.xi_star - fine.xi_star).abs();
    // finite-depth dispersion relation for unit wavenumber
    let dispersion = (p.c1 * p.d.tanh() - xi).abs();
    let elapsed = t.elapsed();
    let pass = coarse.roots.len() == 1
        && (coarse.mu_at_root + 1.0).abs() <= C4_ROOT_TOL
        && slope > 0.0
        && coarse.monotone
        && stability <= C4_STABILITY
        && elapsed < C4_RUNTIME;
    report(
        4,
        "bifurcation point",
        pass,
        format!(
            "xi* = {xi:.12}, roots {}, |mu+1| {:.1e}, slope {slope:.4}, N-doubling shift {stability:.1e}, gap to c1 tanh(d) {dispersion:.1e}",
            coarse.roots.len(),
            (coarse.mu_at_root + 1.0).abs()
        ),
        elapsed,
    );
}

const C5_T_FLOOR: f64 = 1e-6;
const C5_GRID_STABILITY: f64 = 1e-8;
const C5_RUNTIME: Duration = Duration::from_secs(30);

#[test]
fn criterion_5_crandall_rabinowitz() {
    let t = Instant::now();
    let (p, _) = reference();
    let xi = find_xi_star(&p, (p.epsilon0, p.xi_max), 200).unwrap().xi_star;
    let kernel = kernel_report(xi, 6, &p, 1024).unwrap();
    let k0 = &kernel.modes[0];
    let higher_excluded = kernel.modes[2..].iter().all(|m| !m.solvable && kernel.mu_star > m.target);
    let coarse = transversality_at(xi, &p, 512, 16).unwrap();
    let fine = transversality_at(xi, &p, 1024, 32).unwrap();
    let drift = (coarse.value - fine.value).abs() / fine.value.abs();
    let elapsed = t.elapsed();
    let pass = kernel.dimension == 1
        && !k0.solvable
        && kernel.integral_inverse_cube > 0.0
        && kernel.modes[1].solvable
        && higher_excluded
        && fine.value.abs() > C5_T_FLOOR * fine.norm_sq
        && drift <= C5_GRID_STABILITY
        && elapsed < C5_RUNTIME;
    report(
        5,
        "Crandall-Rabinowitz hypotheses",
        pass,
        format!(
            "dim {}, int a^-3 = {:.4e}, mu* = {:.10}, |T|/|zeta|^2 = {:.4e}, grid drift {drift:.1e}",
            kernel.dimension,
            kernel.integral_inverse_cube,
            kernel.mu_star,
            fine.relative()
        ),
        elapsed,
    );
}

const C6_MIN_POINTS: usize = 20;
const C6_RESIDUAL: f64 = 1e-10;
const C6_EXPONENT: (f64, f64) = (1.8, 2.2);
const C6_RUNTIME: Duration = Duration::from_secs(600);

#[test]
fn criterion_6_branch_existence() {
    let t = Instant::now();
    let (p, force) = reference();
    let xi = find_xi_star(&p, (p.epsilon0, p.xi_max), 200).unwrap().xi_star;
    let eigen = mu_shooting(&SLProblem::new(xi, &p, 1024).unwrap(), DEFAULT_SHOOTING_TOL).unwrap();
    // ε from 1e-4·d to 1e-2·d
    let options = BranchOptions::new(100, 1e-5, 128, 64);
    let branch = continue_branch(xi, &eigen, &p, &force, &options).unwrap();
    let recs = &branch.records;
    let converged = recs[1..].iter().filter(|r| r.residual <= C6_RESIDUAL).count();
    let monotone = recs.windows(2).all(|w| w[1].eps > w[0].eps);
    let independent: Vec<usize> = recs.iter().filter(|r| r.is_w_independent(p.d)).map(|r| r.step).collect();

    let (lo, hi) = (1e-4 * p.d * (1.0 - 1e-9), 1e-2 * p.d * (1.0 + 1e-9));
    let (mut eps, mut dev) = (Vec::new(), Vec::new());
    for k in 1..recs.len() {
        if (lo..=hi).contains(&recs[k].eps) {
            eps.push(recs[k].eps);
            dev.push(branch.expansion_deviation(k));
        }
    }
    let (exponent, constant) = power_law_fit(&eps, &dev).unwrap();
    let elapsed = t.elapsed();
    let pass = converged >= C6_MIN_POINTS
        && converged == recs.len() - 1
        && monotone
        && independent == [0]
        && branch.stopped.is_none()
        && (C6_EXPONENT.0..=C6_EXPONENT.1).contains(&exponent)
        && elapsed < C6_RUNTIME;
    report(
        6,
        "branch existence",
        pass,
        format!(
            "{converged} converged points at 128x64, eps up to {:.2e}, w-independent records {independent:?}, deviation ~ {constant:.3e} eps^{exponent:.4} over {} points",
            recs.last().unwrap().eps,
            eps.len()
        ),
        elapsed,
    );
}

const C7_RATIO: f64 = 3.2;
const C7_ROUNDOFF: f64 = 1e-12;
const C7_RUNTIME_PER_CHECKPOINT: Duration = Duration::from_secs(60);

#[test]
fn criterion_7_physical_conservation() {
    let t = Instant::now();
    let (p, force) = reference();
    let xi = find_xi_star(&p, (p.epsilon0, p.xi_max), 200).unwrap().xi_star;
    let eigen = mu_shooting(&SLProblem::new(xi, &p, 1024).unwrap(), DEFAULT_SHOOTING_TOL).unwrap();
    let grids = [(64, 32), (128, 64), (256, 128)];
    // diags[g][c]: checkpoint c on grid g
    let mut diags: Vec<Vec<Diagnostics>> = Vec::new();
    let mut checkpoints = 0;
    for &(nw, nz) in &grids {
        let options = BranchOptions {
            checkpoint_every: 2,
            ..BranchOptions::new(4, 2.5e-5, nw, nz)
        };
        let branch = continue_branch(xi, &eigen, &p, &force, &options).unwrap();
        let mut per_grid = Vec::new();
        for (rec, field) in branch.records.iter().zip(&branch.fields) {
            if rec.checkpoint.is_some() {
                let pf = physical_fields(field, &force).unwrap();
                per_grid.push(diagnostics(&pf, field, &force));
                checkpoints += 1;
            }
        }
        diags.push(per_grid);
    }
    // Quartering: each audit either sits at round-off or drops by C7_RATIO per halving.
    let quarters = |a: f64, b: f64| b <= C7_ROUNDOFF || a / b >= C7_RATIO;
    let mut worst_ratio = f64::INFINITY;
    let mut pass = diags.iter().all(|g| g.len() == 3);
    for g in 0..grids.len() - 1 {
        for c in 0..diags[g].len() {
            let (a, b) = (&diags[g][c], &diags[g + 1][c]);
            for (x, y) in [
                (a.bernoulli_spread, b.bernoulli_spread),
                (a.flow_force_spread, b.flow_force_spread),
                (a.flux_spread, b.flux_spread),
            ] {
                pass &= quarters(x, y);
                if y > C7_ROUNDOFF {
                    worst_ratio = worst_ratio.min(x / y);
                }
            }
        }
    }
    let margin = diags.iter().flatten().map(|d| d.stagnation_margin).fold(f64::INFINITY, f64::min);
    let bernoulli = diags.iter().flatten().map(|d| d.bernoulli_spread).fold(0.0, f64::max);
    let elapsed = t.elapsed();
    pass &= margin > 0.0 && elapsed < C7_RUNTIME_PER_CHECKPOINT * checkpoints;
    let finest = &diags[2][2];
    report(
        7,
        "physical conservation",
        pass,
        format!(
            "{checkpoints} checkpoints, worst halving ratio {worst_ratio:.2}, bernoulli spread <= {bernoulli:.1e}, finest flow-force {:.2e} flux {:.2e}, min(c-u) {margin:.4}",
            finest.flow_force_spread, finest.flux_spread
        ),
        elapsed,
    );
}

const C8_GAP_RATIO: f64 = 3.2;
const C8_GAP_FINEST: f64 = 1e-3;
const C8_JVP: f64 = 1e-6;
const C8_RUNTIME: Duration = Duration::from_secs(60);

#[test]
fn criterion_8_operator_consistency() {
    let t = Instant::now();
    let (p, force) = reference();
    let test = TestField::random(8);
    let gaps: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| linearized_operator_check(0.3, &p, &force, &test, n / 2, n, 1e-4).unwrap().relative_gap())
        .collect();
    let second_order = gaps.windows(2).all(|w| w[0] / w[1] >= C8_GAP_RATIO) && gaps[2] <= C8_GAP_FINEST;

    // Jacobian-vector products on a w-dependent state.
    let (nw, nz) = (32, 24);
    let mut field = HeightField::laminar(0.3, &p, nw, nz).unwrap();
    for j in 0..=nw {
        for i in 1..=nz {
            let k = field.idx(j, i);
            field.h[k] *= 1.0 + 0.03 * field.w(j).cos() * (i as f64 / nz as f64);
        }
    }
    let flat = |b: &vesselwave::nonlinear::ResidualBundle| -> Vec<f64> {
        b.interior.iter().chain(&b.top).copied().chain([b.mass]).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut dir: Vec<f64> = (0..field.h.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for j in 0..=nw {
            dir[field.idx(j, 0)] = 0.0;
        }
        for i in 0..=nz {
            dir[field.idx(nw, i)] = dir[field.idx(0, i)];
        }
        let dq: f64 = rng.gen_range(-1.0..1.0);
        let dz0 = 1e-2 * rng.gen_range(-1.0..1.0);
        let an = flat(&jacobian_apply(&field, &force, &dir, dq, dz0));
        let s = 1e-6 * p.d;
        let shifted = |sign: f64| {
            let mut f = field.clone();
            f.h.iter_mut().zip(&dir).for_each(|(h, v)| *h += sign * s * v);
            f.q += sign * s * dq;
            f.z0 += sign * s * dz0;
            flat(&residual(&f, &force).unwrap())
        };
        let (plus, minus) = (shifted(1.0), shifted(-1.0));
        let scale = an.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gap = plus
            .iter()
            .zip(&minus)
            .zip(&an)
            .fold(0.0f64, |m, ((a, b), j)| m.max(((a - b) / (2.0 * s) - j).abs()));
        worst = worst.max(gap / scale);
    }
    let elapsed = t.elapsed();
    let pass = second_order && worst <= C8_JVP && elapsed < C8_RUNTIME;
    report(
        8,
        "operator consistency",
        pass,
        format!("analytic gap {} under refinement, worst directional-difference gap {worst:.2e} over 20 directions",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(" -> ")
        ),
        elapsed,
    );
}

#[test]
fn criterion_9_determinism() {
    let t = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = d.path().to_str().unwrap();
        let args = [
            "vesselwave", "bifurcate", "--steps", "6", "--deps", "1e-5", "--nw", "32", "--nz", "16", "--checkpoint-every", "3",
            "--out-dir", out,
        ];
        assert_eq!(vesselwave::cli::run(args), 0);
    }
    let read = |d: &tempfile::TempDir, name: &str| std::fs::read(d.path().join(name)).unwrap();
    let mut identical = true;
    for name in ["branch.csv", "checkpoints/step_0003.csv", "checkpoints/step_0006.csv"] {
        identical &= read(&dirs[0], name) == read(&dirs[1], name);
    }
    let lines = String::from_utf8(read(&dirs[0], "branch.csv")).unwrap().lines().count();
    let elapsed = t.elapsed();
    report(
        9,
        "determinism",
        identical && lines == 8,
        format!("branch.csv and checkpoints byte-identical: {identical}, {lines} lines"),
        elapsed,
    );
}
