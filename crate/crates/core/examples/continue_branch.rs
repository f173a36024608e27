//! Continue the even wave branch from the bifurcation point and fit the
//! quadratic departure from the linear prediction.
//!
//! cargo run --release --example continue_branch -- [steps] [d_eps] [nw] [nz]

use vesselwave::nonlinear::{continue_branch, power_law_fit, BranchOptions};
use vesselwave::spectral::{find_xi_star, mu_shooting, SLProblem, DEFAULT_SHOOTING_TOL};
use vesselwave::{BodyForceModel, ModelParams};

fn main() -> vesselwave::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().map_or(20, |s| s.parse().expect("steps"));
    let d_eps: f64 = args.next().map_or(1e-5, |s| s.parse().expect("d_eps"));
    let nw: usize = args.next().map_or(64, |s| s.parse().expect("nw"));
    let nz: usize = args.next().map_or(32, |s| s.parse().expect("nz"));

    let params = ModelParams::reference();
    let force = BodyForceModel::ConstantVertical { c1: params.c1 };
    let xi = find_xi_star(&params, (params.epsilon0, params.xi_max), 100)?.xi_star;
    let eigen = mu_shooting(&SLProblem::new(xi, &params, 1024)?, DEFAULT_SHOOTING_TOL)?;
    let branch = continue_branch(xi, &eigen, &params, &force, &BranchOptions::new(steps, d_eps, nw, nz))?;

    println!("discrete bifurcation point: z0 = {:.12}, Q = {:.12}", branch.point.z0, branch.point.q);
    println!("{:>4} {:>12} {:>16} {:>14} {:>5} {:>9}", "step", "eps", "Q", "surface span", "iter", "residual");
    for r in &branch.records {
        println!(
            "{:>4} {:>12.4e} {:>16.12} {:>14.6e} {:>5} {:>9.1e}",
            r.step,
            r.eps,
            r.q,
            r.surface_max - r.surface_min,
            r.newton_iterations,
            r.residual
        );
    }
    if let Some(reason) = &branch.stopped {
        println!("stopped early: {reason}");
    }

    let eps: Vec<f64> = branch.records[1..].iter().map(|r| r.eps).collect();
    let dev: Vec<f64> = (1..branch.records.len()).map(|k| branch.expansion_deviation(k)).collect();
    let (exponent, constant) = power_law_fit(&eps, &dev)?;
    println!("|h - H - eps M cos w| ~ {constant:.3e} eps^{exponent:.3}");
    Ok(())
}
