//! Physical velocity, pressure and surface of a small wave, with the
//! conservation audits on three grids.

use vesselwave::nonlinear::{continue_branch, BranchOptions};
use vesselwave::reconstruct::{diagnostics, physical_fields};
use vesselwave::spectral::{mu_shooting, SLProblem, DEFAULT_SHOOTING_TOL};
use vesselwave::{BodyForceModel, ModelParams};

fn main() -> vesselwave::Result<()> {
    let params = ModelParams::reference();
    let force = BodyForceModel::ConstantVertical { c1: params.c1 };
    let xi = params.c1 * params.d.tanh();
    let eigen = mu_shooting(&SLProblem::new(xi, &params, 1024)?, DEFAULT_SHOOTING_TOL)?;

    for (nw, nz) in [(32, 16), (64, 32), (128, 64)] {
        let branch = continue_branch(xi, &eigen, &params, &force, &BranchOptions::new(4, 2.5e-5, nw, nz))?;
        let field = branch.fields.last().expect("branch has records");
        let pf = physical_fields(field, &force)?;
        let d = diagnostics(&pf, field, &force);
        println!(
            "{nw:>3} x {nz:<3} bernoulli {:.1e}  flow force {:.3e}  flux {:.3e}  div {:.3e}  curl {:.3e}  min(c-u) {:.6}",
            d.bernoulli_spread, d.flow_force_spread, d.flux_spread, d.divergence, d.vorticity, d.stagnation_margin
        );
        if nw == 128 {
            println!("surface elevation (every 16th column):");
            for j in (0..=nw).step_by(16) {
                println!("  x = {:>7.4}  omega = {:>12.4e}", pf.x[pf.idx(j, 0)], pf.omega[j]);
            }
            println!("head Q = {:.12}, flux p0 = {:.12}", pf.q, pf.flux);
        }
    }
    Ok(())
}
