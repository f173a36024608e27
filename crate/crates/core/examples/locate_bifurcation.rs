//! Scan the lowest eigenvalue of the linearized problem and locate μ(ξ*) = −1
//! on the reference channel.

use vesselwave::spectral::{depth_condition, find_xi_star, mu_scan, ScanOptions};
use vesselwave::ModelParams;

fn main() -> vesselwave::Result<()> {
    let params = ModelParams::reference();
    let depth = depth_condition(&params);
    println!("depth condition: {:.6} < {:.6} is {}", depth.lhs, depth.rhs, depth.holds);

    let options = ScanOptions {
        points: 12,
        n: 512,
        ..ScanOptions::for_params(&params)
    };
    for row in mu_scan(&params, &options)? {
        println!("xi = {:.4}  mu = {:>14.6}  method gap = {:.1e}", row.xi, row.mu, row.method_gap);
    }

    let report = find_xi_star(&params, (params.epsilon0, params.xi_max), 200)?;
    println!("xi* = {:.15} (c1 tanh d = {:.15})", report.xi_star, params.c1 * params.d.tanh());
    println!("mu(xi*) + 1 = {:.2e}, slope {:.3}", report.mu_at_root + 1.0, report.slope);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
