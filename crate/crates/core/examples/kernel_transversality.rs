//! The bifurcation hypotheses at ξ*: a one-dimensional kernel and a nonzero
//! transversality pairing, on two grids.

use vesselwave::spectral::{find_xi_star, kernel_report, transversality_at};
use vesselwave::ModelParams;

fn main() -> vesselwave::Result<()> {
    let params = ModelParams::reference();
    let xi = find_xi_star(&params, (params.epsilon0, params.xi_max), 100)?.xi_star;

    let kernel = kernel_report(xi, 5, &params, 1024)?;
    println!("kernel dimension {} at xi* = {xi:.12}", kernel.dimension);
    println!(
        "  k = 0: integral of a^-3 = {:.10} (closed form {:.10})",
        kernel.integral_inverse_cube, kernel.integral_inverse_cube_exact
    );
    for m in &kernel.modes[1..] {
        println!("  k = {}: target {:>6}, margin {:.3e}, solvable {}", m.k, m.target, m.margin, m.solvable);
    }

    for (n, nw) in [(512, 16), (1024, 32)] {
        let t = transversality_at(xi, &params, n, nw)?;
        println!(
            "n = {n:4}, nw = {nw:2}: T = {:.12} (interior {:.6}, boundary {:.6}), dmu/dxi = {:.4}",
            t.value,
            t.interior,
            t.boundary,
            t.dmu_dxi.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
