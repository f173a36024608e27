//! Discrete Jacobian against the analytic linearization, and the near-null
//! space of the Jacobian at the bifurcation point.

use vesselwave::nonlinear::{linearized_operator_check, singular_probe, TestField};
use vesselwave::{BodyForceModel, ModelParams};

fn main() -> vesselwave::Result<()> {
    let params = ModelParams::reference();
    let force = BodyForceModel::ConstantVertical { c1: params.c1 };
    let test = TestField::random(7);

    for n in [32usize, 64, 128, 256] {
        let c = linearized_operator_check(0.3, &params, &force, &test, n / 2, n, 1e-4)?;
        println!(
            "{:>3} x {:<3}  operator gap {:.3e}  xi-derivative gap {:.3e}",
            n / 2,
            n,
            c.relative_gap(),
            c.relative_xi_gap()
        );
    }

    let xi_star = params.c1 * params.d.tanh();
    for (label, xi) in [("at xi*", xi_star), ("at 2 xi*", 2.0 * xi_star)] {
        let probe = singular_probe(xi, &params, &force, 64, 64)?;
        let (mode, value) = probe.smallest();
        println!(
            "{label}: mode 1 {:.3e}, other modes >= {:.3e}, smallest in mode {mode} ({value:.3e})",
            probe.kernel_mode(),
            probe.other_modes()
        );
    }
    Ok(())
}
