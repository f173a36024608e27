//! Closed-form laminar column next to an independent integration of its ODE.
//!
//! cargo run --example laminar_profile -- [xi] [n]

use vesselwave::laminar::{laminar_profile, verify_laminar_ode};
use vesselwave::ModelParams;

fn main() -> vesselwave::Result<()> {
    let mut args = std::env::args().skip(1);
    let xi: f64 = args.next().map_or(1.0, |s| s.parse().expect("xi"));
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("n"));
    let params = ModelParams::physical(1.0, 1.0);

    let prof = laminar_profile(xi, n, &params)?;
    println!("xi = {xi}, z0 = {}, Q = {}", prof.z0, prof.q);
    for i in (0..=n).step_by((n / 8).max(1)) {
        println!("z = {:.4}  H = {:.10}  H_z = {:.10}  a = {:.10}", prof.z[i], prof.h[i], prof.hz[i], prof.a[i]);
    }
    let check = verify_laminar_ode(&prof);
    println!("{check:#?}");
    Ok(())
}
