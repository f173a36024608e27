//! Parse a run configuration and round-trip a field checkpoint.

use std::path::Path;

use vesselwave::config::parse_config_str;
use vesselwave::io::{read_checkpoint, write_checkpoint, CheckpointMeta};
use vesselwave::nonlinear::HeightField;

fn main() -> vesselwave::Result<()> {
    let text = "# shallow reference channel\nc1 = 1\nd = 0.1\nmode = physical\nnewton.tol = 1e-11\n";
    let cfg = parse_config_str(text, Path::new("example.cfg"))?;
    println!("c2 = {}, c3 = {}, newton tol = {:e}", cfg.params.c2, cfg.params.c3, cfg.newton.tol);

    match parse_config_str("d = 0.1\nd = 0.2\n", Path::new("dup.cfg")) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("duplicate keys are rejected"),
    }

    let field = HeightField::laminar(0.3, &cfg.params, 16, 8)?;
    let meta = CheckpointMeta {
        step: 0,
        eps: 0.0,
        q: field.q,
        z0: field.z0,
        nw: field.nw,
        nz: field.nz,
        params: cfg.params,
        force: cfg.force.clone(),
    };
    let dir = std::env::temp_dir().join("vesselwave_run_config_example");
    vesselwave::io::create_dir(&dir)?;
    let path = dir.join("laminar.csv");
    write_checkpoint(&path, &field, &meta)?;
    let (back, _) = read_checkpoint(&path)?;
    println!("checkpoint {} round-trips exactly: {}", path.display(), back == field);
    Ok(())
}
