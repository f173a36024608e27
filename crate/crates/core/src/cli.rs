//! Command-line dispatch. Every run writes `<command>.manifest.json` into the
//! output directory, including runs that fail.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 configuration error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_config, RunConfig};
use crate::error::{Error, Result};
use crate::io::{self, CheckpointMeta, GridSizes, RunManifest};
use crate::laminar::laminar_profile;
use crate::model::{build_body_force, derive_constants, validate_body_force, ValidationReport};
use crate::nonlinear::{continue_branch, BranchOptions, BranchRecord, StepKind};
use crate::reconstruct::{diagnostics, physical_fields, Diagnostics};
use crate::spectral::{
    depth_condition, find_xi_star_with, kernel_report, mu_scan, mu_shooting, transversality_at, ScanOptions,
    SLProblem, DEFAULT_SHOOTING_TOL,
};

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "VESSELWAVE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vesselwave", version, about = "Laminar flows, bifurcation and small-amplitude waves in a forced channel")]
pub struct Cli {
    /// Configuration file (`key = value` lines); the reference configuration if absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the structural assumptions on the body force.
    ValidateForce,
    /// Sample the laminar profile: laminar.csv with columns z,H,Hz,a.
    Laminar {
        #[arg(long, allow_negative_numbers = true)]
        xi: f64,
        /// Grid intervals.
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Lowest eigenvalue over a ξ range by both methods: mu_scan.csv.
    MuScan {
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Evaluate the depth inequality: depth.json.
    CheckDepth,
    /// Locate the crossing μ(ξ*) = −1: xi_star.json.
    Locate {
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Kernel dimension at ξ* (located first unless given): kernel.json.
    Kernel {
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
        #[arg(long, default_value_t = 4)]
        kmax: u32,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Transversality pairing at ξ*: transversality.json.
    Transversality {
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 64)]
        nw: usize,
    },
    /// Continue the bifurcating branch: branch.csv, branch.json and field checkpoints.
    Bifurcate {
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Amplitude increment per step, in height units.
        #[arg(long, default_value_t = 1e-5)]
        deps: f64,
        #[arg(long, default_value_t = 64)]
        nw: usize,
        #[arg(long, default_value_t = 32)]
        nz: usize,
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
        /// Checkpoint every this many steps (the last step always); 0 for none.
        #[arg(long, default_value_t = 10)]
        checkpoint_every: usize,
    },
    /// Physical fields of a checkpoint: <stem>_fields.csv (x,y,u,v,p) and <stem>_surface.csv (x,omega).
    Reconstruct {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Conservation audits of a checkpoint: <stem>_diagnostics.json.
    Verify {
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ValidateForce => "validate-force",
            Command::Laminar { .. } => "laminar",
            Command::MuScan { .. } => "mu-scan",
            Command::CheckDepth => "check-depth",
            Command::Locate { .. } => "locate",
            Command::Kernel { .. } => "kernel",
            Command::Transversality { .. } => "transversality",
            Command::Bifurcate { .. } => "bifurcate",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_configuration() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

struct Run {
    out_dir: PathBuf,
    config: RunConfig,
    outputs: Vec<PathBuf>,
    inputs: Vec<PathBuf>,
    grid: GridSizes,
}

impl Run {
    fn output(&mut self, name: impl AsRef<Path>) -> PathBuf {
        let path = self.out_dir.join(name);
        self.outputs.push(path.clone());
        path
    }

    fn scan_options(&mut self, from: Option<f64>, to: Option<f64>, points: usize, n: Option<usize>) -> ScanOptions {
        let n = n.unwrap_or(self.config.eigen_n);
        self.grid.n = Some(n);
        ScanOptions {
            from: from.unwrap_or(self.config.params.epsilon0),
            to: to.unwrap_or(self.config.params.xi_max),
            points,
            n,
            ..ScanOptions::for_params(&self.config.params)
        }
    }

    /// The given ξ, or ξ* from the default scan.
    fn xi_star(&mut self, xi: Option<f64>, n: usize) -> Result<f64> {
        match xi {
            Some(xi) => Ok(xi),
            None => {
                let options = ScanOptions {
                    n,
                    ..ScanOptions::for_params(&self.config.params)
                };
                let report = find_xi_star_with(&self.config.params, &options)?;
                println!("located xi* = {}", io::fmt_f64(report.xi_star));
                Ok(report.xi_star)
            }
        }
    }
}

#[derive(Serialize)]
struct ForceReport<'a> {
    pass: bool,
    c2: Option<f64>,
    c3: Option<f64>,
    constants_error: Option<String>,
    #[serde(flatten)]
    validation: &'a ValidationReport,
}

#[derive(Serialize)]
struct BranchSummary<'a> {
    xi_star: f64,
    bifurcation_z0: f64,
    bifurcation_xi: f64,
    bifurcation_q: f64,
    mode_gap: f64,
    stopped: &'a Option<String>,
    records: &'a [BranchRecord],
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    checkpoint: &'a Path,
    nw: usize,
    nz: usize,
    eps: f64,
    spacing_w: f64,
    spacing_z: f64,
    #[serde(flatten)]
    diagnostics: &'a Diagnostics,
}

fn checkpoint_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "checkpoint".into(), |s| s.to_string_lossy().into_owned())
}

fn execute(command: &Command, run: &mut Run) -> Result<()> {
    let params = run.config.params;
    match command {
        Command::ValidateForce => {
            let force = run.config.body_force()?;
            let report = validate_body_force(&force, &params);
            let constants = derive_constants(&force, &params);
            let out = ForceReport {
                pass: report.pass() && constants.is_ok(),
                c2: constants.as_ref().ok().map(|c| c.0),
                c3: constants.as_ref().ok().map(|c| c.1),
                constants_error: constants.as_ref().err().map(|e| e.to_string()),
                validation: &report,
            };
            let path = run.output("force_validation.json");
            io::write_json(&path, &out)?;
            for c in &report.checks {
                println!("{:<28} {:.3e} (tol {:.3e}) {}", c.name, c.max_residual, c.tolerance, if c.pass { "ok" } else { "FAIL" });
            }
            match constants {
                Err(e) => Err(e),
                Ok(_) if !report.pass() => Err(Error::ForceTable("force violates the structural assumptions".into())),
                Ok(_) => Ok(()),
            }
        }
        Command::Laminar { xi, n } => {
            run.grid.n = Some(*n);
            let prof = laminar_profile(*xi, *n, &params)?;
            let path = run.output("laminar.csv");
            let rows = (0..=prof.n()).map(|i| vec![prof.z[i], prof.h[i], prof.hz[i], prof.a[i]]);
            io::write_csv(&path, &["z", "H", "Hz", "a"], rows)?;
            println!("z0 = {}, Q = {}", io::fmt_f64(prof.z0), io::fmt_f64(prof.q));
            Ok(())
        }
        Command::MuScan { from, to, points, n } => {
            let options = run.scan_options(*from, *to, *points, *n);
            let rows = mu_scan(&params, &options)?;
            let path = run.output("mu_scan.csv");
            io::write_csv(&path, &["xi", "mu", "method_gap"], rows.iter().map(|r| vec![r.xi, r.mu, r.method_gap]))?;
            let worst = rows.iter().map(|r| r.method_gap).fold(0.0, f64::max);
            println!("{} points, largest method gap {worst:.3e}", rows.len());
            Ok(())
        }
        Command::CheckDepth => {
            let report = depth_condition(&params);
            let path = run.output("depth.json");
            io::write_json(&path, &report)?;
            println!("lhs = {:.6}, rhs = {:.6}, holds = {}", report.lhs, report.rhs, report.holds);
            Ok(())
        }
        Command::Locate { from, to, points, n } => {
            let options = run.scan_options(*from, *to, *points, *n);
            let report = find_xi_star_with(&params, &options)?;
            let path = run.output("xi_star.json");
            io::write_json(&path, &report)?;
            println!("xi* = {}, mu = {}", io::fmt_f64(report.xi_star), io::fmt_f64(report.mu_at_root));
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Kernel { xi, kmax, n } => {
            let n = n.unwrap_or(run.config.eigen_n);
            run.grid.n = Some(n);
            let xi = run.xi_star(*xi, n)?;
            let report = kernel_report(xi, *kmax, &params, n)?;
            let path = run.output("kernel.json");
            io::write_json(&path, &report)?;
            println!("kernel dimension {} at xi = {}", report.dimension, io::fmt_f64(xi));
            Ok(())
        }
        Command::Transversality { xi, n, nw } => {
            let n = n.unwrap_or(run.config.eigen_n);
            run.grid.n = Some(n);
            run.grid.nw = Some(*nw);
            let xi = run.xi_star(*xi, n)?;
            let report = transversality_at(xi, &params, n, *nw)?;
            let path = run.output("transversality.json");
            io::write_json(&path, &report)?;
            println!("T = {}, |T|/|zeta|^2 = {:.6e}", io::fmt_f64(report.value), report.relative());
            Ok(())
        }
        Command::Bifurcate {
            steps,
            deps,
            nw,
            nz,
            xi,
            checkpoint_every,
        } => {
            let n = run.config.eigen_n;
            run.grid = GridSizes {
                n: Some(n),
                nw: Some(*nw),
                nz: Some(*nz),
            };
            let force = run.config.body_force()?;
            let xi = run.xi_star(*xi, n)?;
            let eigen = mu_shooting(&SLProblem::new(xi, &params, n)?, DEFAULT_SHOOTING_TOL)?;
            let options = BranchOptions {
                newton: run.config.newton,
                checkpoint_every: *checkpoint_every,
                ..BranchOptions::new(*steps, *deps, *nw, *nz)
            };
            let branch = continue_branch(xi, &eigen, &params, &force, &options)?;

            let path = run.output("branch.csv");
            let rows = branch.records.iter().map(|r| {
                let f = io::fmt_f64;
                vec![
                    r.step.to_string(),
                    f(r.eps),
                    f(r.q),
                    f(r.surface_min),
                    f(r.surface_max),
                    r.newton_iterations.to_string(),
                    f(r.residual),
                ]
            });
            io::write_csv_cells(&path, &["step", "eps", "Q", "surf_min", "surf_max", "newton_iters", "residual"], rows)?;
            let summary = BranchSummary {
                xi_star: branch.xi_star,
                bifurcation_z0: branch.point.z0,
                bifurcation_xi: branch.point.xi,
                bifurcation_q: branch.point.q,
                mode_gap: branch.mode_gap,
                stopped: &branch.stopped,
                records: &branch.records,
            };
            let path = run.output("branch.json");
            io::write_json(&path, &summary)?;

            let dir = run.out_dir.join("checkpoints");
            if branch.records.iter().any(|r| r.checkpoint.is_some()) {
                io::create_dir(&dir)?;
            }
            for (rec, field) in branch.records.iter().zip(&branch.fields) {
                let Some(name) = &rec.checkpoint else { continue };
                let csv = run.output(Path::new("checkpoints").join(format!("{name}.csv")));
                run.outputs.push(io::sidecar_path(&csv));
                let meta = CheckpointMeta {
                    step: rec.step,
                    eps: rec.eps,
                    q: field.q,
                    z0: field.z0,
                    nw: field.nw,
                    nz: field.nz,
                    params,
                    force: run.config.force.clone(),
                };
                io::write_checkpoint(&csv, field, &meta)?;
            }
            let last = branch.records.last().expect("record 0 always exists");
            let arclength = branch.records.iter().filter(|r| r.kind == StepKind::Arclength).count();
            println!(
                "{} records, last eps = {}, Q = {}, {} arclength steps",
                branch.records.len(),
                io::fmt_f64(last.eps),
                io::fmt_f64(last.q),
                arclength
            );
            match &branch.stopped {
                Some(reason) => Err(Error::Continuation {
                    step: last.step + 1,
                    reason: reason.clone(),
                }),
                None => Ok(()),
            }
        }
        Command::Reconstruct { checkpoint } => {
            run.inputs.push(checkpoint.clone());
            run.inputs.push(io::sidecar_path(checkpoint));
            let (field, meta) = io::read_checkpoint(checkpoint)?;
            run.grid.nw = Some(field.nw);
            run.grid.nz = Some(field.nz);
            let force = build_body_force(&meta.force)?;
            let pf = physical_fields(&field, &force)?;
            let stem = checkpoint_stem(checkpoint);
            let path = run.output(format!("{stem}_fields.csv"));
            let rows = (0..pf.x.len()).map(|k| vec![pf.x[k], pf.y[k], pf.u[k], pf.v[k], pf.p[k]]);
            io::write_csv(&path, &["x", "y", "u", "v", "p"], rows)?;
            let path = run.output(format!("{stem}_surface.csv"));
            let rows = (0..=pf.nw).map(|j| vec![pf.x[pf.idx(j, 0)], pf.omega[j]]);
            io::write_csv(&path, &["x", "omega"], rows)?;
            println!("Q = {}, flux = {}", io::fmt_f64(pf.q), io::fmt_f64(pf.flux));
            Ok(())
        }
        Command::Verify { checkpoint } => {
            run.inputs.push(checkpoint.clone());
            run.inputs.push(io::sidecar_path(checkpoint));
            let (field, meta) = io::read_checkpoint(checkpoint)?;
            run.grid.nw = Some(field.nw);
            run.grid.nz = Some(field.nz);
            let force = build_body_force(&meta.force)?;
            let pf = physical_fields(&field, &force)?;
            let diag = diagnostics(&pf, &field, &force);
            let report = VerifyReport {
                checkpoint,
                nw: field.nw,
                nz: field.nz,
                eps: meta.eps,
                spacing_w: field.dw(),
                spacing_z: field.z0 * field.dsigma(),
                diagnostics: &diag,
            };
            let path = run.output(format!("{}_diagnostics.json", checkpoint_stem(checkpoint)));
            io::write_json(&path, &report)?;
            println!(
                "bernoulli {:.3e}, flow force {:.3e}, flux {:.3e}, min(c-u) {:.6e}",
                diag.bernoulli_spread, diag.flow_force_spread, diag.flux_spread, diag.stagnation_margin
            );
            Ok(())
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let mut run = Run {
        out_dir: cli.out_dir.clone(),
        config: RunConfig::default(),
        outputs: Vec::new(),
        inputs: Vec::new(),
        grid: GridSizes::default(),
    };
    let result = (|| {
        configure_threads()?;
        if let Some(path) = &cli.config {
            run.inputs.push(path.clone());
            run.config = parse_config(path)?;
            if let Some(table) = &run.config.table_path {
                run.inputs.push(table.clone());
            }
        }
        io::create_dir(&run.out_dir)?;
        execute(&cli.command, &mut run)
    })();
    let (code, error) = match &result {
        Ok(()) => (EXIT_OK, None),
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(e), Some(e.to_string()))
        }
    };
    let manifest = RunManifest {
        command: cli.command.name().into(),
        args: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        config_path: cli.config.clone(),
        config: run.config.clone(),
        grid: run.grid.clone(),
        newton_tol: run.config.newton.tol,
        structural_tol: run.config.params.tol,
        threads: rayon::current_num_threads(),
        outputs: run.outputs.clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        input_hash: io::hash_inputs(&run.inputs).unwrap_or_default(),
        inputs: run.inputs.clone(),
        exit_code: code,
        error,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let path = run.out_dir.join(format!("{}.manifest.json", cli.command.name()));
    if let Err(e) = io::create_dir(&run.out_dir).and_then(|()| io::write_json(&path, &manifest)) {
        eprintln!("warning: could not write the run manifest: {e}");
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_match_the_subcommands() {
        use clap::CommandFactory;
        let cmd = Cli::command();
        let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
        assert_eq!(
            names,
            [
                "validate-force",
                "laminar",
                "mu-scan",
                "check-depth",
                "locate",
                "kernel",
                "transversality",
                "bifurcate",
                "reconstruct",
                "verify"
            ]
        );
        let parsed = Cli::try_parse_from(["vesselwave", "laminar", "--xi", "-1"]).unwrap();
        assert_eq!(parsed.command.name(), "laminar");
    }

    #[test]
    fn usage_errors_exit_with_configuration_code() {
        assert_eq!(run(["vesselwave", "no-such-command"]), EXIT_CONFIG);
    }

    #[test]
    fn error_families_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::NoCrossing { from: 0.1, to: 1.0 }), EXIT_NUMERICAL);
        assert_eq!(
            exit_code(&Error::NotConverged {
                what: "newton",
                iterations: 3,
                residual: 1.0
            }),
            EXIT_NUMERICAL
        );
    }
}
