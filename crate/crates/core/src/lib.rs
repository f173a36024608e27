pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod laminar;
pub mod linalg;
pub mod model;
pub mod nonlinear;
pub mod reconstruct;
pub mod spectral;

pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use model::{BodyForceModel, ModelParams, Mode};
