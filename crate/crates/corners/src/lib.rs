//! Tools for the beta-Krawtchouk corners process: exact finite-size
//! evaluation and enumeration, MCMC sampling, closed-form asymptotic objects
//! (limit shape, Stieltjes transforms, transport map, GFF covariance), and
//! the Monte Carlo statistics that confront the two.

pub mod asymptotics;
pub mod cli;
pub mod corners_exact;
pub mod error;
pub mod fieldstats;
pub mod jack;
pub mod numerics;
pub mod sampler;

pub use corners_exact::{CornersConfig, LevelConfig, ModelParams};
pub use error::{Error, Result};
pub use jack::Partition;
pub use numerics::{ComplexScalar, Contour};
pub use sampler::{ChainConfig, SampleBatch};
