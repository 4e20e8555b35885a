//! Cross-entropy clustering (CEC).
//!
//! Splits data into clusters by minimizing the mean code length
//! `sum_i p_i (-ln p_i + H(X_i | F_i))`, where each cluster is coded by the
//! best density from a chosen Gaussian subfamily `F_i`. Clusters that do not
//! pay for their identification cost are removed during the iteration, so
//! the requested number of centers is an upper bound.
//!
//! ```no_run
//! use cec::{run, CecConfig, DataMatrix, FamilySpec};
//!
//! let data = DataMatrix::from_column(&[1.0, 1.2, 0.8, 1.1, 9.0, 9.3, 8.7, 9.1]).unwrap();
//! let cfg = CecConfig::new(2, FamilySpec::All).with_seed(1).with_nstart(5);
//! let result = run(&data, &cfg).unwrap();
//! println!("{:?}", result.probabilities);
//! ```

pub mod cli;
pub mod data;
pub mod engine;
pub mod error;
pub mod init;
pub mod linalg;
pub mod models;
pub mod oracle;

pub use data::DataMatrix;
pub use engine::{
    classify, energy, mixture_density, run, run_from_membership, run_single, CardMin, CecConfig,
    CecResult, ClusterState, EngineState, Method, MixtureModel,
};
pub use error::{CecError, Result};
pub use init::{rng_from_seed, CecRng, InitMethod};
pub use linalg::{Moments, SymEigen, SymMatrix};
pub use models::{gaussian_density, FamilyKind, FamilySpec, Gaussian};
