//! Randomized learning of single-hidden-layer feedforward regression networks.
//!
//! A network computes `f(x) = Σ β_i σ(a_iᵀx + b_i)` with logistic `σ`. The
//! hidden parameters `a_i, b_i` are generated and left fixed; only the
//! output weights `β` are fitted, by least squares through the
//! Moore-Penrose pseudoinverse.
//!
//! Hidden-parameter generators:
//!
//! * [`paramgen::generate_ram`]: weights from `U(-u, u)`.
//! * [`paramgen::generate_ralpham`]: weights from uniformly drawn slope angles.
//! * [`rae::raem_hidden_layer`]: weights taken from the decoder of a randomized
//!   autoencoder, in five variants.
//!
//! [`benchfn`] and [`dataio`] supply problems, and [`experiment`] runs trials,
//! cross-validation, statistics and the CLI pipelines.

pub mod benchfn;
pub mod dataio;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod paramgen;
pub mod rae;

pub use error::{Error, Result};
pub use linalg::{Matrix, SolverConfig};
pub use model::{HiddenLayer, TrainedNetwork};
pub use paramgen::RngStream;
