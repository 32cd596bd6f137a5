//! Synthetic demonstrations, labeled test sets, false-positive and runtime
//! measurement, an exhaustive recognition oracle, benchmarks and a simulated
//! active scene search for ISM trees.

pub mod asr;
pub mod bench;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod perturb;
pub mod scenario;

pub use error::{HarnessError, Result};
