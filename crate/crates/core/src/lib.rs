//! Random program generation for a small region-based SSA IR, assembled from
//! per-operation generators, with a reference interpreter, an optimizer with
//! switchable injected bugs, and a differential-testing campaign driver.

pub mod dialects;
pub mod exec;
pub mod fuzz;
pub mod genkit;
pub mod ir;
pub mod stats;
pub mod textio;

pub use exec::{BugInjection, PassId, RunOutcome, TrapKind, TypedInt, Verdict};
pub use genkit::{generate_module, GenConfig, GenOutcome};
pub use ir::{structural_equal, verify_module, Module, Type};
pub use textio::{parse_module, print_module};

/// Frequency-model parameters in double precision.
pub type FreqModel = stats::FreqModelParams<f64>;
/// Frequency-model parameters in single precision.
pub type FreqModelF32 = stats::FreqModelParams<f32>;
