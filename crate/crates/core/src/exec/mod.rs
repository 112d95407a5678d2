//! Reference interpreter, optimizer passes and the differential harness
//! comparing a module against its optimized form.

pub mod diff;
pub mod interp;
pub mod passes;
pub mod scalar;

pub use diff::{
    classify, differential_check, input_vectors, input_vectors_for, Verdict, VerdictKind, ESCALATION_FACTOR,
};
pub use interp::{interpret, InterpError, RunOutcome, TrapKind, TypedInt, DEFAULT_FUEL};
pub use passes::{
    run_pass, run_pipeline, run_pipeline_with_cap, BugInjection, PassId, PipelineReport, UnknownName, DEFAULT_PIPELINE,
    PIPELINE_ITERATION_CAP,
};
