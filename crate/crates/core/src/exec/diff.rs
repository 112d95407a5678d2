use std::fmt;

use super::interp::{interpret, InterpError, RunOutcome, TypedInt};
use super::passes::{run_pipeline, BugInjection, PassId};
use crate::dialects::arith::sample_constant;
use crate::genkit::rng::{derive_seed, SplitMix64};
use crate::genkit::GenConfig;
use crate::ir::{function_arg_types, Module, Type};

/// Default multiplier applied to the fuel of a side that ran out while the
/// other side finished.
pub const ESCALATION_FACTOR: u64 = 10;

/// Salt separating input-vector streams from generation streams of the same
/// program seed.
pub const INPUT_SEED_SALT: u64 = 0x696e_7075_7473_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    Agree,
    ValueMismatch,
    TrapMismatch,
    TerminationSuspect,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 4] = [
        VerdictKind::Agree,
        VerdictKind::ValueMismatch,
        VerdictKind::TrapMismatch,
        VerdictKind::TerminationSuspect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Agree => "Agree",
            VerdictKind::ValueMismatch => "ValueMismatch",
            VerdictKind::TrapMismatch => "TrapMismatch",
            VerdictKind::TerminationSuspect => "TerminationSuspect",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of running the original and the optimized module on one input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    ValueMismatch {
        original: Vec<TypedInt>,
        optimized: Vec<TypedInt>,
    },
    TrapMismatch {
        original: RunOutcome,
        optimized: RunOutcome,
    },
    /// One side still ran out of fuel after escalation while the other
    /// stopped.
    TerminationSuspect {
        original: RunOutcome,
        optimized: RunOutcome,
    },
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Agree => VerdictKind::Agree,
            Verdict::ValueMismatch { .. } => VerdictKind::ValueMismatch,
            Verdict::TrapMismatch { .. } => VerdictKind::TrapMismatch,
            Verdict::TerminationSuspect { .. } => VerdictKind::TerminationSuspect,
        }
    }

    pub fn is_agree(&self) -> bool {
        *self == Verdict::Agree
    }

    /// The text bug grouping digests, `"<kind>: <detail>"`.
    pub fn message(&self) -> String {
        self.to_string()
    }
}

fn values(vals: &[TypedInt]) -> String {
    let parts: Vec<String> = vals.iter().map(|v| format!("{} : {}", v.value, v.ty)).collect();
    format!("({})", parts.join(", "))
}

fn describe(outcome: &RunOutcome) -> String {
    match outcome {
        RunOutcome::Completed(v) => format!("completed {}", values(v)),
        RunOutcome::Trap { message, .. } => format!("trapped: {message}"),
        RunOutcome::FuelExhausted(n) => format!("exhausted {n} fuel"),
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        match self {
            Verdict::Agree => Ok(()),
            Verdict::ValueMismatch { original, optimized } => write!(
                f,
                ": original returned {}, optimized returned {}",
                values(original),
                values(optimized)
            ),
            Verdict::TrapMismatch { original, optimized } | Verdict::TerminationSuspect { original, optimized } => {
                write!(
                    f,
                    ": original {}; optimized {}",
                    describe(original),
                    describe(optimized)
                )
            }
        }
    }
}

/// Compares two outcomes where neither side is owed an escalation.
fn compare(original: RunOutcome, optimized: RunOutcome) -> Verdict {
    use RunOutcome::*;
    match (&original, &optimized) {
        (Completed(a), Completed(b)) if a == b => Verdict::Agree,
        (Completed(a), Completed(b)) => Verdict::ValueMismatch {
            original: a.clone(),
            optimized: b.clone(),
        },
        (Trap { kind: a, .. }, Trap { kind: b, .. }) if a == b => Verdict::Agree,
        (FuelExhausted(_), FuelExhausted(_)) => Verdict::Agree,
        (FuelExhausted(_), _) | (_, FuelExhausted(_)) => Verdict::TerminationSuspect { original, optimized },
        _ => Verdict::TrapMismatch { original, optimized },
    }
}

/// Runs both modules on `args`. When exactly one side runs out of fuel it is
/// re-run with `fuel * escalation`; if it runs out again the verdict is
/// `TerminationSuspect`, otherwise the new outcome is compared as usual.
pub fn classify(
    original: &Module,
    optimized: &Module,
    args: &[TypedInt],
    fuel: u64,
    escalation: u64,
) -> Result<Verdict, InterpError> {
    let entry = original.entry.as_str();
    let mut a = interpret(original, entry, args, fuel)?;
    let mut b = interpret(optimized, entry, args, fuel)?;
    let big = fuel.saturating_mul(escalation);
    match (a.is_fuel_exhausted(), b.is_fuel_exhausted()) {
        (true, false) => a = interpret(original, entry, args, big)?,
        (false, true) => b = interpret(optimized, entry, args, big)?,
        _ => {}
    }
    Ok(compare(a, b))
}

/// Optimizes `module` with `pipeline` and classifies every input vector.
pub fn differential_check(
    module: &Module,
    pipeline: &[PassId],
    inject: BugInjection,
    inputs: &[Vec<TypedInt>],
    fuel: u64,
    escalation: u64,
) -> Result<Vec<Verdict>, InterpError> {
    let optimized = run_pipeline(module, pipeline, inject).module;
    inputs
        .iter()
        .map(|args| classify(module, &optimized, args, fuel, escalation))
        .collect()
}

/// `count` argument tuples for the entry function: the all-zeros vector
/// first, then vectors drawn from the program seed. Each draw picks from the
/// default constant pool, the type's extremes, or a uniform value.
pub fn input_vectors(module: &Module, seed: u64, count: usize) -> Vec<Vec<TypedInt>> {
    let types = module.entry_function().map(function_arg_types).unwrap_or_default();
    input_vectors_for(&types, seed, count)
}

pub fn input_vectors_for(types: &[Type], seed: u64, count: usize) -> Vec<Vec<TypedInt>> {
    let pool = GenConfig::default().int_constant_pool;
    (0..count)
        .map(|i| {
            if i == 0 {
                return types.iter().map(|&t| TypedInt::new(t, 0)).collect();
            }
            let mut rng = SplitMix64::new(derive_seed(seed ^ INPUT_SEED_SALT, i as u64));
            types
                .iter()
                .map(|&t| TypedInt::new(t, sample_constant(&mut rng, t, &pool)))
                .collect()
        })
        .collect()
}
