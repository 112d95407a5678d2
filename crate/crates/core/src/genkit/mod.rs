//! The generation framework: builder, selection-pool loop, configuration and
//! the deterministic RNG. Dialect-specific knowledge lives in [`OpGen`]s.

mod builder;
mod config;
pub mod rng;

use std::collections::BTreeMap;

use thiserror::Error;

pub use builder::{AttemptCounts, Builder, FunctionSig, GenOutcome, Snapshot};
pub use config::{ConfigError, GenConfig};

use crate::dialects::registry;
use crate::ir::{verify_module, Module, OpKind, Region, Violation, ENTRY_NAME};

/// A puzzle piece: knows how to insert one kind of operation at the builder's
/// insertion point, or reports that it cannot.
pub trait OpGen: Send + Sync {
    fn kind(&self) -> OpKind;
    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome;
}

/// The set of generators a program generator is assembled from, plus the
/// top-level piece that populates the module.
pub struct GenSuite {
    gens: Vec<Box<dyn OpGen>>,
    top_level: OpKind,
}

impl GenSuite {
    pub fn new(top_level: OpKind) -> Self {
        GenSuite {
            gens: Vec::new(),
            top_level,
        }
    }

    pub fn with(mut self, gen: impl OpGen + 'static) -> Self {
        self.add(Box::new(gen));
        self
    }

    pub fn add(&mut self, gen: Box<dyn OpGen>) {
        assert!(
            self.gen_for(gen.kind()).is_none(),
            "generator for {} registered twice",
            gen.kind()
        );
        self.gens.push(gen);
    }

    pub fn gen_for(&self, kind: OpKind) -> Option<&dyn OpGen> {
        self.gens.iter().find(|g| g.kind() == kind).map(|g| g.as_ref())
    }

    /// Registered kinds eligible for the selection pool, in registration order.
    pub fn pooled_kinds(&self) -> impl Iterator<Item = OpKind> + '_ {
        self.gens.iter().map(|g| g.kind()).filter(|k| registry::spec(*k).pooled)
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("generated module for seed {seed} failed verification: {}", .violations.first().map(ToString::to_string).unwrap_or_default())]
    Verification { seed: u64, violations: Vec<Violation> },
    #[error("top-level generator {0} produced nothing for seed {1}")]
    TopLevel(OpKind, u64),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// A generated module plus the selection-loop counters of the run.
pub struct Generated {
    pub module: Module,
    pub counts: BTreeMap<OpKind, AttemptCounts>,
}

/// Generates a module with the built-in dialect suite.
pub fn generate_module(config: &GenConfig) -> Result<Module, GenError> {
    generate_with(&crate::dialects::standard_suite(), config).map(|g| g.module)
}

/// Creates the module, invokes the top-level generator between one and
/// `max_functions` times (the last function is the entry), and verifies.
pub fn generate_with(suite: &GenSuite, config: &GenConfig) -> Result<Generated, GenError> {
    config.validate()?;
    let mut b = Builder::new(config, suite);
    b.planned_functions = 1 + b.rng.below(config.max_functions as usize) as u32;
    for _ in 0..b.planned_functions {
        if !b.try_generate(suite.top_level).is_inserted() {
            return Err(GenError::TopLevel(suite.top_level, config.seed));
        }
    }
    let (block, counts) = b.into_parts();
    let module = Module {
        body: Region::new(block),
        entry: ENTRY_NAME.to_string(),
    };
    let violations = verify_module(&module);
    if !violations.is_empty() {
        return Err(GenError::Verification {
            seed: config.seed,
            violations,
        });
    }
    Ok(Generated { module, counts })
}
