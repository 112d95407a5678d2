//! One-dimensional `i32` buffers. In safe mode every index is an in-bounds
//! constant and each buffer is deallocated at most once, in its own block,
//! after which it is never sampled again. Unsafe mode lifts both guards to
//! exercise the out-of-bounds and double-deallocation bug classes.

use super::arith::materialize_constant;
use super::{MemRefTypeGen, TypeGen};
use crate::genkit::{Builder, GenOutcome, OpGen};
use crate::ir::{OpKind, Operation, Type, Value};

/// How far past the end unsafe mode may index.
pub const UNSAFE_INDEX_SLACK: u32 = 2;

fn buffer_size(v: &Value) -> u32 {
    match v.ty {
        Type::MemRef(n) => n,
        _ => unreachable!("not a buffer"),
    }
}

fn sample_buffer(b: &mut Builder<'_>) -> Option<Value> {
    b.sample_live(|v| matches!(v.ty, Type::MemRef(_)))
}

fn sample_index(b: &mut Builder<'_>, buffer: &Value) -> i64 {
    let size = buffer_size(buffer);
    let bound = if b.config.allow_unsafe_memory {
        size + UNSAFE_INDEX_SLACK
    } else {
        size
    };
    b.rng.below(bound as usize) as i64
}

pub struct AllocGen;

impl OpGen for AllocGen {
    fn kind(&self) -> OpKind {
        OpKind::Alloc
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let ty = MemRefTypeGen::default().sample(&mut b.rng);
        let result = b.fresh_value(ty);
        b.create_checked(Operation::new(OpKind::Alloc).with_results([result]))
    }
}

pub struct LoadGen;

impl OpGen for LoadGen {
    fn kind(&self) -> OpKind {
        OpKind::Load
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let Some(buffer) = sample_buffer(b) else {
            return GenOutcome::NotApplicable;
        };
        if !b.reserve(2) {
            return GenOutcome::NotApplicable;
        }
        let index = sample_index(b, &buffer);
        let Some(index) = materialize_constant(b, Type::Index, index) else {
            return GenOutcome::NotApplicable;
        };
        let result = b.fresh_value(Type::I32);
        b.create_checked(
            Operation::new(OpKind::Load)
                .with_operands([buffer, index])
                .with_results([result]),
        )
    }
}

pub struct StoreGen;

impl OpGen for StoreGen {
    fn kind(&self) -> OpKind {
        OpKind::Store
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let Some(buffer) = sample_buffer(b) else {
            return GenOutcome::NotApplicable;
        };
        let Some(value) = b.sample_value(Type::I32) else {
            return GenOutcome::NotApplicable;
        };
        if !b.reserve(2) {
            return GenOutcome::NotApplicable;
        }
        let index = sample_index(b, &buffer);
        let Some(index) = materialize_constant(b, Type::Index, index) else {
            return GenOutcome::NotApplicable;
        };
        b.create_checked(Operation::new(OpKind::Store).with_operands([value, buffer, index]))
    }
}

pub struct DeallocGen;

impl OpGen for DeallocGen {
    fn kind(&self) -> OpKind {
        OpKind::Dealloc
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let buffer = if b.config.allow_unsafe_memory {
            let all = b.visible_values(None);
            let bufs: Vec<Value> = all.into_iter().filter(|v| matches!(v.ty, Type::MemRef(_))).collect();
            b.rng.choose(&bufs).copied()
        } else {
            // Only buffers of this very block: a loop body freeing an outer
            // buffer would free it once per iteration.
            let local: Vec<Value> = b
                .current_block()
                .ops
                .iter()
                .flat_map(|op| op.results.iter())
                .filter(|v| matches!(v.ty, Type::MemRef(_)) && !b.is_retired(v.id))
                .copied()
                .collect();
            b.rng.choose(&local).copied()
        };
        let Some(buffer) = buffer else {
            return GenOutcome::NotApplicable;
        };
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let outcome = b.create_checked(Operation::new(OpKind::Dealloc).with_operands([buffer]));
        if outcome.is_inserted() && !b.config.allow_unsafe_memory {
            b.retire(buffer.id);
        }
        outcome
    }
}
