//! Built-in dialects: `arith`, `scf`, `func` and `mem`, as [`OpGen`] puzzle
//! pieces plus the type generators they share.

pub mod arith;
pub mod func;
pub mod mem;
pub mod registry;
pub mod scf;

use crate::genkit::rng::SplitMix64;
use crate::genkit::{Builder, GenConfig, GenSuite};
use crate::ir::{OpKind, Operation, Type, Value};

/// Produces a type object for an OpGen to use; never touches the module.
pub trait TypeGen {
    fn sample(&self, rng: &mut SplitMix64) -> Type;
}

/// Uniform over `i1`, `i32`, `i64` and `index`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntegerTypeGen;

impl TypeGen for IntegerTypeGen {
    fn sample(&self, rng: &mut SplitMix64) -> Type {
        Type::INTEGERS[rng.below(Type::INTEGERS.len())]
    }
}

/// One-dimensional `i32` buffers of 1 to 8 elements.
#[derive(Clone, Copy, Debug)]
pub struct MemRefTypeGen {
    pub max_size: u32,
}

impl Default for MemRefTypeGen {
    fn default() -> Self {
        MemRefTypeGen { max_size: 8 }
    }
}

impl TypeGen for MemRefTypeGen {
    fn sample(&self, rng: &mut SplitMix64) -> Type {
        Type::MemRef(1 + rng.below(self.max_size as usize) as u32)
    }
}

/// The full suite: every pooled op of the four dialects, with `func.func` as
/// the top-level piece.
pub fn standard_suite() -> GenSuite {
    let mut suite = GenSuite::new(OpKind::Func)
        .with(arith::ConstantGen)
        .with(arith::CmpIGen)
        .with(arith::SelectGen)
        .with(arith::DivSIGen);
    for kind in [
        OpKind::AddI,
        OpKind::SubI,
        OpKind::MulI,
        OpKind::AndI,
        OpKind::OrI,
        OpKind::XorI,
    ] {
        suite.add(Box::new(arith::BinaryGen(kind)));
    }
    suite
        .with(scf::IfGen)
        .with(scf::ForGen)
        .with(scf::WhileGen)
        .with(func::FuncGen)
        .with(func::CallGen)
        .with(mem::AllocGen)
        .with(mem::LoadGen)
        .with(mem::StoreGen)
        .with(mem::DeallocGen)
}

/// Whether a terminator may carry `v` out of its region. Buffers never escape
/// their block in safe mode, so a deallocation can't leave a dangling alias.
pub(crate) fn may_escape(config: &GenConfig, v: &Value) -> bool {
    v.ty.is_integer() || config.allow_unsafe_memory
}

/// Samples up to `max_return_values` escapable values (with replacement) and
/// attaches `kind` as the terminator of the current region.
pub(crate) fn terminate_with_sampled(b: &mut Builder<'_>, kind: OpKind) -> Vec<Type> {
    let count = b.rng.below(b.config.max_return_values as usize + 1);
    let candidates = b.live_values(|v| may_escape(b.config, v));
    let mut operands = Vec::with_capacity(count);
    if !candidates.is_empty() {
        for _ in 0..count {
            operands.push(candidates[b.rng.below(candidates.len())]);
        }
    }
    let types = operands.iter().map(|v: &Value| v.ty).collect();
    let outcome = b.create_checked(Operation::new(kind).with_operands(operands));
    debug_assert!(outcome.is_inserted());
    types
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memref_sizes_in_range() {
        let mut rng = SplitMix64::new(5);
        let g = MemRefTypeGen::default();
        let mut seen = [false; 9];
        for _ in 0..1000 {
            match g.sample(&mut rng) {
                Type::MemRef(n) => {
                    assert!((1..=8).contains(&n));
                    seen[n as usize] = true;
                }
                t => panic!("unexpected {t}"),
            }
        }
        assert!(seen[1..].iter().all(|s| *s));
    }

    #[test]
    fn suite_covers_every_pooled_kind() {
        let suite = standard_suite();
        for k in registry::pooled_kinds() {
            assert!(suite.gen_for(k).is_some(), "missing generator for {k}");
        }
    }
}
