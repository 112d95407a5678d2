use super::arith::materialize_constant;
use super::{may_escape, terminate_with_sampled};
use crate::genkit::{Builder, GenOutcome, OpGen};
use crate::ir::{OpKind, Operation, Type, Value};

/// Upper bound on the trip count of generated `scf.for` loops.
pub const MAX_TRIP_COUNT: i64 = 1024;

/// `scf.if`: the then-yield fixes the result types; if the else-region can't
/// produce matching values the op degrades to zero results.
pub struct IfGen;

impl OpGen for IfGen {
    fn kind(&self) -> OpKind {
        OpKind::If
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        if !b.can_open_region() {
            return GenOutcome::NotApplicable;
        }
        let Some(cond) = b.sample_value(Type::I1) else {
            return GenOutcome::NotApplicable;
        };
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }

        b.enter_region(&[], false);
        b.fill_block();
        let types = terminate_with_sampled(b, OpKind::Yield);
        let mut then_region = b.exit_region();

        b.enter_region(&[], false);
        b.fill_block();
        let mut operands: Vec<Value> = Vec::with_capacity(types.len());
        for &ty in &types {
            let config = b.config;
            match b.sample_live(|v| v.ty == ty && may_escape(config, v)) {
                Some(v) => operands.push(v),
                None => break,
            }
        }
        let degraded = operands.len() != types.len();
        if degraded {
            operands.clear();
        }
        b.create_checked(Operation::new(OpKind::Yield).with_operands(operands));
        let else_region = b.exit_region();

        let result_types = if degraded {
            let yield_op = then_region.block.ops.last_mut().expect("then-region terminated");
            yield_op.operands.clear();
            then_region.result_types.clear();
            Vec::new()
        } else {
            types
        };
        let results = b.fresh_values(&result_types);
        b.create_checked(
            Operation::new(OpKind::If)
                .with_operands([cond])
                .with_results(results)
                .with_region(then_region)
                .with_region(else_region),
        )
    }
}

/// `scf.for` over fresh constant bounds `0 .. [0, 1024]` with step in `[1, 4]`.
pub struct ForGen;

impl OpGen for ForGen {
    fn kind(&self) -> OpKind {
        OpKind::For
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        if !b.can_open_region() || !b.reserve(4) {
            return GenOutcome::NotApplicable;
        }
        let upper = b.rng.range_inclusive(0, MAX_TRIP_COUNT);
        let step = b.rng.range_inclusive(1, 4);
        let Some(lb) = materialize_constant(b, Type::Index, 0) else {
            return GenOutcome::NotApplicable;
        };
        let Some(ub) = materialize_constant(b, Type::Index, upper) else {
            return GenOutcome::NotApplicable;
        };
        let Some(st) = materialize_constant(b, Type::Index, step) else {
            return GenOutcome::NotApplicable;
        };

        b.enter_region(&[Type::Index], false);
        b.fill_block();
        b.create_checked(Operation::new(OpKind::Yield));
        let body = b.exit_region();

        b.create_checked(
            Operation::new(OpKind::For)
                .with_operands([lb, ub, st])
                .with_region(body),
        )
    }
}

/// `scf.while` without loop-carried values. The condition region must end up
/// with a visible `i1`; the framework doesn't force one, so when none appears
/// the whole attempt is rolled back.
pub struct WhileGen;

impl OpGen for WhileGen {
    fn kind(&self) -> OpKind {
        OpKind::While
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        if !b.can_open_region() || !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }

        b.enter_region(&[], false);
        b.fill_block();
        let Some(cond) = b.sample_value(Type::I1) else {
            return GenOutcome::NotApplicable;
        };
        b.create_checked(Operation::new(OpKind::Condition).with_operands([cond]));
        let before = b.exit_region();

        b.enter_region(&[], false);
        b.fill_block();
        b.create_checked(Operation::new(OpKind::Yield));
        let after = b.exit_region();

        b.create_checked(Operation::new(OpKind::While).with_region(before).with_region(after))
    }
}
