use super::{terminate_with_sampled, IntegerTypeGen, TypeGen};
use crate::genkit::{Builder, FunctionSig, GenOutcome, OpGen};
use crate::ir::{Attribute, OpKind, Operation, Type, Value, ENTRY_NAME};

/// Most arguments a generated function takes.
pub const MAX_ARGS: usize = 3;

/// `func.func` at module level. The last planned function is the entry and
/// takes at least one argument. The body's result types are set by the
/// `func.return` it ends with.
pub struct FuncGen;

impl OpGen for FuncGen {
    fn kind(&self) -> OpKind {
        OpKind::Func
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let index = b.completed_functions().len() as u32;
        if !b.at_top_level() || index >= b.config.max_functions {
            return GenOutcome::NotApplicable;
        }
        let is_entry = index + 1 == b.planned_functions;
        let name = if is_entry {
            ENTRY_NAME.to_string()
        } else {
            format!("f{index}")
        };
        let min_args = usize::from(is_entry);
        let arg_count = min_args + b.rng.below(MAX_ARGS - min_args + 1);
        let arg_types: Vec<Type> = (0..arg_count).map(|_| IntegerTypeGen.sample(&mut b.rng)).collect();

        b.enter_region(&arg_types, true);
        b.fill_block();
        let results = terminate_with_sampled(b, OpKind::Return);
        let body = b.exit_region();

        let outcome = b.create_checked(
            Operation::new(OpKind::Func)
                .with_attr("sym_name", Attribute::Symbol(name.clone()))
                .with_region(body),
        );
        if outcome.is_inserted() {
            b.register_function(FunctionSig {
                name,
                args: arg_types,
                results,
            });
        }
        outcome
    }
}

/// `func.call` to a previously completed function, so the call graph stays
/// acyclic.
pub struct CallGen;

impl OpGen for CallGen {
    fn kind(&self) -> OpKind {
        OpKind::Call
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let visible = b.visible_values(None);
        let eligible: Vec<FunctionSig> = b
            .completed_functions()
            .iter()
            .filter(|f| f.args.iter().all(|t| visible.iter().any(|v| v.ty == *t)))
            .cloned()
            .collect();
        let Some(callee) = b.rng.choose(&eligible).cloned() else {
            return GenOutcome::NotApplicable;
        };
        let args: Vec<Value> = callee
            .args
            .iter()
            .map(|&t| b.sample_value(t).expect("eligibility checked"))
            .collect();
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let results = b.fresh_values(&callee.results);
        b.create_checked(
            Operation::new(OpKind::Call)
                .with_attr("callee", Attribute::Symbol(callee.name))
                .with_operands(args)
                .with_results(results),
        )
    }
}
