use std::collections::HashMap;

use rayon::prelude::*;

use irsmith::dialects::arith::{materialize_constant, BinaryGen, ConstantGen, DivSIGen};
use irsmith::dialects::func::{CallGen, FuncGen};
use irsmith::dialects::mem::{AllocGen, LoadGen};
use irsmith::dialects::scf::{IfGen, WhileGen, MAX_TRIP_COUNT};
use irsmith::exec::{input_vectors, interpret, RunOutcome, DEFAULT_FUEL};
use irsmith::genkit::rng::derive_seed;
use irsmith::genkit::{generate_with, Builder, GenOutcome, GenSuite, OpGen};
use irsmith::ir::{function_arg_types, walk, Attribute, Module, OpKind, Operation, Type, ValueId};
use irsmith::stats::{while_success_probability, DEFAULT_TAIL_TOLERANCE};
use irsmith::{generate_module, verify_module, FreqModel, GenConfig};

fn config(seed: u64) -> GenConfig {
    GenConfig {
        seed,
        ..GenConfig::default()
    }
}

fn constants(m: &Module) -> HashMap<ValueId, i64> {
    let mut out = HashMap::new();
    walk(m, |op, _| {
        if let Some(v) = op.constant_value() {
            out.insert(op.results[0].id, v);
        }
    });
    out
}

#[test]
fn constant_is_always_applicable() {
    let suite = GenSuite::new(OpKind::Func);
    for seed in 0..100 {
        let cfg = config(seed);
        let mut b = Builder::new(&cfg, &suite);
        assert!(ConstantGen.generate(&mut b).is_inserted());
    }
}

#[test]
fn binary_needs_a_visible_integer() {
    let suite = GenSuite::new(OpKind::Func);
    let cfg = config(0);
    let mut b = Builder::new(&cfg, &suite);
    assert_eq!(BinaryGen(OpKind::AddI).generate(&mut b), GenOutcome::NotApplicable);
    b.enter_region(&[Type::I32, Type::I32], true);
    assert!(BinaryGen(OpKind::AddI).generate(&mut b).is_inserted());
}

#[test]
fn divsi_refuses_non_constant_divisors() {
    let suite = GenSuite::new(OpKind::Func);
    let cfg = config(0);
    let mut b = Builder::new(&cfg, &suite);
    b.enter_region(&[Type::I32], true);
    for _ in 0..2 {
        assert!(BinaryGen(OpKind::AddI).generate(&mut b).is_inserted());
    }
    assert_eq!(DivSIGen.generate(&mut b), GenOutcome::NotApplicable);

    materialize_constant(&mut b, Type::I32, 0).unwrap();
    assert_eq!(DivSIGen.generate(&mut b), GenOutcome::NotApplicable, "zero divisor");

    let seven = materialize_constant(&mut b, Type::I32, 7).unwrap();
    assert!(DivSIGen.generate(&mut b).is_inserted());
    let div = b.current_block().ops.last().unwrap();
    assert_eq!(div.operands[1], seven);
}

#[test]
fn if_needs_a_visible_boolean() {
    let suite = GenSuite::new(OpKind::Func).with(ConstantGen);
    let cfg = config(0);
    let mut b = Builder::new(&cfg, &suite);
    b.enter_region(&[Type::I32, Type::I64], true);
    assert_eq!(IfGen.generate(&mut b), GenOutcome::NotApplicable);
    materialize_constant(&mut b, Type::I1, 0).unwrap();
    assert!(IfGen.generate(&mut b).is_inserted());
}

#[test]
fn while_without_a_boolean_rolls_back() {
    // Only buffers can be made inside the condition region.
    let suite = GenSuite::new(OpKind::Func).with(AllocGen).with(WhileGen);
    for seed in 0..50 {
        let cfg = config(seed);
        let mut b = Builder::new(&cfg, &suite);
        b.enter_region(&[Type::I32], true);
        let before = b.current_block().clone();
        let ops_before = b.ops_created();
        assert_eq!(b.try_generate(OpKind::While), GenOutcome::NotApplicable);
        assert_eq!(b.current_block(), &before);
        assert_eq!(b.ops_created(), ops_before);
        assert_eq!(b.depth(), 1);
    }
}

#[test]
fn while_succeeds_when_its_condition_region_makes_a_boolean() {
    let suite = GenSuite::new(OpKind::Func).with(ConstantGen).with(WhileGen);
    let mut inserted = 0;
    for seed in 0..100 {
        let cfg = config(seed);
        let mut b = Builder::new(&cfg, &suite);
        b.enter_region(&[Type::I32], true);
        if let GenOutcome::Inserted { index, .. } = b.try_generate(OpKind::While) {
            inserted += 1;
            let w = &b.current_block().ops[index];
            let before = &w.regions[0].block;
            let cond = before.ops.last().unwrap();
            assert_eq!(cond.kind, OpKind::Condition);
            let made_bool = before
                .ops
                .iter()
                .any(|op| op.kind == OpKind::Constant && op.results[0].ty == Type::I1);
            assert!(made_bool);
        }
    }
    assert!(inserted > 0);
}

#[test]
fn call_in_first_function_is_not_applicable() {
    let suite = GenSuite::new(OpKind::Func).with(FuncGen).with(CallGen);
    let cfg = config(0);
    let mut b = Builder::new(&cfg, &suite);
    b.enter_region(&[Type::I32, Type::I64, Type::I1], true);
    assert_eq!(CallGen.generate(&mut b), GenOutcome::NotApplicable);
}

#[test]
fn function_without_visible_values_returns_nothing() {
    // No pooled generators: bodies hold only the return.
    let suite = GenSuite::new(OpKind::Func).with(FuncGen);
    let mut found = false;
    for seed in 0..200 {
        let cfg = config(seed);
        let mut b = Builder::new(&cfg, &suite);
        b.planned_functions = 2;
        assert!(b.try_generate(OpKind::Func).is_inserted());
        let f0 = &b.completed_functions()[0];
        if f0.args.is_empty() {
            assert!(f0.results.is_empty());
            let ret = b.current_block().ops[0].regions[0].block.ops.last().unwrap();
            assert_eq!(ret.kind, OpKind::Return);
            assert!(ret.operands.is_empty());
            found = true;
        }
    }
    assert!(found);
}

#[test]
fn calls_match_their_callees() {
    let mut calls = 0;
    for i in 0..300 {
        let m = generate_module(&config(derive_seed(4, i))).unwrap();
        assert!(verify_module(&m).is_empty());
        walk(&m, |op, _| {
            if op.kind == OpKind::Call {
                let callee = m.function(op.symbol().unwrap()).unwrap();
                let arg_types: Vec<Type> = op.operands.iter().map(|v| v.ty).collect();
                assert_eq!(arg_types, function_arg_types(callee));
                calls += 1;
            }
        });
        // The entry function is last, so no function calls main.
        assert_eq!(m.body.block.ops.last().unwrap().symbol(), Some("main"));
    }
    assert!(calls > 0);
}

#[test]
fn load_needs_a_buffer() {
    let suite = GenSuite::new(OpKind::Func);
    let cfg = config(0);
    let mut b = Builder::new(&cfg, &suite);
    b.enter_region(&[Type::I32], true);
    assert_eq!(LoadGen.generate(&mut b), GenOutcome::NotApplicable);
    assert!(AllocGen.generate(&mut b).is_inserted());
    assert!(LoadGen.generate(&mut b).is_inserted());
}

/// (index, buffer size) of every load and store.
fn accesses(m: &Module) -> Vec<(i64, u32)> {
    let consts = constants(m);
    let mut out = Vec::new();
    walk(m, |op, _| {
        if matches!(op.kind, OpKind::Load | OpKind::Store) {
            let n = op.operands.len();
            let Type::MemRef(size) = op.operands[n - 2].ty else {
                panic!("buffer operand")
            };
            out.push((consts[&op.operands[n - 1].id], size));
        }
    });
    out
}

fn has_double_dealloc(m: &Module) -> bool {
    let mut freed = Vec::new();
    let mut twice = false;
    walk(m, |op, _| {
        if op.kind == OpKind::Dealloc {
            twice |= freed.contains(&op.operands[0].id);
            freed.push(op.operands[0].id);
        }
    });
    twice
}

#[test]
fn safe_mode_indices_are_in_bounds() {
    let mut seen = 0;
    for i in 0..500 {
        let m = generate_module(&config(derive_seed(6, i))).unwrap();
        for (index, size) in accesses(&m) {
            assert!((0..size as i64).contains(&index), "index {index} into {size}");
            seen += 1;
        }
        assert!(!has_double_dealloc(&m));
    }
    assert!(seen > 100);
}

#[test]
fn unsafe_mode_produces_memory_bugs() {
    let mut oob = 0;
    let mut double = 0;
    for i in 0..1000 {
        let cfg = GenConfig {
            allow_unsafe_memory: true,
            ..config(derive_seed(7, i))
        };
        let m = generate_module(&cfg).unwrap();
        assert!(verify_module(&m).is_empty());
        oob += accesses(&m).iter().filter(|(i, n)| *i >= *n as i64).count();
        double += has_double_dealloc(&m) as usize;
    }
    assert!(oob > 0 && double > 0, "oob {oob}, double {double}");
}

#[test]
fn for_loops_have_bounded_trip_counts() {
    for i in 0..300 {
        let m = generate_module(&config(derive_seed(9, i))).unwrap();
        let consts = constants(&m);
        walk(&m, |op, _| {
            if op.kind == OpKind::For {
                let c = |k: usize| consts[&op.operands[k].id];
                assert_eq!(c(0), 0);
                assert!((0..=MAX_TRIP_COUNT).contains(&c(1)));
                assert!((1..=4).contains(&c(2)));
            }
        });
    }
}

#[test]
fn safe_mode_programs_never_trap() {
    let failures: Vec<String> = (0..2000u64)
        .into_par_iter()
        .flat_map_iter(|i| {
            let seed = derive_seed(10, i);
            let m = generate_module(&config(seed)).unwrap();
            input_vectors(&m, seed, 4)
                .into_iter()
                .filter_map(move |args| match interpret(&m, "main", &args, DEFAULT_FUEL).unwrap() {
                    RunOutcome::Trap { message, .. } => Some(format!("seed {seed}: {message}")),
                    _ => None,
                })
                .collect::<Vec<_>>()
        })
        .collect();
    assert!(failures.is_empty(), "{failures:?}");
}

/// `func.func @main(i32)` whose body is filled by the selection loop.
struct MainOnly;

impl OpGen for MainOnly {
    fn kind(&self) -> OpKind {
        OpKind::Func
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        b.enter_region(&[Type::I32], true);
        b.fill_block();
        b.create_checked(Operation::new(OpKind::Return));
        let body = b.exit_region();
        b.create_checked(
            Operation::new(OpKind::Func)
                .with_attr("sym_name", Attribute::Symbol("main".into()))
                .with_region(body),
        )
    }
}

/// `arith.constant` of type `i1`: the only boolean producer.
struct BoolConstant;

impl OpGen for BoolConstant {
    fn kind(&self) -> OpKind {
        OpKind::Constant
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let v = b.rng.below(2) as i64;
        match materialize_constant(b, Type::I1, v) {
            Some(_) => GenOutcome::Inserted {
                block: b.current_block().id,
                index: b.current_block().ops.len() - 1,
            },
            None => GenOutcome::NotApplicable,
        }
    }
}

/// A 90-op pool with a single boolean producer, so `p_bool = 1/90`: 88 parts
/// buffer allocation, one part boolean constant, one part while. The depth
/// cap keeps whiles out of while condition regions.
#[test]
fn ninety_op_pool_echoes_the_analytic_while_frequency() {
    let suite = GenSuite::new(OpKind::Func)
        .with(MainOnly)
        .with(AllocGen)
        .with(BoolConstant)
        .with(WhileGen);
    let mut base = GenConfig {
        max_region_depth: 2,
        max_total_ops: 100_000,
        max_ops_per_block: 100_000,
        max_functions: 1,
        ..config(2024)
    };
    base.set_weight(OpKind::Alloc, 88.0);
    base.set_weight(OpKind::Constant, 1.0);
    base.set_weight(OpKind::While, 1.0);
    for k in [OpKind::Load, OpKind::Store, OpKind::Dealloc] {
        base.set_weight(k, 0.0);
    }
    let (chosen, generated) = (0..1_000_000u64)
        .into_par_iter()
        .map(|i| {
            let cfg = GenConfig {
                seed: derive_seed(base.seed, i),
                ..base.clone()
            };
            let g = generate_with(&suite, &cfg).unwrap();
            let c = g.counts.get(&OpKind::While).copied().unwrap_or_default();
            (c.chosen, c.generated)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let measured = generated as f64 / chosen as f64;
    let analytic = while_success_probability(&FreqModel::new(0.2, 1.0 / 90.0).unwrap(), DEFAULT_TAIL_TOLERANCE);
    // The selection loop always inserts at least one op into the condition
    // region when it can, which shifts K up by one relative to the model.
    assert!(
        (measured - analytic).abs() <= 0.01,
        "measured {measured:.4} over {chosen} attempts, analytic {analytic:.4}"
    );
}
