use irsmith::genkit::rng::derive_seed;
use irsmith::ir::{walk, walk_mut, Attribute, Block, BlockId, OpKind, Operation, Region, Type, Value, ViolationKind};
use irsmith::{generate_module, parse_module, print_module, structural_equal, verify_module, GenConfig, Module};

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn func(name: &str, args: &[Value], ops: Vec<Operation>, results: Vec<Type>) -> Operation {
    let mut block = Block::new(BlockId(1));
    block.args = args.to_vec();
    block.ops = ops;
    Operation::new(OpKind::Func)
        .with_attr("sym_name", Attribute::Symbol(name.to_string()))
        .with_region(Region {
            block,
            result_types: results,
        })
}

fn module_of(funcs: Vec<Operation>) -> Module {
    let mut m = Module::new();
    m.body.block.ops = funcs;
    m
}

fn constant(id: u32, ty: Type, value: i64) -> Operation {
    Operation::new(OpKind::Constant)
        .with_attr("value", Attribute::Int { value, ty })
        .with_results([Value::new(id, ty)])
}

/// `main(%0: i32) { %1 = constant 5; return %1 }`
fn minimal() -> Module {
    let arg = Value::new(0, Type::I32);
    let c = constant(1, Type::I32, 5);
    let ret = Operation::new(OpKind::Return).with_operands([Value::new(1, Type::I32)]);
    module_of(vec![func("main", &[arg], vec![c, ret], vec![Type::I32])])
}

fn kinds(m: &Module) -> Vec<ViolationKind> {
    verify_module(m).into_iter().map(|v| v.kind).collect()
}

#[test]
fn minimal_module_is_clean() {
    assert_eq!(verify_module(&minimal()), vec![]);
}

#[test]
fn operand_defined_later_is_use_before_def() {
    let m = parse_module(&fixture("use_before_def.rir")).unwrap();
    let v = verify_module(&m);
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].kind, ViolationKind::UseBeforeDef);
    assert_eq!(v[0].path, "main/body/op[0]");
}

#[test]
fn return_type_differing_from_declaration_is_flagged_once() {
    let mut m = minimal();
    m.body.block.ops[0].regions[0].result_types = vec![Type::I64];
    assert_eq!(kinds(&m), vec![ViolationKind::TerminatorTypeMismatch]);
}

#[test]
fn missing_terminator_and_misplaced_terminator() {
    let mut m = minimal();
    m.body.block.ops[0].regions[0].block.ops.pop();
    m.body.block.ops[0].regions[0].result_types.clear();
    assert_eq!(kinds(&m), vec![ViolationKind::MissingTerminator]);

    let mut m = minimal();
    let ops = &mut m.body.block.ops[0].regions[0].block.ops;
    ops.swap(0, 1);
    assert!(kinds(&m).contains(&ViolationKind::MisplacedTerminator));
}

#[test]
fn entry_function_rules() {
    let mut m = minimal();
    m.body.block.ops[0]
        .attributes
        .insert("sym_name".into(), Attribute::Symbol("g".into()));
    assert!(kinds(&m).contains(&ViolationKind::EntryFunction));

    let c = constant(0, Type::I32, 1);
    let ret = Operation::new(OpKind::Return).with_operands([Value::new(0, Type::I32)]);
    let no_args = module_of(vec![func("main", &[], vec![c, ret], vec![Type::I32])]);
    assert!(kinds(&no_args).contains(&ViolationKind::EntryFunction));
}

#[test]
fn function_body_cannot_see_other_functions() {
    let f_arg = Value::new(0, Type::I32);
    let f = func(
        "f0",
        &[f_arg],
        vec![Operation::new(OpKind::Return).with_operands([f_arg])],
        vec![Type::I32],
    );
    // main returns f0's argument, which lies beyond main's isolation boundary.
    let main = func(
        "main",
        &[Value::new(1, Type::I32)],
        vec![Operation::new(OpKind::Return).with_operands([f_arg])],
        vec![Type::I32],
    );
    assert_eq!(kinds(&module_of(vec![f, main])), vec![ViolationKind::UseBeforeDef]);
}

#[test]
fn calls_must_target_earlier_functions_with_matching_types() {
    let arg = Value::new(0, Type::I32);
    let call = |callee: &str, ty: Type| {
        Operation::new(OpKind::Call)
            .with_attr("callee", Attribute::Symbol(callee.into()))
            .with_operands([arg])
            .with_results([Value::new(1, ty)])
    };
    let ret = || Operation::new(OpKind::Return);
    let f = func(
        "f0",
        &[Value::new(2, Type::I32)],
        vec![Operation::new(OpKind::Return).with_operands([Value::new(2, Type::I32)])],
        vec![Type::I32],
    );

    let good = module_of(vec![
        f.clone(),
        func("main", &[arg], vec![call("f0", Type::I32), ret()], vec![]),
    ]);
    assert_eq!(verify_module(&good), vec![]);

    let unknown = module_of(vec![
        f.clone(),
        func("main", &[arg], vec![call("g", Type::I32), ret()], vec![]),
    ]);
    assert_eq!(kinds(&unknown), vec![ViolationKind::UnknownCallee]);

    let mismatch = module_of(vec![
        f,
        func("main", &[arg], vec![call("f0", Type::I64), ret()], vec![]),
    ]);
    assert_eq!(kinds(&mismatch), vec![ViolationKind::CallSignatureMismatch]);
}

#[test]
fn duplicate_value_ids_are_flagged() {
    let mut m = minimal();
    let ops = &mut m.body.block.ops[0].regions[0].block.ops;
    ops.insert(0, constant(1, Type::I32, 9));
    assert!(kinds(&m).contains(&ViolationKind::DuplicateValueId));
}

#[test]
fn constant_attribute_must_match_result() {
    let mut m = minimal();
    m.body.block.ops[0].regions[0].block.ops[0].attributes.insert(
        "value".into(),
        Attribute::Int {
            value: 5,
            ty: Type::I64,
        },
    );
    assert_eq!(kinds(&m), vec![ViolationKind::Signature]);
}

#[test]
fn structural_equality_ignores_ids_but_not_attributes() {
    let m = generate_module(&GenConfig {
        seed: 11,
        ..GenConfig::default()
    })
    .unwrap();
    assert!(structural_equal(&m, &m));

    let mut shifted = m.clone();
    walk_mut(&mut shifted, |op| {
        for v in op.operands.iter_mut().chain(op.results.iter_mut()) {
            v.id.0 += 100;
        }
        for r in &mut op.regions {
            for a in &mut r.block.args {
                a.id.0 += 100;
            }
        }
    });
    assert!(structural_equal(&m, &shifted));
    assert!(structural_equal(&shifted, &m));

    let five = minimal();
    let mut six = five.clone();
    six.body.block.ops[0].regions[0].block.ops[0].attributes.insert(
        "value".into(),
        Attribute::Int {
            value: 6,
            ty: Type::I32,
        },
    );
    assert!(!structural_equal(&five, &six));
}

#[test]
fn structural_equality_is_an_equivalence_on_a_corpus() {
    let corpus: Vec<Module> = (0..12)
        .map(|i| {
            let seed = derive_seed(5, i % 6);
            let m = generate_module(&GenConfig {
                seed,
                ..GenConfig::default()
            })
            .unwrap();
            // The second half goes through text, which renumbers ids.
            if i >= 6 {
                parse_module(&print_module(&m)).unwrap()
            } else {
                m
            }
        })
        .collect();
    for a in &corpus {
        for b in &corpus {
            assert_eq!(structural_equal(a, b), structural_equal(b, a));
            for c in &corpus {
                if structural_equal(a, b) && structural_equal(b, c) {
                    assert!(structural_equal(a, c));
                }
            }
        }
    }
    for i in 0..6 {
        assert!(structural_equal(&corpus[i], &corpus[i + 6]));
    }
}

#[test]
fn walk_counts_every_op() {
    assert_eq!(walk(&Module::new(), |_, _| {}), 0);
    // func, constant, muli, return.
    let golden = parse_module(&fixture("golden.rir")).unwrap();
    assert_eq!(walk(&golden, |_, _| {}), 4);
    let nested = parse_module(&fixture("infinite_while.rir")).unwrap();
    let mut paths = Vec::new();
    let n = walk(&nested, |op, path| paths.push(format!("{} {path}", op.name())));
    assert_eq!(n, 6);
    assert_eq!(
        paths,
        [
            "func.func main",
            "scf.while main/body/op[0]",
            "arith.constant main/body/op[0]/region[0]/op[0]",
            "scf.condition main/body/op[0]/region[0]/op[1]",
            "scf.yield main/body/op[0]/region[1]/op[0]",
            "func.return main/body/op[1]",
        ]
    );
}

#[test]
fn walk_count_matches_printed_op_lines() {
    for i in 0..200 {
        let m = generate_module(&GenConfig {
            seed: derive_seed(17, i),
            ..GenConfig::default()
        })
        .unwrap();
        let text = print_module(&m);
        let printed = text
            .lines()
            .filter(|l| l.trim_start().starts_with('%') || l.trim_start().starts_with('"'))
            .count();
        assert_eq!(walk(&m, |_, _| {}), printed, "seed index {i}");
    }
}
