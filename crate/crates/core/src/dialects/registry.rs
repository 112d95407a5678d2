//! Declarative per-kind operation specs and the signature constraint shared by
//! the verifier and `Builder::create_checked`.

use crate::ir::{Attribute, OpKind, Operation, Traits, Type};

/// What a region's block must end with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegionSpec {
    pub terminator: OpKind,
}

#[derive(Clone, Debug)]
pub struct OpKindSpec {
    pub kind: OpKind,
    pub traits: Traits,
    pub regions: &'static [RegionSpec],
    /// Eligible for the block-filling selection pool.
    pub pooled: bool,
}

const FUNC_REGIONS: &[RegionSpec] = &[RegionSpec {
    terminator: OpKind::Return,
}];
const YIELD_ONE: &[RegionSpec] = &[RegionSpec {
    terminator: OpKind::Yield,
}];
const YIELD_TWO: &[RegionSpec] = &[
    RegionSpec {
        terminator: OpKind::Yield,
    },
    RegionSpec {
        terminator: OpKind::Yield,
    },
];
const WHILE_REGIONS: &[RegionSpec] = &[
    RegionSpec {
        terminator: OpKind::Condition,
    },
    RegionSpec {
        terminator: OpKind::Yield,
    },
];

pub fn spec(kind: OpKind) -> OpKindSpec {
    let regions: &'static [RegionSpec] = match kind {
        OpKind::Func => FUNC_REGIONS,
        OpKind::If => YIELD_TWO,
        OpKind::For => YIELD_ONE,
        OpKind::While => WHILE_REGIONS,
        _ => &[],
    };
    OpKindSpec {
        kind,
        traits: kind.traits(),
        regions,
        pooled: !kind.is_terminator() && kind != OpKind::Func,
    }
}

/// Kinds that may be sampled while filling a block.
pub fn pooled_kinds() -> impl Iterator<Item = OpKind> {
    OpKind::ALL.into_iter().filter(|k| spec(*k).pooled)
}

fn expect(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn types(vals: &[crate::ir::Value]) -> Vec<Type> {
    vals.iter().map(|v| v.ty).collect()
}

fn fmt_types(ts: &[Type]) -> String {
    let parts: Vec<String> = ts.iter().map(Type::to_string).collect();
    format!("({})", parts.join(", "))
}

fn sig(op: &Operation, operands: &[Type], results: &[Type]) -> Result<(), String> {
    let got_in = types(&op.operands);
    let got_out = types(&op.results);
    expect(got_in == operands && got_out == results, || {
        format!(
            "{} expects {} -> {}, got {} -> {}",
            op.kind,
            fmt_types(operands),
            fmt_types(results),
            fmt_types(&got_in),
            fmt_types(&got_out)
        )
    })
}

/// Checks operand/result signature, attribute presence, and region count.
/// Cross-op properties (scoping, terminators, callees) are the verifier's job.
pub fn check_signature(op: &Operation) -> Result<(), String> {
    let spec = spec(op.kind);
    expect(op.regions.len() == spec.regions.len(), || {
        format!(
            "{} expects {} region(s), got {}",
            op.kind,
            spec.regions.len(),
            op.regions.len()
        )
    })?;
    match op.kind {
        OpKind::Constant => {
            let ty = op.results.first().map(|v| v.ty);
            expect(
                op.operands.is_empty() && op.results.len() == 1 && ty.is_some_and(Type::is_integer),
                || format!("{} expects () -> (integer)", op.kind),
            )?;
            let ty = ty.unwrap();
            match op.attr("value") {
                Some(Attribute::Bool(_)) => expect(ty == Type::I1, || "bool constant must have type i1".into()),
                Some(Attribute::Int { value, ty: aty }) => {
                    expect(*aty == ty && ty != Type::I1 && ty.fits(*value), || {
                        format!("constant value {value} : {aty} does not fit result type {ty}")
                    })
                }
                _ => Err("arith.constant requires a `value` attribute".into()),
            }
        }
        k if k.is_binary_arith() => {
            let ty = op.operands.first().map(|v| v.ty).unwrap_or(Type::I32);
            expect(ty.is_integer(), || format!("{k} requires integer operands"))?;
            sig(op, &[ty, ty], &[ty])
        }
        OpKind::CmpI => {
            let ty = op.operands.first().map(|v| v.ty).unwrap_or(Type::I32);
            expect(ty.is_integer(), || "arith.cmpi requires integer operands".into())?;
            sig(op, &[ty, ty], &[Type::I1])?;
            expect(matches!(op.attr("predicate"), Some(Attribute::Predicate(_))), || {
                "arith.cmpi requires a `predicate` attribute".into()
            })
        }
        OpKind::Select => {
            let ty = op.operands.get(1).map(|v| v.ty).unwrap_or(Type::I32);
            sig(op, &[Type::I1, ty, ty], &[ty])
        }
        OpKind::If => {
            expect(op.operands.len() == 1 && op.operands[0].ty == Type::I1, || {
                "scf.if expects a single i1 condition".into()
            })?;
            let res = types(&op.results);
            for (i, r) in op.regions.iter().enumerate() {
                expect(r.block.args.is_empty(), || {
                    format!("scf.if region {i} takes no arguments")
                })?;
                expect(r.result_types == res, || {
                    format!(
                        "scf.if results {} differ from region {i} types {}",
                        fmt_types(&res),
                        fmt_types(&r.result_types)
                    )
                })?;
            }
            Ok(())
        }
        OpKind::For => {
            sig(op, &[Type::Index, Type::Index, Type::Index], &[])?;
            let r = &op.regions[0];
            expect(types(&r.block.args) == [Type::Index], || {
                "scf.for body takes exactly one index induction variable".into()
            })?;
            expect(r.result_types.is_empty(), || "scf.for body yields no values".into())
        }
        OpKind::While => {
            sig(op, &[], &[])?;
            expect(op.regions.iter().all(|r| r.block.args.is_empty()), || {
                "scf.while regions take no arguments".into()
            })?;
            expect(op.regions[0].result_types == [Type::I1], || {
                "scf.while condition region must produce exactly one i1".into()
            })?;
            expect(op.regions[1].result_types.is_empty(), || {
                "scf.while body region yields no values".into()
            })
        }
        OpKind::Condition => sig(op, &[Type::I1], &[]),
        OpKind::Yield | OpKind::Return => expect(op.results.is_empty(), || format!("{} has no results", op.kind)),
        OpKind::Func => {
            sig(op, &[], &[])?;
            expect(op.attr("sym_name").and_then(Attribute::as_symbol).is_some(), || {
                "func.func requires a `sym_name` symbol".into()
            })
        }
        OpKind::Call => expect(op.attr("callee").and_then(Attribute::as_symbol).is_some(), || {
            "func.call requires a `callee` symbol".into()
        }),
        OpKind::Alloc => {
            let ok =
                op.operands.is_empty() && op.results.len() == 1 && matches!(op.results[0].ty, Type::MemRef(n) if n > 0);
            expect(ok, || "mem.alloc expects () -> (memref)".into())
        }
        OpKind::Load => {
            let m = op.operands.first().map(|v| v.ty).unwrap_or(Type::I32);
            expect(matches!(m, Type::MemRef(_)), || {
                "mem.load needs a memref operand".into()
            })?;
            sig(op, &[m, Type::Index], &[Type::I32])
        }
        OpKind::Store => {
            let m = op.operands.get(1).map(|v| v.ty).unwrap_or(Type::I32);
            expect(matches!(m, Type::MemRef(_)), || {
                "mem.store needs a memref operand".into()
            })?;
            sig(op, &[Type::I32, m, Type::Index], &[])
        }
        OpKind::Dealloc => {
            let m = op.operands.first().map(|v| v.ty).unwrap_or(Type::I32);
            expect(matches!(m, Type::MemRef(_)), || {
                "mem.dealloc needs a memref operand".into()
            })?;
            sig(op, &[m], &[])
        }
        _ => unreachable!("all kinds covered"),
    }
}
