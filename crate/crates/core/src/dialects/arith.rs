use super::{IntegerTypeGen, TypeGen};
use crate::genkit::rng::SplitMix64;
use crate::genkit::{Builder, GenOutcome, OpGen};
use crate::ir::{Attribute, OpKind, Operation, Predicate, Type, Value};

/// Picks a constant of type `ty` from the configured pool (wrapped to the
/// width), the type's min and max, or a single uniform draw. Booleans are
/// uniform.
pub fn sample_constant(rng: &mut SplitMix64, ty: Type, pool: &[i64]) -> i64 {
    if ty == Type::I1 {
        return rng.below(2) as i64;
    }
    let mut candidates: Vec<i64> = pool.iter().map(|&v| ty.wrap(v)).collect();
    candidates.push(ty.min_value());
    candidates.push(ty.max_value());
    let pick = rng.below(candidates.len() + 1);
    match candidates.get(pick) {
        Some(&v) => v,
        None => rng.range_inclusive(ty.min_value(), ty.max_value()),
    }
}

pub fn constant_attr(ty: Type, value: i64) -> Attribute {
    if ty == Type::I1 {
        Attribute::Bool(value != 0)
    } else {
        Attribute::Int { value, ty }
    }
}

/// Inserts an `arith.constant` whose budget the caller already reserved.
pub fn materialize_constant(b: &mut Builder<'_>, ty: Type, value: i64) -> Option<Value> {
    let result = b.fresh_value(ty);
    let op = Operation::new(OpKind::Constant)
        .with_attr("value", constant_attr(ty, value))
        .with_results([result]);
    b.create_checked(op).is_inserted().then_some(result)
}

/// Two operands of a common integer type: the first uniform over all visible
/// integers, the second uniform over those of the first one's type.
fn sample_int_pair(b: &mut Builder<'_>) -> Option<(Value, Value)> {
    let ints = b.visible_values(None);
    let ints: Vec<Value> = ints.into_iter().filter(|v| v.ty.is_integer()).collect();
    let lhs = *b.rng.choose(&ints)?;
    let rhs = b.sample_value(lhs.ty)?;
    Some((lhs, rhs))
}

pub struct ConstantGen;

impl OpGen for ConstantGen {
    fn kind(&self) -> OpKind {
        OpKind::Constant
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let ty = IntegerTypeGen.sample(&mut b.rng);
        let value = sample_constant(&mut b.rng, ty, &b.config.int_constant_pool);
        let result = b.fresh_value(ty);
        b.create_checked(
            Operation::new(OpKind::Constant)
                .with_attr("value", constant_attr(ty, value))
                .with_results([result]),
        )
    }
}

/// `addi`, `subi`, `muli`, `andi`, `ori`, `xori`.
pub struct BinaryGen(pub OpKind);

impl OpGen for BinaryGen {
    fn kind(&self) -> OpKind {
        self.0
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let Some((lhs, rhs)) = sample_int_pair(b) else {
            return GenOutcome::NotApplicable;
        };
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let result = b.fresh_value(lhs.ty);
        b.create_checked(Operation::new(self.0).with_operands([lhs, rhs]).with_results([result]))
    }
}

/// Signed division whose divisor is always a visible nonzero constant.
pub struct DivSIGen;

impl OpGen for DivSIGen {
    fn kind(&self) -> OpKind {
        OpKind::DivSI
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let divisors: Vec<Value> = b
            .visible_values(None)
            .into_iter()
            .filter(|v| b.constant_of(v.id).is_some_and(|c| c != 0))
            .collect();
        let Some(&divisor) = b.rng.choose(&divisors) else {
            return GenOutcome::NotApplicable;
        };
        let dividend = b.sample_value(divisor.ty).expect("divisor itself is visible");
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let result = b.fresh_value(divisor.ty);
        b.create_checked(
            Operation::new(OpKind::DivSI)
                .with_operands([dividend, divisor])
                .with_results([result]),
        )
    }
}

pub struct CmpIGen;

impl OpGen for CmpIGen {
    fn kind(&self) -> OpKind {
        OpKind::CmpI
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let Some((lhs, rhs)) = sample_int_pair(b) else {
            return GenOutcome::NotApplicable;
        };
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let pred = Predicate::ALL[b.rng.below(Predicate::ALL.len())];
        let result = b.fresh_value(Type::I1);
        b.create_checked(
            Operation::new(OpKind::CmpI)
                .with_operands([lhs, rhs])
                .with_attr("predicate", Attribute::Predicate(pred))
                .with_results([result]),
        )
    }
}

pub struct SelectGen;

impl OpGen for SelectGen {
    fn kind(&self) -> OpKind {
        OpKind::Select
    }

    fn generate(&self, b: &mut Builder<'_>) -> GenOutcome {
        let Some(cond) = b.sample_value(Type::I1) else {
            return GenOutcome::NotApplicable;
        };
        let Some((t, f)) = sample_int_pair(b) else {
            return GenOutcome::NotApplicable;
        };
        if !b.reserve(1) {
            return GenOutcome::NotApplicable;
        }
        let result = b.fresh_value(t.ty);
        b.create_checked(
            Operation::new(OpKind::Select)
                .with_operands([cond, t, f])
                .with_results([result]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_fit_their_type() {
        let mut rng = SplitMix64::new(11);
        let pool = [0, 1, -1, 2, 7, 1 << 40];
        for _ in 0..2000 {
            for ty in Type::INTEGERS {
                let v = sample_constant(&mut rng, ty, &pool);
                assert!(ty.fits(v), "{v} does not fit {ty}");
            }
        }
    }

    #[test]
    fn constant_pool_includes_extremes() {
        let mut rng = SplitMix64::new(2);
        let mut saw_min = false;
        let mut saw_max = false;
        for _ in 0..500 {
            let v = sample_constant(&mut rng, Type::I32, &[0]);
            saw_min |= v == i32::MIN as i64;
            saw_max |= v == i32::MAX as i64;
        }
        assert!(saw_min && saw_max);
    }
}
