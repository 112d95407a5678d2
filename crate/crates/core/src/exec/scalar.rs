//! Two's-complement integer semantics, written once over the primitive
//! integer types and dispatched by IR type.

use num_traits::{PrimInt, Signed, WrappingAdd, WrappingMul, WrappingNeg, WrappingSub};

use crate::ir::{OpKind, Predicate, Type};

/// Signed machine integers the IR's integer types are evaluated in.
pub trait IntScalar: PrimInt + Signed + WrappingAdd + WrappingSub + WrappingMul + WrappingNeg + Into<i64> {
    /// Truncates a canonical `i64` to this width.
    fn from_canonical(v: i64) -> Self;
}

impl IntScalar for i8 {
    fn from_canonical(v: i64) -> Self {
        v as i8
    }
}

impl IntScalar for i32 {
    fn from_canonical(v: i64) -> Self {
        v as i32
    }
}

impl IntScalar for i64 {
    fn from_canonical(v: i64) -> Self {
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivisionByZero;

/// Wrapping binary arithmetic; `divsi` of `MIN / -1` wraps to `MIN`.
pub fn eval_binary<T: IntScalar>(kind: OpKind, a: T, b: T) -> Result<T, DivisionByZero> {
    Ok(match kind {
        OpKind::AddI => a.wrapping_add(&b),
        OpKind::SubI => a.wrapping_sub(&b),
        OpKind::MulI => a.wrapping_mul(&b),
        OpKind::AndI => a & b,
        OpKind::OrI => a | b,
        OpKind::XorI => a ^ b,
        OpKind::DivSI => {
            if b.is_zero() {
                return Err(DivisionByZero);
            }
            a.checked_div(&b).unwrap_or_else(|| a.wrapping_neg())
        }
        other => unreachable!("{other} is not a binary arithmetic op"),
    })
}

/// Signed interpretation of a canonical value: `i1` true is -1.
pub fn signed(ty: Type, v: i64) -> i64 {
    match ty {
        Type::I1 => -(v & 1),
        _ => v,
    }
}

/// Evaluates a binary op on canonical values of type `ty`.
pub fn eval_binary_typed(kind: OpKind, ty: Type, a: i64, b: i64) -> Result<i64, DivisionByZero> {
    let out = match ty {
        Type::I1 => {
            let r = eval_binary(
                kind,
                i8::from_canonical(signed(ty, a)),
                i8::from_canonical(signed(ty, b)),
            )?;
            r as i64
        }
        Type::I32 => eval_binary(kind, i32::from_canonical(a), i32::from_canonical(b))?.into(),
        Type::I64 | Type::Index => eval_binary(kind, a, b)?,
        Type::MemRef(_) => unreachable!("arithmetic on a buffer"),
    };
    Ok(ty.wrap(out))
}

pub fn compare(pred: Predicate, ty: Type, a: i64, b: i64) -> bool {
    pred.eval(signed(ty, a), signed(ty, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i32_wraps() {
        let max = i32::MAX as i64;
        assert_eq!(eval_binary_typed(OpKind::AddI, Type::I32, max, 1), Ok(i32::MIN as i64));
        assert_eq!(eval_binary_typed(OpKind::MulI, Type::I32, 1 << 20, 1 << 12), Ok(0));
    }

    #[test]
    fn min_over_minus_one_wraps() {
        assert_eq!(eval_binary_typed(OpKind::DivSI, Type::I64, i64::MIN, -1), Ok(i64::MIN));
        let min = i32::MIN as i64;
        assert_eq!(eval_binary_typed(OpKind::DivSI, Type::I32, min, -1), Ok(min));
    }

    #[test]
    fn division_truncates_toward_zero() {
        assert_eq!(eval_binary_typed(OpKind::DivSI, Type::I32, -7, 2), Ok(-3));
        assert_eq!(eval_binary_typed(OpKind::DivSI, Type::I32, 7, 0), Err(DivisionByZero));
    }

    #[test]
    fn i1_is_boolean_algebra() {
        // truth tables of add=xor, mul=and on 1-bit values
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(eval_binary_typed(OpKind::AddI, Type::I1, a, b), Ok(a ^ b));
                assert_eq!(eval_binary_typed(OpKind::SubI, Type::I1, a, b), Ok(a ^ b));
                assert_eq!(eval_binary_typed(OpKind::MulI, Type::I1, a, b), Ok(a & b));
                assert_eq!(eval_binary_typed(OpKind::OrI, Type::I1, a, b), Ok(a | b));
            }
        }
        assert_eq!(eval_binary_typed(OpKind::DivSI, Type::I1, 1, 1), Ok(1));
        assert_eq!(eval_binary_typed(OpKind::DivSI, Type::I1, 0, 1), Ok(0));
    }

    #[test]
    fn i1_compares_signed() {
        // true is -1 under signed predicates
        assert!(compare(Predicate::Slt, Type::I1, 1, 0));
        assert!(compare(Predicate::Sgt, Type::I32, 0, -1));
    }
}
