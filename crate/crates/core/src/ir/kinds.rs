use std::fmt;

/// Every operation kind known to the built-in dialects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Constant,
    AddI,
    SubI,
    MulI,
    AndI,
    OrI,
    XorI,
    DivSI,
    CmpI,
    Select,
    If,
    For,
    While,
    Yield,
    Condition,
    Func,
    Call,
    Return,
    Alloc,
    Load,
    Store,
    Dealloc,
}

impl OpKind {
    pub const ALL: [OpKind; 22] = [
        OpKind::Constant,
        OpKind::AddI,
        OpKind::SubI,
        OpKind::MulI,
        OpKind::AndI,
        OpKind::OrI,
        OpKind::XorI,
        OpKind::DivSI,
        OpKind::CmpI,
        OpKind::Select,
        OpKind::If,
        OpKind::For,
        OpKind::While,
        OpKind::Yield,
        OpKind::Condition,
        OpKind::Func,
        OpKind::Call,
        OpKind::Return,
        OpKind::Alloc,
        OpKind::Load,
        OpKind::Store,
        OpKind::Dealloc,
    ];

    /// Fully-qualified `dialect.name`.
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Constant => "arith.constant",
            OpKind::AddI => "arith.addi",
            OpKind::SubI => "arith.subi",
            OpKind::MulI => "arith.muli",
            OpKind::AndI => "arith.andi",
            OpKind::OrI => "arith.ori",
            OpKind::XorI => "arith.xori",
            OpKind::DivSI => "arith.divsi",
            OpKind::CmpI => "arith.cmpi",
            OpKind::Select => "arith.select",
            OpKind::If => "scf.if",
            OpKind::For => "scf.for",
            OpKind::While => "scf.while",
            OpKind::Yield => "scf.yield",
            OpKind::Condition => "scf.condition",
            OpKind::Func => "func.func",
            OpKind::Call => "func.call",
            OpKind::Return => "func.return",
            OpKind::Alloc => "mem.alloc",
            OpKind::Load => "mem.load",
            OpKind::Store => "mem.store",
            OpKind::Dealloc => "mem.dealloc",
        }
    }

    pub fn dialect(self) -> &'static str {
        let name = self.name();
        &name[..name.find('.').unwrap_or(name.len())]
    }

    pub fn from_name(name: &str) -> Option<OpKind> {
        OpKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn traits(self) -> Traits {
        use Trait::*;
        match self {
            OpKind::Yield | OpKind::Condition | OpKind::Return => Traits::of(&[IsTerminator]),
            OpKind::Func => Traits::of(&[IsolatedFromAbove]),
            OpKind::For => Traits::of(&[AlwaysTerminates]),
            OpKind::Call | OpKind::Alloc | OpKind::Load | OpKind::Store | OpKind::Dealloc => {
                Traits::of(&[HasSideEffects])
            }
            _ => Traits::default(),
        }
    }

    pub fn is_terminator(self) -> bool {
        self.traits().contains(Trait::IsTerminator)
    }

    /// Pure binary integer arithmetic (`lhs op rhs`, same type in and out).
    pub fn is_binary_arith(self) -> bool {
        matches!(
            self,
            OpKind::AddI | OpKind::SubI | OpKind::MulI | OpKind::AndI | OpKind::OrI | OpKind::XorI | OpKind::DivSI
        )
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Trait {
    IsTerminator,
    IsolatedFromAbove,
    HasSideEffects,
    AlwaysTerminates,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Traits(u8);

impl Traits {
    fn bit(t: Trait) -> u8 {
        match t {
            Trait::IsTerminator => 1,
            Trait::IsolatedFromAbove => 2,
            Trait::HasSideEffects => 4,
            Trait::AlwaysTerminates => 8,
        }
    }

    pub fn of(ts: &[Trait]) -> Self {
        Traits(ts.iter().fold(0, |acc, &t| acc | Self::bit(t)))
    }

    pub fn contains(self, t: Trait) -> bool {
        self.0 & Self::bit(t) != 0
    }
}

/// Comparison predicate of `arith.cmpi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    Eq,
    Ne,
    Slt,
    Sle,
    Sgt,
    Sge,
}

impl Predicate {
    pub const ALL: [Predicate; 6] = [
        Predicate::Eq,
        Predicate::Ne,
        Predicate::Slt,
        Predicate::Sle,
        Predicate::Sgt,
        Predicate::Sge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Eq => "eq",
            Predicate::Ne => "ne",
            Predicate::Slt => "slt",
            Predicate::Sle => "sle",
            Predicate::Sgt => "sgt",
            Predicate::Sge => "sge",
        }
    }

    pub fn from_name(s: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn eval<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            Predicate::Eq => a == b,
            Predicate::Ne => a != b,
            Predicate::Slt => a < b,
            Predicate::Sle => a <= b,
            Predicate::Sgt => a > b,
            Predicate::Sge => a >= b,
        }
    }
}
