//! The operation model: typed SSA values, operations carrying attributes and
//! nested single-block regions, and the module that holds function definitions.

mod equal;
mod kinds;
mod verify;
mod walk;

use std::collections::BTreeMap;
use std::fmt;

pub use equal::structural_equal;
pub use kinds::{OpKind, Predicate, Trait, Traits};
pub use verify::{verify_module, Violation, ViolationKind};
pub use walk::{walk, walk_mut, OpPath};

/// Module-global identifier of an SSA value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(pub u32);

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "%{}", self.0)
    }
}

/// Identifier of a block, unique within a module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u32);

/// IR types. Buffers are one-dimensional with `i32` elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    I1,
    I32,
    I64,
    Index,
    MemRef(u32),
}

impl Type {
    pub const INTEGERS: [Type; 4] = [Type::I1, Type::I32, Type::I64, Type::Index];

    pub fn is_integer(self) -> bool {
        !matches!(self, Type::MemRef(_))
    }

    /// Bit width of an integer type; `index` is 64-bit at runtime.
    pub fn bit_width(self) -> Option<u32> {
        match self {
            Type::I1 => Some(1),
            Type::I32 => Some(32),
            Type::I64 | Type::Index => Some(64),
            Type::MemRef(_) => None,
        }
    }

    /// Smallest signed value representable in this type.
    pub fn min_value(self) -> i64 {
        match self {
            Type::I1 => 0,
            Type::I32 => i32::MIN as i64,
            _ => i64::MIN,
        }
    }

    pub fn max_value(self) -> i64 {
        match self {
            Type::I1 => 1,
            Type::I32 => i32::MAX as i64,
            _ => i64::MAX,
        }
    }

    /// Normalizes a raw value to this type: `i1` keeps the low bit (0 or 1),
    /// `i32` is truncated and sign-extended, 64-bit types are unchanged.
    pub fn wrap(self, v: i64) -> i64 {
        match self {
            Type::I1 => v & 1,
            Type::I32 => v as i32 as i64,
            _ => v,
        }
    }

    /// Whether `v` is already in the canonical representation of this type.
    pub fn fits(self, v: i64) -> bool {
        self.is_integer() && self.wrap(v) == v
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::I1 => f.write_str("i1"),
            Type::I32 => f.write_str("i32"),
            Type::I64 => f.write_str("i64"),
            Type::Index => f.write_str("index"),
            Type::MemRef(n) => write!(f, "memref<{n}xi32>"),
        }
    }
}

/// A typed reference to an SSA value. Where the value is defined (op result
/// or block argument) follows from its position in the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Value {
    pub id: ValueId,
    pub ty: Type,
}

impl Value {
    pub fn new(id: u32, ty: Type) -> Self {
        Value { id: ValueId(id), ty }
    }
}

/// Static information attached to an operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Attribute {
    Int { value: i64, ty: Type },
    Bool(bool),
    Predicate(Predicate),
    Symbol(String),
}

impl Attribute {
    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Attribute::Symbol(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub id: BlockId,
    pub args: Vec<Value>,
    pub ops: Vec<Operation>,
}

impl Block {
    pub fn new(id: BlockId) -> Self {
        Block {
            id,
            args: Vec::new(),
            ops: Vec::new(),
        }
    }

    pub fn terminator(&self) -> Option<&Operation> {
        self.ops.last().filter(|op| op.kind.is_terminator())
    }
}

/// A single-block region. `result_types` is fixed retrospectively by the
/// terminator and must equal its operand types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub block: Block,
    pub result_types: Vec<Type>,
}

impl Region {
    pub fn new(block: Block) -> Self {
        Region {
            block,
            result_types: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    pub kind: OpKind,
    pub operands: Vec<Value>,
    pub attributes: BTreeMap<String, Attribute>,
    pub results: Vec<Value>,
    pub regions: Vec<Region>,
}

impl Operation {
    pub fn new(kind: OpKind) -> Self {
        Operation {
            kind,
            operands: Vec::new(),
            attributes: BTreeMap::new(),
            results: Vec::new(),
            regions: Vec::new(),
        }
    }

    pub fn with_operands(mut self, operands: impl IntoIterator<Item = Value>) -> Self {
        self.operands.extend(operands);
        self
    }

    pub fn with_results(mut self, results: impl IntoIterator<Item = Value>) -> Self {
        self.results.extend(results);
        self
    }

    pub fn with_attr(mut self, name: &str, attr: Attribute) -> Self {
        self.attributes.insert(name.to_string(), attr);
        self
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.regions.push(region);
        self
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dialect(&self) -> &'static str {
        self.kind.dialect()
    }

    pub fn traits(&self) -> Traits {
        self.kind.traits()
    }

    pub fn attr(&self, name: &str) -> Option<&Attribute> {
        self.attributes.get(name)
    }

    /// The `sym_name` of a function or `callee` of a call.
    pub fn symbol(&self) -> Option<&str> {
        let key = match self.kind {
            OpKind::Call => "callee",
            _ => "sym_name",
        };
        self.attr(key).and_then(Attribute::as_symbol)
    }

    /// Integer payload of an `arith.constant`, with `i1` as 0/1.
    pub fn constant_value(&self) -> Option<i64> {
        if self.kind != OpKind::Constant {
            return None;
        }
        match self.attr("value")? {
            Attribute::Int { value, .. } => Some(*value),
            Attribute::Bool(b) => Some(*b as i64),
            _ => None,
        }
    }
}

/// The implicit top-level operation: a flat list of function definitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Module {
    pub body: Region,
    pub entry: String,
}

pub const ENTRY_NAME: &str = "main";

impl Module {
    pub fn new() -> Self {
        Module {
            body: Region::new(Block::new(BlockId(0))),
            entry: ENTRY_NAME.to_string(),
        }
    }

    pub fn functions(&self) -> impl Iterator<Item = &Operation> {
        self.body.block.ops.iter().filter(|op| op.kind == OpKind::Func)
    }

    pub fn function(&self, name: &str) -> Option<&Operation> {
        self.functions().find(|f| f.symbol() == Some(name))
    }

    pub fn entry_function(&self) -> Option<&Operation> {
        self.function(&self.entry)
    }

    /// Largest value id in use, for dense environment sizing.
    pub fn max_value_id(&self) -> Option<u32> {
        let mut max = None;
        walk(self, |op, _| {
            for r in &op.regions {
                for a in &r.block.args {
                    max = max.max(Some(a.id.0));
                }
            }
            for v in op.results.iter().chain(&op.operands) {
                max = max.max(Some(v.id.0));
            }
        });
        max
    }
}

impl Default for Module {
    fn default() -> Self {
        Self::new()
    }
}

/// Argument types of a function (its entry-block arguments).
pub fn function_arg_types(func: &Operation) -> Vec<Type> {
    func.regions
        .first()
        .map(|r| r.block.args.iter().map(|a| a.ty).collect())
        .unwrap_or_default()
}

/// Declared result types of a function.
pub fn function_result_types(func: &Operation) -> Vec<Type> {
    func.regions.first().map(|r| r.result_types.clone()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_normalizes_per_width() {
        assert_eq!(Type::I1.wrap(3), 1);
        assert_eq!(Type::I1.wrap(-2), 0);
        assert_eq!(Type::I32.wrap(i32::MAX as i64 + 1), i32::MIN as i64);
        assert_eq!(Type::I64.wrap(-5), -5);
        assert!(Type::I32.fits(-7));
        assert!(!Type::I32.fits(1 << 40));
        assert!(!Type::MemRef(4).fits(0));
    }

    #[test]
    fn type_display() {
        assert_eq!(Type::MemRef(8).to_string(), "memref<8xi32>");
        assert_eq!(Type::Index.to_string(), "index");
    }
}
