use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::scalar::{compare, eval_binary_typed};
use crate::ir::{function_arg_types, Attribute, Block, Module, OpKind, OpPath, Operation, Type};

/// An integer (or buffer handle) tagged with its IR type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TypedInt {
    pub ty: Type,
    pub value: i64,
}

impl TypedInt {
    pub fn new(ty: Type, value: i64) -> Self {
        TypedInt { ty, value }
    }
}

impl fmt::Display for TypedInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrapKind {
    DivByZero,
    Oob,
    UseAfterFree,
    DoubleFree,
}

impl TrapKind {
    pub fn name(self) -> &'static str {
        match self {
            TrapKind::DivByZero => "div_by_zero",
            TrapKind::Oob => "oob",
            TrapKind::UseAfterFree => "use_after_free",
            TrapKind::DoubleFree => "double_free",
        }
    }
}

impl fmt::Display for TrapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Completed(Vec<TypedInt>),
    Trap { kind: TrapKind, message: String },
    FuelExhausted(u64),
}

impl RunOutcome {
    pub fn is_fuel_exhausted(&self) -> bool {
        matches!(self, RunOutcome::FuelExhausted(_))
    }
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Completed(vals) if vals.is_empty() => f.write_str("Completed:"),
            RunOutcome::Completed(vals) => {
                let parts: Vec<String> = vals.iter().map(|v| v.value.to_string()).collect();
                write!(f, "Completed: {}", parts.join(", "))
            }
            RunOutcome::Trap { kind, message } => write!(f, "Trap({kind}): {message}"),
            RunOutcome::FuelExhausted(n) => write!(f, "FuelExhausted: {n}"),
        }
    }
}

/// Caller errors: the module or arguments don't fit the entry point.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("no function named @{0}")]
    NoEntry(String),
    #[error("@{name} takes ({expected}), got ({got})")]
    Signature {
        name: String,
        expected: String,
        got: String,
    },
    #[error("malformed module: {0}")]
    Malformed(String),
}

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Debug)]
struct Buffer {
    data: Vec<i64>,
    freed: bool,
}

enum PathStep {
    Op(usize),
    Region(usize),
}

enum Stop {
    Fuel,
    /// Path steps are collected innermost-first while unwinding up to the
    /// enclosing function, whose name completes the path.
    Trap {
        kind: TrapKind,
        detail: String,
        steps: Vec<PathStep>,
        function: Option<String>,
    },
}

impl Stop {
    fn at_op(mut self, index: usize) -> Self {
        if let Stop::Trap {
            steps, function: None, ..
        } = &mut self
        {
            steps.push(PathStep::Op(index));
        }
        self
    }

    fn in_region(mut self, index: usize) -> Self {
        if let Stop::Trap {
            steps, function: None, ..
        } = &mut self
        {
            steps.push(PathStep::Region(index));
        }
        self
    }

    fn in_function(mut self, name: &str) -> Self {
        if let Stop::Trap { function: f @ None, .. } = &mut self {
            *f = Some(name.to_string());
        }
        self
    }
}

fn trap(kind: TrapKind, detail: String) -> Stop {
    Stop::Trap {
        kind,
        detail,
        steps: Vec::new(),
        function: None,
    }
}

struct Machine<'m> {
    functions: HashMap<&'m str, &'m Operation>,
    env: Vec<i64>,
    buffers: Vec<Buffer>,
    fuel: u64,
    used: u64,
}

impl<'m> Machine<'m> {
    #[inline]
    fn get(&self, v: &crate::ir::Value) -> i64 {
        self.env[v.id.0 as usize]
    }

    #[inline]
    fn set(&mut self, v: &crate::ir::Value, x: i64) {
        self.env[v.id.0 as usize] = x;
    }

    /// Runs a block and returns its terminator, if any.
    fn block(&mut self, block: &'m Block) -> Result<Option<&'m Operation>, Stop> {
        for (i, op) in block.ops.iter().enumerate() {
            if self.used >= self.fuel {
                return Err(Stop::Fuel);
            }
            self.used += 1;
            if op.kind.is_terminator() {
                return Ok(Some(op));
            }
            self.op(op).map_err(|s| s.at_op(i))?;
        }
        Ok(None)
    }

    fn region(&mut self, op: &'m Operation, index: usize) -> Result<Option<&'m Operation>, Stop> {
        self.block(&op.regions[index].block).map_err(|s| s.in_region(index))
    }

    fn forward(&mut self, from: Option<&'m Operation>, to: &'m [crate::ir::Value]) {
        if let Some(term) = from {
            for (dst, src) in to.iter().zip(&term.operands) {
                let x = self.get(src);
                self.set(dst, x);
            }
        }
    }

    fn buffer(&mut self, handle: i64, access: &str) -> Result<&mut Buffer, Stop> {
        let buf = self
            .buffers
            .get_mut(handle as usize)
            .expect("buffer handles come from alloc");
        if buf.freed {
            return Err(trap(
                TrapKind::UseAfterFree,
                format!("{access} on buffer {handle} after it was released"),
            ));
        }
        Ok(buf)
    }

    fn element(&mut self, op: &Operation, access: &str) -> Result<(usize, usize), Stop> {
        let handle = self.get(&op.operands[op.operands.len() - 2]);
        let index = self.get(&op.operands[op.operands.len() - 1]);
        let len = self.buffer(handle, access)?.data.len();
        if index < 0 || index as usize >= len {
            return Err(trap(
                TrapKind::Oob,
                format!("{access} index {index} outside buffer {handle} of {len} elements"),
            ));
        }
        Ok((handle as usize, index as usize))
    }

    fn op(&mut self, op: &'m Operation) -> Result<(), Stop> {
        match op.kind {
            OpKind::Constant => {
                let v = op.constant_value().expect("verified constant");
                self.set(&op.results[0], v);
            }
            k if k.is_binary_arith() => {
                let ty = op.results[0].ty;
                let (a, b) = (self.get(&op.operands[0]), self.get(&op.operands[1]));
                let r = eval_binary_typed(k, ty, a, b)
                    .map_err(|_| trap(TrapKind::DivByZero, format!("division by zero computing {a} / {b}")))?;
                self.set(&op.results[0], r);
            }
            OpKind::CmpI => {
                let Some(Attribute::Predicate(p)) = op.attr("predicate") else {
                    unreachable!("verified cmpi");
                };
                let ty = op.operands[0].ty;
                let r = compare(*p, ty, self.get(&op.operands[0]), self.get(&op.operands[1]));
                self.set(&op.results[0], r as i64);
            }
            OpKind::Select => {
                let pick = if self.get(&op.operands[0]) != 0 { 1 } else { 2 };
                let x = self.get(&op.operands[pick]);
                self.set(&op.results[0], x);
            }
            OpKind::If => {
                let branch = if self.get(&op.operands[0]) != 0 { 0 } else { 1 };
                let term = self.region(op, branch)?;
                self.forward(term, &op.results);
            }
            OpKind::For => {
                let (lb, ub, step) = (
                    self.get(&op.operands[0]),
                    self.get(&op.operands[1]),
                    self.get(&op.operands[2]),
                );
                let iv = op.regions[0].block.args[0];
                let mut i = lb;
                while i < ub {
                    self.set(&iv, i);
                    self.region(op, 0)?;
                    i = i.wrapping_add(step);
                }
            }
            OpKind::While => loop {
                let cond = self
                    .region(op, 0)?
                    .ok_or(Stop::Fuel)
                    .map(|t| self.get(&t.operands[0]))?;
                if cond == 0 {
                    break;
                }
                self.region(op, 1)?;
            },
            OpKind::Call => {
                let name = op.symbol().unwrap_or_default();
                let callee = self.functions[name];
                let body = &callee.regions[0];
                for (param, arg) in body.block.args.iter().zip(&op.operands) {
                    let x = self.get(arg);
                    self.set(param, x);
                }
                let term = self.block(&body.block).map_err(|s| s.in_function(name))?;
                self.forward(term, &op.results);
            }
            OpKind::Alloc => {
                let Type::MemRef(n) = op.results[0].ty else {
                    unreachable!("verified alloc");
                };
                self.buffers.push(Buffer {
                    data: vec![0; n as usize],
                    freed: false,
                });
                self.set(&op.results[0], self.buffers.len() as i64 - 1);
            }
            OpKind::Load => {
                let (h, i) = self.element(op, "load")?;
                let x = self.buffers[h].data[i];
                self.set(&op.results[0], x);
            }
            OpKind::Store => {
                let (h, i) = self.element(op, "store")?;
                self.buffers[h].data[i] = self.get(&op.operands[0]);
            }
            OpKind::Dealloc => {
                let handle = self.get(&op.operands[0]);
                let buf = &mut self.buffers[handle as usize];
                if buf.freed {
                    return Err(trap(TrapKind::DoubleFree, format!("buffer {handle} released twice")));
                }
                buf.freed = true;
            }
            other => unreachable!("{other} is not executable here"),
        }
        Ok(())
    }
}

fn type_names(tys: impl Iterator<Item = Type>) -> String {
    tys.map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// Runs `entry` on `args` with an execution budget of `fuel` operations.
/// The module must be verifier-clean.
pub fn interpret(module: &Module, entry: &str, args: &[TypedInt], fuel: u64) -> Result<RunOutcome, InterpError> {
    let functions: HashMap<&str, &Operation> = module.functions().filter_map(|f| f.symbol().map(|s| (s, f))).collect();
    let func = *functions
        .get(entry)
        .ok_or_else(|| InterpError::NoEntry(entry.to_string()))?;
    let params = function_arg_types(func);
    let fits = params.len() == args.len() && params.iter().zip(args).all(|(t, a)| *t == a.ty && t.fits(a.value));
    if !fits {
        return Err(InterpError::Signature {
            name: entry.to_string(),
            expected: type_names(params.into_iter()),
            got: type_names(args.iter().map(|a| a.ty)),
        });
    }
    let size = module.max_value_id().map_or(0, |m| m as usize + 1);
    let mut m = Machine {
        functions,
        env: vec![0; size],
        buffers: Vec::new(),
        fuel,
        used: 0,
    };
    let body = &func.regions[0];
    for (param, arg) in body.block.args.iter().zip(args) {
        m.set(param, arg.value);
    }
    Ok(match m.block(&body.block) {
        Ok(Some(ret)) => RunOutcome::Completed(ret.operands.iter().map(|v| TypedInt::new(v.ty, m.get(v))).collect()),
        Ok(None) => return Err(InterpError::Malformed(format!("@{entry} has no terminator"))),
        Err(Stop::Fuel) => RunOutcome::FuelExhausted(fuel),
        Err(Stop::Trap {
            kind,
            detail,
            steps,
            function,
        }) => {
            let mut path = OpPath::function(function.as_deref().unwrap_or(entry));
            for step in steps.iter().rev() {
                match step {
                    PathStep::Op(i) => path.push_op(*i),
                    PathStep::Region(r) => path.push_region(*r),
                }
            }
            RunOutcome::Trap {
                kind,
                message: format!("{kind} at {path}: {detail}"),
            }
        }
    })
}
