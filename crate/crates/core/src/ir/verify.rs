use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{
    function_arg_types, function_result_types, Block, Module, OpKind, OpPath, Operation, Trait, Type, ValueId,
};
use crate::dialects::registry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// Operand not visible at its use: defined later, in a sibling region,
    /// beyond an isolated-from-above boundary, or not at all.
    UseBeforeDef,
    UseTypeMismatch,
    DuplicateValueId,
    Signature,
    MissingTerminator,
    MisplacedTerminator,
    TerminatorTypeMismatch,
    NonFunctionAtTopLevel,
    DuplicateFunction,
    EntryFunction,
    UnknownCallee,
    CallSignatureMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.kind, self.path, self.message)
    }
}

struct Scope {
    defs: HashMap<ValueId, Type>,
    isolated: bool,
}

struct Verifier<'m> {
    violations: Vec<Violation>,
    defined: HashSet<ValueId>,
    scopes: Vec<Scope>,
    /// Functions completed so far, in module order: name -> (args, results).
    functions: HashMap<&'m str, (Vec<Type>, Vec<Type>)>,
}

impl<'m> Verifier<'m> {
    fn report(&mut self, kind: ViolationKind, path: &OpPath, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn define(&mut self, id: ValueId, ty: Type, path: &OpPath) {
        if !self.defined.insert(id) {
            self.report(
                ViolationKind::DuplicateValueId,
                path,
                format!("value {id} defined more than once"),
            );
        }
        self.scopes
            .last_mut()
            .expect("scope pushed before definitions")
            .defs
            .insert(id, ty);
    }

    fn lookup(&self, id: ValueId) -> Option<Type> {
        for scope in self.scopes.iter().rev() {
            if let Some(ty) = scope.defs.get(&id) {
                return Some(*ty);
            }
            if scope.isolated {
                break;
            }
        }
        None
    }

    fn block(&mut self, block: &'m Block, path: &mut OpPath, terminator: Option<OpKind>, isolated: bool) {
        self.scopes.push(Scope {
            defs: HashMap::new(),
            isolated,
        });
        for arg in &block.args {
            self.define(arg.id, arg.ty, path);
        }
        let last = block.ops.len().checked_sub(1);
        for (i, op) in block.ops.iter().enumerate() {
            path.push_op(i);
            if op.kind.is_terminator() && (Some(i) != last || terminator.is_none()) {
                self.report(
                    ViolationKind::MisplacedTerminator,
                    path,
                    format!("{} must be the last op of a region that expects it", op.kind),
                );
            }
            self.op(op, path);
            path.pop();
        }
        if let Some(expected) = terminator {
            match block.ops.last() {
                Some(op) if op.kind == expected => {}
                Some(op) if op.kind.is_terminator() => self.report(
                    ViolationKind::MissingTerminator,
                    path,
                    format!("region must end with {expected}, found {}", op.kind),
                ),
                _ => self.report(
                    ViolationKind::MissingTerminator,
                    path,
                    format!("region must end with {expected}"),
                ),
            }
        }
        self.scopes.pop();
    }

    fn op(&mut self, op: &'m Operation, path: &mut OpPath) {
        for v in &op.operands {
            match self.lookup(v.id) {
                None => self.report(
                    ViolationKind::UseBeforeDef,
                    path,
                    format!("{} uses {} which is not visible here", op.kind, v.id),
                ),
                Some(ty) if ty != v.ty => self.report(
                    ViolationKind::UseTypeMismatch,
                    path,
                    format!("{} is defined as {ty} but used as {}", v.id, v.ty),
                ),
                _ => {}
            }
        }
        if let Err(msg) = registry::check_signature(op) {
            self.report(ViolationKind::Signature, path, msg);
        }
        if op.kind == OpKind::Call {
            self.call(op, path);
        }
        let spec = registry::spec(op.kind);
        let isolated = op.traits().contains(Trait::IsolatedFromAbove);
        for (r, region) in op.regions.iter().enumerate() {
            let is_func = op.kind == OpKind::Func;
            if !is_func {
                path.push_region(r);
            }
            let terminator = spec.regions.get(r).map(|s| s.terminator);
            self.block(&region.block, path, terminator, isolated);
            if let Some(term) = region.block.terminator() {
                let got: Vec<Type> = term.operands.iter().map(|v| v.ty).collect();
                if got != region.result_types {
                    self.report(
                        ViolationKind::TerminatorTypeMismatch,
                        path,
                        format!(
                            "region declares {:?} but {} carries {:?}",
                            region.result_types, term.kind, got
                        ),
                    );
                }
            }
            if !is_func {
                path.pop();
            }
        }
        for v in &op.results {
            self.define(v.id, v.ty, path);
        }
    }

    fn call(&mut self, op: &Operation, path: &OpPath) {
        let Some(callee) = op.symbol() else { return };
        let Some((args, results)) = self.functions.get(callee) else {
            self.report(
                ViolationKind::UnknownCallee,
                path,
                format!("@{callee} is not a previously defined function"),
            );
            return;
        };
        let got_args: Vec<Type> = op.operands.iter().map(|v| v.ty).collect();
        let got_res: Vec<Type> = op.results.iter().map(|v| v.ty).collect();
        if &got_args != args || &got_res != results {
            let msg = format!("call to @{callee} as {got_args:?} -> {got_res:?}, callee is {args:?} -> {results:?}");
            self.report(ViolationKind::CallSignatureMismatch, path, msg);
        }
    }
}

/// Checks every structural invariant of the IR plus the per-kind constraints
/// of the dialect registry. An empty result means the module is well-formed.
pub fn verify_module(module: &Module) -> Vec<Violation> {
    let mut v = Verifier {
        violations: Vec::new(),
        defined: HashSet::new(),
        scopes: Vec::new(),
        functions: HashMap::new(),
    };
    let mut entry_count = 0;
    for (i, op) in module.body.block.ops.iter().enumerate() {
        let name = op.symbol().filter(|_| op.kind == OpKind::Func);
        let mut path = match name {
            Some(n) => OpPath::function(n),
            None => OpPath::module().op(i),
        };
        let Some(name) = name else {
            v.report(
                ViolationKind::NonFunctionAtTopLevel,
                &path,
                format!("{} may not appear at module level", op.kind),
            );
            continue;
        };
        if v.functions.contains_key(name) {
            v.report(
                ViolationKind::DuplicateFunction,
                &path,
                format!("@{name} defined more than once"),
            );
        }
        if name == module.entry {
            entry_count += 1;
            let args = function_arg_types(op);
            if args.is_empty() || !args.iter().all(|t| t.is_integer()) {
                v.report(
                    ViolationKind::EntryFunction,
                    &path,
                    "entry function must take at least one argument, all of integer type",
                );
            }
        }
        v.op(op, &mut path);
        v.functions
            .insert(name, (function_arg_types(op), function_result_types(op)));
    }
    if entry_count != 1 {
        v.report(
            ViolationKind::EntryFunction,
            &OpPath::module(),
            format!("expected exactly one @{} function, found {entry_count}", module.entry),
        );
    }
    v.violations
}
