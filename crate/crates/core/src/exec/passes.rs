//! Optimizer passes. Each pass maps a verifier-clean module to a
//! verifier-clean module; value ids are preserved, so a folded op keeps its
//! result id and a merged op's uses are rewritten to the surviving value.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::scalar::{compare, eval_binary_typed};
use crate::dialects::arith::constant_attr;
use crate::ir::{structural_equal, Attribute, Block, Module, OpKind, Operation, Trait, Type, Value, ValueId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PassId {
    ConstFold,
    Cse,
    Dce,
}

impl PassId {
    pub const ALL: [PassId; 3] = [PassId::ConstFold, PassId::Cse, PassId::Dce];

    pub fn name(self) -> &'static str {
        match self {
            PassId::ConstFold => "constfold",
            PassId::Cse => "cse",
            PassId::Dce => "dce",
        }
    }

    /// Parses a comma-separated pass list such as `constfold,dce`.
    pub fn parse_list(text: &str) -> Result<Vec<PassId>, UnknownName> {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for PassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

impl FromStr for PassId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PassId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

/// Deliberately unsound optimizer behaviors for the differential harness to
/// find. With both flags off every pass preserves semantics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BugInjection {
    /// DCE deletes any unused `scf.while` whose regions have no side
    /// effects, even if it never terminates.
    pub b1_dce_drops_infinite_loops: bool,
    /// ConstFold folds `xori x, x` to 1 instead of 0.
    pub b2_xor_self_misfold: bool,
}

impl BugInjection {
    pub const NONE: BugInjection = BugInjection {
        b1_dce_drops_infinite_loops: false,
        b2_xor_self_misfold: false,
    };
    pub const B1: BugInjection = BugInjection {
        b1_dce_drops_infinite_loops: true,
        b2_xor_self_misfold: false,
    };
    pub const B2: BugInjection = BugInjection {
        b1_dce_drops_infinite_loops: false,
        b2_xor_self_misfold: true,
    };

    pub fn is_none(self) -> bool {
        self == Self::NONE
    }

    /// Parses a comma-separated flag list: `b1`, `b2`, `b1,b2` or `none`.
    pub fn parse_list(text: &str) -> Result<BugInjection, UnknownName> {
        let mut out = BugInjection::NONE;
        for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "b1" => out.b1_dce_drops_infinite_loops = true,
                "b2" => out.b2_xor_self_misfold = true,
                "none" => {}
                other => return Err(UnknownName(other.to_string())),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BugInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Vec::new();
        if self.b1_dce_drops_infinite_loops {
            names.push("b1");
        }
        if self.b2_xor_self_misfold {
            names.push("b2");
        }
        if names.is_empty() {
            names.push("none");
        }
        f.write_str(&names.join(","))
    }
}

pub const DEFAULT_PIPELINE: [PassId; 3] = [PassId::ConstFold, PassId::Cse, PassId::Dce];

/// Maximum rounds of the pass list before `run_pipeline` gives up on a fixpoint.
pub const PIPELINE_ITERATION_CAP: usize = 8;

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub module: Module,
    /// Rounds run, counting the final round that changed nothing.
    pub iterations: usize,
    pub fixpoint: bool,
}

pub fn run_pass(module: &Module, pass: PassId, inject: BugInjection) -> Module {
    let mut out = module.clone();
    match pass {
        PassId::ConstFold => ConstFold::new(inject).block(&mut out.body.block),
        PassId::Cse => Cse::default().block(&mut out.body.block),
        PassId::Dce => dce(&mut out, inject),
    }
    out
}

/// Repeats `passes` in order until a round leaves the module unchanged, at
/// most [`PIPELINE_ITERATION_CAP`] rounds.
pub fn run_pipeline(module: &Module, passes: &[PassId], inject: BugInjection) -> PipelineReport {
    run_pipeline_with_cap(module, passes, inject, PIPELINE_ITERATION_CAP)
}

/// [`run_pipeline`] with an explicit round limit (at least one round runs).
pub fn run_pipeline_with_cap(module: &Module, passes: &[PassId], inject: BugInjection, cap: usize) -> PipelineReport {
    let cap = cap.max(1);
    let mut current = module.clone();
    for round in 1..=cap {
        let next = passes.iter().fold(current.clone(), |m, &p| run_pass(&m, p, inject));
        if structural_equal(&next, &current) {
            return PipelineReport {
                module: next,
                iterations: round,
                fixpoint: true,
            };
        }
        current = next;
    }
    PipelineReport {
        module: current,
        iterations: cap,
        fixpoint: false,
    }
}

/// Follows replacement chains to the surviving value.
fn resolve(subst: &HashMap<ValueId, Value>, mut v: Value) -> Value {
    while let Some(&next) = subst.get(&v.id) {
        v = next;
    }
    v
}

fn substitute(subst: &HashMap<ValueId, Value>, op: &mut Operation) {
    if subst.is_empty() {
        return;
    }
    for v in &mut op.operands {
        *v = resolve(subst, *v);
    }
}

fn make_constant(op: &mut Operation, value: i64) {
    let result = op.results[0];
    *op = Operation::new(OpKind::Constant)
        .with_attr("value", constant_attr(result.ty, value))
        .with_results([result]);
}

struct ConstFold {
    inject: BugInjection,
    constants: HashMap<ValueId, i64>,
    subst: HashMap<ValueId, Value>,
}

impl ConstFold {
    fn new(inject: BugInjection) -> Self {
        ConstFold {
            inject,
            constants: HashMap::new(),
            subst: HashMap::new(),
        }
    }

    fn block(&mut self, block: &mut Block) {
        for op in &mut block.ops {
            substitute(&self.subst, op);
            for region in &mut op.regions {
                self.block(&mut region.block);
            }
            self.fold(op);
            if let Some(v) = op.constant_value() {
                self.constants.insert(op.results[0].id, v);
            }
        }
    }

    fn constant(&self, v: &Value) -> Option<i64> {
        self.constants.get(&v.id).copied()
    }

    fn fold(&mut self, op: &mut Operation) {
        match op.kind {
            OpKind::XorI if op.operands[0].id == op.operands[1].id => {
                let v = if self.inject.b2_xor_self_misfold { 1 } else { 0 };
                make_constant(op, v);
            }
            k if k.is_binary_arith() => {
                let (Some(a), Some(b)) = (self.constant(&op.operands[0]), self.constant(&op.operands[1])) else {
                    return;
                };
                // Division by zero stays in place to trap at run time.
                if let Ok(v) = eval_binary_typed(k, op.results[0].ty, a, b) {
                    make_constant(op, v);
                }
            }
            OpKind::CmpI => {
                let (Some(a), Some(b)) = (self.constant(&op.operands[0]), self.constant(&op.operands[1])) else {
                    return;
                };
                let Some(Attribute::Predicate(p)) = op.attr("predicate") else {
                    return;
                };
                let v = compare(*p, op.operands[0].ty, a, b);
                make_constant(op, v as i64);
            }
            OpKind::Select => {
                if let Some(c) = self.constant(&op.operands[0]) {
                    let chosen = op.operands[if c != 0 { 1 } else { 2 }];
                    match self.constant(&chosen) {
                        Some(v) => make_constant(op, v),
                        None => {
                            self.subst.insert(op.results[0].id, chosen);
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CseKey {
    kind: OpKind,
    operands: Vec<ValueId>,
    attributes: BTreeMap<String, Attribute>,
    result_types: Vec<Type>,
}

/// Merges identical pure region-free ops. The table is per block, so merges
/// never cross a region boundary.
#[derive(Default)]
struct Cse {
    subst: HashMap<ValueId, Value>,
}

fn cse_candidate(op: &Operation) -> bool {
    op.regions.is_empty()
        && !op.kind.is_terminator()
        && !op.traits().contains(Trait::HasSideEffects)
        && op.kind != OpKind::Func
}

impl Cse {
    fn block(&mut self, block: &mut Block) {
        let mut seen: HashMap<CseKey, Vec<Value>> = HashMap::new();
        let ops = std::mem::take(&mut block.ops);
        for mut op in ops {
            substitute(&self.subst, &mut op);
            for region in &mut op.regions {
                self.block(&mut region.block);
            }
            if cse_candidate(&op) {
                let key = CseKey {
                    kind: op.kind,
                    operands: op.operands.iter().map(|v| v.id).collect(),
                    attributes: op.attributes.clone(),
                    result_types: op.results.iter().map(|v| v.ty).collect(),
                };
                if let Some(prev) = seen.get(&key) {
                    for (dup, keep) in op.results.iter().zip(prev) {
                        self.subst.insert(dup.id, *keep);
                    }
                    continue;
                }
                seen.insert(key, op.results.clone());
            }
            block.ops.push(op);
        }
    }
}

fn count_uses(block: &Block, uses: &mut HashMap<ValueId, usize>, constants: &mut HashMap<ValueId, i64>) {
    for op in &block.ops {
        for v in &op.operands {
            *uses.entry(v.id).or_default() += 1;
        }
        if let Some(c) = op.constant_value() {
            constants.insert(op.results[0].id, c);
        }
        for r in &op.regions {
            count_uses(&r.block, uses, constants);
        }
    }
}

struct Dce {
    inject: BugInjection,
    uses: HashMap<ValueId, usize>,
    constants: HashMap<ValueId, i64>,
}

impl Dce {
    /// Running `op` can't trap, loop forever, or touch memory or calls.
    fn harmless(&self, op: &Operation) -> bool {
        match op.kind {
            OpKind::Constant | OpKind::CmpI | OpKind::Select => true,
            OpKind::Yield | OpKind::Condition => true,
            OpKind::DivSI => self.constants.get(&op.operands[1].id).is_some_and(|&d| d != 0),
            k if k.is_binary_arith() => true,
            OpKind::If => self.regions_harmless(op),
            // Only loops that run zero times. Deleting a terminating loop
            // with iterations is sound but can make the optimized program
            // arbitrarily cheaper than the original, which a fuel-bounded
            // comparison can't tell apart from a termination change.
            OpKind::For => {
                op.traits().contains(Trait::AlwaysTerminates) && self.zero_trip(op) && self.regions_harmless(op)
            }
            _ => false,
        }
    }

    fn zero_trip(&self, op: &Operation) -> bool {
        let c = |i: usize| self.constants.get(&op.operands[i].id).copied();
        matches!((c(0), c(1)), (Some(lb), Some(ub)) if lb >= ub)
    }

    fn regions_harmless(&self, op: &Operation) -> bool {
        op.regions.iter().all(|r| r.block.ops.iter().all(|o| self.harmless(o)))
    }

    fn removable(&self, op: &Operation) -> bool {
        if op.kind.is_terminator() || op.kind == OpKind::Func {
            return false;
        }
        if op
            .results
            .iter()
            .any(|r| self.uses.get(&r.id).copied().unwrap_or(0) > 0)
        {
            return false;
        }
        if op.kind == OpKind::While {
            return self.inject.b1_dce_drops_infinite_loops
                && op.results.is_empty()
                && op.regions.iter().all(|r| free_of_side_effects(&r.block));
        }
        self.harmless(op)
    }

    fn sweep(&self, block: &mut Block, removed: &mut bool) {
        let before = block.ops.len();
        block.ops.retain(|op| !self.removable(op));
        *removed |= block.ops.len() != before;
        for op in &mut block.ops {
            for r in &mut op.regions {
                self.sweep(&mut r.block, removed);
            }
        }
    }
}

fn free_of_side_effects(block: &Block) -> bool {
    block.ops.iter().all(|op| {
        !op.traits().contains(Trait::HasSideEffects) && op.regions.iter().all(|r| free_of_side_effects(&r.block))
    })
}

/// Deletes unused ops whose execution is unobservable, repeating until no
/// more become unused. Loops are deleted only when provably terminating.
fn dce(module: &mut Module, inject: BugInjection) {
    loop {
        let mut d = Dce {
            inject,
            uses: HashMap::new(),
            constants: HashMap::new(),
        };
        count_uses(&module.body.block, &mut d.uses, &mut d.constants);
        let mut removed = false;
        d.sweep(&mut module.body.block, &mut removed);
        if !removed {
            return;
        }
    }
}
