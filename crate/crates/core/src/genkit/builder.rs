use std::collections::{BTreeMap, HashMap};

use super::rng::SplitMix64;
use super::{GenConfig, GenSuite};
use crate::dialects::registry::check_signature;
use crate::ir::{Block, BlockId, OpKind, Operation, Region, Type, Value, ValueId};

/// Result of asking a generator for an operation at the insertion point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenOutcome {
    /// The op is attached at `index` of block `block`.
    Inserted {
        block: BlockId,
        index: usize,
    },
    NotApplicable,
}

impl GenOutcome {
    pub fn is_inserted(self) -> bool {
        matches!(self, GenOutcome::Inserted { .. })
    }
}

/// Per-kind attempt counters collected by the selection loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AttemptCounts {
    pub chosen: u64,
    pub generated: u64,
    /// Successful attempts whose op produced an `i1` result.
    pub produced_bool: u64,
}

/// Signature of a completed function, available as a call target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSig {
    pub name: String,
    pub args: Vec<Type>,
    pub results: Vec<Type>,
}

#[derive(Debug)]
struct Frame {
    block: Block,
    /// Values of enclosing frames are invisible from here.
    isolated: bool,
}

/// Rollback point covering everything a failed generator may have touched.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot {
    frames: usize,
    ops_in_top: usize,
    ops_created: u32,
    retired: usize,
    functions: usize,
}

/// The IR builder: owns the module under construction, the insertion point
/// (always the end of the innermost open block), budgets and the RNG.
pub struct Builder<'a> {
    pub config: &'a GenConfig,
    suite: &'a GenSuite,
    pub rng: SplitMix64,
    frames: Vec<Frame>,
    next_value: u32,
    next_block: u32,
    ops_created: u32,
    constants: HashMap<ValueId, i64>,
    retired: Vec<ValueId>,
    functions: Vec<FunctionSig>,
    /// Number of top-level functions this run will produce.
    pub planned_functions: u32,
    counts: BTreeMap<OpKind, AttemptCounts>,
    insertion_log: Option<Vec<(BlockId, usize)>>,
}

impl<'a> Builder<'a> {
    pub fn new(config: &'a GenConfig, suite: &'a GenSuite) -> Self {
        Builder {
            config,
            suite,
            rng: SplitMix64::new(config.seed),
            frames: vec![Frame {
                block: Block::new(BlockId(0)),
                isolated: true,
            }],
            next_value: 0,
            next_block: 1,
            ops_created: 0,
            constants: HashMap::new(),
            retired: Vec::new(),
            functions: Vec::new(),
            planned_functions: 1,
            counts: BTreeMap::new(),
            insertion_log: None,
        }
    }

    /// Records every attach position, for insertion-point auditing.
    pub fn trace_insertions(&mut self) {
        self.insertion_log = Some(Vec::new());
    }

    pub fn insertion_log(&self) -> &[(BlockId, usize)] {
        self.insertion_log.as_deref().unwrap_or(&[])
    }

    pub fn suite(&self) -> &'a GenSuite {
        self.suite
    }

    /// Nesting depth of the insertion block (module level is 0).
    pub fn depth(&self) -> u32 {
        (self.frames.len() - 1) as u32
    }

    pub fn at_top_level(&self) -> bool {
        self.frames.len() == 1
    }

    /// Whether a generator here may open a nested region.
    pub fn can_open_region(&self) -> bool {
        self.depth() < self.config.max_region_depth
    }

    pub fn ops_created(&self) -> u32 {
        self.ops_created
    }

    pub fn budget_left(&self) -> u32 {
        self.config.max_total_ops.saturating_sub(self.ops_created)
    }

    /// Claims budget for `n` non-terminator ops; false (and no change) if
    /// that would exceed `max_total_ops`.
    pub fn reserve(&mut self, n: u32) -> bool {
        if self.budget_left() < n {
            return false;
        }
        self.ops_created += n;
        true
    }

    pub fn current_block(&self) -> &Block {
        &self.frames.last().expect("builder always has a frame").block
    }

    pub fn fresh_value(&mut self, ty: Type) -> Value {
        let v = Value::new(self.next_value, ty);
        self.next_value += 1;
        v
    }

    pub fn fresh_values(&mut self, tys: &[Type]) -> Vec<Value> {
        tys.iter().map(|&t| self.fresh_value(t)).collect()
    }

    /// All values visible at the insertion point, innermost block first and in
    /// definition order within a block, stopping at an isolated-from-above
    /// boundary. Values defined inside nested regions are never visible.
    pub fn visible_values(&self, filter: Option<Type>) -> Vec<Value> {
        let mut out = Vec::new();
        for frame in self.frames.iter().rev() {
            let block = &frame.block;
            let defs = block
                .args
                .iter()
                .chain(block.ops.iter().flat_map(|op| op.results.iter()));
            out.extend(defs.filter(|v| filter.is_none_or(|t| v.ty == t)).copied());
            if frame.isolated {
                break;
            }
        }
        out
    }

    /// Uniform pick among visible values of `ty`; one RNG draw when any exist.
    pub fn sample_value(&mut self, ty: Type) -> Option<Value> {
        let vals = self.visible_values(Some(ty));
        self.rng.choose(&vals).copied()
    }

    /// Visible values satisfying `pred` that have not been retired.
    pub fn live_values(&self, pred: impl Fn(&Value) -> bool) -> Vec<Value> {
        self.visible_values(None)
            .into_iter()
            .filter(|v| pred(v) && !self.retired.contains(&v.id))
            .collect()
    }

    pub fn sample_live(&mut self, pred: impl Fn(&Value) -> bool) -> Option<Value> {
        let vals = self.live_values(pred);
        self.rng.choose(&vals).copied()
    }

    /// Excludes a value from `live_values` for the rest of the run (e.g. a
    /// deallocated buffer).
    pub fn retire(&mut self, id: ValueId) {
        self.retired.push(id);
    }

    pub fn is_retired(&self, id: ValueId) -> bool {
        self.retired.contains(&id)
    }

    /// Integer value of `id` if it is the result of an `arith.constant`.
    pub fn constant_of(&self, id: ValueId) -> Option<i64> {
        self.constants.get(&id).copied()
    }

    pub fn completed_functions(&self) -> &[FunctionSig] {
        &self.functions
    }

    pub fn register_function(&mut self, sig: FunctionSig) {
        self.functions.push(sig);
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            frames: self.frames.len(),
            ops_in_top: self.current_block().ops.len(),
            ops_created: self.ops_created,
            retired: self.retired.len(),
            functions: self.functions.len(),
        }
    }

    /// Discards everything created since `snap`, including open regions.
    /// RNG draws are not replayed.
    pub fn rollback(&mut self, snap: Snapshot) {
        self.frames.truncate(snap.frames);
        let top = &mut self.frames.last_mut().unwrap().block;
        top.ops.truncate(snap.ops_in_top);
        self.ops_created = snap.ops_created;
        self.retired.truncate(snap.retired);
        self.functions.truncate(snap.functions);
    }

    /// Opens a new single-block region and moves the insertion point into it.
    /// Returns the block arguments.
    pub fn enter_region(&mut self, arg_types: &[Type], isolated: bool) -> Vec<Value> {
        let args = self.fresh_values(arg_types);
        let mut block = Block::new(BlockId(self.next_block));
        self.next_block += 1;
        block.args = args.clone();
        self.frames.push(Frame { block, isolated });
        args
    }

    /// Closes the innermost region. Its result types are fixed retrospectively
    /// from the terminator's operands.
    pub fn exit_region(&mut self) -> Region {
        assert!(self.frames.len() > 1, "exit_region without enter_region");
        let frame = self.frames.pop().unwrap();
        let result_types = frame
            .block
            .terminator()
            .map(|t| t.operands.iter().map(|v| v.ty).collect())
            .unwrap_or_default();
        Region {
            block: frame.block,
            result_types,
        }
    }

    /// Checks `op` against its kind's constraints and the visibility of its
    /// operands, then attaches it at the insertion point. Nothing is attached
    /// on failure.
    pub fn create_checked(&mut self, op: Operation) -> GenOutcome {
        if check_signature(&op).is_err() {
            return GenOutcome::NotApplicable;
        }
        let visible = self.visible_values(None);
        if !op.operands.iter().all(|v| visible.contains(v)) {
            return GenOutcome::NotApplicable;
        }
        if let Some(c) = op.constant_value() {
            self.constants.insert(op.results[0].id, c);
        }
        let frame = self.frames.last_mut().unwrap();
        let block = frame.block.id;
        let index = frame.block.ops.len();
        frame.block.ops.push(op);
        if let Some(log) = &mut self.insertion_log {
            log.push((block, index));
        }
        GenOutcome::Inserted { block, index }
    }

    /// Runs the generator for `kind`, rolling back fully if it fails.
    pub fn try_generate(&mut self, kind: OpKind) -> GenOutcome {
        let Some(gen) = self.suite.gen_for(kind) else {
            return GenOutcome::NotApplicable;
        };
        let snap = self.snapshot();
        let outcome = gen.generate(self);
        if !outcome.is_inserted() {
            self.rollback(snap);
        }
        outcome
    }

    /// The selection-pool loop: sample a weighted op, try it, drop it from the
    /// pool on failure, reset the pool on success and then stop with
    /// probability `p_stop`. Returns the number of successful insertions.
    pub fn fill_block(&mut self) -> u32 {
        let suite = self.suite;
        let full: Vec<(OpKind, f64)> = suite
            .pooled_kinds()
            .map(|k| (k, self.config.weight(k)))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        let mut pool = full.clone();
        let mut inserted = 0;
        loop {
            if pool.is_empty()
                || self.current_block().ops.len() >= self.config.max_ops_per_block as usize
                || self.budget_left() == 0
            {
                break;
            }
            let weights: Vec<f64> = pool.iter().map(|(_, w)| *w).collect();
            let pick = self
                .rng
                .choose_weighted(&weights)
                .expect("pool holds only positive weights");
            let kind = pool[pick].0;
            self.counts.entry(kind).or_default().chosen += 1;
            match self.try_generate(kind) {
                GenOutcome::Inserted { index, .. } => {
                    let produced_bool = self.current_block().ops[index].results.iter().any(|v| v.ty == Type::I1);
                    let c = self.counts.entry(kind).or_default();
                    c.generated += 1;
                    c.produced_bool += produced_bool as u64;
                    inserted += 1;
                    pool.clone_from(&full);
                    if self.rng.bernoulli(self.config.p_stop) {
                        break;
                    }
                }
                GenOutcome::NotApplicable => {
                    pool.remove(pick);
                }
            }
        }
        inserted
    }

    pub fn attempt_counts(&self) -> &BTreeMap<OpKind, AttemptCounts> {
        &self.counts
    }

    pub(crate) fn into_parts(mut self) -> (Block, BTreeMap<OpKind, AttemptCounts>) {
        assert_eq!(self.frames.len(), 1, "unclosed region at end of generation");
        let frame = self.frames.pop().unwrap();
        (frame.block, self.counts)
    }
}
