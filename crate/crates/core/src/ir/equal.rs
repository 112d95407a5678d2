use std::collections::HashMap;

use super::{Block, Module, Operation, Value, ValueId};

#[derive(Default)]
struct Renaming {
    forward: HashMap<ValueId, ValueId>,
    backward: HashMap<ValueId, ValueId>,
}

impl Renaming {
    fn define(&mut self, a: &Value, b: &Value) -> bool {
        if a.ty != b.ty {
            return false;
        }
        match (self.forward.get(&a.id), self.backward.get(&b.id)) {
            (None, None) => {
                self.forward.insert(a.id, b.id);
                self.backward.insert(b.id, a.id);
                true
            }
            (Some(x), Some(y)) => *x == b.id && *y == a.id,
            _ => false,
        }
    }

    fn uses(&self, a: &Value, b: &Value) -> bool {
        if a.ty != b.ty {
            return false;
        }
        match self.forward.get(&a.id) {
            Some(x) => *x == b.id,
            // Dangling on both sides: only identical ids correspond.
            None => !self.backward.contains_key(&b.id) && a.id == b.id,
        }
    }

    fn block(&mut self, a: &Block, b: &Block) -> bool {
        a.args.len() == b.args.len()
            && a.ops.len() == b.ops.len()
            && a.args.iter().zip(&b.args).all(|(x, y)| self.define(x, y))
            && a.ops.iter().zip(&b.ops).all(|(x, y)| self.op(x, y))
    }

    fn op(&mut self, a: &Operation, b: &Operation) -> bool {
        a.kind == b.kind
            && a.attributes == b.attributes
            && a.operands.len() == b.operands.len()
            && a.results.len() == b.results.len()
            && a.regions.len() == b.regions.len()
            && a.operands.iter().zip(&b.operands).all(|(x, y)| self.uses(x, y))
            && a.results.iter().zip(&b.results).all(|(x, y)| self.define(x, y))
            && a.regions
                .iter()
                .zip(&b.regions)
                .all(|(x, y)| x.result_types == y.result_types && self.block(&x.block, &y.block))
    }
}

/// True iff the modules are isomorphic up to a renaming of value ids.
pub fn structural_equal(a: &Module, b: &Module) -> bool {
    a.entry == b.entry && Renaming::default().block(&a.body.block, &b.body.block)
}
