use std::collections::HashMap;
use std::fmt::Write as _;

use crate::ir::{Attribute, Block, Module, Operation, Region, Type, Value, ValueId};

/// Renumbers values in textual definition order while printing.
struct Printer {
    out: String,
    names: HashMap<ValueId, u32>,
}

impl Printer {
    fn name(&mut self, id: ValueId) -> u32 {
        let next = self.names.len() as u32;
        *self.names.entry(id).or_insert(next)
    }

    fn values(&mut self, vals: &[Value]) -> String {
        let parts: Vec<String> = vals.iter().map(|v| format!("%{}", self.name(v.id))).collect();
        parts.join(", ")
    }

    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn op(&mut self, op: &Operation, depth: usize) {
        self.indent(depth);
        // Results are numbered before the regions they precede textually.
        if !op.results.is_empty() {
            let r = self.values(&op.results);
            let _ = write!(self.out, "{r} = ");
        }
        let operands = self.values(&op.operands);
        let _ = write!(self.out, "\"{}\"({operands})", op.name());
        if !op.attributes.is_empty() {
            let attrs: Vec<String> = op
                .attributes
                .iter()
                .map(|(k, v)| format!("{k} = {}", attr_text(v)))
                .collect();
            let _ = write!(self.out, " {{{}}}", attrs.join(", "));
        }
        let _ = write!(
            self.out,
            " : {} -> {}",
            type_list(op.operands.iter().map(|v| v.ty)),
            type_list(op.results.iter().map(|v| v.ty))
        );
        if op.regions.is_empty() {
            self.out.push('\n');
            return;
        }
        for (i, region) in op.regions.iter().enumerate() {
            self.out.push_str(if i == 0 { " ({" } else { "}, {" });
            self.region(region, depth + 1);
            self.indent(depth);
        }
        self.out.push_str("})\n");
    }

    fn region(&mut self, region: &Region, depth: usize) {
        let args: Vec<String> = region
            .block
            .args
            .iter()
            .map(|a| format!("%{}: {}", self.name(a.id), a.ty))
            .collect();
        let _ = writeln!(
            self.out,
            " ^({}) -> {}",
            args.join(", "),
            type_list(region.result_types.iter().copied())
        );
        self.block(&region.block, depth);
    }

    fn block(&mut self, block: &Block, depth: usize) {
        for op in &block.ops {
            self.op(op, depth);
        }
    }
}

pub(crate) fn attr_text(a: &Attribute) -> String {
    match a {
        Attribute::Int { value, ty } => format!("{value} : {ty}"),
        Attribute::Bool(b) => b.to_string(),
        Attribute::Predicate(p) => format!("#{}", p.name()),
        Attribute::Symbol(s) => format!("@{s}"),
    }
}

fn type_list(tys: impl Iterator<Item = Type>) -> String {
    let parts: Vec<String> = tys.map(|t| t.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Canonical text: one op per line, two spaces per region level, values
/// renumbered `%0, %1, ...` in definition order, LF endings with a trailing
/// newline.
pub fn print_module(module: &Module) -> String {
    let mut p = Printer {
        out: String::new(),
        names: HashMap::new(),
    };
    p.block(&module.body.block, 0);
    p.out
}
