use std::fmt;

use super::{Block, Module, OpKind, Operation};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Segment {
    Root(String),
    Op(usize),
    Region(usize),
}

/// Location of an operation, printed as e.g. `main/body/op[3]/region[0]/op[1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpPath {
    segments: Vec<Segment>,
}

impl OpPath {
    pub fn function(name: &str) -> Self {
        OpPath {
            segments: vec![Segment::Root(name.to_string())],
        }
    }

    pub fn module() -> Self {
        Self::function("module")
    }

    pub fn push_op(&mut self, index: usize) {
        self.segments.push(Segment::Op(index));
    }

    pub fn push_region(&mut self, index: usize) {
        self.segments.push(Segment::Region(index));
    }

    pub fn pop(&mut self) {
        self.segments.pop();
    }

    pub fn op(&self, index: usize) -> OpPath {
        let mut p = self.clone();
        p.push_op(index);
        p
    }

    pub fn region(&self, index: usize) -> OpPath {
        let mut p = self.clone();
        p.push_region(index);
        p
    }
}

impl fmt::Display for OpPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut at_function_root = false;
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            match seg {
                Segment::Root(name) => {
                    f.write_str(name)?;
                    at_function_root = name != "module";
                }
                Segment::Op(n) => {
                    // The function body is its only region.
                    if at_function_root {
                        f.write_str("body/")?;
                        at_function_root = false;
                    }
                    write!(f, "op[{n}]")?;
                }
                Segment::Region(n) => {
                    at_function_root = false;
                    write!(f, "region[{n}]")?;
                }
            }
        }
        Ok(())
    }
}

/// Pre-order traversal of every operation, including nested regions.
/// Returns the number of operations visited.
pub fn walk<F>(module: &Module, mut visit: F) -> usize
where
    F: FnMut(&Operation, &OpPath),
{
    let mut count = 0;
    for (i, op) in module.body.block.ops.iter().enumerate() {
        let mut path = match (op.kind, op.symbol()) {
            (OpKind::Func, Some(name)) => OpPath::function(name),
            _ => OpPath::module().op(i),
        };
        count += 1;
        visit(op, &path);
        for (r, region) in op.regions.iter().enumerate() {
            if op.kind != OpKind::Func {
                path.push_region(r);
            }
            count += walk_block(&region.block, &mut path, &mut visit);
            if op.kind != OpKind::Func {
                path.pop();
            }
        }
    }
    count
}

fn walk_block<F>(block: &Block, path: &mut OpPath, visit: &mut F) -> usize
where
    F: FnMut(&Operation, &OpPath),
{
    let mut count = 0;
    for (i, op) in block.ops.iter().enumerate() {
        path.push_op(i);
        count += 1;
        visit(op, path);
        for (r, region) in op.regions.iter().enumerate() {
            path.push_region(r);
            count += walk_block(&region.block, path, visit);
            path.pop();
        }
        path.pop();
    }
    count
}

/// Mutable pre-order traversal; the visitor sees each op before its regions.
pub fn walk_mut<F>(module: &mut Module, mut visit: F)
where
    F: FnMut(&mut Operation),
{
    fn go<F: FnMut(&mut Operation)>(block: &mut Block, visit: &mut F) {
        for op in &mut block.ops {
            visit(op);
            for region in &mut op.regions {
                go(&mut region.block, visit);
            }
        }
    }
    go(&mut module.body.block, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_formatting() {
        let p = OpPath::function("main").op(3).region(0).op(1);
        assert_eq!(p.to_string(), "main/body/op[3]/region[0]/op[1]");
        assert_eq!(OpPath::function("main").to_string(), "main");
        assert_eq!(OpPath::module().op(2).to_string(), "module/op[2]");
    }

    #[test]
    fn empty_module_visits_nothing() {
        assert_eq!(walk(&Module::new(), |_, _| {}), 0);
    }
}
