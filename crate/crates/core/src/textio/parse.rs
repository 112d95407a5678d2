use thiserror::Error;

use crate::ir::{Attribute, Block, BlockId, Module, OpKind, Operation, Predicate, Region, Type, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Value(u32),
    Str(String),
    Ident(String),
    Int(i64),
    Arrow,
    Punct(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Value(n) => format!("%{n}"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => n.to_string(),
            Tok::Arrow => "`->`".into(),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, expected: &str, found: String| ParseError {
        line,
        column,
        expected: expected.to_string(),
        found,
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        let tok = if c == '%' {
            let digits: String = chars[i + 1..].iter().take_while(|c| c.is_ascii_digit()).collect();
            let n = digits
                .parse()
                .map_err(|_| err(line, col, "value number after `%`", "`%`".into()))?;
            advance(1 + digits.len(), &mut i, &mut col);
            Tok::Value(n)
        } else if c == '"' {
            let body: String = chars[i + 1..].iter().take_while(|&&c| c != '"' && c != '\n').collect();
            let n = body.chars().count();
            if chars.get(i + 1 + n) != Some(&'"') {
                return Err(err(line, col, "closing `\"`", "end of line".into()));
            }
            advance(n + 2, &mut i, &mut col);
            Tok::Str(body)
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(2, &mut i, &mut col);
            Tok::Arrow
        } else if c.is_ascii_digit() || c == '-' {
            let digits: String = chars[i + 1..].iter().take_while(|c| c.is_ascii_digit()).collect();
            let lit = format!("{c}{digits}");
            let n = lit
                .parse()
                .map_err(|_| err(line, col, "integer literal", format!("`{lit}`")))?;
            advance(lit.len(), &mut i, &mut col);
            Tok::Int(n)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let word: String = chars[i..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_' || **c == '.')
                .collect();
            advance(word.len(), &mut i, &mut col);
            Tok::Ident(word)
        } else if "(){},:=^#@<>".contains(c) {
            advance(1, &mut i, &mut col);
            Tok::Punct(c)
        } else {
            return Err(err(line, col, "a token", format!("`{c}`")));
        };
        toks.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    toks.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    next_block: u32,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError {
            line: t.line,
            column: t.column,
            expected: expected.to_string(),
            found: t.tok.describe(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(&format!("`{c}`"))
        }
    }

    fn expect_arrow(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Arrow {
            self.pos += 1;
            Ok(())
        } else {
            self.error("`->`")
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    fn value_number(&mut self) -> PResult<u32> {
        match *self.peek() {
            Tok::Value(n) => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("a value like `%0`"),
        }
    }

    /// Comma-separated, possibly empty list up to (not including) `close`.
    fn list<T>(&mut self, close: char, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if *self.peek() == Tok::Punct(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.eat(',') {
                return Ok(out);
            }
        }
    }

    fn ty(&mut self) -> PResult<Type> {
        let word = self.ident("a type")?;
        Ok(match word.as_str() {
            "i1" => Type::I1,
            "i32" => Type::I32,
            "i64" => Type::I64,
            "index" => Type::Index,
            "memref" => {
                self.expect('<')?;
                let n = match self.bump() {
                    Tok::Int(n) if n > 0 && n <= u32::MAX as i64 => n as u32,
                    _ => {
                        self.pos -= 1;
                        return self.error("a positive buffer size");
                    }
                };
                if self.ident("`xi32`")? != "xi32" {
                    self.pos -= 1;
                    return self.error("`xi32`");
                }
                self.expect('>')?;
                Type::MemRef(n)
            }
            _ => {
                self.pos -= 1;
                return self.error("a type");
            }
        })
    }

    fn type_list(&mut self) -> PResult<Vec<Type>> {
        self.expect('(')?;
        let tys = self.list(')', Self::ty)?;
        self.expect(')')?;
        Ok(tys)
    }

    fn attribute(&mut self) -> PResult<Attribute> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.pos += 1;
                self.expect(':')?;
                let ty = self.ty()?;
                Ok(Attribute::Int { value: v, ty })
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.pos += 1;
                Ok(Attribute::Bool(w == "true"))
            }
            Tok::Punct('#') => {
                self.pos += 1;
                let name = self.ident("a predicate")?;
                match Predicate::from_name(&name) {
                    Some(p) => Ok(Attribute::Predicate(p)),
                    None => {
                        self.pos -= 1;
                        self.error("one of eq, ne, slt, sle, sgt, sge")
                    }
                }
            }
            Tok::Punct('@') => {
                self.pos += 1;
                Ok(Attribute::Symbol(self.ident("a symbol name")?))
            }
            _ => self.error("an attribute value"),
        }
    }

    fn op(&mut self) -> PResult<Operation> {
        let mut result_ids = Vec::new();
        if matches!(self.peek(), Tok::Value(_)) {
            result_ids = self.list('=', Self::value_number)?;
            self.expect('=')?;
        }
        let kind = match self.peek().clone() {
            Tok::Str(name) => match OpKind::from_name(&name) {
                Some(k) => {
                    self.pos += 1;
                    k
                }
                None => return self.error("a registered operation name"),
            },
            _ => return self.error("a quoted operation name"),
        };
        let mut op = Operation::new(kind);
        self.expect('(')?;
        let operand_ids = self.list(')', Self::value_number)?;
        self.expect(')')?;
        if self.eat('{') {
            let attrs = self.list('}', |p| {
                let name = p.ident("an attribute name")?;
                p.expect('=')?;
                Ok((name, p.attribute()?))
            })?;
            self.expect('}')?;
            op.attributes.extend(attrs);
        }
        self.expect(':')?;
        let in_types = self.type_list()?;
        if in_types.len() != operand_ids.len() {
            return self.error(&format!("`->` after {} operand type(s)", operand_ids.len()));
        }
        self.expect_arrow()?;
        let out_types = self.type_list()?;
        if out_types.len() != result_ids.len() {
            self.pos -= 1;
            return self.error(&format!("{} result type(s)", result_ids.len()));
        }
        op.operands = operand_ids
            .iter()
            .zip(&in_types)
            .map(|(&n, &t)| Value::new(n, t))
            .collect();
        op.results = result_ids
            .iter()
            .zip(&out_types)
            .map(|(&n, &t)| Value::new(n, t))
            .collect();
        if self.eat('(') {
            loop {
                op.regions.push(self.region()?);
                if !self.eat(',') {
                    break;
                }
            }
            self.expect(')')?;
        }
        Ok(op)
    }

    fn region(&mut self) -> PResult<Region> {
        self.expect('{')?;
        self.expect('^')?;
        self.expect('(')?;
        let args = self.list(')', |p| {
            let n = p.value_number()?;
            p.expect(':')?;
            Ok(Value::new(n, p.ty()?))
        })?;
        self.expect(')')?;
        self.expect_arrow()?;
        let result_types = self.type_list()?;
        let mut block = Block::new(BlockId(self.next_block));
        self.next_block += 1;
        block.args = args;
        while !matches!(self.peek(), Tok::Punct('}') | Tok::Eof) {
            block.ops.push(self.op()?);
        }
        self.expect('}')?;
        Ok(Region { block, result_types })
    }
}

/// Parses the canonical text form. Syntax errors carry a position; a module
/// that parses may still violate IR invariants, which is for the verifier to
/// report.
pub fn parse_module(text: &str) -> Result<Module, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        next_block: 1,
    };
    let mut module = Module::new();
    while *p.peek() != Tok::Eof {
        let op = p.op()?;
        module.body.block.ops.push(op);
    }
    Ok(module)
}
