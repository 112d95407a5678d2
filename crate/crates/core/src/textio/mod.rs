//! Canonical text form (`.rir` files) and its recursive-descent parser.
//! The grammar is documented in `docs/format.md`.

mod parse;
mod print;

pub use parse::{parse_module, ParseError};
pub use print::print_module;

/// File extension of printed programs.
pub const EXTENSION: &str = "rir";
