//! The specification language: parsing, validation and printing.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod print;
pub mod resolve;

pub use ast::*;
pub use parser::{parse_spec, Parsed};
pub use print::{pretty_print, print_element, print_expr};
pub use resolve::{resolve_spec, Resolved, ResolvedSpec, ValueKind};
