//! Piecewise regular algorithm (PRA) data model, text format, validation
//! and reduced dependence graph.

mod ast;
mod parse;
mod print;
mod rdg;
mod validate;

pub use ast::*;
pub use parse::{parse_lin, parse_param_constraint, parse_poly, parse_pra, ParseError};
pub use rdg::{build_rdg, NodeKind, Rdg, RdgEdge, RdgNode};
pub use validate::{validate, Diagnostic, DiagnosticKind};
