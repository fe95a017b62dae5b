//! Pattern syntax: AST, parser, printer and rewrites.

pub mod ast;
pub mod normalize;
pub mod parse;
pub mod print;

pub use ast::{Ast, InstanceId, Regex, MAX_REPEAT_BOUND};
pub use normalize::{
    count_instances, max_bound, normalize, single_class_body, unfold, unfold_instances, unfold_where, InstanceInfo,
    SizeError, DEFAULT_NODE_LIMIT,
};
pub use parse::{parse, parse_class, parse_with, ParseDiagnostics, ParseError, ParseOptions, UnsupportedFeature};
pub use print::{class_to_string, to_pattern};
