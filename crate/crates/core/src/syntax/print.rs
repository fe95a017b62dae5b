//! Pretty-printer emitting the dialect accepted by [`super::parse`].

use std::fmt::Write;

use super::ast::Ast;
use crate::charclass::CharClass;

const META: &[u8] = b"\\.[](){}|*+?^$";

pub fn to_pattern(ast: &Ast) -> String {
    let mut out = String::new();
    write_alt(ast, &mut out);
    out
}

fn write_alt(ast: &Ast, out: &mut String) {
    match ast {
        Ast::Alt(branches) => {
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                write_concat(b, out);
            }
        }
        other => write_concat(other, out),
    }
}

fn write_concat(ast: &Ast, out: &mut String) {
    match ast {
        Ast::Concat(items) => {
            for item in items {
                match item {
                    Ast::Alt(_) | Ast::Concat(_) => {
                        out.push('(');
                        write_alt(item, out);
                        out.push(')');
                    }
                    _ => write_postfix(item, out),
                }
            }
        }
        Ast::Alt(_) => {
            out.push('(');
            write_alt(ast, out);
            out.push(')');
        }
        other => write_postfix(other, out),
    }
}

fn write_postfix(ast: &Ast, out: &mut String) {
    match ast {
        Ast::Star(child) => {
            write_atom(child, out);
            out.push('*');
        }
        Ast::Repeat { child, min, max, .. } => {
            write_atom(child, out);
            if min == max {
                let _ = write!(out, "{{{min}}}");
            } else {
                let _ = write!(out, "{{{min},{max}}}");
            }
        }
        other => write_atom(other, out),
    }
}

fn write_atom(ast: &Ast, out: &mut String) {
    match ast {
        Ast::Epsilon => out.push_str("()"),
        Ast::Class(c) => out.push_str(&class_to_string(c)),
        other => {
            out.push('(');
            write_alt(other, out);
            out.push(')');
        }
    }
}

fn push_byte(b: u8, in_bracket: bool, out: &mut String) {
    let special = if in_bracket { b"\\]^-[".contains(&b) } else { META.contains(&b) };
    if special {
        out.push('\\');
        out.push(b as char);
    } else if b.is_ascii_graphic() || b == b' ' {
        out.push(b as char);
    } else {
        let _ = write!(out, "\\x{b:02x}");
    }
}

fn push_ranges(ranges: &[(u8, u8)], out: &mut String) {
    for &(lo, hi) in ranges {
        push_byte(lo, true, out);
        if hi > lo {
            if hi > lo + 1 {
                out.push('-');
            }
            push_byte(hi, true, out);
        }
    }
}

/// Renders a class as a single atom: `.`, a (possibly escaped) byte, or a
/// bracket expression, choosing the shorter of the plain and negated forms.
pub fn class_to_string(c: &CharClass) -> String {
    let mut out = String::new();
    if c.is_full() {
        out.push('.');
        return out;
    }
    if c.len() == 1 {
        push_byte(c.min_byte().unwrap(), false, &mut out);
        return out;
    }
    let pos = c.ranges();
    let neg = c.complement().ranges();
    out.push('[');
    if !neg.is_empty() && neg.len() < pos.len() {
        out.push('^');
        push_ranges(&neg, &mut out);
    } else {
        push_ranges(&pos, &mut out);
    }
    out.push(']');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse;

    fn rt(s: &str) -> String {
        to_pattern(&parse(s).unwrap().root)
    }

    #[test]
    fn prints_basic_forms() {
        assert_eq!(rt("a(bc){1,3}d"), "a(bc){1,3}d");
        assert_eq!(rt("[^a]x{3}"), "[^a]x{3}");
        assert_eq!(rt("a|b()"), "a|b()");
        assert_eq!(rt("(a|b)*c"), "(a|b)*c");
        assert_eq!(rt("\\{\\x00"), "\\{\\x00");
        assert_eq!(rt("[a-c\\]-]"), "[\\-\\]a-c]");
    }

    #[test]
    fn reparse_is_structural_identity() {
        for s in ["(a{2}){3}", "a+b?", "x{2,}", ".*[ab]{1,4}", "(?:ab|c)*", "[\\x00-\\x1f]"] {
            let a = parse(s).unwrap();
            let b = parse(&to_pattern(&a.root)).unwrap();
            assert_eq!(a.root, b.root, "{s}");
        }
    }
}
