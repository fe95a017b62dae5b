//! Recursive-descent parser for the POSIX-style pattern dialect.
//!
//! Supported: literals, escapes (`\n \t \r \f \v \e \a \0 \xHH`, escaped
//! punctuation, `\d \D \w \W \s \S`), `.` (every byte), bracket classes
//! with ranges and `[:name:]` items, `|`, groups `(...)` / `(?:...)` /
//! named groups, `*`, `+`, `?`, `{n}`, `{m,n}`, `{m,}` and lazy `?`
//! suffixes. Backreferences, lookaround and the like are reported as
//! unsupported rather than dropped.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use super::ast::{Ast, IdAlloc, Regex, MAX_REPEAT_BOUND};
use crate::charclass::CharClass;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Fold ASCII letters so each matches both cases.
    pub case_insensitive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnsupportedFeature {
    pub name: &'static str,
    pub span: Range<usize>,
}

/// Non-regular or otherwise unsupported constructs found in a pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseDiagnostics {
    pub features: Vec<UnsupportedFeature>,
}

impl ParseDiagnostics {
    /// Name of the first offending feature; used as the rejection reason.
    pub fn primary(&self) -> &'static str {
        self.features.first().map(|f| f.name).unwrap_or("unsupported")
    }
}

impl fmt::Display for ParseDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, feat) in self.features.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} at {}..{}", feat.name, feat.span.start, feat.span.end)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported: {0}")]
    Unsupported(ParseDiagnostics),
}

impl ParseError {
    /// Short machine-friendly reason string.
    pub fn reason(&self) -> String {
        match self {
            ParseError::Syntax { .. } => "syntax".to_string(),
            ParseError::Unsupported(d) => d.primary().to_string(),
        }
    }
}

pub fn parse(text: &str) -> Result<Regex, ParseError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, opts: ParseOptions) -> Result<Regex, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, next_id: 0, opts, notes: Vec::new(), unsupported: Vec::new() };
    let root = p.parse_alt()?;
    if p.pos < p.src.len() {
        // only an unmatched ')' can stop the top-level alternation early
        return Err(p.err("unbalanced parenthesis"));
    }
    if !p.unsupported.is_empty() {
        return Err(ParseError::Unsupported(ParseDiagnostics { features: p.unsupported }));
    }
    Ok(Regex::with_allocator(root, p.next_id, p.notes))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    next_id: u32,
    opts: ParseOptions,
    notes: Vec<String>,
    unsupported: Vec<UnsupportedFeature>,
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.src.get(self.pos + k).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unsupported(&mut self, name: &'static str, start: usize) {
        self.unsupported.push(UnsupportedFeature { name, span: start..self.pos });
    }

    fn class(&self, c: CharClass) -> Ast {
        if self.opts.case_insensitive {
            Ast::Class(c.case_fold())
        } else {
            Ast::Class(c)
        }
    }

    fn parse_alt(&mut self) -> Result<Ast, ParseError> {
        let mut branches = vec![self.parse_concat()?];
        while self.eat(b'|') {
            branches.push(self.parse_concat()?);
        }
        Ok(Ast::alt(branches))
    }

    fn parse_concat(&mut self) -> Result<Ast, ParseError> {
        let mut items = Vec::new();
        while let Some(b) = self.peek() {
            if b == b'|' || b == b')' {
                break;
            }
            items.push(self.parse_repeat()?);
        }
        Ok(Ast::concat(items))
    }

    fn parse_repeat(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        let mut atom = self.parse_atom()?;
        loop {
            let qstart = self.pos;
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    atom = Ast::star(atom);
                }
                Some(b'+') => {
                    self.pos += 1;
                    let copy = IdAlloc(&mut self.next_id).copy_fresh(&atom);
                    atom = Ast::concat(vec![atom, Ast::star(copy)]);
                }
                Some(b'?') => {
                    self.pos += 1;
                    atom = Ast::alt(vec![atom, Ast::Epsilon]);
                }
                Some(b'{') => match self.parse_bounds()? {
                    Some((min, max)) => {
                        atom = self.make_repeat(atom, min, max, qstart);
                    }
                    None => break,
                },
                _ => break,
            }
            if self.pos == start {
                break;
            }
            // lazy suffix does not change the language
            if self.peek() == Some(b'?') {
                self.pos += 1;
            } else if self.peek() == Some(b'+') {
                let s = self.pos;
                self.pos += 1;
                self.unsupported("possessive quantifier", s);
            }
        }
        Ok(atom)
    }

    fn make_repeat(&mut self, atom: Ast, min: u32, max: Option<u32>, qstart: usize) -> Ast {
        match max {
            Some(max) => {
                let id = IdAlloc(&mut self.next_id).fresh();
                Ast::repeat(atom, min, max, id)
            }
            None => {
                self.notes
                    .push(format!("open-ended repetition {{{min},}} at offset {qstart} rewritten as r{{{min}}}r*"));
                if min == 0 {
                    return Ast::star(atom);
                }
                let id = IdAlloc(&mut self.next_id).fresh();
                let copy = IdAlloc(&mut self.next_id).copy_fresh(&atom);
                Ast::concat(vec![Ast::repeat(atom, min, min, id), Ast::star(copy)])
            }
        }
    }

    /// Parses `{n}`, `{m,n}` or `{m,}`. Returns `None` (consuming nothing)
    /// when the brace does not start a well-formed quantifier, in which
    /// case it is an ordinary literal.
    fn parse_bounds(&mut self) -> Result<Option<(u32, Option<u32>)>, ParseError> {
        let start = self.pos;
        let mut i = self.pos + 1;
        let read_num = |i: &mut usize| -> Option<u64> {
            let s = *i;
            let mut v: u64 = 0;
            while let Some(d) = self.src.get(*i).filter(|d| d.is_ascii_digit()) {
                v = v.saturating_mul(10).saturating_add((d - b'0') as u64);
                *i += 1;
            }
            (*i > s).then_some(v)
        };
        let Some(min) = read_num(&mut i) else { return Ok(None) };
        let max = match self.src.get(i) {
            Some(b'}') => Some(min),
            Some(b',') => {
                i += 1;
                let m = read_num(&mut i);
                if self.src.get(i) != Some(&b'}') {
                    return Ok(None);
                }
                m
            }
            _ => return Ok(None),
        };
        self.pos = i + 1;
        if min >= MAX_REPEAT_BOUND as u64 || max.is_some_and(|m| m >= MAX_REPEAT_BOUND as u64) {
            self.pos = start;
            return Err(self.err("repetition bound too large"));
        }
        if let Some(max) = max {
            if min > max {
                self.pos = start;
                return Err(self.err(format!("repetition bounds out of order: {{{min},{max}}}")));
            }
        }
        Ok(Some((min as u32, max.map(|m| m as u32))))
    }

    fn parse_atom(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        let Some(b) = self.peek() else {
            return Err(self.err("unexpected end of pattern"));
        };
        match b {
            b'(' => self.parse_group(),
            b'[' => {
                self.pos += 1;
                let c = self.parse_bracket()?;
                Ok(self.class(c))
            }
            b'.' => {
                self.pos += 1;
                Ok(Ast::Class(CharClass::FULL))
            }
            b'\\' => self.parse_escape(),
            b'*' | b'+' | b'?' => Err(self.err("quantifier has nothing to repeat")),
            b'{' if matches!(self.parse_bounds_probe(), Some(true)) => {
                Err(self.err("quantifier has nothing to repeat"))
            }
            b'^' | b'$' => {
                self.pos += 1;
                self.unsupported("anchor", start);
                Ok(Ast::Epsilon)
            }
            _ => {
                self.pos += 1;
                Ok(self.class(CharClass::singleton(b)))
            }
        }
    }

    fn parse_bounds_probe(&mut self) -> Option<bool> {
        let save = self.pos;
        let r = self.parse_bounds();
        self.pos = save;
        match r {
            Ok(Some(_)) | Err(_) => Some(true),
            Ok(None) => Some(false),
        }
    }

    fn parse_group(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        self.pos += 1;
        if self.eat(b'?') {
            match self.peek() {
                Some(b':') => {
                    self.pos += 1;
                }
                Some(b'=') | Some(b'!') => {
                    self.pos += 1;
                    self.unsupported("lookaround", start);
                }
                Some(b'<') if matches!(self.peek_at(1), Some(b'=') | Some(b'!')) => {
                    self.pos += 2;
                    self.unsupported("lookaround", start);
                }
                Some(b'<') | Some(b'\'') | Some(b'P') => {
                    // named group: skip the name
                    if self.peek() == Some(b'P') {
                        self.pos += 1;
                        if matches!(self.peek(), Some(b'=') | Some(b'>')) {
                            self.unsupported("backreference", start);
                        }
                    }
                    let close = if self.peek() == Some(b'\'') { b'\'' } else { b'>' };
                    self.pos += 1;
                    while let Some(c) = self.peek() {
                        self.pos += 1;
                        if c == close {
                            break;
                        }
                    }
                }
                Some(b'>') => {
                    self.pos += 1;
                    self.unsupported("atomic group", start);
                }
                Some(b'#') => {
                    // comment group
                    while let Some(c) = self.peek() {
                        self.pos += 1;
                        if c == b')' {
                            return Ok(Ast::Epsilon);
                        }
                    }
                    return Err(self.err("unterminated comment group"));
                }
                Some(b'(') => {
                    self.pos += 1;
                    self.unsupported("conditional", start);
                }
                _ => {
                    // inline flags such as (?i) or (?s:...)
                    while let Some(c) = self.peek() {
                        if c == b')' || c == b':' {
                            break;
                        }
                        self.pos += 1;
                    }
                    self.unsupported("inline flags", start);
                    if self.eat(b')') {
                        return Ok(Ast::Epsilon);
                    }
                    self.eat(b':');
                }
            }
        }
        let inner = self.parse_alt()?;
        if !self.eat(b')') {
            return Err(ParseError::Syntax { offset: start, message: "unbalanced parenthesis".into() });
        }
        Ok(inner)
    }

    fn parse_escape(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let Some(e) = self.peek() else {
            return Err(self.err("trailing backslash"));
        };
        self.pos += 1;
        match e {
            b'1'..=b'9' => {
                while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                    self.pos += 1;
                }
                self.unsupported("backreference", start);
                Ok(Ast::Epsilon)
            }
            b'k' | b'g' => {
                if matches!(self.peek(), Some(b'<') | Some(b'{') | Some(b'\'')) || e == b'g' {
                    while let Some(c) = self.peek() {
                        if !(c.is_ascii_alphanumeric() || matches!(c, b'<' | b'{' | b'\'' | b'-')) {
                            break;
                        }
                        self.pos += 1;
                        if matches!(c, b'>' | b'}') {
                            break;
                        }
                    }
                    if matches!(self.peek(), Some(b'>') | Some(b'}') | Some(b'\'')) {
                        self.pos += 1;
                    }
                    self.unsupported("backreference", start);
                    Ok(Ast::Epsilon)
                } else {
                    Err(self.err("unknown escape"))
                }
            }
            b'b' | b'B' => {
                self.unsupported("word boundary", start);
                Ok(Ast::Epsilon)
            }
            b'A' | b'z' | b'Z' | b'G' => {
                self.unsupported("anchor", start);
                Ok(Ast::Epsilon)
            }
            b'Q' => {
                // quoted literal run up to \E
                let mut items = Vec::new();
                while self.pos < self.src.len() {
                    if self.src[self.pos] == b'\\' && self.peek_at(1) == Some(b'E') {
                        self.pos += 2;
                        return Ok(Ast::concat(items));
                    }
                    items.push(self.class(CharClass::singleton(self.src[self.pos])));
                    self.pos += 1;
                }
                Ok(Ast::concat(items))
            }
            _ => {
                self.pos -= 1;
                let c = self.escape_class()?;
                Ok(self.class(c))
            }
        }
    }

    /// Escape body after the backslash, valid both inside and outside
    /// brackets. Leaves `pos` after the escape.
    fn escape_class(&mut self) -> Result<CharClass, ParseError> {
        let e = self.peek().ok_or_else(|| self.err("trailing backslash"))?;
        self.pos += 1;
        let single = |b: u8| Ok(CharClass::singleton(b));
        match e {
            b'n' => single(b'\n'),
            b't' => single(b'\t'),
            b'r' => single(b'\r'),
            b'f' => single(0x0c),
            b'v' => single(0x0b),
            b'a' => single(0x07),
            b'e' => single(0x1b),
            b'0' => single(0),
            b'x' => {
                let braced = self.eat(b'{');
                let s = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_hexdigit()) && (braced || self.pos - s < 2) {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[s..self.pos]).unwrap_or("");
                if digits.is_empty() || (!braced && digits.len() != 2) {
                    return Err(self.err("malformed \\x escape"));
                }
                if braced && !self.eat(b'}') {
                    return Err(self.err("unterminated \\x{...} escape"));
                }
                let v = u32::from_str_radix(digits, 16).map_err(|_| self.err("malformed \\x escape"))?;
                if v > 0xff {
                    return Err(self.err("\\x escape above 0xFF"));
                }
                single(v as u8)
            }
            b'd' => Ok(digit()),
            b'D' => Ok(digit().complement()),
            b'w' => Ok(word()),
            b'W' => Ok(word().complement()),
            b's' => Ok(space()),
            b'S' => Ok(space().complement()),
            b'h' => Ok(CharClass::from_bytes(*b" \t")),
            b'H' => Ok(CharClass::from_bytes(*b" \t").complement()),
            c if !c.is_ascii_alphanumeric() => single(c),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("unknown escape \\{}", e as char)))
            }
        }
    }

    fn parse_bracket(&mut self) -> Result<CharClass, ParseError> {
        let start = self.pos - 1;
        let negated = self.eat(b'^');
        let mut set = CharClass::EMPTY;
        let mut first = true;
        loop {
            let Some(b) = self.peek() else {
                return Err(ParseError::Syntax { offset: start, message: "unbalanced bracket".into() });
            };
            if b == b']' && !first {
                self.pos += 1;
                break;
            }
            first = false;
            if b == b'[' && self.peek_at(1) == Some(b':') {
                if let Some(c) = self.posix_class() {
                    set = set.union(&c);
                    continue;
                }
            }
            let lo = self.bracket_item()?;
            let is_range = self.peek() == Some(b'-') && self.peek_at(1).is_some_and(|c| c != b']');
            match lo {
                Item::Byte(lo) if is_range => {
                    self.pos += 1;
                    match self.bracket_item()? {
                        Item::Byte(hi) if hi >= lo => set = set.union(&CharClass::range(lo, hi)),
                        Item::Byte(_) => return Err(self.err("character range out of order")),
                        Item::Set(_) => return Err(self.err("invalid range endpoint")),
                    }
                }
                Item::Byte(b) => set.insert(b),
                Item::Set(c) => set = set.union(&c),
            }
        }
        if self.opts.case_insensitive {
            set = set.case_fold();
        }
        let set = if negated { set.complement() } else { set };
        if set.is_empty() {
            return Err(ParseError::Syntax { offset: start, message: "empty character class".into() });
        }
        Ok(set)
    }

    fn bracket_item(&mut self) -> Result<Item, ParseError> {
        let b = self.peek().ok_or_else(|| self.err("unbalanced bracket"))?;
        if b == b'\\' {
            self.pos += 1;
            let c = self.escape_class()?;
            return Ok(if c.len() == 1 { Item::Byte(c.min_byte().unwrap()) } else { Item::Set(c) });
        }
        if b >= 0x80 {
            return Err(self.err("non-ASCII character in bracket class"));
        }
        self.pos += 1;
        Ok(Item::Byte(b))
    }

    fn posix_class(&mut self) -> Option<CharClass> {
        let rest = &self.src[self.pos + 2..];
        let end = rest.windows(2).position(|w| w == b":]")?;
        let name = std::str::from_utf8(&rest[..end]).ok()?;
        let c = match name {
            "alpha" => alpha(),
            "digit" => digit(),
            "alnum" => alpha().union(&digit()),
            "upper" => CharClass::range(b'A', b'Z'),
            "lower" => CharClass::range(b'a', b'z'),
            "space" => space(),
            "blank" => CharClass::from_bytes(*b" \t"),
            "punct" => CharClass::range(0x21, 0x7e).intersect(&alpha().union(&digit()).complement()),
            "xdigit" => digit().union(&CharClass::range(b'a', b'f')).union(&CharClass::range(b'A', b'F')),
            "print" => CharClass::range(0x20, 0x7e),
            "graph" => CharClass::range(0x21, 0x7e),
            "cntrl" => CharClass::range(0, 0x1f).union(&CharClass::singleton(0x7f)),
            "word" => word(),
            "ascii" => CharClass::range(0, 0x7f),
            _ => return None,
        };
        self.pos += 2 + end + 2;
        Some(c)
    }
}

enum Item {
    Byte(u8),
    Set(CharClass),
}

fn digit() -> CharClass {
    CharClass::range(b'0', b'9')
}

fn alpha() -> CharClass {
    CharClass::range(b'a', b'z').union(&CharClass::range(b'A', b'Z'))
}

fn word() -> CharClass {
    alpha().union(&digit()).union(&CharClass::singleton(b'_'))
}

fn space() -> CharClass {
    CharClass::from_bytes([b' ', b'\t', b'\n', b'\r', 0x0b, 0x0c])
}

/// Parses a standalone class expression such as `[a-c]`, `.`, `\d` or a
/// single (possibly escaped) byte. Used by the IR loader for symbol sets.
pub fn parse_class(text: &str) -> Result<CharClass, ParseError> {
    let r = parse(text)?;
    match r.root {
        Ast::Class(c) => Ok(c),
        _ => Err(ParseError::Syntax { offset: 0, message: format!("not a single class: {text:?}") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::InstanceId;

    fn c(s: &[u8]) -> Ast {
        Ast::Class(CharClass::from_bytes(s.iter().copied()))
    }

    #[test]
    fn counted_group_example() {
        let r = parse("a(bc){1,3}d").unwrap();
        let expected =
            Ast::Concat(vec![c(b"a"), Ast::repeat(Ast::Concat(vec![c(b"b"), c(b"c")]), 1, 3, InstanceId(0)), c(b"d")]);
        assert_eq!(r.root, expected);
    }

    #[test]
    fn single_literal() {
        assert_eq!(parse("a").unwrap().root, c(b"a"));
    }

    #[test]
    fn reversed_bounds_are_a_syntax_error() {
        assert!(matches!(parse("x{3,2}"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn backreference_is_reported_not_dropped() {
        match parse("(a)b\\1") {
            Err(ParseError::Unsupported(d)) => {
                assert_eq!(d.primary(), "backreference");
                assert_eq!(d.features[0].span, 4..6);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        assert_eq!(parse("(?=a)b").unwrap_err().reason(), "lookaround");
        assert_eq!(parse("(?<!a)b").unwrap_err().reason(), "lookaround");
    }

    #[test]
    fn unbalanced_brackets() {
        assert!(matches!(parse("(ab"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("ab)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("[ab"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn desugaring_of_plus_and_question() {
        let r = parse("a+b?").unwrap();
        let expected = Ast::Concat(vec![c(b"a"), Ast::star(c(b"a")), Ast::Alt(vec![c(b"b"), Ast::Epsilon])]);
        assert_eq!(r.root, expected);
    }

    #[test]
    fn open_ended_repetition_is_rewritten_and_noted() {
        let r = parse("a{2,}").unwrap();
        assert_eq!(r.root, Ast::Concat(vec![Ast::repeat(c(b"a"), 2, 2, InstanceId(0)), Ast::star(c(b"a"))]));
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn brace_without_quantifier_is_literal() {
        assert_eq!(parse("a{x").unwrap().root, Ast::Concat(vec![c(b"a"), c(b"{"), c(b"x")]));
        assert_eq!(parse("a{,3}").unwrap().root.class_count(), 5);
    }

    #[test]
    fn classes_and_escapes() {
        assert_eq!(parse("[a-c]").unwrap().root, c(b"abc"));
        assert_eq!(parse("[^a]").unwrap().root, Ast::Class(CharClass::singleton(b'a').complement()));
        assert_eq!(parse("\\x41").unwrap().root, c(b"A"));
        assert_eq!(parse("[]a]").unwrap().root, c(b"]a"));
        assert_eq!(parse("[a-]").unwrap().root, c(b"a-"));
        assert_eq!(parse("\\.").unwrap().root, c(b"."));
        assert_eq!(parse("[[:digit:]x]").unwrap().root, c(b"0123456789x"));
        assert!(parse(".").unwrap().root == Ast::Class(CharClass::FULL));
        assert!(parse("[^\\x00-\\xff]").is_err());
    }

    #[test]
    fn case_insensitive_option_folds_letters() {
        let r = parse_with("a[^b]", ParseOptions { case_insensitive: true }).unwrap();
        let expected = Ast::Concat(vec![c(b"aA"), Ast::Class(CharClass::from_bytes(*b"bB").complement())]);
        assert_eq!(r.root, expected);
    }

    #[test]
    fn instance_ids_follow_quantifier_order() {
        let r = parse("(a{2}){3}b{4}").unwrap();
        let mut ids = Vec::new();
        r.root.walk(&mut |n| {
            if let Ast::Repeat { id, max, .. } = n {
                ids.push((*max, id.0));
            }
        });
        assert_eq!(ids, vec![(3, 1), (2, 0), (4, 2)]);
        assert_eq!(r.next_instance(), 3);
    }
}
