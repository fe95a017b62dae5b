//! Rule-file ingestion.
//!
//! One pattern per line; blank lines and lines starting with `#` are
//! comments. A pattern may be wrapped as `/body/flags`, and a Snort-style
//! rule line contributes the pattern of its `pcre:"..."` option. Patterns
//! search the stream: unless they start with `^` they are prefixed with
//! `.*`. Accepted flags: `i` (ASCII case folding) and `s` (no effect, `.`
//! already matches every byte); `m` only when the pattern is unanchored.

use serde::Serialize;

use crate::syntax::{parse_with, ParseOptions, Regex};

#[derive(Clone, Debug)]
pub struct Rule {
    /// Ordinal among non-comment lines, rejected ones included.
    pub id: u32,
    pub line: usize,
    /// The pattern as written, without wrapper and flags.
    pub pattern: String,
    pub flags: String,
    pub anchored: bool,
    /// The parsed search pattern.
    pub regex: Regex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejected {
    pub id: u32,
    pub line: usize,
    pub text: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Ruleset {
    pub name: String,
    pub rules: Vec<Rule>,
    pub rejected: Vec<Rejected>,
}

impl Ruleset {
    /// Rule lines seen, accepted or not.
    pub fn total(&self) -> usize {
        self.rules.len() + self.rejected.len()
    }
}

/// Extracts the quoted value of a `pcre:` option.
fn snort_pcre(line: &str) -> Option<&str> {
    let start = line.find("pcre:\"")? + "pcre:\"".len();
    let rest = &line[start..];
    let bytes = rest.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some(&rest[..i]),
            _ => i += 1,
        }
    }
    None
}

/// Splits `/body/flags`; other text is returned whole with no flags.
fn split_delimited(s: &str) -> Result<(&str, &str), String> {
    if !s.starts_with('/') {
        return Ok((s, ""));
    }
    match s.rfind('/') {
        Some(end) if end > 0 => Ok((&s[1..end], &s[end + 1..])),
        _ => Err("unterminated /.../ wrapper".to_string()),
    }
}

/// Turns one non-comment line into a rule.
pub fn ingest_line(id: u32, line_no: usize, line: &str) -> Result<Rule, Rejected> {
    let reject = |reason: String| Rejected { id, line: line_no, text: line.to_string(), reason };
    let raw = if line.contains("pcre:\"") {
        snort_pcre(line).ok_or_else(|| reject("unterminated pcre option".into()))?
    } else {
        line
    };
    let (body, flags) = split_delimited(raw).map_err(reject)?;
    let anchored = body.starts_with('^');
    let mut opts = ParseOptions::default();
    for f in flags.chars() {
        match f {
            'i' => opts.case_insensitive = true,
            's' => {}
            'm' if !anchored => {}
            'm' => return Err(reject("multiline anchor".into())),
            other => return Err(reject(format!("flag {other}"))),
        }
    }
    let text = if anchored { body[1..].to_string() } else { format!(".*(?:{body})") };
    let regex = parse_with(&text, opts).map_err(|e| reject(e.reason()))?;
    Ok(Rule { id, line: line_no, pattern: body.to_string(), flags: flags.to_string(), anchored, regex })
}

pub fn parse_ruleset(name: &str, text: &str) -> Ruleset {
    let mut rs = Ruleset { name: name.to_string(), ..Ruleset::default() };
    let mut id = 0;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        match ingest_line(id, i + 1, t) {
            Ok(r) => rs.rules.push(r),
            Err(r) => rs.rejected.push(r),
        }
        id += 1;
    }
    rs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::to_pattern;

    #[test]
    fn wrappers_flags_and_anchors() {
        let rs = parse_ruleset(
            "t",
            "# comment\n\n/ab{3}/i\n^x{2}\nalert tcp any any (msg:\"m\"; pcre:\"/a\\\"b/s\"; sid:1;)\n(a)\\1\n/z/R\n",
        );
        assert_eq!(rs.total(), 5);
        assert_eq!(rs.rules.len(), 3);
        assert_eq!(rs.rules[0].flags, "i");
        assert_eq!(to_pattern(&rs.rules[1].regex.root), "x{2}");
        assert!(rs.rules[1].anchored);
        assert_eq!(rs.rules[2].pattern, "a\\\"b");
        assert_eq!(rs.rejected[0].reason, "backreference");
        assert_eq!((rs.rejected[0].id, rs.rejected[0].line), (3, 6));
        assert_eq!(rs.rejected[1].reason, "flag R");
    }

    #[test]
    fn unanchored_rules_search() {
        let r = ingest_line(0, 1, "ab").unwrap();
        assert!(!r.anchored);
        assert!(to_pattern(&r.regex.root).starts_with(".*"));
        assert_eq!(ingest_line(0, 1, "ab$").unwrap_err().reason, "anchor");
    }
}
