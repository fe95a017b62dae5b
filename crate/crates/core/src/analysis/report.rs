//! Serializable form of analysis reports.

use serde::{Deserialize, Serialize};

use super::{AmbiguityReport, RegexVerdict};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: u32,
    pub min: u32,
    pub max: u32,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuations: Option<(Vec<u32>, Vec<u32>)>,
    pub single_valued: bool,
    pub pairs_created: u64,
    pub micros: u64,
}

/// One JSON object per analyzed pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub regex: String,
    pub mode: String,
    pub verdict: String,
    pub instances: Vec<InstanceRecord>,
}

fn regex_verdict_name(v: RegexVerdict) -> &'static str {
    match v {
        RegexVerdict::Unambiguous => "unambiguous",
        RegexVerdict::Ambiguous => "ambiguous",
        RegexVerdict::Inconclusive => "inconclusive",
    }
}

/// Builds the record; witnesses are included when `with_witness` is set.
pub fn report_json(regex: &str, report: &AmbiguityReport, with_witness: bool) -> ReportRecord {
    let instances = report
        .instances
        .iter()
        .map(|i| {
            let w = i.verdict.witness().filter(|_| with_witness);
            InstanceRecord {
                id: i.id.0,
                min: i.min,
                max: i.max,
                verdict: i.verdict.label().to_string(),
                witness: w.map(|w| escape_bytes(&w.input)),
                state: w.map(|w| w.state),
                valuations: w.map(|w| (w.valuations.0.to_vec(), w.valuations.1.to_vec())),
                single_valued: i.single_valued,
                pairs_created: i.pairs_created,
                micros: i.elapsed.as_micros() as u64,
            }
        })
        .collect();
    ReportRecord {
        regex: regex.to_string(),
        mode: report.mode.to_string(),
        verdict: regex_verdict_name(report.verdict()).to_string(),
        instances,
    }
}

/// Printable ASCII stays as is (backslash doubled); other bytes become `\xHH`.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::new();
    for &b in bytes {
        match b {
            b'\\' => out.push_str("\\\\"),
            0x20..=0x7e => out.push(b as char),
            _ => out.push_str(&format!("\\x{b:02x}")),
        }
    }
    out
}

/// Inverse of [`escape_bytes`].
pub fn unescape_bytes(s: &str) -> Option<Vec<u8>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'\\' {
            match b.get(i + 1)? {
                b'\\' => {
                    out.push(b'\\');
                    i += 2;
                }
                b'x' => {
                    let hex = std::str::from_utf8(b.get(i + 2..i + 4)?).ok()?;
                    out.push(u8::from_str_radix(hex, 16).ok()?);
                    i += 4;
                }
                _ => return None,
            }
        } else {
            out.push(b[i]);
            i += 1;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escaping_round_trips() {
        let all: Vec<u8> = (0..=255).collect();
        assert_eq!(unescape_bytes(&escape_bytes(&all)).unwrap(), all);
        assert_eq!(escape_bytes(b"a\\\n"), "a\\\\\\x0a");
    }
}
