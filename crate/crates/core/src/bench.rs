//! Per-ruleset statistics: rule counts by support, counting and counter
//! ambiguity, analysis timings and compiled node counts per unfolding
//! threshold.

use std::fmt::Write;
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{analyze, Mode, RegexVerdict, DEFAULT_BUDGET};
use crate::ir::{compile, CompileOptions};
use crate::ruleset::{Rejected, Rule, Ruleset};
use crate::syntax::{count_instances, max_bound, normalize, DEFAULT_NODE_LIMIT};

pub const DEFAULT_THRESHOLDS: &[u32] = &[0, 1, 4, 16, 64, 256, 1024];

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub mode: Mode,
    pub budget: u64,
    pub node_limit: u64,
    pub thresholds: Vec<u32>,
    /// Timed analysis runs per rule, after `warmup` untimed ones.
    pub trials: u32,
    pub warmup: u32,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            mode: Mode::Hybrid,
            budget: DEFAULT_BUDGET,
            node_limit: DEFAULT_NODE_LIMIT,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            trials: 1,
            warmup: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleStat {
    pub id: u32,
    pub line: usize,
    /// Largest repetition upper bound in the rule, 0 without counting.
    pub mu: u32,
    pub instances: usize,
    pub verdict: String,
    /// Mean analysis time over the timed trials, in microseconds.
    pub micros: f64,
    /// Network size per threshold; `None` when unfolding hit the node limit.
    pub nodes: Vec<Option<u64>>,
}

impl RuleStat {
    pub fn counting(&self) -> bool {
        self.instances > 0
    }
}

pub fn bench_rule(rule: &Rule, opts: &BenchOptions) -> RuleStat {
    let norm = normalize(&rule.regex);
    let insts = count_instances(&norm.root);
    let mut verdict = RegexVerdict::Unambiguous;
    let mut total = 0.0;
    for k in 0..opts.warmup + opts.trials.max(1) {
        let start = Instant::now();
        verdict = analyze(&norm, opts.mode, opts.budget).verdict();
        if k >= opts.warmup {
            total += start.elapsed().as_secs_f64() * 1e6;
        }
    }
    let nodes = opts
        .thresholds
        .iter()
        .map(|&t| {
            let co = CompileOptions {
                unfold_threshold: t,
                mode: opts.mode,
                budget: opts.budget,
                node_limit: opts.node_limit,
                ..CompileOptions::default()
            };
            compile(&norm, &co).ok().map(|ir| ir.nodes.len() as u64)
        })
        .collect();
    RuleStat {
        id: rule.id,
        line: rule.line,
        mu: max_bound(&norm.root),
        instances: insts.len(),
        verdict: verdict_name(verdict).to_string(),
        micros: total / opts.trials.max(1) as f64,
        nodes,
    }
}

fn verdict_name(v: RegexVerdict) -> &'static str {
    match v {
        RegexVerdict::Unambiguous => "unambiguous",
        RegexVerdict::Ambiguous => "ambiguous",
        RegexVerdict::Inconclusive => "inconclusive",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchStats {
    pub benchmark: String,
    pub total: usize,
    pub supported: usize,
    pub counting: usize,
    pub c_ambiguous: usize,
    pub inconclusive: usize,
    pub rejected: Vec<Rejected>,
    pub rules: Vec<RuleStat>,
    pub thresholds: Vec<u32>,
    /// Summed network size per threshold over rules that compiled.
    pub nodes: Vec<u64>,
    /// Rules that exceeded the node limit, per threshold.
    pub overflows: Vec<usize>,
}

pub const CSV_HEADER: &str = "benchmark,total,supported,counting,c-ambiguous";

impl BenchStats {
    /// Aggregates per-rule results; `rules` must follow `ruleset.rules`.
    pub fn collect(ruleset: &Ruleset, rules: Vec<RuleStat>, thresholds: &[u32]) -> BenchStats {
        let mut nodes = vec![0u64; thresholds.len()];
        let mut overflows = vec![0usize; thresholds.len()];
        for r in &rules {
            for (i, n) in r.nodes.iter().enumerate() {
                match n {
                    Some(n) => nodes[i] += n,
                    None => overflows[i] += 1,
                }
            }
        }
        BenchStats {
            benchmark: ruleset.name.clone(),
            total: ruleset.total(),
            supported: rules.len(),
            counting: rules.iter().filter(|r| r.counting()).count(),
            c_ambiguous: rules.iter().filter(|r| r.counting() && r.verdict == "ambiguous").count(),
            inconclusive: rules.iter().filter(|r| r.counting() && r.verdict == "inconclusive").count(),
            rejected: ruleset.rejected.clone(),
            rules,
            thresholds: thresholds.to_vec(),
            nodes,
            overflows,
        }
    }

    /// Sequential convenience over [`bench_rule`].
    pub fn run(ruleset: &Ruleset, opts: &BenchOptions) -> BenchStats {
        let rules = ruleset.rules.iter().map(|r| bench_rule(r, opts)).collect();
        BenchStats::collect(ruleset, rules, &opts.thresholds)
    }

    pub fn csv_row(&self) -> String {
        let name = if self.benchmark.contains([',', '"']) {
            format!("\"{}\"", self.benchmark.replace('"', "\"\""))
        } else {
            self.benchmark.clone()
        };
        format!("{name},{},{},{},{}", self.total, self.supported, self.counting, self.c_ambiguous)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let w = self.benchmark.len().max("benchmark".len());
        let _ = writeln!(
            out,
            "{:<w$}  {:>7}  {:>9}  {:>8}  {:>11}  {:>12}",
            "benchmark", "total", "supported", "counting", "c-ambiguous", "inconclusive"
        );
        let _ = writeln!(
            out,
            "{:<w$}  {:>7}  {:>9}  {:>8}  {:>11}  {:>12}",
            self.benchmark, self.total, self.supported, self.counting, self.c_ambiguous, self.inconclusive
        );
        if !self.thresholds.is_empty() {
            out.push('\n');
            let _ = writeln!(out, "{:>9}  {:>12}  {:>9}", "threshold", "nodes", "overflows");
            for ((t, n), o) in self.thresholds.iter().zip(&self.nodes).zip(&self.overflows) {
                let _ = writeln!(out, "{t:>9}  {n:>12}  {o:>9}");
            }
        }
        for r in &self.rejected {
            let _ = writeln!(out, "rejected line {}: {}", r.line, r.reason);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruleset::parse_ruleset;

    #[test]
    fn counts_and_csv() {
        let rs = parse_ruleset("mini", "^ab{3}c\nx{4}\nabc\n(a)\\1\n");
        let s = BenchStats::run(&rs, &BenchOptions { thresholds: vec![0, 4], ..BenchOptions::default() });
        assert_eq!((s.total, s.supported, s.counting, s.c_ambiguous), (4, 3, 2, 1));
        assert_eq!(s.csv_row(), "mini,4,3,2,1");
        assert!(s.nodes[0] <= s.nodes[1]);
        assert_eq!(s.rules[0].mu, 3);
    }
}
