//! Human-readable dumps. The formats are for debugging only.

use std::fmt::Write;

use super::Nca;
use crate::syntax::class_to_string;

/// One line per state (`q<id> [class] {counters} final: guard`), then one
/// line per transition (`q<src> -[class] guard / action-> q<dst>`).
pub fn to_text(n: &Nca) -> String {
    let mut out = String::new();
    for (q, s) in n.states().iter().enumerate() {
        let class = s.class.map(|c| class_to_string(&c)).unwrap_or_else(|| "-".into());
        let counters: Vec<String> = s.counters.iter().map(|x| x.to_string()).collect();
        let _ = write!(out, "q{q} {class} {{{}}}", counters.join(","));
        if let Some(g) = n.final_guard(q as u32) {
            let _ = write!(out, " final: {g}");
        }
        out.push('\n');
    }
    for (x, c) in n.counters().iter().enumerate() {
        let _ = writeln!(out, "x{x} = instance {} {{{},{}}}", c.instance, c.min, c.max);
    }
    for t in n.transitions() {
        let _ = writeln!(out, "q{} -{} {} / {}-> q{}", t.src, class_to_string(&t.class), t.guard, t.action, t.dst);
    }
    out
}

pub fn to_dot(n: &Nca) -> String {
    let mut out = String::from("digraph nca {\n  rankdir=LR;\n");
    for q in 0..n.num_states() {
        let shape = if n.final_guard(q as u32).is_some() { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  q{q} [shape={shape}];");
    }
    for t in n.transitions() {
        let label = format!("{} {} / {}", class_to_string(&t.class), t.guard, t.action);
        let _ = writeln!(out, "  q{} -> q{} [label={:?}];", t.src, t.dst, label);
    }
    out.push_str("}\n");
    out
}
