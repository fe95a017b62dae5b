use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use recount::analysis::{analyze, report_json, Mode, DEFAULT_BUDGET};
use recount::bench::{bench_rule, BenchOptions, BenchStats, CSV_HEADER, DEFAULT_THRESHOLDS};
use recount::cost::{estimate, CostParams};
use recount::engine::{Backend, Engine, EngineError, MatchEvent};
use recount::ir::{compile, emit_json, load_json, simulate_ir, CompileOptions, IrSimulator};
use recount::placement::PlanOptions;
use recount::ruleset::{parse_ruleset, Ruleset};
use recount::syntax::{parse_with, to_pattern, ParseOptions, Regex, DEFAULT_NODE_LIMIT};

#[derive(Parser)]
#[command(name = "recount", version, about = "Bounded-repetition analysis, matching and hardware compilation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify every repetition of a pattern or rule file; JSON lines.
    Analyze(AnalyzeArgs),
    /// Report every prefix end of the input matched by the pattern(s).
    Match(MatchArgs),
    /// Compile a pattern to the automaton-network JSON.
    Compile(CompileArgs),
    /// Run a compiled network over an input.
    Simulate(SimulateArgs),
    /// Estimate energy and area of a compiled network on an input.
    Cost(CostArgs),
    /// Rule-file statistics: support, counting, ambiguity, node counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct PatternSource {
    /// The pattern; omit when --rules is given.
    #[arg(required_unless_present = "rules")]
    pattern: Option<String>,
    /// Rule file, one pattern per line ("-" for standard input).
    #[arg(long, conflicts_with = "pattern")]
    rules: Option<PathBuf>,
    /// ASCII case-insensitive matching for a single pattern.
    #[arg(short = 'i', long)]
    case_insensitive: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: PatternSource,
    #[arg(long, default_value = "hybrid")]
    mode: Mode,
    /// Include a witness input for ambiguous instances.
    #[arg(long)]
    witness: bool,
    /// Maximum number of token pairs explored per analysis.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, short = 'j')]
    jobs: Option<usize>,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    source: PatternSource,
    /// Input file; standard input when omitted.
    input: Option<PathBuf>,
    #[arg(long, default_value = "reference", value_parser = parse_backend)]
    backend: Backend,
    /// JSON lines instead of `rule<TAB>end_offset`.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompileArgs {
    pattern: String,
    #[arg(short = 'i', long)]
    case_insensitive: bool,
    /// Unfold repetitions whose upper bound is at most this value.
    #[arg(long, default_value_t = 0)]
    threshold: u32,
    #[arg(long)]
    force_unfold: bool,
    #[arg(long, default_value = "hybrid")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    node_limit: u64,
    /// Output file; standard output when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    ir: PathBuf,
    input: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Print per-cycle activity counts to standard error.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CostArgs {
    #[arg(required_unless_present = "print_params")]
    ir: Option<PathBuf>,
    input: Option<PathBuf>,
    /// `key = value` parameter file; unspecified keys keep their defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Print the default parameter file and exit.
    #[arg(long)]
    print_params: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Rule files or directories of rule files; each file is one benchmark.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long, default_value = "hybrid")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Comma-separated unfolding thresholds for node counts.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS.to_vec())]
    thresholds: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    warmup: u32,
    #[arg(long, short = 'j')]
    jobs: Option<usize>,
    /// CSV with one row per benchmark instead of the table.
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    /// One JSON object per benchmark.
    #[arg(long)]
    json: bool,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

enum Failure {
    Usage(String),
    Io(String),
    Limit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Limit(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Limit(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn read_path(p: &Path) -> Res<Vec<u8>> {
    if p.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        return Ok(buf);
    }
    fs::read(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
}

fn read_input(p: Option<&Path>) -> Res<Vec<u8>> {
    read_path(p.unwrap_or(Path::new("-")))
}

fn read_text(p: &Path) -> Res<String> {
    String::from_utf8(read_path(p)?).map_err(|_| Failure::Io(format!("{}: not valid UTF-8", p.display())))
}

fn parse_pattern(text: &str, ci: bool) -> Res<Regex> {
    parse_with(text, ParseOptions { case_insensitive: ci }).map_err(|e| Failure::Usage(format!("{text:?}: {e}")))
}

fn load_rules(p: &Path) -> Res<Ruleset> {
    let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "stdin".into());
    Ok(parse_ruleset(&name, &read_text(p)?))
}

fn pool(jobs: Option<usize>) -> Res<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::Usage(e.to_string()))
}

fn json_line<T: serde::Serialize>(out: &mut impl Write, v: &T) -> Res<()> {
    serde_json::to_writer(&mut *out, v).map_err(|e| Failure::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs, out: &mut impl Write) -> Res<()> {
    let Some(path) = &a.source.rules else {
        let text = a.source.pattern.as_deref().expect("clap requires a pattern");
        let re = parse_pattern(text, a.source.case_insensitive)?;
        let report = analyze(&re, a.mode, a.budget);
        return json_line(out, &report_json(text, &report, a.witness));
    };
    let rs = load_rules(path)?;
    let records: Vec<_> = pool(a.jobs)?.install(|| {
        rs.rules
            .par_iter()
            .map(|r| {
                let report = analyze(&r.regex, a.mode, a.budget);
                (r.id, report_json(&to_pattern(&r.regex.root), &report, a.witness))
            })
            .collect()
    });
    let mut accepted = records.iter().peekable();
    let mut rejected = rs.rejected.iter().peekable();
    // merge back into file order
    loop {
        let take_rejected = match (accepted.peek(), rejected.peek()) {
            (None, None) => break,
            (Some((id, _)), Some(r)) => r.id < *id,
            (None, Some(_)) => true,
            (Some(_), None) => false,
        };
        if take_rejected {
            json_line(out, rejected.next().unwrap())?;
        } else {
            json_line(out, &accepted.next().unwrap().1)?;
        }
    }
    Ok(())
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::Io(e) => Failure::Io(e.to_string()),
        EngineError::Size(e) => Failure::Limit(e.to_string()),
        EngineError::FallbackRequired(m) => Failure::Limit(m),
    }
}

fn write_events(out: &mut impl Write, events: &[MatchEvent], json: bool) -> Res<()> {
    for e in events {
        if json {
            json_line(out, e)?;
        } else {
            writeln!(out, "{}\t{}", e.rule, e.end_offset)?;
        }
    }
    Ok(())
}

fn cmd_match(a: MatchArgs, out: &mut impl Write) -> Res<()> {
    let mut engines = Vec::new();
    match &a.source.rules {
        Some(p) => {
            let rs = load_rules(p)?;
            for r in &rs.rejected {
                eprintln!("line {}: rejected ({})", r.line, r.reason);
            }
            for r in &rs.rules {
                let e = Engine::build(&r.regex, a.backend, &PlanOptions::default()).map_err(engine_failure)?;
                engines.push((r.id, e));
            }
        }
        None => {
            let re = parse_pattern(a.source.pattern.as_deref().unwrap(), a.source.case_insensitive)?;
            engines.push((0, Engine::build(&re, a.backend, &PlanOptions::default()).map_err(engine_failure)?));
        }
    }
    let input = read_input(a.input.as_deref())?;
    let mut events: Vec<MatchEvent> = engines.iter_mut().flat_map(|(id, e)| e.run(&input, *id)).collect();
    events.sort_by_key(|e| (e.end_offset, e.rule));
    write_events(out, &events, a.json)
}

fn cmd_compile(a: CompileArgs, out: &mut impl Write) -> Res<()> {
    let re = parse_pattern(&a.pattern, a.case_insensitive)?;
    let opts = CompileOptions {
        unfold_threshold: a.threshold,
        force_unfold: a.force_unfold,
        budget: a.budget,
        node_limit: a.node_limit,
        mode: a.mode,
    };
    let mut ir = compile(&re, &opts).map_err(|e| Failure::Limit(e.to_string()))?;
    ir.metadata.regex = a.pattern.clone();
    let text = emit_json(&ir);
    match &a.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_ir(p: &Path) -> Res<recount::ir::AutomatonIr> {
    load_json(&read_text(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn cmd_simulate(a: SimulateArgs, out: &mut impl Write) -> Res<()> {
    let ir = load_ir(&a.ir)?;
    let input = read_input(a.input.as_deref())?;
    if !a.trace {
        let mut sim = IrSimulator::new(&ir).map_err(|e| Failure::Usage(e.to_string()))?;
        return write_events(out, &sim.run(&input, 0, None), a.json);
    }
    let (events, trace) = simulate_ir(&ir, &input).map_err(|e| Failure::Usage(e.to_string()))?;
    write_events(out, &events, a.json)?;
    let mut err = io::stderr().lock();
    writeln!(err, "cycle\tactive\tcounter_ops\tbitvector_ops")?;
    for (t, c) in trace.cycles.iter().enumerate() {
        writeln!(err, "{}\t{}\t{}\t{}", t + 1, c.active.len(), c.counter_ops, c.bitvector_ops)?;
    }
    Ok(())
}

fn cmd_cost(a: CostArgs, out: &mut impl Write) -> Res<()> {
    let params = match &a.params {
        Some(p) => CostParams::from_config(&read_text(p)?).map_err(|e| Failure::Usage(e.to_string()))?,
        None => CostParams::default(),
    };
    if a.print_params {
        out.write_all(params.to_config().as_bytes())?;
        return Ok(());
    }
    let ir = load_ir(a.ir.as_deref().expect("clap requires the IR"))?;
    let input = read_input(a.input.as_deref())?;
    let (_, trace) = simulate_ir(&ir, &input).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = estimate(&ir, &trace, &params).map_err(|e| Failure::Usage(e.to_string()))?;
    if a.json {
        json_line(out, &report)
    } else {
        out.write_all(report.to_table().as_bytes())?;
        Ok(())
    }
}

fn rule_files(paths: &[PathBuf]) -> Res<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn cmd_bench(a: BenchArgs, out: &mut impl Write) -> Res<()> {
    let opts = BenchOptions {
        mode: a.mode,
        budget: a.budget,
        node_limit: DEFAULT_NODE_LIMIT,
        thresholds: a.thresholds.clone(),
        trials: a.trials.max(1),
        warmup: a.warmup,
    };
    let pool = pool(a.jobs)?;
    if a.csv {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for f in rule_files(&a.paths)? {
        let rs = load_rules(&f)?;
        let rules = pool.install(|| rs.rules.par_iter().map(|r| bench_rule(r, &opts)).collect());
        let stats = BenchStats::collect(&rs, rules, &opts.thresholds);
        if a.csv {
            writeln!(out, "{}", stats.csv_row())?;
        } else if a.json {
            json_line(out, &stats)?;
        } else {
            writeln!(out, "{}", stats.to_table())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.cmd {
        Cmd::Analyze(a) => cmd_analyze(a, &mut out)?,
        Cmd::Match(a) => cmd_match(a, &mut out)?,
        Cmd::Compile(a) => cmd_compile(a, &mut out)?,
        Cmd::Simulate(a) => cmd_simulate(a, &mut out)?,
        Cmd::Cost(a) => cmd_cost(a, &mut out)?,
        Cmd::Bench(a) => cmd_bench(a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("recount: {f}");
            ExitCode::from(f.code())
        }
    }
}
