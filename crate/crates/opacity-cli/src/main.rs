//! `opacity` — checks transactional-memory histories against the
//! opacity-family correctness criteria, verifies supplied serialization
//! witnesses, and cross-checks the criteria against each other on random
//! histories.
//!
//! Exit codes: 0 when the property holds (or every checked property holds),
//! 1 when it is refuted, 2 for usage or input errors — including histories a
//! criterion does not apply to and exhausted search budgets.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use opacity::corpus::{
    compare_criteria, entries, names, random_history, reference_history, HistoryConfig, ValueMode,
};
use opacity::criteria::{du_opaque, final_state_opaque, ghs_opaque, opaque, tms2_order};
use opacity::history::{History, TxnId};
use opacity::search::{
    verify_witness, Refutation, SearchError, SearchMode, SearchOutcome, SearchStats, Witness,
};
use opacity::sequential::{CommitDecision, InitialValues};
use opacity_cli::format::{parse_history, parse_txn};
use opacity_cli::report::{FuzzReport, Report, StatsReport, WitnessReport};

#[derive(Parser)]
#[command(
    name = "opacity",
    version,
    about = "Checks transactional-memory histories against opacity-family correctness criteria"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a criterion for a history
    Check {
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// Emit the machine-readable JSON report instead of text
        #[arg(long)]
        json: bool,
        /// Print the witness in the text report
        #[arg(long)]
        witness: bool,
        /// Cap the number of search nodes
        #[arg(long)]
        budget: Option<u64>,
        /// A history file in the text format, or corpus:<name>
        input: String,
    },
    /// Check a supplied serialization witness instead of searching for one
    Verify {
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// Comma-separated transaction order, e.g. T2,T3,T1,T4
        #[arg(long)]
        order: String,
        /// Commit decisions for pending transactions, e.g. T5:C,T7:A
        #[arg(long)]
        commits: Option<String>,
        /// Emit the machine-readable JSON report instead of text
        #[arg(long)]
        json: bool,
        /// A history file in the text format, or corpus:<name>
        input: String,
    },
    /// Decide a criterion for every prefix of a history
    Prefixes {
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// Emit the machine-readable JSON report instead of text
        #[arg(long)]
        json: bool,
        /// Print the full-history witness in the text report
        #[arg(long)]
        witness: bool,
        /// Cap the number of search nodes, applied per prefix
        #[arg(long)]
        budget: Option<u64>,
        /// A history file in the text format, or corpus:<name>
        input: String,
    },
    /// List the bundled reference histories, or print one
    Corpus {
        /// A corpus name; omit to list all names
        name: Option<String>,
    },
    /// Generate random histories and cross-check the criteria on them
    Fuzz {
        /// Seed of the first history; history i uses seed + i
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// How many histories to generate
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Generator settings, e.g. txn_count=5,value_mode=unique-writes
        #[arg(long)]
        config: Option<String>,
        /// Cap the number of search nodes, applied per evaluation
        #[arg(long)]
        budget: Option<u64>,
        /// Emit the machine-readable JSON report instead of text
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Criterion {
    FinalState,
    Opacity,
    DuOpacity,
    Ghs,
    Tms2,
}

impl Criterion {
    fn name(self) -> &'static str {
        match self {
            Criterion::FinalState => "final-state",
            Criterion::Opacity => "opacity",
            Criterion::DuOpacity => "du-opacity",
            Criterion::Ghs => "ghs",
            Criterion::Tms2 => "tms2",
        }
    }

    /// The search mode for single-shot criteria; opacity quantifies over
    /// prefixes instead and has none.
    fn mode(self) -> Option<SearchMode> {
        match self {
            Criterion::FinalState => Some(SearchMode::FinalState),
            Criterion::Opacity => None,
            Criterion::DuOpacity => Some(SearchMode::DuOpacity),
            Criterion::Ghs => Some(SearchMode::Ghs),
            Criterion::Tms2 => Some(SearchMode::Tms2),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Check { criterion, json, witness, budget, input } => {
            run_check(criterion, json, witness, budget, input)
        }
        Command::Verify { criterion, order, commits, json, input } => {
            run_verify(criterion, &order, commits.as_deref(), json, input)
        }
        Command::Prefixes { criterion, json, witness, budget, input } => {
            run_prefixes(criterion, json, witness, budget, input)
        }
        Command::Corpus { name } => run_corpus(name.as_deref()),
        Command::Fuzz { seed, count, config, budget, json } => {
            run_fuzz(seed, count, config.as_deref(), budget, json)
        }
    }
}

fn load_input(input: &str) -> anyhow::Result<History> {
    if let Some(name) = input.strip_prefix("corpus:") {
        return reference_history(name).map_err(|e| anyhow!("{e}"));
    }
    let text =
        fs::read_to_string(input).with_context(|| format!("cannot read history file `{input}`"))?;
    parse_history(&text)
        .map_err(|errors| anyhow!(errors.iter().map(|e| format!("{input}:{e}")).join("\n")))
}

/// One criterion decided on one history, reduced to the report's shape plus
/// the refutation evidence for text output.
struct Evaluation {
    satisfied: bool,
    witness: Option<Witness>,
    prefix_failures: Vec<usize>,
    stats: SearchStats,
    refutation: Option<Refutation>,
}

fn evaluate(
    criterion: Criterion,
    h: &History,
    init: &InitialValues,
    budget: Option<u64>,
) -> anyhow::Result<Evaluation> {
    if criterion == Criterion::Opacity {
        let out = opaque(h, init, budget)?;
        return Ok(Evaluation {
            satisfied: out.is_satisfied(),
            witness: out.full_witness,
            prefix_failures: out.prefix_failures,
            stats: out.stats,
            refutation: None,
        });
    }
    let outcome = match criterion {
        Criterion::FinalState => final_state_opaque(h, init, budget)?,
        Criterion::DuOpacity => du_opaque(h, init, budget)?,
        Criterion::Ghs => ghs_opaque(h, init, budget)?,
        Criterion::Tms2 => tms2_order(h, init, budget)?,
        Criterion::Opacity => unreachable!("handled above"),
    };
    Ok(match outcome {
        SearchOutcome::Satisfied(w, stats) => Evaluation {
            satisfied: true,
            witness: Some(w),
            prefix_failures: Vec::new(),
            stats,
            refutation: None,
        },
        SearchOutcome::Refuted(r, stats) => Evaluation {
            satisfied: false,
            witness: None,
            prefix_failures: Vec::new(),
            stats,
            refutation: Some(r),
        },
    })
}

fn fmt_commits(commits: &BTreeMap<TxnId, CommitDecision>) -> String {
    let inner = commits.iter().map(|(k, d)| format!("{k}:{d}")).join(",");
    format!("{{{inner}}}")
}

fn write_witness_lines(out: &mut String, w: &Witness) {
    let order = w.order.iter().map(ToString::to_string).join(",");
    writeln!(out, "order: {order}").expect("writing to a String cannot fail");
    if !w.commits.is_empty() {
        writeln!(out, "commits: {}", fmt_commits(&w.commits))
            .expect("writing to a String cannot fail");
    }
}

fn write_refutation_lines(out: &mut String, r: &Refutation) {
    for f in &r.failures {
        let placed = f.deepest.iter().map(ToString::to_string).join(",");
        let blocked = f
            .blocked
            .iter()
            .map(|(k, reason)| format!("{k}: {reason}"))
            .join("; ");
        writeln!(
            out,
            "completion {}: placed [{placed}], then blocked — {blocked}",
            fmt_commits(&f.commits)
        )
        .expect("writing to a String cannot fail");
    }
}

fn write_prefix_table(out: &mut String, total: usize, failures: &[usize]) {
    let width = total.to_string().len();
    for i in 0..=total {
        let verdict = if failures.contains(&i) { "refuted" } else { "satisfied" };
        writeln!(out, "prefix {i:>width$}: {verdict}").expect("writing to a String cannot fail");
    }
}

fn write_stats_line(out: &mut String, stats: StatsReport) {
    writeln!(out, "stats: {} nodes, {} completions, {} ms", stats.nodes, stats.completions, stats.ms)
        .expect("writing to a String cannot fail");
}

fn emit(report: &Report, json: bool, text: impl FnOnce(&mut String)) -> anyhow::Result<()> {
    let mut out = String::new();
    if json {
        out.push_str(&serde_json::to_string_pretty(report)?);
        out.push('\n');
    } else {
        writeln!(out, "input: {}", report.input)?;
        writeln!(out, "criterion: {}", report.criterion)?;
        text(&mut out);
        write_stats_line(&mut out, report.stats);
    }
    print!("{out}");
    Ok(())
}

fn run_check(
    criterion: Criterion,
    json: bool,
    witness_flag: bool,
    budget: Option<u64>,
    input: String,
) -> anyhow::Result<ExitCode> {
    let h = load_input(&input)?;
    let init = InitialValues::zero();
    let start = Instant::now();
    let ev = evaluate(criterion, &h, &init, budget)?;
    let ms = start.elapsed().as_millis() as u64;
    let report = Report {
        input,
        criterion: criterion.name().to_string(),
        satisfied: ev.satisfied,
        witness: ev.witness.as_ref().map(WitnessReport::from),
        prefix_failures: ev.prefix_failures.clone(),
        stats: StatsReport::new(ev.stats, ms),
    };
    emit(&report, json, |out| {
        if criterion == Criterion::Opacity {
            write_prefix_table(out, h.len(), &ev.prefix_failures);
        }
        writeln!(out, "verdict: {}", if ev.satisfied { "satisfied" } else { "refuted" })
            .expect("writing to a String cannot fail");
        if witness_flag {
            if let Some(w) = &ev.witness {
                write_witness_lines(out, w);
            }
        }
        if let Some(r) = &ev.refutation {
            write_refutation_lines(out, r);
        }
    })?;
    Ok(if ev.satisfied { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_order(order: &str) -> anyhow::Result<Vec<TxnId>> {
    order
        .split(',')
        .map(|tok| {
            parse_txn(tok.trim())
                .ok_or_else(|| anyhow!("bad transaction token `{tok}` in --order"))
        })
        .collect()
}

fn parse_commits(commits: &str) -> anyhow::Result<BTreeMap<TxnId, CommitDecision>> {
    let mut out = BTreeMap::new();
    for pair in commits.split(',') {
        let (txn, decision) = pair
            .trim()
            .split_once(':')
            .ok_or_else(|| anyhow!("--commits entries look like T5:C, found `{pair}`"))?;
        let txn = parse_txn(txn).ok_or_else(|| anyhow!("bad transaction token `{txn}` in --commits"))?;
        let decision = match decision {
            "C" => CommitDecision::Commit,
            "A" => CommitDecision::Abort,
            other => bail!("commit decisions are `C` or `A`, found `{other}`"),
        };
        out.insert(txn, decision);
    }
    Ok(out)
}

fn run_verify(
    criterion: Criterion,
    order: &str,
    commits: Option<&str>,
    json: bool,
    input: String,
) -> anyhow::Result<ExitCode> {
    let Some(mode) = criterion.mode() else {
        bail!("`verify` checks a single serialization; opacity quantifies over prefixes, so pick final-state, du-opacity, ghs, or tms2");
    };
    let h = load_input(&input)?;
    if criterion == Criterion::Ghs && !h.is_sequential() {
        bail!("the ghs criterion applies to sequential histories only");
    }
    let w = Witness {
        order: parse_order(order)?,
        commits: commits.map(parse_commits).transpose()?.unwrap_or_default(),
    };
    let init = InitialValues::zero();
    let start = Instant::now();
    let verdict = verify_witness(&h, mode, &w, &init);
    let ms = start.elapsed().as_millis() as u64;
    let (satisfied, violations) = match verdict {
        Ok(()) => (true, Vec::new()),
        Err(SearchError::InvalidWitness(v)) => (false, v),
        Err(e) => return Err(e.into()),
    };
    let report = Report {
        input,
        criterion: criterion.name().to_string(),
        satisfied,
        witness: satisfied.then(|| WitnessReport::from(&w)),
        prefix_failures: Vec::new(),
        stats: StatsReport::new(SearchStats::default(), ms),
    };
    emit(&report, json, |out| {
        write_witness_lines(out, &w);
        writeln!(out, "verdict: {}", if satisfied { "valid" } else { "invalid" })
            .expect("writing to a String cannot fail");
        for v in &violations {
            writeln!(out, "violation: {v}").expect("writing to a String cannot fail");
        }
    })?;
    Ok(if satisfied { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_prefixes(
    criterion: Criterion,
    json: bool,
    witness_flag: bool,
    budget: Option<u64>,
    input: String,
) -> anyhow::Result<ExitCode> {
    let h = load_input(&input)?;
    let init = InitialValues::zero();
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let mut prefix_failures = Vec::new();
    let mut full_witness = None;
    for i in 0..=h.len() {
        let p = h.prefix(i).expect("prefix lengths in range");
        let ev = evaluate(criterion, &p, &init, budget)?;
        stats.nodes += ev.stats.nodes;
        stats.completions += ev.stats.completions;
        if !ev.satisfied {
            prefix_failures.push(i);
        }
        if i == h.len() {
            full_witness = ev.witness;
        }
    }
    let ms = start.elapsed().as_millis() as u64;
    let satisfied = prefix_failures.is_empty();
    let report = Report {
        input,
        criterion: criterion.name().to_string(),
        satisfied,
        witness: full_witness.as_ref().map(WitnessReport::from),
        prefix_failures: prefix_failures.clone(),
        stats: StatsReport::new(stats, ms),
    };
    emit(&report, json, |out| {
        write_prefix_table(out, h.len(), &prefix_failures);
        writeln!(out, "verdict: {}", if satisfied { "satisfied" } else { "refuted" })
            .expect("writing to a String cannot fail");
        if witness_flag {
            if let Some(w) = &full_witness {
                write_witness_lines(out, w);
            }
        }
    })?;
    Ok(if satisfied { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_corpus(name: Option<&str>) -> anyhow::Result<ExitCode> {
    let mut out = String::new();
    match name {
        None => {
            for name in names() {
                writeln!(out, "{name}")?;
            }
        }
        Some(name) => {
            let h = reference_history(name).map_err(|e| anyhow!("{e}"))?;
            match entries().into_iter().find(|e| e.name == name) {
                Some(entry) => writeln!(out, "# {name}: {}", entry.note)?,
                None => writeln!(out, "# {name}")?,
            }
            write!(out, "{h}")?;
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn parse_config(config: &str) -> anyhow::Result<HistoryConfig> {
    let mut cfg = HistoryConfig::default();
    for pair in config.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = pair
            .trim()
            .split_once('=')
            .ok_or_else(|| anyhow!("--config entries look like key=value, found `{pair}`"))?;
        let bad = |what: &str| anyhow!("bad {what} `{value}` for --config key `{key}`");
        match key {
            "txn_count" => cfg.txn_count = value.parse().map_err(|_| bad("count"))?,
            "object_count" => cfg.object_count = value.parse().map_err(|_| bad("count"))?,
            "max_ops_per_txn" => cfg.max_ops_per_txn = value.parse().map_err(|_| bad("count"))?,
            "value_mode" => {
                cfg.value_mode = match value {
                    "from-writes" => ValueMode::FromWrites,
                    "unique-writes" => ValueMode::UniqueWrites,
                    _ => bail!("value_mode is `from-writes` or `unique-writes`, found `{value}`"),
                }
            }
            "abort_probability" => {
                cfg.abort_probability = value.parse().map_err(|_| bad("probability"))?
            }
            "incomplete_probability" => {
                cfg.incomplete_probability = value.parse().map_err(|_| bad("probability"))?
            }
            other => bail!("unknown --config key `{other}`"),
        }
    }
    for (what, p) in [
        ("abort_probability", cfg.abort_probability),
        ("incomplete_probability", cfg.incomplete_probability),
    ] {
        if !(0.0..=1.0).contains(&p) {
            bail!("{what} must be within 0..=1, found {p}");
        }
    }
    Ok(cfg)
}

fn run_fuzz(
    seed: u64,
    count: usize,
    config: Option<&str>,
    budget: Option<u64>,
    json: bool,
) -> anyhow::Result<ExitCode> {
    let cfg = config.map(parse_config).transpose()?.unwrap_or_default();
    let histories: Vec<History> = (0..count)
        .map(|i| random_history(&cfg, seed.wrapping_add(i as u64)))
        .collect();
    let init = InitialValues::zero();
    let cmp = compare_criteria(&histories, &init, budget)?;

    let count_where = |f: &dyn Fn(&opacity::corpus::CriterionVerdicts) -> bool| {
        cmp.verdicts.iter().filter(|v| f(v)).count()
    };
    let satisfied = BTreeMap::from([
        ("final-state".to_string(), count_where(&|v| v.final_state)),
        ("opacity".to_string(), count_where(&|v| v.opaque)),
        ("du-opacity".to_string(), count_where(&|v| v.du)),
        ("ghs".to_string(), count_where(&|v| v.ghs == Some(true))),
        ("tms2".to_string(), count_where(&|v| v.tms2)),
    ]);
    let sequential = count_where(&|v| v.ghs.is_some());
    let unique_writes = count_where(&|v| v.unique_writes);
    let required_zero = BTreeMap::from([
        ("du_but_not_opaque".to_string(), cmp.du_but_not_opaque),
        ("du_but_not_final_state".to_string(), cmp.du_but_not_final_state),
        ("opaque_but_not_final_state".to_string(), cmp.opaque_but_not_final_state),
        ("unique_writes_divergence".to_string(), cmp.unique_writes_divergence),
        ("du_prefix_gap".to_string(), cmp.du_prefix_gap),
        ("ghs_without_du".to_string(), cmp.ghs_without_du),
    ]);
    let violation = required_zero.values().any(|&n| n > 0);
    let report = FuzzReport {
        seed,
        count,
        satisfied,
        sequential,
        unique_writes,
        required_zero,
        opaque_but_not_du: cmp.opaque_but_not_du,
        tms2_without_du: cmp.tms2_without_du,
        violation,
    };

    let mut out = String::new();
    if json {
        out.push_str(&serde_json::to_string_pretty(&report)?);
        out.push('\n');
    } else {
        writeln!(out, "seed: {seed}")?;
        writeln!(out, "histories: {count}")?;
        for name in ["final-state", "opacity", "du-opacity", "tms2"] {
            writeln!(out, "{name}: {} satisfied", report.satisfied[name])?;
        }
        writeln!(out, "ghs: {} of {} sequential satisfied", report.satisfied["ghs"], sequential)?;
        writeln!(out, "unique-writes histories: {unique_writes}")?;
        writeln!(out, "opaque but not du-opaque: {} (expected strictness)", cmp.opaque_but_not_du)?;
        writeln!(out, "tms2 but not du-opaque: {} (reported, not judged)", cmp.tms2_without_du)?;
        if violation {
            for (name, n) in report.required_zero.iter().filter(|(_, &n)| n > 0) {
                writeln!(out, "VIOLATION {name}: {n}")?;
            }
        } else {
            writeln!(out, "required implications: all hold")?;
        }
    }
    print!("{out}");
    Ok(if violation { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
