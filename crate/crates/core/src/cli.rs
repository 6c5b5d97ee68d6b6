//! Command-line front end: `featurize`, `mine` and `eval`.
//!
//! Data goes to the output stream, diagnostics to the error stream. Exit
//! status is 0 on success, 2 on bad input or configuration and 1 when
//! output cannot be written.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::featurize::{featurize_corpus, read_messages, FeaturizeError, LexiconSet};
use crate::miner::{mine, MinedRule, MinerConfig, TieBreak};
use crate::predicate::{compile_predicates, default_table1_config, PredicateConfig, PredicateSet};
use crate::rule::{parse_rule, CompiledRule, PreparedDataset, RuleError, RuleMetrics, TemporalRule};
use crate::trace::{load_traces, write_traces_to_vec, Dataset, Outcome};

pub const LEXICON_ENV: &str = "DIALOGUE_RULES_LEXICONS";

#[derive(Debug, Parser)]
#[command(name = "dialogue-rules", version, about = "Explain dialogue outcomes with timed-sequence rules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn JSON Lines messages into a trace CSV.
    Featurize {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Directory with sentiment.tsv and <category>.txt lexicons.
        #[arg(long, env = LEXICON_ENV)]
        lexicons: Option<PathBuf>,
    },
    /// Mine rules explaining each outcome.
    Mine {
        traces: PathBuf,
        #[arg(long)]
        predicates: Option<PathBuf>,
        /// TOML file with miner defaults; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        min_support: Option<f64>,
        #[arg(long)]
        purity: Option<f64>,
        /// Outcome predicate to explain; repeatable. Default: every outcome predicate.
        #[arg(long)]
        target: Vec<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compute metrics of given rules.
    Eval {
        traces: PathBuf,
        /// Rule text, or a file with one rule per line.
        rule: String,
        #[arg(long)]
        predicates: Option<PathBuf>,
        #[arg(long)]
        witnesses: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Miner settings read from `--config`.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub k: Option<i64>,
    pub depth: Option<usize>,
    pub min_support: Option<f64>,
    pub purity: Option<f64>,
    pub target: Option<Vec<String>>,
    pub format: Option<Format>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Featurize { input, out: path, lexicons } => cmd_featurize(&input, &path, lexicons.as_deref(), out),
        Command::Mine {
            traces,
            predicates,
            config,
            n,
            k,
            depth,
            min_support,
            purity,
            target,
            format,
            out: path,
        } => {
            let flags = FileConfig {
                n,
                k,
                depth,
                min_support,
                purity,
                target: (!target.is_empty()).then_some(target),
                format,
            };
            cmd_mine(&traces, predicates.as_deref(), config.as_deref(), flags, path.as_deref(), out)
        }
        Command::Eval {
            traces,
            rule,
            predicates,
            witnesses,
            format,
        } => cmd_eval(&traces, &rule, predicates.as_deref(), witnesses, format, out),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> CliResult<Dataset> {
    load_traces(BufReader::new(open(path)?)).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_predicates(path: Option<&Path>, dataset: &Dataset) -> CliResult<PredicateSet> {
    let config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            PredicateConfig::from_toml(&text).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?
        }
        None => default_table1_config(),
    };
    compile_predicates(&config, dataset.schema()).map_err(|e| Failure::input(e.to_string()))
}

pub fn cmd_featurize_to(input: &Path, lexicons: Option<&Path>) -> Result<Dataset, String> {
    let lexicon = match lexicons {
        Some(dir) => LexiconSet::load_dir(dir).map_err(|e| e.to_string())?,
        None => LexiconSet::builtin(),
    };
    let file = File::open(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let messages = read_messages(BufReader::new(file)).map_err(|e| match e {
        FeaturizeError::MalformedMessage { .. } => format!("{}: {e}", input.display()),
        other => other.to_string(),
    })?;
    featurize_corpus(&messages, &lexicon).map_err(|e| e.to_string())
}

fn cmd_featurize(input: &Path, path: &Path, lexicons: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let dataset = cmd_featurize_to(input, lexicons).map_err(Failure::input)?;
    std::fs::write(path, write_traces_to_vec(&dataset))?;
    for trace in dataset.traces() {
        writeln!(out, "{}\tevents={}\toutcome={}", trace.dialogue_id(), trace.len(), trace.outcome().as_u8())?;
    }
    writeln!(
        out,
        "wrote {} dialogues, {} events to {}",
        dataset.len(),
        dataset.event_count(),
        path.display()
    )?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ReportConfig {
    pub n: usize,
    pub k: i64,
    pub max_depth: usize,
    pub min_support: f64,
    pub purity_threshold: f64,
    pub tie_break: TieBreak,
}

#[derive(Debug, Serialize)]
pub struct DatasetDigest {
    pub traces: usize,
    pub events: usize,
    pub positive_outcomes: usize,
}

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub target: String,
    pub effect_base_rate: f64,
    pub rules: Vec<MinedRule>,
}

#[derive(Debug, Serialize)]
pub struct MiningReport {
    pub config: ReportConfig,
    pub dataset: DatasetDigest,
    pub analyses: Vec<Analysis>,
}

fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}%", v * 100.0))
}

impl MiningReport {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let d = &self.dataset;
        let mut s = format!(
            "# n={} k={} depth={} min_support={:.2} purity={:.2}\n# traces={} events={}\n",
            c.n, c.k, c.max_depth, c.min_support, c.purity_threshold, d.traces, d.events
        );
        for a in &self.analyses {
            s.push_str(&format!(
                "\n## target {} (base rate {})\nrule | support% | correlation%\n",
                a.target,
                percent(Some(a.effect_base_rate))
            ));
            if a.rules.is_empty() {
                s.push_str("(no rules)\n");
            }
            for r in &a.rules {
                s.push_str(&format!(
                    "{} | {} | {}\n",
                    r.rule,
                    percent(Some(r.metrics.support)),
                    percent(r.metrics.correlation)
                ));
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn merge_config(file: FileConfig, flags: FileConfig) -> FileConfig {
    FileConfig {
        n: flags.n.or(file.n),
        k: flags.k.or(file.k),
        depth: flags.depth.or(file.depth),
        min_support: flags.min_support.or(file.min_support),
        purity: flags.purity.or(file.purity),
        target: flags.target.or(file.target),
        format: flags.format.or(file.format),
    }
}

/// Mines every requested target and builds the report.
pub fn build_report(dataset: &Dataset, predicates: &PredicateSet, settings: &FileConfig) -> Result<MiningReport, String> {
    let defaults = MinerConfig::new("");
    let base = MinerConfig {
        n: settings.n.unwrap_or(defaults.n),
        k: settings.k.unwrap_or(defaults.k),
        max_depth: settings.depth.unwrap_or(defaults.max_depth),
        min_support: settings.min_support.unwrap_or(defaults.min_support),
        purity_threshold: settings.purity.unwrap_or(defaults.purity_threshold),
        ..defaults
    };
    base.validate().map_err(|e| e.to_string())?;
    let targets: Vec<String> = match &settings.target {
        Some(t) => t.clone(),
        None => predicates.trace_level().map(|(_, d)| d.name.clone()).collect(),
    };
    let mut analyses = Vec::new();
    for target in targets {
        let def = predicates
            .get(&target)
            .ok_or_else(|| format!("unknown predicate `{target}`"))?;
        let hits = dataset
            .traces()
            .iter()
            .filter(|t| def.eval_trace(t).unwrap_or(false))
            .count();
        let config = MinerConfig {
            target_effect: target.clone(),
            ..base.clone()
        };
        let rules = if hits == 0 {
            Vec::new()
        } else {
            mine(dataset, &config, predicates).map_err(|e| e.to_string())?
        };
        analyses.push(Analysis {
            target,
            effect_base_rate: if dataset.is_empty() { 0.0 } else { hits as f64 / dataset.len() as f64 },
            rules,
        });
    }
    Ok(MiningReport {
        config: ReportConfig {
            n: base.n,
            k: base.k,
            max_depth: base.max_depth,
            min_support: base.min_support,
            purity_threshold: base.purity_threshold,
            tie_break: base.tie_break,
        },
        dataset: DatasetDigest {
            traces: dataset.len(),
            events: dataset.event_count(),
            positive_outcomes: dataset.traces().iter().filter(|t| t.outcome() == Outcome::Positive).count(),
        },
        analyses,
    })
}

fn cmd_mine(
    traces: &Path,
    predicates: Option<&Path>,
    config: Option<&Path>,
    flags: FileConfig,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let file = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?
        }
        None => FileConfig::default(),
    };
    let settings = merge_config(file, flags);
    let dataset = load_dataset(traces)?;
    let predicate_set = load_predicates(predicates, &dataset)?;
    let report = build_report(&dataset, &predicate_set, &settings).map_err(Failure::input)?;
    let rendered = match settings.format.unwrap_or_default() {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    match path {
        Some(p) => std::fs::write(p, rendered)?,
        None => out.write_all(rendered.as_bytes())?,
    }
    Ok(())
}

/// Error text with the offending rule and a caret under the failing column.
pub fn caret_diagnostic(text: &str, pos: usize, message: &str) -> String {
    let column = text[..pos.min(text.len())].chars().count();
    format!("{message}\n  {text}\n  {}^", " ".repeat(column))
}

fn read_rules(arg: &str) -> CliResult<Vec<(String, TemporalRule)>> {
    let path = Path::new(arg);
    let lines: Vec<String> = if path.is_file() {
        std::fs::read_to_string(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect()
    } else {
        vec![arg.to_string()]
    };
    if lines.is_empty() {
        return Err(Failure::input("no rules given"));
    }
    lines
        .into_iter()
        .map(|line| match parse_rule(&line) {
            Ok(rule) => Ok((line, rule)),
            Err(RuleError::Syntax { pos, message }) => Err(Failure::input(caret_diagnostic(
                &line,
                pos,
                &format!("syntax error: {message}"),
            ))),
            Err(e) => Err(Failure::input(format!("{e}\n  {line}"))),
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct WitnessLine {
    dialogue_id: String,
    indices: Vec<usize>,
    timestamps: Vec<i64>,
}

#[derive(Debug, Serialize)]
struct EvalRecord {
    rule: TemporalRule,
    metrics: RuleMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    witnesses: Option<Vec<WitnessLine>>,
}

fn cmd_eval(
    traces: &Path,
    rule_arg: &str,
    predicates: Option<&Path>,
    witnesses: bool,
    format: Format,
    out: &mut dyn Write,
) -> CliResult {
    let rules = read_rules(rule_arg)?;
    let dataset = load_dataset(traces)?;
    if dataset.is_empty() {
        return Err(Failure::input("dataset is empty"));
    }
    let predicate_set = load_predicates(predicates, &dataset)?;
    let prepared = PreparedDataset::new(&dataset, &predicate_set).map_err(|e| Failure::input(e.to_string()))?;

    let mut records = Vec::new();
    for (_, rule) in rules {
        let compiled = CompiledRule::new(&rule, &predicate_set).map_err(|e| Failure::input(e.to_string()))?;
        let metrics = prepared.metrics(&compiled).map_err(|e| Failure::input(e.to_string()))?;
        let witness_lines = witnesses.then(|| {
            dataset
                .traces()
                .iter()
                .enumerate()
                .filter_map(|(i, trace)| {
                    prepared.witness(&compiled, i).map(|w| WitnessLine {
                        dialogue_id: trace.dialogue_id().to_string(),
                        timestamps: w.indices.iter().map(|&e| trace.events()[e].timestamp).collect(),
                        indices: w.indices,
                    })
                })
                .collect()
        });
        records.push(EvalRecord {
            rule,
            metrics,
            witnesses: witness_lines,
        });
    }

    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&records).expect("records serialize");
            s.push('\n');
            out.write_all(s.as_bytes())?;
        }
        Format::Text => {
            for (i, r) in records.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                let c = r.metrics.counts;
                writeln!(out, "rule: {}", r.rule)?;
                writeln!(out, "support: {} ({}/{})", percent(Some(r.metrics.support)), c.matched, c.dataset_size)?;
                writeln!(
                    out,
                    "correlation: {} ({}/{})",
                    percent(r.metrics.correlation),
                    c.matched_and_effect,
                    c.effect_total
                )?;
                writeln!(
                    out,
                    "confidence: {} ({}/{})",
                    percent(r.metrics.confidence),
                    c.matched_and_effect,
                    c.matched
                )?;
                if let Some(ws) = &r.witnesses {
                    for w in ws {
                        let idx: Vec<String> = w.indices.iter().map(usize::to_string).collect();
                        let ts: Vec<String> = w.timestamps.iter().map(i64::to_string).collect();
                        writeln!(
                            out,
                            "witness {} events=[{}] timestamps=[{}]",
                            w.dialogue_id,
                            idx.join(","),
                            ts.join(",")
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}
