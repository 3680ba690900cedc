//! The `ebmt` command line.
//!
//! Settings are merged as flags > `--config` TOML file > defaults. The TOML
//! file has four optional tables, each rejecting unknown keys:
//!
//! ```toml
//! [paths]
//! fw = "fw.tsv"
//! tags = "tags.tsv"
//!
//! [metric]
//! w_f = 0.5
//!
//! [learn]
//! k_target = 80
//!
//! [query]
//! clusters_to_search = 2
//! ```
//!
//! Setting a cluster count (`--k` or `learn.k_target`) without also setting
//! `min_intra_sim` turns the quality stopping rule off.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::archive_io::{load_archive, load_model, load_sentences, save_model, CorpusStats};
use crate::error::Error;
use crate::eval::{evaluate_retrieval, render_table};
use crate::learn::{learn, LearnConfig};
use crate::lexicon::{Lexicons, TokenKind};
use crate::metric::MetricWeights;
use crate::pattern::SentencePattern;
use crate::retrieve::{cover_pattern, QueryConfig};

#[derive(Parser, Debug)]
#[command(name = "ebmt", version, about = "Example-based translation archive matcher")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the function-word/block pattern of sentences as JSON lines.
    Encode,
    /// Cluster and segment an archive, then save the model.
    Learn,
    /// Cover sentences with archive segments; prints proposal JSON lines.
    Query,
    /// Measure pruning loss against exhaustive search.
    Evaluate {
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Corpus statistics for an archive or a model.
    Stats,
}

#[derive(clap::Args, Debug, Default)]
struct Options {
    #[arg(long, global = true)]
    archive: Option<PathBuf>,
    #[arg(long, global = true)]
    fw: Option<PathBuf>,
    #[arg(long, global = true)]
    tags: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Test sentences, one per line.
    #[arg(long, global = true)]
    test: Option<PathBuf>,
    /// Sentence to encode or query (otherwise read from stdin, one per line).
    #[arg(long, global = true)]
    sentence: Option<String>,
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    min_intra_sim: Option<f64>,
    #[arg(long, global = true)]
    seg_threshold: Option<f64>,
    /// Clusters searched per lookup. `evaluate` accepts a list, one table row each.
    #[arg(long, global = true, value_delimiter = ',')]
    clusters: Vec<usize>,
    #[arg(long, global = true)]
    cover_threshold: Option<f64>,
    #[arg(long, global = true)]
    score_floor: Option<f64>,

    #[arg(long, global = true)]
    w_f: Option<f64>,
    #[arg(long, global = true)]
    g_ratio: Option<f64>,
    #[arg(long, global = true)]
    p_ratio: Option<f64>,
    #[arg(long, global = true)]
    t_ratio: Option<f64>,
    #[arg(long, global = true)]
    pt_ratio: Option<f64>,

    /// Accepted for compatibility; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Paths {
    archive: Option<PathBuf>,
    fw: Option<PathBuf>,
    tags: Option<PathBuf>,
    model: Option<PathBuf>,
    test: Option<PathBuf>,
}

/// Fully merged settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Settings {
    paths: Paths,
    metric: MetricWeights,
    learn: LearnConfig,
    query: QueryConfig,
}

enum CliError {
    Usage(String),
    Component(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Component(e)
    }
}

fn stdout_error(e: io::Error) -> CliError {
    CliError::Component(Error::io("<stdout>", e))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn table_has(t: &toml::Table, section: &str, key: &str) -> bool {
    t.get(section)
        .and_then(toml::Value::as_table)
        .is_some_and(|s| s.contains_key(key))
}

fn settings(opts: &Options) -> Result<Settings, CliError> {
    let defaults = Settings {
        paths: Paths::default(),
        metric: MetricWeights::default(),
        learn: LearnConfig::default(),
        query: QueryConfig::default(),
    };
    let mut table = toml::Table::try_from(&defaults).expect("defaults serialize");
    let mut k_from_file = false;
    let mut quality_from_file = false;
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        k_from_file = table_has(&file, "learn", "k_target");
        quality_from_file = table_has(&file, "learn", "min_intra_sim");
        merge(&mut table, file);
    }
    let mut s: Settings = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_owned()))?;

    let set = |slot: &mut Option<PathBuf>, flag: &Option<PathBuf>| {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    };
    set(&mut s.paths.archive, &opts.archive);
    set(&mut s.paths.fw, &opts.fw);
    set(&mut s.paths.tags, &opts.tags);
    set(&mut s.paths.model, &opts.model);
    set(&mut s.paths.test, &opts.test);

    let m = &mut s.metric;
    for (slot, flag) in [
        (&mut m.w_f, opts.w_f),
        (&mut m.g_ratio, opts.g_ratio),
        (&mut m.p_ratio, opts.p_ratio),
        (&mut m.t_ratio, opts.t_ratio),
        (&mut m.pt_ratio, opts.pt_ratio),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if opts.k.is_some() {
        s.learn.k_target = opts.k;
    }
    if opts.min_intra_sim.is_some() {
        s.learn.min_intra_sim = opts.min_intra_sim;
    } else if (opts.k.is_some() || k_from_file) && !quality_from_file {
        s.learn.min_intra_sim = None;
    }
    if let Some(v) = opts.seg_threshold {
        s.learn.seg_threshold = v;
    }
    if let Some(&c) = opts.clusters.first() {
        s.query.clusters_to_search = c;
    }
    if let Some(v) = opts.cover_threshold {
        s.query.cover_threshold = v;
    }
    if let Some(v) = opts.score_floor {
        s.query.score_floor = v;
    }
    s.metric.validate()?;
    s.learn.validate()?;
    s.query.validate()?;
    Ok(s)
}

fn require<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

fn lexicons(s: &Settings) -> Result<Lexicons, CliError> {
    Ok(Lexicons::load(require(&s.paths.fw, "fw")?, require(&s.paths.tags, "tags")?)?)
}

fn input_sentences(opts: &Options, stdin: &mut dyn BufRead) -> Result<Vec<String>, CliError> {
    if let Some(s) = &opts.sentence {
        return Ok(vec![s.clone()]);
    }
    let mut out = Vec::new();
    for line in stdin.lines() {
        let line = line.map_err(|e| Error::io("<stdin>", e))?;
        if !line.trim().is_empty() {
            out.push(line);
        }
    }
    Ok(out)
}

fn encode_view(p: &SentencePattern, lex: &Lexicons) -> serde_json::Value {
    let tokens: Vec<serde_json::Value> = p
        .tokens()
        .iter()
        .map(|t| match &t.kind {
            TokenKind::Function { groups, .. } => json!({
                "surface": t.surface,
                "fw": true,
                "groups": groups.iter().map(|g| lex.function_words.group_name(*g)).collect::<Vec<_>>(),
            }),
            TokenKind::Content { class, lemmas } => json!({
                "surface": t.surface,
                "fw": false,
                "class": lex.tags.class_names(class),
                "lemmas": lemmas,
            }),
        })
        .collect();
    json!({
        "tokens": tokens,
        "fw_slots": p.fw_slots(),
        "blocks": p.blocks().iter().map(|b| [b.start, b.end]).collect::<Vec<_>>(),
    })
}

fn execute(cli: Cli, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let s = settings(&cli.opts)?;
    let opts = &cli.opts;
    match cli.command {
        Command::Encode => {
            let lex = lexicons(&s)?;
            for sentence in input_sentences(opts, stdin)? {
                let p = SentencePattern::encode(&sentence, &lex)?;
                writeln!(out, "{}", encode_view(&p, &lex)).map_err(stdout_error)?;
            }
        }
        Command::Learn => {
            let lex = lexicons(&s)?;
            let archive = load_archive(require(&s.paths.archive, "archive")?, &lex)?;
            let dest = require(&opts.out, "out")?;
            let model = learn(archive, s.metric, s.learn.clone())?;
            for (i, (n, c)) in model
                .stats
                .sentence_counts
                .iter()
                .zip(&model.stats.created)
                .enumerate()
            {
                writeln!(out, "iteration {}: {n} sentences, {c} segments created", i + 1).map_err(stdout_error)?;
            }
            save_model(&model, &lex, dest)?;
            writeln!(
                out,
                "{} clusters over {} entries written to {}",
                model.clusters().len(),
                model.entries().len(),
                dest.display()
            )
            .map_err(stdout_error)?;
        }
        Command::Query => {
            if opts.clusters.len() > 1 {
                return Err(CliError::Usage("query takes a single --clusters value".into()));
            }
            let lex = lexicons(&s)?;
            let model = load_model(require(&s.paths.model, "model")?, &lex)?;
            for sentence in input_sentences(opts, stdin)? {
                let input = SentencePattern::encode(&sentence, &lex)?;
                let coverage = cover_pattern(&model, &input, &s.query)?;
                out.write_all(coverage.to_jsonl(Some(&sentence)).as_bytes())
                    .map_err(stdout_error)?;
            }
        }
        Command::Evaluate { json } => {
            let lex = lexicons(&s)?;
            let model = load_model(require(&s.paths.model, "model")?, &lex)?;
            let tests = load_sentences(require(&s.paths.test, "test")?)?
                .iter()
                .map(|t| SentencePattern::encode(t, &lex))
                .collect::<Result<Vec<_>, _>>()?;
            let cs = if opts.clusters.is_empty() {
                vec![s.query.clusters_to_search]
            } else {
                opts.clusters.clone()
            };
            let mut reports = Vec::new();
            for c in cs {
                let q = QueryConfig {
                    clusters_to_search: c,
                    ..s.query.clone()
                };
                let r = evaluate_retrieval(&model, &tests, &q)?;
                reports.push((format!("K={} c={c}", model.clusters().len()), r));
            }
            if json {
                let doc: Vec<serde_json::Value> = reports
                    .iter()
                    .map(|(label, r)| json!({ "configuration": label, "report": r }))
                    .collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))
                    .map_err(stdout_error)?;
            } else {
                let rows: Vec<(String, &_)> = reports.iter().map(|(l, r)| (l.clone(), r)).collect();
                out.write_all(render_table(&rows).as_bytes()).map_err(stdout_error)?;
            }
        }
        Command::Stats => {
            let lex = lexicons(&s)?;
            let stats = match (&s.paths.model, &s.paths.archive) {
                (Some(m), _) => CorpusStats::of_model(&load_model(m, &lex)?),
                (None, Some(a)) => CorpusStats::compute(&load_archive(a, &lex)?, None),
                (None, None) => return Err(CliError::Usage("stats needs --model or --archive".into())),
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&stats).expect("serializable"))
                .map_err(stdout_error)?;
        }
    }
    out.flush().map_err(stdout_error)
}

/// Runs one command line. Returns the process exit status: 0 on success, 2
/// on usage errors, 1 on any other failure.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let outcome = match cli.opts.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => {
            // The global pool can only be sized once per process; later calls keep it.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            execute(cli, stdin, stdout)
        }
        None => execute(cli, stdin, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(CliError::Component(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
