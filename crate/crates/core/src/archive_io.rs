//! Archive and model files, plus corpus statistics.
//!
//! Archive lines are JSON objects `{"id", "source", "target", "markers"}`
//! where `id` (string or number) and `markers` are optional. A line that is
//! not a JSON object is read as `source<TAB>target`.
//!
//! A model file is one JSON document:
//!
//! ```text
//! { "format": "ebmt-model", "version": 1,
//!   "lexicons": { "function_words": <sha256>, "tags": <sha256> },
//!   "weights": {..}, "config": {..}, "stats": {..}, "next_id": n,
//!   "clusters": [ { "center": id, "members": [id, ..] }, .. ],
//!   "entries": [ { "id", "label", "source", "target", "markers", "provenance" }, .. ] }
//! ```
//!
//! Patterns are not stored; they are re-encoded on load, which is why the
//! lexicon fingerprints must match.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::learn::{Cluster, ClusterModel, LearnConfig, LearnStats};
use crate::lexicon::{Lexicons, TokenKind};
use crate::metric::MetricWeights;
use crate::pattern::{ArchiveEntry, EntryId, Marker, Provenance};

pub const MODEL_FORMAT: &str = "ebmt-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Number(u64),
}

#[derive(Deserialize)]
struct ArchiveLine {
    id: Option<Label>,
    source: String,
    target: String,
    #[serde(default)]
    markers: Vec<Marker>,
}

#[derive(Serialize)]
struct ArchiveLineOut<'a> {
    id: &'a str,
    source: &'a str,
    target: &'a str,
    markers: Vec<Marker>,
}

/// Parses archive text. Entry ids follow file order; labels default to the
/// 0-based entry ordinal.
pub fn parse_archive(text: &str, lexicons: &Lexicons) -> Result<Vec<ArchiveEntry>> {
    let mut entries = Vec::new();
    let mut labels = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line, message };
        let (label, source, target, markers) = if raw.trim_start().starts_with('{') {
            let rec: ArchiveLine = serde_json::from_str(raw).map_err(|e| parse_err(e.to_string()))?;
            let label = match rec.id {
                Some(Label::Text(s)) => s,
                Some(Label::Number(n)) => n.to_string(),
                None => entries.len().to_string(),
            };
            (label, rec.source, rec.target, rec.markers)
        } else {
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 2 {
                return Err(parse_err(format!(
                    "expected a JSON object or source<TAB>target, found {} tab-separated fields",
                    fields.len()
                )));
            }
            (entries.len().to_string(), fields[0].to_owned(), fields[1].to_owned(), Vec::new())
        };
        if !labels.insert(label.clone()) {
            return Err(Error::Validation {
                line,
                message: format!("duplicate id {label:?}"),
            });
        }
        let id = EntryId(entries.len() as u32);
        let entry = ArchiveEntry::new(id, label, source, target, markers, lexicons).map_err(|e| Error::Validation {
            line,
            message: e.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

pub fn load_archive(path: impl AsRef<Path>, lexicons: &Lexicons) -> Result<Vec<ArchiveEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_archive(&text, lexicons)
}

/// JSONL form of the entries, readable by [`parse_archive`].
pub fn archive_to_jsonl(entries: &[ArchiveEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let line = ArchiveLineOut {
            id: &e.label,
            source: &e.source,
            target: &e.target,
            markers: e.internal_markers().to_vec(),
        };
        out.push_str(&serde_json::to_string(&line).expect("serializable"));
        out.push('\n');
    }
    out
}

/// Plain sentences, one per line; blank lines skipped.
pub fn load_sentences(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fingerprints {
    function_words: String,
    tags: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredEntry {
    id: EntryId,
    label: String,
    source: String,
    target: String,
    markers: Vec<Marker>,
    provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    lexicons: Fingerprints,
    weights: MetricWeights,
    config: LearnConfig,
    stats: LearnStats,
    next_id: u32,
    clusters: Vec<Cluster>,
    entries: Vec<StoredEntry>,
}

pub fn model_to_json(model: &ClusterModel, lexicons: &Lexicons) -> String {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        lexicons: Fingerprints {
            function_words: lexicons.function_words.fingerprint(),
            tags: lexicons.tags.fingerprint(),
        },
        weights: model.weights.clone(),
        config: model.config.clone(),
        stats: model.stats.clone(),
        next_id: model.next_id(),
        clusters: model.clusters().to_vec(),
        entries: model
            .entries()
            .iter()
            .map(|e| StoredEntry {
                id: e.id,
                label: e.label.clone(),
                source: e.source.clone(),
                target: e.target.clone(),
                markers: e.internal_markers().to_vec(),
                provenance: e.provenance.clone(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("serializable");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str, lexicons: &Lexicons) -> Result<ClusterModel> {
    let raw: Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if raw.get("format").and_then(Value::as_str) != Some(MODEL_FORMAT) {
        return Err(Error::Schema(format!("not an {MODEL_FORMAT} document")));
    }
    let version = raw.get("version").and_then(Value::as_u64);
    if version != Some(MODEL_VERSION as u64) {
        return Err(Error::Version {
            found: version.map_or_else(|| "none".to_owned(), |v| v.to_string()),
            expected: MODEL_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(raw).map_err(|e| Error::Schema(e.to_string()))?;
    for (which, expected, found) in [
        ("function-word", &file.lexicons.function_words, lexicons.function_words.fingerprint()),
        ("tag", &file.lexicons.tags, lexicons.tags.fingerprint()),
    ] {
        if *expected != found {
            return Err(Error::LexiconMismatch {
                which,
                expected: expected.clone(),
                found,
            });
        }
    }
    file.weights.validate()?;
    file.config.validate()?;
    let entries = file
        .entries
        .into_iter()
        .map(|e| ArchiveEntry::restore(e.id, e.label, e.source, e.target, e.markers, e.provenance, lexicons))
        .collect::<Result<Vec<_>>>()?;
    ClusterModel::from_parts(entries, file.clusters, file.weights, file.config, file.stats, file.next_id)
}

pub fn save_model(model: &ClusterModel, lexicons: &Lexicons, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model, lexicons)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>, lexicons: &Lexicons) -> Result<ClusterModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text, lexicons)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub entries: usize,
    pub sentences: usize,
    pub segments: usize,
    /// Entries per function-word count.
    pub fw_count_distribution: BTreeMap<usize, usize>,
    pub blocks: usize,
    /// Blocks per length in tokens, empty blocks included.
    pub block_length_distribution: BTreeMap<usize, usize>,
    /// Distinct ambiguity classes among the corpus's content words.
    pub ambiguity_classes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    /// Clusters per size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_size_distribution: Option<BTreeMap<usize, usize>>,
}

impl CorpusStats {
    pub fn compute(entries: &[ArchiveEntry], model: Option<&ClusterModel>) -> Self {
        let mut fw = BTreeMap::new();
        let mut blocks = BTreeMap::new();
        let mut classes = BTreeSet::new();
        for e in entries {
            let p = &e.pattern;
            *fw.entry(p.fw_count()).or_default() += 1;
            for b in p.blocks() {
                *blocks.entry(b.len()).or_default() += 1;
            }
            for t in p.tokens() {
                if let TokenKind::Content { class, .. } = &t.kind {
                    classes.insert(class.clone());
                }
            }
        }
        let segments = entries.iter().filter(|e| e.is_segment()).count();
        let cluster_sizes = model.map(|m| {
            let mut d = BTreeMap::new();
            for c in m.clusters() {
                *d.entry(c.members.len()).or_default() += 1;
            }
            d
        });
        CorpusStats {
            entries: entries.len(),
            sentences: entries.len() - segments,
            segments,
            fw_count_distribution: fw,
            blocks: entries.iter().map(|e| e.pattern.blocks().len()).sum(),
            block_length_distribution: blocks,
            ambiguity_classes: classes.len(),
            clusters: model.map(|m| m.clusters().len()),
            cluster_size_distribution: cluster_sizes,
        }
    }

    pub fn of_model(model: &ClusterModel) -> Self {
        Self::compute(model.entries(), Some(model))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicons {
        Lexicons::parse(
            "the\tDET\nfor\tPREP\nof\tPREP\n",
            "export\tnoun,verb\texport\nrefund\tnoun,verb\trefund\ncereals\tnoun\tcereal\n",
        )
        .unwrap()
    }

    #[test]
    fn jsonl_in_file_order() {
        let text = r#"{"id": "a", "source": "the export refund", "target": "x y z", "markers": [[1, 1]]}
{"source": "for cereals", "target": "u v"}
"#;
        let es = parse_archive(text, &lex()).unwrap();
        assert_eq!(es.len(), 2);
        assert_eq!(es[0].label, "a");
        assert_eq!(es[0].internal_markers(), &[Marker { source: 1, target: 1 }]);
        assert_eq!(es[1].id, EntryId(1));
        assert_eq!(es[1].label, "1");
    }

    #[test]
    fn numeric_ids_and_tsv_fallback() {
        let es = parse_archive("{\"id\": 7, \"source\": \"the\", \"target\": \"t\"}\nthe export\tle export\n", &lex()).unwrap();
        assert_eq!(es[0].label, "7");
        assert!(es[1].internal_markers().is_empty());
        assert_eq!(es[1].markers().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "{\"source\": \"the export\", \"target\": \"a b\"}\n\n{\"source\": \"the export refund\", \"target\": \"a b c\", \"markers\": [[2, 2], [1, 1]]}\n";
        match parse_archive(bad, &lex()) {
            Err(Error::Validation { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_archive("{\"source\": 3}\n", &lex()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_archive("just one field\n", &lex()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_archive("{\"id\": 1, \"source\": \"the\", \"target\": \"t\"}\n{\"id\": \"1\", \"source\": \"the\", \"target\": \"t\"}\n", &lex()),
            Err(Error::Validation { line: 2, .. })
        ));
    }

    #[test]
    fn archive_jsonl_reparses() {
        let text = "{\"id\": \"s1\", \"source\": \"the export refund for cereals\", \"target\": \"a b c d e\", \"markers\": [[3, 2]]}\n";
        let es = parse_archive(text, &lex()).unwrap();
        let again = parse_archive(&archive_to_jsonl(&es), &lex()).unwrap();
        assert_eq!(es, again);
    }

    #[test]
    fn stats_sum_to_totals() {
        let es = parse_archive("the export refund for cereals\tx\nexport of the\ty\n", &lex()).unwrap();
        let s = CorpusStats::compute(&es, None);
        assert_eq!(s.fw_count_distribution.values().sum::<usize>(), s.entries);
        assert_eq!(s.block_length_distribution.values().sum::<usize>(), s.blocks);
        assert_eq!(s.blocks, 3 + 3);
        assert_eq!(s.ambiguity_classes, 2);
        assert_eq!(s.segments, 0);
    }
}
