//! Pruning loss against exhaustive search: MISSED / MISSED BY accounting.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::learn::ClusterModel;
use crate::metric::{similarity_score, MetricWeights};
use crate::pattern::{ArchiveEntry, EntryId, SentencePattern};
use crate::retrieve::{best_in_clusters, select_clusters, QueryConfig};

/// Scores closer than this count as equal.
pub const SCORE_EPS: f64 = 1e-9;

/// Best entry over the whole corpus; ties go to the smallest id.
pub fn exhaustive_best(
    entries: &[ArchiveEntry],
    input: &SentencePattern,
    weights: &MetricWeights,
) -> Result<(EntryId, f64)> {
    entries
        .par_iter()
        .map(|e| (e.id, similarity_score(input, &e.pattern, weights)))
        .reduce_with(|a, b| {
            if b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)).is_gt() {
                b
            } else {
                a
            }
        })
        .ok_or(Error::EmptyCorpus)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub query: usize,
    pub found: EntryId,
    pub found_score: f64,
    pub best: EntryId,
    pub best_score: f64,
    pub missed: bool,
    pub comparisons_pruned: usize,
    pub comparisons_exhaustive: usize,
}

impl QueryRecord {
    pub fn new(query: usize, found: (EntryId, f64), best: (EntryId, f64), pruned: usize, exhaustive: usize) -> Self {
        QueryRecord {
            query,
            found: found.0,
            found_score: found.1,
            best: best.0,
            best_score: best.1,
            missed: best.1 > found.1 + SCORE_EPS,
            comparisons_pruned: pruned,
            comparisons_exhaustive: exhaustive,
        }
    }

    /// Relative shortfall of the located match, in percent.
    pub fn deviation_pct(&self) -> f64 {
        if self.best_score <= 0.0 {
            return 0.0;
        }
        100.0 * (1.0 - self.found_score / self.best_score)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub queries: usize,
    pub clusters: usize,
    pub clusters_searched: usize,
    pub missed_pct: f64,
    /// Absent when nothing was missed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missed_by_pct: Option<f64>,
    pub avg_comparisons_pruned: f64,
    pub avg_comparisons_exhaustive: f64,
    pub records: Vec<QueryRecord>,
}

pub fn summarize(records: Vec<QueryRecord>, clusters: usize, clusters_searched: usize) -> EvalReport {
    let n = records.len();
    let missed: Vec<&QueryRecord> = records.iter().filter(|r| r.missed).collect();
    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        if n == 0 {
            0.0
        } else {
            xs.sum::<f64>() / n as f64
        }
    };
    EvalReport {
        queries: n,
        clusters,
        clusters_searched,
        missed_pct: if n == 0 {
            0.0
        } else {
            100.0 * missed.len() as f64 / n as f64
        },
        missed_by_pct: (!missed.is_empty())
            .then(|| missed.iter().map(|r| r.deviation_pct()).sum::<f64>() / missed.len() as f64),
        avg_comparisons_pruned: mean(&mut records.iter().map(|r| r.comparisons_pruned as f64)),
        avg_comparisons_exhaustive: mean(&mut records.iter().map(|r| r.comparisons_exhaustive as f64)),
        records,
    }
}

/// Runs pruned retrieval and the exhaustive oracle on every query. The
/// pruned side ignores `score_floor` so that every query has a found score.
pub fn evaluate_retrieval(model: &ClusterModel, tests: &[SentencePattern], qcfg: &QueryConfig) -> Result<EvalReport> {
    qcfg.validate()?;
    if model.entries().is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let c = qcfg.clusters_to_search.min(model.clusters().len());
    let records = tests
        .par_iter()
        .enumerate()
        .map(|(q, input)| {
            let ranked: Vec<usize> = select_clusters(model, input, c).iter().map(|r| r.index).collect();
            let (found, searched) = best_in_clusters(model, input, &ranked);
            let found = found.expect("searched clusters are non-empty");
            let best = exhaustive_best(model.entries(), input, &model.weights)?;
            Ok(QueryRecord::new(
                q,
                found,
                best,
                model.clusters().len() + searched,
                model.entries().len(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(records, model.clusters().len(), c))
}

/// Plain-text table, one row per configuration.
pub fn render_table(rows: &[(String, &EvalReport)]) -> String {
    let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(13);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>9}  {:>8}  {:>12}  {:>12}\n",
        "CONFIGURATION", "MISSED", "MISSED BY", "QUERIES", "CMP PRUNED", "CMP EXHAUST"
    );
    for (label, r) in rows {
        let by = r
            .missed_by_pct
            .map_or_else(|| "-".to_owned(), |v| format!("{v:.2}%"));
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>9}  {:>8}  {:>12.1}  {:>12.1}\n",
            label,
            format!("{:.1}%", r.missed_pct),
            by,
            r.queries,
            r.avg_comparisons_pruned,
            r.avg_comparisons_exhaustive
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(found: f64, best: f64) -> QueryRecord {
        QueryRecord::new(0, (EntryId(1), found), (EntryId(2), best), 3, 10)
    }

    #[test]
    fn single_missed_query() {
        let r = summarize(vec![record(0.75, 0.80)], 2, 1);
        assert_eq!(r.missed_pct, 100.0);
        let by = r.missed_by_pct.unwrap();
        assert!((by - 6.25).abs() < 1e-9, "{by}");
    }

    #[test]
    fn equal_scores_are_not_missed() {
        let r = summarize(vec![record(0.8, 0.8 + 1e-12)], 2, 1);
        assert_eq!(r.missed_pct, 0.0);
        assert_eq!(r.missed_by_pct, None);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("missed_by_pct").is_none());
    }

    #[test]
    fn averages_only_over_missed() {
        let r = summarize(vec![record(0.5, 1.0), record(1.0, 1.0), record(0.9, 1.0), record(0.2, 0.2)], 2, 1);
        assert_eq!(r.missed_pct, 50.0);
        assert!((r.missed_by_pct.unwrap() - 30.0).abs() < 1e-9);
        assert_eq!(r.avg_comparisons_pruned, 3.0);
    }

    #[test]
    fn empty_corpus_has_no_oracle() {
        let lex = crate::Lexicons::parse("the\tDET\n", "").unwrap();
        let p = SentencePattern::encode("the", &lex).unwrap();
        assert!(matches!(
            exhaustive_best(&[], &p, &MetricWeights::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn table_has_missed_columns() {
        let r = summarize(vec![record(0.75, 0.80)], 2, 1);
        let t = render_table(&[("K=2 c=1".into(), &r)]);
        let header = t.lines().next().unwrap();
        assert!(header.contains("MISSED") && header.contains("MISSED BY"));
        assert!(t.contains("100.0%") && t.contains("6.25%"));
    }
}
