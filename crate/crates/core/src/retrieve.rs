//! Recognition phase: cluster-pruned best-match search and greedy coverage
//! of an input sentence by archive segments.

use std::collections::VecDeque;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::ClusterModel;
use crate::lexicon::Lexicons;
use crate::metric::{similarity, similarity_score};
use crate::pattern::{EntryId, Provenance, SentencePattern};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    /// Number of favourite clusters searched per lookup.
    pub clusters_to_search: usize,
    pub cover_threshold: f64,
    pub score_floor: f64,
    pub max_cover_rounds: usize,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            clusters_to_search: 1,
            cover_threshold: 0.8,
            score_floor: 0.3,
            max_cover_rounds: 64,
        }
    }
}

impl QueryConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.clusters_to_search == 0 {
            return fail("clusters_to_search must be at least 1");
        }
        if !(self.cover_threshold > 0.0 && self.cover_threshold <= 1.0) {
            return fail("cover_threshold must lie in (0, 1]");
        }
        if !(0.0..=self.cover_threshold).contains(&self.score_floor) {
            return fail("score_floor must lie in [0, cover_threshold]");
        }
        if self.max_cover_rounds == 0 {
            return fail("max_cover_rounds must be positive");
        }
        Ok(())
    }
}

/// A translation proposal: an archive entry matched against (part of) the
/// input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proposal {
    pub score: f64,
    #[serde(with = "crate::span_serde")]
    pub input_span: Range<usize>,
    /// The entry's label.
    pub entry_id: String,
    #[serde(with = "crate::span_serde")]
    pub entry_span: Range<usize>,
    pub target: String,
    pub provenance: Option<Provenance>,
    /// Emitted below the cover threshold; the fragment stays uncovered.
    pub partial: bool,
    #[serde(skip)]
    pub entry: EntryId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankedCluster {
    pub index: usize,
    pub score: f64,
}

/// Scores every cluster center against the input and keeps the best `c`,
/// ties broken by cluster index.
pub fn select_clusters(model: &ClusterModel, input: &SentencePattern, c: usize) -> Vec<RankedCluster> {
    let mut ranked: Vec<RankedCluster> = (0..model.clusters().len())
        .map(|index| RankedCluster {
            index,
            score: similarity_score(input, &model.center(index).pattern, &model.weights),
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    ranked.truncate(c);
    ranked
}

/// Best entry over the given clusters with its score, and the number of
/// comparisons made. Ties go to the smallest entry id.
pub fn best_in_clusters(
    model: &ClusterModel,
    input: &SentencePattern,
    clusters: &[usize],
) -> (Option<(EntryId, f64)>, usize) {
    let ids: Vec<EntryId> = clusters
        .iter()
        .flat_map(|&c| model.clusters()[c].members.iter().copied())
        .collect();
    let best = ids
        .par_iter()
        .map(|&id| {
            let e = model.entry(id).expect("member exists");
            (id, similarity_score(input, &e.pattern, &model.weights))
        })
        .reduce_with(|a, b| match b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)) {
            std::cmp::Ordering::Greater => b,
            _ => a,
        });
    (best, ids.len())
}

#[derive(Debug, Clone)]
pub struct Retrieval {
    pub proposal: Option<Proposal>,
    pub clusters: Vec<RankedCluster>,
    pub comparisons: usize,
}

/// Best match within the listed clusters, if it reaches `score_floor`.
/// Returns the proposal and the number of member comparisons.
pub fn best_match_in_clusters(
    model: &ClusterModel,
    input: &SentencePattern,
    clusters: &[usize],
    score_floor: f64,
) -> (Option<Proposal>, usize) {
    let (best, comparisons) = best_in_clusters(model, input, clusters);
    let proposal = best.filter(|&(_, s)| s >= score_floor).map(|(id, _)| {
        let e = model.entry(id).expect("member exists");
        let r = similarity(input, &e.pattern, &model.weights);
        Proposal {
            score: r.score,
            input_span: r.a_span,
            entry_id: e.label.clone(),
            entry_span: r.b_span,
            target: e.target.clone(),
            provenance: e.provenance.clone(),
            partial: false,
            entry: id,
        }
    });
    (proposal, comparisons)
}

/// Cluster selection followed by the in-cluster search.
pub fn retrieve(model: &ClusterModel, input: &SentencePattern, qcfg: &QueryConfig) -> Retrieval {
    let clusters = select_clusters(model, input, qcfg.clusters_to_search);
    let indices: Vec<usize> = clusters.iter().map(|c| c.index).collect();
    let (proposal, searched) = best_match_in_clusters(model, input, &indices, qcfg.score_floor);
    Retrieval {
        proposal,
        comparisons: model.clusters().len() + searched,
        clusters,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    /// Ordered by input position; spans never overlap.
    pub proposals: Vec<Proposal>,
    pub comparisons: usize,
    pub clusters_searched: usize,
    /// Input ranges not covered by a proposal at or above the cover threshold.
    pub uncovered: Vec<Range<usize>>,
    pub input_len: usize,
}

#[derive(Serialize)]
struct SummaryRecord<'a> {
    summary: SummaryBody<'a>,
}

#[derive(Serialize)]
struct SummaryBody<'a> {
    comparisons: usize,
    clusters_searched: usize,
    uncovered_spans: Vec<[usize; 2]>,
    input_tokens: usize,
    proposals: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    sentence: Option<&'a str>,
}

impl Coverage {
    /// One JSON line per proposal, then the summary record.
    pub fn to_jsonl(&self, sentence: Option<&str>) -> String {
        let mut out = String::new();
        for p in &self.proposals {
            out.push_str(&serde_json::to_string(p).expect("serializable"));
            out.push('\n');
        }
        let summary = SummaryRecord {
            summary: SummaryBody {
                comparisons: self.comparisons,
                clusters_searched: self.clusters_searched,
                uncovered_spans: self.uncovered.iter().map(|r| [r.start, r.end]).collect(),
                input_tokens: self.input_len,
                proposals: self.proposals.len(),
                sentence,
            },
        };
        out.push_str(&serde_json::to_string(&summary).expect("serializable"));
        out.push('\n');
        out
    }

    pub fn covered_tokens(&self) -> usize {
        self.input_len - self.uncovered.iter().map(|r| r.len()).sum::<usize>()
    }
}

struct Candidate {
    id: EntryId,
    unit_score: f64,
    fragment_score: f64,
    a_span: Range<usize>,
    b_span: Range<usize>,
}

/// Scores one candidate for coverage: the similarity of the input part that
/// contributed to the match against the whole entry.
fn coverage_candidate(model: &ClusterModel, fragment: &SentencePattern, id: EntryId) -> Option<Candidate> {
    let e = model.entry(id).expect("member exists");
    let fragment_score = similarity_score(fragment, &e.pattern, &model.weights);
    if fragment_score <= 0.0 {
        return None;
    }
    let r = similarity(fragment, &e.pattern, &model.weights);
    let unit_score = if r.a_span == (0..fragment.len()) {
        r.score
    } else {
        let part = fragment.slice(r.a_span.clone()).ok()?;
        similarity_score(&part, &e.pattern, &model.weights)
    };
    Some(Candidate {
        id,
        unit_score,
        fragment_score,
        a_span: r.a_span,
        b_span: r.b_span,
    })
}

/// Greedily covers the input with archive segments: the best segment match
/// for a fragment is emitted when it clears `cover_threshold`, and the
/// uncovered remainders on either side are searched again as standalone
/// sentences.
pub fn cover_input(
    model: &ClusterModel,
    text: &str,
    lexicons: &Lexicons,
    qcfg: &QueryConfig,
) -> Result<Coverage> {
    let input = SentencePattern::encode(text, lexicons)?;
    cover_pattern(model, &input, qcfg)
}

pub fn cover_pattern(model: &ClusterModel, input: &SentencePattern, qcfg: &QueryConfig) -> Result<Coverage> {
    qcfg.validate()?;
    let mut queue = VecDeque::from([0..input.len()]);
    let mut proposals = Vec::new();
    let mut comparisons = 0;
    let mut clusters_searched = 0;
    let mut rounds = 0;

    while let Some(range) = queue.pop_front() {
        if rounds == qcfg.max_cover_rounds {
            break;
        }
        rounds += 1;
        let fragment = input.slice(range.clone())?;
        let ranked = select_clusters(model, &fragment, qcfg.clusters_to_search);
        comparisons += model.clusters().len();
        clusters_searched += ranked.len();

        let ids: Vec<EntryId> = ranked
            .iter()
            .flat_map(|c| model.clusters()[c.index].members.iter().copied())
            .collect();
        comparisons += ids.len();
        let candidates: Vec<Candidate> = ids
            .par_iter()
            .filter_map(|&id| coverage_candidate(model, &fragment, id))
            .collect();
        comparisons += candidates.len();
        let Some(best) = candidates.into_iter().reduce(|a, b| {
            let order = b
                .unit_score
                .total_cmp(&a.unit_score)
                .then(b.fragment_score.total_cmp(&a.fragment_score))
                .then(a.id.cmp(&b.id));
            if order.is_gt() {
                b
            } else {
                a
            }
        }) else {
            continue;
        };
        if best.unit_score < qcfg.score_floor {
            continue;
        }
        let entry = model.entry(best.id).expect("member exists");
        let span = range.start + best.a_span.start..range.start + best.a_span.end;
        let covered = best.unit_score >= qcfg.cover_threshold;
        if covered {
            if range.start < span.start {
                queue.push_back(range.start..span.start);
            }
            if span.end < range.end {
                queue.push_back(span.end..range.end);
            }
        }
        proposals.push(Proposal {
            score: best.unit_score,
            input_span: span,
            entry_id: entry.label.clone(),
            entry_span: best.b_span,
            target: entry.target.clone(),
            provenance: entry.provenance.clone(),
            partial: !covered,
            entry: best.id,
        });
    }

    proposals.sort_by_key(|p| p.input_span.start);
    let mut uncovered = Vec::new();
    let mut at = 0;
    for p in proposals.iter().filter(|p| !p.partial) {
        if at < p.input_span.start {
            uncovered.push(at..p.input_span.start);
        }
        at = p.input_span.end;
    }
    if at < input.len() {
        uncovered.push(at..input.len());
    }
    Ok(Coverage {
        proposals,
        comparisons,
        clusters_searched,
        uncovered,
        input_len: input.len(),
    })
}
