//! Two-level dynamic-programming similarity between sentence patterns.
//!
//! The outer level aligns the function-word slots of two sentences, each
//! extended with a start and an end sentinel. A cell may be entered
//!
//! * diagonally, when the two slots match (identical word: `I`, shared
//!   group: `G`, sentinel pair: 0), which also adds the similarity of the
//!   content blocks preceding the two slots;
//! * horizontally or vertically, skipping one slot at cost `P`.
//!
//! Every cell is floored at zero, so an alignment restarts whenever the
//! penalties have consumed all previously accumulated score, and the result
//! is the best cell anywhere in the grid. The inner level runs the same
//! recurrence over the content words of two blocks, with lemma overlap
//! (`L`), ambiguity-class overlap (`T`) and a skip cost `PT`.
//!
//! All scores are normalised per sentence pair so that a sentence compared
//! with itself scores exactly 1: function words share `w_f` of the total,
//! split evenly over `max(m_a, m_b)` slots, and the `max(m_a, m_b) + 1`
//! blocks share the rest.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{sorted_overlap, Token, TokenKind};
use crate::pattern::SentencePattern;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricWeights {
    /// Share of the total score carried by function words.
    pub w_f: f64,
    /// G / I
    pub g_ratio: f64,
    /// P / I
    pub p_ratio: f64,
    /// T / L
    pub t_ratio: f64,
    /// PT / L
    pub pt_ratio: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        MetricWeights {
            w_f: 0.5,
            g_ratio: 0.5,
            p_ratio: 0.5,
            t_ratio: 0.5,
            pt_ratio: 0.5,
        }
    }
}

impl MetricWeights {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        let finite = [self.w_f, self.g_ratio, self.p_ratio, self.t_ratio, self.pt_ratio]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return fail("metric weights must be finite");
        }
        if !(0.0..=1.0).contains(&self.w_f) {
            return fail("w_f must lie in [0, 1]");
        }
        if !(self.g_ratio > 0.0 && self.g_ratio < 1.0) {
            return fail("g_ratio must lie in (0, 1)");
        }
        if self.p_ratio <= 0.0 {
            return fail("p_ratio must be positive");
        }
        if !(self.t_ratio > 0.0 && self.t_ratio < 1.0) {
            return fail("t_ratio must lie in (0, 1)");
        }
        if self.pt_ratio <= 0.0 {
            return fail("pt_ratio must be positive");
        }
        Ok(())
    }
}

/// The concrete scores for one sentence pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSet {
    /// I
    pub identical: f64,
    /// G
    pub group: f64,
    /// P
    pub fw_penalty: f64,
    /// Total content score available to one block pair.
    pub block_budget: f64,
    pub t_ratio: f64,
    pub pt_ratio: f64,
}

/// L, T and PT for one block pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub lemma: f64,
    pub tag: f64,
    pub penalty: f64,
}

impl ParamSet {
    pub fn block_params(&self, len_a: usize, len_b: usize) -> BlockParams {
        let l = len_a.max(len_b).max(1) as f64;
        let lemma = self.block_budget / l;
        BlockParams {
            lemma,
            tag: self.t_ratio * lemma,
            penalty: self.pt_ratio * lemma,
        }
    }
}

pub fn derive_params(a: &SentencePattern, b: &SentencePattern, w: &MetricWeights) -> ParamSet {
    let m = a.fw_count().max(b.fw_count());
    if m == 0 {
        return ParamSet {
            identical: 0.0,
            group: 0.0,
            fw_penalty: 0.0,
            block_budget: 1.0,
            t_ratio: w.t_ratio,
            pt_ratio: w.pt_ratio,
        };
    }
    let identical = w.w_f / m as f64;
    ParamSet {
        identical,
        group: w.g_ratio * identical,
        fw_penalty: w.p_ratio * identical,
        block_budget: (1.0 - w.w_f) / (m + 1) as f64,
        t_ratio: w.t_ratio,
        pt_ratio: w.pt_ratio,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchLevel {
    #[serde(rename = "I")]
    Identical,
    #[serde(rename = "G")]
    SameGroup,
    #[serde(rename = "-")]
    NoMatch,
}

/// A position in the sentinel-extended function-word sequence.
#[derive(Debug, Clone, Copy)]
pub enum Slot<'a> {
    Start,
    Word(&'a Token),
    End,
}

pub fn fw_match_level(a: Slot<'_>, b: Slot<'_>) -> MatchLevel {
    match (a, b) {
        (Slot::Start, Slot::Start) | (Slot::End, Slot::End) => MatchLevel::Identical,
        (Slot::Word(x), Slot::Word(y)) => match (&x.kind, &y.kind) {
            (
                TokenKind::Function { id: ia, groups: ga },
                TokenKind::Function { id: ib, groups: gb },
            ) => {
                if ia == ib {
                    MatchLevel::Identical
                } else if sorted_overlap(ga, gb) {
                    MatchLevel::SameGroup
                } else {
                    MatchLevel::NoMatch
                }
            }
            _ => MatchLevel::NoMatch,
        },
        _ => MatchLevel::NoMatch,
    }
}

fn content_gain(a: &Token, b: &Token, bp: &BlockParams) -> Option<f64> {
    match (&a.kind, &b.kind) {
        (
            TokenKind::Content { class: ca, lemmas: la },
            TokenKind::Content { class: cb, lemmas: lb },
        ) => {
            if sorted_overlap(la, lb) {
                Some(bp.lemma)
            } else if ca.overlaps(cb) {
                Some(bp.tag)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Best local alignment of two content blocks; ranges are block-relative.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatch {
    pub score: f64,
    pub a: Range<usize>,
    pub b: Range<usize>,
}

pub fn align_blocks(a: &[Token], b: &[Token], params: &ParamSet) -> BlockMatch {
    if a.is_empty() && b.is_empty() {
        return BlockMatch {
            score: params.block_budget,
            a: 0..0,
            b: 0..0,
        };
    }
    if a.is_empty() || b.is_empty() {
        return BlockMatch {
            score: 0.0,
            a: 0..0,
            b: 0..0,
        };
    }
    let bp = params.block_params(a.len(), b.len());
    let w = b.len() + 1;
    let mut h = vec![0.0f64; (a.len() + 1) * w];
    let mut diag: Vec<Option<f64>> = vec![None; (a.len() + 1) * w];
    let (mut best, mut bi, mut bj) = (0.0f64, 0, 0);
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let d = content_gain(&a[i - 1], &b[j - 1], &bp).map(|g| h[(i - 1) * w + j - 1] + g);
            let up = h[(i - 1) * w + j] - bp.penalty;
            let left = h[i * w + j - 1] - bp.penalty;
            let v = d.unwrap_or(f64::NEG_INFINITY).max(up).max(left).max(0.0);
            h[i * w + j] = v;
            diag[i * w + j] = d;
            if v > best {
                best = v;
                bi = i;
                bj = j;
            }
        }
    }
    let (mut i, mut j) = (bi, bj);
    while i > 0 && j > 0 && h[i * w + j] > 0.0 {
        let v = h[i * w + j];
        if diag[i * w + j] == Some(v) {
            i -= 1;
            j -= 1;
        } else if h[(i - 1) * w + j] - bp.penalty == v {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    BlockMatch {
        score: best,
        a: i..bi,
        b: j..bj,
    }
}

pub fn block_similarity(a: &[Token], b: &[Token], params: &ParamSet) -> f64 {
    align_blocks(a, b, params).score
}

/// One diagonal step of a backtracked alignment, in extended slot indices
/// (0 = start sentinel, `m + 1` = end sentinel).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedStep {
    pub a_slot: usize,
    pub b_slot: usize,
    pub level: MatchLevel,
    pub fw_gain: f64,
    pub block_gain: f64,
    /// Matched content tokens (sentence token indices).
    pub a_block: Range<usize>,
    pub b_block: Range<usize>,
}

/// A matched pair of real function words (indices into `fw_slots`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FwPair {
    pub a: usize,
    pub b: usize,
    pub level: MatchLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub score: f64,
    /// Tokens of `a` that contributed to the score (empty when score is 0).
    pub a_span: Range<usize>,
    pub b_span: Range<usize>,
    pub fw_alignment: Vec<FwPair>,
    pub steps: Vec<AlignedStep>,
    /// Horizontal plus vertical moves on the backtracked path.
    pub gaps: usize,
    pub params: ParamSet,
}

impl MatchResult {
    /// Re-scores the backtracked path from its steps.
    pub fn path_score(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.fw_gain + s.block_gain)
            .sum::<f64>()
            - self.gaps as f64 * self.params.fw_penalty
    }
}

fn slot<'a>(p: &'a SentencePattern, k: usize) -> Slot<'a> {
    if k == 0 {
        Slot::Start
    } else if k == p.fw_count() + 1 {
        Slot::End
    } else {
        Slot::Word(p.fw_token(k - 1))
    }
}

struct Grid {
    width: usize,
    score: Vec<f64>,
    /// Value reached by the diagonal move into each cell, if allowed.
    diag: Vec<Option<f64>>,
    best: (f64, usize, usize),
}

fn run_grid(a: &SentencePattern, b: &SentencePattern, params: &ParamSet) -> Grid {
    let rows = a.fw_count() + 2;
    let width = b.fw_count() + 2;
    let mut score = vec![0.0f64; rows * width];
    let mut diag: Vec<Option<f64>> = vec![None; rows * width];
    let mut best = (0.0f64, 0, 0);
    let last_a = rows - 1;
    let last_b = width - 1;
    for i in 0..rows {
        for j in 0..width {
            let prev = if i > 0 && j > 0 {
                score[(i - 1) * width + j - 1]
            } else {
                0.0
            };
            let d = match fw_match_level(slot(a, i), slot(b, j)) {
                MatchLevel::NoMatch => None,
                _ if i == 0 && j == 0 => Some(0.0),
                level => {
                    let fw_gain = match level {
                        MatchLevel::Identical if i == last_a => 0.0,
                        MatchLevel::Identical => params.identical,
                        _ => params.group,
                    };
                    let (ba, bb) = (a.block_tokens(i - 1), b.block_tokens(j - 1));
                    let end_restart = i == last_a && j == last_b && prev <= 0.0;
                    let block_gain = if ba.is_empty() && bb.is_empty() && end_restart {
                        0.0
                    } else {
                        block_similarity(ba, bb, params)
                    };
                    Some(prev + fw_gain + block_gain)
                }
            };
            let up = if i > 0 {
                score[(i - 1) * width + j] - params.fw_penalty
            } else {
                f64::NEG_INFINITY
            };
            let left = if j > 0 {
                score[i * width + j - 1] - params.fw_penalty
            } else {
                f64::NEG_INFINITY
            };
            let v = d.unwrap_or(f64::NEG_INFINITY).max(up).max(left).max(0.0);
            score[i * width + j] = v;
            diag[i * width + j] = d;
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    Grid {
        width,
        score,
        diag,
        best,
    }
}

/// Similarity score only, without backtracking.
pub fn similarity_score(a: &SentencePattern, b: &SentencePattern, w: &MetricWeights) -> f64 {
    let params = derive_params(a, b, w);
    run_grid(a, b, &params).best.0
}

pub fn similarity(a: &SentencePattern, b: &SentencePattern, w: &MetricWeights) -> MatchResult {
    let params = derive_params(a, b, w);
    let grid = run_grid(a, b, &params);
    let width = grid.width;
    let (score, bi, bj) = grid.best;
    let last_a = a.fw_count() + 1;

    let mut steps = Vec::new();
    let mut gaps = 0;
    let (mut i, mut j) = (bi, bj);
    while grid.score[i * width + j] > 0.0 {
        let v = grid.score[i * width + j];
        if grid.diag[i * width + j] == Some(v) {
            let level = fw_match_level(slot(a, i), slot(b, j));
            let fw_gain = match level {
                MatchLevel::Identical if i == last_a => 0.0,
                MatchLevel::Identical => params.identical,
                _ => params.group,
            };
            let prev = grid.score[(i - 1) * width + j - 1];
            let (ra, rb) = (a.blocks()[i - 1].clone(), b.blocks()[j - 1].clone());
            let m = align_blocks(&a.tokens()[ra.clone()], &b.tokens()[rb.clone()], &params);
            let gated = i == last_a && j == b.fw_count() + 1 && prev <= 0.0 && ra.is_empty() && rb.is_empty();
            steps.push(AlignedStep {
                a_slot: i,
                b_slot: j,
                level,
                fw_gain,
                block_gain: if gated { 0.0 } else { m.score },
                a_block: ra.start + m.a.start..ra.start + m.a.end,
                b_block: rb.start + m.b.start..rb.start + m.b.end,
            });
            i -= 1;
            j -= 1;
        } else if i > 0 && grid.score[(i - 1) * width + j] - params.fw_penalty == v {
            gaps += 1;
            i -= 1;
        } else {
            gaps += 1;
            j -= 1;
        }
    }
    steps.reverse();

    let mut fw_alignment = Vec::new();
    let mut a_tok: Vec<usize> = Vec::new();
    let mut b_tok: Vec<usize> = Vec::new();
    for s in &steps {
        if s.a_slot >= 1 && s.a_slot <= a.fw_count() {
            fw_alignment.push(FwPair {
                a: s.a_slot - 1,
                b: s.b_slot - 1,
                level: s.level,
            });
            a_tok.push(a.fw_slots()[s.a_slot - 1]);
            b_tok.push(b.fw_slots()[s.b_slot - 1]);
        }
        if !s.a_block.is_empty() {
            a_tok.extend([s.a_block.start, s.a_block.end - 1]);
            b_tok.extend([s.b_block.start, s.b_block.end - 1]);
        }
    }
    let span = |t: &[usize]| match (t.iter().min(), t.iter().max()) {
        (Some(&lo), Some(&hi)) => lo..hi + 1,
        _ => 0..0,
    };
    MatchResult {
        score,
        a_span: span(&a_tok),
        b_span: span(&b_tok),
        fw_alignment,
        steps,
        gaps,
        params,
    }
}
