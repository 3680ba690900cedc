use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{tokenize_spans, SentencePattern};
use crate::error::{Error, Result};
use crate::lexicon::Lexicons;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntryId(pub u32);

impl fmt::Display for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An aligned pair of token boundaries at which source and target may be cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Marker {
    pub source: usize,
    pub target: usize,
}

impl From<(usize, usize)> for Marker {
    fn from((source, target): (usize, usize)) -> Self {
        Marker { source, target }
    }
}

impl From<Marker> for (usize, usize) {
    fn from(m: Marker) -> Self {
        (m.source, m.target)
    }
}

/// Where a segment came from: the original sentence and the token ranges
/// it occupies there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub origin: String,
    #[serde(with = "crate::span_serde")]
    pub source_range: Range<usize>,
    #[serde(with = "crate::span_serde")]
    pub target_range: Range<usize>,
}

/// One source/target pair of the translation archive.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub id: EntryId,
    pub label: String,
    pub source: String,
    pub target: String,
    pub pattern: SentencePattern,
    target_len: usize,
    markers: Vec<Marker>,
    pub provenance: Option<Provenance>,
}

/// Adds the implicit end markers and checks monotonicity and bounds.
fn normalize_markers(mut markers: Vec<Marker>, src_len: usize, tgt_len: usize) -> Result<Vec<Marker>> {
    let bad = |msg: String| Err(Error::Range(msg));
    match markers.first() {
        Some(m) if m.source == 0 || m.target == 0 => {
            if m.source != 0 || m.target != 0 {
                return bad(format!("start boundary must be [0, 0], got [{}, {}]", m.source, m.target));
            }
        }
        _ => markers.insert(0, Marker { source: 0, target: 0 }),
    }
    let last = *markers.last().expect("non-empty");
    if last.source == src_len || last.target == tgt_len {
        if last.source != src_len || last.target != tgt_len {
            return bad(format!(
                "end boundary must be [{src_len}, {tgt_len}], got [{}, {}]",
                last.source, last.target
            ));
        }
    } else {
        markers.push(Marker {
            source: src_len,
            target: tgt_len,
        });
    }
    for w in markers.windows(2) {
        if w[1].source <= w[0].source || w[1].target <= w[0].target {
            return bad(format!(
                "marker [{}, {}] does not strictly follow [{}, {}]",
                w[1].source, w[1].target, w[0].source, w[0].target
            ));
        }
    }
    if let Some(m) = markers
        .iter()
        .find(|m| m.source > src_len || m.target > tgt_len)
    {
        return bad(format!(
            "marker [{}, {}] outside sentence bounds [{src_len}, {tgt_len}]",
            m.source, m.target
        ));
    }
    Ok(markers)
}

impl ArchiveEntry {
    /// Encodes the source and validates the markers. End markers may be
    /// omitted; they are added.
    pub fn new(
        id: EntryId,
        label: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
        markers: Vec<Marker>,
        lexicons: &Lexicons,
    ) -> Result<Self> {
        let source = source.into();
        let target = target.into();
        let pattern = SentencePattern::encode(&source, lexicons)?;
        let target_len = tokenize_spans(&target).len();
        let markers = normalize_markers(markers, pattern.len(), target_len)?;
        Ok(ArchiveEntry {
            id,
            label: label.into(),
            source,
            target,
            pattern,
            target_len,
            markers,
            provenance: None,
        })
    }

    pub fn source_len(&self) -> usize {
        self.pattern.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// All markers, both ends included.
    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn internal_markers(&self) -> &[Marker] {
        &self.markers[1..self.markers.len() - 1]
    }

    pub fn is_segment(&self) -> bool {
        self.provenance.is_some()
    }

    /// Name of the original sentence this entry is (part of).
    pub fn origin(&self) -> &str {
        self.provenance
            .as_ref()
            .map(|p| p.origin.as_str())
            .unwrap_or(&self.label)
    }

    /// Smallest marker-bounded source range containing `span`, with the
    /// target range between the same marker pair.
    pub fn expand_span_to_markers(&self, span: Range<usize>) -> Result<(Range<usize>, Range<usize>)> {
        if span.start >= span.end || span.end > self.source_len() {
            return Err(Error::Range(format!(
                "span {span:?} is empty or outside entry of {} tokens",
                self.source_len()
            )));
        }
        let lo = self
            .markers
            .iter()
            .rev()
            .find(|m| m.source <= span.start)
            .expect("start marker at 0");
        let hi = self
            .markers
            .iter()
            .find(|m| m.source >= span.end)
            .expect("end marker at source_len");
        Ok((lo.source..hi.source, lo.target..hi.target))
    }

    /// Splits at an internal marker. Children get the given ids, patterns
    /// sliced from the parent (identical to re-encoding their texts), and
    /// provenance relative to the original sentence.
    pub fn split(
        &self,
        boundary: usize,
        left_id: EntryId,
        right_id: EntryId,
    ) -> Result<(ArchiveEntry, ArchiveEntry)> {
        let k = self
            .internal_markers()
            .iter()
            .position(|m| m.source == boundary)
            .map(|i| i + 1)
            .ok_or(Error::IllegalSplit(boundary))?;
        let cut = self.markers[k];

        let cut_text = |text: &str, at: usize| -> (String, String) {
            let off = tokenize_spans(text)[at].chunk.start;
            (
                text[..off].trim_end().to_owned(),
                text[off..].trim_start().to_owned(),
            )
        };
        let (src_l, src_r) = cut_text(&self.source, cut.source);
        let (tgt_l, tgt_r) = cut_text(&self.target, cut.target);

        let (origin, base_s, base_t) = match &self.provenance {
            Some(p) => (p.origin.clone(), p.source_range.start, p.target_range.start),
            None => (self.label.clone(), 0, 0),
        };
        let child = |id: EntryId,
                     source: String,
                     target: String,
                     src: Range<usize>,
                     tgt: Range<usize>,
                     markers: Vec<Marker>|
         -> Result<ArchiveEntry> {
            let source_range = base_s + src.start..base_s + src.end;
            let target_range = base_t + tgt.start..base_t + tgt.end;
            Ok(ArchiveEntry {
                id,
                label: format!("{origin}[{}..{}]", source_range.start, source_range.end),
                source,
                target,
                pattern: self.pattern.slice(src.clone())?,
                target_len: tgt.len(),
                markers,
                provenance: Some(Provenance {
                    origin: origin.clone(),
                    source_range,
                    target_range,
                }),
            })
        };

        let left = child(
            left_id,
            src_l,
            tgt_l,
            0..cut.source,
            0..cut.target,
            self.markers[..=k].to_vec(),
        )?;
        let right_markers = self.markers[k..]
            .iter()
            .map(|m| Marker {
                source: m.source - cut.source,
                target: m.target - cut.target,
            })
            .collect();
        let right = child(
            right_id,
            src_r,
            tgt_r,
            cut.source..self.source_len(),
            cut.target..self.target_len,
            right_markers,
        )?;
        Ok((left, right))
    }

    /// Rebuilds an entry from stored fields (model loading).
    pub(crate) fn restore(
        id: EntryId,
        label: String,
        source: String,
        target: String,
        markers: Vec<Marker>,
        provenance: Option<Provenance>,
        lexicons: &Lexicons,
    ) -> Result<Self> {
        let mut e = ArchiveEntry::new(id, label, source, target, markers, lexicons)?;
        e.provenance = provenance;
        Ok(e)
    }
}
