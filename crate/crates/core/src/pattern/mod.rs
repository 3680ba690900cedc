//! Tokenization and sentence patterns.
//!
//! A [`SentencePattern`] views a sentence as an alternation of content-word
//! blocks and function-word slots. With `m` function words there are always
//! `m + 1` blocks (any of which may be empty): block `k` holds the content
//! words strictly between slot `k - 1` and slot `k`, where slot `-1` is the
//! start sentinel and slot `m` the end sentinel.

mod entry;

use std::ops::Range;

use crate::error::{Error, Result};
use crate::lexicon::{Lexicons, Token};

pub use entry::{ArchiveEntry, EntryId, Marker, Provenance};

/// Byte offsets of one token inside its source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    /// The whitespace-delimited chunk the word came from, punctuation included.
    pub chunk: Range<usize>,
    /// The word itself, leading and trailing punctuation stripped.
    pub word: Range<usize>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Word tokens with byte offsets. Punctuation at the edges of a chunk is
/// split off and dropped; a chunk made only of punctuation yields nothing.
pub fn tokenize_spans(text: &str) -> Vec<TokenSpan> {
    let mut out = Vec::new();
    let mut chunk_start = None;
    let push = |start: usize, end: usize, out: &mut Vec<TokenSpan>| {
        let chunk = &text[start..end];
        let Some(first) = chunk.find(is_word_char) else {
            return;
        };
        let last = chunk
            .char_indices()
            .rev()
            .find(|&(_, c)| is_word_char(c))
            .map(|(i, c)| i + c.len_utf8())
            .unwrap_or(chunk.len());
        out.push(TokenSpan {
            chunk: start..end,
            word: start + first..start + last,
        });
    };
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                push(s, i, &mut out);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(s) = chunk_start {
        push(s, text.len(), &mut out);
    }
    out
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text)
        .into_iter()
        .map(|s| text[s.word].to_owned())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePattern {
    tokens: Vec<Token>,
    fw_slots: Vec<usize>,
    blocks: Vec<Range<usize>>,
}

impl SentencePattern {
    pub fn from_tokens(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptySentence);
        }
        let fw_slots: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_function_word())
            .map(|(i, _)| i)
            .collect();
        let mut blocks = Vec::with_capacity(fw_slots.len() + 1);
        let mut start = 0;
        for &slot in &fw_slots {
            blocks.push(start..slot);
            start = slot + 1;
        }
        blocks.push(start..tokens.len());
        Ok(SentencePattern {
            tokens,
            fw_slots,
            blocks,
        })
    }

    pub fn encode(text: &str, lexicons: &Lexicons) -> Result<Self> {
        let tokens = tokenize(text)
            .iter()
            .map(|s| lexicons.classify(s))
            .collect();
        Self::from_tokens(tokens)
    }

    /// A standalone pattern for a token sub-range (sentinels re-applied).
    pub fn slice(&self, range: Range<usize>) -> Result<Self> {
        if range.start > range.end || range.end > self.tokens.len() {
            return Err(Error::Range(format!(
                "{range:?} outside sentence of {} tokens",
                self.tokens.len()
            )));
        }
        Self::from_tokens(self.tokens[range].to_vec())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false; an empty pattern cannot be constructed.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn fw_count(&self) -> usize {
        self.fw_slots.len()
    }

    /// Token indices of the function words, in order.
    pub fn fw_slots(&self) -> &[usize] {
        &self.fw_slots
    }

    pub fn fw_token(&self, k: usize) -> &Token {
        &self.tokens[self.fw_slots[k]]
    }

    /// Token ranges of the `fw_count() + 1` content blocks.
    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn block_tokens(&self, k: usize) -> &[Token] {
        &self.tokens[self.blocks[k].clone()]
    }

    /// Interleaves blocks and slots back into token order.
    pub fn reconstruct(&self) -> Vec<&Token> {
        let mut out = Vec::with_capacity(self.tokens.len());
        for (k, block) in self.blocks.iter().enumerate() {
            out.extend(&self.tokens[block.clone()]);
            if let Some(&slot) = self.fw_slots.get(k) {
                out.push(&self.tokens[slot]);
            }
        }
        out
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn text(&self) -> String {
        self.surfaces().join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn module_lexicons() -> Lexicons {
        Lexicons::parse(
            "the\tDET\nfor\tPREP\nof\tPREP\n",
            "export\tnoun,verb\texport\nrefund\tnoun,verb\trefund\ncereals\tnoun\tcereal\n",
        )
        .unwrap()
    }

    #[test]
    fn tokenize_drops_edge_punctuation() {
        assert_eq!(tokenize("the export refund."), vec!["the", "export", "refund"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a, b"), vec!["a", "b"]);
        assert_eq!(tokenize(" -- (a) 1.5% don't"), vec!["a", "1.5", "don't"]);
    }

    #[test]
    fn token_spans_point_into_text() {
        let text = "Article 3, (b) applies.";
        let spans = tokenize_spans(text);
        let words: Vec<&str> = spans.iter().map(|s| &text[s.word.clone()]).collect();
        assert_eq!(words, vec!["Article", "3", "b", "applies"]);
        assert_eq!(&text[spans[2].chunk.clone()], "(b)");
    }

    #[test]
    fn encode_module_example() {
        let lex = module_lexicons();
        let p = SentencePattern::encode("the export refund for cereals", &lex).unwrap();
        let fws: Vec<&str> = (0..p.fw_count()).map(|k| p.fw_token(k).surface.as_str()).collect();
        assert_eq!(fws, vec!["the", "for"]);
        let blocks: Vec<Vec<&str>> = (0..p.blocks().len())
            .map(|k| p.block_tokens(k).iter().map(|t| t.surface.as_str()).collect())
            .collect();
        assert_eq!(
            blocks,
            vec![vec![], vec!["export", "refund"], vec!["cereals"]]
        );
    }

    #[test]
    fn encode_degenerate_shapes() {
        let lex = module_lexicons();
        let p = SentencePattern::encode("export refund", &lex).unwrap();
        assert_eq!(p.fw_count(), 0);
        assert_eq!(p.blocks(), &[0..2]);

        let p = SentencePattern::encode("the the", &lex).unwrap();
        assert_eq!(p.fw_count(), 2);
        assert_eq!(p.blocks(), &[0..0, 1..1, 2..2]);

        assert!(matches!(
            SentencePattern::encode(" ... ", &lex),
            Err(Error::EmptySentence)
        ));
    }

    #[test]
    fn slice_reapplies_sentinels() {
        let lex = module_lexicons();
        let p = SentencePattern::encode("the export refund for cereals", &lex).unwrap();
        let s = p.slice(1..4).unwrap();
        assert_eq!(s.surfaces(), vec!["export", "refund", "for"]);
        assert_eq!(s.fw_slots(), &[2]);
        assert_eq!(s.blocks(), &[0..2, 3..3]);
        assert_eq!(
            s,
            SentencePattern::encode("export refund for", &lex).unwrap()
        );
        assert!(p.slice(2..9).is_err());
    }

    proptest! {
        #[test]
        fn alternation_reconstructs_tokens(words in prop::collection::vec(
            prop::sample::select(vec!["the", "of", "for", "export", "refund", "cereals", "rice", "xyz"]),
            1..24,
        )) {
            let lex = module_lexicons();
            let p = SentencePattern::encode(&words.join(" "), &lex).unwrap();
            prop_assert_eq!(p.blocks().len(), p.fw_count() + 1);
            let rebuilt: Vec<&str> = p.reconstruct().iter().map(|t| t.surface.as_str()).collect();
            prop_assert_eq!(rebuilt, words.clone());
            // every token is in exactly one block or one slot
            let mut seen = vec![0u8; p.len()];
            for b in p.blocks() {
                for i in b.clone() { seen[i] += 1; prop_assert!(!p.tokens()[i].is_function_word()); }
            }
            for &s in p.fw_slots() { seen[s] += 1; prop_assert!(p.tokens()[s].is_function_word()); }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
