//! Shows how a sentence is split into function-word slots and content
//! blocks, and what the lexicons say about each word.
//!
//! ```text
//! cargo run --example encode_sentence -- "the export refund for cereals shall be fixed thereof"
//! ```

use ebmt_core::synth;
use ebmt_core::{SentencePattern, TokenKind};

fn main() -> ebmt_core::Result<()> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "The export refund for cereals shall be fixed monthly, thereof.".into());
    let lex = synth::lexicons();
    let p = SentencePattern::encode(&text, &lex)?;

    println!("{} tokens, {} function words, {} blocks", p.len(), p.fw_count(), p.blocks().len());
    for (k, block) in p.blocks().iter().enumerate() {
        let words: Vec<&str> = p.block_tokens(k).iter().map(|t| t.surface.as_str()).collect();
        println!("  block {k} {block:?}: [{}]", words.join(" "));
        if let Some(&slot) = p.fw_slots().get(k) {
            let t = &p.tokens()[slot];
            if let TokenKind::Function { groups, .. } = &t.kind {
                let names: Vec<&str> = groups.iter().map(|g| lex.function_words.group_name(*g)).collect();
                println!("  fw    {slot}: {} ({})", t.surface, names.join(","));
            }
        }
    }
    for t in p.tokens() {
        if let TokenKind::Content { class, lemmas } = &t.kind {
            println!("  {:<12} {{{}}} lemma {}", t.surface, lex.tags.class_names(class).join(","), lemmas.join("/"));
        }
    }
    Ok(())
}
