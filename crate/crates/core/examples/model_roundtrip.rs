//! Saves a learned model, loads it back and checks that queries give
//! byte-identical output. Loading against a different lexicon is refused.

use ebmt_core::archive_io::{load_model, save_model};
use ebmt_core::learn::{learn, LearnConfig};
use ebmt_core::retrieve::{cover_input, QueryConfig};
use ebmt_core::synth::{self, CorpusSpec};
use ebmt_core::{Lexicons, MetricWeights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lex = synth::lexicons();
    let archive = synth::corpus(&CorpusSpec::standard(200, 11), &lex)?;
    let model = learn(archive, MetricWeights::default(), LearnConfig::with_k(8))?;

    let path = std::env::temp_dir().join("ebmt-roundtrip-model.json");
    save_model(&model, &lex, &path)?;
    let loaded = load_model(&path, &lex)?;
    println!("saved and reloaded {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());

    let q = QueryConfig::default();
    for s in synth::sentences(&CorpusSpec::standard(5, 99)) {
        let a = cover_input(&model, &s.source, &lex, &q)?.to_jsonl(None);
        let b = cover_input(&loaded, &s.source, &lex, &q)?.to_jsonl(None);
        println!("{} proposal lines, identical: {}", a.lines().count() - 1, a == b);
    }

    let changed = Lexicons::parse(&format!("{}herein\tPRON\n", synth::FUNCTION_WORDS), synth::TAGS)?;
    match load_model(&path, &changed) {
        Err(e) => println!("with a changed lexicon: {e}"),
        Ok(_) => println!("unexpectedly loaded"),
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
