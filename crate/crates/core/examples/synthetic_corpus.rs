//! Writes a synthetic lexicon pair, archive and test set to a directory, for
//! use with the `ebmt` binary.
//!
//! ```text
//! cargo run --example synthetic_corpus -- /tmp/ebmt-demo 500
//! ```

use std::fs;
use std::path::PathBuf;

use ebmt_core::archive_io::archive_to_jsonl;
use ebmt_core::synth::{self, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "ebmt-demo".into()));
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(500);
    fs::create_dir_all(&dir)?;

    let lex = synth::lexicons();
    let entries = synth::corpus(&CorpusSpec::standard(n, 11), &lex)?;
    let tests = synth::sentences(&CorpusSpec::standard(n / 5, 12));

    fs::write(dir.join("fw.tsv"), synth::FUNCTION_WORDS)?;
    fs::write(dir.join("tags.tsv"), synth::TAGS)?;
    fs::write(dir.join("archive.jsonl"), archive_to_jsonl(&entries))?;
    let test_text: String = tests.iter().map(|s| s.source.clone() + "\n").collect();
    fs::write(dir.join("test.txt"), test_text)?;
    println!("wrote {} archive entries and {} test sentences to {}", entries.len(), tests.len(), dir.display());
    Ok(())
}
