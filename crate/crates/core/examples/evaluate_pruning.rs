//! How much does searching only the favourite cluster(s) lose against an
//! exhaustive scan? Prints a MISSED / MISSED BY table for several cluster
//! counts and search widths.
//!
//! ```text
//! cargo run --release --example evaluate_pruning
//! ```

use ebmt_core::eval::{evaluate_retrieval, render_table};
use ebmt_core::learn::{learn, LearnConfig};
use ebmt_core::retrieve::QueryConfig;
use ebmt_core::synth::{self, CorpusSpec};
use ebmt_core::{MetricWeights, SentencePattern};

fn main() -> ebmt_core::Result<()> {
    let lex = synth::lexicons();
    let archive = synth::corpus(&CorpusSpec::standard(500, 11), &lex)?;
    let tests = synth::sentences(&CorpusSpec::standard(200, 12))
        .iter()
        .map(|s| SentencePattern::encode(&s.source, &lex))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for k in [5, 10, 20] {
        let model = learn(archive.clone(), MetricWeights::default(), LearnConfig::with_k(k))?;
        for c in [1, 2] {
            let q = QueryConfig {
                clusters_to_search: c,
                ..Default::default()
            };
            rows.push((format!("K={k} c={c}"), evaluate_retrieval(&model, &tests, &q)?));
        }
    }
    let view: Vec<(String, &_)> = rows.iter().map(|(l, r)| (l.clone(), r)).collect();
    print!("{}", render_table(&view));
    Ok(())
}
