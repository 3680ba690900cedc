//! Covers a new sentence with learned segments and prints the proposals as
//! JSON lines.

use ebmt_core::learn::{learn, LearnConfig};
use ebmt_core::retrieve::{cover_input, QueryConfig};
use ebmt_core::synth::{self, CorpusSpec};
use ebmt_core::MetricWeights;

fn main() -> ebmt_core::Result<()> {
    let lex = synth::lexicons();
    let archive = synth::corpus(&CorpusSpec::standard(300, 11), &lex)?;
    let model = learn(archive, MetricWeights::default(), LearnConfig::default())?;

    // two units that occur in the archive, glued together
    let units: Vec<_> = model.entries().iter().filter(|e| e.internal_markers().is_empty()).collect();
    let glued = format!("{} {}", units[3].source, units[40].source);
    let novel = "the levy of sugar shall be paid by the commission therein each member state shall communicate the relevant rate to them";

    let q = QueryConfig {
        clusters_to_search: 3,
        ..Default::default()
    };
    for text in [glued.as_str(), novel] {
        println!("> {text}");
        let cov = cover_input(&model, text, &lex, &q)?;
        print!("{}", cov.to_jsonl(None));
        println!();
    }
    Ok(())
}
