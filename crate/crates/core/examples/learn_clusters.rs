//! Learns a cluster model from a synthetic archive and prints the
//! iteration history and a few clusters.
//!
//! ```text
//! cargo run --release --example learn_clusters -- 400
//! ```

use ebmt_core::learn::{learn, LearnConfig};
use ebmt_core::synth::{self, CorpusSpec};
use ebmt_core::MetricWeights;

fn main() -> ebmt_core::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let lex = synth::lexicons();
    let archive = synth::corpus(&CorpusSpec::standard(n, 11), &lex)?;
    let model = learn(archive, MetricWeights::default(), LearnConfig::default())?;

    let s = &model.stats;
    for (i, (count, created)) in s.sentence_counts.iter().zip(&s.created).enumerate() {
        println!("iteration {}: {count} entries, {created} cut", i + 1);
    }
    println!("{} clusters", model.clusters().len());
    for c in model.clusters().iter().take(5) {
        let center = model.entry(c.center).expect("center");
        println!("\n[{} members] center {}: {}", c.members.len(), center.label, center.source);
        for id in c.members.iter().filter(|&&m| m != c.center).take(3) {
            let e = model.entry(*id).expect("member");
            println!("    {}: {}", e.label, e.source);
        }
    }
    Ok(())
}
