//! Scores two sentences and prints the backtracked alignment.
//!
//! ```text
//! cargo run --example similarity -- "the export refund for cereals thereof" "an export levy for rice thereof"
//! ```

use ebmt_core::metric::MatchLevel;
use ebmt_core::synth;
use ebmt_core::{similarity, MetricWeights, SentencePattern};

fn main() -> ebmt_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let a = args.next().unwrap_or_else(|| "the export refund for cereals shall be fixed thereof".into());
    let b = args.next().unwrap_or_else(|| "the import levy on rice shall be fixed monthly thereof".into());
    let lex = synth::lexicons();
    let (pa, pb) = (SentencePattern::encode(&a, &lex)?, SentencePattern::encode(&b, &lex)?);

    let r = similarity(&pa, &pb, &MetricWeights::default());
    println!("score {:.4}", r.score);
    println!(
        "I = {:.4}  G = {:.4}  P = {:.4}  block budget = {:.4}",
        r.params.identical, r.params.group, r.params.fw_penalty, r.params.block_budget
    );
    println!("a[{:?}] = {}", r.a_span, pa.surfaces()[r.a_span.clone()].join(" "));
    println!("b[{:?}] = {}", r.b_span, pb.surfaces()[r.b_span.clone()].join(" "));
    for s in &r.steps {
        let level = match s.level {
            MatchLevel::Identical => "I",
            MatchLevel::SameGroup => "G",
            MatchLevel::NoMatch => "-",
        };
        println!(
            "  slots ({}, {}) {level}  fw {:+.4}  block {:+.4}  {:?} ~ {:?}",
            s.a_slot, s.b_slot, s.fw_gain, s.block_gain, &pa.surfaces()[s.a_block.clone()], &pb.surfaces()[s.b_block.clone()]
        );
    }
    if r.gaps > 0 {
        println!("  {} unmatched function words", r.gaps);
    }
    Ok(())
}
