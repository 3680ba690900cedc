#![allow(dead_code)]

pub mod oracle;

use ebmt_core::learn::{learn, ClusterModel, LearnConfig};
use ebmt_core::synth::{self, CorpusSpec};
use ebmt_core::{Lexicons, MetricWeights};

pub fn small_lexicons() -> Lexicons {
    Lexicons::parse(
        "the\tDET\na\tDET\nfor\tPREP\nof\tPREP\nto\tPREP\nand\tCONJ\nit\tPRON\nthereof\tPRON\n",
        "export\tnoun,verb\texport\nrefund\tnoun,verb\trefund\ncereals\tnoun\tcereal\n\
         rice\tnoun\trice\nfixed\tverb,adj\tfix\nlevy\tnoun,verb\tlevy\n",
    )
    .unwrap()
}

/// A learned model over a small synthetic corpus.
pub fn synthetic_model(sentences: usize, k: usize) -> (Lexicons, ClusterModel) {
    let lex = synth::lexicons();
    let entries = synth::corpus(&CorpusSpec::standard(sentences, 5), &lex).unwrap();
    let model = learn(entries, MetricWeights::default(), LearnConfig::with_k(k)).unwrap();
    (lex, model)
}
