//! Deterministic synthetic archives in a legal-register English.
//!
//! Sentences are built from one to three unit templates. Every template ends
//! in a pronominal function word (`thereof`, `it`, ...), so a unit followed
//! by another unit is still closed by a function word; unit boundaries are
//! recorded as markers. The target side is a pseudo-translation: each unit
//! gets a leading unit tag followed by its words upper-cased.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lexicon::Lexicons;
use crate::pattern::{tokenize, ArchiveEntry, EntryId, Marker};

pub const FUNCTION_WORDS: &str = "\
@group DET,PREP,CONJ,PRON,AUX,NEG,REL
the\tDET
a\tDET
an\tDET
this\tDET
each\tDET
its\tDET
of\tPREP
for\tPREP
in\tPREP
on\tPREP
to\tPREP
by\tPREP
with\tPREP
from\tPREP
into\tPREP
and\tCONJ
or\tCONJ
where\tREL
which\tREL
it\tPRON
them\tPRON
thereof\tPRON
therein\tPRON
hereto\tPRON
shall\tAUX
may\tAUX
be\tAUX
is\tAUX
not\tNEG
";

pub const TAGS: &str = "\
export\tnoun,verb\texport
import\tnoun,verb\timport
refund\tnoun,verb\trefund
levy\tnoun,verb\tlevy
aid\tnoun,verb\taid
price\tnoun,verb\tprice
amount\tnoun,verb\tamount
tender\tnoun,verb,adj\ttender
contract\tnoun,verb\tcontract
deposit\tnoun,verb\tdeposit
market\tnoun,verb\tmarket
rate\tnoun,verb\trate
certificate\tnoun,verb\tcertificate
milk\tnoun,verb\tmilk
security\tnoun\tsecurity
product\tnoun\tproduct
products\tnoun\tproduct
cereals\tnoun\tcereal
rice\tnoun\trice
sugar\tnoun\tsugar
wine\tnoun\twine
beef\tnoun\tbeef
quantity\tnoun\tquantity
licence\tnoun\tlicence
payment\tnoun\tpayment
period\tnoun\tperiod
application\tnoun\tapplication
subsidy\tnoun\tsubsidy
producer\tnoun\tproducer
exporter\tnoun\texporter
duty\tnoun\tduty
fixed\tverb,adj\tfix
granted\tverb,adj\tgrant
published\tverb,adj\tpublish
determined\tverb,adj\tdetermine
adopted\tverb,adj\tadopt
notified\tverb,adj\tnotify
applied\tverb,adj\tapply
issued\tverb,adj\tissue
calculated\tverb,adj\tcalculate
paid\tverb,adj\tpay
released\tverb,adj\trelease
lodged\tverb,adj\tlodge
submitted\tverb,adj\tsubmit
refused\tverb,adj\trefuse
reduced\tverb,adj\treduce
additional\tadj\tadditional
maximum\tadj,noun\tmaximum
minimum\tadj,noun\tminimum
agricultural\tadj\tagricultural
monthly\tadj,adv\tmonthly
annual\tadj\tannual
special\tadj\tspecial
common\tadj,noun\tcommon
provisional\tadj\tprovisional
competent\tadj\tcompetent
relevant\tadj\trelevant
total\tadj,noun,verb\ttotal
member\tnoun,adj\tmember
states\tnoun,verb\tstate
state\tnoun,verb\tstate
commission\tnoun,verb\tcommission
article\tnoun\tarticle
annex\tnoun,verb\tannex
regulation\tnoun\tregulation
procedure\tnoun\tprocedure
accordance\tnoun\taccordance
laid\tverb,adj\tlay
down\tadv,prep\tdown
referred\tverb,adj\trefer
case\tnoun\tcase
purposes\tnoun\tpurpose
means\tnoun,verb\tmean
exceed\tverb\texceed
enter\tverb\tenter
force\tnoun,verb\tforce
day\tnoun\tday
date\tnoun\tdate
following\tadj,prep,verb\tfollow
publication\tnoun\tpublication
authorities\tnoun\tauthority
basis\tnoun\tbasis
apply\tverb\tapply
notify\tverb\tnotify
decide\tverb\tdecide
communicate\tverb\tcommunicate
";

pub const TEMPLATES: &[&str] = &[
    "the {N} of {N} shall be {V} by the commission therein",
    "the {A} {N} for {N} referred to in article {D} thereof",
    "member states shall notify the {N} of {N} to them",
    "in the case of {N} the {N} shall be {V} for it",
    "the {N} shall be {V} in accordance with the procedure laid down in article {D} thereof",
    "where the {N} is {V} the {A} {N} shall apply to them",
    "the {N} shall be {V} on the basis of the {A} {N} thereof",
    "for the purposes of this regulation {N} means the {A} {N} of it",
    "the {N} of the {A} {N} shall not exceed the {N} therein",
    "this regulation shall enter into force on the {D} day following its publication therein",
    "the {N} shall be {V} by the competent authorities of the member states hereto",
    "an {N} may be {V} for {N} with an {A} {N} thereof",
    "the {A} {N} shall be {V} each {N} by it",
    "the {N} and the {N} referred to in annex {D} shall be {V} therein",
    "a {N} shall be {V} from the date of the {N} hereto",
    "the {N} shall not be {V} where the {A} {N} is {V} thereof",
    "the commission may decide on the {A} {N} for it",
    "the {N} lodged with the {N} shall be {V} into the {A} {N} therein",
    "each member state shall communicate the {A} {N} to them",
    "the {A} {N} of {N} and {N} is {V} by this regulation hereto",
];

const NOUNS: &[&str] = &[
    "export", "import", "refund", "levy", "aid", "price", "amount", "tender", "contract", "deposit",
    "market", "rate", "certificate", "milk", "security", "product", "cereals", "rice", "sugar",
    "wine", "beef", "quantity", "licence", "payment", "period", "application", "subsidy",
    "producer", "exporter", "duty",
];
const VERBS: &[&str] = &[
    "fixed", "granted", "published", "determined", "adopted", "notified", "applied", "issued",
    "calculated", "paid", "released", "lodged", "submitted", "refused", "reduced",
];
const ADJECTIVES: &[&str] = &[
    "additional", "maximum", "minimum", "agricultural", "monthly", "annual", "special", "common",
    "provisional", "competent", "relevant", "total",
];
const DIGITS: &[&str] = &["1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12"];

pub fn lexicons() -> Lexicons {
    Lexicons::parse(FUNCTION_WORDS, TAGS).expect("built-in lexicons parse")
}

/// Shape of a generated corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub sentences: usize,
    /// How many of [`TEMPLATES`] are used (a prefix).
    pub templates: usize,
    /// Size of each filler pool (nouns, verbs, ...), a prefix of the pool.
    pub fillers: usize,
    pub max_units: usize,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn standard(sentences: usize, seed: u64) -> Self {
        CorpusSpec {
            sentences,
            templates: TEMPLATES.len(),
            fillers: usize::MAX,
            max_units: 3,
            seed,
        }
    }

    /// Few templates and fillers, so that units recur many times.
    pub fn high_repetition(sentences: usize, seed: u64) -> Self {
        CorpusSpec {
            sentences,
            templates: 6,
            fillers: 3,
            max_units: 3,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSentence {
    pub source: String,
    pub target: String,
    pub markers: Vec<Marker>,
    /// Source text of each unit.
    pub units: Vec<String>,
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str], limit: usize) -> &'a str {
    pool[..pool.len().min(limit)].choose(rng).expect("non-empty pool")
}

fn fill(rng: &mut ChaCha8Rng, template: &str, fillers: usize) -> String {
    template
        .split(' ')
        .map(|w| match w {
            "{N}" => pick(rng, NOUNS, fillers),
            "{V}" => pick(rng, VERBS, fillers),
            "{A}" => pick(rng, ADJECTIVES, fillers),
            "{D}" => pick(rng, DIGITS, fillers),
            w => w,
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn translate_unit(template: usize, unit: &str) -> String {
    let mut out = format!("U{template}");
    for w in tokenize(unit) {
        out.push(' ');
        out.push_str(&w.to_uppercase());
    }
    out
}

pub fn sentences(spec: &CorpusSpec) -> Vec<SynthSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let templates = spec.templates.clamp(1, TEMPLATES.len());
    (0..spec.sentences)
        .map(|_| {
            let n = match rng.gen_range(0..10) {
                0..=3 => 1,
                4..=7 => 2,
                _ => 3,
            }
            .min(spec.max_units.max(1));
            let mut s = SynthSentence {
                source: String::new(),
                target: String::new(),
                markers: Vec::new(),
                units: Vec::new(),
            };
            let (mut src_len, mut tgt_len) = (0, 0);
            for u in 0..n {
                let t = rng.gen_range(0..templates);
                let unit = fill(&mut rng, TEMPLATES[t], spec.fillers);
                let target = translate_unit(t, &unit);
                if u > 0 {
                    s.markers.push(Marker {
                        source: src_len,
                        target: tgt_len,
                    });
                    s.source.push(' ');
                    s.target.push(' ');
                }
                src_len += tokenize(&unit).len();
                tgt_len += tokenize(&target).len();
                s.source.push_str(&unit);
                s.target.push_str(&target);
                s.units.push(unit);
            }
            s
        })
        .collect()
}

/// Archive entries labelled `s0`, `s1`, ... with ids in order.
pub fn archive(sentences: &[SynthSentence], lexicons: &Lexicons) -> Result<Vec<ArchiveEntry>> {
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            ArchiveEntry::new(
                EntryId(i as u32),
                format!("s{i}"),
                &s.source,
                &s.target,
                s.markers.clone(),
                lexicons,
            )
        })
        .collect()
}

pub fn corpus(spec: &CorpusSpec, lexicons: &Lexicons) -> Result<Vec<ArchiveEntry>> {
    archive(&sentences(spec), lexicons)
}

/// Every word the built-in lexicons know, plus a few unknown ones.
pub fn vocabulary() -> Vec<String> {
    let mut words: Vec<String> = FUNCTION_WORDS
        .lines()
        .chain(TAGS.lines())
        .filter(|l| !l.starts_with('@') && !l.is_empty())
        .map(|l| l.split('\t').next().expect("surface").to_owned())
        .collect();
    words.extend(["xylo", "quorbit", "zenda", "7", "1994"].map(String::from));
    words
}

/// A random word sequence of 1 to `max_len` tokens over [`vocabulary`].
pub fn random_sentence(rng: &mut impl Rng, vocab: &[String], max_len: usize) -> String {
    let n = rng.gen_range(1..=max_len.max(1));
    (0..n)
        .map(|_| vocab.choose(rng).expect("non-empty").as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A random sentence with at most `max_fws` function words and content
/// blocks of at most `max_block` words.
pub fn random_shaped(rng: &mut impl Rng, max_fws: usize, max_block: usize) -> String {
    let lex = lexicons();
    let vocab = vocabulary();
    let (fws, content): (Vec<&String>, Vec<&String>) =
        vocab.iter().partition(|w| lex.function_words.contains(w));
    let m = rng.gen_range(0..=max_fws);
    let mut words: Vec<&str> = Vec::new();
    for k in 0..=m {
        for _ in 0..rng.gen_range(0..=max_block) {
            words.push(content.choose(rng).expect("content"));
        }
        if k < m {
            words.push(fws.choose(rng).expect("fw"));
        }
    }
    if words.is_empty() {
        words.push(content.choose(rng).expect("content"));
    }
    words.join(" ")
}
