//! Brute-force reference for the similarity metric: every monotone path
//! through both grids is enumerated explicitly and the best running sum is
//! kept. Nothing here calls into the crate's metric code.

use ebmt_core::{SentencePattern, Token, TokenKind};

#[derive(Clone, Copy, PartialEq)]
enum Slot<'a> {
    Start,
    Fw(&'a Token),
    End,
}

fn slots(p: &SentencePattern) -> Vec<Slot<'_>> {
    let mut v = vec![Slot::Start];
    v.extend(p.tokens().iter().filter(|t| t.is_function_word()).map(Slot::Fw));
    v.push(Slot::End);
    v
}

/// Content blocks between consecutive slots, computed from the raw tokens.
fn blocks(p: &SentencePattern) -> Vec<Vec<&Token>> {
    let mut out = vec![Vec::new()];
    for t in p.tokens() {
        if t.is_function_word() {
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(t);
        }
    }
    out
}

struct Params {
    i: f64,
    g: f64,
    p: f64,
    budget: f64,
    t_ratio: f64,
    pt_ratio: f64,
}

fn params(fa: usize, fb: usize, w_f: f64, g_ratio: f64, p_ratio: f64, t_ratio: f64, pt_ratio: f64) -> Params {
    let m = fa.max(fb);
    if m == 0 {
        return Params { i: 0.0, g: 0.0, p: 0.0, budget: 1.0, t_ratio, pt_ratio };
    }
    let i = w_f / m as f64;
    Params { i, g: g_ratio * i, p: p_ratio * i, budget: (1.0 - w_f) / (m as f64 + 1.0), t_ratio, pt_ratio }
}

fn fw_gain(a: Slot, b: Slot, prm: &Params) -> Option<f64> {
    match (a, b) {
        (Slot::Start, Slot::Start) | (Slot::End, Slot::End) => Some(0.0),
        (Slot::Fw(x), Slot::Fw(y)) => match (&x.kind, &y.kind) {
            (TokenKind::Function { id: ia, groups: ga }, TokenKind::Function { id: ib, groups: gb }) => {
                if ia == ib {
                    Some(prm.i)
                } else if ga.iter().any(|g| gb.contains(g)) {
                    Some(prm.g)
                } else {
                    None
                }
            }
            _ => unreachable!(),
        },
        _ => None,
    }
}

fn content_gain(a: &Token, b: &Token, l: f64, t: f64) -> Option<f64> {
    match (&a.kind, &b.kind) {
        (TokenKind::Content { class: ca, lemmas: la }, TokenKind::Content { class: cb, lemmas: lb }) => {
            if la.iter().any(|x| lb.contains(x)) {
                Some(l)
            } else if ca.tags().iter().any(|x| cb.tags().contains(x)) {
                Some(t)
            } else {
                None
            }
        }
        _ => unreachable!(),
    }
}

fn walk_block(a: &[&Token], b: &[&Token], i: usize, j: usize, sum: f64, l: f64, t: f64, pen: f64, best: &mut f64) {
    *best = best.max(sum);
    if i < a.len() && j < b.len() {
        if let Some(g) = content_gain(a[i], b[j], l, t) {
            walk_block(a, b, i + 1, j + 1, sum + g, l, t, pen, best);
        }
    }
    if i < a.len() {
        walk_block(a, b, i + 1, j, sum - pen, l, t, pen, best);
    }
    if j < b.len() {
        walk_block(a, b, i, j + 1, sum - pen, l, t, pen, best);
    }
}

fn block_brute(a: &[&Token], b: &[&Token], prm: &Params) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return prm.budget,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let l = prm.budget / a.len().max(b.len()) as f64;
    let mut best = 0.0;
    for i in 0..=a.len() {
        for j in 0..=b.len() {
            walk_block(a, b, i, j, 0.0, l, prm.t_ratio * l, prm.pt_ratio * l, &mut best);
        }
    }
    best
}

struct Outer<'a> {
    sa: Vec<Slot<'a>>,
    sb: Vec<Slot<'a>>,
    ba: Vec<Vec<&'a Token>>,
    bb: Vec<Vec<&'a Token>>,
    /// `blk[i][j]`: block `i` of a against block `j` of b, by enumeration.
    blk: Vec<Vec<f64>>,
    prm: Params,
}

impl Outer<'_> {
    fn walk(&self, i: usize, j: usize, sum: f64, best: &mut f64) {
        *best = best.max(sum);
        let (na, nb) = (self.sa.len(), self.sb.len());
        if i + 1 < na && j + 1 < nb {
            if let Some(f) = fw_gain(self.sa[i + 1], self.sb[j + 1], &self.prm) {
                let (xa, xb) = (&self.ba[i], &self.bb[j]);
                let end = i + 2 == na && j + 2 == nb;
                // trailing empty blocks only count when the path arrives with credit
                let gated = end && xa.is_empty() && xb.is_empty() && sum <= 0.0;
                let blk = if gated { 0.0 } else { self.blk[i][j] };
                self.walk(i + 1, j + 1, sum + f + blk, best);
            }
        }
        if i + 1 < na {
            self.walk(i + 1, j, sum - self.prm.p, best);
        }
        if j + 1 < nb {
            self.walk(i, j + 1, sum - self.prm.p, best);
        }
    }
}

/// Default weights (all 0.5).
pub fn brute_similarity(a: &SentencePattern, b: &SentencePattern) -> f64 {
    brute_similarity_with(a, b, [0.5; 5])
}

/// `w` = [w_f, g_ratio, p_ratio, t_ratio, pt_ratio].
pub fn brute_similarity_with(a: &SentencePattern, b: &SentencePattern, w: [f64; 5]) -> f64 {
    let sa = slots(a);
    let sb = slots(b);
    let prm = params(sa.len() - 2, sb.len() - 2, w[0], w[1], w[2], w[3], w[4]);
    let (ba, bb) = (blocks(a), blocks(b));
    let blk = ba.iter().map(|x| bb.iter().map(|y| block_brute(x, y, &prm)).collect()).collect();
    let o = Outer { sa, sb, ba, bb, blk, prm };
    let mut best = 0.0;
    for i in 0..o.sa.len() {
        for j in 0..o.sb.len() {
            o.walk(i, j, 0.0, &mut best);
        }
    }
    best
}
