//! Learning phase: medoid clustering of the archive and segmentation of
//! entries that partly match other clusters.
//!
//! Clustering grows from a single cluster. Each round settles the current
//! partition (minmax centers, then every entry to its most similar center,
//! repeated until assignments stop changing) and, unless the stopping rule
//! holds, splits the cluster with the worst minimum intra-cluster similarity
//! at its most dissimilar pair.
//!
//! After clustering, every entry is compared with the centers of the other
//! clusters. A good enough match with part of an entry, widened to the
//! nearest segmentation markers, cuts the entry at one of those markers. The
//! corpus is then re-clustered, until a pass creates no new segment.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{similarity, similarity_score, MetricWeights};
use crate::pattern::{ArchiveEntry, EntryId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    /// Desired number of clusters.
    pub k_target: Option<usize>,
    /// Stop once every cluster's minimum pairwise similarity reaches this.
    pub min_intra_sim: Option<f64>,
    /// Minimum similarity between a marker-bounded part of an entry and
    /// another cluster's center for the entry to be cut.
    pub seg_threshold: f64,
    pub max_outer_iterations: usize,
    pub max_reassign_rounds: usize,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            k_target: None,
            min_intra_sim: Some(0.5),
            seg_threshold: 0.8,
            max_outer_iterations: 10,
            max_reassign_rounds: 20,
        }
    }
}

impl LearnConfig {
    pub fn with_k(k: usize) -> Self {
        LearnConfig {
            k_target: Some(k),
            min_intra_sim: None,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.k_target.is_none() && self.min_intra_sim.is_none() {
            return fail("one of k_target / min_intra_sim is required");
        }
        if self.k_target == Some(0) {
            return fail("k_target must be positive");
        }
        if let Some(t) = self.min_intra_sim {
            if !(0.0..=1.0).contains(&t) {
                return fail("min_intra_sim must lie in [0, 1]");
            }
        }
        if !(self.seg_threshold > 0.0 && self.seg_threshold <= 1.0) {
            return fail("seg_threshold must lie in (0, 1]");
        }
        if self.max_outer_iterations == 0 || self.max_reassign_rounds == 0 {
            return fail("iteration bounds must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: EntryId,
    /// Sorted; contains `center`.
    pub members: Vec<EntryId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnStats {
    /// Outer iterations run, the last one included.
    pub iterations: usize,
    /// Corpus size ("sentences" and segments) at the start of each iteration.
    pub sentence_counts: Vec<usize>,
    /// Segments created by each iteration.
    pub created: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ClusterModel {
    clusters: Vec<Cluster>,
    entries: Vec<ArchiveEntry>,
    index: HashMap<EntryId, usize>,
    pub weights: MetricWeights,
    pub config: LearnConfig,
    pub stats: LearnStats,
    next_id: u32,
}

impl ClusterModel {
    /// Assembles a model and checks that the clusters partition the entries.
    pub fn from_parts(
        mut entries: Vec<ArchiveEntry>,
        clusters: Vec<Cluster>,
        weights: MetricWeights,
        config: LearnConfig,
        stats: LearnStats,
        next_id: u32,
    ) -> Result<Self> {
        entries.sort_by_key(|e| e.id);
        let index: HashMap<EntryId, usize> =
            entries.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
        if index.len() != entries.len() {
            return Err(Error::Schema("duplicate entry id".into()));
        }
        if let Some(e) = entries.iter().find(|e| e.id.0 >= next_id) {
            return Err(Error::Schema(format!("entry id {} not below next_id {next_id}", e.id)));
        }
        let mut seen = HashSet::new();
        for (ci, c) in clusters.iter().enumerate() {
            if c.members.is_empty() || !c.members.contains(&c.center) {
                return Err(Error::Schema(format!("cluster {ci}: center must be a member")));
            }
            for m in &c.members {
                if !index.contains_key(m) {
                    return Err(Error::Schema(format!("cluster {ci}: unknown entry {m}")));
                }
                if !seen.insert(*m) {
                    return Err(Error::Schema(format!("entry {m} in more than one cluster")));
                }
            }
        }
        if seen.len() != entries.len() {
            return Err(Error::Schema("clusters do not cover every entry".into()));
        }
        Ok(ClusterModel {
            clusters,
            entries,
            index,
            weights,
            config,
            stats,
            next_id,
        })
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Sorted by id.
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn entry(&self, id: EntryId) -> Option<&ArchiveEntry> {
        self.index.get(&id).map(|&i| &self.entries[i])
    }

    pub fn center(&self, cluster: usize) -> &ArchiveEntry {
        &self.entries[self.index[&self.clusters[cluster].center]]
    }

    pub fn cluster_of(&self, id: EntryId) -> Option<usize> {
        self.clusters.iter().position(|c| c.members.binary_search(&id).is_ok())
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }
}

/// Similarities already computed, keyed by unordered id pair.
#[derive(Debug, Default)]
pub struct SimCache(HashMap<(EntryId, EntryId), f64>);

impl SimCache {
    fn key(a: EntryId, b: EntryId) -> (EntryId, EntryId) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Drops pairs involving entries no longer in the corpus.
    pub fn retain_ids(&mut self, keep: &HashSet<EntryId>) {
        self.0.retain(|(a, b), _| keep.contains(a) && keep.contains(b));
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Dense symmetric similarity matrix over a corpus, indexed by position.
pub struct PairwiseSimilarity {
    n: usize,
    values: Vec<f64>,
}

impl PairwiseSimilarity {
    pub fn build(entries: &[ArchiveEntry], weights: &MetricWeights, cache: &mut SimCache) -> Self {
        let n = entries.len();
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !cache.0.contains_key(&SimCache::key(entries[i].id, entries[j].id)))
            .collect();
        let fresh: Vec<((EntryId, EntryId), f64)> = missing
            .par_iter()
            .map(|&(i, j)| {
                let (a, b) = (&entries[i], &entries[j]);
                let (lo, hi) = if a.id <= b.id { (a, b) } else { (b, a) };
                (
                    SimCache::key(a.id, b.id),
                    similarity_score(&lo.pattern, &hi.pattern, weights),
                )
            })
            .collect();
        cache.0.extend(fresh);
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = cache.0[&SimCache::key(entries[i].id, entries[j].id)];
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        PairwiseSimilarity { n, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// The member whose lowest similarity to any other member is highest; ties
/// go to the smallest id.
pub fn minmax_center(members: &[EntryId], sim: impl Fn(EntryId, EntryId) -> f64) -> Result<EntryId> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(EntryId, f64)> = None;
    for &c in &sorted {
        let worst = sorted
            .iter()
            .filter(|&&m| m != c)
            .map(|&m| sim(c, m))
            .fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(_, b)| worst > b) {
            best = Some((c, worst));
        }
    }
    best.map(|(c, _)| c).ok_or(Error::EmptyCluster)
}

fn center_of(members: &[usize], sim: &PairwiseSimilarity) -> usize {
    let mut best = (members[0], f64::NEG_INFINITY);
    for &c in members {
        let worst = members
            .iter()
            .filter(|&&m| m != c)
            .map(|&m| sim.get(c, m))
            .fold(f64::INFINITY, f64::min);
        if worst > best.1 {
            best = (c, worst);
        }
    }
    best.0
}

/// Smallest pairwise similarity inside a cluster; `None` for singletons.
fn min_intra(members: &[usize], sim: &PairwiseSimilarity) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (k, &a) in members.iter().enumerate() {
        for &b in &members[k + 1..] {
            let v = sim.get(a, b);
            worst = Some(worst.map_or(v, |w: f64| w.min(v)));
        }
    }
    worst
}

fn assign(n: usize, centers: &[usize], sim: &PairwiseSimilarity) -> Vec<Vec<usize>> {
    let owner: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|e| {
            if let Some(c) = centers.iter().position(|&c| c == e) {
                return c;
            }
            let mut best = (0, f64::NEG_INFINITY);
            for (ci, &c) in centers.iter().enumerate() {
                let v = sim.get(e, c);
                if v > best.1 {
                    best = (ci, v);
                }
            }
            best.0
        })
        .collect();
    let mut clusters = vec![Vec::new(); centers.len()];
    for (e, c) in owner.into_iter().enumerate() {
        clusters[c].push(e);
    }
    clusters
}

/// Alternates center recomputation and reassignment until stable.
fn settle(clusters: &mut Vec<Vec<usize>>, sim: &PairwiseSimilarity, rounds: usize) -> Vec<usize> {
    for _ in 0..rounds {
        let centers: Vec<usize> = clusters.iter().map(|m| center_of(m, sim)).collect();
        let next = assign(sim.len(), &centers, sim);
        if next == *clusters {
            return centers;
        }
        *clusters = next;
    }
    clusters.iter().map(|m| center_of(m, sim)).collect()
}

fn partition(sim: &PairwiseSimilarity, config: &LearnConfig) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut clusters: Vec<Vec<usize>> = vec![(0..sim.len()).collect()];
    loop {
        let centers = settle(&mut clusters, sim, config.max_reassign_rounds);
        if config.k_target.is_some_and(|k| clusters.len() >= k) {
            return (clusters, centers);
        }
        let spread: Vec<Option<f64>> = clusters.iter().map(|m| min_intra(m, sim)).collect();
        if let Some(t) = config.min_intra_sim {
            if spread.iter().flatten().all(|&v| v >= t) {
                return (clusters, centers);
            }
        }
        let worst = spread
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
            .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
                Some((_, b)) if b <= v => acc,
                _ => Some((i, v)),
            });
        let Some((target, _)) = worst else {
            return (clusters, centers);
        };

        let members = &clusters[target];
        let mut seeds = (members[0], members[1], f64::INFINITY);
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                let v = sim.get(a, b);
                if v < seeds.2 {
                    seeds = (a, b, v);
                }
            }
        }
        let (p, q, _) = seeds;
        let (left, right): (Vec<usize>, Vec<usize>) = members
            .iter()
            .partition(|&&m| m == p || (m != q && sim.get(m, p) >= sim.get(m, q)));
        clusters[target] = left;
        clusters.push(right);
    }
}

/// Clusters a corpus. Entries are ordered by id; all ties resolve to the
/// smallest id or cluster index.
pub fn cluster_corpus(
    entries: Vec<ArchiveEntry>,
    weights: MetricWeights,
    config: LearnConfig,
) -> Result<ClusterModel> {
    cluster_cached(entries, weights, config, &mut SimCache::default())
}

pub fn cluster_cached(
    mut entries: Vec<ArchiveEntry>,
    weights: MetricWeights,
    config: LearnConfig,
    cache: &mut SimCache,
) -> Result<ClusterModel> {
    weights.validate()?;
    config.validate()?;
    if entries.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(k) = config.k_target {
        if k > entries.len() {
            return Err(Error::Config(format!(
                "k_target {k} exceeds corpus size {}",
                entries.len()
            )));
        }
    }
    entries.sort_by_key(|e| e.id);
    let sim = PairwiseSimilarity::build(&entries, &weights, cache);
    let (groups, centers) = partition(&sim, &config);
    let clusters = groups
        .iter()
        .zip(&centers)
        .map(|(members, &c)| Cluster {
            center: entries[c].id,
            members: members.iter().map(|&m| entries[m].id).collect(),
        })
        .collect();
    let next_id = entries.iter().map(|e| e.id.0 + 1).max().unwrap_or(0);
    ClusterModel::from_parts(entries, clusters, weights, config, LearnStats::default(), next_id)
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    /// The corpus after cutting, ordered by id.
    pub entries: Vec<ArchiveEntry>,
    /// Number of entries that were cut.
    pub created: usize,
    pub next_id: u32,
}

/// Where an entry should be cut, if anywhere: the best-scoring
/// marker-bounded part matching another cluster's center.
fn cut_point(model: &ClusterModel, entry: &ArchiveEntry, own: usize) -> Result<Option<usize>> {
    if entry.internal_markers().is_empty() {
        return Ok(None);
    }
    let w = &model.weights;
    let len = entry.source_len();
    let mut best: Option<(f64, usize)> = None;
    for ci in 0..model.clusters.len() {
        if ci == own {
            continue;
        }
        let center = model.center(ci);
        let r = similarity(&entry.pattern, &center.pattern, w);
        if r.a_span.is_empty() || r.a_span == (0..len) {
            continue;
        }
        let (unit, _) = entry.expand_span_to_markers(r.a_span)?;
        if unit == (0..len) {
            continue;
        }
        let unit_score = similarity_score(&entry.pattern.slice(unit.clone())?, &center.pattern, w);
        if unit_score >= model.config.seg_threshold && best.map_or(true, |(b, _)| unit_score > b) {
            let boundary = if unit.start > 0 { unit.start } else { unit.end };
            best = Some((unit_score, boundary));
        }
    }
    Ok(best.map(|(_, b)| b))
}

/// One pass of cross-cluster segmentation. Each entry is cut at most once.
pub fn cross_cluster_segmentation(model: &ClusterModel) -> Result<Segmentation> {
    let owner: HashMap<EntryId, usize> = model
        .clusters
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.members.iter().map(move |&m| (m, ci)))
        .collect();
    let cuts: Vec<Option<usize>> = model
        .entries
        .par_iter()
        .map(|e| cut_point(model, e, owner[&e.id]))
        .collect::<Result<_>>()?;

    let mut next_id = model.next_id;
    let mut created = 0;
    let mut entries = Vec::with_capacity(model.entries.len());
    for (e, cut) in model.entries.iter().zip(cuts) {
        match cut {
            Some(boundary) => {
                let (l, r) = e.split(boundary, EntryId(next_id), EntryId(next_id + 1))?;
                next_id += 2;
                created += 1;
                entries.push(l);
                entries.push(r);
            }
            None => entries.push(e.clone()),
        }
    }
    entries.sort_by_key(|e| e.id);
    Ok(Segmentation {
        entries,
        created,
        next_id,
    })
}

/// The full learning phase: cluster, segment, and repeat until no new
/// segment appears (or `max_outer_iterations` is reached).
pub fn learn(archive: Vec<ArchiveEntry>, weights: MetricWeights, config: LearnConfig) -> Result<ClusterModel> {
    weights.validate()?;
    config.validate()?;
    if archive.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut cache = SimCache::default();
    let mut stats = LearnStats::default();
    let mut entries = archive;
    let mut next_id = entries.iter().map(|e| e.id.0 + 1).max().unwrap_or(0);
    for iteration in 1..=config.max_outer_iterations {
        stats.sentence_counts.push(entries.len());
        let mut model = cluster_cached(entries, weights, config.clone(), &mut cache)?;
        model.next_id = model.next_id.max(next_id);
        let seg = cross_cluster_segmentation(&model)?;
        stats.iterations = iteration;
        stats.created.push(seg.created);
        if seg.created == 0 {
            model.stats = stats;
            return Ok(model);
        }
        let keep: HashSet<EntryId> = seg.entries.iter().map(|e| e.id).collect();
        cache.retain_ids(&keep);
        entries = seg.entries;
        next_id = seg.next_id;
    }
    let mut model = cluster_cached(entries, weights, config, &mut cache)?;
    model.next_id = model.next_id.max(next_id);
    model.stats = stats;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicons;
    use crate::pattern::Marker;

    fn lex() -> Lexicons {
        Lexicons::parse(
            "the\tDET\nof\tPREP\nfor\tPREP\nin\tPREP\nthereof\tPRON\nit\tPRON\n",
            "export\tnoun,verb\texport\nrefund\tnoun,verb\trefund\ncereals\tnoun\tcereal\n\
             rice\tnoun\trice\nshall\taux\tshall\napply\tverb\tapply\npublish\tverb\tpublish\n\
             commission\tnoun\tcommission\nregulation\tnoun\tregulation\n",
        )
        .unwrap()
    }

    fn entry(id: u32, src: &str, markers: &[(usize, usize)]) -> ArchiveEntry {
        ArchiveEntry::new(
            EntryId(id),
            format!("s{id}"),
            src,
            src.to_uppercase(),
            markers.iter().map(|&m| Marker::from(m)).collect(),
            &lex(),
        )
        .unwrap()
    }

    #[test]
    fn minmax_examples() {
        let (a, b, c) = (EntryId(1), EntryId(2), EntryId(3));
        assert_eq!(minmax_center(&[a], |_, _| 0.0).unwrap(), a);
        let table = |x: EntryId, y: EntryId| match (x.0.min(y.0), x.0.max(y.0)) {
            (1, 2) => 0.9,
            (1, 3) => 0.8,
            (2, 3) => 0.5,
            _ => unreachable!(),
        };
        assert_eq!(minmax_center(&[c, b, a], table).unwrap(), a);
        assert_eq!(minmax_center(&[c, b], |_, _| 0.4).unwrap(), b);
        assert!(matches!(minmax_center(&[], |_, _| 0.0), Err(Error::EmptyCluster)));
    }

    #[test]
    fn single_entry_single_cluster() {
        let m = cluster_corpus(vec![entry(0, "the refund", &[])], Default::default(), LearnConfig::with_k(1)).unwrap();
        assert_eq!(m.clusters().len(), 1);
        assert_eq!(m.clusters()[0].members, vec![EntryId(0)]);
    }

    #[test]
    fn k_equal_to_size_gives_singletons() {
        let entries = vec![
            entry(0, "the export refund", &[]),
            entry(1, "the export refund", &[]),
            entry(2, "of cereals", &[]),
        ];
        let m = cluster_corpus(entries, Default::default(), LearnConfig::with_k(3)).unwrap();
        assert_eq!(m.clusters().len(), 3);
        assert!(m.clusters().iter().all(|c| c.members.len() == 1));
    }

    #[test]
    fn k_above_size_rejected() {
        let r = cluster_corpus(vec![entry(0, "the refund", &[])], Default::default(), LearnConfig::with_k(2));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn quality_threshold_drives_splits() {
        let entries = vec![
            entry(0, "the export refund for cereals", &[]),
            entry(1, "the export refund for rice", &[]),
            entry(2, "the commission shall publish it", &[]),
            entry(3, "the commission shall apply it", &[]),
        ];
        let cfg = LearnConfig {
            k_target: None,
            min_intra_sim: Some(0.6),
            ..Default::default()
        };
        let m = cluster_corpus(entries, Default::default(), cfg).unwrap();
        let groups: Vec<Vec<u32>> = m
            .clusters()
            .iter()
            .map(|c| c.members.iter().map(|e| e.0).collect())
            .collect();
        assert_eq!(groups, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn segmentation_cuts_at_marker_of_matching_half() {
        let entries = vec![
            entry(0, "the export refund for cereals", &[]),
            entry(1, "the commission shall publish it", &[]),
            // first unit equals center 0, second unit unrelated
            entry(2, "the export refund for cereals in the regulation thereof", &[(5, 5)]),
        ];
        let clusters = vec![
            Cluster { center: EntryId(0), members: vec![EntryId(0)] },
            Cluster { center: EntryId(1), members: vec![EntryId(1), EntryId(2)] },
        ];
        let model = ClusterModel::from_parts(
            entries,
            clusters,
            Default::default(),
            LearnConfig::with_k(2),
            LearnStats::default(),
            3,
        )
        .unwrap();
        let seg = cross_cluster_segmentation(&model).unwrap();
        assert_eq!(seg.created, 1);
        let kids: Vec<&ArchiveEntry> = seg.entries.iter().filter(|e| e.is_segment()).collect();
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].source, "the export refund for cereals");
        assert_eq!(kids[0].provenance.as_ref().unwrap().source_range, 0..5);
        assert_eq!(kids[1].source, "in the regulation thereof");
    }

    #[test]
    fn whole_matches_and_weak_matches_do_not_cut() {
        let entries = vec![
            entry(0, "the export refund for cereals", &[]),
            entry(1, "the commission shall publish it", &[]),
            entry(2, "the commission shall apply it in the regulation thereof", &[(5, 5)]),
        ];
        let mut cfg = LearnConfig::with_k(2);
        cfg.seg_threshold = 1.0;
        let model = cluster_corpus(entries.clone(), Default::default(), cfg).unwrap();
        assert_eq!(cross_cluster_segmentation(&model).unwrap().created, 0);

        let unmarked: Vec<ArchiveEntry> = entries
            .into_iter()
            .map(|e| entry(e.id.0, &e.source, &[]))
            .collect();
        let model = learn(unmarked, Default::default(), LearnConfig::with_k(2)).unwrap();
        assert_eq!(model.stats.iterations, 1);
        assert_eq!(model.stats.created, vec![0]);
    }

    #[test]
    fn learn_iterates_to_fixpoint() {
        let entries = vec![
            entry(0, "the export refund for cereals", &[]),
            entry(1, "the commission shall publish it", &[]),
            entry(2, "the export refund for cereals in the commission shall publish it", &[(5, 5)]),
            entry(3, "the export refund for rice", &[]),
        ];
        let model = learn(entries, Default::default(), LearnConfig::with_k(2)).unwrap();
        assert_eq!(model.stats.created.last(), Some(&0));
        assert!(model.stats.sentence_counts.windows(2).all(|w| w[0] <= w[1]));
        assert!(model.entries().iter().any(|e| e.is_segment()));
        let total: usize = model.clusters().iter().map(|c| c.members.len()).sum();
        assert_eq!(total, model.entries().len());
    }
}
