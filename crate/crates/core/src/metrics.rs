//! Clustering evaluation: purity, collocation and F1 per predicate,
//! aggregated with argument-count weights, plus the syntactic-function
//! baseline.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use serde::Serialize;

use crate::corpus::{PredicateInstance, Sentence};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusteredArgument {
    pub cluster: usize,
    pub gold: Option<String>,
}

/// Arguments grouped by predicate lemma; clusters are never compared across
/// predicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoleClustering {
    pub predicates: BTreeMap<String, Vec<ClusteredArgument>>,
}

impl RoleClustering {
    /// `labels[i][j]` is the cluster of argument `j` of `instances[i]`.
    pub fn from_predictions(instances: &[PredicateInstance], labels: &[Vec<usize>]) -> Self {
        assert_eq!(instances.len(), labels.len());
        let mut out = RoleClustering::default();
        for (inst, roles) in instances.iter().zip(labels) {
            assert_eq!(inst.arguments.len(), roles.len());
            let entry = out.predicates.entry(inst.predicate_lemma.clone()).or_default();
            for (arg, &cluster) in inst.arguments.iter().zip(roles) {
                entry.push(ClusteredArgument {
                    cluster,
                    gold: arg.role.clone(),
                });
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.predicates.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn intersections<C, G>(pairs: &[(C, G)]) -> HashMap<(&C, &G), usize>
where
    C: Eq + Hash,
    G: Eq + Hash,
{
    let mut counts = HashMap::new();
    for (c, g) in pairs {
        *counts.entry((c, g)).or_insert(0) += 1;
    }
    counts
}

/// `PU = (1/N) Σ_i max_j |G_j ∩ C_i|` over `(cluster, gold)` pairs.
pub fn purity<C: Eq + Hash, G: Eq + Hash>(pairs: &[(C, G)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let mut best: HashMap<&C, usize> = HashMap::new();
    for ((c, _), n) in intersections(pairs) {
        let b = best.entry(c).or_insert(0);
        *b = (*b).max(n);
    }
    best.values().sum::<usize>() as f64 / pairs.len() as f64
}

/// `CO = (1/N) Σ_j max_i |G_j ∩ C_i|` over `(cluster, gold)` pairs.
pub fn collocation<C: Eq + Hash, G: Eq + Hash>(pairs: &[(C, G)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let mut best: HashMap<&G, usize> = HashMap::new();
    for ((_, g), n) in intersections(pairs) {
        let b = best.entry(g).or_insert(0);
        *b = (*b).max(n);
    }
    best.values().sum::<usize>() as f64 / pairs.len() as f64
}

pub fn f1(pu: f64, co: f64) -> f64 {
    if pu + co == 0.0 {
        0.0
    } else {
        2.0 * pu * co / (pu + co)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredicateScores {
    pub predicate: String,
    pub count: usize,
    pub pu: f64,
    pub co: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scores {
    pub pu: f64,
    pub co: f64,
    pub f1: f64,
    /// Arguments scored.
    pub count: usize,
    /// Arguments skipped for lacking a gold role.
    pub excluded: usize,
    pub per_predicate: Vec<PredicateScores>,
}

/// Count-weighted means of per-predicate PU and CO; F1 from the aggregates.
pub fn aggregate(per_predicate: Vec<PredicateScores>) -> Scores {
    let count: usize = per_predicate.iter().map(|p| p.count).sum();
    let (mut pu, mut co) = (0.0, 0.0);
    if count > 0 {
        for p in &per_predicate {
            let w = p.count as f64 / count as f64;
            pu += w * p.pu;
            co += w * p.co;
        }
    }
    Scores {
        pu,
        co,
        f1: f1(pu, co),
        count,
        excluded: 0,
        per_predicate,
    }
}

pub fn evaluate(clustering: &RoleClustering) -> Scores {
    let mut excluded = 0;
    let mut per_predicate = Vec::new();
    for (predicate, args) in &clustering.predicates {
        let pairs: Vec<(usize, &str)> = args
            .iter()
            .filter_map(|a| a.gold.as_deref().map(|g| (a.cluster, g)))
            .collect();
        excluded += args.len() - pairs.len();
        if pairs.is_empty() {
            continue;
        }
        let (pu, co) = (purity(&pairs), collocation(&pairs));
        per_predicate.push(PredicateScores {
            predicate: predicate.clone(),
            count: pairs.len(),
            pu,
            co,
            f1: f1(pu, co),
        });
    }
    let mut scores = aggregate(per_predicate);
    scores.excluded = excluded;
    scores
}

/// Deprels ranked by frequency over argument tokens, ties lexicographic.
pub fn deprel_ranking(sentences: &[Sentence], instances: &[PredicateInstance]) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for inst in instances {
        let s = &sentences[inst.sentence];
        for a in &inst.arguments {
            *counts.entry(s.token(a.token).deprel.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().map(|(d, c)| (d.to_owned(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Cluster id of each argument under the SyntF baseline: rank of its deprel
/// among the `k` most frequent, or `k` for everything else.
pub fn syntf_labels(sentences: &[Sentence], instances: &[PredicateInstance], k: usize) -> Vec<Vec<usize>> {
    let rank: HashMap<String, usize> = deprel_ranking(sentences, instances)
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (d, _))| (d, i))
        .collect();
    instances
        .iter()
        .map(|inst| {
            let s = &sentences[inst.sentence];
            inst.arguments
                .iter()
                .map(|a| rank.get(&s.token(a.token).deprel).copied().unwrap_or(k))
                .collect()
        })
        .collect()
}

pub fn syntf_baseline(sentences: &[Sentence], instances: &[PredicateInstance], k: usize) -> RoleClustering {
    RoleClustering::from_predictions(instances, &syntf_labels(sentences, instances, k))
}

impl Scores {
    /// Tab-separated report: an overall row followed by one row per predicate.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("scope\tpredicate\targuments\tPU\tCO\tF1\n");
        let _ = writeln!(
            out,
            "overall\t*\t{}\t{:.4}\t{:.4}\t{:.4}",
            self.count, self.pu, self.co, self.f1
        );
        for p in &self.per_predicate {
            let _ = writeln!(
                out,
                "predicate\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                p.predicate, p.count, p.pu, p.co, p.f1
            );
        }
        if self.excluded > 0 {
            let _ = writeln!(out, "excluded\t*\t{}\t\t\t", self.excluded);
        }
        out
    }

    pub fn summary_line(&self) -> String {
        format!("PU\t{:.4}\tCO\t{:.4}\tF1\t{:.4}", self.pu, self.co, self.f1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scores serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> Vec<(usize, &'static str)> {
        vec![(1, "A"), (1, "A"), (1, "B"), (2, "B"), (2, "B")]
    }

    #[test]
    fn worked_purity_and_collocation() {
        let pairs = worked_example();
        assert!((purity(&pairs) - 0.8).abs() < 1e-15);
        assert!((collocation(&pairs) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn identical_clusterings() {
        let pairs = vec![(7, "A"), (7, "A"), (3, "B"), (9, "C")];
        assert_eq!(purity(&pairs), 1.0);
        assert_eq!(collocation(&pairs), 1.0);
    }

    #[test]
    fn degenerate_clusterings() {
        let one: Vec<(usize, &str)> = vec![(0, "A"), (0, "A"), (0, "A"), (0, "B"), (0, "C")];
        assert!((purity(&one) - 0.6).abs() < 1e-15);
        assert_eq!(collocation(&one), 1.0);
        let singletons: Vec<(usize, &str)> = vec![(0, "A"), (1, "A"), (2, "A"), (3, "B"), (4, "C")];
        assert_eq!(purity(&singletons), 1.0);
        assert!((collocation(&singletons) - 3.0 / 5.0).abs() < 1e-15);
    }

    fn ps(pu: f64, co: f64, count: usize) -> PredicateScores {
        PredicateScores {
            predicate: String::new(),
            count,
            pu,
            co,
            f1: f1(pu, co),
        }
    }

    #[test]
    fn weighted_aggregate() {
        let s = aggregate(vec![ps(0.8, 0.8, 5), ps(1.0, 1.0, 5)]);
        assert!((s.pu - 0.9).abs() < 1e-15);
        let single = aggregate(vec![ps(0.7, 0.4, 3)]);
        assert!((single.pu - 0.7).abs() < 1e-15 && (single.co - 0.4).abs() < 1e-15);
        let equal = aggregate(vec![ps(0.6, 0.6, 2)]);
        assert!((equal.f1 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn evaluation_excludes_unlabeled() {
        let mut c = RoleClustering::default();
        c.predicates.insert(
            "open".into(),
            vec![
                ClusteredArgument {
                    cluster: 0,
                    gold: Some("A0".into()),
                },
                ClusteredArgument {
                    cluster: 0,
                    gold: None,
                },
                ClusteredArgument {
                    cluster: 1,
                    gold: Some("A1".into()),
                },
            ],
        );
        let s = evaluate(&c);
        assert_eq!(s.count, 2);
        assert_eq!(s.excluded, 1);
        assert_eq!(s.f1, 1.0);
        assert!(s.to_tsv().starts_with("scope\t"));
        assert!(s.to_json().contains("\"excluded\": 1"));
    }
}
