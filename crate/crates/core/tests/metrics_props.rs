use std::collections::BTreeSet;

use proptest::prelude::*;
use roleinduce::corpus::{extract_instances, parse_conll_str, ConllFormat, SyntaxColumns};
use roleinduce::metrics::{
    aggregate, collocation, deprel_ranking, evaluate, f1, purity, syntf_labels, PredicateScores,
};

/// Exhaustive set intersections, the definition read literally.
fn brute(pairs: &[(u8, u8)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let clusters: BTreeSet<u8> = pairs.iter().map(|p| p.0).collect();
    let golds: BTreeSet<u8> = pairs.iter().map(|p| p.1).collect();
    let inter = |c: u8, g: u8| pairs.iter().filter(|p| p.0 == c && p.1 == g).count();
    let pu: usize = clusters
        .iter()
        .map(|&c| golds.iter().map(|&g| inter(c, g)).max().unwrap())
        .sum();
    let co: usize = golds
        .iter()
        .map(|&g| clusters.iter().map(|&c| inter(c, g)).max().unwrap())
        .sum();
    (pu as f64 / n, co as f64 / n)
}

/// True when some bijection maps clusters onto gold classes.
fn same_partition(pairs: &[(u8, u8)]) -> bool {
    pairs
        .iter()
        .all(|a| pairs.iter().all(|b| (a.0 == b.0) == (a.1 == b.1)))
}

proptest! {
    #[test]
    fn matches_brute_force(pairs in proptest::collection::vec((0u8..4, 0u8..4), 1..=8)) {
        let (pu, co) = brute(&pairs);
        prop_assert_eq!(purity(&pairs), pu);
        prop_assert_eq!(collocation(&pairs), co);
        prop_assert!((0.0..=1.0).contains(&pu) && (0.0..=1.0).contains(&co));
        prop_assert_eq!(pu == 1.0 && co == 1.0, same_partition(&pairs));
        let h = f1(pu, co);
        prop_assert!((h - 2.0 * pu * co / (pu + co)).abs() < 1e-12);
    }

    #[test]
    fn aggregate_ignores_predicate_order(
        raw in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 1usize..20), 1..6),
        rot in 0usize..6,
    ) {
        let scores: Vec<PredicateScores> = raw
            .iter()
            .enumerate()
            .map(|(i, &(pu, co, count))| PredicateScores {
                predicate: format!("p{i}"),
                count,
                pu,
                co,
                f1: f1(pu, co),
            })
            .collect();
        let mut rotated = scores.clone();
        rotated.rotate_left(rot % scores.len());
        let (a, b) = (aggregate(scores), aggregate(rotated));
        prop_assert!((a.pu - b.pu).abs() < 1e-12 && (a.co - b.co).abs() < 1e-12);
        prop_assert!((a.f1 - f1(a.pu, a.co)).abs() < 1e-12);
    }
}

fn block(rels: &[&str], roles: &[&str]) -> String {
    let mut out = String::from("1\tsaw\tsee\tVBD\tVBD\t_\t_\tVBD\t0\tROOT\tsee.01\t_\n");
    for (i, (r, g)) in rels.iter().zip(roles).enumerate() {
        out += &format!("{}\tx\tx\tNN\tNN\t_\t_\tNN\t1\t{r}\t_\t{g}\n", i + 2);
    }
    out + "\n"
}

#[test]
fn syntf_ranks_deprels_by_argument_frequency() {
    let mut text = String::new();
    for _ in 0..5 {
        text += &block(&["SBJ", "SBJ", "OBJ"], &["A0", "A0", "A1"]);
    }
    text += &block(&["X"], &["A2"]);
    let sentences = parse_conll_str(&text, ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap();
    let instances = extract_instances(&sentences, "V");
    let ranking = deprel_ranking(&sentences, &instances);
    assert_eq!(
        ranking,
        vec![("SBJ".into(), 10), ("OBJ".into(), 5), ("X".into(), 1)]
    );
    let labels = syntf_labels(&sentences, &instances, 2);
    assert_eq!(labels[0], vec![0, 0, 1]);
    assert_eq!(labels[5], vec![2]);
    // K beyond the relation count: every relation alone, "other" unused.
    let wide = syntf_labels(&sentences, &instances, 20);
    assert!(wide.iter().flatten().all(|&c| c < 3));
    let scores = evaluate(&roleinduce::metrics::syntf_baseline(&sentences, &instances, 20));
    assert_eq!(scores.f1, 1.0);
}

#[test]
fn ties_break_lexicographically() {
    let text = block(&["OBJ", "ADV"], &["A1", "AM"]);
    let sentences = parse_conll_str(&text, ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap();
    let instances = extract_instances(&sentences, "V");
    assert_eq!(syntf_labels(&sentences, &instances, 1), vec![vec![1, 0]]);
}
