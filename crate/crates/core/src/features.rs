//! Sparse binary argument features built from 14 generic dependency patterns.
//!
//! | pattern | value |
//! |---------|-------|
//! | P1  | predicate lemma |
//! | P2  | predicate POS |
//! | P3  | argument form |
//! | P4  | argument lemma |
//! | P5  | argument POS |
//! | P6  | argument deprel |
//! | P7  | position relative to the predicate (`before`, `after`, `self`) |
//! | P8  | dependency path, argument up to the common ancestor then down to the predicate |
//! | P9  | path length bucket (`1`..`4`, `5+`) |
//! | P10 | POS sequence along the path |
//! | P11 | lemma of the argument's leftmost dependent |
//! | P12 | lemma of the argument's rightmost dependent |
//! | P13 | predicate deprel conjoined with its head's POS |
//! | P14 | P6 conjoined with P7 |
//!
//! P3 and P4 name the very lemma the decoder reconstructs. An encoder that
//! sees them can pass the answer through soft posteriors instead of inducing
//! roles, so indexing leaves them out unless asked.

use std::collections::HashMap;

use crate::corpus::{PredicateInstance, Sentence};

pub const NUM_PATTERNS: usize = 14;

/// Patterns carrying the argument's own word.
pub const LEXICAL_PATTERNS: [&str; 2] = ["P3=", "P4="];

pub fn is_lexical(feature: &str) -> bool {
    LEXICAL_PATTERNS.iter().any(|p| feature.starts_with(p))
}

/// Always-on feature, id 0 of every index.
pub const BIAS_FEATURE: &str = "BIAS";

const NONE: &str = "NONE";
const UP: char = '↑';
const DOWN: char = '↓';
const CONJ: char = '∧';
const EMPTY_PATH: &str = "∅";
const DISCONNECTED: &str = "DISCONNECTED";

fn ancestors(sentence: &Sentence, mut index: usize) -> Vec<usize> {
    let mut chain = vec![index];
    while index != 0 {
        index = sentence.token(index).head;
        chain.push(index);
    }
    chain
}

struct Path {
    /// Nodes from the argument to the predicate, inclusive.
    nodes: Vec<usize>,
    label: String,
    steps: usize,
}

fn dependency_path(sentence: &Sentence, predicate: usize, argument: usize) -> Option<Path> {
    let from_arg = ancestors(sentence, argument);
    let from_pred = ancestors(sentence, predicate);
    let (up, down) = from_arg
        .iter()
        .enumerate()
        .find_map(|(i, node)| from_pred.iter().position(|p| p == node).map(|j| (i, j)))?;
    if from_arg[up] == 0 {
        // Only the artificial root is shared.
        return None;
    }
    let mut label = String::new();
    for &node in &from_arg[..up] {
        label.push_str(&sentence.token(node).deprel);
        label.push(UP);
    }
    for &node in from_pred[..down].iter().rev() {
        label.push_str(&sentence.token(node).deprel);
        label.push(DOWN);
    }
    if label.is_empty() {
        label.push_str(EMPTY_PATH);
    }
    let mut nodes: Vec<usize> = from_arg[..=up].to_vec();
    nodes.extend(from_pred[..down].iter().rev());
    Some(Path {
        nodes,
        label,
        steps: up + down,
    })
}

fn length_bucket(steps: usize) -> &'static str {
    match steps {
        0 | 1 => "1",
        2 => "2",
        3 => "3",
        4 => "4",
        _ => "5+",
    }
}

/// One `Pk=value` string per pattern, in pattern order.
pub fn extract_features(sentence: &Sentence, predicate: usize, argument: usize) -> Vec<String> {
    let pred = sentence.token(predicate);
    let arg = sentence.token(argument);
    let position = match argument.cmp(&predicate) {
        std::cmp::Ordering::Less => "before",
        std::cmp::Ordering::Greater => "after",
        std::cmp::Ordering::Equal => "self",
    };
    let (path, bucket, path_pos) = match dependency_path(sentence, predicate, argument) {
        Some(p) => {
            let pos: Vec<&str> = p.nodes.iter().map(|&n| sentence.token(n).pos.as_str()).collect();
            (p.label, length_bucket(p.steps), pos.join("_"))
        }
        None => (DISCONNECTED.to_owned(), "5+", DISCONNECTED.to_owned()),
    };
    let mut deps = sentence.dependents(argument);
    let leftmost = deps.next().map(|t| t.lemma.as_str());
    let rightmost = deps.last().map(|t| t.lemma.as_str()).or(leftmost);
    let governor = if pred.head == 0 {
        "ROOT".to_owned()
    } else {
        format!("{}{CONJ}{}", pred.deprel, sentence.token(pred.head).pos)
    };

    vec![
        format!("P1={}", pred.lemma),
        format!("P2={}", pred.pos),
        format!("P3={}", arg.form),
        format!("P4={}", arg.lemma),
        format!("P5={}", arg.pos),
        format!("P6={}", arg.deprel),
        format!("P7={position}"),
        format!("P8={path}"),
        format!("P9={bucket}"),
        format!("P10={path_pos}"),
        format!("P11={}", leftmost.unwrap_or(NONE)),
        format!("P12={}", rightmost.unwrap_or(NONE)),
        format!("P13={governor}"),
        format!("P14={}{CONJ}{position}", arg.deprel),
    ]
}

/// Dense ids for feature strings. Id 0 is [`BIAS_FEATURE`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureIndex {
    names: Vec<String>,
    counts: Vec<u64>,
    ids: HashMap<String, usize>,
}

impl FeatureIndex {
    /// Rebuilds an index from stored `(name, count)` pairs.
    pub fn from_entries(entries: Vec<(String, u64)>) -> Option<Self> {
        if entries.first().map(|e| e.0.as_str()) != Some(BIAS_FEATURE) {
            return None;
        }
        let mut ids = HashMap::with_capacity(entries.len());
        let (names, counts): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        for (i, name) in names.iter().enumerate() {
            if ids.insert(name.clone(), i).is_some() {
                return None;
            }
        }
        Some(FeatureIndex { names, counts, ids })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, feature: &str) -> Option<usize> {
        self.ids.get(feature).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }
}

/// Indexes every feature seen at least `min_count` times across all
/// arguments of `instances`. Ids after the bias follow lexicographic order,
/// so the index does not depend on instance order.
pub fn index_features(
    sentences: &[Sentence],
    instances: &[PredicateInstance],
    min_count: u64,
    lexical: bool,
) -> FeatureIndex {
    let min_count = min_count.max(1);
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0;
    for inst in instances {
        let sentence = &sentences[inst.sentence];
        for arg in &inst.arguments {
            total += 1;
            for f in extract_features(sentence, inst.predicate, arg.token) {
                *counts.entry(f).or_default() += 1;
            }
        }
    }
    let mut kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(name, c)| *c >= min_count && name != BIAS_FEATURE && (lexical || !is_lexical(name)))
        .collect();
    kept.sort();
    let entries = std::iter::once((BIAS_FEATURE.to_owned(), total))
        .chain(kept)
        .collect();
    FeatureIndex::from_entries(entries).expect("bias entry present")
}

/// Sorted, distinct feature ids (binary indicators).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVector(Vec<usize>);

impl SparseVector {
    /// Sorts and deduplicates `ids`.
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        SparseVector(ids)
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Pattern features of one argument mapped through `index`, unknown strings
/// dropped. The bias feature is not included.
pub fn vectorize(
    sentence: &Sentence,
    predicate: usize,
    argument: usize,
    index: &FeatureIndex,
) -> SparseVector {
    SparseVector::new(
        extract_features(sentence, predicate, argument)
            .iter()
            .filter_map(|f| index.get(f))
            .collect(),
    )
}

/// Like [`vectorize`] with the always-on bias feature added.
pub fn vectorize_with_bias(
    sentence: &Sentence,
    predicate: usize,
    argument: usize,
    index: &FeatureIndex,
) -> SparseVector {
    let mut ids = vectorize(sentence, predicate, argument, index).0;
    ids.insert(0, 0);
    SparseVector(ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Argument, Predicate, Token};

    /// "The police charged the demonstrators with batons"
    fn charged() -> Sentence {
        let rows = [
            ("The", "the", "DT", 2, "NMOD"),
            ("police", "police", "NNS", 3, "SBJ"),
            ("charged", "charge", "VBD", 0, "ROOT"),
            ("the", "the", "DT", 5, "NMOD"),
            ("demonstrators", "demonstrator", "NNS", 3, "OBJ"),
            ("with", "with", "IN", 3, "ADV"),
            ("batons", "baton", "NNS", 6, "PMOD"),
        ];
        let tokens = rows
            .iter()
            .enumerate()
            .map(|(i, &(form, lemma, pos, head, deprel))| Token {
                index: i + 1,
                form: form.into(),
                lemma: lemma.into(),
                pos: pos.into(),
                head,
                deprel: deprel.into(),
            })
            .collect();
        Sentence {
            tokens,
            predicates: vec![Predicate {
                token: 3,
                sense: "charge.01".into(),
                arguments: vec![
                    Argument {
                        token: 2,
                        role: Some("A0".into()),
                    },
                    Argument {
                        token: 5,
                        role: Some("A1".into()),
                    },
                    Argument {
                        token: 7,
                        role: Some("A2".into()),
                    },
                ],
            }],
        }
    }

    #[test]
    fn subject_features() {
        let f = extract_features(&charged(), 3, 2);
        assert_eq!(f.len(), NUM_PATTERNS);
        for expected in ["P6=SBJ", "P7=before", "P8=SBJ↑", "P9=1", "P14=SBJ∧before"] {
            assert!(f.iter().any(|x| x == expected), "{expected} missing from {f:?}");
        }
        assert!(f.contains(&"P11=the".to_string()));
        assert!(f.contains(&"P12=the".to_string()));
        assert!(f.contains(&"P10=NNS_VBD".to_string()));
        assert!(f.contains(&"P13=ROOT".to_string()));
    }

    #[test]
    fn nested_argument_path() {
        let f = extract_features(&charged(), 3, 7);
        assert!(f.contains(&"P8=PMOD↑ADV↑".to_string()), "{f:?}");
        assert!(f.contains(&"P9=2".to_string()));
        assert!(f.contains(&"P10=NNS_IN_VBD".to_string()));
        assert!(f.contains(&"P11=NONE".to_string()));
        assert!(f.contains(&"P7=after".to_string()));
    }

    #[test]
    fn self_argument() {
        let f = extract_features(&charged(), 3, 3);
        assert!(f.contains(&"P7=self".to_string()));
        assert!(f.contains(&"P8=∅".to_string()));
        assert!(f.contains(&"P9=1".to_string()));
    }

    #[test]
    fn downward_path_and_governor() {
        // predicate "demonstrators" seen from argument "charged"
        let f = extract_features(&charged(), 5, 3);
        assert!(f.contains(&"P8=OBJ↓".to_string()), "{f:?}");
        assert!(f.contains(&"P13=OBJ∧VBD".to_string()));
        // sibling path: police -> charged -> demonstrators
        let f = extract_features(&charged(), 5, 2);
        assert!(f.contains(&"P8=SBJ↑OBJ↓".to_string()), "{f:?}");
        assert!(f.contains(&"P10=NNS_VBD_NNS".to_string()));
    }

    #[test]
    fn disconnected_forest() {
        let mut s = charged();
        // detach "with batons" into its own tree
        s.tokens[5].head = 0;
        let f = extract_features(&s, 3, 7);
        assert!(f.contains(&"P8=DISCONNECTED".to_string()));
        assert_eq!(f.len(), NUM_PATTERNS);
    }

    fn one_instance(s: &Sentence) -> Vec<PredicateInstance> {
        crate::corpus::extract_instances(std::slice::from_ref(s), "V")
    }

    #[test]
    fn index_threshold_and_vectorize() {
        let s = charged();
        let inst = one_instance(&s);
        let all = index_features(std::slice::from_ref(&s), &inst, 1, true);
        let sentences = std::slice::from_ref(&s);
        // P1/P2/P13 are shared by all three arguments
        assert_eq!(all.count(all.get("P1=charge").unwrap()), 3);
        assert_eq!(all.count(0), 3);
        let frequent = index_features(sentences, &inst, 2, true);
        assert!(frequent.get("P1=charge").is_some());
        assert!(frequent.get("P6=SBJ").is_none());
        let v = vectorize(&s, 3, 2, &frequent);
        assert!(v.len() < NUM_PATTERNS);
        assert!(v.ids().windows(2).all(|w| w[0] < w[1]));
        assert!(v.ids().iter().all(|&i| i < frequent.len()));

        let v = vectorize(&s, 3, 2, &all);
        assert_eq!(v.len(), NUM_PATTERNS);
        let b = vectorize_with_bias(&s, 3, 2, &all);
        assert_eq!(b.ids()[0], 0);
        assert_eq!(b.len(), NUM_PATTERNS + 1);
    }

    #[test]
    fn unknown_features_vanish() {
        let s = charged();
        let index = FeatureIndex::from_entries(vec![(BIAS_FEATURE.into(), 1)]).unwrap();
        assert!(vectorize(&s, 3, 2, &index).is_empty());
    }

    #[test]
    fn lookup_is_sorted() {
        let index = FeatureIndex::from_entries(vec![
            (BIAS_FEATURE.into(), 1),
            ("a".into(), 1),
            ("b".into(), 1),
            ("P7=before".into(), 1),
            ("c".into(), 1),
            ("d".into(), 1),
            ("e".into(), 1),
            ("P6=SBJ".into(), 1),
        ])
        .unwrap();
        let v = vectorize(&charged(), 3, 2, &index);
        assert_eq!(v.ids(), &[3, 7]);
    }

    #[test]
    fn lexical_patterns_left_out_by_default() {
        let s = charged();
        let inst = one_instance(&s);
        let plain = index_features(std::slice::from_ref(&s), &inst, 1, false);
        assert!(plain.get("P4=police").is_none());
        assert!(plain.get("P3=police").is_none());
        assert!(plain.get("P5=NNS").is_some());
        assert_eq!(vectorize(&s, 3, 2, &plain).len(), NUM_PATTERNS - 2);
        assert!(is_lexical("P3=x") && !is_lexical("P11=x"));
    }
}
