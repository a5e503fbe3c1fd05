//! Synthetic dependency corpora with planted roles.
//!
//! Every role has its own lemma distribution (most mass on a private
//! vocabulary, the rest on a pool shared by all roles) and a surface cue: a
//! dependency relation and a side of the predicate. With `ambiguous_cues`,
//! roles beyond the first two come in pairs that share a relation and differ
//! only in position, so clustering by relation alone merges them. With
//! `case_markers`, each argument also carries a determiner whose lemma marks
//! its role and a part-of-speech tag drawn per role. Each cue is replaced by a random value with probability `noise`.
//!
//! Fillers are coupled through a per-sentence scenario: with probability
//! `coupling` the filler of role `r` is the scenario's lemma for `r`, so the
//! other arguments predict a filler only once its role is known.

use std::fmt::Write as _;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Argument, Predicate, Sentence, Token};
use crate::error::{Error, Result};

const EXTRA_DEPRELS: [&str; 8] = ["PMOD", "ADV", "TMP", "LOC", "DIR", "MNR", "PRP", "EXT"];
const MARKERS: [&str; 8] = ["der", "den", "dem", "des", "ein", "eine", "einem", "einer"];
const NOUN_TAGS: [&str; 4] = ["NN", "NNS", "NNP", "PRP"];
const PREPOSITIONS: [&str; 4] = ["with", "in", "at", "on"];
/// Deprel of arguments realized inside a prepositional phrase.
const NESTED_DEPREL: &str = "PMOD";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub predicates: usize,
    pub roles: usize,
    pub vocab_per_role: usize,
    pub sentences: usize,
    /// Probability of replacing each surface cue with a random value.
    pub noise: f64,
    /// Relative weights of argument counts 1, 2, 3, ...; truncated to `roles`.
    pub arg_count_weights: Vec<f64>,
    /// Probability mass each role puts on the shared lemma pool when its
    /// filler is drawn independently of the scenario.
    pub shared_mass: f64,
    /// Probability that a filler is the sentence scenario's lemma for its role
    /// rather than an independent draw.
    pub coupling: f64,
    pub ambiguous_cues: bool,
    pub case_markers: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            predicates: 5,
            roles: 4,
            vocab_per_role: 20,
            sentences: 5000,
            noise: 0.2,
            arg_count_weights: vec![0.1, 0.4, 0.35, 0.15],
            shared_mass: 0.1,
            coupling: 0.8,
            ambiguous_cues: true,
            case_markers: true,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.predicates == 0 || self.roles == 0 || self.vocab_per_role == 0 || self.sentences == 0 {
            return fail("predicates, roles, vocab_per_role and sentences must be at least 1");
        }
        if !(0.0..0.5).contains(&self.noise) {
            return fail("noise must lie in [0, 0.5)");
        }
        if !(0.0..1.0).contains(&self.shared_mass) {
            return fail("shared_mass must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.coupling) {
            return fail("coupling must lie in [0, 1]");
        }
        let weights = self.count_weights();
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
            return fail("argument count weights must be nonnegative with a positive sum");
        }
        Ok(())
    }

    fn count_weights(&self) -> Vec<f64> {
        self.arg_count_weights.iter().take(self.roles).copied().collect()
    }

    /// Probability of each argument count `1..=len`.
    pub fn arg_count_distribution(&self) -> Vec<f64> {
        let w = self.count_weights();
        let total: f64 = w.iter().sum();
        w.iter().map(|x| x / total).collect()
    }

    /// Probability that a given role occurs in a sentence.
    pub fn role_marginal(&self) -> f64 {
        let expected_args: f64 = self
            .arg_count_distribution()
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum();
        expected_args / self.roles as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cue {
    pub deprel: String,
    pub before: bool,
}

/// Noise-free surface cue of `role`.
pub fn cue(role: usize, ambiguous: bool) -> Cue {
    let extra = |i: usize| {
        EXTRA_DEPRELS
            .get(i)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("X{i}"))
    };
    match role {
        0 => Cue {
            deprel: "SBJ".into(),
            before: true,
        },
        1 => Cue {
            deprel: "OBJ".into(),
            before: false,
        },
        r if ambiguous => Cue {
            deprel: extra((r - 2) / 2),
            before: (r - 2) % 2 == 1,
        },
        r => Cue {
            deprel: extra(r - 2),
            before: r % 2 == 1,
        },
    }
}

/// Noise-free argument POS of `role`.
pub fn noun_tag(role: usize) -> String {
    NOUN_TAGS
        .get(role)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("NN{role}"))
}

/// Noise-free determiner lemma of `role`.
pub fn marker(role: usize) -> String {
    MARKERS
        .get(role)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("m{role}"))
}

pub fn role_label(role: usize) -> String {
    format!("A{role}")
}

/// Roles whose deprel is shared with another role.
pub fn ambiguous_roles(roles: usize, ambiguous: bool) -> Vec<usize> {
    (0..roles)
        .filter(|&r| (0..roles).any(|s| s != r && cue(s, ambiguous).deprel == cue(r, ambiguous).deprel))
        .collect()
}

fn zipf(v: usize) -> Vec<f64> {
    let harmonic: f64 = (1..=v).map(|j| 1.0 / j as f64).sum();
    (1..=v).map(|j| 1.0 / (j as f64 * harmonic)).collect()
}

fn private_lemma(role: usize, j: usize) -> String {
    format!("r{role}w{j}")
}

/// Distribution of fillers drawn independently of the scenario: Zipfian over
/// the role's private vocabulary plus a uniform shared pool.
fn independent_distribution(config: &SynthConfig, role: usize) -> Vec<(String, f64)> {
    let v = config.vocab_per_role;
    let own = 1.0 - config.shared_mass;
    let mut out: Vec<(String, f64)> = zipf(v)
        .into_iter()
        .enumerate()
        .map(|(j, p)| (private_lemma(role, j), own * p))
        .collect();
    if config.shared_mass > 0.0 {
        out.extend((0..v).map(|j| (format!("common{j}"), config.shared_mass / v as f64)));
    }
    out
}

/// Marginal lemma distribution of `role` as `(lemma, probability)` pairs.
pub fn lemma_distribution(config: &SynthConfig, role: usize) -> Vec<(String, f64)> {
    let scenario = zipf(config.vocab_per_role);
    let mut out = independent_distribution(config, role);
    for (j, (_, p)) in out.iter_mut().enumerate() {
        *p *= 1.0 - config.coupling;
        if j < scenario.len() {
            *p += config.coupling * scenario[j];
        }
    }
    out
}

/// Total variation distance between two lemma distributions.
pub fn total_variation(p: &[(String, f64)], q: &[(String, f64)]) -> f64 {
    use std::collections::HashMap;
    let mut diff: HashMap<&str, f64> = HashMap::new();
    for (l, x) in p {
        *diff.entry(l).or_default() += x;
    }
    for (l, x) in q {
        *diff.entry(l).or_default() -= x;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

/// One planted argument role.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedRole {
    pub sentence: usize,
    pub predicate: usize,
    pub argument: usize,
    pub role: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub sentences: Vec<Sentence>,
    pub planted: Vec<PlantedRole>,
}

impl SynthCorpus {
    /// Sidecar table: `sentence_id, predicate_index, argument_index, role`.
    pub fn planted_tsv(&self) -> String {
        let mut out = String::new();
        for p in &self.planted {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                p.sentence,
                p.predicate,
                p.argument,
                role_label(p.role)
            );
        }
        out
    }
}

struct Slot {
    role: usize,
    lemma: String,
    deprel: String,
    before: bool,
    marker: Option<String>,
    tag: String,
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lemma_tables: Vec<Vec<(String, f64)>> = (0..config.roles)
        .map(|r| independent_distribution(config, r))
        .collect();
    let scenario_sampler =
        WeightedIndex::new(zipf(config.vocab_per_role)).expect("positive scenario weights");
    let lemma_samplers: Vec<WeightedIndex<f64>> = lemma_tables
        .iter()
        .map(|t| WeightedIndex::new(t.iter().map(|x| x.1)).expect("positive lemma weights"))
        .collect();
    let count_sampler = WeightedIndex::new(config.count_weights()).expect("validated argument count weights");
    let mut deprels: Vec<String> = (0..config.roles)
        .map(|r| cue(r, config.ambiguous_cues).deprel)
        .collect();
    deprels.sort();
    deprels.dedup();
    let markers: Vec<String> = (0..config.roles).map(marker).collect();
    let tags: Vec<String> = (0..config.roles).map(noun_tag).collect();

    let mut sentences = Vec::with_capacity(config.sentences);
    let mut planted = Vec::new();
    let mut roles: Vec<usize> = (0..config.roles).collect();
    for sid in 0..config.sentences {
        let verb = rng.gen_range(0..config.predicates);
        let scenario = scenario_sampler.sample(&mut rng);
        let n = count_sampler.sample(&mut rng) + 1;
        let (chosen, _) = roles.partial_shuffle(&mut rng, n);
        let mut slots: Vec<Slot> = chosen
            .iter()
            .map(|&role| {
                let lemma = if rng.gen_bool(config.coupling) {
                    private_lemma(role, scenario)
                } else {
                    lemma_tables[role][lemma_samplers[role].sample(&mut rng)]
                        .0
                        .clone()
                };
                let planted_cue = cue(role, config.ambiguous_cues);
                let deprel = if rng.gen_bool(config.noise) {
                    deprels.choose(&mut rng).expect("non-empty").clone()
                } else {
                    planted_cue.deprel
                };
                let before = if rng.gen_bool(config.noise) {
                    rng.gen_bool(0.5)
                } else {
                    planted_cue.before
                };
                let marker = config.case_markers.then(|| {
                    if rng.gen_bool(config.noise) {
                        markers.choose(&mut rng).expect("non-empty").clone()
                    } else {
                        markers[role].clone()
                    }
                });
                let tag = match (config.case_markers, rng.gen_bool(config.noise)) {
                    (false, _) => "NN".to_owned(),
                    (true, true) => tags.choose(&mut rng).expect("non-empty").clone(),
                    (true, false) => tags[role].clone(),
                };
                Slot {
                    role,
                    lemma,
                    deprel,
                    before,
                    marker,
                    tag,
                }
            })
            .collect();
        slots.shuffle(&mut rng);
        slots.sort_by_key(|s| !s.before);

        let (sentence, args) = realize(verb, &slots, &mut rng);
        for (slot, &token) in slots.iter().zip(&args) {
            planted.push(PlantedRole {
                sentence: sid,
                predicate: sentence.predicates[0].token,
                argument: token,
                role: slot.role,
            });
        }
        sentences.push(sentence);
    }
    planted.sort_by_key(|p| (p.sentence, p.argument));
    Ok(SynthCorpus { sentences, planted })
}

/// Lays out tokens; returns the sentence and each slot's argument token.
fn realize(verb: usize, slots: &[Slot], rng: &mut impl Rng) -> (Sentence, Vec<usize>) {
    // Head links are patched once the predicate position is known.
    enum Link {
        Predicate(String),
        Previous(String),
        Next(String),
        /// Two tokens back, skipping a determiner.
        Hop(String),
        Root,
    }
    let mut layout: Vec<(String, String, String, Link)> = Vec::new();
    let mut arg_positions = Vec::with_capacity(slots.len());
    let push_slot = |layout: &mut Vec<(String, String, String, Link)>, slot: &Slot, rng: &mut dyn RngCore| {
        if slot.deprel == NESTED_DEPREL {
            let prep = PREPOSITIONS[rng.gen_range(0..PREPOSITIONS.len())];
            layout.push((
                prep.into(),
                prep.into(),
                "IN".into(),
                Link::Predicate("ADV".into()),
            ));
            if let Some(m) = &slot.marker {
                layout.push((m.clone(), m.clone(), "DT".into(), Link::Next("NMOD".into())));
                layout.push((
                    slot.lemma.clone(),
                    slot.lemma.clone(),
                    slot.tag.clone(),
                    Link::Hop(NESTED_DEPREL.into()),
                ));
            } else {
                layout.push((
                    slot.lemma.clone(),
                    slot.lemma.clone(),
                    slot.tag.clone(),
                    Link::Previous(NESTED_DEPREL.into()),
                ));
            }
        } else {
            if let Some(m) = &slot.marker {
                layout.push((m.clone(), m.clone(), "DT".into(), Link::Next("NMOD".into())));
            }
            layout.push((
                slot.lemma.clone(),
                slot.lemma.clone(),
                slot.tag.clone(),
                Link::Predicate(slot.deprel.clone()),
            ));
        }
        layout.len()
    };
    for slot in slots.iter().filter(|s| s.before) {
        arg_positions.push(push_slot(&mut layout, slot, rng));
    }
    layout.push((
        format!("verb{verb}ed"),
        format!("verb{verb}"),
        "VBD".into(),
        Link::Root,
    ));
    let pred_index = layout.len();
    for slot in slots.iter().filter(|s| !s.before) {
        arg_positions.push(push_slot(&mut layout, slot, rng));
    }

    let tokens = layout
        .into_iter()
        .enumerate()
        .map(|(i, (form, lemma, pos, link))| {
            let (head, deprel) = match link {
                Link::Predicate(d) => (pred_index, d),
                Link::Previous(d) => (i, d),
                Link::Next(d) => (i + 2, d),
                Link::Hop(d) => (i - 1, d),
                Link::Root => (0, "ROOT".to_owned()),
            };
            Token {
                index: i + 1,
                form,
                lemma,
                pos,
                head,
                deprel,
            }
        })
        .collect();
    let mut arguments: Vec<Argument> = slots
        .iter()
        .zip(&arg_positions)
        .map(|(slot, &token)| Argument {
            token,
            role: Some(role_label(slot.role)),
        })
        .collect();
    arguments.sort_by_key(|a| a.token);
    let sentence = Sentence {
        tokens,
        predicates: vec![Predicate {
            token: pred_index,
            sense: format!("verb{verb}.01"),
            arguments,
        }],
    };
    (sentence, arg_positions)
}
