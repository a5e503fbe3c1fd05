//! Browser bindings. Each export wraps a plain function of the same name
//! with a `_json` suffix, which is what the host-side tests exercise.

use roleinduce::corpus::{extract_instances, parse_conll_str, ConllFormat, SyntaxColumns};
use roleinduce::metrics::{collocation, evaluate, f1, purity, syntf_baseline};
use roleinduce::synth::{generate, SynthConfig};
use roleinduce::trainer::train_with;
use roleinduce::{label, Model, TrainConfig};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Knobs exposed on the page; anything missing takes its default.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoOptions {
    pub sentences: usize,
    pub noise: f64,
    pub ambiguous: bool,
    pub roles: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            sentences: 1500,
            noise: 0.2,
            ambiguous: true,
            roles: 4,
            epochs: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EpochPoint {
    pub epoch: usize,
    pub objective: f64,
    pub f1: f64,
}

#[derive(Debug, Serialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochPoint>,
    pub pu: f64,
    pub co: f64,
    pub f1: f64,
    pub syntf_f1: f64,
    /// A sample sentence from the corpus, ready to paste into the labeler.
    pub sample: String,
}

#[derive(Debug, Serialize)]
pub struct LabeledArgument {
    pub predicate: String,
    pub argument: String,
    pub gold: Option<String>,
    pub role: usize,
    pub posteriors: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ClusterScores {
    pub pu: f64,
    pub co: f64,
    pub f1: f64,
}

fn text_error(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Holds the most recently trained model between calls.
#[wasm_bindgen]
#[derive(Default)]
pub struct Demo {
    model: Option<Model>,
}

impl Demo {
    pub fn train_json(&mut self, options: &str) -> Result<String, String> {
        let o: DemoOptions = if options.trim().is_empty() {
            DemoOptions::default()
        } else {
            serde_json::from_str(options).map_err(text_error)?
        };
        let corpus = generate(&SynthConfig {
            sentences: o.sentences,
            noise: o.noise,
            ambiguous_cues: o.ambiguous,
            seed: o.seed,
            ..Default::default()
        })
        .map_err(text_error)?;
        let sentences = &corpus.sentences;
        let instances = extract_instances(sentences, "V");
        let config = TrainConfig {
            roles: o.roles,
            epochs: o.epochs,
            seed: o.seed,
            ..Default::default()
        };
        let mut epochs = Vec::new();
        let (model, _) = train_with(sentences, &instances, &config, |m, s| {
            epochs.push(EpochPoint {
                epoch: s.epoch,
                objective: s.mean_objective,
                f1: evaluate(&label(sentences, &instances, m)).f1,
            });
        })
        .map_err(text_error)?;
        let scores = evaluate(&label(sentences, &instances, &model));
        let baseline = evaluate(&syntf_baseline(sentences, &instances, 20));
        let sample = roleinduce::corpus::write_conll_block(&sentences[0], ConllFormat::Conll2008);
        self.model = Some(model);
        serde_json::to_string(&TrainReport {
            epochs,
            pu: scores.pu,
            co: scores.co,
            f1: scores.f1,
            syntf_f1: baseline.f1,
            sample,
        })
        .map_err(text_error)
    }

    pub fn label_json(&self, conll: &str) -> Result<String, String> {
        let model = self.model.as_ref().ok_or("train a model first")?;
        let sentences =
            parse_conll_str(conll, ConllFormat::Conll2008, SyntaxColumns::Gold).map_err(text_error)?;
        let instances = extract_instances(&sentences, &model.config.predicate_pos_prefix);
        let mut out = Vec::new();
        for inst in &instances {
            let s = &sentences[inst.sentence];
            let mu = model.posteriors(s, inst);
            let roles = model.predict(&sentences, std::slice::from_ref(inst)).remove(0);
            for (i, arg) in inst.arguments.iter().enumerate() {
                out.push(LabeledArgument {
                    predicate: inst.predicate_lemma.clone(),
                    argument: s.token(arg.token).form.clone(),
                    gold: arg.role.clone(),
                    role: roles[i],
                    posteriors: mu.row(i).to_vec(),
                });
            }
        }
        serde_json::to_string(&out).map_err(text_error)
    }
}

/// Purity, collocation and F1 of two whitespace-separated label lists.
pub fn score_json(gold: &str, clusters: &str) -> Result<String, String> {
    let gold: Vec<&str> = gold.split_whitespace().collect();
    let clusters: Vec<&str> = clusters.split_whitespace().collect();
    if gold.is_empty() || gold.len() != clusters.len() {
        return Err(format!(
            "need equally many gold labels and clusters (got {} and {})",
            gold.len(),
            clusters.len()
        ));
    }
    let pairs: Vec<(&str, &str)> = clusters.into_iter().zip(gold).collect();
    let (pu, co) = (purity(&pairs), collocation(&pairs));
    serde_json::to_string(&ClusterScores {
        pu,
        co,
        f1: f1(pu, co),
    })
    .map_err(text_error)
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo::default()
    }

    /// Generates a synthetic corpus, trains on it and reports the F1 curve.
    pub fn train(&mut self, options: &str) -> Result<String, JsError> {
        self.train_json(options).map_err(|e| JsError::new(&e))
    }

    /// Induced roles and posteriors for every argument of a CoNLL 2008 text.
    pub fn label(&self, conll: &str) -> Result<String, JsError> {
        self.label_json(conll).map_err(|e| JsError::new(&e))
    }
}

#[wasm_bindgen]
pub fn score(gold: &str, clusters: &str) -> Result<String, JsError> {
    score_json(gold, clusters).map_err(|e| JsError::new(&e))
}
