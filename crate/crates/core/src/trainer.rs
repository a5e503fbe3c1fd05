//! Joint estimation of the encoder and the reconstruction model with
//! per-instance AdaGrad ascent on the negative-sampling objective.

use std::collections::{BTreeSet, HashMap};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_lexicon, unigram_distribution, LemmaId, PredicateInstance, Sentence};
use crate::encoder::{encoder_backward, posteriors, EncoderParams};
use crate::error::{Error, Result};
use crate::features::{index_features, SparseVector};
use crate::model::Model;
use crate::recon::{recon_backward, Frame, ReconParams};
use crate::sparse::SparseRows;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub roles: usize,
    pub dim: usize,
    pub proj: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub lemma_min_count: u64,
    pub feature_min_count: u64,
    /// Verbs seen at least this often get their own projections.
    pub verb_min_count: u64,
    /// L2 penalty on encoder weights.
    pub l2: f64,
    /// Let the encoder see the argument's own form and lemma (P3, P4).
    pub lexical_features: bool,
    /// Independent runs with seeds `seed, seed + 1, ...`; the one with the
    /// best final objective is kept.
    pub restarts: usize,
    pub predicate_pos_prefix: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            roles: 10,
            dim: 30,
            proj: 15,
            negatives: 20,
            epochs: 20,
            learning_rate: 0.1,
            epsilon: 1e-8,
            seed: 0,
            lemma_min_count: 2,
            feature_min_count: 2,
            verb_min_count: 1,
            l2: 0.0,
            lexical_features: false,
            restarts: 1,
            predicate_pos_prefix: "V".to_owned(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.roles < 2 {
            return fail("roles must be at least 2");
        }
        if self.dim == 0 || self.proj == 0 || self.negatives == 0 || self.restarts == 0 {
            return fail("dim, proj, negatives and restarts must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive");
        }
        if [self.epsilon, self.l2].iter().any(|x| x.is_nan() || *x < 0.0) {
            return fail("epsilon and l2 must be nonnegative");
        }
        if self.lemma_min_count == 0 || self.feature_min_count == 0 || self.verb_min_count == 0 {
            return fail("minimum counts must be at least 1");
        }
        if self.predicate_pos_prefix.is_empty() {
            return fail("predicate POS prefix must not be empty");
        }
        Ok(())
    }
}

/// Draws i.i.d. lemma ids from a unigram distribution.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
}

impl NegativeSampler {
    pub fn new(distribution: &[f64]) -> Result<Self> {
        WeightedIndex::new(distribution)
            .map(|dist| NegativeSampler { dist })
            .map_err(|e| Error::Data(format!("invalid unigram distribution: {e}")))
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<LemmaId> {
        (0..n).map(|_| self.dist.sample(rng)).collect()
    }
}

pub fn sample_negatives<R: Rng + ?Sized>(sampler: &NegativeSampler, n: usize, rng: &mut R) -> Vec<LemmaId> {
    sampler.sample(n, rng)
}

/// Ascent step: `state += g²; param += η g / (√state + ε)`.
pub fn adagrad_update(param: &mut [f64], grad: &[f64], state: &mut [f64], lr: f64, eps: f64) {
    for ((p, &g), s) in param.iter_mut().zip(grad).zip(state.iter_mut()) {
        *s += g * g;
        *p += lr * g / (s.sqrt() + eps);
    }
}

/// Accumulated squared gradients, shaped like the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaGradState {
    pub encoder: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub c_shared: Vec<f64>,
    pub c_verb: Vec<Vec<f64>>,
}

impl AdaGradState {
    pub fn new(encoder: &EncoderParams, recon: &ReconParams) -> Self {
        AdaGradState {
            encoder: vec![0.0; encoder.weights().len()],
            u: vec![0.0; recon.u.len()],
            b: vec![0.0; recon.b.len()],
            c_shared: vec![0.0; recon.c_shared.len()],
            c_verb: recon.c_verb.iter().map(|c| vec![0.0; c.len()]).collect(),
        }
    }
}

fn sparse_update(param: &mut [f64], state: &mut [f64], grad: &SparseRows, lr: f64, eps: f64) {
    let w = grad.width();
    for (id, row) in grad.iter() {
        let range = id * w..(id + 1) * w;
        adagrad_update(&mut param[range.clone()], row, &mut state[range], lr, eps);
    }
}

/// Instances encoded against a model's vocabularies.
#[derive(Clone, Debug)]
pub struct EncodedCorpus {
    pub frames: Vec<Frame>,
    /// Per instance, one feature vector per argument (bias included).
    pub features: Vec<Vec<SparseVector>>,
}

impl EncodedCorpus {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Wall clock for epoch timing. `Instant` panics on wasm32-unknown-unknown,
/// so there the time is reported as zero.
struct Stopwatch(#[cfg(not(target_family = "wasm"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_family = "wasm"))]
            std::time::Instant::now(),
        )
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_family = "wasm"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_family = "wasm")]
        0.0
    }
}

/// Per-epoch training statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochStats {
    pub restart: usize,
    pub epoch: usize,
    pub mean_objective: f64,
    pub seconds: f64,
}

impl EpochStats {
    /// `epoch<TAB>mean objective<TAB>wall time` log line.
    pub fn log_line(&self) -> String {
        format!("{}\t{}\t{:.3}", self.epoch, self.mean_objective, self.seconds)
    }
}

/// Vocabularies and initial parameters for `instances`.
pub fn initialize(
    sentences: &[Sentence],
    instances: &[PredicateInstance],
    config: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<Model> {
    config.validate()?;
    let lexicon = build_lexicon(instances, config.lemma_min_count);
    let features = index_features(
        sentences,
        instances,
        config.feature_min_count,
        config.lexical_features,
    );
    let mut verb_counts: HashMap<&str, u64> = HashMap::new();
    for inst in instances {
        *verb_counts.entry(inst.predicate_lemma.as_str()).or_default() += 1;
    }
    let verbs: Vec<String> = verb_counts
        .into_iter()
        .filter(|&(_, c)| c >= config.verb_min_count)
        .map(|(v, _)| v.to_owned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let encoder = EncoderParams::zeros(config.roles, features.len());
    let recon = ReconParams::random(
        lexicon.len(),
        verbs.len(),
        config.roles,
        config.dim,
        config.proj,
        rng,
    );
    Model::new(config.clone(), lexicon, features, verbs, encoder, recon)
}

/// Trains on `instances` (all must reference `sentences`). Logs one line
/// per epoch and returns the model with per-epoch statistics.
pub fn train(
    sentences: &[Sentence],
    instances: &[PredicateInstance],
    config: &TrainConfig,
) -> Result<(Model, Vec<EpochStats>)> {
    train_with(sentences, instances, config, |_, _| {})
}

/// Like [`train`], calling `on_epoch` after every epoch of every restart.
pub fn train_with<F>(
    sentences: &[Sentence],
    instances: &[PredicateInstance],
    config: &TrainConfig,
    mut on_epoch: F,
) -> Result<(Model, Vec<EpochStats>)>
where
    F: FnMut(&Model, &EpochStats),
{
    if instances.is_empty() {
        return Err(Error::Data("no predicate instances to train on".into()));
    }
    config.validate()?;
    let mut best: Option<(Model, Vec<EpochStats>)> = None;
    for restart in 0..config.restarts {
        let run = train_once(sentences, instances, config, restart, &mut on_epoch)?;
        let score = |stats: &[EpochStats]| stats.last().map_or(f64::NEG_INFINITY, |s| s.mean_objective);
        if best.as_ref().is_none_or(|(_, b)| score(&run.1) > score(b)) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn train_once<F>(
    sentences: &[Sentence],
    instances: &[PredicateInstance],
    config: &TrainConfig,
    restart: usize,
    on_epoch: &mut F,
) -> Result<(Model, Vec<EpochStats>)>
where
    F: FnMut(&Model, &EpochStats),
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
    let mut model = initialize(sentences, instances, config, &mut rng)?;
    let corpus = model.encode(sentences, instances);
    let sampler = NegativeSampler::new(&unigram_distribution(&model.lexicon)?)?;
    let mut state = AdaGradState::new(&model.encoder, &model.recon);

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut stats = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let start = Stopwatch::start();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &idx in &order {
            total += train_step(&mut model, &mut state, &corpus, idx, &sampler, &mut rng)?;
        }
        let epoch_stats = EpochStats {
            restart,
            epoch,
            mean_objective: total / corpus.len() as f64,
            seconds: start.seconds(),
        };
        log::info!("{}", epoch_stats.log_line());
        on_epoch(&model, &epoch_stats);
        stats.push(epoch_stats);
    }
    Ok((model, stats))
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|x| x.is_finite())
}

/// One stochastic update on instance `idx`; returns its objective.
fn train_step(
    model: &mut Model,
    state: &mut AdaGradState,
    corpus: &EncodedCorpus,
    idx: usize,
    sampler: &NegativeSampler,
    rng: &mut impl Rng,
) -> Result<f64> {
    let config = &model.config;
    let (lr, eps) = (config.learning_rate, config.epsilon);
    let frame = &corpus.frames[idx];
    let feats = &corpus.features[idx];

    let mu = posteriors(feats, &model.encoder);
    let negatives: Vec<Vec<LemmaId>> = (0..frame.len())
        .map(|_| sample_negatives(sampler, config.negatives, rng))
        .collect();
    let grads = recon_backward(frame, &mu, &negatives, &model.recon);
    if !grads.objective.is_finite() {
        return Err(Error::NonFinite {
            what: "objective",
            instance: idx,
        });
    }
    if !all_finite(&grads.mu) || !all_finite(&grads.c_shared) {
        return Err(Error::NonFinite {
            what: "gradient",
            instance: idx,
        });
    }

    let mut enc_grad = encoder_backward(feats, &mu, &grads.mu);
    if config.l2 > 0.0 {
        let ids: Vec<usize> = enc_grad.iter().map(|(f, _)| f).collect();
        for f in ids {
            let row = enc_grad.row_mut(f);
            for (s, g) in row.iter_mut().enumerate() {
                *g -= config.l2 * model.encoder.weight(s, f);
            }
        }
    }

    // Encoder gradient rows are indexed by feature, weights by role.
    let nf = model.encoder.features();
    let weights = model.encoder.weights_mut();
    for (f, row) in enc_grad.iter() {
        for (s, &g) in row.iter().enumerate() {
            let k = s * nf + f;
            state.encoder[k] += g * g;
            weights[k] += lr * g / (state.encoder[k].sqrt() + eps);
        }
    }

    let recon = &mut model.recon;
    sparse_update(&mut recon.u, &mut state.u, &grads.u, lr, eps);
    sparse_update(&mut recon.b, &mut state.b, &grads.b, lr, eps);
    adagrad_update(&mut recon.c_shared, &grads.c_shared, &mut state.c_shared, lr, eps);
    if let Some((v, g)) = &grads.c_verb {
        adagrad_update(&mut recon.c_verb[*v], g, &mut state.c_verb[*v], lr, eps);
    }
    Ok(grads.objective)
}
