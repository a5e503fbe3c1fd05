//! Trained model, its JSON file format, and test-time labeling.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Lexicon, PredicateInstance, Sentence};
use crate::encoder::{posteriors, predict_roles, EncoderParams, Posteriors};
use crate::error::{Error, Result};
use crate::features::{vectorize_with_bias, FeatureIndex, SparseVector};
use crate::metrics::RoleClustering;
use crate::recon::{Frame, ReconParams, VerbId};
use crate::trainer::{EncodedCorpus, TrainConfig};

pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: TrainConfig,
    pub lexicon: Lexicon,
    pub features: FeatureIndex,
    /// Verbs with their own projections, sorted.
    pub verbs: Vec<String>,
    pub encoder: EncoderParams,
    pub recon: ReconParams,
    verb_ids: HashMap<String, VerbId>,
}

impl Model {
    pub fn new(
        config: TrainConfig,
        lexicon: Lexicon,
        features: FeatureIndex,
        verbs: Vec<String>,
        encoder: EncoderParams,
        recon: ReconParams,
    ) -> Result<Self> {
        let shape = |m: String| Err(Error::ModelShape(m));
        if encoder.roles() != config.roles || encoder.features() != features.len() {
            return shape(format!(
                "encoder is {}×{}, expected {}×{}",
                encoder.roles(),
                encoder.features(),
                config.roles,
                features.len()
            ));
        }
        let block = config.roles * config.dim * config.proj;
        if recon.roles != config.roles || recon.dim != config.dim || recon.proj != config.proj {
            return shape("reconstruction dimensions differ from config".into());
        }
        if recon.u.len() != lexicon.len() * config.dim || recon.b.len() != lexicon.len() {
            return shape(format!(
                "embeddings do not cover the {}-lemma lexicon",
                lexicon.len()
            ));
        }
        if recon.c_shared.len() != block || recon.c_verb.iter().any(|c| c.len() != block) {
            return shape("projection blocks have the wrong size".into());
        }
        if recon.c_verb.len() != verbs.len() {
            return shape("one projection set per verb expected".into());
        }
        let verb_ids: HashMap<String, VerbId> =
            verbs.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        if verb_ids.len() != verbs.len() {
            return shape("duplicate verb".into());
        }
        Ok(Model {
            config,
            lexicon,
            features,
            verbs,
            encoder,
            recon,
            verb_ids,
        })
    }

    pub fn verb_id(&self, lemma: &str) -> Option<VerbId> {
        self.verb_ids.get(lemma).copied()
    }

    /// Encoder inputs of one instance: a feature vector per argument.
    pub fn vectorize(&self, sentence: &Sentence, instance: &PredicateInstance) -> Vec<SparseVector> {
        instance
            .arguments
            .iter()
            .map(|a| vectorize_with_bias(sentence, instance.predicate, a.token, &self.features))
            .collect()
    }

    pub fn frame(&self, instance: &PredicateInstance) -> Frame {
        Frame {
            verb: self.verb_id(&instance.predicate_lemma),
            lemmas: instance
                .arguments
                .iter()
                .map(|a| self.lexicon.id(&a.lemma))
                .collect(),
        }
    }

    pub fn encode(&self, sentences: &[Sentence], instances: &[PredicateInstance]) -> EncodedCorpus {
        EncodedCorpus {
            frames: instances.iter().map(|i| self.frame(i)).collect(),
            features: instances
                .iter()
                .map(|i| self.vectorize(&sentences[i.sentence], i))
                .collect(),
        }
    }

    pub fn posteriors(&self, sentence: &Sentence, instance: &PredicateInstance) -> Posteriors {
        posteriors(&self.vectorize(sentence, instance), &self.encoder)
    }

    /// Induced role per argument of every instance. Uses the encoder only.
    pub fn predict(&self, sentences: &[Sentence], instances: &[PredicateInstance]) -> Vec<Vec<usize>> {
        instances
            .iter()
            .map(|i| predict_roles(&self.vectorize(&sentences[i.sentence], i), &self.encoder))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let block = self.recon.block_len();
        let nf = self.encoder.features();
        let file = ModelFile {
            version: MODEL_VERSION,
            config: self.config.clone(),
            lexicon: self.lexicon.entries().map(|(l, c)| (l.to_owned(), c)).collect(),
            features: self.features.entries().map(|(f, c)| (f.to_owned(), c)).collect(),
            encoder: self
                .encoder
                .weights()
                .chunks(nf.max(1))
                .map(<[f64]>::to_vec)
                .collect(),
            u: self.recon.u.chunks(self.recon.dim).map(<[f64]>::to_vec).collect(),
            c_shared: self.recon.c_shared.chunks(block).map(<[f64]>::to_vec).collect(),
            c_verb: self
                .verbs
                .iter()
                .zip(&self.recon.c_verb)
                .map(|(v, c)| (v.clone(), c.chunks(block).map(<[f64]>::to_vec).collect()))
                .collect(),
            b: self.recon.b.clone(),
        };
        let mut text = serde_json::to_string(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.version != MODEL_VERSION {
            return Err(Error::ModelVersion {
                found: probe.version,
                expected: MODEL_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(text)?;
        let config = file.config;
        config.validate()?;
        let (roles, dim, proj) = (config.roles, config.dim, config.proj);
        let lexicon = Lexicon::from_entries(file.lexicon)?;
        let features = FeatureIndex::from_entries(file.features)
            .ok_or_else(|| Error::ModelShape("malformed feature index".into()))?;
        let nf = features.len();

        let flatten = |rows: Vec<Vec<f64>>, count: usize, width: usize, what: &str| {
            if rows.len() != count || rows.iter().any(|r| r.len() != width) {
                return Err(Error::ModelShape(format!(
                    "{what} must be {count} rows of {width} values"
                )));
            }
            Ok(rows.into_iter().flatten().collect::<Vec<f64>>())
        };
        let weights = flatten(file.encoder, roles, nf, "encoder")?;
        let u = flatten(file.u, lexicon.len(), dim, "u")?;
        let c_shared = flatten(file.c_shared, roles, dim * proj, "c_shared")?;
        let mut verbs = Vec::with_capacity(file.c_verb.len());
        let mut c_verb = Vec::with_capacity(file.c_verb.len());
        for (verb, blocks) in file.c_verb {
            c_verb.push(flatten(blocks, roles, dim * proj, "c_verb")?);
            verbs.push(verb);
        }
        let encoder = EncoderParams::from_weights(roles, nf, weights)
            .ok_or_else(|| Error::ModelShape("encoder size".into()))?;
        let recon = ReconParams {
            dim,
            proj,
            roles,
            u,
            b: file.b,
            c_shared,
            c_verb,
        };
        Model::new(config, lexicon, features, verbs, encoder, recon)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    model.save(path)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    Model::load(path)
}

/// Test-time labeling grouped for evaluation.
pub fn label(sentences: &[Sentence], instances: &[PredicateInstance], model: &Model) -> RoleClustering {
    RoleClustering::from_predictions(instances, &model.predict(sentences, instances))
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    config: TrainConfig,
    lexicon: Vec<(String, u64)>,
    features: Vec<(String, u64)>,
    /// One row per role.
    encoder: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    /// One row-major `dim × proj` block per role.
    c_shared: Vec<Vec<f64>>,
    c_verb: BTreeMap<String, Vec<Vec<f64>>>,
    b: Vec<f64>,
}
