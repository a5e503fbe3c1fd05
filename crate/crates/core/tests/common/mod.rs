//! Test-only helpers: random tiny models and a central-difference oracle
//! for the full training objective.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use roleinduce::encoder::{encoder_backward, posteriors, EncoderParams};
use roleinduce::features::SparseVector;
use roleinduce::recon::{recon_backward, recon_objective, Frame, ReconParams};

#[derive(Clone, Debug)]
pub struct TinyProblem {
    pub frame: Frame,
    pub features: Vec<SparseVector>,
    pub negatives: Vec<Vec<usize>>,
    pub encoder: EncoderParams,
    pub recon: ReconParams,
}

impl TinyProblem {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, roles: usize, dim: usize, proj: usize) -> Self {
        let vocab = rng.gen_range(2..=10);
        let nf = rng.gen_range(3..=6);
        let negs = rng.gen_range(1..=3);
        let mut recon = ReconParams::zeros(vocab, 2, roles, dim, proj);
        let mut fill = |v: &mut Vec<f64>| {
            for x in v.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
        };
        fill(&mut recon.u);
        fill(&mut recon.b);
        fill(&mut recon.c_shared);
        for c in &mut recon.c_verb {
            fill(c);
        }
        let mut weights = vec![0.0; roles * nf];
        fill(&mut weights);
        let encoder = EncoderParams::from_weights(roles, nf, weights).unwrap();
        let frame = Frame {
            verb: Some(rng.gen_range(0..2)),
            lemmas: (0..n).map(|_| rng.gen_range(0..vocab)).collect(),
        };
        let features = (0..n)
            .map(|_| {
                let ids: Vec<usize> = (0..nf).filter(|_| rng.gen_bool(0.6)).collect();
                SparseVector::new(ids)
            })
            .collect();
        let negatives = (0..n)
            .map(|_| (0..negs).map(|_| rng.gen_range(0..vocab)).collect())
            .collect();
        TinyProblem {
            frame,
            features,
            negatives,
            encoder,
            recon,
        }
    }

    /// Full objective: encoder posteriors fed to the reconstruction.
    pub fn objective(&self) -> f64 {
        let mu = posteriors(&self.features, &self.encoder);
        recon_objective(&self.frame, &mu, &self.negatives, &self.recon)
    }

    /// Analytic gradients, dense, in the order of [`Group::ALL`].
    pub fn analytic(&self) -> Vec<Vec<f64>> {
        let mu = posteriors(&self.features, &self.encoder);
        let g = recon_backward(&self.frame, &mu, &self.negatives, &self.recon);
        let enc = encoder_backward(&self.features, &mu, &g.mu);
        let roles = self.encoder.roles();
        let nf = self.encoder.features();
        // encoder_backward returns rows per feature; weights are rows per role.
        let mut w = vec![0.0; roles * nf];
        for (f, row) in enc.iter() {
            for s in 0..roles {
                w[s * nf + f] = row[s];
            }
        }
        let mut c_verb = vec![vec![0.0; self.recon.c_shared.len()]; self.recon.verbs()];
        if let Some((v, grad)) = g.c_verb {
            c_verb[v] = grad;
        }
        vec![
            w,
            g.u.to_dense(self.recon.vocab()),
            g.b.to_dense(self.recon.vocab()),
            g.c_shared,
            c_verb.concat(),
        ]
    }

    pub fn param_mut(&mut self, group: Group, k: usize) -> &mut f64 {
        match group {
            Group::Encoder => &mut self.encoder.weights_mut()[k],
            Group::U => &mut self.recon.u[k],
            Group::B => &mut self.recon.b[k],
            Group::CShared => &mut self.recon.c_shared[k],
            Group::CVerb => {
                let block = self.recon.c_shared.len();
                &mut self.recon.c_verb[k / block][k % block]
            }
        }
    }

    pub fn group_len(&self, group: Group) -> usize {
        match group {
            Group::Encoder => self.encoder.weights().len(),
            Group::U => self.recon.u.len(),
            Group::B => self.recon.b.len(),
            Group::CShared => self.recon.c_shared.len(),
            Group::CVerb => self.recon.c_shared.len() * self.recon.verbs(),
        }
    }

    /// Central difference of the full objective in one coordinate.
    pub fn numeric(&self, group: Group, k: usize, h: f64) -> f64 {
        let mut plus = self.clone();
        *plus.param_mut(group, k) += h;
        let mut minus = self.clone();
        *minus.param_mut(group, k) -= h;
        (plus.objective() - minus.objective()) / (2.0 * h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Encoder,
    U,
    B,
    CShared,
    CVerb,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::Encoder, Group::U, Group::B, Group::CShared, Group::CVerb];
}

/// Relative error with an absolute floor for near-zero gradients.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Largest relative error over every coordinate of every group.
pub fn max_gradient_error(problem: &TinyProblem) -> (f64, Group, usize) {
    let analytic = problem.analytic();
    let mut worst = (0.0, Group::Encoder, 0);
    for (gi, group) in Group::ALL.into_iter().enumerate() {
        for (k, &a) in analytic[gi].iter().enumerate() {
            let err = relative_error(a, problem.numeric(group, k, 1e-5));
            if err > worst.0 {
                worst = (err, group, k);
            }
        }
    }
    worst
}
