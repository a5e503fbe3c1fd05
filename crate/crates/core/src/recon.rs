//! Bilinear argument reconstruction.
//!
//! With role posteriors `μ`, argument `i` gets the effective projection
//! `A_i = Σ_s μ_is (C_{v,s} + C_s)` (d × k) and the message
//! `m_i = A_iᵀ u_{a_i}`. A candidate lemma `a` for slot `i` scores
//!
//! ```text
//! φ_i(a) = u_aᵀ A_i Σ_{j≠i} m_j + b_a
//! ```
//!
//! Training contrasts the observed lemma against sampled negatives:
//!
//! ```text
//! J = Σ_i [ log σ(φ_i(a_i)) + Σ_{a' ∈ S_i} log σ(−φ_i(a')) ]
//! ```
//!
//! The negative term uses `log σ(−φ)`, the bounded form of negative
//! sampling. Written as `− log σ(φ)` the objective has no maximum, since
//! negative scores can be pushed to −∞ without limit. The softmax over the
//! whole lemma alphabet is never evaluated.

use rand::Rng;

use crate::corpus::LemmaId;
use crate::encoder::Posteriors;
use crate::sparse::{dot, SparseRows};

pub type VerbId = usize;

/// Initialization range for embeddings and projections.
pub const INIT_RANGE: f64 = 0.01;

/// What the reconstruction model sees of a predicate instance: the verb and
/// the argument lemmas. Nothing else about the sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    /// `None` for verbs without their own projections.
    pub verb: Option<VerbId>,
    pub lemmas: Vec<LemmaId>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconParams {
    pub dim: usize,
    pub proj: usize,
    pub roles: usize,
    /// `vocab × dim`, row-major.
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    /// `roles` blocks of `dim × proj`, row-major.
    pub c_shared: Vec<f64>,
    /// Per verb, laid out like `c_shared`.
    pub c_verb: Vec<Vec<f64>>,
}

impl ReconParams {
    pub fn zeros(vocab: usize, verbs: usize, roles: usize, dim: usize, proj: usize) -> Self {
        let block = roles * dim * proj;
        ReconParams {
            dim,
            proj,
            roles,
            u: vec![0.0; vocab * dim],
            b: vec![0.0; vocab],
            c_shared: vec![0.0; block],
            c_verb: vec![vec![0.0; block]; verbs],
        }
    }

    /// Embeddings and projections uniform on `[-INIT_RANGE, INIT_RANGE]`,
    /// biases zero.
    pub fn random<R: Rng>(
        vocab: usize,
        verbs: usize,
        roles: usize,
        dim: usize,
        proj: usize,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(vocab, verbs, roles, dim, proj);
        let mut fill = |v: &mut Vec<f64>| {
            for x in v.iter_mut() {
                *x = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
            }
        };
        fill(&mut p.u);
        fill(&mut p.c_shared);
        for c in &mut p.c_verb {
            fill(c);
        }
        p
    }

    pub fn vocab(&self) -> usize {
        self.b.len()
    }

    pub fn verbs(&self) -> usize {
        self.c_verb.len()
    }

    pub fn block_len(&self) -> usize {
        self.dim * self.proj
    }

    pub fn embedding(&self, a: LemmaId) -> &[f64] {
        &self.u[a * self.dim..(a + 1) * self.dim]
    }

    /// `C_{v,s} + C_s` for every role, `roles × dim × proj`.
    pub fn combined_projections(&self, verb: Option<VerbId>) -> Vec<f64> {
        match verb {
            Some(v) => self
                .c_shared
                .iter()
                .zip(&self.c_verb[v])
                .map(|(a, b)| a + b)
                .collect(),
            None => self.c_shared.clone(),
        }
    }
}

/// Precomputed per-instance quantities shared by every candidate score.
#[derive(Clone, Debug)]
pub struct InstanceWorkspace {
    dim: usize,
    proj: usize,
    /// `C_{v,s} + C_s` per role.
    combined: Vec<f64>,
    /// `A_i` per argument.
    effective: Vec<f64>,
    /// `m_i` per argument.
    messages: Vec<f64>,
    total: Vec<f64>,
}

impl InstanceWorkspace {
    pub fn len(&self) -> usize {
        self.messages.len() / self.proj
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn effective(&self, i: usize) -> &[f64] {
        let n = self.dim * self.proj;
        &self.effective[i * n..(i + 1) * n]
    }

    pub fn message(&self, i: usize) -> &[f64] {
        &self.messages[i * self.proj..(i + 1) * self.proj]
    }

    pub fn total(&self) -> &[f64] {
        &self.total
    }

    /// `T − m_i`, the summed messages of the other arguments.
    pub fn context(&self, i: usize) -> Vec<f64> {
        self.total
            .iter()
            .zip(self.message(i))
            .map(|(t, m)| t - m)
            .collect()
    }

    /// `A_i (T − m_i)`: dotting with `u_a` gives the bilinear part of `φ_i(a)`.
    pub fn query(&self, i: usize) -> Vec<f64> {
        mat_vec(self.effective(i), &self.context(i), self.dim, self.proj)
    }
}

/// `M x` for row-major `rows × cols` M.
fn mat_vec(m: &[f64], x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    (0..rows).map(|p| dot(&m[p * cols..(p + 1) * cols], x)).collect()
}

/// `Mᵀ x` for row-major `rows × cols` M.
fn mat_t_vec(m: &[f64], x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for p in 0..rows {
        let xp = x[p];
        if xp == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(&m[p * cols..(p + 1) * cols]) {
            *o += xp * v;
        }
    }
    out
}

/// `M += scale · a bᵀ`.
fn add_outer(m: &mut [f64], a: &[f64], b: &[f64], scale: f64) {
    let cols = b.len();
    for (p, &ap) in a.iter().enumerate() {
        let f = scale * ap;
        if f == 0.0 {
            continue;
        }
        for (o, v) in m[p * cols..(p + 1) * cols].iter_mut().zip(b) {
            *o += f * v;
        }
    }
}

pub fn build_workspace(frame: &Frame, mu: &Posteriors, params: &ReconParams) -> InstanceWorkspace {
    let n = frame.len();
    assert_eq!(mu.len(), n, "posterior rows must match argument count");
    let (dim, proj) = (params.dim, params.proj);
    let block = dim * proj;
    let combined = params.combined_projections(frame.verb);
    let mut effective = vec![0.0; n * block];
    let mut messages = vec![0.0; n * proj];
    let mut total = vec![0.0; proj];
    for i in 0..n {
        let a_i = &mut effective[i * block..(i + 1) * block];
        for (s, &weight) in mu.row(i).iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            for (a, c) in a_i.iter_mut().zip(&combined[s * block..(s + 1) * block]) {
                *a += weight * c;
            }
        }
        let m = mat_t_vec(a_i, params.embedding(frame.lemmas[i]), dim, proj);
        for (t, x) in total.iter_mut().zip(&m) {
            *t += x;
        }
        messages[i * proj..(i + 1) * proj].copy_from_slice(&m);
    }
    InstanceWorkspace {
        dim,
        proj,
        combined,
        effective,
        messages,
        total,
    }
}

/// Score of `candidate` in slot `i`. For a single-argument frame this is
/// exactly `b_candidate`.
pub fn phi(i: usize, candidate: LemmaId, ws: &InstanceWorkspace, params: &ReconParams) -> f64 {
    dot(params.embedding(candidate), &ws.query(i)) + params.b[candidate]
}

/// `log σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Negative-sampling objective of one instance; higher is better.
pub fn recon_objective(
    frame: &Frame,
    mu: &Posteriors,
    negatives: &[Vec<LemmaId>],
    params: &ReconParams,
) -> f64 {
    assert_eq!(negatives.len(), frame.len());
    let ws = build_workspace(frame, mu, params);
    let mut total = 0.0;
    for (i, &a) in frame.lemmas.iter().enumerate() {
        let q = ws.query(i);
        total += log_sigmoid(dot(params.embedding(a), &q) + params.b[a]);
        for &neg in &negatives[i] {
            total += log_sigmoid(-(dot(params.embedding(neg), &q) + params.b[neg]));
        }
    }
    total
}

/// Objective value and its gradient with respect to every parameter group
/// and to the posteriors.
#[derive(Clone, Debug)]
pub struct ReconGradients {
    pub objective: f64,
    /// Rows of `u`, width `dim`.
    pub u: SparseRows,
    /// Entries of `b`, width 1.
    pub b: SparseRows,
    /// Same layout as [`ReconParams::c_shared`].
    pub c_shared: Vec<f64>,
    /// Gradient for the frame's verb block, if it has one.
    pub c_verb: Option<(VerbId, Vec<f64>)>,
    /// `dJ/dμ`, row-major `N × R`.
    pub mu: Vec<f64>,
}

pub fn recon_backward(
    frame: &Frame,
    mu: &Posteriors,
    negatives: &[Vec<LemmaId>],
    params: &ReconParams,
) -> ReconGradients {
    let n = frame.len();
    assert_eq!(negatives.len(), n);
    let (dim, proj, roles) = (params.dim, params.proj, params.roles);
    let block = dim * proj;
    let ws = build_workspace(frame, mu, params);

    let mut objective = 0.0;
    let mut du = SparseRows::new(dim);
    let mut db = SparseRows::new(1);
    let mut d_effective = vec![0.0; n * block];
    // dJ/d(context_i)
    let mut d_context = vec![0.0; n * proj];

    for i in 0..n {
        let context = ws.context(i);
        let a_i = ws.effective(i);
        let q = mat_vec(a_i, &context, dim, proj);
        // Σ_c g_c u_c over this slot's candidates
        let mut pulled = vec![0.0; dim];
        let positive = std::iter::once((frame.lemmas[i], true));
        let candidates = positive.chain(negatives[i].iter().map(|&a| (a, false)));
        for (c, is_positive) in candidates {
            let u_c = params.embedding(c);
            let score = dot(u_c, &q) + params.b[c];
            let g = if is_positive {
                objective += log_sigmoid(score);
                1.0 - sigmoid(score)
            } else {
                objective += log_sigmoid(-score);
                -sigmoid(score)
            };
            db.row_mut(c)[0] += g;
            for (d, x) in du.row_mut(c).iter_mut().zip(&q) {
                *d += g * x;
            }
            for (p, x) in pulled.iter_mut().zip(u_c) {
                *p += g * x;
            }
        }
        add_outer(
            &mut d_effective[i * block..(i + 1) * block],
            &pulled,
            &context,
            1.0,
        );
        let dc = mat_t_vec(a_i, &pulled, dim, proj);
        d_context[i * proj..(i + 1) * proj].copy_from_slice(&dc);
    }

    // context_i = Σ_{j≠i} m_j, so dJ/dm_j = Σ_{i≠j} dJ/dcontext_i.
    let mut summed = vec![0.0; proj];
    for i in 0..n {
        for (s, x) in summed.iter_mut().zip(&d_context[i * proj..(i + 1) * proj]) {
            *s += x;
        }
    }
    for j in 0..n {
        let dm: Vec<f64> = summed
            .iter()
            .zip(&d_context[j * proj..(j + 1) * proj])
            .map(|(s, own)| s - own)
            .collect();
        let a_j = frame.lemmas[j];
        add_outer(
            &mut d_effective[j * block..(j + 1) * block],
            params.embedding(a_j),
            &dm,
            1.0,
        );
        let back = mat_vec(ws.effective(j), &dm, dim, proj);
        for (d, x) in du.row_mut(a_j).iter_mut().zip(&back) {
            *d += x;
        }
    }

    // A_i = Σ_s μ_is P_s
    let mut d_combined = vec![0.0; roles * block];
    let mut d_mu = vec![0.0; n * roles];
    for i in 0..n {
        let d_a = &d_effective[i * block..(i + 1) * block];
        for s in 0..roles {
            let p_s = &ws.combined[s * block..(s + 1) * block];
            d_mu[i * roles + s] = dot(p_s, d_a);
            let weight = mu.row(i)[s];
            if weight != 0.0 {
                for (d, x) in d_combined[s * block..(s + 1) * block].iter_mut().zip(d_a) {
                    *d += weight * x;
                }
            }
        }
    }

    let c_verb = frame.verb.map(|v| (v, d_combined.clone()));
    ReconGradients {
        objective,
        u: du,
        b: db,
        c_shared: d_combined,
        c_verb,
        mu: d_mu,
    }
}

/// Hard-assignment tuple score `Σ_{i≠j} m_iᵀ m_j` with
/// `m_i = (C_{v,r_i} + C_{r_i})ᵀ u_{a_i}`.
pub fn score_tuple(frame: &Frame, roles: &[usize], params: &ReconParams) -> f64 {
    assert_eq!(frame.len(), roles.len());
    let combined = params.combined_projections(frame.verb);
    let block = params.block_len();
    let messages: Vec<Vec<f64>> = frame
        .lemmas
        .iter()
        .zip(roles)
        .map(|(&a, &r)| {
            mat_t_vec(
                &combined[r * block..(r + 1) * block],
                params.embedding(a),
                params.dim,
                params.proj,
            )
        })
        .collect();
    let mut score = 0.0;
    for (i, mi) in messages.iter().enumerate() {
        for (j, mj) in messages.iter().enumerate() {
            if i != j {
                score += dot(mi, mj);
            }
        }
    }
    score
}
