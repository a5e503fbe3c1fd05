//! The role labeler: an independent multinomial logistic classifier per
//! argument, `p(r_i = s | x) ∝ exp(Σ_f w[s, f])` over the argument's active
//! features.

use crate::features::SparseVector;
use crate::sparse::SparseRows;

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    roles: usize,
    features: usize,
    /// Row-major `roles × features`.
    weights: Vec<f64>,
}

impl EncoderParams {
    pub fn zeros(roles: usize, features: usize) -> Self {
        EncoderParams {
            roles,
            features,
            weights: vec![0.0; roles * features],
        }
    }

    /// `weights` is row-major `roles × features`.
    pub fn from_weights(roles: usize, features: usize, weights: Vec<f64>) -> Option<Self> {
        (weights.len() == roles * features).then_some(EncoderParams {
            roles,
            features,
            weights,
        })
    }

    pub fn roles(&self) -> usize {
        self.roles
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn weight(&self, role: usize, feature: usize) -> f64 {
        self.weights[role * self.features + feature]
    }

    pub fn weight_mut(&mut self, role: usize, feature: usize) -> &mut f64 {
        &mut self.weights[role * self.features + feature]
    }

    /// Unnormalized role scores of one argument.
    pub fn scores(&self, features: &SparseVector) -> Vec<f64> {
        (0..self.roles)
            .map(|s| {
                let row = &self.weights[s * self.features..(s + 1) * self.features];
                features.ids().iter().map(|&f| row[f]).sum()
            })
            .collect()
    }
}

/// Row-major `N × R` matrix of role posteriors.
#[derive(Clone, Debug, PartialEq)]
pub struct Posteriors {
    roles: usize,
    data: Vec<f64>,
}

impl Posteriors {
    pub fn from_rows(roles: usize, data: Vec<f64>) -> Self {
        assert!(roles > 0 && data.len().is_multiple_of(roles));
        Posteriors { roles, data }
    }

    /// One-hot rows for hard role assignments.
    pub fn one_hot(roles: usize, assignment: &[usize]) -> Self {
        let mut data = vec![0.0; assignment.len() * roles];
        for (i, &r) in assignment.iter().enumerate() {
            data[i * roles + r] = 1.0;
        }
        Posteriors { roles, data }
    }

    pub fn uniform(n: usize, roles: usize) -> Self {
        Posteriors {
            roles,
            data: vec![1.0 / roles as f64; n * roles],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.roles
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn roles(&self) -> usize {
        self.roles
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.roles..(i + 1) * self.roles]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

pub(crate) fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}

pub fn posteriors(features: &[SparseVector], params: &EncoderParams) -> Posteriors {
    let mut data = Vec::with_capacity(features.len() * params.roles);
    for f in features {
        let mut row = params.scores(f);
        softmax_in_place(&mut row);
        data.extend(row);
    }
    Posteriors {
        roles: params.roles,
        data,
    }
}

/// Backpropagates `upstream = dL/dμ` (row-major `N × R`) through the
/// softmax into the weights. Returns one gradient row of length R per
/// touched feature, i.e. `grad[f][s] = dL/dw[s, f]`.
pub fn encoder_backward(features: &[SparseVector], mu: &Posteriors, upstream: &[f64]) -> SparseRows {
    let roles = mu.roles();
    assert_eq!(upstream.len(), mu.as_slice().len());
    let mut grad = SparseRows::new(roles);
    let mut dz = vec![0.0; roles];
    for (i, f) in features.iter().enumerate() {
        let m = mu.row(i);
        let up = &upstream[i * roles..(i + 1) * roles];
        let mean: f64 = m.iter().zip(up).map(|(a, b)| a * b).sum();
        for s in 0..roles {
            dz[s] = m[s] * (up[s] - mean);
        }
        for &id in f.ids() {
            let row = grad.row_mut(id);
            for s in 0..roles {
                row[s] += dz[s];
            }
        }
    }
    grad
}

/// Argmax per argument; ties go to the smallest role id.
pub fn predict_roles(features: &[SparseVector], params: &EncoderParams) -> Vec<usize> {
    features.iter().map(|f| argmax(&params.scores(f))).collect()
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
