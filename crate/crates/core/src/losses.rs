// Copyright 2026 The bb2vec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Per-example losses and their exact gradients.
//!
//! All losses are in minimisation form (negated log-likelihoods):
//!
//! * classification: `-log s(v'_O.v_I) - sum_i log s(-v'_i.v_I)`
//! * ranking: `-sum_i log s((v'_O - v'_i).v_I)`
//! * matrix factorisation: `1/2 (target - v'_i.v_j)^2`
//!
//! where `s` is the logistic sigmoid. Gradients are sparse: only the rows an example touches.

use crate::corpus::ItemId;
use crate::model::{dot, EmbeddingMatrix};

/// Sigmoid arguments are clamped to this magnitude before exponentiation.
pub const SIGMOID_CLAMP: f64 = 30.0;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln s(x)` without overflow.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// A positive `(w_I, w_O)` pair with its sampled negatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairExample {
    pub input: ItemId,
    pub output: ItemId,
    pub negatives: Vec<ItemId>,
}

/// One matrix-factorisation target: `v'_i . v_j` should equal `target`.
/// `i` indexes the output matrix, `j` the input matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MfCell {
    pub i: ItemId,
    pub j: ItemId,
    pub target: f64,
}

/// Read access to embedding rows.
pub trait RowSource {
    fn dim(&self) -> usize;
    fn row(&self, id: ItemId) -> &[f64];
}

impl RowSource for EmbeddingMatrix {
    fn dim(&self) -> usize {
        EmbeddingMatrix::dim(self)
    }

    fn row(&self, id: ItemId) -> &[f64] {
        EmbeddingMatrix::row(self, id)
    }
}

/// Gradient rows keyed by item, repeated ids accumulated into one row.
#[derive(Clone, Debug, PartialEq)]
pub struct RowGrads {
    dim: usize,
    ids: Vec<ItemId>,
    data: Vec<f64>,
}

impl RowGrads {
    pub fn new(dim: usize) -> Self {
        RowGrads {
            dim,
            ids: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn clear(&mut self) {
        self.ids.clear();
        self.data.clear();
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ItemId] {
        &self.ids
    }

    pub fn get(&self, id: ItemId) -> Option<&[f64]> {
        let k = self.ids.iter().position(|&x| x == id)?;
        Some(&self.data[k * self.dim..(k + 1) * self.dim])
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, &[f64])> {
        self.ids.iter().copied().zip(self.data.chunks_exact(self.dim))
    }

    /// `grad[id] += scale * v`.
    pub fn add_scaled(&mut self, id: ItemId, scale: f64, v: &[f64]) {
        let k = match self.ids.iter().position(|&x| x == id) {
            Some(k) => k,
            None => {
                self.ids.push(id);
                self.data.resize(self.data.len() + self.dim, 0.0);
                self.ids.len() - 1
            }
        };
        let dst = &mut self.data[k * self.dim..(k + 1) * self.dim];
        for (d, x) in dst.iter_mut().zip(v) {
            *d += scale * x;
        }
    }
}

/// Gradients with respect to the input-matrix rows and the output-matrix rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub input: RowGrads,
    pub output: RowGrads,
}

impl Gradients {
    pub fn new(dim: usize) -> Self {
        Gradients {
            input: RowGrads::new(dim),
            output: RowGrads::new(dim),
        }
    }

    pub fn clear(&mut self) {
        self.input.clear();
        self.output.clear();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossEval {
    pub loss: f64,
    pub grads: Gradients,
}

/// Negative-sampling classification loss, gradients written into `grads`.
pub fn classification_into(
    ex: &PairExample,
    input: &impl RowSource,
    output: &impl RowSource,
    grads: &mut Gradients,
) -> f64 {
    grads.clear();
    let v_in = input.row(ex.input);
    let pos = output.row(ex.output);

    let s = dot(pos, v_in);
    let mut loss = -log_sigmoid(s);
    let c = sigmoid(s) - 1.0;
    grads.input.add_scaled(ex.input, c, pos);
    grads.output.add_scaled(ex.output, c, v_in);

    for &r in &ex.negatives {
        let neg = output.row(r);
        let s = dot(neg, v_in);
        loss -= log_sigmoid(-s);
        let c = sigmoid(s);
        grads.input.add_scaled(ex.input, c, neg);
        grads.output.add_scaled(r, c, v_in);
    }
    loss
}

/// Pairwise ranking loss: the positive must outscore each negative.
pub fn ranking_into(
    ex: &PairExample,
    input: &impl RowSource,
    output: &impl RowSource,
    grads: &mut Gradients,
) -> f64 {
    grads.clear();
    let v_in = input.row(ex.input);
    let pos = output.row(ex.output);
    let s_pos = dot(pos, v_in);

    let mut loss = 0.0;
    for &r in &ex.negatives {
        let neg = output.row(r);
        let diff = s_pos - dot(neg, v_in);
        loss -= log_sigmoid(diff);
        let c = sigmoid(diff) - 1.0;
        grads.input.add_scaled(ex.input, c, pos);
        grads.input.add_scaled(ex.input, -c, neg);
        grads.output.add_scaled(ex.output, c, v_in);
        grads.output.add_scaled(r, -c, v_in);
    }
    loss
}

/// Squared-error factorisation of one target cell.
pub fn mf_into(
    cell: &MfCell,
    input: &impl RowSource,
    output: &impl RowSource,
    grads: &mut Gradients,
) -> f64 {
    grads.clear();
    let v_j = input.row(cell.j);
    let u_i = output.row(cell.i);
    let residual = cell.target - dot(u_i, v_j);
    grads.input.add_scaled(cell.j, -residual, u_i);
    grads.output.add_scaled(cell.i, -residual, v_j);
    0.5 * residual * residual
}

pub fn loss_classification(
    ex: &PairExample,
    input: &EmbeddingMatrix,
    output: &EmbeddingMatrix,
) -> LossEval {
    let mut grads = Gradients::new(input.dim());
    let loss = classification_into(ex, input, output, &mut grads);
    LossEval { loss, grads }
}

pub fn loss_ranking(ex: &PairExample, input: &EmbeddingMatrix, output: &EmbeddingMatrix) -> LossEval {
    let mut grads = Gradients::new(input.dim());
    let loss = ranking_into(ex, input, output, &mut grads);
    LossEval { loss, grads }
}

pub fn loss_mf(cell: &MfCell, input: &EmbeddingMatrix, output: &EmbeddingMatrix) -> LossEval {
    let mut grads = Gradients::new(input.dim());
    let loss = mf_into(cell, input, output, &mut grads);
    LossEval { loss, grads }
}

/// A handful of rows copied out of a matrix, for kernels that must not borrow shared storage.
#[derive(Clone, Debug)]
pub struct RowCache {
    dim: usize,
    ids: Vec<ItemId>,
    data: Vec<f64>,
}

impl RowCache {
    pub fn new(dim: usize) -> Self {
        RowCache {
            dim,
            ids: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn clear(&mut self) {
        self.ids.clear();
        self.data.clear();
    }

    /// Adds `id` by filling a fresh row through `fill` unless already cached.
    pub fn insert_with(&mut self, id: ItemId, fill: impl FnOnce(&mut [f64])) {
        if self.ids.contains(&id) {
            return;
        }
        self.ids.push(id);
        let start = self.data.len();
        self.data.resize(start + self.dim, 0.0);
        fill(&mut self.data[start..]);
    }
}

impl RowSource for RowCache {
    fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, id: ItemId) -> &[f64] {
        let k = self
            .ids
            .iter()
            .position(|&x| x == id)
            .expect("row was cached before use");
        &self.data[k * self.dim..(k + 1) * self.dim]
    }
}
