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

//! Multi-task SGD over shared embedding matrices.
//!
//! Each update picks a task with probability proportional to its weight, samples one example
//! from that task's data (a basket or session pair plus negatives, or one shifted-PMI cell),
//! and applies AdaGrad to the rows the example touches. Tasks bind an input matrix and an
//! output matrix by index, so several tasks can share parameters. Training runs in epochs of
//! a fixed number of updates, with early stopping on validation HitRate@10 computed from
//! matrix pair 0.

use std::io::Write;
use std::path::Path;
use std::thread;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooccurrence::SpmiMatrix;
use crate::corpus::{write_file, BucketEdges, Corpus, ItemId, ItemSet};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, extract_pairs, EmbeddingRecommender, EvalPair};
use crate::losses::{
    classification_into, mf_into, ranking_into, Gradients, MfCell, PairExample, RowCache,
    RowSource,
};
use crate::model::{EmbeddingSet, SharedMatrix, DEFAULT_LEARNING_RATE};

/// Cut-off of the validation metric used for early stopping.
pub const VALIDATION_K: usize = 10;
pub const DEFAULT_NEGATIVES: usize = 20;
pub const DEFAULT_PATIENCE: usize = 3;

const TRAIN_STREAM: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskSource {
    /// Ordered pairs from training baskets.
    BasketPairs,
    /// Ordered pairs from training browsing sessions.
    SessionPairs,
    /// Cells of the shifted-PMI matrix of browsing sessions.
    SpmiCells,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossKind {
    Classification,
    Ranking,
    Mf,
}

/// One learning task: where examples come from, which loss, and which matrices it updates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaskSpec {
    pub source: TaskSource,
    pub loss: LossKind,
    pub input_matrix: usize,
    pub output_matrix: usize,
    pub weight: f64,
}

impl TaskSpec {
    pub fn new(
        source: TaskSource,
        loss: LossKind,
        input_matrix: usize,
        output_matrix: usize,
        weight: f64,
    ) -> Result<Self> {
        let spec = TaskSpec {
            source,
            loss,
            input_matrix,
            output_matrix,
            weight,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mf_source = self.source == TaskSource::SpmiCells;
        if mf_source != (self.loss == LossKind::Mf) {
            return Err(Error::config(format!(
                "loss {:?} cannot be used with source {:?}",
                self.loss, self.source
            )));
        }
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err(Error::config(format!(
                "task weight must be positive, got {}",
                self.weight
            )));
        }
        Ok(())
    }
}

/// Matrix pair labels plus the tasks that train them.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPlan {
    pub labels: Vec<String>,
    pub tasks: Vec<TaskSpec>,
}

impl ModelPlan {
    /// Basket pairs only, one matrix pair `(V_B, V'_B)`.
    pub fn prod2vec(loss: LossKind) -> Result<Self> {
        Ok(ModelPlan {
            labels: vec!["B".into()],
            tasks: vec![TaskSpec::new(TaskSource::BasketPairs, loss, 0, 0, 1.0)?],
        })
    }

    pub fn bb2vec(loss: LossKind, lambda: f64) -> Result<Self> {
        Bb2vecWiring::new(lambda)?.plan(loss)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::config("a model needs at least one task"));
        }
        for t in &self.tasks {
            t.validate()?;
            if t.input_matrix >= self.labels.len() || t.output_matrix >= self.labels.len() {
                return Err(Error::config(format!(
                    "task binds matrix {} / {} but only {} pairs exist",
                    t.input_matrix,
                    t.output_matrix,
                    self.labels.len()
                )));
            }
        }
        Ok(())
    }
}

/// Basket task on `(V_B, V'_B)` plus two browsing factorisation tasks with one shared weight:
/// `V_B` against `V'_S` and `V_S` against `V'_B`. A zero weight leaves only the basket task.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bb2vecWiring {
    pub lambda: f64,
}

impl Bb2vecWiring {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::config(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Bb2vecWiring { lambda })
    }

    pub fn plan(&self, basket_loss: LossKind) -> Result<ModelPlan> {
        self.plan_with_browsing(basket_loss, None)
    }

    /// With `browsing_loss = Some(..)` the browsing tasks run skip-gram on session pairs
    /// instead of factorising the shifted-PMI matrix. Meant for small corpora.
    pub fn plan_with_browsing(
        &self,
        basket_loss: LossKind,
        browsing_loss: Option<LossKind>,
    ) -> Result<ModelPlan> {
        let mut tasks = vec![TaskSpec::new(TaskSource::BasketPairs, basket_loss, 0, 0, 1.0)?];
        if self.lambda > 0.0 {
            let (source, loss) = match browsing_loss {
                None => (TaskSource::SpmiCells, LossKind::Mf),
                Some(l) => (TaskSource::SessionPairs, l),
            };
            tasks.push(TaskSpec::new(source, loss, 0, 1, self.lambda)?);
            tasks.push(TaskSpec::new(source, loss, 1, 0, self.lambda)?);
        }
        Ok(ModelPlan {
            labels: vec!["B".into(), "S".into()],
            tasks,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub negatives: usize,
    pub base_lr: f64,
    /// Negatives are drawn proportionally to `count^alpha`; 0 is uniform.
    pub neg_alpha: f64,
    /// Updates per epoch; `None` means the number of ordered training basket pairs.
    pub epoch_size: Option<u64>,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// More than one thread enables lock-free concurrent updates (not reproducible).
    pub hogwild_threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            negatives: DEFAULT_NEGATIVES,
            base_lr: DEFAULT_LEARNING_RATE,
            neg_alpha: 0.0,
            epoch_size: None,
            max_epochs: 30,
            patience: DEFAULT_PATIENCE,
            seed: 0,
            hogwild_threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::config(m.to_string()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if !(self.base_lr.is_finite() && self.base_lr > 0.0) {
            return fail("base_lr must be positive");
        }
        if !(self.neg_alpha.is_finite() && self.neg_alpha >= 0.0) {
            return fail("neg_alpha must be >= 0");
        }
        if self.epoch_size == Some(0) {
            return fail("epoch_size must be at least 1");
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return fail("max_epochs and patience must be at least 1");
        }
        if self.hogwild_threads == 0 {
            return fail("hogwild_threads must be at least 1");
        }
        Ok(())
    }
}

/// Noise distribution over the vocabulary, proportional to `count^alpha`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    alpha: f64,
    probs: Vec<f64>,
    dist: Option<WeightedIndex<f64>>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64], alpha: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::config("negative sampler needs a non-empty vocabulary"));
        }
        if alpha == 0.0 {
            let p = 1.0 / counts.len() as f64;
            return Ok(NegativeSampler {
                alpha,
                probs: vec![p; counts.len()],
                dist: None,
            });
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(alpha)).collect();
        let total: f64 = weights.iter().sum();
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::config(format!("cannot build noise distribution: {e}")))?;
        Ok(NegativeSampler {
            alpha,
            probs: weights.iter().map(|w| w / total).collect(),
            dist: Some(dist),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn probability(&self, item: ItemId) -> f64 {
        self.probs[item.index()]
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ItemId {
        match &self.dist {
            None => ItemId::from(rng.random_range(0..self.probs.len())),
            Some(d) => ItemId::from(d.sample(rng)),
        }
    }
}

/// Categorical choice of a task index by weight. Always consumes exactly one draw.
#[derive(Clone, Debug)]
pub struct TaskSampler {
    cumulative: Vec<f64>,
}

impl TaskSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config("task weights must be finite and non-negative"));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(Error::config("task weights sum to zero"));
        }
        Ok(TaskSampler { cumulative })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // Rounding can put u at the total.
        idx.min(self.cumulative.len() - 1)
    }
}

pub fn sample_task<R: Rng + ?Sized>(specs: &[TaskSpec], rng: &mut R) -> Result<usize> {
    let weights: Vec<f64> = specs.iter().map(|s| s.weight).collect();
    Ok(TaskSampler::new(&weights)?.sample(rng))
}

/// Uniform choice among all ordered pairs `(a, b)`, `a != b`, of all sets.
#[derive(Clone, Debug)]
pub struct PairSampler {
    /// Running total of ordered pairs, one entry per set.
    cumulative: Vec<u64>,
}

impl PairSampler {
    pub fn new(sets: &[ItemSet]) -> Result<Self> {
        let mut acc = 0u64;
        let cumulative: Vec<u64> = sets
            .iter()
            .map(|s| {
                acc += s.ordered_pairs();
                acc
            })
            .collect();
        if acc == 0 {
            return Err(Error::config("no set with at least two items to sample pairs from"));
        }
        Ok(PairSampler { cumulative })
    }

    pub fn total_pairs(&self) -> u64 {
        *self.cumulative.last().unwrap()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, sets: &[ItemSet], rng: &mut R) -> (ItemId, ItemId) {
        let r = rng.random_range(0..self.total_pairs());
        let s = self.cumulative.partition_point(|&c| c <= r);
        let before = if s == 0 { 0 } else { self.cumulative[s - 1] };
        let items = sets[s].items();
        let within = (r - before) as usize;
        let others = items.len() - 1;
        let a = within / others;
        let mut b = within % others;
        if b >= a {
            b += 1;
        }
        (items[a], items[b])
    }
}

pub fn sample_pair<R: Rng + ?Sized>(baskets: &[ItemSet], rng: &mut R) -> Result<(ItemId, ItemId)> {
    Ok(PairSampler::new(baskets)?.sample(baskets, rng))
}

/// A uniformly chosen stored cell in a uniformly chosen orientation.
pub fn sample_mf_cell<R: Rng + ?Sized>(spmi: &SpmiMatrix, rng: &mut R) -> Result<MfCell> {
    if spmi.is_empty() {
        return Err(Error::config("shifted-PMI matrix has no cells"));
    }
    Ok(draw_cell(spmi, rng))
}

#[inline]
fn draw_cell<R: Rng + ?Sized>(spmi: &SpmiMatrix, rng: &mut R) -> MfCell {
    let c = spmi.cells()[rng.random_range(0..spmi.len())];
    if rng.random::<bool>() {
        MfCell {
            i: c.i,
            j: c.j,
            target: c.value,
        }
    } else {
        MfCell {
            i: c.j,
            j: c.i,
            target: c.value,
        }
    }
}

/// Work done so far, per task.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// SGD updates.
    pub steps: Vec<u64>,
    /// Matrix rows written by AdaGrad.
    pub row_updates: Vec<u64>,
    /// Cells written by AdaGrad (`row_updates * dim`).
    pub cell_updates: Vec<u64>,
}

impl OpCounters {
    fn new(tasks: usize) -> Self {
        OpCounters {
            steps: vec![0; tasks],
            row_updates: vec![0; tasks],
            cell_updates: vec![0; tasks],
        }
    }

    fn add(&mut self, other: &OpCounters) {
        for (a, b) in self.steps.iter_mut().zip(&other.steps) {
            *a += b;
        }
        for (a, b) in self.row_updates.iter_mut().zip(&other.row_updates) {
            *a += b;
        }
        for (a, b) in self.cell_updates.iter_mut().zip(&other.cell_updates) {
            *a += b;
        }
    }

    fn record(&mut self, task: usize, grads: &Gradients, dim: usize) {
        let rows = (grads.input.len() + grads.output.len()) as u64;
        self.steps[task] += 1;
        self.row_updates[task] += rows;
        self.cell_updates[task] += rows * dim as u64;
    }
}

/// Cells written by one pass of `2 * cells` factorisation updates (every stored cell in both
/// orientations, in expectation): each update writes one input and one output row.
pub fn mf_epoch_cell_updates(spmi: &SpmiMatrix, dim: usize) -> u64 {
    2 * spmi.len() as u64 * 2 * dim as u64
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub task_steps: Vec<u64>,
    pub mean_loss: Vec<f64>,
    pub val_hitrate: Option<f64>,
}

pub struct TrainOutcome {
    /// Snapshot from the epoch with the best validation HitRate@10 (the last epoch when
    /// there is no validation data).
    pub embeddings: EmbeddingSet,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    pub counters: OpCounters,
}

enum TaskData<'a> {
    Pairs {
        sets: &'a [ItemSet],
        pairs: PairSampler,
        noise: NegativeSampler,
    },
    Cells(&'a SpmiMatrix),
}

impl TaskData<'_> {
    fn natural_epoch(&self) -> u64 {
        match self {
            TaskData::Pairs { pairs, .. } => pairs.total_pairs(),
            TaskData::Cells(spmi) => 2 * spmi.len() as u64,
        }
    }
}

fn draw_example<R: Rng + ?Sized>(
    data: &TaskData<'_>,
    negatives: usize,
    rng: &mut R,
    ex: &mut PairExample,
) -> Option<MfCell> {
    match data {
        TaskData::Pairs { sets, pairs, noise } => {
            let (a, b) = pairs.sample(sets, rng);
            ex.input = a;
            ex.output = b;
            ex.negatives.clear();
            for _ in 0..negatives {
                ex.negatives.push(noise.sample(rng));
            }
            None
        }
        TaskData::Cells(spmi) => Some(draw_cell(spmi, rng)),
    }
}

fn run_kernel(
    loss: LossKind,
    pair: &PairExample,
    cell: Option<&MfCell>,
    input: &impl RowSource,
    output: &impl RowSource,
    grads: &mut Gradients,
) -> f64 {
    match (loss, cell) {
        (LossKind::Mf, Some(c)) => mf_into(c, input, output, grads),
        (LossKind::Classification, None) => classification_into(pair, input, output, grads),
        (LossKind::Ranking, None) => ranking_into(pair, input, output, grads),
        _ => unreachable!("TaskSpec::new rejects other loss/source pairings"),
    }
}

/// Stateful trainer; [`train`] drives it with early stopping.
pub struct Trainer<'a> {
    plan: ModelPlan,
    config: TrainConfig,
    data: Vec<TaskData<'a>>,
    task_sampler: TaskSampler,
    set: EmbeddingSet,
    rng: ChaCha8Rng,
    grads: Gradients,
    scratch: PairExample,
    counters: OpCounters,
    loss_sums: Vec<f64>,
    epoch_size: u64,
    epochs_done: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(
        corpus: &'a Corpus,
        spmi: Option<&'a SpmiMatrix>,
        plan: ModelPlan,
        config: TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        plan.validate()?;
        let mut data = Vec::with_capacity(plan.tasks.len());
        for t in &plan.tasks {
            data.push(match t.source {
                TaskSource::BasketPairs | TaskSource::SessionPairs => {
                    let (sets, counts) = if t.source == TaskSource::BasketPairs {
                        (corpus.train_baskets(), corpus.train_purchase_count())
                    } else {
                        (corpus.train_sessions(), corpus.train_view_count())
                    };
                    TaskData::Pairs {
                        sets,
                        pairs: PairSampler::new(sets)?,
                        noise: NegativeSampler::new(counts, config.neg_alpha)?,
                    }
                }
                TaskSource::SpmiCells => {
                    let spmi = spmi.ok_or_else(|| {
                        Error::config("a factorisation task needs a shifted-PMI matrix")
                    })?;
                    if spmi.vocab_size() != corpus.vocab_size() {
                        return Err(Error::config("PMI matrix and corpus vocabularies differ"));
                    }
                    if spmi.is_empty() {
                        return Err(Error::config("shifted-PMI matrix has no cells"));
                    }
                    TaskData::Cells(spmi)
                }
            });
        }

        let epoch_size = config.epoch_size.unwrap_or_else(|| {
            let basket_pairs = plan
                .tasks
                .iter()
                .zip(&data)
                .find(|(t, _)| t.source == TaskSource::BasketPairs)
                .map(|(_, d)| d.natural_epoch());
            basket_pairs.unwrap_or_else(|| data.iter().map(TaskData::natural_epoch).sum())
        });

        let labels: Vec<&str> = plan.labels.iter().map(String::as_str).collect();
        let set = EmbeddingSet::init(corpus.vocab_size(), config.dim, &labels, config.seed)?;
        let weights: Vec<f64> = plan.tasks.iter().map(|t| t.weight).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(TRAIN_STREAM);
        let n = plan.tasks.len();
        Ok(Trainer {
            task_sampler: TaskSampler::new(&weights)?,
            grads: Gradients::new(config.dim),
            scratch: PairExample {
                input: ItemId(0),
                output: ItemId(0),
                negatives: Vec::with_capacity(config.negatives),
            },
            counters: OpCounters::new(n),
            loss_sums: vec![0.0; n],
            plan,
            config,
            data,
            set,
            rng,
            epoch_size,
            epochs_done: 0,
        })
    }

    pub fn embeddings(&self) -> &EmbeddingSet {
        &self.set
    }

    pub fn into_embeddings(self) -> EmbeddingSet {
        self.set
    }

    pub fn counters(&self) -> &OpCounters {
        &self.counters
    }

    pub fn epoch_size(&self) -> u64 {
        self.epoch_size
    }

    /// Gradients applied by the latest serial [`Trainer::step`].
    pub fn last_gradients(&self) -> &Gradients {
        &self.grads
    }

    /// One serial SGD update; returns the task index and the example's loss.
    pub fn step(&mut self) -> Result<(usize, f64)> {
        let task = self.task_sampler.sample(&mut self.rng);
        let spec = self.plan.tasks[task];
        let cell = draw_example(
            &self.data[task],
            self.config.negatives,
            &mut self.rng,
            &mut self.scratch,
        );
        let loss = run_kernel(
            spec.loss,
            &self.scratch,
            cell.as_ref(),
            self.set.input(spec.input_matrix),
            self.set.output(spec.output_matrix),
            &mut self.grads,
        );
        if !loss.is_finite() {
            return Err(Error::Divergence {
                epoch: self.epochs_done,
                step: self.counters.steps.iter().sum(),
                task,
                loss,
            });
        }
        let lr = self.config.base_lr;
        let (input, output) = self.set.pair_mut(spec.input_matrix, spec.output_matrix);
        for (id, g) in self.grads.input.iter() {
            input.adagrad_step(id, g, lr)?;
        }
        for (id, g) in self.grads.output.iter() {
            output.adagrad_step(id, g, lr)?;
        }
        self.counters.record(task, &self.grads, self.config.dim);
        self.loss_sums[task] += loss;
        Ok((task, loss))
    }

    /// Runs one epoch of updates and returns per-task step counts and mean losses.
    pub fn run_epoch(&mut self) -> Result<(Vec<u64>, Vec<f64>)> {
        let before = self.counters.clone();
        self.loss_sums.iter_mut().for_each(|l| *l = 0.0);
        if self.config.hogwild_threads > 1 {
            self.run_epoch_hogwild()?;
        } else {
            for _ in 0..self.epoch_size {
                self.step()?;
            }
        }
        self.epochs_done += 1;
        let steps: Vec<u64> = self
            .counters
            .steps
            .iter()
            .zip(&before.steps)
            .map(|(a, b)| a - b)
            .collect();
        let mean = steps
            .iter()
            .zip(&self.loss_sums)
            .map(|(&n, &s)| if n == 0 { 0.0 } else { s / n as f64 })
            .collect();
        Ok((steps, mean))
    }

    fn run_epoch_hogwild(&mut self) -> Result<()> {
        let threads = self.config.hogwild_threads;
        let pairs = self.set.num_pairs();
        let inputs: Vec<SharedMatrix> = (0..pairs)
            .map(|p| SharedMatrix::from_matrix(self.set.input(p)))
            .collect();
        let outputs: Vec<SharedMatrix> = (0..pairs)
            .map(|p| SharedMatrix::from_matrix(self.set.output(p)))
            .collect();
        let per_thread = self.epoch_size / threads as u64;
        let extra = self.epoch_size % threads as u64;
        let base_seed = self.rng.next_u64();
        let epoch = self.epochs_done;

        let results: Vec<Result<(OpCounters, Vec<f64>)>> = thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let steps = per_thread + u64::from((t as u64) < extra);
                    let (inputs, outputs) = (&inputs, &outputs);
                    let (plan, data, sampler, config) =
                        (&self.plan, &self.data, &self.task_sampler, &self.config);
                    s.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
                        rng.set_stream(t as u64);
                        hogwild_worker(
                            plan, data, sampler, config, inputs, outputs, steps, epoch, &mut rng,
                        )
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });

        for (p, (i, o)) in inputs.iter().zip(&outputs).enumerate() {
            i.store_into(self.set.input_mut(p));
            o.store_into(self.set.output_mut(p));
        }
        for r in results {
            let (c, losses) = r?;
            self.counters.add(&c);
            for (a, b) in self.loss_sums.iter_mut().zip(losses) {
                *a += b;
            }
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn hogwild_worker(
    plan: &ModelPlan,
    data: &[TaskData<'_>],
    sampler: &TaskSampler,
    config: &TrainConfig,
    inputs: &[SharedMatrix],
    outputs: &[SharedMatrix],
    steps: u64,
    epoch: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(OpCounters, Vec<f64>)> {
    let dim = config.dim;
    let mut counters = OpCounters::new(plan.tasks.len());
    let mut losses = vec![0.0; plan.tasks.len()];
    let mut grads = Gradients::new(dim);
    let mut in_rows = RowCache::new(dim);
    let mut out_rows = RowCache::new(dim);
    let mut ex = PairExample {
        input: ItemId(0),
        output: ItemId(0),
        negatives: Vec::with_capacity(config.negatives),
    };
    for step in 0..steps {
        let task = sampler.sample(rng);
        let spec = plan.tasks[task];
        let cell = draw_example(&data[task], config.negatives, rng, &mut ex);
        let (input, output) = (&inputs[spec.input_matrix], &outputs[spec.output_matrix]);
        in_rows.clear();
        out_rows.clear();
        match &cell {
            Some(c) => {
                in_rows.insert_with(c.j, |dst| input.read_row(c.j, dst));
                out_rows.insert_with(c.i, |dst| output.read_row(c.i, dst));
            }
            None => {
                in_rows.insert_with(ex.input, |dst| input.read_row(ex.input, dst));
                for &id in std::iter::once(&ex.output).chain(&ex.negatives) {
                    out_rows.insert_with(id, |dst| output.read_row(id, dst));
                }
            }
        }
        let loss = run_kernel(spec.loss, &ex, cell.as_ref(), &in_rows, &out_rows, &mut grads);
        if !loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                step,
                task,
                loss,
            });
        }
        for (id, g) in grads.input.iter() {
            input.adagrad_step(id, g, config.base_lr)?;
        }
        for (id, g) in grads.output.iter() {
            output.adagrad_step(id, g, config.base_lr)?;
        }
        counters.record(task, &grads, dim);
        losses[task] += loss;
    }
    Ok((counters, losses))
}

/// Validation HitRate@10 of matrix pair 0.
pub fn validation_hitrate(set: &EmbeddingSet, pairs: &[EvalPair]) -> f64 {
    let rec = EmbeddingRecommender::new(set.input(0), set.output(0));
    let edges = BucketEdges::new(Vec::new()).expect("empty edges are valid");
    evaluate(&rec, pairs, &[VALIDATION_K], &edges).hitrate[0]
}

/// Trains `plan` and keeps the snapshot of the best validation epoch.
pub fn train(
    corpus: &Corpus,
    spmi: Option<&SpmiMatrix>,
    plan: ModelPlan,
    config: TrainConfig,
) -> Result<TrainOutcome> {
    let max_epochs = config.max_epochs;
    let patience = config.patience;
    let mut trainer = Trainer::new(corpus, spmi, plan, config)?;
    let val_pairs = extract_pairs(corpus.val_baskets(), corpus.train_purchase_count());

    let mut history = Vec::new();
    let mut best: Option<(f64, usize, EmbeddingSet)> = None;
    let mut stale = 0;
    for epoch in 1..=max_epochs {
        let (task_steps, mean_loss) = trainer.run_epoch()?;
        let val = if val_pairs.is_empty() {
            None
        } else {
            Some(validation_hitrate(trainer.embeddings(), &val_pairs))
        };
        history.push(EpochRecord {
            epoch,
            task_steps,
            mean_loss,
            val_hitrate: val,
        });
        let Some(v) = val else { continue };
        if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
            best = Some((v, epoch, trainer.embeddings().clone()));
            stale = 0;
        } else {
            stale += 1;
            if stale >= patience {
                break;
            }
        }
    }

    let counters = trainer.counters().clone();
    let (embeddings, best_epoch) = match best {
        Some((_, epoch, set)) => (set, epoch),
        None => (trainer.into_embeddings(), history.len()),
    };
    Ok(TrainOutcome {
        embeddings,
        best_epoch,
        history,
        counters,
    })
}

/// `epoch`, one step-count column per task, mean losses, validation HitRate@10.
pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    write_file(path, |w| {
        let tasks = history.first().map_or(0, |h| h.task_steps.len());
        write!(w, "epoch")?;
        for t in 0..tasks {
            write!(w, "\tsteps_task{t}")?;
        }
        for t in 0..tasks {
            write!(w, "\tloss_task{t}")?;
        }
        writeln!(w, "\tval_hitrate@{VALIDATION_K}")?;
        for h in history {
            write!(w, "{}", h.epoch)?;
            for s in &h.task_steps {
                write!(w, "\t{s}")?;
            }
            for l in &h.mean_loss {
                write!(w, "\t{l}")?;
            }
            match h.val_hitrate {
                Some(v) => writeln!(w, "\t{v}")?,
                None => writeln!(w, "\tNA")?,
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccurrence::{build_spmi, count_cooccurrences};
    use crate::corpus::SplitSets;

    fn ids(v: &[u32]) -> Vec<ItemId> {
        v.iter().map(|&i| ItemId(i)).collect()
    }

    fn baskets(lists: &[&[u32]]) -> Vec<ItemSet> {
        lists.iter().map(|l| ItemSet::basket(ids(l)).unwrap()).collect()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(99)
    }

    #[test]
    fn single_task_is_always_chosen() {
        let spec = TaskSpec::new(TaskSource::BasketPairs, LossKind::Ranking, 0, 0, 2.5).unwrap();
        let mut r = rng();
        assert!((0..100).all(|_| sample_task(&[spec], &mut r).unwrap() == 0));
    }

    #[test]
    fn task_frequencies_follow_weights() {
        for (weights, expected) in [([1.0, 1.0], 0.5), ([1.0, 3.0], 0.25)] {
            let s = TaskSampler::new(&weights).unwrap();
            let mut r = rng();
            let n = 100_000;
            let first = (0..n).filter(|_| s.sample(&mut r) == 0).count() as f64 / n as f64;
            assert!((first - expected).abs() < 0.01, "{first} vs {expected}");
        }
        assert!(TaskSampler::new(&[0.0, 0.0]).is_err());
        assert!(TaskSampler::new(&[]).is_err());
        let s = TaskSampler::new(&[1.0, 0.0]).unwrap();
        let mut r = rng();
        assert!((0..1000).all(|_| s.sample(&mut r) == 0));
    }

    #[test]
    fn two_item_basket_pairs() {
        let b = baskets(&[&[0, 1]]);
        let mut r = rng();
        let n = 20_000;
        let ab = (0..n)
            .filter(|_| sample_pair(&b, &mut r).unwrap() == (ItemId(0), ItemId(1)))
            .count();
        assert!((ab as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn pair_sampling_is_pair_uniform() {
        // 2 + 6 ordered pairs; every one has probability 1/8.
        let b = baskets(&[&[0, 1], &[2, 3, 4]]);
        let sampler = PairSampler::new(&b).unwrap();
        assert_eq!(sampler.total_pairs(), 8);
        let mut counts = std::collections::HashMap::new();
        let mut r = rng();
        let n = 80_000;
        for _ in 0..n {
            let (a, c) = sampler.sample(&b, &mut r);
            assert_ne!(a, c);
            *counts.entry((a, c)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 8);
        for (_, c) in counts {
            assert!((c as f64 / n as f64 - 0.125).abs() < 0.01);
        }
    }

    #[test]
    fn singleton_baskets_cannot_be_sampled() {
        let b = baskets(&[&[0], &[1]]);
        assert!(sample_pair(&b, &mut rng()).is_err());
        assert!(sample_pair(&[], &mut rng()).is_err());
    }

    fn spmi_of(lists: &[&[u32]], vocab: usize) -> SpmiMatrix {
        build_spmi(&count_cooccurrences(&baskets(lists), vocab), 1, 1).unwrap()
    }

    #[test]
    fn mf_cells_cover_both_orientations() {
        let one = spmi_of(&[&[0, 1], &[2]], 3);
        let mut r = rng();
        for _ in 0..50 {
            let c = sample_mf_cell(&one, &mut r).unwrap();
            assert!(matches!((c.i.0, c.j.0), (0, 1) | (1, 0)));
            assert_eq!(c.target, one.cells()[0].value);
        }

        let two = spmi_of(&[&[0, 1], &[2, 3], &[0]], 4);
        assert_eq!(two.len(), 2);
        let n = 100_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            let c = sample_mf_cell(&two, &mut r).unwrap();
            *counts.entry((c.i, c.j)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 4);
        for (_, c) in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01);
        }
        let empty = spmi_of(&[&[0], &[1]], 2);
        assert!(sample_mf_cell(&empty, &mut r).is_err());
    }

    #[test]
    fn negative_sampler_distribution() {
        let uniform = NegativeSampler::new(&[0, 5, 10, 1], 0.0).unwrap();
        assert!((0..4).all(|i| uniform.probability(ItemId(i)) == 0.25));
        let unigram = NegativeSampler::new(&[0, 1, 3], 1.0).unwrap();
        let total: f64 = (0..3).map(|i| unigram.probability(ItemId(i))).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(unigram.probability(ItemId(0)), 0.0);
        let mut r = rng();
        let n = 40_000;
        let twos = (0..n).filter(|_| unigram.sample(&mut r) == ItemId(2)).count();
        assert!((twos as f64 / n as f64 - 0.75).abs() < 0.01);
        assert!(NegativeSampler::new(&[0, 0], 1.0).is_err());
    }

    #[test]
    fn task_spec_pairing_rules() {
        assert!(TaskSpec::new(TaskSource::SpmiCells, LossKind::Ranking, 0, 0, 1.0).is_err());
        assert!(TaskSpec::new(TaskSource::BasketPairs, LossKind::Mf, 0, 0, 1.0).is_err());
        assert!(TaskSpec::new(TaskSource::BasketPairs, LossKind::Ranking, 0, 0, 0.0).is_err());
        assert!(Bb2vecWiring::new(-1.0).is_err());
        let plan = ModelPlan::bb2vec(LossKind::Ranking, 2.0).unwrap();
        let bindings: Vec<_> = plan
            .tasks
            .iter()
            .map(|t| (t.source, t.input_matrix, t.output_matrix, t.weight))
            .collect();
        assert_eq!(
            bindings,
            vec![
                (TaskSource::BasketPairs, 0, 0, 1.0),
                (TaskSource::SpmiCells, 0, 1, 2.0),
                (TaskSource::SpmiCells, 1, 0, 2.0),
            ]
        );
        assert_eq!(ModelPlan::bb2vec(LossKind::Ranking, 0.0).unwrap().tasks.len(), 1);
    }

    fn toy_corpus() -> Corpus {
        let train = baskets(&[&[0, 1, 2], &[1, 2], &[3, 4], &[0, 4, 5], &[2, 5]]);
        let sessions = baskets(&[&[0, 1, 2, 3], &[2, 3, 4], &[4, 5, 0], &[1, 5]]);
        Corpus::from_splits(
            6,
            SplitSets {
                train_baskets: train,
                val_baskets: baskets(&[&[0, 1], &[2, 5]]),
                test_baskets: Vec::new(),
                train_sessions: sessions,
            },
        )
        .unwrap()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            dim: 4,
            negatives: 3,
            epoch_size: Some(200),
            max_epochs: 3,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn one_step_touches_only_example_rows() {
        let corpus = toy_corpus();
        let plan = ModelPlan::prod2vec(LossKind::Classification).unwrap();
        let mut t = Trainer::new(&corpus, None, plan, small_config()).unwrap();
        for _ in 0..20 {
            let before = t.embeddings().clone();
            t.step().unwrap();
            let g = t.last_gradients().clone();
            for id in 0..6u32 {
                let id = ItemId(id);
                let in_changed = before.input(0).row(id) != t.embeddings().input(0).row(id);
                let out_changed = before.output(0).row(id) != t.embeddings().output(0).row(id);
                if in_changed {
                    assert!(g.input.get(id).is_some());
                }
                if out_changed {
                    assert!(g.output.get(id).is_some());
                }
            }
        }
    }

    #[test]
    fn serial_training_is_reproducible() {
        let corpus = toy_corpus();
        let stats = count_cooccurrences(corpus.train_sessions(), 6);
        let spmi = build_spmi(&stats, 3, 1).unwrap();
        let run = || {
            let plan = ModelPlan::bb2vec(LossKind::Ranking, 1.5).unwrap();
            train(&corpus, Some(&spmi), plan, small_config()).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.embeddings, b.embeddings);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn zero_lambda_leaves_browsing_matrices_untouched() {
        let corpus = toy_corpus();
        let plan = ModelPlan::bb2vec(LossKind::Ranking, 0.0).unwrap();
        let out = train(&corpus, None, plan, small_config()).unwrap();
        let init = EmbeddingSet::init(6, 4, &["B", "S"], 5).unwrap();
        assert_eq!(out.embeddings.input(1), init.input(1));
        assert_eq!(out.embeddings.output(1), init.output(1));
        assert_ne!(out.embeddings.input(0), init.input(0));
    }

    #[test]
    fn factorisation_tasks_need_a_matrix() {
        let corpus = toy_corpus();
        let plan = ModelPlan::bb2vec(LossKind::Ranking, 1.0).unwrap();
        assert!(Trainer::new(&corpus, None, plan, small_config()).is_err());
    }

    #[test]
    fn default_epoch_is_basket_pair_count() {
        let corpus = toy_corpus();
        let config = TrainConfig {
            epoch_size: None,
            ..small_config()
        };
        let plan = ModelPlan::prod2vec(LossKind::Ranking).unwrap();
        let t = Trainer::new(&corpus, None, plan, config).unwrap();
        assert_eq!(t.epoch_size(), 6 + 2 + 2 + 6 + 2);
    }

    #[test]
    fn history_tracks_validation_and_best_epoch() {
        let corpus = toy_corpus();
        let plan = ModelPlan::prod2vec(LossKind::Ranking).unwrap();
        let config = TrainConfig {
            max_epochs: 6,
            patience: 2,
            ..small_config()
        };
        let out = train(&corpus, None, plan, config).unwrap();
        assert!(!out.history.is_empty());
        let vals: Vec<f64> = out.history.iter().map(|h| h.val_hitrate.unwrap()).collect();
        let best = vals.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(vals[out.best_epoch - 1], best);
        let pairs = extract_pairs(corpus.val_baskets(), corpus.train_purchase_count());
        assert_eq!(validation_hitrate(&out.embeddings, &pairs), best);
        for h in &out.history {
            assert_eq!(h.task_steps.iter().sum::<u64>(), 200);
        }
    }

    #[test]
    fn hogwild_runs_and_counts_every_step() {
        let corpus = toy_corpus();
        let plan = ModelPlan::prod2vec(LossKind::Ranking).unwrap();
        let config = TrainConfig {
            hogwild_threads: 3,
            epoch_size: Some(301),
            ..small_config()
        };
        let mut t = Trainer::new(&corpus, None, plan, config).unwrap();
        let (steps, _) = t.run_epoch().unwrap();
        assert_eq!(steps, vec![301]);
        assert!(t.embeddings().is_finite());
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig { dim: 0, ..Default::default() },
            TrainConfig { negatives: 0, ..Default::default() },
            TrainConfig { base_lr: 0.0, ..Default::default() },
            TrainConfig { patience: 0, ..Default::default() },
            TrainConfig { epoch_size: Some(0), ..Default::default() },
            TrainConfig { neg_alpha: -0.5, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn history_file_layout() {
        let h = vec![EpochRecord {
            epoch: 1,
            task_steps: vec![10, 20],
            mean_loss: vec![0.5, 0.25],
            val_hitrate: Some(0.125),
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.tsv");
        write_history(&path, &h).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "epoch\tsteps_task0\tsteps_task1\tloss_task0\tloss_task1\tval_hitrate@10\n\
             1\t10\t20\t0.5\t0.25\t0.125\n"
        );
    }
}
