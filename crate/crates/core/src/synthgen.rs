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

//! Synthetic corpora with planted complements and exactly known conditionals.
//!
//! Every generation unit is one browsing session plus, optionally, the basket bought in it.
//! A basket draws a seed item uniformly and adds companions sampled without replacement from
//! the seed's complement distribution. A session does the same except that each companion
//! slot follows the complement distribution only with probability `rho` and is otherwise a
//! uniformly random unseen item. Items flagged zero-purchase are kept out of training baskets,
//! so their only training signal comes from sessions.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{
    assign_splits, write_file, Corpus, ItemId, ItemSet, Split, SplitFractions, SplitSets, Vocab,
};
use crate::error::{Error, Result};

/// Distribution of the number of items in a generated set.
#[derive(Clone, Debug, PartialEq)]
pub enum SizeDistribution {
    Fixed(usize),
    Uniform { min: usize, max: usize },
    /// `P(s) ∝ (1 - p)^(s - min)` on `[min, max]`.
    TruncatedGeometric { min: usize, max: usize, p: f64 },
}

impl Default for SizeDistribution {
    fn default() -> Self {
        SizeDistribution::TruncatedGeometric {
            min: 2,
            max: 6,
            p: 0.5,
        }
    }
}

impl SizeDistribution {
    /// `(size, probability)` for every size with non-zero mass.
    pub fn probabilities(&self) -> Result<Vec<(usize, f64)>> {
        let out = match *self {
            SizeDistribution::Fixed(s) => vec![(s, 1.0)],
            SizeDistribution::Uniform { min, max } => {
                if min > max {
                    return Err(Error::config("size distribution has min > max"));
                }
                let n = (max - min + 1) as f64;
                (min..=max).map(|s| (s, 1.0 / n)).collect()
            }
            SizeDistribution::TruncatedGeometric { min, max, p } => {
                if min > max || !(p > 0.0 && p <= 1.0) {
                    return Err(Error::config("geometric size needs min <= max and p in (0, 1]"));
                }
                let w: Vec<f64> = (min..=max).map(|s| (1.0 - p).powi((s - min) as i32)).collect();
                let total: f64 = w.iter().sum();
                (min..=max).zip(w).map(|(s, w)| (s, w / total)).collect()
            }
        };
        if out.iter().any(|&(s, _)| s == 0) {
            return Err(Error::config("set sizes must be at least 1"));
        }
        Ok(out)
    }

    fn sampler(&self) -> Result<SizeSampler> {
        let probs = self.probabilities()?;
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|&(s, p)| {
                acc += p;
                (s, acc)
            })
            .collect();
        Ok(SizeSampler { cumulative })
    }
}

struct SizeSampler {
    cumulative: Vec<(usize, f64)>,
}

impl SizeSampler {
    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cumulative.last().unwrap().1;
        let i = self.cumulative.partition_point(|&(_, c)| c <= u);
        self.cumulative[i.min(self.cumulative.len() - 1)].0
    }
}

/// Per item, a normalised weighted list of complements.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplementGraph {
    lists: Vec<Vec<(ItemId, f64)>>,
}

impl ComplementGraph {
    /// Normalises each list. Lists must be non-empty, positive, free of self loops and repeats.
    pub fn new(lists: Vec<Vec<(ItemId, f64)>>) -> Result<Self> {
        let n = lists.len();
        let mut out = Vec::with_capacity(n);
        for (k, list) in lists.into_iter().enumerate() {
            if list.is_empty() {
                return Err(Error::config(format!("item {k} has no complements")));
            }
            let mut seen = std::collections::HashSet::new();
            for &(m, w) in &list {
                if m.index() >= n || m.index() == k || !seen.insert(m) {
                    return Err(Error::config(format!("bad complement {m} for item {k}")));
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::config(format!("complement weight {w} must be positive")));
                }
            }
            let total: f64 = list.iter().map(|&(_, w)| w).sum();
            out.push(list.into_iter().map(|(m, w)| (m, w / total)).collect());
        }
        Ok(ComplementGraph { lists: out })
    }

    /// Each item gets a degree uniform in `[min_degree, max_degree]`. Targets are picked among
    /// the items with the smallest in-degree so far, which keeps item popularity flat; weights
    /// decay geometrically with rank.
    pub fn random<R: Rng>(
        vocab_size: usize,
        min_degree: usize,
        max_degree: usize,
        decay: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if min_degree == 0 || min_degree > max_degree || max_degree >= vocab_size {
            return Err(Error::config(format!(
                "complement degrees [{min_degree}, {max_degree}] infeasible for {vocab_size} items"
            )));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::config("complement weight decay must be in (0, 1]"));
        }
        let mut in_degree = vec![0usize; vocab_size];
        let mut lists = Vec::with_capacity(vocab_size);
        let mut order: Vec<usize> = (0..vocab_size).collect();
        for k in 0..vocab_size {
            let degree = rng.random_range(min_degree..=max_degree);
            order.shuffle(rng);
            order.sort_by_key(|&m| in_degree[m]);
            let targets: Vec<usize> = order.iter().copied().filter(|&m| m != k).take(degree).collect();
            let mut list = Vec::with_capacity(degree);
            let mut w = 1.0;
            for m in targets {
                in_degree[m] += 1;
                list.push((ItemId::from(m), w));
                w *= decay;
            }
            lists.push(list);
        }
        ComplementGraph::new(lists)
    }

    pub fn vocab_size(&self) -> usize {
        self.lists.len()
    }

    pub fn complements(&self, item: ItemId) -> &[(ItemId, f64)] {
        &self.lists[item.index()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComplementSpec {
    Random {
        min_degree: usize,
        max_degree: usize,
        decay: f64,
    },
    Explicit(ComplementGraph),
}

impl Default for ComplementSpec {
    fn default() -> Self {
        ComplementSpec::Random {
            min_degree: 3,
            max_degree: 5,
            decay: 0.6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub vocab_size: usize,
    pub n_baskets: usize,
    pub n_sessions: usize,
    pub basket_size: SizeDistribution,
    /// `None` uses the basket size distribution.
    pub session_size: Option<SizeDistribution>,
    pub complements: ComplementSpec,
    /// Probability that a session companion follows the complement distribution.
    pub rho: f64,
    /// Share of items kept out of training baskets.
    pub zero_purchase_fraction: f64,
    pub split_fractions: SplitFractions,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            vocab_size: 20,
            n_baskets: 10_000,
            n_sessions: 10_000,
            basket_size: SizeDistribution::default(),
            session_size: None,
            complements: ComplementSpec::default(),
            rho: 0.8,
            zero_purchase_fraction: 0.0,
            split_fractions: SplitFractions::default(),
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::config("synthetic vocabulary needs at least 2 items"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.zero_purchase_fraction) {
            return Err(Error::config("zero_purchase_fraction must be in [0, 1]"));
        }
        if self.n_baskets > 0 && self.zero_purchase_count() >= self.vocab_size {
            return Err(Error::config(
                "baskets requested but every item is zero-purchase",
            ));
        }
        self.split_fractions.validate()?;
        self.basket_size.probabilities()?;
        if let Some(s) = &self.session_size {
            s.probabilities()?;
        }
        if let ComplementSpec::Explicit(g) = &self.complements {
            if g.vocab_size() != self.vocab_size {
                return Err(Error::config("complement graph size differs from vocab_size"));
            }
        }
        Ok(())
    }

    pub fn zero_purchase_count(&self) -> usize {
        (self.zero_purchase_fraction * self.vocab_size as f64).round() as usize
    }
}

/// Exact expectations of the basket process (without the zero-purchase restriction).
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    /// Per query `k`: `(m, E[#baskets containing k and m])`, sorted by `m`.
    pair_expect: Vec<Vec<(ItemId, f64)>>,
    /// `E[#baskets containing k]`.
    item_expect: Vec<f64>,
}

impl GroundTruth {
    /// Exact expectations per generated basket, enumerating every companion sequence.
    pub fn compute(graph: &ComplementGraph, sizes: &SizeDistribution) -> Result<Self> {
        let n = graph.vocab_size();
        let sizes = sizes.probabilities()?;
        let mut pairs: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
        let mut items = vec![0.0; n];
        let seed_p = 1.0 / n as f64;
        for k in 0..n {
            let comps = graph.complements(ItemId::from(k));
            // Stopping mass by number of companions drawn.
            let mut stop = vec![0.0; comps.len() + 1];
            for &(s, p) in &sizes {
                stop[(s - 1).min(comps.len())] += p;
            }
            let mut chosen = vec![ItemId::from(k)];
            let mut used = vec![false; comps.len()];
            enumerate_companions(
                comps,
                &stop,
                seed_p,
                1.0,
                &mut chosen,
                &mut used,
                &mut pairs,
                &mut items,
            );
        }
        let pair_expect = pairs
            .into_iter()
            .map(|row| {
                let mut v: Vec<(ItemId, f64)> = row.into_iter().map(|(m, e)| (ItemId(m), e)).collect();
                v.sort_by_key(|&(m, _)| m);
                v
            })
            .collect();
        Ok(GroundTruth {
            pair_expect,
            item_expect: items,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.item_expect.len()
    }

    /// Expected co-occurrence count of `k` and `m` per basket.
    pub fn pair_expectation(&self, k: ItemId, m: ItemId) -> f64 {
        let row = &self.pair_expect[k.index()];
        row.binary_search_by_key(&m, |&(i, _)| i).map_or(0.0, |p| row[p].1)
    }

    pub fn item_expectation(&self, k: ItemId) -> f64 {
        self.item_expect[k.index()]
    }

    /// Probability that a uniformly drawn ordered pair with first item `k` has second item `m`.
    /// Rows sum to 1.
    pub fn conditional(&self, k: ItemId, m: ItemId) -> f64 {
        let total: f64 = self.pair_expect[k.index()].iter().map(|&(_, e)| e).sum();
        if total == 0.0 {
            0.0
        } else {
            self.pair_expectation(k, m) / total
        }
    }

    /// Probability that a basket containing `k` also contains `m`.
    pub fn cooccurrence_conditional(&self, k: ItemId, m: ItemId) -> f64 {
        let e = self.item_expect[k.index()];
        if e == 0.0 {
            0.0
        } else {
            self.pair_expectation(k, m) / e
        }
    }

    /// Items with non-zero conditional probability given `k`, with that probability.
    pub fn row(&self, k: ItemId) -> Vec<(ItemId, f64)> {
        self.pair_expect[k.index()]
            .iter()
            .map(|&(m, _)| (m, self.conditional(k, m)))
            .collect()
    }

    /// `query_token`, `item_token`, pair conditional, co-occurrence conditional.
    pub fn write_tsv(&self, path: &Path, vocab: &Vocab) -> Result<()> {
        write_file(path, |w| {
            writeln!(w, "query\titem\tp_pair\tp_cooccur")?;
            for k in 0..self.vocab_size() {
                let k = ItemId::from(k);
                for (m, p) in self.row(k) {
                    writeln!(
                        w,
                        "{}\t{}\t{}\t{}",
                        vocab.token(k),
                        vocab.token(m),
                        p,
                        self.cooccurrence_conditional(k, m)
                    )?;
                }
            }
            Ok(())
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_companions(
    comps: &[(ItemId, f64)],
    stop: &[f64],
    seed_p: f64,
    prob: f64,
    chosen: &mut Vec<ItemId>,
    used: &mut [bool],
    pairs: &mut [HashMap<u32, f64>],
    items: &mut [f64],
) {
    let depth = chosen.len() - 1;
    let mass = seed_p * prob * stop[depth];
    if mass > 0.0 {
        for (x, &a) in chosen.iter().enumerate() {
            items[a.index()] += mass;
            for &b in &chosen[x + 1..] {
                *pairs[a.index()].entry(b.0).or_default() += mass;
                *pairs[b.index()].entry(a.0).or_default() += mass;
            }
        }
    }
    if depth == comps.len() || stop[depth + 1..].iter().all(|&s| s == 0.0) {
        return;
    }
    let remaining: f64 = comps
        .iter()
        .zip(used.iter())
        .filter(|(_, &u)| !u)
        .map(|(&(_, w), _)| w)
        .sum();
    for c in 0..comps.len() {
        if used[c] {
            continue;
        }
        used[c] = true;
        chosen.push(comps[c].0);
        let p = prob * comps[c].1 / remaining;
        enumerate_companions(comps, stop, seed_p, p, chosen, used, pairs, items);
        chosen.pop();
        used[c] = false;
    }
}

/// One generated shopping session: what was viewed and, optionally, what was bought.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthUnit {
    pub split: Split,
    pub views: Option<Vec<ItemId>>,
    pub purchases: Option<Vec<ItemId>>,
}

pub struct SynthOutput {
    /// Item ids are `0..vocab_size` and the vocabulary is `item_0`, `item_1`, ...
    pub corpus: Corpus,
    pub vocab: Vocab,
    pub ground_truth: GroundTruth,
    pub graph: ComplementGraph,
    pub zero_purchase: Vec<bool>,
    pub units: Vec<SynthUnit>,
}

impl SynthOutput {
    /// Writes the events file: `view|purchase`, session id `s<unit>`, item token.
    pub fn write_events(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            for (u, unit) in self.units.iter().enumerate() {
                for (kind, items) in [("view", &unit.views), ("purchase", &unit.purchases)] {
                    for &i in items.iter().flatten() {
                        writeln!(w, "{kind}\ts{u}\t{}", self.vocab.token(i))?;
                    }
                }
            }
            Ok(())
        })
    }

    pub fn is_zero_purchase(&self, item: ItemId) -> bool {
        self.zero_purchase[item.index()]
    }
}

/// Weighted draw without replacement from the entries of `comps` not yet used and allowed.
fn draw_complement<R: Rng>(
    comps: &[(ItemId, f64)],
    taken: &[ItemId],
    allowed: &[bool],
    rng: &mut R,
) -> Option<ItemId> {
    let free = |m: ItemId| allowed[m.index()] && !taken.contains(&m);
    let total: f64 = comps.iter().filter(|(m, _)| free(*m)).map(|(_, w)| w).sum();
    if total <= 0.0 {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for &(m, w) in comps.iter().filter(|(m, _)| free(*m)) {
        if u < w {
            return Some(m);
        }
        u -= w;
        last = Some(m);
    }
    last
}

fn draw_uniform<R: Rng>(vocab: usize, taken: &[ItemId], rng: &mut R) -> Option<ItemId> {
    if taken.len() >= vocab {
        return None;
    }
    loop {
        let m = ItemId::from(rng.random_range(0..vocab));
        if !taken.contains(&m) {
            return Some(m);
        }
    }
}

fn draw_basket<R: Rng>(
    graph: &ComplementGraph,
    size: usize,
    seeds: &[ItemId],
    allowed: &[bool],
    rng: &mut R,
) -> Vec<ItemId> {
    let seed = seeds[rng.random_range(0..seeds.len())];
    let mut items = vec![seed];
    while items.len() < size {
        match draw_complement(graph.complements(seed), &items, allowed, rng) {
            Some(m) => items.push(m),
            None => break,
        }
    }
    items
}

fn draw_session<R: Rng>(graph: &ComplementGraph, size: usize, rho: f64, all: &[bool], rng: &mut R) -> Vec<ItemId> {
    let vocab = graph.vocab_size();
    let seed = ItemId::from(rng.random_range(0..vocab));
    let mut items = vec![seed];
    while items.len() < size.min(vocab) {
        let follow = rng.random::<f64>() < rho;
        let next = if follow {
            draw_complement(graph.complements(seed), &items, all, rng)
                .or_else(|| draw_uniform(vocab, &items, rng))
        } else {
            draw_uniform(vocab, &items, rng)
        };
        match next {
            Some(m) => items.push(m),
            None => break,
        }
    }
    items
}

/// Generates a corpus, its exact basket conditionals and the planted structure.
///
/// Unit `u` holds session `u` (when `u < n_sessions`) and basket `u` (when `u < n_baskets`);
/// both land in the same split. Every unit draws from its own random stream, so generation is
/// parallel and reproducible.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let vocab_size = spec.vocab_size;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let graph = match &spec.complements {
        ComplementSpec::Explicit(g) => g.clone(),
        ComplementSpec::Random {
            min_degree,
            max_degree,
            decay,
        } => ComplementGraph::random(vocab_size, *min_degree, *max_degree, *decay, &mut rng)?,
    };

    let mut order: Vec<usize> = (0..vocab_size).collect();
    order.shuffle(&mut rng);
    let mut zero_purchase = vec![false; vocab_size];
    for &i in &order[..spec.zero_purchase_count()] {
        zero_purchase[i] = true;
    }
    let purchasable: Vec<bool> = zero_purchase.iter().map(|z| !z).collect();
    let all = vec![true; vocab_size];
    let all_seeds: Vec<ItemId> = (0..vocab_size).map(ItemId::from).collect();
    let train_seeds: Vec<ItemId> = all_seeds
        .iter()
        .copied()
        .filter(|i| purchasable[i.index()])
        .collect();

    let n_units = spec.n_baskets.max(spec.n_sessions);
    let splits = assign_splits(n_units, &spec.split_fractions, &mut rng);
    let basket_sizes = spec.basket_size.sampler()?;
    let session_sizes = spec
        .session_size
        .as_ref()
        .unwrap_or(&spec.basket_size)
        .sampler()?;

    let units: Vec<SynthUnit> = (0..n_units)
        .into_par_iter()
        .map(|u| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(u as u64 + 1);
            let split = splits[u];
            let views = (u < spec.n_sessions).then(|| {
                let size = session_sizes.sample(&mut rng);
                draw_session(&graph, size, spec.rho, &all, &mut rng)
            });
            let purchases = (u < spec.n_baskets).then(|| {
                let size = basket_sizes.sample(&mut rng);
                if split == Split::Train {
                    draw_basket(&graph, size, &train_seeds, &purchasable, &mut rng)
                } else {
                    draw_basket(&graph, size, &all_seeds, &all, &mut rng)
                }
            });
            SynthUnit {
                split,
                views,
                purchases,
            }
        })
        .collect();

    let mut sets = SplitSets::default();
    for (u, unit) in units.iter().enumerate() {
        let name = format!("s{u}");
        if let Some(b) = unit.purchases.as_ref().and_then(|p| ItemSet::basket(p.iter().copied())) {
            let b = b.with_source_session(name.clone());
            match unit.split {
                Split::Train => sets.train_baskets.push(b),
                Split::Val => sets.val_baskets.push(b),
                Split::Test => sets.test_baskets.push(b),
            }
        }
        if unit.split == Split::Train {
            if let Some(s) = unit.views.as_ref().and_then(|v| ItemSet::session(v.iter().copied())) {
                sets.train_sessions.push(s.with_source_session(name));
            }
        }
    }

    let ground_truth = GroundTruth::compute(&graph, &spec.basket_size)?;
    Ok(SynthOutput {
        corpus: Corpus::from_splits(vocab_size, sets)?,
        vocab: Vocab::numbered(vocab_size),
        ground_truth,
        graph,
        zero_purchase,
        units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccurrence::{build_spmi, conditional_prob, count_cooccurrences};

    fn all_train() -> SplitFractions {
        SplitFractions::new(1.0, 0.0, 0.0).unwrap()
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn size_distributions() {
        let g = SizeDistribution::default().probabilities().unwrap();
        assert_eq!(g.iter().map(|p| p.0).collect::<Vec<_>>(), vec![2, 3, 4, 5, 6]);
        assert!((g.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((g[0].1 / g[1].1 - 2.0).abs() < 1e-12);
        assert!(SizeDistribution::Uniform { min: 3, max: 2 }.probabilities().is_err());
        assert!(SizeDistribution::Fixed(0).probabilities().is_err());
    }

    #[test]
    fn random_graph_is_normalised_and_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = ComplementGraph::random(50, 3, 5, 0.6, &mut rng).unwrap();
        let mut in_degree = vec![0; 50];
        for k in 0..50 {
            let c = g.complements(ItemId(k));
            assert!((3..=5).contains(&c.len()));
            assert!((c.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(c.iter().all(|x| x.0 != ItemId(k)));
            for x in c {
                in_degree[x.0.index()] += 1;
            }
        }
        let (lo, hi) = (in_degree.iter().min().unwrap(), in_degree.iter().max().unwrap());
        assert!(hi - lo <= 2, "{in_degree:?}");
        assert!(ComplementGraph::random(5, 3, 5, 0.6, &mut rng).is_err());
    }

    #[test]
    fn ground_truth_rows_sum_to_one() {
        let out = generate(&SynthSpec {
            n_baskets: 10,
            n_sessions: 10,
            ..Default::default()
        })
        .unwrap();
        for k in 0..20 {
            let row = out.ground_truth.row(ItemId(k));
            assert!((row.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let total: f64 = (0..20).map(|k| out.ground_truth.item_expectation(ItemId(k))).sum();
        let mean_size: f64 = SizeDistribution::default()
            .probabilities()
            .unwrap()
            .iter()
            .map(|&(s, p)| s as f64 * p)
            .sum();
        // Seeds with fewer complements than companion slots give shorter baskets.
        assert!(total <= mean_size + 1e-12 && total > 2.0);
    }

    #[test]
    fn ground_truth_hand_case() {
        // Item 0 -> {1: 3/4, 2: 1/4}; items 1 and 2 point back to 0 only. Size fixed at 2.
        let g = ComplementGraph::new(vec![
            vec![(ItemId(1), 3.0), (ItemId(2), 1.0)],
            vec![(ItemId(0), 1.0)],
            vec![(ItemId(0), 1.0)],
        ])
        .unwrap();
        let t = GroundTruth::compute(&g, &SizeDistribution::Fixed(2)).unwrap();
        let third = 1.0 / 3.0;
        assert!((t.pair_expectation(ItemId(0), ItemId(1)) - third * (0.75 + 1.0)).abs() < 1e-12);
        assert!((t.pair_expectation(ItemId(0), ItemId(2)) - third * (0.25 + 1.0)).abs() < 1e-12);
        assert!((t.conditional(ItemId(0), ItemId(1)) - 1.75 / 3.0).abs() < 1e-12);
        assert_eq!(t.conditional(ItemId(1), ItemId(0)), 1.0);
        assert_eq!(t.pair_expectation(ItemId(1), ItemId(2)), 0.0);
        assert!((t.cooccurrence_conditional(ItemId(1), ItemId(0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let spec = SynthSpec {
            n_baskets: 500,
            n_sessions: 700,
            zero_purchase_fraction: 0.2,
            ..Default::default()
        };
        let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.units, b.units);
        assert_eq!(a.graph, b.graph);
        let c = generate(&SynthSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(a.units, c.units);
    }

    #[test]
    fn zero_purchase_items_stay_out_of_training_baskets() {
        let out = generate(&SynthSpec {
            n_baskets: 5000,
            n_sessions: 5000,
            zero_purchase_fraction: 0.25,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(out.zero_purchase.iter().filter(|z| **z).count(), 5);
        for b in out.corpus.train_baskets() {
            assert!(b.items().iter().all(|&i| !out.is_zero_purchase(i)));
        }
        for i in 0..20 {
            let i = ItemId(i);
            if out.is_zero_purchase(i) {
                assert_eq!(out.corpus.purchases(i), 0);
                assert!(out.corpus.train_view_count()[i.index()] > 0);
            }
        }
        let held_out_zero = out
            .corpus
            .test_baskets()
            .iter()
            .flat_map(|b| b.items())
            .any(|&i| out.is_zero_purchase(i));
        assert!(held_out_zero);
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let bad = [
            SynthSpec { zero_purchase_fraction: 1.0, ..Default::default() },
            SynthSpec { rho: 1.5, ..Default::default() },
            SynthSpec { vocab_size: 1, ..Default::default() },
        ];
        for s in bad {
            assert!(generate(&s).is_err());
        }
        assert!(generate(&SynthSpec {
            zero_purchase_fraction: 1.0,
            n_baskets: 0,
            ..Default::default()
        })
        .is_ok());
    }

    #[test]
    fn empirical_conditionals_match_ground_truth() {
        let out = generate(&SynthSpec {
            n_baskets: 1_000_000,
            n_sessions: 0,
            split_fractions: all_train(),
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        let baskets = out.corpus.train_baskets();
        let stats = count_cooccurrences(baskets, 20);
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let k = ItemId(k);
            let row_total: u64 = (0..20).map(|m| stats.pair_count(k, ItemId(m))).sum();
            for m in 0..20 {
                let m = ItemId(m);
                if m == k {
                    continue;
                }
                let emp = stats.pair_count(k, m) as f64 / row_total as f64;
                worst = worst.max((emp - out.ground_truth.conditional(k, m)).abs());
                let co = conditional_prob(&stats, k, m).unwrap();
                worst = worst.max((co - out.ground_truth.cooccurrence_conditional(k, m)).abs());
            }
        }
        assert!(worst < 0.01, "worst deviation {worst}");
    }

    #[test]
    fn faithful_sessions_mirror_baskets() {
        let out = generate(&SynthSpec {
            n_baskets: 100_000,
            n_sessions: 100_000,
            rho: 1.0,
            split_fractions: all_train(),
            seed: 4,
            ..Default::default()
        })
        .unwrap();
        let c = &out.corpus;
        let basket = build_spmi(&count_cooccurrences(c.train_baskets(), 20), 1, 10).unwrap();
        let session = build_spmi(&count_cooccurrences(c.train_sessions(), 20), 1, 10).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for cell in basket.cells() {
            if let Some(v) = session.get(cell.i, cell.j) {
                a.push(cell.value);
                b.push(v);
            }
        }
        assert!(a.len() > 40);
        let r = pearson(&a, &b);
        assert!(r > 0.95, "correlation {r}");
    }

    #[test]
    fn events_file_round_trips_through_ingest() {
        let out = generate(&SynthSpec {
            n_baskets: 200,
            n_sessions: 300,
            ..Default::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.tsv");
        out.write_events(&path).unwrap();
        let (corpus, vocab) =
            crate::corpus::ingest(&path, &crate::corpus::IngestConfig::default()).unwrap();
        let total = |c: &Corpus| {
            c.train_baskets().len() + c.val_baskets().len() + c.test_baskets().len()
        };
        assert_eq!(total(&corpus), 200);
        assert!(vocab.len() <= 20);

        let gt = dir.path().join("ground_truth.tsv");
        out.ground_truth.write_tsv(&gt, &out.vocab).unwrap();
        let text = std::fs::read_to_string(&gt).unwrap();
        assert!(text.starts_with("query\titem\tp_pair\tp_cooccur\nitem_0\t"));
    }
}
