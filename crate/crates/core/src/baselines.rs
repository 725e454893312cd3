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

//! Reference recommenders: global popularity and co-counting.

use crate::cooccurrence::{count_cooccurrences, CooccurrenceStats};
use crate::corpus::{Corpus, ItemId};
use crate::evaluation::{Recommender, Scored};

/// Items by train purchase count, descending; ties by ascending id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopularityModel {
    order: Vec<ItemId>,
    counts: Vec<u64>,
}

impl PopularityModel {
    pub fn new(purchase_counts: &[u64]) -> Self {
        let mut order: Vec<ItemId> = (0..purchase_counts.len()).map(ItemId::from).collect();
        order.sort_by(|a, b| {
            purchase_counts[b.index()]
                .cmp(&purchase_counts[a.index()])
                .then(a.cmp(b))
        });
        PopularityModel {
            order,
            counts: purchase_counts.to_vec(),
        }
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::new(corpus.train_purchase_count())
    }

    pub fn order(&self) -> &[ItemId] {
        &self.order
    }
}

/// The first `n` items of the popularity order.
pub fn popularity_topn(model: &PopularityModel, n: usize) -> Vec<ItemId> {
    model.order.iter().take(n).copied().collect()
}

impl Recommender for PopularityModel {
    fn recommend(&self, query: ItemId, n: usize) -> Vec<Scored> {
        self.order
            .iter()
            .filter(|&&i| i != query)
            .take(n)
            .map(|&item| Scored {
                item,
                score: self.counts[item.index()] as f64,
            })
            .collect()
    }
}

/// Per query item, co-purchased candidates by joint count, then purchase count, then id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoCountModel {
    lists: Vec<Vec<(ItemId, u64)>>,
}

impl CoCountModel {
    pub fn new(stats: &CooccurrenceStats, purchase_counts: &[u64]) -> Self {
        let mut lists = vec![Vec::new(); stats.vocab_size()];
        for (i, j, n) in stats.sorted_pairs() {
            lists[i.index()].push((j, n));
            lists[j.index()].push((i, n));
        }
        for list in &mut lists {
            list.sort_by(|a, b| {
                b.1.cmp(&a.1)
                    .then(purchase_counts[b.0.index()].cmp(&purchase_counts[a.0.index()]))
                    .then(a.0.cmp(&b.0))
            });
        }
        CoCountModel { lists }
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        let stats = count_cooccurrences(corpus.train_baskets(), corpus.vocab_size());
        Self::new(&stats, corpus.train_purchase_count())
    }
}

/// Up to `n` co-purchased items; empty for items never co-purchased. Lists are not padded.
pub fn cocount_topn(model: &CoCountModel, query: ItemId, n: usize) -> Vec<ItemId> {
    model
        .lists
        .get(query.index())
        .map(|l| l.iter().take(n).map(|&(i, _)| i).collect())
        .unwrap_or_default()
}

impl Recommender for CoCountModel {
    fn recommend(&self, query: ItemId, n: usize) -> Vec<Scored> {
        self.lists
            .get(query.index())
            .map(|l| {
                l.iter()
                    .take(n)
                    .map(|&(item, c)| Scored {
                        item,
                        score: c as f64,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }
}
