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

//! Top-N evaluation over held-out basket pairs: HitRate@K and NDCG@K, overall and bucketed
//! by the query item's train purchase count.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{write_file, BucketEdges, ItemId, ItemSet, Vocab};
use crate::error::Result;
use crate::model::{dot, EmbeddingMatrix};

/// Predict `target` given `query`; both come from the same held-out basket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalPair {
    pub query: ItemId,
    pub target: ItemId,
    pub query_train_purchases: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairOrder {
    /// `(k, m)` and `(m, k)` are separate cases.
    #[default]
    Ordered,
    /// One case per unordered pair, queried by the item listed first in the basket.
    Unordered,
}

/// All ordered pairs from baskets with at least two items.
pub fn extract_pairs(baskets: &[ItemSet], purchase_counts: &[u64]) -> Vec<EvalPair> {
    extract_pairs_with(baskets, purchase_counts, PairOrder::Ordered)
}

pub fn extract_pairs_with(
    baskets: &[ItemSet],
    purchase_counts: &[u64],
    order: PairOrder,
) -> Vec<EvalPair> {
    let mut out = Vec::new();
    for b in baskets {
        let items = b.items();
        for (a, &k) in items.iter().enumerate() {
            for (c, &m) in items.iter().enumerate() {
                let keep = match order {
                    PairOrder::Ordered => a != c,
                    PairOrder::Unordered => a < c,
                };
                if keep {
                    out.push(EvalPair {
                        query: k,
                        target: m,
                        query_train_purchases: purchase_counts[k.index()],
                    });
                }
            }
        }
    }
    out
}

/// 1-based position of `target` within the first `k` entries.
fn position(target: ItemId, list: &[ItemId], k: usize) -> Option<usize> {
    list.iter().take(k).position(|&x| x == target).map(|p| p + 1)
}

pub fn hitrate_at_k(target: ItemId, list: &[ItemId], k: usize) -> f64 {
    match position(target, list, k) {
        Some(_) => 1.0,
        None => 0.0,
    }
}

pub fn ndcg_at_k(target: ItemId, list: &[ItemId], k: usize) -> f64 {
    match position(target, list, k) {
        Some(pos) => 1.0 / ((pos + 1) as f64).log2(),
        None => 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scored {
    pub item: ItemId,
    pub score: f64,
}

/// Produces a ranked list for a query item. Implementations never return the query itself.
pub trait Recommender: Sync {
    fn recommend(&self, query: ItemId, n: usize) -> Vec<Scored>;

    fn recommend_items(&self, query: ItemId, n: usize) -> Vec<ItemId> {
        self.recommend(query, n).into_iter().map(|s| s.item).collect()
    }
}

/// Ranks candidates `m` by `v'_m . v_k` for query `k`; ties go to the smaller id.
pub struct EmbeddingRecommender<'a> {
    input: &'a EmbeddingMatrix,
    output: &'a EmbeddingMatrix,
}

impl<'a> EmbeddingRecommender<'a> {
    pub fn new(input: &'a EmbeddingMatrix, output: &'a EmbeddingMatrix) -> Self {
        EmbeddingRecommender { input, output }
    }
}

pub(crate) fn rank_desc(a: &Scored, b: &Scored) -> Ordering {
    b.score.total_cmp(&a.score).then(a.item.cmp(&b.item))
}

impl Recommender for EmbeddingRecommender<'_> {
    fn recommend(&self, query: ItemId, n: usize) -> Vec<Scored> {
        let q = self.input.row(query);
        let mut all: Vec<Scored> = (0..self.output.rows())
            .map(ItemId::from)
            .filter(|&m| m != query)
            .map(|m| Scored {
                item: m,
                score: dot(self.output.row(m), q),
            })
            .collect();
        if n == 0 {
            return Vec::new();
        }
        if n < all.len() {
            all.select_nth_unstable_by(n - 1, rank_desc);
            all.truncate(n);
        }
        all.sort_unstable_by(rank_desc);
        all
    }
}

/// Metric values for one bucket of query purchase counts.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketReport {
    pub lo: u64,
    pub hi: Option<u64>,
    pub pairs: usize,
    /// Indexed like [`EvalReport::ks`].
    pub hitrate: Vec<f64>,
    pub ndcg: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub pairs: usize,
    pub hitrate: Vec<f64>,
    pub ndcg: Vec<f64>,
    pub buckets: Vec<BucketReport>,
}

impl EvalReport {
    fn k_index(&self, k: usize) -> Option<usize> {
        self.ks.iter().position(|&x| x == k)
    }

    pub fn hitrate_at(&self, k: usize) -> Option<f64> {
        self.k_index(k).map(|i| self.hitrate[i])
    }

    pub fn ndcg_at(&self, k: usize) -> Option<f64> {
        self.k_index(k).map(|i| self.ndcg[i])
    }
}

/// Averages HitRate@K and NDCG@K over `pairs`. Lists are requested once per distinct query.
pub fn evaluate<R: Recommender + ?Sized>(
    recommender: &R,
    pairs: &[EvalPair],
    ks: &[usize],
    edges: &BucketEdges,
) -> EvalReport {
    let max_k = ks.iter().copied().max().unwrap_or(0);
    let mut queries: Vec<ItemId> = pairs.iter().map(|p| p.query).collect();
    queries.sort_unstable();
    queries.dedup();
    let lists: HashMap<ItemId, Vec<ItemId>> = queries
        .par_iter()
        .map(|&q| (q, recommender.recommend_items(q, max_k)))
        .collect();

    let nb = edges.num_buckets();
    let mut counts = vec![0usize; nb];
    let mut hit_sums = vec![vec![0.0; ks.len()]; nb];
    let mut ndcg_sums = vec![vec![0.0; ks.len()]; nb];
    for p in pairs {
        let b = edges.bucket_of(p.query_train_purchases);
        let list = &lists[&p.query];
        counts[b] += 1;
        for (i, &k) in ks.iter().enumerate() {
            hit_sums[b][i] += hitrate_at_k(p.target, list, k);
            ndcg_sums[b][i] += ndcg_at_k(p.target, list, k);
        }
    }

    let mean = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
    let buckets = (0..nb)
        .map(|b| {
            let (lo, hi) = edges.bounds(b);
            BucketReport {
                lo,
                hi,
                pairs: counts[b],
                hitrate: hit_sums[b].iter().map(|&s| mean(s, counts[b])).collect(),
                ndcg: ndcg_sums[b].iter().map(|&s| mean(s, counts[b])).collect(),
            }
        })
        .collect();
    let total = |sums: &[Vec<f64>], i: usize| sums.iter().map(|s| s[i]).sum::<f64>();
    EvalReport {
        ks: ks.to_vec(),
        pairs: pairs.len(),
        hitrate: (0..ks.len()).map(|i| mean(total(&hit_sums, i), pairs.len())).collect(),
        ndcg: (0..ks.len()).map(|i| mean(total(&ndcg_sums, i), pairs.len())).collect(),
        buckets,
    }
}

/// `method<TAB>metric<TAB>K<TAB>value` rows.
pub fn write_report(path: &Path, reports: &[(String, EvalReport)]) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "method\tmetric\tK\tvalue")?;
        for (method, r) in reports {
            for (i, k) in r.ks.iter().enumerate() {
                writeln!(w, "{method}\tHitRate\t{k}\t{}", r.hitrate[i])?;
            }
            for (i, k) in r.ks.iter().enumerate() {
                writeln!(w, "{method}\tNDCG\t{k}\t{}", r.ndcg[i])?;
            }
        }
        Ok(())
    })
}

/// HitRate@`k` per purchase-count bucket, one column per method. `bucket_hi` is `inf` for the
/// open-ended last bucket.
pub fn write_breakdown(path: &Path, reports: &[(String, EvalReport)], k: usize) -> Result<()> {
    write_file(path, |w| {
        write!(w, "bucket_lo\tbucket_hi\tpairs")?;
        for (method, _) in reports {
            write!(w, "\thitrate@{k}:{method}")?;
        }
        writeln!(w)?;
        let Some((_, first)) = reports.first() else {
            return Ok(());
        };
        for (b, bucket) in first.buckets.iter().enumerate() {
            let hi = bucket.hi.map_or("inf".to_string(), |h| h.to_string());
            write!(w, "{}\t{hi}\t{}", bucket.lo, bucket.pairs)?;
            for (_, r) in reports {
                let v = r
                    .k_index(k)
                    .map_or(f64::NAN, |i| r.buckets[b].hitrate[i]);
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// `query_token<TAB>rank<TAB>item_token<TAB>score`, ranks starting at 1.
pub fn write_recommendations(
    w: &mut impl Write,
    vocab: &Vocab,
    query: ItemId,
    list: &[Scored],
) -> std::io::Result<()> {
    for (rank, s) in list.iter().enumerate() {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            vocab.token(query),
            rank + 1,
            vocab.token(s.item),
            s.score
        )?;
    }
    Ok(())
}
