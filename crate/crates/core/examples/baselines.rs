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

//! Popularity and co-count baselines on held-out baskets, broken down by query popularity.

use bb2vec::baselines::{CoCountModel, PopularityModel};
use bb2vec::corpus::BucketEdges;
use bb2vec::evaluation::{evaluate, extract_pairs};
use bb2vec::synthgen::{generate, SynthSpec};

fn main() -> bb2vec::error::Result<()> {
    let data = generate(&SynthSpec {
        vocab_size: 100,
        n_baskets: 5_000,
        n_sessions: 0,
        seed: 9,
        ..Default::default()
    })?;
    let corpus = &data.corpus;
    let pairs = extract_pairs(corpus.test_baskets(), corpus.train_purchase_count());
    let edges = BucketEdges::new(vec![1, 10, 50, 100])?;
    let ks = [10, 50];

    let popularity = evaluate(&PopularityModel::from_corpus(corpus), &pairs, &ks, &edges);
    let cocount = evaluate(&CoCountModel::from_corpus(corpus), &pairs, &ks, &edges);
    for (name, r) in [("popularity", &popularity), ("cocount", &cocount)] {
        println!(
            "{name:>10}: HR@10 {:.4} HR@50 {:.4} NDCG@10 {:.4}",
            r.hitrate[0], r.hitrate[1], r.ndcg[0]
        );
        for b in &r.buckets {
            let hi = b.hi.map_or("inf".to_string(), |h| h.to_string());
            println!("{:>12} purchases [{}, {hi}): {} pairs, HR@10 {:.4}", "", b.lo, b.pairs, b.hitrate[0]);
        }
    }
    Ok(())
}
