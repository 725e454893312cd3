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

//! BB2vec on a log where some items are only ever browsed.
//!
//! Sweeps the browsing weight and prints test HitRate both overall and for queries that never
//! appear in a training basket.

use bb2vec::cooccurrence::{build_spmi, count_cooccurrences, MIN_PAIR_COUNT_SMALL};
use bb2vec::corpus::BucketEdges;
use bb2vec::evaluation::{evaluate, extract_pairs, EmbeddingRecommender};
use bb2vec::synthgen::{generate, SynthSpec};
use bb2vec::trainer::{train, Bb2vecWiring, LossKind, TrainConfig};

fn main() -> bb2vec::error::Result<()> {
    let data = generate(&SynthSpec {
        vocab_size: 80,
        n_baskets: 20_000,
        n_sessions: 20_000,
        zero_purchase_fraction: 0.2,
        seed: 4,
        ..Default::default()
    })?;
    let corpus = &data.corpus;
    let stats = count_cooccurrences(corpus.train_sessions(), corpus.vocab_size());
    let spmi = build_spmi(&stats, 20, MIN_PAIR_COUNT_SMALL)?;
    let pairs = extract_pairs(corpus.test_baskets(), corpus.train_purchase_count());
    let edges = BucketEdges::default();
    println!("{} SPMI cells, {} test pairs", spmi.len(), pairs.len());

    for lambda in [0.0, 0.5, 2.0] {
        let plan = Bb2vecWiring::new(lambda)?.plan(LossKind::Ranking)?;
        let config = TrainConfig {
            dim: 24,
            max_epochs: 15,
            seed: 4,
            ..Default::default()
        };
        let out = train(corpus, Some(&spmi), plan, config)?;
        let set = &out.embeddings;
        let rec = EmbeddingRecommender::new(set.input(0), set.output(0));
        let report = evaluate(&rec, &pairs, &[10], &edges);
        // The first bucket holds queries with zero training purchases.
        let cold = &report.buckets[0];
        println!(
            "lambda {lambda:>3}: HitRate@10 {:.4}  cold queries {:.4} over {} pairs",
            report.hitrate[0], cold.hitrate[0], cold.pairs
        );
    }
    Ok(())
}
