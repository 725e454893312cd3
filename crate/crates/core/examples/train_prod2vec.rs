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

//! Trains prod2vec with both basket losses on synthetic data and reports test HitRate.

use bb2vec::corpus::BucketEdges;
use bb2vec::evaluation::{evaluate, extract_pairs, EmbeddingRecommender};
use bb2vec::synthgen::{generate, SynthSpec};
use bb2vec::trainer::{train, LossKind, ModelPlan, TrainConfig};

fn main() -> bb2vec::error::Result<()> {
    let data = generate(&SynthSpec {
        vocab_size: 60,
        n_baskets: 20_000,
        n_sessions: 0,
        seed: 2,
        ..Default::default()
    })?;
    let corpus = &data.corpus;
    let pairs = extract_pairs(corpus.test_baskets(), corpus.train_purchase_count());
    let config = TrainConfig {
        dim: 24,
        max_epochs: 15,
        seed: 2,
        ..Default::default()
    };

    for loss in [LossKind::Classification, LossKind::Ranking] {
        let out = train(corpus, None, ModelPlan::prod2vec(loss)?, config.clone())?;
        let set = &out.embeddings;
        let rec = EmbeddingRecommender::new(set.input(0), set.output(0));
        let report = evaluate(&rec, &pairs, &[10], &BucketEdges::default());
        println!(
            "{loss:?}: best epoch {} of {}, test HitRate@10 {:.4}",
            out.best_epoch,
            out.history.len(),
            report.hitrate[0]
        );
    }
    Ok(())
}
