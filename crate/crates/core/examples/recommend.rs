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

//! Trains a small model, round-trips it through a checkpoint and prints recommendations.

use bb2vec::evaluation::{write_recommendations, EmbeddingRecommender, Recommender};
use bb2vec::model::EmbeddingSet;
use bb2vec::synthgen::{generate, SynthSpec};
use bb2vec::trainer::{train, LossKind, ModelPlan, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&SynthSpec {
        vocab_size: 30,
        n_baskets: 10_000,
        n_sessions: 0,
        seed: 6,
        ..Default::default()
    })?;
    let config = TrainConfig {
        dim: 16,
        max_epochs: 10,
        seed: 6,
        ..Default::default()
    };
    let out = train(&data.corpus, None, ModelPlan::prod2vec(LossKind::Ranking)?, config)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.bin");
    out.embeddings.save(&path, true)?;
    let set = EmbeddingSet::load(&path)?;
    assert_eq!(set, out.embeddings);

    let rec = EmbeddingRecommender::new(set.input(0), set.output(0));
    let query = data.vocab.id("item_0").expect("numbered vocabulary");
    println!("planted complements: {:?}", data.graph.complements(query));
    let stdout = std::io::stdout();
    write_recommendations(&mut stdout.lock(), &data.vocab, query, &rec.recommend(query, 5))?;
    Ok(())
}
