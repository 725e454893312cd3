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

//! Generates synthetic baskets and checks empirical conditionals against the exact ones.

use bb2vec::cooccurrence::{conditional_prob, count_cooccurrences};
use bb2vec::corpus::ItemId;
use bb2vec::synthgen::{generate, SynthSpec};

fn main() -> bb2vec::error::Result<()> {
    let spec = SynthSpec {
        vocab_size: 12,
        n_baskets: 50_000,
        n_sessions: 1_000,
        seed: 3,
        ..Default::default()
    };
    let out = generate(&spec)?;
    let baskets = out.corpus.train_baskets();
    let stats = count_cooccurrences(baskets, spec.vocab_size);
    println!("{} train baskets", baskets.len());

    let k = ItemId(0);
    println!("complements of item 0: {:?}", out.graph.complements(k));
    println!("m\texact P(m in B | k in B)\tempirical");
    for (m, _) in out.ground_truth.row(k) {
        let exact = out.ground_truth.cooccurrence_conditional(k, m);
        let seen = conditional_prob(&stats, k, m)?;
        println!("{}\t{exact:.4}\t\t\t{seen:.4}", m.0);
    }
    Ok(())
}
