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

//! Turns a small event log into a corpus and prints what ended up in each split.

use std::io::Cursor;
use std::path::Path;

use bb2vec::corpus::{ingest_reader, IngestConfig, SplitFractions};

const EVENTS: &str = "\
view\ts1\tkettle
view\ts1\tteapot
purchase\ts1\tkettle
purchase\ts1\tfilter
view\ts2\tmug
view\ts2\tteapot
purchase\ts2\tteapot
purchase\ts2\tmug
purchase\ts2\tmug
view\ts3\tkettle
view\ts3\tdescaler
view\ts4\tfilter
purchase\ts4\tfilter
purchase\ts4\tkettle
";

fn main() -> bb2vec::error::Result<()> {
    let config = IngestConfig {
        split_fractions: SplitFractions::new(0.5, 0.25, 0.25)?,
        split_seed: 1,
        ..Default::default()
    };
    let (corpus, vocab) = ingest_reader(Cursor::new(EVENTS), Path::new("<inline>"), &config)?;

    println!("vocabulary: {:?}", vocab.tokens());
    for (name, sets) in [
        ("train baskets", corpus.train_baskets()),
        ("val baskets", corpus.val_baskets()),
        ("test baskets", corpus.test_baskets()),
        ("train sessions", corpus.train_sessions()),
    ] {
        let shown: Vec<Vec<&str>> = sets
            .iter()
            .map(|s| s.items().iter().map(|&i| vocab.token(i)).collect())
            .collect();
        println!("{name:>15}: {shown:?}");
    }
    for (i, tok) in vocab.tokens().iter().enumerate() {
        println!(
            "{tok:>9}  bought {} / viewed {}",
            corpus.train_purchase_count()[i],
            corpus.train_view_count()[i]
        );
    }
    Ok(())
}
