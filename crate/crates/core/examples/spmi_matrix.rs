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

//! Shifted PMI of a few browsing sessions, next to the raw counts it came from.

use bb2vec::cooccurrence::{build_spmi, count_cooccurrences};
use bb2vec::corpus::{ItemId, ItemSet};

fn main() -> bb2vec::error::Result<()> {
    let raw: [&[u32]; 6] = [&[0, 1, 2], &[0, 1], &[1, 2, 3], &[0, 1, 3], &[2, 3], &[0, 4]];
    let sessions: Vec<ItemSet> = raw
        .iter()
        .filter_map(|s| ItemSet::session(s.iter().copied().map(ItemId)))
        .collect();
    let stats = count_cooccurrences(&sessions, 5);

    // Shift by ln 2; drop pairs seen in fewer than 2 sessions.
    let spmi = build_spmi(&stats, 2, 2)?;
    println!("{} sessions, {} distinct pairs, {} kept", stats.total_sets(), stats.num_pairs(), spmi.len());
    println!("i\tj\tn_ij\tn_i\tn_j\tspmi");
    for c in spmi.cells() {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{:+.4}",
            c.i.0,
            c.j.0,
            stats.pair_count(c.i, c.j),
            stats.item_count(c.i),
            stats.item_count(c.j),
            c.value
        );
    }
    Ok(())
}
