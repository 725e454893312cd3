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

//! Pair co-occurrence counts over item sets and the shifted-PMI matrix built from them.
//!
//! Counts are over sets, not events: `n_ij` is the number of sets holding both `i` and `j`,
//! `n_i` the number of sets holding `i` and `T` the number of sets. All logarithms are natural.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{parse_error, write_file, ItemId, ItemSet};
use crate::error::{Error, Result};

#[inline]
fn key(a: ItemId, b: ItemId) -> (ItemId, ItemId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Symmetric pair counts, per-item counts and the number of sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CooccurrenceStats {
    pairs: HashMap<(ItemId, ItemId), u64>,
    item_counts: Vec<u64>,
    total_sets: u64,
}

impl CooccurrenceStats {
    pub fn vocab_size(&self) -> usize {
        self.item_counts.len()
    }

    /// `n_ij`; zero for `i == j` or pairs never seen together.
    pub fn pair_count(&self, i: ItemId, j: ItemId) -> u64 {
        if i == j {
            return 0;
        }
        self.pairs.get(&key(i, j)).copied().unwrap_or(0)
    }

    pub fn item_count(&self, i: ItemId) -> u64 {
        self.item_counts.get(i.index()).copied().unwrap_or(0)
    }

    pub fn item_counts(&self) -> &[u64] {
        &self.item_counts
    }

    pub fn total_sets(&self) -> u64 {
        self.total_sets
    }

    /// Number of distinct unordered pairs with a non-zero count.
    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Unordered pairs `(i, j, n_ij)` with `i < j`, sorted.
    pub fn sorted_pairs(&self) -> Vec<(ItemId, ItemId, u64)> {
        let mut out: Vec<_> = self.pairs.iter().map(|(&(i, j), &n)| (i, j, n)).collect();
        out.sort_unstable();
        out
    }

    fn merge(mut self, other: CooccurrenceStats) -> CooccurrenceStats {
        for (k, n) in other.pairs {
            *self.pairs.entry(k).or_insert(0) += n;
        }
        for (a, b) in self.item_counts.iter_mut().zip(other.item_counts) {
            *a += b;
        }
        self.total_sets += other.total_sets;
        self
    }

    fn count_serial(sets: &[ItemSet], vocab_size: usize) -> CooccurrenceStats {
        let mut stats = CooccurrenceStats {
            pairs: HashMap::new(),
            item_counts: vec![0; vocab_size],
            total_sets: sets.len() as u64,
        };
        for set in sets {
            let items = set.items();
            for (a, &i) in items.iter().enumerate() {
                stats.item_counts[i.index()] += 1;
                for &j in &items[a + 1..] {
                    *stats.pairs.entry(key(i, j)).or_insert(0) += 1;
                }
            }
        }
        stats
    }
}

const PARALLEL_CHUNK: usize = 8192;

/// Exact co-occurrence counts. Large inputs are counted in parallel chunks and merged.
pub fn count_cooccurrences(sets: &[ItemSet], vocab_size: usize) -> CooccurrenceStats {
    if sets.len() <= PARALLEL_CHUNK {
        return CooccurrenceStats::count_serial(sets, vocab_size);
    }
    sets.par_chunks(PARALLEL_CHUNK)
        .map(|chunk| CooccurrenceStats::count_serial(chunk, vocab_size))
        .reduce(
            || CooccurrenceStats {
                item_counts: vec![0; vocab_size],
                ..Default::default()
            },
            CooccurrenceStats::merge,
        )
}

/// Empirical `P(other | query) = n_{other,query} / n_query`; `1` when `other == query`.
pub fn conditional_prob(stats: &CooccurrenceStats, query: ItemId, other: ItemId) -> Result<f64> {
    let n = stats.item_count(query);
    if n == 0 {
        return Err(Error::UnseenItem(query));
    }
    if query == other {
        return Ok(1.0);
    }
    Ok(stats.pair_count(other, query) as f64 / n as f64)
}

/// One stored cell of the shifted-PMI matrix, `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpmiCell {
    pub i: ItemId,
    pub j: ItemId,
    pub value: f64,
}

/// Sparse symmetric `PMI(i, j) - ln(shift_k)`, restricted to pairs with `n_ij >= min_pair_count`.
/// Only the upper triangle is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SpmiMatrix {
    vocab_size: usize,
    cells: Vec<SpmiCell>,
    shift_k: u32,
    min_pair_count: u64,
}

/// Default cell threshold for large corpora; small corpora use [`MIN_PAIR_COUNT_SMALL`].
pub const MIN_PAIR_COUNT_LARGE: u64 = 10;
pub const MIN_PAIR_COUNT_SMALL: u64 = 3;

pub fn pmi(n_ij: u64, n_i: u64, n_j: u64, total: u64) -> f64 {
    let t = total as f64;
    ((n_ij as f64 / t) / ((n_i as f64 / t) * (n_j as f64 / t))).ln()
}

pub fn build_spmi(stats: &CooccurrenceStats, shift_k: u32, min_pair_count: u64) -> Result<SpmiMatrix> {
    if stats.total_sets == 0 {
        return Err(Error::config("cannot build PMI from zero sets"));
    }
    if shift_k == 0 {
        return Err(Error::config("shift_k must be at least 1"));
    }
    let shift = (shift_k as f64).ln();
    let cells = stats
        .sorted_pairs()
        .into_iter()
        .filter(|&(_, _, n)| n >= min_pair_count.max(1))
        .map(|(i, j, n)| SpmiCell {
            i,
            j,
            value: pmi(n, stats.item_count(i), stats.item_count(j), stats.total_sets) - shift,
        })
        .collect();
    Ok(SpmiMatrix {
        vocab_size: stats.vocab_size(),
        cells,
        shift_k,
        min_pair_count,
    })
}

impl SpmiMatrix {
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn shift_k(&self) -> u32 {
        self.shift_k
    }

    pub fn min_pair_count(&self) -> u64 {
        self.min_pair_count
    }

    /// Stored (upper-triangle) cells, sorted by `(i, j)`.
    pub fn cells(&self) -> &[SpmiCell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Symmetric lookup; `None` for cells that were not kept.
    pub fn get(&self, i: ItemId, j: ItemId) -> Option<f64> {
        let (a, b) = key(i, j);
        self.cells
            .binary_search_by(|c| (c.i, c.j).cmp(&(a, b)))
            .ok()
            .map(|idx| self.cells[idx].value)
    }

    /// Writes `item_i<TAB>item_j<TAB>value` rows after a `#` header carrying the parameters.
    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        write_file(path, |w| {
            writeln!(
                w,
                "# vocab_size={} shift_k={} min_pair_count={}",
                self.vocab_size, self.shift_k, self.min_pair_count
            )?;
            for c in &self.cells {
                writeln!(w, "{}\t{}\t{}", c.i, c.j, c.value)?;
            }
            Ok(())
        })
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .map(|(_, l)| l)
            .ok_or_else(|| parse_error(path, 1, "missing header"))?;
        let field = |name: &str| -> Result<u64> {
            header
                .trim_start_matches('#')
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(name)?.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| parse_error(path, 1, format!("header lacks `{name}`")))
        };
        let vocab_size = field("vocab_size")? as usize;
        let shift_k = field("shift_k")? as u32;
        let min_pair_count = field("min_pair_count")?;

        let mut cells = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let bad = || parse_error(path, n + 1, "expected `i<TAB>j<TAB>value`");
            let mut f = line.split('\t');
            let i: u32 = f.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let j: u32 = f.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let value: f64 = f.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            if i >= j || j as usize >= vocab_size || !value.is_finite() {
                return Err(bad());
            }
            cells.push(SpmiCell {
                i: ItemId(i),
                j: ItemId(j),
                value,
            });
        }
        if cells.windows(2).any(|w| (w[0].i, w[0].j) >= (w[1].i, w[1].j)) {
            return Err(parse_error(path, 2, "cells must be sorted and unique"));
        }
        Ok(SpmiMatrix {
            vocab_size,
            cells,
            shift_k,
            min_pair_count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(lists: &[&[u32]]) -> Vec<ItemSet> {
        lists
            .iter()
            .map(|l| ItemSet::basket(l.iter().map(|&i| ItemId(i))).unwrap())
            .collect()
    }

    const A: ItemId = ItemId(0);
    const B: ItemId = ItemId(1);
    const C: ItemId = ItemId(2);

    #[test]
    fn hand_counted_pairs() {
        let stats = count_cooccurrences(&sets(&[&[0, 1], &[0, 1, 2]]), 3);
        assert_eq!(stats.pair_count(A, B), 2);
        assert_eq!(stats.pair_count(B, A), 2);
        assert_eq!(stats.pair_count(B, C), 1);
        assert_eq!(stats.pair_count(A, A), 0);
        assert_eq!(stats.item_count(A), 2);
        assert_eq!(stats.total_sets(), 2);
    }

    #[test]
    fn empty_input() {
        let stats = count_cooccurrences(&[], 4);
        assert_eq!(stats.total_sets(), 0);
        assert_eq!(stats.num_pairs(), 0);
        assert!(build_spmi(&stats, 1, 1).is_err());
    }

    #[test]
    fn spmi_direct_arithmetic() {
        // n_ij = 3, n_i = 4, n_j = 5, T = 10.
        let v = pmi(3, 4, 5, 10);
        assert!((v - 0.405_465_108_108_164_4).abs() < 1e-12);
        assert!((v - 20f64.ln() - (-2.590_267_165_445_826_7)).abs() < 1e-12);
        // Independent events.
        assert!(pmi(2, 4, 5, 10).abs() < 1e-15);
    }

    #[test]
    fn spmi_cell_values_and_threshold() {
        // 10 sets: A,B together 3 times; A in 4, B in 5.
        let mut lists: Vec<Vec<u32>> = vec![vec![0, 1]; 3];
        lists.push(vec![0]);
        lists.extend(vec![vec![1, 2]; 2]);
        lists.extend(vec![vec![2]; 4]);
        let refs: Vec<&[u32]> = lists.iter().map(|v| v.as_slice()).collect();
        let stats = count_cooccurrences(&sets(&refs), 3);
        assert_eq!(stats.total_sets(), 10);

        let spmi = build_spmi(&stats, 1, 1).unwrap();
        assert!((spmi.get(A, B).unwrap() - (1.5f64).ln()).abs() < 1e-12);
        assert_eq!(spmi.get(A, B), spmi.get(B, A));
        assert!(spmi.get(A, C).is_none());

        let shifted = build_spmi(&stats, 20, 3).unwrap();
        assert_eq!(shifted.len(), 1);
        assert!((shifted.get(B, A).unwrap() - (1.5f64.ln() - 20f64.ln())).abs() < 1e-12);
        assert!(build_spmi(&stats, 0, 1).is_err());
    }

    #[test]
    fn conditional_probability() {
        let stats = count_cooccurrences(&sets(&[&[0, 1], &[0, 1], &[0, 2], &[0], &[3]]), 5);
        assert_eq!(conditional_prob(&stats, A, B).unwrap(), 0.5);
        assert_eq!(conditional_prob(&stats, A, ItemId(3)).unwrap(), 0.0);
        assert!(matches!(
            conditional_prob(&stats, ItemId(4), A),
            Err(Error::UnseenItem(ItemId(4)))
        ));
    }

    #[test]
    fn tsv_round_trip_is_lossless() {
        let stats = count_cooccurrences(&sets(&[&[0, 1, 2], &[0, 1], &[2, 3], &[1, 3]]), 4);
        let spmi = build_spmi(&stats, 7, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spmi.tsv");
        spmi.save_tsv(&path).unwrap();
        let back = SpmiMatrix::load_tsv(&path).unwrap();
        assert_eq!(back, spmi);
        for (a, b) in back.cells().iter().zip(spmi.cells()) {
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }
}
