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

use bb2vec::cooccurrence::{build_spmi, count_cooccurrences, pmi};
use bb2vec::corpus::{BucketEdges, ItemId, ItemSet};
use bb2vec::evaluation::{evaluate, extract_pairs_with, hitrate_at_k, ndcg_at_k, PairOrder, Recommender, Scored};
use bb2vec::trainer::PairSampler;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VOCAB: u32 = 12;

fn sets() -> impl Strategy<Value = Vec<ItemSet>> {
    prop::collection::vec(prop::collection::vec(0..VOCAB, 1..6), 1..40).prop_map(|raw| {
        raw.into_iter()
            .filter_map(|s| ItemSet::session(s.into_iter().map(ItemId)))
            .collect()
    })
}

/// Ranks every other item by descending id distance from the query.
struct Fixed;

impl Recommender for Fixed {
    fn recommend(&self, query: ItemId, n: usize) -> Vec<Scored> {
        (0..VOCAB)
            .map(ItemId)
            .filter(|&m| m != query)
            .map(|m| Scored { item: m, score: -(m.0 as f64 - query.0 as f64).abs() })
            .take(n)
            .collect()
    }
}

proptest! {
    #[test]
    fn spmi_ignores_set_order_and_duplicate_items(sets in sets(), seed in any::<u64>()) {
        let base = build_spmi(&count_cooccurrences(&sets, VOCAB as usize), 5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled: Vec<ItemSet> = sets
            .iter()
            .map(|s| {
                let mut items = s.items().to_vec();
                items.extend_from_slice(s.items());
                use rand::seq::SliceRandom;
                items.shuffle(&mut rng);
                ItemSet::session(items).unwrap()
            })
            .collect();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        let other = build_spmi(&count_cooccurrences(&shuffled, VOCAB as usize), 5, 1).unwrap();
        prop_assert_eq!(base, other);
    }

    #[test]
    fn spmi_is_symmetric_and_shifted(sets in sets(), shift in 1u32..30, min in 1u64..4) {
        let stats = count_cooccurrences(&sets, VOCAB as usize);
        let m = build_spmi(&stats, shift, min).unwrap();
        for c in m.cells() {
            prop_assert_eq!(m.get(c.j, c.i), Some(c.value));
            let n = stats.pair_count(c.i, c.j);
            prop_assert!(n >= min);
            let expect = pmi(n, stats.item_count(c.i), stats.item_count(c.j), stats.total_sets())
                - (shift as f64).ln();
            prop_assert!((c.value - expect).abs() < 1e-12);
        }
        let kept = stats.sorted_pairs().iter().filter(|p| p.2 >= min).count();
        prop_assert_eq!(m.len(), kept);
    }

    #[test]
    fn pair_sampler_stays_inside_sets(sets in sets(), seed in any::<u64>()) {
        prop_assume!(sets.iter().any(|s| s.len() >= 2));
        let sampler = PairSampler::new(&sets).unwrap();
        let expect: u64 = sets.iter().map(|s| s.ordered_pairs()).sum();
        prop_assert_eq!(sampler.total_pairs(), expect);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let (k, m) = sampler.sample(&sets, &mut rng);
            prop_assert_ne!(k, m);
            prop_assert!(sets.iter().any(|s| s.items().contains(&k) && s.items().contains(&m)));
        }
    }

    #[test]
    fn metrics_are_bounded_and_monotone(sets in sets()) {
        let counts = vec![1u64; VOCAB as usize];
        let pairs = extract_pairs_with(&sets, &counts, PairOrder::Ordered);
        let unordered = extract_pairs_with(&sets, &counts, PairOrder::Unordered);
        prop_assert_eq!(pairs.len(), 2 * unordered.len());
        prop_assume!(!pairs.is_empty());
        let report = evaluate(&Fixed, &pairs, &[1, 3, 11], &BucketEdges::default());
        for w in report.hitrate.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for (h, n) in report.hitrate.iter().zip(&report.ndcg) {
            prop_assert!((0.0..=1.0).contains(h) && (0.0..=1.0).contains(n) && n <= h);
        }
        // Every other item appears in a list of length V-1.
        prop_assert!((report.hitrate[2] - 1.0).abs() < 1e-12);
        let sum: usize = report.buckets.iter().map(|b| b.pairs).sum();
        prop_assert_eq!(sum, pairs.len());
    }

    #[test]
    fn ndcg_matches_position(pos in 0usize..20, k in 1usize..25) {
        let list: Vec<ItemId> = (0..20).map(ItemId).collect();
        let target = ItemId(pos as u32);
        let expect_hit = if pos < k { 1.0 } else { 0.0 };
        prop_assert_eq!(hitrate_at_k(target, &list, k), expect_hit);
        let expect = if pos < k { 1.0 / ((pos + 2) as f64).log2() } else { 0.0 };
        prop_assert!((ndcg_at_k(target, &list, k) - expect).abs() < 1e-15);
    }
}
