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

//! Item-to-item recommendation from purchase baskets and browsing sessions.
//!
//! Each item gets an input vector `v` and an output vector `v'`; candidates `m` for a query `k`
//! are ranked by `v'_m . v_k`. prod2vec learns one pair of matrices from basket co-purchases.
//! BB2vec adds a second pair for browsing and ties the two together through cross-domain
//! tasks, so items that are viewed but rarely bought still get useful basket vectors.
//!
//! - [`corpus`]: event ingestion, splits and the on-disk corpus layout.
//! - [`cooccurrence`]: co-occurrence counts and the shifted PMI matrix.
//! - [`model`], [`losses`]: embedding matrices with AdaGrad, and the three losses.
//! - [`trainer`]: multi-task SGD with early stopping.
//! - [`baselines`], [`evaluation`]: popularity and co-count rankers, HitRate and NDCG.
//! - [`synthgen`]: synthetic logs with exactly known conditionals.
//! - [`cli`]: the `bb2vec` command.

pub mod baselines;
pub mod cli;
pub mod cooccurrence;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod losses;
pub mod model;
pub mod synthgen;
pub mod trainer;
