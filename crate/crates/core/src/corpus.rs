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

//! Interaction-log ingestion, vocabulary construction and train/validation/test splits.
//!
//! The events file is tab-separated, one event per line:
//!
//! ```text
//! view<TAB>session_id<TAB>item_token
//! purchase<TAB>session_id<TAB>item_token
//! ```
//!
//! Views of one session form a browsing session, purchases of one session form its basket.
//! Items occur at most once per set; repeated events are collapsed.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense index into the item vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for ItemId {
    fn from(i: usize) -> Self {
        ItemId(i as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    Basket,
    Session,
}

/// A basket or browsing session: a non-empty list of distinct items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemSet {
    kind: SetKind,
    items: Vec<ItemId>,
    source_session: Option<String>,
}

impl ItemSet {
    /// Builds a set from `items`, dropping repeats (first occurrence wins).
    /// Returns `None` if nothing is left.
    pub fn new(kind: SetKind, items: impl IntoIterator<Item = ItemId>) -> Option<Self> {
        let mut out: Vec<ItemId> = Vec::new();
        for item in items {
            if !out.contains(&item) {
                out.push(item);
            }
        }
        if out.is_empty() {
            None
        } else {
            Some(ItemSet {
                kind,
                items: out,
                source_session: None,
            })
        }
    }

    pub fn basket(items: impl IntoIterator<Item = ItemId>) -> Option<Self> {
        Self::new(SetKind::Basket, items)
    }

    pub fn session(items: impl IntoIterator<Item = ItemId>) -> Option<Self> {
        Self::new(SetKind::Session, items)
    }

    pub fn with_source_session(mut self, session: impl Into<String>) -> Self {
        self.source_session = Some(session.into());
        self
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn source_session(&self) -> Option<&str> {
        self.source_session.as_deref()
    }

    /// Number of ordered pairs `(a, b)`, `a != b`, inside the set.
    pub fn ordered_pairs(&self) -> u64 {
        let n = self.items.len() as u64;
        n * n.saturating_sub(1)
    }
}

/// Item tokens indexed by [`ItemId`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    lookup: HashMap<String, ItemId>,
}

impl Vocab {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if lookup.insert(t.clone(), ItemId::from(i)).is_some() {
                return Err(Error::config(format!("duplicate item token `{t}`")));
            }
        }
        Ok(Vocab { tokens, lookup })
    }

    /// Tokens `item_0`, `item_1`, ... for generated data.
    pub fn numbered(size: usize) -> Self {
        Self::from_tokens((0..size).map(|i| format!("item_{i}")).collect())
            .expect("numbered tokens are unique")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: ItemId) -> &str {
        &self.tokens[id.index()]
    }

    pub fn id(&self, token: &str) -> Option<ItemId> {
        self.lookup.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Reads the first column of a `vocab.tsv` file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut tokens = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or_default();
            let id: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| parse_error(path, n + 1, "expected `token<TAB>id`"))?;
            if id != tokens.len() {
                return Err(parse_error(path, n + 1, "item ids must be contiguous"));
            }
            tokens.push(token.to_string());
        }
        Self::from_tokens(tokens)
    }
}

/// Train/validation/test proportions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let s = SplitFractions { train, val, test };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) || self.train <= 0.0 {
            return Err(Error::config(format!(
                "split fractions must be non-negative with a positive train share, got {parts:?}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "split fractions must sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }

    /// Sizes of the three parts for `n` units.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        let train = ((self.train * n as f64).round() as usize).min(n);
        let val = ((self.val * n as f64).round() as usize).min(n - train);
        [train, val, n - train - val]
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.7,
            val: 0.15,
            test: 0.15,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Assigns `n` units to splits: a seeded shuffle, then contiguous cuts.
pub fn assign_splits(n: usize, fractions: &SplitFractions, rng: &mut ChaCha8Rng) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let [train, val, _] = fractions.counts(n);
    let mut out = vec![Split::Test; n];
    for (rank, &unit) in order.iter().enumerate() {
        out[unit] = if rank < train {
            Split::Train
        } else if rank < train + val {
            Split::Val
        } else {
            Split::Test
        };
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct IngestConfig {
    /// Items purchased in fewer baskets than this (whole log) are removed from baskets.
    pub min_item_purchases: u64,
    pub split_fractions: SplitFractions,
    pub split_seed: u64,
    /// When set, a basket lands in the same split as the session it came from.
    pub keep_basket_session_link: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            min_item_purchases: 0,
            split_fractions: SplitFractions::default(),
            split_seed: 0,
            keep_basket_session_link: true,
        }
    }
}

/// Item sets grouped by split, before count bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct SplitSets {
    pub train_baskets: Vec<ItemSet>,
    pub val_baskets: Vec<ItemSet>,
    pub test_baskets: Vec<ItemSet>,
    pub train_sessions: Vec<ItemSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    vocab_size: usize,
    train_baskets: Vec<ItemSet>,
    val_baskets: Vec<ItemSet>,
    test_baskets: Vec<ItemSet>,
    train_sessions: Vec<ItemSet>,
    train_purchase_count: Vec<u64>,
    train_view_count: Vec<u64>,
}

impl Corpus {
    /// Computes train counts and drops validation/test items that never occur at train.
    pub fn from_splits(vocab_size: usize, sets: SplitSets) -> Result<Self> {
        let check = |s: &ItemSet| -> Result<()> {
            match s.items().iter().find(|i| i.index() >= vocab_size) {
                Some(i) => Err(Error::config(format!(
                    "item {i} out of range for vocabulary of {vocab_size}"
                ))),
                None => Ok(()),
            }
        };
        for s in sets
            .train_baskets
            .iter()
            .chain(&sets.val_baskets)
            .chain(&sets.test_baskets)
            .chain(&sets.train_sessions)
        {
            check(s)?;
        }

        let mut purchases = vec![0u64; vocab_size];
        let mut views = vec![0u64; vocab_size];
        for b in &sets.train_baskets {
            for i in b.items() {
                purchases[i.index()] += 1;
            }
        }
        for s in &sets.train_sessions {
            for i in s.items() {
                views[i.index()] += 1;
            }
        }

        let known = |s: ItemSet| -> Option<ItemSet> {
            let source = s.source_session.clone();
            let kept = s
                .items
                .iter()
                .copied()
                .filter(|i| purchases[i.index()] + views[i.index()] > 0);
            let mut out = ItemSet::new(s.kind, kept)?;
            out.source_session = source;
            Some(out)
        };
        let val_baskets = sets.val_baskets.into_iter().filter_map(known).collect();
        let test_baskets = sets.test_baskets.into_iter().filter_map(known).collect();

        Ok(Corpus {
            vocab_size,
            train_baskets: sets.train_baskets,
            val_baskets,
            test_baskets,
            train_sessions: sets.train_sessions,
            train_purchase_count: purchases,
            train_view_count: views,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn train_baskets(&self) -> &[ItemSet] {
        &self.train_baskets
    }

    pub fn val_baskets(&self) -> &[ItemSet] {
        &self.val_baskets
    }

    pub fn test_baskets(&self) -> &[ItemSet] {
        &self.test_baskets
    }

    pub fn train_sessions(&self) -> &[ItemSet] {
        &self.train_sessions
    }

    /// Per item: number of train baskets containing it.
    pub fn train_purchase_count(&self) -> &[u64] {
        &self.train_purchase_count
    }

    /// Per item: number of train sessions containing it.
    pub fn train_view_count(&self) -> &[u64] {
        &self.train_view_count
    }

    pub fn purchases(&self, item: ItemId) -> u64 {
        self.train_purchase_count[item.index()]
    }

    /// Copy of the corpus whose training baskets are replaced (validation/test kept).
    pub fn with_train_baskets(&self, train_baskets: Vec<ItemSet>) -> Result<Self> {
        Corpus::from_splits(
            self.vocab_size,
            SplitSets {
                train_baskets,
                val_baskets: self.val_baskets.clone(),
                test_baskets: self.test_baskets.clone(),
                train_sessions: self.train_sessions.clone(),
            },
        )
    }

    /// Writes `vocab.tsv` and one TSV per split into `dir`.
    pub fn save_dir(&self, dir: &Path, vocab: &Vocab) -> Result<()> {
        if vocab.len() != self.vocab_size {
            return Err(Error::config(format!(
                "vocabulary has {} tokens, corpus expects {}",
                vocab.len(),
                self.vocab_size
            )));
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let path = dir.join(VOCAB_FILE);
        write_file(&path, |w| {
            for (i, token) in vocab.tokens().iter().enumerate() {
                writeln!(
                    w,
                    "{token}\t{i}\t{}\t{}",
                    self.train_purchase_count[i], self.train_view_count[i]
                )?;
            }
            Ok(())
        })?;

        for (name, sets) in [
            (TRAIN_BASKETS_FILE, &self.train_baskets),
            (VAL_BASKETS_FILE, &self.val_baskets),
            (TEST_BASKETS_FILE, &self.test_baskets),
            (TRAIN_SESSIONS_FILE, &self.train_sessions),
        ] {
            write_sets(&dir.join(name), sets)?;
        }
        Ok(())
    }

    /// Reads a directory written by [`Corpus::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<(Corpus, Vocab)> {
        let vocab = Vocab::load(&dir.join(VOCAB_FILE))?;
        let n = vocab.len();
        let sets = SplitSets {
            train_baskets: read_sets(&dir.join(TRAIN_BASKETS_FILE), SetKind::Basket, n)?,
            val_baskets: read_sets(&dir.join(VAL_BASKETS_FILE), SetKind::Basket, n)?,
            test_baskets: read_sets(&dir.join(TEST_BASKETS_FILE), SetKind::Basket, n)?,
            train_sessions: read_sets(&dir.join(TRAIN_SESSIONS_FILE), SetKind::Session, n)?,
        };
        Ok((Corpus::from_splits(n, sets)?, vocab))
    }
}

pub const VOCAB_FILE: &str = "vocab.tsv";
pub const TRAIN_BASKETS_FILE: &str = "train_baskets.tsv";
pub const VAL_BASKETS_FILE: &str = "val_baskets.tsv";
pub const TEST_BASKETS_FILE: &str = "test_baskets.tsv";
pub const TRAIN_SESSIONS_FILE: &str = "train_sessions.tsv";

pub(crate) fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub(crate) fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_sets(path: &Path, sets: &[ItemSet]) -> Result<()> {
    write_file(path, |w| {
        for s in sets {
            let mut first = true;
            for i in s.items() {
                if !first {
                    w.write_all(b" ")?;
                }
                write!(w, "{i}")?;
                first = false;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

fn read_sets(path: &Path, kind: SetKind, vocab_size: usize) -> Result<Vec<ItemSet>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut items = Vec::new();
        for tok in line.split_ascii_whitespace() {
            let id: u32 = tok
                .parse()
                .map_err(|_| parse_error(path, n + 1, format!("bad item id `{tok}`")))?;
            if id as usize >= vocab_size {
                return Err(parse_error(path, n + 1, format!("item id {id} out of range")));
            }
            items.push(ItemId(id));
        }
        let set = ItemSet::new(kind, items).expect("line has at least one id");
        out.push(set);
    }
    Ok(out)
}

/// Events of one raw session, as token indices in first-appearance order.
#[derive(Default)]
struct RawSession {
    id: String,
    views: Vec<usize>,
    purchases: Vec<usize>,
}

fn push_unique(v: &mut Vec<usize>, x: usize) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// Reads an events file and builds a [`Corpus`] plus its vocabulary.
pub fn ingest(events_file: &Path, config: &IngestConfig) -> Result<(Corpus, Vocab)> {
    let file = fs::File::open(events_file).map_err(|e| Error::io(events_file, e))?;
    ingest_reader(BufReader::new(file), events_file, config)
}

/// Same as [`ingest`] over any buffered reader; `origin` is used in error messages.
pub fn ingest_reader<R: BufRead>(
    reader: R,
    origin: &Path,
    config: &IngestConfig,
) -> Result<(Corpus, Vocab)> {
    config.split_fractions.validate()?;

    let mut tokens: Vec<String> = Vec::new();
    let mut token_index: HashMap<String, usize> = HashMap::new();
    let mut sessions: Vec<RawSession> = Vec::new();
    let mut session_index: HashMap<String, usize> = HashMap::new();

    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_error(
                origin,
                n + 1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let purchase = match fields[0] {
            "view" => false,
            "purchase" => true,
            other => {
                return Err(parse_error(
                    origin,
                    n + 1,
                    format!("unknown event type `{other}`"),
                ))
            }
        };
        if fields[1].is_empty() || fields[2].is_empty() {
            return Err(parse_error(origin, n + 1, "empty session id or item token"));
        }
        let t = *token_index.entry(fields[2].to_string()).or_insert_with(|| {
            tokens.push(fields[2].to_string());
            tokens.len() - 1
        });
        let s = *session_index.entry(fields[1].to_string()).or_insert_with(|| {
            sessions.push(RawSession {
                id: fields[1].to_string(),
                ..Default::default()
            });
            sessions.len() - 1
        });
        let raw = &mut sessions[s];
        if purchase {
            push_unique(&mut raw.purchases, t);
        } else {
            push_unique(&mut raw.views, t);
        }
    }

    if config.min_item_purchases > 0 {
        let mut total = vec![0u64; tokens.len()];
        for s in &sessions {
            for &t in &s.purchases {
                total[t] += 1;
            }
        }
        for s in &mut sessions {
            s.purchases.retain(|&t| total[t] >= config.min_item_purchases);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.split_seed);
    let session_split = assign_splits(sessions.len(), &config.split_fractions, &mut rng);
    let basket_split = if config.keep_basket_session_link {
        session_split.clone()
    } else {
        rng.set_stream(1);
        assign_splits(sessions.len(), &config.split_fractions, &mut rng)
    };

    let mut train_count = vec![0u64; tokens.len()];
    for (s, raw) in sessions.iter().enumerate() {
        if basket_split[s] == Split::Train {
            for &t in &raw.purchases {
                train_count[t] += 1;
            }
        }
        if session_split[s] == Split::Train {
            for &t in &raw.views {
                train_count[t] += 1;
            }
        }
    }

    let mut id_of = vec![None; tokens.len()];
    let mut vocab_tokens = Vec::new();
    for (t, token) in tokens.iter().enumerate() {
        if train_count[t] > 0 {
            id_of[t] = Some(ItemId::from(vocab_tokens.len()));
            vocab_tokens.push(token.clone());
        }
    }
    if vocab_tokens.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut sets = SplitSets::default();
    for (s, raw) in sessions.iter().enumerate() {
        let remap = |ts: &[usize]| ts.iter().filter_map(|&t| id_of[t]).collect::<Vec<_>>();
        if let Some(mut basket) = ItemSet::basket(remap(&raw.purchases)) {
            if config.keep_basket_session_link {
                basket = basket.with_source_session(raw.id.clone());
            }
            match basket_split[s] {
                Split::Train => sets.train_baskets.push(basket),
                Split::Val => sets.val_baskets.push(basket),
                Split::Test => sets.test_baskets.push(basket),
            }
        }
        if session_split[s] == Split::Train {
            if let Some(session) = ItemSet::session(remap(&raw.views)) {
                sets.train_sessions.push(session.with_source_session(raw.id.clone()));
            }
        }
    }

    let vocab = Vocab::from_tokens(vocab_tokens)?;
    let corpus = Corpus::from_splits(vocab.len(), sets)?;
    Ok((corpus, vocab))
}

/// Strictly increasing purchase-count boundaries; bucket `b` covers `[edges[b-1], edges[b])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketEdges(Vec<u64>);

impl BucketEdges {
    pub fn new(edges: Vec<u64>) -> Result<Self> {
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(format!(
                "bucket edges must be strictly increasing, got {edges:?}"
            )));
        }
        Ok(BucketEdges(edges))
    }

    pub fn edges(&self) -> &[u64] {
        &self.0
    }

    pub fn num_buckets(&self) -> usize {
        self.0.len() + 1
    }

    pub fn bucket_of(&self, count: u64) -> usize {
        self.0.partition_point(|&e| e <= count)
    }

    /// `[lo, hi)` of a bucket; `hi` is `None` for the last one.
    pub fn bounds(&self, bucket: usize) -> (u64, Option<u64>) {
        let lo = if bucket == 0 { 0 } else { self.0[bucket - 1] };
        (lo, self.0.get(bucket).copied())
    }
}

impl Default for BucketEdges {
    fn default() -> Self {
        BucketEdges(vec![1, 2, 4, 8, 16, 32])
    }
}

/// Bucket index of an item's train purchase count.
pub fn purchase_bucket(item: ItemId, corpus: &Corpus, edges: &BucketEdges) -> usize {
    edges.bucket_of(corpus.purchases(item))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn run(text: &str, config: &IngestConfig) -> Result<(Corpus, Vocab)> {
        ingest_reader(Cursor::new(text.to_string()), Path::new("events.tsv"), config)
    }

    fn all_train() -> IngestConfig {
        IngestConfig {
            split_fractions: SplitFractions::new(1.0, 0.0, 0.0).unwrap(),
            ..Default::default()
        }
    }

    fn tokens(vocab: &Vocab, set: &ItemSet) -> Vec<String> {
        set.items().iter().map(|&i| vocab.token(i).to_string()).collect()
    }

    #[test]
    fn degenerate_split_puts_everything_in_train() {
        let log = "view\ts1\tA\nview\ts2\tB\nview\ts3\tC\npurchase\ts1\tA\npurchase\ts1\tB\n";
        let (corpus, _) = run(log, &all_train()).unwrap();
        assert_eq!(corpus.train_sessions().len(), 3);
        assert_eq!(corpus.train_baskets().len(), 1);
        assert!(corpus.val_baskets().is_empty());
        assert!(corpus.test_baskets().is_empty());
    }

    #[test]
    fn duplicate_purchases_collapse() {
        let log = "purchase\ts1\tA\npurchase\ts1\tA\npurchase\ts1\tB\n";
        let (corpus, vocab) = run(log, &all_train()).unwrap();
        assert_eq!(tokens(&vocab, &corpus.train_baskets()[0]), ["A", "B"]);
        assert_eq!(corpus.train_purchase_count(), &[1, 1]);
    }

    #[test]
    fn rare_items_are_removed_from_baskets() {
        let mut log = String::new();
        for s in 0..12 {
            log += &format!("purchase\ts{s}\tY\npurchase\ts{s}\tZ\n");
        }
        log += "purchase\ts0\tX\npurchase\ts1\tX\nview\ts5\tX\n";
        let config = IngestConfig {
            min_item_purchases: 10,
            ..all_train()
        };
        let (corpus, vocab) = run(&log, &config).unwrap();
        let x = vocab.id("X").expect("X survives through its view");
        assert!(corpus.train_baskets().iter().all(|b| !b.items().contains(&x)));
        assert_eq!(corpus.purchases(x), 0);
        assert_eq!(corpus.train_view_count()[x.index()], 1);

        // Without a view the item disappears from the vocabulary entirely.
        let log = log.replace("view\ts5\tX\n", "");
        let (_, vocab) = run(&log, &config).unwrap();
        assert!(vocab.id("X").is_none());
        assert_eq!(vocab.len(), 2);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = run("view\ts1\tA\nview s2 B\n", &all_train()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = run("click\ts1\tA\n", &all_train()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_log_is_an_error() {
        assert!(matches!(run("", &all_train()), Err(Error::EmptyCorpus)));
        let config = IngestConfig {
            min_item_purchases: 5,
            ..all_train()
        };
        assert!(matches!(
            run("purchase\ts1\tA\n", &config),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn linked_baskets_follow_their_session() {
        let mut log = String::new();
        for s in 0..200 {
            log += &format!("view\ts{s}\tv{}\npurchase\ts{s}\tp{}\n", s % 7, s % 5);
        }
        let config = IngestConfig {
            split_seed: 3,
            ..Default::default()
        };
        let (corpus, _) = run(&log, &config).unwrap();
        let train_sessions: Vec<&str> = corpus
            .train_sessions()
            .iter()
            .map(|s| s.source_session().unwrap())
            .collect();
        for b in corpus.train_baskets() {
            assert!(train_sessions.contains(&b.source_session().unwrap()));
        }
        for b in corpus.val_baskets().iter().chain(corpus.test_baskets()) {
            assert!(!train_sessions.contains(&b.source_session().unwrap()));
        }
        assert_eq!(corpus.train_baskets().len(), 140);
        assert_eq!(corpus.val_baskets().len() + corpus.test_baskets().len(), 60);
    }

    #[test]
    fn held_out_items_must_be_seen_at_train() {
        // With every session but one in train, the held-out basket keeps only known items.
        let log = "purchase\ta\tA\npurchase\ta\tB\npurchase\tb\tA\npurchase\tb\tC\n";
        for seed in 0..20 {
            let config = IngestConfig {
                split_fractions: SplitFractions::new(0.5, 0.5, 0.0).unwrap(),
                split_seed: seed,
                ..Default::default()
            };
            let (corpus, vocab) = run(log, &config).unwrap();
            assert_eq!(vocab.len(), 2);
            let val = &corpus.val_baskets()[0];
            assert_eq!(val.len(), 1);
            assert_eq!(vocab.token(val.items()[0]), "A");
        }
    }

    #[test]
    fn split_fraction_validation() {
        assert!(SplitFractions::new(0.7, 0.15, 0.15).is_ok());
        assert!(SplitFractions::new(0.7, 0.2, 0.2).is_err());
        assert!(SplitFractions::new(0.0, 0.5, 0.5).is_err());
        assert!(SplitFractions::new(1.1, -0.1, 0.0).is_err());
        assert_eq!(SplitFractions::default().counts(100), [70, 15, 15]);
    }

    #[test]
    fn bucket_boundaries_are_half_open() {
        let edges = BucketEdges::new(vec![1, 4, 16]).unwrap();
        assert_eq!(edges.bucket_of(0), 0);
        assert_eq!(edges.bucket_of(1), 1);
        assert_eq!(edges.bucket_of(3), 1);
        assert_eq!(edges.bucket_of(4), 2);
        assert_eq!(edges.bucket_of(15), 2);
        assert_eq!(edges.bucket_of(16), 3);
        assert_eq!(edges.bucket_of(100), 3);
        assert_eq!(edges.bounds(0), (0, Some(1)));
        assert_eq!(edges.bounds(3), (16, None));
        assert!(BucketEdges::new(vec![1, 1]).is_err());
        assert!(BucketEdges::new(vec![4, 2]).is_err());
    }

    #[test]
    fn purchase_bucket_uses_train_counts() {
        let mut log = String::new();
        for s in 0..4 {
            log += &format!("purchase\ts{s}\tA\npurchase\ts{s}\tB\n");
        }
        log += "view\tz\tC\n";
        let (corpus, vocab) = run(&log, &all_train()).unwrap();
        let edges = BucketEdges::new(vec![1, 4, 16]).unwrap();
        assert_eq!(purchase_bucket(vocab.id("A").unwrap(), &corpus, &edges), 2);
        assert_eq!(purchase_bucket(vocab.id("C").unwrap(), &corpus, &edges), 0);
    }

    #[test]
    fn item_set_rejects_empty() {
        assert!(ItemSet::basket(Vec::new()).is_none());
        let s = ItemSet::session([ItemId(2), ItemId(1), ItemId(2)]).unwrap();
        assert_eq!(s.items(), &[ItemId(2), ItemId(1)]);
        assert_eq!(s.ordered_pairs(), 2);
    }
}
