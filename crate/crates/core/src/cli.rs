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

//! Command-line front end: `ingest`, `spmi`, `train`, `eval`, `recommend` and `synth`.
//!
//! Every command accepts `--config <file.toml>`; flags override file values and the effective
//! configuration is written as `config.toml` next to the command's outputs.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::baselines::{CoCountModel, PopularityModel};
use crate::cooccurrence::{build_spmi, count_cooccurrences, SpmiMatrix, MIN_PAIR_COUNT_LARGE};
use crate::corpus::{
    ingest, write_file, BucketEdges, Corpus, IngestConfig, ItemId, SplitFractions, Vocab,
    VOCAB_FILE,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate, extract_pairs_with, write_breakdown, write_recommendations, write_report,
    EmbeddingRecommender, EvalReport, PairOrder, Recommender,
};
use crate::model::EmbeddingSet;
use crate::synthgen::{generate, ComplementSpec, SizeDistribution, SynthSpec};
use crate::trainer::{train, write_history, Bb2vecWiring, LossKind, ModelPlan, TrainConfig};

pub const CONFIG_FILE: &str = "config.toml";
pub const MODEL_FILE: &str = "model.bin";
pub const HISTORY_FILE: &str = "history.tsv";
pub const SPMI_FILE: &str = "spmi.tsv";
pub const REPORT_FILE: &str = "report.tsv";
pub const BREAKDOWN_FILE: &str = "breakdown.tsv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Prod2vec,
    Bb2vec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossArg {
    Class,
    Rank,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Class => LossKind::Classification,
            LossArg::Rank => LossKind::Ranking,
        }
    }
}

/// How the BB2vec browsing tasks are trained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrowsingArg {
    /// Factorise the shifted-PMI matrix of sessions.
    Spmi,
    /// Skip-gram on session pairs with the basket loss.
    Skipgram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Val,
    Test,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestSection {
    pub min_item_purchases: Option<u64>,
    pub split_fractions: Option<[f64; 3]>,
    pub keep_basket_session_link: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpmiSection {
    pub shift_k: Option<u32>,
    pub min_pair_count: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub model: Option<ModelKind>,
    pub loss: Option<LossArg>,
    pub dim: Option<usize>,
    pub negatives: Option<usize>,
    pub learning_rate: Option<f64>,
    pub neg_alpha: Option<f64>,
    pub epoch_size: Option<u64>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub hogwild_threads: Option<usize>,
    pub lambda: Option<f64>,
    pub browsing: Option<BrowsingArg>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub ks: Option<Vec<usize>>,
    pub buckets: Option<Vec<u64>>,
    pub unordered_pairs: Option<bool>,
    pub split: Option<SplitArg>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub vocab_size: Option<usize>,
    pub n_baskets: Option<usize>,
    pub n_sessions: Option<usize>,
    pub rho: Option<f64>,
    pub zero_purchase_fraction: Option<f64>,
    pub min_degree: Option<usize>,
    pub max_degree: Option<usize>,
    pub decay: Option<f64>,
    pub basket_size_min: Option<usize>,
    pub basket_size_max: Option<usize>,
    pub basket_size_p: Option<f64>,
    pub split_fractions: Option<[f64; 3]>,
}

/// Contents of a `--config` file. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub ingest: IngestSection,
    pub spmi: SpmiSection,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub synth: SynthSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Parser, Debug)]
#[command(name = "bb2vec", version, about = "Product embeddings from baskets and browsing sessions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice (splits, initialisation, sampling, generation).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel counting and evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a corpus directory from an events file.
    Ingest(IngestArgs),
    /// Build the shifted-PMI matrix of training sessions.
    Spmi(SpmiArgs),
    /// Train prod2vec or BB2vec embeddings.
    Train(TrainArgs),
    /// Evaluate models or baselines on held-out baskets.
    Eval(EvalArgs),
    /// Print the top-N recommendations for one item.
    Recommend(RecommendArgs),
    /// Generate a synthetic events file with known conditionals.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Tab-separated `view|purchase`, session id, item token.
    pub events: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Drop items bought in fewer baskets than this from baskets.
    #[arg(long)]
    pub min_purchases: Option<u64>,
    /// Train/validation/test fractions, e.g. `0.7,0.15,0.15`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub split: Option<Vec<f64>>,
    /// Split baskets independently of their sessions.
    #[arg(long)]
    pub no_session_link: bool,
}

#[derive(Args, Debug)]
pub struct SpmiArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output TSV (default `<corpus>/spmi.tsv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Shift `k` subtracted as `ln k` (default: the number of negatives, 20).
    #[arg(long)]
    pub shift_k: Option<u32>,
    /// Keep only pairs co-occurring in at least this many sessions.
    #[arg(long)]
    pub min_pair_count: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Weight of both browsing tasks.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Noise distribution exponent; 0 samples negatives uniformly.
    #[arg(long)]
    pub neg_alpha: Option<f64>,
    /// Updates per epoch (default: ordered training basket pairs).
    #[arg(long)]
    pub epoch_size: Option<u64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Lock-free parallel updates; results are then not reproducible.
    #[arg(long)]
    pub hogwild_threads: Option<usize>,
    #[arg(long, value_enum)]
    pub browsing: Option<BrowsingArg>,
    /// Precomputed shifted-PMI TSV (default `<corpus>/spmi.tsv`, built when missing).
    #[arg(long)]
    pub spmi: Option<PathBuf>,
    #[arg(long)]
    pub shift_k: Option<u32>,
    #[arg(long)]
    pub min_pair_count: Option<u64>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Model directory, checkpoint file, `popularity` or `cocount`. Repeatable.
    #[arg(long = "model", required = true)]
    pub models: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Purchase-count bucket edges, e.g. `1,2,4,8,16,32`.
    #[arg(long, value_delimiter = ',')]
    pub buckets: Option<Vec<u64>>,
    #[arg(long)]
    pub unordered_pairs: bool,
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RecommendArgs {
    /// Model directory or checkpoint file (with `vocab.tsv` beside it).
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub query: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    #[arg(long)]
    pub baskets: Option<usize>,
    #[arg(long)]
    pub sessions: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub zero_purchase_fraction: Option<f64>,
    #[arg(long)]
    pub min_degree: Option<usize>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub decay: Option<f64>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            i32::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.global.seed.or(file.seed).unwrap_or(0);
    let threads = cli.global.threads.or(file.threads);
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::config("--threads must be at least 1"));
        }
        // Fails only when a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let echo = RunConfig {
        seed: Some(seed),
        threads,
        ..Default::default()
    };
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a, &file, echo),
        Command::Spmi(a) => cmd_spmi(a, &file, echo),
        Command::Train(a) => cmd_train(a, &file, echo),
        Command::Eval(a) => cmd_eval(a, &file, echo),
        Command::Recommend(a) => cmd_recommend(a),
        Command::Synth(a) => cmd_synth(a, &file, echo),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn fractions(v: [f64; 3]) -> Result<SplitFractions> {
    SplitFractions::new(v[0], v[1], v[2])
}

fn split_arg(v: Option<Vec<f64>>) -> Result<Option<[f64; 3]>> {
    match v {
        None => Ok(None),
        Some(v) => <[f64; 3]>::try_from(v)
            .map(Some)
            .map_err(|_| Error::config("--split takes exactly three fractions")),
    }
}

fn cmd_ingest(a: IngestArgs, file: &RunConfig, mut echo: RunConfig) -> Result<()> {
    let f = &file.ingest;
    let split = split_arg(a.split)?.or(f.split_fractions).unwrap_or([0.7, 0.15, 0.15]);
    let config = IngestConfig {
        min_item_purchases: a.min_purchases.or(f.min_item_purchases).unwrap_or(0),
        split_fractions: fractions(split)?,
        split_seed: echo.seed.unwrap_or(0),
        keep_basket_session_link: !a.no_session_link && f.keep_basket_session_link.unwrap_or(true),
    };
    let (corpus, vocab) = ingest(&a.events, &config)?;
    create_dir(&a.out)?;
    corpus.save_dir(&a.out, &vocab)?;
    echo.ingest = IngestSection {
        min_item_purchases: Some(config.min_item_purchases),
        split_fractions: Some(split),
        keep_basket_session_link: Some(config.keep_basket_session_link),
    };
    echo.save(&a.out.join(CONFIG_FILE))?;
    eprintln!(
        "{} items; baskets train/val/test {}/{}/{}; {} train sessions",
        vocab.len(),
        corpus.train_baskets().len(),
        corpus.val_baskets().len(),
        corpus.test_baskets().len(),
        corpus.train_sessions().len()
    );
    Ok(())
}

fn spmi_params(
    flag_shift: Option<u32>,
    flag_min: Option<u64>,
    file: &SpmiSection,
    negatives: usize,
) -> Result<(u32, u64)> {
    let shift = match flag_shift.or(file.shift_k) {
        Some(k) => k,
        None => u32::try_from(negatives).map_err(|_| Error::config("too many negatives"))?,
    };
    Ok((shift, flag_min.or(file.min_pair_count).unwrap_or(MIN_PAIR_COUNT_LARGE)))
}

fn session_spmi(corpus: &Corpus, shift: u32, min_count: u64) -> Result<SpmiMatrix> {
    build_spmi(
        &count_cooccurrences(corpus.train_sessions(), corpus.vocab_size()),
        shift,
        min_count,
    )
}

fn cmd_spmi(a: SpmiArgs, file: &RunConfig, mut echo: RunConfig) -> Result<()> {
    let negatives = file.train.negatives.unwrap_or(crate::trainer::DEFAULT_NEGATIVES);
    let (shift, min_count) = spmi_params(a.shift_k, a.min_pair_count, &file.spmi, negatives)?;
    let (corpus, _) = Corpus::load_dir(&a.corpus)?;
    let spmi = session_spmi(&corpus, shift, min_count)?;
    let out = a.out.unwrap_or_else(|| a.corpus.join(SPMI_FILE));
    spmi.save_tsv(&out)?;
    echo.spmi = SpmiSection {
        shift_k: Some(shift),
        min_pair_count: Some(min_count),
    };
    let echo_path = out.with_extension("config.toml");
    echo.save(&echo_path)?;
    eprintln!("{} cells kept", spmi.len());
    Ok(())
}

fn cmd_train(a: TrainArgs, file: &RunConfig, mut echo: RunConfig) -> Result<()> {
    let f = &file.train;
    let defaults = TrainConfig::default();
    let model = a.model.or(f.model).unwrap_or(ModelKind::Bb2vec);
    let loss = a.loss.or(f.loss).unwrap_or(LossArg::Rank);
    let lambda = a.lambda.or(f.lambda).unwrap_or(1.0);
    let browsing = a.browsing.or(f.browsing).unwrap_or(BrowsingArg::Spmi);
    let config = TrainConfig {
        dim: a.dim.or(f.dim).unwrap_or(defaults.dim),
        negatives: a.negatives.or(f.negatives).unwrap_or(defaults.negatives),
        base_lr: a.lr.or(f.learning_rate).unwrap_or(defaults.base_lr),
        neg_alpha: a.neg_alpha.or(f.neg_alpha).unwrap_or(defaults.neg_alpha),
        epoch_size: a.epoch_size.or(f.epoch_size),
        max_epochs: a.max_epochs.or(f.max_epochs).unwrap_or(defaults.max_epochs),
        patience: a.patience.or(f.patience).unwrap_or(defaults.patience),
        seed: echo.seed.unwrap_or(0),
        hogwild_threads: a.hogwild_threads.or(f.hogwild_threads).unwrap_or(1),
    };
    config.validate()?;
    if model == ModelKind::Prod2vec && a.lambda.is_some() {
        return Err(Error::config("--lambda only applies to --model bb2vec"));
    }

    let (corpus, vocab) = Corpus::load_dir(&a.corpus)?;
    create_dir(&a.out)?;
    let plan = match model {
        ModelKind::Prod2vec => ModelPlan::prod2vec(loss.into())?,
        ModelKind::Bb2vec => {
            let wiring = Bb2vecWiring::new(lambda)?;
            match browsing {
                BrowsingArg::Spmi => wiring.plan(loss.into())?,
                BrowsingArg::Skipgram => wiring.plan_with_browsing(loss.into(), Some(loss.into()))?,
            }
        }
    };
    let needs_spmi = plan
        .tasks
        .iter()
        .any(|t| t.source == crate::trainer::TaskSource::SpmiCells);
    let mut spmi_echo = SpmiSection::default();
    let spmi = if needs_spmi {
        let default_path = a.corpus.join(SPMI_FILE);
        let path = a.spmi.clone().or_else(|| default_path.exists().then_some(default_path));
        let m = match path {
            Some(p) => SpmiMatrix::load_tsv(&p)?,
            None => {
                let (shift, min_count) =
                    spmi_params(a.shift_k, a.min_pair_count, &file.spmi, config.negatives)?;
                let m = session_spmi(&corpus, shift, min_count)?;
                m.save_tsv(&a.out.join(SPMI_FILE))?;
                m
            }
        };
        spmi_echo = SpmiSection {
            shift_k: Some(m.shift_k()),
            min_pair_count: Some(m.min_pair_count()),
        };
        Some(m)
    } else {
        None
    };

    let outcome = train(&corpus, spmi.as_ref(), plan, config.clone())?;
    outcome.embeddings.save(&a.out.join(MODEL_FILE), true)?;
    outcome.embeddings.save_text(&a.out.join("vectors"), &vocab)?;
    fs::copy(a.corpus.join(VOCAB_FILE), a.out.join(VOCAB_FILE))
        .map_err(|e| Error::io(a.out.join(VOCAB_FILE), e))?;
    write_history(&a.out.join(HISTORY_FILE), &outcome.history)?;

    echo.spmi = spmi_echo;
    echo.train = TrainSection {
        model: Some(model),
        loss: Some(loss),
        dim: Some(config.dim),
        negatives: Some(config.negatives),
        learning_rate: Some(config.base_lr),
        neg_alpha: Some(config.neg_alpha),
        epoch_size: config.epoch_size,
        max_epochs: Some(config.max_epochs),
        patience: Some(config.patience),
        hogwild_threads: Some(config.hogwild_threads),
        lambda: (model == ModelKind::Bb2vec).then_some(lambda),
        browsing: (model == ModelKind::Bb2vec).then_some(browsing),
    };
    echo.save(&a.out.join(CONFIG_FILE))?;
    let best = outcome.history.get(outcome.best_epoch.saturating_sub(1));
    match best.and_then(|h| h.val_hitrate) {
        Some(v) => eprintln!("best epoch {} with validation HitRate@10 {v:.4}", outcome.best_epoch),
        None => eprintln!("no validation pairs; kept epoch {}", outcome.best_epoch),
    }
    Ok(())
}

/// `(checkpoint, vocabulary)` for a model directory or checkpoint path.
fn model_files(path: &Path) -> (PathBuf, PathBuf) {
    if path.is_dir() {
        (path.join(MODEL_FILE), path.join(VOCAB_FILE))
    } else {
        let dir = path.parent().unwrap_or(Path::new("."));
        (path.to_path_buf(), dir.join(VOCAB_FILE))
    }
}

fn load_model(path: &Path) -> Result<(EmbeddingSet, Vocab)> {
    let (model, vocab) = model_files(path);
    let set = EmbeddingSet::load(&model)?;
    let vocab = Vocab::load(&vocab)?;
    if vocab.len() != set.vocab_size() {
        return Err(Error::Format(format!(
            "vocabulary has {} items but the model has {}",
            vocab.len(),
            set.vocab_size()
        )));
    }
    Ok((set, vocab))
}

fn cmd_eval(a: EvalArgs, file: &RunConfig, mut echo: RunConfig) -> Result<()> {
    let f = &file.eval;
    let ks = a.ks.clone().or(f.ks.clone()).unwrap_or(vec![10, 50]);
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::config("--ks needs positive cut-offs"));
    }
    let edges_v = a.buckets.clone().or(f.buckets.clone()).unwrap_or_else(|| BucketEdges::default().edges().to_vec());
    let edges = BucketEdges::new(edges_v.clone())?;
    let unordered = a.unordered_pairs || f.unordered_pairs.unwrap_or(false);
    let split = a.split.or(f.split).unwrap_or(SplitArg::Test);

    let (corpus, vocab) = Corpus::load_dir(&a.corpus)?;
    let baskets = match split {
        SplitArg::Test => corpus.test_baskets(),
        SplitArg::Val => corpus.val_baskets(),
    };
    let order = if unordered {
        PairOrder::Unordered
    } else {
        PairOrder::Ordered
    };
    let pairs = extract_pairs_with(baskets, corpus.train_purchase_count(), order);
    if pairs.is_empty() {
        return Err(Error::Format(format!("the {split:?} split has no basket pairs to evaluate")));
    }

    let mut reports: Vec<(String, EvalReport)> = Vec::new();
    for m in &a.models {
        let report = match m.as_str() {
            "popularity" => evaluate(&PopularityModel::from_corpus(&corpus), &pairs, &ks, &edges),
            "cocount" => evaluate(&CoCountModel::from_corpus(&corpus), &pairs, &ks, &edges),
            path => {
                let (set, model_vocab) = load_model(Path::new(path))?;
                if model_vocab.tokens() != vocab.tokens() {
                    return Err(Error::Format(format!(
                        "model {path} was trained on a different vocabulary"
                    )));
                }
                let rec = EmbeddingRecommender::new(set.input(0), set.output(0));
                evaluate(&rec as &dyn Recommender, &pairs, &ks, &edges)
            }
        };
        reports.push((m.clone(), report));
    }

    create_dir(&a.out)?;
    write_report(&a.out.join(REPORT_FILE), &reports)?;
    write_breakdown(&a.out.join(BREAKDOWN_FILE), &reports, ks[0])?;
    echo.eval = EvalSection {
        ks: Some(ks.clone()),
        buckets: Some(edges_v),
        unordered_pairs: Some(unordered),
        split: Some(split),
    };
    echo.save(&a.out.join(CONFIG_FILE))?;

    let mut out = std::io::stdout().lock();
    let io = |e| Error::io(Path::new("<stdout>"), e);
    writeln!(out, "method\tpairs{}", ks.iter().map(|k| format!("\tHR@{k}\tNDCG@{k}")).collect::<String>()).map_err(io)?;
    for (name, r) in &reports {
        write!(out, "{name}\t{}", r.pairs).map_err(io)?;
        for i in 0..ks.len() {
            write!(out, "\t{:.4}\t{:.4}", r.hitrate[i], r.ndcg[i]).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

fn cmd_recommend(a: RecommendArgs) -> Result<()> {
    if a.n == 0 {
        return Err(Error::config("--n must be at least 1"));
    }
    let (set, vocab) = load_model(&a.model)?;
    let query = vocab
        .id(&a.query)
        .ok_or_else(|| Error::UnknownToken(a.query.clone()))?;
    let rec = EmbeddingRecommender::new(set.input(0), set.output(0));
    let list = rec.recommend(query, a.n);
    let mut out = std::io::stdout().lock();
    write_recommendations(&mut out, &vocab, query, &list)
        .map_err(|e| Error::io(Path::new("<stdout>"), e))
}

fn cmd_synth(a: SynthArgs, file: &RunConfig, mut echo: RunConfig) -> Result<()> {
    let f = &file.synth;
    let base = SynthSpec::default();
    let (dmin, dmax, decay) = match base.complements {
        ComplementSpec::Random {
            min_degree,
            max_degree,
            decay,
        } => (min_degree, max_degree, decay),
        ComplementSpec::Explicit(_) => unreachable!("default graph is random"),
    };
    let (smin, smax, sp) = match base.basket_size {
        SizeDistribution::TruncatedGeometric { min, max, p } => (min, max, p),
        _ => unreachable!("default basket size is geometric"),
    };
    let split = f.split_fractions.unwrap_or([0.7, 0.15, 0.15]);
    let resolved = SynthSection {
        vocab_size: Some(a.vocab_size.or(f.vocab_size).unwrap_or(base.vocab_size)),
        n_baskets: Some(a.baskets.or(f.n_baskets).unwrap_or(base.n_baskets)),
        n_sessions: Some(a.sessions.or(f.n_sessions).unwrap_or(base.n_sessions)),
        rho: Some(a.rho.or(f.rho).unwrap_or(base.rho)),
        zero_purchase_fraction: Some(
            a.zero_purchase_fraction
                .or(f.zero_purchase_fraction)
                .unwrap_or(base.zero_purchase_fraction),
        ),
        min_degree: Some(a.min_degree.or(f.min_degree).unwrap_or(dmin)),
        max_degree: Some(a.max_degree.or(f.max_degree).unwrap_or(dmax)),
        decay: Some(a.decay.or(f.decay).unwrap_or(decay)),
        basket_size_min: Some(f.basket_size_min.unwrap_or(smin)),
        basket_size_max: Some(f.basket_size_max.unwrap_or(smax)),
        basket_size_p: Some(f.basket_size_p.unwrap_or(sp)),
        split_fractions: Some(split),
    };
    let r = &resolved;
    let spec = SynthSpec {
        vocab_size: r.vocab_size.unwrap(),
        n_baskets: r.n_baskets.unwrap(),
        n_sessions: r.n_sessions.unwrap(),
        basket_size: SizeDistribution::TruncatedGeometric {
            min: r.basket_size_min.unwrap(),
            max: r.basket_size_max.unwrap(),
            p: r.basket_size_p.unwrap(),
        },
        session_size: None,
        complements: ComplementSpec::Random {
            min_degree: r.min_degree.unwrap(),
            max_degree: r.max_degree.unwrap(),
            decay: r.decay.unwrap(),
        },
        rho: r.rho.unwrap(),
        zero_purchase_fraction: r.zero_purchase_fraction.unwrap(),
        split_fractions: fractions(split)?,
        seed: echo.seed.unwrap_or(0),
    };
    let out = generate(&spec)?;
    create_dir(&a.out)?;
    out.write_events(&a.out.join("events.tsv"))?;
    out.ground_truth.write_tsv(&a.out.join("ground_truth.tsv"), &out.vocab)?;
    write_file(&a.out.join("complements.tsv"), |w| {
        writeln!(w, "item\tcomplement\tweight\tzero_purchase")?;
        for k in 0..spec.vocab_size {
            let k = ItemId::from(k);
            for &(m, wt) in out.graph.complements(k) {
                writeln!(
                    w,
                    "{}\t{}\t{wt}\t{}",
                    out.vocab.token(k),
                    out.vocab.token(m),
                    out.is_zero_purchase(k)
                )?;
            }
        }
        Ok(())
    })?;
    echo.synth = resolved;
    echo.save(&a.out.join(CONFIG_FILE))?;
    eprintln!(
        "{} units written; {} zero-purchase items",
        out.units.len(),
        out.zero_purchase.iter().filter(|z| **z).count()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("seed = 3\n[train]\ndim = 8\n").is_ok());
        assert!(toml::from_str::<RunConfig>("[train]\ndimension = 8\n").is_err());
        assert!(toml::from_str::<RunConfig>("colour = 1\n").is_err());
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig {
            seed: Some(4),
            train: TrainSection {
                model: Some(ModelKind::Bb2vec),
                loss: Some(LossArg::Rank),
                lambda: Some(2.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), c);
        assert!(text.contains("model = \"bb2vec\""));
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(main_with_args(["bb2vec", "bogus"]), 1);
        assert_eq!(main_with_args(["bb2vec", "train", "--corpus", "x", "--out", "y", "--model", "word2vec"]), 1);
        assert_eq!(main_with_args(["bb2vec", "--help"]), 0);
    }

    #[test]
    fn model_paths_resolve_to_files() {
        let dir = tempfile::tempdir().unwrap();
        let (m, v) = model_files(dir.path());
        assert_eq!(m, dir.path().join(MODEL_FILE));
        assert_eq!(v, dir.path().join(VOCAB_FILE));
        let (m, v) = model_files(&dir.path().join("other.bin"));
        assert_eq!(m, dir.path().join("other.bin"));
        assert_eq!(v, dir.path().join(VOCAB_FILE));
    }
}
