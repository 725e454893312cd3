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

//! Embedding matrices with per-cell AdaGrad state, scoring and persistence.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::corpus::{write_file, ItemId, Vocab};
use crate::error::{Error, Result};

/// Standard deviation of the initial Gaussian.
pub const INIT_STD: f64 = 0.1;
/// Added to the AdaGrad denominator after the square root.
pub const ADAGRAD_EPS: f64 = 1e-8;
pub const DEFAULT_LEARNING_RATE: f64 = 0.05;

/// A row-major `rows x dim` matrix plus its AdaGrad accumulator.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
    accum: Vec<f64>,
    learning_rate: Option<f64>,
}

impl EmbeddingMatrix {
    /// I.i.d. `N(0, 0.1)` entries, zero accumulators.
    pub fn init(rows: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::init_stream(rows, dim, seed, 0)
    }

    /// Like [`EmbeddingMatrix::init`] drawing from an independent stream of the same seed.
    pub fn init_stream(rows: usize, dim: usize, seed: u64, stream: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("embedding dimension must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let values = (0..rows * dim).map(|_| normal.sample(&mut rng)).collect();
        Ok(EmbeddingMatrix {
            rows,
            dim,
            values,
            accum: vec![0.0; rows * dim],
            learning_rate: None,
        })
    }

    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dim,
            values: vec![0.0; rows * dim],
            accum: vec![0.0; rows * dim],
            learning_rate: None,
        }
    }

    pub fn from_values(rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() != rows * dim {
            return Err(Error::config(format!(
                "expected {rows}x{dim} values, got {}",
                values.len()
            )));
        }
        Ok(EmbeddingMatrix {
            rows,
            dim,
            accum: vec![0.0; values.len()],
            values,
            learning_rate: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn accumulators(&self) -> &[f64] {
        &self.accum
    }

    #[inline]
    pub fn row(&self, id: ItemId) -> &[f64] {
        let start = id.index() * self.dim;
        &self.values[start..start + self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, id: ItemId) -> &mut [f64] {
        let start = id.index() * self.dim;
        &mut self.values[start..start + self.dim]
    }

    pub fn learning_rate(&self) -> Option<f64> {
        self.learning_rate
    }

    /// Per-matrix learning rate replacing the trainer's base rate.
    pub fn set_learning_rate(&mut self, lr: Option<f64>) {
        self.learning_rate = lr;
    }

    /// `accum += g^2; value -= lr * g / (sqrt(accum) + eps)` for every cell of `row`.
    /// Rejects non-finite gradients before touching anything.
    pub fn adagrad_step(&mut self, row: ItemId, grad: &[f64], base_lr: f64) -> Result<()> {
        debug_assert_eq!(grad.len(), self.dim);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { row });
        }
        let lr = self.learning_rate.unwrap_or(base_lr);
        let start = row.index() * self.dim;
        let values = &mut self.values[start..start + self.dim];
        let accum = &mut self.accum[start..start + self.dim];
        for ((v, a), &g) in values.iter_mut().zip(accum.iter_mut()).zip(grad) {
            *a += g * g;
            *v -= lr * g / (a.sqrt() + ADAGRAD_EPS);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Word-vector text format: `rows dim`, then `token v1 .. vd` per line.
    pub fn save_text(&self, path: &Path, vocab: &Vocab) -> Result<()> {
        if vocab.len() != self.rows {
            return Err(Error::config(format!(
                "vocabulary has {} tokens, matrix has {} rows",
                vocab.len(),
                self.rows
            )));
        }
        write_file(path, |w| {
            writeln!(w, "{} {}", self.rows, self.dim)?;
            for (i, token) in vocab.tokens().iter().enumerate() {
                w.write_all(token.as_bytes())?;
                for v in &self.values[i * self.dim..(i + 1) * self.dim] {
                    write!(w, " {v}")?;
                }
                w.write_all(b"\n")?;
            }
            Ok(())
        })
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `v'_candidate . v_query`: query through the input matrix, candidate through the output one.
#[inline]
pub fn score(
    input: &EmbeddingMatrix,
    output: &EmbeddingMatrix,
    query: ItemId,
    candidate: ItemId,
) -> f64 {
    dot(output.row(candidate), input.row(query))
}

/// `L` pairs of input/output matrices over one vocabulary. Pair `p` is labelled, e.g. `B`, `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    labels: Vec<String>,
    inputs: Vec<EmbeddingMatrix>,
    outputs: Vec<EmbeddingMatrix>,
}

impl EmbeddingSet {
    pub fn new(labels: Vec<String>, pairs: Vec<(EmbeddingMatrix, EmbeddingMatrix)>) -> Result<Self> {
        if labels.len() != pairs.len() || pairs.is_empty() {
            return Err(Error::config("need one label per matrix pair and at least one pair"));
        }
        let rows = pairs[0].0.rows;
        for (v, vp) in &pairs {
            if v.rows != rows || vp.rows != rows {
                return Err(Error::config("all matrices must share the vocabulary size"));
            }
            if v.dim != vp.dim {
                return Err(Error::config("input and output matrices of a pair must share dim"));
            }
        }
        let (inputs, outputs) = pairs.into_iter().unzip();
        Ok(EmbeddingSet {
            labels,
            inputs,
            outputs,
        })
    }

    /// Gaussian initialisation; input `p` draws from stream `2p`, output `p` from `2p + 1`,
    /// so adding pairs never changes earlier matrices.
    pub fn init(vocab_size: usize, dim: usize, labels: &[&str], seed: u64) -> Result<Self> {
        let pairs = (0..labels.len() as u64)
            .map(|p| {
                Ok((
                    EmbeddingMatrix::init_stream(vocab_size, dim, seed, 2 * p)?,
                    EmbeddingMatrix::init_stream(vocab_size, dim, seed, 2 * p + 1)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels.iter().map(|l| l.to_string()).collect(), pairs)
    }

    pub fn num_pairs(&self) -> usize {
        self.inputs.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.inputs[0].rows
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn input(&self, p: usize) -> &EmbeddingMatrix {
        &self.inputs[p]
    }

    pub fn output(&self, p: usize) -> &EmbeddingMatrix {
        &self.outputs[p]
    }

    pub fn input_mut(&mut self, p: usize) -> &mut EmbeddingMatrix {
        &mut self.inputs[p]
    }

    pub fn output_mut(&mut self, p: usize) -> &mut EmbeddingMatrix {
        &mut self.outputs[p]
    }

    /// Input matrix `a` and output matrix `b`, both mutable.
    pub fn pair_mut(&mut self, a: usize, b: usize) -> (&mut EmbeddingMatrix, &mut EmbeddingMatrix) {
        (&mut self.inputs[a], &mut self.outputs[b])
    }

    pub fn is_finite(&self) -> bool {
        self.inputs.iter().chain(&self.outputs).all(|m| m.is_finite())
    }

    /// Binary checkpoint with a SHA-256 trailer. Accumulators are stored when `with_accumulators`.
    pub fn save(&self, path: &Path, with_accumulators: bool) -> Result<()> {
        let bytes = self.to_bytes(with_accumulators);
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// One word-vector text file per matrix: `V_<label>.txt` and `Vprime_<label>.txt`.
    pub fn save_text(&self, dir: &Path, vocab: &Vocab) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (p, label) in self.labels.iter().enumerate() {
            self.inputs[p].save_text(&dir.join(format!("V_{label}.txt")), vocab)?;
            self.outputs[p].save_text(&dir.join(format!("Vprime_{label}.txt")), vocab)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self, with_accumulators: bool) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(with_accumulators as u32).to_le_bytes());
        out.extend_from_slice(&(self.labels.len() as u32).to_le_bytes());
        for (p, label) in self.labels.iter().enumerate() {
            out.extend_from_slice(&(label.len() as u32).to_le_bytes());
            out.extend_from_slice(label.as_bytes());
            for m in [&self.inputs[p], &self.outputs[p]] {
                out.extend_from_slice(&(m.rows as u64).to_le_bytes());
                out.extend_from_slice(&(m.dim as u64).to_le_bytes());
                out.extend_from_slice(&m.learning_rate.unwrap_or(f64::NAN).to_le_bytes());
                for v in &m.values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                if with_accumulators {
                    for a in &m.accum {
                        out.extend_from_slice(&a.to_le_bytes());
                    }
                }
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        const HEAD: usize = 8 + 4;
        const DIGEST: usize = 32;
        if bytes.len() < HEAD + DIGEST || &bytes[..8] != MAGIC {
            return Err(Error::Format("not an embedding checkpoint".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Version {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Format("checksum mismatch (truncated or corrupted)".into()));
        }

        let mut r = Reader { buf: body, pos: HEAD };
        let with_accum = r.u32()? != 0;
        let n = r.u32()? as usize;
        let mut labels = Vec::with_capacity(n);
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            let len = r.u32()? as usize;
            let label = String::from_utf8(r.take(len)?.to_vec())
                .map_err(|_| Error::Format("label is not UTF-8".into()))?;
            labels.push(label);
            let mut read_matrix = || -> Result<EmbeddingMatrix> {
                let rows = r.u64()? as usize;
                let dim = r.u64()? as usize;
                let lr = r.f64()?;
                let cells = rows
                    .checked_mul(dim)
                    .ok_or_else(|| Error::Format("matrix shape overflows".into()))?;
                let values = r.f64s(cells)?;
                let accum = if with_accum {
                    r.f64s(cells)?
                } else {
                    vec![0.0; cells]
                };
                Ok(EmbeddingMatrix {
                    rows,
                    dim,
                    values,
                    accum,
                    learning_rate: if lr.is_nan() { None } else { Some(lr) },
                })
            };
            let input = read_matrix()?;
            let output = read_matrix()?;
            pairs.push((input, output));
        }
        if r.pos != body.len() {
            return Err(Error::Format("trailing bytes".into()));
        }
        Self::new(labels, pairs).map_err(|e| Error::Format(e.to_string()))
    }
}

const MAGIC: &[u8; 8] = b"BB2VEMB\0";
const FORMAT_VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format("unexpected end of data".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("size".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Lock-free view of a matrix for multi-threaded (hogwild) updates.
/// Cells are `f64` bit patterns in relaxed atomics; concurrent updates may interleave.
pub(crate) struct SharedMatrix {
    dim: usize,
    learning_rate: Option<f64>,
    values: Vec<AtomicU64>,
    accum: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub(crate) fn from_matrix(m: &EmbeddingMatrix) -> Self {
        let atoms = |v: &[f64]| v.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        SharedMatrix {
            dim: m.dim,
            learning_rate: m.learning_rate,
            values: atoms(&m.values),
            accum: atoms(&m.accum),
        }
    }

    pub(crate) fn store_into(&self, m: &mut EmbeddingMatrix) {
        for (dst, a) in m.values.iter_mut().zip(&self.values) {
            *dst = f64::from_bits(a.load(Ordering::Relaxed));
        }
        for (dst, a) in m.accum.iter_mut().zip(&self.accum) {
            *dst = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    pub(crate) fn read_row(&self, id: ItemId, out: &mut [f64]) {
        let start = id.index() * self.dim;
        for (o, a) in out.iter_mut().zip(&self.values[start..start + self.dim]) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    pub(crate) fn adagrad_step(&self, row: ItemId, grad: &[f64], base_lr: f64) -> Result<()> {
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { row });
        }
        let lr = self.learning_rate.unwrap_or(base_lr);
        let start = row.index() * self.dim;
        for (k, &g) in grad.iter().enumerate() {
            let acc = &self.accum[start + k];
            let a = f64::from_bits(acc.load(Ordering::Relaxed)) + g * g;
            acc.store(a.to_bits(), Ordering::Relaxed);
            let val = &self.values[start + k];
            let v = f64::from_bits(val.load(Ordering::Relaxed)) - lr * g / (a.sqrt() + ADAGRAD_EPS);
            val.store(v.to_bits(), Ordering::Relaxed);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        let a = EmbeddingMatrix::init(30, 4, 7).unwrap();
        let b = EmbeddingMatrix::init(30, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, EmbeddingMatrix::init(30, 4, 8).unwrap());
        assert!(a.accumulators().iter().all(|&x| x == 0.0));
        assert!(EmbeddingMatrix::init(30, 0, 7).is_err());
    }

    #[test]
    fn init_moments() {
        let m = EmbeddingMatrix::init(1000, 1000, 42).unwrap();
        let n = m.values().len() as f64;
        let mean = m.values().iter().sum::<f64>() / n;
        let var = m.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-3, "mean {mean}");
        assert!((var.sqrt() - 0.1).abs() < 1e-3, "std {}", var.sqrt());
    }

    #[test]
    fn unit_vector_scores() {
        let mut input = EmbeddingMatrix::zeros(2, 3);
        let mut output = EmbeddingMatrix::zeros(2, 3);
        input.row_mut(ItemId(0))[0] = 1.0;
        output.row_mut(ItemId(1))[0] = 1.0;
        assert_eq!(score(&input, &output, ItemId(0), ItemId(1)), 1.0);
        assert_eq!(score(&input, &output, ItemId(0), ItemId(0)), 0.0);
    }

    #[test]
    fn score_matches_naive_loop() {
        let input = EmbeddingMatrix::init(5, 7, 1).unwrap();
        let output = EmbeddingMatrix::init_stream(5, 7, 1, 1).unwrap();
        for q in 0..5 {
            for c in 0..5 {
                let mut naive = 0.0;
                for k in 0..7 {
                    naive += output.values()[c * 7 + k] * input.values()[q * 7 + k];
                }
                let s = score(&input, &output, ItemId(q as u32), ItemId(c as u32));
                assert!((s - naive).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn adagrad_first_and_second_step() {
        let mut m = EmbeddingMatrix::zeros(1, 1);
        m.adagrad_step(ItemId(0), &[1.0], 0.05).unwrap();
        let first = m.values()[0];
        assert!((first + 0.05 / (1.0 + ADAGRAD_EPS)).abs() < 1e-15);
        m.adagrad_step(ItemId(0), &[1.0], 0.05).unwrap();
        let second = m.values()[0] - first;
        assert!((second + 0.05 / (2f64.sqrt() + ADAGRAD_EPS)).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut m = EmbeddingMatrix::init(2, 3, 5).unwrap();
        let before = m.clone();
        m.adagrad_step(ItemId(1), &[0.0; 3], 0.05).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn non_finite_gradient_is_rejected_without_writes() {
        let mut m = EmbeddingMatrix::init(2, 3, 5).unwrap();
        let before = m.clone();
        let err = m.adagrad_step(ItemId(1), &[0.1, f64::NAN, 0.2], 0.05).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { row: ItemId(1) }));
        assert_eq!(m, before);
    }

    #[test]
    fn learning_rate_override() {
        let mut m = EmbeddingMatrix::zeros(1, 1);
        m.set_learning_rate(Some(0.5));
        m.adagrad_step(ItemId(0), &[2.0], 0.05).unwrap();
        assert!((m.values()[0] + 0.5 * 2.0 / (2.0 + ADAGRAD_EPS)).abs() < 1e-15);
    }

    fn toy_set() -> EmbeddingSet {
        let mut set = EmbeddingSet::init(6, 3, &["B", "S"], 11).unwrap();
        set.input_mut(0).adagrad_step(ItemId(2), &[0.3, -0.1, 0.7], 0.05).unwrap();
        set.output_mut(1).set_learning_rate(Some(0.01));
        set
    }

    #[test]
    fn save_load_is_bitwise() {
        let set = toy_set();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        set.save(&path, true).unwrap();
        assert_eq!(EmbeddingSet::load(&path).unwrap(), set);

        set.save(&path, false).unwrap();
        let back = EmbeddingSet::load(&path).unwrap();
        for p in 0..2 {
            assert_eq!(back.input(p).values(), set.input(p).values());
            assert!(back.input(p).accumulators().iter().all(|&a| a == 0.0));
        }
    }

    #[test]
    fn corrupted_or_truncated_files_are_rejected() {
        let bytes = toy_set().to_bytes(true);
        let mut flipped = bytes.clone();
        flipped[40] ^= 0x01;
        assert!(matches!(EmbeddingSet::from_bytes(&flipped), Err(Error::Format(_))));
        assert!(matches!(
            EmbeddingSet::from_bytes(&bytes[..bytes.len() - 9]),
            Err(Error::Format(_))
        ));
        assert!(matches!(EmbeddingSet::from_bytes(b"hello"), Err(Error::Format(_))));

        let mut other_version = bytes.clone();
        other_version[8..12].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            EmbeddingSet::from_bytes(&other_version),
            Err(Error::Version { found: 7, .. })
        ));
    }

    #[test]
    fn resumed_update_matches_uninterrupted() {
        let mut live = toy_set();
        let grad = [0.2, 0.4, -0.3];
        live.input_mut(0).adagrad_step(ItemId(2), &grad, 0.05).unwrap();
        let mut resumed = EmbeddingSet::from_bytes(&live.to_bytes(true)).unwrap();

        live.input_mut(0).adagrad_step(ItemId(2), &grad, 0.05).unwrap();
        resumed.input_mut(0).adagrad_step(ItemId(2), &grad, 0.05).unwrap();
        assert_eq!(live, resumed);
    }

    #[test]
    fn set_init_is_stable_under_extra_pairs() {
        let one = EmbeddingSet::init(6, 3, &["B"], 11).unwrap();
        let two = EmbeddingSet::init(6, 3, &["B", "S"], 11).unwrap();
        assert_eq!(one.input(0), two.input(0));
        assert_eq!(one.output(0), two.output(0));
        assert_ne!(two.input(0), two.input(1));
    }

    #[test]
    fn text_export_layout() {
        let set = toy_set();
        let vocab = Vocab::numbered(6);
        let dir = tempfile::tempdir().unwrap();
        set.save_text(dir.path(), &vocab).unwrap();
        let text = fs::read_to_string(dir.path().join("Vprime_S.txt")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("6 3"));
        let first: Vec<&str> = lines.next().unwrap().split(' ').collect();
        assert_eq!(first[0], "item_0");
        let parsed: Vec<f64> = first[1..].iter().map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed, set.output(1).row(ItemId(0)));
    }

    #[test]
    fn shared_matrix_matches_serial_updates() {
        let mut serial = EmbeddingMatrix::init(3, 4, 9).unwrap();
        let shared = SharedMatrix::from_matrix(&serial);
        let grad = [0.1, -0.2, 0.3, 0.0];
        serial.adagrad_step(ItemId(1), &grad, 0.05).unwrap();
        shared.adagrad_step(ItemId(1), &grad, 0.05).unwrap();
        let mut back = EmbeddingMatrix::zeros(3, 4);
        shared.store_into(&mut back);
        assert_eq!(back.values(), serial.values());
        assert_eq!(back.accumulators(), serial.accumulators());
        let mut row = [0.0; 4];
        shared.read_row(ItemId(1), &mut row);
        assert_eq!(row, serial.row(ItemId(1)));
    }
}
