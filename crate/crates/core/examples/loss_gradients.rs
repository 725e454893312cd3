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

//! Compares the analytic gradients of the three losses with central differences.

use bb2vec::corpus::ItemId;
use bb2vec::losses::{loss_classification, loss_mf, loss_ranking, LossEval, MfCell, PairExample};
use bb2vec::model::EmbeddingMatrix;

const H: f64 = 1e-5;

/// Largest absolute gap between analytic and numeric input-row gradients.
fn worst_gap(
    f: &dyn Fn(&EmbeddingMatrix, &EmbeddingMatrix) -> LossEval,
    input: &EmbeddingMatrix,
    output: &EmbeddingMatrix,
) -> f64 {
    let analytic = f(input, output).grads;
    let mut worst: f64 = 0.0;
    for (id, g) in analytic.input.iter() {
        for d in 0..input.dim() {
            let mut plus = input.clone();
            plus.row_mut(id)[d] += H;
            let mut minus = input.clone();
            minus.row_mut(id)[d] -= H;
            let numeric = (f(&plus, output).loss - f(&minus, output).loss) / (2.0 * H);
            worst = worst.max((numeric - g[d]).abs());
        }
    }
    worst
}

fn main() -> bb2vec::error::Result<()> {
    let input = EmbeddingMatrix::init(6, 4, 11)?;
    let output = EmbeddingMatrix::init_stream(6, 4, 11, 1)?;
    let ex = PairExample {
        input: ItemId(0),
        output: ItemId(1),
        negatives: vec![ItemId(2), ItemId(3), ItemId(2)],
    };
    let cell = MfCell { i: ItemId(4), j: ItemId(5), target: 0.7 };

    let class = |i: &EmbeddingMatrix, o: &EmbeddingMatrix| loss_classification(&ex, i, o);
    let rank = |i: &EmbeddingMatrix, o: &EmbeddingMatrix| loss_ranking(&ex, i, o);
    let mf = |i: &EmbeddingMatrix, o: &EmbeddingMatrix| loss_mf(&cell, i, o);
    println!("classification  loss {:.6}  worst gap {:.2e}", class(&input, &output).loss, worst_gap(&class, &input, &output));
    println!("ranking         loss {:.6}  worst gap {:.2e}", rank(&input, &output).loss, worst_gap(&rank, &input, &output));
    println!("factorisation   loss {:.6}  worst gap {:.2e}", mf(&input, &output).loss, worst_gap(&mf, &input, &output));
    Ok(())
}
