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

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::ItemId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus is empty after filtering")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("item {0} has no occurrences in the training data")]
    UnseenItem(ItemId),

    #[error("unknown item token `{0}`")]
    UnknownToken(String),

    #[error("malformed model file: {0}")]
    Format(String),

    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("non-finite gradient for row {row}")]
    NonFiniteGradient { row: ItemId },

    #[error("training diverged at epoch {epoch}, step {step} (task {task}): loss = {loss}")]
    Divergence {
        epoch: usize,
        step: u64,
        task: usize,
        loss: f64,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig(message.into())
    }

    /// Process exit code for this error: 1 usage, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::EmptyCorpus
            | Error::UnseenItem(_)
            | Error::UnknownToken(_)
            | Error::Format(_)
            | Error::Version { .. } => 2,
            Error::NonFiniteGradient { .. } | Error::Divergence { .. } => 3,
        }
    }
}
