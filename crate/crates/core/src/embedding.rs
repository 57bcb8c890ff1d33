use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{dot, norm};
use crate::sgns::TrainingConfig;
use crate::text::Vocabulary;

/// A trained word embedding. Immutable once built.
///
/// `input_vectors` are the vectors served to every consumer; the context
/// (`output`) vectors are kept so a stored model reproduces training exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vocabulary,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
    config: TrainingConfig,
}

/// One nearest-neighbour hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<'a> {
    pub word: &'a str,
    pub index: usize,
    pub similarity: f64,
}

impl EmbeddingModel {
    /// Assembles a model from row-major `|V| x dim` matrices.
    pub fn from_parts(
        vocab: Vocabulary,
        input: Vec<f32>,
        output: Vec<f32>,
        config: TrainingConfig,
    ) -> Result<Self> {
        let dim = config.dim;
        Error::check_len(vocab.len() * dim, input.len())?;
        Error::check_len(vocab.len() * dim, output.len())?;
        if input.iter().chain(&output).any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("embedding contains non-finite values".into()));
        }
        Ok(EmbeddingModel {
            vocab,
            dim,
            input,
            output,
            config,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn input_vectors(&self) -> &[f32] {
        &self.input
    }

    pub fn output_vectors(&self) -> &[f32] {
        &self.output
    }

    /// Input vector of the word at vocabulary position `index`.
    pub fn row(&self, index: usize) -> &[f32] {
        &self.input[index * self.dim..(index + 1) * self.dim]
    }

    /// Lookup is exact: callers must pass already-tokenized (lowercase) words.
    pub fn vector(&self, word: &str) -> Result<&[f32]> {
        self.vocab.require(word).map(|i| self.row(i))
    }

    /// Top-`k` words by cosine similarity to `query`, skipping `exclude`.
    ///
    /// Results are sorted by descending similarity; exact ties go to the lower
    /// vocabulary index. Rows with zero norm score 0.
    pub fn nearest_neighbors<Q: Copy + Into<f64>>(
        &self,
        query: &[Q],
        k: usize,
        exclude: &[&str],
    ) -> Result<Vec<Neighbor<'_>>> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        Error::check_len(self.dim, query.len())?;
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::ZeroVector);
        }
        let skip: Vec<usize> = exclude.iter().filter_map(|w| self.vocab.index_of(w)).collect();
        let mut hits: Vec<(usize, f64)> = (0..self.vocab.len())
            .filter(|i| !skip.contains(i))
            .map(|i| {
                let r = self.row(i);
                let rn = norm(r);
                let sim = if rn == 0.0 { 0.0 } else { dot(query, r) / (qn * rn) };
                (i, sim)
            })
            .collect();
        let order = |a: &(usize, f64), b: &(usize, f64)| -> Ordering {
            b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
        };
        if k < hits.len() {
            hits.select_nth_unstable_by(k - 1, order);
            hits.truncate(k);
        }
        hits.sort_by(order);
        Ok(hits
            .into_iter()
            .map(|(index, similarity)| Neighbor {
                word: self.vocab.words()[index].as_str(),
                index,
                similarity,
            })
            .collect())
    }
}

/// Cosine similarity of two equal-length, non-zero vectors.
pub fn cosine<A: Copy + Into<f64>, B: Copy + Into<f64>>(a: &[A], b: &[B]) -> Result<f64> {
    Error::check_len(a.len(), b.len())?;
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}
