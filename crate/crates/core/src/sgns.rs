//! Skip-gram with negative sampling.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::text::Vocabulary;

const UNIGRAM_POWER: f64 = 0.75;
const MAX_NEGATIVE_REDRAWS: usize = 16;

// Independent ChaCha streams so that changing one consumer does not shift
// the draws of another.
const STREAM_INIT: u64 = 0;
const STREAM_WINDOW: u64 = 1;
const STREAM_NEGATIVES: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainingConfig {
    pub dim: usize,
    /// Maximum context radius; the radius used at each position is drawn
    /// uniformly from `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_start: f32,
    pub lr_end: f32,
    pub min_count: u64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 64,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            min_count: 2,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.dim < 2 {
            return fail("dim must be at least 2");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if self.negatives < 1 {
            return fail("negatives must be at least 1");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.min_count < 1 {
            return fail("min_count must be at least 1");
        }
        if !(self.lr_end > 0.0 && self.lr_end <= self.lr_start && self.lr_start.is_finite()) {
            return fail("learning rates must satisfy 0 < lr_end <= lr_start");
        }
        Ok(())
    }
}

/// Unigram distribution raised to the 3/4 power, used to draw negatives.
#[derive(Debug, Clone)]
pub struct NegativeTable {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NegativeTable {
    pub fn new(vocab: &Vocabulary) -> Self {
        Self::from_counts(vocab.counts())
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        assert!(!counts.is_empty(), "negative table needs at least one word");
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| libm::pow(c as f64, UNIGRAM_POWER))
            .collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        NegativeTable {
            probabilities,
            cumulative,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1)
    }
}

/// Loss and gradients of one positive pair plus its negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients<T> {
    pub loss: T,
    pub grad_v: Vec<T>,
    pub grad_u_pos: Vec<T>,
    pub grad_u_negs: Vec<Vec<T>>,
}

/// Evaluates `-ln σ(v·u_pos) - Σ ln σ(-v·u_neg)` and its exact gradients.
pub fn sgns_step<T: Scalar>(v: &[T], u_pos: &[T], u_negs: &[&[T]]) -> Result<SgnsGradients<T>> {
    let dim = v.len();
    Error::check_len(dim, u_pos.len())?;
    let mut negs = Vec::with_capacity(dim * u_negs.len());
    for u in u_negs {
        Error::check_len(dim, u.len())?;
        negs.extend_from_slice(u);
    }
    let mut grad_v = vec![T::ZERO; dim];
    let mut grad_u_pos = vec![T::ZERO; dim];
    let mut grad_negs = vec![T::ZERO; negs.len()];
    let loss = sgns_kernel(v, u_pos, &negs, &mut grad_v, &mut grad_u_pos, &mut grad_negs);
    Ok(SgnsGradients {
        loss,
        grad_v,
        grad_u_pos,
        grad_u_negs: grad_negs.chunks(dim.max(1)).map(<[T]>::to_vec).collect(),
    })
}

/// Flat-buffer form of [`sgns_step`]; `negs` and `grad_negs` hold one row of
/// `v.len()` entries per negative. Gradient buffers are overwritten.
fn sgns_kernel<T: Scalar>(
    v: &[T],
    u_pos: &[T],
    negs: &[T],
    grad_v: &mut [T],
    grad_u_pos: &mut [T],
    grad_negs: &mut [T],
) -> T {
    let dim = v.len();
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::ZERO, |acc, (&x, &y)| acc + x * y);

    let s_pos = dot(v, u_pos);
    // d/ds [-ln σ(s)] = σ(s) - 1
    let g_pos = s_pos.sigmoid() - T::ONE;
    let mut loss = (-s_pos).softplus();
    for i in 0..dim {
        grad_v[i] = g_pos * u_pos[i];
        grad_u_pos[i] = g_pos * v[i];
    }
    if dim == 0 {
        return loss;
    }
    for (u, gu) in negs.chunks(dim).zip(grad_negs.chunks_mut(dim)) {
        let s = dot(v, u);
        // d/ds [-ln σ(-s)] = σ(s)
        let g = s.sigmoid();
        loss += s.softplus();
        for i in 0..dim {
            grad_v[i] += g * u[i];
            gu[i] = g * v[i];
        }
    }
    loss
}

/// Per-epoch diagnostics collected during training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    /// Mean SGNS loss per (center, context) pair, one entry per epoch.
    pub epoch_mean_loss: Vec<f64>,
    pub total_pairs: u64,
}

pub fn train_embeddings<S: AsRef<str>>(
    tokens: &[S],
    config: &TrainingConfig,
) -> Result<EmbeddingModel> {
    train_embeddings_with_report(tokens, config).map(|(model, _)| model)
}

/// Single-threaded SGD over every (center, context) pair of the token stream.
///
/// Tokens below `min_count` are removed before pairing. Identical inputs give
/// a bit-identical model.
pub fn train_embeddings_with_report<S: AsRef<str>>(
    tokens: &[S],
    config: &TrainingConfig,
) -> Result<(EmbeddingModel, TrainingReport)> {
    config.validate()?;
    let vocab = Vocabulary::build(tokens, config.min_count)?;
    let stream: Vec<usize> = tokens
        .iter()
        .filter_map(|t| vocab.index_of(t.as_ref()))
        .collect();
    let dim = config.dim;
    let rows = vocab.len();
    let table = NegativeTable::new(&vocab);

    let mut init_rng = stream_rng(config.seed, STREAM_INIT);
    let half = 0.5 / dim as f32;
    let mut input: Vec<f32> = (0..rows * dim)
        .map(|_| (init_rng.random::<f32>() * 2.0 - 1.0) * half)
        .collect();
    let mut output = vec![0.0f32; rows * dim];

    // Radii are drawn up front so the total pair count, and with it the
    // learning-rate schedule, is known before the first update.
    let n = stream.len();
    let mut window_rng = stream_rng(config.seed, STREAM_WINDOW);
    let radii: Vec<u32> = (0..n * config.epochs)
        .map(|_| window_rng.random_range(1..=config.window as u32))
        .collect();
    let total_pairs: u64 = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| context_span(i % n, r as usize, n).count() as u64)
        .sum();

    let mut neg_rng = stream_rng(config.seed, STREAM_NEGATIVES);
    let k = config.negatives;
    let mut v_buf = vec![0.0f32; dim];
    let mut pos_buf = vec![0.0f32; dim];
    let mut neg_buf = vec![0.0f32; k * dim];
    let mut neg_ids = vec![0usize; k];
    let mut grad_v = vec![0.0f32; dim];
    let mut grad_pos = vec![0.0f32; dim];
    let mut grad_negs = vec![0.0f32; k * dim];

    let lr_drop = (config.lr_start - config.lr_end) as f64;
    let mut done: u64 = 0;
    let mut epoch_mean_loss = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut loss_sum = 0.0f64;
        let mut pairs = 0u64;
        for pos in 0..n {
            let radius = radii[epoch * n + pos] as usize;
            let center = stream[pos];
            for ctx in context_span(pos, radius, n) {
                let context = stream[ctx];
                let progress = done as f64 / total_pairs as f64;
                let lr = (config.lr_start as f64 - lr_drop * progress) as f32;

                for id in neg_ids.iter_mut() {
                    let mut draw = table.sample(&mut neg_rng);
                    let mut redraws = 0;
                    while draw == context && redraws < MAX_NEGATIVE_REDRAWS {
                        draw = table.sample(&mut neg_rng);
                        redraws += 1;
                    }
                    *id = draw;
                }

                v_buf.copy_from_slice(row(&input, center, dim));
                pos_buf.copy_from_slice(row(&output, context, dim));
                for (j, &id) in neg_ids.iter().enumerate() {
                    neg_buf[j * dim..(j + 1) * dim].copy_from_slice(row(&output, id, dim));
                }
                let loss = sgns_kernel(
                    &v_buf,
                    &pos_buf,
                    &neg_buf,
                    &mut grad_v,
                    &mut grad_pos,
                    &mut grad_negs,
                );
                loss_sum += loss as f64;
                pairs += 1;

                axpy(row_mut(&mut input, center, dim), -lr, &grad_v);
                axpy(row_mut(&mut output, context, dim), -lr, &grad_pos);
                for (j, &id) in neg_ids.iter().enumerate() {
                    axpy(
                        row_mut(&mut output, id, dim),
                        -lr,
                        &grad_negs[j * dim..(j + 1) * dim],
                    );
                }
                done += 1;
            }
        }
        epoch_mean_loss.push(if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 });
    }

    let model = EmbeddingModel::from_parts(vocab, input, output, config.clone())?;
    Ok((
        model,
        TrainingReport {
            epoch_mean_loss,
            total_pairs,
        },
    ))
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn context_span(pos: usize, radius: usize, len: usize) -> impl Iterator<Item = usize> {
    let lo = pos.saturating_sub(radius);
    let hi = (pos + radius).min(len.saturating_sub(1));
    (lo..=hi).filter(move |&i| i != pos)
}

fn row(m: &[f32], r: usize, dim: usize) -> &[f32] {
    &m[r * dim..(r + 1) * dim]
}

fn row_mut(m: &mut [f32], r: usize, dim: usize) -> &mut [f32] {
    &mut m[r * dim..(r + 1) * dim]
}

fn axpy(y: &mut [f32], a: f32, x: &[f32]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
