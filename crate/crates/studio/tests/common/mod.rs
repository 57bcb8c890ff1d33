#![allow(dead_code)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slider_core::{EmbeddingModel, Image, TrainingConfig, Vocabulary};
use slider_studio::pgm::encode_pgm;

pub const BLOCK_A: [&str; 5] = ["a1", "a2", "a3", "a4", "a5"];
pub const BLOCK_B: [&str; 5] = ["b1", "b2", "b3", "b4", "b5"];

/// 200 sentences of 8 tokens, each drawn entirely from one topic block,
/// one sentence per line.
pub fn block_corpus_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for _ in 0..200 {
        let block = if rng.random_bool(0.5) { &BLOCK_A } else { &BLOCK_B };
        let sentence: Vec<&str> = (0..8).map(|_| block[rng.random_range(0..5)]).collect();
        text.push_str(&sentence.join(" "));
        text.push_str(".\n");
    }
    text
}

pub fn block_config() -> TrainingConfig {
    TrainingConfig { dim: 16, epochs: 15, seed: 1, ..Default::default() }
}

pub fn hand_model(words: &[(&str, u64)], rows: &[&[f32]]) -> EmbeddingModel {
    let vocab = Vocabulary::from_entries(words.iter().map(|(w, c)| (w.to_string(), *c))).unwrap();
    let input: Vec<f32> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let output = vec![0.0; input.len()];
    let config = TrainingConfig { dim: rows[0].len(), ..Default::default() };
    EmbeddingModel::from_parts(vocab, input, output, config).unwrap()
}

pub fn cold_hot_model() -> EmbeddingModel {
    hand_model(&[("cold", 1), ("hot", 1)], &[&[1.0, 0.0], &[0.0, 1.0]])
}

/// A small hand-built vocabulary around the cold/hot pair.
pub fn weather_model() -> EmbeddingModel {
    hand_model(
        &[("cold", 9), ("hot", 7), ("warm", 5), ("icy", 5), ("mild", 3), ("rain", 2)],
        &[
            &[1.0, 0.0, 0.1],
            &[0.0, 1.0, 0.1],
            &[0.2, 0.8, 0.3],
            &[0.9, -0.1, 0.0],
            &[0.5, 0.5, 0.2],
            &[0.1, 0.1, 1.0],
        ],
    )
}

pub fn random_images(count: usize, width: usize, height: usize, seed: u64) -> Vec<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Image::new(width, height, (0..width * height).map(|_| rng.random::<f32>()).collect()).unwrap())
        .collect()
}

/// 4x4 images at exact byte levels: class A has a dark left half, class B a
/// dark right half.
pub fn half_dark_classes() -> (Vec<Image>, Vec<Image>) {
    let make = |dark_left: bool, bright: u8| {
        let px = (0..16)
            .map(|i| {
                let left = i % 4 < 2;
                let byte = if left == dark_left { 10 + 5 * (i / 4) as u8 } else { bright };
                byte as f32 / 255.0
            })
            .collect();
        Image::new(4, 4, px).unwrap()
    };
    let a = [200, 230, 255].iter().map(|&s| make(true, s)).collect();
    let b = [215, 240, 190].iter().map(|&s| make(false, s)).collect();
    (a, b)
}

pub fn write_class(dir: &Path, images: &[Image]) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, img) in images.iter().enumerate() {
        std::fs::write(dir.join(format!("img{i}.pgm")), encode_pgm(img)).unwrap();
    }
}
