#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slider_core::Image;

pub const BLOCK_A: [&str; 5] = ["a1", "a2", "a3", "a4", "a5"];
pub const BLOCK_B: [&str; 5] = ["b1", "b2", "b3", "b4", "b5"];

/// 200 sentences of 8 tokens, each drawn entirely from one topic block.
pub fn block_corpus(seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tokens = Vec::new();
    for _ in 0..200 {
        let block = if rng.random_bool(0.5) { &BLOCK_A } else { &BLOCK_B };
        for _ in 0..8 {
            tokens.push(block[rng.random_range(0..5)].to_string());
        }
    }
    tokens
}

pub fn random_images(count: usize, width: usize, height: usize, seed: u64) -> Vec<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let px = (0..width * height).map(|_| rng.random::<f32>()).collect();
            Image::new(width, height, px).unwrap()
        })
        .collect()
}

/// 4x4 images: class A has a dark left half, class B a dark right half.
/// The bright side varies slightly between images.
pub fn half_dark_classes() -> (Vec<Image>, Vec<Image>) {
    let make = |dark_left: bool, shade: f32| {
        let px = (0..16)
            .map(|i| {
                let left = i % 4 < 2;
                if left == dark_left { 0.05 + 0.02 * (i / 4) as f32 } else { shade }
            })
            .collect();
        Image::new(4, 4, px).unwrap()
    };
    let a = [0.8, 0.9, 1.0].iter().map(|&s| make(true, s)).collect();
    let b = [0.85, 0.95, 0.75].iter().map(|&s| make(false, s)).collect();
    (a, b)
}
