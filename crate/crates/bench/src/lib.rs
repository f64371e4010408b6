//! Synthetic inputs shared by the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdae_core::Image;

/// Square grayscale image of uniform noise.
pub fn noise_gray(side: u32, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (side * side) as usize;
    Image::from_bytes(side, side, 1, (0..n).map(|_| rng.random()).collect()).expect("valid shape")
}

/// Square grayscale image resembling an underexposed scan: a dark radial
/// gradient with mild noise.
pub fn dark_scan(side: u32, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = side as f64 / 2.0;
    let data = (0..side * side)
        .map(|i| {
            let (x, y) = ((i % side) as f64 - c, (i / side) as f64 - c);
            let r = (x * x + y * y).sqrt() / c;
            let v = 90.0 * (1.0 - r).max(0.0) + rng.random_range(0.0..12.0);
            v.min(255.0) as u8
        })
        .collect();
    Image::from_bytes(side, side, 1, data).expect("valid shape")
}

/// A batch of `count` dark scans with distinct seeds.
pub fn batch(count: usize, side: u32) -> Vec<Image> {
    (0..count as u64).map(|s| dark_scan(side, s)).collect()
}
