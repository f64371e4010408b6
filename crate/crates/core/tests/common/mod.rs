#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdae_core::{Image, PixelDomain};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, max_side: u32, channels: u8, domain: PixelDomain) -> Image {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let n = (w * h) as usize * channels as usize;
    match domain {
        PixelDomain::Byte255 => {
            Image::from_bytes(w, h, channels, (0..n).map(|_| rng.random::<u8>()).collect()).unwrap()
        }
        PixelDomain::Unit => {
            Image::from_unit(w, h, channels, (0..n).map(|_| rng.random::<f32>()).collect()).unwrap()
        }
    }
}

pub fn gray_bytes(w: u32, h: u32, data: Vec<u8>) -> Image {
    Image::from_bytes(w, h, 1, data).unwrap()
}
