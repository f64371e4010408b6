//! Discrete hyperparameter sets and per-image seeded draws.
//!
//! Every image gets its own ChaCha8 stream keyed by `(master_seed, image_index)`:
//! the seed selects the key and the image index selects the 64-bit stream id.
//! Draws therefore never depend on batch order or on which worker handled
//! the image.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::AffineParams;

/// Default gain range.
pub const DEFAULT_ALPHA_RANGE: (f64, f64) = (1.15, 1.35);
/// Default bias range.
pub const DEFAULT_BETA_RANGE: (f64, f64) = (-0.1, 0.4);
/// Default grid step for the runtime sets.
pub const DEFAULT_STEP: f64 = 0.05;
/// Search increment used when the ranges were chosen; reproduces the coarse grid.
pub const COARSE_STEP: f64 = 0.15;

/// Construction parameters of a [`ParamSet`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    pub step: f64,
}

impl Default for ParamRange {
    fn default() -> Self {
        ParamRange {
            alpha_start: DEFAULT_ALPHA_RANGE.0,
            alpha_end: DEFAULT_ALPHA_RANGE.1,
            beta_start: DEFAULT_BETA_RANGE.0,
            beta_end: DEFAULT_BETA_RANGE.1,
            step: DEFAULT_STEP,
        }
    }
}

/// Finite, strictly increasing candidate gains and biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamRange", into = "ParamRange")]
pub struct ParamSet {
    alphas: Vec<f64>,
    betas: Vec<f64>,
    meta: ParamRange,
}

impl TryFrom<ParamRange> for ParamSet {
    type Error = Error;

    fn try_from(r: ParamRange) -> Result<Self> {
        build_param_set(r.alpha_start, r.alpha_end, r.beta_start, r.beta_end, r.step)
    }
}

impl From<ParamSet> for ParamRange {
    fn from(set: ParamSet) -> Self {
        set.meta
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet::try_from(ParamRange::default()).expect("default ranges are valid")
    }
}

impl ParamSet {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn range(&self) -> ParamRange {
        self.meta
    }

    /// Draws one `(alpha, beta)` pair from `stream`.
    pub fn draw(&self, stream: &mut RngStream) -> AffineParams {
        draw_params(self, stream)
    }
}

/// Snaps values that sit within float noise of a two-decimal number onto it.
fn snap(value: f64) -> f64 {
    let snapped = (value * 100.0).round() / 100.0;
    if (value - snapped).abs() < 1e-9 {
        snapped
    } else {
        value
    }
}

fn axis(start: f64, end: f64, step: f64, name: &str) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite()) {
        return Err(Error::InvalidRange(format!("{name} bounds must be finite")));
    }
    if start > end {
        return Err(Error::InvalidRange(format!(
            "{name} start {start} exceeds end {end}"
        )));
    }
    let mut values = vec![start];
    // Index-based to avoid accumulating addition error.
    let mut k = 1u64;
    loop {
        let v = snap(start + k as f64 * step);
        if v >= end - 1e-9 {
            break;
        }
        values.push(v);
        k += 1;
    }
    if end > start {
        values.push(end);
    }
    Ok(values)
}

/// Arithmetic grids `start, start + step, ...` on both axes, each closed by its end point.
pub fn build_param_set(
    alpha_start: f64,
    alpha_end: f64,
    beta_start: f64,
    beta_end: f64,
    step: f64,
) -> Result<ParamSet> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidRange(format!("step must be positive, got {step}")));
    }
    let alphas = axis(alpha_start, alpha_end, step, "alpha")?;
    if alphas[0] <= 0.0 {
        return Err(Error::InvalidRange(format!(
            "gains must be positive, got alpha start {alpha_start}"
        )));
    }
    let betas = axis(beta_start, beta_end, step, "beta")?;
    Ok(ParamSet {
        alphas,
        betas,
        meta: ParamRange {
            alpha_start,
            alpha_end,
            beta_start,
            beta_end,
            step,
        },
    })
}

/// Per-image random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform index in `0..len` from exactly one 64-bit draw (multiply-high reduction).
    pub fn next_index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        ((u128::from(self.next_u64()) * len as u128) >> 64) as usize
    }
}

/// Stream for image `image_index` under `master_seed`.
pub fn derive_stream(master_seed: u64, image_index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(image_index);
    RngStream {
        master_seed,
        stream_index: image_index,
        rng,
    }
}

/// Gain then bias, each uniform over its axis; consumes two values from `stream`.
pub fn draw_params(set: &ParamSet, stream: &mut RngStream) -> AffineParams {
    let alpha = set.alphas[stream.next_index(set.alphas.len())];
    let beta = set.betas[stream.next_index(set.betas.len())];
    AffineParams::new(alpha, beta).expect("param set holds positive finite gains")
}
