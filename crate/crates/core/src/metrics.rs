//! Objective brightness, contrast and entropy statistics.
//!
//! RGB images are measured on the per-pixel mean of their channels. Entropy
//! uses 256 bins, one per 8-bit level: a value `v` lands in bin
//! `round(255 * (v - lo) / (hi - lo))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImageStats {
    /// Arithmetic mean in domain units.
    pub mean_brightness: f64,
    /// Population standard deviation in domain units.
    pub rms_contrast: f64,
    /// Shannon entropy of the 256-bin histogram, in bits.
    pub entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsDelta {
    pub before: ImageStats,
    pub after: ImageStats,
    pub brightness_gain: f64,
    pub contrast_gain: f64,
}

impl MetricsDelta {
    pub fn entropy_gain(&self) -> f64 {
        self.after.entropy - self.before.entropy
    }
}

/// Per-pixel intensities: the sample itself for grayscale, the channel mean for RGB.
fn intensities(image: &Image) -> impl Iterator<Item = f64> + '_ {
    let c = image.channels() as usize;
    let px = image.pixels();
    (0..image.pixel_count()).map(move |i| {
        if c == 1 {
            px.get(i)
        } else {
            (0..c).map(|k| px.get(i * c + k)).sum::<f64>() / c as f64
        }
    })
}

pub fn compute_stats(image: &Image) -> ImageStats {
    let n = image.pixel_count() as f64;
    let scale = 255.0 / (image.domain().hi() - image.domain().lo());
    let lo = image.domain().lo();

    let mut sum = 0.0;
    let mut bins = [0u64; 256];
    for v in intensities(image) {
        sum += v;
        let bin = (((v - lo) * scale).round() as usize).min(255);
        bins[bin] += 1;
    }
    let mean = sum / n;
    // Second pass keeps the variance free of cancellation.
    let var = intensities(image).map(|v| (v - mean).powi(2)).sum::<f64>() / n;

    let entropy = bins
        .iter()
        .filter(|&&b| b > 0)
        .map(|&b| {
            let p = b as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();

    ImageStats {
        mean_brightness: mean,
        rms_contrast: var.sqrt(),
        // A single occupied bin yields -1*log2(1) = -0.0.
        entropy: entropy.max(0.0),
    }
}

pub fn compare(before: &Image, after: &Image) -> Result<MetricsDelta> {
    if !before.same_shape(after) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            before.width(),
            before.height(),
            before.channels(),
            after.width(),
            after.height(),
            after.channels()
        )));
    }
    if before.domain() != after.domain() {
        return Err(Error::DimensionMismatch(format!(
            "pixel domains differ: {} vs {}",
            before.domain(),
            after.domain()
        )));
    }
    let b = compute_stats(before);
    let a = compute_stats(after);
    Ok(MetricsDelta {
        before: b,
        after: a,
        brightness_gain: a.mean_brightness - b.mean_brightness,
        contrast_gain: a.rms_contrast - b.rms_contrast,
    })
}
