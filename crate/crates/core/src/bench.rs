//! Throughput harness comparing enhancement modes on pre-decoded images.
//!
//! Each mode gets one untimed warm-up pass followed by `repeats` timed passes
//! over the same image list, run sequentially on the calling thread. The
//! reported total is the median pass; per-image latencies pool every timed
//! sample.

use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::pipeline::{enhance_image, EnhanceConfig, EnhanceMode};

pub const MIN_REPEATS: usize = 3;

/// Latency percentiles in microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyMicros {
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub method: String,
    pub images: usize,
    pub total_seconds: f64,
    pub images_per_second: f64,
    pub per_image_micros: LatencyMicros,
}

/// Outcome for one mode; failures do not stop later modes.
#[derive(Debug)]
pub struct ModeOutcome {
    pub mode: EnhanceMode,
    pub result: Result<BenchResult>,
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn bench_mode(images: &[Image], config: &EnhanceConfig, repeats: usize) -> Result<BenchResult> {
    for (i, img) in images.iter().enumerate() {
        black_box(enhance_image(img, i as u64, config)?);
    }

    let mut pass_seconds = Vec::with_capacity(repeats);
    let mut samples = Vec::with_capacity(repeats * images.len());
    for _ in 0..repeats {
        let pass = Instant::now();
        for (i, img) in images.iter().enumerate() {
            let t = Instant::now();
            let out = enhance_image(img, i as u64, config)?;
            samples.push(t.elapsed().as_secs_f64() * 1e6);
            black_box(out);
        }
        pass_seconds.push(pass.elapsed().as_secs_f64());
    }

    samples.sort_by(f64::total_cmp);
    let total_seconds = median(&pass_seconds);
    Ok(BenchResult {
        method: config.mode.name().to_string(),
        images: images.len(),
        total_seconds,
        images_per_second: images.len() as f64 / total_seconds.max(1e-12),
        per_image_micros: LatencyMicros {
            p50: percentile(&samples, 0.50),
            p95: percentile(&samples, 0.95),
            max: *samples.last().unwrap_or(&0.0),
        },
    })
}

/// Times every mode in `modes` over the same decoded `images`.
pub fn run_bench(
    images: &[Image],
    modes: &[EnhanceMode],
    repeats: usize,
    base: &EnhanceConfig,
) -> Result<Vec<ModeOutcome>> {
    if images.is_empty() {
        return Err(Error::InvalidParams("benchmark needs at least one image".into()));
    }
    if repeats < MIN_REPEATS {
        return Err(Error::InvalidParams(format!(
            "repeats must be at least {MIN_REPEATS}, got {repeats}"
        )));
    }
    Ok(modes
        .iter()
        .map(|&mode| {
            let config = EnhanceConfig {
                mode,
                ..base.clone()
            };
            ModeOutcome {
                mode,
                result: bench_mode(images, &config, repeats),
            }
        })
        .collect())
}

pub const BENCH_CSV_HEADER: &str = "method,images,total_seconds,images_per_second,p50_us,p95_us,max_us";

pub fn write_bench_csv<'a, W: Write>(
    results: impl IntoIterator<Item = &'a BenchResult>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{BENCH_CSV_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{:.9},{:.3},{:.3},{:.3},{:.3}",
            r.method,
            r.images,
            r.total_seconds,
            r.images_per_second,
            r.per_image_micros.p50,
            r.per_image_micros.p95,
            r.per_image_micros.max
        )?;
    }
    out.flush()
}
