//! Deterministic random affine brightness/contrast enhancement.
//!
//! Each image is enhanced with `g = clip(alpha * f + beta)` where the gain and
//! bias are drawn uniformly from small discrete sets, using a random stream
//! derived from a master seed and the image's dataset position. Histogram
//! equalization and gamma baselines, dataset scanning and stratified splits,
//! before/after statistics and a throughput harness round out the crate.
//!
//! ```
//! use rdae_core::{apply_affine, AffineParams, Image};
//!
//! let img = Image::from_bytes(2, 1, 1, vec![100, 250]).unwrap();
//! let out = apply_affine(&img, AffineParams::new(1.15, -0.1).unwrap());
//! assert_eq!(out.as_bytes().unwrap(), &[115, 255]);
//! ```

pub mod baselines;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod sampler;

pub use crate::baselines::{adaptive_gamma_cdf, gamma_correct, histogram_equalize, GammaParams};
pub use crate::bench::{run_bench, BenchResult, LatencyMicros};
pub use crate::dataset::{
    load_image, save_image, scan_dataset, stratified_split, DatasetManifest, OutputFormat, Record,
    Split, SplitRatios,
};
pub use crate::error::{Error, Result};
pub use crate::image::{apply_affine, clip, convert_domain, AffineParams, Image, PixelDomain, Pixels};
pub use crate::metrics::{compare, compute_stats, ImageStats, MetricsDelta};
pub use crate::pipeline::{
    enhance_batch, enhance_dataset, sweep_grid, EnhanceConfig, EnhanceMode, EnhanceReport,
};
pub use crate::sampler::{build_param_set, derive_stream, draw_params, ParamRange, ParamSet, RngStream};
