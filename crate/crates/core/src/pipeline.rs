//! Batch and dataset enhancement.
//!
//! Work is a data-parallel map over images on a bounded rayon pool. Results are
//! collected in input order, and random draws come from per-image streams keyed
//! by the image's global position, so output never depends on the worker count.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{adaptive_gamma_cdf, gamma_correct, histogram_equalize, GammaParams};
use crate::dataset::{load_image, resolve, save_image, DatasetManifest, OutputFormat};
use crate::error::{Error, Result};
use crate::image::{apply_affine, convert_domain, AffineParams, Image, PixelDomain};
use crate::sampler::{derive_stream, draw_params, ParamSet};

/// Default images per batch.
pub const DEFAULT_BATCH_SIZE: usize = 16;

/// File name of the per-image log written next to an enhanced tree.
pub const SIDECAR_NAME: &str = "enhance_report.csv";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnhanceMode {
    /// Per-image `(alpha, beta)` drawn from the configured [`ParamSet`].
    RandomAffine,
    FixedAffine(AffineParams),
    HistEq,
    Gamma(GammaParams),
    AdaptiveGamma,
}

impl EnhanceMode {
    /// Short name as used on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            EnhanceMode::RandomAffine => "random",
            EnhanceMode::FixedAffine(_) => "fixed",
            EnhanceMode::HistEq => "histeq",
            EnhanceMode::Gamma(_) => "gamma",
            EnhanceMode::AdaptiveGamma => "adaptive-gamma",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnhanceConfig {
    pub mode: EnhanceMode,
    pub param_set: ParamSet,
    pub domain: PixelDomain,
    pub master_seed: u64,
    pub batch_size: usize,
    pub workers: usize,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        EnhanceConfig {
            mode: EnhanceMode::RandomAffine,
            param_set: ParamSet::default(),
            domain: PixelDomain::Byte255,
            master_seed: 0,
            batch_size: DEFAULT_BATCH_SIZE,
            workers: 1,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidParams("batch_size must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParams("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::WorkerPool(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImageParams {
    pub image_index: u64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub image_index: u64,
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EnhanceReport {
    pub images_processed: usize,
    pub wall_time: Duration,
    /// Images per second of wall time.
    pub throughput: f64,
    /// Applied gain/bias per image for the affine modes, ordered by index.
    pub per_image_params: Vec<ImageParams>,
    pub failures: Vec<Failure>,
}

impl EnhanceReport {
    fn finish(&mut self, started: Instant) {
        self.wall_time = started.elapsed();
        let secs = self.wall_time.as_secs_f64();
        self.throughput = if self.images_processed == 0 {
            0.0
        } else {
            self.images_processed as f64 / secs.max(1e-9)
        };
    }

    fn record(&mut self, index: u64, path: impl FnOnce() -> String, outcome: &Result<Option<AffineParams>>) {
        match outcome {
            Ok(params) => {
                self.images_processed += 1;
                if let Some(p) = params {
                    self.per_image_params.push(ImageParams {
                        image_index: index,
                        alpha: p.alpha(),
                        beta: p.beta(),
                    });
                }
            }
            Err(e) => self.failures.push(Failure {
                image_index: index,
                path: path(),
                message: e.to_string(),
            }),
        }
    }
}

/// Enhances one image whose global position is `image_index`.
///
/// Returns the gain/bias applied for the affine modes.
pub fn enhance_image(
    image: &Image,
    image_index: u64,
    config: &EnhanceConfig,
) -> Result<(Image, Option<AffineParams>)> {
    if image.domain() != config.domain {
        return Err(Error::DomainMismatch(format!(
            "image is {} domain, config expects {}",
            image.domain(),
            config.domain
        )));
    }
    match config.mode {
        EnhanceMode::RandomAffine => {
            let params = draw_params(
                &config.param_set,
                &mut derive_stream(config.master_seed, image_index),
            );
            Ok((apply_affine(image, params), Some(params)))
        }
        EnhanceMode::FixedAffine(params) => Ok((apply_affine(image, params), Some(params))),
        EnhanceMode::HistEq => Ok((histogram_equalize(image)?, None)),
        EnhanceMode::Gamma(g) => Ok((gamma_correct(image, g)?, None)),
        EnhanceMode::AdaptiveGamma => Ok((adaptive_gamma_cdf(image)?, None)),
    }
}

/// Positionally aligned outputs of [`enhance_batch`]; `None` marks a failed image.
pub type BatchOutput = Vec<Option<Image>>;

/// Enhances `images` as positions `0..images.len()`.
pub fn enhance_batch(images: &[Image], config: &EnhanceConfig) -> Result<(BatchOutput, EnhanceReport)> {
    enhance_batch_from(images, 0, config)
}

/// Enhances `images` as global positions `first_index..`.
pub fn enhance_batch_from(
    images: &[Image],
    first_index: u64,
    config: &EnhanceConfig,
) -> Result<(BatchOutput, EnhanceReport)> {
    config.validate()?;
    let pool = config.pool()?;
    let started = Instant::now();

    let results: Vec<Result<(Image, Option<AffineParams>)>> = pool.install(|| {
        images
            .par_iter()
            .enumerate()
            .map(|(i, img)| enhance_image(img, first_index + i as u64, config))
            .collect()
    });

    let mut report = EnhanceReport::default();
    let mut outputs = Vec::with_capacity(results.len());
    for (i, res) in results.into_iter().enumerate() {
        let index = first_index + i as u64;
        let (image, outcome) = match res {
            Ok((img, params)) => (Some(img), Ok(params)),
            Err(e) => (None, Err(e)),
        };
        report.record(index, || format!("[{index}]"), &outcome);
        outputs.push(image);
    }
    report.finish(started);
    Ok((outputs, report))
}

/// Output location for a manifest path: same relative path, extension set by format.
pub fn output_path(out_dir: &Path, relative: &str) -> (std::path::PathBuf, OutputFormat) {
    let target = resolve(out_dir, relative);
    let format = OutputFormat::for_path(&target);
    let target = if format == OutputFormat::Png {
        target.with_extension(format.extension())
    } else {
        target
    };
    (target, format)
}

/// Enhances a decoded 8-bit image in the configured domain and returns it as 8-bit.
pub fn enhance_decoded(
    loaded: &Image,
    image_index: u64,
    config: &EnhanceConfig,
) -> Result<(Image, Option<AffineParams>)> {
    let input = convert_domain(loaded, config.domain);
    let (enhanced, params) = enhance_image(&input, image_index, config)?;
    Ok((convert_domain(&enhanced, PixelDomain::Byte255), params))
}

fn process_record(
    root: &Path,
    relative: &str,
    index: u64,
    config: &EnhanceConfig,
    out_dir: &Path,
) -> Result<Option<AffineParams>> {
    let loaded = load_image(resolve(root, relative))?;
    let (encoded, params) = enhance_decoded(&loaded, index, config)?;
    let (target, format) = output_path(out_dir, relative);
    if let Some(parent) = target.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    save_image(&encoded, &target, format)?;
    Ok(params)
}

/// Enhances every manifest record under `root`, mirroring the tree in `out_dir`.
///
/// The record's manifest position is its stream index. Per-file errors are
/// collected in the report; only failing to create `out_dir` (or the sidecar)
/// is fatal.
pub fn enhance_dataset(
    root: &Path,
    manifest: &DatasetManifest,
    config: &EnhanceConfig,
    out_dir: &Path,
) -> Result<EnhanceReport> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = config.pool()?;
    let started = Instant::now();
    let records = manifest.records();

    let mut report = EnhanceReport::default();
    for (chunk_no, chunk) in records.chunks(config.batch_size).enumerate() {
        let base = chunk_no * config.batch_size;
        let outcomes: Vec<Result<Option<AffineParams>>> = pool.install(|| {
            chunk
                .par_iter()
                .enumerate()
                .map(|(i, rec)| process_record(root, &rec.path, (base + i) as u64, config, out_dir))
                .collect()
        });
        for (i, outcome) in outcomes.iter().enumerate() {
            let index = (base + i) as u64;
            report.record(index, || chunk[i].path.clone(), outcome);
        }
    }
    report.finish(started);

    let sidecar = out_dir.join(SIDECAR_NAME);
    let file = std::fs::File::create(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    write_sidecar(&report, manifest, std::io::BufWriter::new(file))
        .map_err(|e| Error::io(&sidecar, e))?;
    Ok(report)
}

/// Writes `index,relative_path,alpha,beta,status` lines ordered by index.
///
/// `alpha`/`beta` are empty for non-affine modes and failed images.
pub fn write_sidecar<W: Write>(
    report: &EnhanceReport,
    manifest: &DatasetManifest,
    mut out: W,
) -> std::io::Result<()> {
    let params: HashMap<u64, &ImageParams> =
        report.per_image_params.iter().map(|p| (p.image_index, p)).collect();
    let failed: HashMap<u64, &Failure> =
        report.failures.iter().map(|f| (f.image_index, f)).collect();
    writeln!(out, "index,relative_path,alpha,beta,status")?;
    for (i, rec) in manifest.records().iter().enumerate() {
        let i = i as u64;
        let (alpha, beta) = match params.get(&i) {
            Some(p) => (p.alpha.to_string(), p.beta.to_string()),
            None => (String::new(), String::new()),
        };
        let status = if failed.contains_key(&i) { "failed" } else { "ok" };
        writeln!(out, "{i},{},{alpha},{beta},{status}", csv_field(&rec.path))?;
    }
    out.flush()
}

fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

/// One cell of a gain/bias ablation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub image: Image,
}

/// All `alphas x betas` variants of `image`, alpha-major.
pub fn sweep_grid(image: &Image, alphas: &[f64], betas: &[f64]) -> Result<Vec<SweepCell>> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::InvalidParams("sweep needs at least one alpha and one beta".into()));
    }
    let mut cells = Vec::with_capacity(alphas.len() * betas.len());
    for &alpha in alphas {
        for &beta in betas {
            let params = AffineParams::new(alpha, beta)?;
            cells.push(SweepCell {
                alpha,
                beta,
                image: apply_affine(image, params),
            });
        }
    }
    Ok(cells)
}
