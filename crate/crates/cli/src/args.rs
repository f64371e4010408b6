use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rdae_core::{
    build_param_set, AffineParams, EnhanceConfig, EnhanceMode, GammaParams, PixelDomain, SplitRatios,
};

/// Gain used by `--mode fixed` when `--alpha` is not given.
pub const DEFAULT_FIXED_ALPHA: f64 = 1.15;
/// Bias used by `--mode fixed` when `--beta` is not given.
pub const DEFAULT_FIXED_BETA: f64 = -0.1;
/// Exponent used by `--mode gamma` when `--gamma` is not given.
pub const DEFAULT_GAMMA: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(name = "rdae", version, about = "Deterministic random affine image enhancement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enhance every image of a `<root>/<label>/...` tree into a mirrored tree.
    Enhance(EnhanceCmd),
    /// Assign stratified train/val/test splits and write the manifest CSV.
    Split(SplitCmd),
    /// Write the gain x bias ablation grid for a single image.
    Sweep(SweepCmd),
    /// Before/after brightness, contrast and entropy per image, as CSV.
    Metrics(MetricsCmd),
    /// Compare enhancement throughput across modes on pre-decoded images.
    Bench(BenchCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Random,
    Fixed,
    Histeq,
    Gamma,
    AdaptiveGamma,
}

impl ModeArg {
    pub const ALL: [ModeArg; 5] = [
        ModeArg::Random,
        ModeArg::Fixed,
        ModeArg::Histeq,
        ModeArg::Gamma,
        ModeArg::AdaptiveGamma,
    ];

    fn of(mode: &EnhanceMode) -> ModeArg {
        match mode {
            EnhanceMode::RandomAffine => ModeArg::Random,
            EnhanceMode::FixedAffine(_) => ModeArg::Fixed,
            EnhanceMode::HistEq => ModeArg::Histeq,
            EnhanceMode::Gamma(_) => ModeArg::Gamma,
            EnhanceMode::AdaptiveGamma => ModeArg::AdaptiveGamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Byte,
    Unit,
}

impl From<DomainArg> for PixelDomain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Byte => PixelDomain::Byte255,
            DomainArg::Unit => PixelDomain::Unit,
        }
    }
}

/// Comma-separated numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

fn parse_list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(FloatList)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.0.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two comma-separated numbers, got {s:?}")),
    }
}

fn parse_ratios(s: &str) -> Result<SplitRatios, String> {
    s.parse::<SplitRatios>().map_err(|e| e.to_string())
}

/// Flags shared by every command that runs an enhancement.
///
/// Values from `--config` are the base; explicit flags override them.
#[derive(Debug, Clone, Default, Args)]
pub struct EnhanceArgs {
    /// Enhancement mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Gain for `--mode fixed` [default: 1.15].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Bias for `--mode fixed`, in pixel-domain units [default: -0.1].
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Exponent for `--mode gamma` [default: 0.5].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Gain range `start,end` for `--mode random` [default: 1.15,1.35].
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub alpha_range: Option<(f64, f64)>,
    /// Bias range `start,end` for `--mode random` [default: -0.1,0.4].
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub beta_range: Option<(f64, f64)>,
    /// Grid step of both random ranges [default: 0.05].
    #[arg(long)]
    pub step: Option<f64>,
    /// Master seed for per-image random streams [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Images per batch [default: 16].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Pixel domain the enhancement runs in [default: byte].
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    /// JSON config file providing defaults for the flags above.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the effective config as JSON (`-` for stdout) and exit.
    #[arg(long, value_name = "FILE")]
    pub dump_config: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

impl EnhanceArgs {
    fn base(&self) -> anyhow::Result<EnhanceConfig> {
        match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
            }
            None => Ok(EnhanceConfig {
                workers: default_workers(),
                ..EnhanceConfig::default()
            }),
        }
    }

    pub fn mode_for(&self, which: ModeArg, base: &EnhanceConfig) -> anyhow::Result<EnhanceMode> {
        Ok(match which {
            ModeArg::Random => EnhanceMode::RandomAffine,
            ModeArg::Fixed => {
                let (a0, b0) = match base.mode {
                    EnhanceMode::FixedAffine(p) => (p.alpha(), p.beta()),
                    _ => (DEFAULT_FIXED_ALPHA, DEFAULT_FIXED_BETA),
                };
                EnhanceMode::FixedAffine(AffineParams::new(
                    self.alpha.unwrap_or(a0),
                    self.beta.unwrap_or(b0),
                )?)
            }
            ModeArg::Histeq => EnhanceMode::HistEq,
            ModeArg::Gamma => {
                let g0 = match base.mode {
                    EnhanceMode::Gamma(g) => g.gamma(),
                    _ => DEFAULT_GAMMA,
                };
                EnhanceMode::Gamma(GammaParams::new(self.gamma.unwrap_or(g0))?)
            }
            ModeArg::AdaptiveGamma => EnhanceMode::AdaptiveGamma,
        })
    }

    /// Effective configuration: config file (or defaults) overridden by flags.
    pub fn resolve(&self) -> anyhow::Result<EnhanceConfig> {
        let mut cfg = self.base()?;
        let which = self.mode.unwrap_or_else(|| ModeArg::of(&cfg.mode));
        cfg.mode = self.mode_for(which, &cfg)?;

        let mut range = cfg.param_set.range();
        if let Some((a, b)) = self.alpha_range {
            range.alpha_start = a;
            range.alpha_end = b;
        }
        if let Some((a, b)) = self.beta_range {
            range.beta_start = a;
            range.beta_end = b;
        }
        if let Some(step) = self.step {
            range.step = step;
        }
        cfg.param_set = build_param_set(
            range.alpha_start,
            range.alpha_end,
            range.beta_start,
            range.beta_end,
            range.step,
        )?;

        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(b) = self.batch_size {
            cfg.batch_size = b;
        }
        if let Some(d) = self.domain {
            cfg.domain = d.into();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct EnhanceCmd {
    /// Dataset root laid out as `<root>/<label>/<images>`.
    #[arg(long = "in", value_name = "DIR")]
    pub input: Option<PathBuf>,
    /// Output root; the input tree is mirrored here.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Use this manifest CSV for record order instead of scanning `--in`.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub enhance: EnhanceArgs,
}

#[derive(Debug, Args)]
pub struct SplitCmd {
    /// Dataset root to scan, or an existing unassigned manifest CSV.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Manifest CSV to write (`-` or omitted for stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Train, validation and test fractions.
    #[arg(long, value_parser = parse_ratios, default_value = "0.8,0.1,0.1")]
    pub ratios: SplitRatios,
    /// Seed of the per-label shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    /// Source image.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Directory receiving `original.png` and one PNG per grid cell.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Gains, comma separated.
    #[arg(long, value_parser = parse_list, default_value = "1.15,1.35", allow_hyphen_values = true)]
    pub alphas: FloatList,
    /// Biases, comma separated.
    #[arg(long, value_parser = parse_list, default_value = "-0.1,0.4", allow_hyphen_values = true)]
    pub betas: FloatList,
    /// Pixel domain the grid is computed in.
    #[arg(long, value_enum, default_value = "byte")]
    pub domain: DomainArg,
}

#[derive(Debug, Args)]
pub struct MetricsCmd {
    /// Dataset root laid out as `<root>/<label>/<images>`.
    #[arg(long = "in", value_name = "DIR")]
    pub input: Option<PathBuf>,
    /// Metrics CSV to write (`-` or omitted for stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub enhance: EnhanceArgs,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    /// Dataset root whose images are decoded once before timing.
    #[arg(long = "in", value_name = "DIR")]
    pub input: Option<PathBuf>,
    /// Results CSV to write (`-` or omitted for stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Modes to time, comma separated [default: all].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub modes: Vec<ModeArg>,
    /// Timed passes per mode; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[command(flatten)]
    pub enhance: EnhanceArgs,
}

pub fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a PathBuf> {
    match value {
        Some(v) => Ok(v),
        None => bail!("missing required flag {flag}"),
    }
}
