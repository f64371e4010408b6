use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rdae_core::bench::{run_bench, write_bench_csv, MIN_REPEATS};
use rdae_core::pipeline::enhance_decoded;
use rdae_core::{
    compare, convert_domain, enhance_dataset, load_image, save_image, scan_dataset, stratified_split,
    sweep_grid, DatasetManifest, EnhanceConfig, Error, OutputFormat, PixelDomain,
};

use crate::args::{require, BenchCmd, Command, EnhanceArgs, EnhanceCmd, MetricsCmd, ModeArg, SplitCmd, SweepCmd};
use crate::{CliError, EXIT_OK, EXIT_RUNTIME};

type CmdResult = Result<i32, CliError>;

pub(crate) fn run(command: Command) -> CmdResult {
    match command {
        Command::Enhance(c) => enhance(c),
        Command::Split(c) => split(c),
        Command::Sweep(c) => sweep(c),
        Command::Metrics(c) => metrics(c),
        Command::Bench(c) => bench(c),
    }
}

/// Core errors caused by bad caller input count as usage errors.
fn classify(e: Error) -> CliError {
    match e {
        Error::InvalidParams(_)
        | Error::InvalidRange(_)
        | Error::InvalidRatios(_)
        | Error::InvalidBounds { .. }
        | Error::AlreadySplit(_) => CliError::usage(e),
        other => CliError::runtime(other),
    }
}

fn is_stdout(path: Option<&PathBuf>) -> bool {
    path.is_none_or(|p| p.as_os_str() == "-")
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    if is_stdout(path) {
        return Ok(Box::new(std::io::stdout().lock()));
    }
    let path = path.expect("checked above");
    let file = File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(CliError::runtime)?;
    Ok(Box::new(BufWriter::new(file)))
}

fn resolve_config(args: &EnhanceArgs) -> Result<EnhanceConfig, CliError> {
    args.resolve().map_err(CliError::usage)
}

/// Writes the config when `--dump-config` is set; the caller then exits.
fn dump_config(args: &EnhanceArgs, cfg: &EnhanceConfig) -> Result<bool, CliError> {
    let Some(path) = &args.dump_config else {
        return Ok(false);
    };
    let mut json = serde_json::to_string_pretty(cfg).map_err(CliError::runtime)?;
    json.push('\n');
    let mut out = open_output(Some(path))?;
    out.write_all(json.as_bytes())
        .and_then(|_| out.flush())
        .with_context(|| format!("writing config {}", path.display()))
        .map_err(CliError::runtime)?;
    Ok(true)
}

fn load_manifest(root: &Path, manifest: Option<&PathBuf>) -> Result<DatasetManifest, CliError> {
    match manifest {
        Some(p) => DatasetManifest::load(p),
        None => scan_dataset(root),
    }
    .map_err(CliError::runtime)
}

fn enhance(cmd: EnhanceCmd) -> CmdResult {
    let cfg = resolve_config(&cmd.enhance)?;
    if dump_config(&cmd.enhance, &cfg)? {
        return Ok(EXIT_OK);
    }
    let input = require(&cmd.input, "--in").map_err(CliError::usage)?;
    let out = require(&cmd.out, "--out").map_err(CliError::usage)?;
    let manifest = load_manifest(input, cmd.manifest.as_ref())?;
    let report = enhance_dataset(input, &manifest, &cfg, out).map_err(classify)?;
    println!(
        "enhanced {} of {} images in {:.3}s ({:.1} images/s), mode {}, seed {}",
        report.images_processed,
        manifest.len(),
        report.wall_time.as_secs_f64(),
        report.throughput,
        cfg.mode.name(),
        cfg.master_seed
    );
    for f in &report.failures {
        eprintln!("failed: {}: {}", f.path, f.message);
    }
    Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_RUNTIME })
}

fn split(cmd: SplitCmd) -> CmdResult {
    let manifest = if cmd.input.is_dir() {
        scan_dataset(&cmd.input)
    } else {
        DatasetManifest::load(&cmd.input)
    }
    .map_err(CliError::runtime)?;
    let split = stratified_split(&manifest, &cmd.ratios, cmd.seed).map_err(classify)?;
    let out = open_output(cmd.out.as_ref())?;
    split.write_csv(out).map_err(CliError::runtime)?;
    if !is_stdout(cmd.out.as_ref()) {
        println!("wrote {} records", split.len());
    }
    Ok(EXIT_OK)
}

/// File name of one sweep cell, e.g. `alpha_1.15_beta_-0.1.png`.
pub fn sweep_file_name(alpha: f64, beta: f64) -> String {
    format!("alpha_{alpha}_beta_{beta}.png")
}

fn sweep(cmd: SweepCmd) -> CmdResult {
    let source = load_image(&cmd.input).map_err(CliError::runtime)?;
    let domain = PixelDomain::from(cmd.domain);
    let grid = sweep_grid(&convert_domain(&source, domain), &cmd.alphas.0, &cmd.betas.0).map_err(classify)?;
    std::fs::create_dir_all(&cmd.out)
        .with_context(|| format!("creating {}", cmd.out.display()))
        .map_err(CliError::runtime)?;
    save_image(&source, cmd.out.join("original.png"), OutputFormat::Png).map_err(CliError::runtime)?;
    for cell in &grid {
        let img = convert_domain(&cell.image, PixelDomain::Byte255);
        save_image(&img, cmd.out.join(sweep_file_name(cell.alpha, cell.beta)), OutputFormat::Png)
            .map_err(CliError::runtime)?;
    }
    println!("wrote original and {} variants to {}", grid.len(), cmd.out.display());
    Ok(EXIT_OK)
}

pub const METRICS_CSV_HEADER: &str =
    "path,mean_before,mean_after,rms_before,rms_after,entropy_before,entropy_after";

fn metrics(cmd: MetricsCmd) -> CmdResult {
    let cfg = resolve_config(&cmd.enhance)?;
    if dump_config(&cmd.enhance, &cfg)? {
        return Ok(EXIT_OK);
    }
    let input = require(&cmd.input, "--in").map_err(CliError::usage)?;
    let manifest = scan_dataset(input).map_err(CliError::runtime)?;
    let mut out = open_output(cmd.out.as_ref())?;
    let mut failures = 0usize;
    let write_err = |e: std::io::Error| CliError::runtime(anyhow!("writing metrics: {e}"));
    writeln!(out, "{METRICS_CSV_HEADER}").map_err(write_err)?;
    for (i, rec) in manifest.records().iter().enumerate() {
        let row = load_image(rdae_core::dataset::resolve(input, &rec.path))
            .and_then(|before| {
                let (after, _) = enhance_decoded(&before, i as u64, &cfg)?;
                compare(&before, &after)
            });
        match row {
            Ok(d) => writeln!(
                out,
                "{},{},{},{},{},{},{}",
                rec.path,
                d.before.mean_brightness,
                d.after.mean_brightness,
                d.before.rms_contrast,
                d.after.rms_contrast,
                d.before.entropy,
                d.after.entropy
            )
            .map_err(write_err)?,
            Err(e) => {
                failures += 1;
                eprintln!("failed: {}: {e}", rec.path);
            }
        }
    }
    out.flush().map_err(write_err)?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_RUNTIME })
}

fn bench(cmd: BenchCmd) -> CmdResult {
    let cfg = resolve_config(&cmd.enhance)?;
    if dump_config(&cmd.enhance, &cfg)? {
        return Ok(EXIT_OK);
    }
    if cmd.repeats < MIN_REPEATS {
        return Err(CliError::usage(anyhow!("--repeats must be at least {MIN_REPEATS}")));
    }
    let input = require(&cmd.input, "--in").map_err(CliError::usage)?;
    let manifest = scan_dataset(input).map_err(CliError::runtime)?;
    if manifest.is_empty() {
        return Err(CliError::runtime(anyhow!("no images found under {}", input.display())));
    }
    let images = manifest
        .records()
        .iter()
        .map(|r| load_image(rdae_core::dataset::resolve(input, &r.path)).map(|img| convert_domain(&img, cfg.domain)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::runtime)?;

    let which = if cmd.modes.is_empty() { ModeArg::ALL.to_vec() } else { cmd.modes.clone() };
    let modes = which
        .iter()
        .map(|&m| cmd.enhance.mode_for(m, &cfg))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(CliError::usage)?;

    let outcomes = run_bench(&images, &modes, cmd.repeats, &cfg).map_err(classify)?;
    let mut ok = Vec::new();
    let mut failed = 0usize;
    for o in outcomes {
        match o.result {
            Ok(r) => ok.push(r),
            Err(e) => {
                failed += 1;
                eprintln!("mode {} failed: {e}", o.mode.name());
            }
        }
    }
    let out = open_output(cmd.out.as_ref())?;
    write_bench_csv(&ok, out).map_err(CliError::runtime)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_RUNTIME })
}
