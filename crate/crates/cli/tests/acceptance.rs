//! Acceptance suite: one PASS/FAIL line per criterion, each under its runtime budget.
//!
//! Runs without the libtest harness so the report always reaches the terminal.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdae_cli::{cli_main, EXIT_OK};
use rdae_core::bench::{run_bench, write_bench_csv};
use rdae_core::{
    adaptive_gamma_cdf, apply_affine, compute_stats, derive_stream, draw_params, enhance_dataset, gamma_correct,
    histogram_equalize, load_image, save_image, scan_dataset, stratified_split, AffineParams, DatasetManifest,
    EnhanceConfig, EnhanceMode, GammaParams, Image, OutputFormat, ParamSet, PixelDomain, Pixels, Record, Split,
    SplitRatios,
};
use sha2::{Digest, Sha256};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_image(rng: &mut ChaCha8Rng, max_side: u32, channels: u8, domain: PixelDomain) -> Image {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let n = (w * h) as usize * channels as usize;
    match domain {
        PixelDomain::Byte255 => Image::from_bytes(w, h, channels, (0..n).map(|_| rng.random()).collect()).unwrap(),
        PixelDomain::Unit => Image::from_unit(w, h, channels, (0..n).map(|_| rng.random()).collect()).unwrap(),
    }
}

// Affine kernel

// Branches instead of clamp keep the oracle independent of library helpers.
#[allow(clippy::manual_clamp)]
fn naive_affine(image: &Image, alpha: f64, beta: f64) -> Pixels {
    match image.pixels() {
        Pixels::Byte(v) => Pixels::Byte(
            v.iter()
                .map(|&f| {
                    let g = alpha * f as f64 + beta;
                    let g = if g < 0.0 { 0.0 } else if g > 255.0 { 255.0 } else { g };
                    g.round() as u8
                })
                .collect(),
        ),
        Pixels::Unit(v) => Pixels::Unit(
            v.iter()
                .map(|&f| {
                    let g = alpha * f as f64 + beta;
                    (if g < 0.0 { 0.0 } else if g > 1.0 { 1.0 } else { g }) as f32
                })
                .collect(),
        ),
    }
}

fn affine_kernel() -> Outcome {
    let mut rng = rng(1);
    for i in 0..1000 {
        let domain = if i % 2 == 0 { PixelDomain::Byte255 } else { PixelDomain::Unit };
        let channels = if rng.random() { 3 } else { 1 };
        let img = random_image(&mut rng, 64, channels, domain);
        let alpha = rng.random_range(0.05..3.0);
        let beta = match domain {
            PixelDomain::Byte255 => rng.random_range(-128.0..128.0),
            PixelDomain::Unit => rng.random_range(-0.5..0.5),
        };
        let out = apply_affine(&img, AffineParams::new(alpha, beta).unwrap());
        check(out.pixels() == &naive_affine(&img, alpha, beta), || {
            format!("image {i} ({}x{}x{channels}, {domain}) differs", img.width(), img.height())
        })?;
    }
    Ok("1000 images bit-exact".into())
}

// Sweep grid

fn sweep_reproduction() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = dir.path().join("xray.png");
    let img = random_image(&mut rng(2), 48, 1, PixelDomain::Byte255);
    save_image(&img, &src, OutputFormat::Png).map_err(|e| e.to_string())?;
    let out = dir.path().join("grid");
    let argv = ["rdae", "sweep", "--in", src.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let argv = argv.iter().copied().chain(["--alphas", "1.15,1.35", "--betas", "-0.1,0.4"]);
    check(cli_main(argv) == EXIT_OK, || "sweep exited non-zero".into())?;
    let variants = fs::read_dir(&out).map_err(|e| e.to_string())?.count() - 1;
    check(variants == 4, || format!("{variants} variants"))?;
    for (a, sa) in [(1.15, "1.15"), (1.35, "1.35")] {
        for (b, sb) in [(-0.1, "-0.1"), (0.4, "0.4")] {
            let got = load_image(out.join(format!("alpha_{sa}_beta_{sb}.png"))).map_err(|e| e.to_string())?;
            let want = apply_affine(&img, AffineParams::new(a, b).unwrap());
            check(got == want, || format!("alpha {sa} beta {sb} differs"))?;
        }
    }
    Ok("4 variants bit-equal".into())
}

// Sampler

fn critical(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - 0.001)
}

fn sampling_statistics() -> Outcome {
    const DRAWS: u64 = 10_000;
    let set = ParamSet::default();
    let (na, nb) = (set.alphas().len(), set.betas().len());
    let mut a = vec![0u64; na];
    let mut b = vec![0u64; nb];
    let mut joint = vec![vec![0u64; nb]; na];
    for i in 0..DRAWS {
        let p = draw_params(&set, &mut derive_stream(20_240_601, i));
        let ia = set.alphas().iter().position(|&x| x == p.alpha()).ok_or("alpha outside set")?;
        let ib = set.betas().iter().position(|&x| x == p.beta()).ok_or("beta outside set")?;
        a[ia] += 1;
        b[ib] += 1;
        joint[ia][ib] += 1;
    }
    let uniform = |counts: &[u64]| {
        let e = DRAWS as f64 / counts.len() as f64;
        counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum::<f64>()
    };
    let (ca, cb) = (uniform(&a), uniform(&b));
    check(ca < critical(na - 1), || format!("alpha chi2 {ca:.2}"))?;
    check(cb < critical(nb - 1), || format!("beta chi2 {cb:.2}"))?;
    let mut cj = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let e = a[i] as f64 * b[j] as f64 / DRAWS as f64;
            cj += (obs as f64 - e).powi(2) / e;
        }
    }
    let df = (na - 1) * (nb - 1);
    check(cj < critical(df), || format!("joint chi2 {cj:.2} (df {df})"))?;
    Ok(format!("chi2 alpha {ca:.2}, beta {cb:.2}, joint {cj:.2}"))
}

// Parallel determinism

fn tree_hash(root: &Path) -> String {
    let mut h = Sha256::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.unwrap();
        if entry.file_type().is_file() {
            h.update(entry.path().strip_prefix(root).unwrap().to_string_lossy().as_bytes());
            h.update([0]);
            h.update(fs::read(entry.path()).unwrap());
        }
    }
    hex::encode(h.finalize())
}

fn parallel_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("in");
    let mut r = rng(3);
    for label in ["covid", "normal"] {
        fs::create_dir_all(root.join(label)).map_err(|e| e.to_string())?;
        for i in 0..100 {
            let img = random_image(&mut r, 32, 1, PixelDomain::Byte255);
            save_image(&img, root.join(label).join(format!("{i:03}.png")), OutputFormat::Png)
                .map_err(|e| e.to_string())?;
        }
    }
    let manifest = scan_dataset(&root).map_err(|e| e.to_string())?;
    check(manifest.len() == 200, || format!("{} images scanned", manifest.len()))?;
    let mut runs = Vec::new();
    for workers in [1, 4, 8] {
        let out = dir.path().join(format!("out{workers}"));
        let cfg = EnhanceConfig { master_seed: 42, workers, ..Default::default() };
        let report = enhance_dataset(&root, &manifest, &cfg, &out).map_err(|e| e.to_string())?;
        check(report.images_processed == 200 && report.failures.is_empty(), || {
            format!("workers {workers}: {} processed", report.images_processed)
        })?;
        runs.push((tree_hash(&out), report.per_image_params));
    }
    check(runs.windows(2).all(|w| w[0] == w[1]), || "trees or parameter logs differ".into())?;
    Ok(format!("tree hash {}", &runs[0].0[..16]))
}

// Baselines

fn brute_force_equalize(data: &[u8]) -> Vec<u8> {
    let n = data.len() as u64;
    let count_le = |level: u8| data.iter().filter(|&&q| q <= level).count() as u64;
    let cdf_min = count_le(*data.iter().min().unwrap());
    data.iter()
        .map(|&p| {
            if n == cdf_min {
                0
            } else {
                let num = 255 * (count_le(p) - cdf_min);
                let den = n - cdf_min;
                ((2 * num + den) / (2 * den)) as u8
            }
        })
        .collect()
}

fn baseline_oracles() -> Outcome {
    let mut r = rng(4);
    for i in 0..1000 {
        let img = random_image(&mut r, 16, 1, PixelDomain::Byte255);
        let out = histogram_equalize(&img).map_err(|e| e.to_string())?;
        check(out.as_bytes().unwrap() == brute_force_equalize(img.as_bytes().unwrap()), || {
            format!("equalization differs on image {i}")
        })?;
    }
    let identity = GammaParams::new(1.0).unwrap();
    for i in 0..1000 {
        let domain = if i % 2 == 0 { PixelDomain::Byte255 } else { PixelDomain::Unit };
        let channels = if r.random() { 3 } else { 1 };
        let img = random_image(&mut r, 16, channels, domain);
        check(gamma_correct(&img, identity).map_err(|e| e.to_string())? == img, || {
            format!("gamma 1 changed image {i}")
        })?;
    }
    for i in 0..1000 {
        let img = random_image(&mut r, 32, 1, PixelDomain::Byte255);
        let out = adaptive_gamma_cdf(&img).map_err(|e| e.to_string())?;
        let mut pairs: Vec<(u8, u8)> =
            img.as_bytes().unwrap().iter().copied().zip(out.as_bytes().unwrap().iter().copied()).collect();
        pairs.sort_unstable();
        check(pairs.windows(2).all(|w| w[0].1 <= w[1].1), || format!("adaptive map not monotone on image {i}"))?;
    }
    Ok("equalization, gamma identity and adaptive monotonicity on 1000 images each".into())
}

// Metrics

fn metrics_laws() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let alpha: f64 = r.random_range(0.5..2.0);
        let beta: f64 = r.random_range(-20.0..20.0);
        let lo = ((0.5 - beta) / alpha).max(0.0).ceil() as u8;
        let hi = ((254.5 - beta) / alpha).min(255.0).floor() as u8;
        let (w, h) = (r.random_range(1..=32), r.random_range(1..=32));
        let img = Image::from_bytes(w, h, 1, (0..w * h).map(|_| r.random_range(lo..=hi)).collect()).unwrap();
        let before = compute_stats(&img);
        let after = compute_stats(&apply_affine(&img, AffineParams::new(alpha, beta).unwrap()));
        let dm = (after.mean_brightness - (alpha * before.mean_brightness + beta)).abs();
        let ds = (after.rms_contrast - alpha * before.rms_contrast).abs();
        worst = worst.max(dm).max(ds);
        check(dm <= 1.0 && ds <= 1.0, || format!("case {case}: mean off by {dm:.3}, rms off by {ds:.3}"))?;
    }
    for case in 0..500 {
        let img = random_image(&mut r, 32, 1, PixelDomain::Byte255);
        let p = AffineParams::new(r.random_range(0.01..4.0), r.random_range(-300.0..300.0)).unwrap();
        let (e0, e1) = (compute_stats(&img).entropy, compute_stats(&apply_affine(&img, p)).entropy);
        check(e1 <= e0 + 1e-12, || format!("entropy case {case}: {e0} -> {e1}"))?;
    }
    Ok(format!("worst law deviation {worst:.3} levels; entropy non-increasing"))
}

// Split

fn stratified_split_counts() -> Outcome {
    let records: Vec<Record> = ["covid", "normal", "pneumonia"]
        .iter()
        .flat_map(|label| {
            (0..1000).map(move |i| Record {
                path: format!("{label}/{i:04}.png"),
                label: (*label).into(),
                split: Split::Unassigned,
            })
        })
        .collect();
    let manifest = DatasetManifest::new(records).map_err(|e| e.to_string())?;
    let ratios = SplitRatios::new(0.8, 0.1, 0.1).unwrap();
    let first = stratified_split(&manifest, &ratios, 17).map_err(|e| e.to_string())?;
    let second = stratified_split(&manifest, &ratios, 17).map_err(|e| e.to_string())?;
    for label in ["covid", "normal", "pneumonia"] {
        let counts = [Split::Train, Split::Val, Split::Test].map(|s| first.count(label, s));
        check(counts == [800, 100, 100], || format!("{label}: {counts:?}"))?;
    }
    check(first == second, || "double run differs".into())?;
    Ok("800/100/100 per class, deterministic".into())
}

// Throughput

fn throughput_sanity() -> Outcome {
    let mut r = rng(6);
    let images: Vec<Image> = (0..500)
        .map(|_| Image::from_bytes(256, 256, 1, (0..256 * 256).map(|_| r.random()).collect()).unwrap())
        .collect();
    let modes = [EnhanceMode::RandomAffine, EnhanceMode::HistEq];
    let outcomes = run_bench(&images, &modes, 3, &EnhanceConfig::default()).map_err(|e| e.to_string())?;
    let results = outcomes.into_iter().map(|o| o.result).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_bench_csv(&results, &mut buf).map_err(|e| e.to_string())?;

    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or(format!("missing column {name}"));
    let (method, images_col, ips) = (col("method")?, col("images")?, col("images_per_second")?);
    let (p50, p95, max) = (col("p50_us")?, col("p95_us")?, col("max_us")?);
    let mut rates = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let num = |i: usize| row[i].parse::<f64>().map_err(|e| format!("{}: {e}", &row[i]));
        check(num(images_col)? == 500.0, || "image count".into())?;
        let (a, b, c) = (num(p50)?, num(p95)?, num(max)?);
        check(a <= b && b <= c, || format!("{}: p50 {a} p95 {b} max {c}", &row[method]))?;
        rates.push((row[method].to_string(), num(ips)?));
    }
    check(rates.len() == 2, || format!("{} rows", rates.len()))?;
    let (affine, histeq) = (rates[0].1, rates[1].1);
    check(affine > histeq, || format!("{} {affine:.1} ips <= {} {histeq:.1} ips", rates[0].0, rates[1].0))?;
    Ok(format!("{} {affine:.1} ips > {} {histeq:.1} ips", rates[0].0, rates[1].0))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("affine kernel matches scalar reference", 10, affine_kernel),
        ("sweep grid reproduces direct affine calls", 1, sweep_reproduction),
        ("parameter sampling is uniform and independent", 5, sampling_statistics),
        ("parallel enhancement is deterministic", 30, parallel_determinism),
        ("baselines match their oracles", 20, baseline_oracles),
        ("metrics follow the affine laws", 10, metrics_laws),
        ("stratified split is exact and deterministic", 5, stratified_split_counts),
        ("affine outpaces histogram equalization", 60, throughput_sanity),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over {budget}s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {name} ({:.2}s / {budget}s): {detail}", elapsed.as_secs_f64());
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
