//! Raster decoding/encoding, dataset scanning and stratified splitting.
//!
//! Datasets are laid out as `<root>/<label>/<image files>`; any nesting below
//! the label directory is kept in the record path. Manifests serialize to CSV
//! with the header `path,label,split`.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, PixelDomain};

pub const SUPPORTED_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Quality used for every JPEG write.
pub const JPEG_QUALITY: u8 = 95;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Png,
    /// Lossy, fixed at [`JPEG_QUALITY`].
    Jpeg,
}

impl OutputFormat {
    /// JPEG for `.jpg`/`.jpeg`, PNG for everything else.
    pub fn for_path(path: &Path) -> OutputFormat {
        match extension(path).as_deref() {
            Some("jpg") | Some("jpeg") => OutputFormat::Jpeg,
            _ => OutputFormat::Png,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Png => "png",
            OutputFormat::Jpeg => "jpg",
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
}

pub fn is_supported_image(path: &Path) -> bool {
    extension(path).is_some_and(|e| SUPPORTED_EXTENSIONS.contains(&e.as_str()))
}

fn map_image_error(path: &Path, err: ImageError) -> Error {
    match err {
        ImageError::IoError(e) => Error::io(path, e),
        ImageError::Unsupported(e) => Error::UnsupportedFormat {
            path: path.to_owned(),
            message: e.to_string(),
        },
        other => Error::Decode {
            path: path.to_owned(),
            message: other.to_string(),
        },
    }
}

/// 16-bit to 8-bit with round-to-nearest: `(v * 255 + 32767) / 65535`.
fn narrow16(v: u16) -> u8 {
    ((u32::from(v) * 255 + 32767) / 65535) as u8
}

/// Decodes a PNG, JPEG or BMP file into an 8-bit grayscale or RGB image.
///
/// Alpha channels are dropped and 16-bit sources are narrowed to 8 bits.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let decoded = image::ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| map_image_error(path, e))?;
    decode_dynamic(path, decoded)
}

fn decode_dynamic(path: &Path, decoded: DynamicImage) -> Result<Image> {
    let (w, h) = (decoded.width(), decoded.height());
    let (channels, data) = match decoded {
        DynamicImage::ImageLuma8(b) => (1, b.into_raw()),
        DynamicImage::ImageLumaA8(b) => (1, b.into_raw().chunks_exact(2).map(|p| p[0]).collect()),
        DynamicImage::ImageRgb8(b) => (3, b.into_raw()),
        DynamicImage::ImageRgba8(b) => (
            3,
            b.into_raw()
                .chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect(),
        ),
        DynamicImage::ImageLuma16(b) => (1, b.into_raw().into_iter().map(narrow16).collect()),
        DynamicImage::ImageLumaA16(b) => (
            1,
            b.into_raw().chunks_exact(2).map(|p| narrow16(p[0])).collect(),
        ),
        DynamicImage::ImageRgb16(b) => (3, b.into_raw().into_iter().map(narrow16).collect()),
        DynamicImage::ImageRgba16(b) => (
            3,
            b.into_raw()
                .chunks_exact(4)
                .flat_map(|p| [narrow16(p[0]), narrow16(p[1]), narrow16(p[2])])
                .collect(),
        ),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                message: format!("color type {:?} is not 8/16-bit gray or RGB", other.color()),
            })
        }
    };
    Image::from_bytes(w, h, channels, data)
}

/// Encodes an 8-bit image. Unit-domain images must be converted first.
pub fn save_image(image: &Image, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    let data = image.as_bytes().ok_or_else(|| {
        Error::DomainMismatch(format!(
            "cannot encode {} domain image, convert to byte first",
            PixelDomain::Unit
        ))
    })?;
    let color = match image.channels() {
        1 => ExtendedColorType::L8,
        _ => ExtendedColorType::Rgb8,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let encoded = match format {
        OutputFormat::Png => {
            PngEncoder::new(&mut out).write_image(data, image.width(), image.height(), color)
        }
        OutputFormat::Jpeg => JpegEncoder::new_with_quality(&mut out, JPEG_QUALITY)
            .write_image(data, image.width(), image.height(), color),
    };
    encoded.map_err(|e| match e {
        ImageError::IoError(e) => Error::io(path, e),
        other => Error::Encode {
            path: path.to_owned(),
            message: other.to_string(),
        },
    })?;
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    Unassigned,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    /// Path relative to the dataset root, `/`-separated.
    pub path: String,
    pub label: String,
    pub split: Split,
}

/// Ordered list of dataset records with unique paths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    records: Vec<Record>,
}

impl DatasetManifest {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.label.is_empty() {
                return Err(Error::Manifest(format!("empty label for {}", r.path)));
            }
            if !seen.insert(r.path.as_str()) {
                return Err(Error::Manifest(format!("duplicate path {}", r.path)));
            }
        }
        Ok(DatasetManifest { records })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, label: &str, split: Split) -> usize {
        self.records
            .iter()
            .filter(|r| r.label == label && r.split == split)
            .count()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        if self.records.is_empty() {
            w.write_record(["path", "label", "split"])
                .map_err(|e| Error::Manifest(e.to_string()))?;
        }
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Manifest(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(reader);
        let records = rd
            .deserialize()
            .collect::<std::result::Result<Vec<Record>, _>>()
            .map_err(|e| Error::Manifest(e.to_string()))?;
        DatasetManifest::new(records)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }
}

/// Builds a manifest from `<root>/<label>/...`, skipping non-image files.
pub fn scan_dataset(root: impl AsRef<Path>) -> Result<DatasetManifest> {
    let root = root.as_ref();
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut records = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let label_dir = entry.path();
        if !label_dir.is_dir() {
            continue;
        }
        let Some(label) = entry.file_name().to_str().map(str::to_owned) else {
            continue;
        };
        for file in walkdir::WalkDir::new(&label_dir).sort_by_file_name() {
            let file = file.map_err(|e| {
                let path = e.path().map(Path::to_owned).unwrap_or_else(|| label_dir.clone());
                Error::io(path, e.into())
            })?;
            if !file.file_type().is_file() || !is_supported_image(file.path()) {
                continue;
            }
            let rel = relative_string(root, file.path())?;
            records.push(Record {
                path: rel,
                label: label.clone(),
                split: Split::Unassigned,
            });
        }
    }
    records.sort_by(|a, b| a.path.cmp(&b.path));
    DatasetManifest::new(records)
}

fn relative_string(root: &Path, path: &Path) -> Result<String> {
    let rel = path
        .strip_prefix(root)
        .map_err(|_| Error::Manifest(format!("{} escapes dataset root", path.display())))?;
    let parts: Option<Vec<&str>> = rel.components().map(|c| c.as_os_str().to_str()).collect();
    parts
        .map(|p| p.join("/"))
        .ok_or_else(|| Error::Manifest(format!("non UTF-8 path {}", path.display())))
}

/// Resolves a manifest path against a dataset root.
pub fn resolve(root: &Path, relative: &str) -> PathBuf {
    relative.split('/').fold(root.to_path_buf(), |p, c| p.join(c))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRatios {
    train: f64,
    val: f64,
    test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        for (name, r) in [("train", train), ("val", val), ("test", test)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidRatios(format!("{name} ratio {r} outside [0, 1]")));
            }
        }
        let sum = train + val + test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRatios(format!("ratios sum to {sum}, expected 1")));
        }
        Ok(SplitRatios { train, val, test })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl std::str::FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidRatios(format!("{s:?}: {e}")))?;
        match parts.as_slice() {
            [a, b, c] => SplitRatios::new(*a, *b, *c),
            _ => Err(Error::InvalidRatios(format!(
                "expected three comma-separated ratios, got {s:?}"
            ))),
        }
    }
}

const SPLITS: [Split; 3] = [Split::Train, Split::Val, Split::Test];

/// Per-split counts for `n` samples by largest-remainder apportionment.
///
/// Remainder ties go to the earlier split. When `n >= 3`, every split with a
/// non-zero ratio receives at least one sample, borrowed from the largest split.
pub fn apportion(n: usize, ratios: &SplitRatios) -> [usize; 3] {
    let r = ratios.as_array();
    let quotas = r.map(|x| x * n as f64);
    let mut counts = quotas.map(|q| q.floor() as usize);
    let assigned: usize = counts.iter().sum();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    if n >= 3 {
        for k in 0..3 {
            if r[k] > 0.0 && counts[k] == 0 {
                let donor = (0..3)
                    .filter(|&d| counts[d] > 1)
                    .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
                    .expect("n >= 3 leaves a split with more than one sample");
                counts[donor] -= 1;
                counts[k] += 1;
            }
        }
    }
    counts
}

/// Stable 64-bit FNV-1a, used to key each label's shuffle stream.
fn label_stream(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Assigns train/val/test within each label after a seeded shuffle.
pub fn stratified_split(
    manifest: &DatasetManifest,
    ratios: &SplitRatios,
    seed: u64,
) -> Result<DatasetManifest> {
    if let Some(r) = manifest.records.iter().find(|r| r.split != Split::Unassigned) {
        return Err(Error::AlreadySplit(r.path.clone()));
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.records.iter().enumerate() {
        by_label.entry(r.label.as_str()).or_default().push(i);
    }
    let mut records = manifest.records.clone();
    for (label, mut members) in by_label {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(label_stream(label));
        members.shuffle(&mut rng);
        let counts = apportion(members.len(), ratios);
        let mut cursor = members.into_iter();
        for (split, count) in SPLITS.into_iter().zip(counts) {
            for idx in cursor.by_ref().take(count) {
                records[idx].split = split;
            }
        }
    }
    Ok(DatasetManifest { records })
}
