//! Reference enhancers used as comparison points: global histogram
//! equalization, fixed power-law gamma, and a CDF-driven adaptive gamma.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, Pixels};

/// Exponent of the power-law correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGamma")]
pub struct GammaParams {
    gamma: f64,
}

#[derive(Deserialize)]
struct RawGamma {
    gamma: f64,
}

impl TryFrom<RawGamma> for GammaParams {
    type Error = Error;

    fn try_from(raw: RawGamma) -> Result<Self> {
        GammaParams::new(raw.gamma)
    }
}

impl GammaParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "gamma must be finite and positive, got {gamma}"
            )));
        }
        Ok(GammaParams { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

fn gray_bytes(image: &Image) -> Result<&[u8]> {
    if image.channels() != 1 {
        return Err(Error::UnsupportedChannels(image.channels()));
    }
    image.as_bytes().ok_or_else(|| {
        Error::UnsupportedDomain(format!(
            "{} domain given, 8-bit grayscale required",
            image.domain()
        ))
    })
}

pub fn histogram(data: &[u8]) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in data {
        hist[p as usize] += 1;
    }
    hist
}

pub fn cumulative(hist: &[u64; 256]) -> [u64; 256] {
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (c, &h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    cdf
}

fn remap(image: &Image, data: &[u8], lut: &[u8; 256]) -> Image {
    image.with_pixels(Pixels::Byte(data.iter().map(|&p| lut[p as usize]).collect()))
}

/// Level map of global histogram equalization.
///
/// `CDF_min` is the smallest non-zero cumulative count. When every pixel
/// shares one level the denominator vanishes and that level maps to 0.
pub fn equalization_lut(data: &[u8]) -> [u8; 256] {
    let cdf = cumulative(&histogram(data));
    let total = data.len() as u64;
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);
    let denom = total - cdf_min;
    let mut lut = [0u8; 256];
    if denom == 0 {
        return lut;
    }
    for (out, &c) in lut.iter_mut().zip(&cdf) {
        let v = 255.0 * c.saturating_sub(cdf_min) as f64 / denom as f64;
        *out = v.round() as u8;
    }
    lut
}

/// Global histogram equalization of an 8-bit grayscale image.
pub fn histogram_equalize(image: &Image) -> Result<Image> {
    let data = gray_bytes(image)?;
    Ok(remap(image, data, &equalization_lut(data)))
}

/// `hi * (f / hi)^gamma` in either domain; 8-bit results are rounded.
pub fn gamma_correct(image: &Image, params: GammaParams) -> Result<Image> {
    let g = params.gamma;
    let pixels = match image.pixels() {
        Pixels::Byte(src) => {
            let mut lut = [0u8; 256];
            for (level, out) in lut.iter_mut().enumerate() {
                *out = (255.0 * (level as f64 / 255.0).powf(g)).round() as u8;
            }
            Pixels::Byte(src.iter().map(|&p| lut[p as usize]).collect())
        }
        Pixels::Unit(src) => Pixels::Unit(
            src.iter()
                .map(|&p| f64::from(p).powf(g).clamp(0.0, 1.0) as f32)
                .collect(),
        ),
    };
    Ok(image.with_pixels(pixels))
}

/// Level map `round(255 * (l/255)^(1 - c(l)))` with `c` the normalized CDF.
///
/// A level holding all the mass gets exponent 0; `0^0` evaluates to 1, so a
/// constant image maps its single level to 255.
pub fn adaptive_gamma_lut(data: &[u8]) -> [u8; 256] {
    let cdf = cumulative(&histogram(data));
    let total = data.len().max(1) as f64;
    let mut lut = [0u8; 256];
    for (level, out) in lut.iter_mut().enumerate() {
        let c = cdf[level] as f64 / total;
        let x = level as f64 / 255.0;
        *out = (255.0 * x.powf(1.0 - c)).round() as u8;
    }
    lut
}

/// CDF-driven adaptive gamma on an 8-bit grayscale image.
pub fn adaptive_gamma_cdf(image: &Image) -> Result<Image> {
    let data = gray_bytes(image)?;
    Ok(remap(image, data, &adaptive_gamma_lut(data)))
}
