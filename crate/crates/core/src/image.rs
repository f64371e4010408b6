//! Raster type and the affine brightness/contrast kernel.
//!
//! An [`Image`] carries its pixel domain explicitly: 8-bit integer samples in
//! `[0, 255]` or normalized `f32` samples in `[0.0, 1.0]`. The affine kernel
//! computes `g = alpha * f + beta` in `f64`, clips to the domain bounds and, for
//! 8-bit images, rounds to nearest with ties away from zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric range the pixels of an image live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PixelDomain {
    /// 8-bit integer samples in `[0, 255]`.
    #[serde(rename = "byte")]
    Byte255,
    /// Normalized real samples in `[0.0, 1.0]`.
    #[serde(rename = "unit")]
    Unit,
}

impl PixelDomain {
    pub const fn lo(self) -> f64 {
        0.0
    }

    pub const fn hi(self) -> f64 {
        match self {
            PixelDomain::Byte255 => 255.0,
            PixelDomain::Unit => 1.0,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            PixelDomain::Byte255 => "byte",
            PixelDomain::Unit => "unit",
        }
    }
}

impl std::fmt::Display for PixelDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PixelDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "byte" | "byte255" => Ok(PixelDomain::Byte255),
            "unit" => Ok(PixelDomain::Unit),
            other => Err(Error::InvalidParams(format!(
                "unknown pixel domain {other:?}, expected byte or unit"
            ))),
        }
    }
}

/// Row-major interleaved sample storage, tagged by domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Pixels {
    Byte(Vec<u8>),
    Unit(Vec<f32>),
}

impl Pixels {
    pub fn domain(&self) -> PixelDomain {
        match self {
            Pixels::Byte(_) => PixelDomain::Byte255,
            Pixels::Unit(_) => PixelDomain::Unit,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Pixels::Byte(v) => v.len(),
            Pixels::Unit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sample `i` widened to `f64`.
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Pixels::Byte(v) => f64::from(v[i]),
            Pixels::Unit(v) => f64::from(v[i]),
        }
    }
}

/// A `width x height` raster with 1 (grayscale) or 3 (RGB) interleaved channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Pixels,
}

impl Image {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Pixels) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} samples for {width}x{height}x{channels}, got {}",
                pixels.len()
            )));
        }
        if let Pixels::Unit(values) = &pixels {
            if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidImage(format!(
                    "unit-domain sample {bad} outside [0, 1]"
                )));
            }
        }
        Ok(Image {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn from_bytes(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, channels, Pixels::Byte(data))
    }

    pub fn from_unit(width: u32, height: u32, channels: u8, data: Vec<f32>) -> Result<Self> {
        Self::new(width, height, channels, Pixels::Unit(data))
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn domain(&self) -> PixelDomain {
        self.pixels.domain()
    }

    pub fn pixels(&self) -> &Pixels {
        &self.pixels
    }

    pub fn into_pixels(self) -> Pixels {
        self.pixels
    }

    /// Number of pixels (not samples).
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match &self.pixels {
            Pixels::Byte(v) => Some(v),
            Pixels::Unit(_) => None,
        }
    }

    pub fn as_unit(&self) -> Option<&[f32]> {
        match &self.pixels {
            Pixels::Unit(v) => Some(v),
            Pixels::Byte(_) => None,
        }
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Extracts one channel as a grayscale image in the same domain.
    pub fn channel(&self, index: u8) -> Result<Image> {
        if index >= self.channels {
            return Err(Error::InvalidParams(format!(
                "channel {index} out of range for {}-channel image",
                self.channels
            )));
        }
        let step = self.channels as usize;
        let start = index as usize;
        let pixels = match &self.pixels {
            Pixels::Byte(v) => Pixels::Byte(v.iter().skip(start).step_by(step).copied().collect()),
            Pixels::Unit(v) => Pixels::Unit(v.iter().skip(start).step_by(step).copied().collect()),
        };
        Image::new(self.width, self.height, 1, pixels)
    }

    /// Interleaves grayscale planes of equal shape and domain into one image.
    pub fn from_channels(planes: &[Image]) -> Result<Image> {
        let first = planes
            .first()
            .ok_or_else(|| Error::InvalidParams("no channel planes given".into()))?;
        for p in planes {
            if p.channels != 1 || !p.same_shape(first) {
                return Err(Error::DimensionMismatch(
                    "channel planes must be grayscale with identical dimensions".into(),
                ));
            }
            if p.domain() != first.domain() {
                return Err(Error::DomainMismatch(
                    "channel planes must share a pixel domain".into(),
                ));
            }
        }
        let n = first.pixel_count();
        let pixels = match first.domain() {
            PixelDomain::Byte255 => {
                let srcs: Vec<&[u8]> = planes.iter().filter_map(Image::as_bytes).collect();
                Pixels::Byte((0..n).flat_map(|i| srcs.iter().map(move |s| s[i])).collect())
            }
            PixelDomain::Unit => {
                let srcs: Vec<&[f32]> = planes.iter().filter_map(Image::as_unit).collect();
                Pixels::Unit((0..n).flat_map(|i| srcs.iter().map(move |s| s[i])).collect())
            }
        };
        Image::new(first.width, first.height, planes.len() as u8, pixels)
    }
}

/// Gain (`alpha`, contrast) and bias (`beta`, brightness) of the affine map.
///
/// `beta` is expressed in the units of the image it is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAffine")]
pub struct AffineParams {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawAffine {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawAffine> for AffineParams {
    type Error = Error;

    fn try_from(raw: RawAffine) -> Result<Self> {
        AffineParams::new(raw.alpha, raw.beta)
    }
}

impl AffineParams {
    pub const IDENTITY: AffineParams = AffineParams {
        alpha: 1.0,
        beta: 0.0,
    };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "gain must be finite and positive, got {alpha}"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::DomainMismatch(format!("bias must be finite, got {beta}")));
        }
        Ok(AffineParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Saturates `value` to `[lo, hi]`.
pub fn clip(value: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidBounds { lo, hi });
    }
    Ok(value.max(lo).min(hi))
}

/// Unclipped-then-clipped affine response for a single sample, before quantization.
#[inline]
fn affine_clipped(f: f64, params: AffineParams, hi: f64) -> f64 {
    (params.alpha * f + params.beta).max(0.0).min(hi)
}

/// 256-entry lookup table of the 8-bit affine response.
pub fn affine_lut(params: AffineParams) -> [u8; 256] {
    let mut lut = [0u8; 256];
    for (level, out) in lut.iter_mut().enumerate() {
        *out = affine_clipped(level as f64, params, 255.0).round() as u8;
    }
    lut
}

/// Applies `clip(alpha * f + beta, lo, hi)` to every sample, returning a new image.
pub fn apply_affine(image: &Image, params: AffineParams) -> Image {
    let pixels = match &image.pixels {
        Pixels::Byte(src) => {
            let lut = affine_lut(params);
            Pixels::Byte(src.iter().map(|&p| lut[p as usize]).collect())
        }
        Pixels::Unit(src) => Pixels::Unit(
            src.iter()
                .map(|&p| affine_clipped(f64::from(p), params, 1.0) as f32)
                .collect(),
        ),
    };
    image.with_pixels(pixels)
}

/// Re-expresses the samples of `image` in `target` units.
pub fn convert_domain(image: &Image, target: PixelDomain) -> Image {
    let pixels = match (&image.pixels, target) {
        (Pixels::Byte(_), PixelDomain::Byte255) | (Pixels::Unit(_), PixelDomain::Unit) => {
            image.pixels.clone()
        }
        (Pixels::Byte(src), PixelDomain::Unit) => {
            Pixels::Unit(src.iter().map(|&p| f32::from(p) / 255.0).collect())
        }
        (Pixels::Unit(src), PixelDomain::Byte255) => Pixels::Byte(
            src.iter()
                .map(|&p| (f64::from(p) * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect(),
        ),
    };
    image.with_pixels(pixels)
}

impl Image {
    /// Same geometry, new samples. Callers guarantee `pixels` matches the sample count.
    pub(crate) fn with_pixels(&self, pixels: Pixels) -> Image {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            pixels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_byte(values: &[u8]) -> Image {
        Image::from_bytes(values.len() as u32, 1, 1, values.to_vec()).unwrap()
    }

    #[test]
    fn affine_rounds_to_nearest() {
        let img = gray_byte(&[100]);
        let out = apply_affine(&img, AffineParams::new(1.15, -0.1).unwrap());
        assert_eq!(out.as_bytes().unwrap(), &[115]);
    }

    #[test]
    fn affine_saturates_high_byte() {
        let img = gray_byte(&[255]);
        let out = apply_affine(&img, AffineParams::new(1.35, 0.4).unwrap());
        assert_eq!(out.as_bytes().unwrap(), &[255]);
    }

    #[test]
    fn affine_saturates_high_unit() {
        let img = Image::from_unit(1, 1, 1, vec![0.5]).unwrap();
        let out = apply_affine(&img, AffineParams::new(1.35, 0.4).unwrap());
        assert_eq!(out.as_unit().unwrap(), &[1.0]);
    }

    #[test]
    fn affine_saturates_low() {
        let img = gray_byte(&[0, 3]);
        let out = apply_affine(&img, AffineParams::new(1.0, -10.0).unwrap());
        assert_eq!(out.as_bytes().unwrap(), &[0, 0]);
    }

    #[test]
    fn identity_params_are_bit_exact() {
        let bytes: Vec<u8> = (0..=255).collect();
        let img = Image::from_bytes(16, 16, 1, bytes).unwrap();
        assert_eq!(apply_affine(&img, AffineParams::IDENTITY), img);

        let unit: Vec<f32> = (0..48).map(|i| i as f32 / 47.0).collect();
        let img = Image::from_unit(4, 4, 3, unit).unwrap();
        assert_eq!(apply_affine(&img, AffineParams::IDENTITY), img);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(AffineParams::new(0.0, 0.0), Err(Error::InvalidParams(_))));
        assert!(matches!(AffineParams::new(-1.2, 0.0), Err(Error::InvalidParams(_))));
        assert!(matches!(AffineParams::new(f64::NAN, 0.0), Err(Error::InvalidParams(_))));
        assert!(matches!(AffineParams::new(1.0, f64::INFINITY), Err(Error::DomainMismatch(_))));
        assert!(matches!(AffineParams::new(1.0, f64::NAN), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn clip_cases() {
        assert_eq!(clip(300.0, 0.0, 255.0).unwrap(), 255.0);
        assert_eq!(clip(-5.0, 0.0, 255.0).unwrap(), 0.0);
        assert_eq!(clip(114.9, 0.0, 255.0).unwrap(), 114.9);
        assert!(matches!(clip(1.0, 2.0, 1.0), Err(Error::InvalidBounds { .. })));
    }

    #[test]
    fn domain_conversion_endpoints() {
        let img = gray_byte(&[0, 255]);
        let unit = convert_domain(&img, PixelDomain::Unit);
        assert_eq!(unit.as_unit().unwrap(), &[0.0, 1.0]);
        assert_eq!(convert_domain(&img, PixelDomain::Byte255), img);
    }

    #[test]
    fn domain_round_trip_all_levels() {
        let bytes: Vec<u8> = (0..=255).collect();
        let img = Image::from_bytes(256, 1, 1, bytes).unwrap();
        let back = convert_domain(&convert_domain(&img, PixelDomain::Unit), PixelDomain::Byte255);
        assert_eq!(back, img);
    }

    #[test]
    fn image_validation() {
        assert!(Image::from_bytes(0, 1, 1, vec![]).is_err());
        assert!(Image::from_bytes(2, 2, 2, vec![0; 8]).is_err());
        assert!(Image::from_bytes(2, 2, 1, vec![0; 3]).is_err());
        assert!(Image::from_unit(1, 1, 1, vec![1.5]).is_err());
        assert!(Image::from_unit(1, 1, 1, vec![f32::NAN]).is_err());
    }

    #[test]
    fn channel_split_and_merge() {
        let img = Image::from_bytes(2, 1, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let planes: Vec<Image> = (0..3).map(|c| img.channel(c).unwrap()).collect();
        assert_eq!(planes[1].as_bytes().unwrap(), &[2, 5]);
        assert_eq!(Image::from_channels(&planes).unwrap(), img);
    }

    #[test]
    fn domain_parsing() {
        assert_eq!("byte".parse::<PixelDomain>().unwrap(), PixelDomain::Byte255);
        assert_eq!("unit".parse::<PixelDomain>().unwrap(), PixelDomain::Unit);
        assert!("float".parse::<PixelDomain>().is_err());
    }
}
