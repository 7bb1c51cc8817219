//! PNG input and output for equirectangular rasters.
//!
//! 8- and 16-bit grayscale and RGB images are supported. Samples are scaled to `[0, 1]`
//! on load and back on save; `raw` mode keeps integer sample values untouched, which is
//! what class-id maps need.

use std::io::Cursor;

use geosphere_core::EquirectImage;
use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};

/// Output sample depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Depth {
    #[default]
    Eight,
    Sixteen,
}

impl Depth {
    fn max_value(self) -> f64 {
        match self {
            Depth::Eight => 255.0,
            Depth::Sixteen => 65535.0,
        }
    }
}

pub fn decode_png(bytes: &[u8], raw: bool) -> Result<EquirectImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    // Palettes and sub-byte grayscale become plain 8-bit samples.
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::Rgb => 3,
        other => {
            return Err(Error::at_byte(
                "PNG",
                0,
                format!("unsupported color type {other:?}; expected grayscale or RGB"),
            ))
        }
    };
    let (h, w) = (info.height as usize, info.width as usize);
    let n = h * w * channels;
    let data: Vec<f64> = match info.bit_depth {
        BitDepth::Sixteen => {
            let scale = if raw { 1.0 } else { 65535.0 };
            buf[..info.line_size * h]
                .chunks(info.line_size)
                .flat_map(|row| row[..w * channels * 2].chunks_exact(2))
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
                .collect()
        }
        _ => {
            let scale = if raw { 1.0 } else { 255.0 };
            buf[..info.line_size * h]
                .chunks(info.line_size)
                .flat_map(|row| &row[..w * channels])
                .map(|&b| b as f64 / scale)
                .collect()
        }
    };
    debug_assert_eq!(data.len(), n);
    Ok(EquirectImage::new(h, w, channels, data)?)
}

/// Quantizes one value to the output range: scaled from `[0, 1]`, or taken as-is in raw
/// mode, then rounded and clamped.
fn quantize(x: f64, depth: Depth, raw: bool) -> u16 {
    let max = depth.max_value();
    let v = if raw { x } else { x * max };
    v.round().clamp(0.0, max) as u16
}

pub fn encode_png(img: &EquirectImage, depth: Depth, raw: bool) -> Result<Vec<u8>> {
    let color = match img.channels() {
        1 => ColorType::Grayscale,
        3 => ColorType::Rgb,
        c => {
            return Err(Error::Usage(format!(
                "PNG output needs 1 or 3 channels, signal has {c}"
            )))
        }
    };
    let width = u32::try_from(img.width()).map_err(|_| Error::Usage("width too large".into()))?;
    let height =
        u32::try_from(img.height()).map_err(|_| Error::Usage("height too large".into()))?;
    let samples: Vec<u8> = match depth {
        Depth::Eight => img
            .data()
            .iter()
            .map(|&x| quantize(x, depth, raw) as u8)
            .collect(),
        Depth::Sixteen => img
            .data()
            .iter()
            .flat_map(|&x| quantize(x, depth, raw).to_be_bytes())
            .collect(),
    };
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(match depth {
            Depth::Eight => BitDepth::Eight,
            Depth::Sixteen => BitDepth::Sixteen,
        });
        let mut writer = enc.write_header()?;
        writer.write_image_data(&samples)?;
        writer.finish()?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_8_and_16_bit() {
        let img = EquirectImage::from_fn(4, 8, 3, |p, c| {
            ((p.lon.sin() + 1.0) / 2.0 * (c + 1) as f64 / 3.0).clamp(0.0, 1.0)
        })
        .unwrap();
        for (depth, tol) in [(Depth::Eight, 0.5 / 255.0), (Depth::Sixteen, 0.5 / 65535.0)] {
            let bytes = encode_png(&img, depth, false).unwrap();
            let back = decode_png(&bytes, false).unwrap();
            assert_eq!((back.height(), back.width(), back.channels()), (4, 8, 3));
            for (a, b) in img.data().iter().zip(back.data()) {
                assert!((a - b).abs() <= tol + 1e-15);
            }
        }
    }

    #[test]
    fn raw_mode_keeps_integers() {
        let img =
            EquirectImage::new(2, 4, 1, vec![0.0, 1.0, 2.0, 3.0, 300.0, 5.0, 6.0, 7.0]).unwrap();
        let back = decode_png(&encode_png(&img, Depth::Sixteen, true).unwrap(), true).unwrap();
        assert_eq!(back.data(), img.data());
        let back = decode_png(&encode_png(&img, Depth::Eight, true).unwrap(), true).unwrap();
        assert_eq!(back.get(1, 0, 0), 255.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode_png(b"not a png", false).is_err());
        let two = EquirectImage::filled(2, 4, 2, 0.0).unwrap();
        assert!(matches!(
            encode_png(&two, Depth::Eight, false),
            Err(Error::Usage(_))
        ));
    }
}
