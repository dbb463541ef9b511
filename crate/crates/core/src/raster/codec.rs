//! PNG encode/decode, backed by the `png` crate.

use std::io::Cursor;

use super::{Channels, ImageBuffer};
use crate::error::{Error, Result};

fn codec_err(e: impl std::fmt::Display) -> Error {
    Error::Codec(e.to_string())
}

/// Encodes an 8-bit gray or RGB image as a non-interlaced PNG.
pub fn encode_image(img: &ImageBuffer) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(match img.channels() {
            Channels::Gray8 => png::ColorType::Grayscale,
            Channels::Rgb8 => png::ColorType::Rgb,
        });
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(codec_err)?;
        writer.write_image_data(img.data()).map_err(codec_err)?;
        writer.finish().map_err(codec_err)?;
    }
    Ok(out)
}

/// Decodes an 8-bit PNG. Palette images are expanded to RGB and alpha
/// channels are dropped; 16-bit and sub-byte depths are rejected.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::EXPAND);
    let mut reader = dec.read_info().map_err(codec_err)?;
    let depth = reader.info().bit_depth;
    let src_color = reader.info().color_type;
    if depth != png::BitDepth::Eight && src_color != png::ColorType::Indexed {
        return Err(Error::Codec(format!("unsupported bit depth {depth:?}")));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Codec("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(codec_err)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Codec(format!(
            "unsupported bit depth {:?}",
            info.bit_depth
        )));
    }
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width as usize, info.height as usize);
    let (channels, data) = match info.color_type {
        png::ColorType::Grayscale => (Channels::Gray8, buf),
        png::ColorType::Rgb => (Channels::Rgb8, buf),
        png::ColorType::GrayscaleAlpha => (Channels::Gray8, buf.chunks(2).map(|p| p[0]).collect()),
        png::ColorType::Rgba => (
            Channels::Rgb8,
            buf.chunks(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        ),
        png::ColorType::Indexed => return Err(Error::Codec("palette not expanded".into())),
    };
    ImageBuffer::new(w, h, channels, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_pixel_round_trip() {
        let img = ImageBuffer::new(1, 1, Channels::Gray8, vec![42]).unwrap();
        assert_eq!(decode_image(&encode_image(&img).unwrap()).unwrap(), img);
    }

    #[test]
    fn truncated_stream_fails() {
        let img = ImageBuffer::filled(16, 16, Channels::Rgb8, &[10, 20, 30]).unwrap();
        let bytes = encode_image(&img).unwrap();
        assert!(decode_image(&bytes[..bytes.len() / 2]).is_err());
        assert!(decode_image(b"not a png").is_err());
    }

    #[test]
    fn sixteen_bit_rejected() {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, 2, 2);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Sixteen);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0u8; 8]).unwrap();
        }
        let err = decode_image(&out).unwrap_err();
        assert!(err.to_string().contains("bit depth"), "{err}");
    }

    proptest! {
        #[test]
        fn rgb_round_trip(data in prop::collection::vec(any::<u8>(), 16 * 16 * 3)) {
            let img = ImageBuffer::new(16, 16, Channels::Rgb8, data).unwrap();
            prop_assert_eq!(decode_image(&encode_image(&img).unwrap()).unwrap(), img);
        }

        #[test]
        fn gray_round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u8>()) {
            let data = (0..w * h).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect();
            let img = ImageBuffer::new(w, h, Channels::Gray8, data).unwrap();
            prop_assert_eq!(decode_image(&encode_image(&img).unwrap()).unwrap(), img);
        }
    }
}
