//! Image buffers and the binary-image operations the detectors are built on.

mod codec;
mod label;
mod morph;

pub use codec::{decode_image, encode_image};
pub use label::{
    component_stats, label_components, label_mask, ComponentStats, Connectivity, LabelMap,
};
pub use morph::{dilate_mask, erode_mask, morph_open, open_mask};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channels {
    Gray8,
    Rgb8,
}

impl Channels {
    pub fn count(&self) -> usize {
        match self {
            Channels::Gray8 => 1,
            Channels::Rgb8 => 3,
        }
    }
}

/// Row-major 8-bit raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: Channels,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: Channels, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(
                "image",
                "width and height must be at least 1",
            ));
        }
        let expected = width * height * channels.count();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// An image with every pixel set to `fill`, which must hold one sample per
    /// channel.
    pub fn filled(width: usize, height: usize, channels: Channels, fill: &[u8]) -> Result<Self> {
        if fill.len() != channels.count() {
            return Err(Error::DimensionMismatch {
                expected: channels.count(),
                actual: fill.len(),
            });
        }
        let data = fill.repeat(width * height);
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    fn offset(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * self.channels.count()
    }

    /// Sample slice of one pixel.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels.count()]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, value: &[u8]) {
        let o = self.offset(x, y);
        let n = self.channels.count();
        self.data[o..o + n].copy_from_slice(&value[..n]);
    }

    /// Pixel as RGB; gray pixels are replicated across channels.
    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        match self.channels {
            Channels::Rgb8 => {
                let p = self.pixel(x, y);
                [p[0], p[1], p[2]]
            }
            Channels::Gray8 => {
                let v = self.data[y * self.width + x];
                [v, v, v]
            }
        }
    }

    pub fn to_rgb(&self) -> ImageBuffer {
        match self.channels {
            Channels::Rgb8 => self.clone(),
            Channels::Gray8 => ImageBuffer {
                width: self.width,
                height: self.height,
                channels: Channels::Rgb8,
                data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            },
        }
    }

    /// Foreground mask of a binary image: any non-zero gray sample.
    pub fn to_mask(&self) -> Vec<bool> {
        match self.channels {
            Channels::Gray8 => self.data.iter().map(|&v| v != 0).collect(),
            Channels::Rgb8 => self
                .data
                .chunks(3)
                .map(|p| p.iter().any(|&v| v != 0))
                .collect(),
        }
    }

    /// Binary gray image (0/255) from a mask.
    pub fn from_mask(width: usize, height: usize, mask: &[bool]) -> Result<Self> {
        let data = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
        Self::new(width, height, Channels::Gray8, data)
    }
}

/// Luma conversion: `round(0.299 r + 0.587 g + 0.114 b)`.
pub fn to_gray(img: &ImageBuffer) -> ImageBuffer {
    if img.channels == Channels::Gray8 {
        return img.clone();
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| {
            let v = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    ImageBuffer {
        width: img.width,
        height: img.height,
        channels: Channels::Gray8,
        data,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Foreground is `value < threshold`.
    DarkForeground,
    /// Foreground is `value >= threshold`.
    LightForeground,
}

/// Thresholds a gray image into 0/255. RGB input is converted with
/// [`to_gray`] first.
pub fn binarize(img: &ImageBuffer, threshold: u8, polarity: Polarity) -> ImageBuffer {
    let gray = to_gray(img);
    let data = gray
        .data
        .iter()
        .map(|&v| {
            let fg = match polarity {
                Polarity::DarkForeground => v < threshold,
                Polarity::LightForeground => v >= threshold,
            };
            if fg {
                255
            } else {
                0
            }
        })
        .collect();
    ImageBuffer { data, ..gray }
}
