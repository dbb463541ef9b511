//! Aliasing-free drawing primitives on RGB images. Every primitive clips to
//! the image.

use crate::raster::ImageBuffer;

pub type Rgb = [u8; 3];

/// Fills the pixel rectangle `[x0, x1) x [y0, y1)`.
pub fn fill_rect(img: &mut ImageBuffer, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    for y in y0.max(0)..y1.min(h) {
        for x in x0.max(0)..x1.min(w) {
            img.set_pixel(x as usize, y as usize, &c);
        }
    }
}

/// 1-px segment between two pixel positions (Bresenham).
pub fn line(img: &mut ImageBuffer, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        fill_rect(img, x0, y0, x0 + 1, y0 + 1, c);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Filled disc of all pixels within `r` of pixel `(cx, cy)`, measured
/// center to center.
pub fn disc(img: &mut ImageBuffer, cx: i64, cy: i64, r: i64, c: Rgb) {
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                fill_rect(img, cx + dx, cy + dy, cx + dx + 1, cy + dy + 1, c);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Channels;

    fn ink(img: &ImageBuffer) -> usize {
        (0..img.height())
            .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| img.rgb(x, y) != [255, 255, 255])
            .count()
    }

    #[test]
    fn disc_radius_three() {
        let mut img = ImageBuffer::filled(20, 20, Channels::Rgb8, &[255, 255, 255]).unwrap();
        disc(&mut img, 10, 10, 3, [0, 0, 0]);
        // lattice points with dx^2 + dy^2 <= 9
        assert_eq!(ink(&img), 29);
        for y in 8..=12 {
            for x in 8..=12 {
                assert_eq!(img.rgb(x, y), [0, 0, 0]);
            }
        }
    }

    #[test]
    fn diagonal_line_is_connected() {
        let mut img = ImageBuffer::filled(20, 20, Channels::Rgb8, &[255, 255, 255]).unwrap();
        line(&mut img, (2, 3), (15, 9), [0, 0, 0]);
        assert_eq!(ink(&img), 14);
        assert_eq!(img.rgb(2, 3), [0, 0, 0]);
        assert_eq!(img.rgb(15, 9), [0, 0, 0]);
    }

    #[test]
    fn clipped_rect() {
        let mut img = ImageBuffer::filled(5, 5, Channels::Rgb8, &[255, 255, 255]).unwrap();
        fill_rect(&mut img, -2, 3, 9, 10, [1, 2, 3]);
        assert_eq!(ink(&img), 10);
    }
}
