//! Binary morphology with a `(2r+1) x (2r+1)` square structuring element.
//! Pixels outside the raster count as background, so opening is the exact
//! set-theoretic opening of the foreground and therefore idempotent.

use super::ImageBuffer;

// One separable pass of a window-count filter along rows (`horizontal`) or
// columns. `all` selects erosion (every window pixel set) vs dilation (any).
fn pass(mask: &[bool], w: usize, h: usize, r: usize, horizontal: bool, all: bool) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    let (lines, len) = if horizontal { (h, w) } else { (w, h) };
    let idx = |line: usize, pos: usize| {
        if horizontal {
            line * w + pos
        } else {
            pos * w + line
        }
    };
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for pos in 0..len {
            prefix[pos + 1] = prefix[pos] + mask[idx(line, pos)] as usize;
        }
        for pos in 0..len {
            let lo = pos.saturating_sub(r);
            let hi = (pos + r + 1).min(len);
            let count = prefix[hi] - prefix[lo];
            out[idx(line, pos)] = if all {
                // window must lie fully inside the raster
                pos >= r && pos + r < len && count == 2 * r + 1
            } else {
                count > 0
            };
        }
    }
    out
}

pub fn erode_mask(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    if r == 0 {
        return mask.to_vec();
    }
    let rows = pass(mask, w, h, r, true, true);
    pass(&rows, w, h, r, false, true)
}

pub fn dilate_mask(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    if r == 0 {
        return mask.to_vec();
    }
    let rows = pass(mask, w, h, r, true, false);
    pass(&rows, w, h, r, false, false)
}

/// Erosion followed by dilation.
pub fn open_mask(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    dilate_mask(&erode_mask(mask, w, h, r), w, h, r)
}

/// Morphological opening of a binary image (non-zero = foreground).
pub fn morph_open(img: &ImageBuffer, radius: usize) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let opened = open_mask(&img.to_mask(), w, h, radius);
    ImageBuffer::from_mask(w, h, &opened).expect("dimensions preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Direct definition: erosion keeps p iff every window pixel is inside and
    // set; dilation sets p iff some eroded pixel's window covers it.
    fn brute_open(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
        let r = r as isize;
        let at = |x: isize, y: isize| {
            x >= 0
                && y >= 0
                && (x as usize) < w
                && (y as usize) < h
                && mask[y as usize * w + x as usize]
        };
        let mut eroded = vec![false; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                eroded[y as usize * w + x as usize] =
                    (-r..=r).all(|dy| (-r..=r).all(|dx| at(x + dx, y + dy)));
            }
        }
        let mut out = vec![false; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                out[y as usize * w + x as usize] = (-r..=r).any(|dy| {
                    (-r..=r).any(|dx| {
                        let (sx, sy) = (x + dx, y + dy);
                        sx >= 0
                            && sy >= 0
                            && (sx as usize) < w
                            && (sy as usize) < h
                            && eroded[sy as usize * w + sx as usize]
                    })
                });
            }
        }
        out
    }

    #[test]
    fn radius_zero_is_identity() {
        let mask: Vec<bool> = (0..49).map(|i| i % 3 == 0).collect();
        assert_eq!(open_mask(&mask, 7, 7, 0), mask);
    }

    #[test]
    fn isolated_pixel_removed() {
        let mut mask = vec![false; 81];
        mask[4 * 9 + 4] = true;
        assert!(open_mask(&mask, 9, 9, 1).iter().all(|&m| !m));
    }

    #[test]
    fn solid_square_unchanged() {
        let mut mask = vec![false; 81];
        for y in 2..7 {
            for x in 2..7 {
                mask[y * 9 + x] = true;
            }
        }
        let opened = open_mask(&mask, 9, 9, 1);
        assert_eq!(opened, brute_open(&mask, 9, 9, 1));
        assert_eq!(opened, mask);
    }

    #[test]
    fn image_wrapper_keeps_binary_values() {
        let img = ImageBuffer::from_mask(3, 3, &[true; 9]).unwrap();
        assert_eq!(morph_open(&img, 1), img);
    }

    proptest! {
        #[test]
        fn matches_brute_force(w in 1usize..14, h in 1usize..14, r in 0usize..3, bits in any::<u64>(), bits2 in any::<u64>()) {
            let mask: Vec<bool> = (0..w * h).map(|i| {
                let b = if i < 64 { bits >> i } else { bits2 >> (i % 64) };
                b & 1 == 1 || (i % 5 == 0)
            }).collect();
            prop_assert_eq!(open_mask(&mask, w, h, r), brute_open(&mask, w, h, r));
        }

        #[test]
        fn opening_is_idempotent(w in 1usize..24, h in 1usize..24, r in 0usize..3, seed in any::<u64>()) {
            let mask: Vec<bool> = (0..w * h)
                .map(|i| (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64).wrapping_mul(1442695040888963407) >> 61) < 5)
                .collect();
            let once = open_mask(&mask, w, h, r);
            prop_assert_eq!(open_mask(&once, w, h, r), once);
        }
    }
}
