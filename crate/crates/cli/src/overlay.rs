use chartextract_core::raster::ImageBuffer;
use chartextract_core::{DetectionKind, DetectionSet};

const RED: [u8; 3] = [255, 0, 0];
const DISC_RADIUS: f64 = 3.0;

/// RGB copy of `img` with box outlines and point discs drawn in red.
pub fn draw(img: &ImageBuffer, dets: &DetectionSet) -> ImageBuffer {
    let mut out = img.to_rgb();
    let (w, h) = (out.width(), out.height());
    match dets.kind() {
        DetectionKind::Boxes => {
            for b in dets.box_items() {
                let (c0, r0, c1, r1) = b.pixel_span(w, h);
                if c0 >= c1 || r0 >= r1 {
                    continue;
                }
                for x in c0..c1 {
                    out.set_pixel(x, r0, &RED);
                    out.set_pixel(x, r1 - 1, &RED);
                }
                for y in r0..r1 {
                    out.set_pixel(c0, y, &RED);
                    out.set_pixel(c1 - 1, y, &RED);
                }
            }
        }
        DetectionKind::Points => {
            for p in dets.point_items() {
                let x0 = (p.x() - DISC_RADIUS).floor().max(0.0) as usize;
                let y0 = (p.y() - DISC_RADIUS).floor().max(0.0) as usize;
                let x1 = ((p.x() + DISC_RADIUS).ceil().max(0.0) as usize).min(w);
                let y1 = ((p.y() + DISC_RADIUS).ceil().max(0.0) as usize).min(h);
                for y in y0..y1 {
                    for x in x0..x1 {
                        let (dx, dy) = (x as f64 + 0.5 - p.x(), y as f64 + 0.5 - p.y());
                        if dx * dx + dy * dy <= DISC_RADIUS * DISC_RADIUS {
                            out.set_pixel(x, y, &RED);
                        }
                    }
                }
            }
        }
    }
    out
}
