use super::{distance_transform, Grid, Image, RoiMask};
use crate::error::{invalid, Result};

/// `(cos, sin)` of an angle in degrees, exact at multiples of 90.
pub(crate) fn exact_cos_sin(deg: f64) -> (f64, f64) {
    let d = deg.rem_euclid(360.0);
    if d == 0.0 {
        (1.0, 0.0)
    } else if d == 90.0 {
        (0.0, 1.0)
    } else if d == 180.0 {
        (-1.0, 0.0)
    } else if d == 270.0 {
        (0.0, -1.0)
    } else {
        let r = d.to_radians();
        (r.cos(), r.sin())
    }
}

/// Rotate the content under `mask` by `phi` degrees counter-clockwise (as
/// displayed, y pointing down) about the mask centroid.
///
/// Each masked output pixel is bilinearly resampled from the source at the
/// inversely rotated position. Positions that fall outside the mask read the
/// value of the nearest mask pixel, so no color from outside the ROI leaks in.
/// Pixels outside the mask are copied unchanged.
pub fn rotate_region(img: &Image, mask: &RoiMask, phi: f64) -> Result<Image> {
    let (w, h) = img.dims();
    mask.ensure_dims(w, h)?;
    let (cx, cy) = mask
        .centroid()
        .ok_or_else(|| invalid("rotation mask is empty"))?;
    if phi.rem_euclid(360.0) == 0.0 {
        return Ok(img.clone());
    }
    let (c, s) = exact_cos_sin(phi);
    let nearest = distance_transform(mask).nearest;

    let planes = img
        .planes()
        .iter()
        .map(|plane| {
            let field = Grid::from_vec(w, h, nearest.iter().map(|&i| plane.data()[i]).collect())
                .expect("same size");
            let mut out = plane.clone();
            for y in 0..h {
                for x in 0..w {
                    if !mask.contains(x, y) {
                        continue;
                    }
                    let dx = x as f64 - cx;
                    let dy = y as f64 - cy;
                    let sx = cx + dx * c - dy * s;
                    let sy = cy + dx * s + dy * c;
                    out.set(x, y, field.sample_bilinear(sx, sy));
                }
            }
            out
        })
        .collect();
    Image::from_planes(img.layout(), planes)
}
