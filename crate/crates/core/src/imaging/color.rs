use super::{Grid, Image, Layout};
use crate::error::Result;

/// Intensity `v = (R + G + B) / 3`.
pub fn rgb_to_gray(img: &Image) -> Result<Grid> {
    img.ensure_layout(Layout::Rgb)?;
    let [r, g, b] = [img.plane(0), img.plane(1), img.plane(2)];
    r.zip_map(g, |a, b| a + b)?.zip_map(b, |s, c| (s + c) / 3.0)
}

fn rgb_pixel_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    // achromatic pixels get hue 0
    let h = if delta <= 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let h = (h / 6.0).rem_euclid(1.0);
    (h, s, v)
}

fn hsv_pixel_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let c = v * s;
    let x = c * (1.0 - ((h6 % 2.0) - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match h6 as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    (r + m, g + m, b + m)
}

pub fn rgb_to_hsv(img: &Image) -> Result<Image> {
    img.ensure_layout(Layout::Rgb)?;
    let (w, h) = img.dims();
    let (mut hp, mut sp, mut vp) = (Grid::new(w, h), Grid::new(w, h), Grid::new(w, h));
    for i in 0..w * h {
        let (hh, ss, vv) = rgb_pixel_to_hsv(
            img.plane(0).data()[i],
            img.plane(1).data()[i],
            img.plane(2).data()[i],
        );
        hp.data_mut()[i] = hh;
        sp.data_mut()[i] = ss;
        vp.data_mut()[i] = vv;
    }
    Image::from_planes(Layout::Hsv, vec![hp, sp, vp])
}

pub fn hsv_to_rgb(img: &Image) -> Result<Image> {
    img.ensure_layout(Layout::Hsv)?;
    let (w, h) = img.dims();
    let (mut rp, mut gp, mut bp) = (Grid::new(w, h), Grid::new(w, h), Grid::new(w, h));
    for i in 0..w * h {
        let (r, g, b) = hsv_pixel_to_rgb(
            img.plane(0).data()[i],
            img.plane(1).data()[i],
            img.plane(2).data()[i],
        );
        rp.data_mut()[i] = r;
        gp.data_mut()[i] = g;
        bp.data_mut()[i] = b;
    }
    Image::from_planes(Layout::Rgb, vec![rp, gp, bp])
}
