//! Seeded synthetic scenes used by tests, benchmarks and the CLI demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imaging::io::LabelMap;
use crate::imaging::{hsv_to_rgb, Grid, Image, Layout, RoiMask};

/// An image with a region of interest and optional distractor regions.
#[derive(Debug, Clone)]
pub struct Scene {
    pub image: Image,
    pub mask: RoiMask,
    pub distractors: Vec<RoiMask>,
}

/// A labelled image with one target importance per label.
#[derive(Debug, Clone)]
pub struct SegmentScene {
    pub image: Image,
    pub labels: LabelMap,
    pub targets: Vec<f64>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Filled rotated rectangle centered at `(cx, cy)`; `deg` is counter-clockwise
/// as displayed.
pub fn bar_mask(w: usize, h: usize, cx: f64, cy: f64, len: f64, thick: f64, deg: f64) -> RoiMask {
    let t = deg.to_radians();
    let (ux, uy) = (t.cos(), -t.sin());
    RoiMask::from_fn(w, h, |x, y| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        let along = dx * ux + dy * uy;
        let across = -dx * uy + dy * ux;
        along.abs() <= len / 2.0 && across.abs() <= thick / 2.0
    })
}

pub fn rect_mask(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> RoiMask {
    RoiMask::from_fn(w, h, |x, y| {
        x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh
    })
}

fn paint(w: usize, h: usize, bg: [f64; 3], items: &[(&RoiMask, [f64; 3])]) -> Image {
    let planes: Vec<Grid> = (0..3)
        .map(|c| {
            Grid::from_fn(w, h, |x, y| {
                items
                    .iter()
                    .rev()
                    .find(|(m, _)| m.contains(x, y))
                    .map_or(bg[c], |(_, col)| col[c])
            })
        })
        .collect();
    Image::from_planes(Layout::Rgb, planes).expect("rgb planes")
}

/// Bars on a jittered 5x5 lattice, oriented per index.
fn lattice(r: &mut ChaCha8Rng, size: usize, angle: impl Fn(usize) -> f64) -> Vec<RoiMask> {
    let step = size as f64 / 5.0;
    (0..25)
        .map(|k| {
            let cx = step * ((k % 5) as f64 + 0.5) + r.random_range(-4.0..4.0);
            let cy = step * ((k / 5) as f64 + 0.5) + r.random_range(-4.0..4.0);
            bar_mask(size, size, cx, cy, 24.0, 6.0, angle(k))
        })
        .collect()
}

/// A red bar among green bars on black.
pub fn popout_color(seed: u64) -> Scene {
    let mut r = rng(seed);
    let odd = r.random_range(0..25);
    let base = r.random_range(0.0..180.0);
    let masks = lattice(&mut r, 256, |_| base);
    let items: Vec<(&RoiMask, [f64; 3])> = masks
        .iter()
        .enumerate()
        .map(|(k, m)| {
            (
                m,
                if k == odd {
                    [1.0, 0.0, 0.0]
                } else {
                    [0.0, 1.0, 0.0]
                },
            )
        })
        .collect();
    let image = paint(256, 256, [0.0; 3], &items);
    split(image, masks, odd)
}

/// A bar tilted 45 degrees among horizontal bars, white on black.
pub fn popout_orientation(seed: u64) -> Scene {
    let mut r = rng(seed);
    let odd = r.random_range(0..25);
    let masks = lattice(&mut r, 256, |k| if k == odd { 45.0 } else { 0.0 });
    let items: Vec<(&RoiMask, [f64; 3])> = masks.iter().map(|m| (m, [1.0; 3])).collect();
    let image = paint(256, 256, [0.0; 3], &items);
    split(image, masks, odd)
}

fn split(image: Image, mut masks: Vec<RoiMask>, odd: usize) -> Scene {
    let mask = masks.remove(odd);
    Scene {
        image,
        mask,
        distractors: masks,
    }
}

/// Smooth shading over the whole frame.
fn smooth_background(w: usize, h: usize, r: &mut ChaCha8Rng) -> Grid {
    let phase = r.random_range(0.0..std::f64::consts::TAU);
    Grid::from_fn(w, h, |x, y| {
        let u = (x + y) as f64 / (w + h) as f64;
        0.15 + 0.7 * u + 0.05 * (phase + 2.0 * std::f64::consts::PI * y as f64 / h as f64).sin()
    })
}

/// Fine grating patch on a smooth ramp; the mask is the patch.
pub fn texture_patch(seed: u64) -> Scene {
    let mut r = rng(seed);
    let (w, h) = (256, 256);
    let side = r.random_range(56..80);
    let x0 = r.random_range(40..w - side - 40);
    let y0 = r.random_range(40..h - side - 40);
    let mask = rect_mask(w, h, x0, y0, side, side);
    let theta: f64 = r.random_range(0.0..std::f64::consts::PI);
    let wavelength = r.random_range(4.0..7.0);
    let amp = r.random_range(0.12..0.2);
    let bg = smooth_background(w, h, &mut r);
    let (c, s) = (theta.cos(), theta.sin());
    let g = Grid::from_fn(w, h, |x, y| {
        let v = bg.get(x, y);
        if mask.contains(x, y) {
            let t = (x as f64 * c + y as f64 * s) * std::f64::consts::TAU / wavelength;
            v + amp * t.sin()
        } else {
            v
        }
    });
    let image = Image::gray(g).expect("gray").to_rgb();
    Scene {
        image,
        mask,
        distractors: Vec::new(),
    }
}

/// Uniform mid-gray field with light noise and a rectangular ROI.
pub fn gray_roi(seed: u64) -> Scene {
    let mut r = rng(seed);
    let (w, h) = (256, 256);
    let rw = r.random_range(40..72);
    let rh = r.random_range(40..72);
    let x0 = r.random_range(60..w - rw - 60);
    let y0 = r.random_range(60..h - rh - 60);
    let mask = rect_mask(w, h, x0, y0, rw, rh);
    let level = r.random_range(0.4..0.6);
    let g = Grid::from_fn(w, h, |_, _| level + r.random_range(-0.01..0.01));
    Scene {
        image: Image::gray(g).expect("gray").to_rgb(),
        mask,
        distractors: Vec::new(),
    }
}

/// Floor of square tiles separated by dark grout; the ROI is one tile with
/// its grout frame.
pub fn tile_floor(seed: u64) -> Scene {
    let mut r = rng(seed);
    let (w, h) = (256, 256);
    let pitch = 32;
    let grout = 4;
    let shades: Vec<f64> = (0..64).map(|_| r.random_range(0.55..0.8)).collect();
    let g = Grid::from_fn(w, h, |x, y| {
        if x % pitch < grout || y % pitch < grout {
            0.1
        } else {
            shades[(y / pitch) * 8 + x / pitch]
        }
    });
    let tx = r.random_range(2..6);
    let ty = r.random_range(2..6);
    let mask = rect_mask(
        w,
        h,
        tx * pitch + grout / 2,
        ty * pitch + grout / 2,
        pitch,
        pitch,
    );
    Scene {
        image: Image::gray(g).expect("gray").to_rgb(),
        mask,
        distractors: Vec::new(),
    }
}

/// Mottled field whose hues spread around a common center; ROI and surround
/// share the same hue distribution.
pub fn hue_field(seed: u64) -> Scene {
    let mut r = rng(seed);
    let (w, h) = (256, 256);
    let center: f64 = r.random_range(0.0..1.0);
    let cell = 8;
    let (cw, ch) = (w / cell, h / cell);
    let hues: Vec<f64> = (0..cw * ch)
        .map(|_| (center + r.random_range(-0.06..0.06)).rem_euclid(1.0))
        .collect();
    let sats: Vec<f64> = (0..cw * ch).map(|_| r.random_range(0.6..0.9)).collect();
    let hue = Grid::from_fn(w, h, |x, y| hues[(y / cell) * cw + x / cell]);
    let sat = Grid::from_fn(w, h, |x, y| sats[(y / cell) * cw + x / cell]);
    let val = Grid::filled(w, h, 0.8);
    let side = r.random_range(48..72);
    let x0 = r.random_range(48..w - side - 48);
    let y0 = r.random_range(48..h - side - 48);
    let mask = rect_mask(w, h, x0, y0, side, side);
    let hsv = Image::from_planes(Layout::Hsv, vec![hue, sat, val]).expect("hsv");
    Scene {
        image: hsv_to_rgb(&hsv).expect("rgb"),
        mask,
        distractors: Vec::new(),
    }
}

/// Objects colored like a mottled background of the same hue and value
/// spread, with per-object labels
/// (0 = background). Returns the scene and the label raster.
pub fn camouflage(seed: u64, objects: usize) -> (Scene, LabelMap) {
    let mut r = rng(seed);
    let (w, h) = (256, 256);
    let bg_hue: f64 = r.random_range(0.0..1.0);
    let mut labels = vec![0u32; w * h];
    let mut rects = Vec::new();
    for k in 0..objects {
        let side = r.random_range(40..56);
        let x0 = 30 + k * (w - 60) / objects + r.random_range(0..8);
        let y0 = r.random_range(60..h - side - 60);
        rects.push((x0, y0, side.min((w - 60) / objects - 10)));
    }
    for (k, &(x0, y0, side)) in rects.iter().enumerate() {
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                labels[y * w + x] = k as u32 + 1;
            }
        }
    }
    let cell = 16;
    let cw = w / cell;
    let jitter = |r: &mut ChaCha8Rng| (bg_hue + r.random_range(-0.03..0.03)).rem_euclid(1.0);
    let cell_hues: Vec<f64> = (0..cw * (h / cell)).map(|_| jitter(&mut r)).collect();
    let cell_vals: Vec<f64> = (0..cw * (h / cell))
        .map(|_| r.random_range(0.55..0.65))
        .collect();
    let obj_hues: Vec<f64> = (0..objects).map(|_| jitter(&mut r)).collect();
    let obj_vals: Vec<f64> = (0..objects).map(|_| r.random_range(0.55..0.65)).collect();
    let noise: Vec<f64> = (0..w * h).map(|_| r.random_range(-0.03..0.03)).collect();
    let hue = Grid::from_fn(w, h, |x, y| match labels[y * w + x] {
        0 => cell_hues[(y / cell) * cw + x / cell],
        l => obj_hues[l as usize - 1],
    });
    let sat = Grid::filled(w, h, 0.7);
    let val = Grid::from_fn(w, h, |x, y| {
        let base = match labels[y * w + x] {
            0 => cell_vals[(y / cell) * cw + x / cell],
            l => obj_vals[l as usize - 1],
        };
        base + noise[y * w + x]
    });
    let hsv = Image::from_planes(Layout::Hsv, vec![hue, sat, val]).expect("hsv");
    let mask = RoiMask::from_fn(w, h, |x, y| labels[y * w + x] > 0);
    (
        Scene {
            image: hsv_to_rgb(&hsv).expect("rgb"),
            mask,
            distractors: Vec::new(),
        },
        LabelMap {
            width: w,
            height: h,
            labels,
        },
    )
}

/// `n` tinted vertical strips, each with a central block of its own
/// contrast, and targets that invert the contrast ordering.
pub fn segment_strips(seed: u64, n: usize) -> SegmentScene {
    let mut r = rng(seed);
    let (w, h) = (256, 256);
    let levels: Vec<f64> = (0..n).map(|_| r.random_range(0.35..0.65)).collect();
    // block contrasts spread over a wide range so their order is unambiguous
    let mut contrasts: Vec<f64> = (0..n)
        .map(|k| 0.05 + 0.3 * k as f64 / (n - 1).max(1) as f64)
        .collect();
    for i in (1..n).rev() {
        contrasts.swap(i, r.random_range(0..=i));
    }
    let tints: Vec<(f64, f64)> = (0..n)
        .map(|_| (r.random_range(0.0..1.0), r.random_range(0.2..0.5)))
        .collect();
    let noise: Vec<f64> = (0..w * h).map(|_| r.random_range(-0.04..0.04)).collect();
    let strip = |x: usize| (x * n / w).min(n - 1);
    let mut labels = vec![0u32; w * h];
    let val = Grid::from_fn(w, h, |x, y| {
        let k = strip(x);
        labels[y * w + x] = k as u32 + 1;
        let cx = (2 * k + 1) * w / (2 * n);
        let inner =
            (x as isize - cx as isize).unsigned_abs() < w / (4 * n) && (96..160).contains(&y);
        let base = if inner {
            levels[k] + contrasts[k]
        } else {
            levels[k]
        };
        base + noise[y * w + x]
    });
    let hue = Grid::from_fn(w, h, |x, _| tints[strip(x)].0);
    let sat = Grid::from_fn(w, h, |x, _| tints[strip(x)].1);
    let hsv = Image::from_planes(Layout::Hsv, vec![hue, sat, val]).expect("hsv");
    let image = hsv_to_rgb(&hsv).expect("rgb");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| contrasts[a].total_cmp(&contrasts[b]));
    let mut targets = vec![0.0; n];
    for (rank, &k) in order.iter().enumerate() {
        // the flattest strip gets the largest target
        targets[k] = (n - rank) as f64;
    }
    SegmentScene {
        image,
        labels: LabelMap {
            width: w,
            height: h,
            labels,
        },
        targets,
    }
}
