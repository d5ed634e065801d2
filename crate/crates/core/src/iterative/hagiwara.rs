use crate::error::{invalid, Result};
use crate::imaging::{Grid, Image, Layout, RoiMask};
use crate::metrics::{roi_saliency_ratio, TraceRow};
use crate::saliency::{compute_saliency, EngineConfig, FeatureName, FeatureSet};

const FEATURES: [FeatureName; 5] = [
    FeatureName::ColorR,
    FeatureName::ColorG,
    FeatureName::ColorB,
    FeatureName::ColorY,
    FeatureName::Intensity,
];

/// RGB gradient of each opponent feature at a pixel, in `FEATURES` order.
fn gradients(r: f64, g: f64) -> [[f64; 3]; 5] {
    let y = if r < g {
        [1.0, 0.0, -1.0]
    } else if r > g {
        [0.0, 1.0, -1.0]
    } else {
        [0.5, 0.5, -1.0]
    };
    [
        [1.0, -0.5, -0.5],
        [-0.5, 1.0, -0.5],
        [-0.5, -0.5, 1.0],
        y,
        [1.0 / 3.0; 3],
    ]
}

#[derive(Debug, Clone)]
pub struct HagiwaraReport {
    pub ratio_before: f64,
    pub ratio_after: f64,
    pub accepted: usize,
    pub trace: Vec<TraceRow>,
    /// Applied color direction (unit max-norm) of the last accepted step.
    pub direction: [f64; 3],
}

/// Color direction that raises the ROI's contrast on every opponent feature:
/// each feature is pushed away from the surround level, weighted by how far
/// its ROI conspicuity is from saturation.
fn push_direction(img: &Image, fs: &FeatureSet, roi: &RoiMask, surround: &RoiMask) -> [f64; 3] {
    let (w, h) = img.dims();
    let mut rg = (0.0, 0.0);
    for i in 0..w * h {
        if roi.data()[i] {
            rg.0 += img.plane(0).data()[i];
            rg.1 += img.plane(1).data()[i];
        }
    }
    let grads = gradients(rg.0, rg.1);
    let mut d = [0.0; 3];
    for (k, name) in FEATURES.iter().enumerate() {
        let Some(e) = fs.entry(*name) else { continue };
        let inside = e.feature.mean_in(roi).unwrap_or(0.0);
        let outside = e.feature.mean_in(surround).unwrap_or(0.0);
        let sign = if inside >= outside { 1.0 } else { -1.0 };
        let deficit = 1.0 - e.conspicuity.mean_in(roi).unwrap_or(0.0);
        for c in 0..3 {
            d[c] += sign * deficit * grads[k][c];
        }
    }
    let m = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        d.map(|v| v / m)
    } else {
        d
    }
}

/// Per-pixel step size: `step * (1 + deficit) / 2`, where the deficit is
/// `1 - S` inside the ROI and `S` outside.
fn magnitudes(s: &Grid, roi: &RoiMask, step: f64) -> Grid {
    Grid::from_fn(s.width(), s.height(), |x, y| {
        let v = s.get(x, y);
        let deficit = if roi.contains(x, y) { 1.0 - v } else { v };
        step * (1.0 + deficit) / 2.0
    })
}

/// Nudge ROI pixels by `+delta` and all other pixels by `-delta` along the
/// color direction that raises ROI conspicuity. A step is kept only when
/// neither the ROI mean saliency nor the ROI ratio decreases; otherwise
/// the step size is halved.
pub fn hagiwara_retarget(
    img: &Image,
    roi: &RoiMask,
    step: f64,
    iterations: usize,
    engine: &EngineConfig,
) -> Result<(Image, HagiwaraReport)> {
    let (w, h) = img.dims();
    roi.ensure_dims(w, h)?;
    if roi.is_empty() {
        return Err(invalid("ROI mask is empty"));
    }
    if roi.is_full() {
        return Err(invalid("ROI mask covers the whole image"));
    }
    if !(step >= 0.0 && step.is_finite()) {
        return Err(invalid("step must be finite and >= 0"));
    }
    let surround = roi.complement();
    let mut cur = img.to_rgb();
    let (mut s, mut fs) = compute_saliency(&cur, engine)?;
    let ratio_before = roi_saliency_ratio(&s, roi)?;
    let mut report = HagiwaraReport {
        ratio_before,
        ratio_after: ratio_before,
        accepted: 0,
        trace: Vec::new(),
        direction: [0.0; 3],
    };
    if step == 0.0 {
        return Ok((restore_layout(cur, img.layout())?, report));
    }
    let mut roi_mean = s.mean_in(roi).expect("non-empty");
    let mut ratio = ratio_before;
    let mut step = step;
    for it in 1..=iterations {
        let d = push_direction(&cur, &fs, roi, &surround);
        let mag = magnitudes(&s, roi, step);
        let planes: Vec<Grid> = (0..3)
            .map(|c| {
                let p = cur.plane(c);
                Grid::from_fn(w, h, |x, y| {
                    let sign = if roi.contains(x, y) { 1.0 } else { -1.0 };
                    p.get(x, y) + sign * mag.get(x, y) * d[c]
                })
            })
            .collect();
        let cand = Image::from_planes(Layout::Rgb, planes)?;
        let (s2, fs2) = compute_saliency(&cand, engine)?;
        let m2 = s2.mean_in(roi).expect("non-empty");
        let r2 = roi_saliency_ratio(&s2, roi)?;
        let ok = m2 >= roi_mean && r2 >= ratio;
        report.trace.push(TraceRow {
            iteration: it,
            error: r2,
            accepted: ok,
            step: format!(
                "step={step:.6} dr={:+.4} dg={:+.4} db={:+.4}",
                d[0], d[1], d[2]
            ),
        });
        if ok {
            cur = cand;
            s = s2;
            fs = fs2;
            roi_mean = m2;
            ratio = r2;
            report.accepted += 1;
            report.direction = d;
        } else {
            step /= 2.0;
        }
    }
    report.ratio_after = ratio;
    Ok((restore_layout(cur, img.layout())?, report))
}

fn restore_layout(rgb: Image, layout: Layout) -> Result<Image> {
    match layout {
        Layout::Hsv => crate::imaging::rgb_to_hsv(&rgb),
        _ => Ok(rgb),
    }
}
