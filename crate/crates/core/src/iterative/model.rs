use crate::error::{invalid, Result};
use crate::imaging::io::LabelMap;
use crate::imaging::{gaussian_blur, hsv_to_rgb, rgb_to_hsv, Grid, Image, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    Intensity,
    Saturation,
    Sharpness,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::Intensity, Feature::Saturation, Feature::Sharpness];

    pub fn index(self) -> usize {
        match self {
            Feature::Intensity => 0,
            Feature::Saturation => 1,
            Feature::Sharpness => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Intensity => "intensity",
            Feature::Saturation => "saturation",
            Feature::Sharpness => "sharpness",
        }
    }

    pub fn parse(s: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

/// Inclusive `(lower, upper)` limits per feature, indexed by [`Feature::index`].
pub type Bounds = [(f64, f64); 3];

pub const DEFAULT_BOUNDS: Bounds = [(-0.3, 0.3), (-0.5, 0.5), (-1.0, 1.0)];

/// Labelled segments (labels `1..=N`) with target importances and limits.
#[derive(Debug, Clone)]
pub struct SegmentModel {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    targets: Vec<f64>,
    bounds: Vec<Bounds>,
}

impl SegmentModel {
    pub fn new(labels: &LabelMap, targets: Vec<f64>, bounds: Bounds) -> Result<Self> {
        let n = targets.len();
        Self::with_bounds(labels, targets, vec![bounds; n])
    }

    pub fn with_bounds(labels: &LabelMap, targets: Vec<f64>, bounds: Vec<Bounds>) -> Result<Self> {
        let n = targets.len();
        if n == 0 {
            return Err(invalid("at least one segment is required"));
        }
        if bounds.len() != n {
            return Err(invalid("one bounds entry per segment is required"));
        }
        if labels.labels.len() != labels.width * labels.height {
            return Err(invalid("label raster size does not match its dimensions"));
        }
        let mut seen = vec![false; n];
        for &l in &labels.labels {
            if l == 0 || l as usize > n {
                return Err(invalid(format!("label {l} outside 1..={n}")));
            }
            seen[l as usize - 1] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("label {} has no pixels", k + 1)));
        }
        if targets.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("target importances must be positive"));
        }
        for b in &bounds {
            if b.iter().any(|(lo, hi)| {
                !(lo.is_finite() && hi.is_finite() && lo <= hi && *lo <= 0.0 && *hi >= 0.0)
            }) {
                return Err(invalid("bounds must be finite with lower <= 0 <= upper"));
            }
            if b[Feature::Saturation.index()].0 < -1.0 || b[Feature::Sharpness.index()].0 < -1.0 {
                return Err(invalid(
                    "saturation and sharpness lower bounds must be >= -1",
                ));
            }
        }
        Ok(Self {
            width: labels.width,
            height: labels.height,
            labels: labels.labels.clone(),
            targets,
            bounds,
        })
    }

    pub fn segment_count(&self) -> usize {
        self.targets.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn bounds(&self, segment: usize) -> &Bounds {
        &self.bounds[segment]
    }

    /// Zero-based segment index of pixel `i`.
    #[inline]
    pub fn segment_of(&self, i: usize) -> usize {
        self.labels[i] as usize - 1
    }

    pub fn areas(&self) -> Vec<usize> {
        let mut a = vec![0; self.segment_count()];
        for i in 0..self.labels.len() {
            a[self.segment_of(i)] += 1;
        }
        a
    }

    /// Mean of `map` over each segment.
    pub fn segment_means(&self, map: &Grid) -> Vec<f64> {
        let mut sum = vec![0.0; self.segment_count()];
        let mut cnt = vec![0usize; self.segment_count()];
        for (i, &v) in map.data().iter().enumerate() {
            let s = self.segment_of(i);
            sum[s] += v;
            cnt[s] += 1;
        }
        sum.iter().zip(&cnt).map(|(s, &c)| s / c as f64).collect()
    }
}

/// Current offsets `m[i][f]` per segment and feature.
#[derive(Debug, Clone, PartialEq)]
pub struct ModificationState {
    pub offsets: Vec<[f64; 3]>,
}

impl ModificationState {
    pub fn zeros(n: usize) -> Self {
        Self {
            offsets: vec![[0.0; 3]; n],
        }
    }

    pub fn get(&self, segment: usize, f: Feature) -> f64 {
        self.offsets[segment][f.index()]
    }

    pub fn set(&mut self, segment: usize, f: Feature, v: f64) {
        self.offsets[segment][f.index()] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.offsets.iter().all(|o| o.iter().all(|&v| v == 0.0))
    }

    pub fn within(&self, seg: &SegmentModel) -> bool {
        self.offsets.len() == seg.segment_count()
            && self.offsets.iter().enumerate().all(|(i, o)| {
                o.iter()
                    .zip(seg.bounds(i))
                    .all(|(v, (lo, hi))| v >= lo && v <= hi)
            })
    }
}

/// `X_i / sum_j X_j`.
pub fn normalize_importance(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("importances must be finite and non-negative"));
    }
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return Err(invalid("importances sum to zero"));
    }
    Ok(x.iter().map(|v| v / total).collect())
}

/// `sum_i |N(T_i) - N(S_i)|`.
pub fn saliency_error(targets: &[f64], saliency: &[f64]) -> Result<f64> {
    if targets.len() != saliency.len() {
        return Err(invalid("target and saliency lists differ in length"));
    }
    let t = normalize_importance(targets)?;
    let s = normalize_importance(saliency)?;
    Ok(t.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum())
}

/// As [`saliency_error`] with each term weighted by `N * area_i / total_area`.
pub fn area_weighted_error(targets: &[f64], saliency: &[f64], areas: &[usize]) -> Result<f64> {
    if areas.len() != targets.len() {
        return Err(invalid("one area per segment is required"));
    }
    let t = normalize_importance(targets)?;
    let s = normalize_importance(saliency)?;
    let total: usize = areas.iter().sum();
    let n = areas.len() as f64;
    Ok(t.iter()
        .zip(&s)
        .zip(areas)
        .map(|((a, b), &w)| n * w as f64 / total as f64 * (a - b).abs())
        .sum())
}

/// Apply per-segment intensity offsets (added to HSV value), saturation gains
/// (`s * (1 + m)`) and sharpness amounts (`x + m * (x - blur(x))`, so negative
/// amounts blend toward the blurred image).
pub fn apply_modification(
    img: &Image,
    seg: &SegmentModel,
    state: &ModificationState,
    blur_sigma: f64,
) -> Result<Image> {
    if img.dims() != seg.dims() {
        return Err(invalid("image and label raster differ in size"));
    }
    if !state.within(seg) {
        return Err(invalid("modification state outside its bounds"));
    }
    if state.is_zero() {
        return Ok(img.clone());
    }
    let was_gray = img.layout() == Layout::Gray;
    let rgb = img.to_rgb();
    let n = rgb.width() * rgb.height();
    let tonal = state.offsets.iter().any(|o| o[0] != 0.0 || o[1] != 0.0);
    let mut out = if tonal {
        let hsv = rgb_to_hsv(&rgb)?;
        let mut planes = hsv.into_planes();
        for i in 0..n {
            let o = &state.offsets[seg.segment_of(i)];
            planes[1].data_mut()[i] = (planes[1].data()[i] * (1.0 + o[1])).clamp(0.0, 1.0);
            planes[2].data_mut()[i] = (planes[2].data()[i] + o[0]).clamp(0.0, 1.0);
        }
        hsv_to_rgb(&Image::from_planes(Layout::Hsv, planes)?)?.into_planes()
    } else {
        rgb.into_planes()
    };
    if state.offsets.iter().any(|o| o[2] != 0.0) {
        for p in out.iter_mut() {
            let blurred = gaussian_blur(p, blur_sigma);
            for i in 0..n {
                let a = state.offsets[seg.segment_of(i)][2];
                if a != 0.0 {
                    let x = p.data()[i];
                    p.data_mut()[i] = x + a * (x - blurred.data()[i]);
                }
            }
        }
    }
    if was_gray {
        // planes of a gray input stay equal under every modification
        Image::gray(out.swap_remove(0))
    } else {
        Image::from_planes(Layout::Rgb, out)
    }
}
