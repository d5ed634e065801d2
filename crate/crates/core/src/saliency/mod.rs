//! Bottom-up saliency: feature extraction, multiscale center-surround,
//! peak-count normalization and channel fusion.

mod center_surround;
mod features;

use std::fmt;
use std::path::Path;

pub use center_surround::{
    center_surround, local_maxima, normalization_multiplier, normalize_conspicuity,
    normalize_conspicuity_at,
};
pub use features::{
    extract_color_features, extract_orientation_features, opponent, ColorFeatures,
    OrientationFilter, ORIENTATIONS_DEG,
};

use crate::error::{invalid, Result};
use crate::imaging::io::write_grid;
use crate::imaging::{Grid, Image, Layout};
use crate::steerable::{self, TextureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Intensity,
    Color,
    Orientation,
    SpatialFrequency,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::Intensity,
        Channel::Color,
        Channel::Orientation,
        Channel::SpatialFrequency,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Intensity => "intensity",
            Channel::Color => "color",
            Channel::Orientation => "orientation",
            Channel::SpatialFrequency => "spatial-frequency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureName {
    Intensity,
    ColorR,
    ColorG,
    ColorB,
    ColorY,
    Orientation0,
    Orientation45,
    Orientation90,
    Orientation135,
    SpatialFrequency,
}

impl FeatureName {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureName::Intensity => "intensity",
            FeatureName::ColorR => "color-r",
            FeatureName::ColorG => "color-g",
            FeatureName::ColorB => "color-b",
            FeatureName::ColorY => "color-y",
            FeatureName::Orientation0 => "orientation-0",
            FeatureName::Orientation45 => "orientation-45",
            FeatureName::Orientation90 => "orientation-90",
            FeatureName::Orientation135 => "orientation-135",
            FeatureName::SpatialFrequency => "spatial-frequency",
        }
    }

    pub fn channel(self) -> Channel {
        use FeatureName::*;
        match self {
            Intensity => Channel::Intensity,
            ColorR | ColorG | ColorB | ColorY => Channel::Color,
            Orientation0 | Orientation45 | Orientation90 | Orientation135 => Channel::Orientation,
            SpatialFrequency => Channel::SpatialFrequency,
        }
    }
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub center_levels: Vec<usize>,
    pub deltas: Vec<usize>,
    /// Local maxima below this (after rescale) are ignored by normalization.
    pub peak_threshold: f64,
    /// Pyramid level on which normalization looks for local maxima.
    pub peak_scan_level: usize,
    /// Fusion weight per channel; 0 disables the channel.
    pub intensity_weight: f64,
    pub color_weight: f64,
    pub orientation_weight: f64,
    pub spatial_frequency_weight: f64,
    pub orientation_filter: OrientationFilter,
    pub texture: TextureConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            center_levels: vec![2, 3, 4],
            deltas: vec![3, 4],
            peak_threshold: 0.05,
            peak_scan_level: 4,
            intensity_weight: 1.0,
            color_weight: 1.0,
            orientation_weight: 1.0,
            spatial_frequency_weight: 0.0,
            orientation_filter: OrientationFilter::default(),
            texture: TextureConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn weight(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Intensity => self.intensity_weight,
            Channel::Color => self.color_weight,
            Channel::Orientation => self.orientation_weight,
            Channel::SpatialFrequency => self.spatial_frequency_weight,
        }
    }

    pub fn set_weight(&mut self, channel: Channel, w: f64) {
        match channel {
            Channel::Intensity => self.intensity_weight = w,
            Channel::Color => self.color_weight = w,
            Channel::Orientation => self.orientation_weight = w,
            Channel::SpatialFrequency => self.spatial_frequency_weight = w,
        }
    }

    pub fn enabled(&self, channel: Channel) -> bool {
        self.weight(channel) > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for c in Channel::ALL {
            let w = self.weight(c);
            if !w.is_finite() || w < 0.0 {
                return Err(invalid(format!(
                    "{} weight must be finite and >= 0",
                    c.as_str()
                )));
            }
        }
        if Channel::ALL.iter().all(|&c| !self.enabled(c)) {
            return Err(invalid("at least one saliency channel must be enabled"));
        }
        if !(0.0..1.0).contains(&self.peak_threshold) {
            return Err(invalid("peak threshold must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FeatureEntry {
    pub name: FeatureName,
    pub feature: Grid,
    pub conspicuity: Grid,
}

/// Every feature and conspicuity map used for one saliency evaluation, plus
/// the per-channel maps that were fused.
#[derive(Debug, Clone, Default)]
pub struct FeatureSet {
    pub entries: Vec<FeatureEntry>,
    pub channels: Vec<(Channel, Grid)>,
}

impl FeatureSet {
    pub fn entry(&self, name: FeatureName) -> Option<&FeatureEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn channel_map(&self, channel: Channel) -> Option<&Grid> {
        self.channels
            .iter()
            .find(|(c, _)| *c == channel)
            .map(|(_, g)| g)
    }

    /// Pointwise maximum of the feature maps belonging to `channel`.
    pub fn channel_feature(&self, channel: Channel) -> Option<Grid> {
        let mut it = self.entries.iter().filter(|e| e.name.channel() == channel);
        let first = it.next()?.feature.clone();
        Some(it.fold(first, |acc, e| {
            acc.zip_map(&e.feature, f64::max).expect("same shape")
        }))
    }

    /// Write `<name>.feature.pgm`, `<name>.conspicuity.pgm` and
    /// `channel-<name>.pgm` into `dir`. Feature maps are peak-normalized for
    /// display.
    pub fn write_pgm_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for e in &self.entries {
            write_grid(
                dir.join(format!("{}.feature.pgm", e.name)),
                &e.feature.peak_normalized(),
            )?;
            write_grid(
                dir.join(format!("{}.conspicuity.pgm", e.name)),
                &e.conspicuity,
            )?;
        }
        for (c, g) in &self.channels {
            write_grid(dir.join(format!("channel-{}.pgm", c.as_str())), g)?;
        }
        Ok(())
    }
}

/// Saliency raster in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(Grid);

impl SaliencyMap {
    /// Wrap a map, clamping into `[0, 1]`.
    pub fn new(grid: Grid) -> Self {
        SaliencyMap(grid.clamped01())
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }
}

impl std::ops::Deref for SaliencyMap {
    type Target = Grid;

    fn deref(&self) -> &Grid {
        &self.0
    }
}

fn mean_of(maps: &[&Grid]) -> Grid {
    let (w, h) = maps[0].dims();
    let mut acc = Grid::new(w, h);
    for m in maps {
        for (a, v) in acc.data_mut().iter_mut().zip(m.data()) {
            *a += v;
        }
    }
    let n = maps.len() as f64;
    acc.map(|v| v / n)
}

fn conspicuity_entry(name: FeatureName, feature: Grid, cfg: &EngineConfig) -> Result<FeatureEntry> {
    let cs = center_surround(&feature, &cfg.center_levels, &cfg.deltas)?;
    let conspicuity = normalize_conspicuity_at(&cs, cfg.peak_threshold, cfg.peak_scan_level);
    Ok(FeatureEntry {
        name,
        feature,
        conspicuity,
    })
}

fn spatial_frequency_entry(v: &Grid, cfg: &EngineConfig) -> Result<FeatureEntry> {
    let pyr = steerable::decompose(v, cfg.texture.levels, cfg.texture.orientations)?;
    let sal = steerable::subband_saliency(&pyr, &cfg.texture)?;
    let (w, h) = v.dims();
    let mut content = Grid::new(w, h);
    let mut contrast = Grid::new(w, h);
    for (low, high) in sal.local.iter().zip(&sal.contrast) {
        for i in 0..w * h {
            content.data_mut()[i] += low.data()[i];
            contrast.data_mut()[i] += high.data()[i].max(0.0);
        }
    }
    let conspicuity = normalize_conspicuity_at(&contrast, cfg.peak_threshold, cfg.peak_scan_level);
    Ok(FeatureEntry {
        name: FeatureName::SpatialFrequency,
        feature: content,
        conspicuity,
    })
}

/// Run the full model on an image of any layout (gray is treated as RGB with
/// equal planes).
pub fn compute_saliency(img: &Image, cfg: &EngineConfig) -> Result<(SaliencyMap, FeatureSet)> {
    cfg.validate()?;
    let rgb = match img.layout() {
        Layout::Rgb => img.clone(),
        _ => img.to_rgb(),
    };
    let cf = extract_color_features(&rgb)?;
    let mut entries = Vec::new();
    if cfg.enabled(Channel::Intensity) {
        entries.push(conspicuity_entry(
            FeatureName::Intensity,
            cf.v.clone(),
            cfg,
        )?);
    }
    if cfg.enabled(Channel::Color) {
        for (name, f) in [
            (FeatureName::ColorR, cf.r),
            (FeatureName::ColorG, cf.g),
            (FeatureName::ColorB, cf.b),
            (FeatureName::ColorY, cf.y),
        ] {
            entries.push(conspicuity_entry(name, f, cfg)?);
        }
    }
    if cfg.enabled(Channel::Orientation) {
        let maps = extract_orientation_features(&cf.v, &cfg.orientation_filter)?;
        let names = [
            FeatureName::Orientation0,
            FeatureName::Orientation45,
            FeatureName::Orientation90,
            FeatureName::Orientation135,
        ];
        for (name, f) in names.into_iter().zip(maps) {
            entries.push(conspicuity_entry(name, f, cfg)?);
        }
    }
    if cfg.enabled(Channel::SpatialFrequency) {
        entries.push(spatial_frequency_entry(&cf.v, cfg)?);
    }

    let mut channels = Vec::new();
    let (w, h) = img.dims();
    let mut fused = Grid::new(w, h);
    let mut total_weight = 0.0;
    for c in Channel::ALL {
        if !cfg.enabled(c) {
            continue;
        }
        let members: Vec<&Grid> = entries
            .iter()
            .filter(|e| e.name.channel() == c)
            .map(|e| &e.conspicuity)
            .collect();
        let map =
            normalize_conspicuity_at(&mean_of(&members), cfg.peak_threshold, cfg.peak_scan_level);
        let wgt = cfg.weight(c);
        for (a, v) in fused.data_mut().iter_mut().zip(map.data()) {
            *a += wgt * v;
        }
        total_weight += wgt;
        channels.push((c, map));
    }
    let fused = fused.map(|v| v / total_weight);
    let s = if fused.max() <= 1e-12 {
        Grid::new(w, h)
    } else {
        fused.peak_normalized()
    };
    Ok((SaliencyMap::new(s), FeatureSet { entries, channels }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_saliency() {
        let img = Image::rgb_filled(256, 256, [0.3, 0.5, 0.2]);
        let (s, fs) = compute_saliency(&img, &EngineConfig::default()).unwrap();
        assert_eq!(s.max(), 0.0);
        assert_eq!(fs.entries.len(), 9);
    }

    #[test]
    fn bright_block_peaks_at_one_inside() {
        let g = Grid::from_fn(256, 256, |x, y| {
            if (120..136).contains(&x) && (120..136).contains(&y) {
                1.0
            } else {
                0.0
            }
        });
        let (s, _) = compute_saliency(&Image::gray(g).unwrap(), &EngineConfig::default()).unwrap();
        assert!((s.max() - 1.0).abs() < 1e-15);
        assert!(s.get(128, 128) > 10.0 * s.get(10, 10).max(1e-3) || s.get(10, 10) < 0.02);
    }

    #[test]
    fn disabling_everything_is_rejected() {
        let mut cfg = EngineConfig::default();
        for c in Channel::ALL {
            cfg.set_weight(c, 0.0);
        }
        assert!(compute_saliency(&Image::rgb_filled(256, 256, [0.0; 3]), &cfg).is_err());
    }
}
