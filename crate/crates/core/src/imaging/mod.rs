//! Raster types and the low-level image operations shared by every method.

mod color;
mod distance;
mod filter;
mod histogram;
pub mod io;
mod pyramid;
mod warp;

pub use color::{hsv_to_rgb, rgb_to_gray, rgb_to_hsv};
pub use distance::{distance_transform, DistanceMap};
pub use filter::{
    convolve_2d, convolve_separable, convolve_separable_adjoint, convolve_xy, gaussian_blur,
    gaussian_derivative_kernel, gaussian_kernel, upsample_to,
};
pub use histogram::match_histogram;
pub use pyramid::{build_pyramid, GaussianPyramid, BINOMIAL_5};
pub use warp::rotate_region;

use crate::error::{invalid, Result};

/// Single-channel scalar raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(invalid(format!(
                "grid data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    /// Bilinear sample at a continuous position, edge-replicated.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two grids of identical shape.
    pub fn zip_map(&self, other: &Grid, f: impl Fn(f64, f64) -> f64) -> Result<Grid> {
        self.ensure_same_shape(other)?;
        Ok(Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn ensure_same_shape(&self, other: &Grid) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.sum() / self.data.len() as f64
        }
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Divide by the maximum so the peak becomes 1. All-zero grids pass through.
    pub fn peak_normalized(&self) -> Grid {
        let m = self.max();
        if m > 0.0 {
            self.map(|v| v / m)
        } else {
            self.clone()
        }
    }

    pub fn clamped01(&self) -> Grid {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Mean over the pixels selected by `mask`; `None` when the mask is empty.
    pub fn mean_in(&self, mask: &RoiMask) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (v, &m) in self.data.iter().zip(mask.data()) {
            if m {
                sum += v;
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// Channel interpretation of an [`Image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Gray,
    Rgb,
    /// Hue, saturation and value, each in `[0, 1]`; hue is the angle / 360.
    Hsv,
}

impl Layout {
    pub fn channel_names(self) -> &'static [&'static str] {
        match self {
            Layout::Gray => &["gray"],
            Layout::Rgb => &["R", "G", "B"],
            Layout::Hsv => &["H", "S", "V"],
        }
    }

    pub fn channel_count(self) -> usize {
        self.channel_names().len()
    }
}

/// Planar multi-channel image. Every sample is kept in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    layout: Layout,
    planes: Vec<Grid>,
}

impl Image {
    /// Build an image from planes, clamping every sample into `[0, 1]`.
    pub fn from_planes(layout: Layout, planes: Vec<Grid>) -> Result<Self> {
        if planes.len() != layout.channel_count() {
            return Err(invalid(format!(
                "{:?} layout needs {} planes, got {}",
                layout,
                layout.channel_count(),
                planes.len()
            )));
        }
        let dims = planes[0].dims();
        if dims.0 == 0 || dims.1 == 0 {
            return Err(invalid("image must be non-empty"));
        }
        if planes.iter().any(|p| p.dims() != dims) {
            return Err(invalid("all channels must share the same dimensions"));
        }
        let planes = planes.into_iter().map(|p| p.clamped01()).collect();
        Ok(Self { layout, planes })
    }

    pub fn gray(plane: Grid) -> Result<Self> {
        Self::from_planes(Layout::Gray, vec![plane])
    }

    pub fn rgb(r: Grid, g: Grid, b: Grid) -> Result<Self> {
        Self::from_planes(Layout::Rgb, vec![r, g, b])
    }

    /// Uniform RGB image.
    pub fn rgb_filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        let planes = rgb
            .iter()
            .map(|&c| Grid::filled(width, height, c.clamp(0.0, 1.0)))
            .collect();
        Self {
            layout: Layout::Rgb,
            planes,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, c: usize) -> &Grid {
        &self.planes[c]
    }

    pub fn planes(&self) -> &[Grid] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Grid> {
        self.planes
    }

    pub fn pixel(&self, x: usize, y: usize) -> Vec<f64> {
        self.planes.iter().map(|p| p.get(x, y)).collect()
    }

    pub fn ensure_layout(&self, layout: Layout) -> Result<()> {
        if self.layout != layout {
            return Err(invalid(format!(
                "expected {:?} image, got {:?}",
                layout, self.layout
            )));
        }
        Ok(())
    }

    /// Convert to RGB, replicating gray or converting from HSV.
    pub fn to_rgb(&self) -> Image {
        match self.layout {
            Layout::Rgb => self.clone(),
            Layout::Gray => Image {
                layout: Layout::Rgb,
                planes: vec![
                    self.planes[0].clone(),
                    self.planes[0].clone(),
                    self.planes[0].clone(),
                ],
            },
            Layout::Hsv => hsv_to_rgb(self).expect("layout checked"),
        }
    }
}

/// Binary region-of-interest mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl RoiMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Threshold a scalar grid: samples `>= threshold` are inside.
    pub fn from_grid(grid: &Grid, threshold: f64) -> Self {
        Self {
            width: grid.width(),
            height: grid.height(),
            data: grid.data().iter().map(|&v| v >= threshold).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn is_full(&self) -> bool {
        self.data.iter().all(|&b| b)
    }

    pub fn complement(&self) -> RoiMask {
        RoiMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }

    /// Pixels selected by both masks.
    pub fn intersect(&self, other: &RoiMask) -> RoiMask {
        RoiMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }

    /// Centroid `(x, y)` of the selected pixels.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.contains(x, y) {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    /// The mask as a 0/1 scalar grid.
    pub fn to_grid(&self) -> Grid {
        Grid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Euclidean dilation by `radius` pixels.
    pub fn dilate(&self, radius: f64) -> RoiMask {
        let dist = distance_transform(self);
        let r2 = radius * radius;
        RoiMask {
            width: self.width,
            height: self.height,
            data: dist.squared.iter().map(|&d| d <= r2).collect(),
        }
    }

    /// Surround ring: dilation by the ROI's equivalent radius `sqrt(area / pi)`,
    /// minus the ROI itself.
    pub fn surround_ring(&self) -> RoiMask {
        let radius = (self.count() as f64 / std::f64::consts::PI).sqrt();
        let dilated = self.dilate(radius);
        dilated.intersect(&self.complement())
    }

    pub fn ensure_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.dims() != (width, height) {
            return Err(invalid(format!(
                "mask is {}x{} but image is {}x{}",
                self.width, self.height, width, height
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_construction_clamps() {
        let g = Grid::from_fn(3, 2, |x, _| x as f64 - 0.5);
        let img = Image::gray(g).unwrap();
        assert!(img
            .plane(0)
            .data()
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(img.plane(0).get(0, 0), 0.0);
        assert_eq!(img.plane(0).get(2, 1), 1.0);
    }

    #[test]
    fn mismatched_planes_are_rejected() {
        let a = Grid::new(4, 4);
        let b = Grid::new(4, 3);
        assert!(Image::rgb(a.clone(), a, b).is_err());
        assert!(Image::from_planes(Layout::Rgb, vec![Grid::new(2, 2)]).is_err());
    }

    #[test]
    fn bilinear_interpolates_between_samples() {
        let g = Grid::from_fn(2, 2, |x, y| (x + 2 * y) as f64);
        assert!((g.sample_bilinear(0.5, 0.5) - 1.5).abs() < 1e-12);
        assert_eq!(g.sample_bilinear(-3.0, 0.0), 0.0);
    }

    #[test]
    fn surround_ring_excludes_roi() {
        let m = RoiMask::from_fn(40, 40, |x, y| {
            (15..25).contains(&x) && (15..25).contains(&y)
        });
        let ring = m.surround_ring();
        assert!(ring.data().iter().zip(m.data()).all(|(&r, &i)| !(r && i)));
        // equivalent radius of a 10x10 block is ~5.64 px
        assert!(ring.contains(14, 20) && ring.contains(10, 20));
        assert!(!ring.contains(8, 20));
    }
}
