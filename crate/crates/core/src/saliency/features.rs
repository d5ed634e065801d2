use crate::error::Result;
use crate::imaging::{convolve_2d, rgb_to_gray, Grid, Image, Layout};

/// Opponent color features `r, g, b, y` and intensity `v`, negatives clamped to 0.
#[derive(Debug, Clone)]
pub struct ColorFeatures {
    pub r: Grid,
    pub g: Grid,
    pub b: Grid,
    pub y: Grid,
    pub v: Grid,
}

/// Per-pixel opponent features of an RGB triple, before clamping.
#[inline]
pub fn opponent(r: f64, g: f64, b: f64) -> [f64; 5] {
    [
        r - (g + b) / 2.0,
        g - (r + b) / 2.0,
        b - (r + g) / 2.0,
        (r + g) / 2.0 - (r - g).abs() / 2.0 - b,
        (r + g + b) / 3.0,
    ]
}

pub fn extract_color_features(img: &Image) -> Result<ColorFeatures> {
    img.ensure_layout(Layout::Rgb)?;
    let (w, h) = img.dims();
    let mut maps: [Grid; 4] = std::array::from_fn(|_| Grid::new(w, h));
    for i in 0..w * h {
        let f = opponent(
            img.plane(0).data()[i],
            img.plane(1).data()[i],
            img.plane(2).data()[i],
        );
        for (m, &fv) in maps.iter_mut().zip(&f[..4]) {
            m.data_mut()[i] = fv.max(0.0);
        }
    }
    let [r, g, b, y] = maps;
    Ok(ColorFeatures {
        r,
        g,
        b,
        y,
        v: rgb_to_gray(img)?,
    })
}

/// Oriented quadrature filter pair built from offset Gaussians.
///
/// The even kernel is a center Gaussian minus two copies offset by a quarter
/// wavelength across the preferred orientation; the odd kernel is the
/// difference of the two offset copies. Both are zero-mean and unit-L2 over
/// the square support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationFilter {
    pub wavelength: f64,
    /// Odd side length of the square kernel.
    pub support: usize,
    pub sigma_across: f64,
    pub sigma_along: f64,
}

impl Default for OrientationFilter {
    fn default() -> Self {
        Self {
            wavelength: 8.0,
            support: 9,
            sigma_across: 1.0,
            sigma_along: 2.0,
        }
    }
}

pub const ORIENTATIONS_DEG: [f64; 4] = [0.0, 45.0, 90.0, 135.0];

impl OrientationFilter {
    /// `(even, odd)` kernels for an orientation in degrees, counter-clockwise
    /// from horizontal as displayed.
    pub fn kernels(&self, theta_deg: f64) -> (Grid, Grid) {
        let t = theta_deg.to_radians();
        // along-direction and normal in image coordinates (y down)
        let (ux, uy) = (t.cos(), -t.sin());
        let (nx, ny) = (t.sin(), t.cos());
        let r = (self.support / 2) as isize;
        let offset = self.wavelength / 4.0;
        let env = |a: f64, b: f64| {
            (-a * a / (2.0 * self.sigma_along.powi(2)) - b * b / (2.0 * self.sigma_across.powi(2)))
                .exp()
        };
        let n = self.support;
        let mut even = Grid::new(n, n);
        let mut odd = Grid::new(n, n);
        for j in -r..=r {
            for i in -r..=r {
                let (dx, dy) = (i as f64, j as f64);
                let a = dx * ux + dy * uy;
                let b = dx * nx + dy * ny;
                let c = env(a, b);
                let lo = env(a, b - offset);
                let hi = env(a, b + offset);
                even.set((i + r) as usize, (j + r) as usize, 2.0 * c - lo - hi);
                odd.set((i + r) as usize, (j + r) as usize, lo - hi);
            }
        }
        (zero_mean_unit(even), zero_mean_unit(odd))
    }
}

fn zero_mean_unit(k: Grid) -> Grid {
    let m = k.mean();
    let k = k.map(|v| v - m);
    let norm = k.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        k.map(|v| v / norm)
    } else {
        k
    }
}

/// Oriented energy at 0, 45, 90 and 135 degrees, scaled jointly so the
/// largest response across the four maps is 1.
pub fn extract_orientation_features(gray: &Grid, filter: &OrientationFilter) -> Result<[Grid; 4]> {
    let mut maps = Vec::with_capacity(4);
    for &theta in &ORIENTATIONS_DEG {
        let (even, odd) = filter.kernels(theta);
        let e = convolve_2d(gray, &even)?;
        let o = convolve_2d(gray, &odd)?;
        maps.push(e.zip_map(&o, |a, b| (a * a + b * b).sqrt())?);
    }
    let peak = maps.iter().map(Grid::max).fold(0.0, f64::max);
    // responses on constant input are pure rounding noise
    let scale = if peak > 1e-9 { 1.0 / peak } else { 0.0 };
    let maps: Vec<Grid> = maps.into_iter().map(|m| m.map(|v| v * scale)).collect();
    Ok(maps.try_into().expect("four orientations"))
}
