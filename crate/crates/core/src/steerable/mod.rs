//! Undecimated steerable pyramid built in the frequency domain, and texture
//! de-emphasis by scaling subband coefficients.
//!
//! The filter bank is a tight frame: the squared magnitudes of the highpass,
//! every oriented band and the lowpass sum to one at every frequency, so
//! synthesis with the conjugate filters inverts analysis up to rounding.

pub(crate) mod fft;

use std::f64::consts::PI;

use rustfft::num_complex::Complex;

use crate::error::{invalid, Result};
use crate::imaging::{gaussian_blur, match_histogram, rgb_to_gray, Grid, Image, Layout, RoiMask};

#[derive(Debug, Clone)]
pub struct SteerablePyramid {
    levels: usize,
    orientations: usize,
    pub highpass: Grid,
    /// Oriented bands, level-major.
    pub bands: Vec<Grid>,
    pub lowpass: Grid,
}

/// Smooth radial lowpass with cutoff `c`: 1 below `c/2`, 0 above `c`.
fn radial_low(r: f64, c: f64) -> f64 {
    if r <= c / 2.0 {
        1.0
    } else if r >= c {
        0.0
    } else {
        (PI / 2.0 * (2.0 * r / c).log2()).cos()
    }
}

fn radial_high(r: f64, c: f64) -> f64 {
    if r <= c / 2.0 {
        0.0
    } else if r >= c {
        1.0
    } else {
        (PI / 2.0 * (2.0 * r / c).log2()).sin()
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gain making the squared angular responses of `k` orientations sum to one.
fn angular_gain(k: usize) -> f64 {
    let order = (k - 1) as u64;
    (4f64.powi(order as i32) / (k as f64 * binomial(2 * order, order))).sqrt()
}

enum Filter {
    High,
    Band { level: usize, orientation: usize },
    Low,
}

struct Bank {
    levels: usize,
    orientations: usize,
    gain: f64,
    phase: Complex<f64>,
}

impl Bank {
    fn new(levels: usize, orientations: usize) -> Self {
        Self {
            levels,
            orientations,
            gain: angular_gain(orientations),
            phase: Complex::new(0.0, -1.0).powu((orientations - 1) as u32),
        }
    }

    fn response(&self, f: &Filter, wx: f64, wy: f64) -> Complex<f64> {
        let r = wx.hypot(wy);
        match *f {
            Filter::High => Complex::new(radial_high(r, PI), 0.0),
            Filter::Low => Complex::new(radial_low(r, PI / 2f64.powi(self.levels as i32)), 0.0),
            Filter::Band { level, orientation } => {
                let c = PI / 2f64.powi(level as i32);
                let radial = radial_low(r, c) * radial_high(r, c / 2.0);
                if radial == 0.0 {
                    return Complex::new(0.0, 0.0);
                }
                let theta = wy.atan2(wx) - PI * orientation as f64 / self.orientations as f64;
                let ang = self.gain * theta.cos().powi(self.orientations as i32 - 1);
                self.phase * (radial * ang)
            }
        }
    }

    fn filters(&self) -> Vec<Filter> {
        let mut out = vec![Filter::High];
        for level in 0..self.levels {
            for orientation in 0..self.orientations {
                out.push(Filter::Band { level, orientation });
            }
        }
        out.push(Filter::Low);
        out
    }

    fn apply(&self, f: &Filter, spec: &fft::Spectrum, conjugate: bool) -> fft::Spectrum {
        let (w, h) = (spec.width, spec.height);
        let mut data = spec.data.clone();
        for y in 0..h {
            let wy = fft::omega(y, h);
            for x in 0..w {
                let g = self.response(f, fft::omega(x, w), wy);
                let g = if conjugate { g.conj() } else { g };
                data[y * w + x] *= g;
            }
        }
        fft::Spectrum {
            width: w,
            height: h,
            data,
        }
    }
}

/// Split a single-channel grid into highpass, `levels x orientations`
/// oriented bands and a lowpass residual, all at full resolution.
pub fn decompose(gray: &Grid, levels: usize, orientations: usize) -> Result<SteerablePyramid> {
    if levels == 0 || orientations == 0 {
        return Err(invalid(
            "steerable pyramid needs at least one level and one orientation",
        ));
    }
    if orientations > 16 {
        return Err(invalid("at most 16 orientations are supported"));
    }
    let (w, h) = gray.dims();
    let min_side = 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX);
    if w < min_side || h < min_side {
        return Err(invalid(format!(
            "image {w}x{h} is too small for {levels} pyramid levels (needs {min_side} px)"
        )));
    }
    let bank = Bank::new(levels, orientations);
    let spec = fft::forward(gray.data(), w, h);
    let mut grids = bank
        .filters()
        .iter()
        .map(|f| Grid::from_vec(w, h, fft::inverse_real(bank.apply(f, &spec, false))))
        .collect::<Result<Vec<_>>>()?;
    let lowpass = grids.pop().expect("lowpass");
    let highpass = grids.remove(0);
    Ok(SteerablePyramid {
        levels,
        orientations,
        highpass,
        bands: grids,
        lowpass,
    })
}

impl SteerablePyramid {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn orientations(&self) -> usize {
        self.orientations
    }

    pub fn dims(&self) -> (usize, usize) {
        self.lowpass.dims()
    }

    pub fn band(&self, level: usize, orientation: usize) -> &Grid {
        &self.bands[level * self.orientations + orientation]
    }

    pub fn band_mut(&mut self, level: usize, orientation: usize) -> &mut Grid {
        &mut self.bands[level * self.orientations + orientation]
    }

    /// Period in pixels of the frequency passed at unit gain by `level`.
    pub fn wavelength(level: usize) -> f64 {
        2f64.powi(level as i32 + 2)
    }

    /// Frequency-domain angle of the orientation tuning of band `k`, degrees.
    pub fn orientation_degrees(&self, k: usize) -> f64 {
        180.0 * k as f64 / self.orientations as f64
    }

    pub fn reconstruct(&self) -> Grid {
        let (w, h) = self.dims();
        let bank = Bank::new(self.levels, self.orientations);
        let grids = std::iter::once(&self.highpass)
            .chain(&self.bands)
            .chain(std::iter::once(&self.lowpass));
        let mut acc = vec![Complex::new(0.0, 0.0); w * h];
        for (f, g) in bank.filters().iter().zip(grids) {
            let s = bank.apply(f, &fft::forward(g.data(), w, h), true);
            for (a, v) in acc.iter_mut().zip(&s.data) {
                *a += v;
            }
        }
        let out = fft::inverse_real(fft::Spectrum {
            width: w,
            height: h,
            data: acc,
        });
        Grid::from_vec(w, h, out).expect("same dims")
    }
}

/// Whether texture contrast is measured on `ln(s_L + floor)` or on `s_L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContrastDomain {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureChannels {
    Luminance,
    PerChannel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextureConfig {
    pub levels: usize,
    pub orientations: usize,
    /// Local averaging sigma as a multiple of the band wavelength.
    pub sigma_local: f64,
    /// Surround sigma as a multiple of the local sigma.
    pub sigma_surround: f64,
    /// Smoothing of the contrast map as a multiple of the local sigma; 0 disables.
    pub sigma_contrast: f64,
    pub lambda: f64,
    pub clamp_min: f64,
    pub clamp_max: f64,
    pub channels: TextureChannels,
    pub domain: ContrastDomain,
    pub log_floor: f64,
}

impl Default for TextureConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            orientations: 4,
            sigma_local: 2.0,
            sigma_surround: 4.0,
            sigma_contrast: 1.5,
            lambda: 1.0,
            clamp_min: 0.2,
            clamp_max: 1.0,
            channels: TextureChannels::Luminance,
            domain: ContrastDomain::Log,
            log_floor: 1e-3,
        }
    }
}

impl TextureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.orientations == 0 {
            return Err(invalid("texture levels and orientations must be positive"));
        }
        if !(self.sigma_local > 0.0 && self.sigma_surround > 0.0) {
            return Err(invalid("texture sigmas must be positive"));
        }
        if !(self.sigma_contrast >= 0.0 && self.sigma_contrast.is_finite()) {
            return Err(invalid("contrast smoothing must be finite and >= 0"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda must be finite and >= 0"));
        }
        if !(self.clamp_min >= 0.0
            && self.clamp_min <= self.clamp_max
            && self.clamp_max.is_finite())
        {
            return Err(invalid(
                "clamp range must satisfy 0 <= clamp_min <= clamp_max",
            ));
        }
        if !(self.log_floor > 0.0) {
            return Err(invalid("log floor must be positive"));
        }
        Ok(())
    }

    pub fn local_sigma(&self, level: usize) -> f64 {
        self.sigma_local * SteerablePyramid::wavelength(level)
    }
}

/// Per-band local frequency content and its contrast, in band order.
#[derive(Debug, Clone)]
pub struct SubbandSaliency {
    pub local: Vec<Grid>,
    pub contrast: Vec<Grid>,
}

impl SubbandSaliency {
    /// Mean over bands and masked pixels of the contrast, negatives floored at 0.
    pub fn mean_contrast(&self, mask: Option<&RoiMask>) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for c in &self.contrast {
            for (i, &v) in c.data().iter().enumerate() {
                if mask.is_none_or(|m| m.data()[i]) {
                    sum += v.max(0.0);
                    n += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

/// Rectify and average a band: `blur(|s|, sigma)`.
pub fn local_frequency(band: &Grid, sigma: f64) -> Grid {
    gaussian_blur(&band.map(f64::abs), sigma)
}

/// Center minus surround of local frequency content, smoothed by
/// `sigma_smooth` when it is positive.
pub fn subband_conspicuity(
    local: &Grid,
    sigma_surround: f64,
    sigma_smooth: f64,
    domain: ContrastDomain,
    log_floor: f64,
) -> Grid {
    let base = match domain {
        ContrastDomain::Log => local.map(|v| (v.max(0.0) + log_floor).ln()),
        ContrastDomain::Linear => local.clone(),
    };
    let surround = gaussian_blur(&base, sigma_surround);
    let contrast = base.zip_map(&surround, |a, b| a - b).expect("same dims");
    if sigma_smooth > 0.0 {
        gaussian_blur(&contrast, sigma_smooth)
    } else {
        contrast
    }
}

pub fn subband_saliency(pyr: &SteerablePyramid, cfg: &TextureConfig) -> Result<SubbandSaliency> {
    cfg.validate()?;
    let mut local = Vec::with_capacity(pyr.bands.len());
    let mut contrast = Vec::with_capacity(pyr.bands.len());
    for level in 0..pyr.levels {
        let sigma = cfg.local_sigma(level);
        for k in 0..pyr.orientations {
            let l = local_frequency(pyr.band(level, k), sigma);
            contrast.push(subband_conspicuity(
                &l,
                sigma * cfg.sigma_surround,
                sigma * cfg.sigma_contrast,
                cfg.domain,
                cfg.log_floor,
            ));
            local.push(l);
        }
    }
    Ok(SubbandSaliency { local, contrast })
}

/// Per-pixel coefficient scale `clamp(exp(-lambda * max(contrast, 0)))`.
pub fn deemphasis_scale(contrast: f64, lambda: f64, clamp_min: f64, clamp_max: f64) -> f64 {
    (-lambda * contrast.max(0.0))
        .exp()
        .clamp(clamp_min, clamp_max)
}

/// Scale band coefficients inside `mask` (everywhere if `None`) by the
/// clamped exponential of their contrast. Residuals are not touched.
pub fn deemphasize(
    pyr: &SteerablePyramid,
    sal: &SubbandSaliency,
    mask: Option<&RoiMask>,
    lambda: f64,
    clamp: (f64, f64),
) -> Result<SteerablePyramid> {
    if sal.contrast.len() != pyr.bands.len() {
        return Err(invalid("saliency does not match pyramid band count"));
    }
    let dims = pyr.dims();
    if let Some(m) = mask {
        m.ensure_dims(dims.0, dims.1)?;
    }
    let mut out = pyr.clone();
    for (band, c) in out.bands.iter_mut().zip(&sal.contrast) {
        if c.dims() != dims {
            return Err(invalid("saliency maps do not match pyramid dimensions"));
        }
        for (i, (v, &s)) in band.data_mut().iter_mut().zip(c.data()).enumerate() {
            if mask.is_none_or(|m| m.data()[i]) {
                *v *= deemphasis_scale(s, lambda, clamp.0, clamp.1);
            }
        }
    }
    Ok(out)
}

/// Decompose, de-emphasize and reconstruct one plane, without histogram matching.
pub fn deemphasize_plane(
    plane: &Grid,
    mask: Option<&RoiMask>,
    cfg: &TextureConfig,
) -> Result<Grid> {
    let pyr = decompose(plane, cfg.levels, cfg.orientations)?;
    let sal = subband_saliency(&pyr, cfg)?;
    Ok(deemphasize(&pyr, &sal, mask, cfg.lambda, (cfg.clamp_min, cfg.clamp_max))?.reconstruct())
}

/// Texture contrast of an image's luminance, averaged over `mask`.
pub fn texture_contrast(img: &Image, mask: Option<&RoiMask>, cfg: &TextureConfig) -> Result<f64> {
    let v = luminance(img)?;
    let pyr = decompose(&v, cfg.levels, cfg.orientations)?;
    Ok(subband_saliency(&pyr, cfg)?.mean_contrast(mask))
}

fn luminance(img: &Image) -> Result<Grid> {
    match img.layout() {
        Layout::Gray => Ok(img.plane(0).clone()),
        _ => rgb_to_gray(&img.to_rgb()),
    }
}

/// De-emphasize salient texture inside `mask` and match the result's
/// histogram to the original.
pub fn su_retarget(img: &Image, mask: &RoiMask, cfg: &TextureConfig) -> Result<Image> {
    cfg.validate()?;
    let (w, h) = img.dims();
    mask.ensure_dims(w, h)?;
    if mask.is_empty() {
        return Err(invalid("texture retargeting needs a non-empty mask"));
    }
    let work = match img.layout() {
        Layout::Hsv => img.to_rgb(),
        _ => img.clone(),
    };
    match (cfg.channels, work.layout()) {
        (TextureChannels::PerChannel, _) | (_, Layout::Gray) => {
            let planes = work
                .planes()
                .iter()
                .map(|p| match_histogram(&deemphasize_plane(p, Some(mask), cfg)?, p))
                .collect::<Result<Vec<_>>>()?;
            Image::from_planes(work.layout(), planes)
        }
        (TextureChannels::Luminance, _) => {
            let v = rgb_to_gray(&work)?;
            let matched = match_histogram(&deemphasize_plane(&v, Some(mask), cfg)?, &v)?;
            let delta = matched.zip_map(&v, |a, b| a - b)?;
            let planes = work
                .planes()
                .iter()
                .map(|p| p.zip_map(&delta, |a, d| a + d))
                .collect::<Result<Vec<_>>>()?;
            Image::from_planes(Layout::Rgb, planes)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rms(a: &Grid, b: &Grid) -> f64 {
        let s: f64 = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).powi(2))
            .sum();
        (s / a.len() as f64).sqrt()
    }

    #[test]
    fn angular_gain_for_four_orientations() {
        assert!((angular_gain(4).powi(2) - 0.8).abs() < 1e-15);
        assert!((angular_gain(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn filter_bank_is_tight() {
        let bank = Bank::new(3, 4);
        let filters = bank.filters();
        for &(wx, wy) in &[
            (0.0, 0.0),
            (0.3, -0.1),
            (1.0, 2.0),
            (-3.0, 0.5),
            (PI, PI),
            (0.05, 0.7),
        ] {
            let total: f64 = filters
                .iter()
                .map(|f| bank.response(f, wx, wy).norm_sqr())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{wx},{wy}: {total}");
        }
    }

    #[test]
    fn round_trip_identity() {
        let g = Grid::from_fn(48, 40, |x, y| ((x * 13 + y * 7) % 17) as f64 / 16.0);
        let pyr = decompose(&g, 3, 4).unwrap();
        assert!(rms(&g, &pyr.reconstruct()) < 1e-10);
    }

    #[test]
    fn constant_image_lives_in_lowpass() {
        let g = Grid::filled(32, 32, 0.6);
        let pyr = decompose(&g, 3, 4).unwrap();
        assert!(pyr
            .bands
            .iter()
            .chain([&pyr.highpass])
            .all(|b| b.data().iter().all(|v| v.abs() <= 1e-6)));
        assert!(pyr.lowpass.data().iter().all(|v| (v - 0.6).abs() < 1e-9));
    }

    #[test]
    fn too_small_rejected() {
        assert!(decompose(&Grid::new(8, 32), 4, 4).is_err());
        assert!(decompose(&Grid::new(16, 16), 0, 4).is_err());
    }

    #[test]
    fn scale_examples() {
        assert_eq!(deemphasis_scale(0.0, 1.0, 0.2, 1.0), 1.0);
        assert!((deemphasis_scale(2f64.ln(), 1.0, 0.0, 10.0) - 0.5).abs() < 1e-15);
        assert_eq!(deemphasis_scale(10.0, 1.0, 0.2, 1.0), 0.2);
        assert_eq!(deemphasis_scale(-3.0, 1.0, 0.2, 1.0), 1.0);
    }

    #[test]
    fn zero_contrast_leaves_pyramid_unchanged() {
        let g = Grid::from_fn(32, 32, |x, y| ((x ^ y) & 1) as f64);
        let pyr = decompose(&g, 2, 4).unwrap();
        let sal = SubbandSaliency {
            local: vec![Grid::new(32, 32); 8],
            contrast: vec![Grid::new(32, 32); 8],
        };
        let out = deemphasize(&pyr, &sal, None, 1.0, (0.2, 1.0)).unwrap();
        assert!(out.bands.iter().zip(&pyr.bands).all(|(a, b)| a == b));
    }

    #[test]
    fn contrast_of_constant_local_content_is_zero() {
        let l = Grid::filled(40, 40, 0.3);
        for d in [ContrastDomain::Log, ContrastDomain::Linear] {
            assert!(subband_conspicuity(&l, 8.0, 2.0, d, 1e-3)
                .data()
                .iter()
                .all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn rectified_sinusoid_averages_to_two_over_pi() {
        let amp = 0.4;
        let band = Grid::from_fn(128, 128, |x, _| amp * (2.0 * PI * x as f64 / 8.0).sin());
        let l = local_frequency(&band, 16.0);
        let expect = 2.0 / PI * amp;
        for y in [40, 64, 90] {
            for x in [40, 64, 90] {
                assert!((l.get(x, y) - expect).abs() < 0.1 * expect);
            }
        }
    }

    #[test]
    fn amplitude_step_gives_monotone_local_content() {
        let band = Grid::from_fn(128, 8, |x, _| {
            let a = if x < 64 { 0.1 } else { 0.5 };
            a * (PI * x as f64 / 2.0).sin()
        });
        let l = local_frequency(&band, 8.0);
        // stay clear of edge replication at the ends
        for x in 40..88 {
            assert!(l.get(x + 1, 4) >= l.get(x, 4) - 1e-3, "x={x}");
        }
    }

    #[test]
    fn luminance_mode_preserves_uniform_image() {
        let img = Image::rgb_filled(64, 64, [0.3, 0.6, 0.2]);
        let mask = RoiMask::from_fn(64, 64, |_, _| true);
        let cfg = TextureConfig {
            levels: 3,
            ..Default::default()
        };
        let out = su_retarget(&img, &mask, &cfg).unwrap();
        for c in 0..3 {
            assert!(rms(img.plane(c), out.plane(c)) < 0.01);
        }
    }
}
