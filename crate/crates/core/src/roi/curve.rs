use crate::error::{degenerate, invalid, Result};
use crate::imaging::{
    convolve_xy, gaussian_blur, gaussian_derivative_kernel, gaussian_kernel, hsv_to_rgb,
    rgb_to_gray, rgb_to_hsv, rotate_region, Grid, Image, Layout, RoiMask,
};

pub const KL_FLOOR: f64 = 1e-4;

/// Circular histogram over `[0, period)` degrees with a positive floor on
/// every bin. Bin `k` is centered on `k * period / bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleDistribution {
    bins: Vec<f64>,
    period: f64,
}

impl AngleDistribution {
    /// Normalize non-negative weights, raise every bin to `floor` and
    /// renormalize.
    pub fn from_weights(weights: &[f64], period: f64, floor: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("distribution needs at least one bin"));
        }
        if !(period > 0.0 && period.is_finite()) || !(floor >= 0.0 && floor < 1.0) {
            return Err(invalid("period must be positive and floor in [0, 1)"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("histogram weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(degenerate("histogram has no mass"));
        }
        let floored: Vec<f64> = weights.iter().map(|w| (w / total).max(floor)).collect();
        let s: f64 = floored.iter().sum();
        Ok(Self {
            bins: floored.into_iter().map(|v| v / s).collect(),
            period,
        })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn bin_width(&self) -> f64 {
        self.period / self.bins.len() as f64
    }

    /// Rotate all mass by `k` bins toward larger angles.
    pub fn shifted(&self, k: isize) -> Self {
        let n = self.bins.len() as isize;
        let bins = (0..n)
            .map(|i| self.bins[(i - k).rem_euclid(n) as usize])
            .collect();
        Self {
            bins,
            period: self.period,
        }
    }

    /// Circular `[1, 2, 1] / 4` smoothing.
    pub fn smoothed(&self) -> Self {
        let n = self.bins.len();
        let bins = (0..n)
            .map(|i| {
                (self.bins[(i + n - 1) % n] + 2.0 * self.bins[i] + self.bins[(i + 1) % n]) / 4.0
            })
            .collect();
        Self {
            bins,
            period: self.period,
        }
    }

    fn bin_of(&self, angle: f64) -> usize {
        let n = self.bins.len();
        ((angle / self.bin_width()).round() as isize).rem_euclid(n as isize) as usize
    }
}

fn check_compatible(a: &AngleDistribution, b: &AngleDistribution) -> Result<()> {
    if a.len() != b.len() || a.period != b.period {
        return Err(invalid(format!(
            "distributions differ: {} bins over {} vs {} bins over {}",
            a.len(),
            a.period,
            b.len(),
            b.period
        )));
    }
    Ok(())
}

/// `KL(p || q) + KL(q || p)`.
pub fn symmetric_kl(p: &AngleDistribution, q: &AngleDistribution) -> Result<f64> {
    check_compatible(p, q)?;
    Ok(p.bins
        .iter()
        .zip(&q.bins)
        .map(|(&a, &b)| (a - b) * (a.ln() - b.ln()))
        .sum())
}

/// Divergence between the ROI and its surround for every rotation of the
/// ROI by a whole number of bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub phi: Vec<f64>,
    pub divergence: Vec<f64>,
}

impl Curve {
    fn pick(&self, better: impl Fn(f64, f64) -> bool) -> (f64, f64) {
        let mut best = 0;
        for (i, &d) in self.divergence.iter().enumerate() {
            // values within rounding of the incumbent count as ties
            let tol = 1e-12 * self.divergence[best].abs().max(1.0);
            if better(d, self.divergence[best]) && (d - self.divergence[best]).abs() > tol {
                best = i;
            }
        }
        (self.phi[best], self.divergence[best])
    }

    /// Angle of largest divergence; the smallest such angle on ties.
    pub fn argmax(&self) -> (f64, f64) {
        self.pick(|a, b| a > b)
    }

    pub fn argmin(&self) -> (f64, f64) {
        self.pick(|a, b| a < b)
    }

    pub fn spread(&self) -> f64 {
        let max = self
            .divergence
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self
            .divergence
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi_degrees,divergence\n");
        for (p, d) in self.phi.iter().zip(&self.divergence) {
            out.push_str(&format!("{p},{d}\n"));
        }
        out
    }
}

pub fn rotation_saliency_curve(
    roi: &AngleDistribution,
    surround: &AngleDistribution,
) -> Result<Curve> {
    check_compatible(roi, surround)?;
    let n = roi.len();
    let mut phi = Vec::with_capacity(n);
    let mut divergence = Vec::with_capacity(n);
    for k in 0..n {
        phi.push(k as f64 * roi.bin_width());
        divergence.push(symmetric_kl(&roi.shifted(k as isize), surround)?);
    }
    Ok(Curve { phi, divergence })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub bins: usize,
    /// Minimum gradient magnitude (orientation) or saturation (hue) for a
    /// pixel to vote.
    pub tau: f64,
    pub floor: f64,
    /// Half-width in degrees of the wrapped Cauchy kernel each vote is
    /// spread with; 0 keeps votes in a single bin.
    pub vote_width: f64,
    /// Scale of the Gaussian-derivative gradient; 0 uses central differences.
    pub gradient_sigma: f64,
    /// Gaussian window of the structure tensor that orients edge votes.
    pub tensor_sigma: f64,
    /// Pixels whose structure-tensor coherence falls below this do not vote.
    pub min_coherence: f64,
    /// Votes are weighted by gradient magnitude times coherence to this power.
    pub coherence_power: f64,
    pub smooth: bool,
    /// Curves whose max - min falls below this are reported as flat.
    pub flat_threshold: f64,
}

impl CurveConfig {
    pub fn orientation() -> Self {
        Self {
            bins: 180,
            tau: 0.02,
            floor: KL_FLOOR,
            vote_width: 0.7,
            gradient_sigma: 1.0,
            tensor_sigma: 1.0,
            min_coherence: 0.75,
            coherence_power: 1.0,
            smooth: false,
            flat_threshold: 0.05,
        }
    }

    pub fn hue() -> Self {
        Self {
            bins: 360,
            tau: 0.0,
            floor: KL_FLOOR,
            vote_width: 0.0,
            gradient_sigma: 1.0,
            tensor_sigma: 1.0,
            min_coherence: 0.0,
            coherence_power: 1.0,
            smooth: false,
            flat_threshold: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(invalid("at least two histogram bins are required"));
        }
        if !(self.tau >= 0.0) || !(self.floor >= 0.0 && self.floor * self.bins as f64 <= 0.5) {
            return Err(invalid(
                "tau must be >= 0 and the floor small against 1 / bins",
            ));
        }
        if !(self.flat_threshold >= 0.0)
            || !(self.vote_width >= 0.0)
            || !(self.tensor_sigma >= 0.0)
            || !(self.gradient_sigma >= 0.0)
            || !(0.0..=1.0).contains(&self.min_coherence)
        {
            return Err(invalid(
                "flat threshold, vote width and tensor sigma must be >= 0, min coherence in [0, 1]",
            ));
        }
        Ok(())
    }
}

fn luminance(img: &Image) -> Result<Grid> {
    match img.layout() {
        Layout::Gray => Ok(img.plane(0).clone()),
        Layout::Rgb => rgb_to_gray(img),
        Layout::Hsv => rgb_to_gray(&img.to_rgb()),
    }
}

/// Sobel gradient `(gx, gy)` scaled so a unit step has magnitude 1/2.
/// Wrapped Cauchy kernel over `bins` bins of a circle of `period` degrees,
/// indexed by bin offset.
fn cauchy_kernel(bins: usize, period: f64, half_width: f64) -> Vec<f64> {
    let mut k = vec![0.0; bins];
    if half_width <= 0.0 {
        k[0] = 1.0;
        return k;
    }
    let a = std::f64::consts::TAU * half_width / period;
    for (d, v) in k.iter_mut().enumerate() {
        let phase = std::f64::consts::TAU * d as f64 / bins as f64;
        *v = a.sinh() / (a.cosh() - phase.cos());
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

fn spread_votes(hist: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = hist.len();
    if kernel[0] == 1.0 {
        return hist.to_vec();
    }
    (0..n)
        .map(|i| (0..n).map(|j| hist[j] * kernel[(i + n - j) % n]).sum())
        .collect()
}

/// Edge orientation histogram over masked pixels whose gradient magnitude
/// exceeds `tau`. Each pixel votes for the edge direction (perpendicular to
/// the dominant gradient of its structure tensor, counter-clockwise as
/// displayed, modulo 180) with weight `magnitude * coherence`, so corners
/// and junctions barely vote.
pub fn edge_distribution(
    img: &Image,
    mask: &RoiMask,
    cfg: &CurveConfig,
) -> Result<AngleDistribution> {
    cfg.validate()?;
    let (w, h) = img.dims();
    mask.ensure_dims(w, h)?;
    if mask.is_empty() {
        return Err(invalid("edge distribution mask is empty"));
    }
    let lum = luminance(img)?;
    let (d, g) = (
        gaussian_derivative_kernel(cfg.gradient_sigma),
        gaussian_kernel(cfg.gradient_sigma),
    );
    let gx = convolve_xy(&lum, &d, &g)?;
    // y axis pointing up, as displayed
    let gy = convolve_xy(&lum, &g, &d)?.map(|v| -v);
    let jxx = gaussian_blur(&gx.zip_map(&gx, |a, b| a * b)?, cfg.tensor_sigma);
    let jyy = gaussian_blur(&gy.zip_map(&gy, |a, b| a * b)?, cfg.tensor_sigma);
    let jxy = gaussian_blur(&gx.zip_map(&gy, |a, b| a * b)?, cfg.tensor_sigma);
    let width = 180.0 / cfg.bins as f64;
    let mut hist = vec![0.0; cfg.bins];
    for i in 0..w * h {
        if !mask.data()[i] {
            continue;
        }
        let mag = gx.data()[i].hypot(gy.data()[i]);
        if mag <= cfg.tau {
            continue;
        }
        let (a, b, c) = (jxx.data()[i], jyy.data()[i], jxy.data()[i]);
        let trace = a + b;
        if trace <= 0.0 {
            continue;
        }
        let coherence = (a - b).hypot(2.0 * c) / trace;
        if coherence < cfg.min_coherence {
            continue;
        }
        let gradient = 0.5 * (2.0 * c).atan2(a - b).to_degrees();
        let angle = (gradient + 90.0).rem_euclid(180.0);
        hist[((angle / width).round() as usize) % cfg.bins] +=
            mag * coherence.powf(cfg.coherence_power);
    }
    if hist.iter().all(|&v| v == 0.0) {
        return Err(degenerate(format!(
            "no edge pixels above tau = {} in the region",
            cfg.tau
        )));
    }
    let hist = spread_votes(&hist, &cauchy_kernel(cfg.bins, 180.0, cfg.vote_width));
    let d = AngleDistribution::from_weights(&hist, 180.0, cfg.floor)?;
    Ok(if cfg.smooth { d.smoothed() } else { d })
}

fn hsv_of(img: &Image) -> Result<Image> {
    match img.layout() {
        Layout::Gray => Err(degenerate("a grayscale image carries no hue")),
        Layout::Rgb => rgb_to_hsv(img),
        Layout::Hsv => Ok(img.clone()),
    }
}

/// Saturation-weighted histogram of hue over `[0, 360)`; pixels with
/// saturation at or below `tau` do not vote.
pub fn hue_distribution(
    img: &Image,
    mask: &RoiMask,
    cfg: &CurveConfig,
) -> Result<AngleDistribution> {
    cfg.validate()?;
    let hsv = hsv_of(img)?;
    hue_histogram(&hsv, mask, cfg)
}

fn hue_histogram(hsv: &Image, mask: &RoiMask, cfg: &CurveConfig) -> Result<AngleDistribution> {
    let (w, h) = hsv.dims();
    mask.ensure_dims(w, h)?;
    if mask.is_empty() {
        return Err(invalid("hue distribution mask is empty"));
    }
    let mut hist = vec![0.0; cfg.bins];
    let probe = AngleDistribution {
        bins: vec![0.0; cfg.bins],
        period: 360.0,
    };
    for (i, &m) in mask.data().iter().enumerate() {
        let s = hsv.plane(1).data()[i];
        if m && s > cfg.tau {
            hist[probe.bin_of(hsv.plane(0).data()[i] * 360.0)] += s;
        }
    }
    if hist.iter().all(|&v| v == 0.0) {
        return Err(degenerate("region has no chromatic pixels"));
    }
    let hist = spread_votes(&hist, &cauchy_kernel(cfg.bins, 360.0, cfg.vote_width));
    let d = AngleDistribution::from_weights(&hist, 360.0, cfg.floor)?;
    Ok(if cfg.smooth { d.smoothed() } else { d })
}

#[derive(Debug, Clone)]
pub struct CurveOutcome {
    pub image: Image,
    pub curve: Curve,
    pub best_phi: f64,
    pub flags: Vec<String>,
}

pub const FLAT_CURVE: &str = "no salient rotation";

fn roi_and_surround(img: &Image, mask: &RoiMask) -> Result<RoiMask> {
    let (w, h) = img.dims();
    mask.ensure_dims(w, h)?;
    if mask.is_empty() {
        return Err(invalid("ROI mask is empty"));
    }
    if mask.is_full() {
        return Err(degenerate(
            "ROI mask covers the whole image, leaving no surround",
        ));
    }
    Ok(mask.surround_ring())
}

fn finish(image: Image, curve: Curve, cfg: &CurveConfig) -> CurveOutcome {
    let (best_phi, _) = curve.argmax();
    let mut flags = Vec::new();
    if curve.spread() < cfg.flat_threshold {
        flags.push(FLAT_CURVE.to_string());
    }
    CurveOutcome {
        image,
        curve,
        best_phi,
        flags,
    }
}

/// Rotate the ROI content by the angle that maximizes the divergence of
/// its edge distribution from that of its surround ring.
pub fn rotate_retarget(img: &Image, mask: &RoiMask, cfg: &CurveConfig) -> Result<CurveOutcome> {
    cfg.validate()?;
    let surround = roi_and_surround(img, mask)?;
    let roi_d = edge_distribution(img, mask, cfg)?;
    let sur_d = edge_distribution(img, &surround, cfg)?;
    let curve = rotation_saliency_curve(&roi_d, &sur_d)?;
    let (phi, _) = curve.argmax();
    let image = match img.layout() {
        Layout::Hsv => rgb_to_hsv(&rotate_region(&img.to_rgb(), mask, phi)?)?,
        _ => rotate_region(img, mask, phi)?,
    };
    Ok(finish(image, curve, cfg))
}

/// Rotate the hue of ROI pixels by the angle that maximizes the divergence
/// of the ROI hue distribution from that of its surround ring.
pub fn hue_retarget(img: &Image, mask: &RoiMask, cfg: &CurveConfig) -> Result<CurveOutcome> {
    cfg.validate()?;
    let surround = roi_and_surround(img, mask)?;
    let hsv = hsv_of(img)?;
    let mean_sat = hsv.plane(1).mean_in(mask).expect("non-empty");
    if mean_sat <= 0.05 {
        return Err(degenerate(format!(
            "ROI is achromatic (mean saturation {mean_sat:.4})"
        )));
    }
    let roi_d = hue_histogram(&hsv, mask, cfg)?;
    let sur_d = hue_histogram(&hsv, &surround, cfg)?;
    let curve = rotation_saliency_curve(&roi_d, &sur_d)?;
    let (phi, _) = curve.argmax();
    let turn = phi / 360.0;
    let mut planes = hsv.into_planes();
    for (i, &m) in mask.data().iter().enumerate() {
        if m {
            let v = &mut planes[0].data_mut()[i];
            *v = (*v + turn).rem_euclid(1.0);
        }
    }
    let out = Image::from_planes(Layout::Hsv, planes)?;
    let image = if img.layout() == Layout::Hsv {
        out
    } else {
        hsv_to_rgb(&out)?
    };
    Ok(finish(image, curve, cfg))
}
