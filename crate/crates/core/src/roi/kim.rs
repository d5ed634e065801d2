use rustfft::num_complex::Complex;

use crate::error::{degenerate, invalid, Error, Result};
use crate::imaging::{
    convolve_separable, convolve_separable_adjoint, hsv_to_rgb, rgb_to_hsv, Grid, Image, Layout,
    RoiMask,
};
use crate::steerable::fft;

fn truncated_gaussian(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Difference-of-Gaussians center-surround operator acting on scalar maps
/// by convolution with replicated borders.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSurroundOperator {
    sigma_center: f64,
    sigma_surround: f64,
    center: Vec<f64>,
    surround: Vec<f64>,
    identity: bool,
}

impl CenterSurroundOperator {
    /// Both Gaussians are truncated at `ceil(3 * sigma_surround)`.
    pub fn new(sigma_center: f64, sigma_surround: f64) -> Result<Self> {
        let radius = (3.0 * sigma_surround).ceil().max(1.0) as usize;
        Self::with_radius(sigma_center, sigma_surround, radius)
    }

    pub fn with_radius(sigma_center: f64, sigma_surround: f64, radius: usize) -> Result<Self> {
        if !(sigma_center > 0.0 && sigma_surround.is_finite() && sigma_surround > sigma_center) {
            return Err(invalid(format!(
                "center-surround needs 0 < sigma_center < sigma_surround, got {sigma_center} and {sigma_surround}"
            )));
        }
        if radius == 0 {
            return Err(invalid("kernel radius must be >= 1"));
        }
        Ok(Self {
            sigma_center,
            sigma_surround,
            center: truncated_gaussian(sigma_center, radius),
            surround: truncated_gaussian(sigma_surround, radius),
            identity: false,
        })
    }

    /// The limit in which the operator leaves maps unchanged.
    pub fn identity() -> Self {
        Self {
            sigma_center: 0.0,
            sigma_surround: 0.0,
            center: vec![1.0],
            surround: vec![0.0],
            identity: true,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn sigmas(&self) -> (f64, f64) {
        (self.sigma_center, self.sigma_surround)
    }

    pub fn radius(&self) -> usize {
        self.center.len() / 2
    }

    /// 1-D factors `(center, surround)`; the 2-D kernel is
    /// `center ⊗ center - surround ⊗ surround`.
    pub fn factors(&self) -> (&[f64], &[f64]) {
        (&self.center, &self.surround)
    }

    pub fn kernel_2d(&self) -> Grid {
        let n = self.center.len();
        Grid::from_fn(n, n, |x, y| {
            self.center[x] * self.center[y] - self.surround[x] * self.surround[y]
        })
    }

    pub fn apply(&self, x: &Grid) -> Grid {
        if self.identity {
            return x.clone();
        }
        let c = convolve_separable(x, &self.center).expect("odd kernel");
        let s = convolve_separable(x, &self.surround).expect("odd kernel");
        c.zip_map(&s, |a, b| a - b).expect("same dims")
    }

    pub fn apply_adjoint(&self, y: &Grid) -> Grid {
        if self.identity {
            return y.clone();
        }
        let c = convolve_separable_adjoint(y, &self.center).expect("odd kernel");
        let s = convolve_separable_adjoint(y, &self.surround).expect("odd kernel");
        c.zip_map(&s, |a, b| a - b).expect("same dims")
    }

    /// Frequency response of the circular version of the operator.
    fn circular_response(&self, width: usize, height: usize) -> Vec<f64> {
        let line = |k: &[f64], n: usize| -> Vec<f64> {
            let r = (k.len() / 2) as f64;
            (0..n)
                .map(|i| {
                    let w = fft::omega(i, n);
                    k.iter()
                        .enumerate()
                        .map(|(t, &v)| v * (w * (t as f64 - r)).cos())
                        .sum()
                })
                .collect()
        };
        let (cx, cy) = (line(&self.center, width), line(&self.center, height));
        let (sx, sy) = (line(&self.surround, width), line(&self.surround, height));
        (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| cx[x] * cy[y] - sx[x] * sy[y])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    /// Tikhonov weight on `|x|^2`.
    pub reg: f64,
    pub max_iterations: usize,
    /// Stop once the normal-equation residual falls below this fraction of
    /// the right-hand side.
    pub tolerance: f64,
    pub range: (f64, f64),
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            reg: 1e-9,
            max_iterations: 50,
            tolerance: 1e-3,
            range: (0.8, 1.3),
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reg >= 0.0 && self.reg.is_finite()) {
            return Err(invalid("regularization must be finite and >= 0"));
        }
        if !(self.tolerance >= 0.0) || self.max_iterations == 0 {
            return Err(invalid(
                "tolerance must be >= 0 and the iteration budget positive",
            ));
        }
        let (lo, hi) = self.range;
        if !(lo > 0.0 && lo <= 1.0 && hi >= 1.0 && hi.is_finite()) {
            return Err(invalid(format!(
                "scale range must satisfy 0 < lo <= 1 <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Inversion {
    /// Solution of the regularized normal equations.
    pub raw: Grid,
    /// `raw` mapped into the configured range, with 0 mapped to 1.
    pub factors: Grid,
    /// `|C raw - s| / |s|`, 0 for a zero target.
    pub forward_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &Grid, b: &Grid) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut Grid, a: f64, x: &Grid) {
    for (v, u) in y.data_mut().iter_mut().zip(x.data()) {
        *v += a * u;
    }
}

/// Affine map `1 + k x` with the largest `k` that keeps every value inside
/// `[lo, hi]`, so zero stays at 1 and one end of the range is reached.
pub fn normalize_factors(raw: &Grid, range: (f64, f64)) -> Grid {
    let (lo, hi) = range;
    let (max, min) = (raw.max(), raw.min());
    let mut k = f64::INFINITY;
    if max > 0.0 {
        k = k.min((hi - 1.0) / max);
    }
    if min < 0.0 {
        k = k.min((1.0 - lo) / -min);
    }
    if !k.is_finite() {
        return Grid::filled(raw.width(), raw.height(), 1.0);
    }
    raw.map(|v| (1.0 + k * v).clamp(lo, hi))
}

/// Preconditioned conjugate gradients for `A x = b` from `x = 0`. Returns
/// the iterate, the iteration count and whether the tolerance was met.
fn conjugate_gradients(
    a: impl Fn(&Grid) -> Grid,
    m: impl Fn(&Grid) -> Grid,
    b: &Grid,
    max_iterations: usize,
    tolerance: f64,
) -> Result<(Grid, usize, bool)> {
    let b_norm = dot(b, b).sqrt();
    let mut x = Grid::new(b.width(), b.height());
    if b_norm == 0.0 {
        return Ok((x, 0, true));
    }
    let mut r = b.clone();
    let mut z = m(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let (mut prev, mut growth) = (b_norm, 0);
    for it in 1..=max_iterations {
        let ap = a(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0 && pap.is_finite()) {
            return Err(Error::Numerical(format!(
                "center-surround solve broke down at iteration {it}: curvature p^T A p = {pap:e}"
            )));
        }
        let alpha = rz / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let r_norm = dot(&r, &r).sqrt();
        if !r_norm.is_finite() {
            return Err(Error::Numerical(format!(
                "center-surround solve produced a non-finite residual at iteration {it}"
            )));
        }
        // oscillation below the starting residual is normal for CG
        growth = if r_norm > prev && r_norm > b_norm {
            growth + 1
        } else {
            0
        };
        if growth >= 10 {
            return Err(Error::Numerical(format!(
                "center-surround solve diverged: residual grew for 10 iterations to {:.3e} times the right-hand side at iteration {it}",
                r_norm / b_norm
            )));
        }
        prev = r_norm;
        if r_norm <= tolerance * b_norm {
            return Ok((x, it, true));
        }
        z = m(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pv, zv) in p.data_mut().iter_mut().zip(z.data()) {
            *pv = zv + beta * *pv;
        }
    }
    Ok((x, max_iterations, false))
}

/// Solve `(C^T C + reg I) x = C^T s` by conjugate gradients, preconditioned
/// with the circular approximation of `C^T C + reg I`.
pub fn invert_center_surround(
    target: &Grid,
    op: &CenterSurroundOperator,
    cfg: &InversionConfig,
) -> Result<Inversion> {
    cfg.validate()?;
    if target.data().iter().any(|v| !v.is_finite()) {
        return Err(invalid("target map contains non-finite values"));
    }
    let (w, h) = target.dims();
    let s_norm = dot(target, target).sqrt();
    if op.is_identity() {
        return Ok(Inversion {
            raw: target.clone(),
            factors: normalize_factors(target, cfg.range),
            forward_residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let normal = |x: &Grid| {
        let mut y = op.apply_adjoint(&op.apply(x));
        axpy(&mut y, cfg.reg, x);
        y
    };
    let precond: Vec<f64> = op
        .circular_response(w, h)
        .into_iter()
        .map(|c| {
            let p = c * c + cfg.reg;
            if p > 0.0 {
                1.0 / p
            } else {
                1.0
            }
        })
        .collect();
    let apply_precond = |r: &Grid| {
        let mut spec = fft::forward(r.data(), w, h);
        for (c, &p) in spec.data.iter_mut().zip(&precond) {
            *c *= Complex::new(p, 0.0);
        }
        Grid::from_vec(w, h, fft::inverse_real(spec)).expect("same size")
    };

    let b = op.apply_adjoint(target);
    let (x, iterations, converged) =
        conjugate_gradients(normal, apply_precond, &b, cfg.max_iterations, cfg.tolerance)?;
    let cx = op.apply(&x);
    let diff = cx.zip_map(target, |a, b| a - b)?;
    let forward_residual = if s_norm > 0.0 {
        dot(&diff, &diff).sqrt() / s_norm
    } else {
        0.0
    };
    Ok(Inversion {
        factors: normalize_factors(&x, cfg.range),
        raw: x,
        forward_residual,
        iterations,
        converged,
    })
}

/// Saliency target for a ROI: `+1` on the ROI and a negative constant on
/// its surround ring chosen so the target sums to zero.
pub fn kim_target(roi: &RoiMask) -> Result<Grid> {
    if roi.is_empty() {
        return Err(invalid("ROI mask is empty"));
    }
    if roi.is_full() {
        return Err(degenerate(
            "ROI mask covers the whole image, leaving no surround",
        ));
    }
    let ring = roi.surround_ring();
    let balance = roi.count() as f64 / ring.count() as f64;
    Ok(Grid::from_fn(roi.width(), roi.height(), |x, y| {
        if roi.contains(x, y) {
            1.0
        } else if ring.contains(x, y) {
            -balance
        } else {
            0.0
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KimFeature {
    Intensity,
    Saturation,
}

impl KimFeature {
    pub fn as_str(self) -> &'static str {
        match self {
            KimFeature::Intensity => "intensity",
            KimFeature::Saturation => "saturation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "intensity" => Ok(KimFeature::Intensity),
            "saturation" => Ok(KimFeature::Saturation),
            _ => Err(invalid(format!(
                "unknown kim feature '{s}' (expected intensity or saturation)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KimConfig {
    pub sigma_center: f64,
    pub sigma_surround: f64,
    pub inversion: InversionConfig,
    pub features: Vec<KimFeature>,
}

impl Default for KimConfig {
    fn default() -> Self {
        Self {
            sigma_center: 1.0,
            sigma_surround: 1.6,
            inversion: InversionConfig::default(),
            features: vec![KimFeature::Intensity, KimFeature::Saturation],
        }
    }
}

impl KimConfig {
    pub fn operator(&self) -> Result<CenterSurroundOperator> {
        CenterSurroundOperator::new(self.sigma_center, self.sigma_surround)
    }
}

/// Multiply the selected feature channels by the scale factors that invert
/// the center-surround operator on the ROI target. Gray images only carry
/// intensity.
pub fn kim_retarget(
    img: &Image,
    roi: &RoiMask,
    cfg: &KimConfig,
) -> Result<(Image, Option<Inversion>)> {
    let (w, h) = img.dims();
    roi.ensure_dims(w, h)?;
    let target = kim_target(roi)?;
    let op = cfg.operator()?;
    cfg.inversion.validate()?;
    if cfg.features.is_empty() {
        return Ok((img.clone(), None));
    }
    let inv = invert_center_surround(&target, &op, &cfg.inversion)?;
    let scale = |p: &Grid| {
        p.zip_map(&inv.factors, |v, f| (v * f).clamp(0.0, 1.0))
            .expect("same dims")
    };
    let wants = |f| cfg.features.contains(&f);
    let out = match img.layout() {
        Layout::Gray => {
            if wants(KimFeature::Intensity) {
                Image::gray(scale(img.plane(0)))?
            } else {
                img.clone()
            }
        }
        layout => {
            let hsv = if layout == Layout::Hsv {
                img.clone()
            } else {
                rgb_to_hsv(img)?
            };
            let mut planes = hsv.into_planes();
            if wants(KimFeature::Saturation) {
                planes[1] = scale(&planes[1]);
            }
            if wants(KimFeature::Intensity) {
                planes[2] = scale(&planes[2]);
            }
            let hsv = Image::from_planes(Layout::Hsv, planes)?;
            if layout == Layout::Hsv {
                hsv
            } else {
                hsv_to_rgb(&hsv)?
            }
        }
    };
    Ok((out, Some(inv)))
}
