//! Linear filtering with edge replication.

use super::Grid;
use crate::error::{invalid, Result};

fn check_kernel(kernel: &[f64]) -> Result<()> {
    if kernel.is_empty() || kernel.len() % 2 == 0 {
        return Err(invalid(format!(
            "kernel length must be odd and >= 1, got {}",
            kernel.len()
        )));
    }
    Ok(())
}

/// 1-D correlation of `src` into `dst` with clamped (replicated) borders.
/// `prefix[t]` is the sum of the first `t` kernel taps.
fn convolve_line(src: &[f64], dst: &mut [f64], kernel: &[f64], prefix: &[f64]) {
    let n = src.len() as isize;
    let len = kernel.len() as isize;
    let r = len / 2;
    let total = prefix[len as usize];
    for i in 0..n {
        let t_left = (r - i).clamp(0, len);
        let t_right = (n - i + r).clamp(0, len);
        let mut acc = prefix[t_left as usize] * src[0];
        acc += (total - prefix[t_right as usize]) * src[(n - 1) as usize];
        let (a, b) = (t_left as usize, t_right.max(t_left) as usize);
        let start = (i + t_left - r) as usize;
        acc += kernel[a..b]
            .iter()
            .zip(&src[start..start + (b - a)])
            .map(|(k, v)| k * v)
            .sum::<f64>();
        dst[i as usize] = acc;
    }
}

fn prefix_sums(kernel: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(kernel.len() + 1);
    let mut acc = 0.0;
    p.push(0.0);
    for &k in kernel {
        acc += k;
        p.push(acc);
    }
    p
}

fn convolve_rows(grid: &Grid, kernel: &[f64]) -> Grid {
    let (w, h) = grid.dims();
    let prefix = prefix_sums(kernel);
    let mut out = Grid::new(w, h);
    for y in 0..h {
        let src = &grid.data()[y * w..(y + 1) * w];
        convolve_line(
            src,
            &mut out.data_mut()[y * w..(y + 1) * w],
            kernel,
            &prefix,
        );
    }
    out
}

fn convolve_cols(grid: &Grid, kernel: &[f64]) -> Grid {
    let (w, h) = grid.dims();
    let r = (kernel.len() / 2) as isize;
    let mut out = Grid::new(w, h);
    let src = grid.data();
    for y in 0..h {
        let dst = &mut out.data_mut()[y * w..(y + 1) * w];
        let lo = y as isize - r;
        // taps that land beyond an edge all read the edge row
        let mut edge = [0.0f64; 2];
        for (k, &kv) in kernel.iter().enumerate() {
            let sy = lo + k as isize;
            if sy < 0 {
                edge[0] += kv;
            } else if sy >= h as isize {
                edge[1] += kv;
            } else {
                let row = &src[sy as usize * w..(sy as usize + 1) * w];
                for (d, s) in dst.iter_mut().zip(row) {
                    *d += kv * s;
                }
            }
        }
        for (e, sy) in [(edge[0], 0), (edge[1], h - 1)] {
            if e != 0.0 {
                let row = &src[sy * w..(sy + 1) * w];
                for (d, s) in dst.iter_mut().zip(row) {
                    *d += e * s;
                }
            }
        }
    }
    out
}

/// Apply `kernel` along x and then along y. Borders replicate the edge
/// sample; the result is not clamped.
pub fn convolve_separable(grid: &Grid, kernel: &[f64]) -> Result<Grid> {
    check_kernel(kernel)?;
    if grid.is_empty() {
        return Ok(grid.clone());
    }
    Ok(convolve_cols(&convolve_rows(grid, kernel), kernel))
}

/// Apply `along_x` across each row and then `along_y` down each column.
pub fn convolve_xy(grid: &Grid, along_x: &[f64], along_y: &[f64]) -> Result<Grid> {
    check_kernel(along_x)?;
    check_kernel(along_y)?;
    if grid.is_empty() {
        return Ok(grid.clone());
    }
    Ok(convolve_cols(&convolve_rows(grid, along_x), along_y))
}

fn adjoint_line(src: &[f64], dst: &mut [f64], kernel: &[f64]) {
    let n = src.len() as isize;
    let r = kernel.len() as isize / 2;
    dst.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        let yi = src[i as usize];
        for (k, &hk) in kernel.iter().enumerate() {
            let j = (i + k as isize - r).clamp(0, n - 1);
            dst[j as usize] += hk * yi;
        }
    }
}

/// Transpose of [`convolve_separable`] viewed as a linear map on vectorized grids.
pub fn convolve_separable_adjoint(grid: &Grid, kernel: &[f64]) -> Result<Grid> {
    check_kernel(kernel)?;
    let (w, h) = grid.dims();
    let mut tmp = Grid::new(w, h);
    let mut col = vec![0.0; h];
    let mut res = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = grid.get(x, y);
        }
        adjoint_line(&col, &mut res, kernel);
        for y in 0..h {
            tmp.set(x, y, res[y]);
        }
    }
    let mut out = Grid::new(w, h);
    for y in 0..h {
        let src = &tmp.data()[y * w..(y + 1) * w];
        adjoint_line(src, &mut out.data_mut()[y * w..(y + 1) * w], kernel);
    }
    Ok(out)
}

/// Dense 2-D correlation with an odd-sized kernel grid, edge replicated.
pub fn convolve_2d(grid: &Grid, kernel: &Grid) -> Result<Grid> {
    let (kw, kh) = kernel.dims();
    if kw % 2 == 0 || kh % 2 == 0 || kw == 0 || kh == 0 {
        return Err(invalid("2-D kernel dimensions must be odd"));
    }
    let (w, h) = grid.dims();
    if grid.is_empty() {
        return Ok(grid.clone());
    }
    let (rx, ry) = (kw / 2, kh / 2);
    let pw = w + 2 * rx;
    let padded: Vec<f64> = (0..h + 2 * ry)
        .flat_map(|j| (0..pw).map(move |i| (i as isize - rx as isize, j as isize - ry as isize)))
        .map(|(x, y)| grid.get_clamped(x, y))
        .collect();
    let mut out = Grid::new(w, h);
    for j in 0..kh {
        for i in 0..kw {
            let k = kernel.get(i, j);
            if k == 0.0 {
                continue;
            }
            for y in 0..h {
                let src = &padded[(y + j) * pw + i..(y + j) * pw + i + w];
                let dst = &mut out.data_mut()[y * w..(y + 1) * w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += k * s;
                }
            }
        }
    }
    Ok(out)
}

/// Normalized sampled Gaussian with radius `ceil(3 sigma)` (minimum 1).
/// A non-positive sigma yields the identity kernel.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Sampled first derivative of a Gaussian, scaled so a unit ramp maps to 1.
/// A non-positive sigma yields the central difference `[-1/2, 0, 1/2]`.
pub fn gaussian_derivative_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![-0.5, 0.0, 0.5];
    }
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| i as f64 * (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let moment: f64 = k
        .iter()
        .enumerate()
        .map(|(j, v)| (j as isize - radius) as f64 * v)
        .sum();
    k.iter_mut().for_each(|v| *v /= moment);
    k
}

pub fn gaussian_blur(grid: &Grid, sigma: f64) -> Grid {
    convolve_separable(grid, &gaussian_kernel(sigma)).expect("gaussian kernel is odd")
}

/// Bilinear upsampling of a decimated grid: output pixel `(x, y)` samples the
/// source at `(x / factor, y / factor)`, matching even-index decimation.
pub fn upsample_to(grid: &Grid, factor: f64, width: usize, height: usize) -> Grid {
    Grid::from_fn(width, height, |x, y| {
        grid.sample_bilinear(x as f64 / factor, y as f64 / factor)
    })
}
