//! Exact squared Euclidean distance transform (Felzenszwalb & Huttenlocher),
//! tracking the nearest mask pixel for every location.

use super::RoiMask;

const FAR: f64 = 1e20;

#[derive(Debug, Clone)]
pub struct DistanceMap {
    pub width: usize,
    pub height: usize,
    /// Squared distance to the nearest mask pixel (`>= 1e20` when the mask is empty).
    pub squared: Vec<f64>,
    /// Row-major index of the nearest mask pixel.
    pub nearest: Vec<usize>,
}

pub fn distance_transform(mask: &RoiMask) -> DistanceMap {
    let (w, h) = mask.dims();
    let mut col_dist = vec![FAR; w * h];
    let mut col_arg = vec![0usize; w * h];

    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut arg = vec![0usize; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for x in 0..w {
        for y in 0..h {
            f[y] = if mask.contains(x, y) { 0.0 } else { FAR };
        }
        edt_1d(&f[..h], &mut d[..h], &mut arg[..h], &mut v, &mut z);
        for y in 0..h {
            col_dist[y * w + x] = d[y];
            col_arg[y * w + x] = arg[y];
        }
    }

    let mut squared = vec![FAR; w * h];
    let mut nearest = vec![0usize; w * h];
    for y in 0..h {
        f[..w].copy_from_slice(&col_dist[y * w..(y + 1) * w]);
        edt_1d(&f[..w], &mut d[..w], &mut arg[..w], &mut v, &mut z);
        for x in 0..w {
            squared[y * w + x] = d[x];
            let sx = arg[x];
            let sy = col_arg[y * w + sx];
            nearest[y * w + x] = sy * w + sx;
        }
    }
    DistanceMap {
        width: w,
        height: h,
        squared,
        nearest,
    }
}

fn edt_1d(f: &[f64], d: &mut [f64], arg: &mut [usize], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = intersect(f, q, v[k]);
        // z[0] is -inf, so the scan always stops at k = 0
        while s <= z[k] {
            k -= 1;
            s = intersect(f, q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
        arg[q] = p;
    }
}

fn intersect(f: &[f64], q: usize, p: usize) -> f64 {
    ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64)
}
