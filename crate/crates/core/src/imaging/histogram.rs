use super::Grid;
use crate::error::{invalid, Result};

const BINS: usize = 256;

#[inline]
fn bin_of(v: f64) -> usize {
    ((v.clamp(0.0, 1.0) * BINS as f64) as usize).min(BINS - 1)
}

/// Monotone remapping of `src` so that its 256-bin histogram follows `reference`.
///
/// Every source bin is sent to the reference quantile at the bin's mid-rank,
/// so a constant source lands on the reference median and `src == reference`
/// is reproduced up to one quantization step.
pub fn match_histogram(src: &Grid, reference: &Grid) -> Result<Grid> {
    if src.is_empty() || reference.is_empty() {
        return Err(invalid("histogram matching needs non-empty grids"));
    }
    let mut counts = [0usize; BINS];
    for &v in src.data() {
        counts[bin_of(v)] += 1;
    }
    let mut sorted: Vec<f64> = reference.data().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    sorted.sort_by(f64::total_cmp);

    let n_src = src.len() as f64;
    let n_ref = sorted.len();
    let mut lut = [0.0; BINS];
    let mut below = 0usize;
    for (b, &c) in counts.iter().enumerate() {
        let mid = (below as f64 + (below + c) as f64) / 2.0 / n_src;
        let idx = ((mid * n_ref as f64) as usize).min(n_ref - 1);
        lut[b] = sorted[idx];
        below += c;
    }
    Ok(src.map(|v| lut[bin_of(v)]))
}
