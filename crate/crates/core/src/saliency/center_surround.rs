use crate::error::{invalid, Result};
use crate::imaging::{build_pyramid, upsample_to, Grid};

/// Across-scale contrast `sum |L_c - up(L_{c+d})|` over all center levels `c`
/// and offsets `d`, accumulated at full resolution and peak-normalized.
pub fn center_surround(feature: &Grid, centers: &[usize], deltas: &[usize]) -> Result<Grid> {
    if centers.is_empty() || deltas.is_empty() || deltas.contains(&0) {
        return Err(invalid(
            "center levels and positive surround offsets are required",
        ));
    }
    let deepest = centers.iter().max().unwrap() + deltas.iter().max().unwrap();
    let (w, h) = feature.dims();
    if (1usize << deepest) > w.min(h) {
        return Err(invalid(format!(
            "image {w}x{h} is too small for pyramid level {deepest} (needs at least {} px per side)",
            1usize << deepest
        )));
    }
    let pyr = build_pyramid(feature, deepest + 1)?;
    let mut acc = Grid::new(w, h);
    for &c in centers {
        let center = pyr.level(c);
        for &d in deltas {
            let surround = upsample_to(
                pyr.level(c + d),
                (1usize << d) as f64,
                center.width(),
                center.height(),
            );
            let diff = center.zip_map(&surround, |a, b| (a - b).abs())?;
            let full = upsample_to(&diff, (1usize << c) as f64, w, h);
            for (a, v) in acc.data_mut().iter_mut().zip(full.data()) {
                *a += v;
            }
        }
    }
    if acc.max() <= 1e-12 {
        return Ok(Grid::new(w, h));
    }
    Ok(acc.peak_normalized())
}

/// Values of the local maxima of `map` that reach `threshold`.
///
/// A pixel is a local maximum when it is `>=` its 8 neighbours and strictly
/// greater than the neighbours that precede it in raster order, so a plateau
/// contributes a single maximum.
pub fn local_maxima(map: &Grid, threshold: f64) -> Vec<(usize, usize, f64)> {
    let (w, h) = map.dims();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = map.get(x, y);
            if v < threshold {
                continue;
            }
            let mut is_max = true;
            'nb: for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let n = map.get(nx as usize, ny as usize);
                    let earlier = dy < 0 || (dy == 0 && dx < 0);
                    if n > v || (earlier && n == v) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                out.push((x, y, v));
            }
        }
    }
    out
}

/// Scale factor `(1 - m)^2` for a map already rescaled to `[0, 1]`, where `m`
/// is the mean of the local maxima other than one occurrence of the global
/// maximum (0 when there are none).
pub fn normalization_multiplier(rescaled: &Grid, threshold: f64) -> f64 {
    let maxima = local_maxima(rescaled, threshold);
    if maxima.len() < 2 {
        return 1.0;
    }
    let top = maxima
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .2.total_cmp(&b.1 .2).then(b.0.cmp(&a.0)))
        .unwrap()
        .0;
    let (sum, n) = maxima
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != top)
        .fold((0.0, 0usize), |(s, n), (_, m)| (s + m.2, n + 1));
    let mean = sum / n as f64;
    (1.0 - mean).powi(2)
}

/// Rescale to `[0, 1]` and promote maps with few strong peaks over maps with
/// many comparable ones.
pub fn normalize_conspicuity(map: &Grid, threshold: f64) -> Grid {
    normalize_conspicuity_at(map, threshold, 0)
}

/// As [`normalize_conspicuity`], with local maxima scanned on the map
/// reduced to pyramid level `scan_level` (capped by the map size).
pub fn normalize_conspicuity_at(map: &Grid, threshold: f64, scan_level: usize) -> Grid {
    let rescaled = map.peak_normalized();
    let (w, h) = rescaled.dims();
    let mut level = scan_level;
    while level > 0 && (1usize << level) > w.min(h) {
        level -= 1;
    }
    let k = if level == 0 || rescaled.max() == 0.0 {
        normalization_multiplier(&rescaled, threshold)
    } else {
        let pyr = build_pyramid(&rescaled, level + 1).expect("level fits");
        normalization_multiplier(&pyr.level(level).peak_normalized(), threshold)
    };
    rescaled.map(|v| v * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_for_known_peaks() {
        let mut g = Grid::new(9, 9);
        g.set(1, 1, 1.0);
        g.set(7, 1, 0.5);
        g.set(1, 7, 0.5);
        g.set(7, 7, 0.02);
        // 0.02 is below threshold; remaining non-global maxima average 0.5
        assert!((normalization_multiplier(&g, 0.05) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_peak_is_untouched() {
        let mut g = Grid::new(8, 8);
        g.set(3, 4, 2.0);
        let n = normalize_conspicuity(&g, 0.05);
        assert_eq!(n.get(3, 4), 1.0);
    }

    #[test]
    fn two_equal_peaks_suppressed_to_zero() {
        let mut g = Grid::new(8, 8);
        g.set(1, 1, 1.0);
        g.set(6, 6, 1.0);
        assert_eq!(normalize_conspicuity(&g, 0.05).max(), 0.0);
    }

    #[test]
    fn plateau_counts_once() {
        let mut g = Grid::new(6, 6);
        for (x, y) in [(2, 2), (3, 2), (2, 3), (3, 3)] {
            g.set(x, y, 0.8);
        }
        let m = local_maxima(&g, 0.05);
        assert_eq!(m, vec![(2, 2, 0.8)]);
    }

    #[test]
    fn coarse_scan_matches_scan_of_reduced_map() {
        let g = Grid::from_fn(64, 64, |x, y| {
            if (x / 16 + y / 16) % 2 == 0 && x % 16 > 4 && y % 16 > 4 {
                1.0
            } else {
                0.0
            }
        });
        let n = normalize_conspicuity_at(&g, 0.05, 2);
        let reduced = build_pyramid(&g, 3).unwrap().level(2).peak_normalized();
        let k = normalization_multiplier(&reduced, 0.05);
        assert!(n
            .data()
            .iter()
            .zip(g.data())
            .all(|(a, b)| (a - b * k).abs() < 1e-15));
        assert!(k < 0.1);
    }

    #[test]
    fn zero_map_stays_zero() {
        assert_eq!(normalize_conspicuity(&Grid::new(5, 5), 0.05).max(), 0.0);
    }

    #[test]
    fn too_small_for_pyramid() {
        assert!(center_surround(&Grid::new(100, 300), &[2, 3, 4], &[3, 4]).is_err());
        assert!(center_surround(&Grid::new(256, 256), &[2, 3, 4], &[3, 4]).is_ok());
    }

    #[test]
    fn constant_feature_has_no_contrast() {
        let cs = center_surround(&Grid::filled(256, 256, 0.3), &[2, 3, 4], &[3, 4]).unwrap();
        assert!(cs.max() < 1e-12);
    }
}
