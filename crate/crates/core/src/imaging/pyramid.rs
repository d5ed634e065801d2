use super::{convolve_separable, Grid};
use crate::error::{invalid, Result};

pub const BINOMIAL_5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Dyadic Gaussian pyramid; level 0 is the input.
#[derive(Debug, Clone)]
pub struct GaussianPyramid {
    levels: Vec<Grid>,
}

impl GaussianPyramid {
    pub fn levels(&self) -> &[Grid] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &Grid {
        &self.levels[k]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

fn decimate(grid: &Grid) -> Grid {
    let w = grid.width().div_ceil(2);
    let h = grid.height().div_ceil(2);
    Grid::from_fn(w, h, |x, y| grid.get(2 * x, 2 * y))
}

/// Blur with the 5-tap binomial and keep even samples, `levels - 1` times.
pub fn build_pyramid(grid: &Grid, levels: usize) -> Result<GaussianPyramid> {
    if levels == 0 {
        return Err(invalid("pyramid needs at least one level"));
    }
    let min_dim = grid.width().min(grid.height());
    if levels > 64 || (1usize << (levels - 1)) > min_dim {
        return Err(invalid(format!(
            "{} pyramid levels need at least {} px, image is {}x{}",
            levels,
            1usize << (levels - 1).min(63),
            grid.width(),
            grid.height()
        )));
    }
    let mut out = Vec::with_capacity(levels);
    out.push(grid.clone());
    for _ in 1..levels {
        let prev = out.last().expect("non-empty");
        let blurred = convolve_separable(prev, &BINOMIAL_5)?;
        out.push(decimate(&blurred));
    }
    Ok(GaussianPyramid { levels: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stays_constant() {
        let g = Grid::filled(37, 20, 0.625);
        let p = build_pyramid(&g, 5).unwrap();
        for lvl in p.levels() {
            assert!(lvl.data().iter().all(|&v| v == 0.625));
        }
    }

    #[test]
    fn single_level_is_input() {
        let g = Grid::from_fn(6, 4, |x, y| (x + y) as f64 / 10.0);
        let p = build_pyramid(&g, 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.level(0), &g);
    }

    #[test]
    fn level_dimensions_halve_with_ceil() {
        let g = Grid::new(45, 17);
        let p = build_pyramid(&g, 5).unwrap();
        let dims: Vec<_> = p.levels().iter().map(|l| l.dims()).collect();
        assert_eq!(dims, vec![(45, 17), (23, 9), (12, 5), (6, 3), (3, 2)]);
    }

    #[test]
    fn too_many_levels_rejected() {
        assert!(build_pyramid(&Grid::new(16, 8), 5).is_err());
        assert!(build_pyramid(&Grid::new(16, 8), 4).is_ok());
        assert!(build_pyramid(&Grid::new(16, 8), 0).is_err());
    }

    #[test]
    fn checkerboard_level_one_matches_dense_oracle() {
        let g = Grid::from_fn(8, 8, |x, y| ((x + y) % 2) as f64);
        let p = build_pyramid(&g, 2).unwrap();
        // dense 5x5 binomial outer product with clamped indices, then subsample
        let b = [1.0, 4.0, 6.0, 4.0, 1.0];
        for y in 0..4 {
            for x in 0..4 {
                let (cx, cy) = (2 * x as isize, 2 * y as isize);
                let mut acc = 0.0;
                for j in 0..5 {
                    for i in 0..5 {
                        let sx = (cx + i - 2).clamp(0, 7) as usize;
                        let sy = (cy + j - 2).clamp(0, 7) as usize;
                        acc += b[i as usize] * b[j as usize] * g.get(sx, sy);
                    }
                }
                acc /= 256.0;
                assert!((p.level(1).get(x, y) - acc).abs() < 1e-12);
            }
        }
    }
}
