use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Row-major 2-D spectrum.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Complex<f64>>,
}

fn transform(data: &mut [Complex<f64>], width: usize, height: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row, col) = if inverse {
        (
            planner.plan_fft_inverse(width),
            planner.plan_fft_inverse(height),
        )
    } else {
        (
            planner.plan_fft_forward(width),
            planner.plan_fft_forward(height),
        )
    };
    for r in data.chunks_exact_mut(width) {
        row.process(r);
    }
    let mut column = vec![Complex::new(0.0, 0.0); height];
    for x in 0..width {
        for y in 0..height {
            column[y] = data[y * width + x];
        }
        col.process(&mut column);
        for y in 0..height {
            data[y * width + x] = column[y];
        }
    }
}

pub(crate) fn forward(values: &[f64], width: usize, height: usize) -> Spectrum {
    let mut data: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform(&mut data, width, height, false);
    Spectrum {
        width,
        height,
        data,
    }
}

/// Real part of the inverse transform, scaled by `1 / (width * height)`.
pub(crate) fn inverse_real(mut spec: Spectrum) -> Vec<f64> {
    transform(&mut spec.data, spec.width, spec.height, true);
    let n = (spec.width * spec.height) as f64;
    spec.data.iter().map(|c| c.re / n).collect()
}

/// Angular frequency of DFT index `k` out of `n`, in `[-pi, pi)`.
#[inline]
pub(crate) fn omega(k: usize, n: usize) -> f64 {
    let k = k as isize;
    let n_i = n as isize;
    let wrapped = if k >= (n_i + 1) / 2 { k - n_i } else { k };
    2.0 * std::f64::consts::PI * wrapped as f64 / n as f64
}
