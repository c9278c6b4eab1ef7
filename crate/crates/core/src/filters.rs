//! Gaussian derivative kernels and separable filtering on raw planes.
//! Values here are unconstrained floats; callers normalize into [0,1] maps
//! once responses are assembled.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Samples a Gaussian (or its first or second derivative) truncated at 4
/// sigma, as a correlation kernel of odd length. Order 0 is normalized to
/// unit sum; order 1 responds with +1 to a unit ramp; order 2 is corrected
/// to zero sum so flat signals cancel exactly up to rounding.
pub fn gaussian_kernel<S: Scalar>(sigma: f64, order: usize) -> Result<Vec<S>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if order > 2 {
        return Err(Error::InvalidArgument(format!(
            "kernel order up to 2 supported, got {order}"
        )));
    }
    let radius = (4.0 * sigma).ceil() as i64;
    let s = S::of_f64(sigma);
    let s2 = s * s;
    let mut base: Vec<S> = (-radius..=radius)
        .map(|d| {
            let x = S::of_f64(d as f64);
            (-(x * x) / (S::of_f64(2.0) * s2)).exp()
        })
        .collect();
    let total = base.iter().fold(S::zero(), |a, &b| a + b);
    for v in &mut base {
        *v = *v / total;
    }
    let mut kernel: Vec<S> = base
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let x = S::of_f64((i as i64 - radius) as f64);
            match order {
                0 => g,
                1 => x / s2 * g,
                _ => (x * x - s2) / (s2 * s2) * g,
            }
        })
        .collect();
    if order == 2 {
        // Discrete sampling leaves a small nonzero mass; remove the mean and
        // fold the remaining rounding residue into the center tap.
        let n = S::of_usize(kernel.len());
        let mean = kernel.iter().fold(S::zero(), |a, &b| a + b) / n;
        for v in &mut kernel {
            *v = *v - mean;
        }
        let residue = kernel.iter().fold(S::zero(), |a, &b| a + b);
        kernel[radius as usize] = kernel[radius as usize] - residue;
    }
    Ok(kernel)
}

/// Correlates every row with `horiz`, then every column with `vert`,
/// replicating border samples. Kernels must have odd length.
pub fn separable_correlate<S: Scalar>(
    plane: &[S],
    height: usize,
    width: usize,
    horiz: &[S],
    vert: &[S],
) -> Vec<S> {
    debug_assert_eq!(plane.len(), height * width);
    debug_assert!(horiz.len() % 2 == 1 && vert.len() % 2 == 1);
    let hr = (horiz.len() / 2) as isize;
    let vr = (vert.len() / 2) as isize;
    let mut rows = vec![S::zero(); plane.len()];
    for r in 0..height {
        let line = &plane[r * width..(r + 1) * width];
        let out = &mut rows[r * width..(r + 1) * width];
        for c in 0..width {
            let mut acc = S::zero();
            for (k, &kv) in horiz.iter().enumerate() {
                let src = (c as isize + k as isize - hr).clamp(0, width as isize - 1);
                acc = acc + kv * line[src as usize];
            }
            out[c] = acc;
        }
    }
    let mut cols = vec![S::zero(); plane.len()];
    for c in 0..width {
        for r in 0..height {
            let mut acc = S::zero();
            for (k, &kv) in vert.iter().enumerate() {
                let src = (r as isize + k as isize - vr).clamp(0, height as isize - 1);
                acc = acc + kv * rows[src as usize * width + c];
            }
            cols[r * width + c] = acc;
        }
    }
    cols
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_sums_match_order() {
        for sigma in [0.8, 1.0, 2.0, 4.0] {
            let g: Vec<f64> = gaussian_kernel(sigma, 0).unwrap();
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(g.len(), 2 * (4.0f64 * sigma).ceil() as usize + 1);
            let g1: Vec<f64> = gaussian_kernel(sigma, 1).unwrap();
            assert!(g1.iter().sum::<f64>().abs() < 1e-15);
            let g2: Vec<f64> = gaussian_kernel(sigma, 2).unwrap();
            assert!(g2.iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(gaussian_kernel::<f64>(0.0, 0).is_err());
        assert!(gaussian_kernel::<f64>(-1.0, 1).is_err());
        assert!(gaussian_kernel::<f64>(1.0, 3).is_err());
    }

    #[test]
    fn smoothing_preserves_constants() {
        let g: Vec<f64> = gaussian_kernel(1.5, 0).unwrap();
        let plane = vec![0.4; 7 * 9];
        let out = separable_correlate(&plane, 7, 9, &g, &g);
        for v in out {
            assert!((v - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn first_derivative_of_ramp_is_one() {
        let g: Vec<f64> = gaussian_kernel(1.0, 0).unwrap();
        let g1: Vec<f64> = gaussian_kernel(1.0, 1).unwrap();
        let (h, w) = (3, 20);
        let plane: Vec<f64> = (0..h * w).map(|i| (i % w) as f64).collect();
        let out = separable_correlate(&plane, h, w, &g1, &g);
        // The discrete second moment of the sampled Gaussian is not exactly
        // sigma^2, so the slope estimate carries a small bias.
        let r = g1.len() / 2;
        for c in r..w - r {
            assert!((out[w + c] - 1.0).abs() < 1e-3, "col {c}: {}", out[w + c]);
        }
    }

    #[test]
    fn second_derivative_of_parabola_is_two() {
        let g: Vec<f64> = gaussian_kernel(1.0, 0).unwrap();
        let g2: Vec<f64> = gaussian_kernel(1.0, 2).unwrap();
        let (h, w) = (3, 24);
        let plane: Vec<f64> = (0..h * w).map(|i| ((i % w) as f64).powi(2)).collect();
        let out = separable_correlate(&plane, h, w, &g2, &g);
        let r = g2.len() / 2;
        for c in r..w - r {
            assert!((out[w + c] - 2.0).abs() < 1e-2, "col {c}: {}", out[w + c]);
        }
    }

    #[test]
    fn flat_signal_cancels_in_second_derivative() {
        let g: Vec<f64> = gaussian_kernel(2.0, 0).unwrap();
        let g2: Vec<f64> = gaussian_kernel(2.0, 2).unwrap();
        let plane = vec![0.77; 11 * 11];
        let out = separable_correlate(&plane, 11, 11, &g2, &g);
        for v in out {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn separable_pass_matches_full_correlation() {
        let horiz: Vec<f64> = gaussian_kernel(0.8, 1).unwrap();
        let vert: Vec<f64> = gaussian_kernel(0.8, 0).unwrap();
        let (h, w) = (6, 7);
        // Fixed quasi-random plane.
        let plane: Vec<f64> = (0..h * w).map(|i| ((i * 37 + 11) % 17) as f64 / 17.0).collect();
        let fast = separable_correlate(&plane, h, w, &horiz, &vert);
        let hr = (horiz.len() / 2) as isize;
        let vr = (vert.len() / 2) as isize;
        for r in 0..h as isize {
            for c in 0..w as isize {
                let mut acc = 0.0;
                for (kv, &vv) in vert.iter().enumerate() {
                    for (kh, &hv) in horiz.iter().enumerate() {
                        let sr = (r + kv as isize - vr).clamp(0, h as isize - 1);
                        let sc = (c + kh as isize - hr).clamp(0, w as isize - 1);
                        acc += vv * hv * plane[(sr * w as isize + sc) as usize];
                    }
                }
                let got = fast[(r * w as isize + c) as usize];
                assert!((acc - got).abs() < 1e-12, "({r},{c}): {acc} vs {got}");
            }
        }
    }
}
