//! Filter-bank contour detector: rectified second-derivative-of-Gaussian
//! responses steered to eight tangent orientations, at several scales. This
//! supplies the oriented contour input the rest of the pipeline consumes;
//! externally computed maps can be dropped in through the same stack format.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::filters::{gaussian_kernel, separable_correlate};
use crate::grid::FloatMap;
use crate::owt::{OrientedStack, ORIENTATION_BINS};
use crate::scalar::Scalar;

/// Default filter scales, in pixels.
pub const DEFAULT_SIGMAS: [f64; 3] = [1.0, 2.0, 4.0];

/// Oriented responses at one scale: per-pixel maximum over channels plus the
/// full stack, both normalized to [0,1] jointly.
#[derive(Debug, Clone)]
pub struct ScaleResponses<S: Scalar = f64> {
    pub sigma: f64,
    pub strength: FloatMap<S>,
    pub stack: OrientedStack<S>,
}

/// Runs the steerable second-derivative bank at every scale. Channel `k` of
/// a stack responds to boundaries whose tangent is k*pi/8: the second
/// derivative is taken across the boundary, along the normal. Each scale is
/// normalized by its own global maximum; a flat image yields all zeros.
pub fn multiscale_oriented_contours<S: Scalar>(
    image: &FloatMap<S>,
    sigmas: &[f64],
) -> Result<Vec<ScaleResponses<S>>> {
    if image.channels() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "contour input must have one channel, got {}",
            image.channels()
        )));
    }
    if sigmas.is_empty() {
        return Err(Error::EmptyInput("need at least one filter scale"));
    }
    if sigmas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("scales must be ascending, got {sigmas:?}")));
    }
    let (h, w) = (image.height(), image.width());
    let plane = image.channel(0);
    let k = ORIENTATION_BINS as usize;
    let mut out = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let g: Vec<S> = gaussian_kernel(sigma, 0)?;
        let g1: Vec<S> = gaussian_kernel(sigma, 1)?;
        let g2: Vec<S> = gaussian_kernel(sigma, 2)?;
        let ixx = separable_correlate(plane, h, w, &g2, &g);
        let ixy = separable_correlate(plane, h, w, &g1, &g1);
        let iyy = separable_correlate(plane, h, w, &g, &g2);

        let mut channels = vec![S::zero(); k * h * w];
        let mut peak = S::zero();
        for bin in 0..k {
            // Steer the second derivative along the normal of this bin's
            // tangent.
            let phi = bin as f64 * PI / k as f64 + PI / 2.0;
            let (cc, ss, s2) = (
                S::of_f64(phi.cos() * phi.cos()),
                S::of_f64(phi.sin() * phi.sin()),
                S::of_f64((2.0 * phi).sin()),
            );
            let slot = &mut channels[bin * h * w..(bin + 1) * h * w];
            for i in 0..h * w {
                let v = (cc * ixx[i] + s2 * ixy[i] + ss * iyy[i]).abs();
                slot[i] = v;
                if v > peak {
                    peak = v;
                }
            }
        }
        // Below the rounding floor of the zero-sum kernels there is no
        // structure to normalize; treat the scale as flat.
        if peak <= S::epsilon() * S::of_f64(1024.0) {
            channels.iter_mut().for_each(|v| *v = S::zero());
        } else {
            channels.iter_mut().for_each(|v| *v = *v / peak);
        }
        let mut strength = vec![S::zero(); h * w];
        for bin in 0..k {
            let slot = &channels[bin * h * w..(bin + 1) * h * w];
            for (s, &v) in strength.iter_mut().zip(slot) {
                if v > *s {
                    *s = v;
                }
            }
        }
        out.push(ScaleResponses {
            sigma,
            strength: FloatMap::from_vec(h, w, 1, strength)?,
            stack: OrientedStack::new(FloatMap::from_vec(h, w, k, channels)?)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smoothed step edge whose boundary line passes through the image
    /// center with tangent `theta`.
    fn oriented_edge(h: usize, w: usize, theta: f64) -> FloatMap {
        let (cy, cx) = ((h / 2) as f64, (w / 2) as f64);
        let (nx, ny) = (-theta.sin(), theta.cos());
        let mut data = Vec::with_capacity(h * w);
        for r in 0..h {
            for c in 0..w {
                let d = (c as f64 - cx) * nx + (r as f64 - cy) * ny;
                data.push(1.0 / (1.0 + (-d / 0.75).exp()));
            }
        }
        FloatMap::from_vec(h, w, 1, data).unwrap()
    }

    #[test]
    fn flat_image_gives_zero_responses() {
        let image: FloatMap = FloatMap::from_vec(9, 9, 1, vec![0.6; 81]).unwrap();
        let scales = multiscale_oriented_contours(&image, &DEFAULT_SIGMAS).unwrap();
        assert_eq!(scales.len(), 3);
        for s in &scales {
            assert!(s.strength.values().iter().all(|&v| v == 0.0));
            assert!(s.stack.map().values().iter().all(|&v| v == 0.0));
        }
    }

    /// Channel holding the global peak response, with its value. The second
    /// derivative crosses zero on the edge line itself, so peaks sit on the
    /// flanks; the normalizing maximum must land in the matching channel.
    fn peak_channel(stack: &OrientedStack) -> (u32, f64) {
        let mut best = (0u32, -1.0);
        for b in 0..stack.orientations() {
            for r in 0..stack.height() {
                for c in 0..stack.width() {
                    let v = stack.response(b, r, c);
                    if v > best.1 {
                        best = (b, v);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn vertical_edge_peaks_in_vertical_channel() {
        let image = oriented_edge(21, 21, PI / 2.0);
        let scales = multiscale_oriented_contours(&image, &[2.0]).unwrap();
        let (channel, value) = peak_channel(&scales[0].stack);
        assert_eq!(channel, 4);
        assert_eq!(value, 1.0);
    }

    #[test]
    fn strength_is_channelwise_max() {
        let image = oriented_edge(17, 17, PI / 4.0);
        let scales = multiscale_oriented_contours(&image, &[1.0, 2.0]).unwrap();
        for s in &scales {
            for r in 0..17 {
                for c in 0..17 {
                    let max = (0..8)
                        .map(|b| s.stack.response(b, r, c))
                        .fold(0.0f64, f64::max);
                    assert_eq!(s.strength.get(0, r, c), max);
                }
            }
        }
    }

    #[test]
    fn rotating_by_one_bin_shifts_argmax() {
        for bin in 0..8u32 {
            let image = oriented_edge(33, 33, bin as f64 * PI / 8.0);
            let scales = multiscale_oriented_contours(&image, &[2.0]).unwrap();
            let (channel, _) = peak_channel(&scales[0].stack);
            assert_eq!(channel, bin, "edge tangent bin {bin}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let image: FloatMap = FloatMap::zeros(5, 5, 1).unwrap();
        assert!(multiscale_oriented_contours(&image, &[]).is_err());
        assert!(multiscale_oriented_contours(&image, &[2.0, 1.0]).is_err());
        let multi: FloatMap = FloatMap::zeros(5, 5, 2).unwrap();
        assert!(multiscale_oriented_contours(&multi, &[1.0]).is_err());
    }
}
