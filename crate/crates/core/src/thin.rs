//! Morphological thinning of binary masks.
//!
//! Boundary matching wants single-pixel-wide curves; thick bands would let
//! one true contour soak up several predicted pixels as hits. [`thin`]
//! erodes a mask down to its skeleton while preserving connectivity, so
//! lines that are already one pixel wide pass through unchanged.

use crate::error::{Error, Result};

/// Zhang-Suen thinning. The mask is row-major `height * width`; `true`
/// marks foreground. Returns the skeleton, a subset of the input with the
/// same 8-connected components.
pub fn thin(mask: &[bool], height: usize, width: usize) -> Result<Vec<bool>> {
    if mask.len() != height * width {
        return Err(Error::DimensionMismatch(format!(
            "mask holds {} values, expected {}x{}",
            mask.len(),
            height,
            width
        )));
    }
    let mut out = mask.to_vec();
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            doomed.clear();
            for r in 0..height as isize {
                for c in 0..width as isize {
                    if deletable(&out, height, width, r, c, pass) {
                        doomed.push(r as usize * width + c as usize);
                    }
                }
            }
            // Re-check against the live buffer before each deletion. The
            // textbook batch update can wipe a 2x2 square in one sweep; the
            // recheck makes every removal a simple-point deletion, so
            // connectivity survives.
            for &i in &doomed {
                let (r, c) = ((i / width) as isize, (i % width) as isize);
                if deletable(&out, height, width, r, c, pass) {
                    out[i] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(out);
        }
    }
}

fn deletable(buf: &[bool], height: usize, width: usize, r: isize, c: isize, pass: usize) -> bool {
    let at = |r: isize, c: isize| -> bool {
        r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width
            && buf[r as usize * width + c as usize]
    };
    if !at(r, c) {
        return false;
    }
    // Neighbors clockwise from north: p[0] = N, p[1] = NE, ...
    let p = [
        at(r - 1, c),
        at(r - 1, c + 1),
        at(r, c + 1),
        at(r + 1, c + 1),
        at(r + 1, c),
        at(r + 1, c - 1),
        at(r, c - 1),
        at(r - 1, c - 1),
    ];
    let count = p.iter().filter(|&&b| b).count();
    if !(2..=6).contains(&count) {
        return false;
    }
    let transitions = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if transitions != 1 {
        return false;
    }
    // p[0]=N, p[2]=E, p[4]=S, p[6]=W.
    if pass == 0 {
        (!p[0] || !p[2] || !p[4]) && (!p[2] || !p[4] || !p[6])
    } else {
        (!p[0] || !p[2] || !p[6]) && (!p[0] || !p[4] || !p[6])
    }
}
