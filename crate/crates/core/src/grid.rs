//! Dense raster types: multichannel float maps, region label maps, and the
//! half-step boundary grid that interleaves pixels, edgels, and junctions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense H x W x C raster of values in [0, 1], stored channel-major with
/// row-major planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMap<S: Scalar = f64> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<S>,
}

impl<S: Scalar> FloatMap<S> {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::EmptyInput("float map dimensions must be nonzero"));
        }
        Ok(FloatMap { height, width, channels, data: vec![S::zero(); height * width * channels] })
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<S>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::EmptyInput("float map dimensions must be nonzero"));
        }
        if data.len() != height * width * channels {
            return Err(Error::DimensionMismatch(format!(
                "float map payload holds {} values, dimensions imply {}",
                data.len(),
                height * width * channels
            )));
        }
        for &v in &data {
            if !(v >= S::zero() && v <= S::one()) {
                return Err(Error::InvalidGrid(format!("value {v} outside [0, 1]")));
            }
        }
        Ok(FloatMap { height, width, channels, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn get(&self, channel: usize, row: usize, col: usize) -> S {
        debug_assert!(channel < self.channels && row < self.height && col < self.width);
        self.data[(channel * self.height + row) * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, channel: usize, row: usize, col: usize, value: S) {
        debug_assert!(channel < self.channels && row < self.height && col < self.width);
        self.data[(channel * self.height + row) * self.width + col] = value;
    }

    /// Row-major plane of one channel.
    pub fn channel(&self, channel: usize) -> &[S] {
        let plane = self.height * self.width;
        &self.data[channel * plane..(channel + 1) * plane]
    }

    pub fn values(&self) -> &[S] {
        &self.data
    }
}

/// Region partition of an image: one u32 label per pixel, ids contiguous from
/// zero, every region 4-connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    labels: Vec<u32>,
    region_count: u32,
}

impl LabelMap {
    /// Validates contiguity and 4-connectivity of every region.
    pub fn new(height: usize, width: usize, labels: Vec<u32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyInput("label map dimensions must be nonzero"));
        }
        if labels.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "label payload holds {} entries, dimensions imply {}",
                labels.len(),
                height * width
            )));
        }
        let max = *labels.iter().max().expect("nonempty");
        if max as usize >= labels.len() {
            return Err(Error::InvalidLabelMap(format!(
                "label {max} cannot be contiguous in a map of {} pixels",
                labels.len()
            )));
        }
        let region_count = max + 1;
        let mut seen = vec![false; region_count as usize];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidLabelMap(format!("label {missing} is absent")));
        }

        // One flood-fill pass; a label met in two separate components means a
        // disconnected region.
        let mut component_of = vec![false; region_count as usize];
        let mut visited = vec![false; labels.len()];
        let mut stack = Vec::new();
        for start in 0..labels.len() {
            if visited[start] {
                continue;
            }
            let label = labels[start];
            if component_of[label as usize] {
                return Err(Error::InvalidLabelMap(format!("region {label} is not 4-connected")));
            }
            component_of[label as usize] = true;
            visited[start] = true;
            stack.push(start);
            while let Some(p) = stack.pop() {
                let (r, c) = (p / width, p % width);
                let mut push = |q: usize| {
                    if !visited[q] && labels[q] == label {
                        visited[q] = true;
                        stack.push(q);
                    }
                };
                if r > 0 {
                    push(p - width);
                }
                if r + 1 < height {
                    push(p + width);
                }
                if c > 0 {
                    push(p - 1);
                }
                if c + 1 < width {
                    push(p + 1);
                }
            }
        }
        Ok(LabelMap { height, width, labels, region_count })
    }

    /// Constructor for internal call sites whose outputs are valid by
    /// construction (flood fills, merge replays).
    pub(crate) fn from_parts_unchecked(
        height: usize,
        width: usize,
        labels: Vec<u32>,
        region_count: u32,
    ) -> Self {
        debug_assert_eq!(labels.len(), height * width);
        LabelMap { height, width, labels, region_count }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn region_count(&self) -> u32 {
        self.region_count
    }

    #[inline]
    pub fn label(&self, row: usize, col: usize) -> u32 {
        debug_assert!(row < self.height && col < self.width);
        self.labels[row * self.width + col]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Remaps ids into row-major first-appearance order. The partition is
    /// unchanged; only the naming of regions moves.
    pub fn canonicalize(&self) -> LabelMap {
        let mut remap = vec![u32::MAX; self.region_count as usize];
        let mut next = 0u32;
        let mut labels = Vec::with_capacity(self.labels.len());
        for &l in &self.labels {
            if remap[l as usize] == u32::MAX {
                remap[l as usize] = next;
                next += 1;
            }
            labels.push(remap[l as usize]);
        }
        LabelMap { height: self.height, width: self.width, labels, region_count: self.region_count }
    }

    /// True when both maps induce the same partition, ignoring which id names
    /// which region.
    pub fn same_partition(&self, other: &LabelMap) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.region_count == other.region_count
            && self.canonicalize().labels == other.canonicalize().labels
    }
}

/// One boundary-grid position holding a boundary piece between two
/// 4-adjacent pixels. Exactly one of `row`, `col` is odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edgel {
    pub row: u32,
    pub col: u32,
}

impl Edgel {
    pub fn new(row: u32, col: u32) -> Self {
        debug_assert!((row % 2 == 1) ^ (col % 2 == 1), "edgel needs exactly one odd coordinate");
        Edgel { row, col }
    }

    /// The two pixels this edgel separates, in (row, col) pixel coordinates,
    /// upper/left first.
    #[inline]
    pub fn pixels(&self) -> ((usize, usize), (usize, usize)) {
        let (r, c) = (self.row as usize, self.col as usize);
        if r % 2 == 1 {
            (((r - 1) / 2, c / 2), ((r + 1) / 2, c / 2))
        } else {
            ((r / 2, (c - 1) / 2), (r / 2, (c + 1) / 2))
        }
    }

    /// Midpoint of the boundary piece in pixel coordinates.
    #[inline]
    pub fn midpoint(&self) -> (f64, f64) {
        (self.row as f64 / 2.0, self.col as f64 / 2.0)
    }

    /// Junction endpoints (odd, odd) of this piece that fall inside a grid of
    /// the given size.
    pub fn junctions(&self, grid_height: usize, grid_width: usize) -> [Option<(u32, u32)>; 2] {
        let (r, c) = (self.row, self.col);
        let candidates = if r % 2 == 1 { [(r, c.wrapping_sub(1)), (r, c + 1)] } else { [(r.wrapping_sub(1), c), (r + 1, c)] };
        candidates.map(|(jr, jc)| {
            if jr < grid_height as u32 && jc < grid_width as u32 && jr % 2 == 1 && jc % 2 == 1 {
                Some((jr, jc))
            } else {
                None
            }
        })
    }
}

/// Grid position classification on the (2H-1) x (2W-1) boundary grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridCell {
    Pixel,
    Edgel,
    Junction,
}

pub fn classify(row: usize, col: usize) -> GridCell {
    match (row % 2, col % 2) {
        (0, 0) => GridCell::Pixel,
        (1, 1) => GridCell::Junction,
        _ => GridCell::Edgel,
    }
}

/// Boundary grid over an H x W image: (2H-1) x (2W-1) values where even/even
/// positions are pixel slots (always 0), positions with exactly one odd
/// coordinate are edgels, and odd/odd positions are junctions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid<S: Scalar = f64> {
    image_height: usize,
    image_width: usize,
    data: Vec<S>,
}

impl<S: Scalar> BoundaryGrid<S> {
    pub fn zeros(image_height: usize, image_width: usize) -> Result<Self> {
        if image_height == 0 || image_width == 0 {
            return Err(Error::EmptyInput("boundary grid dimensions must be nonzero"));
        }
        let (gh, gw) = (2 * image_height - 1, 2 * image_width - 1);
        Ok(BoundaryGrid { image_height, image_width, data: vec![S::zero(); gh * gw] })
    }

    /// Wraps a raw (2H-1) x (2W-1) payload, checking value range and that
    /// pixel slots are zero.
    pub fn from_vec(image_height: usize, image_width: usize, data: Vec<S>) -> Result<Self> {
        if image_height == 0 || image_width == 0 {
            return Err(Error::EmptyInput("boundary grid dimensions must be nonzero"));
        }
        let (gh, gw) = (2 * image_height - 1, 2 * image_width - 1);
        if data.len() != gh * gw {
            return Err(Error::DimensionMismatch(format!(
                "boundary grid payload holds {} values, dimensions imply {}",
                data.len(),
                gh * gw
            )));
        }
        for (i, &v) in data.iter().enumerate() {
            if !(v >= S::zero() && v <= S::one()) {
                return Err(Error::InvalidGrid(format!("value {v} outside [0, 1]")));
            }
            if classify(i / gw, i % gw) == GridCell::Pixel && v != S::zero() {
                return Err(Error::InvalidGrid(format!(
                    "pixel slot ({}, {}) carries nonzero value {v}",
                    i / gw,
                    i % gw
                )));
            }
        }
        Ok(BoundaryGrid { image_height, image_width, data })
    }

    pub fn image_height(&self) -> usize {
        self.image_height
    }

    pub fn image_width(&self) -> usize {
        self.image_width
    }

    pub fn grid_height(&self) -> usize {
        2 * self.image_height - 1
    }

    pub fn grid_width(&self) -> usize {
        2 * self.image_width - 1
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> S {
        debug_assert!(row < self.grid_height() && col < self.grid_width());
        self.data[row * self.grid_width() + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: S) {
        debug_assert!(row < self.grid_height() && col < self.grid_width());
        let w = self.grid_width();
        self.data[row * w + col] = value;
    }

    pub fn values(&self) -> &[S] {
        &self.data
    }

    /// Iterates all edgel positions in row-major order.
    pub fn edgel_positions(&self) -> impl Iterator<Item = Edgel> + '_ {
        let (gh, gw) = (self.grid_height(), self.grid_width());
        (0..gh).flat_map(move |r| {
            let start = if r % 2 == 0 { 1 } else { 0 };
            (start..gw).step_by(2).map(move |c| Edgel::new(r as u32, c as u32))
        })
    }

    /// Rewrites every junction to the maximum of its (up to four) incident
    /// edgel values.
    pub fn refresh_junctions(&mut self) {
        let (gh, gw) = (self.grid_height(), self.grid_width());
        for r in (1..gh).step_by(2) {
            for c in (1..gw).step_by(2) {
                let mut m = S::zero();
                for (nr, nc) in [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)] {
                    if nr < gh && nc < gw {
                        let v = self.data[nr * gw + nc];
                        if v > m {
                            m = v;
                        }
                    }
                }
                self.data[r * gw + c] = m;
            }
        }
    }
}
