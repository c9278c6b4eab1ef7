//! Small geometric helpers shared across modules: polyline simplification,
//! orientation quantization, a bucketed nearest-point index, and union-find.

use std::f64::consts::PI;

/// Perpendicular distance from `p` to the line through `a` and `b`; falls
/// back to point distance when the endpoints coincide.
fn line_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dy, dx) = (b.0 - a.0, b.1 - a.1);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        let (py, px) = (p.0 - a.0, p.1 - a.1);
        return (px * px + py * py).sqrt();
    }
    ((p.0 - a.0) * dx - (p.1 - a.1) * dy).abs() / len
}

fn simplify_range(pts: &[(f64, f64)], lo: usize, hi: usize, epsilon: f64, keep: &mut Vec<usize>) {
    let mut stack = vec![(lo, hi)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let mut worst = 0.0;
        let mut split = lo;
        for i in lo + 1..hi {
            let d = line_distance(pts[i], pts[lo], pts[hi]);
            if d > worst {
                worst = d;
                split = i;
            }
        }
        if worst > epsilon {
            keep.push(split);
            stack.push((lo, split));
            stack.push((split, hi));
        }
    }
}

/// Ramer-style polyline simplification. Returns the sorted indices of kept
/// points; the first and last point are always kept.
pub fn simplify_polyline(pts: &[(f64, f64)], epsilon: f64) -> Vec<usize> {
    if pts.len() <= 2 {
        return (0..pts.len()).collect();
    }
    let mut keep = vec![0, pts.len() - 1];
    simplify_range(pts, 0, pts.len() - 1, epsilon, &mut keep);
    keep.sort_unstable();
    keep
}

/// Maps an angle in radians to one of `k` tangent bins over [0, pi). Bin `b`
/// covers [b*pi/k - pi/(2k), b*pi/k + pi/(2k)), wrapping at both ends.
pub fn quantize_orientation(theta: f64, k: u32) -> u32 {
    let mut t = theta % PI;
    if t < 0.0 {
        t += PI;
    }
    (((t * k as f64 / PI) + 0.5).floor() as u32) % k
}

/// Center angle of a tangent bin.
pub fn bin_angle(bin: u32, k: u32) -> f64 {
    bin as f64 * PI / k as f64
}

/// Orientation of the chord from `a` to `b`, folded into [0, pi).
pub fn chord_angle(a: (f64, f64), b: (f64, f64)) -> f64 {
    let mut t = (b.0 - a.0).atan2(b.1 - a.1);
    if t < 0.0 {
        t += PI;
    }
    if t >= PI {
        t -= PI;
    }
    t
}

/// Uniform-bucket index over a fixed point set for nearest-neighbor queries
/// within a radius. Ties resolve to the lowest point index, so callers get
/// deterministic answers by inserting points in a deterministic order.
pub struct PointIndex {
    cell: f64,
    rows: usize,
    cols: usize,
    buckets: Vec<Vec<u32>>,
    points: Vec<(f64, f64)>,
}

impl PointIndex {
    pub fn new(points: Vec<(f64, f64)>, cell: f64) -> Self {
        assert!(cell > 0.0, "bucket size must be positive");
        let mut max_r = 0.0f64;
        let mut max_c = 0.0f64;
        for &(r, c) in &points {
            max_r = max_r.max(r);
            max_c = max_c.max(c);
        }
        let rows = (max_r / cell) as usize + 1;
        let cols = (max_c / cell) as usize + 1;
        let mut buckets = vec![Vec::new(); rows * cols];
        for (i, &(r, c)) in points.iter().enumerate() {
            let br = ((r / cell) as usize).min(rows - 1);
            let bc = ((c / cell) as usize).min(cols - 1);
            buckets[br * cols + bc].push(i as u32);
        }
        PointIndex { cell, rows, cols, buckets, points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest stored point within `radius` of `query`, as (index, distance).
    pub fn nearest_within(&self, query: (f64, f64), radius: f64) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let reach = (radius / self.cell).ceil() as isize;
        let br = (query.0 / self.cell) as isize;
        let bc = (query.1 / self.cell) as isize;
        let mut best: Option<(usize, f64)> = None;
        for r in (br - reach).max(0)..=(br + reach).min(self.rows as isize - 1) {
            for c in (bc - reach).max(0)..=(bc + reach).min(self.cols as isize - 1) {
                for &i in &self.buckets[r as usize * self.cols + c as usize] {
                    let p = self.points[i as usize];
                    let d = ((p.0 - query.0).powi(2) + (p.1 - query.1).powi(2)).sqrt();
                    if d <= radius {
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d < bd || (d == bd && (i as usize) < bi),
                        };
                        if better {
                            best = Some((i as usize, d));
                        }
                    }
                }
            }
        }
        best
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Root lookup without path compression, for shared-reference callers.
    pub fn find_ro(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    /// Unites the sets of `a` and `b`; returns the surviving root.
    pub fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        big
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplify_keeps_endpoints_and_corner() {
        let pts = vec![(0.0, 0.0), (0.0, 1.0), (0.0, 2.0), (1.0, 2.0), (2.0, 2.0)];
        let kept = simplify_polyline(&pts, 0.5);
        assert_eq!(kept, vec![0, 2, 4]);
    }

    #[test]
    fn simplify_collapses_straight_line() {
        let pts: Vec<_> = (0..10).map(|i| (0.0, i as f64)).collect();
        assert_eq!(simplify_polyline(&pts, 0.0), vec![0, 9]);
    }

    #[test]
    fn quantize_covers_wraparound() {
        let k = 8;
        assert_eq!(quantize_orientation(0.0, k), 0);
        assert_eq!(quantize_orientation(PI / 2.0, k), 4);
        // Just below pi wraps back into bin 0.
        assert_eq!(quantize_orientation(PI - 0.01, k), 0);
        // Left bin edges are inclusive.
        assert_eq!(quantize_orientation(PI / 8.0 - PI / 16.0, k), 1);
        for i in 0..1000 {
            let theta = i as f64 * PI / 1000.0;
            assert!(quantize_orientation(theta, k) < k);
        }
    }

    #[test]
    fn nearest_within_finds_and_respects_radius() {
        let idx = PointIndex::new(vec![(0.0, 0.0), (3.0, 4.0), (0.0, 1.0)], 2.0);
        let (i, d) = idx.nearest_within((0.0, 0.6), 2.0).unwrap();
        assert_eq!(i, 2);
        assert!((d - 0.4).abs() < 1e-12);
        assert!(idx.nearest_within((10.0, 10.0), 2.0).is_none());
    }

    #[test]
    fn union_find_groups() {
        let mut uf = UnionFind::new(4);
        uf.union(0, 1);
        uf.union(2, 3);
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(1), uf.find(2));
    }
}
