//! Cell-centered 1-D densities on a uniform grid, plus the histogram and
//! distance helpers the verification suite is built on.

use crate::error::{Error, Result};
use crate::models::GaussianMixtureModel;

/// Density values at cell centers x_i = lo + (i + 1/2) dx.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub lo: f64,
    pub hi: f64,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(hi > lo) || values.is_empty() {
            return Err(Error::invalid("grid needs hi > lo and at least one cell"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("grid density values must be finite and >= 0"));
        }
        Ok(Self { lo, hi, values })
    }

    pub fn from_fn(lo: f64, hi: f64, n_cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dx = (hi - lo) / n_cells as f64;
        let values = (0..n_cells)
            .map(|i| f(lo + (i as f64 + 0.5) * dx))
            .collect();
        Self::new(lo, hi, values)
    }

    /// Render a 1-D mixture on the grid, normalized to unit grid mass.
    pub fn from_model(m: &GaussianMixtureModel, lo: f64, hi: f64, n_cells: usize) -> Result<Self> {
        if m.dim() != 1 {
            return Err(Error::invalid("grid densities are one-dimensional"));
        }
        let mut g = Self::from_fn(lo, hi, n_cells, |x| m.density(&[x]))?;
        g.normalize();
        Ok(g)
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / self.values.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.values.len())
            .map(|i| self.lo + (i as f64 + 0.5) * dx)
            .collect()
    }

    /// Cell edges, n_cells + 1 points.
    pub fn edges(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.values.len())
            .map(|i| self.lo + i as f64 * dx)
            .collect()
    }

    /// Midpoint-rule mass.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx()
    }

    pub fn normalize(&mut self) {
        let m = self.mass();
        if m > 0.0 {
            for v in &mut self.values {
                *v /= m;
            }
        }
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.values.len() == other.values.len()
    }

    pub fn mean(&self) -> f64 {
        let dx = self.dx();
        self.centers()
            .iter()
            .zip(&self.values)
            .map(|(x, v)| x * v * dx)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let dx = self.dx();
        self.centers()
            .iter()
            .zip(&self.values)
            .map(|(x, v)| (x - m) * (x - m) * v * dx)
            .sum()
    }

    /// L1 distance, integral of |p - q|.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::invalid("densities live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.dx())
    }

    /// Total variation distance, half the L1 distance.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        Ok(0.5 * self.l1_distance(other)?)
    }

    /// CDF values at the cell edges (piecewise-linear CDF, exact for the
    /// piecewise-constant density), normalized to end at 1.
    pub fn cdf_at_edges(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut cdf = Vec::with_capacity(self.values.len() + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for &v in &self.values {
            acc += v * dx;
            cdf.push(acc);
        }
        let total = *cdf.last().unwrap();
        if total > 0.0 {
            for c in &mut cdf {
                *c /= total;
            }
        }
        cdf
    }

    /// Inverse CDF at level u in [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let cdf = self.cdf_at_edges();
        let edges = self.edges();
        let u = u.clamp(0.0, 1.0);
        // First edge index with cdf >= u.
        let j = cdf.partition_point(|&c| c < u);
        if j == 0 {
            return edges[0];
        }
        if j >= cdf.len() {
            return *edges.last().unwrap();
        }
        let (c0, c1) = (cdf[j - 1], cdf[j]);
        if c1 > c0 {
            edges[j - 1] + (u - c0) / (c1 - c0) * (edges[j] - edges[j - 1])
        } else {
            edges[j - 1]
        }
    }
}

/// Normalized histogram masses of weighted samples on `bins` equal cells over
/// [lo, hi]; out-of-range samples are clamped into the end bins so the result
/// is a distribution over a partition of the whole line.
pub fn weighted_histogram(
    xs: &[f64],
    weights: &[f64],
    lo: f64,
    hi: f64,
    bins: usize,
) -> Vec<f64> {
    assert_eq!(xs.len(), weights.len());
    let mut h = vec![0.0; bins];
    let w = (hi - lo) / bins as f64;
    let mut total = 0.0;
    for (&x, &wk) in xs.iter().zip(weights) {
        let b = (((x - lo) / w).floor() as isize).clamp(0, bins as isize - 1) as usize;
        h[b] += wk;
        total += wk;
    }
    if total > 0.0 {
        for v in &mut h {
            *v /= total;
        }
    }
    h
}

/// Bin masses of a grid density on the same partition as
/// [`weighted_histogram`], with exact overlap accounting for the
/// piecewise-constant density and end-bin clamping.
pub fn grid_histogram(g: &GridDensity, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let wbin = (hi - lo) / bins as f64;
    let dx = g.dx();
    let edges = g.edges();
    for (i, &v) in g.values.iter().enumerate() {
        let (a, b) = (edges[i], edges[i + 1]);
        let cell_mass = v * dx;
        if cell_mass == 0.0 {
            continue;
        }
        // Split the cell across the bins it straddles (clamped at the ends).
        let b_first = (((a - lo) / wbin).floor() as isize).clamp(0, bins as isize - 1) as usize;
        let b_last = (((b - lo) / wbin).floor() as isize).clamp(0, bins as isize - 1) as usize;
        if b_first == b_last {
            h[b_first] += cell_mass;
        } else {
            for bi in b_first..=b_last {
                let blo = if bi == 0 { f64::NEG_INFINITY } else { lo + bi as f64 * wbin };
                let bhi = if bi == bins - 1 {
                    f64::INFINITY
                } else {
                    lo + (bi + 1) as f64 * wbin
                };
                let overlap = (b.min(bhi) - a.max(blo)).max(0.0);
                h[bi] += v * overlap;
            }
        }
    }
    let total: f64 = h.iter().sum();
    if total > 0.0 {
        for v in &mut h {
            *v /= total;
        }
    }
    h
}

/// Total variation between two mass vectors on the same partition.
pub fn tv_masses(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// 1-Wasserstein distance between two weighted empirical measures on the
/// line, via the CDF-difference integral over the merged support.
pub fn w1_weighted(xs: &[f64], wx: &[f64], ys: &[f64], wy: &[f64]) -> f64 {
    assert_eq!(xs.len(), wx.len());
    assert_eq!(ys.len(), wy.len());
    let norm = |ws: &[f64]| {
        let t: f64 = ws.iter().sum();
        assert!(t > 0.0);
        t
    };
    let (tx, ty) = (norm(wx), norm(wy));
    let mut a: Vec<(f64, f64)> = xs.iter().zip(wx).map(|(&x, &w)| (x, w / tx)).collect();
    let mut b: Vec<(f64, f64)> = ys.iter().zip(wy).map(|(&x, &w)| (x, w / ty)).collect();
    a.sort_by(|u, v| u.0.total_cmp(&v.0));
    b.sort_by(|u, v| u.0.total_cmp(&v.0));
    let mut i = 0;
    let mut j = 0;
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut last: Option<f64> = None;
    let mut dist = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&(xa, _)), Some(&(xb, _))) => xa.min(xb),
            (Some(&(xa, _)), None) => xa,
            (None, Some(&(xb, _))) => xb,
            (None, None) => break,
        };
        if let Some(prev) = last {
            dist += (fa - fb).abs() * (x - prev);
        }
        while i < a.len() && a[i].0 <= x {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 <= x {
            fb += b[j].1;
            j += 1;
        }
        last = Some(x);
    }
    dist
}

/// W1 between two equally weighted samples.
pub fn w1_empirical(xs: &[f64], ys: &[f64]) -> f64 {
    let wx = vec![1.0; xs.len()];
    let wy = vec![1.0; ys.len()];
    w1_weighted(xs, &wx, ys, &wy)
}
