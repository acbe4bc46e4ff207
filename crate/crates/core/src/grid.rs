//! Radial grids and the finite-difference / quadrature kernels that act on
//! node-sampled profiles.
//!
//! Nodes are the image of a uniform computational coordinate `xi` in [0, 1]
//! under
//!
//! ```text
//! r(xi) = r_min + scale * (exp(lambda * xi) - 1)^2
//! ```
//!
//! which is quadratic in `xi` at the inner boundary (square-root clustering:
//! `sqrt(r - r_min)` is linear in `xi`) and exponential toward the outer end
//! (logarithmic spacing). Every derivative taken on the grid is a uniform
//! stencil in `xi` followed by the chain rule with the analytic `dr/dxi`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {MIN_CELLS} cells, got {0}")]
    TooFewCells(usize),
    #[error("invalid grid extent: r_min={r_min}, r_max={r_max}, scale={scale}")]
    BadExtent { r_min: f64, r_max: f64, scale: f64 },
}

/// Square-root / logarithmic clustered radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    scale: f64,
    lambda: f64,
    nodes: Vec<f64>,
}

impl RadialGrid {
    /// `cells` uniform cells in `xi`, so `cells + 1` nodes.
    pub fn clustered(r_min: f64, r_max: f64, scale: f64, cells: usize) -> Result<Self, GridError> {
        if cells < MIN_CELLS {
            return Err(GridError::TooFewCells(cells));
        }
        if !(r_max > r_min) || !(scale > 0.0) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(GridError::BadExtent {
                r_min,
                r_max,
                scale,
            });
        }
        let lambda = (1.0 + ((r_max - r_min) / scale).sqrt()).ln();
        let mut grid = RadialGrid {
            r_min,
            r_max,
            scale,
            lambda,
            nodes: Vec::with_capacity(cells + 1),
        };
        for i in 0..=cells {
            let xi = i as f64 / cells as f64;
            grid.nodes.push(grid.r_of_xi(xi));
        }
        // pin the ends exactly
        grid.nodes[0] = r_min;
        grid.nodes[cells] = r_max;
        Ok(grid)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Uniform spacing of the computational coordinate.
    pub fn h(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn xi(&self, i: usize) -> f64 {
        i as f64 / self.cells() as f64
    }

    pub fn r_of_xi(&self, xi: f64) -> f64 {
        let e = (self.lambda * xi).exp_m1();
        self.r_min + self.scale * e * e
    }

    pub fn dr_dxi(&self, xi: f64) -> f64 {
        let em = (self.lambda * xi).exp_m1();
        2.0 * self.scale * self.lambda * (1.0 + em) * em
    }

    /// `dr/dxi` at every node.
    pub fn jacobian(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.dr_dxi(self.xi(i))).collect()
    }

    /// Grid with twice as many cells over the same extent; every node of
    /// `self` is a node of the refined grid (at even indices).
    pub fn refined(&self) -> Self {
        RadialGrid::clustered(self.r_min, self.r_max, self.scale, 2 * self.cells())
            .expect("refinement of a valid grid is valid")
    }

    /// First node index with `r >= r_lo`.
    pub fn first_index_at_or_above(&self, r_lo: f64) -> usize {
        self.nodes.partition_point(|&r| r < r_lo)
    }
}

/// Second-order derivative in `xi` (central inside, one-sided at the ends).
pub fn d_dxi_2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3);
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

/// Fourth-order derivative in `xi` (five-point stencils, skewed at the ends).
pub fn d_dxi_4(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5);
    let mut d = vec![0.0; n];
    let c = 12.0 * h;
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / c;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / c;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / c;
    }
    let m = n - 1;
    d[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / c;
    d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / c;
    d
}

/// Sixth-order derivative in `xi` (seven-point stencils, skewed near the ends).
pub fn d_dxi_6(f: &[f64], h: f64) -> Vec<f64> {
    const SKEW: [[f64; 7]; 3] = [
        [
            -49.0 / 20.0,
            6.0,
            -15.0 / 2.0,
            20.0 / 3.0,
            -15.0 / 4.0,
            6.0 / 5.0,
            -1.0 / 6.0,
        ],
        [
            -1.0 / 6.0,
            -77.0 / 60.0,
            5.0 / 2.0,
            -5.0 / 3.0,
            5.0 / 6.0,
            -1.0 / 4.0,
            1.0 / 30.0,
        ],
        [
            1.0 / 30.0,
            -2.0 / 5.0,
            -7.0 / 12.0,
            4.0 / 3.0,
            -1.0 / 2.0,
            2.0 / 15.0,
            -1.0 / 60.0,
        ],
    ];
    const CENTRAL: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -3.0 / 4.0,
        0.0,
        3.0 / 4.0,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    let n = f.len();
    assert!(n >= 7);
    let mut d = vec![0.0; n];
    let dot = |w: &[f64; 7], start: usize| {
        w.iter()
            .enumerate()
            .map(|(k, c)| c * f[start + k])
            .sum::<f64>()
            / h
    };
    for i in 0..3 {
        d[i] = dot(&SKEW[i], 0);
        // mirrored stencil at the outer end
        let mirrored: Vec<f64> = SKEW[i].iter().rev().map(|c| -c).collect();
        let m: [f64; 7] = mirrored.try_into().expect("seven weights");
        d[n - 1 - i] = dot(&m, n - 7);
    }
    for i in 3..n - 3 {
        d[i] = dot(&CENTRAL, i - 3);
    }
    d
}

/// Cumulative trapezoid integral of `g(xi)` sampled at uniform spacing `h`.
pub fn cumulative_trapezoid(g: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in g.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Composite Simpson integral; an odd trailing cell is closed with a
/// three-point end correction.
pub fn simpson(g: &[f64], h: f64) -> f64 {
    let n = g.len() - 1;
    assert!(n >= 2);
    let even = n - n % 2;
    let mut sum = 0.0;
    for k in (0..even).step_by(2) {
        sum += g[k] + 4.0 * g[k + 1] + g[k + 2];
    }
    let mut total = sum * h / 3.0;
    if n % 2 == 1 {
        total += h * (5.0 * g[n] + 8.0 * g[n - 1] - g[n - 2]) / 12.0;
    }
    total
}

/// Sup and RMS (L² over `xi`) of a profile restricted to `range`.
pub fn norms(values: &[f64], range: std::ops::Range<usize>) -> (f64, f64) {
    let slice = &values[range];
    if slice.is_empty() {
        return (0.0, 0.0);
    }
    let sup = slice.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l2 = (slice.iter().map(|v| v * v).sum::<f64>() / slice.len() as f64).sqrt();
    (sup, l2)
}
