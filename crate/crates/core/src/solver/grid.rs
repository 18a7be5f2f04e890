use crate::quadrature::{GL4_W, GL4_X};

use super::{Result, SolverError};

/// Widest stencil used anywhere (one-sided core closure).
pub const STENCIL_WIDTH: usize = 6;

/// Finite-difference weights for derivatives `0..=order` at `z` from the
/// points `x` (Fornberg's recursion). Returns `c[m][j]`.
pub fn fornberg(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Per-node finite-difference stencils of fixed maximal width.
#[derive(Debug, Clone)]
pub struct Stencils {
    start: Vec<usize>,
    weights: Vec<[f64; STENCIL_WIDTH]>,
}

impl Stencils {
    /// Derivative `derivative` in `y` from stencils in the vacuum coordinate
    /// `t = √((R - y)/L)`. Smooth functions of `y` are even in `t`, so nodes
    /// past the vacuum are mirrored ghosts folded back onto real nodes.
    /// Only the core end needs one-sided (six point) closures.
    fn build(t: &[f64], len: f64, derivative: usize) -> Self {
        let n = t.len() - 1;
        let mut start = Vec::with_capacity(n + 1);
        let mut weights = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let (idx, pts): (Vec<usize>, Vec<f64>) = if k < 2 {
                (0..6).map(|j| (j, t[j])).unzip()
            } else {
                let half = if k == n && derivative == 2 { 3 } else { 2 };
                (k - half..=k + half)
                    .map(|j| if j <= n { (j, t[j]) } else { (2 * n - j, -t[2 * n - j]) })
                    .unzip()
            };
            let c = fornberg(t[k], &pts, if k == n { 2 * derivative } else { 2 });
            let row: Vec<f64> = if k < n {
                let tk = t[k];
                match derivative {
                    1 => c[1].iter().map(|w| -w / (2.0 * len * tk)).collect(),
                    _ => c[2]
                        .iter()
                        .zip(&c[1])
                        .map(|(w2, w1)| (w2 - w1 / tk) / (4.0 * len * len * tk * tk))
                        .collect(),
                }
            } else if derivative == 1 {
                c[2].iter().map(|w| -w / (2.0 * len)).collect()
            } else {
                c[4].iter().map(|w| w / (12.0 * len * len)).collect()
            };
            let s = *idx.iter().min().unwrap();
            let mut w = [0.0; STENCIL_WIDTH];
            for (j, v) in idx.iter().zip(row) {
                w[j - s] += v;
            }
            start.push(s);
            weights.push(w);
        }
        Self { start, weights }
    }

    #[inline]
    pub fn at(&self, k: usize, f: &[f64]) -> f64 {
        let s = self.start[k];
        let w = &self.weights[k];
        let mut acc = 0.0;
        for m in 0..STENCIL_WIDTH {
            if w[m] != 0.0 {
                acc += w[m] * f[s + m];
            }
        }
        acc
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.start.len()).map(|k| self.at(k, f)).collect()
    }

    /// `(column, weight)` pairs of row `k`.
    pub fn row(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.start[k];
        self.weights[k]
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(move |(m, w)| (s + m, *w))
    }
}

/// Boundary-graded mesh on `[r₀, R]`.
///
/// Nodes follow `y_k = r₀ + (R - r₀)(1 - (1 - k/N)^p)`, so cells shrink
/// toward the vacuum end. Quadrature weights integrate the local cubic
/// interpolant cell by cell.
#[derive(Debug, Clone)]
pub struct Grid {
    nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    grading_power: f64,
    d1: Stencils,
    d2: Stencils,
}

impl Grid {
    pub fn new(r0: f64, r_out: f64, n_cells: usize, grading_power: f64) -> Result<Self> {
        if !(grading_power.is_finite() && grading_power >= 1.0) {
            return Err(SolverError::InvalidGrading(grading_power));
        }
        if n_cells < 8 {
            return Err(SolverError::TooFewCells(n_cells));
        }
        let len = r_out - r0;
        let n = n_cells as f64;
        let mut nodes: Vec<f64> = (0..=n_cells)
            .map(|k| r0 + len * (1.0 - (1.0 - k as f64 / n).powf(grading_power)))
            .collect();
        nodes[0] = r0;
        nodes[n_cells] = r_out;
        let quad_weights = cubic_cell_weights(&nodes);
        let t: Vec<f64> = (0..=n_cells)
            .map(|k| (1.0 - k as f64 / n).powf(0.5 * grading_power))
            .collect();
        let d1 = Stencils::build(&t, len, 1);
        let d2 = Stencils::build(&t, len, 2);
        Ok(Self {
            nodes,
            quad_weights,
            grading_power,
            d1,
            d2,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }
    pub fn grading_power(&self) -> f64 {
        self.grading_power
    }
    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn d1(&self) -> &Stencils {
        &self.d1
    }
    pub fn d2(&self) -> &Stencils {
        &self.d2
    }

    /// `∫ f dy` from nodal values.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.quad_weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Smallest spacing adjacent to node `k`.
    pub fn local_spacing(&self, k: usize) -> f64 {
        let n = self.n_cells();
        let left = if k > 0 { self.nodes[k] - self.nodes[k - 1] } else { f64::INFINITY };
        let right = if k < n { self.nodes[k + 1] - self.nodes[k] } else { f64::INFINITY };
        left.min(right)
    }
}

/// Weights that integrate the piecewise cubic interpolant through `nodes`.
pub fn cubic_cell_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len() - 1;
    let mut w = vec![0.0; n + 1];
    for k in 0..n {
        let j0 = k.saturating_sub(1).min(n - 3);
        let pts = &nodes[j0..j0 + 4];
        let (a, b) = (nodes[k], nodes[k + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, gw) in GL4_X.iter().zip(GL4_W) {
            let z = mid + half * x;
            for i in 0..4 {
                let mut l = 1.0;
                for j in 0..4 {
                    if j != i {
                        l *= (z - pts[j]) / (pts[i] - pts[j]);
                    }
                }
                w[j0 + i] += half * gw * l;
            }
        }
    }
    w
}
