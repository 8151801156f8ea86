//! Radial grids: nodes, quadrature weights for `∫ · r dr`, radial differencing
//! and monotone-safe cubic interpolation.
//!
//! Every grid is uniform in a grid coordinate `x`, which is `r` itself for
//! [`Spacing::Uniform`] and `ln r` for [`Spacing::LogUniform`].

use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Uniform,
    LogUniform,
}

/// Endpoint weights of the order-8 Gregory rule (trapezoid plus corrections),
/// as exact rationals over 3628800 = 10!.
const GREGORY: [f64; 8] = [
    1070017.0 / 3628800.0,
    5537111.0 / 3628800.0,
    103613.0 / 403200.0,
    261115.0 / 145152.0,
    298951.0 / 725760.0,
    515677.0 / 403200.0,
    3349879.0 / 3628800.0,
    3662753.0 / 3628800.0,
];

pub const MIN_NODES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    spacing: Spacing,
    x0: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(spacing: Spacing, r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let (x0, x1) = match spacing {
            Spacing::Uniform => (r_min, r_max),
            Spacing::LogUniform => (r_min.ln(), r_max.ln()),
        };
        let h = (x1 - x0) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| match spacing {
                Spacing::Uniform => x0 + i as f64 * h,
                Spacing::LogUniform => (x0 + i as f64 * h).exp(),
            })
            .collect();
        // pin the ends so r_min/r_max are reproduced exactly
        nodes[0] = r_min;
        nodes[n - 1] = r_max;
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument("grid spacing underflows".into()));
            }
        }
        let mut grid = RadialGrid { spacing, x0, h, nodes, weights: Vec::new() };
        grid.weights = grid.build_weights();
        Ok(grid)
    }

    pub fn log_uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        Self::new(Spacing::LogUniform, r_min, r_max, n)
    }

    pub fn uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        Self::new(Spacing::Uniform, r_min, r_max, n)
    }

    /// Log grid whose step in `ln r` is at most `h_max`.
    pub fn log_with_step(r_min: f64, r_max: f64, h_max: f64) -> Result<Self> {
        if !(h_max > 0.0) {
            return Err(Error::InvalidArgument("log step must be positive".into()));
        }
        let n = ((r_max / r_min).ln() / h_max).ceil() as usize + 1;
        Self::log_uniform(r_min, r_max, n.max(MIN_NODES))
    }

    fn build_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut c = vec![1.0; n];
        for (i, g) in GREGORY.iter().enumerate() {
            c[i] = *g;
            c[n - 1 - i] = *g;
        }
        if n < 2 * GREGORY.len() {
            // overlapping corrections: fall back to plain trapezoid
            c.iter_mut().for_each(|v| *v = 1.0);
            c[0] = 0.5;
            c[n - 1] = 0.5;
        }
        (0..n).map(|i| self.h * c[i] * self.nodes[i] * self.jac(i)).collect()
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }
    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
    /// Weights for `∫ F(r) r dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Step in the grid coordinate.
    pub fn step(&self) -> f64 {
        self.h
    }

    /// dr/dx at node `i`.
    pub fn jac(&self, i: usize) -> f64 {
        match self.spacing {
            Spacing::Uniform => 1.0,
            Spacing::LogUniform => self.nodes[i],
        }
    }

    /// Local radial spacing Δr at node `i`.
    pub fn dr(&self, i: usize) -> f64 {
        self.h * self.jac(i)
    }

    pub fn coord(&self, r: f64) -> f64 {
        match self.spacing {
            Spacing::Uniform => r,
            Spacing::LogUniform => r.ln(),
        }
    }

    pub fn radius(&self, x: f64) -> f64 {
        match self.spacing {
            Spacing::Uniform => x,
            Spacing::LogUniform => x.exp(),
        }
    }

    /// Panel containing `r`: index `i` with `r_i <= r <= r_{i+1}` and the
    /// fractional position in grid coordinates. `None` outside `[r_min, r_max]`.
    pub fn locate(&self, r: f64) -> Option<(usize, f64)> {
        if !(r >= self.r_min() && r <= self.r_max()) {
            return None;
        }
        let n = self.len();
        let t = (self.coord(r) - self.x0) / self.h;
        let i = (t.floor().max(0.0) as usize).min(n - 2);
        // guard the pinned endpoints against rounding in the coordinate map
        let i = if r < self.nodes[i] && i > 0 {
            i - 1
        } else if r > self.nodes[i + 1] && i + 2 < n {
            i + 1
        } else {
            i
        };
        let frac = ((self.coord(r) - self.coord(self.nodes[i])) / self.h).clamp(0.0, 1.0);
        Some((i, frac))
    }

    /// `∫ F r dr` from node samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Grid with `2n - 1` nodes on the same interval; the old nodes are every
    /// other new node.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.spacing, self.r_min(), self.r_max(), 2 * self.len() - 1)
    }

    /// d/dr of node samples, fourth order in the grid coordinate.
    pub fn derivative<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let mut out = Vec::with_capacity(f.len());
        self.derivative_into(f, &mut out);
        out
    }

    pub fn derivative_into<T>(&self, f: &[T], out: &mut Vec<T>)
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = f.len();
        assert_eq!(n, self.len());
        out.clear();
        let c = 1.0 / (12.0 * self.h);
        for i in 0..n {
            let dx = if i >= 2 && i + 2 < n {
                (f[i + 1] - f[i - 1]) * 8.0 - (f[i + 2] - f[i - 2])
            } else if i == 0 {
                f[1] * 48.0 - f[0] * 25.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0
            } else if i == 1 {
                f[2] * 18.0 - f[0] * 3.0 - f[1] * 10.0 - f[3] * 6.0 + f[4]
            } else if i == n - 2 {
                (f[n - 3] * 18.0 - f[n - 1] * 3.0 - f[n - 2] * 10.0 - f[n - 4] * 6.0 + f[n - 5])
                    * -1.0
            } else {
                (f[n - 2] * 48.0 - f[n - 1] * 25.0 - f[n - 3] * 36.0 + f[n - 4] * 16.0
                    - f[n - 5] * 3.0)
                    * -1.0
            };
            out.push(dx * (c / self.jac(i)));
        }
    }
}

/// Cubic Hermite interpolant of a real profile in the grid coordinate, with
/// fourth-order slopes limited (Hyman) wherever the data are locally monotone.
#[derive(Clone, Debug)]
pub struct Interpolant {
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Interpolant {
    pub fn new(grid: &RadialGrid, values: &[f64]) -> Self {
        let n = values.len();
        let h = grid.step();
        let mut slopes = Vec::with_capacity(n);
        for i in 0..n {
            let d = if i >= 2 && i + 2 < n {
                (8.0 * (values[i + 1] - values[i - 1]) - (values[i + 2] - values[i - 2])) / (12.0 * h)
            } else if i == 0 {
                (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3]
                    - 3.0 * values[4])
                    / (12.0 * h)
            } else if i == 1 {
                (-3.0 * values[0] - 10.0 * values[1] + 18.0 * values[2] - 6.0 * values[3]
                    + values[4])
                    / (12.0 * h)
            } else if i == n - 2 {
                (3.0 * values[n - 1] + 10.0 * values[n - 2] - 18.0 * values[n - 3]
                    + 6.0 * values[n - 4]
                    - values[n - 5])
                    / (12.0 * h)
            } else {
                (25.0 * values[n - 1] - 48.0 * values[n - 2] + 36.0 * values[n - 3]
                    - 16.0 * values[n - 4]
                    + 3.0 * values[n - 5])
                    / (12.0 * h)
            };
            slopes.push(d);
        }
        for i in 1..n - 1 {
            let sl = (values[i] - values[i - 1]) / h;
            let sr = (values[i + 1] - values[i]) / h;
            // monotone over the whole five-point stencil, so smooth extrema keep
            // their high-order slopes
            let diffs = (i.saturating_sub(2)..(i + 2).min(n - 1)).map(|j| values[j + 1] - values[j]);
            let (mut up, mut down) = (true, true);
            for d in diffs {
                up &= d >= 0.0;
                down &= d <= 0.0;
            }
            if up || down {
                let bound = 3.0 * sl.abs().min(sr.abs());
                let dir = if up { 1.0 } else { -1.0 };
                if slopes[i] * dir <= 0.0 || bound == 0.0 {
                    slopes[i] = 0.0;
                } else if slopes[i].abs() > bound {
                    slopes[i] = bound * dir;
                }
            }
        }
        Interpolant { values: values.to_vec(), slopes }
    }

    /// Value inside panel `i` at fractional position `t`.
    pub fn eval_panel(&self, grid: &RadialGrid, i: usize, t: f64) -> f64 {
        let h = grid.step();
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }

    pub fn eval(&self, grid: &RadialGrid, r: f64) -> Option<f64> {
        grid.locate(r).map(|(i, t)| self.eval_panel(grid, i, t))
    }
}

/// Complex profile interpolated part by part.
#[derive(Clone, Debug)]
pub struct ComplexInterpolant {
    re: Interpolant,
    im: Interpolant,
}

impl ComplexInterpolant {
    pub fn new(grid: &RadialGrid, values: &[Complex64]) -> Self {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        ComplexInterpolant { re: Interpolant::new(grid, &re), im: Interpolant::new(grid, &im) }
    }

    pub fn eval_panel(&self, grid: &RadialGrid, i: usize, t: f64) -> Complex64 {
        Complex64::new(self.re.eval_panel(grid, i, t), self.im.eval_panel(grid, i, t))
    }
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let mut pts: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}
