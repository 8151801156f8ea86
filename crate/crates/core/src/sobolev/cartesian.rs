//! Fourier-multiplier norms on a Cartesian resampling, used as an oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PolarField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartesianResolution {
    /// Samples per side (even).
    pub n: usize,
    /// Box half-width in units of the outer support radius.
    pub box_factor: f64,
}

impl Default for CartesianResolution {
    fn default() -> Self {
        CartesianResolution { n: 512, box_factor: 5.0 }
    }
}

/// A field translated to `center`, for sums of separated pieces.
#[derive(Clone, Debug)]
pub struct Placed<'a> {
    pub field: &'a PolarField,
    pub center: (f64, f64),
}

/// Samples on `[-b, b)²` at spacing `2b/n`, row-major in `y`.
#[derive(Clone, Debug)]
pub struct CartesianSamples {
    pub n: usize,
    pub half_width: f64,
    pub center: (f64, f64),
    pub values: Vec<f64>,
}

impl CartesianSamples {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        let d = self.spacing();
        (
            self.center.0 - self.half_width + ix as f64 * d,
            self.center.1 - self.half_width + iy as f64 * d,
        )
    }
}

/// Outer radius of the support of `field` (relative threshold `1e-14`).
pub fn outer_support(field: &PolarField) -> f64 {
    match field.support_annulus(1e-14) {
        Some((_, hi)) => hi,
        None => field.grid().r_min(),
    }
}

pub fn sample(pieces: &[Placed], center: (f64, f64), half_width: f64, n: usize) -> Result<CartesianSamples> {
    let mut out = CartesianSamples { n, half_width, center, values: vec![0.0; n * n] };
    for piece in pieces {
        let r_max = piece.field.grid().r_max();
        let mut idx = Vec::new();
        let mut pts = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = out.point(ix, iy);
                let (dx, dy) = (x - piece.center.0, y - piece.center.1);
                let r = dx.hypot(dy);
                if r < r_max {
                    idx.push(iy * n + ix);
                    pts.push((r, dy.atan2(dx)));
                }
            }
        }
        let vals = piece.field.synthesize(&pts)?;
        for (i, v) in idx.into_iter().zip(vals) {
            out.values[i] += v;
        }
    }
    Ok(out)
}

/// `|f̂|²` on the DFT lattice, with `f̂ ≈ Δx²·DFT`.
pub fn power_spectrum(samples: &CartesianSamples) -> Vec<f64> {
    let n = samples.n;
    let mut data: Vec<Complex64> = samples.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::default(); n];
    for ix in 0..n {
        for iy in 0..n {
            col[iy] = data[iy * n + ix];
        }
        fft.process(&mut col);
        for iy in 0..n {
            data[iy * n + ix] = col[iy];
        }
    }
    let a = samples.spacing().powi(2);
    data.iter().map(|z| z.norm_sqr() * a * a).collect()
}

fn frequency(m: usize, n: usize, dx: f64) -> f64 {
    let mm = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    2.0 * PI * mm / (n as f64 * dx)
}

pub fn norm_squared_samples(samples: &CartesianSamples, s: f64, homogeneous: bool, sigma: f64) -> Result<f64> {
    if !(s > -1.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!("Sobolev order {s} outside (-1, 1]")));
    }
    let n = samples.n;
    let dx = samples.spacing();
    let power = power_spectrum(samples);
    let dxi = 2.0 * PI / (n as f64 * dx);
    let p0 = power[0];
    // |ξ|^{2s} is singular or kinked at the origin: subtract a Gaussian with
    // the same value at ξ = 0 and add its integral back in closed form.
    // Its width is matched to the curvature at the origin so the remainder
    // vanishes to fourth order.
    let subtract = homogeneous && s != 0.0;
    let ring = 0.25 * (power[1] + power[n - 1] + power[n] + power[(n - 1) * n]);
    let sigma = if p0 > 0.0 && ring > 0.0 && ring < p0 { ((p0 / ring).ln()).sqrt() / dxi } else { sigma };
    let mut sum = 0.0;
    for iy in 0..n {
        let ky = frequency(iy, n, dx);
        for ix in 0..n {
            let kx = frequency(ix, n, dx);
            let q = kx * kx + ky * ky;
            let mut p = power[iy * n + ix];
            if homogeneous {
                if q == 0.0 {
                    if s == 0.0 {
                        sum += p;
                    }
                    continue;
                }
                if subtract {
                    p -= p0 * (-sigma * sigma * q).exp();
                }
                sum += q.powf(s) * p;
            } else {
                sum += (1.0 + q).powf(s) * p;
            }
        }
    }
    let mut total = sum * dxi * dxi / (4.0 * PI * PI);
    if subtract {
        total += p0 * PI * libm::tgamma(s + 1.0) / sigma.powf(2.0 * s + 2.0) / (4.0 * PI * PI);
    }
    Ok(total)
}

pub fn norm_squared_placed(pieces: &[Placed], s: f64, homogeneous: bool, res: &CartesianResolution) -> Result<f64> {
    if pieces.is_empty() {
        return Ok(0.0);
    }
    // bounding disc of all pieces
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut r_piece = 0.0f64;
    for p in pieces {
        let r = outer_support(p.field);
        r_piece = r_piece.max(r);
        lo = (lo.0.min(p.center.0 - r), lo.1.min(p.center.1 - r));
        hi = (hi.0.max(p.center.0 + r), hi.1.max(p.center.1 + r));
    }
    let center = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
    let radius = 0.5 * (hi.0 - lo.0).max(hi.1 - lo.1);
    let b = res.box_factor * radius;
    let samples = sample(pieces, center, b, res.n)?;
    norm_squared_samples(&samples, s, homogeneous, radius.max(r_piece))
}

pub fn norm_squared(field: &PolarField, s: f64, homogeneous: bool, res: &CartesianResolution) -> Result<f64> {
    norm_squared_placed(&[Placed { field, center: (0.0, 0.0) }], s, homogeneous, res)
}
