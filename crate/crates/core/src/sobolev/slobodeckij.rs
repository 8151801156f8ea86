//! Real-space double integrals through the autocorrelation `C(z) = ∫f(x)f(x+z)dx`.
//!
//! Slobodeckij (`0 < s < 1`): `∫|z|^{-2-2s}(2C(0) − 2C(z))dz`, scaled by a constant
//! calibrated on the Gaussian. Riesz (`-1 < s < 0`): `c∫C(z)|z|^{2|s|-2}dz`.
//! The autocorrelation is summed directly, so cost is `O(n⁴)`: keep `n` small.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::square_power;
use super::cartesian::{outer_support, sample, CartesianSamples, Placed};
use crate::error::{Error, Result};
use crate::field::PolarField;
use crate::grid::gauss_legendre_unit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlobodeckijResolution {
    pub n: usize,
}

impl Default for SlobodeckijResolution {
    fn default() -> Self {
        SlobodeckijResolution { n: 48 }
    }
}

/// Autocorrelation on lattice shifts `(p, q)`, `|p|, |q| < n`.
struct Autocorrelation {
    n: usize,
    dx: f64,
    c: Vec<f64>,
}

impl Autocorrelation {
    fn new(s: &CartesianSamples) -> Self {
        let n = s.n;
        let m = 2 * n - 1;
        let mut c = vec![0.0; m * m];
        let a = s.spacing().powi(2);
        for q in 0..m {
            let dq = q as isize - (n as isize - 1);
            for p in 0..m {
                let dp = p as isize - (n as isize - 1);
                let mut acc = 0.0;
                let y0 = 0.max(-dq) as usize;
                let y1 = (n as isize).min(n as isize - dq) as usize;
                let x0 = 0.max(-dp) as usize;
                let x1 = (n as isize).min(n as isize - dp) as usize;
                for y in y0..y1 {
                    let row = &s.values[y * n..(y + 1) * n];
                    let shifted = &s.values[(y as isize + dq) as usize * n..][..n];
                    for x in x0..x1 {
                        acc += row[x] * shifted[(x as isize + dp) as usize];
                    }
                }
                c[q * m + p] = acc * a;
            }
        }
        Autocorrelation { n, dx: s.spacing(), c }
    }

    fn at(&self, p: isize, q: isize) -> f64 {
        let m = 2 * self.n - 1;
        let o = self.n as isize - 1;
        self.c[(q + o) as usize * m + (p + o) as usize]
    }

    fn shifts(&self) -> impl Iterator<Item = (isize, isize)> {
        let o = self.n as isize - 1;
        (-o..=o).flat_map(move |q| (-o..=o).map(move |p| (p, q)))
    }
}

/// `∫_{ℝ² \ [-a,a]²} |z|^e dz` for `e < -2`.
fn outside_square_power(a: f64, e: f64) -> f64 {
    let rule = gauss_legendre_unit(32);
    let quarter = PI / 4.0;
    8.0 * rule
        .iter()
        .map(|&(t, w)| (a / (t * quarter).cos()).powf(e + 2.0) / -(e + 2.0) * w * quarter)
        .sum::<f64>()
}

/// Raw Slobodeckij integral of the Gaussian `e^{-|x|²/2}`, by 1D quadrature
/// of `4π²∫ρ^{-1-2s}(1 − e^{-ρ²/4})dρ` in `u = ln ρ`.
fn gaussian_raw(s: f64) -> f64 {
    let rule = gauss_legendre_unit(16);
    let (lo, hi, panels) = (-40.0, 6.0, 460);
    let h = (hi - lo) / panels as f64;
    let mut acc = 0.0;
    for j in 0..panels {
        for &(t, w) in &rule {
            let u: f64 = lo + (j as f64 + t) * h;
            let rho2 = (2.0 * u).exp();
            acc += (-2.0 * s * u).exp() * -(-rho2 / 4.0f64).exp_m1() * w * h;
        }
    }
    // beyond `hi` the exponential has died and the integrand is e^{-2su};
    // below `lo` it is e^{(2-2s)u}/4
    acc += (-2.0 * s * hi).exp() / (2.0 * s);
    acc += ((2.0 - 2.0 * s) * lo).exp() / (4.0 * (2.0 - 2.0 * s));
    4.0 * PI * PI * acc
}

/// Constant turning the raw double integral into the Fourier-convention norm.
pub fn slobodeckij_constant(s: f64) -> f64 {
    PI * libm::tgamma(1.0 + s) / gaussian_raw(s)
}

fn lattice(pieces: &[Placed], n: usize) -> Result<CartesianSamples> {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pieces {
        let r = outer_support(p.field);
        lo = (lo.0.min(p.center.0 - r), lo.1.min(p.center.1 - r));
        hi = (hi.0.max(p.center.0 + r), hi.1.max(p.center.1 + r));
    }
    let center = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
    let b = 0.5 * (hi.0 - lo.0).max(hi.1 - lo.1) * 1.02;
    sample(pieces, center, b, n)
}

pub fn slobodeckij_samples(samples: &CartesianSamples, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("Slobodeckij form needs 0 < s < 1, got {s}")));
    }
    let ac = Autocorrelation::new(samples);
    let dx = ac.dx;
    let e2 = 2.0 * ac.at(0, 0);
    let d = |p, q| e2 - 2.0 * ac.at(p, q);
    // near the origin D(z) ≈ zᵀMz; over the 3×3 block only tr(M)/2·|z|² survives
    let tr_m = (d(1, 0) + d(-1, 0) + d(0, 1) + d(0, -1)) / (2.0 * dx * dx);
    let mut total = 0.5 * tr_m * square_power(1.5 * dx, -2.0 * s);
    for (p, q) in ac.shifts() {
        if p.abs() <= 1 && q.abs() <= 1 {
            continue;
        }
        let z = dx * ((p * p + q * q) as f64).sqrt();
        total += z.powf(-2.0 - 2.0 * s) * d(p, q) * dx * dx;
    }
    let half = (ac.n as f64 - 0.5) * dx;
    total += e2 * outside_square_power(half, -2.0 - 2.0 * s);
    Ok(slobodeckij_constant(s) * total)
}

pub fn riesz_samples(samples: &CartesianSamples, s: f64) -> Result<f64> {
    if !(s > -1.0 && s < 0.0) {
        return Err(Error::InvalidArgument(format!("Riesz form needs -1 < s < 0, got {s}")));
    }
    let delta = -s;
    let ac = Autocorrelation::new(samples);
    let dx = ac.dx;
    let e = 2.0 * delta - 2.0;
    let mut total = ac.at(0, 0) * square_power(0.5 * dx, e);
    for (p, q) in ac.shifts() {
        if p == 0 && q == 0 {
            continue;
        }
        let z = dx * ((p * p + q * q) as f64).sqrt();
        total += z.powf(e) * ac.at(p, q) * dx * dx;
    }
    let c = libm::tgamma(1.0 - delta) / (PI * 4f64.powf(delta) * libm::tgamma(delta));
    Ok(c * total)
}

pub fn norm_squared_placed(pieces: &[Placed], s: f64, res: &SlobodeckijResolution) -> Result<f64> {
    if pieces.is_empty() {
        return Ok(0.0);
    }
    let samples = lattice(pieces, res.n)?;
    if s < 0.0 {
        riesz_samples(&samples, s)
    } else {
        slobodeckij_samples(&samples, s)
    }
}

pub fn norm_squared(field: &PolarField, s: f64, res: &SlobodeckijResolution) -> Result<f64> {
    norm_squared_placed(&[Placed { field, center: (0.0, 0.0) }], s, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_matches_closed_form() {
        for s in [0.25, 0.5, 0.75] {
            let closed = s * 4f64.powf(s) * libm::tgamma(1.0 + s) / (2.0 * PI * libm::tgamma(1.0 - s));
            assert!((slobodeckij_constant(s) / closed - 1.0).abs() < 1e-10, "{s}");
        }
    }

    fn gaussian(n: usize, b: f64) -> CartesianSamples {
        let mut s = CartesianSamples { n, half_width: b, center: (0.0, 0.0), values: vec![0.0; n * n] };
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = s.point(ix, iy);
                s.values[iy * n + ix] = (-(x * x + y * y) / 2.0).exp();
            }
        }
        s
    }

    #[test]
    fn gaussian_slobodeckij() {
        let s = gaussian(40, 7.0);
        let got = slobodeckij_samples(&s, 0.5).unwrap();
        let want = PI * libm::tgamma(1.5);
        assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
    }

    #[test]
    fn gaussian_riesz() {
        let s = gaussian(40, 7.0);
        let got = riesz_samples(&s, -0.5).unwrap();
        let want = PI * libm::tgamma(0.5);
        assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
    }
}
