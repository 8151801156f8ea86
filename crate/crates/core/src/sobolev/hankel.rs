//! `Ḣ^s` / `H^s` norms through per-mode Hankel transforms.
//!
//! `‖f‖² = 2π∫w(ρ)|H₀|²ρdρ + 4πΣ_{k≥1}∫w(ρ)|H_k[ω_k]|²ρdρ` with
//! `H_k[g](ρ) = ∫g(r)J_k(ρr) r dr`, `w = ρ^{2s}` or `(1+ρ²)^s`.
//!
//! The support is split into clusters of consecutive active nodes. Each
//! cluster's transform is a weighted node sum, trusted up to `ρΔr ≈ π` with
//! `Δr` its coarsest spacing. Cross terms between clusters run up to the
//! smaller of the two limits. This keeps multi-scale fields on log grids
//! (rings decades apart) exact without paying for the finest scale everywhere.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::bessel_j_all;
use crate::error::{Error, Result};
use crate::field::PolarField;
use crate::grid::gauss_legendre_unit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HankelResolution {
    /// Upper limit of the ρ integral as a fraction of `π/Δr`.
    pub rho_factor: f64,
    pub gl_points: usize,
    pub geometric_panels: usize,
    /// Modes whose energy fraction is below this are skipped.
    pub mode_cutoff: f64,
    /// Relative amplitude below which nodes are treated as outside the support.
    pub support_threshold: f64,
}

impl Default for HankelResolution {
    fn default() -> Self {
        HankelResolution {
            rho_factor: 0.9,
            gl_points: 8,
            geometric_panels: 48,
            mode_cutoff: 1e-15,
            support_threshold: 1e-14,
        }
    }
}

/// Consecutive active nodes.
struct Cluster {
    /// `profiles[m][j]` for active mode `m`, node `j`
    profiles: Vec<Vec<Complex64>>,
    r: Vec<f64>,
    w: Vec<f64>,
    rho_max: f64,
}

impl Cluster {
    fn r_hi(&self) -> f64 {
        *self.r.last().unwrap()
    }

    fn transform(&self, ks: &[usize], rho: f64, bessel: &mut Vec<f64>) -> Vec<Complex64> {
        let kmax = *ks.iter().max().unwrap();
        bessel.resize(kmax + 1, 0.0);
        let mut h = vec![Complex64::default(); ks.len()];
        for j in 0..self.r.len() {
            bessel_j_all(rho * self.r[j], bessel);
            for (m, &k) in ks.iter().enumerate() {
                h[m] += self.profiles[m][j] * (self.w[j] * bessel[k]);
            }
        }
        h
    }
}

struct Active {
    k: Vec<usize>,
    clusters: Vec<Cluster>,
}

fn active_set(field: &PolarField, res: &HankelResolution) -> Option<Active> {
    let energies = field.mode_energies();
    let total: f64 = energies.iter().map(|e| e.1).sum();
    if total == 0.0 {
        return None;
    }
    let mut k = Vec::new();
    let mut profiles = Vec::new();
    for (m, (kk, e)) in energies.iter().enumerate() {
        if *e > res.mode_cutoff * total {
            k.push(*kk);
            profiles.push(&field.coeffs()[m]);
        }
    }
    let scale = profiles.iter().flat_map(|p| p.iter()).fold(0.0f64, |a, z| a.max(z.norm()));
    let grid = field.grid();
    let active: Vec<bool> = (0..grid.len())
        .map(|i| profiles.iter().any(|p| p[i].norm() > res.support_threshold * scale))
        .collect();
    let mut clusters = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if !active[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < grid.len() && active[i] {
            i += 1;
        }
        let idx: Vec<usize> = (start..i).collect();
        let dr_max = idx.iter().map(|&j| grid.dr(j)).fold(0.0, f64::max);
        clusters.push(Cluster {
            profiles: profiles.iter().map(|p| idx.iter().map(|&j| p[j]).collect()).collect(),
            r: idx.iter().map(|&j| grid.nodes()[j]).collect(),
            w: idx.iter().map(|&j| grid.weights()[j]).collect(),
            rho_max: res.rho_factor * PI / dr_max,
        });
    }
    Some(Active { k, clusters })
}

fn mode_weight(k: usize) -> f64 {
    if k == 0 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

/// `(ρ, weight)` points on `[ρ_min, ρ_max]`: halving panels below `ρ₁`, then
/// uniform panels of width `Δρ`. Returns the points and `ρ_min`.
fn rho_points(rho1: f64, rho_max: f64, width: f64, res: &HankelResolution) -> (Vec<(f64, f64)>, f64) {
    let gl = gauss_legendre_unit(res.gl_points);
    let rho1 = rho1.min(0.5 * rho_max);
    let mut pts = Vec::new();
    let mut hi = rho1;
    for _ in 0..res.geometric_panels {
        let lo = 0.5 * hi;
        for &(t, w) in &gl {
            pts.push((lo + t * (hi - lo), w * (hi - lo)));
        }
        hi = lo;
    }
    let rho_min = hi;
    let panels = ((rho_max - rho1) / width).ceil().max(1.0) as usize;
    let width = (rho_max - rho1) / panels as f64;
    for p in 0..panels {
        let lo = rho1 + p as f64 * width;
        for &(t, w) in &gl {
            pts.push((lo + t * width, w * width));
        }
    }
    (pts, rho_min)
}

/// `∫ Σ_k c_k Re(H^a_k conj(H^b_k)) w(ρ) ρ dρ`.
fn pair_integral(
    act: &Active,
    a: &Cluster,
    b: &Cluster,
    s: f64,
    homogeneous: bool,
    res: &HankelResolution,
) -> f64 {
    let weight = |rho: f64| if homogeneous { rho.powf(2.0 * s) } else { (1.0 + rho * rho).powf(s) };
    let r_hi = a.r_hi().max(b.r_hi());
    let rho_max = a.rho_max.min(b.rho_max);
    let (pts, rho_min) = rho_points(1.0 / r_hi, rho_max, 0.5 * PI / r_hi, res);
    let same = std::ptr::eq(a, b);
    let product = |rho: f64, buf: &mut Vec<f64>| -> Vec<f64> {
        let ha = a.transform(&act.k, rho, buf);
        let hb = if same { ha.clone() } else { b.transform(&act.k, rho, buf) };
        ha.iter().zip(&hb).map(|(x, y)| (x * y.conj()).re).collect()
    };
    let contributions: Vec<f64> = pts
        .par_iter()
        .map_init(Vec::new, |buf, &(rho, w)| {
            let p = product(rho, buf);
            act.k.iter().zip(&p).map(|(k, v)| mode_weight(*k) * v).sum::<f64>() * weight(rho) * rho * w
        })
        .collect();
    let mut total: f64 = contributions.iter().sum();
    // below rho_min: H_k ~ ρ^k, so the integrand is a pure power
    let p = product(rho_min, &mut Vec::new());
    for (k, v) in act.k.iter().zip(&p) {
        let e = if homogeneous { 2.0 * s + 1.0 } else { 1.0 } + 2.0 * *k as f64;
        total += mode_weight(*k) * v * weight(rho_min) * rho_min * rho_min / (e + 1.0);
    }
    if same {
        let tail: f64 = contributions[pts.len() - pts.len() / 20..].iter().sum();
        if tail.abs() > 1e-6 * total.abs() {
            log::warn!("Hankel norm: {:.2e} of the integral sits at the resolution limit", tail / total);
        }
    }
    total
}

pub fn norm_squared(field: &PolarField, s: f64, homogeneous: bool, res: &HankelResolution) -> Result<f64> {
    if !(s > -1.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!("Sobolev order {s} outside (-1, 1]")));
    }
    let Some(act) = active_set(field, res) else { return Ok(0.0) };
    let mut total = 0.0;
    for (i, a) in act.clusters.iter().enumerate() {
        total += pair_integral(&act, a, a, s, homogeneous, res);
        for b in &act.clusters[i + 1..] {
            total += 2.0 * pair_integral(&act, a, b, s, homogeneous, res);
        }
    }
    Ok(total)
}

pub fn norm(field: &PolarField, s: f64, homogeneous: bool, res: &HankelResolution) -> Result<f64> {
    Ok(norm_squared(field, s, homogeneous, res)?.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid::RadialGrid;
    use crate::profiles::bump;
    use crate::sobolev::cartesian::{self, CartesianResolution};

    fn gaussian() -> PolarField {
        let g = Arc::new(RadialGrid::log_with_step(1e-4, 12.0, 0.01).unwrap());
        let v: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 2.0).exp()).collect();
        PolarField::radial(g, &v).unwrap()
    }

    #[test]
    fn gaussian_closed_form() {
        let f = gaussian();
        for s in [-0.5, 0.0, 0.5, 1.0] {
            let got = norm_squared(&f, s, true, &HankelResolution::default()).unwrap();
            let want = PI * libm::tgamma(1.0 + s);
            assert!((got / want - 1.0).abs() < 1e-6, "s={s}: {got} vs {want}");
        }
    }

    fn ring(k: usize) -> PolarField {
        let g = Arc::new(RadialGrid::log_with_step(0.2, 3.0, 0.004).unwrap());
        PolarField::from_fn(g, k, |m, r| {
            if m == 0 {
                Complex64::new(0.3 * bump(r, 0.5, 2.5), 0.0)
            } else if m == 1 {
                Complex64::new(bump(r, 0.7, 2.2), 0.4 * bump(r, 0.9, 2.0))
            } else {
                Complex64::new(0.2 * bump(r, 0.8, 1.6), 0.0)
            }
        })
        .unwrap()
    }

    #[test]
    fn plancherel() {
        let f = ring(3);
        let l2 = f.lp_norm(2.0).unwrap();
        let h = norm(&f, 0.0, true, &HankelResolution::default()).unwrap();
        assert!((h / l2 - 1.0).abs() < 1e-8, "{h} vs {l2}");
    }

    #[test]
    fn agrees_with_cartesian() {
        let f = ring(3);
        let res = CartesianResolution { n: 512, box_factor: 5.0 };
        for s in [-0.5, 0.5, 1.0] {
            let h = norm_squared(&f, s, true, &HankelResolution::default()).unwrap();
            let c = cartesian::norm_squared(&f, s, true, &res).unwrap();
            assert!((h / c - 1.0).abs() < 3e-3, "s={s}: {h} vs {c}");
        }
    }

    #[test]
    fn rotation_invariant() {
        let f = ring(5);
        let a = norm_squared(&f, 0.5, true, &HankelResolution::default()).unwrap();
        let b = norm_squared(&f.rotate(0.7), 0.5, true, &HankelResolution::default()).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_orders_outside_range() {
        let f = ring(3);
        assert!(norm(&f, -1.0, true, &HankelResolution::default()).is_err());
        assert!(norm(&f, 1.5, true, &HankelResolution::default()).is_err());
    }
}
