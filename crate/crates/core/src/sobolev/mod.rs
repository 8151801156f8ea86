//! Fractional Sobolev norms `Ḣ^s`, `H^s` for `s ∈ (−1, 1]`.
//!
//! Convention: `‖f‖²_{Ḣ^s} = (2π)^{-2}∫|ξ|^{2s}|f̂(ξ)|²dξ`, `f̂(ξ) = ∫f e^{-iξ·x}dx`,
//! so the Gaussian `e^{-|x|²/2}` has `‖·‖² = πΓ(1+s)`.

pub mod bessel;
pub mod cartesian;
pub mod hankel;
pub mod inflation;
pub mod slobodeckij;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cartesian::{CartesianResolution, Placed};
pub use hankel::HankelResolution;
pub use slobodeckij::SlobodeckijResolution;

use crate::error::{Error, Result};
use crate::field::PolarField;
use crate::grid::{gauss_legendre_unit, RadialGrid};
use std::f64::consts::PI;
use crate::profiles::RadialProfile;
use crate::stats::{loglog, Fit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hankel,
    Cartesian,
    Slobodeckij,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    pub hankel: HankelResolution,
    pub cartesian: CartesianResolution,
    pub slobodeckij: SlobodeckijResolution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevSpec {
    pub s: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "yes")]
    pub homogeneous: bool,
    #[serde(default)]
    pub resolution: Resolution,
}

/// `∫_{[-a,a]²} |z|^e dz` for `e > -2`.
pub(crate) fn square_power(a: f64, e: f64) -> f64 {
    let rule = gauss_legendre_unit(32);
    let quarter = PI / 4.0;
    8.0 * rule
        .iter()
        .map(|&(t, w)| (a / (t * quarter).cos()).powf(e + 2.0) / (e + 2.0) * w * quarter)
        .sum::<f64>()
}

fn default_method() -> Method {
    Method::Hankel
}

fn yes() -> bool {
    true
}

impl SobolevSpec {
    pub fn homogeneous(s: f64) -> Self {
        SobolevSpec { s, method: Method::Hankel, homogeneous: true, resolution: Resolution::default() }
    }

    pub fn inhomogeneous(s: f64) -> Self {
        SobolevSpec { homogeneous: false, ..Self::homogeneous(s) }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > -1.0 && self.s <= 1.0) {
            return Err(Error::InvalidArgument(format!("Sobolev order {} outside (-1, 1]", self.s)));
        }
        if self.method == Method::Slobodeckij {
            if !self.homogeneous {
                return Err(Error::InvalidArgument("real-space forms are homogeneous only".into()));
            }
            if self.s == 0.0 || self.s >= 1.0 {
                return Err(Error::InvalidArgument(format!("no real-space form at s = {}", self.s)));
            }
        }
        Ok(())
    }
}

pub fn norm_squared(field: &PolarField, spec: &SobolevSpec) -> Result<f64> {
    spec.validate()?;
    match spec.method {
        Method::Hankel => hankel::norm_squared(field, spec.s, spec.homogeneous, &spec.resolution.hankel),
        Method::Cartesian => {
            cartesian::norm_squared(field, spec.s, spec.homogeneous, &spec.resolution.cartesian)
        }
        Method::Slobodeckij => slobodeckij::norm_squared(field, spec.s, &spec.resolution.slobodeckij),
    }
}

pub fn norm(field: &PolarField, spec: &SobolevSpec) -> Result<f64> {
    Ok(norm_squared(field, spec)?.max(0.0).sqrt())
}

/// Norm of a sum of translated fields (Cartesian or real-space methods only).
pub fn norm_placed(pieces: &[Placed], spec: &SobolevSpec) -> Result<f64> {
    spec.validate()?;
    let sq = match spec.method {
        Method::Hankel if pieces.len() == 1 => {
            hankel::norm_squared(pieces[0].field, spec.s, spec.homogeneous, &spec.resolution.hankel)?
        }
        Method::Hankel | Method::Cartesian => {
            cartesian::norm_squared_placed(pieces, spec.s, spec.homogeneous, &spec.resolution.cartesian)?
        }
        Method::Slobodeckij => slobodeckij::norm_squared_placed(pieces, spec.s, &spec.resolution.slobodeckij)?,
    };
    Ok(sq.max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct NegNormScan {
    pub eta: f64,
    pub n: usize,
    pub rows: Vec<(f64, f64)>,
    pub fit: Option<Fit>,
}

/// `‖g(r)cos(Nα − K f(r) + f_err(r))‖_{Ḣ^{-η}}` for each `K`.
pub fn neg_norm_scan(
    g: &RadialProfile,
    f: &dyn Fn(f64) -> f64,
    f_err: &dyn Fn(f64) -> f64,
    k_list: &[f64],
    n: usize,
    eta: f64,
) -> Result<NegNormScan> {
    if n == 0 {
        return Err(Error::InvalidArgument("angular frequency must be positive".into()));
    }
    let Some((lo, hi)) = g.supports().first().copied().map(|(a, _)| (a, g.outer_radius().unwrap())) else {
        return Ok(NegNormScan { eta, n, rows: k_list.iter().map(|&k| (k, 0.0)).collect(), fit: None });
    };
    // resolve the fastest radial oscillation with ≥ 24 nodes per wavelength
    let slope = (0..=200)
        .map(|i| lo + (hi - lo) * i as f64 / 200.0)
        .map(|r| ((f(r + 1e-6) - f(r - 1e-6)) / 2e-6).abs())
        .fold(0.0f64, f64::max);
    let k_top = k_list.iter().cloned().fold(0.0f64, f64::max);
    let wavelength = 2.0 * std::f64::consts::PI / (k_top * slope).max(1e-12);
    let h = (wavelength / (24.0 * hi)).min(0.01);
    let grid = Arc::new(RadialGrid::log_with_step(0.9 * lo, 1.1 * hi, h)?);
    let spec = SobolevSpec::homogeneous(-eta);
    let mut rows = Vec::new();
    for &k in k_list {
        let profile: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::from_polar(0.5 * g.eval(r), -(k * f(r) - f_err(r))))
            .collect();
        let field = PolarField::single_mode(grid.clone(), n, profile)?;
        rows.push((k, norm(&field, &spec)?));
    }
    let fit = if rows.len() >= 2 && rows.iter().all(|r| r.1 > 0.0) {
        let (ks, vs): (Vec<f64>, Vec<f64>) = rows.iter().cloned().unzip();
        Some(loglog(&ks, &vs))
    } else {
        None
    };
    Ok(NegNormScan { eta, n, rows, fit })
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpolationReport {
    pub orders: (f64, f64, f64),
    pub norms: (f64, f64, f64),
    pub rhs: f64,
    /// `‖f‖_r − ‖f‖_s^θ‖f‖_q^{1−θ}`
    pub residual: f64,
    pub holds: bool,
}

pub fn interpolation_from_norms(orders: (f64, f64, f64), norms: (f64, f64, f64)) -> InterpolationReport {
    let (q, r, s) = orders;
    let theta = (r - q) / (s - q);
    let rhs = norms.2.powf(theta) * norms.0.powf(1.0 - theta);
    InterpolationReport {
        orders,
        norms,
        rhs,
        residual: norms.1 - rhs,
        holds: norms.1 <= (1.0 + 1e-3) * rhs,
    }
}

pub fn interpolation_check(field: &PolarField, q: f64, r: f64, s: f64, spec: &SobolevSpec) -> Result<InterpolationReport> {
    if !(q < r && r < s) {
        return Err(Error::InvalidArgument(format!("need q < r < s, got {q}, {r}, {s}")));
    }
    let at = |o: f64| norm(field, &SobolevSpec { s: o, ..spec.clone() });
    Ok(interpolation_from_norms((q, r, s), (at(q)?, at(r)?, at(s)?)))
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperadditivityReport {
    pub s: f64,
    pub union_norm: f64,
    pub piece_norms: Vec<f64>,
    pub sum_of_norms: f64,
    /// `‖Σf_j‖ − Σ‖f_j‖`
    pub margin: f64,
    pub relative_margin: f64,
    /// `‖Σf_j‖ ≥ Σ‖f_j‖` within `1e-3` relative.
    pub holds: bool,
    /// Lower bound from [`disjoint_lower_bound`].
    pub certified: f64,
    pub certified_holds: bool,
}

/// Lower bound on `‖Σf_j‖_{Ḣ^s}` for `0 < s < 1` and separated supports.
///
/// Expanding the double integral, disjointness leaves only the cross terms
/// `−4C_s∫∫f_i(x)f_j(y)|x−y|^{−2−2s}`, each bounded by
/// `4C_s‖f_i‖_{L¹}‖f_j‖_{L¹}/d_ij^{2+2s}`. So
/// `‖Σf_j‖² ≥ Σ‖f_j‖² − Σ_{i≠j} 2C_s‖f_i‖_{L¹}‖f_j‖_{L¹}/d_ij^{2+2s}`.
pub fn disjoint_lower_bound(norms: &[f64], l1: &[f64], gaps: &dyn Fn(usize, usize) -> f64, s: f64) -> f64 {
    let c = slobodeckij::slobodeckij_constant(s);
    let mut sq: f64 = norms.iter().map(|n| n * n).sum();
    for i in 0..norms.len() {
        for j in i + 1..norms.len() {
            sq -= 4.0 * c * l1[i] * l1[j] / gaps(i, j).powf(2.0 + 2.0 * s);
        }
    }
    sq.max(0.0).sqrt()
}

/// Minimum gap between the outer support discs of placed pieces.
pub fn min_gap(pieces: &[Placed]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let d = (pieces[i].center.0 - pieces[j].center.0).hypot(pieces[i].center.1 - pieces[j].center.1);
            gap = gap.min(d - cartesian::outer_support(pieces[i].field) - cartesian::outer_support(pieces[j].field));
        }
    }
    gap
}

/// Compares the norm of a disjoint sum with the sum of the pieces' norms.
/// All norms come from one common Cartesian lattice.
pub fn superadditivity_check(pieces: &[Placed], s: f64, res: &CartesianResolution) -> Result<SuperadditivityReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("superadditivity is stated for 0 < s < 1, got {s}")));
    }
    if pieces.is_empty() {
        return Err(Error::InvalidArgument("no pieces".into()));
    }
    if min_gap(pieces) <= 0.0 {
        return Err(Error::Contract("piece supports overlap".into()));
    }
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pieces {
        let r = cartesian::outer_support(p.field);
        lo = (lo.0.min(p.center.0 - r), lo.1.min(p.center.1 - r));
        hi = (hi.0.max(p.center.0 + r), hi.1.max(p.center.1 + r));
    }
    let center = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
    let radius = 0.5 * (hi.0 - lo.0).max(hi.1 - lo.1);
    let b = res.box_factor * radius;
    let sq = |ps: &[Placed]| -> Result<f64> {
        let samples = cartesian::sample(ps, center, b, res.n)?;
        Ok(cartesian::norm_squared_samples(&samples, s, true, radius)?.max(0.0).sqrt())
    };
    let union_norm = sq(pieces)?;
    let piece_norms = pieces.iter().map(|p| sq(std::slice::from_ref(p))).collect::<Result<Vec<_>>>()?;
    let sum_of_norms: f64 = piece_norms.iter().sum();
    let margin = union_norm - sum_of_norms;
    let relative_margin = if sum_of_norms > 0.0 { margin / sum_of_norms } else { 0.0 };
    let l1 = pieces.iter().map(|p| p.field.lp_norm(1.0)).collect::<Result<Vec<_>>>()?;
    let gap = |i: usize, j: usize| min_gap(&[pieces[i].clone(), pieces[j].clone()]);
    let certified = disjoint_lower_bound(&piece_norms, &l1, &gap, s);
    Ok(SuperadditivityReport {
        s,
        union_norm,
        piece_norms,
        sum_of_norms,
        margin,
        relative_margin,
        holds: relative_margin >= -1e-3,
        certified,
        certified_holds: union_norm >= certified * (1.0 - 1e-3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::bump;

    fn bump_field(lo: f64, hi: f64, k: usize) -> PolarField {
        let g = Arc::new(RadialGrid::log_with_step(0.9 * lo, 1.1 * hi, 0.005).unwrap());
        let v: Vec<Complex64> = g.nodes().iter().map(|&r| Complex64::new(bump(r, lo, hi), 0.0)).collect();
        PolarField::single_mode(g, k, v).unwrap()
    }

    #[test]
    fn interpolation_holds_for_gaussian_closed_form() {
        let n = |s: f64| (PI * libm::tgamma(1.0 + s)).sqrt();
        let rep = interpolation_from_norms((-0.5, 0.0, 0.5), (n(-0.5), n(0.0), n(0.5)));
        assert!(rep.holds, "{rep:?}");
        assert!(interpolation_from_norms((0.0, 0.5, 1.0), (0.0, 0.0, 0.0)).holds);
    }

    #[test]
    fn interpolation_holds_for_single_harmonics() {
        for k in [0, 1, 3] {
            let f = bump_field(0.5, 2.0, k);
            let rep = interpolation_check(&f, 0.0, 0.5, 1.0, &SobolevSpec::homogeneous(0.0)).unwrap();
            assert!(rep.holds, "k={k}: {rep:?}");
        }
    }

    #[test]
    fn single_piece_has_zero_margin() {
        let f = bump_field(0.2, 1.0, 0);
        let rep = superadditivity_check(&[Placed { field: &f, center: (0.0, 0.0) }], 0.5, &CartesianResolution::default())
            .unwrap();
        assert!(rep.margin.abs() < 1e-12 && rep.holds && rep.certified_holds);
    }

    #[test]
    fn separated_bumps_respect_certified_bound() {
        let f = bump_field(0.2, 1.0, 0);
        let pieces = [Placed { field: &f, center: (-1.5, 0.0) }, Placed { field: &f, center: (1.5, 0.0) }];
        let rep = superadditivity_check(&pieces, 0.5, &CartesianResolution { n: 256, box_factor: 3.0 }).unwrap();
        assert!(rep.certified_holds, "{rep:?}");
        assert!(rep.certified <= rep.union_norm);
        let overlapping = [Placed { field: &f, center: (0.0, 0.0) }, Placed { field: &f, center: (0.5, 0.0) }];
        assert!(matches!(
            superadditivity_check(&overlapping, 0.5, &CartesianResolution::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn neg_norm_scan_is_linear_in_amplitude() {
        let g = RadialProfile::Bump { lo: 0.5, hi: 4.0, amp: 1.0 };
        let ks = [8.0, 16.0];
        let a = neg_norm_scan(&g, &|r| r, &|_| 0.0, &ks, 3, 0.25).unwrap();
        let b = neg_norm_scan(&g.scaled(2.0), &|r| r, &|_| 0.0, &ks, 3, 0.25).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((y.1 / x.1 - 2.0).abs() < 1e-12);
        }
        let z = neg_norm_scan(&RadialProfile::Zero, &|r| r, &|_| 0.0, &ks, 3, 0.25).unwrap();
        assert!(z.rows.iter().all(|r| r.1 == 0.0));
    }
}
