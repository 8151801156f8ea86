//! Initial data `ω₀ = λ^{1−β}f(λr) + λ^{1−β}N^{−β}g(λr)cos(Nα)` and its checks.
//!
//! `f` is a zero-circulation pair of rings: a compressed negative copy of a
//! unit bump near the origin and a spread-out positive copy far away. Between
//! the rings `f` induces a differential rotation that shears the oscillatory
//! part `g cos(Nα)` into ever finer radial scales.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::biot_savart::BiotSavart;
use crate::error::{Error, Result};
use crate::field::PolarField;
use crate::grid::{gauss_legendre_unit, RadialGrid};
use crate::profiles::RadialProfile;
use crate::sobolev::{self, SobolevSpec};

/// Target for the scale-invariant `Ḣ^β` norm of the radial part; leaves
/// room in the `H^β ≤ 1` budget for the oscillatory part and the `L²` term.
pub const F_HBETA_TARGET: f64 = 0.9;
/// `H¹` ceiling for both profiles.
pub const H1_BOUND: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FSpec {
    pub enabled: bool,
    pub tilde_lo: f64,
    pub tilde_hi: f64,
    pub lambda0: f64,
    /// `None`: chosen so that `‖λ^{1−β}f(λ·)‖_{Ḣ^β} = F_HBETA_TARGET`.
    pub c_amp: Option<f64>,
}

impl Default for FSpec {
    fn default() -> Self {
        FSpec { enabled: true, tilde_lo: 0.505, tilde_hi: 1.98, lambda0: 32.0, c_amp: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GSpec {
    pub enabled: bool,
    pub lo: f64,
    pub hi: f64,
    /// `None`: rescaled to `‖g‖_{H¹} = H1_BOUND`.
    pub amp: Option<f64>,
}

impl Default for GSpec {
    fn default() -> Self {
        GSpec { enabled: true, lo: 0.5, hi: 4.0, amp: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Step in `ln r`; default `min(0.02, 1/(6N), ring/100)` with `ring` the
    /// narrowest support of `f` or `g` in `ln r`.
    pub h: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionParams {
    pub beta: f64,
    pub delta: f64,
    pub lambda: f64,
    /// Angular frequency; `None` follows the scaling law.
    pub n: Option<usize>,
    pub f: FSpec,
    pub g: GSpec,
    /// Stored harmonics of `N` (`k_max = harmonics·N`).
    pub harmonics: usize,
    pub grid: GridSpec,
    /// Upper bound `M` for the monotonicity window, if prescribed.
    pub m_bound: Option<f64>,
    pub beta_prime: Option<f64>,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        ConstructionParams {
            beta: 0.5,
            delta: 0.05,
            lambda: 4.0,
            n: None,
            f: FSpec::default(),
            g: GSpec::default(),
            harmonics: 3,
            grid: GridSpec::default(),
            m_bound: None,
            beta_prime: Some(0.5),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingLaw {
    pub n: usize,
    /// `λ^{(2−2β+δ)/β}` before rounding.
    pub n_exact: f64,
    pub residual: f64,
    pub beta_critical: f64,
    pub beta_delta: f64,
}

pub fn beta_critical(beta: f64) -> f64 {
    (2.0 - beta) * beta / (2.0 - beta * beta)
}

pub fn beta_delta(beta: f64, delta: f64) -> f64 {
    (2.0 + delta - beta) * beta / (2.0 + delta - beta * beta)
}

pub fn scaling_law(beta: f64, delta: f64, lambda: f64) -> Result<ScalingLaw> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if !(lambda >= 1.0) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 1, got {lambda}")));
    }
    let n_exact = lambda.powf((2.0 - 2.0 * beta + delta) / beta);
    if !(n_exact < 1e7) {
        return Err(Error::Domain(format!("N = {n_exact:.3e} is beyond any resolvable grid")));
    }
    let n = (n_exact.round() as usize).max(1);
    Ok(ScalingLaw {
        n,
        n_exact,
        residual: n as f64 - n_exact,
        beta_critical: beta_critical(beta),
        beta_delta: beta_delta(beta, delta),
    })
}

/// `(∫(p² + p'²) 2πr dr)^{1/2}` for a radial profile, by Gauss–Legendre panels.
pub fn radial_h1(p: &RadialProfile) -> f64 {
    radial_integral(p, |r| (p.eval(r).powi(2) + p.deriv(r).powi(2)) * 2.0 * PI * r).sqrt()
}

/// `∫ F(r) dr` over the supports of `p`, by Gauss–Legendre panels.
fn radial_integral(p: &RadialProfile, f: impl Fn(f64) -> f64) -> f64 {
    let gl = gauss_legendre_unit(16);
    let mut acc = 0.0;
    for (lo, hi) in p.supports() {
        let panels = 400;
        let w = (hi - lo) / panels as f64;
        for j in 0..panels {
            for &(t, wt) in &gl {
                acc += f(lo + (j as f64 + t) * w) * wt * w;
            }
        }
    }
    acc
}

#[derive(Clone, Debug, Serialize)]
pub struct GReport {
    pub profile: RadialProfile,
    pub h1: f64,
    pub support: (f64, f64),
    pub support_ok: bool,
    pub valid: bool,
}

pub fn build_g(spec: &GSpec) -> Result<(RadialProfile, GReport)> {
    if !(spec.lo > 0.0 && spec.hi > spec.lo) {
        return Err(Error::InvalidArgument(format!("g support ({}, {}) is empty", spec.lo, spec.hi)));
    }
    let unit = RadialProfile::Bump { lo: spec.lo, hi: spec.hi, amp: 1.0 };
    let amp = if !spec.enabled {
        0.0
    } else {
        spec.amp.unwrap_or_else(|| H1_BOUND * (1.0 - 1e-9) / radial_h1(&unit))
    };
    let profile = unit.scaled(amp);
    let h1 = radial_h1(&profile);
    let support_ok = spec.lo >= 0.5 && spec.hi <= 4.0;
    let report = GReport {
        profile: profile.clone(),
        h1,
        support: (spec.lo, spec.hi),
        support_ok,
        valid: h1 <= H1_BOUND && support_ok,
    };
    Ok((profile, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct FReport {
    pub profile: RadialProfile,
    pub c_amp: f64,
    pub supports: Vec<(f64, f64)>,
    /// Which of the reference support conditions hold: inner start at most
    /// `1e-4`, inner end below `1/16`, outer start above 16, outer end at least `1e3`.
    pub support_flags: [bool; 4],
    pub h1: f64,
    pub h1_within_bound: bool,
    /// `‖f‖_{Ḣ^β}` (equal to that of every rescaling `λ^{1−β}f(λ·)`).
    pub hbeta: f64,
    /// `∫f r dr / ∫|f| r dr`
    pub zero_mean_rel: f64,
    pub zero_mean_ok: bool,
    /// Range of the sign-normalized `∂_r(v_α[f]/r)` on `(1/2, 4)`.
    pub window: (f64, f64),
    pub window_sign: f64,
    pub m_measured: f64,
    pub monotone_ok: bool,
}

fn f_grid(profile: &RadialProfile) -> Result<Arc<RadialGrid>> {
    let lo = profile.inner_radius().unwrap_or(0.5).min(0.5);
    let hi = profile.outer_radius().unwrap_or(4.0).max(4.0);
    Ok(Arc::new(RadialGrid::log_with_step(0.9 * lo, 1.05 * hi, 0.005)?))
}

fn composite(spec: &FSpec, c_amp: f64) -> RadialProfile {
    RadialProfile::Composite { tilde_lo: spec.tilde_lo, tilde_hi: spec.tilde_hi, lambda0: spec.lambda0, c_amp }
}

fn hbeta_of(profile: &RadialProfile, beta: f64) -> Result<f64> {
    if profile.is_zero() {
        return Ok(0.0);
    }
    let grid = f_grid(profile)?;
    let v: Vec<f64> = grid.nodes().iter().map(|&r| profile.eval(r)).collect();
    sobolev::norm(&PolarField::radial(grid, &v)?, &SobolevSpec::homogeneous(beta))
}

pub fn build_f(spec: &FSpec, beta: f64, m_bound: Option<f64>) -> Result<(RadialProfile, FReport)> {
    if !(spec.lambda0 >= 1.0) {
        return Err(Error::InvalidArgument(format!("lambda0 must be >= 1, got {}", spec.lambda0)));
    }
    if !(spec.tilde_lo > 0.0 && spec.tilde_hi > spec.tilde_lo) {
        return Err(Error::InvalidArgument("f profile support is empty".into()));
    }
    let c_amp = if !spec.enabled {
        0.0
    } else {
        match spec.c_amp {
            Some(c) => c,
            None => F_HBETA_TARGET / hbeta_of(&composite(spec, 1.0), beta)?,
        }
    };
    let profile = composite(spec, c_amp);
    let supports = profile.supports();
    let support_flags = match supports.as_slice() {
        [(a, b), (c, d)] => [*a <= 1e-4, *b < 1.0 / 16.0, *c > 16.0, *d >= 1e3],
        _ => [false; 4],
    };
    let h1 = radial_h1(&profile);
    let hbeta = hbeta_of(&profile, beta)?;

    let grid = f_grid(&profile)?;
    let v: Vec<f64> = grid.nodes().iter().map(|&r| profile.eval(r)).collect();
    let abs_mass = radial_integral(&profile, |r| profile.eval(r).abs() * r);
    let mass = radial_integral(&profile, |r| profile.eval(r) * r);
    let zero_mean_rel = if abs_mass > 0.0 { mass / abs_mass } else { 0.0 };

    let valpha = BiotSavart::new(grid.clone()).radial_valpha(&v);
    let omega_rot: Vec<f64> = valpha.iter().zip(grid.nodes()).map(|(a, r)| a / r).collect();
    let d = grid.derivative(&omega_rot);
    let inside: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&d)
        .filter(|(r, _)| **r > 0.5 && **r < 4.0)
        .map(|(_, d)| *d)
        .collect();
    let mean = inside.iter().sum::<f64>() / inside.len().max(1) as f64;
    let window_sign = if mean < 0.0 { -1.0 } else { 1.0 };
    let lo = inside.iter().map(|d| d * window_sign).fold(f64::INFINITY, f64::min);
    let hi = inside.iter().map(|d| d * window_sign).fold(f64::NEG_INFINITY, f64::max);
    let m_measured = if lo > 0.0 { hi.max(1.0 / lo) } else { f64::INFINITY };
    let monotone_ok = lo > 0.0 && m_bound.map_or(true, |m| m_measured < m);

    let report = FReport {
        profile: profile.clone(),
        c_amp,
        supports,
        support_flags,
        h1,
        h1_within_bound: h1 <= H1_BOUND,
        hbeta,
        zero_mean_rel,
        zero_mean_ok: zero_mean_rel.abs() < 1e-10,
        window: (lo, hi),
        window_sign,
        m_measured,
        monotone_ok,
    };
    Ok((profile, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    pub n: usize,
    pub scaling: ScalingLaw,
    pub n_from_scaling_law: bool,
    pub beta_prime_ok: Option<bool>,
    pub f: FReport,
    pub g: GReport,
    pub grid_nodes: usize,
    pub grid_h: f64,
    pub grid_range: (f64, f64),
    pub k_max: usize,
    /// `‖ω₀‖_{H^β}` (inhomogeneous)
    pub h_beta: f64,
    pub h_beta_ok: bool,
    /// `∫∫ω₀ / ‖ω₀‖_{L¹}`
    pub circulation_rel: f64,
    pub support: Option<(f64, f64)>,
    pub valid: bool,
}

#[derive(Clone, Debug)]
pub struct Initial {
    pub field: PolarField,
    pub f: RadialProfile,
    pub g: RadialProfile,
    pub n: usize,
    pub report: ConstructionReport,
}

/// Oscillatory mode-`N` coefficient `λ^{1−β}N^{−β}g(λr)/2`.
pub fn osc_amplitude(params: &ConstructionParams, n: usize) -> f64 {
    params.lambda.powf(1.0 - params.beta) * (n as f64).powf(-params.beta) / 2.0
}

pub fn assemble_initial(params: &ConstructionParams) -> Result<Initial> {
    let scaling = scaling_law(params.beta, params.delta, params.lambda)?;
    let n = params.n.unwrap_or(scaling.n);
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    if params.harmonics == 0 {
        return Err(Error::InvalidArgument("need at least one stored harmonic".into()));
    }
    let (f, f_report) = build_f(&params.f, params.beta, params.m_bound)?;
    let (g, g_report) = build_g(&params.g)?;
    let lam = params.lambda;

    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (a, b) in f.supports().into_iter().chain(g.supports()) {
        lo = lo.min(a / lam);
        hi = hi.max(b / lam);
    }
    if !lo.is_finite() {
        lo = params.g.lo / lam;
        hi = params.g.hi / lam;
    }
    let r_min = params.grid.r_min.unwrap_or(0.9 * lo);
    let r_max = params.grid.r_max.unwrap_or(1.05 * hi);
    // at least 100 steps across every ring of f and g
    let ring = f.supports().into_iter().chain(g.supports()).map(|(a, b)| (b / a).ln() / 100.0).fold(0.02, f64::min);
    let h = params.grid.h.unwrap_or((1.0 / (6.0 * n as f64)).min(ring));
    let min_h_per_decade = std::f64::consts::LN_10 / 16.0;
    if h > min_h_per_decade {
        return Err(Error::Resolution(format!(
            "log step {h} gives fewer than 16 nodes per decade; need h <= {min_h_per_decade:.4}"
        )));
    }
    let grid = Arc::new(RadialGrid::log_with_step(r_min, r_max, h)?);

    let scale = lam.powf(1.0 - params.beta);
    let amp = osc_amplitude(params, n);
    let nodes = grid.nodes();
    let mut coeffs = vec![vec![Complex64::default(); grid.len()]; params.harmonics + 1];
    for (i, &r) in nodes.iter().enumerate() {
        coeffs[0][i] = Complex64::new(scale * f.eval(lam * r), 0.0);
        coeffs[1][i] = Complex64::new(amp * g.eval(lam * r), 0.0);
    }
    let field = PolarField::new(grid.clone(), n, coeffs)?;

    let h_beta = sobolev::norm(&field, &SobolevSpec::inhomogeneous(params.beta))?;
    let circ: Vec<f64> = field.coeffs()[0].iter().map(|c| c.re).collect();
    let circulation = 2.0 * PI * grid.integrate(&circ);
    let l1 = field.lp_norm(1.0)?;
    let circulation_rel = if l1 > 0.0 { circulation / l1 } else { 0.0 };
    let beta_prime_ok = params.beta_prime.map(|bp| scaling.beta_delta < bp);
    let f_needed = params.f.enabled;
    let valid = (!f_needed || (f_report.zero_mean_ok && f_report.monotone_ok))
        && h_beta <= 1.0
        && g_report.valid
        && circulation_rel.abs() < 1e-8;
    let report = ConstructionReport {
        lambda: lam,
        beta: params.beta,
        delta: params.delta,
        n,
        n_from_scaling_law: params.n.is_none(),
        scaling,
        beta_prime_ok,
        f: f_report,
        g: g_report,
        grid_nodes: grid.len(),
        grid_h: grid.step(),
        grid_range: (grid.r_min(), grid.r_max()),
        k_max: field.k_max(),
        h_beta,
        h_beta_ok: h_beta <= 1.0,
        circulation_rel,
        support: field.support_annulus(0.0),
        valid,
    };
    Ok(Initial { field, f, g, n, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_law_arithmetic() {
        let s = scaling_law(0.5, 0.05, 10.0).unwrap();
        assert_eq!(s.n, 126);
        assert!((beta_critical(0.5) - 3.0 / 7.0).abs() < 1e-15);
        assert!((s.beta_delta - 0.775 / 1.8).abs() < 1e-15);
        assert!(s.beta_delta > s.beta_critical);
        assert_eq!(scaling_law(0.5, 0.05, 4.0).unwrap().n, 18);
        assert!(scaling_law(0.1, 0.05, 1e6).is_err());
        assert!(scaling_law(1.0, 0.05, 4.0).is_err());
    }

    #[test]
    fn default_g_meets_h1_bound() {
        let (g, rep) = build_g(&GSpec::default()).unwrap();
        assert!(rep.valid);
        assert!((rep.h1 - H1_BOUND).abs() < 1e-6);
        assert_eq!(g.supports(), vec![(0.5, 4.0)]);
        let (_, loud) = build_g(&GSpec { amp: Some(100.0), ..GSpec::default() }).unwrap();
        assert!(!loud.valid);
        let (_, narrow) = build_g(&GSpec { lo: 1.0, hi: 2.0, ..GSpec::default() }).unwrap();
        assert!(narrow.valid);
    }

    #[test]
    fn f_is_zero_mean_with_monotone_window() {
        let (_, rep) = build_f(&FSpec::default(), 0.5, None).unwrap();
        assert!(rep.zero_mean_ok, "{}", rep.zero_mean_rel);
        assert!(rep.monotone_ok, "{:?}", rep.window);
        assert!((rep.hbeta / F_HBETA_TARGET - 1.0).abs() < 1e-6);
    }

    #[test]
    fn f_is_linear_in_amplitude() {
        let spec = FSpec { c_amp: Some(0.01), ..FSpec::default() };
        let (_, a) = build_f(&spec, 0.5, None).unwrap();
        let (_, b) = build_f(&FSpec { c_amp: Some(0.02), ..spec }, 0.5, None).unwrap();
        assert!((b.h1 / a.h1 - 2.0).abs() < 1e-12);
        assert!((b.window.0 / a.window.0 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_amplitude_f_is_degenerate() {
        let (p, rep) = build_f(&FSpec { c_amp: Some(0.0), ..FSpec::default() }, 0.5, None).unwrap();
        assert!(p.is_zero());
        assert!(rep.zero_mean_ok);
        assert!(!rep.monotone_ok);
    }

    #[test]
    fn desk_initial_data_is_valid() {
        let init = assemble_initial(&ConstructionParams::default()).unwrap();
        let rep = &init.report;
        assert_eq!(init.n, 18);
        assert!(rep.valid, "{rep:#?}");
        assert!(rep.h_beta <= 1.0);
        assert_eq!(init.field.symmetry_n(), Some(18));
        assert_eq!(init.field.k_max(), 54);
    }

    #[test]
    fn single_harmonic_when_f_is_off() {
        let params = ConstructionParams {
            lambda: 1.0,
            n: Some(1),
            f: FSpec { enabled: false, ..FSpec::default() },
            harmonics: 1,
            ..ConstructionParams::default()
        };
        let init = assemble_initial(&params).unwrap();
        assert!(init.field.coeffs()[0].iter().all(|c| c.norm() == 0.0));
        assert!(init.field.coeffs()[1].iter().any(|c| c.norm() > 0.0));
    }
}
