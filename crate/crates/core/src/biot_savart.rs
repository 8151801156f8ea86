//! Per-mode inversion of `−Δψ = ω` and the velocity `v = ∇⊥ψ`.
//!
//! For mode `k ≥ 1` write `P(r) = ∫₀^r (s/r)^{k+1} ω_k ds` and
//! `Q(r) = ∫_r^∞ (r/s)^{k−1} ω_k ds`. Then `ψ_k = r(P+Q)/(2k)`,
//! `v_α,k = (P−Q)/2` and `v_r,k = i(P+Q)/2`. For `k = 0`, `v_α = P` with
//! exponent 1. Both integrals are accumulated panel by panel with the decay
//! factor applied in log space, so large `k` neither overflows nor underflows.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{AngularFft, PolarField};
use crate::grid::{gauss_legendre_unit, ComplexInterpolant, RadialGrid};
use crate::profiles::RadialProfile;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Panel weights for one wavenumber.
#[derive(Debug)]
struct ModeRule {
    stencil: Vec<usize>,
    p_decay: Vec<f64>,
    p_w: Vec<[f64; 4]>,
    q_decay: Vec<f64>,
    q_w: Vec<[f64; 4]>,
}

fn stencil_start(i: usize, n: usize) -> usize {
    i.saturating_sub(1).min(n - 4)
}

fn lagrange4(start_offset: f64, t: f64) -> [f64; 4] {
    let nodes = [start_offset, start_offset + 1.0, start_offset + 2.0, start_offset + 3.0];
    let mut l = [1.0; 4];
    for j in 0..4 {
        for m in 0..4 {
            if m != j {
                l[j] *= (t - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
    }
    l
}

impl ModeRule {
    fn build(grid: &RadialGrid, k: usize) -> Self {
        let n = grid.len();
        let r = grid.nodes();
        let h = grid.step();
        let max_log_ratio = r.windows(2).map(|w| (w[1] / w[0]).ln()).fold(0.0, f64::max);
        let g = (8.0 + ((k + 2) as f64 * max_log_ratio).ceil()).min(64.0) as usize;
        let gl = gauss_legendre_unit(g);
        let pe = (k + 1) as f64;
        let qe = k as f64 - 1.0;
        let mut rule = ModeRule {
            stencil: Vec::with_capacity(n - 1),
            p_decay: Vec::with_capacity(n - 1),
            p_w: Vec::with_capacity(n - 1),
            q_decay: Vec::with_capacity(n - 1),
            q_w: Vec::with_capacity(n - 1),
        };
        for i in 0..n - 1 {
            let s = stencil_start(i, n);
            let (ln_a, ln_b) = (r[i].ln(), r[i + 1].ln());
            let x_i = grid.coord(r[i]);
            let mut pw = [0.0; 4];
            let mut qw = [0.0; 4];
            for &(t, w) in &gl {
                let sg = grid.radius(x_i + t * h);
                let jac = match grid.spacing() {
                    crate::grid::Spacing::Uniform => 1.0,
                    crate::grid::Spacing::LogUniform => sg,
                };
                let ln_s = sg.ln();
                let basis = lagrange4(s as f64 - i as f64, t);
                let kp = h * w * jac * (pe * (ln_s - ln_b)).exp();
                let kq = h * w * jac * (qe * (ln_a - ln_s)).exp();
                for j in 0..4 {
                    pw[j] += kp * basis[j];
                    qw[j] += kq * basis[j];
                }
            }
            rule.stencil.push(s);
            rule.p_decay.push((pe * (ln_a - ln_b)).exp());
            rule.p_w.push(pw);
            rule.q_decay.push((qe * (ln_a - ln_b)).exp());
            rule.q_w.push(qw);
        }
        rule
    }

    fn accumulate(&self, omega: &[Complex64], with_q: bool) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = omega.len();
        let mut p = vec![Complex64::default(); n];
        let mut q = vec![Complex64::default(); n];
        let panel = |w: &[f64; 4], s: usize| {
            w[0] * omega[s] + w[1] * omega[s + 1] + w[2] * omega[s + 2] + w[3] * omega[s + 3]
        };
        for i in 0..n - 1 {
            p[i + 1] = p[i] * self.p_decay[i] + panel(&self.p_w[i], self.stencil[i]);
        }
        if with_q {
            for i in (0..n - 1).rev() {
                q[i] = q[i + 1] * self.q_decay[i] + panel(&self.q_w[i], self.stencil[i]);
            }
        }
        (p, q)
    }
}

/// Solver bound to one grid, caching panel rules per wavenumber.
#[derive(Debug)]
pub struct BiotSavart {
    grid: Arc<RadialGrid>,
    rules: Mutex<HashMap<usize, Arc<ModeRule>>>,
}

#[derive(Clone, Debug)]
pub struct VelocityModes {
    grid: Arc<RadialGrid>,
    base: usize,
    pub psi: Vec<Vec<Complex64>>,
    pub vr: Vec<Vec<Complex64>>,
    pub valpha: Vec<Vec<Complex64>>,
    p: Vec<Vec<Complex64>>,
    q: Vec<Vec<Complex64>>,
    /// Crude bound on the velocity lost by truncating at `r_max`.
    pub tail_estimate: f64,
}

impl BiotSavart {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        BiotSavart { grid, rules: Mutex::new(HashMap::new()) }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    fn rule(&self, k: usize) -> Arc<ModeRule> {
        if let Some(r) = self.rules.lock().unwrap().get(&k) {
            return r.clone();
        }
        let built = Arc::new(ModeRule::build(&self.grid, k));
        self.rules.lock().unwrap().entry(k).or_insert(built).clone()
    }

    /// `(P, Q)` for one mode profile.
    pub fn mode_integrals(&self, k: usize, omega: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        self.rule(k).accumulate(omega, k > 0)
    }

    /// Angular velocity profile of a radial field, `(1/r)∫₀^r ω s ds`.
    pub fn radial_valpha(&self, omega0: &[f64]) -> Vec<f64> {
        let c: Vec<Complex64> = omega0.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.mode_integrals(0, &c).0.into_iter().map(|z| z.re).collect()
    }

    pub fn solve(&self, omega: &PolarField) -> Result<VelocityModes> {
        if !(Arc::ptr_eq(omega.grid_arc(), &self.grid) || omega.grid() == &*self.grid) {
            return Err(Error::InvalidArgument("field grid differs from solver grid".into()));
        }
        let grid = &self.grid;
        let r = grid.nodes();
        let results: Vec<_> = omega
            .coeffs()
            .par_iter()
            .enumerate()
            .map(|(m, c)| {
                let k = omega.wavenumber(m);
                let (p, q) = self.mode_integrals(k, c);
                let n = c.len();
                let (mut psi, mut vr, mut va) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
                if k == 0 {
                    va.extend(p.iter().map(|z| Complex64::new(z.re, 0.0)));
                    vr.resize(n, Complex64::default());
                    psi = stream_k0(grid, c, &p);
                } else {
                    for i in 0..n {
                        let s = p[i] + q[i];
                        psi.push(s * (r[i] / (2.0 * k as f64)));
                        va.push((p[i] - q[i]) * 0.5);
                        vr.push(I * s * 0.5);
                    }
                }
                (psi, vr, va, p, q)
            })
            .collect();
        let mut out = VelocityModes {
            grid: self.grid.clone(),
            base: omega.base(),
            psi: Vec::new(),
            vr: Vec::new(),
            valpha: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            tail_estimate: tail_estimate(omega),
        };
        for (psi, vr, va, p, q) in results {
            out.psi.push(psi);
            out.vr.push(vr);
            out.valpha.push(va);
            out.p.push(p);
            out.q.push(q);
        }
        if out.tail_estimate > 1e-10 {
            log::warn!(
                "vorticity not decayed at r_max = {}: velocity tail error up to {:.3e}",
                grid.r_max(),
                out.tail_estimate
            );
        }
        Ok(out)
    }
}

/// `ψ₀ = −(ln r ∫₀^r ω s ds + ∫_r^∞ ln s ω s ds)`, via trapezoid sums.
fn stream_k0(grid: &RadialGrid, omega0: &[Complex64], p: &[Complex64]) -> Vec<Complex64> {
    let r = grid.nodes();
    let n = r.len();
    let mut tail = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let fa = r[i].ln() * omega0[i].re * r[i] * grid.jac(i);
        let fb = r[i + 1].ln() * omega0[i + 1].re * r[i + 1] * grid.jac(i + 1);
        tail[i] = tail[i + 1] + 0.5 * grid.step() * (fa + fb);
    }
    (0..n).map(|i| Complex64::new(-(r[i].ln() * r[i] * p[i].re + tail[i]), 0.0)).collect()
}

fn tail_estimate(omega: &PolarField) -> f64 {
    let n = omega.grid().len();
    let r_max = omega.grid().r_max();
    omega
        .coeffs()
        .iter()
        .map(|c| c[n - 1].norm().max(c[n - 2].norm()) * r_max)
        .fold(0.0, f64::max)
}

/// Velocity of `omega` (fresh solver; use [`BiotSavart`] to reuse rules).
pub fn solve_velocity(omega: &PolarField) -> Result<VelocityModes> {
    BiotSavart::new(omega.grid_arc().clone()).solve(omega)
}

impl VelocityModes {
    /// Prescribed velocity from mode profiles of `v_r` and `v_α`; the stream
    /// function is left at zero.
    pub fn from_components(
        grid: Arc<RadialGrid>,
        base: usize,
        vr: Vec<Vec<Complex64>>,
        valpha: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if vr.len() != valpha.len() || vr.is_empty() {
            return Err(Error::InvalidArgument("velocity components need matching mode counts".into()));
        }
        if vr.iter().chain(&valpha).any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidArgument("velocity profile length differs from grid".into()));
        }
        let n = grid.len();
        let mut p = Vec::with_capacity(vr.len());
        let mut q = Vec::with_capacity(vr.len());
        for m in 0..vr.len() {
            if m == 0 {
                p.push(valpha[0].clone());
                q.push(vec![Complex64::default(); n]);
            } else {
                p.push((0..n).map(|i| valpha[m][i] - I * vr[m][i]).collect());
                q.push((0..n).map(|i| -valpha[m][i] - I * vr[m][i]).collect());
            }
        }
        let psi = vec![vec![Complex64::default(); n]; vr.len()];
        Ok(VelocityModes { grid, base: base.max(1), psi, vr, valpha, p, q, tail_estimate: 0.0 })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn base(&self) -> usize {
        self.base
    }
    pub fn k_max(&self) -> usize {
        self.base * (self.vr.len() - 1)
    }
    pub fn wavenumber(&self, m: usize) -> usize {
        m * self.base
    }

    /// `(v_r, v_α)` coefficient pairs of mode index `m` at arbitrary radius,
    /// using the exact power-law continuation outside the grid.
    fn mode_at(&self, m: usize, r: f64, interps: &[(ComplexInterpolant, ComplexInterpolant)]) -> (Complex64, Complex64) {
        let g = &*self.grid;
        let k = self.wavenumber(m);
        let n = g.len();
        let (p, q) = if r < g.r_min() {
            if k == 0 {
                (Complex64::default(), Complex64::default())
            } else {
                let f = ((k as f64 - 1.0) * (r / g.r_min()).ln()).exp();
                (Complex64::default(), self.q[m][0] * f)
            }
        } else if r > g.r_max() {
            let f = ((k as f64 + 1.0) * (g.r_max() / r).ln()).exp();
            (self.p[m][n - 1] * f, Complex64::default())
        } else {
            let (i, t) = g.locate(r).unwrap();
            (interps[m].0.eval_panel(g, i, t), interps[m].1.eval_panel(g, i, t))
        };
        if k == 0 {
            (Complex64::default(), Complex64::new(p.re, 0.0))
        } else {
            (I * (p + q) * 0.5, (p - q) * 0.5)
        }
    }

    fn interpolants(&self) -> Vec<(ComplexInterpolant, ComplexInterpolant)> {
        self.p
            .iter()
            .zip(&self.q)
            .map(|(p, q)| (ComplexInterpolant::new(&self.grid, p), ComplexInterpolant::new(&self.grid, q)))
            .collect()
    }

    /// Polar components `(v_r, v_α)` at arbitrary points `(r, α)`.
    pub fn eval_polar(&self, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let interps = self.interpolants();
        points
            .iter()
            .map(|&(r, a)| {
                let (mut vr, mut va) = (0.0, 0.0);
                for m in 0..self.vr.len() {
                    let (cr, ca) = self.mode_at(m, r, &interps);
                    if m == 0 {
                        va += ca.re;
                    } else {
                        let e = Complex64::from_polar(1.0, self.wavenumber(m) as f64 * a);
                        vr += 2.0 * (cr * e).re;
                        va += 2.0 * (ca * e).re;
                    }
                }
                (vr, va)
            })
            .collect()
    }

    /// Cartesian velocity at Cartesian points.
    pub fn eval_cartesian(&self, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let polar: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.hypot(y), y.atan2(x))).collect();
        self.eval_polar(&polar)
            .into_iter()
            .zip(&polar)
            .map(|((vr, va), (_, a))| {
                let (s, c) = a.sin_cos();
                (vr * c - va * s, vr * s + va * c)
            })
            .collect()
    }

    /// `max_α |v_r|` and `max_α |v_α|` at every node (4× refined α grid).
    pub fn node_maxima(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.vr.len();
        let n_alpha = 8 * (h + 1);
        let mut fft = AngularFft::new(n_alpha);
        let (mut cr, mut ca) = (vec![Complex64::default(); h], vec![Complex64::default(); h]);
        let (mut vr, mut va) = (vec![0.0; n_alpha], vec![0.0; n_alpha]);
        let mut out = (Vec::with_capacity(self.grid.len()), Vec::with_capacity(self.grid.len()));
        for i in 0..self.grid.len() {
            for m in 0..h {
                cr[m] = self.vr[m][i];
                ca[m] = self.valpha[m][i];
            }
            fft.synth(&cr, &mut vr);
            fft.synth(&ca, &mut va);
            out.0.push(vr.iter().fold(0.0f64, |a, v| a.max(v.abs())));
            out.1.push(va.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        }
        out
    }

    /// Mode-wise `(1/r)∂_r(r v_r) + (1/r)∂_α v_α` evaluated with the grid's
    /// finite differences; returns `‖residual‖_{L²} / ‖v‖_{L²}`.
    pub fn divergence_residual(&self) -> f64 {
        let r = self.grid.nodes();
        let (mut res, mut mag) = (0.0, 0.0);
        for m in 0..self.vr.len() {
            let k = self.wavenumber(m) as f64;
            let rvr: Vec<Complex64> = self.vr[m].iter().zip(r).map(|(v, r)| v * *r).collect();
            let d = self.grid.derivative(&rvr);
            let div: Vec<f64> = (0..r.len())
                .map(|i| (d[i] / r[i] + I * k * self.valpha[m][i] / r[i]).norm_sqr())
                .collect();
            let vv: Vec<f64> =
                (0..r.len()).map(|i| self.vr[m][i].norm_sqr() + self.valpha[m][i].norm_sqr()).collect();
            let w = if m == 0 { 1.0 } else { 2.0 };
            res += w * self.grid.integrate(&div);
            mag += w * self.grid.integrate(&vv);
        }
        if mag == 0.0 {
            0.0
        } else {
            (res / mag).sqrt()
        }
    }

    /// `(‖v‖_∞, ‖∇v‖_∞)` on the nodes × refined α grid.
    pub fn w1inf(&self) -> (f64, f64) {
        let r = self.grid.nodes();
        let h = self.vr.len();
        let n_alpha = 8 * (h + 1);
        let dvr: Vec<Vec<Complex64>> = self.vr.iter().map(|c| self.grid.derivative(c)).collect();
        let dva: Vec<Vec<Complex64>> = self.valpha.iter().map(|c| self.grid.derivative(c)).collect();
        let mut fft = AngularFft::new(n_alpha);
        let mut bufs = vec![vec![0.0; n_alpha]; 6];
        let mut cs = vec![vec![Complex64::default(); h]; 6];
        let (mut vmax, mut gmax) = (0.0f64, 0.0f64);
        for i in 0..r.len() {
            for m in 0..h {
                let ik = I * self.wavenumber(m) as f64;
                cs[0][m] = self.vr[m][i];
                cs[1][m] = self.valpha[m][i];
                cs[2][m] = dvr[m][i];
                cs[3][m] = dva[m][i];
                cs[4][m] = ik * self.vr[m][i];
                cs[5][m] = ik * self.valpha[m][i];
            }
            for (c, b) in cs.iter().zip(bufs.iter_mut()) {
                fft.synth(c, b);
            }
            for j in 0..n_alpha {
                let (vr, va) = (bufs[0][j], bufs[1][j]);
                vmax = vmax.max(vr.hypot(va));
                let a = bufs[2][j];
                let b = bufs[3][j];
                let c = (bufs[4][j] - va) / r[i];
                let d = (bufs[5][j] + vr) / r[i];
                gmax = gmax.max((a * a + b * b + c * c + d * d).sqrt());
            }
        }
        (vmax, gmax)
    }
}

/// Independent evaluation of `v_r` for `ω = g(r) sin(Nα)` at `α = 0` by
/// double quadrature of the polar kernel
/// `(1/2π)∫∫ s² g(s) sin β sin Nβ / ((s−r)² + 2rs(1−cos β)) dβ ds`.
#[derive(Clone, Debug, Serialize)]
pub struct ModeFormulaValue {
    pub r: f64,
    pub value: f64,
    /// Difference between the two window sizes of the extrapolation (zero
    /// when the probe is outside the support and no window is needed).
    pub error_estimate: f64,
    pub converged: bool,
}

pub fn vr_mode_formula(g: &RadialProfile, n: usize, probes: &[f64]) -> Result<Vec<ModeFormulaValue>> {
    if n == 0 {
        return Err(Error::InvalidArgument("wavenumber must be >= 1".into()));
    }
    let supports = g.supports();
    if supports.is_empty() {
        return Ok(probes.iter().map(|&r| ModeFormulaValue { r, value: 0.0, error_estimate: 0.0, converged: true }).collect());
    }
    let (a, b) = (supports[0].0, supports.last().unwrap().1);
    let panels = 200;
    let gl = gauss_legendre_unit(8);
    let mut s_pts = Vec::with_capacity(panels * gl.len());
    for p in 0..panels {
        let (lo, hi) = (a + (b - a) * p as f64 / panels as f64, a + (b - a) * (p + 1) as f64 / panels as f64);
        for &(t, w) in &gl {
            let s = lo + t * (hi - lo);
            s_pts.push((s, w * (hi - lo) * s * s * g.eval(s)));
        }
    }
    let n_beta = 4096.max(64 * n);
    let db = 2.0 * PI / n_beta as f64;
    let kernel = |r: f64, skip: usize| -> f64 {
        let mut total = 0.0;
        for &(s, ws) in &s_pts {
            if ws == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for j in 0..n_beta {
                let jj = if j <= n_beta / 2 { j } else { n_beta - j };
                if jj < skip {
                    continue;
                }
                let beta = j as f64 * db;
                let den = (s - r).powi(2) + 2.0 * r * s * (1.0 - beta.cos());
                if den > 0.0 {
                    inner += beta.sin() * (n as f64 * beta).sin() / den;
                }
            }
            total += ws * inner * db;
        }
        total / (2.0 * PI)
    };
    Ok(probes
        .par_iter()
        .map(|&r| {
            if r <= a || r >= b {
                ModeFormulaValue { r, value: kernel(r, 0), error_estimate: 0.0, converged: true }
            } else {
                let (i1, i2) = (kernel(r, 2), kernel(r, 4));
                let value = 2.0 * i1 - i2;
                let err = (i1 - i2).abs();
                ModeFormulaValue { r, value, error_estimate: err, converged: err <= 1e-2 * value.abs().max(1e-300) }
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub rows: Vec<(usize, f64)>,
    /// Fitted `d log(max|v_r|)/dN`, `None` for fewer than two rows.
    pub slope: Option<f64>,
}

/// `max_α |v_r|(r_probe)` for `ω = g(r)cos(Nα)` over the wavenumbers.
pub fn exp_decay_scan(
    grid: &Arc<RadialGrid>,
    g: &RadialProfile,
    n_list: &[usize],
    r_probe: f64,
) -> Result<DecayTable> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("wavenumbers must increase".into()));
    }
    let solver = BiotSavart::new(grid.clone());
    let profile: Vec<Complex64> = grid.nodes().iter().map(|&r| Complex64::new(0.5 * g.eval(r), 0.0)).collect();
    let mut rows = Vec::new();
    for &n in n_list {
        if n == 0 {
            return Err(Error::InvalidArgument("wavenumber must be >= 1".into()));
        }
        let field = PolarField::single_mode(grid.clone(), n, profile.clone())?;
        let v = solver.solve(&field)?;
        let interps = v.interpolants();
        let (cr, _) = v.mode_at(1, r_probe, &interps);
        rows.push((n, 2.0 * cr.norm()));
    }
    let slope = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
        Some(crate::stats::ols(&xs, &ys).slope)
    } else {
        None
    };
    Ok(DecayTable { rows, slope })
}

#[derive(Clone, Debug, Serialize)]
pub struct LogLipReport {
    pub constant: f64,
    pub pairs: usize,
    pub annulus: (f64, f64),
}

/// Empirical log-Lipschitz constant of the velocity over seeded point pairs
/// in the support annulus `B(0,R) ∖ B(0,R/K)`.
pub fn loglip_modulus(omega: &PolarField, pairs: usize, seed: u64) -> Result<LogLipReport> {
    let linf = omega.lp_norm(f64::INFINITY)?;
    if linf == 0.0 {
        return Ok(LogLipReport { constant: 0.0, pairs, annulus: (0.0, 0.0) });
    }
    let (lo, hi) = omega
        .support_annulus(1e-12 * linf)
        .ok_or_else(|| Error::Domain("empty support".into()))?;
    if !(hi > lo) {
        return Err(Error::Domain("degenerate support annulus".into()));
    }
    let v = solve_velocity(omega)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(pairs);
    let mut ys = Vec::with_capacity(pairs);
    while xs.len() < pairs {
        let r = (lo * lo + rng.gen::<f64>() * (hi * hi - lo * lo)).sqrt();
        let a = rng.gen_range(-PI..PI);
        let x = (r * a.cos(), r * a.sin());
        let d = hi * 10f64.powf(-3.0 * rng.gen::<f64>());
        let th = rng.gen_range(-PI..PI);
        let y = (x.0 + d * th.cos(), x.1 + d * th.sin());
        let ry = y.0.hypot(y.1);
        if ry >= lo && ry <= hi {
            xs.push((r, a));
            ys.push((ry, y.1.atan2(y.0)));
        }
    }
    let vx = v.eval_polar(&xs);
    let vy = v.eval_polar(&ys);
    let mut worst = 0.0f64;
    for i in 0..pairs {
        let (px, py) = (xs[i], ys[i]);
        let dist = ((px.0 * px.1.cos() - py.0 * py.1.cos()).powi(2)
            + (px.0 * px.1.sin() - py.0 * py.1.sin()).powi(2))
        .sqrt();
        let dv = (vx[i].0 - vy[i].0).abs() + (vx[i].1 - vy[i].1).abs();
        worst = worst.max(dv / (linf * dist * (1.0 + (hi / dist).ln())));
    }
    Ok(LogLipReport { constant: worst, pairs, annulus: (lo, hi) })
}

/// `sup |v_r|` over the support annulus of a `2π/N`-periodic field.
pub fn vr_linf_periodic(omega: &PolarField) -> Result<f64> {
    let only_radial = omega.harmonics() == 0;
    if omega.symmetry_n().is_none() && !only_radial {
        return Err(Error::Contract("vr_linf_periodic needs a declared symmetry".into()));
    }
    let linf = omega.lp_norm(f64::INFINITY)?;
    if linf == 0.0 || only_radial {
        return Ok(0.0);
    }
    let (lo, hi) = omega.support_annulus(1e-12 * linf).ok_or_else(|| Error::Domain("empty support".into()))?;
    let v = solve_velocity(omega)?;
    let (vr_max, _) = v.node_maxima();
    Ok(omega
        .grid()
        .nodes()
        .iter()
        .zip(vr_max)
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .fold(0.0, |a, (_, m)| a.max(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{bump, smooth_step};

    #[test]
    fn radial_field_has_no_radial_velocity() {
        let g = Arc::new(RadialGrid::log_uniform(0.01, 5.0, 200).unwrap());
        let v: Vec<f64> = g.nodes().iter().map(|&r| bump(r, 0.5, 2.0)).collect();
        let f = PolarField::radial(g, &v).unwrap();
        let vel = solve_velocity(&f).unwrap();
        assert!(vel.vr[0].iter().all(|z| *z == Complex64::default()));
    }

    #[test]
    fn rankine_closed_form() {
        let eps = 0.01;
        let g = Arc::new(RadialGrid::log_uniform(1e-4, 10.0, 6000).unwrap());
        let w: Vec<f64> = g.nodes().iter().map(|&r| 1.0 - smooth_step((r - (1.0 - eps)) / (2.0 * eps))).collect();
        let f = PolarField::radial(g.clone(), &w).unwrap();
        let va = BiotSavart::new(g.clone()).radial_valpha(&w);
        let _ = f;
        for (i, &r) in g.nodes().iter().enumerate() {
            if r > 1e-2 && r < 1.0 - eps {
                assert!((va[i] - r / 2.0).abs() < 1e-4 * r, "{r}: {}", va[i]);
            }
            if r > 1.0 + eps {
                assert!((va[i] - 0.5 / r).abs() < 1e-4 / r, "{r}: {}", va[i]);
            }
        }
    }

    #[test]
    fn average_radial_velocity_vanishes() {
        let g = Arc::new(RadialGrid::log_uniform(0.05, 8.0, 300).unwrap());
        let prof: Vec<Complex64> = g.nodes().iter().map(|&r| Complex64::new(bump(r, 0.5, 4.0), 0.0)).collect();
        let f = PolarField::single_mode(g, 6, prof).unwrap();
        let v = solve_velocity(&f).unwrap();
        assert!(v.vr[0].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn divergence_free() {
        let g = Arc::new(RadialGrid::log_uniform(0.05, 8.0, 600).unwrap());
        let f = PolarField::from_fn(g, 4, |k, r| Complex64::new(bump(r, 0.6, 2.0 + k as f64 * 0.3), 0.2 * k as f64))
            .unwrap();
        let v = solve_velocity(&f).unwrap();
        assert!(v.divergence_residual() < 1e-6, "{}", v.divergence_residual());
    }

    #[test]
    fn large_wavenumbers_stay_finite() {
        let g = Arc::new(RadialGrid::log_uniform(0.01, 10.0, 400).unwrap());
        let prof: Vec<Complex64> = g.nodes().iter().map(|&r| Complex64::new(bump(r, 1.0, 2.0), 0.0)).collect();
        let f = PolarField::single_mode(g, 600, prof).unwrap();
        let v = solve_velocity(&f).unwrap();
        assert!(v.vr[1].iter().chain(&v.valpha[1]).all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!(v.vr[1].iter().any(|z| z.norm() > 0.0));
    }

    #[test]
    fn formula_matches_modes_outside_support() {
        let g_prof = RadialProfile::Bump { lo: 1.0, hi: 2.0, amp: 1.0 };
        let g = Arc::new(RadialGrid::log_uniform(0.01, 20.0, 1200).unwrap());
        // g sin(2α) = 2 Re(−i g/2 · e^{2iα})
        let prof: Vec<Complex64> = g.nodes().iter().map(|&r| Complex64::new(0.0, -0.5 * g_prof.eval(r))).collect();
        let f = PolarField::single_mode(g, 2, prof).unwrap();
        let v = solve_velocity(&f).unwrap();
        let probes = [0.3, 3.0];
        let formula = vr_mode_formula(&g_prof, 2, &probes).unwrap();
        let modes = v.eval_polar(&[(0.3, 0.0), (3.0, 0.0)]);
        for (fv, mv) in formula.iter().zip(&modes) {
            assert!(((fv.value - mv.0) / mv.0).abs() < 1e-4, "{} vs {}", fv.value, mv.0);
        }
    }

    #[test]
    fn linearity_in_amplitude() {
        let g = Arc::new(RadialGrid::log_uniform(0.01, 20.0, 500).unwrap());
        let p = RadialProfile::Bump { lo: 1.0, hi: 2.0, amp: 1.0 };
        let a = exp_decay_scan(&g, &p, &[4, 8], 1.0 / 24.0).unwrap();
        let b = exp_decay_scan(&g, &p.scaled(2.0), &[4, 8], 1.0 / 24.0).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((y.1 / x.1 - 2.0).abs() < 1e-12);
        }
        let single = exp_decay_scan(&g, &p, &[4], 1.0 / 24.0).unwrap();
        assert!(single.slope.is_none());
    }

    #[test]
    fn zero_field_gives_zero_diagnostics() {
        let g = Arc::new(RadialGrid::log_uniform(0.1, 5.0, 100).unwrap());
        let f = PolarField::zeros(g.clone(), 3, 2);
        assert_eq!(loglip_modulus(&f, 10, 1).unwrap().constant, 0.0);
        assert_eq!(vr_linf_periodic(&f).unwrap(), 0.0);
        let z = vr_mode_formula(&RadialProfile::Zero, 3, &[0.5]).unwrap();
        assert_eq!(z[0].value, 0.0);
    }

    #[test]
    fn periodic_sup_requires_symmetry() {
        let g = Arc::new(RadialGrid::log_uniform(0.1, 5.0, 100).unwrap());
        let f = PolarField::from_fn(g, 2, |k, r| Complex64::new(if k == 1 { bump(r, 1.0, 2.0) } else { 0.0 }, 0.0))
            .unwrap();
        assert!(vr_linf_periodic(&f).is_err());
    }
}
