//! Transport `∂_t ω + v_r∂_r ω + (v_α/r)∂_α ω = 0` by the method of lines.
//!
//! Spectral in α (products formed on a padded α grid), fourth-order
//! differences in r, classical RK4 in time. The radial and oscillatory parts
//! of the initial data ride along as passive tracers advected by the velocity
//! of the full solution, so their sum stays equal to ω up to rounding.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biot_savart::{BiotSavart, VelocityModes};
use crate::error::{Error, Result};
use crate::field::{AngularFft, PolarField};
use crate::sobolev::{self, SobolevSpec};
use crate::stats::ols;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub cfl: f64,
    pub dealias: bool,
    /// Amplitude of `exp(−a(m/H)^8)` applied after every step; 0 is off.
    pub filter_strength: f64,
    pub monitor_stride: usize,
    /// Fixed step; `None` derives it from the CFL bound of the initial data.
    pub dt: Option<f64>,
    /// Norms of the oscillatory part recorded at every monitor; filled from
    /// the run configuration's `[sobolev]` table.
    #[serde(skip)]
    pub sobolev: Vec<SobolevSpec>,
    /// Stop once the oscillatory part's radial wavelength drops below `4Δr`.
    pub guard: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            t_end: 1.0,
            cfl: 0.5,
            dealias: true,
            filter_strength: 0.0,
            monitor_stride: 10,
            dt: None,
            sobolev: vec![SobolevSpec::homogeneous(0.5)],
            guard: true,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.filter_strength >= 0.0) {
            return Err(Error::InvalidArgument("filter strength must be >= 0".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.monitor_stride == 0 {
            return Err(Error::InvalidArgument("monitor_stride must be >= 1".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
            }
        }
        self.sobolev.iter().try_for_each(|s| s.validate())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    Resolution,
    NonFinite,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub supp_rad: Option<(f64, f64)>,
    pub supp_osc: Option<(f64, f64)>,
    /// `‖∇ω_osc‖_∞`
    pub c1_osc: f64,
    /// Norms of `ω_osc`, one per configured spec.
    pub hs: Vec<f64>,
    /// `‖ω_rad + ω_osc − ω‖_{L²} / ‖ω‖_{L²}`
    pub additivity: f64,
    /// `‖ω_rad(t) − ω_rad(0)‖_{L²}`
    pub rad_drift_l2: f64,
    /// Energy fraction outside the multiples of the initial symmetry order.
    pub leakage: f64,
    pub pseudo_err_l2: Option<f64>,
    pub pseudo_err_rel: Option<f64>,
    pub pseudo_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRecord {
    pub rows: Vec<MonitorRow>,
    pub hs_orders: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    /// Steps that had to be split because the CFL bound tightened.
    pub cfl_reductions: usize,
    pub termination: Termination,
}

impl TrajectoryRecord {
    /// `last/first` of the `i`th Sobolev column.
    pub fn growth_factor(&self, i: usize) -> Option<f64> {
        let a = self.rows.first()?.hs.get(i)?;
        let b = self.rows.last()?.hs.get(i)?;
        (*a > 0.0).then(|| b / a)
    }

    /// Largest relative deviation of `L¹`, `L²`, `L^∞` from their initial values.
    pub fn conservation(&self) -> (f64, f64, f64) {
        let Some(first) = self.rows.first() else { return (0.0, 0.0, 0.0) };
        let dev = |g: fn(&MonitorRow) -> f64| {
            let a = g(first);
            self.rows.iter().map(|r| if a > 0.0 { (g(r) / a - 1.0).abs() } else { g(r) }).fold(0.0, f64::max)
        };
        (dev(|r| r.l1), dev(|r| r.l2), dev(|r| r.linf))
    }
}

/// Fitted `‖∇ω_osc(t)‖_∞ ≤ A·scale·e^{C·rate·t}`, with `A` raised until every
/// sample lies under the curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Envelope {
    pub a: f64,
    pub c: f64,
    pub scale: f64,
    pub rate: f64,
}

pub fn fit_envelope(record: &TrajectoryRecord, scale: f64, rate: f64) -> Option<Envelope> {
    let pts: Vec<(f64, f64)> =
        record.rows.iter().filter(|r| r.c1_osc > 0.0).map(|r| (rate * r.t, (r.c1_osc / scale).ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().cloned().unzip();
    let c = ols(&xs, &ys).slope.max(0.0);
    let ln_a = pts.iter().map(|(x, y)| y - c * x).fold(f64::NEG_INFINITY, f64::max);
    Some(Envelope { a: ln_a.exp(), c, scale, rate })
}

/// The evolving solution and the two transported parts.
#[derive(Clone, Debug)]
pub struct EvolveState {
    pub t: f64,
    pub omega: PolarField,
    pub rad: PolarField,
    pub osc: PolarField,
}

impl EvolveState {
    /// Splits `omega` into its angular mean and the rest.
    pub fn new(omega: PolarField) -> Self {
        let mut rad = omega.clone();
        for c in rad.coeffs_mut().iter_mut().skip(1) {
            c.iter_mut().for_each(|z| *z = Complex64::default());
        }
        let osc = omega.oscillatory_part();
        EvolveState { t: 0.0, omega, rad, osc }
    }
}

/// Hooks for quantities accumulated alongside the run.
pub trait Observer {
    fn start(&mut self, _state: &EvolveState) -> Result<()> {
        Ok(())
    }
    fn after_step(&mut self, _dt: f64, _state: &EvolveState) -> Result<()> {
        Ok(())
    }
    fn monitor(&mut self, _state: &EvolveState, _row: &mut MonitorRow) -> Result<()> {
        Ok(())
    }
}

impl Observer for () {}

/// Velocity sampled on nodes × the padded α grid.
struct PhysVelocity {
    vr: Vec<Vec<f64>>,
    /// `v_α / r`
    om: Vec<Vec<f64>>,
}

type Coeffs = Vec<Vec<Complex64>>;

pub struct Evolver {
    solver: BiotSavart,
    base: usize,
    harmonics: usize,
    n_alpha: usize,
    config: EvolveConfig,
}

impl Evolver {
    pub fn new(grid: Arc<crate::grid::RadialGrid>, base: usize, harmonics: usize, config: EvolveConfig) -> Result<Self> {
        config.validate()?;
        // quadratic products need 3H+1 samples to keep modes 0..H alias-free
        let n_alpha = if config.dealias { 3 * harmonics + 2 } else { 2 * harmonics + 2 };
        let n_alpha = n_alpha + n_alpha % 2;
        Ok(Evolver { solver: BiotSavart::new(grid), base, harmonics, n_alpha, config })
    }

    pub fn for_field(omega: &PolarField, config: EvolveConfig) -> Result<Self> {
        Self::new(omega.grid_arc().clone(), omega.base(), omega.harmonics(), config)
    }

    pub fn config(&self) -> &EvolveConfig {
        &self.config
    }

    fn check(&self, f: &PolarField) -> Result<()> {
        if f.base() != self.base || f.harmonics() != self.harmonics || f.grid() != &**self.solver.grid() {
            return Err(Error::InvalidArgument("field layout differs from the integrator's".into()));
        }
        Ok(())
    }

    fn phys_velocity(&self, vel: &VelocityModes) -> PhysVelocity {
        let r = self.solver.grid().nodes();
        let h = self.harmonics + 1;
        let (vr, om) = (0..r.len())
            .into_par_iter()
            .map_init(
                || (AngularFft::new(self.n_alpha), vec![Complex64::default(); h]),
                |(fft, c), i| {
                    let mut a = vec![0.0; self.n_alpha];
                    let mut b = vec![0.0; self.n_alpha];
                    for m in 0..h {
                        c[m] = vel.vr[m][i];
                    }
                    fft.synth(c, &mut a);
                    for m in 0..h {
                        c[m] = vel.valpha[m][i] / r[i];
                    }
                    fft.synth(c, &mut b);
                    (a, b)
                },
            )
            .unzip();
        PhysVelocity { vr, om }
    }

    /// `−v·∇u` in mode space.
    fn advect(&self, u: &Coeffs, pv: &PhysVelocity) -> Coeffs {
        let grid = self.solver.grid();
        let h = self.harmonics + 1;
        let n = grid.len();
        let du: Coeffs = u.iter().map(|c| grid.derivative(c)).collect();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map_init(
                || (AngularFft::new(self.n_alpha), vec![Complex64::default(); h]),
                |(fft, c), i| {
                    let mut a = vec![0.0; self.n_alpha];
                    let mut b = vec![0.0; self.n_alpha];
                    for m in 0..h {
                        c[m] = du[m][i];
                    }
                    fft.synth(c, &mut a);
                    for m in 0..h {
                        c[m] = u[m][i] * Complex64::new(0.0, (m * self.base) as f64);
                    }
                    fft.synth(c, &mut b);
                    for j in 0..self.n_alpha {
                        a[j] = -(pv.vr[i][j] * a[j] + pv.om[i][j] * b[j]);
                    }
                    let mut out = vec![Complex64::default(); h];
                    fft.analyze(&a, &mut out);
                    out
                },
            )
            .collect();
        let mut out = vec![vec![Complex64::default(); n]; h];
        for (i, row) in rows.into_iter().enumerate() {
            for m in 0..h {
                out[m][i] = row[m];
            }
        }
        out
    }

    fn field(&self, c: Coeffs) -> Result<PolarField> {
        PolarField::new(self.solver.grid().clone(), self.base, c)
    }

    /// Largest step allowed by the CFL condition for this velocity.
    pub fn dt_limit(&self, vel: &VelocityModes) -> f64 {
        let grid = self.solver.grid();
        let r = grid.nodes();
        let (vr, va) = vel.node_maxima();
        let k_max = (self.base * self.harmonics).max(1) as f64;
        let mut dt = f64::INFINITY;
        for i in 0..r.len() {
            if vr[i] > 0.0 {
                dt = dt.min(grid.dr(i) / vr[i]);
            }
            if va[i] > 0.0 {
                dt = dt.min(r[i] / (k_max * va[i]));
            }
        }
        self.config.cfl * dt
    }

    pub fn velocity(&self, omega: &PolarField) -> Result<VelocityModes> {
        self.solver.solve(omega)
    }

    /// One RK4 step of `tracers`, all advected by the velocity of `tracers[0]`
    /// (or by `imposed` if given).
    fn rk4(&self, tracers: &[&PolarField], dt: f64, imposed: Option<&VelocityModes>) -> Result<Vec<Coeffs>> {
        let y0: Vec<&[Vec<Complex64>]> = tracers.iter().map(|f| f.coeffs()).collect();
        let rhs = |y: &[Coeffs]| -> Result<Vec<Coeffs>> {
            let pv = match imposed {
                Some(v) => self.phys_velocity(v),
                None => self.phys_velocity(&self.solver.solve(&self.field(y[0].clone())?)?),
            };
            Ok(y.iter().map(|u| self.advect(u, &pv)).collect())
        };
        let combine = |k: &[Coeffs], a: f64| -> Vec<Coeffs> {
            y0.iter()
                .zip(k)
                .map(|(y, k)| {
                    y.iter().zip(k).map(|(y, k)| y.iter().zip(k).map(|(y, k)| y + k * a).collect()).collect()
                })
                .collect()
        };
        let start: Vec<Coeffs> = y0.iter().map(|y| y.to_vec()).collect();
        let k1 = rhs(&start)?;
        let k2 = rhs(&combine(&k1, 0.5 * dt))?;
        let k3 = rhs(&combine(&k2, 0.5 * dt))?;
        let k4 = rhs(&combine(&k3, dt))?;
        let mut out = start;
        for (t, y) in out.iter_mut().enumerate() {
            for m in 0..y.len() {
                for i in 0..y[m].len() {
                    y[m][i] += (k1[t][m][i] + (k2[t][m][i] + k3[t][m][i]) * 2.0 + k4[t][m][i]) * (dt / 6.0);
                }
            }
        }
        if self.config.filter_strength > 0.0 && self.harmonics > 0 {
            for y in out.iter_mut() {
                for (m, c) in y.iter_mut().enumerate() {
                    let s = (-self.config.filter_strength * (m as f64 / self.harmonics as f64).powi(8)).exp();
                    c.iter_mut().for_each(|z| *z *= s);
                }
            }
        }
        Ok(out)
    }

    /// One self-consistent RK4 step of a single field.
    pub fn step(&self, omega: &PolarField, dt: f64) -> Result<PolarField> {
        self.check(omega)?;
        let c = self.rk4(&[omega], dt, None)?.pop().unwrap();
        self.field(c)
    }

    /// One RK4 step under a prescribed velocity.
    pub fn step_imposed(&self, u: &PolarField, vel: &VelocityModes, dt: f64) -> Result<PolarField> {
        self.check(u)?;
        let c = self.rk4(&[u], dt, Some(vel))?.pop().unwrap();
        self.field(c)
    }

    fn step_state(&self, s: &EvolveState, dt: f64) -> Result<EvolveState> {
        let mut out = self.rk4(&[&s.omega, &s.rad, &s.osc], dt, None)?.into_iter();
        Ok(EvolveState {
            t: s.t + dt,
            omega: self.field(out.next().unwrap())?,
            rad: self.field(out.next().unwrap())?,
            osc: self.field(out.next().unwrap())?,
        })
    }

    /// `4Δr·κ/(2π)` for the energy-weighted radial wavenumber `κ` of the
    /// worst oscillatory mode; above 1 the radial wavelength spans fewer
    /// than four cells.
    pub fn radial_wavenumber_ratio(&self, osc: &PolarField) -> f64 {
        let grid = self.solver.grid();
        let mut worst = 0.0f64;
        for c in osc.coeffs().iter().skip(1) {
            let e: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
            let energy = grid.integrate(&e);
            if energy == 0.0 {
                continue;
            }
            let d = grid.derivative(c);
            let de: Vec<f64> = d.iter().enumerate().map(|(i, z)| z.norm_sqr() * grid.dr(i).powi(2)).collect();
            worst = worst.max(4.0 * (grid.integrate(&de) / energy).sqrt() / (2.0 * PI));
        }
        worst
    }

    fn monitor(&self, s: &EvolveState, rad0: &PolarField, obs: &mut dyn Observer) -> Result<MonitorRow> {
        let omega = &s.omega;
        let l2 = omega.lp_norm(2.0)?;
        let sum = s.rad.add(&s.osc)?;
        let additivity = sum.sub(omega)?.lp_norm(2.0)? / l2.max(f64::MIN_POSITIVE);
        let hs = self
            .config
            .sobolev
            .iter()
            .map(|spec| sobolev::norm(&s.osc, spec))
            .collect::<Result<Vec<_>>>()?;
        let threshold = |f: &PolarField| 1e-10 * f.node_maxima().into_iter().fold(0.0, f64::max);
        let mut row = MonitorRow {
            t: s.t,
            l1: omega.lp_norm(1.0)?,
            l2,
            linf: omega.lp_norm(f64::INFINITY)?,
            supp_rad: s.rad.support_annulus(threshold(&s.rad)),
            supp_osc: s.osc.support_annulus(threshold(&s.osc)),
            c1_osc: s.osc.gradient_linf(),
            hs,
            additivity,
            rad_drift_l2: s.rad.sub(rad0)?.lp_norm(2.0)?,
            leakage: 0.0,
            ..MonitorRow::default()
        };
        obs.monitor(s, &mut row)?;
        Ok(row)
    }

    /// Integrates to `t_end`. Runs that stop early return the partial record
    /// with the reason.
    pub fn run(&self, omega0: &PolarField, obs: &mut dyn Observer) -> Result<(EvolveState, TrajectoryRecord)> {
        self.run_state(EvolveState::new(omega0.clone()), obs)
    }

    pub fn run_state(&self, state: EvolveState, obs: &mut dyn Observer) -> Result<(EvolveState, TrajectoryRecord)> {
        self.check(&state.omega)?;
        self.check(&state.rad)?;
        self.check(&state.osc)?;
        let cfg = &self.config;
        let rad0 = state.rad.clone();
        let vel0 = self.solver.solve(&state.omega)?;
        let dt_nominal = cfg.dt.unwrap_or_else(|| self.dt_limit(&vel0));
        let (steps, dt) = if cfg.t_end == 0.0 || !dt_nominal.is_finite() {
            (usize::from(cfg.t_end > 0.0), cfg.t_end)
        } else {
            let steps = (cfg.t_end / dt_nominal * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            (steps, cfg.t_end / steps as f64)
        };
        obs.start(&state)?;
        let mut record = TrajectoryRecord {
            rows: vec![self.monitor(&state, &rad0, obs)?],
            hs_orders: cfg.sobolev.iter().map(|s| s.s).collect(),
            dt,
            steps: 0,
            cfl_reductions: 0,
            termination: Termination::Completed,
        };
        let t0 = state.t;
        let mut state = state;
        for n in 1..=steps {
            let limit = if cfg.dt.is_some() { f64::INFINITY } else { self.dt_limit(&self.solver.solve(&state.omega)?) };
            let sub = if dt <= limit { 1 } else { (dt / limit).ceil() as usize };
            if sub > 1 {
                record.cfl_reductions += 1;
            }
            for j in 0..sub {
                let mut next = self.step_state(&state, dt / sub as f64)?;
                if j + 1 == sub {
                    next.t = t0 + n as f64 * dt;
                }
                state = next;
                obs.after_step(dt / sub as f64, &state)?;
            }
            record.steps = n;
            let finite = state.omega.coeffs().iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite());
            if !finite {
                record.termination = Termination::NonFinite;
                break;
            }
            let resolved = !cfg.guard || self.radial_wavenumber_ratio(&state.osc) <= 1.0;
            if n % cfg.monitor_stride == 0 || n == steps || !resolved {
                record.rows.push(self.monitor(&state, &rad0, obs)?);
            }
            if !resolved {
                record.termination = Termination::Resolution;
                break;
            }
        }
        Ok((state, record))
    }
}

/// Energy fraction in wavenumbers that are not multiples of `n`.
pub fn symmetry_leakage(field: &PolarField, n: usize) -> f64 {
    let e = field.mode_energies();
    let total: f64 = e.iter().map(|x| x.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    e.iter().filter(|(k, _)| k % n != 0).map(|x| x.1).sum::<f64>() / total
}

/// Convenience wrapper: build an [`Evolver`] for `omega0` and run it.
pub fn run(omega0: &PolarField, config: &EvolveConfig) -> Result<(EvolveState, TrajectoryRecord)> {
    Evolver::for_field(omega0, config.clone())?.run(omega0, &mut ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::profiles::bump;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::log_with_step(0.3, 3.0, 0.01).unwrap())
    }

    fn quiet() -> EvolveConfig {
        EvolveConfig { sobolev: vec![], ..EvolveConfig::default() }
    }

    #[test]
    fn radial_field_is_steady() {
        let g = grid();
        let mut f = PolarField::zeros(g.clone(), 1, 4);
        for (i, r) in g.nodes().iter().enumerate() {
            f.coeffs_mut()[0][i] = Complex64::new(bump(*r, 0.5, 2.5), 0.0);
        }
        let ev = Evolver::for_field(&f, quiet()).unwrap();
        let next = ev.step(&f, 0.05).unwrap();
        let diff = next.sub(&f).unwrap().lp_norm(f64::INFINITY).unwrap();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn solid_rotation_returns_after_one_period() {
        let g = grid();
        let n = g.len();
        let mut f = PolarField::zeros(g.clone(), 1, 6);
        for (i, r) in g.nodes().iter().enumerate() {
            f.coeffs_mut()[1][i] = Complex64::new(0.5 * bump(*r, 0.6, 2.0), 0.0);
        }
        let zero = vec![vec![Complex64::default(); n]; 7];
        let mut va = zero.clone();
        va[0] = g.nodes().iter().map(|r| Complex64::new(*r, 0.0)).collect();
        let vel = VelocityModes::from_components(g.clone(), 1, zero, va).unwrap();
        let ev = Evolver::for_field(&f, quiet()).unwrap();
        let steps = 400;
        let dt = 2.0 * PI / steps as f64;
        let mut u = f.clone();
        for _ in 0..steps {
            u = ev.step_imposed(&u, &vel, dt).unwrap();
        }
        let err = u.sub(&f).unwrap().lp_norm(2.0).unwrap() / f.lp_norm(2.0).unwrap();
        assert!(err < 1e-6, "{err}");
        let quarter = (0..steps / 4).fold(f.clone(), |u, _| ev.step_imposed(&u, &vel, dt).unwrap());
        let rotated = f.rotate(PI / 2.0);
        assert!(quarter.sub(&rotated).unwrap().lp_norm(2.0).unwrap() < 1e-6);
    }

    fn wavy(base: usize) -> PolarField {
        let g = grid();
        let mut f = PolarField::zeros(g.clone(), base, 3);
        for (i, r) in g.nodes().iter().enumerate() {
            f.coeffs_mut()[0][i] = Complex64::new(bump(*r, 0.4, 2.8), 0.0);
            f.coeffs_mut()[1][i] = Complex64::new(0.2 * bump(*r, 0.8, 2.0), 0.1 * bump(*r, 0.9, 1.8));
        }
        f
    }

    #[test]
    fn zero_field_stays_zero() {
        let f = PolarField::zeros(grid(), 2, 3);
        let (end, rec) = run(&f, &EvolveConfig { t_end: 0.2, ..quiet() }).unwrap();
        assert_eq!(rec.termination, Termination::Completed);
        assert!(end.omega.coeffs().iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn parts_add_up_and_norms_hold() {
        let f = wavy(3);
        let cfg = EvolveConfig { t_end: 0.5, monitor_stride: 5, ..quiet() };
        let (end, rec) = run(&f, &cfg).unwrap();
        assert_eq!(rec.termination, Termination::Completed);
        assert!((end.t - 0.5).abs() < 1e-14);
        for row in &rec.rows {
            assert!(row.additivity < 1e-12, "{}", row.additivity);
        }
        let (l1, l2, linf) = rec.conservation();
        assert!(l1 < 1e-3 && l2 < 1e-3 && linf < 1e-3, "{l1} {l2} {linf}");
        assert!(rec.rows.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn symmetric_data_stays_symmetric() {
        let f = wavy(3).to_base(1).unwrap();
        let cfg = EvolveConfig { t_end: 0.2, ..quiet() };
        let (end, _) = run(&f, &cfg).unwrap();
        assert!(symmetry_leakage(&end.omega, 3) < 1e-20);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let f = wavy(2);
        let t_end = 0.4;
        let at = |steps: usize| {
            let cfg = EvolveConfig { t_end, dt: Some(t_end / steps as f64), ..quiet() };
            run(&f, &cfg).unwrap().0.omega
        };
        let (a, b, c) = (at(10), at(20), at(40));
        let e1 = a.sub(&b).unwrap().lp_norm(2.0).unwrap();
        let e2 = b.sub(&c).unwrap().lp_norm(2.0).unwrap();
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "{order}");
    }

    #[test]
    fn rejects_bad_config() {
        assert!(EvolveConfig { cfl: 1.5, ..EvolveConfig::default() }.validate().is_err());
        assert!(EvolveConfig { filter_strength: -1.0, ..EvolveConfig::default() }.validate().is_err());
    }
}
