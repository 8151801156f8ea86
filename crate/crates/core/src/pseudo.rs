//! Pseudosolution: the stationary radial part plus the initial oscillation
//! with its angle shifted by the accumulated angular velocity of `Aω`,
//! `Φ(r,t) = ∫₀ᵗ v_α[Aω](r,s)/r ds`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::biot_savart::BiotSavart;
use crate::error::{Error, Result};
use crate::evolve::{EvolveState, MonitorRow, Observer};
use crate::field::PolarField;
use crate::grid::RadialGrid;

#[derive(Clone, Debug)]
pub struct PseudoState {
    /// Initial data; its wavenumber-`N` profile is the one being rotated.
    initial: PolarField,
    n: usize,
    /// `λ^{2−2β}N^{−β}log N`
    bound: f64,
    pub phase: Vec<f64>,
    /// `Φ` under the angular velocity of the initial radial part alone.
    pub frozen_rate: Vec<f64>,
    pub t: f64,
    last_rate: Vec<f64>,
    solver: Arc<BiotSavart>,
}

fn angular_rate(solver: &BiotSavart, omega: &PolarField) -> Vec<f64> {
    let a: Vec<f64> = omega.coeffs()[0].iter().map(|z| z.re).collect();
    solver.radial_valpha(&a).iter().zip(solver.grid().nodes()).map(|(v, r)| v / r).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoError {
    pub t: f64,
    pub l2: f64,
    /// Relative to `‖ω̄_osc‖_{L²}`.
    pub rel: f64,
    pub bound: f64,
}

impl PseudoState {
    /// `initial` must store wavenumber `n` (its oscillation) at mode index 1.
    pub fn new(initial: &PolarField, n: usize, lambda: f64, beta: f64) -> Result<Self> {
        if initial.base() != n || initial.harmonics() == 0 {
            return Err(Error::InvalidArgument(format!("initial data is not stored on base N = {n}")));
        }
        let solver = Arc::new(BiotSavart::new(initial.grid_arc().clone()));
        let rate = angular_rate(&solver, initial);
        let bound = lambda.powf(2.0 - 2.0 * beta) * (n as f64).powf(-beta) * (n as f64).ln();
        Ok(PseudoState {
            initial: initial.clone(),
            n,
            bound,
            phase: vec![0.0; rate.len()],
            frozen_rate: rate.clone(),
            t: 0.0,
            last_rate: rate,
            solver,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.solver.grid()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Trapezoidal update from the previous solver state to `omega_now` at
    /// time `t_now = t + dt`.
    pub fn advance_phase(&mut self, omega_now: &PolarField, t_now: f64, dt: f64) -> Result<()> {
        if (self.t + dt - t_now).abs() > 1e-9 * (1.0 + t_now.abs()) {
            return Err(Error::Contract(format!(
                "phase at t = {} advanced by {dt} does not reach the solver time {t_now}",
                self.t
            )));
        }
        let rate = angular_rate(&self.solver, omega_now);
        for ((p, a), b) in self.phase.iter_mut().zip(&self.last_rate).zip(&rate) {
            *p += 0.5 * dt * (a + b);
        }
        self.last_rate = rate;
        self.t = t_now;
        Ok(())
    }

    /// `ω̄ = ω̄_rad + ω̄_osc` with the oscillation rotated by `Φ(r)`.
    pub fn eval(&self) -> Result<PolarField> {
        let mut out = self.initial.clone();
        let nf = self.n as f64;
        for (z, p) in out.coeffs_mut()[1].iter_mut().zip(&self.phase) {
            *z *= Complex64::from_polar(1.0, -nf * p);
        }
        for c in out.coeffs_mut().iter_mut().skip(2) {
            c.iter_mut().for_each(|z| *z = Complex64::default());
        }
        Ok(out)
    }

    pub fn eval_osc(&self) -> Result<PolarField> {
        Ok(self.eval()?.oscillatory_part())
    }

    pub fn error(&self, omega_osc: &PolarField, t: f64) -> Result<PseudoError> {
        if (t - self.t).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(Error::Contract(format!("pseudo state at t = {} compared at t = {t}", self.t)));
        }
        let bar = self.eval_osc()?;
        let l2 = omega_osc.sub(&bar)?.lp_norm(2.0)?;
        let norm = bar.lp_norm(2.0)?;
        Ok(PseudoError { t, l2, rel: if norm > 0.0 { l2 / norm } else { 0.0 }, bound: self.bound })
    }

    /// `max_r N|Φ − t·Ω[ω̄_rad]|` over the support of the oscillation.
    pub fn frozen_phase_gap(&self) -> f64 {
        let c = &self.initial.coeffs()[1];
        let amp = c.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        (0..c.len())
            .filter(|&i| c[i].norm() > 1e-8 * amp)
            .map(|i| self.n as f64 * (self.phase[i] - self.t * self.frozen_rate[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Local-wavenumber estimate of `‖ω̄_osc‖_{Ḣ^s}`:
    /// `(2π·2∫|c_N|²((N/r)² + (N∂_rΦ)²)^s r dr)^{1/2}`.
    pub fn predicted_norm(&self, s: f64) -> f64 {
        let grid = self.grid();
        let r = grid.nodes();
        let c = &self.initial.coeffs()[1];
        let dphi = grid.derivative(&self.phase);
        let nf = self.n as f64;
        let v: Vec<f64> = (0..r.len())
            .map(|i| c[i].norm_sqr() * ((nf / r[i]).powi(2) + (nf * dphi[i]).powi(2)).powf(s))
            .collect();
        (4.0 * std::f64::consts::PI * grid.integrate(&v)).sqrt()
    }
}

/// Runs the phase alongside [`crate::evolve::Evolver::run`] and fills the
/// pseudo-error columns.
pub struct PseudoTracker {
    pub state: PseudoState,
    /// Orders whose predicted norm is recorded.
    pub orders: Vec<f64>,
    pub predictions: Vec<(f64, Vec<f64>)>,
    pub frozen_gap: Vec<(f64, f64)>,
}

impl PseudoTracker {
    pub fn new(state: PseudoState, orders: Vec<f64>) -> Self {
        PseudoTracker { state, orders, predictions: Vec::new(), frozen_gap: Vec::new() }
    }
}

impl Observer for PseudoTracker {
    fn start(&mut self, state: &EvolveState) -> Result<()> {
        if state.t != self.state.t {
            return Err(Error::Contract("pseudo state and run start at different times".into()));
        }
        self.state.last_rate = angular_rate(&self.state.solver, &state.omega);
        Ok(())
    }

    fn after_step(&mut self, dt: f64, state: &EvolveState) -> Result<()> {
        self.state.advance_phase(&state.omega, state.t, dt)
    }

    fn monitor(&mut self, state: &EvolveState, row: &mut MonitorRow) -> Result<()> {
        let e = self.state.error(&state.osc, state.t)?;
        row.pseudo_err_l2 = Some(e.l2);
        row.pseudo_err_rel = Some(e.rel);
        row.pseudo_bound = Some(e.bound);
        self.predictions.push((state.t, self.orders.iter().map(|&s| self.state.predicted_norm(s)).collect()));
        self.frozen_gap.push((state.t, self.state.frozen_phase_gap()));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{assemble_initial, ConstructionParams, GSpec};
    use crate::evolve::{EvolveConfig, Evolver};

    fn desk() -> (PolarField, ConstructionParams, usize) {
        let params = ConstructionParams::default();
        let init = assemble_initial(&params).unwrap();
        (init.field, params, init.n)
    }

    #[test]
    fn zero_phase_reproduces_initial_data() {
        let (f, p, n) = desk();
        let st = PseudoState::new(&f, n, p.lambda, p.beta).unwrap();
        assert_eq!(st.eval().unwrap(), f);
        let e = st.error(&f.oscillatory_part(), 0.0).unwrap();
        assert_eq!(e.l2, 0.0);
    }

    #[test]
    fn constant_phase_is_a_rotation() {
        let (f, p, n) = desk();
        let mut st = PseudoState::new(&f, n, p.lambda, p.beta).unwrap();
        st.phase.iter_mut().for_each(|x| *x = 0.3);
        let rotated = f.rotate(0.3);
        let got = st.eval().unwrap();
        let d = got.sub(&rotated).unwrap().lp_norm(2.0).unwrap();
        assert!(d < 1e-12 * f.lp_norm(2.0).unwrap());
    }

    #[test]
    fn steady_radial_phase_is_linear() {
        let (f, p, n) = desk();
        let mut st = PseudoState::new(&f, n, p.lambda, p.beta).unwrap();
        let radial = f.angular_average();
        let base = PolarField::new(f.grid_arc().clone(), n, {
            let mut c = vec![radial.coeffs()[0].clone()];
            c.extend(f.coeffs().iter().skip(1).map(|v| vec![Complex64::default(); v.len()]));
            c
        })
        .unwrap();
        for j in 1..=5 {
            st.advance_phase(&base, 0.1 * j as f64, 0.1).unwrap();
        }
        for (p, w) in st.phase.iter().zip(&st.frozen_rate) {
            assert!((p - 0.5 * w).abs() <= 1e-12 * (1.0 + w.abs()));
        }
        assert!(st.advance_phase(&base, 2.0, 0.1).is_err());
    }

    #[test]
    fn phase_preserves_l2() {
        let (f, p, n) = desk();
        let mut st = PseudoState::new(&f, n, p.lambda, p.beta).unwrap();
        let a = st.eval_osc().unwrap().lp_norm(2.0).unwrap();
        st.phase = st.grid().nodes().iter().map(|r| 7.0 * r.ln()).collect();
        let b = st.eval_osc().unwrap().lp_norm(2.0).unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_oscillation_no_error() {
        let params = ConstructionParams { g: GSpec { enabled: false, ..GSpec::default() }, ..ConstructionParams::default() };
        let init = assemble_initial(&params).unwrap();
        let st = PseudoState::new(&init.field, init.n, params.lambda, params.beta).unwrap();
        let mut tracker = PseudoTracker::new(st, vec![0.5]);
        let cfg = EvolveConfig { t_end: 0.1, sobolev: vec![], ..EvolveConfig::default() };
        let (_, rec) = Evolver::for_field(&init.field, cfg).unwrap().run(&init.field, &mut tracker).unwrap();
        assert!(rec.rows.iter().all(|r| r.pseudo_err_l2 == Some(0.0)));
    }

    #[test]
    fn phase_converges_in_dt() {
        let (f, p, n) = desk();
        let at = |dt: f64| {
            let st = PseudoState::new(&f, n, p.lambda, p.beta).unwrap();
            let mut tr = PseudoTracker::new(st, vec![]);
            let cfg = EvolveConfig { t_end: 0.25, dt: Some(dt), sobolev: vec![], ..EvolveConfig::default() };
            Evolver::for_field(&f, cfg).unwrap().run(&f, &mut tr).unwrap();
            tr.state.phase
        };
        let coarse = at(0.25 / 32.0);
        let fine = at(0.25 / 128.0);
        let scale = fine.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let diff = coarse.iter().zip(&fine).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(diff <= 1e-6 * scale, "{diff} vs {scale}");
    }
}
