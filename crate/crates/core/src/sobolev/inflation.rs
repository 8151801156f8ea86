//! Growth of `‖ω_osc(t)‖_{Ḣ^{β′}}` along a run, against the local-wavenumber
//! prediction built from the measured phase gradient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::TrajectoryRecord;
use crate::pseudo::PseudoState;

#[derive(Clone, Debug, Serialize)]
pub struct InflationReport {
    pub beta_prime: f64,
    pub times: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted: Vec<f64>,
    /// `measured(t_end) / measured(0)`
    pub growth_factor: f64,
    /// Nondecreasing after the first 10% of the run.
    pub monotone_after_transient: bool,
    /// Largest `max(m/p, p/m)` over the monitors.
    pub worst_prediction_ratio: f64,
}

/// `predictions` holds `(t, values)` rows whose `column` is the order `β′`,
/// one per monitor row of `record`.
pub fn inflation_measure(
    record: &TrajectoryRecord,
    predictions: &[(f64, Vec<f64>)],
    column: usize,
    beta_prime: f64,
) -> Result<InflationReport> {
    let idx = record
        .hs_orders
        .iter()
        .position(|s| (s - beta_prime).abs() < 1e-12)
        .ok_or_else(|| Error::InvalidArgument(format!("run did not monitor the order {beta_prime}")))?;
    if predictions.len() != record.rows.len() {
        return Err(Error::Contract("predictions and monitor rows are out of step".into()));
    }
    let times: Vec<f64> = record.rows.iter().map(|r| r.t).collect();
    let measured: Vec<f64> = record.rows.iter().map(|r| r.hs[idx]).collect();
    let predicted: Vec<f64> = predictions.iter().map(|p| p.1[column]).collect();
    let growth_factor = match (measured.first(), measured.last()) {
        (Some(a), Some(b)) if *a > 0.0 => b / a,
        _ => 1.0,
    };
    let t_end = times.last().copied().unwrap_or(0.0);
    let after: Vec<f64> = times.iter().zip(&measured).filter(|(t, _)| **t >= 0.1 * t_end).map(|x| *x.1).collect();
    let monotone_after_transient = after.windows(2).all(|w| w[1] >= w[0]);
    let worst_prediction_ratio = measured
        .iter()
        .zip(&predicted)
        .filter(|(m, p)| **m > 0.0 && **p > 0.0)
        .map(|(m, p)| (m / p).max(p / m))
        .fold(1.0, f64::max);
    Ok(InflationReport {
        beta_prime,
        times,
        measured,
        predicted,
        growth_factor,
        monotone_after_transient,
        worst_prediction_ratio,
    })
}

/// Hankel norm of the pseudosolution's oscillation next to its
/// local-wavenumber prediction.
pub fn pseudo_model_check(state: &PseudoState, s: f64) -> Result<(f64, f64)> {
    let measured = super::norm(&state.eval_osc()?, &super::SobolevSpec::homogeneous(s))?;
    Ok((measured, state.predicted_norm(s)))
}
