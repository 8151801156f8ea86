//! Command implementations behind the `polar-euler` binary. Each command
//! writes its artifacts under an output directory and returns a summary plus
//! an [`Outcome`] that maps onto the process exit code.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::biot_savart::{self, DecayTable, LogLipReport};
use crate::config::{RunConfig, SweepAxis, SweepMode};
use crate::construction::{assemble_initial, build_g, ConstructionReport, Initial};
use crate::error::{Error, Result};
use crate::evolve::{fit_envelope, Envelope, EvolveState, Evolver, MonitorRow, Observer, Termination, TrajectoryRecord};
use crate::field::PolarField;
use crate::gluing::{self, GluedBound, PairInteraction, PieceSummary};
use crate::grid::RadialGrid;
use crate::io::{self, num, opt};
use crate::profiles::RadialProfile;
use crate::pseudo::{PseudoState, PseudoTracker};
use crate::sobolev::{self, inflation::InflationReport, SobolevSpec};
use crate::stats::{loglog, ols, Fit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    VerificationFailed,
    ResolutionExhausted,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 2,
            Outcome::ResolutionExhausted => 3,
        }
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 4,
        Error::Verification(_) => 2,
        Error::Resolution(_) => 3,
        _ => 1,
    }
}

fn run_id(command: &str, hash: &str) -> String {
    format!("{command}-{}", &hash[..12])
}

#[derive(Clone, Debug, Serialize)]
pub struct Stamp {
    pub run_id: String,
    pub config_hash: String,
    pub seed: u64,
}

fn stamp(command: &str, cfg: &RunConfig) -> Result<Stamp> {
    let config_hash = cfg.hash()?;
    Ok(Stamp { run_id: run_id(command, &config_hash), config_hash, seed: cfg.seed })
}

fn write_config(cfg: &RunConfig, out: &Path) -> Result<()> {
    io::write_atomic(&out.join("config.toml"), cfg.to_toml()?.as_bytes())
}

// ---------------------------------------------------------------- build

#[derive(Clone, Debug, Serialize)]
pub struct BuildSummary {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub report: ConstructionReport,
}

pub fn cmd_build(cfg: &RunConfig, out: &Path) -> Result<(BuildSummary, Outcome)> {
    let init = assemble_initial(&cfg.construction)?;
    write_config(cfg, out)?;
    io::write_atomic(&out.join("field.json"), init.field.to_json()?.as_bytes())?;
    let summary = BuildSummary { stamp: stamp("build", cfg)?, report: init.report };
    io::write_json(&out.join("build_report.json"), &summary)?;
    let outcome = if summary.report.valid { Outcome::Success } else { Outcome::VerificationFailed };
    Ok((summary, outcome))
}

// ---------------------------------------------------------------- evolve

/// Forwards to an inner observer and writes a field checkpoint every
/// `stride` monitor rows.
struct Checkpoints<'a, O: Observer> {
    inner: &'a mut O,
    stride: Option<usize>,
    dir: PathBuf,
    seen: usize,
}

impl<O: Observer> Observer for Checkpoints<'_, O> {
    fn start(&mut self, state: &EvolveState) -> Result<()> {
        self.inner.start(state)
    }
    fn after_step(&mut self, dt: f64, state: &EvolveState) -> Result<()> {
        self.inner.after_step(dt, state)
    }
    fn monitor(&mut self, state: &EvolveState, row: &mut MonitorRow) -> Result<()> {
        self.inner.monitor(state, row)?;
        if let Some(k) = self.stride {
            if self.seen % k == 0 {
                let p = self.dir.join(format!("checkpoint_{:05}.json", self.seen));
                io::write_atomic(&p, state.omega.to_json()?.as_bytes())?;
            }
        }
        self.seen += 1;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFactor {
    pub s: f64,
    pub factor: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Conservation {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveSummary {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub termination: Termination,
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub cfl_reductions: usize,
    pub n: usize,
    pub initial_valid: bool,
    pub growth_factors: Vec<GrowthFactor>,
    /// Largest relative drift of each norm over the monitors.
    pub conservation: Conservation,
    pub envelope: Option<Envelope>,
    pub final_pseudo_err_rel: Option<f64>,
    pub frozen_phase_gap: Option<f64>,
    pub inflation: Option<InflationReport>,
    pub exp_decay: Option<DecayTable>,
    pub loglip: Option<LogLipReport>,
}

/// Everything an evolve run produces, before anything touches the disk.
pub struct EvolveRun {
    pub initial: Initial,
    pub state: EvolveState,
    pub record: TrajectoryRecord,
    pub predicted_orders: Vec<f64>,
    pub predictions: Vec<(f64, Vec<f64>)>,
    pub summary: EvolveSummary,
}

pub fn evolve_run(cfg: &RunConfig, checkpoint_dir: Option<&Path>) -> Result<EvolveRun> {
    let params = &cfg.construction;
    let init = assemble_initial(params)?;
    let ecfg = cfg.evolve_config();
    let orders: Vec<f64> = ecfg.sobolev.iter().map(|s| s.s).collect();
    let evolver = Evolver::for_field(&init.field, ecfg)?;
    let mut tracker = if cfg.diagnostics.pseudo {
        let st = PseudoState::new(&init.field, init.n, params.lambda, params.beta)?;
        let predicted = if cfg.diagnostics.inflation { orders.clone() } else { vec![] };
        Some(PseudoTracker::new(st, predicted))
    } else {
        None
    };
    let stride = checkpoint_dir.and(cfg.output.checkpoint_stride);
    let dir = checkpoint_dir.map(Path::to_path_buf).unwrap_or_default();
    let (state, record) = match tracker.as_mut() {
        Some(t) => evolver.run(&init.field, &mut Checkpoints { inner: t, stride, dir, seen: 0 })?,
        None => evolver.run(&init.field, &mut Checkpoints { inner: &mut (), stride, dir, seen: 0 })?,
    };

    let (l1, l2, linf) = record.conservation();
    let scale = params.lambda.powf(2.0 - params.beta) * (init.n as f64).powf(1.0 - params.beta);
    let rate = params.lambda.powf(1.0 - params.beta);
    let (predicted_orders, predictions) =
        tracker.as_ref().map(|t| (t.orders.clone(), t.predictions.clone())).unwrap_or_default();
    let beta_prime = params.beta_prime.unwrap_or(params.beta);
    let inflation = match (&tracker, predicted_orders.iter().position(|s| (s - beta_prime).abs() < 1e-12)) {
        (Some(_), Some(col)) if cfg.diagnostics.inflation => {
            Some(sobolev::inflation::inflation_measure(&record, &predictions, col, beta_prime)?)
        }
        _ => None,
    };
    let exp_decay = if cfg.diagnostics.exp_decay { Some(decay_table(cfg)?) } else { None };
    let loglip = if cfg.diagnostics.loglip {
        Some(biot_savart::loglip_modulus(&init.field, cfg.loglip.pairs, cfg.seed)?)
    } else {
        None
    };
    let summary = EvolveSummary {
        stamp: stamp("evolve", cfg)?,
        termination: record.termination,
        t_final: state.t,
        steps: record.steps,
        dt: record.dt,
        cfl_reductions: record.cfl_reductions,
        n: init.n,
        initial_valid: init.report.valid,
        growth_factors: orders
            .iter()
            .enumerate()
            .map(|(i, &s)| GrowthFactor { s, factor: record.growth_factor(i) })
            .collect(),
        conservation: Conservation { l1, l2, linf },
        envelope: fit_envelope(&record, scale, rate),
        final_pseudo_err_rel: record.rows.last().and_then(|r| r.pseudo_err_rel),
        frozen_phase_gap: tracker.as_ref().and_then(|t| t.frozen_gap.last().map(|g| g.1)),
        inflation,
        exp_decay,
        loglip,
    };
    Ok(EvolveRun { initial: init, state, record, predicted_orders, predictions, summary })
}

fn termination_outcome(t: Termination) -> Outcome {
    match t {
        Termination::Completed => Outcome::Success,
        Termination::Resolution | Termination::NonFinite => Outcome::ResolutionExhausted,
    }
}

/// Writes `trajectory.csv`, `summary.json` and the final field. A run cut
/// short by the resolution guard keeps the rows it produced.
pub fn cmd_evolve(cfg: &RunConfig, out: &Path) -> Result<(EvolveSummary, Outcome)> {
    write_config(cfg, out)?;
    let run = evolve_run(cfg, Some(out))?;
    write_evolve_outputs(&run, out)?;
    let mut outcome = termination_outcome(run.record.termination);
    if outcome == Outcome::Success && !run.initial.report.valid {
        outcome = Outcome::VerificationFailed;
    }
    Ok((run.summary, outcome))
}

fn write_evolve_outputs(run: &EvolveRun, out: &Path) -> Result<()> {
    let csv = io::trajectory_csv(&run.record, &run.predicted_orders, &run.predictions)?;
    io::write_atomic(&out.join("trajectory.csv"), &csv)?;
    io::write_atomic(&out.join("field_final.json"), run.state.omega.to_json()?.as_bytes())?;
    io::write_json(&out.join("summary.json"), &run.summary)
}

// ---------------------------------------------------------------- sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// `ln metric` against `ln value`.
    LogLog,
    /// `ln metric` against `value`.
    SemiLog,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub n: Option<usize>,
    pub metric: Option<f64>,
    /// Growth factor of the first monitored order (evolve mode).
    pub growth: Option<f64>,
    pub status: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub axis: SweepAxis,
    pub mode: SweepMode,
    pub metric: &'static str,
    pub fit_kind: FitKind,
    pub rows: Vec<SweepRow>,
    pub fit: Option<Fit>,
    /// Log-log fit of `metric / ln N` (`vr-scaling` mode).
    pub log_corrected_fit: Option<Fit>,
    pub failed: usize,
}

fn metric_name(mode: SweepMode) -> &'static str {
    match mode {
        SweepMode::Evolve => "pseudo_err_rel_final",
        SweepMode::Build => "h_beta_initial",
        SweepMode::ExpDecay => "vr_max_at_probe",
        SweepMode::VrScaling => "vr_sup_support",
        SweepMode::NegNorm => "neg_norm",
    }
}

fn as_count(v: f64, what: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!("{what} axis needs positive integers, got {v}")))
    }
}

/// Config for one sweep point.
pub fn sweep_point(cfg: &RunConfig, value: f64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    match c.sweep.axis {
        SweepAxis::Lambda => c.construction.lambda = value,
        SweepAxis::N => c.construction.n = Some(as_count(value, "N")?),
        SweepAxis::Beta => c.construction.beta = value,
        SweepAxis::S => c.sobolev.orders = vec![value],
        SweepAxis::K => {}
    }
    Ok(c)
}

fn bump_profile(lo: f64, hi: f64) -> RadialProfile {
    RadialProfile::Bump { lo, hi, amp: 1.0 }
}

/// `max_α|v_r|` at the probe radius for `g(r)cos(Nα)`, one wavenumber.
fn decay_grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>> {
    let d = &cfg.decay;
    let lo = d.r_probe.min(d.g_lo) * 0.9;
    Ok(Arc::new(RadialGrid::log_uniform(lo, d.g_hi * 1.05, d.nodes)?))
}

pub fn decay_table(cfg: &RunConfig) -> Result<DecayTable> {
    let d = &cfg.decay;
    biot_savart::exp_decay_scan(&decay_grid(cfg)?, &bump_profile(d.g_lo, d.g_hi), &d.n_list, d.r_probe)
}

fn vr_sup(cfg: &RunConfig, n: usize) -> Result<f64> {
    let d = &cfg.decay;
    let grid = Arc::new(RadialGrid::log_uniform(d.g_lo * 0.95, d.g_hi * 1.05, d.nodes)?);
    let g = bump_profile(d.g_lo, d.g_hi);
    let profile: Vec<Complex64> = grid.nodes().iter().map(|&r| Complex64::new(0.5 * g.eval(r), 0.0)).collect();
    biot_savart::vr_linf_periodic(&PolarField::single_mode(grid, n, profile)?)
}

fn neg_norm(cfg: &RunConfig, k: f64) -> Result<f64> {
    let nc = &cfg.negnorm;
    let (g, _) = build_g(&nc.g)?;
    let scan = sobolev::neg_norm_scan(&g, &|r| r, &|_| 0.0, &[k], nc.n, nc.eta)?;
    Ok(scan.rows[0].1)
}

fn sweep_one(cfg: &RunConfig, index: usize, value: f64, out: &Path) -> SweepRow {
    let mut row =
        SweepRow { index, value, n: None, metric: None, growth: None, status: "ok".into(), error: None };
    let result = (|| -> Result<()> {
        let c = sweep_point(cfg, value)?;
        match cfg.sweep.mode {
            SweepMode::Evolve => {
                let dir = out.join(format!("run_{index:03}"));
                write_config(&c, &dir)?;
                let run = evolve_run(&c, Some(&dir))?;
                write_evolve_outputs(&run, &dir)?;
                row.n = Some(run.initial.n);
                row.metric = run.summary.final_pseudo_err_rel;
                row.growth = run.record.growth_factor(0);
                if run.record.termination != Termination::Completed {
                    row.status = format!("{:?}", run.record.termination).to_lowercase();
                }
            }
            SweepMode::Build => {
                let init = assemble_initial(&c.construction)?;
                row.n = Some(init.n);
                row.metric = Some(init.report.h_beta);
                if !init.report.valid {
                    row.status = "invalid".into();
                }
            }
            SweepMode::ExpDecay | SweepMode::VrScaling => {
                if cfg.sweep.axis != SweepAxis::N {
                    return Err(Error::Config("velocity scans sweep the N axis".into()));
                }
                let n = as_count(value, "N")?;
                row.n = Some(n);
                row.metric = Some(if cfg.sweep.mode == SweepMode::ExpDecay {
                    let d = &c.decay;
                    let t = biot_savart::exp_decay_scan(&decay_grid(&c)?, &bump_profile(d.g_lo, d.g_hi), &[n], d.r_probe)?;
                    t.rows[0].1
                } else {
                    vr_sup(&c, n)?
                });
            }
            SweepMode::NegNorm => {
                if cfg.sweep.axis != SweepAxis::K {
                    return Err(Error::Config("neg-norm sweeps the K axis".into()));
                }
                row.n = Some(c.negnorm.n);
                row.metric = Some(neg_norm(&c, value)?);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.status = "failed".into();
        row.error = Some(e.to_string());
    }
    row
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path, workers: usize) -> Result<(SweepSummary, Outcome)> {
    write_config(cfg, out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let values = cfg.sweep.values.clone();
    let rows: Vec<SweepRow> =
        pool.install(|| values.par_iter().enumerate().map(|(i, &v)| sweep_one(cfg, i, v, out)).collect());

    let fit_kind = if cfg.sweep.mode == SweepMode::ExpDecay { FitKind::SemiLog } else { FitKind::LogLog };
    let good: Vec<(f64, f64, Option<usize>)> = rows
        .iter()
        .filter(|r| r.error.is_none())
        .filter_map(|r| r.metric.filter(|m| *m > 0.0).map(|m| (r.value, m, r.n)))
        .collect();
    let (fit, log_corrected_fit) = if good.len() >= 2 {
        let xs: Vec<f64> = good.iter().map(|g| g.0).collect();
        let ys: Vec<f64> = good.iter().map(|g| g.1).collect();
        let fit = match fit_kind {
            FitKind::LogLog => loglog(&xs, &ys),
            FitKind::SemiLog => ols(&xs, &ys.iter().map(|y| y.ln()).collect::<Vec<_>>()),
        };
        let corrected = (cfg.sweep.mode == SweepMode::VrScaling).then(|| {
            let yc: Vec<f64> = good.iter().map(|g| g.1 / (g.0).ln()).collect();
            loglog(&xs, &yc)
        });
        (Some(fit), corrected)
    } else {
        (None, None)
    };
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let summary = SweepSummary {
        stamp: stamp("sweep", cfg)?,
        axis: cfg.sweep.axis,
        mode: cfg.sweep.mode,
        metric: metric_name(cfg.sweep.mode),
        fit_kind,
        rows,
        fit,
        log_corrected_fit,
        failed,
    };
    let table: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                num(r.value),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                opt(r.metric),
                opt(r.growth),
                r.status.clone(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let csv = io::table_csv(&["index", "value", "n", "metric", "growth", "status", "error"], &table)?;
    io::write_atomic(&out.join("sweep.csv"), &csv)?;
    io::write_json(&out.join("sweep.json"), &summary)?;
    Ok((summary, Outcome::Success))
}

// ---------------------------------------------------------------- glue

#[derive(Clone, Debug, Serialize)]
pub struct GlueSummary {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub centers: Vec<f64>,
    pub distances: Vec<f64>,
    pub pieces: Vec<PieceSummary>,
    pub interactions: Vec<PairInteraction>,
    pub bounds: Vec<GluedBound>,
    /// Largest `bound / self_advection` over pairs and times.
    pub max_ratio: f64,
    /// Largest `|bound − majorant| / majorant`.
    pub far_field_rel_gap: f64,
}

pub fn cmd_glue(cfg: &RunConfig, out: &Path) -> Result<(GlueSummary, Outcome)> {
    write_config(cfg, out)?;
    let plan = &cfg.glue;
    let runs = gluing::run_pieces(plan)?;
    let times = runs.first().map(|r| r.snapshots.len()).unwrap_or(0);
    let mut interactions = Vec::new();
    let mut bounds = Vec::new();
    let mut orders: Vec<f64> = cfg.sobolev.orders.iter().copied().filter(|s| *s > 0.0 && *s < 1.0).collect();
    if !orders.iter().any(|s| (s - plan.beta_prime).abs() < 1e-12) && plan.beta_prime < 1.0 {
        orders.push(plan.beta_prime);
    }
    let complete = runs.iter().all(|r| r.snapshots.len() == times);
    for i in 0..if complete { times } else { 0 } {
        interactions.extend(gluing::interaction_bound(&runs, i)?);
        for &s in &orders {
            bounds.push(gluing::glued_norm_lower_bound(&runs, i, s)?);
        }
    }
    let max_ratio = interactions.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let far_field_rel_gap = interactions
        .iter()
        .filter(|p| p.majorant > 0.0)
        .map(|p| (p.bound - p.majorant).abs() / p.majorant)
        .fold(0.0, f64::max);
    let summary = GlueSummary {
        stamp: stamp("glue", cfg)?,
        centers: plan.centers(),
        distances: (1..=plan.pieces).map(|j| plan.distance(j)).collect(),
        pieces: runs.iter().map(|r| r.summary()).collect(),
        interactions,
        bounds,
        max_ratio,
        far_field_rel_gap,
    };
    let table: Vec<Vec<String>> = summary
        .interactions
        .iter()
        .map(|p| {
            vec![
                num(p.t),
                p.from.to_string(),
                p.to.to_string(),
                num(p.gap),
                num(p.bound),
                num(p.majorant),
                num(p.velocity),
                num(p.velocity_quadrature),
                num(p.self_advection),
                num(p.ratio),
            ]
        })
        .collect();
    let header =
        ["t", "from", "to", "gap", "bound", "majorant", "velocity", "velocity_quadrature", "self_advection", "ratio"];
    io::write_atomic(&out.join("interactions.csv"), &io::table_csv(&header, &table)?)?;
    io::write_json(&out.join("glue.json"), &summary)?;
    let outcome = if !complete || runs.iter().any(|r| r.termination != Termination::Completed) {
        Outcome::ResolutionExhausted
    } else if runs.iter().any(|r| !r.valid_initial_data) {
        Outcome::VerificationFailed
    } else {
        Outcome::Success
    };
    Ok((summary, outcome))
}

// ---------------------------------------------------------------- norms, decay, loglip

#[derive(Clone, Debug, Serialize)]
pub struct NormValue {
    pub spec: SobolevSpec,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormsSummary {
    pub field: String,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub norms: Vec<NormValue>,
}

pub fn cmd_norms(cfg: &RunConfig, field_path: &Path, out: &Path) -> Result<(NormsSummary, Outcome)> {
    let text = std::fs::read_to_string(field_path)?;
    let field = PolarField::from_json(&text)?;
    let norms = cfg
        .sobolev
        .specs()
        .into_iter()
        .map(|spec| sobolev::norm(&field, &spec).map(|value| NormValue { spec, value }))
        .collect::<Result<Vec<_>>>()?;
    let summary = NormsSummary {
        field: field_path.display().to_string(),
        l1: field.lp_norm(1.0)?,
        l2: field.lp_norm(2.0)?,
        linf: field.lp_norm(f64::INFINITY)?,
        norms,
    };
    io::write_json(&out.join("norms.json"), &summary)?;
    Ok((summary, Outcome::Success))
}

#[derive(Clone, Debug, Serialize)]
pub struct DecaySummary {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub r_probe: f64,
    pub support: (f64, f64),
    pub table: DecayTable,
}

pub fn cmd_decay(cfg: &RunConfig, out: &Path) -> Result<(DecaySummary, Outcome)> {
    let table = decay_table(cfg)?;
    let summary =
        DecaySummary { stamp: stamp("decay", cfg)?, r_probe: cfg.decay.r_probe, support: (cfg.decay.g_lo, cfg.decay.g_hi), table };
    let rows: Vec<Vec<String>> = summary.table.rows.iter().map(|(n, v)| vec![n.to_string(), num(*v)]).collect();
    io::write_atomic(&out.join("decay.csv"), &io::table_csv(&["n", "vr_max"], &rows)?)?;
    io::write_json(&out.join("decay.json"), &summary)?;
    Ok((summary, Outcome::Success))
}

#[derive(Clone, Debug, Serialize)]
pub struct LogLipSummary {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub report: LogLipReport,
}

pub fn cmd_loglip(cfg: &RunConfig, out: &Path) -> Result<(LogLipSummary, Outcome)> {
    let init = assemble_initial(&cfg.construction)?;
    let report = biot_savart::loglip_modulus(&init.field, cfg.loglip.pairs, cfg.seed)?;
    let summary = LogLipSummary { stamp: stamp("loglip", cfg)?, report };
    io::write_json(&out.join("loglip.json"), &summary)?;
    Ok((summary, Outcome::Success))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        let mut c = RunConfig::default();
        c.evolve.t_end = 0.05;
        c.evolve.monitor_stride = 2;
        c
    }

    #[test]
    fn exit_codes() {
        assert_eq!(error_exit_code(&Error::Config("x".into())), 4);
        assert_eq!(error_exit_code(&Error::Resolution("x".into())), 3);
        assert_eq!(error_exit_code(&Error::Verification("x".into())), 2);
        assert_eq!(Outcome::VerificationFailed.exit_code(), 2);
        assert_eq!(Outcome::ResolutionExhausted.exit_code(), 3);
    }

    #[test]
    fn build_flags_oversized_oscillation() {
        let dir = tempfile::tempdir().unwrap();
        let (s, o) = cmd_build(&RunConfig::default(), dir.path()).unwrap();
        assert!(s.report.valid);
        assert_eq!(o, Outcome::Success);
        let mut big = RunConfig::default();
        big.construction.g.amp = Some(100.0);
        let (s, o) = cmd_build(&big, dir.path()).unwrap();
        assert!(!s.report.h_beta_ok);
        assert_eq!(o, Outcome::VerificationFailed);
        assert!(dir.path().join("build_report.json").exists());
    }

    #[test]
    fn evolve_writes_time_ordered_rows() {
        let dir = tempfile::tempdir().unwrap();
        let (s, o) = cmd_evolve(&quick(), dir.path()).unwrap();
        assert_eq!(o, Outcome::Success);
        assert_eq!(s.stamp.config_hash, quick().hash().unwrap());
        let mut rd = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
        let h = rd.headers().unwrap().clone();
        let it = h.iter().position(|c| c == "t").unwrap();
        let ts: Vec<f64> = rd.records().map(|r| r.unwrap()[it].parse().unwrap()).collect();
        assert!(ts.len() >= 2 && ts.windows(2).all(|w| w[1] > w[0]));
        assert!(h.iter().any(|c| c == "hs_0.5") && h.iter().any(|c| c == "pseudo_err_l2"));
    }

    #[test]
    fn single_value_sweep_has_no_slope() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::default();
        c.sweep.values = vec![8.0];
        let (s, _) = cmd_sweep(&c, dir.path(), 1).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.fit.is_none());
    }

    #[test]
    fn lambda_sweep_follows_scaling_law() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::default();
        c.sweep.axis = SweepAxis::Lambda;
        c.sweep.mode = SweepMode::Build;
        c.sweep.values = vec![2.0, 4.0, 6.0];
        let (s, _) = cmd_sweep(&c, dir.path(), 2).unwrap();
        for r in &s.rows {
            let expect = r.value.powf((2.0 - 2.0 * 0.5 + 0.05) / 0.5).round() as usize;
            assert_eq!(r.n, Some(expect), "{r:?}");
        }
    }

    #[test]
    fn bad_sweep_rows_are_marked() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::default();
        c.sweep.values = vec![2.5, 4.0, 8.0];
        let (s, _) = cmd_sweep(&c, dir.path(), 2).unwrap();
        assert_eq!(s.failed, 1);
        assert_eq!(s.rows[0].status, "failed");
        assert!(s.fit.is_some());
    }
}
