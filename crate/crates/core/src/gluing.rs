//! Finite gluing: pieces `ω̃_j(x,t) = ω_j(x − R_j, t/2^j)/2^j` evolved
//! independently, with their mutual influence measured afterwards.
//!
//! Centers follow `R_1 = 0`, `R_{j+1} = R_j + D_j + D_{j+1}`, with
//! `D_j = scale·(4^j(v_max + 1) + 2)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biot_savart::solve_velocity;
use crate::construction::{assemble_initial, ConstructionParams, FSpec};
use crate::error::{Error, Result};
use crate::evolve::{EvolveConfig, EvolveState, Evolver, Termination, TrajectoryRecord};
use crate::field::PolarField;
use crate::sobolev::{self, SobolevSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GluingPlan {
    pub pieces: usize,
    pub beta: f64,
    pub delta: f64,
    /// `λ_j = lambda_1·2^{j−1}`
    pub lambda_1: f64,
    pub f: FSpec,
    pub harmonics: usize,
    /// Speed bound entering the distance floor.
    pub v_max: f64,
    /// Multiplier on every `D_j`.
    pub distance_scale: f64,
    /// Global times at which interactions are evaluated.
    pub times: Vec<f64>,
    /// Local run length of each piece.
    pub local_t_end: f64,
    pub beta_prime: f64,
    pub evolve: EvolveConfig,
}

impl Default for GluingPlan {
    fn default() -> Self {
        GluingPlan {
            pieces: 3,
            beta: 0.8,
            delta: 0.05,
            lambda_1: 8.0,
            f: FSpec { tilde_lo: 0.8, tilde_hi: 1.2, lambda0: 6.0, ..FSpec::default() },
            harmonics: 3,
            v_max: 1.0,
            distance_scale: 1.0,
            times: vec![0.0, 0.5, 1.0, 2.0],
            local_t_end: 1.0,
            beta_prime: 0.9,
            evolve: EvolveConfig::default(),
        }
    }
}

impl GluingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.pieces == 0 || self.pieces > 8 {
            return Err(Error::InvalidArgument(format!("pieces must be in 1..=8, got {}", self.pieces)));
        }
        if !(self.distance_scale > 0.0 && self.v_max >= 0.0) {
            return Err(Error::InvalidArgument("distances need a positive scale and v_max >= 0".into()));
        }
        if self.times.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::InvalidArgument("interaction times must be >= 0".into()));
        }
        let t_max = self.times.iter().cloned().fold(0.0, f64::max);
        if t_max > 2.0 * self.local_t_end {
            return Err(Error::InvalidArgument(format!(
                "time {t_max} lies beyond the first piece's window 2·{}",
                self.local_t_end
            )));
        }
        self.evolve.validate()
    }

    pub fn distance(&self, j: usize) -> f64 {
        self.distance_scale * (4f64.powi(j as i32) * (self.v_max + 1.0) + 2.0)
    }

    /// `R_1, ..., R_J`
    pub fn centers(&self) -> Vec<f64> {
        let mut r = vec![0.0];
        for j in 1..self.pieces {
            r.push(r[j - 1] + self.distance(j) + self.distance(j + 1));
        }
        r
    }

    pub fn lambda(&self, j: usize) -> f64 {
        self.lambda_1 * 2f64.powi(j as i32 - 1)
    }

    pub fn piece_params(&self, j: usize) -> ConstructionParams {
        ConstructionParams {
            beta: self.beta,
            delta: self.delta,
            lambda: self.lambda(j),
            f: self.f.clone(),
            harmonics: self.harmonics,
            beta_prime: Some(self.beta_prime),
            ..ConstructionParams::default()
        }
    }
}

/// Local field `ω_j` at a global time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub omega: PolarField,
    /// Outer support radius of `ω_j`.
    pub radius: f64,
    pub l1: f64,
    /// `‖v[ω_j]‖_∞`
    pub speed: f64,
}

#[derive(Clone, Debug)]
pub struct PieceRun {
    pub j: usize,
    pub lambda: f64,
    pub n: usize,
    pub center: f64,
    pub amplitude: f64,
    pub dilation: f64,
    pub record: TrajectoryRecord,
    pub snapshots: Vec<Snapshot>,
    /// `max_t ‖v[ω̃_j]‖_∞` over the snapshots.
    pub v_max: f64,
    /// `max_t` outer support radius of `ω̃_j` around its center.
    pub max_radius: f64,
    pub growth_factor: Option<f64>,
    pub termination: Termination,
    pub valid_initial_data: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceSummary {
    pub j: usize,
    pub lambda: f64,
    pub n: usize,
    pub center: f64,
    pub amplitude: f64,
    pub dilation: f64,
    pub v_max: f64,
    pub max_radius: f64,
    pub growth_factor: Option<f64>,
    pub termination: Termination,
    pub valid_initial_data: bool,
}

impl PieceRun {
    pub fn summary(&self) -> PieceSummary {
        PieceSummary {
            j: self.j,
            lambda: self.lambda,
            n: self.n,
            center: self.center,
            amplitude: self.amplitude,
            dilation: self.dilation,
            v_max: self.v_max,
            max_radius: self.max_radius,
            growth_factor: self.growth_factor,
            termination: self.termination,
            valid_initial_data: self.valid_initial_data,
        }
    }

    /// `ω̃_j(·, t)` in its own frame (centered at the origin).
    pub fn scaled_field(&self, i: usize) -> PolarField {
        self.snapshots[i].omega.scale(self.amplitude)
    }
}

fn snapshot(t: f64, omega: &PolarField) -> Result<Snapshot> {
    let radius = sobolev::cartesian::outer_support(omega);
    let (speed, _) = solve_velocity(omega)?.w1inf();
    Ok(Snapshot { t, omega: omega.clone(), radius, l1: omega.lp_norm(1.0)?, speed })
}

fn run_piece(plan: &GluingPlan, j: usize, center: f64) -> Result<PieceRun> {
    let init = assemble_initial(&plan.piece_params(j))?;
    let dilation = 2f64.powi(j as i32);
    let field = init.field;
    // snapshots at local times t/2^j, then the rest of the local run
    let mut local: Vec<f64> = plan.times.iter().map(|t| t / dilation).collect();
    local.sort_by(f64::total_cmp);
    let mut state = EvolveState::new(field.clone());
    let mut snaps = Vec::new();
    let mut termination = Termination::Completed;
    let quiet = EvolveConfig { sobolev: vec![], ..plan.evolve.clone() };
    let monitored = EvolveConfig { sobolev: vec![SobolevSpec::homogeneous(plan.beta_prime)], ..plan.evolve.clone() };
    for &tl in &local {
        if tl > state.t {
            let cfg = EvolveConfig { t_end: tl - state.t, ..quiet.clone() };
            let (next, rec) = Evolver::for_field(&field, cfg)?.run_state(state, &mut ())?;
            state = next;
            if rec.termination != Termination::Completed {
                termination = rec.termination;
                break;
            }
        }
        snaps.push(snapshot(tl * dilation, &state.omega)?);
    }
    let cfg = EvolveConfig { t_end: plan.local_t_end, ..monitored };
    let (_, record) = Evolver::for_field(&field, cfg)?.run(&field, &mut ())?;
    if record.termination != Termination::Completed {
        termination = record.termination;
    }
    let amplitude = 1.0 / dilation;
    let idx = record.hs_orders.iter().position(|s| (s - plan.beta_prime).abs() < 1e-12);
    Ok(PieceRun {
        j,
        lambda: plan.lambda(j),
        n: init.n,
        center,
        amplitude,
        dilation,
        growth_factor: idx.and_then(|i| record.growth_factor(i)),
        v_max: snaps.iter().map(|s| s.speed * amplitude).fold(0.0, f64::max),
        max_radius: snaps.iter().map(|s| s.radius).fold(0.0, f64::max),
        record,
        snapshots: snaps,
        termination,
        valid_initial_data: init.report.valid,
    })
}

pub fn run_pieces(plan: &GluingPlan) -> Result<Vec<PieceRun>> {
    plan.validate()?;
    let centers = plan.centers();
    (1..=plan.pieces).into_par_iter().map(|j| run_piece(plan, j, centers[j - 1])).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PairInteraction {
    pub t: f64,
    /// Source piece.
    pub from: usize,
    /// Piece being advected.
    pub to: usize,
    pub gap: f64,
    /// `‖ω̃_from‖_{L¹}/(2π·gap)`
    pub bound: f64,
    /// `max_x ∫|ω̃_from(y)|/(2π|x − y|)dy` over probes on `to`'s support.
    pub majorant: f64,
    /// `max |v[ω̃_from]|` on the probes, from the mode solution.
    pub velocity: f64,
    /// Same, by direct kernel quadrature.
    pub velocity_quadrature: f64,
    /// `‖v[ω̃_to]‖_∞`
    pub self_advection: f64,
    /// Measured cross velocity over self-advection.
    pub ratio: f64,
    pub overlap: bool,
}

fn probes(center: f64, radius: f64) -> Vec<(f64, f64)> {
    (0..64)
        .map(|m| {
            let a = 2.0 * PI * m as f64 / 64.0;
            (center + radius * a.cos(), radius * a.sin())
        })
        .collect()
}

/// Kernel quadrature of the velocity and of its absolute majorant at
/// points far from the field's support.
fn kernel_quadrature(omega: &PolarField, scale: f64, points: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = omega.grid();
    let n_alpha = 4 * omega.min_alpha_nodes();
    let ph = omega.to_physical(n_alpha)?;
    let copies = ph.base;
    let da = 2.0 * PI / (n_alpha * copies) as f64;
    let mut speed = vec![0.0; points.len()];
    let mut majorant = vec![0.0; points.len()];
    for (p, &(x, y)) in points.iter().enumerate() {
        let (mut vx, mut vy, mut m) = (0.0, 0.0, 0.0);
        for (i, row) in ph.values.iter().enumerate() {
            let r = grid.nodes()[i];
            let w = grid.weights()[i] * da * scale;
            for c in 0..copies {
                for (jj, val) in row.iter().enumerate() {
                    let a = ph.alpha(jj) + 2.0 * PI * c as f64 / copies as f64;
                    let (dx, dy) = (x - r * a.cos(), y - r * a.sin());
                    let d2 = dx * dx + dy * dy;
                    vx += -dy / d2 * val * w;
                    vy += dx / d2 * val * w;
                    m += val.abs() * w / d2.sqrt();
                }
            }
        }
        speed[p] = vx.hypot(vy) / (2.0 * PI);
        majorant[p] = m / (2.0 * PI);
    }
    Ok((speed, majorant))
}

/// Influence of every piece on every other at snapshot index `i`.
pub fn interaction_bound(runs: &[PieceRun], i: usize) -> Result<Vec<PairInteraction>> {
    let mut out = Vec::new();
    for a in runs {
        for b in runs {
            if a.j == b.j {
                continue;
            }
            let (sa, sb) = (&a.snapshots[i], &b.snapshots[i]);
            let gap = (a.center - b.center).abs() - sa.radius - sb.radius;
            let overlap = gap <= 0.0;
            let l1 = sa.l1 * a.amplitude;
            let bound = if overlap { f64::INFINITY } else { l1 / (2.0 * PI * gap) };
            // probe points on b's support circle, in a's frame
            let pts = probes(b.center - a.center, sb.radius);
            let vel = solve_velocity(&sa.omega)?;
            let modal = vel.eval_cartesian(&pts);
            let velocity = modal.iter().map(|v| v.0.hypot(v.1) * a.amplitude).fold(0.0, f64::max);
            let (quad, maj) = kernel_quadrature(&sa.omega, a.amplitude, &pts)?;
            let velocity_quadrature = quad.into_iter().fold(0.0, f64::max);
            let self_advection = sb.speed * b.amplitude;
            out.push(PairInteraction {
                t: sa.t,
                from: a.j,
                to: b.j,
                gap,
                bound,
                majorant: maj.into_iter().fold(0.0, f64::max),
                velocity,
                velocity_quadrature,
                self_advection,
                ratio: if self_advection > 0.0 { velocity_quadrature / self_advection } else { f64::INFINITY },
                overlap,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct GluedBound {
    pub t: f64,
    pub s: f64,
    pub piece_norms: Vec<f64>,
    pub max_piece: f64,
    /// `Σ_j‖ω̃_j‖`; not a valid lower bound (it exceeds the norm of the sum
    /// by the triangle inequality), kept for comparison.
    pub sum_of_norms: f64,
    /// Certified lower bound on `‖Σ_j ω̃_j‖_{Ḣ^s}`.
    pub certified: f64,
}

pub fn glued_norm_lower_bound(runs: &[PieceRun], i: usize, s: f64) -> Result<GluedBound> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("glued bound needs 0 < s < 1, got {s}")));
    }
    let spec = SobolevSpec::homogeneous(s);
    let piece_norms = runs
        .iter()
        .map(|r| sobolev::norm(&r.scaled_field(i), &spec))
        .collect::<Result<Vec<_>>>()?;
    let l1: Vec<f64> = runs.iter().map(|r| r.snapshots[i].l1 * r.amplitude).collect();
    let gap = |a: usize, b: usize| {
        (runs[a].center - runs[b].center).abs() - runs[a].snapshots[i].radius - runs[b].snapshots[i].radius
    };
    for a in 0..runs.len() {
        for b in a + 1..runs.len() {
            if gap(a, b) <= 0.0 {
                return Err(Error::Contract(format!("pieces {} and {} overlap", runs[a].j, runs[b].j)));
            }
        }
    }
    let certified = sobolev::disjoint_lower_bound(&piece_norms, &l1, &gap, s);
    Ok(GluedBound {
        t: runs.first().map_or(0.0, |r| r.snapshots[i].t),
        s,
        max_piece: piece_norms.iter().cloned().fold(0.0, f64::max),
        sum_of_norms: piece_norms.iter().sum(),
        piece_norms,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GluingPlan {
        GluingPlan {
            pieces: 2,
            times: vec![0.0, 0.5],
            local_t_end: 0.25,
            ..GluingPlan::default()
        }
    }

    #[test]
    fn floor_distances_and_centers() {
        let p = GluingPlan::default();
        assert_eq!(p.distance(1), 10.0);
        assert_eq!(p.distance(2), 34.0);
        assert_eq!(p.centers(), vec![0.0, 44.0, 208.0]);
    }

    #[test]
    fn pieces_are_valid_and_far_apart() {
        let plan = small();
        let runs = run_pieces(&plan).unwrap();
        assert_eq!(runs.len(), 2);
        for r in &runs {
            assert!(r.valid_initial_data, "piece {}", r.j);
            assert!(r.max_radius < 1.0);
            assert_eq!(r.termination, Termination::Completed);
        }
        let inter = interaction_bound(&runs, 1).unwrap();
        assert_eq!(inter.len(), 2);
        for p in &inter {
            assert!(!p.overlap);
            assert!(p.velocity <= p.majorant && p.majorant <= p.bound, "{p:?}");
            assert!(p.bound / p.majorant - 1.0 < 0.05, "{p:?}");
            assert!((p.velocity - p.velocity_quadrature).abs() <= 1e-6 * p.bound, "{p:?}");
        }
        let g = glued_norm_lower_bound(&runs, 1, 0.5).unwrap();
        assert!(g.certified >= g.max_piece * (1.0 - 1e-6));
        assert!(g.certified <= g.sum_of_norms);
    }

    #[test]
    fn single_piece_has_no_interactions() {
        let plan = GluingPlan { pieces: 1, ..small() };
        let runs = run_pieces(&plan).unwrap();
        assert!(interaction_bound(&runs, 0).unwrap().is_empty());
        let g = glued_norm_lower_bound(&runs, 0, 0.5).unwrap();
        assert!((g.certified - g.piece_norms[0]).abs() <= 1e-12 * g.certified);
    }

    #[test]
    fn rejects_times_beyond_the_window() {
        let plan = GluingPlan { times: vec![3.0], ..small() };
        assert!(plan.validate().is_err());
    }
}
