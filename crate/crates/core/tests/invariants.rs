use std::sync::Arc;

use num_complex::Complex64;
use polar_euler::biot_savart::solve_velocity;
use polar_euler::config::RunConfig;
use polar_euler::evolve::{EvolveConfig, Evolver};
use polar_euler::{PolarField, RadialGrid};
use proptest::prelude::*;

fn bump(r: f64, lo: f64, hi: f64) -> f64 {
    if r <= lo || r >= hi {
        return 0.0;
    }
    let x = (2.0 * r - lo - hi) / (hi - lo);
    (-1.0 / (1.0 - x * x)).exp()
}

fn field(grid: &Arc<RadialGrid>, amps: &[(f64, f64)]) -> PolarField {
    PolarField::from_fn(grid.clone(), amps.len() - 1, |k, r| {
        let (a, b) = amps[k];
        let im = if k == 0 { 0.0 } else { b };
        Complex64::new(a, im) * bump(r, 0.6, 1.8)
    })
    .unwrap()
}

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::log_uniform(0.3, 3.0, 192).unwrap())
}

fn amps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
}

fn probes() -> Vec<(f64, f64)> {
    (0..24).map(|j| (0.35 + 0.1 * j as f64, 0.7 * j as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn velocity_is_linear(a in amps(), b in amps(), s in -2.0f64..2.0) {
        let g = grid();
        let (fa, fb) = (field(&g, &a), field(&g, &b));
        let sum = fa.axpby(1.0, &fb, s).unwrap();
        let pts = probes();
        let va = solve_velocity(&fa).unwrap().eval_polar(&pts);
        let vb = solve_velocity(&fb).unwrap().eval_polar(&pts);
        let vs = solve_velocity(&sum).unwrap().eval_polar(&pts);
        let scale = vs.iter().chain(&va).fold(1e-300f64, |m, v| m.max(v.0.abs()).max(v.1.abs()));
        for i in 0..pts.len() {
            prop_assert!((vs[i].0 - va[i].0 - s * vb[i].0).abs() < 1e-10 * scale);
            prop_assert!((vs[i].1 - va[i].1 - s * vb[i].1).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn velocity_commutes_with_rotation(a in amps(), c in -3.0f64..3.0) {
        let g = grid();
        let f = field(&g, &a);
        let pts = probes();
        let shifted: Vec<(f64, f64)> = pts.iter().map(|&(r, al)| (r, al - c)).collect();
        let v = solve_velocity(&f).unwrap().eval_polar(&shifted);
        let vr = solve_velocity(&f.rotate(c)).unwrap().eval_polar(&pts);
        let scale = v.iter().fold(1e-300f64, |m, v| m.max(v.0.abs()).max(v.1.abs()));
        for i in 0..pts.len() {
            prop_assert!((v[i].0 - vr[i].0).abs() < 1e-10 * scale);
            prop_assert!((v[i].1 - vr[i].1).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn evolution_commutes_with_rotation_and_keeps_l2(a in amps(), c in -3.0f64..3.0) {
        let g = grid();
        let f = field(&g, &a).scale(0.5);
        let ev = Evolver::new(g, 1, 3, EvolveConfig::default()).unwrap();
        let dt = 0.01;
        let mut u = f.clone();
        let mut w = f.rotate(c);
        for _ in 0..5 {
            u = ev.step(&u, dt).unwrap();
            w = ev.step(&w, dt).unwrap();
        }
        let diff = u.rotate(c).sub(&w).unwrap().lp_norm(2.0).unwrap();
        let n0 = f.lp_norm(2.0).unwrap();
        prop_assert!(diff < 1e-11 * n0, "{diff}");
        prop_assert!((u.lp_norm(2.0).unwrap() / n0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn config_round_trips(
        seed in 0..=i64::MAX as u64,
        beta in 0.05f64..0.95,
        lambda in 1.0f64..64.0,
        n in prop::option::of(3usize..200),
        stride in 1usize..50,
        orders in prop::collection::vec(-0.9f64..0.99, 1..4),
    ) {
        let mut c = RunConfig::default();
        c.seed = seed;
        c.construction.beta = beta;
        c.construction.lambda = lambda;
        c.construction.n = n;
        c.evolve.monitor_stride = stride;
        c.sobolev.orders = orders;
        let text = c.to_toml().unwrap();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash().unwrap(), c.hash().unwrap());
    }
}

#[test]
fn seeds_beyond_toml_integers_are_rejected() {
    let mut c = RunConfig::default();
    c.seed = u64::MAX;
    assert!(matches!(c.validate(), Err(polar_euler::Error::Config(_))));
}

#[test]
fn override_changes_the_hash() {
    let a = RunConfig::parse_with("", &[]).unwrap();
    let b = RunConfig::parse_with("", &["construction.lambda=8".to_string()]).unwrap();
    assert_eq!(b.construction.lambda, 8.0);
    assert_ne!(a.hash().unwrap(), b.hash().unwrap());
}
