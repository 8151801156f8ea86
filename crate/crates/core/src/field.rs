//! Scalar fields on the plane as truncated angular Fourier series on a radial grid.
//!
//! Convention: `ω(r,α) = ω₀(r) + 2·Re Σ_{k≥1} ω_k(r) e^{ikα}`. A field stores
//! only the wavenumbers `k = m·base` for `m = 0..=harmonics`; `base > 1` means
//! the field is declared `2π/base`-periodic and the other modes are zero by
//! construction.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexInterpolant, RadialGrid, Spacing};

#[derive(Clone, Debug, PartialEq)]
pub struct PolarField {
    grid: Arc<RadialGrid>,
    base: usize,
    coeffs: Vec<Vec<Complex64>>,
}

/// Real samples on grid nodes times a uniform α grid covering one period
/// `[0, 2π/base)`.
#[derive(Clone, Debug)]
pub struct PhysicalSamples {
    pub base: usize,
    pub n_alpha: usize,
    /// `values[i][j]` at node `i`, angle `2πj/(n_alpha·base)`.
    pub values: Vec<Vec<f64>>,
}

impl PhysicalSamples {
    pub fn alpha(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / (self.n_alpha * self.base) as f64
    }
}

/// Cached inverse/forward transforms of one length.
pub struct AngularFft {
    n: usize,
    inv: Arc<dyn Fft<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl AngularFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let inv = planner.plan_fft_inverse(n);
        let fwd = planner.plan_fft_forward(n);
        let scratch_len = inv.get_inplace_scratch_len().max(fwd.get_inplace_scratch_len());
        AngularFft {
            n,
            inv,
            fwd,
            buf: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Real samples of `c₀ + 2 Re Σ_{m≥1} c_m e^{imθ}` at `θ_j = 2πj/n`.
    pub fn synth(&mut self, c: &[Complex64], out: &mut [f64]) {
        let n = self.n;
        debug_assert!(2 * c.len() <= n + 1);
        self.buf.iter_mut().for_each(|z| *z = Complex64::default());
        self.buf[0] = Complex64::new(c[0].re, 0.0);
        for (m, cm) in c.iter().enumerate().skip(1) {
            self.buf[m] = *cm;
            self.buf[n - m] = cm.conj();
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (o, z) in out.iter_mut().zip(&self.buf) {
            *o = z.re;
        }
    }

    /// Inverse of [`synth`](Self::synth) for the first `c.len()` coefficients.
    pub fn analyze(&mut self, samples: &[f64], c: &mut [Complex64]) {
        for (z, s) in self.buf.iter_mut().zip(samples) {
            *z = Complex64::new(*s, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        let inv_n = 1.0 / self.n as f64;
        for (m, cm) in c.iter_mut().enumerate() {
            *cm = self.buf[m] * inv_n;
        }
        c[0].im = 0.0;
    }
}

impl PolarField {
    pub fn new(grid: Arc<RadialGrid>, base: usize, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if base == 0 {
            return Err(Error::InvalidArgument("angular base must be >= 1".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("field needs at least the k=0 mode".into()));
        }
        if coeffs.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidArgument("mode profile length differs from grid".into()));
        }
        let mut coeffs = coeffs;
        for z in coeffs[0].iter_mut() {
            z.im = 0.0;
        }
        Ok(PolarField { grid, base, coeffs })
    }

    pub fn zeros(grid: Arc<RadialGrid>, base: usize, harmonics: usize) -> Self {
        let n = grid.len();
        PolarField { grid, base: base.max(1), coeffs: vec![vec![Complex64::default(); n]; harmonics + 1] }
    }

    pub fn radial(grid: Arc<RadialGrid>, values: &[f64]) -> Result<Self> {
        let c0 = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        Self::new(grid, 1, vec![c0])
    }

    /// Field with a single nonzero wavenumber `k` (plus the implied `−k`).
    pub fn single_mode(grid: Arc<RadialGrid>, k: usize, profile: Vec<Complex64>) -> Result<Self> {
        if k == 0 {
            return Self::new(grid, 1, vec![profile]);
        }
        let zero = vec![Complex64::default(); grid.len()];
        Self::new(grid, k, vec![zero, profile])
    }

    /// Full (base 1) field from a coefficient function `(k, r) -> ω_k(r)`.
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        k_max: usize,
        f: impl Fn(usize, f64) -> Complex64,
    ) -> Result<Self> {
        let coeffs = (0..=k_max).map(|k| grid.nodes().iter().map(|&r| f(k, r)).collect()).collect();
        Self::new(grid, 1, coeffs)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn grid_arc(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn base(&self) -> usize {
        self.base
    }
    pub fn harmonics(&self) -> usize {
        self.coeffs.len() - 1
    }
    pub fn k_max(&self) -> usize {
        self.base * self.harmonics()
    }
    /// Declared angular period divisor, if any.
    pub fn symmetry_n(&self) -> Option<usize> {
        (self.base > 1).then_some(self.base)
    }
    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<Vec<Complex64>> {
        self.coeffs
    }
    pub fn wavenumber(&self, m: usize) -> usize {
        m * self.base
    }

    /// Profile of wavenumber `k`, `None` if `k` is not stored (hence zero).
    pub fn mode(&self, k: usize) -> Option<&[Complex64]> {
        if k % self.base != 0 {
            return None;
        }
        self.coeffs.get(k / self.base).map(|v| v.as_slice())
    }

    /// Wavenumbers not divisible by the declared period are identically zero;
    /// this re-expresses the field on a coarser (smaller) base.
    pub fn to_base(&self, base: usize) -> Result<Self> {
        if base == 0 || self.base % base != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot re-express base {} on base {base}",
                self.base
            )));
        }
        let ratio = self.base / base;
        let n = self.grid.len();
        let mut coeffs = vec![vec![Complex64::default(); n]; self.harmonics() * ratio + 1];
        for (m, c) in self.coeffs.iter().enumerate() {
            coeffs[m * ratio] = c.clone();
        }
        Ok(PolarField { grid: self.grid.clone(), base, coeffs })
    }

    /// Declare `2π/n`-periodicity; fails if a stored mode not divisible by `n`
    /// is nonzero.
    pub fn with_symmetry(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("symmetry order must be >= 1".into()));
        }
        let full = self.to_base(1)?;
        let mut coeffs = Vec::new();
        for (k, c) in full.coeffs.iter().enumerate() {
            if k % n == 0 {
                coeffs.push(c.clone());
            } else if c.iter().any(|z| z.norm() != 0.0) {
                return Err(Error::Contract(format!("mode {k} is nonzero but not a multiple of {n}")));
            }
        }
        Ok(PolarField { grid: self.grid.clone(), base: n, coeffs })
    }

    fn same_grid(&self, other: &PolarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::InvalidArgument("fields live on different grids".into()))
        }
    }

    /// `a·self + b·other`; the result keeps the largest common period.
    pub fn axpby(&self, a: f64, other: &PolarField, b: f64) -> Result<Self> {
        self.same_grid(other)?;
        let base = gcd(self.base, other.base);
        let x = if self.base == base { self.clone() } else { self.to_base(base)? };
        let y = if other.base == base { other.clone() } else { other.to_base(base)? };
        let h = x.harmonics().max(y.harmonics());
        let n = self.grid.len();
        let mut coeffs = vec![vec![Complex64::default(); n]; h + 1];
        for (m, c) in coeffs.iter_mut().enumerate() {
            if let Some(xc) = x.coeffs.get(m) {
                c.iter_mut().zip(xc).for_each(|(c, v)| *c += v * a);
            }
            if let Some(yc) = y.coeffs.get(m) {
                c.iter_mut().zip(yc).for_each(|(c, v)| *c += v * b);
            }
        }
        Ok(PolarField { grid: self.grid.clone(), base, coeffs })
    }

    pub fn add(&self, other: &PolarField) -> Result<Self> {
        self.axpby(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &PolarField) -> Result<Self> {
        self.axpby(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.iter().map(|z| z * a).collect()).collect();
        PolarField { grid: self.grid.clone(), base: self.base, coeffs }
    }

    /// Rotation by angle `c`: the result at `α` is the input at `α − c`.
    pub fn rotate(&self, c: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, v)| {
                let ph = Complex64::from_polar(1.0, -(self.wavenumber(m) as f64) * c);
                if m == 0 {
                    v.clone()
                } else {
                    v.iter().map(|z| z * ph).collect()
                }
            })
            .collect();
        PolarField { grid: self.grid.clone(), base: self.base, coeffs }
    }

    /// Only the k=0 mode, i.e. the mean over α.
    pub fn angular_average(&self) -> Self {
        PolarField { grid: self.grid.clone(), base: self.base, coeffs: vec![self.coeffs[0].clone()] }
    }

    /// Everything except the k=0 mode.
    pub fn oscillatory_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0].iter_mut().for_each(|z| *z = Complex64::default());
        out
    }

    /// Evaluate at arbitrary points. Inside `r_min` each mode is continued
    /// as `(r/r_min)^k ω_k(r_min)`, the regular extension to the origin.
    pub fn synthesize(&self, points: &[(f64, f64)]) -> Result<Vec<f64>> {
        let interps: Vec<ComplexInterpolant> =
            self.coeffs.iter().map(|c| ComplexInterpolant::new(&self.grid, c)).collect();
        points.iter().map(|&(r, a)| self.value_with(&interps, r, a)).collect()
    }

    fn value_with(&self, interps: &[ComplexInterpolant], r: f64, alpha: f64) -> Result<f64> {
        if !(r >= 0.0) || r > self.grid.r_max() {
            return Err(Error::Domain(format!(
                "radius {r} outside [0, {}]",
                self.grid.r_max()
            )));
        }
        let r0 = self.grid.r_min();
        let (i, t, ratio) = if r < r0 { (0, 0.0, r / r0) } else {
            let (i, t) = self.grid.locate(r).expect("radius checked against grid");
            (i, t, 1.0)
        };
        let mut v = interps[0].eval_panel(&self.grid, i, t).re;
        for (m, it) in interps.iter().enumerate().skip(1) {
            let k = self.wavenumber(m) as f64;
            let z = it.eval_panel(&self.grid, i, t) * if ratio < 1.0 { ratio.powf(k) } else { 1.0 };
            let (s, c) = (k * alpha).sin_cos();
            v += 2.0 * (z.re * c - z.im * s);
        }
        Ok(v)
    }

    /// Smallest α-grid per period that represents this field without aliasing.
    pub fn min_alpha_nodes(&self) -> usize {
        2 * self.harmonics() + 2
    }

    /// Samples on grid nodes × `n_alpha` angles per period.
    pub fn to_physical(&self, n_alpha: usize) -> Result<PhysicalSamples> {
        if n_alpha < self.min_alpha_nodes() {
            return Err(Error::Aliasing { nodes: n_alpha, k_max: self.harmonics() });
        }
        let mut fft = AngularFft::new(n_alpha);
        let mut c = vec![Complex64::default(); self.coeffs.len()];
        let mut values = Vec::with_capacity(self.grid.len());
        for i in 0..self.grid.len() {
            for (m, cm) in c.iter_mut().enumerate() {
                *cm = self.coeffs[m][i];
            }
            let mut row = vec![0.0; n_alpha];
            fft.synth(&c, &mut row);
            values.push(row);
        }
        Ok(PhysicalSamples { base: self.base, n_alpha, values })
    }

    /// Inverse of [`to_physical`](Self::to_physical), keeping `harmonics`
    /// multiples of the sample period's base.
    pub fn analyze(grid: Arc<RadialGrid>, samples: &PhysicalSamples, harmonics: usize) -> Result<Self> {
        if samples.n_alpha < 2 * harmonics + 2 {
            return Err(Error::Aliasing { nodes: samples.n_alpha, k_max: harmonics });
        }
        if samples.values.len() != grid.len() {
            return Err(Error::InvalidArgument("sample rows differ from grid size".into()));
        }
        let mut fft = AngularFft::new(samples.n_alpha);
        let n = grid.len();
        let mut coeffs = vec![vec![Complex64::default(); n]; harmonics + 1];
        let mut c = vec![Complex64::default(); harmonics + 1];
        for (i, row) in samples.values.iter().enumerate() {
            fft.analyze(row, &mut c);
            for (m, cm) in c.iter().enumerate() {
                coeffs[m][i] = *cm;
            }
        }
        Self::new(grid, samples.base, coeffs)
    }

    /// α-grid used for L^∞-type maxima: 4× refined over the minimal one.
    fn refined_physical(&self) -> PhysicalSamples {
        self.to_physical(4 * self.min_alpha_nodes()).expect("refined grid is never aliased")
    }

    /// max over α of |field| at each node.
    pub fn node_maxima(&self) -> Vec<f64> {
        if self.harmonics() == 0 {
            return self.coeffs[0].iter().map(|z| z.re.abs()).collect();
        }
        self.refined_physical()
            .values
            .iter()
            .map(|row| row.iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .collect()
    }

    /// `‖f‖_{L^p(ℝ²)}`, `p = f64::INFINITY` for the maximum.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("L^p needs p >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.node_maxima().into_iter().fold(0.0, f64::max));
        }
        // |f|^p has kinks where f changes sign unless p is even: sample finer
        let ph = if p == 2.0 {
            self.refined_physical()
        } else {
            self.to_physical(32 * self.min_alpha_nodes()).expect("refined grid is never aliased")
        };
        let dalpha = 2.0 * PI / ph.n_alpha as f64;
        let integrand: Vec<f64> = ph
            .values
            .iter()
            .map(|row| row.iter().map(|v| v.abs().powf(p)).sum::<f64>() * dalpha)
            .collect();
        Ok(self.grid.integrate(&integrand).powf(1.0 / p))
    }

    /// `Σ_k ∫|ω_k|² r dr` with weight 1 for k=0 and 2 for each ±k pair;
    /// equals `‖f‖²_{L²}/(2π)`.
    pub fn mode_energy(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let w = if m == 0 { 1.0 } else { 2.0 };
                let v: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
                w * self.grid.integrate(&v)
            })
            .sum()
    }

    /// Per-mode energies (same weighting as [`mode_energy`](Self::mode_energy)).
    pub fn mode_energies(&self) -> Vec<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let w = if m == 0 { 1.0 } else { 2.0 };
                let v: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
                (self.wavenumber(m), w * self.grid.integrate(&v))
            })
            .collect()
    }

    /// Smallest annulus containing every node where `max_α |f| > threshold`.
    pub fn support_annulus(&self, threshold: f64) -> Option<(f64, f64)> {
        let maxima = self.node_maxima();
        let nodes = self.grid.nodes();
        let lo = maxima.iter().position(|m| *m > threshold)?;
        let hi = maxima.iter().rposition(|m| *m > threshold)?;
        Some((nodes[lo], nodes[hi]))
    }

    /// `max |∇f|` over nodes × refined α grid.
    pub fn gradient_linf(&self) -> f64 {
        let nodes = self.grid.nodes();
        let dr: Vec<Vec<Complex64>> = self.coeffs.iter().map(|c| self.grid.derivative(c)).collect();
        let da: Vec<Vec<Complex64>> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let ik = Complex64::new(0.0, self.wavenumber(m) as f64);
                c.iter().zip(nodes).map(|(z, r)| z * ik / r).collect()
            })
            .collect();
        let n_alpha = 4 * self.min_alpha_nodes();
        let mut fft = AngularFft::new(n_alpha);
        let h = self.coeffs.len();
        let (mut cr, mut ca) = (vec![Complex64::default(); h], vec![Complex64::default(); h]);
        let (mut gr, mut ga) = (vec![0.0; n_alpha], vec![0.0; n_alpha]);
        let mut worst = 0.0f64;
        for i in 0..nodes.len() {
            for m in 0..h {
                cr[m] = dr[m][i];
                ca[m] = da[m][i];
            }
            fft.synth(&cr, &mut gr);
            fft.synth(&ca, &mut ga);
            for j in 0..n_alpha {
                worst = worst.max(gr[j].hypot(ga[j]));
            }
        }
        worst
    }

    pub fn to_file(&self) -> FieldFile {
        FieldFile {
            format: FIELD_FORMAT.into(),
            version: FIELD_FORMAT_VERSION,
            spacing: self.grid.spacing(),
            nodes: self.grid.nodes().to_vec(),
            k_max: self.k_max(),
            base: self.base,
            symmetry_n: self.symmetry_n(),
            wavenumbers: (0..self.coeffs.len()).map(|m| self.wavenumber(m)).collect(),
            re: self.coeffs.iter().map(|c| c.iter().map(|z| z.re).collect()).collect(),
            im: self.coeffs.iter().map(|c| c.iter().map(|z| z.im).collect()).collect(),
        }
    }

    pub fn from_file(file: FieldFile) -> Result<Self> {
        if file.format != FIELD_FORMAT {
            return Err(Error::Serde(format!("unknown field format '{}'", file.format)));
        }
        if file.version != FIELD_FORMAT_VERSION {
            return Err(Error::Serde(format!("unsupported field version {}", file.version)));
        }
        let n = file.nodes.len();
        let grid = RadialGrid::new(file.spacing, file.nodes[0], file.nodes[n - 1], n)?;
        let close = grid
            .nodes()
            .iter()
            .zip(&file.nodes)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs());
        if !close {
            return Err(Error::Serde("stored nodes do not match the declared spacing".into()));
        }
        if file.re.len() != file.im.len() || file.k_max != file.base * (file.re.len() - 1) {
            return Err(Error::Serde("coefficient arrays inconsistent with k_max".into()));
        }
        let coeffs = file
            .re
            .iter()
            .zip(&file.im)
            .map(|(re, im)| re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect())
            .collect();
        Self::new(Arc::new(grid), file.base, coeffs)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }
}

pub const FIELD_FORMAT: &str = "polar-euler-field";
pub const FIELD_FORMAT_VERSION: u32 = 1;

/// On-disk container; see `docs/field_format.md`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub format: String,
    pub version: u32,
    pub spacing: Spacing,
    pub nodes: Vec<f64>,
    pub k_max: usize,
    pub base: usize,
    pub symmetry_n: Option<usize>,
    pub wavenumbers: Vec<usize>,
    /// Row-major: one row per stored wavenumber, one column per node.
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::log_uniform(0.05, 4.0, n).unwrap())
    }

    fn random_field(seed: u64, base: usize, harmonics: usize) -> PolarField {
        let g = grid(64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..=harmonics)
            .map(|_| {
                (0..g.len())
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        PolarField::new(g, base, coeffs).unwrap()
    }

    #[test]
    fn constant_and_cosine_synthesis() {
        let g = grid(64);
        let one = PolarField::radial(g.clone(), &vec![1.0; g.len()]).unwrap();
        assert_eq!(one.synthesize(&[(1.0, 0.7)]).unwrap()[0], 1.0);
        let c1 = PolarField::single_mode(g.clone(), 1, vec![Complex64::new(1.0, 0.0); g.len()]).unwrap();
        assert!((c1.synthesize(&[(1.0, 0.0)]).unwrap()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_cos3_synthesis() {
        let g = Arc::new(RadialGrid::log_uniform(1e-3, 6.0, 256).unwrap());
        let f = PolarField::from_fn(g, 4, |k, r| {
            if k == 3 {
                Complex64::new(0.5 * (-r * r).exp(), 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap();
        let v = f.synthesize(&[(0.5, PI / 6.0)]).unwrap()[0];
        assert!(v.abs() < 1e-10, "{v}");
        let v = f.synthesize(&[(0.5, 0.0)]).unwrap()[0];
        assert!((v - (-0.25f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn outside_domain_is_error_and_core_is_regular() {
        let f = random_field(1, 1, 2);
        assert!(f.synthesize(&[(4.5, 0.0)]).is_err());
        let r0 = f.grid().r_min();
        let c: Vec<Complex64> = f.coeffs().iter().map(|m| m[0]).collect();
        assert_eq!(f.synthesize(&[(0.0, 1.0)]).unwrap()[0], c[0].re);
        let (r, a) = (0.5 * r0, 0.7);
        let want = c[0].re
            + (1..c.len())
                .map(|k| 2.0 * (c[k] * 0.5f64.powi(k as i32) * Complex64::from_polar(1.0, k as f64 * a)).re)
                .sum::<f64>();
        assert!((f.synthesize(&[(r, a)]).unwrap()[0] - want).abs() < 1e-12);
    }

    #[test]
    fn analyze_rejects_aliasing() {
        let f = random_field(2, 1, 5);
        assert!(matches!(f.to_physical(11), Err(Error::Aliasing { .. })));
        let ph = f.to_physical(12).unwrap();
        assert!(PolarField::analyze(f.grid_arc().clone(), &ph, 6).is_err());
    }

    #[test]
    fn single_harmonic_analysis() {
        let g = grid(40);
        let n = 7;
        let samples = PhysicalSamples {
            base: 1,
            n_alpha: 32,
            values: g
                .nodes()
                .iter()
                .map(|r| (0..32).map(|j| r * (n as f64 * 2.0 * PI * j as f64 / 32.0).cos()).collect())
                .collect(),
        };
        let f = PolarField::analyze(g.clone(), &samples, 15).unwrap();
        for (m, c) in f.coeffs().iter().enumerate() {
            let peak = c.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            if m == n {
                assert!((peak - 2.0).abs() < 1e-12);
            } else {
                assert!(peak < 1e-14, "mode {m}: {peak}");
            }
        }
    }

    #[test]
    fn parseval_matches_quadrature() {
        for seed in 0..3 {
            let f = random_field(seed, 3, 4);
            let l2 = f.lp_norm(2.0).unwrap();
            let e = f.mode_energy();
            assert!(((l2 * l2 / (2.0 * PI) - e) / e).abs() < 1e-8);
        }
    }

    #[test]
    fn averaging_and_algebra_keep_symmetry() {
        let a = random_field(4, 6, 3);
        let b = random_field(5, 6, 2);
        assert_eq!(a.add(&b).unwrap().symmetry_n(), Some(6));
        assert_eq!(a.scale(3.0).symmetry_n(), Some(6));
        assert_eq!(a.angular_average().symmetry_n(), Some(6));
        let c = random_field(6, 4, 2);
        assert_eq!(a.add(&c).unwrap().symmetry_n(), Some(2));
    }

    #[test]
    fn symmetry_declaration() {
        let g = grid(32);
        let p = vec![Complex64::new(1.0, 0.0); g.len()];
        let f = PolarField::from_fn(g.clone(), 6, |k, _| if k == 3 || k == 6 { p[0] } else { Complex64::default() })
            .unwrap();
        let s = f.with_symmetry(3).unwrap();
        assert_eq!(s.harmonics(), 2);
        assert!(f.with_symmetry(4).is_err());
        assert_eq!(s.to_base(1).unwrap(), f);
    }

    #[test]
    fn support_of_scaled_bump() {
        let g = Arc::new(RadialGrid::log_uniform(0.01, 10.0, 800).unwrap());
        let lam = 2.0;
        let prof: Vec<Complex64> = g
            .nodes()
            .iter()
            .map(|&r| Complex64::new(crate::profiles::bump(lam * r, 0.5, 4.0), 0.0))
            .collect();
        let f = PolarField::single_mode(g, 5, prof).unwrap();
        let (lo, hi) = f.support_annulus(0.0).unwrap();
        assert!((lo - 0.25).abs() < 0.01 && (hi - 2.0).abs() < 0.02, "{lo} {hi}");
        assert!(f.scale(0.0).support_annulus(0.0).is_none());
    }

    #[test]
    fn linf_of_unit_bump() {
        let g = Arc::new(RadialGrid::uniform(0.5, 2.5, 2001).unwrap());
        let v: Vec<f64> = g.nodes().iter().map(|&r| crate::profiles::plateau(r, 1.0, 2.0, 0.1)).collect();
        let f = PolarField::radial(g, &v).unwrap();
        assert!((f.lp_norm(f64::INFINITY).unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(f.scale(0.0).lp_norm(1.0).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = random_field(9, 5, 3);
        let back = PolarField::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back.coeffs(), f.coeffs());
        assert_eq!(back.base(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn physical_round_trip(seed in 0u64..10_000, base in 1usize..5, h in 0usize..6, extra in 0usize..9) {
            let f = random_field(seed, base, h);
            let ph = f.to_physical(f.min_alpha_nodes() + extra).unwrap();
            let back = PolarField::analyze(f.grid_arc().clone(), &ph, h).unwrap();
            let scale = f.coeffs().iter().flatten().fold(0.0f64, |a, z| a.max(z.norm()));
            for (a, b) in back.coeffs().iter().flatten().zip(f.coeffs().iter().flatten()) {
                prop_assert!((a - b).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn rotation_preserves_norms(seed in 0u64..10_000, c in -3.0f64..3.0) {
            let f = random_field(seed, 2, 3);
            let r = f.rotate(c);
            let (a, b) = (f.lp_norm(2.0).unwrap(), r.lp_norm(2.0).unwrap());
            prop_assert!(((a - b) / a).abs() < 1e-12);
        }

        #[test]
        fn synthesis_is_real_and_matches_physical(seed in 0u64..10_000) {
            let f = random_field(seed, 1, 4);
            let ph = f.to_physical(16).unwrap();
            let pts: Vec<(f64, f64)> = (0..16).map(|j| (f.grid().nodes()[10], ph.alpha(j))).collect();
            let v = f.synthesize(&pts).unwrap();
            for j in 0..16 {
                prop_assert!((v[j] - ph.values[10][j]).abs() < 1e-12);
            }
        }
    }
}
