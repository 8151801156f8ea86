//! Smooth compactly supported radial profiles.

use serde::{Deserialize, Serialize};

/// `exp(-1/(1-u²))` with `u` the affine image of `(lo, hi)` onto `(-1, 1)`.
pub fn bump(r: f64, lo: f64, hi: f64) -> f64 {
    let u = (2.0 * r - lo - hi) / (hi - lo);
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

pub fn bump_deriv(r: f64, lo: f64, hi: f64) -> f64 {
    let u = (2.0 * r - lo - hi) / (hi - lo);
    if u.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - u * u;
        (-1.0 / q).exp() * (-2.0 * u / (q * q)) * 2.0 / (hi - lo)
    }
}

/// C^∞ step: 0 for `t <= 0`, 1 for `t >= 1`, and `S(1-t) = 1 - S(t)`.
pub fn smooth_step(t: f64) -> f64 {
    let psi = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let a = psi(t);
    let b = psi(1.0 - t);
    if a + b == 0.0 {
        if t > 0.5 {
            1.0
        } else {
            0.0
        }
    } else {
        a / (a + b)
    }
}

/// Smooth indicator of `[lo, hi]`: ramps over `lo ± eps` and `hi ± eps`.
pub fn plateau(r: f64, lo: f64, hi: f64, eps: f64) -> f64 {
    let up = smooth_step((r - (lo - eps)) / (2.0 * eps));
    let down = 1.0 - smooth_step((r - (hi - eps)) / (2.0 * eps));
    up * down
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialProfile {
    Zero,
    Bump {
        lo: f64,
        hi: f64,
        amp: f64,
    },
    /// `c_amp·(−λ₀²f̃(λ₀r) + λ₀⁻²f̃(r/λ₀))` with `f̃` the unit bump on
    /// `(tilde_lo, tilde_hi)`. Zero mean against `r dr` for every choice.
    Composite {
        tilde_lo: f64,
        tilde_hi: f64,
        lambda0: f64,
        c_amp: f64,
    },
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Zero => 0.0,
            RadialProfile::Bump { lo, hi, amp } => amp * bump(r, lo, hi),
            RadialProfile::Composite { tilde_lo, tilde_hi, lambda0, c_amp } => {
                let l2 = lambda0 * lambda0;
                c_amp * (-l2 * bump(lambda0 * r, tilde_lo, tilde_hi)
                    + bump(r / lambda0, tilde_lo, tilde_hi) / l2)
            }
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Zero => 0.0,
            RadialProfile::Bump { lo, hi, amp } => amp * bump_deriv(r, lo, hi),
            RadialProfile::Composite { tilde_lo, tilde_hi, lambda0, c_amp } => {
                let l2 = lambda0 * lambda0;
                c_amp * (-l2 * lambda0 * bump_deriv(lambda0 * r, tilde_lo, tilde_hi)
                    + bump_deriv(r / lambda0, tilde_lo, tilde_hi) / (l2 * lambda0))
            }
        }
    }

    /// Support intervals (open) in increasing order.
    pub fn supports(&self) -> Vec<(f64, f64)> {
        match *self {
            RadialProfile::Zero => vec![],
            RadialProfile::Bump { lo, hi, amp } => {
                if amp == 0.0 {
                    vec![]
                } else {
                    vec![(lo, hi)]
                }
            }
            RadialProfile::Composite { tilde_lo, tilde_hi, lambda0, c_amp } => {
                if c_amp == 0.0 {
                    vec![]
                } else {
                    vec![
                        (tilde_lo / lambda0, tilde_hi / lambda0),
                        (tilde_lo * lambda0, tilde_hi * lambda0),
                    ]
                }
            }
        }
    }

    pub fn outer_radius(&self) -> Option<f64> {
        self.supports().last().map(|s| s.1)
    }

    pub fn inner_radius(&self) -> Option<f64> {
        self.supports().first().map(|s| s.0)
    }

    /// Same shape, amplitude multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        match self.clone() {
            RadialProfile::Zero => RadialProfile::Zero,
            RadialProfile::Bump { lo, hi, amp } => RadialProfile::Bump { lo, hi, amp: amp * a },
            RadialProfile::Composite { tilde_lo, tilde_hi, lambda0, c_amp } => {
                RadialProfile::Composite { tilde_lo, tilde_hi, lambda0, c_amp: c_amp * a }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.supports().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.5, 0.5, 4.0), 0.0);
        assert_eq!(bump(4.0, 0.5, 4.0), 0.0);
        assert!((bump(2.25, 0.5, 4.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        let p = RadialProfile::Composite { tilde_lo: 0.5, tilde_hi: 2.0, lambda0: 3.0, c_amp: 0.7 };
        for r in [0.2, 0.4, 0.55, 2.0, 4.5] {
            let h = 1e-6;
            let fd = (p.eval(r + h) - p.eval(r - h)) / (2.0 * h);
            assert!((fd - p.deriv(r)).abs() < 1e-5 * (1.0 + fd.abs()), "{r}");
        }
    }

    #[test]
    fn step_symmetry() {
        for t in [0.1, 0.3, 0.45] {
            assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-15);
        }
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
    }

    #[test]
    fn profile_serde_round_trip() {
        let p = RadialProfile::Bump { lo: 0.5, hi: 4.0, amp: 0.01 };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<RadialProfile>(&s).unwrap(), p);
    }
}
