use super::{Grid2D, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingKind {
    /// Zero on `|x| ≤ L − δ`, `ε₀` on `|x| ≥ L`, quintic ramp in between.
    Localized,
    /// `a ≡ c`.
    Constant(f64),
    /// `a ≡ 0` (free waves).
    Zero,
}

/// Admissible friction coefficient: `C²`, non-negative, bounded, and at least
/// `ε₀` outside the disk of radius `L` (for the localized and positive
/// constant kinds).
///
/// `eps0` and `activation_radius` are carried by every kind because the
/// multiplier weight and the interior/exterior split need them even when the
/// friction itself is constant or absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingProfile {
    pub kind: DampingKind,
    pub eps0: f64,
    pub activation_radius: f64,
    pub ramp_width: f64,
}

/// `6s⁵ − 15s⁴ + 10s³` on `[0, 1]`, clamped outside. Its first and second
/// derivatives vanish at both ends, which makes the ramp `C²`.
#[inline]
pub fn smoothstep5(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (s * 6.0 - 15.0) + 10.0)
}

impl DampingProfile {
    pub fn localized(eps0: f64, activation_radius: f64, ramp_width: f64) -> Result<Self> {
        Self {
            kind: DampingKind::Localized,
            eps0,
            activation_radius,
            ramp_width,
        }
        .validated()
    }

    pub fn constant(c: f64, activation_radius: f64) -> Result<Self> {
        Self {
            kind: DampingKind::Constant(c),
            eps0: c,
            activation_radius,
            ramp_width: 0.5 * activation_radius,
        }
        .validated()
    }

    pub fn zero(eps0: f64, activation_radius: f64) -> Result<Self> {
        Self {
            kind: DampingKind::Zero,
            eps0,
            activation_radius,
            ramp_width: 0.5 * activation_radius,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidDamping(m));
        if !(self.activation_radius.is_finite() && self.activation_radius > 0.0) {
            return bad(format!("L must be positive, got {}", self.activation_radius));
        }
        match self.kind {
            DampingKind::Localized => {
                if !(self.eps0.is_finite() && self.eps0 > 0.0) {
                    return bad(format!("eps0 must be positive, got {}", self.eps0));
                }
                if !(self.ramp_width > 0.0 && self.ramp_width < self.activation_radius) {
                    return bad(format!(
                        "ramp width must lie in (0, L) = (0, {}), got {}",
                        self.activation_radius, self.ramp_width
                    ));
                }
            }
            DampingKind::Constant(c) => {
                if !(c.is_finite() && c >= 0.0) {
                    return bad(format!("constant damping must be >= 0, got {c}"));
                }
            }
            DampingKind::Zero => {}
        }
        Ok(self)
    }

    /// `a` at radius `r = |x|`.
    pub fn value_at_radius(&self, r: f64) -> f64 {
        match self.kind {
            DampingKind::Localized => {
                let inner = self.activation_radius - self.ramp_width;
                if r <= inner {
                    0.0
                } else if r >= self.activation_radius {
                    self.eps0
                } else {
                    self.eps0 * smoothstep5((r - inner) / self.ramp_width)
                }
            }
            DampingKind::Constant(c) => c,
            DampingKind::Zero => 0.0,
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.value_at_radius(x.hypot(y))
    }

    /// Upper bound of `a`.
    pub fn sup(&self) -> f64 {
        match self.kind {
            DampingKind::Localized => self.eps0,
            DampingKind::Constant(c) => c,
            DampingKind::Zero => 0.0,
        }
    }
}

/// Samples the profile on `grid`.
pub fn make_damping(profile: &DampingProfile, grid: &Grid2D) -> Result<ScalarField> {
    let p = profile.validated()?;
    Ok(ScalarField::from_fn(*grid, |x, y| p.value(x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn localized_plateaus_and_ramp() {
        let g = Grid2D::new(8.0, 65).unwrap();
        let p = DampingProfile::localized(1.0, 4.0, 1.0).unwrap();
        let a = make_damping(&p, &g).unwrap();
        assert_eq!(a.sample(0.0, 0.0), 0.0);
        assert_eq!(a.sample(5.0, 0.0), 1.0);
        assert_eq!(a.sample(3.5, 0.0), 0.5);
        // direct evaluation of the polynomial at s = 1/2
        let s: f64 = 0.5;
        assert_eq!(6.0 * s.powi(5) - 15.0 * s.powi(4) + 10.0 * s.powi(3), 0.5);
        for row in 0..65 {
            for col in 0..65 {
                let r = g.radius(row, col);
                let v = a.at(row, col);
                assert!((0.0..=1.0).contains(&v));
                if r <= 3.0 {
                    assert_eq!(v, 0.0);
                }
                if r >= 4.0 {
                    assert_eq!(v, 1.0);
                }
            }
        }
    }

    #[test]
    fn ramp_is_c2_at_the_joints() {
        let h = 1e-4;
        for s in [0.0, 1.0] {
            let d1 = (smoothstep5(s + h) - smoothstep5(s - h)) / (2.0 * h);
            let d2 = (smoothstep5(s + h) - 2.0 * smoothstep5(s) + smoothstep5(s - h)) / (h * h);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-3, "{s}: {d1} {d2}");
        }
    }

    #[test]
    fn constant_and_zero_kinds() {
        let g = Grid2D::new(2.0, 9).unwrap();
        let a = make_damping(&DampingProfile::constant(1.0, 1.0).unwrap(), &g).unwrap();
        assert!(a.values().iter().all(|&v| v == 1.0));
        let a = make_damping(&DampingProfile::zero(1.0, 1.0).unwrap(), &g).unwrap();
        assert!(a.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DampingProfile::localized(1.0, 4.0, 4.0).is_err());
        assert!(DampingProfile::localized(1.0, 4.0, 5.0).is_err());
        assert!(DampingProfile::localized(0.0, 4.0, 1.0).is_err());
        assert!(DampingProfile::localized(-1.0, 4.0, 1.0).is_err());
        assert!(DampingProfile::constant(-0.1, 1.0).is_err());
    }
}
