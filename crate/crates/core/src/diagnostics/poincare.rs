//! Sampling lower bound for the whole-space Poincaré constant
//!
//! ```text
//! ∫_{|x|≤ρ} |v|² ≤ C(ρ) (∫ |∇v|² + ∫_{|x|≥ρ} |v|²).
//! ```
//!
//! The estimator is the largest ratio seen over a seeded family of smooth
//! test fields; it bounds the optimal `C(ρ)` from below and proves nothing
//! about it from above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    dirichlet_form, integrate_region, smoothstep5, Bump, Grid2D, Region, ScalarField,
};

/// Lattice used by [`poincare_sample`] for radius `ρ`: `[−6ρ, 6ρ]²` with
/// spacing `ρ/40`.
pub fn poincare_grid(rho: f64) -> Result<Grid2D> {
    Grid2D::new(6.0 * rho, 481)
}

/// `∫_{|x|≤ρ}v² / (∫|∇v|² + ∫_{|x|>ρ}v²)`, or `None` when the denominator
/// vanishes.
pub fn poincare_ratio(v: &ScalarField, rho: f64) -> Option<f64> {
    let sq = v.map(|x| x * x);
    let inner = integrate_region(&sq, Region::Disk(rho));
    let outer = integrate_region(&sq, Region::Exterior(rho));
    let denom = dirichlet_form(v, v) + outer;
    if denom > 0.0 {
        Some(inner / denom)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareEstimate {
    pub rho: f64,
    /// Largest ratio seen.
    pub max_ratio: f64,
    /// Ratio of every non-degenerate sample, in draw order.
    pub ratios: Vec<f64>,
    /// Samples with a vanishing denominator.
    pub skipped: usize,
}

impl PoincareEstimate {
    /// Maximum over the first `m` samples.
    pub fn prefix_max(&self, m: usize) -> f64 {
        self.ratios[..m.min(self.ratios.len())]
            .iter()
            .fold(0.0, |a: f64, &b| a.max(b))
    }
}

/// Draws one random bump: half of them sit inside `B_ρ`, half straddle the
/// circle `|x| = ρ`.
fn random_bump(rng: &mut ChaCha8Rng, rho: f64) -> Bump {
    let amplitude = rng.gen_range(-1.0..=1.0);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let (radius, dist) = if rng.gen_bool(0.5) {
        let radius = rng.gen_range(0.2 * rho..=rho);
        let room = rho - radius;
        (radius, room * rng.gen_range(0.0f64..=1.0).sqrt())
    } else {
        let radius = rng.gen_range(0.2 * rho..=2.0 * rho);
        let lo = (rho - radius).abs();
        (radius, rng.gen_range(lo..=rho + radius))
    };
    Bump::new((dist * angle.cos(), dist * angle.sin()), radius, amplitude)
}

fn add_bump(f: &mut ScalarField, b: &Bump) {
    let g = *f.grid();
    let lo = |c: f64| g.nearest(c - b.radius).saturating_sub(1);
    let hi = |c: f64| (g.nearest(c + b.radius) + 1).min(g.n() - 1);
    let (c0, c1) = (lo(b.center.0), hi(b.center.0));
    let (r0, r1) = (lo(b.center.1), hi(b.center.1));
    let n = g.n();
    let vals = f.values_mut();
    for row in r0..=r1 {
        let y = g.coord(row);
        for col in c0..=c1 {
            vals[row * n + col] += b.value(g.coord(col), y);
        }
    }
}

/// Largest ratio over `n_samples` random sums of one to three bumps.
pub fn poincare_sample(grid: &Grid2D, rho: f64, n_samples: usize, seed: u64) -> Result<PoincareEstimate> {
    if !(rho > 0.0 && 5.0 * rho <= grid.half_extent()) {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} needs a grid of half extent >= {}",
            5.0 * rho
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(n_samples);
    let mut skipped = 0;
    let mut field = ScalarField::zeros(*grid);
    for _ in 0..n_samples {
        field.values_mut().iter_mut().for_each(|v| *v = 0.0);
        let count = rng.gen_range(1..=3);
        for _ in 0..count {
            add_bump(&mut field, &random_bump(&mut rng, rho));
        }
        match poincare_ratio(&field, rho) {
            Some(r) if r.is_finite() => ratios.push(r),
            _ => skipped += 1,
        }
    }
    let max_ratio = ratios.iter().fold(0.0, |a: f64, &b| a.max(b));
    Ok(PoincareEstimate {
        rho,
        max_ratio,
        ratios,
        skipped,
    })
}

/// Ratio for the plateau `v = 1` on `B_ρ` with a quintic skirt of width `w`.
pub fn plateau_ratio(grid: &Grid2D, rho: f64, skirt: f64) -> Option<f64> {
    let v = ScalarField::from_fn(*grid, |x, y| 1.0 - smoothstep5((x.hypot(y) - rho) / skirt));
    poincare_ratio(&v, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_and_exterior_samples() {
        let g = Grid2D::new(3.0, 61).unwrap();
        assert_eq!(poincare_ratio(&ScalarField::zeros(g), 1.0), None);
        let mut f = ScalarField::zeros(g);
        add_bump(&mut f, &Bump::new((2.0, 0.0), 0.8, 1.0));
        assert_eq!(poincare_ratio(&f, 1.0), Some(0.0));
    }

    #[test]
    fn add_bump_matches_full_evaluation() {
        let g = Grid2D::new(3.0, 61).unwrap();
        let b = Bump::new((0.33, -0.71), 1.1, 0.6);
        let mut f = ScalarField::zeros(g);
        add_bump(&mut f, &b);
        let full = crate::geometry::make_bump(&b, &g).unwrap();
        assert_eq!(f, full);
    }

    #[test]
    fn sampler_is_seeded() {
        let g = Grid2D::new(6.0, 121).unwrap();
        let a = poincare_sample(&g, 1.0, 20, 7).unwrap();
        let b = poincare_sample(&g, 1.0, 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.ratios.iter().all(|r| r.is_finite() && *r >= 0.0));
    }
}
