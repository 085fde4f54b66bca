use super::DiagnosticsRecord;

/// Multiplicative slack on the right-hand side for quadrature error.
pub const LEMMA22_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma22Sample {
    pub t: f64,
    /// `‖u(t)‖² + ∫₀ᵗ∫a|u|²`
    pub lhs: f64,
    /// `‖u₀‖² + I_h + (2/π)‖u₁ + a u₀‖₁² log(2R + t)`
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma22Report {
    pub samples: Vec<Lemma22Sample>,
    /// First sample with `lhs > 1.05·rhs`, if any.
    pub violation: Option<Lemma22Sample>,
    /// `max lhs/rhs` over samples with `rhs > 0`.
    pub worst_ratio: f64,
}

impl Lemma22Report {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the `L²` growth bound built from the Newton potential at every
/// record: `u0_l2sq = ‖u₀‖²`, `i_h = ∫_{|x|≤2R}|∇h|²`, `f_l1 = ‖u₁ + a u₀‖₁`.
pub fn lemma22_check(
    records: &[DiagnosticsRecord],
    u0_l2sq: f64,
    i_h: f64,
    f_l1: f64,
    support_radius: f64,
) -> Lemma22Report {
    let c1 = 2.0 / std::f64::consts::PI;
    let mut samples = Vec::with_capacity(records.len());
    let mut violation = None;
    let mut worst_ratio: f64 = 0.0;
    for r in records {
        let lhs = r.l2u + r.weighted_l2_cum;
        let rhs = u0_l2sq + i_h + c1 * f_l1 * f_l1 * (2.0 * support_radius + r.t).ln();
        let s = Lemma22Sample { t: r.t, lhs, rhs };
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
        if lhs > LEMMA22_SLACK * rhs && violation.is_none() {
            violation = Some(s);
        }
        samples.push(s);
    }
    Lemma22Report {
        samples,
        violation,
        worst_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_passes() {
        let rec = DiagnosticsRecord::from_array([0.0; 11]);
        let rep = lemma22_check(&[rec], 0.0, 0.0, 0.0, 1.0);
        assert!(rep.passed());
        assert_eq!(rep.samples[0].lhs, 0.0);
        assert_eq!(rep.samples[0].rhs, 0.0);
    }

    #[test]
    fn violation_is_reported() {
        let mut rec = DiagnosticsRecord::from_array([0.0; 11]);
        rec.t = 3.0;
        rec.l2u = 10.0;
        let rep = lemma22_check(&[rec], 1.0, 1.0, 0.0, 1.0);
        let v = rep.violation.unwrap();
        assert_eq!(v.t, 3.0);
        assert_eq!(v.lhs, 10.0);
        assert_eq!(v.rhs, 2.0);
    }
}
