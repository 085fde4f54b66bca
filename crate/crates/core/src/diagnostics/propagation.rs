use crate::solver::WaveState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationReport {
    /// `max |u|` outside the stencil cone `B_{R + m·dx}`, `m` the step index.
    /// Zero whenever the discrete domain of dependence is respected.
    pub outside_cone: f64,
    /// `max |u|` outside `B_{R + t + 5dx}` divided by `max |u|`.
    pub continuum_ratio: f64,
}

impl PropagationReport {
    pub fn cone_exact(&self) -> bool {
        self.outside_cone == 0.0
    }
}

/// Checks `u(t, ·)` against the numerical and the continuum light cones.
pub fn propagation_check(state: &WaveState, support_radius: f64) -> PropagationReport {
    let u = state.u_curr();
    let g = u.grid();
    let dx = g.dx();
    let cone = support_radius + state.step_index() as f64 * dx;
    let cont = support_radius + state.t() + 5.0 * dx;
    let (cone2, cont2) = (cone * cone * (1.0 + 1e-12), cont * cont * (1.0 + 1e-12));
    let mut outside_cone: f64 = 0.0;
    let mut outside_cont: f64 = 0.0;
    let mut max: f64 = 0.0;
    for row in 0..g.n() {
        for col in 0..g.n() {
            let (x, y) = g.point(row, col);
            let r2 = x * x + y * y;
            let v = u.at(row, col).abs();
            max = max.max(v);
            if r2 > cone2 {
                outside_cone = outside_cone.max(v);
            }
            if r2 > cont2 {
                outside_cont = outside_cont.max(v);
            }
        }
    }
    PropagationReport {
        outside_cone,
        continuum_ratio: if max > 0.0 { outside_cont / max } else { 0.0 },
    }
}
