//! Split-step sign checks of `F` and the VTCC cost trend along a trajectory.

use serde::Serialize;

use crate::control::Law;
use crate::density::GridDensity;
use crate::simulate::TrajectoryRecord;

/// Mean cell mass times the squared workspace diameter.
pub fn epsilon_mono(grid_density: &GridDensity) -> f64 {
    let diam = grid_density.grid().workspace().diameter();
    diam * diam / grid_density.grid().num_cells() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub epsilon: f64,
    /// Records that carried a split-step probe.
    pub records_checked: usize,
    /// `F(x_{t+dt}, phi_t) > F(x_t, phi_t) + eps`
    pub descent_violations: usize,
    /// `F(x_t, phi_{t+dt}) < F(x_t, phi_t) - eps`
    pub ascent_violations: usize,
    /// VTCC only: `J` rising by more than `eps` between consecutive records.
    pub cost_violations: usize,
    /// Largest excess beyond the allowed band, 0 if none.
    pub worst_violation: f64,
}

impl MonotonicityReport {
    pub fn total_violations(&self) -> usize {
        self.descent_violations + self.ascent_violations + self.cost_violations
    }
}

pub fn monotonicity_audit(trajectory: &TrajectoryRecord, epsilon: f64) -> MonotonicityReport {
    let mut report = MonotonicityReport {
        epsilon,
        records_checked: 0,
        descent_violations: 0,
        ascent_violations: 0,
        cost_violations: 0,
        worst_violation: 0.0,
    };
    for probe in trajectory.records.iter().filter_map(|r| r.probe) {
        report.records_checked += 1;
        let up = probe.moved_x - probe.base - epsilon;
        if up > 0.0 {
            report.descent_violations += 1;
            report.worst_violation = report.worst_violation.max(up);
        }
        let down = probe.base - probe.moved_phi - epsilon;
        if down > 0.0 {
            report.ascent_violations += 1;
            report.worst_violation = report.worst_violation.max(down);
        }
    }
    if trajectory.law == Law::Vtcc {
        for w in trajectory.records.windows(2) {
            let rise = w[1].cost_j - w[0].cost_j - epsilon;
            if rise > 0.0 {
                report.cost_violations += 1;
                report.worst_violation = report.worst_violation.max(rise);
            }
        }
    }
    report
}
