//! Numeric tolerances shared by the dual solver, the builder and the oracle.

/// Relative tolerances used throughout the pipeline. They are scaled by the
/// magnitude of the data before use, see the helper methods.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Slack when comparing an objective value against the cutoff bound.
    pub eps_c: f64,
    /// Primal feasibility slack, also the entering threshold of the
    /// active-set solver and its dual sign slack at optimality.
    pub eps_feas: f64,
    /// Threshold below which a Cholesky pivot counts as linearly dependent.
    pub eps_pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_c: 1e-9,
            eps_feas: 1e-10,
            eps_pivot: 1e-10,
        }
    }
}

impl Tolerances {
    /// Absolute slack for the bound check at a given bound value.
    pub fn bound_slack(&self, bound: f64) -> f64 {
        self.eps_c * (1.0 + bound.abs())
    }

    /// Absolute pivot threshold for a Gram matrix with the given maximal
    /// diagonal entry.
    pub fn pivot_threshold(&self, max_diag: f64) -> f64 {
        self.eps_pivot * max_diag
    }

    /// Absolute feasibility slack for data of the given magnitude.
    pub fn feasibility_slack(&self, scale: f64) -> f64 {
        self.eps_feas * (1.0 + scale)
    }
}
