use serde::{Deserialize, Serialize};

/// Numerical tolerance policy used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Absolute tolerance for structural equalities (`T 1 = 1`, `eta0 1 = 1`,
    /// Kraus completeness, unitarity).
    pub structural: f64,
    /// Probabilities in `[-clamp, 0)` are reported as zero.
    pub clamp: f64,
    /// Largest imaginary part tolerated on a quantity that must be real.
    pub residue: f64,
    /// Relative singular value threshold for numerical rank.
    pub rank_rel: f64,
    /// History words with `|P(w)|` at or below this are never retained.
    pub prob_floor: f64,
    /// Refuse to invert matrices with a larger condition number.
    pub cond_cap: f64,
    /// Absolute tolerance when comparing probabilities or canonical forms of
    /// two models.
    pub equivalence: f64,
    /// Smallest probability (or trace) that may be conditioned on.
    pub degenerate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-9,
            clamp: 1e-12,
            residue: 1e-10,
            rank_rel: 1e-9,
            prob_floor: 1e-12,
            cond_cap: 1e12,
            equivalence: 1e-8,
            degenerate: 1e-12,
        }
    }
}

impl Tolerances {
    /// Clamp tiny negative round-off to zero.
    pub fn clamp_probability(&self, p: f64) -> f64 {
        if p < 0.0 && p >= -self.clamp {
            0.0
        } else {
            p
        }
    }
}
