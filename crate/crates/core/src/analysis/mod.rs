//! Coarse-grained description of profiles: contours, centers, distance to
//! the multi-front manifold, the spectral gap and front velocities.

pub mod centers;
pub mod contours;
pub mod fronts;
pub mod init;
pub mod spectral;

use crate::error::{Error, Result};

/// Tuning knobs shared by the analysis routines.
#[derive(Clone, Debug)]
pub struct AnalysisParams {
    /// Accuracy `ζ` of the phase indicator.
    pub zeta: f64,
    pub ell_minus: f64,
    pub ell_plus: f64,
    /// Squared-distance threshold `ϑ` for "close to the manifold".
    pub theta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub lambda: f64,
    /// Time slab length `S`.
    pub slab: f64,
    pub alpha_star: f64,
    /// Cost budget `P`, when known.
    pub budget: Option<f64>,
    /// Calibrated nucleation half-gap `ℓ*`.
    pub ell_star: f64,
    /// Relaxation time used by the third initialization case.
    pub tau: f64,
}

impl AnalysisParams {
    pub fn defaults(m_beta: f64) -> Self {
        AnalysisParams {
            zeta: 0.2 * m_beta,
            ell_minus: 1.0,
            ell_plus: 4.0,
            theta: 0.01,
            epsilon: 0.05,
            kappa: 2.0,
            lambda: 1.0,
            slab: 50.0,
            alpha_star: 0.01,
            budget: None,
            ell_star: 1.0,
            tau: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("zeta", self.zeta),
            ("ell_minus", self.ell_minus),
            ("ell_plus", self.ell_plus),
            ("theta", self.theta),
            ("kappa", self.kappa),
            ("lambda", self.lambda),
            ("slab", self.slab),
            ("alpha_star", self.alpha_star),
            ("ell_star", self.ell_star),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be positive")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::domain("epsilon must lie in (0, 1)"));
        }
        let ratio = self.ell_plus / self.ell_minus;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::domain("ell_plus must be an integer multiple of ell_minus"));
        }
        if self.ell_plus * self.ell_minus < 1.0 - 1e-12 {
            return Err(Error::domain("ell_plus must be at least 1/ell_minus"));
        }
        if !(self.lambda < self.kappa) {
            return Err(Error::domain("lambda must be smaller than kappa"));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::domain("tau must be nonnegative"));
        }
        Ok(())
    }

    /// `|log ε|`.
    pub fn log_eps(&self) -> f64 {
        self.epsilon.ln().abs()
    }

    /// Slab cost threshold `δ = |log ε|^{-κ}`.
    pub fn delta(&self) -> f64 {
        self.log_eps().powf(-self.kappa)
    }

    /// Force truncation threshold `Δ = |log ε|^{-λ}`.
    pub fn truncation(&self) -> f64 {
        self.log_eps().powf(-self.lambda)
    }

    /// Maximal number of fronts `⌊1 + 2P/F(m̄)⌋`.
    pub fn max_fronts(&self, front_energy: f64) -> Option<usize> {
        self.budget.map(|p| (1.0 + 2.0 * p / front_energy).floor() as usize)
    }
}
