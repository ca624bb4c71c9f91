//! Macroscopic layer: mobility, the cost `w_n(R, T)` of strategies with `n`
//! nucleations, strategy builders, the particle model and interval audits.

pub mod audit;
pub mod particles;
pub mod strategy;

use crate::error::{Error, Result};
use crate::statics::Instanton;

/// `μ = 4/‖m̄'‖²`, so that `V²T/μ` is the cost of a moving instanton.
pub fn mobility(inst: &Instanton) -> f64 {
    4.0 / inst.norm_mprime_nu_sq
}

/// Macroscopic displacement problem at a fixed scale `ε`.
#[derive(Clone, Debug)]
pub struct MacroProblem {
    pub r: f64,
    pub t: f64,
    pub v: f64,
    pub front_energy: f64,
    pub mu: f64,
    /// Cost budget `P`.
    pub budget: f64,
    pub epsilon: f64,
}

impl MacroProblem {
    /// Budget defaults to `1.05 inf_n w_n`.
    pub fn new(inst: &Instanton, r: f64, t: f64, epsilon: f64, budget: Option<f64>) -> Result<Self> {
        if !(r > 0.0 && r.is_finite() && t > 0.0 && t.is_finite()) {
            return Err(Error::domain("R and T must be positive"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::domain("epsilon must lie in (0, 1)"));
        }
        let mut p = MacroProblem {
            r,
            t,
            v: r / t,
            front_energy: inst.free_energy,
            mu: mobility(inst),
            budget: f64::INFINITY,
            epsilon,
        };
        let inf = p.infimum();
        p.budget = match budget {
            Some(b) if b > inf => b,
            Some(b) => return Err(Error::domain(format!("budget {b} does not exceed inf w_n = {inf}"))),
            None => 1.05 * inf,
        };
        Ok(p)
    }

    /// Problem with `V²T/(μF)` equal to `ratio` at macroscopic time `t`.
    pub fn with_ratio(inst: &Instanton, ratio: f64, t: f64, epsilon: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::domain("ratio must be positive"));
        }
        let v = (ratio * mobility(inst) * inst.free_energy / t).sqrt();
        Self::new(inst, v * t, t, epsilon, None)
    }

    /// `V²T/(μF)`.
    pub fn ratio(&self) -> f64 {
        self.v * self.v * self.t / (self.mu * self.front_energy)
    }

    /// Microscopic displacement `R/ε`.
    pub fn micro_distance(&self) -> f64 {
        self.r / self.epsilon
    }

    /// Microscopic horizon `T/ε²`.
    pub fn micro_horizon(&self) -> f64 {
        self.t / (self.epsilon * self.epsilon)
    }

    /// Largest admissible front count `⌊1 + 2P/F⌋`.
    pub fn max_particles(&self) -> usize {
        (1.0 + 2.0 * self.budget / self.front_energy).floor() as usize
    }

    /// Largest `n` with `2n + 1` fronts admissible.
    pub fn max_nucleations(&self) -> usize {
        (self.max_particles().max(1) - 1) / 2
    }

    fn infimum(&self) -> f64 {
        // the continuous optimum bounds the useful range of n
        let cont = ((self.v * self.v * self.t / (self.mu * self.front_energy)).sqrt() - 1.0) / 2.0;
        let top = cont.max(0.0).ceil() as usize + 1;
        (0..=top).map(|n| w(self, n)).fold(f64::INFINITY, f64::min)
    }
}

fn w(p: &MacroProblem, n: usize) -> f64 {
    let k = (2 * n + 1) as f64;
    2.0 * n as f64 * p.front_energy + k * (p.v / k).powi(2) * p.t / p.mu
}

/// `w_n = 2nF + (2n+1)(V/(2n+1))² T/μ`.
pub fn macro_cost(problem: &MacroProblem, n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain("nucleation count must be nonnegative"));
    }
    Ok(w(problem, n as usize))
}

/// `(n, w_n)` for `n = 0..=n_max`.
pub fn cost_table(problem: &MacroProblem) -> Vec<(usize, f64)> {
    (0..=problem.max_nucleations()).map(|n| (n, w(problem, n))).collect()
}

/// Exhaustive minimizer of `w_n` over the admissible range; ties go to the smaller `n`.
pub fn optimal_nucleation_count(problem: &MacroProblem) -> (usize, f64) {
    cost_table(problem).into_iter().fold((0, f64::INFINITY), |best, (n, v)| if v < best.1 { (n, v) } else { best })
}
