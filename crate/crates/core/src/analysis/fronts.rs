use crate::action::AlphaField;
use crate::dynamics::ForcingField;
use crate::error::{check_len, Result};
use crate::grid::Grid;
use crate::statics::Instanton;

/// Front speeds driven by a truncated field and the integrated positions.
#[derive(Clone, Debug)]
pub struct FrontVelocities {
    /// `v⁰_i(t)` per slice.
    pub bare: Vec<Vec<f64>>,
    /// `v_i(t)` including the correction term.
    pub corrected: Vec<Vec<f64>>,
    /// `r_i(t) = ξ_i(t₀) + ∫ v_i`.
    pub positions: Vec<Vec<f64>>,
    /// Largest violation of `r̄(t) ≤ ξ̄(t)` in the front order.
    pub order_violation: f64,
}

impl FrontVelocities {
    pub fn order_holds(&self, tol: f64) -> bool {
        self.order_violation <= tol
    }
}

/// `(α b₁, m̄'_ξ)` in the weighted norm of `m̄_ξ`, summed near `ξ`.
fn projected_force(grid: &Grid, inst: &Instanton, b: &[f64], alpha: Option<&[f64]>, xi: f64) -> f64 {
    let h = grid.spacing();
    let l = grid.half_length();
    let lo = ((xi - 12.0 + l) / h).floor().max(0.0) as usize;
    let hi = (((xi + 12.0 + l) / h).ceil() as usize).min(grid.len() - 1);
    (lo..=hi)
        .map(|i| {
            let y = grid.x(i) - xi;
            let v = inst.value_at(y);
            let a = alpha.map_or(1.0, |a| a[i]);
            grid.weight(i) * a * b[i] * inst.derivative_at(y) / (1.0 - v * v)
        })
        .sum()
}

/// Bare speeds `σ_i |(α b₁, m̄'_{ξ_i})| / ‖m̄'‖²`, corrected speeds
/// `v⁰_i + σ_i correction` and positions. Without `alpha` the field is used as is.
pub fn front_velocities(
    inst: &Instanton,
    grid: &Grid,
    centers: &[Vec<f64>],
    rising_first: bool,
    b1: &ForcingField,
    alpha: Option<&AlphaField>,
    correction: f64,
) -> Result<FrontVelocities> {
    check_len(centers.len(), b1.len())?;
    let norm = inst.norm_mprime_nu_sq;
    let dt = b1.dt;
    let sigma = |i: usize| if i.is_multiple_of(2) == rising_first { 1.0 } else { -1.0 };
    let mut bare = Vec::with_capacity(centers.len());
    let mut corrected = Vec::with_capacity(centers.len());
    for (k, xi) in centers.iter().enumerate() {
        let a = alpha.map(|f| f.values[k].as_slice());
        let v0: Vec<f64> = xi
            .iter()
            .enumerate()
            .map(|(i, &x)| sigma(i) * projected_force(grid, inst, &b1.values[k], a, x).abs() / norm)
            .collect();
        corrected.push(v0.iter().enumerate().map(|(i, v)| v + sigma(i) * correction).collect::<Vec<_>>());
        bare.push(v0);
    }
    let k_fronts = centers.first().map_or(0, |c| c.len());
    let mut positions = vec![centers.first().cloned().unwrap_or_default()];
    for k in 1..centers.len() {
        let prev = &positions[k - 1];
        let next: Vec<f64> =
            (0..k_fronts).map(|i| prev[i] + 0.5 * dt * (corrected[k - 1][i] + corrected[k][i])).collect();
        positions.push(next);
    }
    let mut violation: f64 = 0.0;
    for (r, xi) in positions.iter().zip(centers) {
        for i in 0..k_fronts.min(xi.len()) {
            // rising fronts: r ≥ ξ; falling fronts: r ≤ ξ
            let gap = sigma(i) * (xi[i] - r[i]);
            violation = violation.max(gap);
        }
    }
    Ok(FrontVelocities { bare, corrected, positions, order_violation: violation })
}
