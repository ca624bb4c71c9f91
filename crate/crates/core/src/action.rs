//! Large-deviation cost of a trajectory and the bookkeeping built on it.

use crate::dynamics::{force_row, ForcingField, SliceSource};
use crate::error::{Error, Result};
use crate::grid::{clamp_unit, Grid};
use crate::model::Model;
use crate::statics::{clipped_gradient_norm_sq, free_energy_unchecked, Instanton};

/// `h(r) = r log r - r + 1`, evaluated as `h(1 + d)`.
fn relative_entropy_1p(d: f64) -> f64 {
    if d.abs() < 1e-3 {
        // Σ_{n≥2} (-1)^n d^n / (n(n-1))
        let mut term = d * d;
        let mut sum = 0.0;
        for n in 2..9 {
            let nf = n as f64;
            sum += term / (nf * (nf - 1.0));
            term *= -d;
        }
        sum
    } else {
        let r = 1.0 + d;
        if r == 0.0 {
            1.0
        } else {
            r * r.ln() - d
        }
    }
}

/// Cost density `H(b, u, w)` with `u = φ` and `w = -tanh(β J*φ)`.
pub fn cost_density(b: f64, u: f64, w: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&u) || !(w > -1.0 && w < 1.0) || !b.is_finite() {
        return Err(Error::domain(format!("cost density outside its domain: b={b}, u={u}, w={w}")));
    }
    if !(1.0 + u * w > 0.0) {
        return Err(Error::domain("1 + uw must be positive"));
    }
    Ok(density(b, u, w))
}

/// Unchecked density; `u` may sit at ±1, `w` strictly inside.
pub(crate) fn density(b: f64, u: f64, w: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let up = (1.0 - u) * (1.0 - w);
    let down = (1.0 + u) * (1.0 + w);
    let a = b - u - w;
    if up <= 0.0 || down <= 0.0 {
        // only one jump direction available
        if up <= 0.0 {
            if a > 0.0 {
                return f64::INFINITY;
            }
            return 0.25 * down * relative_entropy_1p(-2.0 * a / down - 1.0);
        }
        if a < 0.0 {
            return f64::INFINITY;
        }
        return 0.25 * up * relative_entropy_1p(2.0 * a / up - 1.0);
    }
    let s = (a * a + up * down).sqrt();
    let a0 = -(u + w);
    let s0 = 1.0 + u * w;
    let d_up = b * (1.0 + (a + a0) / (s + s0)) / up;
    let a_plus_s = if a >= 0.0 { a + s } else { up * down / (s - a) };
    let d_down = -d_up * up / a_plus_s;
    0.25 * up * relative_entropy_1p(d_up) + 0.25 * down * relative_entropy_1p(d_down)
}

/// Small-field limit `b² / (4(1 + uw))`.
pub fn quadratic_density(b: f64, u: f64, w: f64) -> f64 {
    b * b / (4.0 * (1.0 + u * w))
}

/// `(√λ₊ - √λ₋)²` with `λ₊ = (1-u)(1-w)/4`, `λ₋ = (1+u)(1+w)/4`: the
/// zero-velocity value of the symmetrized Lagrangian.
fn rate_imbalance(u: f64, w: f64) -> f64 {
    let up = ((1.0 - u) * (1.0 - w) / 4.0).max(0.0).sqrt();
    let down = ((1.0 + u) * (1.0 + w) / 4.0).max(0.0).sqrt();
    (up - down).powi(2)
}

/// Free-energy comparison terms evaluated along a trajectory.
#[derive(Clone, Debug, Default)]
pub struct Reversibility {
    pub energy_start: f64,
    pub energy_end: f64,
    /// `∫ ‖1 ∧ |f(φ)|‖² dt`.
    pub clipped_gradient: f64,
    /// `(β/2) ΔF + ∫ ‖1 ∧ |f|‖²`.
    pub bound: f64,
    /// `I - bound`.
    pub slack: f64,
    /// `∫∫ (√λ₊ - √λ₋)²`.
    pub rate_imbalance: f64,
    /// `(β/2) ΔF + ∫∫ (√λ₊ - √λ₋)²`.
    pub sharp_bound: f64,
    pub sharp_slack: f64,
    /// `β ΔF`, the bound for time-reversed free relaxations.
    pub reversal_bound: f64,
}

impl Reversibility {
    pub fn delta_f(&self) -> f64 {
        self.energy_end - self.energy_start
    }
}

#[derive(Clone, Debug)]
pub struct CostReport {
    pub total: f64,
    /// `∫∫ b²/(4(1+uw))`, the small-field approximation of the total.
    pub quadratic_total: f64,
    /// Cost rate `∫ H dx` per slice.
    pub slice_rate: Vec<f64>,
    pub slab_length: f64,
    pub slab_costs: Vec<f64>,
    pub good: Vec<bool>,
    pub bad_count: usize,
    pub reversibility: Reversibility,
    pub sup_force: f64,
}

/// Per-slice quantities gathered in one pass.
#[derive(Clone, Copy, Default)]
struct SliceStats {
    cost: f64,
    quadratic: f64,
    clipped: f64,
    imbalance: f64,
    sup_force: f64,
}

fn slice_stats(model: &Model, src: &dyn SliceSource, k: usize, buf: &mut [Vec<f64>; 3], b: &mut [f64], field: &mut [f64]) -> SliceStats {
    let grid = model.grid;
    force_row(model, src, k, buf, b);
    let phi = &buf[1];
    model.field_into(phi, field);
    let mut st = SliceStats::default();
    for i in 0..phi.len() {
        let u = clamp_unit(phi[i]);
        let w = -(model.beta * field[i]).tanh();
        let c = grid.weight(i);
        st.cost += c * density(b[i], u, w);
        st.quadratic += c * quadratic_density(b[i], u, w);
        st.imbalance += c * rate_imbalance(u, w);
        let f = (-field[i] + u.atanh() / model.beta).abs().min(1.0);
        st.clipped += c * f * f;
        st.sup_force = st.sup_force.max(b[i].abs());
    }
    st
}

fn parallel_stats(model: &Model, src: &(dyn SliceSource + Sync)) -> Vec<SliceStats> {
    let count = src.count();
    let n = model.n();
    let threads = std::thread::available_parallelism().map_or(1, |p| p.get()).min(16).max(1);
    let chunk = count.div_ceil(threads).max(1);
    let mut out = vec![SliceStats::default(); count];
    std::thread::scope(|scope| {
        for (t, part) in out.chunks_mut(chunk).enumerate() {
            scope.spawn(move || {
                let mut buf = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
                let mut b = vec![0.0; n];
                let mut field = vec![0.0; n];
                for (j, slot) in part.iter_mut().enumerate() {
                    *slot = slice_stats(model, src, t * chunk + j, &mut buf, &mut b, &mut field);
                }
            });
        }
    });
    out
}

/// Trapezoid integrals of `rate` over consecutive windows of `per` intervals.
pub(crate) fn slab_integrals(rate: &[f64], dt: f64, per: usize) -> Vec<f64> {
    let intervals = rate.len().saturating_sub(1);
    let per = per.max(1);
    let mut out = Vec::new();
    let mut start = 0;
    while start < intervals {
        let end = (start + per).min(intervals);
        let mut s = 0.5 * (rate[start] + rate[end]);
        s += rate[start + 1..end].iter().sum::<f64>();
        out.push(s * dt);
        start = end;
    }
    out
}

/// Good/bad labels: slab `j` is good when it and its predecessor cost less than `delta`.
pub fn classify_costs(slab_costs: &[f64], delta: f64) -> (Vec<bool>, usize) {
    let below: Vec<bool> = slab_costs.iter().map(|c| *c < delta).collect();
    let good: Vec<bool> = (0..below.len()).map(|j| below[j] && (j == 0 || below[j - 1])).collect();
    let bad = good.iter().filter(|g| !**g).count();
    (good, bad)
}

/// Total cost with per-slab split and the free-energy comparison terms.
pub fn action(model: &Model, src: &(dyn SliceSource + Sync), slab: f64, delta: f64) -> Result<CostReport> {
    if src.count() < 2 {
        return Err(Error::domain("need at least two time slices"));
    }
    if src.grid().len() != model.n() {
        return Err(Error::Dimension { expected: model.n(), got: src.grid().len() });
    }
    if !(slab > 0.0) {
        return Err(Error::domain("slab length must be positive"));
    }
    let dt = src.dt();
    let stats = parallel_stats(model, src);
    let rate: Vec<f64> = stats.iter().map(|s| s.cost).collect();
    let per = (slab / dt).round().max(1.0) as usize;
    let slab_costs = slab_integrals(&rate, dt, per);
    let total: f64 = slab_costs.iter().sum();
    let whole = |f: &dyn Fn(&SliceStats) -> f64| -> f64 {
        let v: Vec<f64> = stats.iter().map(f).collect();
        slab_integrals(&v, dt, v.len()).iter().sum()
    };
    let quadratic_total = whole(&|s| s.quadratic);
    let clipped = whole(&|s| s.clipped);
    let imbalance = whole(&|s| s.imbalance);
    let n = model.n();
    let mut first = vec![0.0; n];
    let mut last = vec![0.0; n];
    src.slice_into(0, &mut first);
    src.slice_into(src.count() - 1, &mut last);
    let f0 = free_energy_unchecked(model, &first);
    let f1 = free_energy_unchecked(model, &last);
    let half = 0.5 * model.beta * (f1 - f0);
    let rev = Reversibility {
        energy_start: f0,
        energy_end: f1,
        clipped_gradient: clipped,
        bound: half + clipped,
        slack: total - half - clipped,
        rate_imbalance: imbalance,
        sharp_bound: half + imbalance,
        sharp_slack: total - half - imbalance,
        reversal_bound: 2.0 * half,
    };
    let (good, bad_count) = classify_costs(&slab_costs, delta);
    Ok(CostReport {
        total,
        quadratic_total,
        slice_rate: rate,
        slab_length: per as f64 * dt,
        slab_costs,
        good,
        bad_count,
        reversibility: rev,
        sup_force: stats.iter().map(|s| s.sup_force).fold(0.0, f64::max),
    })
}

/// Same as [`action`] but only the total.
pub fn total_cost(model: &Model, src: &(dyn SliceSource + Sync)) -> Result<f64> {
    let horizon = src.dt() * (src.count().max(2) - 1) as f64;
    Ok(action(model, src, horizon, f64::INFINITY)?.total)
}

/// `b₁ = b 1{|b| ≤ Δ}` and the removed mass `∫∫_{|b|>Δ} |b|`.
pub fn truncate_field(b: &ForcingField, threshold: f64) -> Result<(ForcingField, f64)> {
    if !(threshold > 0.0) {
        return Err(Error::domain("truncation threshold must be positive"));
    }
    let mut out = b.clone();
    let m = b.len();
    let mut mass = 0.0;
    for (k, row) in out.values.iter_mut().enumerate() {
        let tw = if k == 0 || k + 1 == m { 0.5 } else { 1.0 } * b.dt;
        for (i, v) in row.iter_mut().enumerate() {
            if v.abs() > threshold {
                mass += tw * b.grid.weight(i) * v.abs();
                *v = 0.0;
            }
        }
    }
    Ok((out, mass))
}

/// `α(x,t) = √((1 - m̄²_{ξ̃(t)})/8)` on each slice, with `c* = max 1/α`.
#[derive(Clone, Debug)]
pub struct AlphaField {
    pub values: Vec<Vec<f64>>,
    pub c_star: f64,
}

pub fn weight_alpha(inst: &Instanton, grid: &Grid, centers: &[Vec<f64>]) -> AlphaField {
    let values: Vec<Vec<f64>> = centers
        .iter()
        .map(|xi| {
            (0..grid.len())
                .map(|i| {
                    let v = inst.glued_value(grid.x(i), xi, true);
                    ((1.0 - v * v) / 8.0).sqrt()
                })
                .collect()
        })
        .collect();
    let min = values.iter().flatten().fold(f64::INFINITY, |a, v| a.min(*v));
    AlphaField { values, c_star: 1.0 / min }
}

/// Outcome of the quadratic-approximation audit on `{|b| ≤ Δ}`.
#[derive(Clone, Debug)]
pub struct QuadraticAudit {
    /// Smallest `C` with `|H - b²/(4(1+uw))| ≤ C|b|³` on the sample box.
    pub cubic_constant: f64,
    pub c_star: f64,
    pub weighted_force: f64,
    pub cost: f64,
    pub deviation: f64,
    /// `c*² C Δ`.
    pub factor: f64,
    pub first_holds: bool,
    pub second_holds: bool,
    /// Largest pointwise ratio `|H - q| / (C |b|³)` seen on the trajectory.
    pub worst_point_ratio: f64,
}

impl QuadraticAudit {
    pub fn holds(&self) -> bool {
        self.first_holds && self.second_holds
    }

    /// `deviation / cost`, the measured relative error.
    pub fn relative_error(&self) -> f64 {
        if self.cost > 0.0 {
            self.deviation / self.cost
        } else {
            0.0
        }
    }
}

/// Smallest cubic constant over a sample box in `(b, u, w)`.
pub fn cubic_constant(threshold: f64, u_range: (f64, f64), w_range: (f64, f64)) -> f64 {
    let nb = 40;
    let nu = 25;
    let mut c: f64 = 0.0;
    for ib in 1..=nb {
        let mag = threshold * ib as f64 / nb as f64;
        for sign in [-1.0, 1.0] {
            let b = sign * mag;
            for iu in 0..=nu {
                let u = u_range.0 + (u_range.1 - u_range.0) * iu as f64 / nu as f64;
                for iw in 0..=nu {
                    let w = w_range.0 + (w_range.1 - w_range.0) * iw as f64 / nu as f64;
                    let d = (density(b, u, w) - quadratic_density(b, u, w)).abs();
                    c = c.max(d / mag.powi(3));
                }
            }
        }
    }
    c
}

/// Checks both quadratic-approximation inequalities for the force of `traj`.
/// `alpha` defaults to the largest admissible weight `√(1/8)`.
pub fn quadratic_error_audit(
    model: &Model,
    src: &(dyn SliceSource + Sync),
    threshold: f64,
    alpha: Option<&AlphaField>,
) -> Result<QuadraticAudit> {
    if !(threshold > 0.0) {
        return Err(Error::domain("threshold must be positive"));
    }
    let n = model.n();
    let count = src.count();
    let dt = src.dt();
    let grid = model.grid;
    let mut buf = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut b = vec![0.0; n];
    let mut field = vec![0.0; n];
    // first pass: observed (u, w) range
    let (mut ulo, mut uhi, mut wlo, mut whi) = (1.0f64, -1.0f64, 1.0f64, -1.0f64);
    let mut rows = Vec::with_capacity(count);
    for k in 0..count {
        force_row(model, src, k, &mut buf, &mut b);
        model.field_into(&buf[1], &mut field);
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let u = clamp_unit(buf[1][i]);
            let w = -(model.beta * field[i]).tanh();
            ulo = ulo.min(u);
            uhi = uhi.max(u);
            wlo = wlo.min(w);
            whi = whi.max(w);
            row.push((b[i], u, w));
        }
        rows.push(row);
    }
    let cubic = cubic_constant(threshold, (ulo, uhi), (wlo, whi));
    let c_star = alpha.map_or(8f64.sqrt(), |a| a.c_star);
    let (mut weighted, mut cost, mut dev, mut worst) = (0.0, 0.0, 0.0, 0.0f64);
    for (k, row) in rows.iter().enumerate() {
        let tw = if k == 0 || k + 1 == count { 0.5 } else { 1.0 } * dt;
        for (i, &(bv, u, w)) in row.iter().enumerate() {
            if bv.abs() > threshold {
                continue;
            }
            let a = alpha.map_or((1.0f64 / 8.0).sqrt(), |f| f.values[k][i]);
            let c = tw * grid.weight(i);
            let h = density(bv, u, w);
            let q = quadratic_density(bv, u, w);
            weighted += c * (a * bv).powi(2);
            cost += c * h;
            dev += c * (h - q).abs();
            if bv != 0.0 && cubic > 0.0 {
                worst = worst.max((h - q).abs() / (cubic * bv.abs().powi(3)));
            }
        }
    }
    let factor = c_star * c_star * cubic * threshold;
    let (first, second) = if factor < 1.0 {
        (
            weighted <= cost / (1.0 - factor) * (1.0 + 1e-12) + 1e-300,
            dev <= factor / (1.0 - factor) * cost * (1.0 + 1e-12) + 1e-300,
        )
    } else {
        (false, false)
    };
    Ok(QuadraticAudit {
        cubic_constant: cubic,
        c_star,
        weighted_force: weighted,
        cost,
        deviation: dev,
        factor,
        first_holds: first,
        second_holds: second,
        worst_point_ratio: worst,
    })
}

/// Slab costs and labels for an already computed cost-rate series.
pub fn classify_slabs(slice_rate: &[f64], dt: f64, slab: f64, delta: f64) -> (Vec<f64>, Vec<bool>, usize) {
    let per = (slab / dt).round().max(1.0) as usize;
    let costs = slab_integrals(slice_rate, dt, per);
    let (good, bad) = classify_costs(&costs, delta);
    (costs, good, bad)
}

/// Gradient clip norm of a single profile, exposed for diagnostics.
pub fn clipped_gradient(model: &Model, m: &[f64]) -> Result<f64> {
    let f = crate::statics::energy_gradient(model, m)?;
    Ok(clipped_gradient_norm_sq(&model.grid, &f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_unforced, Trajectory};
    use crate::testutil::{default_instanton, default_model};
    use proptest::prelude::*;

    /// Direct transcription of the closed form, without any stabilization.
    fn naive(b: f64, u: f64, w: f64) -> f64 {
        let a = b - u - w;
        let s = (a * a + (1.0 - u * u) * (1.0 - w * w)).sqrt();
        0.5 * (a * ((a + s) / ((1.0 - u) * (1.0 - w))).ln() - s + 1.0 + u * w)
    }

    fn uw_grid() -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for i in 0..21 {
            for j in 0..21 {
                let u = -1.0 + 0.1 * i as f64;
                let w = (-1.0 + 0.1 * j as f64).clamp(-0.999, 0.999);
                v.push((u, w));
            }
        }
        v
    }

    #[test]
    fn matches_naive_formula_in_the_bulk() {
        for &(u, w) in &uw_grid() {
            if u.abs() > 0.95 {
                continue;
            }
            for &b in &[-3.0, -0.7, -0.05, 0.02, 0.4, 2.5, 40.0] {
                let d = density(b, u, w);
                let n = naive(b, u, w);
                assert!((d - n).abs() <= 1e-10 * (1.0 + n.abs()), "b={b} u={u} w={w}: {d} vs {n}");
            }
        }
    }

    #[test]
    fn zero_field_is_free() {
        for &(u, w) in &uw_grid() {
            assert!(cost_density(0.0, u, w).unwrap().abs() <= 1e-12);
            assert!(cost_density(1e-12, u, w).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn small_field_asymptotics() {
        for &(u, w) in &uw_grid() {
            // the expansion holds for |b| small against both (1 ∓ u)(1 ∓ w)
            let (a, b) = ((1.0 - u) * (1.0 - w), (1.0 + u) * (1.0 + w));
            let scale = if a == 0.0 || b == 0.0 { a.max(b) } else { a.min(b) };
            for &b in &[1e-4 * scale, -1e-4 * scale] {
                let r = cost_density(b, u, w).unwrap() / (b * b);
                let target = 1.0 / (4.0 * (1.0 + u * w));
                assert!((r - target).abs() <= 1e-3 * target, "u={u} w={w} r={r} target={target}");
            }
        }
    }

    #[test]
    fn large_field_growth_in_the_bulk() {
        // away from the saturated edges the ratio is close to one half
        for &(u, w) in &uw_grid() {
            if u.abs() > 0.5 || w.abs() > 0.5 {
                continue;
            }
            let b: f64 = 1e6;
            let r = cost_density(b, u, w).unwrap() / (b * (b + 1.0).ln());
            assert!(r > 0.45 && r < 0.55, "u={u} w={w}: {r}");
        }
        let r = |b: f64| density(b, 0.2, -0.3) / (b.abs() * (b.abs() + 1.0).ln());
        assert!((r(1e12) - 0.5).abs() < (r(1e6) - 0.5).abs());
    }

    #[test]
    fn saturated_states() {
        // no room to increase from u = 1
        assert_eq!(density(0.5 + 1.0 - 0.2, 1.0, -0.2), f64::INFINITY);
        let d = density(-0.3, 1.0, -0.2);
        assert!(d.is_finite() && d > 0.0);
        assert!(cost_density(0.1, 0.0, 1.0).is_err());
        assert!(cost_density(0.1, 1.2, 0.0).is_err());
    }

    #[test]
    fn cubic_constant_bounds_samples() {
        let c = cubic_constant(0.1, (-0.9, 0.9), (-0.9, 0.9));
        assert!(c > 0.0 && c.is_finite());
        for &(u, w) in &[(0.3, -0.2), (-0.85, 0.6), (0.9, 0.9)] {
            for &b in &[0.1, -0.1, 0.0625, -0.0125] {
                let e = (density(b, u, w) - quadratic_density(b, u, w)).abs();
                assert!(e <= c * b.abs().powi(3) * 1.05);
            }
        }
    }

    proptest! {
        #[test]
        fn nonnegative_and_convex(b in -50.0f64..50.0, u in -1.0f64..1.0, w in -0.999f64..0.999) {
            let h = density(b, u, w);
            prop_assert!(h >= 0.0);
            let e = 1e-3;
            let second = density(b + e, u, w) - 2.0 * h + density(b - e, u, w);
            prop_assert!(second >= -1e-10);
        }

        #[test]
        fn monotone_in_field_size(b in 0.0f64..20.0, s in 1.0f64..3.0, u in -0.99f64..0.99, w in -0.99f64..0.99) {
            prop_assert!(density(b, u, w) <= density(b * s, u, w) + 1e-14);
            prop_assert!(density(-b, u, w) <= density(-b * s, u, w) + 1e-14);
        }
    }

    #[test]
    fn stationary_front_costs_nothing() {
        let model = default_model();
        let inst = default_instanton();
        let traj = evolve_unforced(&model, &inst.profile.values, 10.0, 0.05).unwrap();
        let rep = action(&model, &traj, 5.0, 0.01).unwrap();
        assert!(rep.total <= 1e-8);
        assert_eq!(rep.bad_count, 0);
        let sum: f64 = rep.slab_costs.iter().sum();
        assert!((sum - rep.total).abs() <= 1e-10);
    }

    #[test]
    fn slab_split_is_additive() {
        let rate: Vec<f64> = (0..101).map(|k| (k as f64 * 0.1).sin().abs()).collect();
        let whole: f64 = slab_integrals(&rate, 0.1, 1000).iter().sum();
        for per in [1, 7, 10, 33] {
            let parts: f64 = slab_integrals(&rate, 0.1, per).iter().sum();
            assert!((parts - whole).abs() < 1e-12);
        }
    }

    #[test]
    fn two_slab_rule() {
        let mut costs = vec![0.0; 8];
        costs[3] = 0.2;
        let (good, bad) = classify_costs(&costs, 0.1);
        assert_eq!(bad, 2);
        assert!(!good[3] && !good[4]);
        assert!(good[2] && good[5]);
        // bad count bounded by twice the budget over the threshold
        let costs = vec![0.3, 0.0, 0.25, 0.0, 0.0, 0.5, 0.0];
        let total: f64 = costs.iter().sum();
        let (_, bad) = classify_costs(&costs, 0.2);
        assert!(bad as f64 <= 2.0 * total / 0.2);
    }

    #[test]
    fn truncation() {
        let grid = crate::grid::Grid::with_spacing(10.0, 0.5, crate::grid::Boundary::TruncatedLine).unwrap();
        let mut b = ForcingField::zeros(grid, 0.1, 3);
        b.values[1][5] = 0.05;
        let (t, mass) = truncate_field(&b, 0.1).unwrap();
        assert_eq!(t.values, b.values);
        assert_eq!(mass, 0.0);
        b.values[1][7] = 0.2;
        let (t, mass) = truncate_field(&b, 0.1).unwrap();
        assert_eq!(t.values[1][7], 0.0);
        assert_eq!(t.values[1][5], 0.05);
        assert!((mass - 0.1 * 0.5 * 0.2).abs() < 1e-15);
        assert!(truncate_field(&b, 0.0).is_err());
    }

    #[test]
    fn alpha_weight_values() {
        let model = default_model();
        let inst = default_instanton();
        let f = weight_alpha(inst, &model.grid, &[vec![0.0]]);
        let c = model.grid.center_index();
        assert!((f.values[0][c] - (1.0f64 / 8.0).sqrt()).abs() < 1e-12);
        let far = ((1.0 - model.m_beta.powi(2)) / 8.0).sqrt();
        assert!((f.values[0][0] - far).abs() < 1e-8);
        for v in &f.values[0] {
            assert!(*v <= 1.0 && *v >= 1.0 / f.c_star - 1e-15);
        }
    }

    #[test]
    fn quadratic_audit_zero_field() {
        let model = default_model();
        let inst = default_instanton();
        let traj = Trajectory::new(model.grid, 0.05, vec![inst.profile.values.clone(); 3]).unwrap();
        let a = quadratic_error_audit(&model, &traj, 0.1, None).unwrap();
        assert!(a.cost.abs() < 1e-12 && a.weighted_force.abs() < 1e-12);
    }
}
