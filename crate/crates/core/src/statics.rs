//! Stationary objects: the mean-field magnetization, the instanton and its
//! translates, multi-front profiles, the free energy and its gradient.

use crate::error::{check_len, Error, Result};
use crate::grid::{clamp_unit, Boundary, Grid, NuWeights, Profile, CLAMP_EPS};
use crate::model::Model;

/// Positive root of `m = tanh(β m)` by bisection.
pub fn mean_field_magnetization(beta: f64) -> Result<f64> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must exceed 1, got {beta}")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid - (beta * mid).tanh() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mixing entropy `S(m)`.
pub fn entropy(m: f64) -> f64 {
    let m = clamp_unit(m);
    let p = 0.5 * (1.0 + m);
    let q = 0.5 * (1.0 - m);
    -(p * p.ln() + q * q.ln())
}

/// Mean-field excess free energy density, zero at `±m_β`.
pub fn excess_potential(m: f64, beta: f64, m_beta: f64) -> f64 {
    let raw = |v: f64| -0.5 * v * v - entropy(v) / beta;
    raw(m) - raw(m_beta)
}

/// Free energy of a profile: local potential plus the nonlocal gradient term.
pub fn free_energy(model: &Model, m: &[f64]) -> Result<f64> {
    check_len(model.n(), m.len())?;
    Ok(free_energy_unchecked(model, m))
}

/// Free energy together with a flag telling whether any value sat on the clamp.
pub fn free_energy_flagged(model: &Model, m: &[f64]) -> Result<(f64, bool)> {
    let clamped = m.iter().any(|v| v.abs() >= 1.0 - CLAMP_EPS);
    Ok((free_energy(model, m)?, clamped))
}

pub(crate) fn free_energy_unchecked(model: &Model, m: &[f64]) -> f64 {
    energy_density(model, m).iter().enumerate().map(|(i, e)| model.grid.weight(i) * e).sum()
}

/// Local free-energy density: potential plus the pair term attributed to each node.
pub fn energy_density(model: &Model, m: &[f64]) -> Vec<f64> {
    let grid = &model.grid;
    let n = m.len();
    let k = model.kernel.half_width() as isize;
    let w = model.kernel.weights();
    let last = n as isize - 1;
    let ext = |j: isize| -> f64 {
        match grid.boundary() {
            Boundary::TruncatedLine => m[j.clamp(0, last) as usize],
            Boundary::Neumann => {
                let j = if j < 0 { -j } else if j > last { 2 * last - j } else { j };
                m[j as usize]
            }
        }
    };
    (0..n)
        .map(|i| {
            let mi = m[i];
            let mut pair = 0.0;
            for (jj, wj) in w.iter().enumerate() {
                let d = mi - ext(i as isize + jj as isize - k);
                pair += wj * d * d;
            }
            excess_potential(mi, model.beta, model.m_beta) + 0.25 * pair
        })
        .collect()
}

/// Functional derivative `f(m) = -J*m + arctanh(m)/β`.
pub fn energy_gradient(model: &Model, m: &[f64]) -> Result<Vec<f64>> {
    check_len(model.n(), m.len())?;
    let mut f = model.field(m);
    for (fi, &mi) in f.iter_mut().zip(m) {
        *fi = -*fi + clamp_unit(mi).atanh() / model.beta;
    }
    Ok(f)
}

/// `∫ (1 ∧ |f|)^2 dx`.
pub fn clipped_gradient_norm_sq(grid: &Grid, f: &[f64]) -> f64 {
    f.iter()
        .enumerate()
        .map(|(i, v)| {
            let c = v.abs().min(1.0);
            grid.weight(i) * c * c
        })
        .sum()
}

/// Cubic Hermite table of the instanton, its first and second derivatives.
#[derive(Clone, Debug)]
struct Table {
    start: f64,
    step: f64,
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    plateau: f64,
}

impl Table {
    fn locate(&self, y: f64) -> Option<(usize, f64)> {
        let u = (y - self.start) / self.step;
        if !(u >= 0.0) {
            return None;
        }
        let k = u.floor() as usize;
        if k + 1 >= self.value.len() {
            return None;
        }
        Some((k, u - k as f64))
    }

    fn hermite(f0: f64, f1: f64, d0: f64, d1: f64, s: f64, t: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * s * d0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * s * d1
    }

    fn value(&self, y: f64) -> f64 {
        match self.locate(y) {
            Some((k, t)) => Self::hermite(
                self.value[k],
                self.value[k + 1],
                self.d1[k],
                self.d1[k + 1],
                self.step,
                t,
            ),
            None => self.plateau.copysign(y),
        }
    }

    fn derivative(&self, y: f64) -> f64 {
        match self.locate(y) {
            Some((k, t)) => Self::hermite(
                self.d1[k],
                self.d1[k + 1],
                self.d2[k],
                self.d2[k + 1],
                self.step,
                t,
            ),
            None => 0.0,
        }
    }
}

/// The increasing antisymmetric stationary front and its derived constants.
#[derive(Clone, Debug)]
pub struct Instanton {
    pub profile: Profile,
    pub beta: f64,
    pub m_beta: f64,
    /// Tail decay exponent `α` in `m̄'(x) ~ a e^{-α x}`.
    pub decay_alpha: f64,
    /// Tail prefactor `a`.
    pub decay_a: f64,
    /// Largest relative deviation of `e^{αx} m̄'(x) / a` from 1 on the fit window.
    pub fit_residual: f64,
    pub fit_window: (f64, f64),
    /// `‖m̄'‖²` in the weighted norm.
    pub norm_mprime_nu_sq: f64,
    pub free_energy: f64,
    pub residual: f64,
    pub sweeps: usize,
    table: Table,
}

/// Target residual of the instanton iteration; the contract only needs 1e-8.
const INSTANTON_TOL: f64 = 1e-13;
const INSTANTON_MAX_SWEEPS: usize = 20_000;

/// Damped fixed-point iteration for `m̄ = tanh(β J * m̄)` started from
/// `m_β sign(x)`, antisymmetrized after every sweep.
pub fn compute_instanton(model: &Model) -> Result<Instanton> {
    let grid = model.grid;
    let n = grid.len();
    let c = grid.center_index();
    let mut m: Vec<f64> = (0..n)
        .map(|i| model.m_beta * grid.x(i).signum() * (i != c) as i32 as f64)
        .collect();
    let mut field = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < INSTANTON_MAX_SWEEPS {
        model.field_into(&m, &mut field);
        residual = 0.0;
        for i in 0..n {
            let t = (model.beta * field[i]).tanh();
            residual = f64::max(residual, (t - m[i]).abs());
            field[i] = 0.5 * m[i] + 0.5 * t;
        }
        if residual <= INSTANTON_TOL {
            break;
        }
        for i in 0..c {
            let j = grid.mirror(i);
            let a = 0.5 * (field[i] - field[j]);
            m[i] = a;
            m[j] = -a;
        }
        m[c] = 0.0;
        sweeps += 1;
    }
    if !(residual <= 1e-8) {
        return Err(Error::Convergence { what: "instanton fixed point".into(), residual });
    }
    let table = build_table(model, &m);
    let profile = Profile::new(grid, m)?;
    let mut inst = Instanton {
        profile,
        beta: model.beta,
        m_beta: model.m_beta,
        decay_alpha: 0.0,
        decay_a: 0.0,
        fit_residual: 0.0,
        fit_window: (0.0, 0.0),
        norm_mprime_nu_sq: 0.0,
        free_energy: 0.0,
        residual,
        sweeps,
        table,
    };
    inst.free_energy = free_energy_unchecked(model, &inst.profile.values);
    let deriv: Vec<f64> = grid.nodes().iter().map(|&x| inst.derivative_at(x)).collect();
    let w = NuWeights::from_reference(&inst.profile.values);
    inst.norm_mprime_nu_sq = crate::grid::inner_product_nu(&grid, &deriv, &deriv, &w)?;
    fit_tail(&mut inst, &grid, &deriv)?;
    Ok(inst)
}

/// Band-limited extension of the grid solution, tabulated with derivatives on a
/// mesh eight times finer than the grid. The odd background `m_β tanh(2x)` is
/// subtracted first so that the sinc series acts on a decaying remainder.
/// A Nyström extension through the kernel would carry a grid-periodic ripple
/// from the kink in the third derivative of `J` at the edge of its support.
fn build_table(model: &Model, m: &[f64]) -> Table {
    let grid = model.grid;
    let h = grid.spacing();
    let mb = model.m_beta;
    let background = |x: f64| {
        let t = (2.0 * x).tanh();
        let s2 = 1.0 - t * t;
        (mb * t, 2.0 * mb * s2, -8.0 * mb * t * s2)
    };
    let rest: Vec<f64> = grid.nodes().iter().zip(m).map(|(&x, v)| v - background(x).0).collect();
    let step = h / 8.0;
    let count = 8 * (grid.len() - 1) + 1;
    let start = -grid.half_length();
    let mut value = Vec::with_capacity(count);
    let mut d1 = Vec::with_capacity(count);
    let mut d2 = Vec::with_capacity(count);
    for q in 0..count {
        let y = start + q as f64 * step;
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (j, r) in rest.iter().enumerate() {
            let (f, f1, f2) = sinc3((y - grid.x(j)) / h);
            s0 += r * f;
            s1 += r * f1;
            s2 += r * f2;
        }
        let (b0, b1, b2) = background(y);
        value.push(b0 + s0);
        d1.push(b1 + s1 / h);
        d2.push(b2 + s2 / (h * h));
    }
    let plateau = value[count - 1].abs();
    Table { start, step, value, d1, d2, plateau }
}

/// `sin(πt)/(πt)` with its first two derivatives.
fn sinc3(t: f64) -> (f64, f64, f64) {
    use std::f64::consts::PI;
    let p2 = PI * PI;
    if t.abs() < 1e-3 {
        let t2 = t * t;
        return (
            1.0 - p2 * t2 / 6.0 + p2 * p2 * t2 * t2 / 120.0,
            -p2 * t / 3.0 + p2 * p2 * t * t2 / 30.0,
            -p2 / 3.0 + p2 * p2 * t2 / 10.0,
        );
    }
    // reduce the argument so that integer offsets give exact zeros
    let n = t.round();
    let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    let sin = sign * (PI * (t - n)).sin();
    let cos = sign * (PI * (t - n)).cos();
    let f = sin / (PI * t);
    let f1 = (cos - f) / t;
    let f2 = -p2 * f - 2.0 * f1 / t;
    (f, f1, f2)
}

fn fit_tail(inst: &mut Instanton, grid: &Grid, deriv: &[f64]) -> Result<()> {
    let c = grid.center_index();
    let peak = deriv[c];
    let limit = grid.half_length() - 2.0;
    let pts: Vec<(f64, f64)> = (c..grid.len())
        .map(|i| (grid.x(i), deriv[i]))
        .filter(|&(x, d)| x <= limit && d > 0.0)
        .collect();
    let lo = pts.iter().find(|p| p.1 <= 1e-3 * peak).map(|p| p.0);
    let hi = pts.iter().rev().find(|p| p.1 >= 1e-8 * peak).map(|p| p.0);
    let (lo, hi) = match (lo, hi) {
        (Some(a), Some(b)) if b > a => (a, b),
        _ => return Err(Error::domain("grid too short to resolve the instanton tail")),
    };
    let window: Vec<(f64, f64)> =
        pts.into_iter().filter(|p| p.0 >= lo && p.0 <= hi).map(|(x, d)| (x, d.ln())).collect();
    if window.len() < 5 {
        return Err(Error::domain("too few tail points for the exponential fit"));
    }
    let nw = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / nw;
    let my = window.iter().map(|p| p.1).sum::<f64>() / nw;
    let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = window.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let alpha = -slope;
    let a = (my - slope * mx).exp();
    let resid = window
        .iter()
        .map(|&(x, ly)| ((ly + alpha * x).exp() / a - 1.0).abs())
        .fold(0.0, f64::max);
    inst.decay_alpha = alpha;
    inst.decay_a = a;
    inst.fit_residual = resid;
    inst.fit_window = (lo, hi);
    if !(alpha > 0.0) {
        return Err(Error::domain("instanton tail does not decay"));
    }
    Ok(())
}

impl Instanton {
    /// `m̄(y)`, constant `±m_β` outside the stored support.
    #[inline]
    pub fn value_at(&self, y: f64) -> f64 {
        self.table.value(y)
    }

    /// `m̄'(y)`.
    #[inline]
    pub fn derivative_at(&self, y: f64) -> f64 {
        self.table.derivative(y)
    }

    /// Half-width of the stored support.
    pub fn support(&self) -> f64 {
        self.profile.grid.half_length()
    }

    /// `m̄(x - ξ)` sampled on `grid`.
    pub fn translate(&self, grid: &Grid, xi: f64) -> Result<Profile> {
        if !(xi.abs() < grid.half_length() - 5.0) {
            return Err(Error::domain(format!("translate {xi} leaves the grid interior")));
        }
        Ok(Profile::from_fn(*grid, |x| self.value_at(x - xi)))
    }

    /// Alternating fronts glued at midpoints with no separation checks.
    /// Front `j` rises when `rising_first` matches the parity of `j`.
    pub fn glued(&self, grid: &Grid, centers: &[f64], rising_first: bool) -> Vec<f64> {
        (0..grid.len())
            .map(|i| clamp_unit(self.glued_value(grid.x(i), centers, rising_first)))
            .collect()
    }

    pub(crate) fn glued_value(&self, x: f64, centers: &[f64], rising_first: bool) -> f64 {
        if centers.is_empty() {
            return if rising_first { -self.m_beta } else { self.m_beta };
        }
        let j = front_region(x, centers);
        let rising = j.is_multiple_of(2) == rising_first;
        let v = self.value_at(x - centers[j]);
        if rising {
            v
        } else {
            -v
        }
    }

    /// Multi-instanton with rising first front; consecutive gaps must be at least 4.
    pub fn multi_instanton(&self, grid: &Grid, centers: &[f64]) -> Result<Profile> {
        if centers.is_empty() {
            return Err(Error::domain("multi-instanton needs at least one center"));
        }
        for pair in centers.windows(2) {
            if !(pair[1] - pair[0] >= 4.0) {
                return Err(Error::domain("centers must be sorted with gaps of at least 4"));
            }
        }
        let l = grid.half_length() - 5.0;
        if centers[0] <= -l || centers[centers.len() - 1] >= l {
            return Err(Error::domain("centers leave the grid interior"));
        }
        Profile::new(*grid, self.glued(grid, centers, true))
    }

    /// Nodal weights `1/(1 - m̄_ξ^2)` of a single translate.
    pub fn nu_weights(&self, grid: &Grid, xi: f64) -> NuWeights {
        let v: Vec<f64> = (0..grid.len()).map(|i| self.value_at(grid.x(i) - xi)).collect();
        NuWeights::from_reference(&v)
    }
}

/// Index of the front whose midpoint cell contains `x`.
pub(crate) fn front_region(x: f64, centers: &[f64]) -> usize {
    let mut j = 0;
    while j + 1 < centers.len() && x >= 0.5 * (centers[j] + centers[j + 1]) {
        j += 1;
    }
    j
}

/// Free energy of the symmetric droplet with fronts at `±half_gap`.
pub fn droplet_energy(model: &Model, inst: &Instanton, half_gap: f64) -> f64 {
    let v = inst.glued(&model.grid, &[-half_gap, half_gap], false);
    free_energy_unchecked(model, &v)
}

/// Smallest half-gap on the mesh for which the droplet energy is within
/// `gamma` of twice the front energy.
pub fn calibrate_separation(model: &Model, inst: &Instanton, gamma: f64) -> Result<f64> {
    let h = model.grid.spacing();
    let target = 2.0 * inst.free_energy;
    let top = model.grid.half_length() / 2.0;
    let mut l = h;
    while l < top {
        if (droplet_energy(model, inst, l) - target).abs() <= gamma {
            return Ok(l);
        }
        l += h;
    }
    Err(Error::Convergence { what: "separation calibration".into(), residual: gamma })
}
