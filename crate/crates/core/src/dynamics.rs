//! Relaxation `ṁ = -m + tanh(β J*m) + b`, force extraction and the coupled
//! auxiliary system used on good time slabs.

use crate::error::{check_len, Error, Result};
use crate::grid::{Grid, Profile, CLAMP_EPS};
use crate::model::Model;
use crate::statics::Instanton;

/// Uniformly sampled space-time path.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub dt: f64,
    pub t0: f64,
    pub slices: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(grid: Grid, dt: f64, slices: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::domain("time step must be positive"));
        }
        for s in &slices {
            check_len(grid.len(), s.len())?;
        }
        Ok(Trajectory { grid, dt, t0: 0.0, slices })
    }

    /// Number of stored slices (`M + 1`).
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.dt * (self.len().saturating_sub(1)) as f64
    }

    pub fn first(&self) -> &[f64] {
        &self.slices[0]
    }

    pub fn last(&self) -> &[f64] {
        &self.slices[self.len() - 1]
    }

    pub fn profile(&self, k: usize) -> Profile {
        Profile { grid: self.grid, values: self.slices[k].clone() }
    }

    /// Slices `from..=to` as a new trajectory starting at the matching time.
    pub fn window(&self, from: usize, to: usize) -> Trajectory {
        Trajectory {
            grid: self.grid,
            dt: self.dt,
            t0: self.time(from),
            slices: self.slices[from..=to].to_vec(),
        }
    }

    /// Appends `other`, dropping its first slice (assumed equal to our last).
    pub fn append(&mut self, other: &Trajectory) {
        self.slices.extend(other.slices.iter().skip(1).cloned());
    }

    pub fn reversed(&self) -> Trajectory {
        let mut slices = self.slices.clone();
        slices.reverse();
        Trajectory { grid: self.grid, dt: self.dt, t0: 0.0, slices }
    }
}

/// Read access to a sampled path without requiring it to be materialized.
pub trait SliceSource {
    fn grid(&self) -> Grid;
    fn dt(&self) -> f64;
    fn count(&self) -> usize;
    fn slice_into(&self, k: usize, out: &mut [f64]);
}

impl SliceSource for Trajectory {
    fn grid(&self) -> Grid {
        self.grid
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn count(&self) -> usize {
        self.len()
    }
    fn slice_into(&self, k: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.slices[k]);
    }
}

/// External field `b(x_i, t_k)`, one row per trajectory slice.
#[derive(Clone, Debug)]
pub struct ForcingField {
    pub grid: Grid,
    pub dt: f64,
    pub values: Vec<Vec<f64>>,
}

impl ForcingField {
    pub fn zeros(grid: Grid, dt: f64, slices: usize) -> Self {
        ForcingField { grid, dt, values: vec![vec![0.0; grid.len()]; slices] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Pointwise product with a weight field of the same shape.
    pub fn weighted(&self, weight: &[Vec<f64>]) -> ForcingField {
        let values = self
            .values
            .iter()
            .zip(weight)
            .map(|(b, w)| b.iter().zip(w).map(|(x, y)| x * y).collect())
            .collect();
        ForcingField { grid: self.grid, dt: self.dt, values }
    }

    /// Field held on step `k -> k+1`: the average of its two end rows.
    fn step_value(&self, k: usize, out: &mut [f64]) {
        let a = &self.values[k];
        match self.values.get(k + 1) {
            Some(b) => out.iter_mut().zip(a.iter().zip(b)).for_each(|(o, (x, y))| *o = 0.5 * (x + y)),
            None => out.copy_from_slice(a),
        }
    }
}

/// Classical RK4 with clamping of every stage into the open unit interval.
pub struct Stepper<'a> {
    model: &'a Model,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    field: Vec<f64>,
}

const CLAMP_EDGE: f64 = 1.0 - CLAMP_EPS;
/// Consecutive clamped steps tolerated before declaring blow-up.
const BLOWUP_STEPS: usize = 50;

impl<'a> Stepper<'a> {
    pub fn new(model: &'a Model) -> Self {
        let n = model.n();
        Stepper { model, k: Default::default(), stage: vec![0.0; n], field: vec![0.0; n] }
            .with_buffers(n)
    }

    fn with_buffers(mut self, n: usize) -> Self {
        for k in self.k.iter_mut() {
            *k = vec![0.0; n];
        }
        self
    }

    fn rhs(model: &Model, m: &[f64], b: Option<&[f64]>, field: &mut [f64], out: &mut [f64]) {
        model.field_into(m, field);
        for i in 0..m.len() {
            out[i] = -m[i] + (model.beta * field[i]).tanh() + b.map_or(0.0, |b| b[i]);
        }
    }

    /// One step in place; returns whether any value touched the clamp.
    pub fn step(&mut self, m: &mut [f64], b: Option<&[f64]>, dt: f64) -> bool {
        let model = self.model;
        let mut clamped = false;
        let mut clamp = |v: f64| -> f64 {
            if v.abs() >= CLAMP_EDGE {
                clamped = true;
                CLAMP_EDGE.copysign(v)
            } else {
                v
            }
        };
        let [k1, k2, k3, k4] = &mut self.k;
        Self::rhs(model, m, b, &mut self.field, k1);
        for i in 0..m.len() {
            self.stage[i] = clamp(m[i] + 0.5 * dt * k1[i]);
        }
        Self::rhs(model, &self.stage, b, &mut self.field, k2);
        for i in 0..m.len() {
            self.stage[i] = clamp(m[i] + 0.5 * dt * k2[i]);
        }
        Self::rhs(model, &self.stage, b, &mut self.field, k3);
        for i in 0..m.len() {
            self.stage[i] = clamp(m[i] + dt * k3[i]);
        }
        Self::rhs(model, &self.stage, b, &mut self.field, k4);
        for i in 0..m.len() {
            m[i] = clamp(m[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        clamped
    }
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::domain(format!("time step {dt} outside (0, 0.1]")));
    }
    Ok(())
}

/// Tracks persistent clamping and non-finite values during an integration.
struct Watchdog {
    streak: usize,
}

impl Watchdog {
    fn check(&mut self, clamped: bool, m: &[f64], t: f64) -> Result<()> {
        self.streak = if clamped { self.streak + 1 } else { 0 };
        if self.streak > BLOWUP_STEPS || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration { time: t });
        }
        Ok(())
    }
}

/// Free relaxation over `[0, horizon]`.
pub fn evolve_unforced(model: &Model, m0: &[f64], horizon: f64, dt: f64) -> Result<Trajectory> {
    check_len(model.n(), m0.len())?;
    check_step(dt)?;
    let steps = (horizon / dt).round() as usize;
    let mut stepper = Stepper::new(model);
    let mut m = m0.to_vec();
    let mut slices = Vec::with_capacity(steps + 1);
    slices.push(m.clone());
    let mut dog = Watchdog { streak: 0 };
    for k in 0..steps {
        let c = stepper.step(&mut m, None, dt);
        dog.check(c, &m, (k + 1) as f64 * dt)?;
        slices.push(m.clone());
    }
    Trajectory::new(model.grid, dt, slices)
}

/// Final state of a free relaxation without storing the path.
pub fn relax(model: &Model, m0: &[f64], horizon: f64, dt: f64) -> Result<Vec<f64>> {
    check_len(model.n(), m0.len())?;
    check_step(dt)?;
    let steps = (horizon / dt).round() as usize;
    let mut stepper = Stepper::new(model);
    let mut m = m0.to_vec();
    let mut dog = Watchdog { streak: 0 };
    for k in 0..steps {
        let c = stepper.step(&mut m, None, dt);
        dog.check(c, &m, (k + 1) as f64 * dt)?;
    }
    Ok(m)
}

/// Forced evolution on the mesh of `b`; one step per stored interval.
pub fn evolve_forced(model: &Model, m0: &[f64], b: &ForcingField) -> Result<Trajectory> {
    check_len(model.n(), m0.len())?;
    check_step(b.dt)?;
    if b.is_empty() {
        return Err(Error::domain("empty forcing field"));
    }
    for row in &b.values {
        check_len(model.n(), row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite forcing"));
        }
    }
    let mut stepper = Stepper::new(model);
    let mut m = m0.to_vec();
    let mut held = vec![0.0; m.len()];
    let mut slices = Vec::with_capacity(b.len());
    slices.push(m.clone());
    let mut dog = Watchdog { streak: 0 };
    for k in 0..b.len() - 1 {
        b.step_value(k, &mut held);
        let c = stepper.step(&mut m, Some(&held), b.dt);
        dog.check(c, &m, (k + 1) as f64 * b.dt)?;
        slices.push(m.clone());
    }
    Trajectory::new(model.grid, b.dt, slices)
}

/// `b = φ̇ + φ - tanh(β J*φ)` at slice `k` given its neighbours.
pub(crate) fn force_at(
    model: &Model,
    prev: Option<&[f64]>,
    cur: &[f64],
    next: Option<&[f64]>,
    far: Option<&[f64]>,
    dt: f64,
    out: &mut [f64],
) {
    model.field_into(cur, out);
    for i in 0..cur.len() {
        let dot = match (prev, next, far) {
            (Some(p), Some(n), _) => (n[i] - p[i]) / (2.0 * dt),
            // one-sided, second order; `far` is two steps away on the open side
            (None, Some(n), Some(f)) => (-3.0 * cur[i] + 4.0 * n[i] - f[i]) / (2.0 * dt),
            (Some(p), None, Some(f)) => (3.0 * cur[i] - 4.0 * p[i] + f[i]) / (2.0 * dt),
            (None, Some(n), None) => (n[i] - cur[i]) / dt,
            (Some(p), None, None) => (cur[i] - p[i]) / dt,
            (None, None, _) => 0.0,
        };
        out[i] = dot + cur[i] - (model.beta * out[i]).tanh();
    }
}

/// Row `k` of the force of any slice source, with a reusable scratch buffer set.
pub(crate) fn force_row(model: &Model, src: &dyn SliceSource, k: usize, buf: &mut [Vec<f64>; 3], out: &mut [f64]) {
    let m = src.count();
    let dt = src.dt();
    let [a, b, c] = buf;
    src.slice_into(k, b);
    if m < 2 {
        force_at(model, None, b, None, None, dt, out);
    } else if k == 0 {
        src.slice_into(1, a);
        if m >= 3 {
            src.slice_into(2, c);
            force_at(model, None, b, Some(a), Some(c), dt, out);
        } else {
            force_at(model, None, b, Some(a), None, dt, out);
        }
    } else if k == m - 1 {
        src.slice_into(k - 1, a);
        if m >= 3 {
            src.slice_into(k - 2, c);
            force_at(model, Some(a), b, None, Some(c), dt, out);
        } else {
            force_at(model, Some(a), b, None, None, dt, out);
        }
    } else {
        src.slice_into(k - 1, a);
        src.slice_into(k + 1, c);
        force_at(model, Some(a), b, Some(c), None, dt, out);
    }
}

/// Force realizing a trajectory, one row per slice.
pub fn force_of(model: &Model, traj: &Trajectory) -> Result<ForcingField> {
    if traj.len() < 2 {
        return Err(Error::domain("need at least two time slices"));
    }
    check_len(model.n(), traj.grid.len())?;
    let m = traj.len();
    let mut values = vec![vec![0.0; model.n()]; m];
    for (k, row) in values.iter_mut().enumerate() {
        let s = &traj.slices;
        let (prev, next, far) = if k == 0 {
            (None, Some(&s[1][..]), s.get(2).map(|v| &v[..]))
        } else if k == m - 1 {
            (Some(&s[k - 1][..]), None, if k >= 2 { Some(&s[k - 2][..]) } else { None })
        } else {
            (Some(&s[k - 1][..]), Some(&s[k + 1][..]), None)
        };
        force_at(model, prev, &s[k], next, far, traj.dt, row);
    }
    Ok(ForcingField { grid: traj.grid, dt: traj.dt, values })
}

/// Result of the Picard iteration for the coupled auxiliary profiles.
#[derive(Clone, Debug)]
pub struct CoupledSolution {
    pub phi1: Trajectory,
    pub m: Trajectory,
    /// Approximate centers per slice at the final iterate.
    pub centers: Vec<Vec<f64>>,
    /// `sup_t max_i |ξ̃^k_i - ξ̃^{k-1}_i|` per sweep.
    pub gaps: Vec<f64>,
    /// Largest ratio of consecutive gaps.
    pub contraction: f64,
    pub sweeps: usize,
}

/// Picard iteration: `φ₁^k` and `m^k` are driven by `α_k b₁` from `φ(0)` and
/// `m0`, with `α_k` built from the approximate centers of `m^{k-1}`. Centers
/// are refreshed once per sweep.
pub fn solve_coupled_system(
    model: &Model,
    inst: &Instanton,
    phi0: &[f64],
    m0: &[f64],
    b1: &ForcingField,
    alpha_star: f64,
    max_sweeps: usize,
) -> Result<CoupledSolution> {
    use crate::analysis::centers::{mask_a_alpha, track_approximate_centers};
    let mask = mask_a_alpha(b1, alpha_star);
    let m_prev = evolve_forced(model, m0, b1)?;
    let mut xi_prev = track_approximate_centers(model, inst, &m_prev, &mask)?;
    let mut gaps = Vec::new();
    let mut contraction: f64 = 0.0;
    let tol = 1e-8;
    for sweep in 1..=max_sweeps {
        let alpha = crate::action::weight_alpha(inst, &model.grid, &xi_prev);
        let driven = b1.weighted(&alpha.values);
        let phi1 = evolve_forced(model, phi0, &driven)?;
        let m = evolve_forced(model, m0, &driven)?;
        let xi = track_approximate_centers(model, inst, &m, &mask)?;
        let gap = xi
            .iter()
            .zip(&xi_prev)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        if let Some(&last) = gaps.last() {
            if last > 0.0 {
                contraction = contraction.max(gap / last);
            }
        }
        gaps.push(gap);
        xi_prev = xi;
        if gap <= tol {
            return Ok(CoupledSolution { phi1, m, centers: xi_prev, gaps, contraction, sweeps: sweep });
        }
        if gaps.len() >= 3 && contraction >= 1.0 {
            return Err(Error::Convergence { what: "coupled system (contraction factor)".into(), residual: contraction });
        }
    }
    Err(Error::Convergence {
        what: "coupled system".into(),
        residual: gaps.last().copied().unwrap_or(f64::INFINITY),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};
    use crate::statics::{compute_instanton, free_energy};
    use crate::testutil::{default_instanton, default_model};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_model() -> Model {
        Model::new(1.5, Grid::with_spacing(10.0, 0.1, Boundary::Neumann).unwrap()).unwrap()
    }

    #[test]
    fn instanton_is_stationary() {
        let model = default_model();
        let inst = default_instanton();
        let traj = evolve_unforced(&model, &inst.profile.values, 50.0, 0.05).unwrap();
        let dev = traj
            .slices
            .iter()
            .flat_map(|s| s.iter().zip(&inst.profile.values).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        assert!(dev <= 1e-6, "drift {dev}");
        let b = force_of(&model, &traj).unwrap();
        assert!(b.sup_norm() <= 1e-6);
    }

    #[test]
    fn relaxation_decreases_energy() {
        let model = small_model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m0: Vec<f64> = model
            .grid
            .nodes()
            .iter()
            .map(|x| 0.01 * x.signum() * rng.gen_range(0.0..1.0) + 0.3 * (x / 3.0).tanh())
            .collect();
        let traj = evolve_unforced(&model, &m0, 60.0, 0.05).unwrap();
        let mut last = free_energy(&model, &traj.slices[0]).unwrap();
        for s in &traj.slices[1..] {
            let f = free_energy(&model, s).unwrap();
            assert!(f <= last + 1e-8);
            last = f;
        }
        // approaches an instanton-shaped profile
        let inst = compute_instanton(&model).unwrap();
        let end = traj.last();
        assert!(end[0] < -0.8 && end[end.len() - 1] > 0.8);
        assert!((free_energy(&model, end).unwrap() - inst.free_energy).abs() < 0.05);
    }

    #[test]
    fn invariant_region_and_order() {
        let model = small_model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let lo: Vec<f64> = (0..model.n()).map(|_| rng.gen_range(-model.m_beta..model.m_beta)).collect();
            let hi: Vec<f64> =
                lo.iter().map(|v| (v + rng.gen_range(0.0..0.2)).min(model.m_beta)).collect();
            let a = evolve_unforced(&model, &lo, 10.0, 0.05).unwrap();
            let b = evolve_unforced(&model, &hi, 10.0, 0.05).unwrap();
            for (sa, sb) in a.slices.iter().zip(&b.slices) {
                for (x, y) in sa.iter().zip(sb) {
                    assert!(x <= &(y + 1e-12));
                    assert!(x.abs() <= model.m_beta + 1e-9 && y.abs() <= model.m_beta + 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_forcing_matches_free_flow() {
        let model = small_model();
        let m0: Vec<f64> = model.grid.nodes().iter().map(|x| 0.5 * (x - 1.0).tanh()).collect();
        let free = evolve_unforced(&model, &m0, 5.0, 0.05).unwrap();
        let b = ForcingField::zeros(model.grid, 0.05, free.len());
        let forced = evolve_forced(&model, &m0, &b).unwrap();
        assert_eq!(free.slices, forced.slices);
    }

    #[test]
    fn forcing_comparison_principle() {
        let model = small_model();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m0: Vec<f64> = model.grid.nodes().iter().map(|x| 0.6 * x.tanh()).collect();
        let steps = 100;
        let mut lo = ForcingField::zeros(model.grid, 0.05, steps);
        for row in lo.values.iter_mut() {
            row.iter_mut().for_each(|v| *v = rng.gen_range(-0.2..0.2));
        }
        let mut hi = lo.clone();
        for row in hi.values.iter_mut() {
            row.iter_mut().for_each(|v| *v += rng.gen_range(0.0..0.1));
        }
        let a = evolve_forced(&model, &m0, &lo).unwrap();
        let b = evolve_forced(&model, &m0, &hi).unwrap();
        for (sa, sb) in a.slices.iter().zip(&b.slices) {
            assert!(sa.iter().zip(sb).all(|(x, y)| *x <= y + 1e-12));
        }
    }

    #[test]
    fn moving_front_force() {
        let model = default_model();
        let inst = default_instanton();
        let speed = 0.05;
        let dt = 0.05;
        let slices: Vec<Vec<f64>> = (0..201)
            .map(|k| {
                let xi = speed * k as f64 * dt;
                model.grid.nodes().iter().map(|&x| inst.value_at(x - xi)).collect()
            })
            .collect();
        let traj = Trajectory::new(model.grid, dt, slices).unwrap();
        let b = force_of(&model, &traj).unwrap();
        for k in [0usize, 57, 100, 200] {
            let xi = speed * k as f64 * dt;
            for (i, &x) in model.grid.nodes().iter().enumerate() {
                let expect = -speed * inst.derivative_at(x - xi);
                // second-order differences: |error| ≲ dt² v³ sup|m̄'''|
                assert!((b.values[k][i] - expect).abs() < 3e-6, "k={k} x={x} got {} want {expect}", b.values[k][i]);
            }
        }
    }

    #[test]
    fn force_round_trip() {
        let model = small_model();
        let dt = 0.02;
        let m0: Vec<f64> = model.grid.nodes().iter().map(|x| 0.7 * (x + 0.5).tanh()).collect();
        let mut b = ForcingField::zeros(model.grid, dt, 251);
        for (k, row) in b.values.iter_mut().enumerate() {
            let t = k as f64 * dt;
            for (i, v) in row.iter_mut().enumerate() {
                let x = model.grid.x(i);
                *v = 0.1 * (-(x - t).powi(2)).exp() * (1.0 + 0.5 * t.sin());
            }
        }
        let traj = evolve_forced(&model, &m0, &b).unwrap();
        let back = force_of(&model, &traj).unwrap();
        let err = (1..traj.len() - 1)
            .flat_map(|k| back.values[k].iter().zip(&b.values[k]).map(|(a, c)| (a - c).abs()))
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "round-trip error {err}");
        let again = evolve_forced(&model, &m0, &back).unwrap();
        let drift = again
            .slices
            .iter()
            .zip(&traj.slices)
            .flat_map(|(a, c)| a.iter().zip(c).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        assert!(drift < 1e-3, "trajectory drift {drift}");
    }

    #[test]
    fn rejects_bad_steps() {
        let model = small_model();
        let m0 = vec![0.0; model.n()];
        assert!(evolve_unforced(&model, &m0, 1.0, 0.5).is_err());
        assert!(evolve_unforced(&model, &m0[1..], 1.0, 0.05).is_err());
    }

    #[test]
    fn large_forcing_reports_blowup() {
        let model = small_model();
        let mut b = ForcingField::zeros(model.grid, 0.1, 200);
        b.values.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v = 1e3));
        let m0 = vec![0.0; model.n()];
        assert!(matches!(evolve_forced(&model, &m0, &b), Err(Error::Integration { .. })));
    }

    #[test]
    fn coupled_system_without_forcing() {
        let model = default_model();
        let inst = default_instanton();
        let b = ForcingField::zeros(model.grid, 0.1, 51);
        let sol = solve_coupled_system(&model, inst, &inst.profile.values, &inst.profile.values, &b, 0.1, 20).unwrap();
        assert!(sol.sweeps <= 2);
        assert!(sol.gaps.last().unwrap() <= &1e-8);
        for c in &sol.centers {
            assert!(c[0].abs() < 1e-3);
        }
    }

    #[test]
    fn coupled_system_contracts() {
        let model = default_model();
        let inst = default_instanton();
        let dt = 0.1;
        // a weak push along the front: m moves to the right, φ starts above m
        let mut b = ForcingField::zeros(model.grid, dt, 101);
        for row in b.values.iter_mut() {
            for (i, v) in row.iter_mut().enumerate() {
                *v = -0.02 * inst.derivative_at(model.grid.x(i));
            }
        }
        let phi0: Vec<f64> = model.grid.nodes().iter().map(|x| inst.value_at(x + 1.0)).collect();
        let sol = solve_coupled_system(&model, inst, &phi0, &inst.profile.values, &b, 1.0, 20).unwrap();
        assert!(sol.sweeps <= 20);
        assert!(sol.contraction < 1.0, "contraction {}", sol.contraction);
        let order = sol
            .phi1
            .slices
            .iter()
            .zip(&sol.m.slices)
            .flat_map(|(p, m)| p.iter().zip(m).map(|(a, c)| c - a))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(order <= 1e-12, "m exceeds phi by {order}");
    }
}
