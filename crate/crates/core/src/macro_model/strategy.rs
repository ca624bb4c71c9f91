//! Microscopic realizations of macroscopic strategies: a moving instanton,
//! the nucleation path and multi-front upper-bound strategies.

use super::MacroProblem;
use crate::dynamics::{SliceSource, Stepper, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{clamp_unit, Boundary, Grid};
use crate::model::Model;
use crate::statics::Instanton;

/// Half-width of the local windows on which droplets are relaxed.
const LOCAL_HALF_WIDTH: f64 = 12.0;
/// A droplet counts as gone once every value is this close to the plateau.
const RELAXED_TOL: f64 = 1e-9;
const MAX_RELAXATION: f64 = 400.0;

/// Nucleation separation `ℓ_ε` with `e^{-α ℓ_ε} = ε^{3/2}`, rounded to the mesh.
pub fn nucleation_length(inst: &Instanton, grid: &Grid, epsilon: f64) -> f64 {
    let raw = 1.5 * epsilon.ln().abs() / inst.decay_alpha;
    let h = grid.spacing();
    (raw / h).round().max(1.0) * h
}

/// Grid centered on the displacement with room for the instanton tails.
pub fn strategy_grid(problem: &MacroProblem, spacing: f64) -> Result<Grid> {
    let half = (problem.micro_distance() / 2.0 + LOCAL_HALF_WIDTH + 2.0).ceil();
    Grid::with_spacing(half, spacing, Boundary::TruncatedLine)
}

/// Relaxation of one symmetric two-front configuration on a window of the grid.
#[derive(Clone, Debug)]
struct LocalPath {
    first: usize,
    slices: Vec<Vec<f64>>,
}

/// Relaxes `inst.glued(·, [c - l/2, c + l/2], rising_first)` on the window around `c`,
/// either for `steps` steps or, when `steps` is `None`, until the plateau is reached.
fn relax_pair(
    model: &Model,
    inst: &Instanton,
    center: f64,
    gap: f64,
    rising_first: bool,
    dt: f64,
    steps: Option<usize>,
) -> Result<LocalPath> {
    let grid = model.grid;
    let h = grid.spacing();
    let ic = grid.nearest(center).ok_or_else(|| Error::domain("droplet center outside the grid"))?;
    let k = (LOCAL_HALF_WIDTH / h).ceil() as usize;
    if ic < k || ic + k >= grid.len() {
        return Err(Error::domain("droplet window leaves the grid"));
    }
    let first = ic - k;
    let local = Model::new(model.beta, Grid::new(k as f64 * h, 2 * k + 1, Boundary::TruncatedLine)?)?;
    let centers = [center - 0.5 * gap, center + 0.5 * gap];
    let mut m: Vec<f64> =
        (0..2 * k + 1).map(|j| clamp_unit(inst.glued_value(grid.x(first + j), &centers, rising_first))).collect();
    let plateau = if rising_first { -model.m_beta } else { model.m_beta };
    let mut stepper = Stepper::new(&local);
    let mut slices = vec![m.clone()];
    let limit = steps.unwrap_or((MAX_RELAXATION / dt).ceil() as usize);
    for _ in 0..limit {
        stepper.step(&mut m, None, dt);
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration { time: slices.len() as f64 * dt });
        }
        slices.push(m.clone());
        if steps.is_none() && m.iter().all(|v| (v - plateau).abs() <= RELAXED_TOL) {
            return Ok(LocalPath { first, slices });
        }
    }
    if steps.is_none() {
        return Err(Error::Convergence { what: "droplet relaxation".into(), residual: f64::NAN });
    }
    Ok(LocalPath { first, slices })
}

#[derive(Clone, Copy, Debug)]
struct FrontPath {
    start: f64,
    end: f64,
    t_on: f64,
    t_off: f64,
}

impl FrontPath {
    fn at(&self, t: f64) -> f64 {
        let s = ((t - self.t_on) / (self.t_off - self.t_on)).clamp(0.0, 1.0);
        self.start + (self.end - self.start) * s
    }

    fn speed(&self) -> f64 {
        (self.end - self.start) / (self.t_off - self.t_on)
    }
}

/// Lazily evaluated strategy: fronts glued at their current positions, with
/// time-reversed droplet relaxations at the start and free annihilation of
/// the inner pairs at the end.
#[derive(Clone, Debug)]
pub struct Strategy {
    grid: Grid,
    dt: f64,
    count: usize,
    inst: Instanton,
    fronts: Vec<FrontPath>,
    edge_steps: usize,
    droplets: Vec<LocalPath>,
    bumps: Vec<LocalPath>,
    pub nucleations: usize,
    /// Separation of a freshly nucleated pair.
    pub nucleation_gap: f64,
    /// Duration of each nucleation and each annihilation.
    pub relaxation_time: f64,
}

impl Strategy {
    pub fn horizon(&self) -> f64 {
        (self.count - 1) as f64 * self.dt
    }

    /// Front speeds while they move.
    pub fn speeds(&self) -> Vec<f64> {
        self.fronts.iter().map(FrontPath::speed).collect()
    }

    /// Nominal centers at slice `k`; only fronts outside droplets are listed.
    pub fn centers_at(&self, k: usize) -> Vec<f64> {
        let t = k as f64 * self.dt;
        let n = self.fronts.len();
        let range = if self.droplets.is_empty() {
            0..n
        } else if k < self.edge_steps {
            0..1
        } else if k > self.count - 1 - self.edge_steps {
            n - 1..n
        } else {
            0..n
        };
        self.fronts[range].iter().map(|f| f.at(t)).collect()
    }

    /// Nominal front positions at the end of the motion.
    pub fn final_positions(&self) -> Vec<f64> {
        self.fronts.iter().map(|f| f.end).collect()
    }

    pub fn to_trajectory(&self) -> Result<Trajectory> {
        let n = self.grid.len();
        let slices = (0..self.count)
            .map(|k| {
                let mut v = vec![0.0; n];
                self.slice_into(k, &mut v);
                v
            })
            .collect();
        Trajectory::new(self.grid, self.dt, slices)
    }
}

impl SliceSource for Strategy {
    fn grid(&self) -> Grid {
        self.grid
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn count(&self) -> usize {
        self.count
    }

    fn slice_into(&self, k: usize, out: &mut [f64]) {
        let centers = self.centers_at(k);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.inst.glued_value(self.grid.x(i), &centers, true);
        }
        if !self.droplets.is_empty() {
            let tail_start = self.count - 1 - self.edge_steps;
            if k < self.edge_steps {
                for d in &self.droplets {
                    let s = &d.slices[self.edge_steps - k];
                    for (j, v) in s.iter().enumerate() {
                        out[d.first + j] = out[d.first + j].min(*v);
                    }
                }
            } else if k > tail_start {
                for b in &self.bumps {
                    let s = &b.slices[k - tail_start];
                    for (j, v) in s.iter().enumerate() {
                        out[b.first + j] = out[b.first + j].max(*v);
                    }
                }
            }
        }
        out.iter_mut().for_each(|v| *v = clamp_unit(*v));
    }
}

fn slice_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::domain(format!("time step {dt} outside (0, 0.1]")));
    }
    let steps = (horizon / dt).round() as usize;
    if steps < 2 {
        return Err(Error::domain("horizon shorter than two steps"));
    }
    Ok(steps + 1)
}

fn check_room(model: &Model, lo: f64, hi: f64) -> Result<()> {
    let l = model.grid.half_length() - LOCAL_HALF_WIDTH;
    if lo < -l || hi > l {
        return Err(Error::domain(format!(
            "fronts travel over [{lo:.3}, {hi:.3}] but the grid only leaves room for [{:.3}, {l:.3}]",
            -l
        )));
    }
    Ok(())
}

/// Single instanton translated from `-R/(2ε)` to `R/(2ε)` at speed `εV`.
pub fn build_moving_instanton(model: &Model, inst: &Instanton, problem: &MacroProblem, dt: f64) -> Result<Strategy> {
    build_upper_bound_strategy(model, inst, problem, 0, dt)
}

/// Strategy with `n` nucleations and `2n + 1` fronts at common speed.
///
/// Droplets appear at time zero by reversing their free relaxation, all fronts
/// then move at one speed, and the inner pairs meet at the nucleation gap and
/// annihilate freely, the outer fronts moving throughout.
pub fn build_upper_bound_strategy(
    model: &Model,
    inst: &Instanton,
    problem: &MacroProblem,
    n: usize,
    dt: f64,
) -> Result<Strategy> {
    let d = problem.micro_distance();
    let horizon = problem.micro_horizon();
    let count = slice_count(horizon, dt)?;
    let horizon = (count - 1) as f64 * dt;
    let x0 = -0.5 * d;
    check_room(model, x0, -x0)?;
    if n == 0 {
        return Ok(Strategy {
            grid: model.grid,
            dt,
            count,
            inst: inst.clone(),
            fronts: vec![FrontPath { start: x0, end: -x0, t_on: 0.0, t_off: horizon }],
            edge_steps: 0,
            droplets: vec![],
            bumps: vec![],
            nucleations: 0,
            nucleation_gap: 0.0,
            relaxation_time: 0.0,
        });
    }
    let gap = nucleation_length(inst, &model.grid, problem.epsilon);
    let reference = relax_pair(model, inst, 0.0, gap, false, dt, None)?;
    let edge = reference.slices.len() - 1;
    let t_r = edge as f64 * dt;
    if horizon <= 2.0 * t_r {
        return Err(Error::domain("horizon too short for nucleation and annihilation"));
    }
    let nf = n as f64;
    let v = (d - 2.0 * nf * gap) / (2.0 * (horizon - t_r) + (2.0 * nf - 1.0) * (horizon - 2.0 * t_r));
    if !(v > 0.0) {
        return Err(Error::domain("displacement too short for the requested nucleations"));
    }
    let s_outer = v * (horizon - t_r);
    let s_inner = v * (horizon - 2.0 * t_r);
    let mut fronts = vec![FrontPath { start: x0, end: x0 + s_outer, t_on: 0.0, t_off: horizon - t_r }];
    let mut droplets = Vec::with_capacity(n);
    let mut bumps = Vec::with_capacity(n);
    let mut c = x0 + s_outer + s_inner + 1.5 * gap;
    bumps.push(relax_pair(model, inst, x0 + s_outer + 0.5 * gap, gap, true, dt, Some(edge))?);
    for i in 0..n {
        droplets.push(relax_pair(model, inst, c, gap, false, dt, Some(edge))?);
        let left = c - 0.5 * gap;
        let right = c + 0.5 * gap;
        fronts.push(FrontPath { start: left, end: left - s_inner, t_on: t_r, t_off: horizon - t_r });
        if i + 1 < n {
            fronts.push(FrontPath { start: right, end: right + s_inner, t_on: t_r, t_off: horizon - t_r });
            bumps.push(relax_pair(model, inst, right + s_inner + 0.5 * gap, gap, true, dt, Some(edge))?);
        } else {
            fronts.push(FrontPath { start: right, end: right + s_outer, t_on: t_r, t_off: horizon });
        }
        c += 2.0 * s_inner + 2.0 * gap;
    }
    Ok(Strategy {
        grid: model.grid,
        dt,
        count,
        inst: inst.clone(),
        fronts,
        edge_steps: edge,
        droplets,
        bumps,
        nucleations: n,
        nucleation_gap: gap,
        relaxation_time: t_r,
    })
}

/// Time reversal of the free relaxation of the symmetric droplet with fronts
/// at `±ℓ_ε/2`: it starts next to `m_β` and ends at the droplet.
#[derive(Clone, Debug)]
pub struct NucleationPath {
    pub trajectory: Trajectory,
    pub gap: f64,
    pub relaxation_time: f64,
}

pub fn build_nucleation_path(model: &Model, inst: &Instanton, epsilon: f64, dt: f64) -> Result<NucleationPath> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::domain(format!("time step {dt} outside (0, 0.1]")));
    }
    let gap = nucleation_length(inst, &model.grid, epsilon);
    let path = relax_pair(model, inst, 0.0, gap, false, dt, None)?;
    let n = model.grid.len();
    let steps = path.slices.len() - 1;
    let slices: Vec<Vec<f64>> = path
        .slices
        .iter()
        .rev()
        .map(|s| {
            let mut v = vec![model.m_beta; n];
            v[path.first..path.first + s.len()].copy_from_slice(s);
            v
        })
        .collect();
    Ok(NucleationPath {
        trajectory: Trajectory::new(model.grid, dt, slices)?,
        gap,
        relaxation_time: steps as f64 * dt,
    })
}

/// Distance between the two zero crossings of a symmetric droplet, `0` once it is gone.
fn droplet_width(grid: &Grid, m: &[f64]) -> f64 {
    let mut crossings = vec![];
    for i in 0..m.len() - 1 {
        if (m[i] > 0.0) != (m[i + 1] > 0.0) {
            let t = m[i] / (m[i] - m[i + 1]);
            crossings.push(grid.x(i) + t * grid.spacing());
        }
    }
    match (crossings.first(), crossings.last()) {
        (Some(a), Some(b)) if crossings.len() >= 2 => b - a,
        _ => 0.0,
    }
}

/// Free fate of a droplet over `horizon`: `true` when its width increased.
pub fn droplet_grows(model: &Model, inst: &Instanton, half_gap: f64, horizon: f64, dt: f64) -> Result<bool> {
    let m0 = inst.glued(&model.grid, &[-half_gap, half_gap], false);
    let w0 = droplet_width(&model.grid, &m0);
    let m1 = crate::dynamics::relax(model, &m0, horizon, dt)?;
    Ok(droplet_width(&model.grid, &m1) > w0 + 1e-9)
}

/// Bisection for the critical half-width between shrinking and growing droplets.
pub fn critical_droplet(model: &Model, inst: &Instanton, lo: f64, hi: f64, horizon: f64, dt: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let ga = droplet_grows(model, inst, a, horizon, dt)?;
    let gb = droplet_grows(model, inst, b, horizon, dt)?;
    if ga || !gb {
        return Err(Error::Convergence {
            what: format!("droplet calibration: no shrink/grow transition in half-width [{lo}, {hi}]"),
            residual: f64::NAN,
        });
    }
    while b - a > model.grid.spacing() {
        let mid = 0.5 * (a + b);
        if droplet_grows(model, inst, mid, horizon, dt)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}
