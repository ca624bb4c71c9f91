//! Quantitative acceptance suite. Each criterion runs on a fixed geometry,
//! reports its measurements and is timed against its own budget.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{action, density, truncate_field};
use crate::analysis::centers::{centers_of, first_order_center};
use crate::analysis::spectral::{dense_spectral_gap, spectral_gap, Linearization};
use crate::analysis::AnalysisParams;
use crate::dynamics::{evolve_forced, evolve_unforced, force_of, solve_coupled_system, ForcingField, SliceSource, Trajectory};
use crate::error::Result;
use crate::grid::{Boundary, Grid, Profile};
use crate::macro_model::audit::audit_bad_intervals;
use crate::macro_model::particles::{simulate_particles, ParticleSchedule};
use crate::macro_model::strategy::{build_moving_instanton, build_nucleation_path, build_upper_bound_strategy, strategy_grid};
use crate::macro_model::{optimal_nucleation_count, MacroProblem};
use crate::model::Model;
use crate::statics::{compute_instanton, free_energy, mean_field_magnetization, Instanton};

pub const CRITERIA: usize = 12;

/// Outcome of one criterion.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub budget: f64,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {} ({:.1}s of {:.0}s): {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

/// Shared inputs: the default model and its instanton.
pub struct Context {
    pub model: Model,
    pub inst: Instanton,
    pub seed: u64,
}

impl Context {
    pub fn new(seed: u64) -> Result<Self> {
        let grid = Grid::with_spacing(20.0, 0.05, Boundary::TruncatedLine)?;
        let model = Model::new(1.5, grid)?;
        let inst = compute_instanton(&model)?;
        Ok(Context { model, inst, seed })
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

const NAMES: [&str; CRITERIA] = [
    "cost density sanity",
    "cost density asymptotics",
    "instanton",
    "Lyapunov decay",
    "moving-instanton cost",
    "reversibility bound",
    "spectral gap",
    "centers",
    "nucleation path",
    "macroscopic sandwich",
    "bad-interval audit",
    "Picard contraction",
];

const BUDGETS: [f64; CRITERIA] = [1.0, 1.0, 10.0, 60.0, 120.0, 300.0, 30.0, 60.0, 300.0, 900.0, 120.0, 120.0];

type Check = fn(&Context) -> Result<(bool, String)>;

const CHECKS: [Check; CRITERIA] = [
    density_sanity,
    density_asymptotics,
    instanton_checks,
    lyapunov,
    moving_instanton,
    reversibility,
    spectral,
    centers,
    nucleation,
    sandwich,
    bad_intervals,
    picard,
];

/// Runs criterion `id` (1-based). The instanton computation is not charged to the criteria
/// except the third, which times its own solve.
pub fn run_criterion(ctx: &Context, id: usize) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = match CHECKS[id - 1](ctx) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = BUDGETS[id - 1];
    let detail = if seconds > budget { format!("{detail}; over the time budget") } else { detail };
    Outcome { id, name: NAMES[id - 1], passed: ok && seconds <= budget, seconds, budget, detail }
}

pub fn run_all(ctx: &Context) -> Vec<Outcome> {
    (1..=CRITERIA).map(|id| run_criterion(ctx, id)).collect()
}

/// 21×21 grid of `(u, w)`; `w` stays inside `(-1, 1)` as every field value does.
fn uw_grid() -> Vec<(f64, f64)> {
    let mut v = Vec::with_capacity(441);
    for i in 0..21 {
        for j in 0..21 {
            let u = -1.0 + 0.1 * i as f64;
            let w = (-1.0 + 0.1 * j as f64).clamp(-0.999, 0.999);
            v.push((u, w));
        }
    }
    v
}

fn density_sanity(ctx: &Context) -> Result<(bool, String)> {
    let zero = uw_grid().iter().map(|&(u, w)| density(0.0, u, w).abs()).fold(0.0, f64::max);
    let mut rng = ctx.rng(1);
    let (mut negative, mut concave) = (0usize, 0usize);
    for _ in 0..100_000 {
        let mag = 10f64.powf(rng.gen_range(-6.0..3.0));
        let b = if rng.gen_bool(0.5) { mag } else { -mag };
        let u = rng.gen_range(-0.999..0.999);
        let w = rng.gen_range(-0.999..0.999);
        let h = density(b, u, w);
        if !(h >= 0.0) {
            negative += 1;
        }
        let e = 1e-3 * b.abs().max(1e-3);
        let second = density(b + e, u, w) - 2.0 * h + density(b - e, u, w);
        if second < -1e-12 * (1.0 + h) {
            concave += 1;
        }
    }
    let ok = zero <= 1e-12 && negative == 0 && concave == 0;
    Ok((ok, format!("max |H(0,u,w)| = {zero:.2e}, negative samples {negative}, concave samples {concave}")))
}

fn density_asymptotics(_: &Context) -> Result<(bool, String)> {
    let mut small = 0.0f64;
    let mut large = (f64::INFINITY, f64::NEG_INFINITY);
    let mut worst_small = (0.0, 0.0);
    for &(u, w) in &uw_grid() {
        let target = 1.0 / (4.0 * (1.0 + u * w));
        for b in [1e-4, -1e-4] {
            let rel = (density(b, u, w) / (b * b) - target).abs() / target;
            if rel > small {
                small = rel;
                worst_small = (u, w);
            }
        }
        for b in [1e6f64, -1e6] {
            let r = density(b, u, w) / (b.abs() * (b.abs() + 1.0).ln());
            large = (large.0.min(r), large.1.max(r));
        }
    }
    let ok = small <= 1e-3 && large.0 >= 0.49 && large.1 <= 0.51;
    Ok((
        ok,
        format!(
            "small field: max relative error {small:.2e} at (u,w) = ({:.1},{:.3}); large field ratio in [{:.4}, {:.4}]",
            worst_small.0, worst_small.1, large.0, large.1
        ),
    ))
}

fn bisection_m_beta(beta: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (beta * mid).tanh() > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn instanton_checks(ctx: &Context) -> Result<(bool, String)> {
    let model = &ctx.model;
    let inst = compute_instanton(model)?;
    let m = &inst.profile.values;
    let t = model.relaxed(m);
    let residual = m.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let anti = (0..m.len()).map(|i| (m[i] + m[model.grid.mirror(i)]).abs()).fold(0.0, f64::max);
    let mb2 = mean_field_magnetization(2.0)?;
    let oracle = (mb2 - bisection_m_beta(2.0)).abs();
    let ok = residual <= 1e-8 && anti <= 1e-10 && inst.fit_residual <= 0.05 && oracle <= 1e-10;
    Ok((
        ok,
        format!(
            "residual {residual:.2e}, antisymmetry {anti:.2e}, tail fit {:.2}% (alpha {:.6}), m_beta(2) error {oracle:.2e}",
            100.0 * inst.fit_residual,
            inst.decay_alpha
        ),
    ))
}

fn lyapunov(ctx: &Context) -> Result<(bool, String)> {
    let model = &ctx.model;
    let mut rng = ctx.rng(4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m0: Vec<f64> = (0..model.n()).map(|_| rng.gen_range(-0.95..0.95)).collect();
        let traj = evolve_unforced(model, &m0, 100.0, 0.05)?;
        let mut prev = free_energy(model, traj.first())?;
        for s in &traj.slices[1..] {
            let f = free_energy(model, s)?;
            worst = worst.max(f - prev);
            prev = f;
        }
    }
    Ok((worst <= 1e-6, format!("largest per-step increase of F over 20 runs: {worst:.2e}")))
}

fn moving_instanton(ctx: &Context) -> Result<(bool, String)> {
    let p = MacroProblem::new(&ctx.inst, 1.0, 1.0, 0.05, None)?;
    let model = Model::new(1.5, strategy_grid(&p, 0.05)?)?;
    let s = build_moving_instanton(&model, &ctx.inst, &p, 0.05)?;
    let params = AnalysisParams::defaults(model.m_beta);
    let report = action(&model, &s, params.slab, params.delta())?;
    let target = 0.25 * ctx.inst.norm_mprime_nu_sq * p.v * p.v * p.t;
    let rel = (report.total - target) / target;
    Ok((rel.abs() <= 0.05, format!("action {:.6} vs {target:.6} ({:+.2}%)", report.total, 100.0 * rel)))
}

/// Sum of a few Gaussian bumps with random centers, widths and amplitudes.
fn random_bumps(rng: &mut ChaCha8Rng, grid: &Grid, amplitude: f64) -> Vec<f64> {
    let bumps: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            let c = rng.gen_range(-0.6..0.6) * grid.half_length();
            let w = rng.gen_range(0.5..3.0);
            let a = rng.gen_range(-amplitude..amplitude);
            (c, w, a)
        })
        .collect();
    grid.nodes().iter().map(|&x| bumps.iter().map(|(c, w, a)| a * (-((x - c) / w).powi(2)).exp()).sum()).collect()
}

fn reversibility(ctx: &Context) -> Result<(bool, String)> {
    let model = &ctx.model;
    let inst = &ctx.inst;
    let mut rng = ctx.rng(6);
    let dt = 0.05;
    let (mut worst, mut worst_sharp) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..50 {
        let mut b = ForcingField::zeros(model.grid, dt, 201);
        // piecewise-constant in time, four pieces
        for piece in 0..4 {
            // small enough that m stays inside (-1, 1)
            let row = random_bumps(&mut rng, &model.grid, 0.1);
            for k in piece * 50..((piece + 1) * 50 + 1).min(201) {
                b.values[k].copy_from_slice(&row);
            }
        }
        let traj = evolve_forced(model, &inst.profile.values, &b)?;
        let rep = action(model, &traj, 5.0, 0.01)?;
        worst = worst.min(rep.reversibility.slack);
        worst_sharp = worst_sharp.min(rep.reversibility.sharp_slack);
    }
    Ok((worst >= -1e-6, format!("minimum slack {worst:.4e} (with the exact rate imbalance: {worst_sharp:.4e})")))
}

fn spectral(ctx: &Context) -> Result<(bool, String)> {
    let lin = Linearization::new(&ctx.inst)?;
    let zero = lin.zero_mode_residual();
    let gap = spectral_gap(&ctx.inst)?;
    let coarse_grid = Grid::new(10.0, 101, Boundary::TruncatedLine)?;
    let coarse = compute_instanton(&Model::new(1.5, coarse_grid)?)?;
    let power = spectral_gap(&coarse)?.omega;
    let dense = dense_spectral_gap(&coarse)?;
    let rel = (power - dense).abs() / dense;
    let ok = zero <= 1e-5 && gap.omega > 0.0 && rel <= 0.02;
    Ok((
        ok,
        format!(
            "|Lm'|/|m'| = {zero:.2e}, omega = {:.6}, coarse power {power:.6} vs dense {dense:.6} ({:.2}%)",
            gap.omega,
            100.0 * rel
        ),
    ))
}

fn centers(ctx: &Context) -> Result<(bool, String)> {
    let model = &ctx.model;
    let inst = &ctx.inst;
    let params = AnalysisParams::defaults(model.m_beta);
    let mut rng = ctx.rng(8);
    let mut recover = 0.0f64;
    for _ in 0..20 {
        let xi = rng.gen_range(-8.0..8.0);
        let c = centers_of(&inst.translate(&model.grid, xi)?, inst, &params)?;
        recover = recover.max(if c.len() == 1 { (c.centers[0] - xi).abs() } else { f64::INFINITY });
    }
    // Lipschitz constant fitted on 20 calibration perturbations, checked on 100 fresh ones
    let ratio = |rng: &mut ChaCha8Rng| -> Result<f64> {
        let bump = random_bumps(rng, &model.grid, 0.05);
        let vals: Vec<f64> = inst.profile.values.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let p = Profile::new(model.grid, vals)?;
        let c = centers_of(&p, inst, &params)?;
        let l1: f64 = (0..model.n()).map(|i| model.grid.weight(i) * bump[i].abs()).sum();
        Ok(c.centers[0].abs() / l1)
    };
    let mut fit = 0.0f64;
    for _ in 0..20 {
        fit = fit.max(ratio(&mut rng)?);
    }
    let constant = 2.0 * fit;
    let mut violations = 0;
    let mut seen = 0.0f64;
    for _ in 0..100 {
        let r = ratio(&mut rng)?;
        seen = seen.max(r);
        if r > constant {
            violations += 1;
        }
    }
    let bump = |x: f64| (-(x - 0.4).powi(2)).exp();
    let mut errs = vec![];
    for s in [0.04, 0.02, 0.01] {
        let p = Profile::from_fn(model.grid, |x| inst.value_at(x) + s * bump(x));
        let exact = centers_of(&p, inst, &params)?.centers[0];
        errs.push((exact - first_order_center(&p, inst, 0.0)).abs());
    }
    let slope = (errs[0] / errs[2]).log2() / 2.0;
    let ok = recover <= 1e-6 && violations == 0 && (slope - 2.0).abs() <= 0.2;
    Ok((
        ok,
        format!(
            "recovery error {recover:.2e}; Lipschitz constant {constant:.3} (largest ratio seen {seen:.3}, {violations} violations); first-order slope {slope:.3}"
        ),
    ))
}

fn nucleation(ctx: &Context) -> Result<(bool, String)> {
    let model = &ctx.model;
    let f = ctx.inst.free_energy;
    let path = build_nucleation_path(model, &ctx.inst, 0.05, 0.05)?;
    let traj = &path.trajectory;
    let n = model.n();
    let sym = traj
        .slices
        .iter()
        .flat_map(|s| (0..n / 2).map(move |i| (s[i] - s[n - 1 - i]).abs()))
        .fold(0.0, f64::max);
    let params = AnalysisParams::defaults(model.m_beta);
    let rep = action(model, traj, params.slab, params.delta())?;
    let ok = rep.total <= 2.1 * f && sym <= 1e-8;
    Ok((
        ok,
        format!(
            "path cost {:.6} = {:.3} F against 2.1 F; reversal lower bound {:.3} F; symmetry {sym:.1e}; gap {:.3}",
            rep.total,
            rep.total / f,
            rep.reversibility.reversal_bound / f,
            path.gap
        ),
    ))
}

/// `(problem, model, strategy)` for `n` nucleations at the given ratio with `T = 2`, `ε = 0.05`.
fn strategy_at(ctx: &Context, ratio: f64, n: Option<usize>) -> Result<(MacroProblem, Model, crate::macro_model::strategy::Strategy)> {
    let p = MacroProblem::with_ratio(&ctx.inst, ratio, 2.0, 0.05)?;
    let model = Model::new(1.5, strategy_grid(&p, 0.05)?)?;
    let n = n.unwrap_or_else(|| optimal_nucleation_count(&p).0);
    let s = build_upper_bound_strategy(&model, &ctx.inst, &p, n, 0.05)?;
    Ok((p, model, s))
}

fn sandwich(ctx: &Context) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = vec![];
    let mut minimizers = vec![];
    for ratio in [0.5, 5.0, 20.0] {
        let (p, model, s) = strategy_at(ctx, ratio, None)?;
        let (n, best) = optimal_nucleation_count(&p);
        let params = AnalysisParams::defaults(model.m_beta);
        let rep = action(&model, &s, params.slab, params.delta())?;
        let lower = simulate_particles(&p, &ParticleSchedule::canonical(&p, n)?).lower_bound;
        let rel = (rep.total - best) / best;
        ok &= rel.abs() <= 0.1 && lower <= rep.total;
        minimizers.push(n);
        parts.push(format!("ratio {ratio}: n*={n} action {:.4} vs inf w_n {best:.4} ({:+.1}%), lower {lower:.4}", rep.total, 100.0 * rel));
    }
    let onset = minimizers[0] == 0 && minimizers.iter().any(|&n| n >= 1);
    ok &= onset;
    Ok((ok, parts.join("; ")))
}

fn bad_intervals(ctx: &Context) -> Result<(bool, String)> {
    let (p, model, s) = strategy_at(ctx, 5.0, Some(1))?;
    let params = AnalysisParams::defaults(model.m_beta);
    let rep = action(&model, &s, params.slab, params.delta())?;
    let audit = audit_bad_intervals(&model, &ctx.inst, &s, &rep, &params)?;
    let limit = 0.05 * p.micro_distance();
    let ok = audit.total_displacement < limit;
    let unmatched: usize = audit.components.iter().map(|c| c.unmatched).sum();
    Ok((
        ok,
        format!(
            "{} bad components, displacement {:.4} against 5% of R/eps = {limit:.4}; {unmatched} unmatched fronts",
            audit.components.len(),
            audit.total_displacement
        ),
    ))
}

fn picard(ctx: &Context) -> Result<(bool, String)> {
    let p = MacroProblem::new(&ctx.inst, 1.0, 1.0, 0.05, None)?;
    let model = Model::new(1.5, strategy_grid(&p, 0.05)?)?;
    let s = build_moving_instanton(&model, &ctx.inst, &p, 0.05)?;
    // one slab of length S from the middle of the motion
    let params = AnalysisParams::defaults(model.m_beta);
    let per = (params.slab / s.dt()).round() as usize;
    let k0 = s.count() / 2 - per / 2;
    let slices = (k0..=k0 + per)
        .map(|k| {
            let mut v = vec![0.0; model.n()];
            s.slice_into(k, &mut v);
            v
        })
        .collect();
    let traj = Trajectory::new(model.grid, s.dt(), slices)?;
    let (b1, _) = truncate_field(&force_of(&model, &traj)?, 0.1)?;
    let m0 = traj.first().to_vec();
    let sol = solve_coupled_system(&model, &ctx.inst, &m0, &m0, &b1, params.alpha_star, 20)?;
    let ok = sol.contraction < 1.0 && sol.sweeps <= 20;
    Ok((ok, format!("contraction {:.3e} after {} sweeps, gaps {:?}", sol.contraction, sol.sweeps, sol.gaps)))
}
