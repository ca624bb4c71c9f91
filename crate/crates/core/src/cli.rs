//! Command-line front end. Every subcommand writes its tables to the output
//! directory together with `manifest.txt`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::acceptance::{self, Context};
use crate::action::action;
use crate::analysis::centers::centers_of;
use crate::analysis::contours::extract_contours;
use crate::analysis::spectral::spectral_gap;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{profile_table, read_profile, read_trajectory, write_text, write_trajectory, Manifest, Table};
use crate::macro_model::audit::{audit_bad_intervals, inter_interval_jump};
use crate::macro_model::particles::{simulate_particles, ParticleSchedule};
use crate::macro_model::strategy::{build_upper_bound_strategy, strategy_grid, Strategy};
use crate::macro_model::{cost_table, macro_cost, optimal_nucleation_count, MacroProblem};
use crate::model::Model;
use crate::row;
use crate::statics::{compute_instanton, Instanton};

const AFTER_HELP: &str = "\
Configuration: plain `key = value` lines, `#` starts a comment. Keys: beta, L, n_points,
boundary (truncated_line | neumann), epsilon, R, T, S, kappa, lambda, zeta, ell_minus,
ell_plus, alpha_star, dt, output_dir, seed. Missing keys take their defaults.

Outputs (all CSV files have a header row, floats carry 17 significant digits):
  instanton       instanton.csv (x,m), instanton.txt (key: value constants)
  action-eval     slabs.csv (slab,t_start,cost,good), totals.csv (quantity,value)
  contours        contours.csv (index,start,end,kind,weight)
  centers         centers.csv (index,xi,sigma,residual)
  spectral-gap    spectral_gap.csv (omega,iterations,residual,zero_mode_residual)
  optimize        wn.csv (n,w_n); with --verify also verify.csv (quantity,value)
  strategy        strategy.csv (quantity,value), fronts.csv (slice,t,index,center)
  particle-model  particles.csv (id,parity,birth,death,birth_position,final_position), report.csv
  audit           bad_intervals.csv, jumps.csv, audit.csv (quantity,value)
  selftest        acceptance.csv (criterion,name,passed,detail)

Exit status: 0 success, 1 domain error, 2 convergence failure, 3 audit or acceptance failure,
64 usage error (unknown key, unreadable file, bad flag).";

#[derive(Debug, Parser)]
#[command(name = "frontline", version, about = "Interface dynamics in the nonlocal mean-field model", after_help = AFTER_HELP)]
pub struct Cli {
    /// Configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration entry, as `key=value`; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Displacement problem; unset values fall back to the configuration.
#[derive(Debug, Args, Clone, Default)]
pub struct ProblemArgs {
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long = "eps")]
    pub eps: Option<f64>,
    /// Cost budget `P`; defaults to `1.05 inf_n w_n`.
    #[arg(long)]
    pub budget: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary front and its constants.
    Instanton,
    /// Large-deviation cost of a stored trajectory.
    ActionEval {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        slab: Option<f64>,
        /// Good/bad threshold; defaults to `|log ε|^{-κ}`.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Contour decomposition of a profile.
    Contours {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Front centers of a profile.
    Centers {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Gap of the linearization around the front.
    SpectralGap,
    /// Table of `w_n` and its minimizer.
    Optimize {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Also build the best strategy and evaluate its action.
        #[arg(long)]
        verify: bool,
    },
    /// Build a strategy with `n` nucleations and evaluate it.
    Strategy {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Nucleation count; defaults to the minimizer of `w_n`.
        #[arg(long)]
        n: Option<usize>,
        /// Write every `stride`-th slice as a trajectory directory.
        #[arg(long)]
        save_trajectory: bool,
        #[arg(long, default_value_t = 100)]
        stride: usize,
    },
    /// Front-position model driven by an event schedule.
    ParticleModel {
        #[arg(long)]
        schedule: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Bad-interval displacement and inter-interval jumps along a strategy.
    Audit {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Acceptance suite.
    Selftest {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Instanton => "instanton",
            Command::ActionEval { .. } => "action-eval",
            Command::Contours { .. } => "contours",
            Command::Centers { .. } => "centers",
            Command::SpectralGap => "spectral-gap",
            Command::Optimize { .. } => "optimize",
            Command::Strategy { .. } => "strategy",
            Command::ParticleModel { .. } => "particle-model",
            Command::Audit { .. } => "audit",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// Files and remarks produced by a run; `failed` marks a scientific failure (exit 3).
#[derive(Default)]
struct Report {
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
    failed: Option<String>,
}

impl Report {
    fn table(&mut self, dir: &Path, name: &str, t: &Table) -> Result<()> {
        let path = dir.join(name);
        t.write(&path)?;
        self.outputs.push(path);
        Ok(())
    }

    fn text(&mut self, dir: &Path, name: &str, text: &str) -> Result<()> {
        let path = dir.join(name);
        write_text(&path, text)?;
        self.outputs.push(path);
        Ok(())
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Usage(format!("--set expects key=value, got `{o}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    Ok(cfg)
}

/// Runs the command and writes the manifest; returns the exit status.
pub fn run(cli: Cli, argv: &[String]) -> i32 {
    let start = Instant::now();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let dir = cfg.output_dir.clone();
    let mut report = Report::default();
    let code = match dispatch(&cli.command, &cfg, &dir, &mut report) {
        Ok(()) => match &report.failed {
            Some(why) => {
                eprintln!("failure: {why}");
                3
            }
            None => 0,
        },
        Err(e) => {
            eprintln!("error: {e}");
            report.notes.push(format!("error: {e}"));
            e.exit_code()
        }
    };
    let manifest = Manifest {
        command: format!("{} ({})", cli.command.name(), argv.join(" ")),
        config: cfg,
        wall_seconds: start.elapsed().as_secs_f64(),
        exit_code: code,
        outputs: report.outputs,
        notes: report.notes,
    };
    if let Err(e) = manifest.write(&dir) {
        eprintln!("error: cannot write manifest: {e}");
        return if code == 0 { e.exit_code() } else { code };
    }
    code
}

fn dispatch(cmd: &Command, cfg: &RunConfig, dir: &Path, rep: &mut Report) -> Result<()> {
    let model = cfg.model()?;
    match cmd {
        Command::Selftest { only } => selftest(cfg, only, dir, rep),
        Command::ActionEval { traj, slab, delta } => action_eval(cfg, traj, *slab, *delta, dir, rep),
        _ => {
            let inst = compute_instanton(&model)?;
            match cmd {
                Command::Instanton => instanton(&inst, dir, rep),
                Command::Contours { profile } => contours(cfg, &inst, profile, dir, rep),
                Command::Centers { profile } => centers(cfg, &inst, profile, dir, rep),
                Command::SpectralGap => spectral(&inst, dir, rep),
                Command::Optimize { problem, verify } => optimize(cfg, &model, &inst, problem, *verify, dir, rep),
                Command::Strategy { problem, n, save_trajectory, stride } => {
                    strategy(cfg, &model, &inst, problem, *n, *save_trajectory, *stride, dir, rep)
                }
                Command::ParticleModel { schedule, problem } => particles(cfg, &inst, problem, schedule, dir, rep),
                Command::Audit { problem, n } => audit(cfg, &model, &inst, problem, *n, dir, rep),
                Command::Selftest { .. } | Command::ActionEval { .. } => unreachable!(),
            }
        }
    }
}

fn kv(rows: &[(&str, f64)]) -> Table {
    let mut t = Table::new(&["quantity", "value"]);
    for (k, v) in rows {
        t.push(row![*k, *v]);
    }
    t
}

fn instanton(inst: &Instanton, dir: &Path, rep: &mut Report) -> Result<()> {
    rep.table(dir, "instanton.csv", &profile_table(&inst.profile))?;
    let block = format!(
        "m_beta: {:.16e}\nalpha: {:.16e}\na: {:.16e}\nF: {:.16e}\nnorm_mprime_nu_sq: {:.16e}\nfixed_point_residual: {:.16e}\ntail_fit_residual: {:.16e}\nsweeps: {}\n",
        inst.m_beta,
        inst.decay_alpha,
        inst.decay_a,
        inst.free_energy,
        inst.norm_mprime_nu_sq,
        inst.residual,
        inst.fit_residual,
        inst.sweeps
    );
    print!("{block}");
    rep.text(dir, "instanton.txt", &block)
}

fn action_eval(cfg: &RunConfig, path: &Path, slab: Option<f64>, delta: Option<f64>, dir: &Path, rep: &mut Report) -> Result<()> {
    let traj = read_trajectory(path)?;
    let model = Model::new(cfg.beta, traj.grid)?;
    let params = cfg.analysis_params(model.m_beta)?;
    let slab = slab.unwrap_or(params.slab);
    let delta = delta.unwrap_or(params.delta());
    let r = action(&model, &traj, slab, delta)?;
    let mut t = Table::new(&["slab", "t_start", "cost", "good"]);
    for (j, (c, g)) in r.slab_costs.iter().zip(&r.good).enumerate() {
        t.push(row![j, j as f64 * r.slab_length, *c, *g]);
    }
    rep.table(dir, "slabs.csv", &t)?;
    let rv = &r.reversibility;
    let totals = kv(&[
        ("total", r.total),
        ("quadratic_total", r.quadratic_total),
        ("bad_slabs", r.bad_count as f64),
        ("delta", delta),
        ("sup_force", r.sup_force),
        ("free_energy_start", rv.energy_start),
        ("free_energy_end", rv.energy_end),
        ("reversibility_bound", rv.bound),
        ("reversibility_slack", rv.slack),
        ("sharp_bound", rv.sharp_bound),
        ("sharp_slack", rv.sharp_slack),
    ]);
    println!("action {:.10e} over {} slabs ({} bad)", r.total, r.slab_costs.len(), r.bad_count);
    rep.table(dir, "totals.csv", &totals)
}

fn contours(cfg: &RunConfig, inst: &Instanton, path: &Path, dir: &Path, rep: &mut Report) -> Result<()> {
    let p = read_profile(path, cfg.boundary)?;
    let params = cfg.analysis_params(inst.m_beta)?;
    let dec = extract_contours(&p, inst, &params)?;
    let mut t = Table::new(&["index", "start", "end", "kind", "weight"]);
    for (i, c) in dec.contours.iter().enumerate() {
        t.push(row![i, c.start, c.end, c.kind.name(), c.weight]);
    }
    println!("{} contours, {} mixed", dec.contours.len(), dec.mixed_count());
    rep.table(dir, "contours.csv", &t)
}

fn centers(cfg: &RunConfig, inst: &Instanton, path: &Path, dir: &Path, rep: &mut Report) -> Result<()> {
    let p = read_profile(path, cfg.boundary)?;
    let params = cfg.analysis_params(inst.m_beta)?;
    let set = centers_of(&p, inst, &params)?;
    let mut t = Table::new(&["index", "xi", "sigma", "residual"]);
    for i in 0..set.len() {
        t.push(row![i, set.centers[i], set.parities[i] as i64, set.residuals[i]]);
    }
    println!("{} centers", set.len());
    rep.table(dir, "centers.csv", &t)
}

fn spectral(inst: &Instanton, dir: &Path, rep: &mut Report) -> Result<()> {
    let g = spectral_gap(inst)?;
    println!("omega = {:.16e}", g.omega);
    let mut t = Table::new(&["omega", "iterations", "residual", "zero_mode_residual"]);
    t.push(row![g.omega, g.iterations, g.residual, g.zero_mode_residual]);
    rep.table(dir, "spectral_gap.csv", &t)
}

fn problem_of(cfg: &RunConfig, inst: &Instanton, a: &ProblemArgs) -> Result<MacroProblem> {
    MacroProblem::new(inst, a.r.unwrap_or(cfg.r), a.t.unwrap_or(cfg.t), a.eps.unwrap_or(cfg.epsilon), a.budget)
}

fn mobility_note(p: &MacroProblem) -> String {
    format!("mobility mu = 4/|m'|^2_nu = {:.10} (chosen so that w_0 equals the moving-front cost)", p.mu)
}

/// Strategy on its own grid with the configured spacing.
fn build(model: &Model, inst: &Instanton, p: &MacroProblem, n: usize, dt: f64) -> Result<(Model, Strategy)> {
    let m = Model::new(model.beta, strategy_grid(p, model.grid.spacing())?)?;
    let s = build_upper_bound_strategy(&m, inst, p, n, dt)?;
    Ok((m, s))
}

fn optimize(
    cfg: &RunConfig,
    model: &Model,
    inst: &Instanton,
    a: &ProblemArgs,
    verify: bool,
    dir: &Path,
    rep: &mut Report,
) -> Result<()> {
    let p = problem_of(cfg, inst, a)?;
    let mut t = Table::new(&["n", "w_n"]);
    for (n, w) in cost_table(&p) {
        println!("{n} {w:.16e}");
        t.push(row![n, w]);
    }
    rep.table(dir, "wn.csv", &t)?;
    let (n, best) = optimal_nucleation_count(&p);
    println!("minimizer: n = {n}, w_n = {best:.16e}");
    rep.notes.push(format!("minimizer n = {n}, w_n = {best:.16e}"));
    rep.notes.push(mobility_note(&p));
    if verify {
        let (m, s) = build(model, inst, &p, n, cfg.dt)?;
        let params = cfg.analysis_params(m.m_beta)?;
        let r = action(&m, &s, params.slab, params.delta())?;
        let lower = simulate_particles(&p, &ParticleSchedule::canonical(&p, n)?).lower_bound;
        println!("constructed action: {:.16e} ({:+.2}% against w_n)", r.total, 100.0 * (r.total / best - 1.0));
        let v = kv(&[("n", n as f64), ("w_n", best), ("action", r.total), ("lower_bound", lower), ("relative_excess", r.total / best - 1.0)]);
        rep.table(dir, "verify.csv", &v)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn strategy(
    cfg: &RunConfig,
    model: &Model,
    inst: &Instanton,
    a: &ProblemArgs,
    n: Option<usize>,
    save: bool,
    stride: usize,
    dir: &Path,
    rep: &mut Report,
) -> Result<()> {
    let p = problem_of(cfg, inst, a)?;
    let n = n.unwrap_or_else(|| optimal_nucleation_count(&p).0);
    let (m, s) = build(model, inst, &p, n, cfg.dt)?;
    let params = cfg.analysis_params(m.m_beta)?;
    let r = action(&m, &s, params.slab, params.delta())?;
    let w = macro_cost(&p, n as i64)?;
    let lower = simulate_particles(&p, &ParticleSchedule::canonical(&p, n)?).lower_bound;
    println!("n = {n}: action {:.10e}, w_n {w:.10e}, lower bound {lower:.10e}", r.total);
    let summary = kv(&[
        ("n", n as f64),
        ("action", r.total),
        ("w_n", w),
        ("lower_bound", lower),
        ("nucleation_gap", s.nucleation_gap),
        ("relaxation_time", s.relaxation_time),
        ("horizon", s.horizon()),
        ("bad_slabs", r.bad_count as f64),
    ]);
    rep.table(dir, "strategy.csv", &summary)?;
    let stride = stride.max(1);
    let mut fronts = Table::new(&["slice", "t", "index", "center"]);
    let dt = crate::dynamics::SliceSource::dt(&s);
    let count = crate::dynamics::SliceSource::count(&s);
    for k in (0..count).step_by(stride) {
        for (i, c) in s.centers_at(k).iter().enumerate() {
            fronts.push(row![k, k as f64 * dt, i, *c]);
        }
    }
    rep.table(dir, "fronts.csv", &fronts)?;
    if save {
        let full = s.to_trajectory()?;
        let picked: Vec<Vec<f64>> = full.slices.iter().step_by(stride).cloned().collect();
        let thin = crate::dynamics::Trajectory::new(full.grid, dt * stride as f64, picked)?;
        let path = dir.join("trajectory");
        write_trajectory(&path, &thin)?;
        rep.outputs.push(path);
    }
    rep.notes.push(mobility_note(&p));
    Ok(())
}

fn particles(cfg: &RunConfig, inst: &Instanton, a: &ProblemArgs, schedule: &Path, dir: &Path, rep: &mut Report) -> Result<()> {
    let p = problem_of(cfg, inst, a)?;
    let text = std::fs::read_to_string(schedule)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", schedule.display())))?;
    let sched = ParticleSchedule::from_events(&p, ParticleSchedule::parse_events(&text)?)?;
    let r = simulate_particles(&p, &sched);
    let mut t = Table::new(&["id", "parity", "birth", "death", "birth_position", "final_position"]);
    for q in &sched.particles {
        let death = q.death.unwrap_or(f64::NAN);
        t.push(row![q.id, q.parity as i64, q.birth, death, q.birth_position, r.position(q, p.t)]);
    }
    rep.table(dir, "particles.csv", &t)?;
    let summary = kv(&[
        ("nucleations", sched.nucleations as f64),
        ("max_alive", sched.max_alive as f64),
        ("max_particles", p.max_particles() as f64),
        ("required", r.required),
        ("correction", r.correction),
        ("total_displacement", r.total_displacement),
        ("speed", r.speed),
        ("lifetime_sum", r.lifetime_sum),
        ("nucleation_cost", r.nucleation_cost),
        ("motion_cost", r.motion_cost),
        ("lower_bound", r.lower_bound),
        ("feasible", if r.feasible { 1.0 } else { 0.0 }),
    ]);
    rep.table(dir, "report.csv", &summary)?;
    println!("lower bound {:.10e} (feasible: {})", r.lower_bound, r.feasible);
    if !r.feasible {
        rep.failed = Some(format!("schedule infeasible: {}", r.note));
    }
    Ok(())
}

fn audit(
    cfg: &RunConfig,
    model: &Model,
    inst: &Instanton,
    a: &ProblemArgs,
    n: Option<usize>,
    dir: &Path,
    rep: &mut Report,
) -> Result<()> {
    let p = problem_of(cfg, inst, a)?;
    let n = n.unwrap_or_else(|| optimal_nucleation_count(&p).0);
    let (m, s) = build(model, inst, &p, n, cfg.dt)?;
    let params = cfg.analysis_params(m.m_beta)?;
    let r = action(&m, &s, params.slab, params.delta())?;
    let bad = audit_bad_intervals(&m, inst, &s, &r, &params)?;
    let mut t = Table::new(&[
        "component", "first_slab", "last_slab", "t0", "t1", "cost", "l2_deviation_sq", "displacement", "unmatched", "bound",
    ]);
    for (i, c) in bad.components.iter().enumerate() {
        t.push(row![i, c.first_slab, c.last_slab, c.t0, c.t1, c.cost, c.l2_deviation_sq, c.displacement, c.unmatched, c.bound]);
    }
    rep.table(dir, "bad_intervals.csv", &t)?;
    let jumps = inter_interval_jump(&m, inst, &s, &r, &params)?;
    let mut j = Table::new(&["slab", "time", "delta_j", "size", "fronts", "erased_pairs"]);
    for x in &jumps.jumps {
        j.push(row![x.slab, x.time, x.delta_j, x.size, x.centers.len(), x.erased_pairs]);
    }
    rep.table(dir, "jumps.csv", &j)?;
    let limit = 0.05 * p.micro_distance();
    let summary = kv(&[
        ("n", n as f64),
        ("total_displacement", bad.total_displacement),
        ("displacement_limit", limit),
        ("total_bound", bad.total_bound),
        ("log_scale", bad.log_scale),
        ("jump_cubic_constant", jumps.cubic),
        ("c_star", jumps.c_star),
    ]);
    rep.table(dir, "audit.csv", &summary)?;
    println!(
        "{} bad components, displacement {:.6e} (limit {limit:.6e}), {} jumps",
        bad.components.len(),
        bad.total_displacement,
        jumps.jumps.len()
    );
    if !bad.within_bounds() {
        rep.failed = Some("a bad component moves its fronts further than its bound".into());
    } else if bad.total_displacement >= limit {
        rep.failed = Some(format!("bad-slab displacement {:.4} exceeds 5% of R/eps", bad.total_displacement));
    }
    Ok(())
}

fn selftest(cfg: &RunConfig, only: &[usize], dir: &Path, rep: &mut Report) -> Result<()> {
    if let Some(bad) = only.iter().find(|&&i| i == 0 || i > acceptance::CRITERIA) {
        return Err(Error::Usage(format!("no criterion {bad}")));
    }
    let ctx = Context::new(cfg.seed)?;
    let mut t = Table::new(&["criterion", "name", "passed", "detail"]);
    let mut failed = vec![];
    for id in 1..=acceptance::CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let o = acceptance::run_criterion(&ctx, id);
        println!("{}", o.line());
        rep.notes.push(format!("criterion {id}: {:.2}s of {:.0}s", o.seconds, o.budget));
        if !o.passed {
            failed.push(id);
        }
        t.push(row![id, o.name, o.passed, o.detail]);
    }
    rep.table(dir, "acceptance.csv", &t)?;
    if !failed.is_empty() {
        rep.failed = Some(format!("criteria {failed:?} failed"));
    }
    Ok(())
}
