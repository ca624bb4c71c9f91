//! Reduced dynamics of front positions with nucleation and collision events.

use super::MacroProblem;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// A pair of fronts appears around `position`.
    Nucleation { position: f64 },
    /// Two fronts, given by id, meet and disappear.
    Collision { left: usize, right: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub birth: f64,
    /// `None` while the front survives to the final time.
    pub death: Option<f64>,
    /// `+1` for rising fronts, which move right.
    pub parity: i8,
    pub birth_position: f64,
}

impl Particle {
    pub fn lifetime(&self, horizon: f64) -> f64 {
        (self.death.unwrap_or(horizon).min(horizon) - self.birth).max(0.0)
    }
}

/// Front history in macroscopic units. Particle `0` is the initial rising
/// front at the origin; nucleation `k` creates ids `2k - 1` (falling) and `2k` (rising).
#[derive(Clone, Debug)]
pub struct ParticleSchedule {
    pub events: Vec<Event>,
    pub particles: Vec<Particle>,
    pub nucleations: usize,
    /// Largest number of simultaneously present fronts.
    pub max_alive: usize,
}

/// Separation of a nucleated pair, `ε|log ε|²` in macroscopic units.
pub fn nucleation_separation(epsilon: f64) -> f64 {
    epsilon * epsilon.ln().powi(2)
}

impl ParticleSchedule {
    pub fn from_events(problem: &MacroProblem, mut events: Vec<Event>) -> Result<Self> {
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        let g = nucleation_separation(problem.epsilon);
        let mut particles = vec![Particle { id: 0, birth: 0.0, death: None, parity: 1, birth_position: 0.0 }];
        let mut nucleations = 0;
        let mut alive = 1usize;
        let mut max_alive = 1;
        for e in &events {
            if !(e.time >= 0.0 && e.time <= problem.t) {
                return Err(Error::domain(format!("event time {} outside [0, T]", e.time)));
            }
            match e.kind {
                EventKind::Nucleation { position } => {
                    nucleations += 1;
                    let id = particles.len();
                    for (k, parity) in [(0, -1i8), (1, 1i8)] {
                        particles.push(Particle {
                            id: id + k,
                            birth: e.time,
                            death: None,
                            parity,
                            birth_position: position + (k as f64 - 0.5) * g,
                        });
                    }
                    alive += 2;
                }
                EventKind::Collision { left, right } => {
                    for id in [left, right] {
                        let p = particles.get(id).ok_or_else(|| Error::domain(format!("unknown particle {id}")))?;
                        if p.death.is_some() || p.birth > e.time {
                            return Err(Error::domain(format!("particle {id} is not present at {}", e.time)));
                        }
                    }
                    if left == right || particles[left].parity == particles[right].parity {
                        return Err(Error::domain("colliding fronts must have opposite parities"));
                    }
                    particles[left].death = Some(e.time);
                    particles[right].death = Some(e.time);
                    alive -= 2;
                }
            }
            max_alive = max_alive.max(alive);
        }
        Ok(ParticleSchedule { events, particles, nucleations, max_alive })
    }

    /// `n` nucleations at time zero at `2iR/(2n+1)`, inner pairs colliding at `T`.
    pub fn canonical(problem: &MacroProblem, n: usize) -> Result<Self> {
        let k = (2 * n + 1) as f64;
        let mut events: Vec<Event> = (1..=n)
            .map(|i| Event { time: 0.0, kind: EventKind::Nucleation { position: 2.0 * i as f64 * problem.r / k } })
            .collect();
        // front 0 meets the left front of droplet 1, droplet i's right front meets droplet i+1's left
        let mut left = 0;
        for i in 1..=n {
            events.push(Event { time: problem.t, kind: EventKind::Collision { left, right: 2 * i - 1 } });
            left = 2 * i;
        }
        Self::from_events(problem, events)
    }

    /// Parses `time,kind,a,b` rows; `kind` is `nucleation` (a = position) or `collision` (a, b = ids).
    pub fn parse_events(text: &str) -> Result<Vec<Event>> {
        let mut out = vec![];
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (no == 0 && line.starts_with("time")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Usage(format!("schedule line {}: cannot parse '{line}'", no + 1));
            let num = |s: Option<&&str>| s.and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad);
            let time = num(cols.first())?;
            let kind = match cols.get(1).copied() {
                Some("nucleation") => EventKind::Nucleation { position: num(cols.get(2))? },
                Some("collision") => {
                    let id = |s: Option<&&str>| s.and_then(|s| s.parse::<usize>().ok()).ok_or_else(bad);
                    EventKind::Collision { left: id(cols.get(2))?, right: id(cols.get(3))? }
                }
                _ => return Err(bad()),
            };
            out.push(Event { time, kind });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct ParticleReport {
    /// `R` minus the displacement supplied by nucleated pairs.
    pub required: f64,
    pub correction: f64,
    /// `Σ ∫|V_i|` of the optimal constant-speed solution.
    pub total_displacement: f64,
    pub speed: f64,
    pub lifetime_sum: f64,
    pub nucleation_cost: f64,
    pub motion_cost: f64,
    pub lower_bound: f64,
    pub within_cap: bool,
    pub feasible: bool,
    pub note: String,
}

impl ParticleReport {
    /// Position of a particle under the optimal constant-speed solution.
    pub fn position(&self, p: &Particle, t: f64) -> f64 {
        let end = p.death.map_or(t, |d| t.min(d));
        p.birth_position + p.parity as f64 * self.speed * (end - p.birth).max(0.0)
    }
}

/// Cheapest front motion compatible with the schedule: by Cauchy–Schwarz all
/// fronts share the speed `required / Σ T_i`, giving `required² / (μ Σ T_i)`.
pub fn simulate_particles(problem: &MacroProblem, schedule: &ParticleSchedule) -> ParticleReport {
    let correction = schedule.nucleations as f64 * nucleation_separation(problem.epsilon);
    let required = (problem.r - correction).max(0.0);
    let lifetime_sum: f64 = schedule.particles.iter().map(|p| p.lifetime(problem.t)).sum();
    let within_cap = schedule.max_alive <= problem.max_particles();
    let nucleation_cost = 2.0 * problem.front_energy * schedule.nucleations as f64;
    let (feasible, speed, motion_cost, note) = if required == 0.0 {
        (true, 0.0, 0.0, String::new())
    } else if lifetime_sum > 0.0 {
        let speed = required / lifetime_sum;
        (true, speed, required * required / (problem.mu * lifetime_sum), String::new())
    } else {
        (false, f64::INFINITY, f64::INFINITY, "no front lives long enough to move".to_string())
    };
    let note = if within_cap { note } else { format!("{note} front count exceeds the cap").trim().to_string() };
    ParticleReport {
        required,
        correction,
        total_displacement: speed * lifetime_sum,
        speed,
        lifetime_sum,
        nucleation_cost,
        motion_cost,
        lower_bound: nucleation_cost + motion_cost,
        within_cap,
        feasible: feasible && within_cap,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macro_model::macro_cost;
    use crate::testutil::default_instanton;

    #[test]
    fn single_front_is_the_moving_instanton() {
        let p = MacroProblem::new(default_instanton(), 1.3, 2.0, 0.05, None).unwrap();
        let s = ParticleSchedule::from_events(&p, vec![]).unwrap();
        let r = simulate_particles(&p, &s);
        assert!(r.feasible);
        assert!((r.lower_bound - p.v * p.v * p.t / p.mu).abs() < 1e-12);
        assert!((r.total_displacement - p.r).abs() < 1e-12);
    }

    #[test]
    fn equal_lifetimes_reproduce_w_n() {
        let p = MacroProblem::with_ratio(default_instanton(), 20.0, 2.0, 0.05).unwrap();
        for n in 0..3 {
            let s = ParticleSchedule::canonical(&p, n).unwrap();
            let r = simulate_particles(&p, &s);
            let w = macro_cost(&p, n as i64).unwrap();
            // the only difference is the nucleated separation
            let g = nucleation_separation(p.epsilon);
            let exact = 2.0 * n as f64 * p.front_energy
                + (p.r - n as f64 * g).powi(2) / (p.mu * (2 * n + 1) as f64 * p.t);
            assert!((r.lower_bound - exact).abs() < 1e-12);
            assert!(r.lower_bound <= w + 1e-12);
            assert_eq!(s.max_alive, 2 * n + 1);
        }
    }

    #[test]
    fn parity_and_presence_rules() {
        let p = MacroProblem::new(default_instanton(), 1.0, 1.0, 0.05, None).unwrap();
        let nuc = Event { time: 0.1, kind: EventKind::Nucleation { position: 0.5 } };
        let same = Event { time: 0.5, kind: EventKind::Collision { left: 0, right: 2 } };
        assert!(ParticleSchedule::from_events(&p, vec![nuc, same]).is_err());
        let early = Event { time: 0.05, kind: EventKind::Collision { left: 0, right: 1 } };
        assert!(ParticleSchedule::from_events(&p, vec![nuc, early]).is_err());
        let ok = Event { time: 0.5, kind: EventKind::Collision { left: 0, right: 1 } };
        let s = ParticleSchedule::from_events(&p, vec![nuc, ok]).unwrap();
        assert_eq!(s.particles[0].death, Some(0.5));
        assert!(s.particles[2].death.is_none());
    }

    #[test]
    fn cap_is_reported() {
        let p = MacroProblem::new(default_instanton(), 0.2, 1.0, 0.05, None).unwrap();
        let s = ParticleSchedule::canonical(&p, p.max_nucleations() + 1).unwrap();
        let r = simulate_particles(&p, &s);
        assert!(!r.within_cap);
        assert!(!r.feasible);
    }

    #[test]
    fn csv_events() {
        let text = "time,kind,a,b\n0.0,nucleation,0.5,\n# comment\n1.0,collision,0,1\n";
        let ev = ParticleSchedule::parse_events(text).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[1].kind, EventKind::Collision { left: 0, right: 1 });
        assert!(ParticleSchedule::parse_events("0,teleport,1,2").is_err());
    }
}
