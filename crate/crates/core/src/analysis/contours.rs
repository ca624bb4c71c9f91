use crate::analysis::AnalysisParams;
use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::model::Model;
use crate::statics::{energy_density, excess_potential, Instanton};

/// Cell means of a profile over the partition `[nℓ, (n+1)ℓ]` clipped to the grid.
#[derive(Clone, Debug)]
pub struct BlockAverages {
    pub ell: f64,
    pub starts: Vec<f64>,
    pub ends: Vec<f64>,
    pub values: Vec<f64>,
    first_cell: i64,
}

impl BlockAverages {
    /// Index of the cell containing `x` (clamped to the grid).
    pub fn cell_of(&self, x: f64) -> usize {
        let n = (x / self.ell + 1e-9).floor() as i64 - self.first_cell;
        n.clamp(0, self.values.len() as i64 - 1) as usize
    }
}

fn aligned(ell: f64, h: f64) -> Result<usize> {
    let r = ell / h;
    if !(ell > 0.0) || (r - r.round()).abs() > 1e-9 * r.max(1.0) || r.round() < 1.0 {
        return Err(Error::domain(format!("block length {ell} is not a multiple of the spacing {h}")));
    }
    Ok(r.round() as usize)
}

/// Trapezoid mean over each cell.
pub fn block_average(m: &Profile, ell: f64) -> Result<BlockAverages> {
    let grid = m.grid;
    let h = grid.spacing();
    aligned(ell, h)?;
    let l = grid.half_length();
    let first = (-l / ell + 1e-9).floor() as i64;
    let last = (l / ell - 1e-9).ceil() as i64;
    let node = |x: f64| ((x + l) / h).round() as usize;
    let mut out = BlockAverages { ell, starts: vec![], ends: vec![], values: vec![], first_cell: first };
    for n in first..last {
        let a = (n as f64 * ell).max(-l);
        let b = ((n + 1) as f64 * ell).min(l);
        let (ia, ib) = (node(a), node(b));
        let v = &m.values;
        let sum: f64 = v[ia..=ib].iter().sum::<f64>() - 0.5 * (v[ia] + v[ib]);
        out.starts.push(a);
        out.ends.push(b);
        out.values.push(sum / (ib - ia) as f64);
    }
    Ok(out)
}

/// `η ∈ {-1, 0, 1}` per cell.
pub fn phase_indicator(avg: &BlockAverages, m_beta: f64, zeta: f64) -> Vec<i8> {
    avg.values
        .iter()
        .map(|v| {
            if (v - m_beta).abs() <= zeta {
                1
            } else if (v + m_beta).abs() <= zeta {
                -1
            } else {
                0
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourKind {
    Plus,
    Minus,
    /// Minus phase on the left, plus on the right.
    MixedRising,
    MixedFalling,
    /// Zero phase indicator at an end; counted as mixed.
    Undetermined,
}

impl ContourKind {
    pub fn is_mixed(self) -> bool {
        !matches!(self, ContourKind::Plus | ContourKind::Minus)
    }

    pub fn name(self) -> &'static str {
        match self {
            ContourKind::Plus => "plus",
            ContourKind::Minus => "minus",
            ContourKind::MixedRising => "mixed_rising",
            ContourKind::MixedFalling => "mixed_falling",
            ContourKind::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Contour {
    pub start: f64,
    pub end: f64,
    pub kind: ContourKind,
    pub weight: f64,
}

impl Contour {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Measured stand-ins for the constants of the contour energy estimate.
#[derive(Clone, Copy, Debug)]
pub struct PeierlsConstants {
    /// `min φ_β(s) / ζ²` over values farther than `ζ` from both phases.
    pub c1: f64,
    /// `e^{α ℓ₊}` times the front energy outside `[-ℓ₊, ℓ₊]`.
    pub c2: f64,
    pub alpha: f64,
    pub front_energy: f64,
}

impl PeierlsConstants {
    pub fn measure(inst: &Instanton, params: &AnalysisParams) -> Result<Self> {
        let (beta, mb, z) = (inst.beta, inst.m_beta, params.zeta);
        let mut min_phi = f64::INFINITY;
        let samples = 4000;
        for k in 0..=samples {
            let s = -1.0 + 2.0 * k as f64 / samples as f64;
            if (s - mb).abs() > z && (s + mb).abs() > z {
                min_phi = min_phi.min(excess_potential(s, beta, mb));
            }
        }
        for s in [mb + z, mb - z, -mb + z, -mb - z] {
            if s.abs() < 1.0 {
                min_phi = min_phi.min(excess_potential(s, beta, mb));
            }
        }
        let model = Model::new(beta, inst.profile.grid)?;
        let dens = energy_density(&model, &inst.profile.values);
        let g = &model.grid;
        let outside: f64 = (0..g.len())
            .filter(|&i| g.x(i).abs() > params.ell_plus)
            .map(|i| g.weight(i) * dens[i])
            .sum();
        Ok(PeierlsConstants {
            c1: min_phi / (z * z),
            c2: outside * (inst.decay_alpha * params.ell_plus).exp(),
            alpha: inst.decay_alpha,
            front_energy: inst.free_energy,
        })
    }

    /// Lower energy bound of a mixed contour.
    pub fn mixed_floor(&self, ell_plus: f64) -> f64 {
        self.front_energy - self.c2 * (-self.alpha * ell_plus).exp()
    }
}

/// Contour-count and length bounds implied by an energy budget.
#[derive(Clone, Copy, Debug)]
pub struct ContourBounds {
    pub total_length: f64,
    pub count: f64,
    pub mixed_count: f64,
}

#[derive(Clone, Debug)]
pub struct ContourDecomposition {
    pub contours: Vec<Contour>,
    pub peierls: PeierlsConstants,
    pub zeta: f64,
    pub ell_minus: f64,
    pub ell_plus: f64,
}

impl ContourDecomposition {
    pub fn mixed(&self) -> impl Iterator<Item = &Contour> {
        self.contours.iter().filter(|c| c.kind.is_mixed())
    }

    pub fn mixed_count(&self) -> usize {
        self.mixed().count()
    }

    pub fn total_weight(&self) -> f64 {
        self.contours.iter().map(|c| c.weight).sum()
    }

    pub fn total_length(&self) -> f64 {
        self.contours.iter().map(|c| c.length()).sum()
    }

    /// Bounds for profiles whose energy is at most `budget + F(m̄)`.
    pub fn bounds(&self, budget: f64) -> ContourBounds {
        let e = budget + self.peierls.front_energy;
        let z2 = self.zeta * self.zeta;
        ContourBounds {
            total_length: self.ell_plus / (self.peierls.c1 * self.ell_minus) * e / z2,
            count: e / (self.peierls.c1 * self.ell_minus * z2),
            mixed_count: e / self.peierls.mixed_floor(self.ell_plus),
        }
    }

    pub fn within_bounds(&self, budget: f64) -> bool {
        let b = self.bounds(budget);
        self.total_length() <= b.total_length
            && self.contours.len() as f64 <= b.count
            && self.mixed_count() as f64 <= b.mixed_count
    }
}

/// Contours as maximal runs of coarse blocks with zero phase indicator.
pub fn extract_contours(m: &Profile, inst: &Instanton, params: &AnalysisParams) -> Result<ContourDecomposition> {
    params.validate()?;
    let peierls = PeierlsConstants::measure(inst, params)?;
    extract_with(m, inst.m_beta, params, peierls)
}

pub(crate) fn extract_with(
    m: &Profile,
    m_beta: f64,
    params: &AnalysisParams,
    peierls: PeierlsConstants,
) -> Result<ContourDecomposition> {
    let grid: Grid = m.grid;
    let fine = block_average(m, params.ell_minus)?;
    aligned(params.ell_plus, grid.spacing())?;
    let eta = phase_indicator(&fine, m_beta, params.zeta);
    // block status: common η of all cells inside, else 0
    let lp = params.ell_plus;
    let block_of = |x: f64| (x / lp + 1e-9).floor() as i64;
    let b_first = block_of(fine.starts[0]);
    let b_last = block_of(fine.starts[fine.starts.len() - 1]);
    let nb = (b_last - b_first + 1) as usize;
    let mut status: Vec<Option<i8>> = vec![None; nb];
    for (c, &e) in eta.iter().enumerate() {
        let b = (block_of(fine.starts[c]) - b_first) as usize;
        status[b] = match status[b] {
            None => Some(e),
            Some(s) if s == e => Some(s),
            Some(_) => Some(0),
        };
    }
    let status: Vec<i8> = status.into_iter().map(|s| s.unwrap_or(0)).collect();
    let theta: Vec<i8> = (0..nb)
        .map(|b| {
            let s = status[b];
            let lo = b.saturating_sub(1);
            let hi = (b + 1).min(nb - 1);
            if s != 0 && status[lo..=hi].iter().all(|&t| t == s) {
                s
            } else {
                0
            }
        })
        .collect();
    let l = grid.half_length();
    let z2 = params.zeta * params.zeta;
    let mut contours = Vec::new();
    let mut b = 0;
    while b < nb {
        if theta[b] != 0 {
            b += 1;
            continue;
        }
        let s = b;
        while b < nb && theta[b] == 0 {
            b += 1;
        }
        let start = (((s as i64 + b_first) as f64) * lp).max(-l);
        let end = (((b as i64 + b_first) as f64) * lp).min(l);
        let left = eta[fine.cell_of(start)];
        let right = eta[fine.cell_of(if end < l { end } else { end - 1e-9 })];
        let kind = match (left, right) {
            (1, 1) => ContourKind::Plus,
            (-1, -1) => ContourKind::Minus,
            (-1, 1) => ContourKind::MixedRising,
            (1, -1) => ContourKind::MixedFalling,
            _ => ContourKind::Undetermined,
        };
        let flat = peierls.c1 * z2 * params.ell_minus / lp * (end - start);
        let weight = if kind.is_mixed() { flat.max(peierls.mixed_floor(lp)) } else { flat };
        contours.push(Contour { start, end, kind, weight });
    }
    Ok(ContourDecomposition {
        contours,
        peierls,
        zeta: params.zeta,
        ell_minus: params.ell_minus,
        ell_plus: params.ell_plus,
    })
}
