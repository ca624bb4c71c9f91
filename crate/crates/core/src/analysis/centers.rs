use crate::action::{weight_alpha, AlphaField};
use crate::analysis::contours::{extract_contours, ContourDecomposition, ContourKind};
use crate::analysis::AnalysisParams;
use crate::dynamics::{ForcingField, Trajectory};
use crate::error::{check_len, Error, Result};
use crate::grid::{Grid, Profile};
use crate::model::Model;
use crate::statics::{clipped_gradient_norm_sq, energy_gradient, Instanton};

/// Half-width of the window on which front-local inner products are summed.
const WINDOW: f64 = 12.0;

/// `(mask (m - σ m̄_ξ), m̄'_ξ)` in the weighted norm of `m̄_ξ`; `σ = 0` gives the
/// plain orthogonality function whose roots are the centers.
pub(crate) fn orthogonality(
    grid: &Grid,
    m: &[f64],
    inst: &Instanton,
    xi: f64,
    mask: Option<&[f64]>,
    sigma: f64,
) -> f64 {
    let h = grid.spacing();
    let l = grid.half_length();
    let lo = (((xi - WINDOW + l) / h).floor().max(0.0)) as usize;
    let hi = (((xi + WINDOW + l) / h).ceil() as usize).min(grid.len() - 1);
    let mut s = 0.0;
    for i in lo..=hi {
        let y = grid.x(i) - xi;
        let v = inst.value_at(y);
        let d = inst.derivative_at(y);
        let mk = mask.map_or(1.0, |mk| mk[i]);
        s += grid.weight(i) * mk * d * (m[i] - sigma * v) / (1.0 - v * v);
    }
    s
}

/// Leftmost root of the orthogonality function in `[lo, hi]`.
pub(crate) fn root_in(
    grid: &Grid,
    m: &[f64],
    inst: &Instanton,
    lo: f64,
    hi: f64,
    mask: Option<&[f64]>,
    sigma: f64,
) -> Option<f64> {
    let g = |xi: f64| orthogonality(grid, m, inst, xi, mask, sigma);
    let h = grid.spacing();
    let steps = ((hi - lo) / h).ceil().max(1.0) as usize;
    let mut a = lo;
    let mut ga = g(a);
    if ga == 0.0 {
        return Some(a);
    }
    for k in 1..=steps {
        let b = (lo + k as f64 * h).min(hi);
        let gb = g(b);
        if gb == 0.0 {
            return Some(b);
        }
        if ga.signum() != gb.signum() {
            let (mut x0, mut x1, mut g0) = (a, b, ga);
            for _ in 0..200 {
                if x1 - x0 <= 1e-12 {
                    break;
                }
                let mid = 0.5 * (x0 + x1);
                let gm = g(mid);
                if gm == 0.0 {
                    return Some(mid);
                }
                if gm.signum() == g0.signum() {
                    x0 = mid;
                    g0 = gm;
                } else {
                    x1 = mid;
                }
            }
            return Some(0.5 * (x0 + x1));
        }
        a = b;
        ga = gb;
    }
    None
}

/// Centers of a profile with their orientation and orthogonality residuals.
#[derive(Clone, Debug)]
pub struct CenterSet {
    pub centers: Vec<f64>,
    /// `+1` for rising fronts, `-1` for falling ones.
    pub parities: Vec<i8>,
    pub residuals: Vec<f64>,
    pub rising_first: bool,
}

impl CenterSet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// One center per mixed contour.
pub fn find_centers(m: &Profile, inst: &Instanton, contours: &ContourDecomposition) -> Result<CenterSet> {
    let mixed: Vec<_> = contours.mixed().collect();
    if mixed.is_empty() {
        return Err(Error::domain("profile has no mixed contour"));
    }
    let grid = m.grid;
    let mut out = CenterSet {
        centers: vec![],
        parities: vec![],
        residuals: vec![],
        rising_first: mixed[0].kind != ContourKind::MixedFalling,
    };
    for (k, c) in mixed.iter().enumerate() {
        let xi = root_in(&grid, &m.values, inst, c.start, c.end, None, 0.0).ok_or_else(|| {
            Error::domain(format!("no center found in contour [{}, {})", c.start, c.end))
        })?;
        let rising = match c.kind {
            ContourKind::MixedRising => true,
            ContourKind::MixedFalling => false,
            _ => (k % 2 == 0) == out.rising_first,
        };
        out.centers.push(xi);
        out.parities.push(if rising { 1 } else { -1 });
        out.residuals.push(orthogonality(&grid, &m.values, inst, xi, None, 0.0).abs());
    }
    Ok(out)
}

/// Contours then centers.
pub fn centers_of(m: &Profile, inst: &Instanton, params: &AnalysisParams) -> Result<CenterSet> {
    let contours = extract_contours(m, inst, params)?;
    find_centers(m, inst, &contours)
}

/// `ξ - N` with `N = (m - m̄_ξ, m̄'_ξ)/‖m̄'‖²` in the weighted norm of `m̄_ξ`.
pub fn first_order_center(m: &Profile, inst: &Instanton, xi: f64) -> f64 {
    let g = orthogonality(&m.grid, &m.values, inst, xi, None, 1.0);
    xi - g / inst.norm_mprime_nu_sq
}

/// Weighted distance between `m` and the glued profile at the given centers.
pub fn distance_to_manifold(m: &Profile, inst: &Instanton, centers: &CenterSet) -> f64 {
    glued_distance_sq(m, inst, &centers.centers, centers.rising_first).sqrt()
}

fn glued_distance_sq(m: &Profile, inst: &Instanton, centers: &[f64], rising_first: bool) -> f64 {
    let grid = m.grid;
    (0..grid.len())
        .map(|i| {
            let r = inst.glued_value(grid.x(i), centers, rising_first);
            grid.weight(i) * (m.values[i] - r).powi(2) / (1.0 - r * r)
        })
        .sum()
}

/// Infimum of the squared glued distance over centers ranging freely in
/// their contours, by coordinate-wise golden-section search from `start`.
pub fn generic_distance_sq(
    m: &Profile,
    inst: &Instanton,
    contours: &ContourDecomposition,
    start: &CenterSet,
) -> f64 {
    let boxes: Vec<(f64, f64)> = contours.mixed().map(|c| (c.start, c.end)).collect();
    let mut xi = start.centers.clone();
    let mut best = glued_distance_sq(m, inst, &xi, start.rising_first);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..4 {
        for j in 0..xi.len() {
            let eval = |v: f64, xi: &mut Vec<f64>| {
                let keep = xi[j];
                xi[j] = v;
                let d = glued_distance_sq(m, inst, xi, start.rising_first);
                xi[j] = keep;
                d
            };
            let (mut a, mut b) = (boxes[j].0.max(xi[j] - 1.0), boxes[j].1.min(xi[j] + 1.0));
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let mut fc = eval(c, &mut xi);
            let mut fd = eval(d, &mut xi);
            while b - a > 1e-9 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = eval(c, &mut xi);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = eval(d, &mut xi);
                }
            }
            let cand = 0.5 * (a + b);
            let fv = eval(cand, &mut xi);
            if fv < best {
                best = fv;
                xi[j] = cand;
            }
        }
    }
    best
}

/// Indicator of `A_{α*} = {x : ∫ b₁² dt ≤ α*}` over the field's horizon.
pub fn mask_a_alpha(b1: &ForcingField, alpha_star: f64) -> Vec<f64> {
    let n = b1.grid.len();
    let m = b1.len();
    let mut acc = vec![0.0; n];
    for (k, row) in b1.values.iter().enumerate() {
        let tw = if k == 0 || k + 1 == m { 0.5 } else { 1.0 } * b1.dt;
        for (a, v) in acc.iter_mut().zip(row) {
            *a += tw * v * v;
        }
    }
    acc.into_iter().map(|a| if a <= alpha_star { 1.0 } else { 0.0 }).collect()
}

fn orientation(k: usize, rising_first: bool) -> f64 {
    if k.is_multiple_of(2) == rising_first {
        1.0
    } else {
        -1.0
    }
}

/// Approximate centers of every slice, following each front from its
/// previous position; a front that cannot be followed ends the tracking.
fn track(
    model: &Model,
    inst: &Instanton,
    traj: &Trajectory,
    mask: &[f64],
    params: &AnalysisParams,
) -> Result<(Vec<Vec<f64>>, bool, Option<usize>)> {
    let grid = traj.grid;
    let first = traj.profile(0);
    let contours = extract_contours(&first, inst, params)?;
    let exact = find_centers(&first, inst, &contours)?;
    let rising_first = exact.rising_first;
    let mixed: Vec<(f64, f64)> = contours.mixed().map(|c| (c.start, c.end)).collect();
    let mut cur = Vec::with_capacity(exact.len());
    for (k, &(a, b)) in mixed.iter().enumerate() {
        let s = orientation(k, rising_first);
        let xi = root_in(&grid, first.values.as_slice(), inst, a, b, Some(mask), s)
            .ok_or_else(|| Error::domain("approximate center not found at the first slice"))?;
        cur.push(xi);
    }
    let _ = model;
    let mut path = vec![cur.clone()];
    for k in 1..traj.len() {
        let m = &traj.slices[k];
        let mut next = Vec::with_capacity(cur.len());
        for (j, &prev) in cur.iter().enumerate() {
            let s = orientation(j, rising_first);
            match root_in(&grid, m, inst, prev - 0.5, prev + 0.5, Some(mask), s) {
                Some(xi) => next.push(xi),
                None => return Ok((path, rising_first, Some(k))),
            }
        }
        path.push(next.clone());
        cur = next;
    }
    Ok((path, rising_first, None))
}

/// Centers path for the coupled system; losing a front is an error there.
pub(crate) fn track_approximate_centers(
    model: &Model,
    inst: &Instanton,
    traj: &Trajectory,
    mask: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let params = AnalysisParams::defaults(model.m_beta);
    let (path, _, lost) = track(model, inst, traj, mask, &params)?;
    match lost {
        None => Ok(path),
        Some(k) => Err(Error::domain(format!("front lost at slice {k}"))),
    }
}

/// Approximate centers along a slab with the masked orthogonality condition.
#[derive(Clone, Debug)]
pub struct ApproximateCenters {
    pub centers: Vec<Vec<f64>>,
    pub rising_first: bool,
    /// `‖m - m̄_ξ̃‖` in the weighted norm, per tracked slice.
    pub deviation: Vec<f64>,
    /// `|A_{α*}^c|`.
    pub excluded_measure: f64,
    /// `(8/α*) ∫ ‖α b₁‖²` in the weighted norm.
    pub excluded_bound: f64,
    /// First slice at which a front could not be followed.
    pub lost_at: Option<usize>,
}

pub fn approximate_centers(
    model: &Model,
    inst: &Instanton,
    traj: &Trajectory,
    b1: &ForcingField,
    params: &AnalysisParams,
) -> Result<ApproximateCenters> {
    check_len(traj.len(), b1.len())?;
    let mask = mask_a_alpha(b1, params.alpha_star);
    let (centers, rising_first, lost_at) = track(model, inst, traj, &mask, params)?;
    let grid = traj.grid;
    let excluded_measure: f64 =
        mask.iter().enumerate().filter(|(_, v)| **v == 0.0).map(|(i, _)| grid.weight(i)).sum();
    let alpha: AlphaField = weight_alpha(inst, &grid, &centers);
    let m = centers.len();
    let mut weighted = 0.0;
    let mut deviation = Vec::with_capacity(m);
    for (k, xi) in centers.iter().enumerate() {
        let tw = if k == 0 || k + 1 == m { 0.5 } else { 1.0 } * traj.dt;
        let mut s = 0.0;
        let mut dev = 0.0;
        for i in 0..grid.len() {
            let r = inst.glued_value(grid.x(i), xi, rising_first);
            let w = grid.weight(i) / (1.0 - r * r);
            s += w * (alpha.values[k][i] * b1.values[k][i]).powi(2);
            dev += w * (traj.slices[k][i] - r).powi(2);
        }
        weighted += tw * s;
        deviation.push(dev.sqrt());
    }
    Ok(ApproximateCenters {
        centers,
        rising_first,
        deviation,
        excluded_measure,
        excluded_bound: 8.0 / params.alpha_star * weighted,
        lost_at,
    })
}

/// Smallest `∫ (1 ∧ |f|)²` over the profiles whose squared manifold distance
/// is at least `theta`; `None` when no profile qualifies.
pub fn gradient_floor(
    model: &Model,
    inst: &Instanton,
    params: &AnalysisParams,
    profiles: &[Profile],
) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for p in profiles {
        let d2 = match centers_of(p, inst, params) {
            Ok(c) => distance_to_manifold(p, inst, &c).powi(2),
            Err(_) => f64::INFINITY,
        };
        if d2 >= params.theta {
            let f = energy_gradient(model, &p.values)?;
            let g = clipped_gradient_norm_sq(&model.grid, &f);
            best = Some(best.map_or(g, |b: f64| b.min(g)));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::testutil::{default_instanton, default_model};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recovers_translates() {
        let model = default_model();
        let inst = default_instanton();
        let params = AnalysisParams::defaults(model.m_beta);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let xi = rng.gen_range(-8.0..8.0);
            let p = inst.translate(&model.grid, xi).unwrap();
            let c = centers_of(&p, inst, &params).unwrap();
            assert_eq!(c.len(), 1);
            assert!((c.centers[0] - xi).abs() < 1e-6, "{} vs {xi}", c.centers[0]);
            assert!(c.residuals[0] <= 1e-8);
            assert!(distance_to_manifold(&p, inst, &c) <= 1e-6);
        }
    }

    #[test]
    fn translation_equivariance() {
        let model = default_model();
        let inst = default_instanton();
        let params = AnalysisParams::defaults(model.m_beta);
        let base = Profile::from_fn(model.grid, |x| {
            inst.value_at(x - 0.3) + 0.02 * (-(x - 1.0).powi(2)).exp()
        });
        let c0 = centers_of(&base, inst, &params).unwrap().centers[0];
        let shift = 40; // nodes
        let a = shift as f64 * model.grid.spacing();
        let moved = Profile::from_fn(model.grid, |x| {
            inst.value_at(x - a - 0.3) + 0.02 * (-(x - a - 1.0).powi(2)).exp()
        });
        let c1 = centers_of(&moved, inst, &params).unwrap().centers[0];
        assert!((c1 - c0 - a).abs() < 1e-8);
    }

    #[test]
    fn multi_front_centers_alternate() {
        let grid = Grid::with_spacing(40.0, 0.05, Boundary::TruncatedLine).unwrap();
        let inst = default_instanton();
        let params = AnalysisParams::defaults(inst.m_beta);
        let xs = [-18.2, 0.4, 17.9];
        let p = inst.multi_instanton(&grid, &xs).unwrap();
        let c = centers_of(&p, inst, &params).unwrap();
        assert_eq!(c.parities, vec![1, -1, 1]);
        for (a, b) in c.centers.iter().zip(&xs) {
            assert!((a - b).abs() < 1e-6);
        }
        let contours = extract_contours(&p, inst, &params).unwrap();
        let generic = generic_distance_sq(&p, inst, &contours, &c);
        let dm = distance_to_manifold(&p, inst, &c).powi(2);
        assert!(generic <= dm + 1e-15);
    }

    #[test]
    fn first_order_formula_is_second_order_accurate() {
        let model = default_model();
        let inst = default_instanton();
        let params = AnalysisParams::defaults(model.m_beta);
        let bump = |x: f64| (-(x - 0.4).powi(2)).exp();
        let mut errs = vec![];
        for &s in &[0.04, 0.02, 0.01] {
            let p = Profile::from_fn(model.grid, |x| inst.value_at(x) + s * bump(x));
            let exact = centers_of(&p, inst, &params).unwrap().centers[0];
            errs.push((exact - first_order_center(&p, inst, 0.0)).abs());
        }
        let slope = (errs[0] / errs[2]).log2() / 2.0;
        assert!((slope - 2.0).abs() < 0.2, "slope {slope} from {errs:?}");
    }

    #[test]
    fn missing_center_is_an_error() {
        let model = default_model();
        let inst = default_instanton();
        let params = AnalysisParams::defaults(model.m_beta);
        let p = Profile::constant(model.grid, model.m_beta);
        assert!(centers_of(&p, inst, &params).is_err());
    }

    #[test]
    fn zero_field_mask_and_centers() {
        let model = default_model();
        let inst = default_instanton();
        let params = AnalysisParams::defaults(model.m_beta);
        let p = inst.translate(&model.grid, 1.7).unwrap();
        let traj = Trajectory::new(model.grid, 0.05, vec![p.values.clone(); 4]).unwrap();
        let b1 = ForcingField::zeros(model.grid, 0.05, 4);
        let a = approximate_centers(&model, inst, &traj, &b1, &params).unwrap();
        assert_eq!(a.excluded_measure, 0.0);
        assert!(a.lost_at.is_none());
        for xi in &a.centers {
            assert!((xi[0] - 1.7).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_floor_positive_away_from_manifold() {
        let model = default_model();
        let inst = default_instanton();
        let params = AnalysisParams::defaults(model.m_beta);
        let fam: Vec<Profile> = [0.3, 0.5, 0.8]
            .iter()
            .map(|&a| Profile::from_fn(model.grid, |x| inst.value_at(x) + a * (-(x * x)).exp() * x.cos()))
            .collect();
        let rho = gradient_floor(&model, inst, &params, &fam).unwrap();
        assert!(rho.unwrap() > 0.0);
    }
}
