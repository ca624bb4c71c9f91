use super::centers::{centers_of, CenterSet};
use super::AnalysisParams;
use crate::dynamics::relax;
use crate::error::Result;
use crate::grid::Profile;
use crate::model::Model;
use crate::statics::Instanton;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitCase {
    /// Every gap already exceeds `2|log ε|²`.
    Separated,
    /// Pairs erased or pushed apart, then a pointwise minimum.
    Rearranged,
    /// As above, followed by free relaxation because a close even pair remains.
    Relaxed,
}

#[derive(Clone, Debug)]
pub struct Initialized {
    pub profile: Profile,
    pub t_offset: f64,
    pub case: InitCase,
    /// Reference centers after erasure and push-apart.
    pub centers: Vec<f64>,
    pub rising_first: bool,
}

/// Removes pairs `(ξ_j, ξ_{j+1})`, `j` odd counting from one, closer than `limit`.
fn erase_odd_pairs(xi: &mut Vec<f64>, limit: f64) {
    let mut i = 0;
    while i + 1 < xi.len() {
        if xi[i + 1] - xi[i] <= limit {
            xi.drain(i..i + 2);
        } else {
            i += 2;
        }
    }
}

/// Pushes even pairs with gap in `[lo, target]` to gap `target` around their midpoint.
fn push_even_pairs(xi: &mut [f64], lo: f64, target: f64) {
    let mut i = 1;
    while i + 1 < xi.len() {
        let gap = xi[i + 1] - xi[i];
        if gap >= lo && gap <= target {
            let mid = 0.5 * (xi[i] + xi[i + 1]);
            xi[i] = mid - 0.5 * target;
            xi[i + 1] = mid + 0.5 * target;
        }
        i += 2;
    }
}

/// Re-initializes a profile so that its fronts are well separated.
pub fn initialize_profile(
    model: &Model,
    inst: &Instanton,
    m: &Profile,
    centers: &CenterSet,
    params: &AnalysisParams,
) -> Result<Initialized> {
    params.validate()?;
    let target = 2.0 * params.log_eps().powi(2);
    let rising_first = centers.rising_first;
    let xi = centers.centers.clone();
    if xi.windows(2).all(|w| w[1] - w[0] > target) {
        return Ok(Initialized { profile: m.clone(), t_offset: 0.0, case: InitCase::Separated, centers: xi, rising_first });
    }
    let mut xi3 = xi;
    erase_odd_pairs(&mut xi3, target);
    push_even_pairs(&mut xi3, 2.0 * params.ell_star, target);
    erase_odd_pairs(&mut xi3, target);

    let reference = inst.glued(&m.grid, &xi3, rising_first);
    let tilde: Vec<f64> = m.values.iter().zip(&reference).map(|(a, b)| a.min(*b)).collect();
    let close_even = xi3.windows(2).enumerate().any(|(i, w)| i % 2 == 1 && w[1] - w[0] < target);
    if !close_even {
        return Ok(Initialized {
            profile: Profile::new(m.grid, tilde)?,
            t_offset: 0.0,
            case: InitCase::Rearranged,
            centers: xi3,
            rising_first,
        });
    }
    let relaxed = relax(model, &tilde, params.tau, 0.05)?;
    let profile = Profile::new(m.grid, relaxed)?;
    let (centers, rising_first) = match centers_of(&profile, inst, params) {
        Ok(c) => (c.centers, c.rising_first),
        Err(_) => (xi3, rising_first),
    };
    Ok(Initialized { profile, t_offset: params.tau, case: InitCase::Relaxed, centers, rising_first })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};
    use crate::analysis::centers::distance_to_manifold;

    fn setup() -> (Model, Instanton, AnalysisParams) {
        let grid = Grid::with_spacing(40.0, 0.05, Boundary::TruncatedLine).unwrap();
        let model = Model::new(1.5, grid).unwrap();
        let inst = crate::statics::compute_instanton(&model).unwrap();
        let params = AnalysisParams::defaults(model.m_beta);
        (model, inst, params)
    }

    fn set(centers: Vec<f64>) -> CenterSet {
        let n = centers.len();
        CenterSet {
            parities: (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect(),
            residuals: vec![0.0; n],
            centers,
            rising_first: true,
        }
    }

    #[test]
    fn separated_fronts_untouched() {
        let (model, inst, params) = setup();
        let g = 2.0 * params.log_eps().powi(2) + 1.0;
        let xi = vec![-g, 0.0, g];
        let m = Profile::new(model.grid, inst.glued(&model.grid, &xi, true)).unwrap();
        let out = initialize_profile(&model, &inst, &m, &set(xi.clone()), &params).unwrap();
        assert_eq!(out.case, InitCase::Separated);
        assert_eq!(out.t_offset, 0.0);
        assert_eq!(out.profile.values, m.values);
        assert_eq!(out.centers, xi);
    }

    #[test]
    fn close_odd_pair_is_erased() {
        let (model, inst, params) = setup();
        let xi = vec![-10.0, -9.0, 10.0];
        let m = Profile::new(model.grid, inst.glued(&model.grid, &xi, true)).unwrap();
        let out = initialize_profile(&model, &inst, &m, &set(xi), &params).unwrap();
        assert_eq!(out.centers.len(), 1);
        assert_eq!(out.case, InitCase::Rearranged);
        let recount = centers_of(&out.profile, &inst, &params).unwrap();
        assert_eq!(recount.len(), 1);
        assert!((recount.centers[0] - 10.0).abs() < 1e-3);
    }

    #[test]
    fn even_pair_pushed_apart() {
        let params = AnalysisParams::defaults(0.86);
        let target = 2.0 * params.log_eps().powi(2);
        let gap = 2.0 * params.ell_star + 1.0;
        let xi = vec![-30.0, -1.0, -1.0 + gap];
        let mut pushed = xi.clone();
        push_even_pairs(&mut pushed, 2.0 * params.ell_star, target);
        assert!((pushed[2] - pushed[1] - target).abs() < 1e-12);
        assert!((pushed[1] + pushed[2] - xi[1] - xi[2]).abs() < 1e-12);
        assert_eq!(pushed[0], xi[0]);
    }

    #[test]
    fn output_gaps_and_distance() {
        let (model, inst, params) = setup();
        let target = 2.0 * params.log_eps().powi(2);
        let xi = vec![-20.0, -20.0 + target + 1.0, -20.0 + target + 4.0];
        let m = Profile::new(model.grid, inst.glued(&model.grid, &xi, true)).unwrap();
        let out = initialize_profile(&model, &inst, &m, &set(xi), &params).unwrap();
        assert!(out.centers.windows(2).all(|w| w[1] - w[0] >= params.log_eps().powi(2)));
        let found = centers_of(&out.profile, &inst, &params).unwrap();
        let d = distance_to_manifold(&out.profile, &inst, &found);
        assert!(d <= 6.0 * params.theta, "distance {d}");
    }
}
