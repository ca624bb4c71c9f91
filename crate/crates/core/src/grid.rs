//! Uniform grids, the interaction kernel, windowed convolutions and the
//! weighted measure `dx / (1 - m^2)`.

use crate::error::{check_len, Error, Result};

/// Profiles are kept this far away from ±1.
pub const CLAMP_EPS: f64 = 1e-12;

/// Clamp a magnetization value into `[-1 + CLAMP_EPS, 1 - CLAMP_EPS]`.
#[inline]
pub fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0 + CLAMP_EPS, 1.0 - CLAMP_EPS)
}

/// How a profile is continued past the ends of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Constant extension by the boundary values (whole-line approximation).
    TruncatedLine,
    /// Even reflection about both endpoints.
    Neumann,
}

impl Boundary {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "truncated_line" | "line" => Ok(Boundary::TruncatedLine),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(Error::Usage(format!("unknown boundary mode `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Boundary::TruncatedLine => "truncated_line",
            Boundary::Neumann => "neumann",
        }
    }
}

/// Symmetric uniform grid on `[-L, L]` with an odd number of nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    half_length: f64,
    n_points: usize,
    boundary: Boundary,
}

impl Grid {
    pub fn new(half_length: f64, n_points: usize, boundary: Boundary) -> Result<Self> {
        if !(half_length.is_finite() && half_length >= 10.0) {
            return Err(Error::domain(format!(
                "grid half-length must be at least 10, got {half_length}"
            )));
        }
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "grid needs an odd node count >= 3, got {n_points}"
            )));
        }
        Ok(Grid { half_length, n_points, boundary })
    }

    /// Grid with (approximately) the requested spacing; the node count is rounded.
    pub fn with_spacing(half_length: f64, spacing: f64, boundary: Boundary) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::domain("grid spacing must be positive"));
        }
        let cells = (2.0 * half_length / spacing).round() as usize;
        let cells = cells + cells % 2;
        Grid::new(half_length, cells + 1, boundary)
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Grid {
        Grid { boundary, ..*self }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.n_points - 1) as f64
    }

    /// Index of the node at `x = 0`.
    pub fn center_index(&self) -> usize {
        (self.n_points - 1) / 2
    }

    /// Node coordinate; exactly antisymmetric in the index.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.center_index() as f64) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Trapezoid quadrature weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.spacing()
        } else {
            self.spacing()
        }
    }

    pub fn integrate(&self, v: &[f64]) -> f64 {
        v.iter().enumerate().map(|(i, a)| self.weight(i) * a).sum()
    }

    /// Nearest node to `x`, if inside the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let k = (x / self.spacing()).round() as i64 + self.center_index() as i64;
        (0..self.n_points as i64).contains(&k).then_some(k as usize)
    }

    /// Index of the mirror node `x -> -x`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.n_points - 1 - i
    }
}

/// The interaction kernel `J(r) = 35/32 (1 - r^2)^3` on `|r| <= 1`, sampled
/// on a grid and renormalized to unit discrete mass.
#[derive(Clone, Debug)]
pub struct Kernel {
    spacing: f64,
    half_width: usize,
    scale: f64,
    weights: Vec<f64>,
}

impl Kernel {
    pub const SUPPORT: f64 = 1.0;

    /// Closed-form kernel value.
    pub fn eval(r: f64) -> f64 {
        let s = 1.0 - r * r;
        if s <= 0.0 {
            0.0
        } else {
            35.0 / 32.0 * s * s * s
        }
    }

    pub fn eval_d1(r: f64) -> f64 {
        let s = 1.0 - r * r;
        if s <= 0.0 {
            0.0
        } else {
            -105.0 / 16.0 * r * s * s
        }
    }

    pub fn eval_d2(r: f64) -> f64 {
        let s = 1.0 - r * r;
        if s <= 0.0 {
            0.0
        } else {
            -105.0 / 16.0 * s * (1.0 - 5.0 * r * r)
        }
    }

    pub fn for_spacing(spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing < Self::SUPPORT) {
            return Err(Error::domain(format!("spacing {spacing} does not resolve the kernel")));
        }
        let half_width = (Self::SUPPORT / spacing + 1e-9).floor() as usize;
        let raw: Vec<f64> = (0..=2 * half_width)
            .map(|j| Self::eval((j as f64 - half_width as f64) * spacing) * spacing)
            .collect();
        let mass: f64 = raw.iter().sum();
        let scale = 1.0 / mass;
        let weights = raw.into_iter().map(|w| w * scale).collect();
        Ok(Kernel { spacing, half_width, scale, weights })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of nodes covered by the support on each side.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Quadrature weights, index `j` corresponding to offset `(j - K) h`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Renormalized quadrature weight at an arbitrary offset.
    #[inline]
    pub fn weight_at(&self, r: f64) -> f64 {
        Self::eval(r) * self.spacing * self.scale
    }

    #[inline]
    pub fn weight_d1_at(&self, r: f64) -> f64 {
        Self::eval_d1(r) * self.spacing * self.scale
    }

    #[inline]
    pub fn weight_d2_at(&self, r: f64) -> f64 {
        Self::eval_d2(r) * self.spacing * self.scale
    }

    fn check(&self, grid: &Grid, len: usize) -> Result<()> {
        check_len(grid.len(), len)?;
        if (grid.spacing() - self.spacing).abs() > 1e-12 * self.spacing {
            return Err(Error::domain("kernel was sampled for a different spacing"));
        }
        if self.half_width >= grid.len() {
            return Err(Error::domain("kernel support exceeds the grid"));
        }
        Ok(())
    }
}

#[inline]
fn extend_index(j: isize, n: usize, boundary: Boundary) -> usize {
    let last = n as isize - 1;
    match boundary {
        Boundary::TruncatedLine => j.clamp(0, last) as usize,
        Boundary::Neumann => {
            if j < 0 {
                (-j) as usize
            } else if j > last {
                (2 * last - j) as usize
            } else {
                j as usize
            }
        }
    }
}

/// `out = J * m` with the given continuation rule. Interior nodes use the same
/// arithmetic for both rules.
pub(crate) fn convolve_into(kernel: &Kernel, boundary: Boundary, m: &[f64], out: &mut [f64]) {
    let n = m.len();
    let k = kernel.half_width;
    let w = &kernel.weights;
    for (i, o) in out.iter_mut().enumerate() {
        if i >= k && i + k < n {
            let window = &m[i - k..=i + k];
            *o = w.iter().zip(window).map(|(a, b)| a * b).sum();
        } else {
            let mut s = 0.0;
            for (j, wj) in w.iter().enumerate() {
                let idx = extend_index(i as isize + j as isize - k as isize, n, boundary);
                s += wj * m[idx];
            }
            *o = s;
        }
    }
}

/// Whole-line convolution: the profile is extended by its boundary values.
pub fn convolve(kernel: &Kernel, grid: &Grid, m: &[f64]) -> Result<Vec<f64>> {
    kernel.check(grid, m.len())?;
    let mut out = vec![0.0; m.len()];
    convolve_into(kernel, Boundary::TruncatedLine, m, &mut out);
    Ok(out)
}

/// Convolution with the kernel reflected at both endpoints.
pub fn convolve_neumann(kernel: &Kernel, grid: &Grid, m: &[f64]) -> Result<Vec<f64>> {
    kernel.check(grid, m.len())?;
    if grid.boundary() != Boundary::Neumann {
        return Err(Error::domain("reflected convolution needs a Neumann grid"));
    }
    let mut out = vec![0.0; m.len()];
    convolve_into(kernel, Boundary::Neumann, m, &mut out);
    Ok(out)
}

/// A magnetization profile on a grid, values clamped inside `(-1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite profile value {bad}")));
        }
        values.iter_mut().for_each(|v| *v = clamp_unit(*v));
        Ok(Profile { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| clamp_unit(f(grid.x(i)))).collect();
        Profile { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Profile::from_fn(grid, |_| c)
    }
}

/// Per-node weights `1 / (1 - m^2)` of a reference profile.
#[derive(Clone, Debug, PartialEq)]
pub struct NuWeights(Vec<f64>);

impl NuWeights {
    pub fn from_reference(m: &[f64]) -> Self {
        NuWeights(
            m.iter()
                .map(|&v| {
                    let v = clamp_unit(v);
                    1.0 / (1.0 - v * v)
                })
                .collect(),
        )
    }

    pub fn unit(n: usize) -> Self {
        NuWeights(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Trapezoid value of `∫ f g dν`.
pub fn inner_product_nu(grid: &Grid, f: &[f64], g: &[f64], w: &NuWeights) -> Result<f64> {
    check_len(grid.len(), f.len())?;
    check_len(grid.len(), g.len())?;
    check_len(grid.len(), w.0.len())?;
    Ok(f.iter()
        .zip(g)
        .zip(&w.0)
        .enumerate()
        .map(|(i, ((a, b), c))| grid.weight(i) * a * b * c)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_grid(boundary: Boundary) -> Grid {
        Grid::with_spacing(20.0, 0.05, boundary).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid(Boundary::TruncatedLine);
        assert_eq!(g.len(), 801);
        assert!((g.spacing() - 0.05).abs() < 1e-15);
        assert_eq!(g.x(0), -20.0);
        assert_eq!(g.x(800), 20.0);
        assert_eq!(g.x(400), 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(5.0, 101, Boundary::Neumann).is_err());
        assert!(Grid::new(20.0, 100, Boundary::Neumann).is_err());
    }

    #[test]
    fn kernel_properties() {
        let k = Kernel::for_spacing(0.05).unwrap();
        let mass: f64 = k.weights().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert_eq!(k.half_width(), 20);
        // closed form is even, vanishes outside, decreasing, C^2 at the edge
        for i in 0..200 {
            let r = i as f64 * 0.006;
            assert_eq!(Kernel::eval(r), Kernel::eval(-r));
            assert!(Kernel::eval(r + 0.006) <= Kernel::eval(r));
        }
        assert_eq!(Kernel::eval(1.2), 0.0);
        assert!(Kernel::eval(1.0 - 1e-6) < 1e-15);
        assert!(Kernel::eval_d1(1.0 - 1e-6).abs() < 1e-10);
        assert!(Kernel::eval_d2(1.0 - 1e-6).abs() < 1e-4);
        // continuum mass of the closed form is one
        let n = 200_000;
        let h = 2.0 / n as f64;
        let m: f64 = (0..=n).map(|i| Kernel::eval(-1.0 + i as f64 * h) * h).sum();
        assert!((m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &r in &[-0.7, -0.2, 0.1, 0.5, 0.93] {
            let e = 1e-6;
            let fd = (Kernel::eval(r + e) - Kernel::eval(r - e)) / (2.0 * e);
            assert!((fd - Kernel::eval_d1(r)).abs() < 1e-8);
            let fd2 = (Kernel::eval_d1(r + e) - Kernel::eval_d1(r - e)) / (2.0 * e);
            assert!((fd2 - Kernel::eval_d2(r)).abs() < 1e-7);
        }
    }

    #[test]
    fn constants_are_preserved() {
        let k = Kernel::for_spacing(0.05).unwrap();
        for b in [Boundary::TruncatedLine, Boundary::Neumann] {
            let g = default_grid(b);
            let m = vec![0.37; g.len()];
            let out = if b == Boundary::Neumann {
                convolve_neumann(&k, &g, &m).unwrap()
            } else {
                convolve(&k, &g, &m).unwrap()
            };
            assert!(out.iter().all(|v| (v - 0.37).abs() < 1e-14));
        }
    }

    #[test]
    fn linear_profile_reproduced_in_interior() {
        let k = Kernel::for_spacing(0.05).unwrap();
        let g = default_grid(Boundary::TruncatedLine);
        let m = g.nodes();
        let out = convolve(&k, &g, &m).unwrap();
        for i in 20..g.len() - 20 {
            assert!((out[i] - m[i]).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn neumann_matches_line_away_from_boundary() {
        let k = Kernel::for_spacing(0.05).unwrap();
        let g = default_grid(Boundary::Neumann);
        let m: Vec<f64> = g.nodes().iter().map(|x| (0.3 * x).sin() * 0.8).collect();
        let a = convolve(&k, &g, &m).unwrap();
        let b = convolve_neumann(&k, &g, &m).unwrap();
        for i in 0..g.len() {
            let dist = (g.x(i).abs() - 20.0).abs();
            if dist >= 1.0 - 1e-12 {
                assert!((a[i] - b[i]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn neumann_keeps_antisymmetry() {
        let k = Kernel::for_spacing(0.05).unwrap();
        let g = default_grid(Boundary::Neumann);
        let m: Vec<f64> = g.nodes().iter().map(|x| (0.7 * x).tanh() * 0.8 + 0.01 * x).collect();
        let out = convolve_neumann(&k, &g, &m).unwrap();
        for i in 0..g.len() {
            assert!((out[i] + out[g.mirror(i)]).abs() < 1e-14);
        }
    }

    #[test]
    fn neumann_operator_is_weight_symmetric() {
        // c_i A_ij = c_j A_ji for the reflected operator
        let k = Kernel::for_spacing(0.5).unwrap();
        let g = Grid::with_spacing(10.0, 0.5, Boundary::Neumann).unwrap();
        let n = g.len();
        let mut a = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = convolve_neumann(&k, &g, &e).unwrap();
            for i in 0..n {
                a[i][j] = col[i];
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert!((g.weight(i) * a[i][j] - g.weight(j) * a[j][i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let k = Kernel::for_spacing(0.05).unwrap();
        let g = default_grid(Boundary::TruncatedLine);
        assert!(matches!(convolve(&k, &g, &[0.0; 10]), Err(Error::Dimension { .. })));
        assert!(convolve_neumann(&k, &g, &vec![0.0; g.len()]).is_err());
        let w = NuWeights::unit(3);
        assert!(inner_product_nu(&g, &[0.0; 3], &[0.0; 3], &w).is_err());
    }

    #[test]
    fn weighted_norm_exceeds_flat_norm() {
        let g = default_grid(Boundary::TruncatedLine);
        let m: Vec<f64> = g.nodes().iter().map(|x| 0.85 * (1.2 * x).tanh()).collect();
        let d: Vec<f64> = g.nodes().iter().map(|x| 1.0 / (1.2 * x).cosh().powi(2)).collect();
        let w = NuWeights::from_reference(&m);
        let nu = inner_product_nu(&g, &d, &d, &w).unwrap();
        let flat = inner_product_nu(&g, &d, &d, &NuWeights::unit(g.len())).unwrap();
        assert!(nu > flat);
        assert!(w.as_slice().iter().all(|&v| v >= 1.0 && v.is_finite()));
        let zero = vec![0.0; g.len()];
        assert_eq!(inner_product_nu(&g, &zero, &d, &w).unwrap(), 0.0);
    }

    #[test]
    fn profile_clamps() {
        let g = default_grid(Boundary::TruncatedLine);
        let p = Profile::constant(g, 1.5);
        assert!(p.values.iter().all(|&v| v < 1.0));
        assert!(Profile::new(g, vec![f64::NAN; g.len()]).is_err());
    }

    proptest! {
        #[test]
        fn convolution_is_linear_and_contracting(
            a in -1.0f64..1.0,
            seed in prop::collection::vec(-1.0f64..1.0, 24),
            other in prop::collection::vec(-1.0f64..1.0, 24),
        ) {
            let k = Kernel::for_spacing(0.25).unwrap();
            for b in [Boundary::TruncatedLine, Boundary::Neumann] {
                let g = Grid::with_spacing(10.0, 0.25, b).unwrap();
                let f = |c: &[f64]| -> Vec<f64> {
                    (0..g.len()).map(|i| c[i % c.len()] * (0.1 * i as f64).cos()).collect()
                };
                let u = f(&seed);
                let v = f(&other);
                let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + y).collect();
                let mut cu = vec![0.0; g.len()];
                let mut cv = vec![0.0; g.len()];
                let mut cm = vec![0.0; g.len()];
                convolve_into(&k, b, &u, &mut cu);
                convolve_into(&k, b, &v, &mut cv);
                convolve_into(&k, b, &mix, &mut cm);
                let sup = u.iter().fold(0.0f64, |s, x| s.max(x.abs()));
                for i in 0..g.len() {
                    prop_assert!((cm[i] - (a * cu[i] + cv[i])).abs() < 1e-12);
                    prop_assert!(cu[i].abs() <= sup + 1e-14);
                }
            }
        }

        #[test]
        fn nu_product_symmetric_positive(
            vals in prop::collection::vec(-1.0f64..1.0, 81),
            refv in prop::collection::vec(-0.99f64..0.99, 81),
        ) {
            let g = Grid::with_spacing(10.0, 0.25, Boundary::TruncatedLine).unwrap();
            let w = NuWeights::from_reference(&refv);
            let other: Vec<f64> = vals.iter().rev().cloned().collect();
            let ab = inner_product_nu(&g, &vals, &other, &w).unwrap();
            let ba = inner_product_nu(&g, &other, &vals, &w).unwrap();
            prop_assert!((ab - ba).abs() < 1e-13);
            let aa = inner_product_nu(&g, &vals, &vals, &w).unwrap();
            prop_assert!(aa >= 0.0);
        }
    }
}
