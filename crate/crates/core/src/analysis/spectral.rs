use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{inner_product_nu, Boundary, NuWeights};
use crate::model::Model;
use crate::statics::Instanton;

/// Linearization `L u = -u + (1 - m̄²) β J*u` around the stored instanton,
/// with reflecting continuation so that `L` is self-adjoint in the weighted product.
pub struct Linearization {
    model: Model,
    pub mbar: Vec<f64>,
    pub zero_mode: Vec<f64>,
    pub weights: NuWeights,
}

impl Linearization {
    pub fn new(inst: &Instanton) -> Result<Self> {
        let grid = inst.profile.grid.with_boundary(Boundary::Neumann);
        let model = Model::new(inst.beta, grid)?;
        let mbar = inst.profile.values.clone();
        let zero_mode = grid.nodes().iter().map(|&x| inst.derivative_at(x)).collect();
        let weights = NuWeights::from_reference(&mbar);
        Ok(Linearization { model, mbar, zero_mode, weights })
    }

    pub fn len(&self) -> usize {
        self.mbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mbar.is_empty()
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        self.model.field_into(u, out);
        for i in 0..u.len() {
            out[i] = -u[i] + (1.0 - self.mbar[i] * self.mbar[i]) * self.model.beta * out[i];
        }
    }

    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        inner_product_nu(&self.model.grid, f, g, &self.weights).unwrap_or(f64::NAN)
    }

    /// Removes the zero-mode component.
    pub fn project(&self, v: &mut [f64]) {
        let c = self.dot(v, &self.zero_mode) / self.dot(&self.zero_mode, &self.zero_mode);
        v.iter_mut().zip(&self.zero_mode).for_each(|(a, z)| *a -= c * z);
    }

    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let mut lv = vec![0.0; v.len()];
        self.apply(v, &mut lv);
        self.dot(v, &lv) / self.dot(v, v)
    }

    /// `‖L m̄'‖ / ‖m̄'‖`.
    pub fn zero_mode_residual(&self) -> f64 {
        let mut lz = vec![0.0; self.len()];
        self.apply(&self.zero_mode, &mut lz);
        (self.dot(&lz, &lz) / self.dot(&self.zero_mode, &self.zero_mode)).sqrt()
    }

    /// Bound on the most negative eigenvalue from the kernel symbol.
    fn lower_edge(&self) -> f64 {
        let k = &self.model.kernel;
        let h = k.spacing();
        let kw = k.half_width() as f64;
        let mut min_symbol: f64 = 1.0;
        let samples = 2000;
        for s in 0..=samples {
            let q = std::f64::consts::PI / h * s as f64 / samples as f64;
            let sym: f64 = k
                .weights()
                .iter()
                .enumerate()
                .map(|(j, w)| w * (q * (j as f64 - kw) * h).cos())
                .sum();
            min_symbol = min_symbol.min(sym);
        }
        -1.0 + self.model.beta * min_symbol.min(0.0) * 1.05
    }
}

#[derive(Clone, Debug)]
pub struct SpectralGap {
    /// `ω`: minus the top of the spectrum orthogonal to the zero mode.
    pub omega: f64,
    pub iterations: usize,
    /// `‖L v - λ v‖ / ‖v‖` for the final iterate.
    pub residual: f64,
    pub zero_mode_residual: f64,
    pub eigenvector: Vec<f64>,
}

/// Projected power iteration on `L + s` with `s` placing the spectrum in `[0, ∞)`.
pub fn spectral_gap(inst: &Instanton) -> Result<SpectralGap> {
    spectral_gap_with(&Linearization::new(inst)?, 200_000, 1e-12)
}

pub fn spectral_gap_with(lin: &Linearization, max_iter: usize, tol: f64) -> Result<SpectralGap> {
    let n = lin.len();
    let shift = -lin.lower_edge();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    lin.project(&mut v);
    let norm = lin.dot(&v, &v).sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    let mut lv = vec![0.0; n];
    let mut last = f64::NEG_INFINITY;
    let mut rq = f64::NEG_INFINITY;
    let check = 100;
    for it in 1..=max_iter {
        lin.apply(&v, &mut lv);
        rq = lin.dot(&v, &lv);
        for i in 0..n {
            v[i] = lv[i] + shift * v[i];
        }
        lin.project(&mut v);
        let norm = lin.dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        if it % check == 0 {
            if (rq - last).abs() <= tol * check as f64 {
                let residual = residual_of(lin, &v);
                return Ok(SpectralGap {
                    omega: -lin.rayleigh(&v),
                    iterations: it,
                    residual,
                    zero_mode_residual: lin.zero_mode_residual(),
                    eigenvector: v,
                });
            }
            last = rq;
        }
    }
    Err(Error::Convergence { what: "spectral gap power iteration".into(), residual: (rq - last).abs() })
}

fn residual_of(lin: &Linearization, v: &[f64]) -> f64 {
    let mut lv = vec![0.0; v.len()];
    lin.apply(v, &mut lv);
    let lam = lin.dot(v, &lv) / lin.dot(v, v);
    let r: Vec<f64> = lv.iter().zip(v).map(|(a, b)| a - lam * b).collect();
    (lin.dot(&r, &r) / lin.dot(v, v)).sqrt()
}

/// Gap from a full eigendecomposition of the operator symmetrized by the
/// weights `h/(1 - m̄²)`. Cubic in the grid size; meant for coarse grids.
pub fn dense_spectral_gap(inst: &Instanton) -> Result<f64> {
    let lin = Linearization::new(inst)?;
    let n = lin.len();
    let g = inst.profile.grid;
    let d: Vec<f64> = (0..n).map(|i| (g.weight(i) / (1.0 - lin.mbar[i].powi(2))).sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        lin.apply(&e, &mut col);
        for i in 0..n {
            a[(i, j)] = d[i] * col[i] / d[j];
        }
    }
    let asym = (&a - a.transpose()).amax();
    if asym > 1e-10 {
        return Err(Error::domain(format!("linearization is not self-adjoint (asymmetry {asym:e})")));
    }
    let sym = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    if ev.len() < 2 || ev[0].abs() > 1e-3 {
        return Err(Error::Convergence { what: "dense spectrum: zero mode not resolved".into(), residual: ev[0] });
    }
    Ok(-ev[1])
}
