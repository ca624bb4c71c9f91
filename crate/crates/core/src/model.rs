use crate::error::{Error, Result};
use crate::grid::{convolve_into, Grid, Kernel};
use crate::statics::mean_field_magnetization;

/// Inverse temperature, its mean-field magnetization, the grid and the
/// sampled kernel. Everything downstream borrows one of these.
#[derive(Clone, Debug)]
pub struct Model {
    pub beta: f64,
    pub m_beta: f64,
    pub grid: Grid,
    pub kernel: Kernel,
}

impl Model {
    pub fn new(beta: f64, grid: Grid) -> Result<Self> {
        let m_beta = mean_field_magnetization(beta)?;
        let kernel = Kernel::for_spacing(grid.spacing())?;
        if kernel.half_width() as f64 * grid.spacing() > grid.half_length() {
            return Err(Error::domain("kernel support exceeds the grid half-length"));
        }
        Ok(Model { beta, m_beta, grid, kernel })
    }

    /// Same temperature on another grid.
    pub fn on_grid(&self, grid: Grid) -> Result<Self> {
        if (grid.spacing() - self.grid.spacing()).abs() < 1e-14 {
            Ok(Model { grid, ..self.clone() })
        } else {
            Model::new(self.beta, grid)
        }
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    /// `J * m` with the grid's continuation rule.
    pub fn field_into(&self, m: &[f64], out: &mut [f64]) {
        convolve_into(&self.kernel, self.grid.boundary(), m, out);
    }

    pub fn field(&self, m: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; m.len()];
        self.field_into(m, &mut out);
        out
    }

    /// `tanh(β J * m)`.
    pub fn relaxed(&self, m: &[f64]) -> Vec<f64> {
        let mut out = self.field(m);
        out.iter_mut().for_each(|v| *v = (self.beta * *v).tanh());
        out
    }
}
