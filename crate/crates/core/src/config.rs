//! Run configuration: plain `key = value` lines with `#` comments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::AnalysisParams;
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::model::Model;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    /// Grid half-length `L`.
    pub half_length: f64,
    pub n_points: usize,
    pub boundary: Boundary,
    pub epsilon: f64,
    pub r: f64,
    pub t: f64,
    /// Slab length `S`.
    pub slab: f64,
    pub kappa: f64,
    pub lambda: f64,
    /// Phase-indicator accuracy; `None` means `0.2 m_β`.
    pub zeta: Option<f64>,
    pub ell_minus: f64,
    pub ell_plus: f64,
    pub alpha_star: f64,
    pub dt: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            beta: 1.5,
            half_length: 20.0,
            n_points: 801,
            boundary: Boundary::TruncatedLine,
            epsilon: 0.05,
            r: 1.0,
            t: 1.0,
            slab: 50.0,
            kappa: 2.0,
            lambda: 1.0,
            zeta: None,
            ell_minus: 1.0,
            ell_plus: 4.0,
            alpha_star: 0.01,
            dt: 0.05,
            output_dir: PathBuf::from("out"),
            seed: 42,
        }
    }
}

/// Accepted keys; `grid.`-prefixed spellings are aliases of the grid fields.
pub const KEYS: [&str; 17] = [
    "beta", "L", "n_points", "boundary", "epsilon", "R", "T", "S", "kappa", "lambda", "zeta", "ell_minus", "ell_plus",
    "alpha_star", "dt", "output_dir", "seed",
];

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Usage(format!("cannot parse `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected `key = value`", no + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.strip_prefix("grid.").unwrap_or(key);
        match key {
            "beta" => self.beta = number(key, value)?,
            "L" => self.half_length = number(key, value)?,
            "n_points" => self.n_points = number(key, value)?,
            "boundary" => self.boundary = Boundary::parse(value)?,
            "epsilon" => self.epsilon = number(key, value)?,
            "R" => self.r = number(key, value)?,
            "T" => self.t = number(key, value)?,
            "S" => self.slab = number(key, value)?,
            "kappa" => self.kappa = number(key, value)?,
            "lambda" => self.lambda = number(key, value)?,
            "zeta" => self.zeta = Some(number(key, value)?),
            "ell_minus" => self.ell_minus = number(key, value)?,
            "ell_plus" => self.ell_plus = number(key, value)?,
            "alpha_star" => self.alpha_star = number(key, value)?,
            "dt" => self.dt = number(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = number(key, value)?,
            other => return Err(Error::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Checks the numeric fields and the `λ < κ` ordering.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("L", self.half_length),
            ("epsilon", self.epsilon),
            ("R", self.r),
            ("T", self.t),
            ("S", self.slab),
            ("kappa", self.kappa),
            ("lambda", self.lambda),
            ("ell_minus", self.ell_minus),
            ("ell_plus", self.ell_plus),
            ("alpha_star", self.alpha_star),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.beta > 1.0) {
            return Err(Error::domain("beta must exceed 1"));
        }
        if !(self.epsilon < 1.0) {
            return Err(Error::domain("epsilon must lie in (0, 1)"));
        }
        if !(self.lambda < self.kappa) {
            return Err(Error::domain("lambda must be smaller than kappa"));
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0) {
                return Err(Error::domain("zeta must be positive"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_length, self.n_points, self.boundary)
    }

    pub fn model(&self) -> Result<Model> {
        self.validate()?;
        Model::new(self.beta, self.grid()?)
    }

    pub fn analysis_params(&self, m_beta: f64) -> Result<AnalysisParams> {
        let mut p = AnalysisParams::defaults(m_beta);
        p.zeta = self.zeta.unwrap_or(p.zeta);
        p.ell_minus = self.ell_minus;
        p.ell_plus = self.ell_plus;
        p.epsilon = self.epsilon;
        p.kappa = self.kappa;
        p.lambda = self.lambda;
        p.slab = self.slab;
        p.alpha_star = self.alpha_star;
        p.validate()?;
        Ok(p)
    }

    /// Every field as `key = value`, readable by [`RunConfig::parse`].
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let f = |v: f64| format!("{v:.16e}");
        let rows: [(&str, String); 17] = [
            ("beta", f(self.beta)),
            ("L", f(self.half_length)),
            ("n_points", self.n_points.to_string()),
            ("boundary", self.boundary.name().to_string()),
            ("epsilon", f(self.epsilon)),
            ("R", f(self.r)),
            ("T", f(self.t)),
            ("S", f(self.slab)),
            ("kappa", f(self.kappa)),
            ("lambda", f(self.lambda)),
            ("zeta", self.zeta.map_or_else(|| "default".to_string(), f)),
            ("ell_minus", f(self.ell_minus)),
            ("ell_plus", f(self.ell_plus)),
            ("alpha_star", f(self.alpha_star)),
            ("dt", f(self.dt)),
            ("output_dir", self.output_dir.display().to_string()),
            ("seed", self.seed.to_string()),
        ];
        for (k, v) in rows {
            if k == "zeta" && self.zeta.is_none() {
                let _ = writeln!(s, "# zeta = 0.2 * m_beta");
                continue;
            }
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
