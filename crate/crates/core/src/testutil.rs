use std::sync::OnceLock;

use crate::grid::{Boundary, Grid};
use crate::model::Model;
use crate::statics::{compute_instanton, Instanton};

pub fn default_model() -> Model {
    let grid = Grid::with_spacing(20.0, 0.05, Boundary::TruncatedLine).unwrap();
    Model::new(1.5, grid).unwrap()
}

pub fn default_instanton() -> &'static Instanton {
    static INST: OnceLock<Instanton> = OnceLock::new();
    INST.get_or_init(|| compute_instanton(&default_model()).unwrap())
}
