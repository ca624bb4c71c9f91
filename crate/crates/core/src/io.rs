//! CSV tables, profile and trajectory files, and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, Profile};

/// One CSV cell; floats are written with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Float(v) => f.write_str(&format_float(*v)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::to_string).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv())
    }
}

/// `vec![a.into(), b.into(), ...]`.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::io::Cell::from($x)),*] };
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn profile_table(p: &Profile) -> Table {
    let mut t = Table::new(&["x", "m"]);
    for (i, v) in p.values.iter().enumerate() {
        t.push(row![p.grid.x(i), *v]);
    }
    t
}

/// Reads an `x,m` profile; the grid is recovered from the node positions.
pub fn read_profile(path: &Path, boundary: Boundary) -> Result<Profile> {
    let text = read_input(path)?;
    let mut xs = vec![];
    let mut ms = vec![];
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (no == 0 && line.starts_with('x')) {
            continue;
        }
        let mut it = line.split(',').map(|c| c.trim().parse::<f64>());
        match (it.next(), it.next()) {
            (Some(Ok(x)), Some(Ok(m))) => {
                xs.push(x);
                ms.push(m);
            }
            _ => return Err(Error::Usage(format!("{} line {}: expected `x,m`", path.display(), no + 1))),
        }
    }
    if xs.len() < 3 {
        return Err(Error::Usage(format!("{}: too few nodes", path.display())));
    }
    let grid = Grid::new(-xs[0], xs.len(), boundary)?;
    let h = grid.spacing();
    if xs.iter().enumerate().any(|(i, x)| (x - grid.x(i)).abs() > 1e-6 * h.max(1.0)) {
        return Err(Error::domain(format!("{}: nodes are not a symmetric uniform grid", path.display())));
    }
    Profile::new(grid, ms)
}

fn slice_name(k: usize) -> String {
    format!("slice_{k:06}.csv")
}

/// Directory layout: one `x,m` file per slice plus `trajectory.txt` with the metadata.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    let g = traj.grid;
    let meta = format!(
        "dt = {}\nM = {}\nL = {}\nn_points = {}\nboundary = {}\n",
        format_float(traj.dt),
        traj.len(),
        format_float(g.half_length()),
        g.len(),
        g.boundary().name()
    );
    write_text(&dir.join("trajectory.txt"), &meta)?;
    for k in 0..traj.len() {
        profile_table(&traj.profile(k)).write(&dir.join(slice_name(k)))?;
    }
    Ok(())
}

pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let meta = read_input(&dir.join("trajectory.txt"))?;
    let mut dt = None;
    let mut count = None;
    let mut boundary = Boundary::TruncatedLine;
    for line in meta.lines() {
        if let Some((k, v)) = line.split_once('=') {
            let v = v.trim();
            let bad = || Error::Usage(format!("trajectory.txt: cannot parse `{line}`"));
            match k.trim() {
                "dt" => dt = Some(v.parse::<f64>().map_err(|_| bad())?),
                "M" => count = Some(v.parse::<usize>().map_err(|_| bad())?),
                "boundary" => boundary = Boundary::parse(v)?,
                _ => {}
            }
        }
    }
    let (dt, count) = match (dt, count) {
        (Some(d), Some(c)) => (d, c),
        _ => return Err(Error::Usage("trajectory.txt must give dt and M".into())),
    };
    let mut grid = None;
    let mut slices = Vec::with_capacity(count);
    for k in 0..count {
        let p = read_profile(&dir.join(slice_name(k)), boundary)?;
        if let Some(g) = grid {
            if p.grid != g {
                return Err(Error::domain(format!("slice {k} has a different grid")));
            }
        }
        grid = Some(p.grid);
        slices.push(p.values);
    }
    let grid = grid.ok_or_else(|| Error::Usage("empty trajectory".into()))?;
    Trajectory::new(grid, dt, slices)
}

/// Run record: command line, configuration echo, versions and wall time.
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub wall_seconds: f64,
    pub exit_code: i32,
    pub outputs: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# run manifest");
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "package: {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "target: {}-{}", std::env::consts::ARCH, std::env::consts::OS);
        let _ = writeln!(s, "wall_time_s: {:.3}", self.wall_seconds);
        let _ = writeln!(s, "exit_code: {}", self.exit_code);
        for o in &self.outputs {
            let _ = writeln!(s, "output: {}", o.display());
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "# configuration");
        s.push_str(&self.config.echo());
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join("manifest.txt"), &self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("frontline-io-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        let v = 1.0 / 3.0;
        assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["n", "w_n"]);
        t.push(row![0usize, 0.5]);
        t.push(row![1usize, 0.25]);
        assert_eq!(t.to_csv(), "n,w_n\n0,5.0000000000000000e-1\n1,2.5000000000000000e-1\n");
        assert_eq!(Cell::from("a, \"b\"").to_string(), "\"a, \"\"b\"\"\"");
    }

    #[test]
    fn profile_round_trip() {
        let dir = tmp("profile");
        let grid = Grid::new(10.0, 201, Boundary::TruncatedLine).unwrap();
        let p = Profile::from_fn(grid, |x| (0.7 * x).tanh() * 0.9);
        let path = dir.join("p.csv");
        profile_table(&p).write(&path).unwrap();
        let q = read_profile(&path, Boundary::TruncatedLine).unwrap();
        assert_eq!(q.grid, grid);
        assert_eq!(q.values, p.values);
        assert_eq!(read_profile(&dir.join("missing.csv"), Boundary::TruncatedLine).unwrap_err().exit_code(), 64);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn trajectory_round_trip() {
        let dir = tmp("traj");
        let grid = Grid::new(10.0, 201, Boundary::Neumann).unwrap();
        let slices = (0..4).map(|k| grid.nodes().iter().map(|x| 0.03 * k as f64 * x).collect()).collect();
        let traj = Trajectory::new(grid, 0.05, slices).unwrap();
        write_trajectory(&dir, &traj).unwrap();
        let back = read_trajectory(&dir).unwrap();
        assert_eq!(back.grid, grid);
        assert_eq!(back.dt, 0.05);
        assert_eq!(back.slices, traj.slices);
        fs::remove_dir_all(dir).unwrap();
    }
}
