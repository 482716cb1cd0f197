//! Flat key=value run configuration.
//!
//! One text file (`--config`) plus command-line `KEY=VALUE` overrides fully
//! determine a run; there are no environment variables. Keys mirror the
//! option structs of the library one-to-one.

use std::fmt;
use std::path::PathBuf;

use qsurf::shape_opt::{ContainmentSpec, MinimizeOptions};
use qsurf::{GraphDomain, SolveOptions};

/// Initial/analyzed boundary shape when no boundary file is given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Disk,
    Ellipse,
    Stadium,
    Rectangle,
    PerturbedStadium,
}

impl Preset {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "disk" => Ok(Self::Disk),
            "ellipse" => Ok(Self::Ellipse),
            "stadium" => Ok(Self::Stadium),
            "rectangle" => Ok(Self::Rectangle),
            "perturbed-stadium" => Ok(Self::PerturbedStadium),
            other => Err(format!(
                "unknown preset `{other}` (expected disk, ellipse, stadium, \
                 rectangle, or perturbed-stadium)"
            )),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Disk => "disk",
            Self::Ellipse => "ellipse",
            Self::Stadium => "stadium",
            Self::Rectangle => "rectangle",
            Self::PerturbedStadium => "perturbed-stadium",
        };
        f.write_str(s)
    }
}

/// Every tunable of every subcommand, flattened.
#[derive(Clone, Debug)]
pub struct RunConfig {
    // geometry
    pub preset: Preset,
    pub boundary: Option<PathBuf>,
    pub n: usize,
    pub center_x: f64,
    pub radius: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub half_x: f64,
    pub half_y: f64,
    pub lambda: f64,
    // physics
    pub a: f64,
    pub k: f64,
    // Dirichlet solver
    pub charges: Option<usize>,
    pub offset: f64,
    pub regularization: f64,
    pub solver_tol: f64,
    // optimizer
    pub eta0: f64,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub tol_res: f64,
    pub tol_step: f64,
    pub max_iter: usize,
    pub collapse_eps: f64,
    pub inner_ball: Option<f64>,
    pub box_x0: f64,
    pub box_y0: f64,
    pub box_x1: f64,
    pub box_y1: f64,
    // sweep
    pub ratios: Vec<f64>,
    pub clearance_min: f64,
    pub bracket_width: f64,
    pub workers: usize,
    // output
    pub out_dir: PathBuf,
    pub grid_nx: usize,
    pub grid_ny: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = MinimizeOptions::default();
        let s = SolveOptions::default();
        Self {
            preset: Preset::Disk,
            boundary: None,
            n: 129,
            center_x: 0.0,
            radius: 2.0,
            semi_x: 2.0,
            semi_y: 1.0,
            half_x: 2.0,
            half_y: 1.0,
            lambda: 0.2,
            a: 4.0,
            k: 1.0,
            charges: s.charges,
            offset: s.offset,
            regularization: s.regularization,
            solver_tol: m.solver.tol,
            eta0: m.eta0,
            armijo_c1: m.armijo_c1,
            backtrack: m.backtrack,
            max_backtracks: m.max_backtracks,
            tol_res: m.tol_res,
            tol_step: m.tol_step,
            max_iter: m.max_iter,
            collapse_eps: m.collapse_eps,
            inner_ball: m.containment.inner_ball,
            box_x0: m.containment.outer_box.0,
            box_y0: m.containment.outer_box.1,
            box_x1: m.containment.outer_box.2,
            box_y1: m.containment.outer_box.3,
            ratios: vec![1.2, 1.6, 2.0, 2.4, 3.0, 4.0],
            clearance_min: 1e-2,
            bracket_width: 0.1,
            workers: 1,
            out_dir: PathBuf::from("out"),
            grid_nx: 0,
            grid_ny: 0,
        }
    }
}

impl RunConfig {
    /// Applies one `key=value` assignment. `value` may be empty to reset an
    /// optional key (`boundary`, `charges`, `inner_ball`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse().map_err(|e| format!("bad value for {key}: {e}"))
        }
        match key {
            "preset" => self.preset = Preset::parse(value)?,
            "boundary" => {
                self.boundary = (!value.is_empty()).then(|| PathBuf::from(value));
            }
            "n" => self.n = num(key, value)?,
            "center_x" => self.center_x = num(key, value)?,
            "radius" => self.radius = num(key, value)?,
            "semi_x" => self.semi_x = num(key, value)?,
            "semi_y" => self.semi_y = num(key, value)?,
            "half_x" => self.half_x = num(key, value)?,
            "half_y" => self.half_y = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "a" => self.a = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "charges" => {
                self.charges = if value.is_empty() {
                    None
                } else {
                    Some(num(key, value)?)
                };
            }
            "offset" => self.offset = num(key, value)?,
            "regularization" => self.regularization = num(key, value)?,
            "solver_tol" => self.solver_tol = num(key, value)?,
            "eta0" => self.eta0 = num(key, value)?,
            "armijo_c1" => self.armijo_c1 = num(key, value)?,
            "backtrack" => self.backtrack = num(key, value)?,
            "max_backtracks" => self.max_backtracks = num(key, value)?,
            "tol_res" => self.tol_res = num(key, value)?,
            "tol_step" => self.tol_step = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "collapse_eps" => self.collapse_eps = num(key, value)?,
            "inner_ball" => {
                self.inner_ball = if value.is_empty() {
                    None
                } else {
                    Some(num(key, value)?)
                };
            }
            "box_x0" => self.box_x0 = num(key, value)?,
            "box_y0" => self.box_y0 = num(key, value)?,
            "box_x1" => self.box_x1 = num(key, value)?,
            "box_y1" => self.box_y1 = num(key, value)?,
            "ratios" => {
                self.ratios = value
                    .split(',')
                    .map(|s| num("ratios", s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "clearance_min" => self.clearance_min = num(key, value)?,
            "bracket_width" => self.bracket_width = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "grid_nx" => self.grid_nx = num(key, value)?,
            "grid_ny" => self.grid_ny = num(key, value)?,
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }

    /// Parses a flat key=value file (`#` comments, blank lines allowed).
    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), String> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| format!("override `{item}`: expected KEY=VALUE"))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        let positives = [
            ("solver_tol", self.solver_tol),
            ("tol_res", self.tol_res),
            ("tol_step", self.tol_step),
            ("collapse_eps", self.collapse_eps),
            ("clearance_min", self.clearance_min),
            ("bracket_width", self.bracket_width),
            ("eta0", self.eta0),
            ("a", self.a),
            ("k", self.k),
        ];
        for (name, v) in positives {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.n < 8 {
            return Err(format!("n must be at least 8, got {}", self.n));
        }
        if self.workers == 0 {
            return Err("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            charges: self.charges,
            offset: self.offset,
            regularization: self.regularization,
            tol: self.solver_tol,
        }
    }

    pub fn containment(&self) -> ContainmentSpec {
        ContainmentSpec {
            inner_ball: self.inner_ball,
            outer_box: (self.box_x0, self.box_y0, self.box_x1, self.box_y1),
        }
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions {
            eta0: self.eta0,
            armijo_c1: self.armijo_c1,
            backtrack: self.backtrack,
            max_backtracks: self.max_backtracks,
            tol_res: self.tol_res,
            tol_step: self.tol_step,
            max_iter: self.max_iter,
            collapse_eps: self.collapse_eps,
            containment: self.containment(),
            solver: self.solve_options(),
            ..MinimizeOptions::default()
        }
    }

    /// Builds the initial/analyzed domain: the boundary file wins over the
    /// preset.
    pub fn domain(&self) -> qsurf::Result<GraphDomain> {
        if let Some(path) = &self.boundary {
            let file = std::fs::File::open(path)?;
            return GraphDomain::read_polyline(std::io::BufReader::new(file));
        }
        match self.preset {
            Preset::Disk => qsurf::presets::disk(self.center_x, self.radius, self.n),
            Preset::Ellipse => qsurf::presets::ellipse(self.semi_x, self.semi_y, self.n),
            Preset::Stadium => qsurf::presets::stadium(self.radius, self.n),
            Preset::Rectangle => qsurf::presets::rectangle(self.half_x, self.half_y, self.n),
            Preset::PerturbedStadium => {
                qsurf::presets::perturbed_stadium(self.radius, self.lambda, self.n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override_precedence() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("# comment\na = 3.0\nn = 65\n").unwrap();
        cfg.apply_overrides(&["a=5.5".into()]).unwrap();
        assert_eq!(cfg.a, 5.5);
        assert_eq!(cfg.n, 65);
    }

    #[test]
    fn rejects_unknown_key_with_line() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_file("a = 1.0\nbogus = 2\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn ratio_list_parses() {
        let mut cfg = RunConfig::default();
        cfg.set("ratios", "1.5, 2.5,3.5").unwrap();
        assert_eq!(cfg.ratios, vec![1.5, 2.5, 3.5]);
    }

    #[test]
    fn validate_rejects_tiny_n() {
        let mut cfg = RunConfig::default();
        cfg.set("n", "4").unwrap();
        assert!(cfg.validate().is_err());
    }
}
