//! TOML experiment configuration: named sections for the modular function,
//! the operator, the parabolic problem, solver parameters and diagnostics
//! toggles, with range validation that names the offending field.

use serde::{Deserialize, Serialize};

use orlicz::grid::{SpaceGrid, SpatialField, TimeGrid};
use orlicz::nfunction::{Catalog, NFunction, SampleSpec};
use orlicz::operators::{make_model_operator, OperatorRule, VectorField};
use orlicz::solver::ProblemSpec;
use orlicz::{OrliczError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub nfunction: Option<NFunctionConfig>,
    #[serde(default)]
    pub operator: Option<OperatorConfig>,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub conjugate: ConjugateConfig,
}

fn default_output_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NFunctionConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub catalog: Catalog,
    #[serde(default = "default_xi_max")]
    pub xi_max: f64,
    #[serde(default = "default_ppd")]
    pub pts_per_decade: usize,
}

fn default_dim() -> usize {
    1
}
fn default_xi_max() -> f64 {
    1e3
}
fn default_ppd() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub rule: OperatorRule,
}

/// Closed-form field families for sources and initial data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Constant { value: f64 },
    /// `amp * prod_i sin(mode pi x_i / L_i)`.
    SineMode { amp: f64, mode: u32 },
    /// `amp * prod_i 4 x_i (L_i - x_i) / L_i^2`.
    Parabola { amp: f64 },
    /// Indicator spike on `|x_1 - center| <= width`.
    Spike { height: f64, center: f64, width: f64 },
    /// Smooth compact bump on axis 1.
    Bump { amp: f64, center: f64, width: f64 },
}

impl FieldSpec {
    pub fn realize(&self, grid: SpaceGrid, zero_boundary: bool) -> SpatialField {
        let len = grid.domain.len;
        let dim = grid.dim();
        let eval = |x: [f64; 2]| -> f64 {
            match self {
                FieldSpec::Zero => 0.0,
                FieldSpec::Constant { value } => *value,
                FieldSpec::SineMode { amp, mode } => {
                    let mut v = *amp;
                    for axis in 0..dim {
                        v *= (*mode as f64 * std::f64::consts::PI * x[axis] / len[axis]).sin();
                    }
                    v
                }
                FieldSpec::Parabola { amp } => {
                    let mut v = *amp;
                    for axis in 0..dim {
                        v *= 4.0 * x[axis] * (len[axis] - x[axis]) / (len[axis] * len[axis]);
                    }
                    v
                }
                FieldSpec::Spike { height, center, width } => {
                    if (x[0] - center).abs() <= *width {
                        *height
                    } else {
                        0.0
                    }
                }
                FieldSpec::Bump { amp, center, width } => {
                    let t = (x[0] - center) / width;
                    if t.abs() < 1.0 {
                        amp * (1.0 - 1.0 / (1.0 - t * t)).exp()
                    } else {
                        0.0
                    }
                }
            }
        };
        if zero_boundary {
            SpatialField::from_fn(grid, eval)
        } else {
            SpatialField::sample(grid, eval)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_len")]
    pub domain_len: [f64; 2],
    #[serde(default = "default_cells")]
    pub cells: [usize; 2],
    pub t_end: f64,
    pub steps: usize,
    pub u0: FieldSpec,
    pub f: FieldSpec,
}

fn default_len() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_cells() -> [usize; 2] {
    [64, 64]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_n")]
    pub n: f64,
    #[serde(default)]
    pub theta_list: Vec<f64>,
    #[serde(default)]
    pub n_list: Vec<f64>,
    #[serde(default)]
    pub k_list: Vec<f64>,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_n() -> f64 {
    1e3
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: default_tol(),
            theta: 0.0,
            n: default_n(),
            theta_list: Vec::new(),
            n_list: Vec::new(),
            k_list: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "yes")]
    pub energy: bool,
    #[serde(default = "yes")]
    pub apriori: bool,
    #[serde(default = "yes")]
    pub radiation: bool,
    #[serde(default = "yes")]
    pub renormalized: bool,
    #[serde(default = "yes")]
    pub measure: bool,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
    #[serde(default = "default_renorm_level")]
    pub renorm_level: f64,
}

fn yes() -> bool {
    true
}
fn default_l_max() -> usize {
    8
}
fn default_tail_fraction() -> f64 {
    1e-2
}
fn default_renorm_level() -> f64 {
    1.0
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            energy: true,
            apriori: true,
            radiation: true,
            renormalized: true,
            measure: true,
            l_max: default_l_max(),
            tail_fraction: default_tail_fraction(),
            renorm_level: default_renorm_level(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateConfig {
    #[serde(default = "default_eta_max")]
    pub eta_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_eta_max() -> f64 {
    10.0
}
fn default_points() -> usize {
    100
}

impl Default for ConjugateConfig {
    fn default() -> Self {
        ConjugateConfig { eta_max: default_eta_max(), points: default_points() }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(OrliczError::Config(msg));
        if let Some(nf) = &self.nfunction {
            if !(nf.dim == 1 || nf.dim == 2) {
                return bad(format!("nfunction.dim must be 1 or 2, got {}", nf.dim));
            }
            if !(nf.xi_max > 0.0 && nf.xi_max.is_finite()) {
                return bad(format!("nfunction.xi_max must be positive, got {}", nf.xi_max));
            }
            if nf.pts_per_decade == 0 {
                return bad("nfunction.pts_per_decade must be positive".into());
            }
        }
        if let Some(op) = &self.operator {
            if !(op.dim == 1 || op.dim == 2) {
                return bad(format!("operator.dim must be 1 or 2, got {}", op.dim));
            }
        }
        if let Some(p) = &self.problem {
            if !(p.dim == 1 || p.dim == 2) {
                return bad(format!("problem.dim must be 1 or 2, got {}", p.dim));
            }
            if !(p.t_end > 0.0 && p.t_end.is_finite()) {
                return bad(format!("problem.t_end must be positive, got {}", p.t_end));
            }
            if p.steps == 0 {
                return bad("problem.steps must be positive".into());
            }
            for axis in 0..p.dim {
                if p.cells[axis] < 2 {
                    return bad(format!(
                        "problem.cells[{axis}] must be at least 2, got {}",
                        p.cells[axis]
                    ));
                }
                if !(p.domain_len[axis] > 0.0) {
                    return bad(format!(
                        "problem.domain_len[{axis}] must be positive, got {}",
                        p.domain_len[axis]
                    ));
                }
            }
        }
        if !(self.solver.tol > 0.0) {
            return bad(format!("solver.tol must be positive, got {}", self.solver.tol));
        }
        if !(0.0..=1.0).contains(&self.solver.theta) {
            return bad(format!("solver.theta must lie in [0, 1], got {}", self.solver.theta));
        }
        if self.solver.n <= 0.0 {
            return bad(format!("solver.n must be positive, got {}", self.solver.n));
        }
        if !self.solver.theta_list.is_empty()
            && !self.solver.theta_list.windows(2).all(|w| w[1] < w[0])
        {
            return bad("solver.theta_list must be strictly decreasing".into());
        }
        if !self.solver.n_list.windows(2).all(|w| w[1] > w[0]) {
            return bad("solver.n_list must be strictly increasing".into());
        }
        if self.diagnostics.tail_fraction <= 0.0 {
            return bad(format!(
                "diagnostics.tail_fraction must be positive, got {}",
                self.diagnostics.tail_fraction
            ));
        }
        if !(self.conjugate.eta_max > 0.0) {
            return bad(format!(
                "conjugate.eta_max must be positive, got {}",
                self.conjugate.eta_max
            ));
        }
        if self.conjugate.points < 2 {
            return bad("conjugate.points must be at least 2".into());
        }
        Ok(())
    }

    pub fn build_nfunction(&self) -> Result<NFunction> {
        let nf = self
            .nfunction
            .as_ref()
            .ok_or_else(|| OrliczError::Config("missing [nfunction] section".into()))?;
        Ok(NFunction::new(nf.dim, nf.catalog.clone()).with_sample(SampleSpec {
            xi_max: nf.xi_max,
            pts_per_decade: nf.pts_per_decade,
        }))
    }

    pub fn build_operator(&self) -> Result<VectorField> {
        let op = self
            .operator
            .as_ref()
            .ok_or_else(|| OrliczError::Config("missing [operator] section".into()))?;
        make_model_operator(op.dim, op.rule.clone())
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        let p = self
            .problem
            .as_ref()
            .ok_or_else(|| OrliczError::Config("missing [problem] section".into()))?;
        let a = self.build_operator()?;
        if a.governing_m.dim != p.dim {
            return Err(OrliczError::Config(format!(
                "operator.dim {} does not match problem.dim {}",
                a.governing_m.dim, p.dim
            )));
        }
        let grid = if p.dim == 1 {
            SpaceGrid::line(p.domain_len[0], p.cells[0])
        } else {
            SpaceGrid::rect(p.domain_len[0], p.domain_len[1], p.cells[0], p.cells[1])
        };
        let f = p.f.realize(grid, false);
        let u0 = p.u0.realize(grid, true);
        ProblemSpec::new(a, f, u0, TimeGrid { t_end: p.t_end, steps: p.steps })
    }
}

/// Parses and validates; parse failures keep the line/column diagnostic from
/// the TOML parser.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| OrliczError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"
        seed = 0
        [operator]
        dim = 1
        rule = { rule = "linear", c = 1.0 }
        [problem]
        dim = 1
        cells = [32, 1]
        t_end = 0.1
        steps = 16
        u0 = { kind = "sine_mode", amp = 1.0, mode = 1 }
        f = { kind = "zero" }
    "#;

    #[test]
    fn parses_heat_config_and_builds_problem() {
        let cfg = load_config(HEAT).unwrap();
        assert_eq!(cfg.seed, 0);
        let spec = cfg.build_problem().unwrap();
        assert_eq!(spec.time.steps, 16);
        assert_eq!(spec.grid().cells[0], 32);
    }

    #[test]
    fn missing_field_reports_line_anchored_error() {
        let bad = HEAT.replace("c = 1.0", "x = 1.0");
        let err = load_config(&bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "no line anchor in: {msg}");
    }

    #[test]
    fn range_validation_names_the_field() {
        let bad = HEAT.replace("t_end = 0.1", "t_end = -1.0");
        let err = load_config(&bad).unwrap_err();
        assert!(format!("{err}").contains("t_end"));
    }

    #[test]
    fn nfunction_section_round_trips() {
        let text = r#"
            [nfunction]
            dim = 1
            catalog = { catalog = "power_p", p = 3.0, scale = 0.3333333333333333 }
        "#;
        let cfg = load_config(text).unwrap();
        let m = cfg.build_nfunction().unwrap();
        assert!((m.eval([0.5, 0.0], [2.0, 0.0]) - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn decreasing_theta_list_enforced() {
        let bad = format!("{HEAT}\n[solver]\ntheta_list = [0.5, 0.5]\n");
        assert!(load_config(&bad).is_err());
    }
}
