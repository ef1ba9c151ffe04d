//! JSON job configuration. Complex numbers are written as `[re, im]`.

use std::path::Path as FsPath;

use asymcon::oracle::{PhaseGrid, Thresholds};
use asymcon::{Complex64, ComplexPoly, Contour, OdeSpec, Path, Plane, RootSet, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cx(pub f64, pub f64);

impl From<Cx> for Complex64 {
    fn from(c: Cx) -> Self {
        Complex64::new(c.0, c.1)
    }
}

impl From<Complex64> for Cx {
    fn from(c: Complex64) -> Self {
        Cx(c.re, c.im)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub ode: OdeConfig,
    #[serde(default)]
    pub tolerance: TolConfig,
    pub com: Option<ComConfig>,
    pub invert: Option<InvertConfig>,
    pub sing: Option<SingConfig>,
    pub phase: Option<PhaseConfig>,
    pub regions: Option<RegionsConfig>,
}

/// Either a named equation or coefficient lists, P_k given in ascending powers of y.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub preset: Option<String>,
    pub p: Option<Vec<Vec<Cx>>>,
    /// Truncation order of the constant of motion.
    #[serde(default = "one")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    pub rel: f64,
    pub abs: f64,
}

impl Default for TolConfig {
    fn default() -> Self {
        let t = Tolerance::default();
        TolConfig {
            rel: t.rel,
            abs: t.abs,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub root: usize,
    #[serde(default = "one_i32")]
    pub turns: i32,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComConfig {
    pub contour: ContourConfig,
    pub base: Cx,
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertConfig {
    pub contour: ContourConfig,
    /// Base point of F; defaults to y0.
    pub base: Option<Cx>,
    pub path: Vec<Cx>,
    pub y0: Cx,
    /// Value of the constant; taken from (path start, y0) when absent.
    pub k: Option<Cx>,
    /// Take K instead from the RK reference at its first sample with |x| at or above this.
    pub k_rk_abs_x: Option<f64>,
    #[serde(default = "yes")]
    pub rk: bool,
    /// Only samples with |x| above this enter the reported error against RK.
    #[serde(default)]
    pub compare_min_abs_x: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingConfig {
    pub x0: Cx,
    pub y0: Cx,
    #[serde(default = "unit")]
    pub direction: Cx,
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    /// Period multiples per root; an empty list reports only the principal singularity.
    #[serde(default)]
    pub shifts: Vec<Vec<i32>>,
    #[serde(default = "yes")]
    pub verify: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub x0: Cx,
    #[serde(default)]
    pub s: f64,
    pub angles: Vec<f64>,
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Taylor,
    Rk,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub eps_near: f64,
    pub band: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    pub path: Vec<Cx>,
    pub y0: Cx,
    #[serde(default = "taylor")]
    pub integrator: Integrator,
    /// Forced sample stops per segment for the rk integrator.
    #[serde(default = "default_per_segment")]
    pub per_segment: usize,
    pub thresholds: Option<ThresholdConfig>,
    #[serde(default = "yes")]
    pub handoff: bool,
}

fn one() -> usize {
    1
}

fn one_i32() -> i32 {
    1
}

fn yes() -> bool {
    true
}

fn unit() -> Cx {
    Cx(1.0, 0.0)
}

fn default_y_max() -> f64 {
    asymcon::singular::DEFAULT_Y_MAX
}

fn taylor() -> Integrator {
    Integrator::Taylor
}

fn default_per_segment() -> usize {
    400
}

impl JobConfig {
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: JobConfig = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let t = &self.tolerance;
        if !(t.rel > 0.0 && t.abs > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn tol(&self) -> Tolerance {
        Tolerance::new(self.tolerance.rel, self.tolerance.abs)
    }

    /// Builds the equation; math failures such as a degenerate P_0 come back as `Math`.
    pub fn ode(&self) -> Result<OdeSpec> {
        let o = &self.ode;
        match (&o.preset, &o.p) {
            (Some(name), None) => Ok(match name.as_str() {
                "abel" => OdeSpec::abel(o.n)?,
                "linear" => OdeSpec::linear_decay(o.n)?,
                "riccati" => OdeSpec::riccati(o.n)?,
                other => return Err(CliError::Config(format!("unknown preset {other:?}"))),
            }),
            (None, Some(p)) => {
                let polys = p
                    .iter()
                    .map(|c| ComplexPoly::new(c.iter().map(|&v| v.into()).collect()))
                    .collect();
                Ok(OdeSpec::new(polys, o.n)?)
            }
            _ => Err(CliError::Config(
                "ode needs exactly one of `preset` and `p`".into(),
            )),
        }
    }

    pub fn block<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
        block
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing `{name}` block")))
    }
}

impl ContourConfig {
    pub fn build(&self, roots: &RootSet) -> Result<Contour> {
        if self.root >= roots.len() {
            return Err(CliError::Config(format!(
                "root {} out of range ({} roots)",
                self.root,
                roots.len()
            )));
        }
        let mut winding = vec![0; roots.len()];
        winding[self.root] = self.turns;
        let base = Contour::with_default_radii(winding.clone(), roots, 1)?;
        match self.radius {
            None => Ok(base),
            Some(r) => {
                let mut radii = base.radii().to_vec();
                radii[self.root] = r;
                Ok(Contour::new(winding, radii, 1)?)
            }
        }
    }
}

impl From<GridConfig> for PhaseGrid {
    fn from(g: GridConfig) -> Self {
        PhaseGrid {
            re: g.re,
            im: g.im,
            n: g.n,
        }
    }
}

impl From<ThresholdConfig> for Thresholds {
    fn from(t: ThresholdConfig) -> Self {
        Thresholds {
            eps_near: t.eps_near,
            band: t.band,
            r0: t.r0,
        }
    }
}

pub fn x_path(nodes: &[Cx]) -> Result<Path> {
    if nodes.len() < 2 {
        return Err(CliError::Config("a path needs at least two nodes".into()));
    }
    let pts: Vec<Complex64> = nodes.iter().map(|&c| c.into()).collect();
    Ok(Path::polyline(Plane::X, &pts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_and_defaults() {
        let cfg = JobConfig::parse(r#"{"ode": {"preset": "abel", "n": 2}}"#).unwrap();
        assert_eq!(cfg.ode().unwrap().order(), 2);
        assert_eq!(cfg.tol(), Tolerance::default());
    }

    #[test]
    fn coefficient_lists() {
        let cfg = JobConfig::parse(r#"{"ode": {"p": [[[1, 0], [0, 0], [1, 0]]]}}"#).unwrap();
        assert_eq!(cfg.ode().unwrap().roots().len(), 2);
    }

    #[test]
    fn rejects_unknown_fields_and_both_forms() {
        assert!(matches!(
            JobConfig::parse(r#"{"ode": {"preset": "abel"}, "extra": 1}"#),
            Err(CliError::Config(_))
        ));
        let both = JobConfig::parse(r#"{"ode": {"preset": "abel", "p": [[[1, 0]]]}}"#).unwrap();
        assert!(matches!(both.ode(), Err(CliError::Config(_))));
    }

    #[test]
    fn complex_must_be_a_pair() {
        assert!(JobConfig::parse(r#"{"ode": {"p": [[[1, 0, 2]]]}}"#).is_err());
    }
}
