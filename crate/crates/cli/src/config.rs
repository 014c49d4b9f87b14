//! Run configuration: JSON with a strict schema (unknown keys rejected),
//! flags override config keys one-for-one.

use serde::{Deserialize, Serialize};
use speclen::representation::RepSpec;
use speclen::{CurveOptions, Error, LengthFunctional, Result, WindowPolicy, XGridPolicy};
use std::path::PathBuf;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum FunctionalSpec {
    #[serde(rename = "alpha")]
    Alpha { i: usize },
    #[serde(rename = "hilbert")]
    Hilbert,
    #[serde(rename = "coeffs")]
    Coeffs {
        coeffs: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl FunctionalSpec {
    pub fn build(&self, dim: usize) -> Result<LengthFunctional> {
        match self {
            FunctionalSpec::Alpha { i } => LengthFunctional::alpha(*i, dim),
            FunctionalSpec::Hilbert => {
                if dim != 3 {
                    return Err(Error::Config(format!(
                        "hilbert functional is defined for dimension 3, representation has {dim}"
                    )));
                }
                Ok(LengthFunctional::hilbert())
            }
            FunctionalSpec::Coeffs { coeffs, scale } => {
                if coeffs.len() + 1 != dim {
                    return Err(Error::Config(format!(
                        "{} coefficients for dimension {dim}",
                        coeffs.len()
                    )));
                }
                LengthFunctional::new(coeffs.clone(), *scale)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub eps_list: Vec<f64>,
    pub k_fixed: f64,
    pub angle: f64,
    pub n_max: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            eps_list: vec![1.0, 0.5, 0.25],
            k_fixed: 3.0,
            angle: std::f64::consts::FRAC_PI_2,
            n_max: 12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rank: usize,
    pub n_max: usize,
    pub include_powers: bool,
    pub representations: Vec<RepSpec>,
    /// One per representation, or a single entry broadcast to all.
    pub functionals: Vec<FunctionalSpec>,
    /// Column pair for curve/correlation commands.
    pub pair: (usize, usize),
    pub b_grid: CurveOptions,
    /// Window width for the counting route, in renormalized units.
    pub epsilon: f64,
    pub x_grid: XGridPolicy,
    pub window: WindowPolicy,
    pub budget: Option<u128>,
    pub out_dir: PathBuf,
    /// 0 = rayon default.
    pub threads: usize,
    /// Affects only sampling-based validations (pilot subsampling).
    pub seed: u64,
    pub force: bool,
    pub demo: DemoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rank: 2,
            n_max: 12,
            include_powers: true,
            representations: Vec::new(),
            functionals: vec![FunctionalSpec::Alpha { i: 1 }],
            pair: (0, 1),
            b_grid: CurveOptions::default(),
            epsilon: 0.2,
            x_grid: XGridPolicy::default(),
            window: WindowPolicy::default(),
            budget: None,
            out_dir: PathBuf::from("out"),
            threads: 0,
            seed: 7,
            force: false,
            demo: DemoConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 {
            return Err(Error::Config(format!("rank {} < 2", self.rank)));
        }
        if self.n_max < 1 {
            return Err(Error::Config("n_max must be >= 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if !self.representations.is_empty() {
            let nf = self.functionals.len();
            if nf != 1 && nf != self.representations.len() {
                return Err(Error::Config(format!(
                    "{} functionals for {} representations (need 1 or equal)",
                    nf,
                    self.representations.len()
                )));
            }
        }
        Ok(())
    }

    /// Build (representation, functional) columns.
    pub fn columns(&self) -> Result<Vec<(speclen::Representation, LengthFunctional)>> {
        if self.representations.is_empty() {
            return Err(Error::Config("no representations configured".into()));
        }
        let mut out = Vec::new();
        for (i, spec) in self.representations.iter().enumerate() {
            let rep = spec.build()?;
            if rep.rank() != self.rank {
                return Err(Error::Config(format!(
                    "representation {i} has rank {}, config rank {}",
                    rep.rank(),
                    self.rank
                )));
            }
            let fspec = if self.functionals.len() == 1 {
                &self.functionals[0]
            } else {
                &self.functionals[i]
            };
            let phi = fspec.build(rep.dim())?;
            out.push((rep, phi));
        }
        Ok(out)
    }
}
