//! Run descriptors: a TOML file with a `[system]` block describing the
//! weight system and a `[params]` block carrying the per-command
//! parameters. Unknown keys are rejected so typos surface as field
//! errors rather than silently ignored settings.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use spx_core::element::SpElement;
use spx_core::index::{IndexSet, NormExponent};
use spx_core::psi::{toml_float_or_inf, PsiSystem, SystemSpec};
use spx_core::rules::DecayRule;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub params: Params,
}

/// Flat parameter bag; each command validates the fields it needs.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    // sequence / rearrangement depth
    pub levels: Option<usize>,
    pub count: Option<usize>,

    // norm exponents
    pub p: Option<f64>,
    pub q: Option<f64>,

    // degree sweeps
    pub n: Option<u64>,
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub n_values: Option<Vec<u64>>,

    // modulus / direct-theorem parameters
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub grid: Option<usize>,
    pub t_values: Option<Vec<f64>>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,

    // summation-method parameters
    pub rho_values: Option<Vec<f64>>,
    pub lambda_values: Option<Vec<f64>>,
    pub method: Option<MethodSpec>,
    pub pairing: Option<String>,
    pub omega: Option<OmegaSpec>,
    pub r: Option<u32>,

    // regions
    pub region: Option<RegionSpec>,
    pub gamma: Option<RegionSpec>,
    pub dimension: Option<usize>,
    pub norm: Option<toml_float_or_inf::Value>,
    pub m_min: Option<u64>,
    pub m_max: Option<u64>,

    // element input
    pub element: Option<PathBuf>,
    pub element_domain: Option<String>,

    // classification and order formulas
    pub profile: Option<DecayRule>,
    pub t_end: Option<f64>,
    pub grid_points: Option<usize>,
    pub kind: Option<String>,
    pub setting: Option<String>,
    pub band: Option<f64>,

    // constrained approximation
    pub constraint: Option<String>,

    // oracle search
    pub restarts: Option<u32>,
    pub iters: Option<u32>,
    pub keep: Option<usize>,
    pub atoms: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RegionSpec {
    /// triangular | ball | cross
    pub kind: String,
    pub d: usize,
    pub m: u64,
    #[serde(default)]
    pub r: Option<toml_float_or_inf::Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MethodSpec {
    /// partial | fejer | abel-poisson | tap
    pub name: String,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub r: Option<u32>,
}

/// Majorant for rate tables; only the power family is configurable,
/// which covers the order fixtures.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OmegaSpec {
    pub exponent: f64,
}

pub struct LoadedConfig {
    pub run: RunConfig,
    /// Raw file bytes, hashed into the manifest.
    pub bytes: Vec<u8>,
    /// Directory the config came from; element paths resolve against it.
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).context("config file is not UTF-8")?;
    let run: RunConfig =
        toml::from_str(text).with_context(|| format!("invalid config {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok(LoadedConfig { run, bytes, dir })
}

impl LoadedConfig {
    pub fn system(&self) -> Result<PsiSystem> {
        let spec = self
            .run
            .system
            .as_ref()
            .context("this command needs a [system] block in the config")?;
        Ok(PsiSystem::from_spec(spec)?)
    }

    /// Element referenced by `params.element`, resolved relative to the
    /// config file. The line format is inferred from `element-domain`
    /// ("scalar" | "lattice"), defaulting to the system's domain.
    pub fn element(&self) -> Result<SpElement> {
        let rel = self
            .run
            .params
            .element
            .as_ref()
            .context("this command needs params.element = \"<file>\"")?;
        let path = if rel.is_absolute() { rel.clone() } else { self.dir.join(rel) };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("cannot read element file {}", path.display()))?;
        let scalar = match self.run.params.element_domain.as_deref() {
            Some("scalar") => true,
            Some("lattice") => false,
            Some(other) => bail!("element-domain must be scalar or lattice, got '{other}'"),
            None => match &self.run.system {
                Some(spec) => {
                    let sys = PsiSystem::from_spec(spec)?;
                    sys.lattice_dim().is_none()
                }
                None => true,
            },
        };
        Ok(SpElement::parse_text(&text, scalar)?)
    }
}

impl Params {
    /// Degree sweep: explicit list, else inclusive range, else single n.
    pub fn degrees(&self) -> Result<Vec<u64>> {
        if let Some(vals) = &self.n_values {
            if vals.is_empty() {
                bail!("n-values must be non-empty");
            }
            return Ok(vals.clone());
        }
        match (self.n_min, self.n_max, self.n) {
            (Some(lo), Some(hi), _) => {
                if lo > hi {
                    bail!("n-min must not exceed n-max");
                }
                Ok((lo..=hi).collect())
            }
            (None, None, Some(n)) => Ok(vec![n]),
            _ => bail!("set n, or n-min and n-max, or n-values"),
        }
    }

    /// Step sweep for the modulus: explicit list or linear range.
    pub fn steps(&self) -> Result<Vec<f64>> {
        if let Some(vals) = &self.t_values {
            if vals.is_empty() {
                bail!("t-values must be non-empty");
            }
            return Ok(vals.clone());
        }
        match (self.t_min, self.t_max, self.t_steps) {
            (Some(lo), Some(hi), Some(steps)) => {
                if !(hi > lo) || steps < 2 {
                    bail!("step range needs t-min < t-max and t-steps >= 2");
                }
                let h = (hi - lo) / (steps - 1) as f64;
                Ok((0..steps).map(|i| lo + h * i as f64).collect())
            }
            _ => bail!("set t-values, or t-min, t-max and t-steps"),
        }
    }

    pub fn rho_sweep(&self) -> Result<Vec<f64>> {
        let vals = self
            .rho_values
            .as_ref()
            .context("set params.rho-values = [...] for this command")?;
        if vals.is_empty() {
            bail!("rho-values must be non-empty");
        }
        Ok(vals.clone())
    }

    pub fn need_p(&self) -> Result<f64> {
        self.p.context("set params.p")
    }

    pub fn need_q(&self) -> Result<f64> {
        self.q.context("set params.q")
    }

    pub fn need_alpha(&self) -> Result<f64> {
        self.alpha.context("set params.alpha")
    }
}

impl RegionSpec {
    pub fn to_set(&self) -> Result<IndexSet> {
        let set = match self.kind.as_str() {
            "triangular" => IndexSet::Triangular { d: self.d, m: self.m },
            "ball" => IndexSet::Ball { d: self.d, r: self.norm_exponent(), m: self.m },
            "cross" => IndexSet::Cross { d: self.d, n: self.m },
            other => bail!("region kind must be triangular, ball or cross, got '{other}'"),
        };
        Ok(set)
    }

    pub fn norm_exponent(&self) -> NormExponent {
        match &self.r {
            None | Some(toml_float_or_inf::Value::Inf) => NormExponent::Infinity,
            Some(toml_float_or_inf::Value::Num(x)) => NormExponent::Finite(*x),
        }
    }
}

pub fn norm_exponent_of(v: &Option<toml_float_or_inf::Value>) -> NormExponent {
    match v {
        None | Some(toml_float_or_inf::Value::Inf) => NormExponent::Infinity,
        Some(toml_float_or_inf::Value::Num(x)) => NormExponent::Finite(*x),
    }
}
