//! TOML run configuration, command-line overrides and the resolved [`RunConfig`].

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use antipt_core::model::{uniform_grid, ModelParams, Scheme, Truncation, PAPER_G_EPS, PAPER_GAMMA, PAPER_LENGTH};
use antipt_core::observables::theta_grid;
use antipt_core::units::PER_CM;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Spanned, Value};

use crate::quantity::{parse_quantity, Dim};
use crate::CliError;

type Item = Option<Spanned<Value>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub design: DesignSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub scheme: Item,
    pub g_eps: Item,
    pub gamma: Item,
    pub theta: Item,
    /// Either a point count over [0, 2π] or an explicit list of phases.
    pub theta_grid: Item,
    pub length: Item,
    pub z_samples: Item,
    pub kappa: Item,
    pub gamma_c: Item,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub per_mode: Item,
    pub total: Item,
    pub coupler: Item,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub engine: Item,
    pub jumps: Item,
    pub step: Item,
    pub threads: Item,
    pub compare: Item,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Item,
    pub name: Item,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub n_pump: Item,
    pub n_fund: Item,
    pub lambda_fund: Item,
    pub lambda_pump: Item,
    pub l_beat: Item,
    pub gamma_c: Item,
    pub d_eff: Item,
    pub zeta: Item,
    pub a_eff: Item,
    pub n_omega: Item,
    pub n_2omega: Item,
    pub pump_power: Item,
    pub field_omega: Item,
    pub field_2omega: Item,
    pub calibration: Item,
}

/// Config text plus its origin, for line-anchored messages.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub text: String,
    pub dir: PathBuf,
}

impl Source {
    fn line(&self, span: &Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn error(&self, span: &Range<usize>, key: &str, msg: impl AsRef<str>) -> CliError {
        CliError::Config(format!("{}:{}: {key}: {}", self.name, self.line(span), msg.as_ref()))
    }

    /// Relative paths in a config file are taken relative to the file.
    pub fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }
}

pub fn load(path: Option<&Path>) -> Result<(FileConfig, Option<Source>), CliError> {
    let Some(path) = path else { return Ok((FileConfig::default(), None)) };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg: FileConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, Some(Source { name: path.display().to_string(), text, dir })))
}

/// Reads typed values out of the file, reporting the offending line.
pub struct Reader<'a> {
    pub source: Option<&'a Source>,
}

impl Reader<'_> {
    fn err(&self, item: &Spanned<Value>, key: &str, msg: impl AsRef<str>) -> CliError {
        match self.source {
            Some(s) => s.error(&item.span(), key, msg),
            None => CliError::Config(format!("{key}: {}", msg.as_ref())),
        }
    }

    pub fn quantity(&self, item: &Item, key: &str, dim: Dim) -> Result<Option<f64>, CliError> {
        let Some(it) = item else { return Ok(None) };
        let v = match it.get_ref() {
            Value::String(s) => parse_quantity(s, dim).map_err(|m| self.err(it, key, m))?,
            Value::Float(x) if matches!(dim, Dim::Angle | Dim::Number) => *x,
            Value::Integer(x) if matches!(dim, Dim::Angle | Dim::Number) => *x as f64,
            _ => return Err(self.err(it, key, format!("expected {dim} as a string such as \"1.0 {}\"", example(dim)))),
        };
        Ok(Some(v))
    }

    pub fn count(&self, item: &Item, key: &str) -> Result<Option<usize>, CliError> {
        let Some(it) = item else { return Ok(None) };
        match it.get_ref() {
            Value::Integer(x) if *x >= 0 => Ok(Some(*x as usize)),
            _ => Err(self.err(it, key, "expected a nonnegative integer")),
        }
    }

    pub fn flag(&self, item: &Item, key: &str) -> Result<Option<bool>, CliError> {
        let Some(it) = item else { return Ok(None) };
        match it.get_ref() {
            Value::Boolean(b) => Ok(Some(*b)),
            _ => Err(self.err(it, key, "expected true or false")),
        }
    }

    pub fn text(&self, item: &Item, key: &str) -> Result<Option<String>, CliError> {
        let Some(it) = item else { return Ok(None) };
        match it.get_ref() {
            Value::String(s) => Ok(Some(s.clone())),
            _ => Err(self.err(it, key, "expected a string")),
        }
    }

    pub fn choice<T: Copy>(&self, item: &Item, key: &str, options: &[(&str, T)]) -> Result<Option<T>, CliError> {
        let Some(s) = self.text(item, key)? else { return Ok(None) };
        lookup(&s, options).map(Some).map_err(|m| self.err(item.as_ref().unwrap(), key, m))
    }

    fn theta_grid(&self, item: &Item, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(it) = item else { return Ok(None) };
        match it.get_ref() {
            Value::Integer(n) if *n >= 1 => Ok(Some(theta_grid(*n as usize))),
            Value::Array(a) if !a.is_empty() => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(x) => Ok(*x as f64),
                    Value::String(s) => parse_quantity(s, Dim::Angle).map_err(|m| self.err(it, key, m)),
                    _ => Err(self.err(it, key, "phases must be numbers (rad)")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            _ => Err(self.err(it, key, "expected a point count or a non-empty list of phases")),
        }
    }
}

fn example(dim: Dim) -> &'static str {
    match dim {
        Dim::InverseLength => "cm^-1",
        Dim::Length => "um",
        Dim::Area => "um^2",
        Dim::Power => "mW",
        Dim::HeaterPower => "mW",
        Dim::Nonlinear => "pm/V",
        Dim::Angle => "rad",
        Dim::Number => "",
    }
}

pub fn lookup<T: Copy>(s: &str, options: &[(&str, T)]) -> Result<T, String> {
    options.iter().find(|(k, _)| k.eq_ignore_ascii_case(s)).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(k, _)| *k).collect();
        format!("unknown value `{s}`; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    AntiPt,
    Coherent,
    ThreeMode,
}

pub const SCHEMES: [(&str, SchemeName); 3] =
    [("anti-pt", SchemeName::AntiPt), ("coherent", SchemeName::Coherent), ("three-mode", SchemeName::ThreeMode)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineName {
    Master,
    Nhh,
    Gaussian,
}

pub const ENGINES: [(&str, EngineName); 3] =
    [("master", EngineName::Master), ("nhh", EngineName::Nhh), ("gaussian", EngineName::Gaussian)];

impl EngineName {
    pub fn as_str(self) -> &'static str {
        ENGINES.iter().find(|(_, e)| *e == self).unwrap().0
    }
}

/// Values given on the command line; each replaces the matching config key.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Pair-generation strength, e.g. "6.93 m^-1".
    #[arg(long)]
    pub g_eps: Option<String>,
    /// Effective dissipative coupling, e.g. "7.22 cm^-1".
    #[arg(long)]
    pub gamma: Option<String>,
    /// Pump phase (rad, or "<x> deg").
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Uniform phase grid over [0, 2π] with this many points.
    #[arg(long)]
    pub theta_points: Option<usize>,
    /// Device length, e.g. "4 mm".
    #[arg(long)]
    pub length: Option<String>,
    #[arg(long)]
    pub z_samples: Option<usize>,
    /// anti-pt, coherent or three-mode.
    #[arg(long)]
    pub scheme: Option<String>,
    /// master, nhh or gaussian.
    #[arg(long)]
    pub engine: Option<String>,
    /// Total photon cap (also sets the per-mode cap).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Drop the quantum-jump term of the master equation.
    #[arg(long)]
    pub no_jumps: bool,
    /// Fixed integration step, e.g. "2.5 um".
    #[arg(long)]
    pub step: Option<String>,
    /// Second engine whose G4 is compared in the sweep footer.
    #[arg(long)]
    pub compare: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Base name of the output files.
    #[arg(long)]
    pub name: Option<String>,
}

/// Fully resolved run; the serialized form is echoed in sidecars and hashed.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub scheme: SchemeName,
    pub engine: EngineName,
    /// m⁻¹
    pub g_eps: f64,
    /// m⁻¹
    pub gamma: f64,
    pub theta: Option<f64>,
    pub theta_grid: Option<Vec<f64>>,
    /// m
    pub length: f64,
    pub z_samples: usize,
    pub kappa: Option<f64>,
    pub gamma_c: Option<f64>,
    pub per_mode_cap: usize,
    pub total_cap: Option<usize>,
    pub coupler_cap: Option<usize>,
    pub jumps: bool,
    pub step: Option<f64>,
    pub compare: Option<EngineName>,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub name: String,
}

fn flag_value(s: &str, key: &str, dim: Dim) -> Result<f64, CliError> {
    parse_quantity(s, dim).map_err(|m| CliError::Config(format!("--{key}: {m}")))
}

fn flag_choice<T: Copy>(s: &str, key: &str, options: &[(&str, T)]) -> Result<T, CliError> {
    lookup(s, options).map_err(|m| CliError::Config(format!("--{key}: {m}")))
}

impl RunConfig {
    pub fn resolve(file: &FileConfig, source: Option<&Source>, o: &Overrides, default_name: &str) -> Result<Self, CliError> {
        let r = Reader { source };
        let m = &file.model;
        let scheme = match &o.scheme {
            Some(s) => flag_choice(s, "scheme", &SCHEMES)?,
            None => r.choice(&m.scheme, "model.scheme", &SCHEMES)?.unwrap_or(SchemeName::AntiPt),
        };
        let engine = match &o.engine {
            Some(s) => flag_choice(s, "engine", &ENGINES)?,
            None => r.choice(&file.run.engine, "run.engine", &ENGINES)?.unwrap_or(EngineName::Master),
        };
        let compare = match &o.compare {
            Some(s) => Some(flag_choice(s, "compare", &ENGINES)?),
            None => r.choice(&file.run.compare, "run.compare", &ENGINES)?,
        };
        let rate = |flag: &Option<String>, key: &str, item: &Item, default: f64| -> Result<f64, CliError> {
            let (flag_name, cfg_key) = (key.replace('_', "-"), format!("model.{key}"));
            let v = match flag {
                Some(s) => flag_value(s, &flag_name, Dim::InverseLength)?,
                None => r.quantity(item, &cfg_key, Dim::InverseLength)?.unwrap_or(default),
            };
            if v < 0.0 {
                return Err(match (flag, item) {
                    (None, Some(it)) => r.err(it, &cfg_key, "rates must be nonnegative"),
                    _ => CliError::Config(format!("--{flag_name}: rates must be nonnegative")),
                });
            }
            Ok(v)
        };
        let g_eps = rate(&o.g_eps, "g_eps", &m.g_eps, PAPER_G_EPS)?;
        let kappa = r.quantity(&m.kappa, "model.kappa", Dim::InverseLength)?;
        let gamma_c = r.quantity(&m.gamma_c, "model.gamma_c", Dim::InverseLength)?;
        let (kappa, gamma_c) = match scheme {
            SchemeName::ThreeMode => (Some(kappa.unwrap_or(76.62 * PER_CM)), Some(gamma_c.unwrap_or(813.0 * PER_CM))),
            _ => (kappa, gamma_c),
        };
        for (v, key, item) in [(kappa, "model.kappa", &m.kappa), (gamma_c, "model.gamma_c", &m.gamma_c)] {
            if let (Some(v), Some(it)) = (v, item) {
                if v < 0.0 {
                    return Err(r.err(it, key, "rates must be nonnegative"));
                }
            }
        }
        let gamma = match (scheme, kappa, gamma_c) {
            (SchemeName::ThreeMode, Some(k), Some(c)) if c > 0.0 => k * k / c,
            _ => rate(&o.gamma, "gamma", &m.gamma, PAPER_GAMMA)?,
        };

        let flag_theta = o.theta.as_deref().map(|s| flag_value(s, "theta", Dim::Angle)).transpose()?;
        let flag_grid = o.theta_points.map(|n| {
            if n == 0 {
                Err(CliError::Config("--theta-points: need at least one point".into()))
            } else {
                Ok(theta_grid(n))
            }
        });
        let (theta, grid) = match (flag_theta, flag_grid) {
            (Some(_), Some(_)) => return Err(CliError::Config("--theta and --theta-points are mutually exclusive".into())),
            (Some(t), None) => (Some(t), None),
            (None, Some(g)) => (None, Some(g?)),
            (None, None) => {
                let t = r.quantity(&m.theta, "model.theta", Dim::Angle)?;
                let g = r.theta_grid(&m.theta_grid, "model.theta_grid")?;
                if t.is_some() && g.is_some() {
                    return Err(r.err(m.theta_grid.as_ref().unwrap(), "model.theta_grid", "set either theta or theta_grid, not both"));
                }
                (t, g)
            }
        };

        let length = match &o.length {
            Some(s) => flag_value(s, "length", Dim::Length)?,
            None => r.quantity(&m.length, "model.length", Dim::Length)?.unwrap_or(PAPER_LENGTH),
        };
        if length <= 0.0 {
            return Err(CliError::Config("length must be positive".into()));
        }
        let z_samples = o.z_samples.or(r.count(&m.z_samples, "model.z_samples")?).unwrap_or(41);
        if z_samples < 2 {
            return Err(CliError::Config("z_samples must be at least 2".into()));
        }

        let t = &file.truncation;
        let (per_mode_cap, total_cap) = match o.cap {
            Some(c) => (c, Some(c)),
            None => {
                let total = r.count(&t.total, "truncation.total")?;
                let per = r.count(&t.per_mode, "truncation.per_mode")?;
                match (per, total) {
                    (Some(p), tot) => (p, tot),
                    (None, Some(tot)) => (tot, Some(tot)),
                    (None, None) => (6, Some(6)),
                }
            }
        };
        let coupler_cap = r.count(&t.coupler, "truncation.coupler")?;
        let coupler_cap = match scheme {
            SchemeName::ThreeMode => Some(coupler_cap.unwrap_or(1)),
            _ => coupler_cap,
        };

        let jumps = !o.no_jumps && r.flag(&file.run.jumps, "run.jumps")?.unwrap_or(true);
        let step = match &o.step {
            Some(s) => Some(flag_value(s, "step", Dim::Length)?),
            None => r.quantity(&file.run.step, "run.step", Dim::Length)?,
        };
        if step.is_some_and(|h| h <= 0.0) {
            return Err(CliError::Config("step must be positive".into()));
        }
        let threads = o.threads.or(r.count(&file.run.threads, "run.threads")?);

        let out_dir = match (&o.out, r.text(&file.output.dir, "output.dir")?) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => source.map(|s| s.resolve(&p)).unwrap_or_else(|| PathBuf::from(p)),
            (None, None) => PathBuf::from("."),
        };
        let name = o.name.clone().or(r.text(&file.output.name, "output.name")?).unwrap_or_else(|| default_name.into());

        let cfg = RunConfig {
            scheme,
            engine,
            g_eps,
            gamma,
            theta,
            theta_grid: grid,
            length,
            z_samples,
            kappa,
            gamma_c,
            per_mode_cap,
            total_cap,
            coupler_cap,
            jumps,
            step,
            compare,
            threads,
            out_dir,
            name,
        };
        cfg.check_engine(engine)?;
        if let Some(c) = compare {
            cfg.check_engine(c)?;
        }
        Ok(cfg)
    }

    pub fn check_engine(&self, engine: EngineName) -> Result<(), CliError> {
        let ok = match (engine, self.scheme) {
            (EngineName::Master, _) => true,
            (EngineName::Nhh, s) => s == SchemeName::AntiPt,
            (EngineName::Gaussian, s) => s != SchemeName::ThreeMode,
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "engine {} does not support the {} scheme",
                engine.as_str(),
                serde_json::to_value(self.scheme).unwrap().as_str().unwrap()
            )))
        }
    }

    /// Model parameters at phase `theta`.
    pub fn params(&self, theta: f64) -> Result<ModelParams, CliError> {
        let scheme = match (self.scheme, self.engine) {
            (SchemeName::AntiPt, EngineName::Nhh) => Scheme::AntiPtNhh,
            (SchemeName::AntiPt, _) => Scheme::AntiPtMaster,
            (SchemeName::Coherent, _) => Scheme::CoherentHermitian,
            (SchemeName::ThreeMode, _) => Scheme::ThreeMode,
        };
        let mut p = ModelParams::new(self.g_eps, self.gamma, theta, scheme)
            .with_truncation(Truncation {
                per_mode_cap: self.per_mode_cap,
                total_cap: self.total_cap,
                coupler_cap: self.coupler_cap,
            })
            .with_z_grid(uniform_grid(self.length, self.z_samples)?);
        p.kappa = self.kappa;
        p.gamma_c = self.gamma_c;
        p.validate()?;
        Ok(p)
    }

    /// SHA-256 of the serialized configuration (threads and output paths excluded).
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("serializable").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
