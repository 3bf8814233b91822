use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bergman_core::geometry::{registry, DEFAULT_CHART_RADIUS};
use bergman_core::spectral::KernelKind;
use bergman_core::{HamiltonianSpec, LabError, Mode, ModelKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Bulk,
    Interface,
    Measures,
    Propagator,
    Localization,
    Decay,
    Oracle,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Bulk => "bulk",
            Experiment::Interface => "interface",
            Experiment::Measures => "measures",
            Experiment::Propagator => "propagator",
            Experiment::Localization => "localization",
            Experiment::Decay => "decay",
            Experiment::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    model: Option<ModelKind>,
    energy: Option<f64>,
    ks: Option<Vec<usize>>,
    betas: Option<Vec<f64>>,
    alphas: Option<Vec<f64>>,
    taus: Option<Vec<f64>>,
    point: Option<[f64; 2]>,
    points: Option<usize>,
    pairs: Option<usize>,
    tau: Option<f64>,
    truncation: Option<usize>,
    mode: Option<Mode>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    hamiltonian: Option<RawHamiltonian>,
    quadrature: Option<Quadrature>,
    smoothing: Option<RawSmoothing>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    label: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSmoothing {
    kind: Option<KernelKind>,
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    pub n_radial: usize,
    pub n_angular: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianConfig {
    pub label: String,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Smoothing {
    pub kind: KernelKind,
    pub epsilon: f64,
}

/// A validated experiment description with all defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelKind,
    pub hamiltonian: HamiltonianConfig,
    pub energy: f64,
    pub ks: Vec<usize>,
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
    /// Base point; sampled from `seed` when absent.
    pub point: Option<[f64; 2]>,
    /// Sample points for `bulk`.
    pub points: usize,
    /// Sample pairs for `decay`.
    pub pairs: usize,
    /// Shift for the energy-scaled measure.
    pub tau: Option<f64>,
    pub truncation: Option<usize>,
    pub mode: Mode,
    pub quadrature: Option<Quadrature>,
    pub smoothing: Smoothing,
    pub output_dir: PathBuf,
    pub seed: u64,
}

fn config_error(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn grid(values: Option<Vec<f64>>, default: impl FnOnce() -> Vec<f64>, field: &str) -> Result<Vec<f64>, CliError> {
    let values = values.unwrap_or_else(default);
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(config_error(field, format!("grid value {x} is not finite")));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(config_error(field, "grid must be sorted ascending"));
    }
    Ok(values)
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Field named by a serde message such as ``unknown field `foo` ``.
fn field_of(message: &str) -> Option<&str> {
    ["unknown field `", "missing field `"].iter().find_map(|marker| {
        let rest = &message[message.find(marker)? + marker.len()..];
        Some(&rest[..rest.find('`')?])
    })
}

impl ExperimentConfig {
    /// Reads and validates a config file. A relative `output_dir` is taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("config-path", format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = match (field_of(&message), e.span()) {
                (Some(f), _) => f.to_string(),
                (None, Some(span)) => line_key(text, span.start),
                (None, None) => "config".to_string(),
            };
            config_error(&field, message)
        })?;
        Self::from_raw(raw, base_dir)
    }

    fn from_raw(raw: RawConfig, base_dir: &Path) -> Result<Self, CliError> {
        let hamiltonian = match raw.hamiltonian {
            Some(h) => HamiltonianConfig {
                label: h.label,
                params: h.params,
            },
            None => HamiltonianConfig {
                label: match raw.model {
                    Some(ModelKind::FubiniStudyCp1) => "fs-mixed",
                    _ => "bf-radial",
                }
                .to_string(),
                params: BTreeMap::new(),
            },
        };
        let spec = HamiltonianSpec::registered(&hamiltonian.label, &hamiltonian.params).map_err(|e| match e {
            LabError::UnknownHamiltonian(_) => config_error("hamiltonian.label", e.to_string()),
            _ => config_error("hamiltonian.params", e.to_string()),
        })?;
        if let Some(p) = hamiltonian.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(config_error("hamiltonian.params", format!("`{}` is not finite", p.0)));
        }
        let model = raw.model.unwrap_or(spec.model);
        if model != spec.model {
            return Err(config_error(
                "model",
                format!("hamiltonian `{}` lives on {}, not {}", spec.label, spec.model.name(), model.name()),
            ));
        }

        let ks = raw.ks.unwrap_or_else(|| vec![64, 128, 256]);
        if ks.is_empty() {
            return Err(config_error("ks", "at least one k is required"));
        }
        if ks[0] == 0 {
            return Err(config_error("ks", "k must be positive"));
        }
        if ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_error("ks", "ks must be strictly increasing"));
        }
        let k_max = *ks.last().unwrap();

        let energy = raw.energy.unwrap_or(match model {
            ModelKind::BargmannFock => 1.0,
            ModelKind::FubiniStudyCp1 => 0.5,
        });
        if !energy.is_finite() {
            return Err(config_error("energy", "must be finite"));
        }

        let betas = grid(raw.betas, || uniform(-2.0, 2.0, 9), "betas")?;
        let alphas = grid(raw.alphas, || uniform(-2.0, 2.0, 9), "alphas")?;
        let taus = grid(raw.taus, || uniform(-2.0, 2.0, 17), "taus")?;

        if let Some([re, im]) = raw.point {
            if !re.is_finite() || !im.is_finite() {
                return Err(config_error("point", "coordinates must be finite"));
            }
            if re.hypot(im) > DEFAULT_CHART_RADIUS {
                return Err(config_error("point", "outside the chart"));
            }
        }
        let points = raw.points.unwrap_or(16);
        if points == 0 {
            return Err(config_error("points", "must be positive"));
        }
        let pairs = raw.pairs.unwrap_or(8);
        if pairs == 0 {
            return Err(config_error("pairs", "must be positive"));
        }
        if let Some(tau) = raw.tau {
            if !tau.is_finite() {
                return Err(config_error("tau", "must be finite"));
            }
        }
        if let Some(t) = raw.truncation {
            if model == ModelKind::FubiniStudyCp1 {
                return Err(config_error("truncation", "the sphere basis is finite; remove the field"));
            }
            if t < 4 * k_max {
                return Err(config_error("truncation", format!("must be at least 4 * max(ks) = {}", 4 * k_max)));
            }
        }
        if let Some(q) = raw.quadrature {
            if q.n_radial < 32 {
                return Err(config_error("quadrature.n_radial", "must be at least 32"));
            }
            if q.n_angular < 2 * k_max + 2 {
                return Err(config_error(
                    "quadrature.n_angular",
                    format!("must be at least 2 * max(ks) + 2 = {}", 2 * k_max + 2),
                ));
            }
        }
        let smoothing = Smoothing {
            kind: raw.smoothing.as_ref().and_then(|s| s.kind).unwrap_or(KernelKind::Fejer),
            epsilon: raw.smoothing.as_ref().and_then(|s| s.epsilon).unwrap_or(1.0),
        };
        if !(smoothing.epsilon > 0.0 && smoothing.epsilon.is_finite()) {
            return Err(config_error("smoothing.epsilon", "must be positive and finite"));
        }

        if raw.experiment == Experiment::Oracle {
            if spec.label != "bf-radial" {
                return Err(config_error("hamiltonian.label", "the oracle experiment needs bf-radial"));
            }
            if energy <= 0.0 {
                return Err(config_error("energy", "the oracle experiment needs a positive level"));
            }
        }

        let output_dir = raw.output_dir.unwrap_or_else(|| PathBuf::from("out"));
        let output_dir = if output_dir.is_absolute() {
            output_dir
        } else {
            base_dir.join(output_dir)
        };

        Ok(ExperimentConfig {
            experiment: raw.experiment,
            model,
            hamiltonian,
            energy,
            ks,
            betas,
            alphas,
            taus,
            point: raw.point,
            points,
            pairs,
            tau: raw.tau,
            truncation: raw.truncation,
            mode: raw.mode.unwrap_or(Mode::Kostant),
            quadrature: raw.quadrature,
            smoothing,
            output_dir,
            seed: raw.seed.unwrap_or(0),
        })
    }

    pub fn hamiltonian_spec(&self) -> HamiltonianSpec {
        HamiltonianSpec::registered(&self.hamiltonian.label, &self.hamiltonian.params)
            .expect("validated at load time")
    }
}

// key on the line holding `offset`, for type errors that carry only a span
fn line_key(text: &str, offset: usize) -> String {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next().unwrap_or("");
    match line.split_once('=') {
        Some((key, _)) if !key.trim().is_empty() => key.trim().to_string(),
        _ => "config".to_string(),
    }
}

pub fn hamiltonian_listing() -> String {
    let mut out = String::new();
    for entry in registry() {
        out.push_str(&format!("{:<10} {:<14} {}\n", entry.label, entry.model.name(), entry.summary));
        for (name, default) in entry.params {
            out.push_str(&format!("{:<10}   {name} = {default}\n", ""));
        }
    }
    out
}
