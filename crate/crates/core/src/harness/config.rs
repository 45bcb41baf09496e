//! Experiment configuration and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{GainModel, SubChannelGain};
use crate::detection::Measurement;
use crate::error::{Error, Result};
use crate::estimation::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PilotEstimation,
    Spreading,
    SingleDetection,
    CollectiveDetection,
    Multiuser,
    Fig3,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::PilotEstimation => "pilot-estimation",
            Experiment::Spreading => "spreading",
            Experiment::SingleDetection => "single-detection",
            Experiment::CollectiveDetection => "collective-detection",
            Experiment::Multiuser => "multiuser",
            Experiment::Fig3 => "fig3",
        }
    }

    /// Which SNR the grid holds: `snr_hat` for pilot detection, the complex
    /// SNR everywhere else.
    pub fn snr_convention(self) -> SnrConvention {
        match self {
            Experiment::PilotEstimation => SnrConvention::SnrHat,
            _ => SnrConvention::Snr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    SnrHat,
    Snr,
}

impl SnrConvention {
    pub fn label(self) -> &'static str {
        match self {
            SnrConvention::SnrHat => "snr_hat",
            SnrConvention::Snr => "snr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config(
                "output_format",
                format!("expected csv or json, got `{other}`"),
            )),
        }
    }
}

/// Sub-channel gain model, `rayleigh:VAR` or `bounded:t0,t1,..`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Rayleigh {
        variance: f64,
    },
    /// Physical transmittances in `[0, 1]`; a single value is broadcast.
    Bounded {
        transmittances: Vec<f64>,
    },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Rayleigh { variance: 1.0 }
    }
}

impl ModelSpec {
    fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Rayleigh { variance } => {
                if !(*variance > 0.0) || !variance.is_finite() {
                    return Err(Error::config(
                        "model.variance",
                        format!("must be positive, got {variance}"),
                    ));
                }
            }
            ModelSpec::Bounded { transmittances } => {
                if transmittances.is_empty() {
                    return Err(Error::config("model.transmittances", "must be non-empty"));
                }
                for (i, t) in transmittances.iter().enumerate() {
                    if !(0.0..=1.0).contains(t) {
                        return Err(Error::config(
                            format!("model.transmittances[{i}]"),
                            format!("must lie in [0, 1], got {t}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `len` transmittances, broadcasting a single value.
    pub fn transmittances(&self, len: usize) -> Result<Vec<f64>> {
        match self {
            ModelSpec::Rayleigh { .. } => Err(Error::config("model", "not a bounded model")),
            ModelSpec::Bounded { transmittances } if transmittances.len() == 1 => Ok(vec![transmittances[0]; len]),
            ModelSpec::Bounded { transmittances } if transmittances.len() >= len => Ok(transmittances[..len].to_vec()),
            ModelSpec::Bounded { transmittances } => Err(Error::config(
                "model.transmittances",
                format!("{} values given, {len} needed", transmittances.len()),
            )),
        }
    }

    pub fn gain_model(&self, n: usize) -> Result<GainModel> {
        match self {
            ModelSpec::Rayleigh { variance } => GainModel::fading(*variance),
            ModelSpec::Bounded { .. } => Ok(GainModel::Bounded {
                gains: self
                    .transmittances(n)?
                    .into_iter()
                    .map(SubChannelGain::bounded)
                    .collect::<Result<_>>()?,
            }),
        }
    }
}

fn parse_f64(path: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(path, format!("`{s}` is not a number")))
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let spec = match kind {
            "rayleigh" => ModelSpec::Rayleigh {
                variance: if rest.is_empty() {
                    1.0
                } else {
                    parse_f64("model.variance", rest)?
                },
            },
            "bounded" => ModelSpec::Bounded {
                transmittances: rest
                    .split(',')
                    .enumerate()
                    .map(|(i, t)| parse_f64(&format!("model.transmittances[{i}]"), t))
                    .collect::<Result<_>>()?,
            },
            other => {
                return Err(Error::config(
                    "model",
                    format!("expected rayleigh:VAR or bounded:LIST, got `{other}`"),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Rayleigh { variance } => write!(f, "rayleigh:{variance}"),
            ModelSpec::Bounded { transmittances } => {
                let list: Vec<_> = transmittances.iter().map(f64::to_string).collect();
                write!(f, "bounded:{}", list.join(","))
            }
        }
    }
}

/// `hom-x`, `hom-p`, `het` or `het:c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec(pub Measurement);

impl Default for MeasurementSpec {
    fn default() -> Self {
        MeasurementSpec(Measurement::heterodyne())
    }
}

impl FromStr for MeasurementSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "hom-x" => Measurement::homodyne(Quadrature::Position),
            "hom-p" => Measurement::homodyne(Quadrature::Momentum),
            "het" => Measurement::heterodyne(),
            _ => match s.strip_prefix("het:") {
                Some(c) => {
                    let c = parse_f64("measurement.c", c)?;
                    if !(c > 0.0) {
                        return Err(Error::config("measurement.c", format!("must be positive, got {c}")));
                    }
                    Measurement::Heterodyne { c }
                }
                None => {
                    return Err(Error::config(
                        "measurement",
                        format!("expected hom-x, hom-p or het[:c], got `{s}`"),
                    ))
                }
            },
        };
        Ok(MeasurementSpec(m))
    }
}

/// Everything needed to reproduce one report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub model: ModelSpec,
    /// Total sub-channels for spreading; defaults to `l`.
    #[serde(default)]
    pub n: Option<usize>,
    pub snr_grid: Vec<f64>,
    #[serde(default = "one")]
    pub l_grid: Vec<usize>,
    #[serde(default = "one")]
    pub k_grid: Vec<usize>,
    #[serde(default = "two")]
    pub d_grid: Vec<usize>,
    #[serde(default = "two_usize")]
    pub n_codewords: usize,
    /// Seed for the random codebook; derived from `seed` when absent.
    #[serde(default)]
    pub codeword_seed: Option<u64>,
    #[serde(default = "default_rk")]
    pub rk: Vec<usize>,
    #[serde(default)]
    pub measurement: MeasurementSpec,
    pub trials: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: OutputFormat,
}

fn one() -> Vec<usize> {
    vec![1]
}

fn two() -> Vec<usize> {
    vec![2]
}

fn two_usize() -> usize {
    2
}

fn default_rk() -> Vec<usize> {
    vec![1, 2]
}

impl SimulationConfig {
    /// Defaults for everything except the experiment, grid, trials and seed.
    pub fn new(experiment: Experiment, snr_grid: Vec<f64>, trials: u64, seed: u64) -> Self {
        Self {
            experiment,
            model: ModelSpec::default(),
            n: None,
            snr_grid,
            l_grid: one(),
            k_grid: one(),
            d_grid: two(),
            n_codewords: 2,
            codeword_seed: None,
            rk: default_rk(),
            measurement: MeasurementSpec::default(),
            trials,
            seed: Some(seed),
            threads: None,
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("<json>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The mandatory master seed.
    pub fn master_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::config("seed", "a master seed is required"))
    }

    pub fn validate(&self) -> Result<()> {
        self.master_seed()?;
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.snr_grid.is_empty() {
            return Err(Error::config("snr_grid", "must be non-empty"));
        }
        for (i, s) in self.snr_grid.iter().enumerate() {
            if !(*s > 0.0) || !s.is_finite() {
                return Err(Error::config(
                    format!("snr_grid[{i}]"),
                    format!("must be positive, got {s}"),
                ));
            }
        }
        for (name, grid) in [
            ("l_grid", &self.l_grid),
            ("k_grid", &self.k_grid),
            ("d_grid", &self.d_grid),
        ] {
            if grid.is_empty() {
                return Err(Error::config(name, "must be non-empty"));
            }
            if let Some(i) = grid.iter().position(|&v| v == 0) {
                return Err(Error::config(format!("{name}[{i}]"), "must be at least 1"));
            }
        }
        if let Some(i) = self.l_grid.iter().position(|&l| l > 64) {
            return Err(Error::config(
                format!("l_grid[{i}]"),
                "at most 64 sub-channels are supported",
            ));
        }
        if let Some(n) = self.n {
            let max_l = *self.l_grid.iter().max().expect("non-empty");
            if n < max_l {
                return Err(Error::config(
                    "n",
                    format!("n = {n} is smaller than the largest l = {max_l}"),
                ));
            }
        }
        if self.n_codewords < 2 {
            return Err(Error::config("n_codewords", "a codebook needs at least two codewords"));
        }
        if self.rk.is_empty() {
            return Err(Error::config("rk", "must be non-empty"));
        }
        if let Some(i) = self.rk.iter().position(|&r| r == 0) {
            return Err(Error::config(format!("rk[{i}]"), "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        if let Measurement::Heterodyne { c } = self.measurement.0 {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::config("measurement.c", format!("must be positive, got {c}")));
            }
        }
        self.model.validate()
    }
}
