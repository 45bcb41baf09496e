//! Gaussian sub-channels: transmittance draws, additive noise and the block
//! transmission that feeds estimation and detection.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mathcore::{CircularGaussian, ComplexAmplitude};

/// Fourier-domain transmittance of one sub-channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubChannelGain(pub ComplexAmplitude);

impl SubChannelGain {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    /// Physical gain with equal quadrature transmission and `|T|^2 = t^2`,
    /// `t` in `[0, 1]`.
    pub fn bounded(transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::domain(format!(
                "bounded transmittance must lie in [0, 1], got {transmittance}"
            )));
        }
        let q = transmittance * std::f64::consts::FRAC_1_SQRT_2;
        Ok(Self::new(q, q))
    }

    pub fn value(&self) -> ComplexAmplitude {
        self.0
    }

    /// `0 <= Re = Im <= 1/sqrt 2`.
    pub fn is_physical(&self) -> bool {
        let lim = std::f64::consts::FRAC_1_SQRT_2 + 1e-15;
        self.0.re == self.0.im && (0.0..=lim).contains(&self.0.re)
    }
}

/// How sub-channel transmittances are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainModel {
    /// Independent `CN(0, gain_variance)` draws (Rayleigh fading).
    Fading { gain_variance: f64 },
    /// A fixed list of physical gains, one per sub-channel.
    Bounded { gains: Vec<SubChannelGain> },
}

impl GainModel {
    pub fn fading(gain_variance: f64) -> Result<Self> {
        if !(gain_variance >= 0.0) || !gain_variance.is_finite() {
            return Err(Error::domain(format!(
                "gain variance must be finite and >= 0, got {gain_variance}"
            )));
        }
        Ok(GainModel::Fading { gain_variance })
    }
}

/// `n` sub-channels of which the `good_indices` carry information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    kind: GainModel,
    noise: CircularGaussian,
    n: usize,
    good_indices: Vec<usize>,
}

impl ChannelModel {
    pub fn new(kind: GainModel, noise: CircularGaussian, n: usize, good_indices: Vec<usize>) -> Result<Self> {
        if good_indices.is_empty() {
            return Err(Error::domain("at least one good sub-channel is required"));
        }
        if good_indices.len() > n {
            return Err(Error::domain(format!(
                "{} good sub-channels exceed n = {n}",
                good_indices.len()
            )));
        }
        if let Some(&bad) = good_indices.iter().find(|&&i| i >= n) {
            return Err(Error::domain(format!("good index {bad} out of range for n = {n}")));
        }
        let mut sorted = good_indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != good_indices.len() {
            return Err(Error::domain("good indices must be distinct"));
        }
        match &kind {
            GainModel::Fading { gain_variance } => {
                GainModel::fading(*gain_variance)?;
            }
            GainModel::Bounded { gains } => {
                check_len(n, gains.len())?;
                if let Some(g) = gains.iter().find(|g| !g.is_physical()) {
                    return Err(Error::domain(format!(
                        "bounded gain {} violates Re = Im in [0, 1/sqrt 2]",
                        g.0
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            noise,
            n,
            good_indices,
        })
    }

    /// All `n` sub-channels are good.
    pub fn all_good(kind: GainModel, noise: CircularGaussian, n: usize) -> Result<Self> {
        Self::new(kind, noise, n, (0..n).collect())
    }

    pub fn kind(&self) -> &GainModel {
        &self.kind
    }

    pub fn noise(&self) -> CircularGaussian {
        self.noise
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.good_indices.len()
    }

    pub fn good_indices(&self) -> &[usize] {
        &self.good_indices
    }
}

/// One transmittance per sub-channel, length `n`.
pub fn draw_gains<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> Vec<SubChannelGain> {
    match &model.kind {
        GainModel::Fading { gain_variance } => {
            let dist = CircularGaussian::new(*gain_variance).expect("validated at construction");
            (0..model.n).map(|_| SubChannelGain(dist.sample(rng))).collect()
        }
        GainModel::Bounded { gains } => gains.clone(),
    }
}

/// `gain * input + w`, `w ~ noise`.
pub fn transmit<R: Rng + ?Sized>(
    gain: SubChannelGain,
    input: ComplexAmplitude,
    noise: &CircularGaussian,
    rng: &mut R,
) -> ComplexAmplitude {
    gain.0 * input + noise.sample(rng)
}

/// Elementwise [`transmit`] with independent noise per position.
pub fn transmit_block<R: Rng + ?Sized>(
    gains: &[SubChannelGain],
    input: &[ComplexAmplitude],
    noise: &CircularGaussian,
    rng: &mut R,
) -> Result<Vec<ComplexAmplitude>> {
    check_len(gains.len(), input.len())?;
    Ok(gains
        .iter()
        .zip(input)
        .map(|(g, x)| transmit(*g, *x, noise, rng))
        .collect())
}

/// Arithmetic mean of the selected sub-channel gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedGain(pub ComplexAmplitude);

impl AveragedGain {
    pub fn value(&self) -> ComplexAmplitude {
        self.0
    }
}

pub fn average_gain(gains: &[SubChannelGain], good_indices: &[usize]) -> Result<AveragedGain> {
    if good_indices.is_empty() {
        return Err(Error::domain("cannot average over an empty index set"));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for &i in good_indices {
        let g = gains
            .get(i)
            .ok_or_else(|| Error::domain(format!("index {i} out of range ({})", gains.len())))?;
        sum += g.0;
    }
    Ok(AveragedGain(sum / good_indices.len() as f64))
}
