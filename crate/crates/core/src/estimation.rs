//! Pilot-based sub-channel estimation.
//!
//! A known pilot `p` is sent through a sub-channel, the receiver forms the
//! sufficient statistic `S = conj(p) p' / |p|^2 = F(T) + w'` and shrinks it to
//! the linear MMSE estimate. The same projection extends to `l` sub-channels
//! with a pilot vector, yielding the averaged gain `A_j`.
//!
//! # SNR conventions
//!
//! * complex SNR: `|p_x|^2 / (2 sigma_N^2)`, i.e. pilot energy over the complex
//!   noise variance;
//! * scaled SNR (`snr_hat`): half of the complex SNR.
//!
//! The closed forms in this module take `snr_hat`. In the antipodal pilot
//! detection model the two hypotheses are `±p_x / sqrt 2`, so each carries the
//! energy `0.5 |p_x|^2` that appears in the numerator of `snr_hat`, and the
//! conditional error is `Q(sqrt(2 |h|^2 snr_hat))`.
//!
//! The fixed-gain limit is sometimes written `Q(sqrt(2 SNR)) = Q(sqrt SNR)`;
//! the consistent form is `Q(sqrt(2 snr_hat)) = Q(sqrt SNR)`, which is what
//! this crate uses throughout.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_gains, ChannelModel, SubChannelGain};
use crate::error::{check_len, Error, Result};
use crate::mathcore::{chi2_2l_cdf, gaussian_tail, ln_binomial, ln_factorial, CircularGaussian, ComplexAmplitude};

/// A known, nonzero pilot-subcarrier amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotSymbol {
    value: ComplexAmplitude,
}

impl PilotSymbol {
    pub fn new(value: ComplexAmplitude) -> Result<Self> {
        if !(value.norm_sqr() > 0.0) || !value.is_finite() {
            return Err(Error::domain(format!("pilot must be finite and nonzero, got {value}")));
        }
        Ok(Self { value })
    }

    pub fn value(&self) -> ComplexAmplitude {
        self.value
    }

    pub fn energy(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// Pilot amplitudes sent over `l` sub-channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotVector {
    values: Vec<PilotSymbol>,
}

impl PilotVector {
    pub fn new(values: Vec<PilotSymbol>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("pilot vector must be non-empty"));
        }
        Ok(Self { values })
    }

    pub fn from_amplitudes(values: &[ComplexAmplitude]) -> Result<Self> {
        Self::new(values.iter().map(|&v| PilotSymbol::new(v)).collect::<Result<_>>()?)
    }

    /// `l` copies of the same pilot.
    pub fn uniform(pilot: PilotSymbol, l: usize) -> Result<Self> {
        Self::new(vec![pilot; l])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(PilotSymbol::energy).sum()
    }

    pub fn amplitudes(&self) -> Vec<ComplexAmplitude> {
        self.values.iter().map(PilotSymbol::value).collect()
    }
}

/// Sufficient statistic: the pilot-normalized observation plus the complex
/// variance of the noise left on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub value: ComplexAmplitude,
    pub residual_noise_variance: f64,
}

/// Linear MMSE estimate of a gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: ComplexAmplitude,
    pub mmse: f64,
    pub prior_variance: f64,
}

fn check_variance(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// `S = conj(p) p' / |p|^2`.
pub fn scalar_statistic(pilot: &PilotSymbol, observed: ComplexAmplitude, noise_var: f64) -> Statistic {
    let e = pilot.energy();
    Statistic {
        value: pilot.value.conj() * observed / e,
        residual_noise_variance: noise_var / e,
    }
}

/// `S = q^H q' / |q|^2`, the projection of the noisy pilot vector onto the
/// pilot direction.
pub fn vector_statistic(pilots: &PilotVector, observed: &[ComplexAmplitude], noise_var: f64) -> Result<Statistic> {
    check_len(pilots.len(), observed.len())?;
    let e = pilots.energy();
    let proj: Complex64 = pilots
        .values
        .iter()
        .zip(observed)
        .map(|(p, o)| p.value.conj() * o)
        .sum();
    Ok(Statistic {
        value: proj / e,
        residual_noise_variance: noise_var / e,
    })
}

/// Wiener shrinkage of a normalized statistic.
///
/// `noise_var` is the complex channel noise variance `2 sigma_N^2`, and
/// `pilot_energy` the energy the statistic was normalized by.
pub fn mmse_estimate(stat: &Statistic, prior_variance: f64, pilot_energy: f64, noise_var: f64) -> Result<Estimate> {
    check_variance("prior variance", prior_variance)?;
    check_variance("noise variance", noise_var)?;
    if !(pilot_energy > 0.0) {
        return Err(Error::domain("pilot energy must be positive"));
    }
    let signal = prior_variance * pilot_energy;
    let denom = signal + noise_var;
    if denom == 0.0 {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            mmse: 0.0,
            prior_variance,
        });
    }
    Ok(Estimate {
        value: stat.value * (signal / denom),
        mmse: prior_variance * noise_var / denom,
        prior_variance,
    })
}

/// The MMSE combining vector `C = E|A|^2 / (E|A|^2 |q|^2 + 2 sigma_N^2) q`.
pub fn mmse_combiner(pilots: &PilotVector, prior_variance: f64, noise_var: f64) -> Vec<ComplexAmplitude> {
    let scale = prior_variance / (prior_variance * pilots.energy() + noise_var);
    pilots.values.iter().map(|p| p.value * scale).collect()
}

/// Selects the position (`Re`) or momentum (`Im`) quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Position,
    Momentum,
}

impl Quadrature {
    pub fn of(self, c: ComplexAmplitude) -> f64 {
        match self {
            Quadrature::Position => c.re,
            Quadrature::Momentum => c.im,
        }
    }
}

/// Per-quadrature estimation noise ratio
/// `((chi(C)^T chi(q))^2 E[chi(A)^2]) / (|chi(C)|^2 sigma_N^2)`.
///
/// Bounded above by `|chi(q)|^2 E[chi(A)^2] / sigma_N^2` (Cauchy-Schwarz),
/// with equality when `chi(C)` is parallel to `chi(q)`.
pub fn quadrature_noise_ratio(
    c_vector: &[ComplexAmplitude],
    pilots: &PilotVector,
    prior_quadrature_variance: f64,
    noise_quadrature_variance: f64,
    which: Quadrature,
) -> Result<f64> {
    check_len(pilots.len(), c_vector.len())?;
    check_variance("prior quadrature variance", prior_quadrature_variance)?;
    if !(noise_quadrature_variance > 0.0) {
        return Err(Error::domain("noise quadrature variance must be positive"));
    }
    let c_norm_sq: f64 = c_vector.iter().map(|&c| which.of(c).powi(2)).sum();
    if c_norm_sq == 0.0 {
        return Err(Error::domain("selected quadrature of the combiner is zero"));
    }
    let dot: f64 = c_vector
        .iter()
        .zip(&pilots.values)
        .map(|(&c, p)| which.of(c) * which.of(p.value))
        .sum();
    Ok(dot * dot * prior_quadrature_variance / (c_norm_sq * noise_quadrature_variance))
}

fn check_order_snr(l: u32, snr_hat: f64) -> Result<()> {
    if l < 1 {
        return Err(Error::domain("number of sub-channels l must be at least 1"));
    }
    if !(snr_hat > 0.0) {
        return Err(Error::domain(format!("snr_hat must be positive, got {snr_hat}")));
    }
    Ok(())
}

/// Error probability of antipodal pilot detection combined over `l`
/// Rayleigh sub-channels with unit gain variance:
///
/// `((1-mu)/2)^l sum_{i<l} C(l-1+i, i) ((1+mu)/2)^i`, `mu = sqrt(s/(1+s))`.
pub fn pilot_error_probability(l: u32, snr_hat: f64) -> Result<f64> {
    check_order_snr(l, snr_hat)?;
    if snr_hat.is_infinite() {
        return Ok(0.0);
    }
    let mu = (snr_hat / (1.0 + snr_hat)).sqrt();
    // 1 - mu without cancellation
    let one_minus_mu = 1.0 / ((1.0 + snr_hat) * (1.0 + mu));
    let ln_lo = (0.5 * one_minus_mu).ln();
    let ln_hi = (0.5 * (1.0 + mu)).ln();
    let l64 = u64::from(l);
    let sum: f64 = (0..l64)
        .map(|i| (ln_binomial(l64 - 1 + i, i) + i as f64 * ln_hi).exp())
        .sum();
    Ok((f64::from(l) * ln_lo).exp() * sum)
}

/// High-SNR form `(1/(4 s))^l C(2l-1, l)`, valid for `snr_hat > 1`.
pub fn pilot_error_high_snr(l: u32, snr_hat: f64) -> Result<f64> {
    check_order_snr(l, snr_hat)?;
    if snr_hat <= 1.0 {
        return Err(Error::domain(format!(
            "high-SNR approximation needs snr_hat > 1, got {snr_hat}"
        )));
    }
    let l64 = u64::from(l);
    Ok((ln_binomial(2 * l64 - 1, l64) - f64::from(l) * (4.0 * snr_hat).ln()).exp())
}

/// Small-argument deep-fade probability `1 / (l! snr_hat^l)`, clamped to 1.
pub fn deep_fade_probability(l: u32, snr_hat: f64) -> Result<f64> {
    check_order_snr(l, snr_hat)?;
    let ln = -ln_factorial(u64::from(l)) - f64::from(l) * snr_hat.ln();
    Ok(ln.exp().clamp(0.0, 1.0))
}

/// Deep-fade probability reported with its exact counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeepFade {
    /// `1 / (l! snr_hat^l)`
    pub approx: f64,
    /// `P(|zeta|^2 < 1/snr_hat)` from the chi-square CDF.
    pub exact: f64,
}

impl DeepFade {
    pub fn relative_gap(&self) -> f64 {
        (self.approx - self.exact).abs() / self.exact
    }
}

pub fn deep_fade(l: u32, snr_hat: f64) -> Result<DeepFade> {
    Ok(DeepFade {
        approx: deep_fade_probability(l, snr_hat)?,
        exact: chi2_2l_cdf(1.0 / snr_hat, l)?,
    })
}

/// Conditional error `Q(sqrt(2 |zeta|^2 snr_hat))` at a fixed combined gain.
pub fn conditional_error(combined_gain_sq: f64, snr_hat: f64) -> Result<f64> {
    if !(combined_gain_sq >= 0.0) {
        return Err(Error::domain("combined gain must be non-negative"));
    }
    if !(snr_hat > 0.0) {
        return Err(Error::domain("snr_hat must be positive"));
    }
    let arg = (2.0 * combined_gain_sq * snr_hat).sqrt();
    if arg.is_infinite() {
        return Ok(0.0);
    }
    Ok(gaussian_tail(arg))
}

/// Complex SNR `|p|^2 / (2 sigma_N^2)`.
pub fn complex_snr(pilot_energy: f64, noise: &CircularGaussian) -> f64 {
    pilot_energy / noise.complex_variance()
}

/// `snr_hat = SNR / 2`.
pub fn snr_hat_from_complex(snr: f64) -> f64 {
    0.5 * snr
}

pub fn complex_from_snr_hat(snr_hat: f64) -> f64 {
    2.0 * snr_hat
}

/// Channel noise that realizes the requested `snr_hat` for a pilot.
pub fn noise_for_snr_hat(pilot: &PilotSymbol, snr_hat: f64) -> Result<CircularGaussian> {
    if !(snr_hat > 0.0) {
        return Err(Error::domain("snr_hat must be positive"));
    }
    CircularGaussian::new(0.5 * pilot.energy() / snr_hat)
}

/// Observation of the antipodal pilot `±p/sqrt 2` on each good sub-channel.
pub fn antipodal_pilot_observation<R: Rng + ?Sized>(
    gains: &[SubChannelGain],
    pilot: &PilotSymbol,
    positive: bool,
    noise: &CircularGaussian,
    rng: &mut R,
) -> Vec<ComplexAmplitude> {
    let sign = if positive { 1.0 } else { -1.0 };
    let symbol = pilot.value * (sign * std::f64::consts::FRAC_1_SQRT_2);
    gains.iter().map(|g| g.0 * symbol + noise.sample(rng)).collect()
}

/// Matched combination `eta^H p'` with `eta = zeta / |zeta|`.
pub fn combined_pilot_statistic(gains: &[SubChannelGain], observed: &[ComplexAmplitude]) -> Result<ComplexAmplitude> {
    check_len(gains.len(), observed.len())?;
    let norm = gains.iter().map(|g| g.0.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(gains
        .iter()
        .zip(observed)
        .map(|(g, o)| g.0.conj() * o)
        .sum::<Complex64>()
        / norm)
}

/// Sign decision on the combined statistic; `true` means `+p`.
pub fn decide_antipodal_pilot(statistic: ComplexAmplitude, pilot: &PilotSymbol) -> bool {
    (statistic * pilot.value.conj()).re >= 0.0
}

/// One Monte Carlo trial of antipodal pilot detection over the good
/// sub-channels of `model`, with the receiver knowing the gains. Returns
/// `true` on a detection error.
pub fn pilot_detection_trial<R: Rng + ?Sized>(model: &ChannelModel, pilot: &PilotSymbol, rng: &mut R) -> bool {
    let all = draw_gains(model, rng);
    let gains: Vec<_> = model.good_indices().iter().map(|&i| all[i]).collect();
    let sent = rng.random::<bool>();
    let noise = model.noise();
    let obs = antipodal_pilot_observation(&gains, pilot, sent, &noise, rng);
    let stat = combined_pilot_statistic(&gains, &obs).expect("lengths agree");
    decide_antipodal_pilot(stat, pilot) != sent
}

/// One draw of (true gain, statistic, estimate) for a single sub-channel with
/// a `CN(0, prior_variance)` gain.
#[derive(Debug, Clone, Copy)]
pub struct EstimationSample {
    pub truth: ComplexAmplitude,
    pub statistic: Statistic,
    pub estimate: Estimate,
}

pub fn estimation_trial<R: Rng + ?Sized>(
    prior_variance: f64,
    pilot: &PilotSymbol,
    noise: &CircularGaussian,
    rng: &mut R,
) -> Result<EstimationSample> {
    let truth = CircularGaussian::new(prior_variance)?.sample(rng);
    let observed = truth * pilot.value + noise.sample(rng);
    let statistic = scalar_statistic(pilot, observed, noise.complex_variance());
    let estimate = mmse_estimate(&statistic, prior_variance, pilot.energy(), noise.complex_variance())?;
    Ok(EstimationSample {
        truth,
        statistic,
        estimate,
    })
}
