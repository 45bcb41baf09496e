//! Adaptive quadrature detection.
//!
//! The detector sees `z'_j = A_j z_j + noise_j`, where `A_j` is the averaged
//! gain of the `l` sub-channels carrying component `j`. For a pair of
//! codewords `z_A`, `z_B` with difference `M = z_A - z_B`, the received
//! difference direction is `A ∘ M` and the separation is its Euclidean norm
//! `|A ∘ M| = sqrt(sum |A_j|^2 |M_j|^2)`. Projecting onto that direction is
//! a sufficient statistic for the pair.
//!
//! Noise variances are complex variances `2 sigma_N^2` unless stated otherwise.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{AveragedGain, SubChannelGain};
use crate::error::{check_len, Error, Result};
use crate::estimation::{pilot_error_probability, Quadrature};
use crate::mathcore::{gaussian_tail, CircularGaussian, ComplexAmplitude};

/// Averaged gains `A_0 .. A_{d-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainVector {
    entries: Vec<AveragedGain>,
    magnitude_sum: f64,
}

impl GainVector {
    pub fn new(entries: Vec<AveragedGain>) -> Self {
        let magnitude_sum = entries.iter().map(|a| a.0.norm()).sum();
        Self { entries, magnitude_sum }
    }

    pub fn from_amplitudes(values: &[ComplexAmplitude]) -> Self {
        Self::new(values.iter().map(|&v| AveragedGain(v)).collect())
    }

    /// `d` unit gains.
    pub fn ones(d: usize) -> Self {
        Self::from_amplitudes(&vec![Complex64::new(1.0, 0.0); d])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[AveragedGain] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> ComplexAmplitude {
        self.entries[j].0
    }

    /// `sum_j |A_j|`.
    pub fn magnitude_sum(&self) -> f64 {
        self.magnitude_sum
    }

    /// `A ∘ z`.
    pub fn apply(&self, z: &Codeword) -> Result<Vec<ComplexAmplitude>> {
        check_len(self.len(), z.len())?;
        Ok(self.entries.iter().zip(&z.entries).map(|(a, x)| a.0 * x).collect())
    }

    /// Multiplies every gain by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.entries.iter().map(|a| AveragedGain(a.0 * factor)).collect())
    }
}

/// A diagonal codeword, stored as its diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codeword {
    pub entries: Vec<ComplexAmplitude>,
}

impl Codeword {
    pub fn new(entries: Vec<ComplexAmplitude>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `d` independent `CN(0, variance)` components.
    pub fn random<R: Rng + ?Sized>(d: usize, variance: &CircularGaussian, rng: &mut R) -> Self {
        Self::new((0..d).map(|_| variance.sample(rng)).collect())
    }
}

/// `N >= 2` distinct codewords of equal dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    codewords: Vec<Codeword>,
}

impl Codebook {
    pub fn new(codewords: Vec<Codeword>) -> Result<Self> {
        if codewords.len() < 2 {
            return Err(Error::domain("a codebook needs at least two codewords"));
        }
        let d = codewords[0].len();
        if d == 0 {
            return Err(Error::domain("codewords must have dimension >= 1"));
        }
        for w in &codewords[1..] {
            check_len(d, w.len())?;
        }
        for (i, a) in codewords.iter().enumerate() {
            if codewords[..i].contains(a) {
                return Err(Error::domain(format!("codeword {i} repeats an earlier codeword")));
            }
        }
        Ok(Self { codewords })
    }

    /// `n` random codewords with `CN(0, variance)` components.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, variance: &CircularGaussian, rng: &mut R) -> Result<Self> {
        Self::new((0..n).map(|_| Codeword::random(d, variance, rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.codewords[0].len()
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn get(&self, i: usize) -> &Codeword {
        &self.codewords[i]
    }
}

/// Diagonal of `M = z_a - z_b` and its squared singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceMatrix {
    pub pair: (usize, usize),
    pub diff_entries: Vec<ComplexAmplitude>,
    pub singular_values_sq: Vec<f64>,
}

impl DifferenceMatrix {
    pub fn dim(&self) -> usize {
        self.diff_entries.len()
    }
}

/// Difference of two codewords; the pair is labelled `(0, 1)`.
pub fn difference_matrix(z_a: &Codeword, z_b: &Codeword) -> Result<DifferenceMatrix> {
    difference_with_labels(z_a, z_b, (0, 1))
}

/// Difference of codewords `a` and `b` of a codebook.
pub fn codebook_difference(codebook: &Codebook, a: usize, b: usize) -> Result<DifferenceMatrix> {
    let n = codebook.len();
    if a >= n || b >= n {
        return Err(Error::domain(format!("pair ({a}, {b}) out of range for N = {n}")));
    }
    difference_with_labels(codebook.get(a), codebook.get(b), (a, b))
}

fn difference_with_labels(z_a: &Codeword, z_b: &Codeword, pair: (usize, usize)) -> Result<DifferenceMatrix> {
    check_len(z_a.len(), z_b.len())?;
    let diff_entries: Vec<_> = z_a.entries.iter().zip(&z_b.entries).map(|(a, b)| a - b).collect();
    let singular_values_sq = diff_entries.iter().map(|m| m.norm_sqr()).collect();
    Ok(DifferenceMatrix {
        pair,
        diff_entries,
        singular_values_sq,
    })
}

/// Received separation `|A ∘ M|`.
pub fn separation(gains: &GainVector, diff: &DifferenceMatrix) -> Result<f64> {
    check_len(gains.len(), diff.dim())?;
    Ok(gains
        .entries
        .iter()
        .zip(&diff.singular_values_sq)
        .map(|(a, l2)| a.0.norm_sqr() * l2)
        .sum::<f64>()
        .sqrt())
}

/// Result of the pairwise projection detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub decided_index: usize,
    pub gamma: ComplexAmplitude,
    pub s: f64,
    /// Midpoint of the two projected hypotheses.
    pub threshold: ComplexAmplitude,
}

/// Projects `z' - (A∘z_A + A∘z_B)/2` onto the unit direction of `A∘(z_A - z_B)`
/// and decides on the sign of the real part. The outcome labels the pair as
/// `(0, 1)`; a zero real part decides for the first codeword.
pub fn collective_statistic(
    observed: &[ComplexAmplitude],
    gains: &GainVector,
    pair: (&Codeword, &Codeword),
) -> Result<DecisionOutcome> {
    let (z_a, z_b) = pair;
    check_len(gains.len(), observed.len())?;
    let mu_a = gains.apply(z_a)?;
    let mu_b = gains.apply(z_b)?;
    let dir: Vec<_> = mu_a.iter().zip(&mu_b).map(|(a, b)| a - b).collect();
    let norm = dir.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::AmbiguousPair);
    }
    let mut gamma = Complex64::new(0.0, 0.0);
    let mut proj_a = Complex64::new(0.0, 0.0);
    let mut proj_b = Complex64::new(0.0, 0.0);
    for j in 0..observed.len() {
        let nu = dir[j] / norm;
        gamma += nu.conj() * (observed[j] - 0.5 * (mu_a[j] + mu_b[j]));
        proj_a += nu.conj() * mu_a[j];
        proj_b += nu.conj() * mu_b[j];
    }
    let first = gamma.re >= 0.0;
    Ok(DecisionOutcome {
        decided_index: if first { 0 } else { 1 },
        gamma,
        s: if first { 0.5 } else { -0.5 },
        threshold: 0.5 * (proj_a + proj_b),
    })
}

/// Nearest codeword image `A∘z_k` to `z'`; ties go to the lowest index.
pub fn ml_decide(observed: &[ComplexAmplitude], gains: &GainVector, codebook: &Codebook) -> Result<usize> {
    check_len(gains.len(), observed.len())?;
    check_len(codebook.dim(), observed.len())?;
    let mut best = (0, f64::INFINITY);
    for (k, w) in codebook.codewords.iter().enumerate() {
        let dist: f64 = observed
            .iter()
            .zip(&w.entries)
            .zip(&gains.entries)
            .map(|((o, z), a)| (o - a.0 * z).norm_sqr())
            .sum();
        if dist < best.1 {
            best = (k, dist);
        }
    }
    Ok(best.0)
}

/// Where the pairwise error is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSpace {
    /// `Q(delta / (2 sqrt 2 sigma_N))`.
    Complex,
    /// `Q(delta / (2 sigma_N))`, per-quadrature noise `sigma_N^2`.
    RealSubspace,
}

fn check_noise(noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::domain(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    Ok((0.5 * noise_var).sqrt())
}

fn q(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        gaussian_tail(x)
    }
}

/// Pairwise error at separation `delta`.
pub fn error_at_separation(delta: f64, noise_var: f64, space: ErrorSpace) -> Result<f64> {
    let sigma = check_noise(noise_var)?;
    Ok(match space {
        ErrorSpace::Complex => q(delta / (2.0 * std::f64::consts::SQRT_2 * sigma)),
        ErrorSpace::RealSubspace => q(delta / (2.0 * sigma)),
    })
}

/// Error between `z_A` and `z_B` under fixed gains.
pub fn pairwise_error(
    gains: &GainVector,
    z_a: &Codeword,
    z_b: &Codeword,
    noise_var: f64,
    space: ErrorSpace,
) -> Result<f64> {
    let diff = difference_matrix(z_a, z_b)?;
    error_at_separation(separation(gains, &diff)?, noise_var, space)
}

/// `Q(|A ∘ M| / (2 sigma_N))`.
pub fn conditional_pair_error(gains: &GainVector, diff: &DifferenceMatrix, noise_var: f64) -> Result<f64> {
    error_at_separation(separation(gains, diff)?, noise_var, ErrorSpace::RealSubspace)
}

fn check_snr(snr: f64) -> Result<()> {
    if snr > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("snr must be positive, got {snr}")))
    }
}

/// `prod_j 1 / (1 + snr lambda_j^2 / 4)`.
pub fn diversity_bound(diff: &DifferenceMatrix, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(diff
        .singular_values_sq
        .iter()
        .map(|l2| 1.0 / (1.0 + 0.25 * snr * l2))
        .product())
}

/// `max(0, 1 - 4^d / (snr^d prod lambda_j^2))`.
pub fn success_bound(diff: &DifferenceMatrix, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    if diff.singular_values_sq.iter().any(|&l2| !(l2 > 0.0)) {
        return Err(Error::domain("success bound needs every lambda^2 > 0"));
    }
    let ln: f64 = diff.singular_values_sq.iter().map(|l2| (4.0 / (snr * l2)).ln()).sum();
    Ok((1.0 - ln.exp()).max(0.0))
}

/// How effective gains are produced for each Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainSource {
    Fixed {
        gains: GainVector,
    },
    /// Independent `CN(0, variance)` per component and trial.
    Rayleigh {
        variance: f64,
    },
}

impl GainSource {
    pub fn draw<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Result<GainVector> {
        match self {
            GainSource::Fixed { gains } => {
                check_len(d, gains.len())?;
                Ok(gains.clone())
            }
            GainSource::Rayleigh { variance } => {
                let dist = CircularGaussian::new(*variance)?;
                Ok(GainVector::new(
                    (0..d).map(|_| AveragedGain(dist.sample(rng))).collect(),
                ))
            }
        }
    }
}

/// One ML detection trial; `true` on error.
pub fn detection_trial<R: Rng + ?Sized>(
    gains: &GainSource,
    codebook: &Codebook,
    noise: &CircularGaussian,
    rng: &mut R,
) -> Result<bool> {
    let sent = rng.random_range(0..codebook.len());
    let a = gains.draw(codebook.dim(), rng)?;
    let observed: Vec<_> = a
        .apply(codebook.get(sent))?
        .into_iter()
        .map(|x| x + noise.sample(rng))
        .collect();
    Ok(ml_decide(&observed, &a, codebook)? != sent)
}

/// Errors over a run of trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCount {
    pub errors: u64,
    pub trials: u64,
}

impl ErrorCount {
    pub fn rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }
}

/// Monte Carlo ML error rate; trial `t` draws from stream `t` of `seed`.
pub fn exhaustive_error_rate(
    gains: &GainSource,
    codebook: &Codebook,
    noise_var: f64,
    trials: u64,
    seed: u64,
) -> Result<ErrorCount> {
    if trials == 0 {
        return Err(Error::domain("trial count must be at least 1"));
    }
    let noise = CircularGaussian::new(noise_var)?;
    let mut errors = 0;
    for t in 0..trials {
        let mut rng = crate::mathcore::RngStream::new(seed, t).rng();
        errors += u64::from(detection_trial(gains, codebook, &noise, &mut rng)?);
    }
    Ok(ErrorCount { errors, trials })
}

/// Receiver used for single-symbol detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measurement {
    /// Measures one quadrature. `symmetric` asserts that both output
    /// quadratures are identically distributed; the path is refused without
    /// it.
    Homodyne { quadrature: Quadrature, symmetric: bool },
    /// Measures both quadratures; `c` scales the noise.
    Heterodyne { c: f64 },
}

impl Measurement {
    pub fn heterodyne() -> Self {
        Measurement::Heterodyne { c: 1.0 }
    }

    pub fn homodyne(quadrature: Quadrature) -> Self {
        Measurement::Homodyne {
            quadrature,
            symmetric: true,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Measurement::Homodyne { symmetric: false, .. } => Err(Error::domain(
                "homodyne detection requires identically distributed output quadratures",
            )),
            Measurement::Heterodyne { c } if !(c > 0.0) || !c.is_finite() => {
                Err(Error::domain(format!("heterodyne constant must be positive, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

/// Single-symbol statistic. For homodyne the imaginary part is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleStatistic {
    pub value: ComplexAmplitude,
    /// Complex variance for heterodyne, real variance for homodyne.
    pub residual_noise_variance: f64,
}

fn mean_gain(gains: &[SubChannelGain]) -> Result<ComplexAmplitude> {
    if gains.is_empty() {
        return Err(Error::DegenerateGain("no sub-channels".into()));
    }
    Ok(gains.iter().map(|g| g.0).sum::<Complex64>() / gains.len() as f64)
}

/// Matched single-symbol statistic over the `l` sub-channel gains of one
/// symbol. `noise_var` is the complex channel noise variance.
///
/// Homodyne: `chi(nu) chi(z')` with `chi(nu) = chi(A) / mean |chi(F_i)|`.
/// Heterodyne: `U z'` with `U = conj(A) / mean |F_i|`.
pub fn single_statistic(
    observed: ComplexAmplitude,
    gains: &[SubChannelGain],
    measurement: Measurement,
    noise_var: f64,
) -> Result<SingleStatistic> {
    measurement.validate()?;
    let a = mean_gain(gains)?;
    let l = gains.len() as f64;
    match measurement {
        Measurement::Homodyne { quadrature, .. } => {
            let chi_a = quadrature.of(a);
            let mean_abs = gains.iter().map(|g| quadrature.of(g.0).abs()).sum::<f64>() / l;
            if chi_a == 0.0 || mean_abs == 0.0 {
                return Err(Error::DegenerateGain(format!("{quadrature:?} quadrature of A is zero")));
            }
            let nu = chi_a / mean_abs;
            Ok(SingleStatistic {
                value: Complex64::new(nu * quadrature.of(observed), 0.0),
                residual_noise_variance: nu * nu * 0.5 * noise_var,
            })
        }
        Measurement::Heterodyne { c } => {
            let mean_abs = gains.iter().map(|g| g.0.norm()).sum::<f64>() / l;
            if a.norm_sqr() == 0.0 {
                return Err(Error::DegenerateGain("|A| = 0".into()));
            }
            let u = a.conj() / mean_abs;
            Ok(SingleStatistic {
                value: u * observed,
                residual_noise_variance: c * noise_var * u.norm_sqr(),
            })
        }
    }
}

/// Receiver output for input `z`: per-quadrature gains for homodyne,
/// `A z + CN(0, c noise_var)` for heterodyne.
pub fn single_observation<R: Rng + ?Sized>(
    z: ComplexAmplitude,
    gains: &[SubChannelGain],
    measurement: Measurement,
    noise_var: f64,
    rng: &mut R,
) -> Result<ComplexAmplitude> {
    measurement.validate()?;
    let a = mean_gain(gains)?;
    match measurement {
        Measurement::Homodyne { .. } => {
            let w = CircularGaussian::new(noise_var)?.sample(rng);
            Ok(Complex64::new(a.re * z.re, a.im * z.im) + w)
        }
        Measurement::Heterodyne { c } => Ok(a * z + CircularGaussian::new(c * noise_var)?.sample(rng)),
    }
}

/// Sign decision for antipodal `±a`; `true` means `+a`.
pub fn single_decide(stat: &SingleStatistic, amplitude: ComplexAmplitude, measurement: Measurement) -> bool {
    match measurement {
        Measurement::Homodyne { quadrature, .. } => stat.value.re * quadrature.of(amplitude) >= 0.0,
        Measurement::Heterodyne { .. } => (stat.value * amplitude.conj()).re >= 0.0,
    }
}

/// Antipodal single-symbol trial through the given sub-channel gains.
pub fn single_detection_trial<R: Rng + ?Sized>(
    gains: &[SubChannelGain],
    amplitude: ComplexAmplitude,
    measurement: Measurement,
    noise_var: f64,
    rng: &mut R,
) -> Result<bool> {
    let sent = rng.random::<bool>();
    let z = if sent { amplitude } else { -amplitude };
    let obs = single_observation(z, gains, measurement, noise_var, rng)?;
    let stat = single_statistic(obs, gains, measurement, noise_var)?;
    Ok(single_decide(&stat, amplitude, measurement) != sent)
}

fn check_amplitude(amplitude: ComplexAmplitude, measurement: Measurement) -> Result<()> {
    let zero = match measurement {
        Measurement::Homodyne { quadrature, .. } => quadrature.of(amplitude) == 0.0,
        Measurement::Heterodyne { .. } => amplitude.norm_sqr() == 0.0,
    };
    if zero {
        Err(Error::domain("symbol amplitude is zero in the measured quadrature"))
    } else {
        Ok(())
    }
}

/// Closed-form single-symbol error for fixed sub-channel gains.
pub fn single_error_fixed(
    gains: &[SubChannelGain],
    amplitude: ComplexAmplitude,
    measurement: Measurement,
    noise_var: f64,
) -> Result<f64> {
    measurement.validate()?;
    check_amplitude(amplitude, measurement)?;
    let sigma = check_noise(noise_var)?;
    let a = mean_gain(gains)?;
    Ok(match measurement {
        Measurement::Homodyne { quadrature, .. } => q(quadrature.of(a).abs() * quadrature.of(amplitude).abs() / sigma),
        Measurement::Heterodyne { c } => q(a.norm() * amplitude.norm() / (c.sqrt() * sigma)),
    })
}

/// Closed-form single-symbol error averaged over `l` Rayleigh sub-channels
/// with gain variance `gain_variance`.
pub fn single_error_fading(
    l: usize,
    gain_variance: f64,
    amplitude: ComplexAmplitude,
    measurement: Measurement,
    noise_var: f64,
) -> Result<f64> {
    measurement.validate()?;
    check_amplitude(amplitude, measurement)?;
    check_noise(noise_var)?;
    if l == 0 {
        return Err(Error::DegenerateGain("no sub-channels".into()));
    }
    if !(gain_variance > 0.0) {
        return Err(Error::domain("gain variance must be positive"));
    }
    // A = mean of l gains ~ CN(0, v / l)
    let var_a = gain_variance / l as f64;
    Ok(match measurement {
        Measurement::Homodyne { quadrature, .. } => {
            let b = (var_a / noise_var).sqrt() * quadrature.of(amplitude).abs();
            (1.0 / b).atan() / std::f64::consts::PI
        }
        Measurement::Heterodyne { c } => pilot_error_probability(1, var_a * amplitude.norm_sqr() / (c * noise_var))?,
    })
}
