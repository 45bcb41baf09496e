//! Multiuser detection over disjoint blocks of the `d` output dimensions.
//!
//! User `k` owns `r_k` consecutive components, `sum r_k = d`. Blocks do not
//! interfere, so each user is detected exactly like a single user of
//! dimension `r_k`. The κ decoder inverts the gains componentwise before
//! thresholding; it is never better than the matched projection.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detection::{
    collective_statistic, diversity_bound, error_at_separation, separation, Codeword, DifferenceMatrix, ErrorSpace,
    GainVector,
};
use crate::error::{check_len, Error, Result};
use crate::mathcore::{gaussian_tail, CircularGaussian, ComplexAmplitude};

/// Default magnitude below which a gain is treated as singular by the κ decoder.
pub const DEFAULT_KAPPA_EPSILON: f64 = 1e-9;

/// Split of `d` dimensions among `k_out` users.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAllocation {
    k_in: usize,
    k_out: usize,
    dims: Vec<usize>,
    d: usize,
}

impl UserAllocation {
    pub fn new(k_in: usize, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::domain("at least one output user is required"));
        }
        if k_in == 0 {
            return Err(Error::domain("at least one input user is required"));
        }
        if dims.contains(&0) {
            return Err(Error::domain("every user needs r_k >= 1"));
        }
        let d = dims.iter().sum();
        Ok(Self {
            k_in,
            k_out: dims.len(),
            dims,
            d,
        })
    }

    /// Checks the allocation against an externally fixed dimension.
    pub fn with_dimension(k_in: usize, dims: Vec<usize>, d: usize) -> Result<Self> {
        let a = Self::new(k_in, dims)?;
        if a.d != d {
            return Err(Error::domain(format!(
                "user dimensions sum to {}, expected d = {d}",
                a.d
            )));
        }
        Ok(a)
    }

    pub fn k_in(&self) -> usize {
        self.k_in
    }

    pub fn k_out(&self) -> usize {
        self.k_out
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Index range of user `k`'s block.
    pub fn block_range(&self, user: usize) -> Result<std::ops::Range<usize>> {
        if user >= self.k_out {
            return Err(Error::domain(format!(
                "user {user} out of range for {} users",
                self.k_out
            )));
        }
        let start: usize = self.dims[..user].iter().sum();
        Ok(start..start + self.dims[user])
    }

    /// User `k`'s block of a `d`-dimensional output.
    pub fn block<'a>(&self, z: &'a [ComplexAmplitude], user: usize) -> Result<&'a [ComplexAmplitude]> {
        check_len(self.d, z.len())?;
        Ok(&z[self.block_range(user)?])
    }
}

/// Gains and noise seen by one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserChannel {
    pub user: usize,
    pub gains: GainVector,
    pub snr: f64,
    pub noise_var: f64,
}

impl UserChannel {
    /// Channel whose noise variance realizes `snr` for codewords of complex
    /// variance `codeword_variance`.
    pub fn new(user: usize, gains: GainVector, snr: f64, codeword_variance: f64) -> Result<Self> {
        if !(snr > 0.0) {
            return Err(Error::domain("user SNR must be positive"));
        }
        Ok(Self {
            user,
            gains,
            snr,
            noise_var: codeword_variance / snr,
        })
    }
}

/// `SNR_k = codeword complex variance / noise complex variance`.
pub fn user_snr(codeword_variance: f64, noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) {
        return Err(Error::domain("noise variance must be positive"));
    }
    Ok(codeword_variance / noise_var)
}

/// Per-user decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserDecision {
    pub user: usize,
    pub gamma: ComplexAmplitude,
    pub s: f64,
    pub decided_index: usize,
}

/// Concatenates each user's `A_k ∘ z_k + noise` block in allocation order.
pub fn compose_output<R: Rng + ?Sized>(
    allocation: &UserAllocation,
    inputs: &[Codeword],
    channels: &[UserChannel],
    rng: &mut R,
) -> Result<Vec<ComplexAmplitude>> {
    check_len(allocation.k_out, inputs.len())?;
    check_len(allocation.k_out, channels.len())?;
    let mut out = Vec::with_capacity(allocation.d);
    for ((&r, z), ch) in allocation.dims.iter().zip(inputs).zip(channels) {
        check_len(r, z.len())?;
        let noise = CircularGaussian::new(ch.noise_var)?;
        out.extend(ch.gains.apply(z)?.into_iter().map(|x| x + noise.sample(rng)));
    }
    Ok(out)
}

/// Pairwise projection decision on one user's block.
pub fn user_statistic(
    block: &[ComplexAmplitude],
    channel: &UserChannel,
    pair: (&Codeword, &Codeword),
) -> Result<UserDecision> {
    let out = collective_statistic(block, &channel.gains, pair)?;
    Ok(UserDecision {
        user: channel.user,
        gamma: out.gamma,
        s: out.s,
        decided_index: out.decided_index,
    })
}

/// Product bound over the user's `r_k` squared singular values.
pub fn user_error_bound(diff: &DifferenceMatrix, snr_k: f64, r_k: usize) -> Result<f64> {
    check_len(r_k, diff.dim())?;
    diversity_bound(diff, snr_k)
}

/// Componentwise `z'_j / A_j`.
pub fn kappa_decode(observed: &[ComplexAmplitude], gains: &GainVector, epsilon: f64) -> Result<Vec<ComplexAmplitude>> {
    check_len(gains.len(), observed.len())?;
    observed
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let a = gains.get(j);
            if a.norm() <= epsilon {
                Err(Error::NearSingularGain {
                    index: j,
                    magnitude: a.norm(),
                })
            } else {
                Ok(z / a)
            }
        })
        .collect()
}

/// Threshold decision on a κ output: projection onto the unit codeword
/// difference `M / |M|` around the midpoint.
pub fn kappa_decision(decoded: &[ComplexAmplitude], user: usize, pair: (&Codeword, &Codeword)) -> Result<UserDecision> {
    let (za, zb) = pair;
    check_len(za.len(), decoded.len())?;
    check_len(zb.len(), decoded.len())?;
    let m: Vec<_> = za.entries.iter().zip(&zb.entries).map(|(a, b)| a - b).collect();
    let norm = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::AmbiguousPair);
    }
    let gamma: Complex64 = (0..decoded.len())
        .map(|j| m[j].conj() / norm * (decoded[j] - 0.5 * (za.entries[j] + zb.entries[j])))
        .sum();
    let first = gamma.re >= 0.0;
    Ok(UserDecision {
        user,
        gamma,
        s: if first { 0.5 } else { -0.5 },
        decided_index: if first { 0 } else { 1 },
    })
}

/// `sum_j |M_j|^2 / |A_j|^2`, the κ-path noise gain along `M`.
fn kappa_noise_gain(gains: &GainVector, diff: &DifferenceMatrix) -> Result<f64> {
    check_len(gains.len(), diff.dim())?;
    let mut s = 0.0;
    for (j, l2) in diff.singular_values_sq.iter().enumerate() {
        let a2 = gains.get(j).norm_sqr();
        if a2 == 0.0 {
            return Err(Error::NearSingularGain {
                index: j,
                magnitude: 0.0,
            });
        }
        s += l2 / a2;
    }
    Ok(s)
}

/// Closed-form error of the κ threshold decision under fixed gains.
pub fn kappa_pair_error(gains: &GainVector, diff: &DifferenceMatrix, noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) {
        return Err(Error::domain("noise variance must be positive"));
    }
    let m2: f64 = diff.singular_values_sq.iter().sum();
    let spread = kappa_noise_gain(gains, diff)?;
    let sigma = (0.5 * noise_var).sqrt();
    Ok(gaussian_tail(m2 / (2.0 * sigma * spread.sqrt())))
}

/// Closed-form error of the matched projection under fixed gains.
pub fn projection_pair_error(gains: &GainVector, diff: &DifferenceMatrix, noise_var: f64) -> Result<f64> {
    error_at_separation(separation(gains, diff)?, noise_var, ErrorSpace::RealSubspace)
}

/// Correlation between the noise left on the matched projection and on the
/// κ projection:
/// `|M|^2 / (|A ∘ M| sqrt(sum |M_j|^2 / |A_j|^2))`. It equals 1 exactly when
/// every `|A_j|` on the support of `M` is the same.
pub fn kappa_noise_correlation(gains: &GainVector, diff: &DifferenceMatrix) -> Result<f64> {
    let m2: f64 = diff.singular_values_sq.iter().sum();
    let sep = separation(gains, diff)?;
    if sep == 0.0 {
        return Err(Error::AmbiguousPair);
    }
    Ok(m2 / (sep * kappa_noise_gain(gains, diff)?.sqrt()))
}
