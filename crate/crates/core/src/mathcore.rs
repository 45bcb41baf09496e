//! Scalar and vector numerics shared by every layer of the simulator.
//!
//! Complex amplitudes carry the position quadrature in the real part and the
//! momentum quadrature in the imaginary part. Every variance that crosses a
//! public API boundary is a *complex* variance `E[|z|^2]`; the per-quadrature
//! variance is always half of it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A phase-space amplitude `x + i p`.
pub type ComplexAmplitude = Complex64;

/// Zero-mean circular-symmetric complex Gaussian `CN(0, complex_variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularGaussian {
    complex_variance: f64,
}

impl CircularGaussian {
    pub fn new(complex_variance: f64) -> Result<Self> {
        if !(complex_variance >= 0.0) || !complex_variance.is_finite() {
            return Err(Error::domain(format!(
                "complex variance must be finite and non-negative, got {complex_variance}"
            )));
        }
        Ok(Self { complex_variance })
    }

    /// Builds the distribution from the per-quadrature variance `sigma^2`.
    pub fn from_quadrature_variance(quadrature_variance: f64) -> Result<Self> {
        Self::new(2.0 * quadrature_variance)
    }

    pub fn complex_variance(&self) -> f64 {
        self.complex_variance
    }

    pub fn quadrature_variance(&self) -> f64 {
        0.5 * self.complex_variance
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexAmplitude {
        if self.complex_variance == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let sd = self.quadrature_variance().sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(sd * re, sd * im)
    }
}

/// Draws one sample from `dist`.
pub fn sample_circular_gaussian<R: Rng + ?Sized>(dist: &CircularGaussian, rng: &mut R) -> ComplexAmplitude {
    dist.sample(rng)
}

/// Descriptor of one reproducible random stream.
///
/// The pair `(master_seed, stream_id)` fully determines the generated
/// sequence. Streams are ChaCha8 keystreams: the master seed fixes the key and
/// the stream id selects the nonce, so distinct ids never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// SplitMix64 finalizer; used to derive independent master seeds for
/// sub-experiments from one user seed.
pub fn derive_seed(master_seed: u64, salt: u64) -> u64 {
    let mut z = master_seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Gaussian tail `Q(x) = P(G > x)` for a standard normal `G`.
///
/// Evaluated as `erfc(x / sqrt 2) / 2`; absolute error is below 1e-15 on the
/// whole real line.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("q_function needs a finite argument, got {x}")));
    }
    Ok(gaussian_tail(x))
}

pub(crate) fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `ln n!`, exact summation for small `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "binomial C({n}, {k}) undefined");
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn binomial(n: u64, k: u64) -> f64 {
    ln_binomial(n, k).exp().round()
}

fn check_chi2_args(x: f64, l: u32) -> Result<()> {
    if l < 1 {
        return Err(Error::domain("chi-square order l must be at least 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("chi-square argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// Density `x^(l-1) e^(-x) / (l-1)!` of the squared magnitude of a sum of `l`
/// unit-variance complex Gaussians (chi-square with `2l` degrees of freedom,
/// in the complex-variance scaling).
pub fn chi2_2l_density(x: f64, l: u32) -> Result<f64> {
    check_chi2_args(x, l)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(if l == 1 { 1.0 } else { 0.0 });
    }
    let ln = f64::from(l - 1) * x.ln() - x - ln_factorial(u64::from(l - 1));
    Ok(ln.exp())
}

/// CDF of [`chi2_2l_density`]: the regularized lower incomplete gamma
/// `P(l, x)`.
pub fn chi2_2l_cdf(x: f64, l: u32) -> Result<f64> {
    check_chi2_args(x, l)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let a = f64::from(l);
    if x < a + 1.0 {
        // P(l, x) = x^l e^-x / l! * sum_j x^j / ((l+1)...(l+j))
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut j = 1.0;
        while term > sum * 1e-17 {
            term *= x / (a + j);
            sum += term;
            j += 1.0;
        }
        let lead = (a * x.ln() - x - ln_factorial(u64::from(l))).exp();
        Ok((lead * sum).min(1.0))
    } else {
        // Q(l, x) = e^-x sum_{k<l} x^k / k!  (finite Poisson tail)
        let ln_x = x.ln();
        let upper: f64 = (0..l)
            .map(|k| (f64::from(k) * ln_x - x - ln_factorial(u64::from(k))).exp())
            .sum();
        Ok((1.0 - upper).max(0.0))
    }
}

fn transform(v: &[ComplexAmplitude], inverse: bool) -> Result<Vec<ComplexAmplitude>> {
    if v.is_empty() {
        return Err(Error::domain("DFT of an empty vector"));
    }
    let n = v.len();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = v.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|c| *c *= scale);
    Ok(buf)
}

/// Unitary DFT, `X_k = n^(-1/2) sum_j x_j e^(-2 pi i jk/n)`.
pub fn unitary_dft(v: &[ComplexAmplitude]) -> Result<Vec<ComplexAmplitude>> {
    transform(v, false)
}

/// Inverse of [`unitary_dft`].
pub fn unitary_idft(v: &[ComplexAmplitude]) -> Result<Vec<ComplexAmplitude>> {
    transform(v, true)
}

pub fn norm_sqr(v: &[ComplexAmplitude]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Hermitian inner product `sum conj(a_j) b_j`.
pub fn inner(a: &[ComplexAmplitude], b: &[ComplexAmplitude]) -> ComplexAmplitude {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn direct_dft(v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let s = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| {
                v.iter()
                    .enumerate()
                    .map(|(j, x)| {
                        let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                        x * Complex64::from_polar(1.0, ang)
                    })
                    .sum::<Complex64>()
                    * s
            })
            .collect()
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0).unwrap(), 0.5);
        assert!((q_function(-1e9).unwrap() - 1.0).abs() < 1e-12);
        assert!((q_function(1.0).unwrap() - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert!(q_function(f64::NAN).is_err());
        assert!(q_function(f64::INFINITY).is_err());
    }

    #[test]
    fn chi2_density_values() {
        assert_eq!(chi2_2l_density(0.0, 1).unwrap(), 1.0);
        assert!((chi2_2l_density(1.0, 2).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        // leading order x for l = 2 near the origin
        let x = 1e-8;
        assert!((chi2_2l_density(x, 2).unwrap() / x - 1.0).abs() < 1e-7);
        assert!(chi2_2l_density(-1.0, 1).is_err());
        assert!(chi2_2l_density(1.0, 0).is_err());
    }

    #[test]
    fn chi2_cdf_values() {
        for l in 1..5 {
            assert_eq!(chi2_2l_cdf(0.0, l).unwrap(), 0.0);
        }
        let want = 1.0 - (-0.1f64).exp();
        assert!((chi2_2l_cdf(0.1, 1).unwrap() - want).abs() / want < 1e-12);
        assert_eq!(chi2_2l_cdf(f64::INFINITY, 3).unwrap(), 1.0);
        assert!(chi2_2l_cdf(-0.5, 2).is_err());
    }

    #[test]
    fn dft_of_impulse_is_flat() {
        for n in [1usize, 3, 8, 17] {
            let mut v = vec![c(0.0, 0.0); n];
            v[0] = c(1.0, 0.0);
            let out = unitary_dft(&v).unwrap();
            let want = 1.0 / (n as f64).sqrt();
            for x in out {
                assert!((x - c(want, 0.0)).norm() < 1e-14);
            }
        }
        assert!(unitary_dft(&[]).is_err());
        assert!(unitary_idft(&[]).is_err());
    }

    #[test]
    fn dft_matches_direct_sum_and_round_trips() {
        let mut rng = RngStream::new(11, 0).rng();
        let g = CircularGaussian::new(2.0).unwrap();
        let v: Vec<_> = (0..8).map(|_| g.sample(&mut rng)).collect();
        let fast = unitary_dft(&v).unwrap();
        for (a, b) in fast.iter().zip(direct_dft(&v)) {
            assert!((a - b).norm() < 1e-12);
        }
        let back = unitary_idft(&fast).unwrap();
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_gaussian_is_exact_zero() {
        let g = CircularGaussian::new(0.0).unwrap();
        let mut rng = RngStream::new(1, 2).rng();
        assert_eq!(g.sample(&mut rng), c(0.0, 0.0));
        assert!(CircularGaussian::new(-1.0).is_err());
        assert!(CircularGaussian::new(f64::NAN).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let g = CircularGaussian::new(1.0).unwrap();
        let a = g.sample(&mut RngStream::new(42, 7).rng());
        let b = g.sample(&mut RngStream::new(42, 7).rng());
        let other = g.sample(&mut RngStream::new(42, 8).rng());
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
        assert_ne!(a, other);
    }

    #[test]
    fn sample_second_moment() {
        let g = CircularGaussian::new(2.0).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let m = g.sample(&mut rng).norm_sqr();
            s += m;
            s2 += m * m;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(15, 8), 6435.0);
        assert!((ln_binomial(127, 64) - binomial(127, 64).ln()).abs() < 1e-9);
    }
}
