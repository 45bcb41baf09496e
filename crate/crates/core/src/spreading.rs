//! Subcarrier-spreading estimation.
//!
//! A `g`-long pilot segment `q` is placed inside an `n`-long frame padded with
//! vacuum (exact zeros), `g + l - 1 = n`. Iteration `i` sends its frame
//! through the `i`-th good sub-channel, projects the output onto the unit
//! frame direction and shrinks the result to a gain estimate. Repeating the
//! scan `k` times multiplies the effective SNR by `k`.
//!
//! The shrinkage assumes a unit-variance gain prior, so at zero noise it is
//! the identity on the gain.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_gains, ChannelModel, SubChannelGain};
use crate::error::{check_len, Error, Result};
use crate::estimation::{Estimate, Statistic};
use crate::mathcore::{gaussian_tail, inner, norm_sqr, CircularGaussian, ComplexAmplitude};

/// Frame geometry: `n` sub-channels, `l` good ones, `g = n - l + 1` pilots
/// per frame and `k` repetitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadPlan {
    n: usize,
    l: usize,
    g: usize,
    k: usize,
    good_indices: Vec<usize>,
}

impl SpreadPlan {
    pub fn new(n: usize, k: usize, good_indices: Vec<usize>) -> Result<Self> {
        let l = good_indices.len();
        if l == 0 || l > n {
            return Err(Error::domain(format!("need 1 <= l <= n, got l = {l}, n = {n}")));
        }
        if k == 0 {
            return Err(Error::domain("repetition count k must be at least 1"));
        }
        if let Some(&bad) = good_indices.iter().find(|&&i| i >= n) {
            return Err(Error::domain(format!("good index {bad} out of range for n = {n}")));
        }
        Ok(Self {
            n,
            l,
            g: n - l + 1,
            k,
            good_indices,
        })
    }

    /// Plan matching the geometry of a channel model.
    pub fn for_channel(channel: &ChannelModel, k: usize) -> Result<Self> {
        Self::new(channel.n(), k, channel.good_indices().to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn good_indices(&self) -> &[usize] {
        &self.good_indices
    }

    /// Window start for iteration `i`: `i` itself when its window covers the
    /// `i`-th good position, otherwise the nearest start that does.
    pub fn window_start(&self, i: usize) -> Result<usize> {
        let pos = *self
            .good_indices
            .get(i)
            .ok_or_else(|| Error::domain(format!("iteration {i} out of range for l = {}", self.l)))?;
        let lo = (pos + 1).saturating_sub(self.g);
        let hi = pos.min(self.l - 1);
        Ok(i.clamp(lo, hi))
    }

    fn check_channel(&self, channel: &ChannelModel) -> Result<()> {
        if channel.n() != self.n || channel.good_indices() != self.good_indices.as_slice() {
            return Err(Error::domain(format!(
                "plan (n = {}, good = {:?}) does not match channel (n = {}, good = {:?})",
                self.n,
                self.good_indices,
                channel.n(),
                channel.good_indices()
            )));
        }
        Ok(())
    }
}

/// An `n`-long frame carrying the pilot segment at `[start, start + g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadFrame {
    pub entries: Vec<ComplexAmplitude>,
    pub pilot_window_start: usize,
    pub pilot_values: Vec<ComplexAmplitude>,
}

impl SpreadFrame {
    pub fn energy(&self) -> f64 {
        norm_sqr(&self.entries)
    }

    /// `P / |P|`.
    pub fn direction(&self) -> Vec<ComplexAmplitude> {
        let norm = self.energy().sqrt();
        self.entries.iter().map(|e| e / norm).collect()
    }
}

/// Frame with the pilot window starting at `i`, `0 <= i <= l - 1`.
pub fn build_frame(plan: &SpreadPlan, i: usize, q_x: &[ComplexAmplitude]) -> Result<SpreadFrame> {
    if i >= plan.l {
        return Err(Error::domain(format!(
            "window start {i} exceeds l - 1 = {}",
            plan.l - 1
        )));
    }
    if q_x.len() != plan.g {
        return Err(Error::domain(format!(
            "pilot segment has length {}, plan needs g = {}",
            q_x.len(),
            plan.g
        )));
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); plan.n];
    entries[i..i + plan.g].copy_from_slice(q_x);
    Ok(SpreadFrame {
        entries,
        pilot_window_start: i,
        pilot_values: q_x.to_vec(),
    })
}

/// Hermitian inner product of two frames.
pub fn frame_inner_product(f1: &SpreadFrame, f2: &SpreadFrame) -> Result<ComplexAmplitude> {
    check_len(f1.entries.len(), f2.entries.len())?;
    Ok(inner(&f1.entries, &f2.entries))
}

/// `|q|^2 / g`, the per-pilot energy.
pub fn upsilon(q_x: &[ComplexAmplitude]) -> Result<f64> {
    if q_x.is_empty() {
        return Err(Error::domain("empty pilot segment"));
    }
    Ok(norm_sqr(q_x) / q_x.len() as f64)
}

/// One good sub-channel's contribution to a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelScan {
    pub index: usize,
    /// `S = F |P| + noise`, before normalization by `|P|`.
    pub statistic: Statistic,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadScanResult {
    pub per_channel: Vec<ChannelScan>,
    /// Sum of all frame outputs.
    pub aggregate_output: Vec<ComplexAmplitude>,
}

/// Unit-prior shrinkage of one spread statistic.
fn shrink(statistic: ComplexAmplitude, frame_energy: f64, noise_var: f64) -> Estimate {
    let denom = frame_energy + noise_var;
    Estimate {
        value: statistic * (frame_energy.sqrt() / denom),
        mmse: noise_var / denom,
        prior_variance: 1.0,
    }
}

/// Output of a frame through a single gain applied to every entry.
fn frame_output<R: Rng + ?Sized>(
    frame: &[ComplexAmplitude],
    gain: SubChannelGain,
    scale: f64,
    noise: &CircularGaussian,
    rng: &mut R,
) -> Vec<ComplexAmplitude> {
    frame.iter().map(|&p| gain.0 * p * scale + noise.sample(rng)).collect()
}

/// Runs the `l` scan iterations through freshly drawn gains.
pub fn scan<R: Rng + ?Sized>(
    plan: &SpreadPlan,
    q_x: &[ComplexAmplitude],
    channel: &ChannelModel,
    rng: &mut R,
) -> Result<SpreadScanResult> {
    let gains = draw_gains(channel, rng);
    scan_with_gains(plan, q_x, channel, &gains, rng)
}

/// [`scan`] with the sub-channel gains supplied by the caller.
pub fn scan_with_gains<R: Rng + ?Sized>(
    plan: &SpreadPlan,
    q_x: &[ComplexAmplitude],
    channel: &ChannelModel,
    gains: &[SubChannelGain],
    rng: &mut R,
) -> Result<SpreadScanResult> {
    plan.check_channel(channel)?;
    check_len(plan.n, gains.len())?;
    let noise = channel.noise();
    let noise_var = noise.complex_variance();
    let mut aggregate = vec![Complex64::new(0.0, 0.0); plan.n];
    let mut per_channel = Vec::with_capacity(plan.l);
    for (i, &index) in plan.good_indices.iter().enumerate() {
        let frame = build_frame(plan, plan.window_start(i)?, q_x)?;
        let energy = frame.energy();
        if energy == 0.0 {
            return Err(Error::domain("pilot segment has zero energy"));
        }
        let out = frame_output(&frame.entries, gains[index], 1.0, &noise, rng);
        let s = inner(&frame.direction(), &out);
        aggregate.iter_mut().zip(&out).for_each(|(a, o)| *a += o);
        per_channel.push(ChannelScan {
            index,
            statistic: Statistic {
                value: s,
                residual_noise_variance: noise_var,
            },
            estimate: shrink(s, energy, noise_var),
        });
    }
    Ok(SpreadScanResult {
        per_channel,
        aggregate_output: aggregate,
    })
}

/// Combines `k` spread statistics of one sub-channel:
/// `zeta = |P| / (k |P|^2 + noise_var) * sum S`, unit prior.
pub fn repeated_estimate(
    plan: &SpreadPlan,
    stats: &[Statistic],
    frame_energy: f64,
    noise_var: f64,
) -> Result<Estimate> {
    check_len(plan.k, stats.len())?;
    if !(frame_energy > 0.0) {
        return Err(Error::domain("frame energy must be positive"));
    }
    if !(noise_var >= 0.0) {
        return Err(Error::domain("noise variance must be >= 0"));
    }
    let sum: Complex64 = stats.iter().map(|s| s.value).sum();
    let denom = plan.k as f64 * frame_energy + noise_var;
    Ok(Estimate {
        value: sum * (frame_energy.sqrt() / denom),
        mmse: noise_var / denom,
        prior_variance: 1.0,
    })
}

/// `Q(sqrt(k snr))`, with `snr` the complex SNR.
pub fn spread_error_probability(k: usize, snr: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if !(snr >= 0.0) {
        return Err(Error::domain(format!("snr must be >= 0, got {snr}")));
    }
    let arg = (k as f64 * snr).sqrt();
    Ok(if arg.is_infinite() { 0.0 } else { gaussian_tail(arg) })
}

/// One antipodal detection trial after spreading with known gains.
///
/// Each good sub-channel carries `±P / sqrt(2 g)` (per-pilot energy
/// `upsilon / 2`) `k` times; the receiver matches every projected output to
/// its gain and decides on the sign of the sum. With complex SNR
/// `upsilon / (2 sigma_N^2)` the conditional error is
/// `Q(sqrt(k SNR sum |F|^2))`. Returns `true` on error.
pub fn spread_detection_trial<R: Rng + ?Sized>(
    plan: &SpreadPlan,
    q_x: &[ComplexAmplitude],
    channel: &ChannelModel,
    rng: &mut R,
) -> Result<bool> {
    plan.check_channel(channel)?;
    let gains = draw_gains(channel, rng);
    let sent = rng.random::<bool>();
    let sign = if sent { 1.0 } else { -1.0 };
    let scale = sign / (2.0 * plan.g as f64).sqrt();
    let noise = channel.noise();
    let mut decision = 0.0;
    for (i, &index) in plan.good_indices.iter().enumerate() {
        let frame = build_frame(plan, plan.window_start(i)?, q_x)?;
        let dir = frame.direction();
        let gain = gains[index];
        for _ in 0..plan.k {
            let out = frame_output(&frame.entries, gain, scale, &noise, rng);
            decision += (gain.0.conj() * inner(&dir, &out)).re;
        }
    }
    Ok((decision >= 0.0) != sent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GainModel;
    use crate::mathcore::RngStream;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn plan(n: usize, l: usize) -> SpreadPlan {
        SpreadPlan::new(n, 1, (0..l).collect()).unwrap()
    }

    #[test]
    fn geometry() {
        let p = plan(5, 3);
        assert_eq!((p.g(), p.g() + p.l() - 1), (3, 5));
        assert!(SpreadPlan::new(3, 1, vec![]).is_err());
        assert!(SpreadPlan::new(3, 0, vec![0]).is_err());
        assert!(SpreadPlan::new(3, 1, vec![3]).is_err());
        // every iteration's window covers its good position
        let p = SpreadPlan::new(10, 1, vec![1, 6, 9]).unwrap();
        for i in 0..3 {
            let s = p.window_start(i).unwrap();
            let pos = p.good_indices()[i];
            assert!(s < p.l() && s <= pos && pos < s + p.g(), "i={i}");
        }
    }

    #[test]
    fn frame_layout() {
        let p = plan(5, 3);
        let q = [c(1.0), c(2.0), c(3.0)];
        let f0 = build_frame(&p, 0, &q).unwrap();
        assert_eq!(f0.entries, vec![c(1.0), c(2.0), c(3.0), c(0.0), c(0.0)]);
        let f2 = build_frame(&p, 2, &q).unwrap();
        assert_eq!(f2.entries, vec![c(0.0), c(0.0), c(1.0), c(2.0), c(3.0)]);
        let one = build_frame(&plan(4, 1), 0, &[c(1.0), c(2.0), c(3.0), c(4.0)]).unwrap();
        assert_eq!(one.entries, one.pilot_values);
        assert!(build_frame(&p, 3, &q).is_err());
        assert!(build_frame(&p, 0, &q[..2]).is_err());
    }

    #[test]
    fn inner_products() {
        let p = plan(5, 3);
        let ones = [c(1.0); 3];
        let f0 = build_frame(&p, 0, &ones).unwrap();
        let f1 = build_frame(&p, 1, &ones).unwrap();
        assert_eq!(frame_inner_product(&f0, &f1).unwrap(), c(2.0));
        assert_eq!(frame_inner_product(&f0, &f0).unwrap(), c(3.0));
        let p = plan(6, 4);
        let a = build_frame(&p, 0, &[c(1.0); 3]).unwrap();
        let b = build_frame(&p, 3, &[c(1.0); 3]).unwrap();
        assert_eq!(frame_inner_product(&a, &b).unwrap(), c(0.0));
        let short = build_frame(&plan(4, 2), 0, &[c(1.0); 3]).unwrap();
        assert!(frame_inner_product(&a, &short).is_err());
    }

    #[test]
    fn upsilon_equal_pilots() {
        let q = vec![Complex64::new(0.6, -0.8); 7];
        assert!((upsilon(&q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_scan_hand_values() {
        let gains = vec![
            SubChannelGain::new(0.1, 0.0),
            SubChannelGain::new(0.2, 0.0),
            SubChannelGain::new(0.3, 0.0),
            SubChannelGain::new(0.0, 0.0),
            SubChannelGain::new(0.0, 0.0),
        ];
        let channel = ChannelModel::new(
            GainModel::fading(1.0).unwrap(),
            CircularGaussian::new(0.0).unwrap(),
            5,
            vec![0, 1, 2],
        )
        .unwrap();
        let p = SpreadPlan::for_channel(&channel, 1).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let r = scan_with_gains(&p, &[c(1.0); 3], &channel, &gains, &mut rng).unwrap();
        assert_eq!(r.per_channel.len(), 3);
        for (scan, want) in r.per_channel.iter().zip([0.1, 0.2, 0.3]) {
            assert!((scan.statistic.value - c(want * 3f64.sqrt())).norm() < 1e-15);
            assert!((scan.estimate.value - c(want)).norm() < 1e-15);
        }
        // aggregate of (0.1,0.1,0.1,0,0) + (0,0.2,0.2,0.2,0) + (0,0,0.3,0.3,0.3)
        let want = [0.1, 0.3, 0.6, 0.5, 0.3];
        for (a, w) in r.aggregate_output.iter().zip(want) {
            assert!((a - c(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_gains_zero_statistics() {
        let channel =
            ChannelModel::all_good(GainModel::fading(0.0).unwrap(), CircularGaussian::new(0.0).unwrap(), 4).unwrap();
        let p = SpreadPlan::for_channel(&channel, 1).unwrap();
        let r = scan(&p, &[c(1.0)], &channel, &mut RngStream::new(2, 0).rng()).unwrap();
        assert!(r.per_channel.iter().all(|s| s.statistic.value == c(0.0)));
        let mismatched = SpreadPlan::new(5, 1, vec![0]).unwrap();
        assert!(scan(&mismatched, &[c(1.0); 5], &channel, &mut RngStream::new(2, 0).rng()).is_err());
    }

    #[test]
    fn repetition_combiner() {
        let p1 = plan(3, 1);
        let s = Statistic {
            value: Complex64::new(0.5, -0.2),
            residual_noise_variance: 0.4,
        };
        let single = shrink(s.value, 3.0, 0.4);
        assert_eq!(repeated_estimate(&p1, &[s], 3.0, 0.4).unwrap(), single);
        let p3 = SpreadPlan::new(3, 3, vec![0]).unwrap();
        let g = Complex64::new(0.3, 0.4);
        let exact = Statistic {
            value: g * 2.0,
            residual_noise_variance: 0.0,
        };
        let e = repeated_estimate(&p3, &[exact; 3], 4.0, 0.0).unwrap();
        assert!((e.value - g).norm() < 1e-15);
        assert!(repeated_estimate(&p3, &[exact; 2], 4.0, 0.0).is_err());
    }

    #[test]
    fn spread_error_values() {
        assert!((spread_error_probability(1, 1e-15).unwrap() - 0.5).abs() < 1e-7);
        assert!((spread_error_probability(1, 1.0).unwrap() - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((spread_error_probability(4, 1.0).unwrap() - 0.022_750_131_948_179_21).abs() < 1e-15);
        assert!(spread_error_probability(0, 1.0).is_err());
    }
}
