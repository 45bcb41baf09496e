//! MMSE gain estimation from a single pilot, then antipodal pilot detection
//! over l Rayleigh sub-channels compared with the closed form.

use aqdsim::channel::{ChannelModel, GainModel};
use aqdsim::estimation::{
    estimation_trial, noise_for_snr_hat, pilot_detection_trial, pilot_error_probability, PilotSymbol,
};
use aqdsim::harness::count_errors;
use aqdsim::{CircularGaussian, RngStream};
use num_complex::Complex64;

fn main() -> aqdsim::Result<()> {
    let pilot = PilotSymbol::new(Complex64::new(1.0, 0.0))?;
    let noise = CircularGaussian::new(0.25)?;
    let mut rng = RngStream::new(1, 0).rng();
    let n = 200_000;
    let mut mse = 0.0;
    let mut closed = 0.0;
    for _ in 0..n {
        let s = estimation_trial(1.0, &pilot, &noise, &mut rng)?;
        mse += (s.estimate.value - s.truth).norm_sqr();
        closed = s.estimate.mmse;
    }
    println!("MSE {:.5} (closed form {closed:.5})", mse / n as f64);

    println!("{:>3} {:>8} {:>12} {:>12}", "l", "snr_hat", "empirical", "analytic");
    for l in [1, 2, 4] {
        for snr_hat in [1.0, 4.0, 16.0] {
            let noise = noise_for_snr_hat(&pilot, snr_hat)?;
            let model = ChannelModel::all_good(GainModel::fading(1.0)?, noise, l)?;
            let trials = 200_000;
            let errors = count_errors(trials, 10 + l as u64, |rng| {
                Ok(pilot_detection_trial(&model, &pilot, rng))
            })?;
            let analytic = pilot_error_probability(l as u32, snr_hat)?;
            println!(
                "{l:>3} {snr_hat:>8} {:>12.3e} {analytic:>12.3e}",
                errors as f64 / trials as f64
            );
        }
    }
    Ok(())
}
