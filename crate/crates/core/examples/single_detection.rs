//! Single-symbol detection with homodyne and heterodyne measurement, for
//! fixed and fading gains.

use aqdsim::channel::{draw_gains, ChannelModel, GainModel, SubChannelGain};
use aqdsim::detection::{single_detection_trial, single_error_fading, single_error_fixed, Measurement};
use aqdsim::estimation::Quadrature;
use aqdsim::harness::count_errors;
use aqdsim::CircularGaussian;
use num_complex::Complex64;

fn main() -> aqdsim::Result<()> {
    let a = Complex64::new(1.0, 1.0) / 2f64.sqrt();
    let noise_var = 0.25;
    let trials = 200_000;
    let fixed = [SubChannelGain::new(0.8, 0.1), SubChannelGain::new(0.4, -0.3)];
    let l = fixed.len();
    let fading = ChannelModel::all_good(GainModel::fading(1.0)?, CircularGaussian::new(0.0)?, l)?;
    for m in [
        Measurement::homodyne(Quadrature::Position),
        Measurement::heterodyne(),
        Measurement::Heterodyne { c: 2.0 },
    ] {
        let e = count_errors(trials, 4, |rng| single_detection_trial(&fixed, a, m, noise_var, rng))?;
        let want = single_error_fixed(&fixed, a, m, noise_var)?;
        println!("{m:?} fixed: {:.4} vs {want:.4}", e as f64 / trials as f64);
        let e = count_errors(trials, 5, |rng| {
            let gains = draw_gains(&fading, rng);
            single_detection_trial(&gains, a, m, noise_var, rng)
        })?;
        let want = single_error_fading(l, 1.0, a, m, noise_var)?;
        println!("{m:?} fading: {:.4} vs {want:.4}", e as f64 / trials as f64);
    }
    Ok(())
}
