//! Per-user detection for two users with block sizes 1 and 2, and the gap
//! between κ decoding and the matched projection.

use aqdsim::detection::{difference_matrix, Codeword, GainVector};
use aqdsim::harness::{run, Experiment, SimulationConfig};
use aqdsim::multiuser::{kappa_noise_correlation, kappa_pair_error, projection_pair_error};
use num_complex::Complex64;

fn main() -> aqdsim::Result<()> {
    let cfg = SimulationConfig {
        rk: vec![1, 2],
        ..SimulationConfig::new(Experiment::Multiuser, vec![1.0, 4.0, 16.0], 200_000, 8)
    };
    for row in run(&cfg)?.rows {
        println!(
            "{} snr={}: {:.3e} <= {:.3e}",
            row.experiment, row.snr, row.empirical_p, row.analytic_p
        );
    }

    let gains = GainVector::from_amplitudes(&[Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.1)]);
    let za = Codeword::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    let zb = Codeword::new(vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)]);
    let diff = difference_matrix(&za, &zb)?;
    println!("noise correlation {:.3}", kappa_noise_correlation(&gains, &diff)?);
    for noise_var in [1.0, 0.25] {
        println!(
            "noise {noise_var}: kappa {:.3e}, projection {:.3e}",
            kappa_pair_error(&gains, &diff, noise_var)?,
            projection_pair_error(&gains, &diff, noise_var)?
        );
    }
    Ok(())
}
