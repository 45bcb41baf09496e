//! One spreading scan over n sub-channels with three good ones, then the
//! error rate of k repetitions against Q(sqrt(k SNR)).

use aqdsim::channel::{ChannelModel, GainModel};
use aqdsim::harness::{run, Experiment, ModelSpec, SimulationConfig};
use aqdsim::spreading::{scan, SpreadPlan};
use aqdsim::{CircularGaussian, RngStream};
use num_complex::Complex64;

fn main() -> aqdsim::Result<()> {
    let noise = CircularGaussian::new(0.05)?;
    let channel = ChannelModel::new(GainModel::fading(1.0)?, noise, 8, vec![0, 3, 6])?;
    let plan = SpreadPlan::for_channel(&channel, 1)?;
    let pilots = vec![Complex64::new(1.0, 0.0); plan.g()];
    let result = scan(&plan, &pilots, &channel, &mut RngStream::new(2, 0).rng())?;
    for c in &result.per_channel {
        println!("sub-channel {}: estimate {:.3}", c.index, c.estimate.value);
    }

    let cfg = SimulationConfig {
        model: ModelSpec::Bounded {
            transmittances: vec![1.0],
        },
        k_grid: vec![1, 2, 4],
        ..SimulationConfig::new(Experiment::Spreading, vec![1.0, 4.0], 200_000, 3)
    };
    for row in run(&cfg)?.rows {
        println!(
            "k={} snr={}: {:.3e} vs {:.3e} (z {:+.2})",
            row.k.unwrap_or(1),
            row.snr,
            row.empirical_p,
            row.analytic_p,
            row.z_score
        );
    }
    Ok(())
}
