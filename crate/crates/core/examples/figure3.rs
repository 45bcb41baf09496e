//! Pilot, spreading and limit error curves on one SNR grid, written as CSV.

use aqdsim::harness::{sweep_figure3, Experiment, SimulationConfig};

fn main() -> aqdsim::Result<()> {
    let grid = (0..=10).map(|i| 10f64.powf(i as f64 / 5.0)).collect();
    let cfg = SimulationConfig {
        l_grid: vec![1, 2, 4, 8],
        k_grid: vec![1, 2],
        ..SimulationConfig::new(Experiment::Fig3, grid, 20_000, 9)
    };
    let report = sweep_figure3(&cfg)?;
    report.write_csv(std::io::stdout())?;
    Ok(())
}
