//! Two-codeword collective detection under Rayleigh gains: empirical error
//! against the product bound for d = 1, 2, 4.

use aqdsim::detection::{difference_matrix, diversity_bound, exhaustive_error_rate, Codebook, GainSource};
use aqdsim::{CircularGaussian, RngStream};

fn main() -> aqdsim::Result<()> {
    let unit = CircularGaussian::new(1.0)?;
    let mut rng = RngStream::new(6, 0).rng();
    println!("{:>2} {:>6} {:>12} {:>12}", "d", "snr", "empirical", "bound");
    for d in [1, 2, 4] {
        let book = Codebook::random(d, 2, &unit, &mut rng)?;
        let diff = difference_matrix(book.get(0), book.get(1))?;
        for snr in [1.0, 4.0, 16.0, 64.0] {
            let count = exhaustive_error_rate(&GainSource::Rayleigh { variance: 1.0 }, &book, 1.0 / snr, 100_000, 7)?;
            println!(
                "{d:>2} {snr:>6} {:>12.3e} {:>12.3e}",
                count.rate(),
                diversity_bound(&diff, snr)?
            );
        }
    }
    Ok(())
}
