//! Monte Carlo experiment engine.
//!
//! Trials are split into fixed-size chunks; chunk `c` of a grid point draws
//! from stream `c` of that point's seed, and per-chunk integer counts are
//! summed in chunk order. Results are therefore identical for any number of
//! worker threads.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Experiment, ModelSpec, SimulationConfig};
use super::report::{ErrorRateReport, Row};
use super::stats::{compare, compare_bound, wilson_interval};
use crate::channel::{draw_gains, ChannelModel, GainModel, SubChannelGain};
use crate::detection::{
    codebook_difference, conditional_pair_error, detection_trial, diversity_bound, single_detection_trial,
    single_error_fading, single_error_fixed, Codebook, Codeword, GainSource, GainVector,
};
use crate::error::{Error, Result};
use crate::estimation::{
    conditional_error, noise_for_snr_hat, pilot_detection_trial, pilot_error_probability, PilotSymbol,
};
use crate::mathcore::{derive_seed, gaussian_tail, CircularGaussian, RngStream};
use crate::multiuser::{compose_output, user_error_bound, user_statistic, UserAllocation, UserChannel};
use crate::spreading::{spread_detection_trial, spread_error_probability, SpreadPlan};

/// Trials per RNG stream.
pub const CHUNK: u64 = 8192;

/// Counts `width` kinds of error over `trials` trials. `trial` adds its
/// outcomes to the counter slice.
pub fn monte_carlo<F>(trials: u64, seed: u64, width: usize, trial: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng, &mut [u64]) -> Result<()> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let per_chunk: Vec<Result<Vec<u64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c).rng();
            let mut counts = vec![0; width];
            let len = CHUNK.min(trials - c * CHUNK);
            for _ in 0..len {
                trial(&mut rng, &mut counts)?;
            }
            Ok(counts)
        })
        .collect();
    let mut total = vec![0; width];
    for counts in per_chunk {
        for (t, c) in total.iter_mut().zip(counts?) {
            *t += c;
        }
    }
    Ok(total)
}

/// Single error-count convenience over [`monte_carlo`].
pub fn count_errors<F>(trials: u64, seed: u64, trial: F) -> Result<u64>
where
    F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
{
    Ok(monte_carlo(trials, seed, 1, |rng, c| {
        c[0] += u64::from(trial(rng)?);
        Ok(())
    })?[0])
}

/// Parameters shared by every row of a point.
struct Point<'a> {
    experiment: String,
    snr: f64,
    convention: &'a str,
    l: Option<usize>,
    k: Option<usize>,
    d: Option<usize>,
    n_codewords: Option<usize>,
}

fn make_row(p: Point<'_>, trials: u64, seed: u64, errors: u64, analytic: f64, reference: &str) -> Row {
    let empirical = errors as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(errors, trials);
    let cmp = if reference.ends_with("-bound") {
        compare_bound(empirical, analytic, trials)
    } else {
        compare(empirical, analytic, trials)
    };
    Row {
        experiment: p.experiment,
        snr: p.snr,
        snr_convention: p.convention.to_string(),
        l: p.l,
        k: p.k,
        d: p.d,
        n_codewords: p.n_codewords,
        trials,
        seed,
        empirical_p: empirical,
        ci_low,
        ci_high,
        analytic_p: analytic,
        analytic_ref: reference.to_string(),
        z_score: cmp.z_score,
    }
}

/// Runs the configured experiment on the global thread pool.
pub fn run(config: &SimulationConfig) -> Result<ErrorRateReport> {
    config.validate()?;
    match config.threads {
        Some(t) => run_with_threads(config, t),
        None => run_inner(config),
    }
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_with_threads(config: &SimulationConfig, threads: usize) -> Result<ErrorRateReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| run_inner(config))
}

fn run_inner(config: &SimulationConfig) -> Result<ErrorRateReport> {
    let master = config.master_seed()?;
    let mut seeds = (0u64..).map(|i| derive_seed(master, i));
    let rows = match config.experiment {
        Experiment::PilotEstimation => pilot_rows(config, &mut seeds)?,
        Experiment::Spreading => spreading_rows(config, &mut seeds)?,
        Experiment::SingleDetection => single_rows(config, &mut seeds)?,
        Experiment::CollectiveDetection => collective_rows(config, &mut seeds)?,
        Experiment::Multiuser => multiuser_rows(config, &mut seeds)?,
        Experiment::Fig3 => fig3_rows(config, &mut seeds)?,
    };
    Ok(ErrorRateReport { rows })
}

/// The comparison curves: pilot detection over `l` Rayleigh sub-channels of
/// variance `1/l`, spreading with `k` repetitions over a unit gain, and the
/// large-`l` limit `Q(sqrt SNR)`. All SNRs are complex SNRs.
pub fn sweep_figure3(config: &SimulationConfig) -> Result<ErrorRateReport> {
    let cfg = SimulationConfig {
        experiment: Experiment::Fig3,
        ..config.clone()
    };
    run(&cfg)
}

type Seeds<'a> = &'a mut dyn Iterator<Item = u64>;

fn pilot_point(model: &ModelSpec, l: usize, snr_hat: f64, trials: u64, seed: u64) -> Result<(u64, f64, &'static str)> {
    let pilot = PilotSymbol::new(Complex64::new(1.0, 0.0))?;
    let noise = noise_for_snr_hat(&pilot, snr_hat)?;
    let channel = ChannelModel::all_good(model.gain_model(l)?, noise, l)?;
    let errors = count_errors(trials, seed, |rng| Ok(pilot_detection_trial(&channel, &pilot, rng)))?;
    let (analytic, reference) = match model {
        ModelSpec::Rayleigh { variance } => (pilot_error_probability(l as u32, variance * snr_hat)?, "pilot-rayleigh"),
        ModelSpec::Bounded { .. } => {
            let energy: f64 = model.transmittances(l)?.iter().map(|t| t * t).sum();
            (conditional_error(energy, snr_hat)?, "pilot-fixed")
        }
    };
    Ok((errors, analytic, reference))
}

fn pilot_rows(config: &SimulationConfig, seeds: Seeds<'_>) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &l in &config.l_grid {
        for &snr_hat in &config.snr_grid {
            let seed = seeds.next().expect("infinite");
            let (errors, analytic, reference) = pilot_point(&config.model, l, snr_hat, config.trials, seed)?;
            let point = Point {
                experiment: Experiment::PilotEstimation.name().into(),
                snr: snr_hat,
                convention: "snr_hat",
                l: Some(l),
                k: None,
                d: None,
                n_codewords: None,
            };
            rows.push(make_row(point, config.trials, seed, errors, analytic, reference));
        }
    }
    Ok(rows)
}

/// `l` good positions spread evenly over `n`.
fn spaced_indices(n: usize, l: usize) -> Vec<usize> {
    (0..l).map(|i| i * n / l).collect()
}

fn spread_point(
    model: &ModelSpec,
    n: usize,
    l: usize,
    k: usize,
    snr: f64,
    trials: u64,
    seed: u64,
) -> Result<(u64, f64, &'static str)> {
    let good = spaced_indices(n, l);
    let plan = SpreadPlan::new(n, k, good.clone())?;
    let q = vec![Complex64::new(1.0, 0.0); plan.g()];
    // unit pilots, so upsilon = 1 and the noise variance is 1 / SNR
    let noise = CircularGaussian::new(1.0 / snr)?;
    let channel = ChannelModel::new(model.gain_model(n)?, noise, n, good.clone())?;
    let errors = count_errors(trials, seed, |rng| spread_detection_trial(&plan, &q, &channel, rng))?;
    let (analytic, reference) = match model {
        ModelSpec::Rayleigh { variance } => (
            pilot_error_probability(l as u32, k as f64 * variance * snr / 2.0)?,
            "spread-rayleigh",
        ),
        ModelSpec::Bounded { .. } => {
            let t = model.transmittances(n)?;
            let energy: f64 = good.iter().map(|&i| t[i] * t[i]).sum();
            (spread_error_probability(k, snr * energy)?, "spread-q")
        }
    };
    Ok((errors, analytic, reference))
}

fn spreading_rows(config: &SimulationConfig, seeds: Seeds<'_>) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &l in &config.l_grid {
        let n = config.n.unwrap_or(l);
        for &k in &config.k_grid {
            for &snr in &config.snr_grid {
                let seed = seeds.next().expect("infinite");
                let (errors, analytic, reference) = spread_point(&config.model, n, l, k, snr, config.trials, seed)?;
                let point = Point {
                    experiment: Experiment::Spreading.name().into(),
                    snr,
                    convention: "snr",
                    l: Some(l),
                    k: Some(k),
                    d: None,
                    n_codewords: None,
                };
                rows.push(make_row(point, config.trials, seed, errors, analytic, reference));
            }
        }
    }
    Ok(rows)
}

/// Unit-energy symbol with equal quadratures.
fn single_amplitude() -> Complex64 {
    Complex64::new(1.0, 1.0) * std::f64::consts::FRAC_1_SQRT_2
}

fn single_rows(config: &SimulationConfig, seeds: Seeds<'_>) -> Result<Vec<Row>> {
    let measurement = config.measurement.0;
    let a = single_amplitude();
    let het = matches!(measurement, crate::detection::Measurement::Heterodyne { .. });
    let mut rows = Vec::new();
    for &l in &config.l_grid {
        for &snr in &config.snr_grid {
            let seed = seeds.next().expect("infinite");
            let noise_var = 1.0 / snr;
            let channel = ChannelModel::all_good(config.model.gain_model(l)?, CircularGaussian::new(0.0)?, l)?;
            let errors = count_errors(config.trials, seed, |rng| {
                let gains = draw_gains(&channel, rng);
                single_detection_trial(&gains, a, measurement, noise_var, rng)
            })?;
            let (analytic, reference) = match &config.model {
                ModelSpec::Rayleigh { variance } => (
                    single_error_fading(l, *variance, a, measurement, noise_var)?,
                    if het {
                        "single-het-rayleigh"
                    } else {
                        "single-hom-rayleigh"
                    },
                ),
                ModelSpec::Bounded { .. } => {
                    let gains: Vec<SubChannelGain> = match channel.kind() {
                        GainModel::Bounded { gains } => gains.clone(),
                        GainModel::Fading { .. } => unreachable!("bounded model"),
                    };
                    (
                        single_error_fixed(&gains, a, measurement, noise_var)?,
                        if het { "single-het-fixed" } else { "single-hom-fixed" },
                    )
                }
            };
            let point = Point {
                experiment: Experiment::SingleDetection.name().into(),
                snr,
                convention: "snr",
                l: Some(l),
                k: None,
                d: None,
                n_codewords: None,
            };
            rows.push(make_row(point, config.trials, seed, errors, analytic, reference));
        }
    }
    Ok(rows)
}

fn fixed_gains(model: &ModelSpec, d: usize) -> Result<GainVector> {
    Ok(GainVector::from_amplitudes(
        &model
            .transmittances(d)?
            .into_iter()
            .map(|t| SubChannelGain::bounded(t).map(|g| g.0))
            .collect::<Result<Vec<_>>>()?,
    ))
}

fn gain_source(model: &ModelSpec, d: usize) -> Result<GainSource> {
    Ok(match model {
        ModelSpec::Rayleigh { variance } => GainSource::Rayleigh { variance: *variance },
        ModelSpec::Bounded { .. } => GainSource::Fixed {
            gains: fixed_gains(model, d)?,
        },
    })
}

/// Unit-variance random codebook; its seed is shared by every SNR point.
fn codebook_for(config: &SimulationConfig, d: usize, n: usize, salt: u64) -> Result<Codebook> {
    let seed = config
        .codeword_seed
        .unwrap_or_else(|| derive_seed(config.seed.unwrap_or_default(), 0xc0de_0000 + salt));
    Codebook::random(
        d,
        n,
        &CircularGaussian::new(1.0)?,
        &mut RngStream::new(seed, d as u64).rng(),
    )
}

/// Exact pairwise error for fixed gains, product bound for Rayleigh gains,
/// and their union over all pairs when `N > 2`.
fn codebook_analytic(model: &ModelSpec, book: &Codebook, noise_var: f64, snr: f64) -> Result<(f64, &'static str)> {
    let n = book.len();
    let pair = |a: usize, b: usize| -> Result<f64> {
        let diff = codebook_difference(book, a, b)?;
        match model {
            ModelSpec::Rayleigh { variance } => diversity_bound(&diff, variance * snr),
            ModelSpec::Bounded { .. } => conditional_pair_error(&fixed_gains(model, book.dim())?, &diff, noise_var),
        }
    };
    if n == 2 {
        let p = pair(0, 1)?;
        return Ok(match model {
            ModelSpec::Rayleigh { .. } => (p, "diversity-bound"),
            ModelSpec::Bounded { .. } => (p, "pair-real"),
        });
    }
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                sum += pair(a, b)?;
            }
        }
    }
    let union = (sum / n as f64).min(1.0);
    Ok(match model {
        ModelSpec::Rayleigh { .. } => (union, "union-diversity-bound"),
        ModelSpec::Bounded { .. } => (union, "union-pair-bound"),
    })
}

fn collective_rows(config: &SimulationConfig, seeds: Seeds<'_>) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &d in &config.d_grid {
        let book = codebook_for(config, d, config.n_codewords, 0)?;
        let source = gain_source(&config.model, d)?;
        for &snr in &config.snr_grid {
            let seed = seeds.next().expect("infinite");
            let noise_var = 1.0 / snr;
            let noise = CircularGaussian::new(noise_var)?;
            let errors = count_errors(config.trials, seed, |rng| detection_trial(&source, &book, &noise, rng))?;
            let (analytic, reference) = codebook_analytic(&config.model, &book, noise_var, snr)?;
            let point = Point {
                experiment: Experiment::CollectiveDetection.name().into(),
                snr,
                convention: "snr",
                l: None,
                k: None,
                d: Some(d),
                n_codewords: Some(book.len()),
            };
            rows.push(make_row(point, config.trials, seed, errors, analytic, reference));
        }
    }
    Ok(rows)
}

fn multiuser_rows(config: &SimulationConfig, seeds: Seeds<'_>) -> Result<Vec<Row>> {
    let alloc = UserAllocation::new(1, config.rk.clone())?;
    let books: Vec<Codebook> = alloc
        .dims()
        .iter()
        .enumerate()
        .map(|(u, &r)| codebook_for(config, r, 2, 1 + u as u64))
        .collect::<Result<_>>()?;
    let sources: Vec<GainSource> = alloc
        .dims()
        .iter()
        .map(|&r| gain_source(&config.model, r))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &snr in &config.snr_grid {
        let seed = seeds.next().expect("infinite");
        let noise_var = 1.0 / snr;
        let counts = monte_carlo(config.trials, seed, alloc.k_out(), |rng, counts| {
            let mut sent = Vec::with_capacity(alloc.k_out());
            let mut inputs: Vec<Codeword> = Vec::with_capacity(alloc.k_out());
            let mut channels = Vec::with_capacity(alloc.k_out());
            for (u, (&r, book)) in alloc.dims().iter().zip(&books).enumerate() {
                let which = usize::from(rand::Rng::random::<bool>(rng));
                sent.push(which);
                inputs.push(book.get(which).clone());
                channels.push(UserChannel {
                    user: u,
                    gains: sources[u].draw(r, rng)?,
                    snr,
                    noise_var,
                });
            }
            let z = compose_output(&alloc, &inputs, &channels, rng)?;
            for u in 0..alloc.k_out() {
                let block = alloc.block(&z, u)?;
                let pair = (books[u].get(0), books[u].get(1));
                let decision = user_statistic(block, &channels[u], pair)?;
                counts[u] += u64::from(decision.decided_index != sent[u]);
            }
            Ok(())
        })?;
        for (u, (&r, book)) in alloc.dims().iter().zip(&books).enumerate() {
            let diff = codebook_difference(book, 0, 1)?;
            let (analytic, reference) = match &config.model {
                ModelSpec::Rayleigh { variance } => (user_error_bound(&diff, variance * snr, r)?, "user-bound"),
                ModelSpec::Bounded { .. } => {
                    let gains = fixed_gains(&config.model, alloc.d())?;
                    let block = GainVector::new(gains.entries()[alloc.block_range(u)?].to_vec());
                    (conditional_pair_error(&block, &diff, noise_var)?, "pair-real")
                }
            };
            let point = Point {
                experiment: format!("multiuser-u{u}"),
                snr,
                convention: "snr",
                l: None,
                k: None,
                d: Some(r),
                n_codewords: Some(2),
            };
            rows.push(make_row(point, config.trials, seed, counts[u], analytic, reference));
        }
    }
    Ok(rows)
}

fn fig3_rows(config: &SimulationConfig, seeds: Seeds<'_>) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let point = |name: &str, snr: f64, l: Option<usize>, k: Option<usize>| Point {
        experiment: name.to_string(),
        snr,
        convention: "snr",
        l,
        k,
        d: None,
        n_codewords: None,
    };
    for &l in &config.l_grid {
        let model = ModelSpec::Rayleigh {
            variance: 1.0 / l as f64,
        };
        for &snr in &config.snr_grid {
            let seed = seeds.next().expect("infinite");
            let (errors, analytic, reference) = pilot_point(&model, l, snr / 2.0, config.trials, seed)?;
            rows.push(make_row(
                point("fig3-pilot", snr, Some(l), None),
                config.trials,
                seed,
                errors,
                analytic,
                reference,
            ));
        }
    }
    let unit = ModelSpec::Bounded {
        transmittances: vec![1.0],
    };
    for &k in &config.k_grid {
        for &snr in &config.snr_grid {
            let seed = seeds.next().expect("infinite");
            let (errors, analytic, reference) = spread_point(&unit, 1, 1, k, snr, config.trials, seed)?;
            rows.push(make_row(
                point("fig3-spread", snr, Some(1), Some(k)),
                config.trials,
                seed,
                errors,
                analytic,
                reference,
            ));
        }
    }
    for &snr in &config.snr_grid {
        let seed = seeds.next().expect("infinite");
        let (errors, _, _) = spread_point(&unit, 1, 1, 1, snr, config.trials, seed)?;
        let limit = gaussian_tail(snr.sqrt());
        rows.push(make_row(
            point("fig3-limit", snr, None, None),
            config.trials,
            seed,
            errors,
            limit,
            "limit-q",
        ));
    }
    Ok(rows)
}
