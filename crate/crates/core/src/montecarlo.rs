//! Monte Carlo oracle for the relay chain.
//!
//! Samples are generated in fixed chunks of [`CHUNK_SIZE`]. Chunk `i` draws
//! from `ChaCha8Rng::seed_from_u64(master_seed)` switched to stream `i`
//! (`set_stream(i)`), so every chunk has its own 2⁶⁴-long keystream under a
//! key fixed by the master seed. Per-chunk partial sums are merged in chunk
//! order, which makes every estimate a pure function of
//! (scenario, sample_count, master_seed), whatever the worker count.

use crate::analytic::{e2e_snr, outage_threshold, RelayScenario, SnrMode};
use crate::channel::TurbulenceParams;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: u64 = 65_536;

/// Default sample count per evaluation point.
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub scenario: RelayScenario,
    pub sample_count: u64,
    pub master_seed: u64,
    pub worker_count: usize,
}

impl SimConfig {
    pub fn new(scenario: RelayScenario, sample_count: u64, master_seed: u64) -> Self {
        Self {
            scenario,
            sample_count,
            master_seed,
            worker_count: default_workers(),
        }
    }

    pub fn with_workers(mut self, worker_count: usize) -> Self {
        self.worker_count = worker_count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.sample_count == 0 {
            return Err(Error::invalid("sample_count must be at least 1"));
        }
        if self.worker_count == 0 {
            return Err(Error::invalid("worker_count must be at least 1"));
        }
        Ok(())
    }
}

/// Available parallelism, or 1 when it cannot be queried.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub estimate: f64,
    pub std_error: f64,
    pub n: u64,
}

impl EstimateWithError {
    /// Binomial proportion with SE √(p̂(1−p̂)/n).
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    /// Sample mean with SE s/√n from a running sum and sum of squares.
    pub fn mean(sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            estimate: mean,
            std_error: (var / nf).sqrt(),
            n,
        }
    }

    /// |estimate − value| in units of the standard error, with the SE
    /// floored at `floor` (used when the estimate has no variation).
    pub fn z_score(&self, value: f64, floor: f64) -> f64 {
        (self.estimate - value).abs() / self.std_error.max(floor)
    }
}

/// Random stream for chunk `index` under `master_seed`.
pub fn chunk_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Exact Gamma-Gamma sampler: h = X·Y with X ~ Γ(α, 1/α), Y ~ Γ(β, 1/β).
#[derive(Debug, Clone, Copy)]
pub struct FadingSampler {
    small: Gamma<f64>,
    large: Gamma<f64>,
}

impl FadingSampler {
    pub fn new(params: &TurbulenceParams) -> Result<Self> {
        params.validate()?;
        let g = |shape: f64| {
            Gamma::new(shape, 1.0 / shape).map_err(|e| Error::invalid(format!("gamma shape {shape}: {e}")))
        };
        Ok(Self {
            small: g(params.alpha)?,
            large: g(params.beta)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.small.sample(rng) * self.large.sample(rng)
    }
}

/// One Gamma-Gamma fading draw.
pub fn sample_gg_fading<R: Rng + ?Sized>(params: &TurbulenceParams, rng: &mut R) -> Result<f64> {
    Ok(FadingSampler::new(params)?.sample(rng))
}

/// Hop SNRs of one joint draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayDraw {
    pub g_sr: f64,
    pub g_rd1: f64,
    pub g_rd2: f64,
}

impl RelayDraw {
    /// SC output of the two R→D branches.
    pub fn g_rd(&self) -> f64 {
        self.g_rd1.max(self.g_rd2)
    }

    pub fn destination(&self, mode: SnrMode) -> f64 {
        e2e_snr(self.g_sr, self.g_rd(), mode)
    }
}

/// Samples the three independent hops of a scenario.
#[derive(Debug, Clone, Copy)]
pub struct RelaySampler {
    sr: FadingSampler,
    rd: FadingSampler,
    avg_sr: f64,
    avg_rd: f64,
}

impl RelaySampler {
    pub fn new(scen: &RelayScenario) -> Result<Self> {
        scen.validate()?;
        Ok(Self {
            sr: FadingSampler::new(&scen.sr_turbulence)?,
            rd: FadingSampler::new(&scen.rd_turbulence)?,
            avg_sr: scen.avg_sr.value(),
            avg_rd: scen.avg_rd.value(),
        })
    }

    /// Draw order within a sample is h_sr, h_rd,1, h_rd,2.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> RelayDraw {
        let h_sr = self.sr.sample(rng);
        let h1 = self.rd.sample(rng);
        let h2 = self.rd.sample(rng);
        RelayDraw {
            g_sr: self.avg_sr * h_sr * h_sr,
            g_rd1: self.avg_rd * h1 * h1,
            g_rd2: self.avg_rd * h2 * h2,
        }
    }
}

/// One destination-SNR draw under `mode`.
pub fn simulate_destination_snr<R: Rng + ?Sized>(scen: &RelayScenario, rng: &mut R, mode: SnrMode) -> Result<f64> {
    Ok(RelaySampler::new(scen)?.draw(rng).destination(mode))
}

/// Run `per_chunk` on every chunk in parallel and return results in chunk order.
fn run_chunks<T, F>(sample_count: u64, master_seed: u64, workers: usize, per_chunk: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = sample_count.div_ceil(CHUNK_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let len = CHUNK_SIZE.min(sample_count - i * CHUNK_SIZE);
                let mut rng = chunk_rng(master_seed, i);
                per_chunk(&mut rng, len)
            })
            .collect()
    }))
}

/// Per-mode tallies from one pass over the samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: SnrMode,
    /// Outage estimate at each requested threshold.
    pub outage: Vec<EstimateWithError>,
    /// log₂(1 + γ_D) sample mean.
    pub capacity: EstimateWithError,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    hits: Vec<u64>,
    sum: f64,
    sum_sq: f64,
}

/// Outage at every threshold and capacity for every mode, sharing one set
/// of joint draws.
pub fn simulate(config: &SimConfig, thresholds: &[f64], modes: &[SnrMode]) -> Result<Vec<ModeSummary>> {
    config.validate()?;
    let sampler = RelaySampler::new(&config.scenario)?;
    let partials = run_chunks(config.sample_count, config.master_seed, config.worker_count, |rng, len| {
        let mut tallies = vec![
            Tally {
                hits: vec![0; thresholds.len()],
                ..Default::default()
            };
            modes.len()
        ];
        for _ in 0..len {
            let draw = sampler.draw(rng);
            for (t, &mode) in tallies.iter_mut().zip(modes) {
                let g = draw.destination(mode);
                for (h, &th) in t.hits.iter_mut().zip(thresholds) {
                    if g <= th {
                        *h += 1;
                    }
                }
                let c = g.ln_1p() / std::f64::consts::LN_2;
                t.sum += c;
                t.sum_sq += c * c;
            }
        }
        tallies
    })?;
    let mut total = vec![
        Tally {
            hits: vec![0; thresholds.len()],
            ..Default::default()
        };
        modes.len()
    ];
    for chunk in partials {
        for (acc, part) in total.iter_mut().zip(chunk) {
            for (a, p) in acc.hits.iter_mut().zip(part.hits) {
                *a += p;
            }
            acc.sum += part.sum;
            acc.sum_sq += part.sum_sq;
        }
    }
    let n = config.sample_count;
    Ok(total
        .into_iter()
        .zip(modes)
        .map(|(t, &mode)| ModeSummary {
            mode,
            outage: t.hits.iter().map(|&h| EstimateWithError::proportion(h, n)).collect(),
            capacity: EstimateWithError::mean(t.sum, t.sum_sq, n),
        })
        .collect())
}

/// P(γ_D ≤ 2^{2R} − 1) with binomial SE.
pub fn estimate_outage(config: &SimConfig, spectral_efficiency: f64, mode: SnrMode) -> Result<EstimateWithError> {
    let th = outage_threshold(spectral_efficiency);
    Ok(simulate(config, &[th], &[mode])?.remove(0).outage[0])
}

/// Sample mean of log₂(1 + γ_D) with CLT SE.
pub fn estimate_capacity(config: &SimConfig, mode: SnrMode) -> Result<EstimateWithError> {
    Ok(simulate(config, &[], &[mode])?.remove(0).capacity)
}

/// Every joint draw, in sample order.
pub fn sample_relay(config: &SimConfig) -> Result<Vec<RelayDraw>> {
    config.validate()?;
    let sampler = RelaySampler::new(&config.scenario)?;
    let parts = run_chunks(config.sample_count, config.master_seed, config.worker_count, |rng, len| {
        (0..len).map(|_| sampler.draw(rng)).collect::<Vec<_>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// `n` fading draws under the chunked seeding scheme.
pub fn sample_fading(params: &TurbulenceParams, n: u64, master_seed: u64, workers: usize) -> Result<Vec<f64>> {
    let sampler = FadingSampler::new(params)?;
    let parts = run_chunks(n, master_seed, workers, |rng, len| {
        (0..len).map(|_| sampler.sample(rng)).collect::<Vec<_>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Kolmogorov–Smirnov distance between sorted samples and their model CDF
/// evaluated at the same points.
pub fn ks_statistic(sorted: &[f64], cdf_at_samples: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    cdf_at_samples
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (f - lo).abs().max((hi - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}
