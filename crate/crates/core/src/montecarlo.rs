//! Ground-truth simulator: samples per-element Nakagami amplitude pairs,
//! forms the element sums Z_k and per-surface SNRs γ_k = (γ̄ / P_{L,k}) Z_k^2
//! under perfect phase alignment, applies max-selection across surfaces, and
//! estimates outage and symbol-error probabilities empirically.
//!
//! # Reproducibility
//!
//! Trials are partitioned into fixed blocks of [`RNG_BLOCK_TRIALS`], and each
//! (block, surface) pair owns its own counter-seeded ChaCha stream. Results
//! are therefore a pure function of (scenario, avg_snr, trials, seed): worker
//! count and work-unit size only change scheduling, never the estimate, and
//! adding a surface to a scenario leaves the draws of the existing surfaces
//! untouched. Per-block partial results are reduced in block order so even
//! floating-point accumulation is bit-stable.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::ModulationScheme;
use crate::numerics::gaussian_q;
use crate::snr_stats::Scenario;

/// Trials per RNG block; the unit of deterministic decomposition.
pub const RNG_BLOCK_TRIALS: u64 = 4096;

/// Stream-id bits reserved for the surface index within a block.
const LINK_STREAM_BITS: u32 = 10;
const MAX_LINKS: usize = 1 << LINK_STREAM_BITS;

/// Size and seeding of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub trials: u64,
    pub seed: u64,
    /// Scheduling granularity hint (trials per work unit); has no effect on
    /// the estimate.
    pub chunk_size: u64,
}

impl McRun {
    pub fn new(trials: u64, seed: u64, chunk_size: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk_size must be at least 1".into()));
        }
        Ok(Self { trials, seed, chunk_size })
    }

    fn n_blocks(&self) -> u64 {
        self.trials.div_ceil(RNG_BLOCK_TRIALS)
    }

    fn block_len(&self, block: u64) -> u64 {
        let start = block * RNG_BLOCK_TRIALS;
        RNG_BLOCK_TRIALS.min(self.trials - start)
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// One Nakagami-m amplitude draw: X = sqrt(G) with G ~ Gamma(m, Ω/m),
/// so that E[X^2] = Ω.
pub fn sample_nakagami<R: Rng + ?Sized>(m: f64, omega: f64, rng: &mut R) -> f64 {
    debug_assert!(m >= 0.5 && omega > 0.0);
    let gamma = Gamma::new(m, omega / m).expect("validated Nakagami parameters");
    gamma.sample(rng).sqrt()
}

struct LinkSampler {
    first_hop: Gamma<f64>,
    second_hop: Gamma<f64>,
    n_elements: u32,
    snr_over_pl: f64,
}

/// Run `visit` on the selected SNR of every trial in one block.
fn visit_block_selected_snr(
    scn: &Scenario,
    avg_snr: f64,
    seed: u64,
    block: u64,
    len: u64,
    mut visit: impl FnMut(f64),
) {
    assert!(scn.k() <= MAX_LINKS, "at most {MAX_LINKS} surfaces per scenario");
    let samplers: Vec<LinkSampler> = scn
        .links()
        .iter()
        .zip(scn.path_losses())
        .map(|(link, &pl)| LinkSampler {
            first_hop: Gamma::new(link.m1, link.omega1 / link.m1).expect("validated link"),
            second_hop: Gamma::new(link.m2, link.omega2 / link.m2).expect("validated link"),
            n_elements: link.n_elements,
            snr_over_pl: avg_snr / pl,
        })
        .collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..scn.k())
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((block << LINK_STREAM_BITS) | k as u64);
            rng
        })
        .collect();

    for _ in 0..len {
        let mut best = 0.0f64;
        for (sampler, rng) in samplers.iter().zip(rngs.iter_mut()) {
            let mut z = 0.0;
            for _ in 0..sampler.n_elements {
                let alpha = sampler.first_hop.sample(rng).sqrt();
                let beta = sampler.second_hop.sample(rng).sqrt();
                z += alpha * beta;
            }
            let snr = sampler.snr_over_pl * z * z;
            if snr > best {
                best = snr;
            }
        }
        visit(best);
    }
}

/// Map every block through `kernel`, in parallel when enabled, collecting
/// results in block order.
fn run_blocks<R, F>(run: &McRun, kernel: F, parallel: bool) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync,
{
    let n_blocks = usize::try_from(run.n_blocks()).expect("block count fits in usize");
    #[cfg(feature = "parallel")]
    if parallel {
        let min_len = run.chunk_size.div_ceil(RNG_BLOCK_TRIALS).max(1) as usize;
        return (0..n_blocks)
            .into_par_iter()
            .with_min_len(min_len)
            .map(|b| kernel(b as u64))
            .collect();
    }
    let _ = parallel;
    (0..n_blocks).map(|b| kernel(b as u64)).collect()
}

fn binomial_estimate(hits: u64, trials: u64) -> McEstimate {
    let value = hits as f64 / trials as f64;
    McEstimate {
        value,
        std_error: (value * (1.0 - value) / trials as f64).sqrt(),
        trials,
    }
}

fn selection_cdf_impl(
    scn: &Scenario,
    avg_snr: f64,
    gammas: &[f64],
    run: &McRun,
    parallel: bool,
) -> Vec<McEstimate> {
    let per_block: Vec<Vec<u64>> = run_blocks(
        run,
        |block| {
            let mut counts = vec![0u64; gammas.len()];
            visit_block_selected_snr(scn, avg_snr, run.seed, block, run.block_len(block), |snr| {
                for (count, &g) in counts.iter_mut().zip(gammas) {
                    if snr <= g {
                        *count += 1;
                    }
                }
            });
            counts
        },
        parallel,
    );
    let mut totals = vec![0u64; gammas.len()];
    for counts in &per_block {
        for (total, &c) in totals.iter_mut().zip(counts) {
            *total += c;
        }
    }
    totals.into_iter().map(|hits| binomial_estimate(hits, run.trials)).collect()
}

/// Empirical CDF of the selected SNR at each grid point: the fraction of
/// trials with max_k γ_k <= γ.
pub fn empirical_selection_cdf(
    scn: &Scenario,
    avg_snr: f64,
    gammas: &[f64],
    run: &McRun,
) -> Vec<McEstimate> {
    selection_cdf_impl(scn, avg_snr, gammas, run, true)
}

/// Sequential reference path of [`empirical_selection_cdf`].
pub fn empirical_selection_cdf_seq(
    scn: &Scenario,
    avg_snr: f64,
    gammas: &[f64],
    run: &McRun,
) -> Vec<McEstimate> {
    selection_cdf_impl(scn, avg_snr, gammas, run, false)
}

/// Empirical outage probability at the scenario's configured threshold.
pub fn empirical_outage(scn: &Scenario, avg_snr: f64, run: &McRun) -> McEstimate {
    empirical_selection_cdf(scn, avg_snr, &[scn.outage_threshold()], run)[0]
}

/// Sequential reference path of [`empirical_outage`].
pub fn empirical_outage_seq(scn: &Scenario, avg_snr: f64, run: &McRun) -> McEstimate {
    empirical_selection_cdf_seq(scn, avg_snr, &[scn.outage_threshold()], run)[0]
}

fn asep_impl(
    scn: &Scenario,
    modulation: &ModulationScheme,
    avg_snr: f64,
    run: &McRun,
    parallel: bool,
) -> McEstimate {
    let (p, q) = (modulation.p, modulation.q);
    let per_block: Vec<(f64, f64)> = run_blocks(
        run,
        |block| {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            visit_block_selected_snr(scn, avg_snr, run.seed, block, run.block_len(block), |snr| {
                let y = p * gaussian_q((2.0 * q * snr).sqrt());
                sum += y;
                sum_sq += y * y;
            });
            (sum, sum_sq)
        },
        parallel,
    );
    // Fold in block order so the reduction is bit-stable.
    let (sum, sum_sq) = per_block.iter().fold((0.0, 0.0), |(s, s2), &(bs, bs2)| (s + bs, s2 + bs2));
    let n = run.trials as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    McEstimate { value: mean, std_error: (var / n).sqrt(), trials: run.trials }
}

/// Monte-Carlo mean of p·Q(sqrt(2 q γ*)), an unbiased estimate of the
/// average symbol error probability.
pub fn empirical_asep(
    scn: &Scenario,
    modulation: &ModulationScheme,
    avg_snr: f64,
    run: &McRun,
) -> McEstimate {
    asep_impl(scn, modulation, avg_snr, run, true)
}

/// Sequential reference path of [`empirical_asep`].
pub fn empirical_asep_seq(
    scn: &Scenario,
    modulation: &ModulationScheme,
    avg_snr: f64,
    run: &McRun,
) -> McEstimate {
    asep_impl(scn, modulation, avg_snr, run, false)
}
