//! Distribution-level validation: density oracles by quadrature and
//! Monte-Carlo cross-checks of the analytic SNR statistics.

mod common;

use common::{adaptive_simpson, ks_distance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riscalc_core::channel::{self, db_to_linear, GlobalConfig, RisLinkConfig};
use riscalc_core::montecarlo::{self, McRun};
use riscalc_core::snr_stats::{self, Scenario};

fn link(m1: f64, m2: f64, o1: f64, o2: f64, n: u32) -> RisLinkConfig {
    RisLinkConfig {
        n_elements: n,
        m1,
        m2,
        omega1: o1,
        omega2: o2,
        d1_m: 5.0,
        d2_m: 5.0,
        g1_db: 5.0,
        g2_db: 5.0,
        efficiency: 1.0,
    }
}

fn global() -> GlobalConfig {
    GlobalConfig {
        carrier_frequency_hz: 2.4e9,
        outage_threshold_linear: 1.0,
        avg_snr_grid_db: (0..31).map(|i| 60.0 + 2.0 * i as f64).collect(),
    }
}

#[test]
fn product_moment_matches_monte_carlo_mean() {
    let l = link(2.0, 3.0, 1.5, 0.8, 1);
    let analytic = channel::product_moment(&l, 1.0);
    let second = channel::product_moment(&l, 2.0);
    let var = second - analytic * analytic;

    let mut rng = ChaCha8Rng::seed_from_u64(1_000_003);
    let trials = 10_000_000u64;
    let mut sum = 0.0;
    for _ in 0..trials {
        let a = montecarlo::sample_nakagami(l.m1, l.omega1, &mut rng);
        let b = montecarlo::sample_nakagami(l.m2, l.omega2, &mut rng);
        sum += a * b;
    }
    let mean = sum / trials as f64;
    let sigma = (var / trials as f64).sqrt();
    assert!(
        (mean - analytic).abs() <= 3.0 * sigma,
        "MC mean {mean} vs analytic {analytic} (3 sigma = {:.3e})",
        3.0 * sigma
    );
}

#[test]
fn product_pdf_normalizes_and_reproduces_first_moment() {
    for l in [link(1.0, 1.0, 1.0, 1.0, 1), link(2.5, 1.3, 0.7, 1.9, 1)] {
        let pdf = |v: f64| if v <= 0.0 { 0.0 } else { channel::product_pdf(&l, v).unwrap() };
        let mass = adaptive_simpson(&pdf, 0.0, 60.0, 1e-10);
        assert!((mass - 1.0).abs() <= 1e-6, "density mass {mass}");

        let first = adaptive_simpson(&|v| v * pdf(v), 0.0, 60.0, 1e-10);
        let analytic = channel::product_moment(&l, 1.0);
        assert!(
            (first - analytic).abs() <= 1e-8 * analytic,
            "first moment {first} vs {analytic}"
        );
    }
}

#[test]
fn product_samples_pass_ks_against_density() {
    let l = link(1.0, 1.0, 1.0, 1.0, 1);
    let n = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(20_24);
    let mut samples: Vec<f64> = (0..n)
        .map(|_| {
            montecarlo::sample_nakagami(1.0, 1.0, &mut rng)
                * montecarlo::sample_nakagami(1.0, 1.0, &mut rng)
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // CDF of the product density on a fine grid, then linear interpolation.
    let grid_n = 4000;
    let top = samples[n - 1] * 1.01;
    let step = top / grid_n as f64;
    let mut cdf_grid = vec![0.0f64; grid_n + 1];
    for i in 0..grid_n {
        let a = i as f64 * step;
        let b = a + step;
        let seg = adaptive_simpson(
            &|v: f64| if v <= 0.0 { 0.0 } else { channel::product_pdf(&l, v).unwrap() },
            a,
            b,
            1e-9,
        );
        cdf_grid[i + 1] = cdf_grid[i] + seg;
    }
    let cdf = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let pos = (x / step).min(grid_n as f64 - 1e-9);
        let i = pos as usize;
        let frac = pos - i as f64;
        (cdf_grid[i] + frac * (cdf_grid[i + 1] - cdf_grid[i])).min(1.0)
    };

    let d = ks_distance(&samples, cdf);
    let critical_1pct = 1.628 / (n as f64).sqrt();
    assert!(d < critical_1pct, "KS distance {d:.5e} >= critical {critical_1pct:.5e}");
}

#[test]
fn snr_pdf_normalizes() {
    let scn = Scenario::new(global(), vec![link(1.0, 1.0, 1.0, 1.0, 5)]).unwrap();
    let (fit, pl) = (&scn.fits()[0], scn.path_losses()[0]);
    let snr = db_to_linear(90.0);

    let mut hi = 1.0;
    while snr_stats::snr_cdf(fit, pl, snr, hi) < 1.0 - 1e-10 {
        hi *= 2.0;
    }
    // γ = u^2 removes the γ^{-1/2} factor at the origin.
    let mass = adaptive_simpson(
        &|u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                2.0 * u * snr_stats::snr_pdf(fit, pl, snr, u * u).unwrap()
            }
        },
        0.0,
        hi.sqrt(),
        1e-9,
    );
    assert!((mass - 1.0).abs() <= 1e-6, "SNR density mass {mass}");
}

#[test]
fn selection_pdf_integrates_to_selection_cdf() {
    let scn = Scenario::new(global(), vec![link(1.0, 1.0, 1.0, 1.0, 5); 3]).unwrap();
    let snr = db_to_linear(80.0);
    for &gamma in &[0.5f64, 2.0, 10.0] {
        let integral = adaptive_simpson(
            &|u: f64| {
                if u <= 0.0 {
                    0.0
                } else {
                    2.0 * u * snr_stats::selection_pdf(&scn, snr, u * u).unwrap()
                }
            },
            0.0,
            gamma.sqrt(),
            1e-9,
        );
        let cdf = snr_stats::selection_cdf(&scn, snr, gamma);
        assert!(
            (integral - cdf).abs() <= 1e-6 * cdf.max(1e-12),
            "∫pdf = {integral} vs CDF {cdf} at γ = {gamma}"
        );
    }
}

#[test]
fn single_surface_cdf_matches_simulation_at_threshold() {
    // The central Gamma-fit quality check: analytic CDF vs one million
    // simulated trials at the outage threshold.
    let scn = Scenario::new(global(), vec![link(1.0, 1.0, 1.0, 1.0, 5)]).unwrap();
    let snr = db_to_linear(90.0);
    let analytic = snr_stats::snr_cdf(&scn.fits()[0], scn.path_losses()[0], snr, 1.0);
    let run = McRun::new(1_000_000, 90_210, 65_536).unwrap();
    let est = montecarlo::empirical_selection_cdf(&scn, snr, &[1.0], &run)[0];
    assert!(
        (est.value - analytic).abs() <= 3.0 * est.std_error,
        "MC {} ± {} vs analytic {}",
        est.value,
        est.std_error,
        analytic
    );
}

#[test]
fn selection_cdf_matches_simulated_maximum() {
    let scn = Scenario::new(global(), vec![link(1.0, 1.0, 1.0, 1.0, 5); 3]).unwrap();
    let run = McRun::new(1_000_000, 777, 65_536).unwrap();
    for &db in &[84.0, 88.0] {
        let snr = db_to_linear(db);
        let analytic = snr_stats::selection_cdf(&scn, snr, 1.0);
        let est = montecarlo::empirical_selection_cdf(&scn, snr, &[1.0], &run)[0];
        assert!(
            (est.value - analytic).abs() <= 3.0 * est.std_error,
            "at {db} dB: MC {} ± {} vs analytic {}",
            est.value,
            est.std_error,
            analytic
        );
    }
}

#[test]
fn empirical_snr_cdf_ks_against_gamma_fit() {
    // Empirical CDF of the single-surface SNR over a 20-point grid against
    // the fitted CDF; quantifies the fit error jointly with sampling noise.
    let scn = Scenario::new(global(), vec![link(1.0, 1.0, 1.0, 1.0, 5)]).unwrap();
    let snr = db_to_linear(90.0);
    let (fit, pl) = (&scn.fits()[0], scn.path_losses()[0]);

    // Grid spanning the distribution: z in [0.5, 7.0] mapped to γ.
    let gammas: Vec<f64> = (0..20)
        .map(|i| {
            let z = 0.5 + 6.5 * i as f64 / 19.0;
            snr / pl * z * z
        })
        .collect();
    let run = McRun::new(1_000_000, 1, 65_536).unwrap();
    let est = montecarlo::empirical_selection_cdf(&scn, snr, &gammas, &run);
    let mut worst = 0.0f64;
    for (e, &g) in est.iter().zip(&gammas) {
        let analytic = snr_stats::snr_cdf(fit, pl, snr, g);
        worst = worst.max((e.value - analytic).abs());
    }
    let critical_1pct = 1.628 / 1e3;
    assert!(
        worst < critical_1pct,
        "max CDF deviation {worst:.5e} >= KS 1% critical {critical_1pct:.5e}"
    );
}
