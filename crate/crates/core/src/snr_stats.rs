//! Distribution of the end-to-end SNR per reflecting surface and of the
//! selection-combined SNR over all surfaces.
//!
//! With Z the Gamma-fitted element sum and P_L the path loss, the per-surface
//! SNR is γ = (γ̄ / P_L) Z^2, so
//!
//!   F_γ(γ) = P(a, sqrt(P_L γ / (γ̄ b^2)))
//!
//! and the selected maximum over independent surfaces has CDF equal to the
//! product of the per-surface CDFs. That product is the reference evaluation
//! path everywhere; the expansion of P(a, x) into the alternating series
//! Σ (-1)^n x^{a+n} / (n! (a+n) Γ(a)) is kept as a cross-check and because
//! the symbol-error series needs its truncated form.

use crate::channel::{self, GammaFit, GlobalConfig, RisLinkConfig};
use crate::error::{Error, Result};
use crate::numerics::{lgamma, reg_lower_inc_gamma};

/// A validated multi-surface system with cached per-surface fit and path loss.
#[derive(Debug, Clone)]
pub struct Scenario {
    global: GlobalConfig,
    links: Vec<RisLinkConfig>,
    fits: Vec<GammaFit>,
    path_losses: Vec<f64>,
}

impl Scenario {
    pub fn new(global: GlobalConfig, links: Vec<RisLinkConfig>) -> Result<Self> {
        global.validate()?;
        if links.is_empty() {
            return Err(Error::InvalidConfig("at least one reflecting surface required".into()));
        }
        for link in &links {
            link.validate()?;
        }
        let fits = links.iter().map(channel::fit_gamma).collect::<Result<Vec<_>>>()?;
        let path_losses = links.iter().map(|l| channel::path_loss(l, &global)).collect();
        Ok(Self { global, links, fits, path_losses })
    }

    pub fn k(&self) -> usize {
        self.links.len()
    }

    pub fn global(&self) -> &GlobalConfig {
        &self.global
    }

    pub fn links(&self) -> &[RisLinkConfig] {
        &self.links
    }

    pub fn fits(&self) -> &[GammaFit] {
        &self.fits
    }

    pub fn path_losses(&self) -> &[f64] {
        &self.path_losses
    }

    /// Outage threshold as a linear power ratio.
    pub fn outage_threshold(&self) -> f64 {
        self.global.outage_threshold_linear
    }
}

/// Truncation control for the alternating-series evaluation paths.
///
/// `terms_per_index` terms are kept per summation index; `tail_bound` is the
/// largest relative error (truncation remainder plus floating-point
/// cancellation) the caller accepts before the evaluation refuses.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTruncation {
    pub terms_per_index: usize,
    pub tail_bound: f64,
}

impl SeriesTruncation {
    pub fn new(terms_per_index: usize, tail_bound: f64) -> Result<Self> {
        if terms_per_index == 0 {
            return Err(Error::InvalidConfig("terms_per_index must be at least 1".into()));
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tail_bound must be nonnegative, got {tail_bound}"
            )));
        }
        Ok(Self { terms_per_index, tail_bound })
    }
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self { terms_per_index: 30, tail_bound: 1e-8 }
    }
}

/// Argument of the incomplete-gamma CDF: x = sqrt(P_L γ / (γ̄ b^2)).
fn cdf_argument(fit: &GammaFit, path_loss: f64, avg_snr: f64, gamma: f64) -> f64 {
    (path_loss * gamma / avg_snr).sqrt() / fit.b
}

/// CDF of the per-surface end-to-end SNR, F(γ) = P(a, sqrt(P_L γ / (γ̄ b^2))).
pub fn snr_cdf(fit: &GammaFit, path_loss: f64, avg_snr: f64, gamma: f64) -> f64 {
    debug_assert!(avg_snr > 0.0 && path_loss > 0.0);
    if gamma <= 0.0 {
        return 0.0;
    }
    let x = cdf_argument(fit, path_loss, avg_snr, gamma);
    // Converges for every finite argument with the generous default budget.
    reg_lower_inc_gamma(fit.a, x).unwrap_or(f64::NAN)
}

/// Density of the per-surface end-to-end SNR.
pub fn snr_pdf(fit: &GammaFit, path_loss: f64, avg_snr: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain {
            func: "snr_pdf",
            msg: format!("requires gamma > 0, got {gamma}"),
        });
    }
    // f(γ) = (P_L γ / γ̄)^{(a-1)/2} exp(-x) / (2 Γ(a) b^a sqrt(γ̄ γ / P_L)),
    // x as in the CDF; assembled in log space.
    let x = cdf_argument(fit, path_loss, avg_snr, gamma);
    let ln_ratio = path_loss.ln() + gamma.ln() - avg_snr.ln();
    let ln_f = 0.5 * (fit.a - 1.0) * ln_ratio - x
        - std::f64::consts::LN_2
        - lgamma(fit.a)
        - fit.a * fit.b.ln()
        - 0.5 * (avg_snr.ln() + gamma.ln() - path_loss.ln());
    Ok(ln_f.exp())
}

/// CDF of the selection-combined SNR as the product of per-surface CDFs.
/// This is the reference evaluation path.
pub fn selection_cdf(scn: &Scenario, avg_snr: f64, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    scn.fits
        .iter()
        .zip(&scn.path_losses)
        .map(|(fit, &pl)| snr_cdf(fit, pl, avg_snr, gamma))
        .product()
}

/// Truncated-series evaluation of the selection CDF.
///
/// The rectangular multi-index truncation (T terms per index) of the joint
/// expansion factors exactly into the product of per-surface truncated
/// series, which is how it is evaluated here. Refuses when the truncation
/// remainder or floating-point cancellation exceeds `trunc.tail_bound`
/// relative to the result.
pub fn selection_cdf_series(
    scn: &Scenario,
    avg_snr: f64,
    gamma: f64,
    trunc: &SeriesTruncation,
) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::Domain {
            func: "selection_cdf_series",
            msg: format!("requires gamma >= 0, got {gamma}"),
        });
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let t = trunc.terms_per_index;
    let mut value = 1.0f64;
    let mut rel_err = 0.0f64;
    for (fit, &pl) in scn.fits.iter().zip(&scn.path_losses) {
        let x = cdf_argument(fit, pl, avg_snr, gamma);
        // Alternating terms grow before they decay once x outruns the index
        // budget; refuse instead of summing garbage.
        if x > fit.a + t as f64 / 2.0 {
            return Err(Error::SeriesInadmissible(format!(
                "argument {x:.4} exceeds a + T/2 = {:.4}",
                fit.a + t as f64 / 2.0
            )));
        }
        let (sum, abs_sum, first_dropped) = single_cdf_series(fit.a, x, t);
        if !(sum > 0.0) {
            return Err(Error::SeriesInadmissible(format!(
                "cancellation destroyed the partial sum (x = {x:.4}, a = {:.4})",
                fit.a
            )));
        }
        // Relative truncation remainder plus roundoff amplification.
        rel_err += first_dropped / sum + f64::EPSILON * abs_sum / sum;
        value *= sum;
    }
    if rel_err > trunc.tail_bound {
        return Err(Error::SeriesInadmissible(format!(
            "estimated relative error {rel_err:.3e} exceeds tail bound {:.3e}",
            trunc.tail_bound
        )));
    }
    Ok(value)
}

/// Truncated Σ_{n<T} (-1)^n x^{a+n} / (n! (a+n) Γ(a)) with its absolute-term
/// sum and the magnitude of the first dropped term.
fn single_cdf_series(a: f64, x: f64, t: usize) -> (f64, f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let lga = lgamma(a);
    let ln_x = x.ln();
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut ln_fact = 0.0; // ln n!
    for n in 0..t {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let an = a + n as f64;
        let mag = (an * ln_x - ln_fact - an.ln() - lga).exp();
        abs_sum += mag;
        sum += if n % 2 == 0 { mag } else { -mag };
    }
    let ln_fact_t = ln_fact + (t as f64).ln();
    let at = a + t as f64;
    let dropped = (at * ln_x - ln_fact_t - at.ln() - lga).exp();
    (sum, abs_sum, dropped)
}

/// Density of the selection-combined SNR,
/// f(γ) = Σ_j f_j(γ) Π_{k≠j} F_k(γ), using the exact CDF factors.
pub fn selection_pdf(scn: &Scenario, avg_snr: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain {
            func: "selection_pdf",
            msg: format!("requires gamma > 0, got {gamma}"),
        });
    }
    let k = scn.k();
    let cdfs: Vec<f64> = (0..k)
        .map(|i| snr_cdf(&scn.fits[i], scn.path_losses[i], avg_snr, gamma))
        .collect();
    let mut total = 0.0;
    for j in 0..k {
        let f_j = snr_pdf(&scn.fits[j], scn.path_losses[j], avg_snr, gamma)?;
        let others: f64 =
            cdfs.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, &c)| c).product();
        total += f_j * others;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn rayleigh_scenario(k: usize, n: u32) -> Scenario {
        let link = RisLinkConfig {
            n_elements: n,
            m1: 1.0,
            m2: 1.0,
            omega1: 1.0,
            omega2: 1.0,
            d1_m: 5.0,
            d2_m: 5.0,
            g1_db: 5.0,
            g2_db: 5.0,
            efficiency: 1.0,
        };
        let global = GlobalConfig {
            carrier_frequency_hz: 2.4e9,
            outage_threshold_linear: 1.0,
            avg_snr_grid_db: (0..31).map(|i| 60.0 + 2.0 * i as f64).collect(),
        };
        Scenario::new(global, vec![link; k]).unwrap()
    }

    #[test]
    fn cdf_limits() {
        let scn = rayleigh_scenario(1, 5);
        let (fit, pl) = (&scn.fits()[0], scn.path_losses()[0]);
        assert_eq!(snr_cdf(fit, pl, 1e9, 0.0), 0.0);
        assert!(snr_cdf(fit, pl, 1e9, 1e12) > 1.0 - 1e-12);
    }

    #[test]
    fn cdf_monotone_in_gamma_and_snr() {
        let scn = rayleigh_scenario(3, 5);
        let mut prev = 0.0;
        for i in 1..60 {
            let gamma = 0.2 * i as f64;
            let v = selection_cdf(&scn, 1e9, gamma);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        let mut prev = 1.0;
        for i in 0..30 {
            let snr = channel::db_to_linear(60.0 + 2.0 * i as f64);
            let v = selection_cdf(&scn, snr, 1.0);
            assert!(v <= prev + 1e-15, "CDF not nonincreasing in avg SNR");
            prev = v;
        }
    }

    #[test]
    fn selection_reduces_to_single_link() {
        let scn = rayleigh_scenario(1, 5);
        let (fit, pl) = (&scn.fits()[0], scn.path_losses()[0]);
        for &g in &[0.1, 1.0, 7.3] {
            assert_eq!(selection_cdf(&scn, 1e9, g), snr_cdf(fit, pl, 1e9, g));
            assert_relative_eq!(
                selection_pdf(&scn, 1e9, g).unwrap(),
                snr_pdf(fit, pl, 1e9, g).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn selection_dominated_by_weakest_factor() {
        let scn = rayleigh_scenario(3, 5);
        for &g in &[0.05, 0.8, 3.0, 20.0] {
            let joint = selection_cdf(&scn, 1e9, g);
            let per_link_min = (0..3)
                .map(|i| snr_cdf(&scn.fits()[i], scn.path_losses()[i], 1e9, g))
                .fold(f64::INFINITY, f64::min);
            assert!(joint <= per_link_min + 1e-15);
        }
    }

    #[test]
    fn pdf_matches_cdf_derivative() {
        let scn = rayleigh_scenario(1, 5);
        let (fit, pl) = (&scn.fits()[0], scn.path_losses()[0]);
        let snr = 1e9;
        let gamma = 2.0;
        let h = 1e-4;
        let fd = (snr_cdf(fit, pl, snr, gamma + h) - snr_cdf(fit, pl, snr, gamma - h)) / (2.0 * h);
        let pdf = snr_pdf(fit, pl, snr, gamma).unwrap();
        assert_relative_eq!(pdf, fd, max_relative = 1e-5);
    }

    #[test]
    fn selection_pdf_matches_selection_cdf_derivative() {
        let scn = rayleigh_scenario(3, 5);
        let snr = 1e9;
        for &gamma in &[0.5, 1.5, 4.0] {
            let h = 1e-4 * gamma;
            let fd =
                (selection_cdf(&scn, snr, gamma + h) - selection_cdf(&scn, snr, gamma - h))
                    / (2.0 * h);
            let pdf = selection_pdf(&scn, snr, gamma).unwrap();
            assert_relative_eq!(pdf, fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn pdf_mode_matches_stationary_point() {
        // Golden-section argmax of the density against the stationary point
        // γ* = (a - 2)^2 γ̄ b^2 / P_L valid for a > 2.
        let scn = rayleigh_scenario(1, 5);
        let (fit, pl) = (&scn.fits()[0], scn.path_losses()[0]);
        let snr = 1e9;
        let expect = (fit.a - 2.0).powi(2) * snr * fit.b * fit.b / pl;

        let f = |g: f64| snr_pdf(fit, pl, snr, g).unwrap();
        let (mut lo, mut hi) = (1e-6, 100.0 * expect);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let mode = 0.5 * (lo + hi);
        assert_relative_eq!(mode, expect, max_relative = 1e-6);
    }

    #[test]
    fn series_trivial_zero() {
        let scn = rayleigh_scenario(3, 5);
        let trunc = SeriesTruncation::default();
        assert_eq!(selection_cdf_series(&scn, 1e9, 0.0, &trunc).unwrap(), 0.0);
    }

    #[test]
    fn series_matches_product_single_link() {
        let scn = rayleigh_scenario(1, 5);
        let trunc = SeriesTruncation::new(40, 1e-9).unwrap();
        let snr = channel::db_to_linear(110.0);
        let series = selection_cdf_series(&scn, snr, 1.0, &trunc).unwrap();
        let product = selection_cdf(&scn, snr, 1.0);
        assert_relative_eq!(series, product, max_relative = 1e-10);
    }

    #[test]
    fn series_matches_product_three_links() {
        let scn = rayleigh_scenario(3, 5);
        let trunc = SeriesTruncation::new(15, 1e-6).unwrap();
        for &db in &[100.0, 110.0, 120.0] {
            let snr = channel::db_to_linear(db);
            let series = selection_cdf_series(&scn, snr, 1.0, &trunc).unwrap();
            let product = selection_cdf(&scn, snr, 1.0);
            assert_relative_eq!(series, product, max_relative = 1e-8);
        }
    }

    #[test]
    fn series_refuses_out_of_regime() {
        let scn = rayleigh_scenario(3, 5);
        let trunc = SeriesTruncation::new(4, 1e-9).unwrap();
        // Low average SNR pushes the argument far beyond a + T/2.
        let snr = channel::db_to_linear(60.0);
        match selection_cdf_series(&scn, snr, 50.0, &trunc) {
            Err(Error::SeriesInadmissible(_)) => {}
            other => panic!("expected SeriesInadmissible, got {other:?}"),
        }
    }

    #[test]
    fn scenario_requires_links() {
        let g = rayleigh_scenario(1, 5).global().clone();
        assert!(Scenario::new(g, vec![]).is_err());
    }
}
