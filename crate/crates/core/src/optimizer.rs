//! Element-count and placement optimization driven by the log of the
//! outage upper bound.
//!
//! With a_k = N_k c_k and x_k = sqrt(γ_out P_{L,k} / (γ̄ b_k^2)), the log
//! upper bound
//!
//!   f(N) = Σ_k N_k c_k + N_k c_k ln x_k - N_k c_k ln(N_k c_k)
//!
//! is concave and separable in N. A path-following loop replaces the
//! equality f(N) = ln P_th by its tangent affine majorant at the current
//! iterate and re-solves a one-equality box-constrained linear subproblem
//! until the iterates stop moving; the continuous solution is then rounded
//! up, with a guard that keeps the rounded point on the feasible side of
//! the outage target.
//!
//! The scale b_k entering x_k is the per-element Gamma-fit scale, which is
//! independent of the element count, so a_k = N_k c_k is exact rather than
//! an approximation.
//!
//! Placement over a line of length D minimizes the concave separable
//! g(d) = Σ_k ln z_k + a_k (ln d_k + ln(D - d_k)) whose minimizers sit at
//! extreme points of the clamped box [d_min, D - d_min]^K.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::channel::{self, GlobalConfig, RisLinkConfig};
use crate::error::{Error, Result};
use crate::numerics::{lgamma, Tolerance};

/// Element-count design problem: hit an outage target with at most `n_max`
/// elements per surface.
#[derive(Debug, Clone)]
pub struct ElementProblem {
    /// Surface templates; fading, geometry and gains are used, the element
    /// counts are the unknowns.
    pub links: Vec<RisLinkConfig>,
    pub global: GlobalConfig,
    /// Upper bound on the element count per surface.
    pub n_max: u32,
    /// Outage-probability target, in (0, 1).
    pub p_out_th: f64,
    /// Average SNR (linear) at which the target must hold.
    pub avg_snr: f64,
    /// Initial continuous iterate, entries in (0, n_max].
    pub start_point: Vec<f64>,
    pub tol: Tolerance,
}

impl ElementProblem {
    pub fn validate(&self) -> Result<()> {
        self.global.validate()?;
        if self.links.is_empty() {
            return Err(Error::InvalidConfig("at least one surface required".into()));
        }
        for l in &self.links {
            l.validate()?;
        }
        if self.n_max == 0 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        if !(self.p_out_th > 0.0 && self.p_out_th < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "p_out_th must lie in (0, 1), got {}",
                self.p_out_th
            )));
        }
        if !(self.avg_snr > 0.0) {
            return Err(Error::InvalidConfig("avg_snr must be positive".into()));
        }
        if self.start_point.len() != self.links.len() {
            return Err(Error::InvalidConfig("start_point length must match link count".into()));
        }
        if self
            .start_point
            .iter()
            .any(|&v| !(v > 0.0 && v <= f64::from(self.n_max)))
        {
            return Err(Error::InvalidConfig(format!(
                "start_point entries must lie in (0, {}]",
                self.n_max
            )));
        }
        Ok(())
    }
}

/// Per-surface constants of the log upper bound.
#[derive(Debug, Clone)]
pub struct UbCoefficients {
    /// c_k, the per-element shape increment; positive for all valid fading.
    pub c: Vec<f64>,
    /// x_k = sqrt(γ_out P_{L,k} / (γ̄ b_k^2)).
    pub x: Vec<f64>,
    /// ln z_k, the distance-independent placement factor, kept in log scale
    /// because z_k overflows f64 for large shapes.
    pub ln_z: Vec<f64>,
    pub ln_p_th: f64,
}

/// c_k, x_k and ln z_k for each surface.
fn coefficient_parts(
    links: &[RisLinkConfig],
    global: &GlobalConfig,
    avg_snr: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let gamma_out = global.outage_threshold_linear;
    let lambda = global.wavelength_m();
    let mut c = Vec::with_capacity(links.len());
    let mut x = Vec::with_capacity(links.len());
    let mut ln_z = Vec::with_capacity(links.len());
    for link in links {
        // c = 1 / (E[V^2]/E[V]^2 - 1), the Θ-independent shape ratio.
        let ln_ratio = link.m1.ln() + link.m2.ln() + 2.0 * lgamma(link.m1)
            + 2.0 * lgamma(link.m2)
            - 2.0 * lgamma(link.m1 + 0.5)
            - 2.0 * lgamma(link.m2 + 0.5);
        let denom = ln_ratio.exp_m1();
        if !(denom > 0.0) {
            return Err(Error::Degenerate(format!(
                "moment ratio must exceed 1 (m1 = {}, m2 = {})",
                link.m1, link.m2
            )));
        }
        let ck = 1.0 / denom;
        let fit = channel::fit_gamma(link)?;
        let pl = channel::path_loss(link, global);
        let xk = (gamma_out * pl / (avg_snr * fit.b * fit.b)).sqrt();

        let a = f64::from(link.n_elements) * ck;
        let g1 = channel::db_to_linear(link.g1_db);
        let g2 = channel::db_to_linear(link.g2_db);
        let ln_zk = a * (1.0 - a.ln())
            + 0.5 * a * (gamma_out / (avg_snr * fit.b * fit.b)).ln()
            + 2.0 * a * (4.0 * std::f64::consts::PI / lambda).ln()
            - 0.5 * a * (g1 * g2 * link.efficiency).ln();

        c.push(ck);
        x.push(xk);
        ln_z.push(ln_zk);
    }
    Ok((c, x, ln_z))
}

/// Constants of the log upper bound for an element-count problem.
pub fn ub_coefficients(problem: &ElementProblem) -> Result<UbCoefficients> {
    problem.validate()?;
    let (c, x, ln_z) = coefficient_parts(&problem.links, &problem.global, problem.avg_snr)?;
    Ok(UbCoefficients { c, x, ln_z, ln_p_th: problem.p_out_th.ln() })
}

/// f(N) = Σ_k N_k c_k (1 + ln x_k - ln(N_k c_k)); each summand tends to 0
/// as N_k -> 0+.
pub fn ub_outage_log(n: &[f64], coeffs: &UbCoefficients) -> f64 {
    n.iter()
        .zip(&coeffs.c)
        .zip(&coeffs.x)
        .map(|((&nk, &ck), &xk)| {
            if nk <= 0.0 {
                0.0
            } else {
                let a = nk * ck;
                a * (1.0 + xk.ln() - a.ln())
            }
        })
        .sum()
}

/// Tangent affine majorant of the concave f at `anchor`:
/// f(N) <= Σ_k anchor_k c_k + Σ_k c_k ln(x_k / (anchor_k c_k)) N_k.
#[derive(Debug, Clone)]
pub struct AffineMajorant {
    pub intercept: f64,
    pub gradient: Vec<f64>,
}

impl AffineMajorant {
    pub fn eval(&self, n: &[f64]) -> f64 {
        self.intercept + self.gradient.iter().zip(n).map(|(g, v)| g * v).sum::<f64>()
    }
}

/// Anchor floor; gradients blow up logarithmically at exactly zero.
const ANCHOR_FLOOR: f64 = 1e-12;

pub fn linearize_f(anchor: &[f64], coeffs: &UbCoefficients) -> AffineMajorant {
    let mut intercept = 0.0;
    let mut gradient = Vec::with_capacity(anchor.len());
    for ((&nk, &ck), &xk) in anchor.iter().zip(&coeffs.c).zip(&coeffs.x) {
        let nk = nk.max(ANCHOR_FLOOR);
        intercept += nk * ck;
        gradient.push(ck * (xk / (nk * ck)).ln());
    }
    AffineMajorant { intercept, gradient }
}

/// Solve a one-equality, box-constrained linear problem.
///
/// With no objective, returns the point of {g·x = r} ∩ box closest to
/// `anchor` in Euclidean distance. With a linear objective c, minimizes c·x
/// by greedy ratio ordering, producing a vertex with at most one strictly
/// interior coordinate. Reports infeasibility with the violated bound when
/// the hyperplane misses the box.
pub fn solve_box_lp(
    objective: Option<&[f64]>,
    anchor: &[f64],
    equality: (&[f64], f64),
    bounds: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let (g, r) = equality;
    let k = g.len();
    if anchor.len() != k || bounds.len() != k || objective.is_some_and(|c| c.len() != k) {
        return Err(Error::InvalidConfig("solve_box_lp dimension mismatch".into()));
    }
    if g.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidConfig("equality gradient must not vanish".into()));
    }
    if bounds.iter().any(|&(lo, hi)| !(lo <= hi)) {
        return Err(Error::InvalidConfig("box bounds must satisfy lo <= hi".into()));
    }

    // Attainable range of g·x over the box.
    let (mut s_min, mut s_max) = (0.0, 0.0);
    for (&gi, &(lo, hi)) in g.iter().zip(bounds) {
        s_min += (gi * lo).min(gi * hi);
        s_max += (gi * lo).max(gi * hi);
    }
    let slack = 1e-9 * (1.0 + s_max.abs().max(s_min.abs()));
    if r < s_min - slack {
        return Err(Error::Infeasible(format!(
            "equality target {r} lies below the box minimum {s_min}"
        )));
    }
    if r > s_max + slack {
        return Err(Error::Infeasible(format!(
            "equality target {r} lies above the box maximum {s_max}"
        )));
    }

    match objective {
        None => Ok(project_onto_hyperplane(anchor, g, r.clamp(s_min, s_max), bounds)),
        Some(c) => greedy_vertex(c, g, r.clamp(s_min, s_max), bounds),
    }
}

/// Minimum-distance projection of `anchor` onto {g·x = r} ∩ box via
/// bisection on the multiplier of x(μ) = clamp(anchor + μ g); g·x(μ) is
/// nondecreasing in μ.
fn project_onto_hyperplane(anchor: &[f64], g: &[f64], r: f64, bounds: &[(f64, f64)]) -> Vec<f64> {
    let point = |mu: f64| -> Vec<f64> {
        anchor
            .iter()
            .zip(g)
            .zip(bounds)
            .map(|((&a, &gi), &(lo, hi))| (a + mu * gi).clamp(lo, hi))
            .collect()
    };
    let dot = |x: &[f64]| -> f64 { g.iter().zip(x).map(|(gi, xi)| gi * xi).sum() };

    let mut reach = 1.0f64;
    for ((&a, &gi), &(lo, hi)) in anchor.iter().zip(g).zip(bounds) {
        if gi != 0.0 {
            reach = reach.max(((hi - a).abs().max((lo - a).abs()) + 1.0) / gi.abs());
        }
    }
    let (mut lo_mu, mut hi_mu) = (-reach, reach);
    for _ in 0..200 {
        let mid = 0.5 * (lo_mu + hi_mu);
        if dot(&point(mid)) < r {
            lo_mu = mid;
        } else {
            hi_mu = mid;
        }
    }
    let mut x = point(0.5 * (lo_mu + hi_mu));

    // One exact correction step along the free coordinates.
    let residual = r - dot(&x);
    let free_mass: f64 = x
        .iter()
        .zip(g)
        .zip(bounds)
        .filter(|((xi, _), (lo, hi))| **xi > *lo && **xi < *hi)
        .map(|((_, gi), _)| gi * gi)
        .sum();
    if free_mass > 0.0 {
        let step = residual / free_mass;
        for ((xi, &gi), &(lo, hi)) in x.iter_mut().zip(g).zip(bounds) {
            if *xi > lo && *xi < hi {
                *xi = (*xi + step * gi).clamp(lo, hi);
            }
        }
    }
    x
}

/// Greedy single-constraint LP: start at the objective-optimal corner and
/// buy equality progress from the cheapest coordinates first.
fn greedy_vertex(c: &[f64], g: &[f64], r: f64, bounds: &[(f64, f64)]) -> Result<Vec<f64>> {
    let k = c.len();
    let mut x: Vec<f64> =
        c.iter().zip(bounds).map(|(&ci, &(lo, hi))| if ci >= 0.0 { lo } else { hi }).collect();
    let s0: f64 = g.iter().zip(&x).map(|(gi, xi)| gi * xi).sum();
    let mut need = r - s0;

    // (cost per unit of |progress|, index, signed step direction)
    let mut moves: Vec<(f64, usize, f64)> = Vec::new();
    for i in 0..k {
        if g[i] == 0.0 {
            continue;
        }
        let raising_helps = (g[i] > 0.0) == (need > 0.0);
        if raising_helps && x[i] < bounds[i].1 {
            moves.push((c[i] / g[i].abs() * if need > 0.0 { 1.0 } else { 1.0 }, i, 1.0));
        } else if !raising_helps && x[i] > bounds[i].0 {
            moves.push((-c[i] / g[i].abs(), i, -1.0));
        }
    }
    moves.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let scale = 1.0 + r.abs();
    for (_, i, dir) in moves {
        if need.abs() <= 1e-12 * scale {
            break;
        }
        let span = if dir > 0.0 { bounds[i].1 - x[i] } else { x[i] - bounds[i].0 };
        let capacity = span * g[i].abs();
        let take = capacity.min(need.abs());
        x[i] += dir * take / g[i].abs();
        need = need.signum() * (need.abs() - take);
    }
    if need.abs() > 1e-9 * scale {
        return Err(Error::Infeasible(format!(
            "greedy allocation left residual {need} on the equality"
        )));
    }
    Ok(x)
}

/// One step of the path-following trace.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub iteration: usize,
    pub n: Vec<f64>,
    pub total: f64,
    /// f(N) - ln P_th at this iterate.
    pub residual: f64,
}

/// Result of an element-count solve.
#[derive(Debug, Clone)]
pub struct ElementSolution {
    /// Converged continuous iterate.
    pub n_continuous: Vec<f64>,
    /// Ceiling-rounded element counts satisfying the outage target.
    pub n_integer: Vec<u32>,
    pub trace: Vec<TraceStep>,
}

impl ElementSolution {
    pub fn total_elements(&self) -> u64 {
        self.n_integer.iter().map(|&n| u64::from(n)).sum()
    }
}

fn sca_loop(problem: &ElementProblem, objective: Option<&[f64]>) -> Result<ElementSolution> {
    problem.validate()?;
    let coeffs = ub_coefficients(problem)?;
    let k = problem.links.len();
    let bounds = vec![(0.0, f64::from(problem.n_max)); k];

    let mut n = problem.start_point.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    for iteration in 0..problem.tol.max_iter {
        let majorant = linearize_f(&n, &coeffs);
        let rhs = coeffs.ln_p_th - majorant.intercept;
        let next = solve_box_lp(objective, &n, (&majorant.gradient, rhs), &bounds)?;
        let delta =
            next.iter().zip(&n).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        trace.push(TraceStep {
            iteration,
            total: next.iter().sum(),
            residual: ub_outage_log(&next, &coeffs) - coeffs.ln_p_th,
            n: next.clone(),
        });
        n = next;
        if delta < problem.tol.abs_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { func: "element optimization", iters: problem.tol.max_iter });
    }

    // Round up, then walk further up if rounding ever landed on the wrong
    // side of the target (possible when some x_k exceeds N_k c_k).
    let mut n_integer: Vec<u32> = n.iter().map(|&v| v.ceil().min(f64::from(problem.n_max)) as u32).collect();
    let mut guard = 0u64;
    let budget = u64::from(problem.n_max) * k as u64 + 1;
    loop {
        let as_f64: Vec<f64> = n_integer.iter().map(|&v| f64::from(v)).collect();
        if ub_outage_log(&as_f64, &coeffs) <= coeffs.ln_p_th + 1e-9 {
            break;
        }
        guard += 1;
        if guard > budget {
            return Err(Error::Infeasible(
                "integer rounding cannot reach the outage target within n_max".into(),
            ));
        }
        // Increment the coordinate that lowers f the most per element.
        let mut best: Option<(f64, usize)> = None;
        let f0 = ub_outage_log(&as_f64, &coeffs);
        for i in 0..k {
            if n_integer[i] >= problem.n_max {
                continue;
            }
            let mut bumped = as_f64.clone();
            bumped[i] += 1.0;
            let drop = ub_outage_log(&bumped, &coeffs) - f0;
            if best.map_or(true, |(b, _)| drop < b) {
                best = Some((drop, i));
            }
        }
        match best {
            Some((drop, i)) if drop < 0.0 => n_integer[i] += 1,
            _ => {
                return Err(Error::Infeasible(
                    "outage target unreachable: no element increment lowers the bound".into(),
                ))
            }
        }
    }

    Ok(ElementSolution { n_continuous: n, n_integer, trace })
}

/// Find element counts meeting the outage target (feasibility form); each
/// new iterate is the minimum-distance projection of the previous one onto
/// the linearized constraint.
pub fn solve_feasibility(problem: &ElementProblem) -> Result<ElementSolution> {
    sca_loop(problem, None)
}

/// Minimize the total number of elements subject to the outage target; the
/// converged solution is a vertex with at most one surface strictly
/// interior, so the element budget concentrates on a single surface.
pub fn minimize_total_elements(problem: &ElementProblem) -> Result<ElementSolution> {
    let ones = vec![1.0; problem.links.len()];
    sca_loop(problem, Some(&ones))
}

/// Placement problem over a source-destination line of length D with the
/// per-surface distances clamped to [d_min, D - d_min].
#[derive(Debug, Clone)]
pub struct PlacementProblem {
    /// Surfaces with fixed element counts and fading; their configured
    /// distances are ignored (distance is the decision variable).
    pub links: Vec<RisLinkConfig>,
    pub global: GlobalConfig,
    pub total_distance_m: f64,
    pub d_min_m: f64,
    pub avg_snr: f64,
    pub start_point: Vec<f64>,
    pub tol: Tolerance,
}

impl PlacementProblem {
    pub fn validate(&self) -> Result<()> {
        self.global.validate()?;
        if self.links.is_empty() {
            return Err(Error::InvalidConfig("at least one surface required".into()));
        }
        if self.links.len() > 20 {
            return Err(Error::InvalidConfig(
                "corner enumeration supports at most 20 surfaces".into(),
            ));
        }
        for l in &self.links {
            l.validate()?;
        }
        if !(self.total_distance_m > 0.0) {
            return Err(Error::InvalidConfig("total_distance_m must be positive".into()));
        }
        if !(self.d_min_m > 0.0 && self.d_min_m < self.total_distance_m / 2.0) {
            return Err(Error::InvalidConfig(format!(
                "d_min_m must lie in (0, D/2), got {} with D = {}",
                self.d_min_m, self.total_distance_m
            )));
        }
        if self.start_point.len() != self.links.len() {
            return Err(Error::InvalidConfig("start_point length must match link count".into()));
        }
        let (lo, hi) = (self.d_min_m, self.total_distance_m - self.d_min_m);
        if self.start_point.iter().any(|&d| !(d >= lo && d <= hi)) {
            return Err(Error::InvalidConfig(format!(
                "start_point entries must lie in [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Per-surface shape exponents a_k = N_k c_k and ln z_k.
    fn placement_parts(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (c, _, ln_z) = coefficient_parts(&self.links, &self.global, self.avg_snr)?;
        let a = self
            .links
            .iter()
            .zip(&c)
            .map(|(l, &ck)| f64::from(l.n_elements) * ck)
            .collect();
        Ok((a, ln_z))
    }
}

/// g(d) = Σ_k ln z_k + a_k (ln d_k + ln(D - d_k)), the log of the placement
/// upper bound; concave and symmetric about D/2 in each coordinate.
pub fn placement_objective(d: &[f64], problem: &PlacementProblem) -> Result<f64> {
    problem.validate()?;
    if d.len() != problem.links.len() {
        return Err(Error::InvalidConfig("distance vector length must match link count".into()));
    }
    let dd = problem.total_distance_m;
    let (lo, hi) = (problem.d_min_m, dd - problem.d_min_m);
    for &dk in d {
        if !(dk >= lo - 1e-12 && dk <= hi + 1e-12) {
            return Err(Error::Domain {
                func: "placement_objective",
                msg: format!("distance {dk} outside the clamped box [{lo}, {hi}]"),
            });
        }
    }
    let (a, ln_z) = problem.placement_parts()?;
    Ok(d.iter()
        .zip(&a)
        .zip(&ln_z)
        .map(|((&dk, &ak), &lz)| lz + ak * (dk.ln() + (dd - dk).ln()))
        .sum())
}

/// Linearized descent on g from `start`: each step minimizes the tangent of
/// g over the box, which sends every coordinate to a bound; fixed points are
/// extreme points of the box.
pub fn placement_descent(
    problem: &PlacementProblem,
    start: &[f64],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    problem.validate()?;
    if start.len() != problem.links.len() {
        return Err(Error::InvalidConfig("start length must match link count".into()));
    }
    let (a, _) = problem.placement_parts()?;
    let dd = problem.total_distance_m;
    let (lo, hi) = (problem.d_min_m, dd - problem.d_min_m);
    let mut d: Vec<f64> = start.iter().map(|&v| v.clamp(lo, hi)).collect();
    let mut trace = vec![d.clone()];
    for _ in 0..problem.tol.max_iter {
        let next: Vec<f64> = d
            .iter()
            .zip(&a)
            .map(|(&dk, &ak)| {
                let slope = ak * (dd - 2.0 * dk) / (dk * (dd - dk));
                // Ties (slope exactly 0 at D/2) break toward the source.
                if slope > 0.0 {
                    lo
                } else if slope < 0.0 {
                    hi
                } else {
                    lo
                }
            })
            .collect();
        let moved = next.iter().zip(&d).any(|(x, y)| x != y);
        d = next;
        trace.push(d.clone());
        if !moved {
            return Ok((d, trace));
        }
    }
    Err(Error::NoConvergence { func: "placement_descent", iters: problem.tol.max_iter })
}

/// Result of a placement optimization.
#[derive(Debug, Clone)]
pub struct PlacementSolution {
    /// Minimizing extreme point (lexicographically smallest on ties).
    pub d: Vec<f64>,
    pub g: f64,
    /// Every enumerated extreme point with its objective value.
    pub corners: Vec<(Vec<f64>, f64)>,
    /// Converged point of the linearized descent from the configured start.
    pub descent_d: Vec<f64>,
    pub descent_trace: Vec<Vec<f64>>,
}

/// Enumerate the 2^K extreme points of the clamped box (the primary path)
/// and cross-check with the linearized descent.
pub fn optimize_placement(problem: &PlacementProblem) -> Result<PlacementSolution> {
    problem.validate()?;
    let (a, ln_z) = problem.placement_parts()?;
    let k = problem.links.len();
    let dd = problem.total_distance_m;
    let (lo, hi) = (problem.d_min_m, dd - problem.d_min_m);

    // At a corner the hop pair {d, D - d} is exactly {d_min, D - d_min}
    // whichever end the surface sits at; using the pair directly keeps the
    // mathematical tie between mirrored corners exact in floating point.
    let ln_pair = lo.ln() + hi.ln();
    let corner = |mask: u32| -> (Vec<f64>, f64) {
        let d: Vec<f64> =
            (0..k).map(|i| if mask & (1 << i) != 0 { hi } else { lo }).collect();
        let g = a.iter().zip(&ln_z).map(|(&ak, &lz)| lz + ak * ln_pair).sum();
        (d, g)
    };

    let masks = 0..(1u32 << k);
    #[cfg(feature = "parallel")]
    let corners: Vec<(Vec<f64>, f64)> = masks.into_par_iter().map(corner).collect();
    #[cfg(not(feature = "parallel"))]
    let corners: Vec<(Vec<f64>, f64)> = masks.map(corner).collect();

    // Min by objective, ties by lexicographically smallest distance vector.
    let (d, g) = corners
        .iter()
        .min_by(|(da, ga), (db, gb)| {
            ga.partial_cmp(gb).unwrap().then_with(|| da.partial_cmp(db).unwrap())
        })
        .cloned()
        .expect("non-empty corner set");

    let (descent_d, descent_trace) = placement_descent(problem, &problem.start_point)?;
    Ok(PlacementSolution { d, g, corners, descent_d, descent_trace })
}
