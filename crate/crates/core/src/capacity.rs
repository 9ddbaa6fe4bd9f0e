//! 1D capacities of half-lines and the capacity-measure conditions for the
//! weak log-Sobolev inequality.
//!
//! For a half-line `A = [x, ∞)` with `x` beyond the median `m`, the capacity
//! relative to `[m, ∞)` is the reciprocal of the resistance `∫_m^x 1/ρ_μ`.
//! Half-lines are the extremal sets of the 1D reduction, so they are the only
//! sets scanned here.

use crate::measure::{Measure1D, Side};
use crate::numerics::log_spaced;
use crate::rate::RateFunction;
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Which mass kernel indexes the scan. `Half` is `log(1 + 1/(2μ(A)))` (the
/// necessary-condition form), `ESquared` is `log(1 + e²/μ(A))` (the
/// sufficient-condition form); they differ by constants only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Half,
    ESquared,
}

impl Kernel {
    /// `s*(m) = (m/2)·log(1 + k/m)`, the near-optimal scan point for a set
    /// of mass `m`.
    pub fn s_star(&self, mass: f64) -> f64 {
        match self {
            Kernel::Half => 0.5 * mass * (1.0 + 1.0 / (2.0 * mass)).ln(),
            Kernel::ESquared => {
                let e2 = std::f64::consts::E * std::f64::consts::E;
                0.5 * mass * (1.0 + e2 / mass).ln()
            }
        }
    }

    /// Full kernel value `m·log(1 + k/m)`.
    pub fn full(&self, mass: f64) -> f64 {
        2.0 * self.s_star(mass)
    }
}

/// Capacity of the half-line beyond `x` (relative to the median half-line):
/// `1 / ∫_m^x 1/ρ_μ`. Errors with `AtMedian` when `x` is within grid
/// resolution of the median.
pub fn cap_halfline(mu: &Measure1D, x: f64, side: Side) -> Result<f64> {
    let m = mu.median();
    let nodes = mu.nodes();
    let i = nodes.partition_point(|&v| v <= m).saturating_sub(1);
    let resolution = 0.25 * (nodes[(i + 1).min(nodes.len() - 1)] - nodes[i]);
    let beyond = match side {
        Side::Right => x - m,
        Side::Left => m - x,
    };
    if beyond < resolution {
        return Err(CoreError::AtMedian { x, median: m });
    }
    let r = match side {
        Side::Right => mu.resistance(m, x)?,
        Side::Left => mu.resistance(x, m)?,
    };
    Ok(1.0 / r)
}

/// One scanned half-line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    /// μ-measure of the half-line beyond `x`.
    pub mass: f64,
    /// Capacity of that half-line.
    pub cap: f64,
    /// Near-optimal scan point `s* = (mass/2) log(1 + 1/(2 mass))`.
    pub s_star: f64,
    /// Left-hand side `(mass·log(1+1/(2 mass)) - s*)/β(s*) = s*/β(s*)`.
    pub lhs: f64,
    /// `lhs / cap`; values above 1 violate the necessary condition.
    pub ratio: f64,
}

/// Outcome of the necessary-condition scan. Violations are data, not errors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub rows: Vec<ProfileRow>,
    pub worst_ratio: f64,
    /// Indices into `rows` where the ratio exceeds 1 (beyond tolerance).
    pub violations: Vec<usize>,
}

fn side_of(mu: &Measure1D, x: f64) -> Side {
    if x >= mu.median() {
        Side::Right
    } else {
        Side::Left
    }
}

/// Checks, for each half-line in the scan, that
/// `(μ(A) log(1+1/(2μ(A))) - s)/β(s) ≤ Cap_μ(A)` at the near-optimal
/// `s = s*` (where the left side equals `s*/β(s*)`).
pub fn check_necessary(
    mu: &Measure1D,
    beta: &RateFunction,
    x_grid: &[f64],
) -> Result<NecessaryReport> {
    let mut rows = Vec::with_capacity(x_grid.len());
    let mut worst: f64 = 0.0;
    let mut violations = Vec::new();
    for &x in x_grid {
        let side = side_of(mu, x);
        let mass = mu.tail_mass(x, side)?;
        let cap = cap_halfline(mu, x, side)?;
        let s_star = Kernel::Half.s_star(mass);
        let lhs = s_star / beta.eval(s_star);
        let ratio = lhs / cap;
        if ratio > worst {
            worst = ratio;
        }
        if ratio > 1.0 + 1e-9 {
            violations.push(rows.len());
        }
        rows.push(ProfileRow {
            x,
            mass,
            cap,
            s_star,
            lhs,
            ratio,
        });
    }
    Ok(NecessaryReport {
        rows,
        worst_ratio: worst,
        violations,
    })
}

/// Supremum of `(μ(A)·log(1+1/(2μ(A))) - s)/β(s)` over a log-spaced s-grid;
/// used by the sandwich tests against the specific-s lower bound.
pub fn necessary_sup_over_s(beta: &RateFunction, mass: f64, n: usize) -> f64 {
    let full = Kernel::Half.full(mass);
    log_spaced(full * 1e-4, full * (1.0 - 1e-9), n)
        .into_iter()
        .map(|s| (full - s) / beta.eval(s))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The pointwise smallest rate compatible with the necessary condition,
/// sampled over half-lines: `β(s_A) = s_A / Cap_μ(A)` with
/// `s_A = (μ(A)/2) log(1+1/(2μ(A)))`, then regularized non-increasing by a
/// running minimum from small `s` upward.
pub fn beta_from_capacity(mu: &Measure1D, x_grid: &[f64]) -> Result<RateFunction> {
    beta_from_capacity_kernel(mu, x_grid, Kernel::Half)
}

/// Same scan with a selectable mass kernel.
pub fn beta_from_capacity_kernel(
    mu: &Measure1D,
    x_grid: &[f64],
    kernel: Kernel,
) -> Result<RateFunction> {
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(x_grid.len());
    let mut mass_lo = f64::INFINITY;
    let mut mass_hi: f64 = 0.0;
    for &x in x_grid {
        let side = side_of(mu, x);
        let mass = mu.tail_mass(x, side)?;
        let cap = cap_halfline(mu, x, side)?;
        if !cap.is_finite() || cap <= 0.0 {
            continue;
        }
        let s = kernel.s_star(mass);
        samples.push((s, s / cap));
        mass_lo = mass_lo.min(mass);
        mass_hi = mass_hi.max(mass);
    }
    if samples.len() < 8 {
        return Err(CoreError::InsufficientRange {
            what: "beta_from_capacity",
            needed: "at least 8 finite samples".into(),
            got: format!("{}", samples.len()),
        });
    }
    if mass_hi / mass_lo < 1e3 {
        return Err(CoreError::InsufficientRange {
            what: "beta_from_capacity",
            needed: "x_grid spanning 3 decades of tail mass".into(),
            got: format!("{:.2} decades", (mass_hi / mass_lo).log10()),
        });
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // non-increasing regularization: running minimum from small s upward
    let mut run = f64::INFINITY;
    for pair in samples.iter_mut() {
        run = run.min(pair.1);
        pair.1 = run;
    }
    RateFunction::from_table(samples)
}

/// Default half-line scan: `per_side` points log-spaced in tail mass from
/// 0.49 down to `mass_lo`, on both sides of the median, sorted by `x`.
/// Points inside the at-median resolution guard (possible on coarse grids)
/// are dropped.
pub fn default_tail_grid(mu: &Measure1D, per_side: usize, mass_lo: f64) -> Result<Vec<f64>> {
    let m = mu.median();
    let nodes = mu.nodes();
    let i = nodes.partition_point(|&v| v <= m).saturating_sub(1);
    let guard = 0.3 * (nodes[(i + 1).min(nodes.len() - 1)] - nodes[i]);
    let masses = log_spaced(mass_lo, 0.49, per_side);
    let mut xs = Vec::with_capacity(2 * per_side);
    for &mass in &masses {
        for side in [Side::Right, Side::Left] {
            let x = mu.quantile_tail(mass, side)?;
            if (x - m).abs() >= guard {
                xs.push(x);
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{build_measure, Family, GridSpec, Potential};
    use approx::assert_relative_eq;

    fn double_exp() -> Measure1D {
        build_measure(
            Potential::new(Family::DoubleExp),
            &GridSpec::new(-40.0, 40.0, 4096),
        )
        .unwrap()
    }

    #[test]
    fn cap_halfline_closed_forms() {
        let mu = double_exp();
        let e = std::f64::consts::E;
        assert_relative_eq!(
            cap_halfline(&mu, 1.0, Side::Right).unwrap(),
            1.0 / (2.0 * (e - 1.0)),
            max_relative = 1e-7
        );

        let uni = build_measure(Potential::new(Family::Flat), &GridSpec::new(0.0, 1.0, 256))
            .unwrap();
        assert_relative_eq!(
            cap_halfline(&uni, 0.75, Side::Right).unwrap(),
            4.0,
            max_relative = 1e-8
        );
    }

    #[test]
    fn cap_at_median_guarded() {
        let mu = double_exp();
        let err = cap_halfline(&mu, mu.median() + 1e-9, Side::Right);
        assert!(matches!(err, Err(CoreError::AtMedian { .. })));
    }

    #[test]
    fn cap_is_monotone_along_the_tail() {
        let mu = double_exp();
        let mut prev = f64::INFINITY;
        for x in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let c = cap_halfline(&mu, x, Side::Right).unwrap();
            assert!(c < prev, "capacity must strictly decrease");
            prev = c;
        }
    }

    #[test]
    fn necessary_condition_log_rate_passes() {
        let mu = double_exp();
        // generous log rate: K log(e²/s)
        let beta = RateFunction::from_fn("Klog", |s: f64| 20.0 * (2.0 + (1.0 / s).ln()));
        let grid: Vec<f64> = crate::numerics::log_spaced(0.5, 20.0, 60);
        let report = check_necessary(&mu, &beta, &grid).unwrap();
        assert!(report.violations.is_empty(), "worst = {}", report.worst_ratio);
        assert!(report.worst_ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn necessary_condition_flat_rate_fails_far_out() {
        let mu = double_exp();
        let beta = RateFunction::constant(1.0);
        let grid: Vec<f64> = crate::numerics::log_spaced(0.5, 30.0, 80);
        let report = check_necessary(&mu, &beta, &grid).unwrap();
        assert!(!report.violations.is_empty());
        // lhs/cap grows like x/2 for the two-sided exponential
        assert!(report.worst_ratio > 5.0);
    }

    #[test]
    fn necessary_condition_huge_rate_never_fails() {
        let mu = double_exp();
        let beta = RateFunction::constant(1e300);
        let grid: Vec<f64> = crate::numerics::log_spaced(0.5, 30.0, 40);
        let report = check_necessary(&mu, &beta, &grid).unwrap();
        assert!(report.violations.is_empty());
    }

    #[test]
    fn sandwich_inequalities() {
        let mu = double_exp();
        let beta = RateFunction::from_fn("log", |s: f64| 1.0 + (1.0 / s).ln());
        for x in [0.7, 1.5, 3.0, 7.0] {
            let mass = mu.tail_mass(x, Side::Right).unwrap();
            let s_star = Kernel::Half.s_star(mass);
            let lower = s_star / beta.eval(s_star);
            let sup = necessary_sup_over_s(&beta, mass, 800);
            let full = Kernel::Half.full(mass);
            let upper = full / beta.eval(full);
            assert!(
                lower <= sup * (1.0 + 1e-9) && sup <= upper * (1.0 + 1e-9),
                "sandwich failed at x={x}: {lower} {sup} {upper}"
            );
        }
    }

    #[test]
    fn beta_from_capacity_gaussian_like_is_bounded() {
        let mu = build_measure(
            Potential::new(Family::Subexp { alpha: 2.0 }),
            &GridSpec::new(-7.8, 7.8, 2048),
        )
        .unwrap();
        let grid = default_tail_grid(&mu, 200, 1e-9).unwrap();
        let beta = beta_from_capacity(&mu, &grid).unwrap();
        let vals: Vec<f64> = beta
            .sample_log(1e-8, 1e-1, 100)
            .into_iter()
            .map(|(_, b)| b)
            .collect();
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi / lo <= 3.0, "spread {lo}..{hi}");
    }

    #[test]
    fn beta_from_capacity_is_non_increasing_and_grid_stable() {
        let mu = double_exp();
        let grid = default_tail_grid(&mu, 150, 1e-8).unwrap();
        let beta = beta_from_capacity(&mu, &grid).unwrap();
        assert!(beta.worst_increase(2e-8, 5e-2, 300) <= 1e-12);

        // refining the measure grid twice changes interior values < 1%
        let mu2 = build_measure(
            Potential::new(Family::DoubleExp),
            &GridSpec::new(-40.0, 40.0, 8192),
        )
        .unwrap();
        let grid2 = default_tail_grid(&mu2, 150, 1e-8).unwrap();
        let beta2 = beta_from_capacity(&mu2, &grid2).unwrap();
        for s in crate::numerics::log_spaced(1e-7, 1e-3, 9) {
            assert_relative_eq!(beta.eval(s), beta2.eval(s), max_relative = 1e-2);
        }
    }

    #[test]
    fn beta_from_capacity_requires_range() {
        let mu = double_exp();
        let grid: Vec<f64> = vec![1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8];
        assert!(matches!(
            beta_from_capacity(&mu, &grid),
            Err(CoreError::InsufficientRange { .. })
        ));
    }
}
