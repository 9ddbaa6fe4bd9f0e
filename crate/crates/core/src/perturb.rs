//! Unbounded perturbation machinery for growth-dominated potentials.
//!
//! A smooth `V` with `V → +∞` is *good* for the base measure `dμ = e^{-2W} dx`
//! and a growth function `G` when `|V′|² - 2LV ≥ G(V)` on `{V ≥ A}`, where
//! `L = (1/2)Δ - W′∂` is the generator reversible for μ. Under the isometry
//! `f = e^{-V} g` the Dirichlet forms of μ and `ν = e^{-2V} μ` differ exactly
//! by `∫ g²(2LV - |V′|²) dν`, which is what the witness constants below
//! exploit.

use crate::measure::{GridFunction, Measure1D, Potential};
use crate::numerics::{invert_monotone, lin_spaced, log_spaced};
use crate::quad;
use crate::rate::RateFunction;
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Growth function `G(z) = coeff · z^power` on `z > 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GrowthFunction {
    pub coeff: f64,
    pub power: f64,
}

impl GrowthFunction {
    pub fn new(coeff: f64, power: f64) -> Self {
        GrowthFunction { coeff, power }
    }

    pub fn eval(&self, z: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else {
            self.coeff * z.max(0.0).powf(self.power)
        }
    }
}

/// Evidence that a potential is good for `(G, μ)`, plus the quantities the
/// witness constants need.
#[derive(Clone, Debug, Serialize)]
pub struct GoodPotentialReport {
    pub g: GrowthFunction,
    /// Threshold `A`: the growth bound is required on `{V ≥ A}` only.
    pub a_threshold: f64,
    /// `M(V) = sup_{V ≤ A} (2LV - |V′|²)`.
    pub m_v: f64,
    /// Global `inf V` over the domain.
    pub inf_v: f64,
    /// Scan points in `{V ≥ A}` where the growth bound fails.
    pub violations: Vec<f64>,
    /// Tabulated `b ↦ h(b) = sup_{A ≤ z ≤ b} 2z/G(z)` (non-decreasing).
    pub h_table: Vec<(f64, f64)>,
    pub pass: bool,
}

impl GoodPotentialReport {
    /// `h(b) = sup_{A ≤ z ≤ b} 2z/G(z)`, evaluated by a direct scan.
    pub fn h_of_b(&self, b: f64) -> f64 {
        h_eval(&self.g, self.a_threshold, b)
    }
}

fn h_eval(g: &GrowthFunction, a: f64, b: f64) -> f64 {
    let b = b.max(a);
    if g.coeff == 0.0 {
        return f64::INFINITY;
    }
    // 2z/G(z) = (2/c) z^{1-p} is monotone; still scan to stay generic
    lin_spaced(a.max(1e-12), b.max(a + 1e-12), 64)
        .into_iter()
        .map(|z| 2.0 * z / g.eval(z))
        .fold(0.0_f64, f64::max)
}

/// Checks `|V′|² - 2LV ≥ G(V)` on `{V ≥ A}` over the base measure's grid,
/// with `LV = (1/2)V″ - W′V′` for the base `dμ = e^{-2W} dx`.
pub fn check_good(
    base: &Measure1D,
    v: &Potential,
    g: &GrowthFunction,
    a_threshold: f64,
) -> Result<GoodPotentialReport> {
    let w_pot = base.potential();
    let mut m_v = f64::NEG_INFINITY;
    let mut inf_v = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for &x in base.nodes() {
        let vx = v.phi(x);
        let vpx = v.phi_prime(x);
        let vppx = v.phi_second(x);
        if !(vx.is_finite() && vpx.is_finite() && vppx.is_finite()) {
            return Err(CoreError::DerivativeMissing {
                what: "V must be twice differentiable on the grid",
            });
        }
        // base potential is e^{-Φ_base} = e^{-2W}, so W′ = Φ′_base / 2
        let w_prime = 0.5 * w_pot.phi_prime(x);
        let lv = 0.5 * vppx - w_prime * vpx;
        let carre = vpx * vpx - 2.0 * lv;
        inf_v = inf_v.min(vx);
        v_max = v_max.max(vx);
        if vx >= a_threshold {
            if carre < g.eval(vx) - 1e-10 * (1.0 + g.eval(vx).abs()) {
                violations.push(x);
            }
        } else {
            m_v = m_v.max(-carre);
        }
    }
    if m_v == f64::NEG_INFINITY {
        // sublevel set empty on the grid
        m_v = 0.0;
    }
    let (lo, hi) = base.domain();
    let escapes = v.phi(lo) > a_threshold && v.phi(hi) > a_threshold;
    let pass = violations.is_empty() && escapes;
    let bs = lin_spaced(a_threshold, v_max.max(a_threshold + 1.0), 200);
    let h_table = bs
        .into_iter()
        .map(|b| (b, h_eval(g, a_threshold, b)))
        .collect();
    Ok(GoodPotentialReport {
        g: *g,
        a_threshold,
        m_v,
        inf_v,
        violations,
        h_table,
        pass,
    })
}

/// `s_b = inf { s > 0 : β_WL(s) ≤ h }` by bisection in log s; `+∞` when even
/// the frozen value of β stays above `h`.
pub fn s_b_from_rate(beta_wl: &RateFunction, h: f64) -> f64 {
    if !h.is_finite() {
        return 0.0;
    }
    let s_hi = if beta_wl.s_max().is_finite() {
        beta_wl.s_max()
    } else {
        1.0
    };
    if beta_wl.eval(s_hi) > h {
        return f64::INFINITY;
    }
    let s_lo = 1e-300;
    if beta_wl.eval(s_lo) <= h {
        return s_lo;
    }
    let f = |ls: f64| beta_wl.eval(ls.exp());
    invert_monotone(&f, s_lo.ln(), s_hi.ln(), h)
        .map(|ls| ls.exp())
        .unwrap_or(f64::INFINITY)
}

/// The pair of witness constants for the perturbed inequality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitConstants {
    pub c_ub: f64,
    pub d_ub: f64,
    pub h_b: f64,
    pub s_b: f64,
    /// `∫_{V ≥ b} 2V dν_V`.
    pub tail_integral: f64,
}

/// Evaluates
/// `C(u,b) = h(b) + (2+2A+M(V)h(b)) β_WP^ν(u)` and
/// `D(u,b) = s_b e^{-2 inf V} + (2+2A+M(V)h(b)) u + ∫_{V≥b} 2V dν_V`,
/// with `ν = e^{-2V}·μ` normalized and the tail integral by quadrature.
pub fn wit_constants(
    base: &Measure1D,
    report: &GoodPotentialReport,
    v: &Potential,
    beta_wl_base: &RateFunction,
    beta_wp_nu: &RateFunction,
    u: f64,
    b: f64,
) -> Result<WitConstants> {
    assert!(u > 0.0);
    if b < report.a_threshold {
        return Err(CoreError::Config(format!(
            "b = {b} below the goodness threshold A = {}",
            report.a_threshold
        )));
    }
    let h_b = report.h_of_b(b);
    let s_b = s_b_from_rate(beta_wl_base, h_b);
    let mid = 2.0 + 2.0 * report.a_threshold + report.m_v * h_b;

    // ν_V = e^{-2V} dμ / Z_ν
    let nodes = base.nodes();
    let dens = |x: f64| (-2.0 * v.phi(x)).exp() * base.rho(x);
    let z_nu = quad::integral_over_grid(&dens, nodes);
    if !(z_nu.is_finite() && z_nu > 0.0) {
        return Err(CoreError::TailIntegralDiverges);
    }
    let mut tail = 0.0;
    for i in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let (v0, v1) = (v.phi(x0), v.phi(x1));
        let f = |x: f64| {
            let vx = v.phi(x);
            if vx >= b {
                2.0 * vx * dens(x)
            } else {
                0.0
            }
        };
        if v0 >= b && v1 >= b {
            tail += quad::integral(&|x| 2.0 * v.phi(x) * dens(x), x0, x1);
        } else if v0 >= b || v1 >= b {
            // crossing cell: resolve the boundary before integrating
            let cross = invert_monotone(&|x| v.phi(x), x0, x1, b).unwrap_or(0.5 * (x0 + x1));
            tail += quad::integral(&f, x0, cross) + quad::integral(&f, cross, x1);
        }
    }
    tail /= z_nu;
    if !tail.is_finite() {
        return Err(CoreError::TailIntegralDiverges);
    }

    let c_ub = h_b + mid * beta_wp_nu.eval(u);
    let d_ub = s_b * (-2.0 * report.inf_v).exp() + mid * u + tail;
    Ok(WitConstants {
        c_ub,
        d_ub,
        h_b,
        s_b,
        tail_integral: tail,
    })
}

/// Checks the base-measure moment condition `∫ e^{-pV} dμ < ∞` needed for
/// unbounded bases, on the grid p ∈ {1.0, 1.5, 1.9}.
pub fn moment_condition(base: &Measure1D, v: &Potential) -> Vec<(f64, f64)> {
    [1.0, 1.5, 1.9]
        .iter()
        .map(|&p| {
            let val = quad::integral_over_grid(
                &|x: f64| (-p * v.phi(x)).exp() * base.rho(x),
                base.nodes(),
            );
            (p, val)
        })
        .collect()
}

/// Outcome of the two-limit test behind the Poincaré corollary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorollaryTs {
    pub poincare: bool,
    /// Last-decade value of `h(b)/b`.
    pub h_ratio: f64,
    /// Last-decade value of `β_WL(s)/log(1/s)`.
    pub beta_ratio: f64,
}

/// Tests `h(b)/b → 0` and `β_WL(s)/log(1/s) → 0` numerically (last-decade
/// ratio < 0.2 and decreasing); on success returns
/// `β^ν(s) = a·h(a′ log(1/s))` with the recorded defaults `a = a′ = 1`.
pub fn corollary_ts_check(
    report: &GoodPotentialReport,
    beta_wl_base: &RateFunction,
) -> (CorollaryTs, Option<RateFunction>) {
    // limit 1: h(b)/b over a wide b range
    let bs = log_spaced(report.a_threshold.max(1.0), 1e6, 200);
    let hb: Vec<f64> = bs.iter().map(|&b| report.h_of_b(b) / b).collect();
    let n = hb.len();
    let tail = &hb[n - n / 5..];
    let h_ratio = tail.last().copied().unwrap_or(f64::INFINITY);
    let h_ok = h_ratio < 0.2 && tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));

    // limit 2: β(s)/log(1/s) as s → 0
    let ss = log_spaced(1e-12, 1e-2, 200);
    let br: Vec<f64> = ss
        .iter()
        .map(|&s| beta_wl_base.eval(s) / (1.0 / s).ln())
        .collect();
    let tail2 = &br[..br.len() / 5];
    let beta_ratio = tail2.first().copied().unwrap_or(f64::INFINITY);
    let b_ok = beta_ratio < 0.2 && tail2.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));

    let poincare = h_ok && b_ok;
    let rate = if poincare {
        let g = report.g;
        let a_thr = report.a_threshold;
        Some(
            RateFunction::from_fn("corollary_ts", move |s| {
                h_eval(&g, a_thr, (1.0 / s).ln())
            })
            .with_s_max(0.1),
        )
    } else {
        None
    };
    (
        CorollaryTs {
            poincare,
            h_ratio,
            beta_ratio,
        },
        rate,
    )
}

/// Density ratio `dν_V/dμ` as a grid function (normalized), handy for
/// feeding perturbed measures into the verifier.
pub fn nu_density(base: &Measure1D, v: &Potential) -> GridFunction {
    let dens = base.grid_function(|x| (-2.0 * v.phi(x)).exp());
    let z: f64 = base.integral_gf(&dens);
    dens.map(|t| t / z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{build_base_measure, Family, GridSpec};
    use crate::rate::detect_poincare;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn lebesgue(span: f64, n: usize) -> Measure1D {
        build_base_measure(Potential::new(Family::Flat), &GridSpec::new(-span, span, n)).unwrap()
    }

    #[test]
    fn quadratic_potential_is_linear_good() {
        // V = x², G(z) = z: |V′|² - V″ = 4x² - 2 ≥ x² iff 3x² ≥ 2
        let base = lebesgue(12.0, 1024);
        let v = Potential::new(Family::Gaussian);
        let g = GrowthFunction::new(1.0, 1.0);
        let rep = check_good(&base, &v, &g, 1.0).unwrap();
        assert!(rep.pass, "{:?}", rep.violations);
        assert_abs_diff_eq!(rep.inf_v, 0.0, epsilon = 1e-12);
        // h(b) = sup 2z/z = 2
        assert_relative_eq!(rep.h_of_b(10.0), 2.0, max_relative = 1e-12);
        // M(V) = sup_{x²≤1}(2 - 4x²)·(1/2 factor folded) = 2 at x = 0
        assert_relative_eq!(rep.m_v, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn subexp_potential_matches_its_growth_class() {
        // V = (1+x²)^{3/4} with G(z) = z^{2(1-1/α)}, α = 3/2
        let base = lebesgue(40.0, 2048);
        let v = Potential::smoothed(Family::Subexp { alpha: 1.5 });
        let g = GrowthFunction::new(0.5, 2.0 * (1.0 - 1.0 / 1.5));
        let rep = check_good(&base, &v, &g, 4.0).unwrap();
        assert!(rep.pass, "violations at {:?}", &rep.violations[..rep.violations.len().min(4)]);
        // h(b) ~ (2/c) b^{1/3} grows sublinearly
        let h1 = rep.h_of_b(10.0);
        let h2 = rep.h_of_b(1000.0);
        assert!(h2 / h1 < 10.0 && h2 > h1);
    }

    #[test]
    fn zero_growth_passes_trivially() {
        let base = lebesgue(12.0, 512);
        let v = Potential::new(Family::Gaussian);
        let g = GrowthFunction::new(0.0, 1.0);
        let rep = check_good(&base, &v, &g, 1.0).unwrap();
        assert!(rep.pass);
        assert!(rep.h_of_b(5.0).is_infinite());
    }

    #[test]
    fn h_table_monotone_and_s_b_antitone() {
        let base = lebesgue(40.0, 1024);
        let v = Potential::smoothed(Family::Subexp { alpha: 1.5 });
        let g = GrowthFunction::new(1.0, 1.0 / 3.0);
        let rep = check_good(&base, &v, &g, 2.0).unwrap();
        for w in rep.h_table.windows(2) {
            assert!(w[1].1 >= w[0].1 * (1.0 - 1e-12), "h must be non-decreasing");
        }
        let beta = RateFunction::power_log(1.0, 0.0, 1.0);
        let mut prev = f64::INFINITY;
        for b in [2.0, 5.0, 20.0, 100.0] {
            let s = s_b_from_rate(&beta, rep.h_of_b(b));
            assert!(s <= prev * (1.0 + 1e-12), "s_b must be non-increasing");
            prev = s;
        }
    }

    #[test]
    fn witness_constants_finite_and_monotone_in_u() {
        let base = lebesgue(12.0, 1024);
        let v = Potential::new(Family::Gaussian);
        let g = GrowthFunction::new(1.0, 1.0);
        let rep = check_good(&base, &v, &g, 1.0).unwrap();
        let beta_wl = RateFunction::power_log(1.0, 0.0, 1.0);
        let beta_wp = RateFunction::constant(0.5);
        let w1 = wit_constants(&base, &rep, &v, &beta_wl, &beta_wp, 1e-3, 10.0).unwrap();
        assert!(w1.c_ub.is_finite() && w1.d_ub.is_finite());
        // tail term dominated by b e^{-2b} scale
        assert!(w1.tail_integral <= 10.0 * (-2.0_f64 * 10.0).exp() * 100.0);

        let w2 = wit_constants(&base, &rep, &v, &beta_wl, &beta_wp, 1e-2, 10.0).unwrap();
        assert!(w2.d_ub > w1.d_ub, "D increases with u");
    }

    #[test]
    fn witness_tail_vanishes_as_b_grows() {
        let base = lebesgue(12.0, 1024);
        let v = Potential::new(Family::Gaussian);
        let g = GrowthFunction::new(1.0, 1.0);
        let rep = check_good(&base, &v, &g, 1.0).unwrap();
        let beta_wl = RateFunction::power_log(1.0, 0.0, 1.0);
        let beta_wp = RateFunction::constant(0.5);
        let u = 1e-4;
        let mid = 2.0 + 2.0 * rep.a_threshold + rep.m_v * rep.h_of_b(60.0);
        let w = wit_constants(&base, &rep, &v, &beta_wl, &beta_wp, u, 60.0).unwrap();
        assert!(w.tail_integral < 1e-30);
        // remaining parts: s_b e^{-2 inf V} + mid·u exactly
        assert_relative_eq!(
            w.d_ub,
            w.s_b * (-2.0 * rep.inf_v).exp() + mid * u,
            max_relative = 1e-9
        );
    }

    #[test]
    fn corollary_detects_poincare_for_linear_growth() {
        let base = lebesgue(12.0, 512);
        let v = Potential::new(Family::Gaussian);
        let g = GrowthFunction::new(1.0, 1.0);
        let rep = check_good(&base, &v, &g, 1.0).unwrap();
        // base rate well below log(1/s)
        let beta = RateFunction::power_log(1.0, 0.0, 0.5);
        let (ts, rate) = corollary_ts_check(&rep, &beta);
        assert!(ts.poincare, "{ts:?}");
        let rate = rate.unwrap();
        // h bounded ⇒ β^ν constant ⇒ detect_poincare says yes
        assert!(detect_poincare(&rate).unwrap().poincare);
    }

    #[test]
    fn corollary_rejects_log_rate() {
        let base = lebesgue(12.0, 512);
        let v = Potential::new(Family::Gaussian);
        let g = GrowthFunction::new(1.0, 1.0);
        let rep = check_good(&base, &v, &g, 1.0).unwrap();
        let beta = RateFunction::power_log(1.0, 0.0, 1.0); // ratio → 1
        let (ts, rate) = corollary_ts_check(&rep, &beta);
        assert!(!ts.poincare, "{ts:?}");
        assert!(rate.is_none());
    }

    #[test]
    fn sublinear_growth_recovers_subexp_rate() {
        // G(z) = z^{2/3}: h(b) ~ 2 b^{1/3}, so β^ν(s) ∝ log(1/s)^{1/3}
        let base = lebesgue(40.0, 1024);
        let v = Potential::smoothed(Family::Subexp { alpha: 1.5 });
        let g = GrowthFunction::new(1.0, 2.0 / 3.0);
        let rep = check_good(&base, &v, &g, 4.0).unwrap();
        let beta = RateFunction::power_log(1.0, 0.0, 0.3);
        let (ts, rate) = corollary_ts_check(&rep, &beta);
        assert!(ts.poincare, "{ts:?}");
        // fit below the h-clamp region (log(1/s) ≥ A there)
        let rate = rate.unwrap();
        let samples = rate.sample_log(1e-8, 1e-3, 40);
        let fit = crate::hardy::fit_rate_exponents_from(&samples).unwrap();
        assert_abs_diff_eq!(fit.power, 0.0, epsilon = 0.05);
        assert_abs_diff_eq!(fit.log_exp, 1.0 / 3.0, epsilon = 0.1);
    }

    #[test]
    fn moment_condition_for_gaussian_tilt() {
        let base = lebesgue(12.0, 512);
        let v = Potential::new(Family::Gaussian);
        for (p, val) in moment_condition(&base, &v) {
            assert!(val.is_finite() && val > 0.0, "p = {p}");
        }
    }
}
