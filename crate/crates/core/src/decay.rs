//! Predicted decay curves for the semigroup, to be overlaid on measured
//! traces: the ξ-curve obtained by inverting the weak log-Sobolev rate, its
//! converse, the entropy splitting device for unbounded initial data, the
//! iterated logarithmic decay, short-time kernel bounds, the L²-membership
//! threshold for exponential initial laws, and the total-variation schedule.

use crate::measure::{GridFunction, Measure1D, Potential};
use crate::numerics::{invert_monotone, lin_spaced, linear_fit, log_spaced};
use crate::quad;
use crate::rate::{restricted_ls_constant, RateFunction};
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A named, non-increasing bound evaluator on a validity range. Curves with
/// a free multiplicative constant (`free_scale`) are fit families: the
/// constant is calibrated against a measured trace when overlaid.
#[derive(Clone)]
pub struct BoundCurve {
    pub name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub t_min: f64,
    pub t_max: f64,
    pub params: Vec<(String, f64)>,
    pub free_scale: bool,
}

impl std::fmt::Debug for BoundCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BoundCurve({}, valid [{:.3e}, {:.3e}])",
            self.name, self.t_min, self.t_max
        )
    }
}

impl BoundCurve {
    pub fn new(
        name: impl Into<String>,
        t_min: f64,
        t_max: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BoundCurve {
            name: name.into(),
            eval: Arc::new(eval),
            t_min,
            t_max,
            params: Vec::new(),
            free_scale: false,
        }
    }

    pub fn with_params(mut self, params: Vec<(String, f64)>) -> Self {
        self.params = params;
        self
    }

    pub fn with_free_scale(mut self) -> Self {
        self.free_scale = true;
        self
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// Worst relative upward step over `n` samples of the validity range;
    /// 0 for a non-increasing curve.
    pub fn worst_increase(&self, n: usize) -> f64 {
        let ts = lin_spaced(self.t_min, self.t_max, n.max(2));
        let mut worst: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for t in ts {
            let v = self.value(t);
            if v > prev {
                worst = worst.max((v - prev) / prev.abs().max(1e-300));
            }
            prev = v;
        }
        worst
    }
}

/// The decay profile obtained by inverting a weak log-Sobolev rate:
/// `r(t)` solves `-(1/2) β(r) log(r/ε) = t` on `(0, ε)`, and the proven
/// entropy bound is `(e^{-1}+ε) · (r(t)/ε) · Osc²(√h)`.
#[derive(Clone)]
pub struct XiCurve {
    pub eps: f64,
    beta: RateFunction,
    r_floor: f64,
}

impl XiCurve {
    /// Solution `r(t)` of the inversion rule (the raw inverted variable).
    pub fn r_of_t(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.eps;
        }
        let eps = self.eps;
        let beta = &self.beta;
        let g = |lr: f64| {
            let r = lr.exp();
            -0.5 * beta.eval(r) * (r / eps).ln()
        };
        let lo = self.r_floor.ln();
        let hi = (eps * (1.0 - 1e-12)).ln();
        if g(lo) <= t {
            return self.r_floor;
        }
        invert_monotone(&g, lo, hi, t)
            .map(|lr| lr.exp())
            .unwrap_or(self.r_floor)
    }

    /// Normalized decay factor `ξ_ε(t) = r(t)/ε ∈ (0, 1]`; this is the
    /// factor multiplying `(e^{-1}+ε) Osc²(√h)` in the entropy bound.
    pub fn xi(&self, t: f64) -> f64 {
        self.r_of_t(t) / self.eps
    }

    /// The entropy bound curve `t ↦ (e^{-1}+ε)·ξ_ε(t)` (the `Osc²(√h)`
    /// prefactor is applied by the caller).
    pub fn bound_curve(&self) -> BoundCurve {
        let this = self.clone();
        let pref = (-1.0_f64).exp() + self.eps;
        BoundCurve::new("xi_entropy", 0.0, f64::INFINITY, move |t| {
            pref * this.xi(t)
        })
        .with_params(vec![("eps".into(), self.eps)])
    }
}

/// Builds the ξ-curve, verifying that the inversion map is strictly
/// monotone on the sampled range.
pub fn xi_from_beta(beta_wl: &RateFunction, eps: f64) -> Result<XiCurve> {
    assert!(eps > 0.0);
    let g = |r: f64| -0.5 * beta_wl.eval(r) * (r / eps).ln();
    let rs = log_spaced(1e-280, eps * (1.0 - 1e-9), 80);
    // rates diverging faster than any power overflow the map deep down;
    // the usable floor starts at the first finite sample
    let mut r_floor = f64::NAN;
    let mut prev = f64::INFINITY;
    for &r in &rs {
        let v = g(r);
        if !v.is_finite() {
            if r_floor.is_nan() {
                continue;
            }
            return Err(CoreError::NotInvertible {
                what: "xi inversion rule",
            });
        }
        if r_floor.is_nan() {
            r_floor = r;
        } else if v >= prev {
            return Err(CoreError::NotInvertible {
                what: "xi inversion rule",
            });
        }
        prev = v;
    }
    if r_floor.is_nan() {
        return Err(CoreError::NotInvertible {
            what: "xi inversion rule",
        });
    }
    Ok(XiCurve {
        eps,
        beta: beta_wl.clone(),
        r_floor,
    })
}

/// Converse direction: from a decay profile `ξ` recover a weak log-Sobolev
/// rate `β(s) = ψ^{-1}(s)` with `ψ(t) = 2√(2 ξ(t))`, and flag the Poincaré
/// case via the rate fit.
pub struct ConverseResult {
    pub rate: RateFunction,
    pub poincare: bool,
}

pub fn converse_beta_from_xi(
    xi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    t_min: f64,
    t_max: f64,
) -> Result<ConverseResult> {
    let ts = lin_spaced(t_min, t_max, 200);
    let mut prev = f64::INFINITY;
    for &t in &ts {
        let v = xi(t);
        if v >= prev {
            return Err(CoreError::NotInvertible {
                what: "xi must be strictly decreasing",
            });
        }
        prev = v;
    }
    let xi = Arc::new(xi);
    let xi2 = xi.clone();
    let rate = RateFunction::from_fn("converse_beta_from_xi", move |s| {
        let psi = |t: f64| 2.0 * (2.0 * xi2(t)).sqrt();
        match invert_monotone(&psi, t_min, t_max, s) {
            Some(t) => t,
            None => {
                if s >= psi(t_min) {
                    t_min
                } else {
                    t_max
                }
            }
        }
    })
    .with_s_max(2.0 * (2.0 * xi(t_min)).sqrt());
    let poincare = crate::rate::detect_poincare(&rate)
        .map(|d| d.poincare)
        .unwrap_or(false);
    Ok(ConverseResult { rate, poincare })
}

/// Entropy of the over-threshold part:
/// `Ent(h 1_{h>K}) ≤ (ec+2) (H/log K) log(log K / H)` for `K ≥ e²`,
/// valid when `H = Ent(h) ≤ log(K)/(2e)`.
pub fn entropy_split_bound(h_ent: f64, k: f64, c: f64) -> Result<f64> {
    assert!(h_ent >= 0.0 && c > 0.0);
    let e = std::f64::consts::E;
    if k < e * e {
        return Err(CoreError::PremiseViolated {
            what: format!("K = {k} below e²"),
        });
    }
    let log_k = k.ln();
    if h_ent > log_k / (2.0 * e) {
        return Err(CoreError::PremiseViolated {
            what: format!("Ent = {h_ent} above log(K)/(2e) = {}", log_k / (2.0 * e)),
        });
    }
    if h_ent == 0.0 {
        return Ok(0.0);
    }
    Ok((e * c + 2.0) * (h_ent / log_k) * (log_k / h_ent).ln())
}

/// Iterated logarithmic decay `t ↦ C / log^{k(1-ε)}(1/ξ(t))`; `C` is a free
/// fit constant calibrated when overlaid on a trace.
pub fn iterated_decay_curve(xi: &XiCurve, k: u32, eps: f64) -> BoundCurve {
    assert!(k >= 1 && (0.0..=1.0).contains(&eps));
    let xi = xi.clone();
    let expo = k as f64 * (1.0 - eps);
    // meaningful once ξ(t) < 1/e
    let t_start = {
        let f = |t: f64| xi.xi(t);
        invert_monotone(&f, 1e-6, 1e6, (-1.0_f64).exp()).unwrap_or(1.0)
    };
    BoundCurve::new("iterated_log_decay", t_start, f64::INFINITY, move |t| {
        let x = xi.xi(t);
        1.0 / (1.0 / x).ln().powf(expo)
    })
    .with_params(vec![("k".into(), k as f64), ("eps".into(), eps)])
    .with_free_scale()
}

/// Interpolation-regime decay `e^{1-(t-t₀)^{(1-ε)α/(2-εα)}}` for α ∈ [1, 2].
pub fn lo_decay_curve(alpha: f64, eps: f64, t_offset: f64) -> BoundCurve {
    assert!((1.0..=2.0).contains(&alpha) && eps > 0.0 && eps <= 1.0);
    let expo = (1.0 - eps) * alpha / (2.0 - eps * alpha);
    BoundCurve::new("interp_exp_decay", t_offset, f64::INFINITY, move |t| {
        (1.0 - ((t - t_offset).max(0.0)).powf(expo)).exp()
    })
    .with_params(vec![
        ("alpha".into(), alpha),
        ("eps".into(), eps),
        ("exponent".into(), expo),
        ("t_offset".into(), t_offset),
    ])
}

/// Short-time kernel bounds from an initial point mass at `x` (dimension 1):
/// a bound on `∫ P_t δ_x log₊^p(P_t δ_x) dμ` for `t ∈ (0, 1/2π)` and the L²
/// bound `(2πt)^{-1/2} e^{C_min t} e^{2V(x)}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelBounds {
    pub log_moment_ub: f64,
    pub l2_ub: f64,
    pub c_min: f64,
}

/// `C_min = (-min (V′² - V″))₊` over the scan nodes; the drift condition
/// `|∇V|² - ΔV ≥ -C_min` then holds with a nonnegative constant.
pub fn c_min_of(v: &Potential, nodes: &[f64]) -> f64 {
    let mut min_val = f64::INFINITY;
    for &x in nodes {
        let d = v.phi_prime(x);
        min_val = min_val.min(d * d - v.phi_second(x));
    }
    (-min_val).max(0.0)
}

pub fn kernel_bounds(v: &Potential, nodes: &[f64], x: f64, t: f64, p: f64) -> Result<KernelBounds> {
    assert!(p >= 1.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    if !(t > 0.0 && t < 1.0 / two_pi) {
        return Err(CoreError::TimeOutOfRange {
            t,
            lo: 0.0,
            hi: 1.0 / two_pi,
        });
    }
    let c_min = c_min_of(v, nodes);
    let vx = v.phi(x);
    let v_plus = vx.max(0.0);
    let log_term = 0.5 * (1.0 / (two_pi * t)).ln();
    let log_moment_ub = 4.0_f64.powf(p - 1.0)
        * (v_plus.powf(p)
            + (0.5 * c_min * t).powf(p)
            + log_term.powf(p)
            + (vx + p * (p.ln() - 1.0) + 0.5 * c_min * t).exp());
    let l2_ub = (two_pi * t).powf(-0.5) * (c_min * t).exp() * (2.0 * vx).exp();
    Ok(KernelBounds {
        log_moment_ub,
        l2_ub,
        c_min,
    })
}

/// Whether `P_t ν ∈ L²(μ)` for the two-sided exponential equilibrium and an
/// initial law `dν ∝ e^{-λ|x|} dx`, decided by the growth rate of the
/// squared smoothed tail functional
/// `I(u) = ∫_{x>0} e^x e^{-(u-x)²/2t} ν(dx)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct L2Membership {
    pub finite: bool,
    /// Fitted exponential rate of `I(u)²`; negative means integrable.
    pub tail_exponent: f64,
}

pub fn l2_membership(lambda: f64, t: f64) -> L2Membership {
    assert!(lambda > 0.0 && t > 0.0);
    let sigma = t.sqrt();
    let a = 1.0 - lambda;
    let inner = |u: f64| {
        // ∫_0^∞ e^{a x} e^{-(u-x)²/2t} dx · (λ/2), split at the Gaussian
        // center c = u + a t so the narrow bump is never missed
        let c = u + a * t;
        let hi = (c + 12.0 * sigma).max(1.0);
        let mut cuts = vec![0.0, (c - 10.0 * sigma).clamp(0.0, hi), (c + 10.0 * sigma).clamp(0.0, hi), hi];
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        cuts.dedup();
        let f = |x: f64| (a * x - (u - x) * (u - x) / (2.0 * t)).exp();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += quad::integrate(&f, w[0], w[1], 1e-10, 0.0);
        }
        0.5 * lambda * total
    };
    let us = lin_spaced(20.0, 40.0, 41);
    let logs: Vec<f64> = us.iter().map(|&u| inner(u).max(1e-300).ln()).collect();
    let (slope, _) = linear_fit(&us, &logs);
    let rate = 2.0 * slope;
    L2Membership {
        finite: rate < -0.05,
        tail_exponent: rate,
    }
}

/// Inputs for the total-variation bound schedule.
pub struct TvInputs<'a> {
    pub mu: &'a Measure1D,
    /// Initial density w.r.t. μ (mass 1).
    pub h0: &'a GridFunction,
    /// Truncation levels; `f64::INFINITY` means "no truncation".
    pub k_grid: Vec<f64>,
    /// Poincaré constant, enabling the variance route `√(K e^{-t/C_P})`.
    pub poincare: Option<f64>,
    /// ξ-curve from a weak log-Sobolev rate, enabling the entropy route.
    pub xi: Option<XiCurve>,
    /// `(C_P, β_SWL)` enabling the restricted exponential entropy route.
    pub restricted: Option<(f64, RateFunction)>,
}

/// Lower envelope over the K-grid of
/// `min(√Var-bound, √(2 m_K Ent-bound)) + 2∫(h-K)₊ dμ`.
pub fn tv_bound_schedule(inputs: &TvInputs) -> Result<BoundCurve> {
    if inputs.poincare.is_none() && inputs.xi.is_none() && inputs.restricted.is_none() {
        return Err(CoreError::NoCertificate);
    }
    let mu = inputs.mu;
    let h0 = inputs.h0;
    let mass = mu.integral_gf(h0);
    let sup_h = h0.max();

    struct PerK {
        k_eff: f64,
        tail: f64,
        m_k: f64,
        osc2_sqrt: f64,
        ent: f64,
        a_restricted: Option<f64>,
    }
    let mut per_k = Vec::new();
    for &k in &inputs.k_grid {
        let k_eff = k.min(sup_h);
        let hk = h0.map(|v| v.min(k_eff));
        let m_k = mu.integral_gf(&hk);
        let tail = 2.0 * (mass - m_k).max(0.0);
        let sq = hk.map(|v| v.max(0.0).sqrt());
        let osc2_sqrt = sq.oscillation().powi(2);
        let ent = mu.entropy(&hk).unwrap_or(0.0);
        let a_restricted = inputs
            .restricted
            .as_ref()
            .map(|(cp, swl)| restricted_ls_constant(swl, *cp, k_eff.sqrt().max(1e-12)).a);
        per_k.push(PerK {
            k_eff,
            tail,
            m_k,
            osc2_sqrt,
            ent,
            a_restricted,
        });
    }

    let poincare = inputs.poincare;
    let xi = inputs.xi.clone();
    let pref = xi.as_ref().map(|x| (-1.0_f64).exp() + x.eps);
    let curve = BoundCurve::new("tv_schedule", 0.0, f64::INFINITY, move |t| {
        let mut best = f64::INFINITY;
        for pk in &per_k {
            let mut head = f64::INFINITY;
            if let Some(cp) = poincare {
                head = head.min((pk.k_eff * (-t / cp).exp()).sqrt());
            }
            if let (Some(x), Some(p)) = (&xi, pref) {
                let ent_bound = p * x.xi(t) * pk.osc2_sqrt;
                head = head.min((2.0 * pk.m_k * ent_bound).sqrt());
            }
            if let Some(a) = pk.a_restricted {
                let ent_bound = (-t / a).exp() * pk.ent;
                head = head.min((2.0 * pk.m_k * ent_bound).sqrt());
            }
            best = best.min(head + pk.tail);
        }
        best
    })
    .with_params(vec![("k_points".into(), inputs.k_grid.len() as f64)]);
    Ok(curve)
}
