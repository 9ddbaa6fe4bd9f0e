//! Rate-function algebra.
//!
//! A [`RateFunction`] `s ↦ β(s)` is the common currency of every inequality
//! in the crate: the weak log-Sobolev inequality reads
//! `Ent_μ(f²) ≤ β(s) ∫|∇f|² dμ + s Osc²(f)` for all `s > 0`, and the weak
//! Poincaré / super-Poincaré / Beckner families are indexed the same way.
//! Only the behaviour of `β` near 0 matters; above `s_max` every rate is
//! extended by its value at `s_max`.
//!
//! The conversions in this module are exact pointwise evaluations of the
//! respective formulas; unspecified universal constants live in
//! [`ConstantsPolicy`] (all defaulting to 1) and are recorded in certificate
//! provenance rather than silently baked in.

use crate::numerics::{linear_fit, log_spaced, scan_golden_min};
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Inequality families a certificate can refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InequalityKind {
    /// Weak log-Sobolev: entropy vs Dirichlet + s·Osc².
    Wlsi,
    /// Weak Poincaré: variance vs Dirichlet + s·Osc².
    Wpi,
    /// Super-Poincaré on `[1, ∞)`.
    Spi,
    /// General Beckner; the stored rate is the function `T` on `(0, 1]`.
    Gbi,
    /// Restricted log-Sobolev (constant depends on the sup norm).
    Rlsi,
}

impl InequalityKind {
    pub fn name(&self) -> &'static str {
        match self {
            InequalityKind::Wlsi => "WLSI",
            InequalityKind::Wpi => "WPI",
            InequalityKind::Spi => "SPI",
            InequalityKind::Gbi => "GBI",
            InequalityKind::Rlsi => "RLSI",
        }
    }
}

/// Free constants the formulas leave unspecified ("for some universal
/// constants ..."). Defaults are 1 except the freeze point `s0`; every use
/// is recorded in provenance so runs stay reproducible.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsPolicy {
    /// Argument constant in the WPI→WLSI formula.
    pub c: f64,
    /// Prefactor constant in the WPI→WLSI formula.
    pub c_prime: f64,
    /// Freeze point for the WPI→WLSI formula.
    pub s0: f64,
    /// Argument constant inside the variance-flavoured weak log-Sobolev rate.
    pub kappa: f64,
    /// Prefactor constant in the GBI→WLSI formula.
    pub gbi_c: f64,
    /// Argument constant in the GBI→WLSI formula.
    pub gbi_c_prime: f64,
}

impl Default for ConstantsPolicy {
    fn default() -> Self {
        ConstantsPolicy {
            c: 1.0,
            c_prime: 1.0,
            s0: 0.1,
            kappa: 1.0,
            gbi_c: 1.0,
            gbi_c_prime: 1.0,
        }
    }
}

#[derive(Clone)]
enum Repr {
    Const(f64),
    /// `coeff · s^{-power} · ln(1/s)^{log_exp}`
    PowerLog {
        coeff: f64,
        power: f64,
        log_exp: f64,
    },
    /// `(s, β)` pairs sorted by `s`; log-log linear interpolation.
    Table(Arc<Vec<(f64, f64)>>),
    /// Lazily composed transform of another rate.
    Map {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

/// A positive rate function with a freeze point `s_max`; evaluation at
/// `s ≥ s_max` returns `β(s_max)`.
#[derive(Clone)]
pub struct RateFunction {
    repr: Repr,
    s_max: f64,
}

impl std::fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.repr {
            Repr::Const(c) => write!(f, "RateFunction::Const({c})"),
            Repr::PowerLog {
                coeff,
                power,
                log_exp,
            } => write!(
                f,
                "RateFunction::PowerLog({coeff} * s^-{power} * log(1/s)^{log_exp})"
            ),
            Repr::Table(t) => write!(f, "RateFunction::Table({} points)", t.len()),
            Repr::Map { name, .. } => write!(f, "RateFunction::Map({name})"),
        }
    }
}

impl RateFunction {
    pub fn constant(value: f64) -> Self {
        assert!(value >= 0.0);
        RateFunction {
            repr: Repr::Const(value),
            s_max: f64::INFINITY,
        }
    }

    /// `coeff · s^{-power} · ln(1/s)^{log_exp}`, frozen at `1/e` by default
    /// so the log factor stays positive.
    pub fn power_log(coeff: f64, power: f64, log_exp: f64) -> Self {
        assert!(coeff > 0.0);
        RateFunction {
            repr: Repr::PowerLog {
                coeff,
                power,
                log_exp,
            },
            s_max: (-1.0_f64).exp(),
        }
    }

    /// Tabulated rate; pairs need not be sorted. Values must be positive and
    /// finite. Below the smallest `s` the first value extends constantly;
    /// the freeze point defaults to the largest tabulated `s`.
    pub fn from_table(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.retain(|&(s, b)| s.is_finite() && b.is_finite() && s > 0.0);
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pairs.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-300);
        if pairs.len() < 2 {
            return Err(CoreError::InsufficientRange {
                what: "rate table",
                needed: "at least 2 finite positive samples".into(),
                got: format!("{}", pairs.len()),
            });
        }
        if pairs.iter().any(|&(_, b)| b <= 0.0) {
            return Err(CoreError::ShapeViolation {
                what: "tabulated rate must be strictly positive".into(),
            });
        }
        let s_max = pairs.last().unwrap().0;
        Ok(RateFunction {
            repr: Repr::Table(Arc::new(pairs)),
            s_max,
        })
    }

    /// Wraps an arbitrary positive evaluator (used by the conversions).
    pub fn from_fn(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RateFunction {
            repr: Repr::Map {
                name: name.into(),
                f: Arc::new(f),
            },
            s_max: f64::INFINITY,
        }
    }

    pub fn with_s_max(mut self, s_max: f64) -> Self {
        self.s_max = s_max;
        self
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Evaluate at `s > 0` (clamped to the freeze point).
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.max(1e-300).min(self.s_max);
        match &self.repr {
            Repr::Const(c) => *c,
            Repr::PowerLog {
                coeff,
                power,
                log_exp,
            } => {
                let l = (1.0 / s).ln();
                coeff * s.powf(-power) * l.powf(*log_exp)
            }
            Repr::Table(t) => {
                let n = t.len();
                if s <= t[0].0 {
                    return t[0].1;
                }
                if s >= t[n - 1].0 {
                    return t[n - 1].1;
                }
                let i = t.partition_point(|&(si, _)| si <= s) - 1;
                let (s0, b0) = t[i];
                let (s1, b1) = t[i + 1];
                let w = (s.ln() - s0.ln()) / (s1.ln() - s0.ln());
                (b0.ln() * (1.0 - w) + b1.ln() * w).exp()
            }
            Repr::Map { f, .. } => f(s),
        }
    }

    /// Scaled rate `λ·β`.
    pub fn scaled(&self, lambda: f64) -> RateFunction {
        let inner = self.clone();
        RateFunction {
            repr: Repr::Map {
                name: format!("scaled({lambda})"),
                f: Arc::new(move |s| lambda * inner.eval(s)),
            },
            s_max: self.s_max,
        }
    }

    /// Sample on a log grid (useful for export and fitting).
    pub fn sample_log(&self, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        log_spaced(lo, hi, n)
            .into_iter()
            .map(|s| (s, self.eval(s)))
            .collect()
    }

    /// Tabulated s-values when the rate is a table (its natural sample set).
    pub fn table_points(&self) -> Option<Vec<(f64, f64)>> {
        match &self.repr {
            Repr::Table(t) => Some(t.as_ref().clone()),
            _ => None,
        }
    }

    /// Worst relative upward jump over `n` log-spaced samples; 0 for a
    /// perfectly non-increasing function.
    pub fn worst_increase(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let samples = self.sample_log(lo, hi, n);
        let mut worst: f64 = 0.0;
        for w in samples.windows(2) {
            let (b0, b1) = (w[0].1, w[1].1);
            if b1 > b0 {
                worst = worst.max((b1 - b0) / b0.abs().max(1e-300));
            }
        }
        worst
    }

    /// Short machine-readable description for reports.
    pub fn descriptor(&self) -> RateDescriptor {
        match &self.repr {
            Repr::Const(c) => RateDescriptor::Const { value: *c },
            Repr::PowerLog {
                coeff,
                power,
                log_exp,
            } => RateDescriptor::PowerLog {
                coeff: *coeff,
                power: *power,
                log_exp: *log_exp,
            },
            Repr::Table(t) => RateDescriptor::Table {
                points: t.len(),
                s_lo: t[0].0,
                s_hi: t[t.len() - 1].0,
            },
            Repr::Map { name, .. } => RateDescriptor::Transform { name: name.clone() },
        }
    }
}

/// Serializable summary of a rate function.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RateDescriptor {
    Const { value: f64 },
    PowerLog { coeff: f64, power: f64, log_exp: f64 },
    Table { points: usize, s_lo: f64, s_hi: f64 },
    Transform { name: String },
}

/// One provenance record: which transformation produced a rate and with
/// which constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProvenanceStep {
    pub transform: String,
    pub constants: Vec<(String, f64)>,
}

/// A (kind, rate, provenance) triple recording how a rate was obtained.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub kind: InequalityKind,
    pub rate: RateFunction,
    pub provenance: Vec<ProvenanceStep>,
}

impl Certificate {
    pub fn new(kind: InequalityKind, rate: RateFunction, origin: impl Into<String>) -> Self {
        Certificate {
            kind,
            rate,
            provenance: vec![ProvenanceStep {
                transform: origin.into(),
                constants: vec![],
            }],
        }
    }

    pub fn derived(
        &self,
        kind: InequalityKind,
        rate: RateFunction,
        transform: impl Into<String>,
        constants: Vec<(String, f64)>,
    ) -> Self {
        let mut provenance = self.provenance.clone();
        provenance.push(ProvenanceStep {
            transform: transform.into(),
            constants,
        });
        Certificate {
            kind,
            rate,
            provenance,
        }
    }
}

/// Outcome of a conversion whose hypothesis is checked numerically; the
/// warnings are data, not errors.
#[derive(Debug)]
pub struct Converted {
    pub rate: RateFunction,
    pub warnings: Vec<String>,
}

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

/// WLSI → WPI: `β_WP(s) = 24 β_WL((s/2) ln(1+1/(2s))) / ln(1+1/(2s))`.
pub fn wlsi_to_wpi(beta_wl: &RateFunction) -> RateFunction {
    let b = beta_wl.clone();
    RateFunction::from_fn("wlsi_to_wpi", move |s| {
        let l = (1.0 + 1.0 / (2.0 * s)).ln();
        24.0 * b.eval(0.5 * s * l) / l
    })
}

/// WPI → WLSI: `β_WL(s) = c' β_WP(c s / ln(1/s)) ln(1/s)` for `s < s0`,
/// frozen at `s0` above (the constants come from the policy).
pub fn wpi_to_wlsi(beta_wp: &RateFunction, policy: &ConstantsPolicy) -> RateFunction {
    let b = beta_wp.clone();
    let (c, c_prime, s0) = (policy.c, policy.c_prime, policy.s0);
    RateFunction::from_fn("wpi_to_wlsi", move |s| {
        let s = s.min(s0);
        let l = (1.0 / s).ln();
        c_prime * b.eval(c * s / l) * l
    })
    .with_s_max(policy.s0)
}

/// Result of the Poincaré detection fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincareDetection {
    pub poincare: bool,
    /// Fitted constants making `β(s) ≤ c1 log(c2/s)` on the sampled range
    /// (meaningful only when `poincare` is true).
    pub c1: f64,
    pub c2: f64,
    /// Last-decade slope of `log β` against `log log(1/s)`.
    pub slope: f64,
}

/// A measure with a WLSI rate `β` satisfies the classical Poincaré
/// inequality iff `β(s) ≤ c1 log(c2/s)` for small `s`. Decided by the
/// last-decade slope of `log β` vs `log log(1/s)` (threshold 1.1).
pub fn detect_poincare(beta: &RateFunction) -> Result<PoincareDetection> {
    let samples = natural_rate_samples(beta)?;
    let s_min = samples[0].0;
    let last_decade: Vec<&(f64, f64)> = samples.iter().filter(|&&(s, _)| s <= 10.0 * s_min).collect();
    if last_decade.len() < 4 {
        return Err(CoreError::InsufficientRange {
            what: "detect_poincare",
            needed: "at least 4 samples in the last decade".into(),
            got: format!("{}", last_decade.len()),
        });
    }
    let xs: Vec<f64> = last_decade
        .iter()
        .map(|&&(s, _)| (1.0 / s).ln().ln())
        .collect();
    let ys: Vec<f64> = last_decade.iter().map(|&&(_, b)| b.max(1e-300).ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys);
    let poincare = slope <= 1.1;
    let c1 = samples
        .iter()
        .filter(|&&(s, _)| s < 0.3)
        .map(|&(s, b)| b / (1.0 / s).ln())
        .fold(0.0_f64, f64::max);
    Ok(PoincareDetection {
        poincare,
        c1,
        c2: 1.0,
        slope,
    })
}

/// Natural `(s, β)` samples of a rate: table points when tabulated,
/// otherwise a log-spaced probe of the small-s regime.
pub(crate) fn natural_rate_samples(beta: &RateFunction) -> Result<Vec<(f64, f64)>> {
    let samples = match beta.table_points() {
        Some(t) => t,
        None => beta.sample_log(1e-8, beta.s_max().min(1e-1), 60),
    };
    let lo = samples.first().unwrap().0;
    let hi = samples.last().unwrap().0;
    if samples.len() < 12 || hi / lo < 1e3 {
        return Err(CoreError::InsufficientRange {
            what: "rate samples",
            needed: "12 samples spanning 3 decades".into(),
            got: format!("{} samples over {:.1} decades", samples.len(), (hi / lo).log10()),
        });
    }
    Ok(samples)
}

/// WLSI → SPI: `β_SP(t) = 2 β_WL(ln(t/2)/(2t)) / ln(t/2)` for `t ≥ 2e`,
/// constant on `[1, 2e)`. The monotonicity hypothesis is checked on
/// `(2, 10^6]` and reported as a warning when violated.
pub fn wlsi_to_spi(beta_wl: &RateFunction) -> Converted {
    let b = beta_wl.clone();
    let core = move |t: f64| {
        let l = (t / 2.0).ln();
        2.0 * b.eval(l / (2.0 * t)) / l
    };
    let two_e = 2.0 * std::f64::consts::E;
    let mut warnings = Vec::new();
    {
        let mut prev = f64::INFINITY;
        let mut worst: f64 = 0.0;
        for t in log_spaced(2.0 + 1e-6, 1e6, 200) {
            let v = core(t) / 2.0; // the hypothesis concerns β_WL(·)/log(t/2)
            if v > prev {
                worst = worst.max((v - prev) / prev.max(1e-300));
            }
            prev = v;
        }
        if worst > 1e-9 {
            warnings.push(format!(
                "premise violated: t ↦ β_WL(log(t/2)/(2t))/log(t/2) increases by {worst:.2e} on (2, 1e6]"
            ));
        }
    }
    let frozen = core(two_e);
    let rate = RateFunction::from_fn("wlsi_to_spi", move |t| {
        if t < two_e {
            frozen
        } else {
            core(t)
        }
    });
    Converted { rate, warnings }
}

/// WLSI → GBI: returns `20·T` with `T(t) = t·β_WL(1/(4t e^{1/t}))` on
/// `(0, 1]`. Warns when `T` fails to be non-decreasing near 0 (the
/// proposition's hypothesis).
pub fn wlsi_to_gbi(beta_wl: &RateFunction) -> Converted {
    let b = beta_wl.clone();
    let t_fn = move |t: f64| {
        let t = t.clamp(1e-300, 1.0);
        t * b.eval(1.0 / (4.0 * t * (1.0 / t).exp()))
    };
    let mut warnings = Vec::new();
    {
        let ts = log_spaced(1e-3, 0.5, 120);
        let mut prev = 0.0;
        let mut worst: f64 = 0.0;
        for &t in &ts {
            let v = t_fn(t);
            if v < prev {
                worst = worst.max((prev - v) / prev.max(1e-300));
            }
            prev = v;
        }
        if worst > 1e-9 {
            warnings.push(format!(
                "premise violated: T decreases by {worst:.2e} on [1e-3, 0.5]"
            ));
        }
    }
    let rate = RateFunction::from_fn("wlsi_to_gbi", move |t| 20.0 * t_fn(t)).with_s_max(1.0);
    Converted { rate, warnings }
}

/// GBI → WLSI: `β_WL(s) = C · T(C'/ln(1/s)) · ln(1/s)`. Errors with
/// `ShapeViolation` when `T` fails its defining monotonicity checks
/// (non-decreasing, `T(x)/x` non-increasing) on sampled points.
pub fn gbi_to_wlsi(t_fn: &RateFunction, policy: &ConstantsPolicy) -> Result<RateFunction> {
    let xs = log_spaced(1e-4, 1.0, 80);
    let mut prev_t = 0.0;
    let mut prev_ratio = f64::INFINITY;
    for &x in &xs {
        let t = t_fn.eval(x);
        let ratio = t / x;
        if t < prev_t * (1.0 - 1e-9) {
            return Err(CoreError::ShapeViolation {
                what: format!("T decreases near x = {x:.3e}"),
            });
        }
        if ratio > prev_ratio * (1.0 + 1e-9) {
            return Err(CoreError::ShapeViolation {
                what: format!("T(x)/x increases near x = {x:.3e}"),
            });
        }
        prev_t = t;
        prev_ratio = ratio;
    }
    let t = t_fn.clone();
    let (c, c_prime) = (policy.gbi_c, policy.gbi_c_prime);
    Ok(RateFunction::from_fn("gbi_to_wlsi", move |s| {
        let l = (1.0 / s).ln();
        c * t.eval(c_prime / l) * l
    })
    .with_s_max(0.1))
}

/// WLSI → variance-flavoured weak log-Sobolev rate:
/// `β_SWL(u) = 16 β_WL(κ u³ / ln(1/u)^6)`.
pub fn wlsi_to_swlsi(beta_wl: &RateFunction, policy: &ConstantsPolicy) -> RateFunction {
    let b = beta_wl.clone();
    let kappa = policy.kappa;
    RateFunction::from_fn("wlsi_to_swlsi", move |u| {
        let u = u.min(0.3);
        let l = (1.0 / u).ln();
        16.0 * b.eval(kappa * u * u * u / l.powi(6))
    })
    .with_s_max(0.3)
}

/// Result of the restricted log-Sobolev minimization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictedLs {
    /// `A(C_P, ‖f‖_∞) = inf_u { β_SWL(u) + u √(3 C_P) ‖f‖_∞² }`.
    pub a: f64,
    /// Minimizing `u`.
    pub u_star: f64,
}

/// Computes `A(C_P, ‖f‖_∞)` by a 1D minimization in `log u` over
/// `(1e-12, min(s_max, 1))`.
pub fn restricted_ls_constant(beta_swl: &RateFunction, c_p: f64, sup_norm: f64) -> RestrictedLs {
    assert!(c_p > 0.0 && sup_norm > 0.0);
    let k = (3.0 * c_p).sqrt() * sup_norm * sup_norm;
    let hi = beta_swl.s_max().min(1.0);
    let objective = |lu: f64| {
        let u = lu.exp();
        beta_swl.eval(u) + u * k
    };
    let (lu, a) = scan_golden_min(&objective, (1e-12_f64).ln(), hi.ln(), 400);
    RestrictedLs { a, u_star: lu.exp() }
}

/// Naive tensorization: the n-fold product satisfies the same inequality
/// with `β(s/n)`.
pub fn tensorize(beta: &RateFunction, n: usize) -> RateFunction {
    assert!(n >= 1);
    if n == 1 {
        return beta.clone();
    }
    let b = beta.clone();
    let nf = n as f64;
    let s_max = beta.s_max() * nf;
    RateFunction::from_fn(format!("tensorize(n={n})"), move |s| b.eval(s / nf)).with_s_max(s_max)
}

/// Dimension-free tensorization through the Beckner route: the product
/// measure keeps the same `T`, so the composed WLSI rate does not depend
/// on `n` at all.
pub fn tensorize_gbi(beta: &RateFunction, _n: usize, policy: &ConstantsPolicy) -> Result<RateFunction> {
    let gbi = wlsi_to_gbi(beta);
    // the stored GBI rate is 20T; feeding it back is a constant absorbed by C
    gbi_to_wlsi(&gbi.rate, policy)
}

/// Bounded perturbation `dν = e^V dμ / Z_V`:
/// WLSI/WPI get `β^V(u) = e^{2 Osc(V)} β(u e^{-Osc(V)})`, SPI gets the
/// `e^{-2 Osc(V)}` argument scaling. GBI certificates are not supported.
pub fn perturb_bounded(cert: &Certificate, osc_v: f64) -> Result<Certificate> {
    assert!(osc_v >= 0.0);
    let arg_scale = match cert.kind {
        InequalityKind::Wlsi | InequalityKind::Wpi => (-osc_v).exp(),
        InequalityKind::Spi => (-2.0 * osc_v).exp(),
        InequalityKind::Gbi | InequalityKind::Rlsi => {
            return Err(CoreError::UnsupportedKind {
                kind: cert.kind.name(),
            })
        }
    };
    let prefactor = (2.0 * osc_v).exp();
    let b = cert.rate.clone();
    let rate = RateFunction::from_fn(format!("perturb_bounded(osc={osc_v})"), move |u| {
        prefactor * b.eval(u * arg_scale)
    })
    .with_s_max(cert.rate.s_max() / arg_scale);
    Ok(cert.derived(
        cert.kind,
        rate,
        "perturb_bounded",
        vec![("osc_v".into(), osc_v)],
    ))
}

/// `φ(s) = s ln(1 + e²/s)`, the small-set mass functional; its inverse is
/// computed by monotone bisection.
pub fn phi_smallset(s: f64) -> f64 {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    s * (1.0 + e2 / s).ln()
}

/// Inverse of [`phi_smallset`] on `(0, 1/2]` by bisection.
pub fn phi_smallset_inverse(y: f64) -> Option<f64> {
    crate::numerics::invert_monotone(&phi_smallset, 1e-300, 0.5, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn wpi_from_constant_wlsi() {
        let beta = RateFunction::constant(3.0);
        let wp = wlsi_to_wpi(&beta);
        // s with log(1+1/(2s)) = 1
        let s = 1.0 / (2.0 * (std::f64::consts::E - 1.0));
        assert_relative_eq!(wp.eval(s), 24.0 * 3.0, max_relative = 1e-12);
    }

    #[test]
    fn wpi_of_log_rate_is_bounded() {
        let beta = RateFunction::power_log(1.0, 0.0, 1.0);
        let wp = wlsi_to_wpi(&beta);
        let sup = wp
            .sample_log(1e-8, 1e-2, 200)
            .into_iter()
            .map(|(_, b)| b)
            .fold(0.0_f64, f64::max);
        assert!(sup <= 30.0, "sup = {sup}");
    }

    #[test]
    fn wpi_of_power_rate_matches_direct_substitution() {
        let beta = RateFunction::power_log(1.0, 1.0, 0.0).with_s_max(0.25);
        let wp = wlsi_to_wpi(&beta);
        let s = 1e-4_f64;
        let l = (1.0 + 1.0 / (2.0 * s)).ln();
        let direct = 24.0 / (0.5 * s * l) / l;
        assert_relative_eq!(wp.eval(s), direct, max_relative = 1e-12);
    }

    #[test]
    fn wlsi_from_constant_wpi_is_log() {
        let policy = ConstantsPolicy::default();
        let cp = 2.5;
        let wl = wpi_to_wlsi(&RateFunction::constant(cp), &policy);
        let s = 1e-5;
        assert_relative_eq!(wl.eval(s), cp * (1.0 / s).ln(), max_relative = 1e-12);
    }

    #[test]
    fn round_trip_constant_is_bounded() {
        let policy = ConstantsPolicy::default();
        let cp = 1.7;
        let wl = wpi_to_wlsi(&RateFunction::constant(cp), &policy);
        let wp = wlsi_to_wpi(&wl);
        let k = wp
            .sample_log(1e-8, 0.05, 300)
            .into_iter()
            .map(|(_, b)| b / cp)
            .fold(0.0_f64, f64::max);
        assert!(k.is_finite() && k > 0.0 && k <= 40.0, "K = {k}");
    }

    #[test]
    fn wpi_to_wlsi_power_substitution() {
        let policy = ConstantsPolicy::default();
        let wp = RateFunction::power_log(1.0, 0.5, 0.0);
        let wl = wpi_to_wlsi(&wp, &policy);
        let s = 1e-6;
        let l = (1.0_f64 / s).ln();
        let direct = (s / l).powf(-0.5) * l;
        assert_relative_eq!(wl.eval(s), direct, max_relative = 1e-12);
    }

    #[test]
    fn poincare_detection_cases() {
        let yes = RateFunction::from_fn("5log+2", |s| 5.0 * (1.0 / s).ln() + 2.0).with_s_max(0.3);
        assert!(detect_poincare(&yes).unwrap().poincare);

        let no = RateFunction::power_log(1.0, 0.0, 1.5);
        assert!(!detect_poincare(&no).unwrap().poincare);
    }

    #[test]
    fn spi_conversion_values() {
        let b0 = 4.2;
        let spi = wlsi_to_spi(&RateFunction::constant(b0));
        assert!(spi.warnings.is_empty());
        let t = 2.0 * std::f64::consts::E.powi(2);
        assert_relative_eq!(spi.rate.eval(t), b0, max_relative = 1e-12);
        // decays like 2β0/log(t/2)
        let t_big = 1e9;
        assert_relative_eq!(
            spi.rate.eval(t_big),
            2.0 * b0 / (t_big / 2.0_f64).ln(),
            max_relative = 1e-12
        );
        // constant on [1, 2e)
        assert_relative_eq!(spi.rate.eval(1.0), spi.rate.eval(5.43), max_relative = 1e-12);
    }

    #[test]
    fn spi_of_log_rate_tends_to_two() {
        let spi = wlsi_to_spi(&RateFunction::power_log(1.0, 0.0, 1.0));
        let v = spi.rate.eval(1e6);
        assert!((1.8..=2.6).contains(&v), "β_SP(1e6) = {v}");
    }

    #[test]
    fn gbi_of_log_rate_near_one() {
        let gbi = wlsi_to_gbi(&RateFunction::power_log(1.0, 0.0, 1.0));
        // T(t) = 1 + t log 4t → 1 as t → 0 (t small enough that 1/(4t e^{1/t})
        // still stays inside f64 range)
        let t = 2e-3;
        let v = gbi.rate.eval(t) / 20.0;
        assert_relative_eq!(v, 1.0 + t * (4.0 * t).ln(), max_relative = 1e-9);
        assert!((v - 1.0).abs() < 0.02);
    }

    #[test]
    fn gbi_of_constant_rate_is_linear() {
        let b0 = 2.0;
        let gbi = wlsi_to_gbi(&RateFunction::constant(b0));
        for t in [1e-4, 1e-2, 0.3] {
            assert_relative_eq!(gbi.rate.eval(t), 20.0 * b0 * t, max_relative = 1e-12);
        }
    }

    #[test]
    fn gbi_to_wlsi_endpoints() {
        let policy = ConstantsPolicy::default();
        // T(x) = x (log-Sobolev endpoint) → constant rate
        let t_lin = RateFunction::from_fn("x", |x| x).with_s_max(1.0);
        let wl = gbi_to_wlsi(&t_lin, &policy).unwrap();
        assert_relative_eq!(wl.eval(1e-7), 1.0, max_relative = 1e-12);

        // T ≡ T(1) (Poincaré endpoint) → c log(1/s)
        let t_const = RateFunction::constant(3.0);
        let wl = gbi_to_wlsi(&t_const, &policy).unwrap();
        let s = 1e-5;
        assert_relative_eq!(wl.eval(s), 3.0 * (1.0 / s).ln(), max_relative = 1e-12);
    }

    #[test]
    fn gbi_shape_violation_detected() {
        let policy = ConstantsPolicy::default();
        let bad = RateFunction::from_fn("x^2", |x| x * x).with_s_max(1.0); // T/x increasing
        assert!(matches!(
            gbi_to_wlsi(&bad, &policy),
            Err(CoreError::ShapeViolation { .. })
        ));
    }

    #[test]
    fn swlsi_values() {
        let policy = ConstantsPolicy::default();
        let b0 = 1.3;
        let swl = wlsi_to_swlsi(&RateFunction::constant(b0), &policy);
        assert_relative_eq!(swl.eval(1e-3), 16.0 * b0, max_relative = 1e-12);

        let swl = wlsi_to_swlsi(&RateFunction::power_log(1.0, 0.0, 1.0), &policy);
        let u: f64 = 1e-3;
        let l = (1.0 / u).ln();
        let expected = 16.0 * (3.0 * l + 6.0 * l.ln());
        assert_relative_eq!(swl.eval(u), expected, max_relative = 1e-12);
        assert!((expected - 517.2).abs() < 0.5);
    }

    #[test]
    fn swlsi_monotone() {
        let policy = ConstantsPolicy::default();
        let swl = wlsi_to_swlsi(&RateFunction::power_log(2.0, 0.3, 1.0), &policy);
        assert!(swl.worst_increase(1e-8, 0.1, 200) <= 1e-9);
    }

    #[test]
    fn restricted_constant_flat_rate() {
        let b = RateFunction::constant(7.0);
        let r = restricted_ls_constant(&b, 1.0, 1.0);
        assert_abs_diff_eq!(r.a, 7.0, epsilon = 1e-6);
    }

    #[test]
    fn restricted_constant_power_rate() {
        // minimize u^{-1/2} + √3 u: u* = (2√3)^{-2/3}, A ≈ 2.2697
        let b = RateFunction::power_log(1.0, 0.5, 0.0).with_s_max(1.0);
        let r = restricted_ls_constant(&b, 1.0, 1.0);
        let u_star = (2.0 * 3.0_f64.sqrt()).powf(-2.0 / 3.0);
        let a_exact = u_star.powf(-0.5) + 3.0_f64.sqrt() * u_star;
        assert_relative_eq!(r.a, a_exact, max_relative = 1e-6);
        assert_relative_eq!(r.u_star, u_star, max_relative = 1e-3);
        assert_abs_diff_eq!(r.a, 2.270, epsilon = 1e-3);
    }

    #[test]
    fn tensorize_identity_and_shift() {
        let b = RateFunction::power_log(1.0, 0.0, 1.0);
        let t1 = tensorize(&b, 1);
        assert_relative_eq!(t1.eval(1e-4), b.eval(1e-4), max_relative = 1e-14);

        let t10 = tensorize(&b, 10);
        let s = 1e-4;
        assert_relative_eq!(
            t10.eval(s),
            (1.0 / s).ln() + (10.0_f64).ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn perturbation_identity_and_constants() {
        let cert = Certificate::new(
            InequalityKind::Wlsi,
            RateFunction::power_log(1.0, 0.0, 1.0),
            "test",
        );
        let same = perturb_bounded(&cert, 0.0).unwrap();
        assert_relative_eq!(same.rate.eval(1e-3), cert.rate.eval(1e-3), max_relative = 1e-14);

        let c2 = Certificate::new(InequalityKind::Wlsi, RateFunction::constant(2.0), "test");
        let p = perturb_bounded(&c2, 1.0).unwrap();
        assert_relative_eq!(p.rate.eval(1e-3), 2.0 * (2.0_f64).exp(), max_relative = 1e-12);

        let u = 1e-3_f64;
        let log_cert = Certificate::new(
            InequalityKind::Wlsi,
            RateFunction::power_log(1.0, 0.0, 1.0),
            "test",
        );
        let p = perturb_bounded(&log_cert, 2.0).unwrap();
        let expected = (4.0_f64).exp() * ((1.0 / u).ln() + 2.0);
        assert_relative_eq!(p.rate.eval(u), expected, max_relative = 1e-12);
        assert!((expected - 486.4).abs() < 0.1);
    }

    #[test]
    fn perturbation_rejects_gbi() {
        let cert = Certificate::new(InequalityKind::Gbi, RateFunction::constant(1.0), "test");
        assert!(matches!(
            perturb_bounded(&cert, 0.5),
            Err(CoreError::UnsupportedKind { .. })
        ));
    }

    #[test]
    fn smallset_inverse_sandwich() {
        // A' s/log(1/s) ≤ φ^{-1}(s) ≤ A s/log(1/s) with bounded ratio
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for s in log_spaced(1e-10, 1e-2, 100) {
            let inv = phi_smallset_inverse(s).unwrap();
            let ratio = inv * (1.0 / s).ln() / s;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(lo > 0.0 && hi.is_finite());
        assert!(hi / lo < 4.0, "ratio spread {lo}..{hi}");
    }

    #[test]
    fn gbi_exponent_interpolation() {
        // β = log(1/s)^{1/3} (the α = 3/2 subexponential class) maps to
        // T(x) ∝ x^{2/3} on [0.01, 0.3]
        let alpha = 1.5;
        let beta = RateFunction::power_log(1.0, 0.0, (2.0 - alpha) / alpha);
        let gbi = wlsi_to_gbi(&beta);
        let xs = log_spaced(0.01, 0.3, 30);
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = xs.iter().map(|&x| gbi.rate.eval(x).ln()).collect();
        let (slope, _) = linear_fit(&lx, &ly);
        let expect = (2.0 * alpha - 2.0) / alpha;
        assert_abs_diff_eq!(slope, expect, epsilon = 0.1);
    }

    #[test]
    fn gbi_to_wlsi_recovers_log_exponent() {
        let policy = ConstantsPolicy::default();
        let t23 = RateFunction::from_fn("x23", |x: f64| x.powf(2.0 / 3.0)).with_s_max(1.0);
        let wl = gbi_to_wlsi(&t23, &policy).unwrap();
        let samples = wl.sample_log(1e-8, 1e-3, 40);
        let fit = crate::hardy::fit_rate_exponents_from(&samples).unwrap();
        assert_abs_diff_eq!(fit.power, 0.0, epsilon = 0.02);
        assert_abs_diff_eq!(fit.log_exp, 1.0 / 3.0, epsilon = 0.05);
    }

    #[test]
    fn tensorize_gbi_dimension_free() {
        let policy = ConstantsPolicy::default();
        let beta = RateFunction::power_log(1.0, 0.0, 1.0 / 3.0);
        let t1 = tensorize_gbi(&beta, 1, &policy).unwrap();
        let t100 = tensorize_gbi(&beta, 100, &policy).unwrap();
        for s in log_spaced(1e-8, 1e-2, 25) {
            assert_relative_eq!(t1.eval(s), t100.eval(s), max_relative = 1e-14);
        }
        // round trip preserves the fitted exponents
        let fit_in =
            crate::hardy::fit_rate_exponents_from(&beta.sample_log(1e-8, 1e-3, 40)).unwrap();
        let fit_out =
            crate::hardy::fit_rate_exponents_from(&t1.sample_log(1e-8, 1e-3, 40)).unwrap();
        assert_abs_diff_eq!(fit_out.power, fit_in.power, epsilon = 0.05);
        assert_abs_diff_eq!(fit_out.log_exp, fit_in.log_exp, epsilon = 0.05);
    }

    #[test]
    fn restricted_constant_tracks_sup_norm_growth() {
        // exponential-class rate β_WL = log(1/s): A(C_P, ‖f‖) grows like
        // 1 + log^{(2/α)-1}(‖f‖) = 1 + log(‖f‖) for α = 1
        let policy = ConstantsPolicy::default();
        let swl = wlsi_to_swlsi(&RateFunction::power_log(1.0, 0.0, 1.0), &policy);
        let ks: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let a: Vec<f64> = ks
            .iter()
            .map(|&k| restricted_ls_constant(&swl, 1.0, k.exp()).a)
            .collect();
        // fit A ≈ a0 + b·k^γ over ‖f‖ = e^k; expect γ ≈ 1
        let mut best = (f64::INFINITY, 0.0);
        let mut gamma = 0.3;
        while gamma <= 1.8 {
            let xs: Vec<f64> = ks.iter().map(|&k| k.powf(gamma)).collect();
            let coef = crate::numerics::lstsq(&[vec![1.0; xs.len()], xs.clone()], &a);
            let ss: f64 = xs
                .iter()
                .zip(&a)
                .map(|(&x, &y)| {
                    let r = y - coef[0] - coef[1] * x;
                    r * r
                })
                .sum();
            if ss < best.0 {
                best = (ss, gamma);
            }
            gamma += 0.01;
        }
        assert_abs_diff_eq!(best.1, 1.0, epsilon = 0.15);
    }

    #[test]
    fn detection_stable_under_scaling() {
        let beta = RateFunction::power_log(1.0, 0.0, 1.0);
        for lambda in [0.01, 1.0, 250.0] {
            assert!(detect_poincare(&beta.scaled(lambda)).unwrap().poincare);
        }
        let beta = RateFunction::power_log(1.0, 0.6, 0.0);
        for lambda in [0.01, 1.0, 250.0] {
            assert!(!detect_poincare(&beta.scaled(lambda)).unwrap().poincare);
        }
    }

    #[test]
    fn table_rate_interpolates_and_freezes() {
        let t = RateFunction::from_table(vec![(1e-6, 100.0), (1e-4, 10.0), (1e-2, 1.0)]).unwrap();
        assert_relative_eq!(t.eval(1e-4), 10.0, max_relative = 1e-12);
        // geometric midpoint in log-log
        assert_relative_eq!(t.eval(1e-5), (100.0_f64 * 10.0).sqrt(), max_relative = 1e-9);
        // freeze above s_max, constant extension below
        assert_relative_eq!(t.eval(1.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(t.eval(1e-9), 100.0, max_relative = 1e-12);
    }
}
