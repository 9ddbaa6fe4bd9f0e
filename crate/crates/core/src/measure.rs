//! One-dimensional measures `dμ = e^{-Φ} dx / Z` given by a potential, with
//! tabulated CDF/tail machinery and the functionals (entropy, variance,
//! oscillation, Dirichlet energy) consumed by every other module.

use crate::numerics::invert_monotone;
use crate::quad;
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Potential families. `HeavyTail` is the polynomially decaying density
/// `ρ(t) = (α/2)(1+|t|)^{-1-α}`; `Subexp` is `Φ = |t|^α`; `Gaussian` is
/// `Φ = t²`; `Flat` is `Φ ≡ 0` (uniform / Lebesgue on its domain).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Family {
    HeavyTail { alpha: f64 },
    Subexp { alpha: f64 },
    DoubleExp,
    Gaussian,
    Flat,
    Custom { xs: Vec<f64>, phis: Vec<f64> },
}

/// A potential `Φ`, optionally smoothed (`|t|` replaced by `√(1+t²)` inside
/// the family formula) and scaled (`Φ_eff = scale · Φ`). Smoothed variants
/// are the default for semigroup runs, raw ones for capacity/Hardy scans.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Potential {
    pub family: Family,
    pub smoothed: bool,
    pub scale: f64,
}

impl Potential {
    pub fn new(family: Family) -> Self {
        Potential {
            family,
            smoothed: false,
            scale: 1.0,
        }
    }

    pub fn smoothed(family: Family) -> Self {
        Potential {
            family,
            smoothed: true,
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Φ(x)
    pub fn phi(&self, x: f64) -> f64 {
        self.scale * self.raw_phi(x)
    }

    /// Φ′(x)
    pub fn phi_prime(&self, x: f64) -> f64 {
        self.scale * self.raw_prime(x)
    }

    /// Φ″(x)
    pub fn phi_second(&self, x: f64) -> f64 {
        self.scale * self.raw_second(x)
    }

    fn raw_phi(&self, x: f64) -> f64 {
        let r = if self.smoothed {
            (1.0 + x * x).sqrt()
        } else {
            x.abs()
        };
        match &self.family {
            Family::HeavyTail { alpha } => (2.0 / alpha).ln() + (1.0 + alpha) * (1.0 + r).ln(),
            Family::Subexp { alpha } => r.powf(*alpha),
            Family::DoubleExp => r,
            Family::Gaussian => r * r,
            Family::Flat => 0.0,
            Family::Custom { xs, phis } => interp_linear(xs, phis, x),
        }
    }

    fn raw_prime(&self, x: f64) -> f64 {
        // dr/dx: sign(x) raw, x/√(1+x²) smoothed
        let (r, dr) = if self.smoothed {
            let u = (1.0 + x * x).sqrt();
            (u, x / u)
        } else {
            (x.abs(), if x == 0.0 { 0.0 } else { x.signum() })
        };
        match &self.family {
            Family::HeavyTail { alpha } => (1.0 + alpha) * dr / (1.0 + r),
            Family::Subexp { alpha } => alpha * r.powf(alpha - 1.0) * dr,
            Family::DoubleExp => dr,
            Family::Gaussian => 2.0 * r * dr,
            Family::Flat => 0.0,
            Family::Custom { xs, phis } => fd_prime(xs, phis, x, interp_linear),
        }
    }

    fn raw_second(&self, x: f64) -> f64 {
        if self.smoothed {
            let u = (1.0 + x * x).sqrt();
            let du = x / u;
            let ddu = 1.0 / (u * u * u);
            return match &self.family {
                Family::HeavyTail { alpha } => {
                    (1.0 + alpha) * (ddu * (1.0 + u) - du * du) / ((1.0 + u) * (1.0 + u))
                }
                Family::Subexp { alpha } => {
                    alpha * (alpha - 1.0) * u.powf(alpha - 2.0) * du * du
                        + alpha * u.powf(alpha - 1.0) * ddu
                }
                Family::DoubleExp => ddu,
                Family::Gaussian => 2.0,
                Family::Flat => 0.0,
                Family::Custom { xs, phis } => {
                    fd_second(xs, phis, x, interp_linear)
                }
            };
        }
        let r = x.abs();
        match &self.family {
            Family::HeavyTail { alpha } => -(1.0 + alpha) / ((1.0 + r) * (1.0 + r)),
            Family::Subexp { alpha } => alpha * (alpha - 1.0) * r.powf(alpha - 2.0),
            Family::DoubleExp => 0.0,
            Family::Gaussian => 2.0,
            Family::Flat => 0.0,
            Family::Custom { xs, phis } => fd_second(xs, phis, x, interp_linear),
        }
    }

    /// Default symmetric truncation point: smallest `x > 0` with
    /// `Φ(x) - Φ(0) ≥ 60` (density down by `e^{-60}`).
    pub fn default_truncation(&self) -> Option<f64> {
        let phi0 = self.phi(0.0);
        if !phi0.is_finite() {
            return None;
        }
        let excess = |x: f64| self.phi(x) - phi0;
        let mut hi = 1.0;
        for _ in 0..200 {
            if excess(hi) >= 60.0 {
                return invert_monotone(&excess, 0.0, hi, 60.0);
            }
            hi *= 2.0;
            if !hi.is_finite() {
                return None;
            }
        }
        None
    }

    /// Checks supplied analytic derivatives against centered finite
    /// differences of Φ; returns the worst relative mismatch over the nodes.
    pub fn derivative_mismatch(&self, nodes: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in nodes {
            let h = 1e-5 * (1.0 + x.abs());
            let fd = (self.phi(x + h) - self.phi(x - h)) / (2.0 * h);
            let an = self.phi_prime(x);
            let scale = an.abs().max(fd.abs()).max(1.0);
            worst = worst.max((fd - an).abs() / scale);
        }
        worst
    }
}

fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        let s = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return ys[0] + s * (x - xs[0]);
    }
    if x >= xs[n - 1] {
        let s = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys[n - 1] + s * (x - xs[n - 1]);
    }
    let i = xs.partition_point(|&v| v <= x).saturating_sub(1);
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] * (1.0 - w) + ys[i + 1] * w
}

fn fd_prime(xs: &[f64], ys: &[f64], x: f64, f: impl Fn(&[f64], &[f64], f64) -> f64) -> f64 {
    let h = 1e-5 * (1.0 + x.abs());
    (f(xs, ys, x + h) - f(xs, ys, x - h)) / (2.0 * h)
}

fn fd_second(xs: &[f64], ys: &[f64], x: f64, f: impl Fn(&[f64], &[f64], f64) -> f64) -> f64 {
    let h = 1e-4 * (1.0 + x.abs());
    (f(xs, ys, x + h) - 2.0 * f(xs, ys, x) + f(xs, ys, x - h)) / (h * h)
}

/// Node placement for the computational grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    /// Nodes equispaced in `asinh(x)`; resolves both the bulk and far
    /// polynomial tails. Default for spans wider than 400.
    Asinh,
    Auto,
}

/// Grid specification `(x_min, x_max, N)` plus node placement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Self {
        GridSpec {
            x_min,
            x_max,
            n,
            spacing: Spacing::Auto,
        }
    }

    fn nodes(&self) -> Vec<f64> {
        let spacing = match self.spacing {
            Spacing::Auto => {
                if self.x_max - self.x_min > 400.0 {
                    Spacing::Asinh
                } else {
                    Spacing::Uniform
                }
            }
            s => s,
        };
        let n = self.n;
        let mut nodes: Vec<f64> = match spacing {
            Spacing::Uniform | Spacing::Auto => (0..=n)
                .map(|i| self.x_min + (self.x_max - self.x_min) * i as f64 / n as f64)
                .collect(),
            Spacing::Asinh => {
                let (ua, ub) = (self.x_min.asinh(), self.x_max.asinh());
                (0..=n)
                    .map(|i| (ua + (ub - ua) * i as f64 / n as f64).sinh())
                    .collect()
            }
        };
        nodes[0] = self.x_min;
        nodes[n] = self.x_max;
        nodes
    }
}

/// Which half-line a tail quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A 1D measure tabulated on a strictly increasing grid. Immutable after
/// construction.
#[derive(Clone, Debug)]
pub struct Measure1D {
    potential: Potential,
    nodes: Vec<f64>,
    /// Raw integral `∫ e^{-Φ}` over the domain.
    z: f64,
    is_probability: bool,
    /// Normalizer actually dividing the density (`z` or 1).
    norm: f64,
    cell_mass: Vec<f64>,
    cdf_left: Vec<f64>,
    tail_right: Vec<f64>,
    cell_resist: Vec<f64>,
    median: f64,
    mass_deficit: f64,
}

/// Builds a probability measure: normalizes by quadrature, tabulates the CDF
/// and solves the median by monotone bisection.
pub fn build_measure(potential: Potential, grid: &GridSpec) -> Result<Measure1D> {
    Measure1D::build(potential, grid, true)
}

/// Builds an unnormalized base measure (`ρ = e^{-Φ}`, no probability
/// constraints); used e.g. for Lebesgue in the perturbation module.
pub fn build_base_measure(potential: Potential, grid: &GridSpec) -> Result<Measure1D> {
    Measure1D::build(potential, grid, false)
}

impl Measure1D {
    fn build(potential: Potential, grid: &GridSpec, is_probability: bool) -> Result<Self> {
        if grid.n < 64 {
            return Err(CoreError::Config(format!(
                "grid must have at least 64 cells, got {}",
                grid.n
            )));
        }
        if grid.x_min >= grid.x_max || grid.x_min.is_nan() || grid.x_max.is_nan() {
            return Err(CoreError::Config(format!(
                "empty domain [{}, {}]",
                grid.x_min, grid.x_max
            )));
        }
        let nodes = grid.nodes();
        for &x in &nodes {
            if !potential.phi(x).is_finite() {
                return Err(CoreError::NonFinitePotential { x });
            }
        }

        let raw = |x: f64| (-potential.phi(x)).exp();
        let cell_raw = quad::cell_integrals(&raw, &nodes);
        let z: f64 = cell_raw.iter().sum();
        if !(z.is_finite() && z > 0.0) {
            return Err(CoreError::NonFinitePotential { x: f64::NAN });
        }
        let norm = if is_probability { z } else { 1.0 };

        let cell_mass: Vec<f64> = cell_raw.iter().map(|m| m / norm).collect();
        let n = cell_mass.len();
        let mut cdf_left = vec![0.0; n + 1];
        for i in 0..n {
            cdf_left[i + 1] = cdf_left[i] + cell_mass[i];
        }
        let mut tail_right = vec![0.0; n + 1];
        for i in (0..n).rev() {
            tail_right[i] = tail_right[i + 1] + cell_mass[i];
        }

        let mass_deficit = if is_probability {
            estimate_deficit(&potential, &nodes) / z
        } else {
            0.0
        };
        if is_probability && mass_deficit > 1e-6 {
            return Err(CoreError::MassDeficit {
                deficit: mass_deficit,
            });
        }

        let inv_rho = |x: f64| norm * potential.phi(x).exp();
        let cell_resist = quad::cell_integrals(&inv_rho, &nodes);

        let mut mu = Measure1D {
            potential,
            nodes,
            z,
            is_probability,
            norm,
            cell_mass,
            cdf_left,
            tail_right,
            cell_resist,
            median: 0.0,
            mass_deficit,
        };
        let half = 0.5 * mu.total_mass();
        mu.median = mu.quantile_mass(half)?;
        Ok(mu)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_cells(&self) -> usize {
        self.cell_mass.len()
    }

    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Raw normalizer `Z = ∫ e^{-Φ}` over the domain.
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn is_probability(&self) -> bool {
        self.is_probability
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn mass_deficit(&self) -> f64 {
        self.mass_deficit
    }

    pub fn total_mass(&self) -> f64 {
        self.cdf_left[self.n_cells()]
    }

    /// Density of μ with respect to Lebesgue.
    pub fn rho(&self, x: f64) -> f64 {
        (-self.potential.phi(x)).exp() / self.norm
    }

    /// `1/ρ`, the resistance integrand.
    pub fn inv_rho(&self, x: f64) -> f64 {
        self.norm * self.potential.phi(x).exp()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return Err(CoreError::OutOfDomain { x, lo, hi });
        }
        Ok(())
    }

    fn cell_of(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|&v| v <= x);
        i.saturating_sub(1).min(self.n_cells() - 1)
    }

    /// CDF at `x` (mass of `(-∞, x]` within the domain).
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return self.total_mass();
        }
        let i = self.cell_of(x);
        self.cdf_left[i] + quad::integral(&|t| self.rho(t), self.nodes[i], x)
    }

    /// Mass of the half-line beyond `x` on the given side; computed from
    /// suffix/prefix sums so deep tails keep full relative accuracy.
    pub fn tail_mass(&self, x: f64, side: Side) -> Result<f64> {
        self.check_domain(x)?;
        let i = self.cell_of(x);
        Ok(match side {
            Side::Left => self.cdf_left[i] + quad::integral(&|t| self.rho(t), self.nodes[i], x),
            Side::Right => {
                self.tail_right[i + 1] + quad::integral(&|t| self.rho(t), x, self.nodes[i + 1])
            }
        })
    }

    /// Point `x` with `μ((-∞, x]) = mass`.
    pub fn quantile_mass(&self, mass: f64) -> Result<f64> {
        let total = self.total_mass();
        if !(mass > 0.0 && mass < total) {
            return Err(CoreError::Config(format!(
                "quantile mass {mass} outside (0, {total})"
            )));
        }
        let i = self.cdf_left.partition_point(|&v| v <= mass).min(self.n_cells()) - 1;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let f = |x: f64| self.cdf_left[i] + quad::integral(&|t| self.rho(t), a, x);
        Ok(invert_monotone(&f, a, b, mass).unwrap_or(0.5 * (a + b)))
    }

    /// Point with the prescribed tail mass on the given side.
    pub fn quantile_tail(&self, mass: f64, side: Side) -> Result<f64> {
        match side {
            Side::Left => self.quantile_mass(mass),
            Side::Right => self.quantile_mass(self.total_mass() - mass),
        }
    }

    /// Resistance `∫_a^b 1/ρ`. May legitimately overflow to `+∞` in deep
    /// Gaussian tails; callers treat a non-finite value as a divergence flag.
    pub fn resistance(&self, a: f64, b: f64) -> Result<f64> {
        if a >= b || a.is_nan() || b.is_nan() {
            return Err(CoreError::Config(format!("resistance needs a < b, got ({a}, {b})")));
        }
        self.check_domain(a)?;
        self.check_domain(b)?;
        let (ia, ib) = (self.cell_of(a), self.cell_of(b));
        let f = |t: f64| self.inv_rho(t);
        if ia == ib {
            return Ok(quad::integral(&f, a, b));
        }
        let mut total = quad::integral(&f, a, self.nodes[ia + 1]);
        for i in ia + 1..ib {
            total += self.cell_resist[i];
        }
        total += quad::integral(&f, self.nodes[ib], b);
        Ok(total)
    }

    /// Piecewise-linear function from node values.
    pub fn grid_function(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: self.nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Integral `∫ g dμ` of a piecewise-linear `g` against the measure.
    pub fn integral_gf(&self, g: &GridFunction) -> f64 {
        self.integral_of(g, |v| v)
    }

    fn integral_of(&self, g: &GridFunction, map: impl Fn(f64) -> f64) -> f64 {
        assert_eq!(g.values.len(), self.nodes.len(), "grid function size mismatch");
        let mut total = 0.0;
        for i in 0..self.n_cells() {
            let (a, b) = (self.nodes[i], self.nodes[i + 1]);
            let (va, vb) = (g.values[i], g.values[i + 1]);
            let slope = (vb - va) / (b - a);
            total += quad::integral(&|x| self.rho(x) * map(va + slope * (x - a)), a, b);
        }
        total
    }

    /// `Ent_μ(g) = ∫ g log(g/∫g dμ) dμ` for `g ≥ 0`, with `0·log 0 = 0`.
    pub fn entropy(&self, g: &GridFunction) -> Result<f64> {
        let min = g.min();
        if min < -1e-12 {
            return Err(CoreError::NegativeInput { min });
        }
        let mass = self.integral_gf(g);
        if mass <= 0.0 || mass.is_nan() {
            return Err(CoreError::NegativeInput { min: mass });
        }
        let ent = self.integral_of(g, |v| {
            if v <= 0.0 {
                0.0
            } else {
                v * (v / mass).ln()
            }
        });
        Ok(ent.max(0.0))
    }

    /// `Var_μ(f) = ∫ f² dμ - (∫ f dμ)²` (normalized by total mass for
    /// non-probability measures).
    pub fn variance(&self, f: &GridFunction) -> f64 {
        let total = self.total_mass();
        let mean = self.integral_gf(f) / total;
        let second = self.integral_of(f, |v| v * v) / total;
        (second - mean * mean).max(0.0)
    }

    /// Dirichlet energy `∫ |f′|² dμ`, exact for the piecewise-linear
    /// interpolant (slopes are constant per cell).
    pub fn dirichlet(&self, f: &GridFunction) -> f64 {
        assert_eq!(f.values.len(), self.nodes.len(), "grid function size mismatch");
        let mut total = 0.0;
        for i in 0..self.n_cells() {
            let dx = self.nodes[i + 1] - self.nodes[i];
            let slope = (f.values[i + 1] - f.values[i]) / dx;
            total += slope * slope * self.cell_mass[i];
        }
        total
    }
}

fn estimate_deficit(potential: &Potential, nodes: &[f64]) -> f64 {
    // Families keep their formula beyond the domain, so probing an extension
    // of the same width estimates the truncated tails. Flat and tabulated
    // potentials treat the given domain as authoritative.
    match potential.family {
        Family::Flat | Family::Custom { .. } => 0.0,
        _ => {
            let (lo, hi) = (nodes[0], *nodes.last().unwrap());
            let w = hi - lo;
            let raw = |x: f64| (-potential.phi(x)).exp();
            quad::integrate(&raw, hi, hi + w, 1e-6, 0.0)
                + quad::integrate(&raw, lo - w, lo, 1e-6, 0.0)
        }
    }
}

/// A piecewise-linear function on the owning measure's grid. The derivative
/// is the piecewise-constant slope between nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn constant(c: f64, n_nodes: usize) -> Self {
        GridFunction {
            values: vec![c; n_nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Osc(f) = sup f - inf f`.
    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Value at `x` by linear interpolation on the given nodes.
    pub fn eval(&self, nodes: &[f64], x: f64) -> f64 {
        interp_linear(nodes, &self.values, x)
    }
}
