//! Shared quadrature engine.
//!
//! Every integral in the crate goes through this module: a composite adaptive
//! Gauss-Kronrod 7-15 rule with bisection refinement and a 2-point Gauss
//! fallback on intervals too narrow to split. Sharing one engine keeps the
//! discretization constants identical across numerators and denominators, so
//! they cancel in the ratios the inequality criteria are built from.

/// Positive abscissae of the 15-point Kronrod rule (center last).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Weights of the embedded 7-point Gauss rule (odd abscissae plus center).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One Gauss-Kronrod 7-15 panel. Returns the Kronrod value, the
/// |Kronrod - Gauss| error indicator, and the Kronrod estimate of `∫|f|`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];

    for j in 0..7 {
        let x = half * XGK[j];
        let (f1, f2) = (f(center - x), f(center + x));
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (
        kronrod * half,
        (kronrod - gauss).abs() * half.abs(),
        res_abs * half.abs(),
    )
}

/// Two-point Gauss rule, used when an interval is too narrow to bisect.
fn gauss2<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let x = half / 3.0_f64.sqrt();
    (f(center - x) + f(center + x)) * half
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// A panel is accepted once the Kronrod-Gauss discrepancy drops below
/// `rel_tol` times the panel value, below `abs_tol`, or below an absolute
/// floor derived from the first-pass estimate of `∫|f|` (without such a
/// floor, integrands with interior fractional-power kinks can demand a
/// relative accuracy no panel refinement can deliver). Non-finite panel
/// values propagate to the result so callers can flag overflowing
/// integrands.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (value, err, res_abs) = gk15(f, a, b);
    if !value.is_finite() {
        return value;
    }
    if err <= rel_tol * value.abs() || err <= abs_tol {
        return value;
    }
    let floor = abs_tol.max(rel_tol * res_abs / 256.0);
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, rel_tol, floor, 48) + adaptive(f, mid, b, rel_tol, floor, 48)
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let (value, err, _) = gk15(f, a, b);
    if !value.is_finite() {
        return value;
    }
    if err <= rel_tol * value.abs() || err <= abs_tol {
        return value;
    }
    let mid = 0.5 * (a + b);
    if depth == 0 || mid <= a || mid >= b {
        // interval no longer splittable at this precision
        return gauss2(f, a, b);
    }
    adaptive(f, a, mid, rel_tol, abs_tol, depth - 1) + adaptive(f, mid, b, rel_tol, abs_tol, depth - 1)
}

/// Default relative tolerance used by the measure functionals.
pub const DEFAULT_REL_TOL: f64 = 1e-11;

/// Integral of `f` over `[a, b]` with the default tolerance.
pub fn integral<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    integrate(f, a, b, DEFAULT_REL_TOL, 0.0)
}

/// Per-cell integrals of `f` over the intervals of a strictly increasing grid.
pub fn cell_integrals<F: Fn(f64) -> f64>(f: &F, nodes: &[f64]) -> Vec<f64> {
    nodes
        .windows(2)
        .map(|w| integral(f, w[0], w[1]))
        .collect()
}

/// Integral of `f` over the whole grid, cell by cell.
pub fn integral_over_grid<F: Fn(f64) -> f64>(f: &F, nodes: &[f64]) -> f64 {
    nodes.windows(2).map(|w| integral(f, w[0], w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_integral() {
        let v = integral(&|x: f64| (-x * x).exp(), -12.0, 12.0);
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn kinked_integrand() {
        // |x| has a kink at 0; adaptive bisection must still converge.
        let v = integral(&|x: f64| (-x.abs()).exp(), -40.0, 40.0);
        assert_relative_eq!(v, 2.0 - 2.0 * (-40.0_f64).exp(), max_relative = 1e-11);
    }

    #[test]
    fn heavy_tail_over_wide_cells() {
        // cell-wise integration of a slowly decaying density over huge cells
        let rho = |t: f64| 0.5 * (1.0 + t.abs()).powi(-2);
        let v = integral(&rho, 0.0, 1.0e13);
        assert_relative_eq!(v, 0.5 * (1.0 - 1.0 / (1.0 + 1.0e13)), max_relative = 1e-10);
    }

    #[test]
    fn additivity_over_grid() {
        let nodes = [0.0, 0.3, 1.0, 2.5, 7.0];
        let f = |x: f64| (1.0 + x).ln();
        let whole = integral(&f, 0.0, 7.0);
        let cells = integral_over_grid(&f, &nodes);
        assert_relative_eq!(whole, cells, max_relative = 1e-12);
    }
}
