//! Small numeric helpers: monotone inversion, 1D minimization, least squares.

/// `n` log-spaced points from `lo` to `hi` (both positive), inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0 && n >= 2);
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` linearly spaced points from `lo` to `hi`, inclusive.
pub fn lin_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Solve `f(x) = target` for monotone `f` on `[lo, hi]` by bisection.
///
/// Returns `None` when the target is not bracketed. Works for both
/// increasing and decreasing `f`.
pub fn invert_monotone<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, target: f64) -> Option<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    let increasing = fhi >= flo;
    let (mut a, mut b) = (lo, hi);
    if (flo - target) * (fhi - target) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        let go_right = if increasing { fm < target } else { fm > target };
        if go_right {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Minimize `f` on `[lo, hi]`: coarse scan (`n` points) plus golden-section
/// refinement around the best bracket. Robust for mildly non-unimodal `f`.
pub fn scan_golden_min<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let xs = lin_spaced(lo, hi, n.max(3));
    let mut best = 0usize;
    let mut best_v = f64::INFINITY;
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for (i, &v) in vals.iter().enumerate() {
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(xs.len() - 1)];
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1e-300) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v <= best_v {
        (x, v)
    } else {
        (xs[best], best_v)
    }
}

/// Ordinary least squares for a small number of columns via normal equations.
///
/// `columns[k][i]` is the k-th regressor at sample i. Returns the coefficient
/// vector. Panics if the normal matrix is singular beyond rescue by pivoting.
pub fn lstsq(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = columns.len();
    let n = y.len();
    assert!(k >= 1 && n >= k);
    let mut ata = vec![vec![0.0; k]; k];
    let mut aty = vec![0.0; k];
    for i in 0..k {
        for j in i..k {
            let s: f64 = columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(a, b)| a * b)
                .sum();
            ata[i][j] = s;
            ata[j][i] = s;
        }
        aty[i] = columns[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    solve_dense(&mut ata, &mut aty);
    aty
}

#[allow(clippy::needless_range_loop)]
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        assert!(d.abs() > 1e-300, "singular normal matrix in lstsq");
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col] / d;
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= factor * v;
            }
            b[r] -= factor * b[col];
        }
    }
    for i in 0..n {
        b[i] /= a[i][i];
    }
}

/// Slope and intercept of the least-squares line through `(xs, ys)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let coef = lstsq(&[vec![1.0; xs.len()], xs.to_vec()], ys);
    (coef[1], coef[0])
}
