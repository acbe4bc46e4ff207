//! Small least-squares fits used for tail diagnostics.

/// Decay exponent `p` of `|y| ~ C x^-p` from a log-log least-squares line.
/// Returns `None` when any sample is zero or non-finite.
pub fn decay_exponent(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        let ay = y.abs();
        if !(ay > 0.0) || !ay.is_finite() || !(x > 0.0) {
            return None;
        }
        lx.push(x.ln());
        ly.push(ay.ln());
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Least-squares polynomial `y ~ sum_k c_k t^k` of the given degree.
/// Returns coefficients lowest order first.
pub fn polyfit(ts: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    let m = degree + 1;
    if ts.len() < m || ts.len() != ys.len() {
        return None;
    }
    // scale the abscissa to O(1) before forming normal equations
    let tmax = ts.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    if tmax == 0.0 {
        return None;
    }
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&t, &y) in ts.iter().zip(ys) {
        let s = t / tmax;
        let mut powers = vec![1.0; m];
        for k in 1..m {
            powers[k] = powers[k - 1] * s;
        }
        for i in 0..m {
            for j in 0..m {
                a[i][j] += powers[i] * powers[j];
            }
            a[i][m] += powers[i] * y;
        }
    }
    let c = solve_dense(a)?;
    Some(
        c.iter()
            .enumerate()
            .map(|(k, ck)| ck / tmax.powi(k as i32))
            .collect(),
    )
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    Some(x)
}

/// Observed convergence order from a sequence of error norms on grids
/// refined by a factor of two each step.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
