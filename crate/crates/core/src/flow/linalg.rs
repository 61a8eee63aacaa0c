//! Small dense/banded solvers used by the steppers.

/// Solves the cyclic tridiagonal system
/// `sub[i]·x[i-1] + diag[i]·x[i] + sup[i]·x[i+1] = rhs[i]` (indices mod n)
/// by the Sherman-Morrison correction of the Thomas algorithm.
/// Returns `None` when a pivot vanishes.
pub(crate) fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Option<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return None;
    }
    let alpha = sup[n - 1]; // couples x[n-1] to x[0]
    let beta = sub[0]; // couples x[0] to x[n-1]
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] = diag[0] - gamma;
    b[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = thomas(sub, &b, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(sub, &b, sup, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    if !fact.is_finite() {
        return None;
    }
    Some(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

/// Plain tridiagonal solve; `sub[0]` and `sup[n-1]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut den = diag[0];
    if den == 0.0 {
        return None;
    }
    c[0] = sup[0] / den;
    d[0] = rhs[0] / den;
    for i in 1..n {
        den = diag[i] - sub[i] * c[i - 1];
        if den == 0.0 || !den.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { sup[i] / den } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}
