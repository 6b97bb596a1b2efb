use super::dirac_signature;
use crate::error::{Error, Result};
use crate::systems::DynamicalSystem;

/// `d(x,y) = ρ_J(δ_x, δ_y)`, the metric induced on the phase space by the truncated weak* metric.
pub fn induced_distance<S: DynamicalSystem>(sys: &S, x: &S::Point, y: &S::Point, j: usize) -> Result<f64> {
    Ok(dirac_signature(sys, x, j)?.rho(&dirac_signature(sys, y, j)?)?.value)
}

/// `max_{i<n} ρ_J(δ_{f^i x}, δ_{f^i y})`.
pub fn induced_dn_distance<S: DynamicalSystem>(sys: &S, x: &S::Point, y: &S::Point, n: usize, j: usize) -> Result<f64> {
    let (mut a, mut b) = (x.clone(), y.clone());
    let mut best = 0.0f64;
    for i in 0..n {
        best = best.max(induced_distance(sys, &a, &b, j)?);
        if i + 1 < n {
            a = sys.step(&a)?;
            b = sys.step(&b)?;
        }
    }
    Ok(best)
}

/// `(2/n)(n − m + k)`, the bound on `ρ(E_m(x), E_n(f^k x))` for `0 ≤ k < m < n`.
pub fn orbit_window_bound(n: usize, m: usize, k: usize) -> Result<f64> {
    if !(k < m && m < n) {
        return Err(Error::Precondition(format!("need k < m < n, got k={k}, m={m}, n={n}")));
    }
    Ok(2.0 * (n - m + k) as f64 / n as f64)
}
