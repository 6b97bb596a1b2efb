use super::{max_deviation, PseudoOrbit, ShadowCertificate};
use crate::error::{Error, Result};
use crate::systems::{DynamicalSystem, Shift, Symbol, SymbolicPoint};

/// Largest gap `2^{-w}` the symbolic tracer accepts, `w` the admissibility window.
pub fn symbolic_modulus_limit(shift: &Shift) -> f64 {
    (-(shift.window() as f64)).exp2()
}

/// Traces with `y_n = (x_n)_0` for `n < H − 1` followed by `x_{H−1}`.
pub fn trace_symbolic(shift: &Shift, po: &PseudoOrbit<SymbolicPoint>) -> Result<ShadowCertificate<SymbolicPoint>> {
    let limit = symbolic_modulus_limit(shift);
    if !(po.delta <= limit) {
        return Err(Error::ModulusViolation(format!("δ = {} exceeds {limit}", po.delta)));
    }
    let h = po.points.len();
    if h == 0 {
        return Err(Error::Precondition("empty pseudo-orbit".into()));
    }
    if let (false, Some(v)) = super::is_pseudo_orbit(shift, &po.points, po.delta).unwrap_or((true, None)) {
        return Err(Error::ModulusViolation(format!(
            "gap {} at index {} is not below δ = {}",
            v.gap, v.index, po.delta
        )));
    }
    if let Some(i) = po.points.iter().position(|x| !shift.contains(x)) {
        return Err(Error::InvalidPoint(format!("pseudo-orbit point {i} is not admissible")));
    }
    let firsts = po.points[..h - 1].iter().map(|x| x.symbol(0)).collect::<Result<Vec<Symbol>>>()?;
    let y = SymbolicPoint::prepend(&firsts, &po.points[h - 1]);
    if !shift.contains(&y) {
        return Err(Error::InternalError("traced point is not admissible".into()));
    }
    let achieved = max_deviation(shift, &y, &po.points)?;
    if achieved > 2.0 * po.delta {
        return Err(Error::InternalError(format!("tracer achieved {achieved} > 2δ")));
    }
    Ok(ShadowCertificate { point: y, achieved, horizon: h, epsilon: 2.0 * po.delta })
}
