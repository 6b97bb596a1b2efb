use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cells::exact;
use super::{CellDecomposition, GridHomeo, TauStructure};
use crate::error::{Error, Result};
use crate::systems::{DynamicalSystem, GridMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbParams {
    pub beta_max: f64,
    /// Points sampled on the boundary of each closed core.
    pub boundary_samples: usize,
    /// Concentric rings sampled in each ball `B_{δ'}(p_i)`.
    pub rings: usize,
    /// Declared Lipschitz modulus of `f`; the map's own constant when absent.
    pub modulus: Option<f64>,
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams { beta_max: 1024.0, boundary_samples: 1000, rings: 16, modulus: None }
    }
}

/// Trapping evidence for one cell, conditional on the declared modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellCertificate {
    pub cell: usize,
    pub target: usize,
    /// Sampled `min dist(f(B_{δ'}(p_i)), complement of R_{τ(i)}^δ)`.
    pub ball_margin: f64,
    /// Modulus times the sampling mesh.
    pub budget: f64,
    /// Sampled `min dist(g(∂R_i^δ), complement of R_{τ(i)}^δ)`.
    pub boundary_margin: f64,
    /// `min(ball_margin − budget, boundary_margin)`.
    pub margin: f64,
}

/// `g = f ∘ h` with per-cell trapping certificates.
#[derive(Clone, Debug)]
pub struct PerturbedMap {
    pub f: GridMap,
    pub h: GridHomeo,
    pub tau: TauStructure,
    pub delta_prime: f64,
    pub modulus: f64,
    pub certificates: Vec<CellCertificate>,
}

impl PerturbedMap {
    pub fn cells(&self) -> &CellDecomposition {
        &self.h.cells
    }

    pub fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        self.f.apply(self.h.apply(x))
    }
}

impl DynamicalSystem for PerturbedMap {
    type Point = [f64; 2];

    fn step(&self, x: &[f64; 2]) -> Result<[f64; 2]> {
        if !self.contains(x) {
            return Err(Error::InvalidPoint(format!("{x:?} is outside the unit square")));
        }
        self.apply(*x)
    }

    fn distance(&self, x: &[f64; 2], y: &[f64; 2]) -> Result<f64> {
        self.f.distance(x, y)
    }

    fn contains(&self, x: &[f64; 2]) -> bool {
        self.f.contains(x)
    }

    fn diameter(&self) -> f64 {
        self.f.diameter()
    }

    fn accumulate_tests(&self, x: &[f64; 2], out: &mut [f64]) -> Result<()> {
        self.f.accumulate_tests(x, out)
    }

    fn test_norm(&self, j: usize) -> f64 {
        self.f.test_norm(j)
    }
}

fn ball_samples(p: [f64; 2], radius: f64, rings: usize) -> Vec<[f64; 2]> {
    let mut out = vec![p];
    for j in 1..=rings {
        let r = radius * j as f64 / rings as f64;
        let count = (std::f64::consts::TAU * j as f64).ceil() as usize + 1;
        for a in 0..count {
            let th = std::f64::consts::TAU * a as f64 / count as f64;
            out.push([p[0] + r * th.cos(), p[1] + r * th.sin()]);
        }
    }
    out
}

fn core_boundary_samples(cells: &CellDecomposition, i: usize, count: usize) -> Vec<[f64; 2]> {
    let c = cells.center(i);
    let a = cells.core_half();
    let per_side = count.div_ceil(4).max(1);
    let mut out = Vec::with_capacity(4 * per_side);
    for s in 0..per_side {
        let t = -a + 2.0 * a * s as f64 / per_side as f64;
        out.push([c[0] + t, c[1] - a]);
        out.push([c[0] + a, c[1] + t]);
        out.push([c[0] - t, c[1] + a]);
        out.push([c[0] - a, c[1] - t]);
    }
    out
}

/// Builds `g = f ∘ h`, doubling `β` until `h(closure(R_i^δ)) ⊂ B_{δ'}(p_i)`.
pub fn perturb(
    f: &GridMap,
    cells: &CellDecomposition,
    tau: &TauStructure,
    beta: f64,
    delta_prime: f64,
    params: &PerturbParams,
) -> Result<PerturbedMap> {
    if tau.tau.len() != cells.len() {
        return Err(Error::ShapeError(format!("τ has {} cells, grid has {}", tau.tau.len(), cells.len())));
    }
    if !(delta_prime > 0.0 && delta_prime < cells.core_half()) {
        return Err(Error::Precondition(format!("δ' = {delta_prime} must lie in (0, {})", cells.core_half())));
    }
    if params.rings == 0 || params.boundary_samples == 0 {
        return Err(Error::Precondition("sampling densities must be positive".into()));
    }
    let modulus = params.modulus.unwrap_or_else(|| f.lipschitz());
    let budget = modulus * delta_prime / params.rings as f64;

    let balls = (0..cells.len())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let target = tau.tau[i];
            let mut m = f64::INFINITY;
            for s in ball_samples(cells.center(i), delta_prime, params.rings) {
                m = m.min(cells.core_margin(target, f.apply(s)?));
            }
            if m <= budget {
                return Err(Error::ContinuityBudgetExceeded { cell: i, margin: m, budget });
            }
            Ok(m)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut beta = beta;
    let h = loop {
        let h = GridHomeo::new(cells.clone(), beta)?;
        if h.core_image_radius() < delta_prime {
            break h;
        }
        beta *= 2.0;
        if beta > params.beta_max {
            return Err(Error::CannotCertify(format!(
                "β would exceed {} before the cores fit in balls of radius {delta_prime}",
                params.beta_max
            )));
        }
    };

    let certificates = (0..cells.len())
        .into_par_iter()
        .map(|i| -> Result<CellCertificate> {
            let target = tau.tau[i];
            let mut bm = f64::INFINITY;
            for x in core_boundary_samples(cells, i, params.boundary_samples) {
                bm = bm.min(cells.core_margin(target, f.apply(h.apply(x))?));
            }
            let ball_margin = balls[i];
            Ok(CellCertificate {
                cell: i,
                target,
                ball_margin,
                budget,
                boundary_margin: bm,
                margin: (ball_margin - budget).min(bm),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PerturbedMap { f: f.clone(), h, tau: tau.clone(), delta_prime, modulus, certificates })
}

/// Outcome of the three shredding conditions plus the reachability check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShreddingReport {
    pub g: usize,
    pub delta: f64,
    pub delta_prime: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Certificates are conditional on this declared modulus of `f`.
    pub modulus: f64,
    pub cycles: Vec<Vec<usize>>,
    pub certificates: Vec<CellCertificate>,
    pub trapping_margin: f64,
    pub trapping_holds: bool,
    pub coverage: f64,
    /// `numerator/denominator`.
    pub coverage_exact: String,
    pub coverage_holds: bool,
    pub core_diameter: f64,
    pub diameter_holds: bool,
    pub max_reach: usize,
    pub reach_holds: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

pub fn verify_shredding(pm: &PerturbedMap, epsilon: f64) -> Result<ShreddingReport> {
    if pm.certificates.len() != pm.cells().len() {
        return Err(Error::Precondition("perturbed map carries no certificates".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!("ε = {epsilon} must be positive")));
    }
    let cells = pm.cells();
    let mut failures = Vec::new();

    let trapping_margin = pm.certificates.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let trapping_holds = trapping_margin > 0.0;
    for c in pm.certificates.iter().filter(|c| !(c.margin > 0.0)) {
        failures.push(format!("trapping: cell {} → {} has margin {:e}", c.cell, c.target, c.margin));
    }

    let eps = exact(epsilon)?;
    let one = num_rational::BigRational::from_integer(1.into());
    let cov = cells.coverage_exact()?;
    let coverage_holds = cov > &one - &eps;
    if !coverage_holds {
        failures.push(format!("coverage: {} is not above 1 − ε = {}", cells.coverage, 1.0 - epsilon));
    }
    let diameter_holds = cells.core_diameter_sq_exact()? < &eps * &eps;
    if !diameter_holds {
        failures.push(format!("diameter: {} is not below ε = {epsilon}", cells.core_diameter()));
    }
    let max_reach = pm.tau.max_reach();
    let reach_holds = max_reach <= cells.len();
    if !reach_holds {
        failures.push(format!("reach: {max_reach} steps exceed {}", cells.len()));
    }
    Ok(ShreddingReport {
        g: cells.g,
        delta: cells.delta,
        delta_prime: pm.delta_prime,
        beta: pm.h.beta,
        epsilon,
        modulus: pm.modulus,
        cycles: pm.tau.cycles.clone(),
        certificates: pm.certificates.clone(),
        trapping_margin,
        trapping_holds,
        coverage: cells.coverage,
        coverage_exact: cov.to_string(),
        coverage_holds,
        core_diameter: cells.core_diameter(),
        diameter_holds,
        max_reach,
        reach_holds,
        passed: failures.is_empty(),
        failures,
    })
}
