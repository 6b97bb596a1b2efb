use serde::{Deserialize, Serialize};

use super::CellDecomposition;
use crate::error::{Error, Result};
use crate::systems::GridMap;

/// Images of centers closer than this to a cell boundary are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// The index map `τ` with its cycles and basins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauStructure {
    pub tau: Vec<usize>,
    /// Each cycle starts at its smallest cell; cycles sorted by that cell.
    pub cycles: Vec<Vec<usize>>,
    /// Cycle index of the basin containing each cell.
    pub basin: Vec<usize>,
    /// Steps until each cell's `τ`-orbit enters its cycle.
    pub reach: Vec<usize>,
}

impl TauStructure {
    pub fn from_map(tau: Vec<usize>) -> Result<Self> {
        let n = tau.len();
        if let Some(&bad) = tau.iter().find(|&&t| t >= n) {
            return Err(Error::ShapeError(format!("τ value {bad} outside 0..{n}")));
        }
        let mut on_cycle = vec![false; n];
        let mut state = vec![0u8; n];
        for s in 0..n {
            let mut path = Vec::new();
            let mut v = s;
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                v = tau[v];
            }
            if state[v] == 1 {
                let at = path.iter().position(|&u| u == v).expect("on path");
                for &u in &path[at..] {
                    on_cycle[u] = true;
                }
            }
            for &u in &path {
                state[u] = 2;
            }
        }
        let mut cycles = Vec::new();
        let mut basin = vec![usize::MAX; n];
        for s in 0..n {
            if on_cycle[s] && basin[s] == usize::MAX {
                let mut cyc = vec![s];
                basin[s] = cycles.len();
                let mut v = tau[s];
                while v != s {
                    basin[v] = cycles.len();
                    cyc.push(v);
                    v = tau[v];
                }
                cycles.push(cyc);
            }
        }
        let mut reach = vec![0usize; n];
        for s in 0..n {
            let (mut v, mut k) = (s, 0);
            while !on_cycle[v] {
                v = tau[v];
                k += 1;
            }
            reach[s] = k;
            basin[s] = basin[v];
        }
        Ok(TauStructure { tau, cycles, basin, reach })
    }

    /// Cells of the basin `Ô_j`.
    pub fn basin_cells(&self, j: usize) -> Vec<usize> {
        (0..self.tau.len()).filter(|&i| self.basin[i] == j).collect()
    }

    pub fn max_reach(&self) -> usize {
        self.reach.iter().copied().max().unwrap_or(0)
    }
}

fn tie_candidates(v: f64, g: usize) -> Vec<usize> {
    let scaled = v * g as f64;
    let base = (scaled as usize).min(g - 1);
    let frac = scaled - base as f64;
    let tol = TIE_TOLERANCE * g as f64;
    let mut out = vec![base];
    if frac < tol {
        out.push((base + g - 1) % g);
    }
    if frac > 1.0 - tol {
        out.push((base + 1) % g);
    }
    out
}

/// `τ(i)` is the cell containing `f(p_i)`; near-boundary ties go to the
/// smallest adjacent index.
pub fn induce_tau(f: &GridMap, cells: &CellDecomposition) -> Result<TauStructure> {
    let g = cells.g;
    let tau = (0..cells.len())
        .map(|i| {
            let q = f.apply(cells.center(i))?;
            if !q.iter().all(|v| (0.0..=1.0).contains(v)) {
                return Err(Error::RangeError(q));
            }
            let (xs, ys) = (tie_candidates(q[0].rem_euclid(1.0), g), tie_candidates(q[1].rem_euclid(1.0), g));
            Ok(ys.iter().flat_map(|&r| xs.iter().map(move |&c| r * g + c)).min().expect("nonempty"))
        })
        .collect::<Result<Vec<_>>>()?;
    TauStructure::from_map(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shredding::decompose_grid;
    use crate::systems::BaseMap;

    #[test]
    fn identity_and_constant() {
        let cells = decompose_grid(4, 1.0 / 32.0).unwrap();
        let id = induce_tau(&GridMap::new(4, BaseMap::Identity).unwrap(), &cells).unwrap();
        assert_eq!(id.tau, (0..16).collect::<Vec<_>>());
        assert_eq!(id.cycles.len(), 16);
        let k = induce_tau(&GridMap::new(4, BaseMap::Constant { x: 0.125, y: 0.125 }).unwrap(), &cells).unwrap();
        assert!(k.tau.iter().all(|&t| t == 0));
        assert_eq!(k.cycles, vec![vec![0]]);
        assert_eq!(k.basin_cells(0).len(), 16);
        assert_eq!(k.max_reach(), 1);
    }

    #[test]
    fn translation_matches_brute_force() {
        let cells = decompose_grid(4, 1.0 / 32.0).unwrap();
        let f = GridMap::new(4, BaseMap::Translate { dx: 0.3, dy: 0.0 }).unwrap();
        let t = induce_tau(&f, &cells).unwrap();
        for i in 0..16 {
            let c = cells.center(i);
            let x = (c[0] + 0.3) % 1.0;
            let brute = (i / 4) * 4 + (x * 4.0).floor() as usize;
            assert_eq!(t.tau[i], brute);
        }
        assert_eq!(t.cycles.len(), 4);
        assert!(t.cycles.iter().all(|c| c.len() == 4));
        assert_eq!(t.max_reach(), 0);
    }

    #[test]
    fn boundary_ties_go_low() {
        let cells = decompose_grid(4, 1.0 / 32.0).unwrap();
        let f = GridMap::new(4, BaseMap::Constant { x: 0.5, y: 0.25 + 1e-12 }).unwrap();
        let t = induce_tau(&f, &cells).unwrap();
        assert!(t.tau.iter().all(|&v| v == 1));
        let f = GridMap::new(4, BaseMap::Constant { x: 0.0, y: 0.0 }).unwrap();
        assert!(induce_tau(&f, &cells).unwrap().tau.iter().all(|&v| v == 0));
    }

    #[test]
    fn tails_and_cycles() {
        let t = TauStructure::from_map(vec![1, 2, 3, 1, 3, 5]).unwrap();
        assert_eq!(t.cycles, vec![vec![1, 2, 3], vec![5]]);
        assert_eq!(t.basin, vec![0, 0, 0, 0, 0, 1]);
        assert_eq!(t.reach, vec![1, 0, 0, 0, 1, 0]);
        assert!(TauStructure::from_map(vec![3]).is_err());
    }
}
