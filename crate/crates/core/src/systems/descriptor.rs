use serde::{Deserialize, Serialize};

use super::interval::{HomeoFormula, IntervalHomeo};
use super::shift::{SftSpec, Shift};
use super::torus::{BaseMap, GridMap};
use crate::error::Result;

/// JSON description of a system, e.g. `{"kind":"sft","k":2,"forbidden":["11"]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemDescriptor {
    FullShift {
        k: usize,
    },
    Sft {
        k: usize,
        forbidden: Vec<String>,
    },
    IntervalHomeo {
        #[serde(default = "default_formula")]
        formula: HomeoFormula,
    },
    GridMap {
        g: usize,
        map: BaseMap,
    },
}

fn default_formula() -> HomeoFormula {
    HomeoFormula::Sqrt
}

/// A constructed system of any supported kind.
#[derive(Clone, Debug)]
pub enum AnySystem {
    Shift(Shift),
    Interval(IntervalHomeo),
    Grid(GridMap),
}

impl SystemDescriptor {
    pub fn build(&self) -> Result<AnySystem> {
        Ok(match self {
            SystemDescriptor::FullShift { k } => AnySystem::Shift(Shift::full(*k)?),
            SystemDescriptor::Sft { k, forbidden } => {
                AnySystem::Shift(Shift::sft(&SftSpec { k: *k, forbidden: forbidden.clone() })?)
            }
            SystemDescriptor::IntervalHomeo { formula } => AnySystem::Interval(IntervalHomeo::new(formula.clone())?),
            SystemDescriptor::GridMap { g, map } => AnySystem::Grid(GridMap::new(*g, map.clone())?),
        })
    }
}
