use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeSet;
use std::path::PathBuf;

use shadowlab_core::constructions::HorseshoeParams;
use shadowlab_core::irregular::IrregularConfig;
use shadowlab_core::shredding::{IndexSizes, PerturbParams};
use shadowlab_core::{BaseMap, SystemDescriptor, TargetMeasure, Verdict};

fn full_shift() -> SystemDescriptor {
    SystemDescriptor::FullShift { k: 2 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyParams {
    pub system: SystemDescriptor,
    #[serde(default = "defaults::n_max")]
    pub n_max: usize,
}

/// Random labels draw from the run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrregularParams {
    #[serde(default = "full_shift")]
    pub system: SystemDescriptor,
    /// Least certified Birkhoff gap between the last odd and even checkpoints.
    #[serde(default = "defaults::min_gap")]
    pub min_gap: f64,
    /// Blocks covered by the Moran counting certificate.
    #[serde(default = "defaults::moran_blocks")]
    pub moran_blocks: usize,
    /// Rate tested by the counting certificate; `0.8 (t/(t+1)) log|Γ_μ| / L` when absent.
    #[serde(default)]
    pub moran_rate: Option<f64>,
    #[serde(flatten)]
    pub config: IrregularConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowParams {
    pub system: SystemDescriptor,
    /// Levels `m`; each traces pseudo-orbits with `δ = 2^{-(m+1)}`.
    #[serde(default = "defaults::levels")]
    pub levels: Vec<u32>,
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    /// Also estimate the shadowing modulus at this `ε`.
    #[serde(default)]
    pub modulus_epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorseshoeRunParams {
    #[serde(default = "full_shift")]
    pub system: SystemDescriptor,
    /// Uniform Bernoulli on full shifts, Parry otherwise.
    #[serde(default)]
    pub mu: Option<TargetMeasure>,
    pub alpha: f64,
    #[serde(default = "defaults::horseshoe_eta")]
    pub eta: f64,
    #[serde(default = "defaults::horseshoe_len", alias = "n")]
    pub segment_len: usize,
    #[serde(default = "defaults::horseshoe_tol", alias = "tol")]
    pub tolerance: f64,
    #[serde(default = "defaults::horseshoe_truncation", alias = "J")]
    pub truncation: usize,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::trials")]
    pub checks: usize,
}

impl HorseshoeRunParams {
    pub fn params(&self, seed: u64) -> HorseshoeParams {
        HorseshoeParams {
            segment_len: self.segment_len,
            tolerance: self.tolerance,
            truncation: self.truncation,
            epsilon: self.epsilon,
            checks: self.checks,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProximalParams {
    pub m: usize,
    pub gamma: f64,
    /// Levels `N` whose prefix counts are checked.
    #[serde(default = "defaults::proximal_levels")]
    pub levels: usize,
    #[serde(default = "defaults::trials")]
    pub samples: usize,
    #[serde(default = "defaults::proximal_horizon")]
    pub horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroEntropyParams {
    #[serde(default = "defaults::sizes")]
    pub sizes: IndexSizes,
    pub t: Vec<f64>,
    pub n: u64,
    pub k: u64,
    /// Relative agreement required between closed form and direct sum.
    #[serde(default = "defaults::agreement")]
    pub tolerance: f64,
    /// The closed-form tail must fall below this.
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShredParams {
    pub g: usize,
    pub delta: f64,
    pub map: BaseMap,
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    pub delta_prime: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub zero_entropy: Option<ZeroEntropyParams>,
    #[serde(flatten)]
    pub perturb: PerturbParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    pub system: SystemDescriptor,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::checkpoints")]
    pub checkpoints: Vec<usize>,
    #[serde(default = "defaults::truncation")]
    pub truncation: usize,
    #[serde(default = "defaults::radius")]
    pub radius: f64,
    /// Verdict every sample must receive.
    #[serde(default)]
    pub expect: Option<Verdict>,
}

mod defaults {
    use super::IndexSizes;
    pub fn n_max() -> usize {
        32
    }
    pub fn min_gap() -> f64 {
        0.1
    }
    pub fn horseshoe_len() -> usize {
        10
    }
    pub fn horseshoe_tol() -> f64 {
        0.15
    }
    pub fn horseshoe_truncation() -> usize {
        2
    }
    pub fn epsilon() -> f64 {
        0.5
    }
    pub fn agreement() -> f64 {
        1e-9
    }
    pub fn threshold() -> f64 {
        1e-6
    }
    pub fn moran_blocks() -> usize {
        20
    }
    pub fn levels() -> Vec<u32> {
        (2..=8).collect()
    }
    pub fn trials() -> usize {
        1000
    }
    pub fn horizon() -> usize {
        1000
    }
    pub fn horseshoe_eta() -> f64 {
        0.05
    }
    pub fn proximal_levels() -> usize {
        4
    }
    pub fn proximal_horizon() -> usize {
        1280
    }
    pub fn sizes() -> IndexSizes {
        IndexSizes::Identity
    }
    pub fn beta() -> f64 {
        1.0
    }
    pub fn samples() -> usize {
        100
    }
    pub fn checkpoints() -> Vec<usize> {
        vec![100, 1000, 10_000, 100_000]
    }
    pub fn truncation() -> usize {
        20
    }
    pub fn radius() -> f64 {
        0.02
    }
}

/// One experiment, tagged by `command`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Entropy(EntropyParams),
    Irregular(IrregularParams),
    Shadow(ShadowParams),
    Horseshoe(HorseshoeRunParams),
    Proximal(ProximalParams),
    Shred(ShredParams),
    Classify(ClassifyParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Entropy(_) => "entropy",
            Command::Irregular(_) => "irregular",
            Command::Shadow(_) => "shadow",
            Command::Horseshoe(_) => "horseshoe",
            Command::Proximal(_) => "proximal",
            Command::Shred(_) => "shred",
            Command::Classify(_) => "classify",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self, Command::Entropy(_) | Command::Shred(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory; `shadowlab-<command>` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

const ALIASES: &[&str] = &["λ", "L", "J", "tol", "n"];
const COMMANDS: &[&str] = &["entropy", "irregular", "shadow", "horseshoe", "proximal", "shred", "classify"];

fn at<T: DeserializeOwned>(prefix: &str, v: Value) -> anyhow::Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let path = match (prefix, path.as_str()) {
            ("", p) => p.to_string(),
            (p, ".") => p.to_string(),
            (p, q) => format!("{p}.{q}"),
        };
        anyhow::anyhow!("invalid config at `{path}`: {}", e.into_inner())
    })
}

/// Parses `T`, locating errors inside its flattened part `U` separately.
fn flat<T: DeserializeOwned, U: DeserializeOwned>(v: Value) -> anyhow::Result<T> {
    at("", v.clone()).map_err(|outer| match at::<U>("", v) {
        Err(inner) => inner,
        Ok(_) => outer,
    })
}

impl RunConfig {
    /// Parses JSON, reporting the path of the offending field on failure.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let given: Value = serde_json::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
        let Some(fields) = given.as_object() else {
            anyhow::bail!("invalid config at `.`: expected a JSON object");
        };
        let mut rest = fields.clone();
        let name = match rest.remove("command") {
            Some(Value::String(s)) => s,
            _ => anyhow::bail!("invalid config at `command`: expected one of {}", COMMANDS.join(", ")),
        };
        let seed: Option<u64> = rest.remove("seed").map(|v| at("seed", v)).transpose()?;
        let out: Option<PathBuf> = rest.remove("out").map(|v| at("out", v)).transpose()?;
        let body = Value::Object(rest);
        let command = match name.as_str() {
            "entropy" => Command::Entropy(at("", body)?),
            "irregular" => Command::Irregular(flat::<_, IrregularConfig>(body)?),
            "shadow" => Command::Shadow(at("", body)?),
            "horseshoe" => Command::Horseshoe(at("", body)?),
            "proximal" => Command::Proximal(at("", body)?),
            "shred" => Command::Shred(flat::<_, PerturbParams>(body)?),
            "classify" => Command::Classify(at("", body)?),
            other => anyhow::bail!("invalid config at `command`: unknown command `{other}`"),
        };
        let cfg = RunConfig { command, seed, out };
        let known = serde_json::to_value(&cfg)?;
        if let Some(known) = known.as_object() {
            let known: BTreeSet<&str> = known.keys().map(String::as_str).chain(ALIASES.iter().copied()).collect();
            if let Some(extra) = fields.keys().find(|k| !known.contains(k.as_str())) {
                anyhow::bail!("invalid config at `{extra}`: unknown field");
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.command.is_stochastic() && self.seed.is_none() {
            anyhow::bail!("invalid config at `seed`: the {} command needs a seed", self.command.name());
        }
        let system = match &self.command {
            Command::Entropy(p) => Some(&p.system),
            Command::Irregular(p) => Some(&p.system),
            Command::Horseshoe(p) => Some(&p.system),
            _ => None,
        };
        if let Some(s) = system {
            if !matches!(s, SystemDescriptor::FullShift { .. } | SystemDescriptor::Sft { .. }) {
                anyhow::bail!("invalid config at `system.kind`: the {} command needs a shift", self.command.name());
            }
        }
        if let Command::Shadow(p) = &self.command {
            if matches!(p.system, SystemDescriptor::GridMap { .. }) {
                anyhow::bail!("invalid config at `system.kind`: shadow supports shifts and interval homeomorphisms");
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(format!("shadowlab-{}", self.command.name())))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
