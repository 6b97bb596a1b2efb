use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{Schedule, SegmentBank};
use crate::entropy::ln_biguint;
use crate::error::{Error, Result};

/// Label counts `|W_m| = Π_{i≤m} |Γ_{ω_i}|` against block ends `M_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelTree {
    #[serde(with = "decimal")]
    pub counts: Vec<BigUint>,
    pub lengths: Vec<u64>,
    /// `min_m log|W_m| / M_m`.
    pub h_lower: f64,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|c| c.to_str_radix(10)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom(format!("bad count {s}"))))
            .collect()
    }
}

pub fn moran_set_count(schedule: &Schedule, bank: &SegmentBank, m_max: usize) -> Result<LabelTree> {
    if m_max < 2 || m_max > schedule.blocks() {
        return Err(Error::Precondition(format!("m_max = {m_max} must lie in [2, {}]", schedule.blocks())));
    }
    let mut counts = Vec::with_capacity(m_max);
    let mut cur = BigUint::from(1u8);
    for &tag in &schedule.tags[..m_max] {
        cur *= bank.words(tag);
        counts.push(cur.clone());
    }
    let lengths = schedule.ends[..m_max].to_vec();
    let h_lower = counts.iter().zip(&lengths).map(|(c, &m)| ln_biguint(c) / m as f64).fold(f64::INFINITY, f64::min);
    Ok(LabelTree { counts, lengths, h_lower })
}
