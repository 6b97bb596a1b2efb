use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of blocks a schedule may materialize.
pub const MAX_BLOCKS: u64 = 1 << 22;
const MAX_SUPER: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Mu,
    Nu,
}

/// Connector lengths between segment classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectorLengths {
    /// μ exit to μ entry.
    pub mu_mu: usize,
    /// μ exit to ν entry.
    pub mu_nu: usize,
    /// ν exit to μ entry.
    pub nu_mu: usize,
}

/// Block layout of the concatenation: super-block sizes, block tags,
/// connector lengths and cumulative end positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub lambda: u64,
    pub t: u64,
    pub depth: usize,
    pub segment_len: usize,
    /// `S_0, …, S_depth`.
    pub s: Vec<u64>,
    /// `N_1, …, N_depth`.
    pub n: Vec<u64>,
    /// `ω_m` for `m = 1..`.
    pub tags: Vec<Tag>,
    /// `l_m` for `m = 1..`.
    pub connectors: Vec<usize>,
    /// `M_m = mL + Σ_{i≤m} l_i` for `m = 1..`.
    pub ends: Vec<u64>,
}

impl Schedule {
    pub fn blocks(&self) -> usize {
        self.tags.len()
    }

    /// Block index (1-based) that closes super-block `k`.
    pub fn super_block_end(&self, k: usize) -> usize {
        (self.s[k] * (self.t + 1)) as usize
    }

    /// Super-block containing block `m` (1-based).
    pub fn super_block_of(&self, m: usize) -> usize {
        let m = m as u64;
        (1..=self.depth).find(|&k| m <= self.s[k] * (self.t + 1)).expect("block inside schedule")
    }

    /// `M_m`, with `M_0 = 0`.
    pub fn end(&self, m: usize) -> u64 {
        if m == 0 {
            0
        } else {
            self.ends[m - 1]
        }
    }

    /// `M` at the end of each super-block.
    pub fn checkpoints(&self) -> Vec<u64> {
        (1..=self.depth).map(|k| self.end(self.super_block_end(k))).collect()
    }
}

pub fn build_schedule(
    lambda: u64,
    t: u64,
    depth: usize,
    segment_len: usize,
    conn: ConnectorLengths,
) -> Result<Schedule> {
    if lambda < 2 || t < 1 || depth < 1 || segment_len < 1 {
        return Err(Error::Precondition(format!(
            "need λ ≥ 2, t ≥ 1, depth ≥ 1, L ≥ 1; got λ={lambda}, t={t}, depth={depth}, L={segment_len}"
        )));
    }
    let mut s = vec![0u64];
    let mut n = Vec::new();
    for k in 1..=depth {
        let nk = if k == 1 { 1 } else { lambda.checked_mul(s[k - 1]).ok_or(Error::DepthTooLarge(depth))? };
        let sk = s[k - 1].checked_add(nk).ok_or(Error::DepthTooLarge(depth))?;
        if sk > MAX_SUPER {
            return Err(Error::DepthTooLarge(depth));
        }
        n.push(nk);
        s.push(sk);
    }
    let total = s[depth].checked_mul(t + 1).ok_or(Error::DepthTooLarge(depth))?;
    if total > MAX_BLOCKS {
        return Err(Error::DepthTooLarge(depth));
    }
    let mut tags = Vec::with_capacity(total as usize);
    let mut connectors = Vec::with_capacity(total as usize);
    for k in 1..=depth {
        let first = s[k - 1] * (t + 1) + 1;
        let last = s[k] * (t + 1);
        for m in first..=last {
            let (tag, l) = if k % 2 == 1 {
                (Tag::Mu, conn.mu_mu)
            } else {
                match (m - 1) % (t + 1) + 1 {
                    r if r == t + 1 => (Tag::Nu, conn.nu_mu),
                    r if r == t => (Tag::Mu, conn.mu_nu),
                    _ => (Tag::Mu, conn.mu_mu),
                }
            };
            tags.push(tag);
            connectors.push(l);
        }
    }
    let mut ends = Vec::with_capacity(tags.len());
    let mut pos = 0u64;
    for &l in &connectors {
        pos += (segment_len + l) as u64;
        ends.push(pos);
    }
    Ok(Schedule { lambda, t, depth, segment_len, s, n, tags, connectors, ends })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Tag::{Mu, Nu};

    #[test]
    fn sequences_follow_the_recursion() {
        let sc = build_schedule(2, 2, 5, 12, ConnectorLengths::default()).unwrap();
        assert_eq!(sc.s, vec![0, 1, 3, 9, 27, 81]);
        assert_eq!(sc.n, vec![1, 2, 6, 18, 54]);
        assert_eq!(&sc.tags[..9], &[Mu, Mu, Mu, Mu, Mu, Nu, Mu, Mu, Nu]);
        assert_eq!(sc.end(3), 36);
    }

    #[test]
    fn connector_cases() {
        let c = ConnectorLengths { mu_mu: 1, mu_nu: 2, nu_mu: 3 };
        let sc = build_schedule(2, 2, 2, 4, c).unwrap();
        assert_eq!(sc.connectors, vec![1, 1, 1, 1, 2, 3, 1, 2, 3]);
        assert_eq!(sc.ends[8], 9 * 4 + 15);
        assert_eq!(sc.checkpoints(), vec![15, 51]);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(build_schedule(4, 2, 40, 12, ConnectorLengths::default()), Err(Error::DepthTooLarge(40))));
        assert!(matches!(build_schedule(4, 2, 12, 12, ConnectorLengths::default()), Err(Error::DepthTooLarge(12))));
    }

    proptest! {
        #[test]
        fn schedule_invariants(lambda in 2u64..6, t in 1u64..4, depth in 1usize..6, l in 1usize..20) {
            let sc = build_schedule(lambda, t, depth, l, ConnectorLengths { mu_mu: 0, mu_nu: 1, nu_mu: 2 }).unwrap();
            for k in 1..=depth {
                prop_assert_eq!(sc.s[k], (lambda + 1).pow(k as u32 - 1));
                prop_assert_eq!(sc.s[k], sc.s[k - 1] + sc.n[k - 1]);
            }
            prop_assert!(sc.ends.windows(2).all(|w| w[0] < w[1]));
            let nu = sc.tags.iter().filter(|&&g| g == Tag::Nu).count() as u64;
            let even: u64 = (2..=depth).step_by(2).map(|k| sc.n[k - 1]).sum();
            prop_assert_eq!(nu, even);
        }
    }
}
