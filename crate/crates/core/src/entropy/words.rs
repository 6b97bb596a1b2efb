use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{Shift, WordCount};

/// Word-count table with the entropy estimate `log|B_{n_max}| / n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyTable {
    pub rows: Vec<WordCount>,
    pub estimate: f64,
}

impl EntropyTable {
    /// `log|B_n| / n` for every row.
    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.log_count / r.n as f64).collect()
    }
}

pub fn subshift_entropy(shift: &Shift, n_max: usize) -> Result<EntropyTable> {
    if n_max < 4 {
        return Err(Error::Precondition(format!("n_max = {n_max}, need at least 4")));
    }
    let rows = shift.word_counts(n_max);
    let last = rows.last().expect("n_max ≥ 4");
    let estimate = last.log_count / n_max as f64;
    Ok(EntropyTable { rows, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SftSpec;

    #[test]
    fn full_shift_is_exact() {
        for k in [2usize, 3, 5] {
            let t = subshift_entropy(&Shift::full(k).unwrap(), 40).unwrap();
            for r in t.rates() {
                assert!((r - (k as f64).ln()).abs() < 1e-12);
            }
        }
        assert!(subshift_entropy(&Shift::full(2).unwrap(), 3).is_err());
    }

    #[test]
    fn golden_mean_counts_are_fibonacci() {
        let t = subshift_entropy(&Shift::sft(&SftSpec::golden_mean()).unwrap(), 32).unwrap();
        let (mut a, mut b) = (2u128, 3u128);
        for r in &t.rows {
            assert_eq!(r.exact, Some(a));
            (a, b) = (b, a + b);
        }
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((t.estimate - phi.ln()).abs() < 1e-2);
    }
}
