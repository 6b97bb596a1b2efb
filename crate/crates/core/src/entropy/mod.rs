//! Bowen metrics, separated and spanning sets, word-count entropy and
//! the cover-sum certificates for Bowen entropy.

mod bowen;
mod certificates;
mod katok;
mod separated;
mod words;

pub use bowen::{dn_distance, BowenBall};
pub use certificates::{
    bowen_sum_upper, geometric_tail_closed, geometric_tail_direct, ln_biguint, moran_lower_certificate, CoverSum,
    MoranCertificate,
};
pub use katok::{katok_entropy_estimate, word_sampler, KatokEstimate};
pub use separated::{separated_set, spanning_set, SearchMode, SeparatedSet, EXACT_POOL_LIMIT};
pub use words::{subshift_entropy, EntropyTable};
