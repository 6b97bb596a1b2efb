//! Irregular points by concatenating orbit segments of two measures along
//! a growing schedule, tracing the pseudo-orbit, and counting labels.

mod bank;
mod construct;
mod moran;
mod schedule;

pub use bank::{select_segments, target_separation, word_signature, Connectors, SegmentBank, MAX_SCAN};
pub use construct::{
    assemble_pseudo_orbit, build_irregular_point, choose_labels, concatenate, CheckpointRow, IrregularConfig,
    IrregularReport, IrregularRun, LabelMode, Parity, TConstraint, MAX_POSITIONS,
};
pub use moran::{moran_set_count, LabelTree};
pub use schedule::{build_schedule, ConnectorLengths, Schedule, Tag, MAX_BLOCKS};
