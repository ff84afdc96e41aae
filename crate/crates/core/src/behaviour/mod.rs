//! Behavioural signatures from decoded location sequences: shadowing
//! (mutual information), wandering (Lempel-Ziv complexity and per-room
//! activity) and sleep disturbance.

pub mod activity;
pub mod lz;
pub mod mi;
pub mod report;
pub mod sleep;
pub mod svg;

pub use activity::{activity_totals, ActivityByDay};
pub use lz::lz76_complexity;
pub use mi::{
    mutual_information, mutual_information_counts, plug_in_entropy, stratify_mi, Dayparts,
    OccupancyPair, MIN_BUCKET_WINDOWS,
};
pub use report::{analyse, AnalysisConfig, BehaviourReport};
pub use sleep::{sleep_disturbance, SleepReport, SleepSummary};
pub use svg::{line_chart, Series};
