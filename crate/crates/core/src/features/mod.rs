//! Windowed feature extraction from raw sensor streams.
//!
//! RSSI and accelerometer share 5 s / 2.5 s-overlap window boundaries;
//! each window yields six statistics per gateway (mean, std, max, min,
//! mean first difference, missing-slot count) and one activity level (the
//! tri-axial mean absolute jerk).

pub mod csvio;
pub mod extract;
pub mod scale;
pub mod stream;
pub mod window;

pub use csvio::{read_features_csv, write_features_csv};
pub use extract::{activity_level, extract_features, FeatureVector, FEATS_PER_GATEWAY};
pub use scale::{standardize, Scaler};
pub use stream::{attach_labels, featurize_jsonl, featurize_trace, FeatureSet, StreamFeaturizer};
pub use window::{window_stream, Window, WindowSpec};
