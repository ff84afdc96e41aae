//! Linear-chain CRF with neural emissions, activity-gated transitions,
//! exact inference, Viterbi decoding and hard-EM self-training.

pub mod decode;
pub mod inference;
pub mod labels;
pub mod loss;
pub mod model;
pub mod train;

pub use decode::{read_decode_csv, write_decode_csv, DecodedSequence};
pub use inference::{
    enumerate_paths, log_forward, marginals, path_score, sequence_nll, sequence_nll_grads,
    viterbi, LabelSequence, LabelSource, SequenceGrads,
};
pub use labels::{complement_labels, NightSpan};
pub use loss::{decode_scores, eval_cross_entropy, infer_chunked, loss_ssl, loss_wsl, SslStep};
pub use model::{default_eps_prime, gated_transition, Checkpoint, CrfModel, CHECKPOINT_FORMAT, NEG_INF};
pub use train::{train, EpochStats, Supervised, TrainConfig, UnlabeledSequence};
