//! Deep deterministic policy gradient: networks, replay, reward and the
//! training loop.

pub mod agent;
pub mod checkpoint;
pub mod mlp;
pub mod optim;
pub mod replay;
pub mod reward;
pub mod train;

pub use agent::{project_action, soft_update, DdpgAgent};
pub use checkpoint::Checkpoint;
pub use mlp::Mlp;
pub use train::{train, EpisodeStats, TrainOutcome};
