//! Losses, the Adam optimizer, and the seeded training loop.

mod adam;
mod loss;
mod trainer;

pub use adam::{adam_step, OptimizerState};
pub use loss::{bce_with_logits, cross_entropy};
pub use trainer::{
    format_sig6, history_table, train_model, train_model_with_snapshots, EpochRecord, Evaluator,
    Precision, Task, TaskData, TrainConfig, TrainResult,
};
