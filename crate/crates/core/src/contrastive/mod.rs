//! Contrastive representation learning on augmented compositions.

pub mod adam;
pub mod checkpoint;
pub mod loss;
pub mod network;
pub mod train;
pub mod views;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use loss::{nt_xent, nt_xent_loss, EmbeddingBatch};
pub use network::{Architecture, EncoderState, InputEncoding, Matrix};
pub use train::{finetune, linear_eval, pretrain, ContrastiveConfig, FinetuneOutput, HeadConfig, PretrainOutput};
pub use views::{sample_views_paired, sample_views_subcomposition, ViewBatch};
