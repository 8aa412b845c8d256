//! A desk-scale image restoration problem: a linear restorer trained with a weighted sum
//! of losses, scored on a held-out split.
//!
//! Images are single-channel. The restorer is bicubic upsampling followed by a small
//! learned filter, so training is cheap and gradients are exact for most losses.
//! `hf_proxy`, the mean absolute Laplacian error, stands in for a learned perceptual metric.

pub mod dataset;
pub mod evaluator;
pub mod image;
pub mod loss;
pub mod metrics;
pub mod resample;
pub mod restorer;
pub mod trainer;

pub use dataset::{synthesize_dataset, Dataset, ImagePair};
pub use evaluator::{EvaluatorMode, RestorationEvaluator, RestorationSettings};
pub use image::ImageTensor;
pub use loss::{combined_loss, loss_value, LossKind};
pub use metrics::{evaluate_metrics, MetricKind, MetricVector};
pub use resample::{downsample, upsample};
pub use restorer::{restore, RestorerParams};
pub use trainer::Trainer;
