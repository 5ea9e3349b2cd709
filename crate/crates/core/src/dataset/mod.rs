//! From a corpus to labeled training data.
//!
//! Transmitters are drawn into the authorized set `A`, the known outliers `K`
//! (available for training) and the unseen outliers `O` (test only). Frames
//! are then split, normalized, augmented and labeled for one of the three
//! architectures.

mod labels;
mod partition;
mod splits;
mod transform;

pub use labels::{class_weights, label_frames, Label, LabeledDataset};
pub use partition::{partition_transmitters, SetPartition, SetSizes};
pub use splits::{make_splits, FrameRef, SplitBundle};
pub use transform::{augment, augment_into, normalize_frame, AugmentConfig};
