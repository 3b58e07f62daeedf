//! Multi-focus image fusion on 8x8 DCT blocks.
//!
//! Sources are split into 8x8 blocks and transformed with an orthonormal
//! DCT-II. Each block's sharpness is scored by the sum of modified Laplacian
//! computed directly from its DCT coefficients. A per-block decision map is
//! cleaned up with a 3x3 majority filter, and the fused image is assembled
//! from the selected coefficient blocks before a single inverse transform.
//!
//! ```
//! use dctfuse::{fuse_pair, harness, FusionConfig};
//!
//! let truth = harness::synthetic_image(7, 64, 32);
//! let pair = harness::make_split_focus_pair(&truth, 5).unwrap();
//! let fused = fuse_pair(&pair.a, &pair.b, &FusionConfig::default()).unwrap();
//! assert!(fused.image.max_abs_diff(&truth) < 1e-6);
//! ```

pub mod error;
pub mod focus;
pub mod fusion;
pub mod harness;
pub mod image;
pub mod metrics;
pub mod pgm;
pub mod transform;

/// Side length of a transform block.
pub const BLOCK: usize = 8;

pub use error::{Error, ErrorClass, Result};
pub use focus::{
    ac_max, ml_spatial, sml_dct, sml_spatial, variance_dct, FocusMap, FocusMeasure,
    SpatialSmlParams,
};
pub use fusion::{
    consistency_verify, decision_map, fuse_multi, fuse_pair, select_blocks, DecisionMap,
    FusionConfig, FusionOutcome, MultiFusionOutcome, RefinedMap,
};
pub use image::GrayImage;
pub use metrics::{mutual_information, petrovic_qabf, ssim, MetricsReport};
pub use pgm::{read_image, write_image};
pub use transform::{
    assemble_image, build_derivative_kernel, dct2_forward, dct2_inverse, derivative_kernel,
    partition_blocks, BlockGrid, CoeffBlock, CoeffBlockGrid, DerivativeKernel, PixelBlock,
};
