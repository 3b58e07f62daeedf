//! Synthetic multi-focus data and the benchmark runner.
//!
//! Pristine images are defocused with a binary disk kernel on one half (or one
//! strip) of the frame, producing source sets with a known all-in-focus ground
//! truth.

mod bench;
mod blur;
mod synth;

pub use bench::{
    run_benchmark, run_cases, time_per_block, BenchCase, BenchOptions, BenchReport, BenchRow,
    Method, MethodSummary,
};
pub use blur::{
    apply_blur, convolve, disk_blur, disk_kernel, make_multi_focus_set, make_split_focus_pair,
    BlurRegion, BlurSpec, Kernel, MultiFocusSet, SplitFocusPair,
};
pub use synth::synthetic_image;
