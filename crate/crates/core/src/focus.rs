//! Per-block focus measures.
//!
//! The primary measure is the sum of modified Laplacian (SML) evaluated directly
//! on DCT coefficients through the precomputed [`DerivativeKernel`]. A
//! finite-difference SML on pixels, block variance from AC energy and the
//! maximum absolute AC coefficient are provided as comparison measures.

#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::transform::{
    derivative_kernel, BlockGrid, CoeffBlock, CoeffBlockGrid, DerivativeKernel,
};
use crate::BLOCK;

/// One non-negative activity value per block.
pub type FocusMap = BlockGrid<f64>;

/// Parameters of the finite-difference modified Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialSmlParams {
    step: usize,
    ml_threshold: f64,
}

impl SpatialSmlParams {
    pub fn new(step: usize, ml_threshold: f64) -> Result<Self> {
        if step == 0 || step >= BLOCK {
            return Err(Error::InvalidParameter(format!(
                "step must be in 1..{BLOCK}, got {step}"
            )));
        }
        if ml_threshold.is_nan() || ml_threshold < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ML threshold must be non-negative, got {ml_threshold}"
            )));
        }
        Ok(Self { step, ml_threshold })
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn ml_threshold(&self) -> f64 {
        self.ml_threshold
    }
}

impl Default for SpatialSmlParams {
    /// `step = 1`, threshold 0 (every ML value counts).
    fn default() -> Self {
        Self {
            step: 1,
            ml_threshold: 0.0,
        }
    }
}

/// SML of one block computed from its DCT coefficients.
///
/// `G_x(α,β) = Σ_u k(α,u)·G(u,β)` and `G_y(α,β) = Σ_v k(β,v)·G(α,v)` are the
/// DCTs of the second derivatives along rows and columns; the result is
/// `Σ |G_x| + |G_y|`.
///
/// Panics if `ker` was not built for the 8x8 block size.
pub fn sml_dct(cb: &CoeffBlock, ker: &DerivativeKernel) -> f64 {
    assert_eq!(
        ker.n(),
        BLOCK,
        "derivative kernel must be built for n = {BLOCK}"
    );
    let g = &cb.0;
    let mut total = 0.0;
    for a in 0..BLOCK {
        for b in 0..BLOCK {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for t in 0..BLOCK {
                gx += ker.at(a, t) * g[t][b];
                gy += ker.at(b, t) * g[a][t];
            }
            total += gx.abs() + gy.abs();
        }
    }
    total
}

/// Modified Laplacian at pixel (`x` = row, `y` = column):
/// `|2I(x,y) − I(x−s,y) − I(x+s,y)| + |2I(x,y) − I(x,y−s) − I(x,y+s)|`.
pub fn ml_spatial(img: &GrayImage, x: usize, y: usize, step: usize) -> Result<f64> {
    let oob = || Error::OutOfBounds {
        x,
        y,
        step,
        width: img.width(),
        height: img.height(),
    };
    if x < step || y < step || x + step >= img.height() || y + step >= img.width() {
        return Err(oob());
    }
    let c = 2.0 * img.get(x, y);
    Ok((c - img.get(x - step, y) - img.get(x + step, y)).abs()
        + (c - img.get(x, y - step) - img.get(x, y + step)).abs())
}

#[inline]
fn ml_clamped(img: &GrayImage, x: isize, y: isize, s: isize) -> f64 {
    let c = 2.0 * img.get_clamped(x, y);
    (c - img.get_clamped(x - s, y) - img.get_clamped(x + s, y)).abs()
        + (c - img.get_clamped(x, y - s) - img.get_clamped(x, y + s)).abs()
}

/// Finite-difference SML over the 8x8 block at (`block_row`, `block_col`),
/// summing only ML values `>= params.ml_threshold`. The rest of `img` provides
/// the neighbourhood; pixels beyond the image border are edge-replicated.
pub fn sml_spatial(
    img: &GrayImage,
    block_row: usize,
    block_col: usize,
    params: &SpatialSmlParams,
) -> f64 {
    let s = params.step as isize;
    let r0 = (block_row * BLOCK) as isize;
    let c0 = (block_col * BLOCK) as isize;
    let mut total = 0.0;
    for x in r0..r0 + BLOCK as isize {
        for y in c0..c0 + BLOCK as isize {
            let ml = ml_clamped(img, x, y, s);
            if ml >= params.ml_threshold {
                total += ml;
            }
        }
    }
    total
}

/// Pixel variance of the block computed from AC energy: `Σ_{(α,β)≠(0,0)} G² / 64`.
pub fn variance_dct(cb: &CoeffBlock) -> f64 {
    (cb.energy() - cb.dc() * cb.dc()).max(0.0) / (BLOCK * BLOCK) as f64
}

/// Largest absolute AC coefficient.
pub fn ac_max(cb: &CoeffBlock) -> f64 {
    cb.iter().skip(1).fold(0.0, |m, v| m.max(v.abs()))
}

/// Selectable block focus measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FocusMeasure {
    SmlDct,
    VarianceDct,
    AcMax,
    SmlSpatial,
}

impl FocusMeasure {
    pub const ALL: [FocusMeasure; 4] = [
        FocusMeasure::SmlDct,
        FocusMeasure::VarianceDct,
        FocusMeasure::AcMax,
        FocusMeasure::SmlSpatial,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FocusMeasure::SmlDct => "sml-dct",
            FocusMeasure::VarianceDct => "variance-dct",
            FocusMeasure::AcMax => "ac-max",
            FocusMeasure::SmlSpatial => "sml-spatial",
        }
    }
}

impl fmt::Display for FocusMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FocusMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FocusMeasure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Computes a focus map for one source. `pixels` is only read by
/// [`FocusMeasure::SmlSpatial`]; it must be the image `coeffs` was derived from.
pub fn focus_map(
    measure: FocusMeasure,
    coeffs: &CoeffBlockGrid,
    pixels: &GrayImage,
    params: &SpatialSmlParams,
) -> FocusMap {
    match measure {
        FocusMeasure::SmlDct => {
            let ker = derivative_kernel();
            coeffs.map(|cb| sml_dct(cb, ker))
        }
        FocusMeasure::VarianceDct => coeffs.map(variance_dct),
        FocusMeasure::AcMax => coeffs.map(ac_max),
        FocusMeasure::SmlSpatial => BlockGrid::from_fn(coeffs.rows(), coeffs.cols(), |r, c| {
            sml_spatial(pixels, r, c, params)
        }),
    }
}
