//! Block-domain fusion: decision map, 3x3 consistency verification, block
//! selection on DCT coefficients and the end-to-end pipelines.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::focus::{focus_map, FocusMap, FocusMeasure, SpatialSmlParams};
use crate::image::GrayImage;
use crate::transform::{coeffs_to_image, image_to_coeffs, BlockGrid, CoeffBlock, CoeffBlockGrid};

/// Fusion pipeline settings. The default is SML on DCT coefficients, threshold 0,
/// consistency verification on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub measure: FocusMeasure,
    decision_threshold: f64,
    pub consistency_verification: bool,
    /// Only read by [`FocusMeasure::SmlSpatial`].
    pub spatial_params: SpatialSmlParams,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            measure: FocusMeasure::SmlDct,
            decision_threshold: 0.0,
            consistency_verification: true,
            spatial_params: SpatialSmlParams::default(),
        }
    }
}

impl FusionConfig {
    pub fn new(measure: FocusMeasure, consistency_verification: bool) -> Self {
        Self {
            measure,
            consistency_verification,
            ..Self::default()
        }
    }

    pub fn with_threshold(mut self, t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "decision threshold must be non-negative, got {t}"
            )));
        }
        self.decision_threshold = t;
        Ok(self)
    }

    pub fn with_spatial_params(mut self, params: SpatialSmlParams) -> Self {
        self.spatial_params = params;
        self
    }

    pub fn decision_threshold(&self) -> f64 {
        self.decision_threshold
    }
}

/// Per-block ternary decision: `+1` take A, `-1` take B, `0` undecided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionMap(BlockGrid<i8>);

/// Neighbourhood sums of a [`DecisionMap`], each in `[-9, 9]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinedMap(BlockGrid<i8>);

macro_rules! map_impls {
    ($t:ident, $bound:expr) => {
        impl $t {
            pub fn from_grid(grid: BlockGrid<i8>) -> Result<Self> {
                if let Some(v) = grid.iter().find(|v| v.abs() > $bound) {
                    return Err(Error::InvalidParameter(format!(
                        "value {v} outside [-{b}, {b}]",
                        b = $bound
                    )));
                }
                Ok($t(grid))
            }

            pub fn grid(&self) -> &BlockGrid<i8> {
                &self.0
            }

            pub fn shape(&self) -> (usize, usize) {
                self.0.shape()
            }

            #[inline]
            pub fn get(&self, row: usize, col: usize) -> i8 {
                *self.0.get(row, col)
            }

            /// One grid row per line, space-separated integers.
            pub fn to_text(&self) -> String {
                grid_to_text(&self.0)
            }

            pub fn from_text(text: &str) -> Result<Self> {
                Self::from_grid(grid_from_text(text)?)
            }
        }
    };
}

map_impls!(DecisionMap, 1);
map_impls!(RefinedMap, 9);

impl DecisionMap {
    pub fn negated(&self) -> DecisionMap {
        DecisionMap(self.0.map(|v| -v))
    }
}

fn grid_to_text(grid: &BlockGrid<i8>) -> String {
    let mut out = String::new();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            if c > 0 {
                out.push(' ');
            }
            write!(out, "{}", grid.get(r, c)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn grid_from_text(text: &str) -> Result<BlockGrid<i8>> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<i8>()
                        .map_err(|_| Error::InvalidParameter(format!("bad map entry `{t}`")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    BlockGrid::from_rows(rows)
}

/// `+1` where `fa > fb + t`, `-1` where `fa < fb - t`, `0` otherwise.
pub fn decision_map(fa: &FocusMap, fb: &FocusMap, t: f64) -> Result<DecisionMap> {
    fa.ensure_same_shape(fb)?;
    let cells = fa
        .iter()
        .zip(fb.iter())
        .map(|(&a, &b)| {
            if a > b + t {
                1
            } else if a < b - t {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(DecisionMap(BlockGrid::from_cells(
        fa.rows(),
        fa.cols(),
        cells,
    )?))
}

/// Sum of the 3x3 neighbourhood (centre included) of every decision.
/// Neighbours outside the grid contribute 0.
pub fn consistency_verify(m: &DecisionMap) -> RefinedMap {
    let g = &m.0;
    let (rows, cols) = g.shape();
    RefinedMap(BlockGrid::from_fn(rows, cols, |r, c| {
        let mut s = 0i8;
        for nr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
            for nc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                s += g.get(nr, nc);
            }
        }
        s
    }))
}

/// Uses the decision map unchanged as the refined map (consistency verification off).
pub fn without_verification(m: &DecisionMap) -> RefinedMap {
    RefinedMap(m.0.clone())
}

/// Takes A where `S > 0`, B where `S < 0` and the coefficient-wise mean where `S = 0`.
pub fn select_blocks(
    ga: &CoeffBlockGrid,
    gb: &CoeffBlockGrid,
    s: &RefinedMap,
) -> Result<CoeffBlockGrid> {
    ga.ensure_same_shape(gb)?;
    ga.ensure_same_shape(&s.0)?;
    let cells = ga
        .iter()
        .zip(gb.iter())
        .zip(s.0.iter())
        .map(|((a, b), &sv)| match sv {
            v if v > 0 => *a,
            v if v < 0 => *b,
            _ => a.average(b),
        })
        .collect();
    BlockGrid::from_cells(ga.rows(), ga.cols(), cells)
}

/// A source image together with its block DCT.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub pixels: &'a GrayImage,
    pub coeffs: &'a CoeffBlockGrid,
}

/// Result of a two-source fusion, with the intermediate maps for diagnostics.
#[derive(Debug, Clone)]
pub struct FusionOutcome {
    pub image: GrayImage,
    pub decision: DecisionMap,
    pub refined: RefinedMap,
}

/// The coefficient-domain core of [`fuse_pair`]: focus measures, decision,
/// optional verification and selection. No transforms are performed here.
pub fn fuse_coefficients(
    a: Source<'_>,
    b: Source<'_>,
    cfg: &FusionConfig,
) -> Result<(CoeffBlockGrid, DecisionMap, RefinedMap)> {
    a.coeffs.ensure_same_shape(b.coeffs)?;
    let fa = focus_map(cfg.measure, a.coeffs, a.pixels, &cfg.spatial_params);
    let fb = focus_map(cfg.measure, b.coeffs, b.pixels, &cfg.spatial_params);
    let decision = decision_map(&fa, &fb, cfg.decision_threshold)?;
    let refined = if cfg.consistency_verification {
        consistency_verify(&decision)
    } else {
        without_verification(&decision)
    };
    let fused = select_blocks(a.coeffs, b.coeffs, &refined)?;
    Ok((fused, decision, refined))
}

/// Fuses two registered, block-aligned images of equal size.
pub fn fuse_pair(a: &GrayImage, b: &GrayImage, cfg: &FusionConfig) -> Result<FusionOutcome> {
    a.ensure_same_dimensions(b)?;
    let ca = image_to_coeffs(a)?;
    let cb = image_to_coeffs(b)?;
    let (fused, decision, refined) = fuse_coefficients(
        Source {
            pixels: a,
            coeffs: &ca,
        },
        Source {
            pixels: b,
            coeffs: &cb,
        },
        cfg,
    )?;
    Ok(FusionOutcome {
        image: coeffs_to_image(&fused)?,
        decision,
        refined,
    })
}

/// Result of [`fuse_multi`]. `selection` holds the source index used for each
/// block, or `None` where tied sources were averaged.
#[derive(Debug, Clone)]
pub struct MultiFusionOutcome {
    pub image: GrayImage,
    pub selection: BlockGrid<Option<usize>>,
}

impl MultiFusionOutcome {
    /// One grid row per line; `-1` marks averaged blocks.
    pub fn selection_text(&self) -> String {
        let g = &self.selection;
        let mut out = String::new();
        for r in 0..g.rows() {
            let line: Vec<String> = (0..g.cols())
                .map(|c| g.get(r, c).map_or("-1".to_string(), |i| i.to_string()))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Fuses `k >= 2` sources.
///
/// This generalises the two-source rule. Each block is taken from the source
/// with the largest focus measure; exact ties average the tied sources. With
/// consistency verification on, each block instead takes the source index that
/// wins most often in its in-grid 3x3 neighbourhood, ties going to the
/// larger focus value at that block and then to the lower index. The decision
/// threshold is not used.
pub fn fuse_multi(sources: &[GrayImage], cfg: &FusionConfig) -> Result<MultiFusionOutcome> {
    if sources.len() < 2 {
        return Err(Error::TooFewSources(sources.len()));
    }
    for s in &sources[1..] {
        sources[0].ensure_same_dimensions(s)?;
    }
    let coeffs = sources
        .iter()
        .map(image_to_coeffs)
        .collect::<Result<Vec<_>>>()?;
    let maps: Vec<FocusMap> = coeffs
        .iter()
        .zip(sources)
        .map(|(c, p)| focus_map(cfg.measure, c, p, &cfg.spatial_params))
        .collect();
    let (rows, cols) = coeffs[0].shape();

    let winners = |r: usize, c: usize| -> Vec<usize> {
        let best = maps
            .iter()
            .map(|m| *m.get(r, c))
            .fold(f64::NEG_INFINITY, f64::max);
        (0..maps.len())
            .filter(|&i| *maps[i].get(r, c) == best)
            .collect()
    };

    let selection: BlockGrid<Option<usize>> = if cfg.consistency_verification {
        let votes = BlockGrid::from_fn(rows, cols, |r, c| winners(r, c)[0]);
        BlockGrid::from_fn(rows, cols, |r, c| {
            let mut counts = vec![0usize; sources.len()];
            for nr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
                for nc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                    counts[*votes.get(nr, nc)] += 1;
                }
            }
            let top = *counts.iter().max().expect("non-empty");
            let mut pick = None::<usize>;
            for i in (0..sources.len()).filter(|&i| counts[i] == top) {
                match pick {
                    Some(p) if *maps[i].get(r, c) <= *maps[p].get(r, c) => {}
                    _ => pick = Some(i),
                }
            }
            pick
        })
    } else {
        BlockGrid::from_fn(rows, cols, |r, c| {
            let w = winners(r, c);
            (w.len() == 1).then(|| w[0])
        })
    };

    let fused = BlockGrid::from_fn(rows, cols, |r, c| match selection.get(r, c) {
        Some(i) => *coeffs[*i].get(r, c),
        None => {
            let w = winners(r, c);
            let sum = w
                .iter()
                .fold(CoeffBlock::zero(), |acc, &i| acc.add(coeffs[i].get(r, c)));
            sum.scale(1.0 / w.len() as f64)
        }
    });
    Ok(MultiFusionOutcome {
        image: coeffs_to_image(&fused)?,
        selection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fmap(rows: usize, cols: usize, v: &[f64]) -> FocusMap {
        BlockGrid::from_cells(rows, cols, v.to_vec()).unwrap()
    }

    fn dmap(rows: usize, cols: usize, v: &[i8]) -> DecisionMap {
        DecisionMap::from_grid(BlockGrid::from_cells(rows, cols, v.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn decision_branches() {
        let m = decision_map(
            &fmap(1, 3, &[10.0, 5.0, 5.0]),
            &fmap(1, 3, &[5.0, 10.0, 5.5]),
            1.0,
        )
        .unwrap();
        assert_eq!(m.grid().cells(), &[1, -1, 0]);
    }

    #[test]
    fn decision_shape_mismatch() {
        let e = decision_map(&fmap(1, 2, &[1.0, 2.0]), &fmap(2, 1, &[1.0, 2.0]), 0.0);
        assert!(matches!(e, Err(Error::ShapeMismatch(..))));
    }

    #[test]
    fn verification_interior_and_corner() {
        let s = consistency_verify(&dmap(3, 3, &[1; 9]));
        assert_eq!(s.get(1, 1), 9);
        assert_eq!(s.get(0, 0), 4);
        assert_eq!(s.get(0, 1), 6);

        let mut v = [1i8; 9];
        v[4] = -1;
        let s = consistency_verify(&dmap(3, 3, &v));
        assert_eq!(s.get(1, 1), 7);
    }

    #[test]
    fn isolated_misdecision_is_corrected() {
        let a = CoeffBlock::from_fn(|r, c| (r + c) as f64);
        let b = CoeffBlock::from_fn(|r, c| -((r * c) as f64));
        let ga = BlockGrid::from_fn(3, 3, |_, _| a);
        let gb = BlockGrid::from_fn(3, 3, |_, _| b);
        let mut v = [1i8; 9];
        v[4] = -1;
        let fused = select_blocks(&ga, &gb, &consistency_verify(&dmap(3, 3, &v))).unwrap();
        assert!(fused.iter().all(|blk| *blk == a));
    }

    #[test]
    fn selection_branches() {
        let a = CoeffBlock::from_fn(|r, c| (r * 8 + c) as f64);
        let b = CoeffBlock::from_fn(|_, _| 2.0);
        let ga = BlockGrid::from_fn(1, 3, |_, _| a);
        let gb = BlockGrid::from_fn(1, 3, |_, _| b);
        let s =
            RefinedMap::from_grid(BlockGrid::from_cells(1, 3, vec![3, -2, 0]).unwrap()).unwrap();
        let f = select_blocks(&ga, &gb, &s).unwrap();
        assert_eq!(*f.get(0, 0), a);
        assert_eq!(*f.get(0, 1), b);
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(f.get(0, 2)[(r, c)], ((r * 8 + c) as f64 + 2.0) / 2.0);
            }
        }
        let same = select_blocks(&ga, &ga, &s).unwrap();
        assert_eq!(same, ga);
    }

    #[test]
    fn selection_shape_mismatch() {
        let ga = BlockGrid::from_fn(1, 2, |_, _| CoeffBlock::zero());
        let gb = BlockGrid::from_fn(2, 1, |_, _| CoeffBlock::zero());
        let s = RefinedMap::from_grid(BlockGrid::from_fn(1, 2, |_, _| 0)).unwrap();
        assert!(select_blocks(&ga, &gb, &s).is_err());
    }

    #[test]
    fn map_text_round_trip() {
        let m = dmap(2, 3, &[1, 0, -1, -1, 1, 0]);
        assert_eq!(m.to_text(), "1 0 -1\n-1 1 0\n");
        assert_eq!(DecisionMap::from_text(&m.to_text()).unwrap(), m);
        assert!(DecisionMap::from_text("1 2\n").is_err());
        assert!(RefinedMap::from_text("9 -9\n3 4\n").is_ok());
        assert!(RefinedMap::from_text("10\n").is_err());
    }

    #[test]
    fn threshold_validation() {
        assert!(FusionConfig::default().with_threshold(-0.1).is_err());
        assert!(FusionConfig::default().with_threshold(f64::NAN).is_err());
        assert_eq!(
            FusionConfig::default()
                .with_threshold(2.5)
                .unwrap()
                .decision_threshold(),
            2.5
        );
    }

    #[test]
    fn fuse_pair_rejects_mismatch() {
        let a = GrayImage::filled(16, 16, 0.0);
        let b = GrayImage::filled(16, 8, 0.0);
        assert!(matches!(
            fuse_pair(&a, &b, &FusionConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        let c = GrayImage::filled(12, 12, 0.0);
        assert!(matches!(
            fuse_pair(&c, &c, &FusionConfig::default()),
            Err(Error::NotBlockAligned { .. })
        ));
    }

    #[test]
    fn fuse_multi_needs_two_sources() {
        let a = GrayImage::filled(8, 8, 0.0);
        assert!(matches!(
            fuse_multi(&[a], &FusionConfig::default()),
            Err(Error::TooFewSources(1))
        ));
    }

    #[test]
    fn fuse_multi_identical_sources() {
        let img = GrayImage::from_fn(16, 16, |r, c| ((r * 7 + c * 3) % 17) as f64 * 10.0);
        for cv in [false, true] {
            let cfg = FusionConfig::new(FocusMeasure::SmlDct, cv);
            let out = fuse_multi(&[img.clone(), img.clone(), img.clone()], &cfg).unwrap();
            assert!(out.image.max_abs_diff(&img) < 1e-9);
        }
    }
}
