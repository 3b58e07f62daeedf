//! Blockwise 8x8 orthonormal DCT-II, image/block-grid partitioning and the
//! precomputed second-derivative cosine kernel.
//!
//! Coefficient `G(α, β)` is stored at `[α][β]`: `α` indexes vertical frequency
//! (rows), `β` horizontal frequency (columns).

#![allow(clippy::needless_range_loop)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::BLOCK;

/// An 8x8 block of spatial-domain pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelBlock(pub [[f64; BLOCK]; BLOCK]);

/// An 8x8 block of orthonormal DCT-II coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffBlock(pub [[f64; BLOCK]; BLOCK]);

macro_rules! block_impls {
    ($t:ident) => {
        impl $t {
            pub const fn zero() -> Self {
                $t([[0.0; BLOCK]; BLOCK])
            }

            pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
                let mut b = [[0.0; BLOCK]; BLOCK];
                for (r, row) in b.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = f(r, c);
                    }
                }
                $t(b)
            }

            pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
                self.0.iter().flatten().copied()
            }

            pub fn energy(&self) -> f64 {
                self.iter().map(|v| v * v).sum()
            }

            pub fn scale(&self, s: f64) -> Self {
                Self::from_fn(|r, c| s * self.0[r][c])
            }

            /// Elementwise `self + other`.
            pub fn add(&self, other: &Self) -> Self {
                Self::from_fn(|r, c| self.0[r][c] + other.0[r][c])
            }
        }

        impl Index<(usize, usize)> for $t {
            type Output = f64;
            #[inline]
            fn index(&self, (r, c): (usize, usize)) -> &f64 {
                &self.0[r][c]
            }
        }

        impl IndexMut<(usize, usize)> for $t {
            #[inline]
            fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
                &mut self.0[r][c]
            }
        }
    };
}

block_impls!(PixelBlock);
block_impls!(CoeffBlock);

impl CoeffBlock {
    /// Coefficient-wise mean of two blocks. By linearity of the DCT this equals
    /// averaging the pixels.
    pub fn average(&self, other: &CoeffBlock) -> CoeffBlock {
        CoeffBlock::from_fn(|r, c| 0.5 * (self.0[r][c] + other.0[r][c]))
    }

    #[inline]
    pub fn dc(&self) -> f64 {
        self.0[0][0]
    }
}

/// A rectangular, row-major grid with one cell per 8x8 image block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGrid<T> {
    rows: usize,
    cols: usize,
    cells: Vec<T>,
}

pub type PixelBlockGrid = BlockGrid<PixelBlock>;
pub type CoeffBlockGrid = BlockGrid<CoeffBlock>;

impl<T> BlockGrid<T> {
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<T>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "{} cells for a {rows}x{cols} grid",
                cells.len()
            )));
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                cells.push(f(r, c));
            }
        }
        Self { rows, cols, cells }
    }

    /// Builds a grid from nested rows, rejecting ragged input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidParameter("empty block grid".into()));
        }
        let mut cells = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::RaggedGrid {
                    row: i,
                    found: row.len(),
                    expected: n_cols,
                });
            }
            cells.extend(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            cells,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.cells.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> BlockGrid<U> {
        BlockGrid {
            rows: self.rows,
            cols: self.cols,
            cells: self.cells.iter().map(f).collect(),
        }
    }

    pub fn ensure_same_shape<U>(&self, other: &BlockGrid<U>) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(self.shape(), other.shape()))
        }
    }
}

impl<T> Index<(usize, usize)> for BlockGrid<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.cells[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for BlockGrid<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.cells[r * self.cols + c]
    }
}

/// Splits an image into non-overlapping 8x8 blocks, row-major.
pub fn partition_blocks(img: &GrayImage) -> Result<PixelBlockGrid> {
    img.ensure_block_aligned()?;
    let rows = img.height() / BLOCK;
    let cols = img.width() / BLOCK;
    Ok(BlockGrid::from_fn(rows, cols, |br, bc| {
        PixelBlock::from_fn(|r, c| img.get(br * BLOCK + r, bc * BLOCK + c))
    }))
}

/// Reassembles a block grid into an image; the inverse of [`partition_blocks`].
pub fn assemble_image(grid: &PixelBlockGrid) -> Result<GrayImage> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty block grid".into()));
    }
    let width = grid.cols() * BLOCK;
    let height = grid.rows() * BLOCK;
    Ok(GrayImage::from_fn(width, height, |r, c| {
        grid[(r / BLOCK, c / BLOCK)].0[r % BLOCK][c % BLOCK]
    }))
}

/// Orthonormal DCT-II normalization: `c(0) = 1/√2`, `c(v) = 1` otherwise.
#[inline]
pub fn dct_norm(v: usize) -> f64 {
    if v == 0 {
        FRAC_1_SQRT_2
    } else {
        1.0
    }
}

/// Sampled 1-D basis function `r_v(n) = c(v)·√(2/N)·cos((2n+1)vπ / 2N)`.
#[inline]
pub fn dct_basis(n: usize, v: usize, sample: usize) -> f64 {
    let nf = n as f64;
    dct_norm(v) * (2.0 / nf).sqrt() * (((2 * sample + 1) as f64) * v as f64 * PI / (2.0 * nf)).cos()
}

fn basis8() -> &'static [[f64; BLOCK]; BLOCK] {
    static BASIS: OnceLock<[[f64; BLOCK]; BLOCK]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; BLOCK]; BLOCK];
        for (v, row) in m.iter_mut().enumerate() {
            for (s, x) in row.iter_mut().enumerate() {
                *x = dct_basis(BLOCK, v, s);
            }
        }
        m
    })
}

/// Forward orthonormal 2-D DCT-II of an 8x8 block (separable, rows then columns).
pub fn dct2_forward(block: &PixelBlock) -> CoeffBlock {
    let c = basis8();
    // tmp = C · X
    let mut tmp = [[0.0; BLOCK]; BLOCK];
    for a in 0..BLOCK {
        for n in 0..BLOCK {
            let mut acc = 0.0;
            for m in 0..BLOCK {
                acc += c[a][m] * block.0[m][n];
            }
            tmp[a][n] = acc;
        }
    }
    // G = tmp · Cᵀ
    CoeffBlock::from_fn(|a, b| {
        let mut acc = 0.0;
        for n in 0..BLOCK {
            acc += tmp[a][n] * c[b][n];
        }
        acc
    })
}

/// Inverse of [`dct2_forward`].
pub fn dct2_inverse(cb: &CoeffBlock) -> PixelBlock {
    let c = basis8();
    // tmp = Cᵀ · G
    let mut tmp = [[0.0; BLOCK]; BLOCK];
    for m in 0..BLOCK {
        for b in 0..BLOCK {
            let mut acc = 0.0;
            for a in 0..BLOCK {
                acc += c[a][m] * cb.0[a][b];
            }
            tmp[m][b] = acc;
        }
    }
    // X = tmp · C
    PixelBlock::from_fn(|m, n| {
        let mut acc = 0.0;
        for b in 0..BLOCK {
            acc += tmp[m][b] * c[b][n];
        }
        acc
    })
}

pub fn forward_grid(grid: &PixelBlockGrid) -> CoeffBlockGrid {
    grid.map(dct2_forward)
}

pub fn inverse_grid(grid: &CoeffBlockGrid) -> PixelBlockGrid {
    grid.map(dct2_inverse)
}

/// Partition followed by a forward DCT of every block.
pub fn image_to_coeffs(img: &GrayImage) -> Result<CoeffBlockGrid> {
    Ok(forward_grid(&partition_blocks(img)?))
}

/// Inverse DCT of every block followed by reassembly.
pub fn coeffs_to_image(grid: &CoeffBlockGrid) -> Result<GrayImage> {
    assemble_image(&inverse_grid(grid))
}

/// The input-independent N×N matrix that maps DCT coefficients to the DCT of the
/// second derivative along one axis:
///
/// `k(α, u) = Σ_m (2(uπ)²/N³) · c(α)c(u) · cos((2m+1)απ/2N) · cos((2m+1)uπ/2N)`
///
/// The analytic second derivative of the cosine basis carries a negative sign;
/// this kernel uses the positive form. Sharpness measures built on it take
/// absolute values, so the sign is immaterial there ([`DerivativeKernel::negated`]
/// gives the analytic sign).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeKernel {
    n: usize,
    k: Vec<f64>,
}

impl DerivativeKernel {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `k(α, u)`.
    #[inline]
    pub fn at(&self, alpha: usize, u: usize) -> f64 {
        self.k[alpha * self.n + u]
    }

    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            k: self.k.iter().map(|v| -v).collect(),
        }
    }
}

/// Computes the derivative kernel by literal summation of the inner cosine sum.
pub fn build_derivative_kernel(n: usize) -> Result<DerivativeKernel> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "kernel size must be at least 2, got {n}"
        )));
    }
    let nf = n as f64;
    let mut k = vec![0.0; n * n];
    for alpha in 0..n {
        for u in 0..n {
            let uf = u as f64;
            let scale = 2.0 * (uf * PI).powi(2) / nf.powi(3) * dct_norm(alpha) * dct_norm(u);
            let mut acc = 0.0;
            for m in 0..n {
                let t = (2 * m + 1) as f64 * PI / (2.0 * nf);
                acc += scale * (t * alpha as f64).cos() * (t * uf).cos();
            }
            k[alpha * n + u] = acc;
        }
    }
    Ok(DerivativeKernel { n, k })
}

/// The shared 8x8 derivative kernel, built once on first use.
pub fn derivative_kernel() -> &'static DerivativeKernel {
    static KERNEL: OnceLock<DerivativeKernel> = OnceLock::new();
    KERNEL.get_or_init(|| build_derivative_kernel(BLOCK).expect("block size is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn block_strategy() -> impl Strategy<Value = PixelBlock> {
        proptest::array::uniform8(proptest::array::uniform8(-255.0f64..255.0)).prop_map(PixelBlock)
    }

    #[test]
    fn partition_shapes() {
        let img = GrayImage::from_fn(16, 16, |r, c| (r * 16 + c) as f64);
        let g = partition_blocks(&img).unwrap();
        assert_eq!(g.shape(), (2, 2));

        let img = GrayImage::from_fn(8, 8, |r, c| (r * 8 + c) as f64);
        let g = partition_blocks(&img).unwrap();
        assert_eq!(g.shape(), (1, 1));
        assert_eq!(g[(0, 0)].0[3][5], 29.0);

        let img = GrayImage::from_fn(24, 8, |_, c| c as f64);
        let g = partition_blocks(&img).unwrap();
        assert_eq!(g.shape(), (1, 3));
        assert_eq!(g[(0, 2)].0[0][0], 16.0);
        assert_eq!(g[(0, 2)].0[7][7], 23.0);
    }

    #[test]
    fn partition_rejects_unaligned() {
        let img = GrayImage::filled(100, 100, 1.0);
        assert!(matches!(
            partition_blocks(&img),
            Err(Error::NotBlockAligned {
                width: 100,
                height: 100
            })
        ));
    }

    #[test]
    fn assemble_shapes() {
        let b = PixelBlock::from_fn(|r, c| (r + c) as f64);
        let one = BlockGrid::from_rows(vec![vec![b]]).unwrap();
        let img = assemble_image(&one).unwrap();
        assert_eq!(img.dimensions(), (8, 8));
        assert_eq!(img.get(2, 3), 5.0);

        let two = BlockGrid::from_rows(vec![vec![b], vec![b]]).unwrap();
        assert_eq!(assemble_image(&two).unwrap().dimensions(), (8, 16));
    }

    #[test]
    fn ragged_grid_rejected() {
        let b = PixelBlock::zero();
        assert!(matches!(
            BlockGrid::from_rows(vec![vec![b, b], vec![b]]),
            Err(Error::RaggedGrid { row: 1, .. })
        ));
    }

    #[test]
    fn constant_block_dc() {
        let g = dct2_forward(&PixelBlock::from_fn(|_, _| 100.0));
        assert!((g[(0, 0)] - 800.0).abs() < 1e-9);
        for (i, v) in g.iter().enumerate().skip(1) {
            assert!(v.abs() < 1e-9, "coefficient {i} = {v}");
        }
        let back = dct2_inverse(&g);
        for v in back.iter() {
            assert!((v - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_coefficients_invert_to_zero() {
        assert!(dct2_inverse(&CoeffBlock::zero()).iter().all(|v| v == 0.0));
    }

    #[test]
    fn dc_only_inverts_to_constant() {
        let mut cb = CoeffBlock::zero();
        cb[(0, 0)] = 800.0;
        for v in dct2_inverse(&cb).iter() {
            assert!((v - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn impulse_matches_direct_basis_summation() {
        let mut x = PixelBlock::zero();
        x[(0, 0)] = 1.0;
        let g = dct2_forward(&x);
        for a in 0..8 {
            for b in 0..8 {
                let expected = dct_norm(a)
                    * dct_norm(b)
                    * (2.0 / 8.0)
                    * (a as f64 * PI / 16.0).cos()
                    * (b as f64 * PI / 16.0).cos();
                assert!((g[(a, b)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_column_zero_and_diagonal() {
        let k = build_derivative_kernel(8).unwrap();
        for a in 0..8 {
            assert_eq!(k.at(a, 0), 0.0);
        }
        assert!((k.at(1, 1) - 0.154_212_568_767).abs() < 1e-9);
        for a in 0..8 {
            for u in 0..8 {
                if a != u {
                    assert!(k.at(a, u).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn kernel_general_size() {
        assert!(build_derivative_kernel(1).is_err());
        let k = build_derivative_kernel(5).unwrap();
        for u in 1..5 {
            let expected = (u as f64 * PI / 5.0).powi(2);
            assert!((k.at(u, u) - expected).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn parseval(x in block_strategy()) {
            let g = dct2_forward(&x);
            let ex = x.energy();
            prop_assert!((ex - g.energy()).abs() <= 1e-9 * ex.max(1.0));
        }

        #[test]
        fn round_trip(x in block_strategy()) {
            let back = dct2_inverse(&dct2_forward(&x));
            for (a, b) in x.iter().zip(back.iter()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn linearity(x in block_strategy(), y in block_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let lhs = dct2_forward(&x.scale(a).add(&y.scale(b)));
            let rhs = dct2_forward(&x).scale(a).add(&dct2_forward(&y).scale(b));
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                prop_assert!((l - r).abs() < 1e-9);
            }
        }

        #[test]
        fn assemble_inverts_partition(seed in 0u64..1000, bw in 1usize..4, bh in 1usize..4) {
            let img = GrayImage::from_fn(bw * 8, bh * 8, |r, c| ((r * 31 + c * 17 + seed as usize) % 256) as f64);
            let back = assemble_image(&partition_blocks(&img).unwrap()).unwrap();
            prop_assert_eq!(back, img);
        }
    }
}
