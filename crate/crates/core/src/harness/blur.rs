use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::BLOCK;

/// A square, odd-sized correlation kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    radius: usize,
    taps: Vec<f64>,
}

impl Kernel {
    pub fn new(radius: usize, taps: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if taps.len() != side * side {
            return Err(Error::InvalidParameter(format!(
                "{} taps for a {side}x{side} kernel",
                taps.len()
            )));
        }
        Ok(Self { radius, taps })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Tap at offset (`dy`, `dx`) from the centre.
    pub fn at(&self, dy: isize, dx: isize) -> f64 {
        let r = self.radius as isize;
        self.taps[((dy + r) * self.side() as isize + dx + r) as usize]
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }
}

/// Normalized binary pillbox: taps with `dx² + dy² <= r²` share weight equally.
pub fn disk_kernel(radius: usize) -> Kernel {
    let r = radius as isize;
    let mut taps = Vec::with_capacity((2 * radius + 1).pow(2));
    for dy in -r..=r {
        for dx in -r..=r {
            taps.push(if dx * dx + dy * dy <= r * r { 1.0 } else { 0.0 });
        }
    }
    let n: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= n);
    Kernel { radius, taps }
}

/// 2-D correlation with replicate-edge padding; output has the input's size.
pub fn convolve(img: &GrayImage, kernel: &Kernel) -> GrayImage {
    let r = kernel.radius as isize;
    GrayImage::from_fn(img.width(), img.height(), |row, col| {
        let mut acc = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let t = kernel.at(dy, dx);
                if t != 0.0 {
                    acc += t * img.get_clamped(row as isize + dy, col as isize + dx);
                }
            }
        }
        acc
    })
}

/// Same result as `convolve(img, &disk_kernel(radius))`, computed from
/// per-row prefix sums over the horizontal chords of the disk.
pub fn disk_blur(img: &GrayImage, radius: usize) -> GrayImage {
    if radius == 0 {
        return img.clone();
    }
    let (w, h) = img.dimensions();
    let r = radius as isize;
    let chords: Vec<usize> = (-r..=r)
        .map(|dy| {
            let mut half = 0usize;
            while ((half + 1) * (half + 1)) as isize + dy * dy <= r * r {
                half += 1;
            }
            half
        })
        .collect();
    let count: usize = chords.iter().map(|c| 2 * c + 1).sum();

    // prefix[row][i] = sum of the edge-padded row up to padded index i (exclusive)
    let padded = w + 2 * radius;
    let prefix: Vec<Vec<f64>> = (0..h)
        .map(|row| {
            let mut p = Vec::with_capacity(padded + 1);
            let mut acc = 0.0;
            p.push(acc);
            for i in 0..padded {
                acc += img.get_clamped(row as isize, i as isize - r);
                p.push(acc);
            }
            p
        })
        .collect();

    GrayImage::from_fn(w, h, |row, col| {
        let mut acc = 0.0;
        for (k, &half) in chords.iter().enumerate() {
            let src = (row as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
            let centre = col + radius;
            acc += prefix[src][centre + half + 1] - prefix[src][centre - half];
        }
        acc / count as f64
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlurRegion {
    LeftHalf,
    RightHalf,
    Whole,
    /// Row-major mask; `true` pixels are blurred.
    Mask(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlurSpec {
    pub radius: usize,
    pub region: BlurRegion,
}

/// Blurs the whole image, then keeps the blurred pixels only inside the region.
/// The left half is columns `0..width/2`.
pub fn apply_blur(img: &GrayImage, spec: &BlurSpec) -> Result<GrayImage> {
    let (w, h) = img.dimensions();
    if let BlurRegion::Mask(m) = &spec.region {
        if m.len() != w * h {
            return Err(Error::InvalidParameter(format!(
                "mask has {} entries for a {w}x{h} image",
                m.len()
            )));
        }
    }
    let blurred = disk_blur(img, spec.radius);
    let seam = w / 2;
    Ok(GrayImage::from_fn(w, h, |r, c| {
        let inside = match &spec.region {
            BlurRegion::LeftHalf => c < seam,
            BlurRegion::RightHalf => c >= seam,
            BlurRegion::Whole => true,
            BlurRegion::Mask(m) => m[r * w + c],
        };
        if inside {
            blurred.get(r, c)
        } else {
            img.get(r, c)
        }
    }))
}

/// Two complementary defocused views of a pristine image.
#[derive(Debug, Clone)]
pub struct SplitFocusPair {
    /// Blurred on the left half.
    pub a: GrayImage,
    /// Blurred on the right half.
    pub b: GrayImage,
    pub truth: GrayImage,
    /// False when `width / 2` is not a multiple of 8, so one block column
    /// straddles the seam.
    pub seam_aligned: bool,
}

impl SplitFocusPair {
    /// Block column containing the seam, if it straddles one.
    pub fn seam_block_col(&self) -> Option<usize> {
        (!self.seam_aligned).then(|| self.truth.width() / 2 / BLOCK)
    }
}

pub fn make_split_focus_pair(img: &GrayImage, radius: usize) -> Result<SplitFocusPair> {
    img.ensure_block_aligned()?;
    if img.width() < 2 * BLOCK {
        return Err(Error::InvalidParameter(format!(
            "split-focus pairs need width >= {}, got {}",
            2 * BLOCK,
            img.width()
        )));
    }
    let blur = |region| apply_blur(img, &BlurSpec { radius, region });
    Ok(SplitFocusPair {
        a: blur(BlurRegion::LeftHalf)?,
        b: blur(BlurRegion::RightHalf)?,
        truth: img.clone(),
        seam_aligned: (img.width() / 2).is_multiple_of(BLOCK),
    })
}

/// `k` views of one image, each in focus on a single vertical strip.
#[derive(Debug, Clone)]
pub struct MultiFocusSet {
    pub sources: Vec<GrayImage>,
    pub truth: GrayImage,
    /// Strip `i` covers columns `boundaries[i]..boundaries[i + 1]`.
    pub boundaries: Vec<usize>,
}

/// Strip boundaries are rounded to block multiples.
pub fn make_multi_focus_set(img: &GrayImage, radius: usize, k: usize) -> Result<MultiFocusSet> {
    img.ensure_block_aligned()?;
    let block_cols = img.width() / BLOCK;
    if k < 2 || k > block_cols {
        return Err(Error::InvalidParameter(format!(
            "cannot split {block_cols} block columns into {k} strips"
        )));
    }
    let boundaries: Vec<usize> = (0..=k)
        .map(|i| ((i * block_cols + k / 2) / k) * BLOCK)
        .collect();
    let blurred = disk_blur(img, radius);
    let sources = (0..k)
        .map(|i| {
            GrayImage::from_fn(img.width(), img.height(), |r, c| {
                if (boundaries[i]..boundaries[i + 1]).contains(&c) {
                    img.get(r, c)
                } else {
                    blurred.get(r, c)
                }
            })
        })
        .collect();
    Ok(MultiFocusSet {
        sources,
        truth: img.clone(),
        boundaries,
    })
}
