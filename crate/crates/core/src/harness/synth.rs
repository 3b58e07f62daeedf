use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::GrayImage;

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// One octave of smoothly interpolated lattice noise, values in `[-1, 1]`.
fn value_noise(rng: &mut ChaCha8Rng, width: usize, height: usize, cell: usize) -> Vec<f64> {
    let gw = width / cell + 2;
    let gh = height / cell + 2;
    let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        let gy = r / cell;
        let ty = smoothstep((r % cell) as f64 / cell as f64);
        for c in 0..width {
            let gx = c / cell;
            let tx = smoothstep((c % cell) as f64 / cell as f64);
            let v00 = lattice[gy * gw + gx];
            let v01 = lattice[gy * gw + gx + 1];
            let v10 = lattice[(gy + 1) * gw + gx];
            let v11 = lattice[(gy + 1) * gw + gx + 1];
            let top = v00 + (v01 - v00) * tx;
            let bottom = v10 + (v11 - v10) * tx;
            out.push(top + (bottom - top) * ty);
        }
    }
    out
}

/// Deterministic textured test image with 8-bit integer intensities.
///
/// Multi-octave lattice noise supplies texture at every scale down to a couple
/// of pixels, a handful of hard-edged discs and rectangles add step edges, and
/// per-pixel grain keeps every block textured.
pub fn synthetic_image(seed: u64, width: usize, height: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0.0; width * height];
    for (cell, amp) in [
        (64, 1.0),
        (32, 0.6),
        (16, 0.45),
        (8, 0.35),
        (4, 0.3),
        (2, 0.25),
    ] {
        for (a, n) in acc
            .iter_mut()
            .zip(value_noise(&mut rng, width, height, cell))
        {
            *a += amp * n;
        }
    }

    let shapes = 4 + (width * height) / 16384;
    for _ in 0..shapes {
        let cy = rng.gen_range(0.0..height as f64);
        let cx = rng.gen_range(0.0..width as f64);
        let size = rng.gen_range(4.0..(width.min(height) as f64 / 4.0).max(5.0));
        let offset = rng.gen_range(0.6..1.4) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let disc = rng.gen_bool(0.5);
        for r in 0..height {
            for c in 0..width {
                let dy = r as f64 - cy;
                let dx = c as f64 - cx;
                let inside = if disc {
                    dx * dx + dy * dy <= size * size
                } else {
                    dx.abs() <= size && dy.abs() <= size * 0.6
                };
                if inside {
                    acc[r * width + c] += offset;
                }
            }
        }
    }

    for a in acc.iter_mut() {
        *a += rng.gen_range(-0.12..0.12);
    }

    let lo = acc.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let data = acc
        .into_iter()
        .map(|v| (16.0 + 223.0 * (v - lo) / span).round())
        .collect();
    GrayImage::new(width, height, data).expect("buffer matches dimensions")
}
