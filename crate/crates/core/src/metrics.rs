//! Fusion quality metrics: SSIM against a reference, and the no-reference
//! mutual information and Xydeas–Petrović `Q^AB/F` edge-preservation scores.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::image::{quantize, GrayImage};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const DYNAMIC_RANGE: f64 = 255.0;

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut taps = [0.0; SSIM_WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - half;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable "valid" filtering: output is `(w - 10) x (h - 10)`.
fn filter_valid(data: &[f64], width: usize, height: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; ow * height];
    for r in 0..height {
        let row = &data[r * width..(r + 1) * width];
        for c in 0..ow {
            horiz[r * ow + c] = taps
                .iter()
                .zip(&row[c..c + SSIM_WINDOW])
                .map(|(t, v)| t * v)
                .sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * horiz[(r + k) * ow + c];
            }
            out[r * ow + c] = acc;
        }
    }
    out
}

/// Mean structural similarity over every valid 11x11 Gaussian window
/// (σ = 1.5, K1 = 0.01, K2 = 0.03, L = 255).
pub fn ssim(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    reference.ensure_same_dimensions(test)?;
    let (w, h) = reference.dimensions();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ImageTooSmall(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let taps = gaussian_taps();
    let x = reference.data();
    let y = test.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &taps);
    let mu_y = filter_valid(y, w, h, &taps);
    let s_xx = filter_valid(&xx, w, h, &taps);
    let s_yy = filter_valid(&yy, w, h, &taps);
    let s_xy = filter_valid(&xy, w, h, &taps);

    let c1 = (SSIM_K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * DYNAMIC_RANGE).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let mxy = mx * my;
        let vx = s_xx[i] - mx * mx;
        let vy = s_yy[i] - my * my;
        let cov = s_xy[i] - mxy;
        total +=
            ((2.0 * mxy + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / mu_x.len() as f64)
}

fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &v in img.data() {
        h[quantize(v) as usize] += 1;
    }
    h
}

fn entropy_of(counts: impl Iterator<Item = u64>, total: f64) -> f64 {
    counts
        .filter(|&n| n > 0)
        .map(|n| {
            let p = n as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Shannon entropy in bits of the 8-bit quantized intensities.
pub fn entropy(img: &GrayImage) -> f64 {
    entropy_of(histogram(img).into_iter(), img.data().len() as f64)
}

fn mutual_information_pair(x: &GrayImage, f: &GrayImage) -> f64 {
    let n = x.data().len() as f64;
    let mut joint = vec![0u64; 256 * 256];
    for (&a, &b) in f.data().iter().zip(x.data()) {
        joint[quantize(a) as usize * 256 + quantize(b) as usize] += 1;
    }
    let h_f = entropy_of(histogram(f).into_iter(), n);
    let h_x = entropy_of(histogram(x).into_iter(), n);
    let h_joint = entropy_of(joint.into_iter(), n);
    (h_f + h_x - h_joint).max(0.0)
}

/// `I(F;A) + I(F;B)` in bits, from 256-bin histograms of 8-bit quantized pixels.
pub fn mutual_information(a: &GrayImage, b: &GrayImage, f: &GrayImage) -> Result<f64> {
    a.ensure_same_dimensions(f)?;
    b.ensure_same_dimensions(f)?;
    Ok(mutual_information_pair(a, f) + mutual_information_pair(b, f))
}

// Sigmoid constants of the edge-preservation metric.
const GAMMA_G: f64 = 0.9994;
const KAPPA_G: f64 = -15.0;
const SIGMA_G: f64 = 0.5;
const GAMMA_A: f64 = 0.9879;
const KAPPA_A: f64 = -22.0;
const SIGMA_A: f64 = 0.8;

fn sigmoid(gamma: f64, kappa: f64, sigma: f64, x: f64) -> f64 {
    gamma / (1.0 + (kappa * (x - sigma)).exp())
}

/// Sigmoid rescaled so that full preservation (`x = 1`) maps to exactly 1.
fn preservation(gamma: f64, kappa: f64, sigma: f64, x: f64) -> f64 {
    sigmoid(gamma, kappa, sigma, x) / sigmoid(gamma, kappa, sigma, 1.0)
}

struct EdgeField {
    strength: Vec<f64>,
    orientation: Vec<f64>,
}

/// 3x3 Sobel gradients with edge replication.
fn sobel(img: &GrayImage) -> EdgeField {
    let (w, h) = img.dimensions();
    let mut strength = Vec::with_capacity(w * h);
    let mut orientation = Vec::with_capacity(w * h);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let p = |dr: isize, dc: isize| img.get_clamped(r + dr, c + dc);
            let gx = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let gy = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            strength.push((gx * gx + gy * gy).sqrt());
            orientation.push(if gx == 0.0 {
                FRAC_PI_2
            } else {
                (gy / gx).atan()
            });
        }
    }
    EdgeField {
        strength,
        orientation,
    }
}

fn edge_preservation(src: &EdgeField, fused: &EdgeField, i: usize) -> f64 {
    let gs = src.strength[i];
    let gf = fused.strength[i];
    if gs == 0.0 {
        return 0.0;
    }
    let g = if gs > gf { gf / gs } else { gs / gf };
    let mut d = (src.orientation[i] - fused.orientation[i]).abs();
    // orientations are only defined modulo π
    if d > FRAC_PI_2 {
        d = PI - d;
    }
    let a = 1.0 - d / FRAC_PI_2;
    preservation(GAMMA_G, KAPPA_G, SIGMA_G, g) * preservation(GAMMA_A, KAPPA_A, SIGMA_A, a)
}

/// Edge-strength weighted preservation of source gradients in the fused image,
/// in `[0, 1]`. Images without any edges score 0.
pub fn petrovic_qabf(a: &GrayImage, b: &GrayImage, f: &GrayImage) -> Result<f64> {
    a.ensure_same_dimensions(f)?;
    b.ensure_same_dimensions(f)?;
    let (ea, eb, ef) = (sobel(a), sobel(b), sobel(f));
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..f.data().len() {
        let (wa, wb) = (ea.strength[i], eb.strength[i]);
        num += edge_preservation(&ea, &ef, i) * wa + edge_preservation(&eb, &ef, i) * wb;
        den += wa + wb;
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Metric values for one fused image.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub id: String,
    pub ssim: Option<f64>,
    pub mi: Option<f64>,
    pub qabf: Option<f64>,
}

impl MetricsReport {
    /// Computes SSIM when a reference is given and MI / `Q^AB/F` when sources are.
    pub fn evaluate(
        id: impl Into<String>,
        fused: &GrayImage,
        reference: Option<&GrayImage>,
        sources: Option<(&GrayImage, &GrayImage)>,
    ) -> Result<Self> {
        if reference.is_none() && sources.is_none() {
            return Err(Error::InvalidParameter(
                "a reference image or two source images are required".into(),
            ));
        }
        let ssim = reference.map(|r| ssim(r, fused)).transpose()?;
        let (mi, qabf) = match sources {
            Some((a, b)) => (
                Some(mutual_information(a, b, fused)?),
                Some(petrovic_qabf(a, b, fused)?),
            ),
            None => (None, None),
        };
        Ok(Self {
            id: id.into(),
            ssim,
            mi,
            qabf,
        })
    }

    pub const CSV_HEADER: &'static str = "image,ssim,mi,qabf";

    /// One CSV row; absent metrics are empty fields.
    pub fn csv_row(&self) -> String {
        let field = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        format!(
            "{},{},{},{}",
            self.id,
            field(self.ssim),
            field(self.mi),
            field(self.qabf)
        )
    }
}

/// Header plus one row per report.
pub fn reports_to_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(MetricsReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}
