use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::focus::FocusMeasure;
use crate::fusion::{fuse_coefficients, fuse_pair, FusionConfig, Source};
use crate::image::GrayImage;
use crate::metrics::ssim;
use crate::transform::{image_to_coeffs, CoeffBlockGrid};

use super::blur::make_split_focus_pair;

/// A benchmarked fusion method: a focus measure with consistency verification
/// on or off. Written `<measure>` or `<measure>+cv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Method {
    pub measure: FocusMeasure,
    pub consistency_verification: bool,
}

impl Method {
    pub const fn new(measure: FocusMeasure, consistency_verification: bool) -> Self {
        Self {
            measure,
            consistency_verification,
        }
    }

    /// The four block-DCT methods compared in the benchmark by default.
    pub const DCT_METHODS: [Method; 4] = [
        Method::new(FocusMeasure::VarianceDct, false),
        Method::new(FocusMeasure::VarianceDct, true),
        Method::new(FocusMeasure::AcMax, false),
        Method::new(FocusMeasure::SmlDct, true),
    ];

    pub fn config(&self, threshold: f64) -> Result<FusionConfig> {
        FusionConfig::new(self.measure, self.consistency_verification).with_threshold(threshold)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.measure.name())?;
        if self.consistency_verification {
            f.write_str("+cv")?;
        }
        Ok(())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, cv) = match s.strip_suffix("+cv") {
            Some(n) => (n, true),
            None => (s, false),
        };
        let measure = name
            .parse()
            .map_err(|_| Error::UnknownMethod(s.to_string()))?;
        Ok(Method::new(measure, cv))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub threshold: f64,
    /// Timing repetitions; the reported runtime is their median.
    pub repeat: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            threshold: 0.0,
            repeat: 5,
        }
    }
}

/// One synthesized source pair with its ground truth.
#[derive(Debug, Clone)]
pub struct BenchCase {
    pub image: String,
    pub radius: usize,
    pub a: GrayImage,
    pub b: GrayImage,
    pub truth: GrayImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub radius: usize,
    pub method: Method,
    pub ssim: f64,
    pub us_per_block: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_ssim: f64,
    pub mean_us_per_block: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "image,radius,method,ssim,us_per_block";

    /// Per-method means, in order of first appearance.
    pub fn summary(&self) -> Vec<MethodSummary> {
        let mut methods: Vec<Method> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
        methods
            .into_iter()
            .map(|m| {
                let rows: Vec<&BenchRow> = self.rows.iter().filter(|r| r.method == m).collect();
                let n = rows.len() as f64;
                MethodSummary {
                    method: m,
                    mean_ssim: rows.iter().map(|r| r.ssim).sum::<f64>() / n,
                    mean_us_per_block: rows.iter().map(|r| r.us_per_block).sum::<f64>() / n,
                }
            })
            .collect()
    }

    pub fn mean_ssim(&self, method: Method) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.method == method)
            .map(|s| s.mean_ssim)
    }

    /// Per-triple rows followed by one `mean,all,<method>,...` row per method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:?},{:.4}",
                r.image, r.radius, r.method, r.ssim, r.us_per_block
            )
            .unwrap();
        }
        for s in self.summary() {
            writeln!(
                out,
                "mean,all,{},{:?},{:.4}",
                s.method, s.mean_ssim, s.mean_us_per_block
            )
            .unwrap();
        }
        out
    }
}

struct Prepared<'a> {
    a: &'a GrayImage,
    b: &'a GrayImage,
    ca: CoeffBlockGrid,
    cb: CoeffBlockGrid,
}

fn prepare<'a>(pairs: &[(&'a GrayImage, &'a GrayImage)]) -> Result<Vec<Prepared<'a>>> {
    pairs
        .iter()
        .map(|&(a, b)| {
            a.ensure_same_dimensions(b)?;
            Ok(Prepared {
                a,
                b,
                ca: image_to_coeffs(a)?,
                cb: image_to_coeffs(b)?,
            })
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn timed_us_per_block(prepared: &[Prepared<'_>], cfg: &FusionConfig, repeat: usize) -> Result<f64> {
    let blocks: usize = prepared.iter().map(|p| p.ca.len()).sum();
    if blocks == 0 {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let mut samples = Vec::with_capacity(repeat);
    for _ in 0..repeat.max(1) {
        let start = Instant::now();
        for p in prepared {
            let out = fuse_coefficients(
                Source {
                    pixels: p.a,
                    coeffs: &p.ca,
                },
                Source {
                    pixels: p.b,
                    coeffs: &p.cb,
                },
                cfg,
            )?;
            std::hint::black_box(&out);
        }
        let us = start.elapsed().as_secs_f64() * 1e6;
        // guard against timer granularity on tiny inputs
        samples.push(us.max(1e-3) / blocks as f64);
    }
    Ok(median(samples))
}

/// Wall-clock microseconds per 8x8 block spent in the focus-measure, decision,
/// verification and selection stages; the shared forward and inverse DCTs are
/// excluded. Median over `repeat` runs.
pub fn time_per_block(
    method: Method,
    dataset: &[(&GrayImage, &GrayImage)],
    threshold: f64,
    repeat: usize,
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let prepared = prepare(dataset)?;
    timed_us_per_block(&prepared, &method.config(threshold)?, repeat)
}

/// Fuses every case with every method and scores the result against the truth.
pub fn run_cases(
    cases: &[BenchCase],
    methods: &[Method],
    opts: &BenchOptions,
) -> Result<BenchReport> {
    if cases.is_empty() || methods.is_empty() {
        return Err(Error::InvalidParameter(
            "benchmark needs at least one case and one method".into(),
        ));
    }
    let mut rows = Vec::with_capacity(cases.len() * methods.len());
    for case in cases {
        let prepared = prepare(&[(&case.a, &case.b)])?;
        for &method in methods {
            let annotate =
                |e: Error| e.context(format!("{} r{} {}", case.image, case.radius, method));
            let cfg = method.config(opts.threshold).map_err(annotate)?;
            let fused = fuse_pair(&case.a, &case.b, &cfg).map_err(annotate)?;
            let score = ssim(&case.truth, &fused.image).map_err(annotate)?;
            let us = timed_us_per_block(&prepared, &cfg, opts.repeat).map_err(annotate)?;
            rows.push(BenchRow {
                image: case.image.clone(),
                radius: case.radius,
                method,
                ssim: score,
                us_per_block: us,
            });
        }
    }
    Ok(BenchReport { rows })
}

/// Synthesizes a split-focus pair for every (image, radius) and runs all methods.
pub fn run_benchmark(
    images: &[(String, GrayImage)],
    radii: &[usize],
    methods: &[Method],
    opts: &BenchOptions,
) -> Result<BenchReport> {
    if images.is_empty() || radii.is_empty() {
        return Err(Error::InvalidParameter(
            "benchmark needs at least one image and one radius".into(),
        ));
    }
    let mut cases = Vec::with_capacity(images.len() * radii.len());
    for (name, img) in images {
        for &radius in radii {
            let pair = make_split_focus_pair(img, radius)
                .map_err(|e| e.context(format!("{name} r{radius}")))?;
            cases.push(BenchCase {
                image: name.clone(),
                radius,
                a: pair.a,
                b: pair.b,
                truth: pair.truth,
            });
        }
    }
    run_cases(&cases, methods, opts)
}
