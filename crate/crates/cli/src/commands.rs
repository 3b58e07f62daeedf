use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use dctfuse::harness::{
    make_split_focus_pair, run_cases, synthetic_image, BenchCase, BenchOptions,
};
use dctfuse::metrics::{mutual_information, petrovic_qabf, ssim};
use dctfuse::{
    fuse_multi, fuse_pair, read_image, write_image, FusionConfig, GrayImage, SpatialSmlParams,
};

use crate::{BenchArgs, EvalArgs, Failure, FuseArgs, GenDatasetArgs};

type CmdResult = Result<(), Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: Failure::IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn print_stdout(text: &str) -> CmdResult {
    io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn check_same_size(images: &[(PathBuf, GrayImage)]) -> CmdResult {
    let (first_path, first) = &images[0];
    for (path, img) in &images[1..] {
        if img.dimensions() != first.dimensions() {
            return Err(Failure {
                code: Failure::DIMENSION,
                message: format!(
                    "{} is {}x{} but {} is {}x{}",
                    path.display(),
                    img.width(),
                    img.height(),
                    first_path.display(),
                    first.width(),
                    first.height()
                ),
            });
        }
    }
    Ok(())
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<(PathBuf, GrayImage)>, Failure> {
    paths
        .iter()
        .map(|p| Ok((p.clone(), read_image(p)?)))
        .collect()
}

pub fn fuse(args: FuseArgs) -> CmdResult {
    let params = SpatialSmlParams::new(args.step, args.ml_threshold)?;
    let cfg = FusionConfig::new(args.measure.into(), !args.no_cv)
        .with_threshold(args.threshold)?
        .with_spatial_params(params);

    let sources = read_all(&args.inputs)?;
    check_same_size(&sources)?;

    if let Some(dir) = &args.dump_maps {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    let fused = if let [(_, a), (_, b)] = sources.as_slice() {
        let out = fuse_pair(a, b, &cfg)?;
        if let Some(dir) = &args.dump_maps {
            write_text(&dir.join("decision.txt"), &out.decision.to_text())?;
            write_text(&dir.join("refined.txt"), &out.refined.to_text())?;
        }
        out.image
    } else {
        let images: Vec<GrayImage> = sources.into_iter().map(|(_, i)| i).collect();
        let out = fuse_multi(&images, &cfg)?;
        if let Some(dir) = &args.dump_maps {
            write_text(&dir.join("selection.txt"), &out.selection_text())?;
        }
        out.image
    };
    write_image(&fused, &args.output)?;
    Ok(())
}

fn pgm_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| io_failure(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_failure(dir, e))?.path();
        if path
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("pgm"))
        {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

pub fn gen_dataset(args: GenDatasetArgs) -> CmdResult {
    if args.images.is_none() && args.synthetic.is_none() {
        return Err(Failure::usage(
            "provide --images <dir> and/or --synthetic <n>",
        ));
    }
    if args.radii.is_empty() {
        return Err(Failure::usage("--radii must list at least one radius"));
    }
    let mut pristine: Vec<(String, GrayImage)> = Vec::new();
    if let Some(dir) = &args.images {
        for path in pgm_files(dir)? {
            let img = read_image(&path)?;
            pristine.push((stem(&path), img));
        }
    }
    if let Some(n) = args.synthetic {
        if args.size == 0 || !args.size.is_multiple_of(16) {
            return Err(Failure::usage(format!(
                "--size must be a positive multiple of 16, got {}",
                args.size
            )));
        }
        for i in 0..n {
            pristine.push((
                format!("synthetic{i:02}"),
                synthetic_image(i as u64, args.size, args.size),
            ));
        }
    }
    if pristine.is_empty() {
        return Err(Failure::usage("no pristine images found"));
    }

    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    for (name, img) in &pristine {
        for &radius in &args.radii {
            let pair = make_split_focus_pair(img, radius)?;
            let base = args.out.join(format!("{name}_r{radius}"));
            let path = |suffix: &str| PathBuf::from(format!("{}_{suffix}.pgm", base.display()));
            write_image(&pair.a, path("A"))?;
            write_image(&pair.b, path("B"))?;
            write_image(&pair.truth, path("truth"))?;
        }
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> CmdResult {
    if args.reference.is_none() && args.sources.is_none() {
        return Err(Failure::usage(
            "provide --ref <path> and/or --sources <a> <b>",
        ));
    }
    let fused = read_image(&args.fused)?;
    let mut all = vec![(args.fused.clone(), fused.clone())];
    let reference = match &args.reference {
        Some(p) => {
            let r = read_image(p)?;
            all.push((p.clone(), r.clone()));
            Some(r)
        }
        None => None,
    };
    let sources = match &args.sources {
        Some(paths) => {
            let imgs = read_all(paths)?;
            all.extend(imgs.iter().cloned());
            Some((imgs[0].1.clone(), imgs[1].1.clone()))
        }
        None => None,
    };
    check_same_size(&all)?;

    let mut out = String::from("metric,value\n");
    if let Some(r) = &reference {
        out += &format!("ssim,{:?}\n", ssim(r, &fused)?);
    }
    if let Some((a, b)) = &sources {
        out += &format!("mi,{:?}\n", mutual_information(a, b, &fused)?);
        out += &format!("qabf,{:?}\n", petrovic_qabf(a, b, &fused)?);
    }
    print_stdout(&out)
}

/// Finds `<name>_r<radius>_truth.pgm` files with their `_A`/`_B` siblings.
fn discover_cases(dir: &Path) -> Result<Vec<BenchCase>, Failure> {
    let mut cases = Vec::new();
    for truth_path in pgm_files(dir)? {
        let file = stem(&truth_path);
        let Some(prefix) = file.strip_suffix("_truth") else {
            continue;
        };
        let Some((image, radius)) = prefix
            .rsplit_once("_r")
            .and_then(|(n, r)| r.parse::<usize>().ok().map(|r| (n.to_string(), r)))
        else {
            continue;
        };
        let a = read_image(dir.join(format!("{prefix}_A.pgm")))?;
        let b = read_image(dir.join(format!("{prefix}_B.pgm")))?;
        let truth = read_image(&truth_path)?;
        cases.push(BenchCase {
            image,
            radius,
            a,
            b,
            truth,
        });
    }
    Ok(cases)
}

pub fn bench(args: BenchArgs) -> CmdResult {
    if args.methods.is_empty() {
        return Err(Failure::usage("--methods must list at least one method"));
    }
    let cases = discover_cases(&args.dataset)?;
    if cases.is_empty() {
        return Err(Failure::usage(format!(
            "no <name>_r<radius>_truth.pgm triples in {}",
            args.dataset.display()
        )));
    }
    let opts = BenchOptions {
        threshold: args.threshold,
        repeat: args.repeat as usize,
    };
    let report = run_cases(&cases, &args.methods, &opts)?;
    print_stdout(&report.to_csv())
}
