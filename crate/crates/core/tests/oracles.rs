//! Independent oracles for the DCT-domain SML and the derivative kernel.

use std::f64::consts::PI;

use dctfuse::{
    build_derivative_kernel, dct2_forward, derivative_kernel, sml_dct, CoeffBlock, PixelBlock,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 8;

fn c(v: usize) -> f64 {
    if v == 0 {
        1.0 / 2f64.sqrt()
    } else {
        1.0
    }
}

/// Inner sum of the second-derivative mapping, evaluated literally.
fn inner(alpha: usize, u: usize) -> f64 {
    let nf = N as f64;
    (0..N)
        .map(|m| {
            2.0 * (u as f64 * PI).powi(2) / nf.powi(3)
                * c(alpha)
                * c(u)
                * (((2 * m + 1) as f64) * alpha as f64 * PI / (2.0 * nf)).cos()
                * (((2 * m + 1) as f64) * u as f64 * PI / (2.0 * nf)).cos()
        })
        .sum()
}

fn brute_force_sml(g: &CoeffBlock) -> f64 {
    let mut total = 0.0;
    for a in 0..N {
        for b in 0..N {
            let gx: f64 = (0..N).map(|u| g[(u, b)] * inner(a, u)).sum();
            let gy: f64 = (0..N).map(|v| g[(a, v)] * inner(b, v)).sum();
            total += gx.abs() + gy.abs();
        }
    }
    total
}

fn closed_form_sml(g: &CoeffBlock) -> f64 {
    let mut total = 0.0;
    for a in 0..N {
        for b in 0..N {
            let w = (a as f64 * PI / 8.0).powi(2) + (b as f64 * PI / 8.0).powi(2);
            total += w * g[(a, b)].abs();
        }
    }
    total
}

fn random_block(rng: &mut ChaCha8Rng) -> PixelBlock {
    PixelBlock::from_fn(|_, _| rng.gen_range(0.0..255.0))
}

#[test]
fn kernel_matches_literal_summation() {
    let k = build_derivative_kernel(8).unwrap();
    for a in 0..N {
        for u in 0..N {
            assert!((k.at(a, u) - inner(a, u)).abs() < 1e-12);
            if a != u {
                assert!(k.at(a, u).abs() < 1e-9);
            } else {
                assert!((k.at(u, u) - (u as f64 * PI / 8.0).powi(2)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn sml_matches_brute_force_and_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let ker = derivative_kernel();
    for _ in 0..1000 {
        let g = dct2_forward(&random_block(&mut rng));
        let got = sml_dct(&g, ker);
        let brute = brute_force_sml(&g);
        let closed = closed_form_sml(&g);
        assert!((got - brute).abs() <= 1e-9 * brute, "{got} vs {brute}");
        assert!((got - closed).abs() <= 1e-9 * closed, "{got} vs {closed}");
    }
}

#[test]
fn single_coefficient_example() {
    let mut g = CoeffBlock::zero();
    g[(1, 0)] = 12.0;
    let expected = (PI / 8.0).powi(2) * 12.0;
    assert!((brute_force_sml(&g) - expected).abs() < 1e-9);
    assert!((sml_dct(&g, derivative_kernel()) - expected).abs() < 1e-9);
}
