use proptest::prelude::*;

use spillsynth::inpaint::{inpaint, InpaintParams};
use spillsynth::stats::variance;
use spillsynth::tre::{
    diffusion_domain, histogram_match, perona_malik, sample_speckle, tre_apply, Conduction, TreParams,
};
use spillsynth::{exterior_ring, BinaryMask, Raster};

fn enl_of(v: &[f32]) -> f64 {
    let v: Vec<f64> = v.iter().map(|&x| x as f64).collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    m * m / variance(&v).unwrap()
}

#[test]
fn inpainting_keeps_speckle_statistics() {
    for s in 0..4u64 {
        let eta: Raster<f32> = sample_speckle(256, 256, 4, 100 + s).unwrap();
        let img = eta.map(|v| v * 100.0).unwrap();
        let mask = BinaryMask::rect(256, 256, 112, 112, 32, 32);
        let out = inpaint(&img, &mask, &InpaintParams::default(), s).unwrap().raster;
        let inside = enl_of(&out.values_in(&mask));
        let outside = enl_of(&img.values_in(&mask.complement()));
        assert!(
            (inside / outside - 1.0).abs() <= 0.25,
            "seed {s}: {inside} vs {outside}"
        );
        for c in mask.complement().coords() {
            assert_eq!(out.at(c), img.at(c));
        }
    }
}

#[test]
fn inpainting_is_independent_of_thread_count() {
    let eta: Raster<f32> = sample_speckle(96, 96, 4, 5).unwrap();
    let mask = BinaryMask::rect(96, 96, 40, 30, 14, 20);
    let a = inpaint(&eta, &mask, &InpaintParams::default(), 3).unwrap().raster;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| inpaint(&eta, &mask, &InpaintParams::default(), 3).unwrap().raster);
    assert_eq!(a, b);
}

#[test]
fn f64_and_f32_pipelines_agree_closely() {
    let eta: Raster<f64> = sample_speckle(64, 64, 4, 8).unwrap();
    let img = eta.map(|v| v * 80.0).unwrap();
    let omega = BinaryMask::rect(64, 64, 24, 24, 10, 10);
    let p = TreParams::deterministic();
    let a = tre_apply(&img, &omega, &p, 1).unwrap();
    let b = tre_apply(&img.cast::<f32>(), &omega, &p, 1).unwrap();
    for (x, y) in a.pixels().iter().zip(b.pixels()) {
        assert!((x - *y as f64).abs() < 1e-3 * x.abs().max(1.0));
    }
}

fn rect_strategy() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0usize..40, 0usize..40, 4usize..20, 4usize..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn diffusion_conserves_sum_on_band(seed in 0u64..10_000, (x, y, w, h) in rect_strategy(), iters in 1usize..25) {
        let eta: Raster<f32> = sample_speckle(64, 64, 4, seed).unwrap();
        let img = eta.map(|v| v * 150.0).unwrap();
        let dom = diffusion_domain(&BinaryMask::rect(64, 64, x, y, w, h), 5);
        let out = perona_malik(&img, &dom, 15.0, Conduction::Rational, 0.25, iters);
        let sum = |r: &Raster<f32>| r.values_in(&dom).iter().map(|&v| v as f64).sum::<f64>();
        prop_assert!(((sum(&out) - sum(&img)) / sum(&img)).abs() <= 1e-5);
    }

    #[test]
    fn histogram_match_is_monotone(seed in 0u64..10_000, (x, y, w, h) in rect_strategy()) {
        let eta: Raster<f32> = sample_speckle(64, 64, 2, seed).unwrap();
        let omega = BinaryMask::rect(64, 64, x, y, w, h);
        let ring = exterior_ring(&omega, 5).mask;
        let out = histogram_match(&eta, &omega, &ring).unwrap();
        let mut pairs: Vec<(f32, f32)> = omega.coords().map(|c| (eta.at(c), out.at(c))).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for p in pairs.windows(2) {
            prop_assert!(p[1].1 >= p[0].1);
        }
    }
}
