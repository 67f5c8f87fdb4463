//! Multiplicative speckle and low-frequency drift fields.

use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;
use crate::seed::{self, stage};

/// i.i.d. Gamma(L, 1/L) field: unit mean, variance 1/L. Each row draws from its own
/// seeded stream, so the field does not depend on the thread count.
pub fn sample_speckle<T: Scalar>(width: usize, height: usize, looks: u32, rng_seed: u64) -> Result<Raster<T>> {
    if looks == 0 {
        return Err(Error::Config("looks must be ≥ 1".into()));
    }
    let l = looks as f64;
    let gamma = Gamma::new(l, 1.0 / l).map_err(|e| Error::Config(e.to_string()))?;
    let mut data = vec![T::zero(); width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let mut rng = seed::stream(&[rng_seed, stage::SPECKLE, y as u64]);
        for v in row {
            *v = T::of(gamma.sample(&mut rng));
        }
    });
    Ok(Raster::from_vec_unchecked(width, height, data))
}

/// Standardized smooth Gaussian field G: zero mean and unit (population) variance over
/// the image.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Scalar> DriftField<T> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![T::zero(); width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Dimensions("drift values do not match dimensions".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite drift value".into()));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }
}

/// Mirror index for `reflect` edges (d c b a | a b c d | d c b a), valid for any offset.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

/// Moving average of width `size` (odd) along one line with reflected edges.
fn box_line(src: &[f64], dst: &mut [f64], size: usize) {
    let n = src.len();
    let half = (size / 2) as isize;
    let mut acc: f64 = (-half..=half).map(|k| src[reflect(k, n)]).sum();
    let inv = 1.0 / size as f64;
    for i in 0..n {
        dst[i] = acc * inv;
        let leaving = src[reflect(i as isize - half, n)];
        let entering = src[reflect(i as isize + half + 1, n)];
        acc += entering - leaving;
    }
}

/// Separable `size × size` box filter with reflected edges.
pub fn box_filter(values: &[f64], width: usize, height: usize, size: usize) -> Vec<f64> {
    assert!(size % 2 == 1, "box size must be odd");
    if size == 1 {
        return values.to_vec();
    }
    let mut rows = vec![0.0; width * height];
    rows.par_chunks_mut(width)
        .zip(values.par_chunks(width))
        .for_each(|(dst, src)| box_line(src, dst, size));
    let mut out = vec![0.0; width * height];
    let cols: Vec<Vec<f64>> = (0..width)
        .into_par_iter()
        .map(|x| {
            let col: Vec<f64> = (0..height).map(|y| rows[y * width + x]).collect();
            let mut dst = vec![0.0; height];
            box_line(&col, &mut dst, size);
            dst
        })
        .collect();
    for (x, col) in cols.into_iter().enumerate() {
        for (y, v) in col.into_iter().enumerate() {
            out[y * width + x] = v;
        }
    }
    out
}

/// Standard normal field, box filtered with `box_size`, then re-standardized.
pub fn sample_drift<T: Scalar>(width: usize, height: usize, box_size: usize, rng_seed: u64) -> Result<DriftField<T>> {
    if box_size.is_multiple_of(2) {
        return Err(Error::Config(format!("drift box {box_size} must be odd")));
    }
    let mut white = vec![0.0f64; width * height];
    white.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let mut rng = seed::stream(&[rng_seed, stage::DRIFT, y as u64]);
        for v in row {
            *v = StandardNormal.sample(&mut rng);
        }
    });
    let smooth = box_filter(&white, width, height, box_size);
    let n = smooth.len() as f64;
    let mean = smooth.iter().sum::<f64>() / n;
    let var = smooth.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    let values = if sd > 0.0 {
        smooth.iter().map(|v| T::of((v - mean) / sd)).collect()
    } else {
        vec![T::zero(); smooth.len()]
    };
    DriftField::from_values(width, height, values)
}

/// Î = max(0, I · η · (1 + α·G)) per pixel.
pub fn compose_pre_event<T: Scalar>(
    i_eq: &Raster<T>,
    speckle: &Raster<T>,
    drift: &DriftField<T>,
    alpha: f64,
) -> Result<Raster<T>> {
    if !i_eq.same_shape(speckle) || drift.width != i_eq.width() || drift.height != i_eq.height() {
        return Err(Error::Dimensions("composition fields differ in size".into()));
    }
    let a = T::of(alpha);
    let data = i_eq
        .pixels()
        .iter()
        .zip(speckle.pixels())
        .zip(&drift.values)
        .map(|((&i, &eta), &g)| (i * eta * (T::one() + a * g)).max(T::zero()))
        .collect();
    Raster::new(i_eq.width(), i_eq.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, var)
    }

    fn lag1_horizontal(v: &[f64], w: usize) -> f64 {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        let mut cov = 0.0;
        let mut k = 0usize;
        for (i, pair) in v.windows(2).enumerate() {
            if (i + 1) % w == 0 {
                continue;
            }
            cov += (pair[0] - m) * (pair[1] - m);
            k += 1;
        }
        cov / k as f64 / var
    }

    #[test]
    fn speckle_moments_l4() {
        let s: Raster<f64> = sample_speckle(1024, 1024, 4, 7).unwrap();
        let (m, v) = moments(s.pixels());
        assert!((m - 1.0).abs() <= 0.003, "mean {m}");
        assert!((v - 0.25).abs() <= 0.005, "var {v}");
    }

    #[test]
    fn speckle_l1_is_exponential() {
        let s: Raster<f64> = sample_speckle(1000, 1000, 1, 3).unwrap();
        let mut v = s.into_pixels();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let ks = v
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = 1.0 - (-x).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks <= 0.01, "ks {ks}");
    }

    #[test]
    fn speckle_is_deterministic_across_threads() {
        let a: Raster<f32> = sample_speckle(300, 200, 4, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b: Raster<f32> = pool.install(|| sample_speckle(300, 200, 4, 11).unwrap());
        assert_eq!(a, b);
        let c: Raster<f32> = sample_speckle(300, 200, 4, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_looks_rejected() {
        assert!(sample_speckle::<f32>(4, 4, 0, 0).is_err());
    }

    #[test]
    fn drift_is_standardized() {
        let d: DriftField<f64> = sample_drift(200, 150, 51, 5).unwrap();
        let v = d.values();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
        assert!(m.abs() <= 1e-6 * sd);
        assert!((sd - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn heavy_smoothing_is_strongly_correlated() {
        let d: DriftField<f64> = sample_drift(256, 256, 51, 9).unwrap();
        let rho = lag1_horizontal(d.values(), 256);
        assert!(rho >= 0.9, "lag-1 autocorrelation {rho}");
    }

    #[test]
    fn unit_box_is_white() {
        let d: DriftField<f64> = sample_drift(1024, 1024, 1, 9).unwrap();
        let rho = lag1_horizontal(d.values(), 1024);
        assert!(rho.abs() <= 0.01, "lag-1 autocorrelation {rho}");
    }

    #[test]
    fn even_box_rejected() {
        assert!(sample_drift::<f32>(8, 8, 4, 0).is_err());
    }

    #[test]
    fn box_filter_matches_direct_sum() {
        let (w, h) = (9, 7);
        let v: Vec<f64> = (0..w * h).map(|i| seed::unit(&[1, i as u64])).collect();
        let out = box_filter(&v, w, h, 5);
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for dy in -2..=2isize {
                    for dx in -2..=2isize {
                        let xx = reflect(x as isize + dx, w);
                        let yy = reflect(y as isize + dy, h);
                        s += v[yy * w + xx];
                    }
                }
                assert!((out[y * w + x] - s / 25.0).abs() < 1e-12);
            }
        }
        // Box wider than the image still reflects correctly.
        let wide = box_filter(&v, w, h, 51);
        assert!(wide.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn reflect_indexing() {
        assert_eq!(reflect(-1, 4), 0);
        assert_eq!(reflect(-2, 4), 1);
        assert_eq!(reflect(4, 4), 3);
        assert_eq!(reflect(5, 4), 2);
        assert_eq!(reflect(9, 4), 1);
        assert_eq!(reflect(-9, 4), 0);
    }

    #[test]
    fn composition_rules() {
        let i = Raster::new(1, 1, vec![2.0f64]).unwrap();
        let eta = Raster::new(1, 1, vec![0.5f64]).unwrap();
        let g = DriftField::from_values(1, 1, vec![1.0f64]).unwrap();
        let out = compose_pre_event(&i, &eta, &g, 0.05).unwrap();
        assert!((out.get(0, 0) - 1.05).abs() < 1e-15);

        let img = Raster::from_fn(5, 5, |x, y| (x + y) as f32);
        let ones = Raster::filled(5, 5, 1.0f32);
        assert_eq!(
            compose_pre_event(&img, &ones, &DriftField::zeros(5, 5), 0.0).unwrap(),
            img
        );

        let neg = DriftField::from_values(1, 1, vec![-30.0f64]).unwrap();
        assert_eq!(compose_pre_event(&i, &eta, &neg, 0.05).unwrap().get(0, 0), 0.0);
    }

    #[test]
    fn constant_scene_with_speckle_has_enl_near_looks() {
        let i = Raster::filled(512, 512, 100.0f64);
        let eta = sample_speckle(512, 512, 4, 21).unwrap();
        let out = compose_pre_event(&i, &eta, &DriftField::zeros(512, 512), 0.0).unwrap();
        let (m, v) = moments(out.pixels());
        assert!((m - 100.0).abs() <= 1.0);
        let enl = m * m / v;
        assert!((enl - 4.0).abs() <= 0.4, "enl {enl}");
    }
}
