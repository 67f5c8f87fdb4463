use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;

/// Value mapping that sends the empirical distribution of Ω onto that of the ring.
///
/// The Ω CDF uses mid-ranks for ties; the ring quantile function interpolates linearly
/// between order statistics at plotting positions `(k + ½) / m`.
#[derive(Debug, Clone)]
pub struct QuantileMap {
    source: Vec<f64>,
    reference: Vec<f64>,
}

impl QuantileMap {
    pub fn new(mut source: Vec<f64>, mut reference: Vec<f64>) -> Result<Self> {
        if source.is_empty() || reference.is_empty() {
            return Err(Error::Precondition(
                "histogram matching needs nonempty source and reference samples".into(),
            ));
        }
        source.sort_by(f64::total_cmp);
        reference.sort_by(f64::total_cmp);
        Ok(Self { source, reference })
    }

    /// Mid-rank empirical CDF of the source sample at `v`.
    pub fn cdf(&self, v: f64) -> f64 {
        let below = self.source.partition_point(|&s| s < v);
        let upto = self.source.partition_point(|&s| s <= v);
        (below as f64 + 0.5 * (upto - below) as f64) / self.source.len() as f64
    }

    /// Reference quantile at probability `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let m = self.reference.len();
        let h = (p * m as f64 - 0.5).clamp(0.0, (m - 1) as f64);
        let i = h.floor() as usize;
        let f = h - i as f64;
        if i + 1 >= m || f == 0.0 {
            self.reference[i]
        } else {
            self.reference[i] + f * (self.reference[i + 1] - self.reference[i])
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        self.quantile(self.cdf(v))
    }
}

/// Replace the Ω pixels by `H⁻¹_ring(F_Ω(v))`; everything else is untouched.
pub fn histogram_match<T: Scalar>(image: &Raster<T>, omega: &BinaryMask, ring: &BinaryMask) -> Result<Raster<T>> {
    if !image.matches(omega) || !image.matches(ring) {
        return Err(Error::Dimensions("image, Ω and ring differ".into()));
    }
    if omega.none() || ring.none() {
        return Err(Error::Precondition("Ω and ring must both be nonempty".into()));
    }
    if !omega.is_disjoint(ring) {
        return Err(Error::Precondition("Ω and ring overlap".into()));
    }
    let f64s = |m: &BinaryMask| image.values_in(m).into_iter().map(|v| v.f64()).collect();
    let map = QuantileMap::new(f64s(omega), f64s(ring))?;
    let data = image
        .pixels()
        .iter()
        .zip(omega.bits())
        .map(|(&v, &inside)| if inside { T::of(map.apply(v.f64())) } else { v })
        .collect();
    Raster::new(image.width(), image.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_two_sample;

    fn line(values: &[f64], omega_len: usize) -> (Raster<f64>, BinaryMask, BinaryMask) {
        let n = values.len();
        let img = Raster::new(n, 1, values.to_vec()).unwrap();
        let omega = BinaryMask::from_fn(n, 1, |x, _| x < omega_len);
        let ring = omega.complement();
        (img, omega, ring)
    }

    #[test]
    fn equal_multisets_reproduce_themselves() {
        let omega_vals = [5.0, 1.0, 3.0, 3.0, 9.0];
        let ring_vals = [3.0, 9.0, 1.0, 5.0, 3.0];
        let all: Vec<f64> = omega_vals.iter().chain(&ring_vals).copied().collect();
        let (img, omega, ring) = line(&all, 5);
        let out = histogram_match(&img, &omega, &ring).unwrap();
        let mut got: Vec<f64> = out.pixels()[..5].to_vec();
        got.sort_by(f64::total_cmp);
        let mut want = omega_vals.to_vec();
        want.sort_by(f64::total_cmp);
        assert_eq!(got, want);
        assert_eq!(&out.pixels()[5..], &ring_vals);
    }

    #[test]
    fn uniform_shift_preserves_ranks() {
        let all: Vec<f64> = (0..10).map(f64::from).chain((100..110).map(f64::from)).collect();
        let (img, omega, ring) = line(&all, 10);
        let out = histogram_match(&img, &omega, &ring).unwrap();
        let mapped = &out.pixels()[..10];
        assert!(mapped.iter().all(|&v| (100.0..=109.0).contains(&v)));
        assert!(mapped.windows(2).all(|w| w[0] < w[1]));
        // Hand-evaluated: F(v) = (v + ½)/10, H⁻¹(p) = 100 + 10p − ½ = 100 + v.
        for (v, m) in mapped.iter().enumerate() {
            assert_eq!(*m, 100.0 + v as f64);
        }
    }

    #[test]
    fn ties_map_together() {
        let (img, omega, ring) = line(&[4.0, 4.0, 1.0, 10.0, 20.0, 30.0, 40.0], 3);
        let out = histogram_match(&img, &omega, &ring).unwrap();
        assert_eq!(out.get(0, 0), out.get(1, 0));
        assert!(out.get(2, 0) <= out.get(0, 0));
    }

    #[test]
    fn preconditions_are_enforced() {
        let img = Raster::filled(4, 1, 1.0f32);
        let a = BinaryMask::rect(4, 1, 0, 0, 2, 1);
        assert!(histogram_match(&img, &BinaryMask::empty(4, 1), &a).is_err());
        assert!(histogram_match(&img, &a, &BinaryMask::empty(4, 1)).is_err());
        assert!(histogram_match(&img, &a, &a).is_err());
    }

    #[test]
    fn matching_shrinks_ks_distance() {
        let omega_vals: Vec<f64> = (0..600).map(|i| ((i * 37) % 600) as f64 * 0.01).collect();
        let ring_vals: Vec<f64> = (0..700).map(|i| 50.0 + ((i * 53) % 700) as f64 * 0.3).collect();
        let all: Vec<f64> = omega_vals.iter().chain(&ring_vals).copied().collect();
        let (img, omega, ring) = line(&all, 600);
        let before = ks_two_sample(&omega_vals, &ring_vals);
        let out = histogram_match(&img, &omega, &ring).unwrap();
        let after = ks_two_sample(&out.pixels()[..600], &ring_vals);
        assert!(after <= before);
        assert!(after <= 0.1, "ks after matching {after}");
    }
}
