use rayon::prelude::*;

use super::patch::PatchSpec;
use super::patchmatch::NearestNeighborField;
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;

/// Voting bandwidth: median of the nonzero field distances, `None` when all are zero.
pub fn vote_bandwidth<T: Scalar>(nnf: &NearestNeighborField<T>) -> Option<f64> {
    let mut d: Vec<f64> = nnf
        .entries()
        .iter()
        .map(|e| e.distance.f64())
        .filter(|&d| d > 0.0)
        .collect();
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let n = d.len();
    Some(if n % 2 == 1 {
        d[n / 2]
    } else {
        0.5 * (d[n / 2 - 1] + d[n / 2])
    })
}

/// Patch voting. Every field entry proposes its source patch over its target footprint; a
/// masked pixel becomes the weighted mean of all proposals covering it, with weight
/// `exp(-d / σ)` for an entry of distance `d` and σ from [`vote_bandwidth`] (uniform when
/// every distance is zero). Proposals from source pixels outside the known region are
/// ignored. Unmasked pixels are copied.
pub fn fill_from_nnf<T: Scalar>(
    image: &Raster<T>,
    mask: &BinaryMask,
    nnf: &NearestNeighborField<T>,
    spec: PatchSpec,
) -> Result<Raster<T>> {
    if !image.matches(mask) || nnf.width() != mask.width() || nnf.height() != mask.height() {
        return Err(Error::Dimensions("image, mask and field differ".into()));
    }
    if nnf.len() != mask.count() || nnf.entries().iter().any(|e| !mask.at(e.target)) {
        return Err(Error::Precondition("field must cover exactly the masked pixels".into()));
    }
    if mask.none() {
        return Ok(image.clone());
    }

    let (w, h) = (image.width(), image.height());
    let r = spec.radius() as isize;
    let sigma = vote_bandwidth(nnf);
    let weight = |d: T| match sigma {
        Some(s) => (-d.f64() / s).exp(),
        None => 1.0,
    };

    let known_values = image.values_in(&mask.complement());
    let (lo, hi) = known_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.f64()), hi.max(v.f64()))
        });

    let px = image.pixels();
    let bits = mask.bits();
    let mut out = image.pixels().to_vec();
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            if !bits[y * w + x] {
                continue;
            }
            let p = crate::raster::Coord::new(x, y);
            // Accumulated relative to the first proposal, so unanimous votes reproduce it exactly.
            let mut anchor: Option<f64> = None;
            let mut acc = 0.0f64;
            let mut wsum = 0.0f64;
            for oy in -r..=r {
                for ox in -r..=r {
                    let Some(t) = p.offset(-ox, -oy, w, h) else {
                        continue;
                    };
                    let Some(e) = nnf.get(t) else {
                        continue;
                    };
                    let Some(s) = e.source.offset(ox, oy, w, h) else {
                        continue;
                    };
                    let si = s.y * w + s.x;
                    if bits[si] {
                        continue;
                    }
                    let wt = weight(e.distance);
                    let v = px[si].f64();
                    let a = *anchor.get_or_insert(v);
                    acc += wt * (v - a);
                    wsum += wt;
                }
            }
            // The entry at `p` itself always proposes its in-K source pixel.
            debug_assert!(wsum > 0.0);
            *slot = T::of((anchor.unwrap_or(0.0) + acc / wsum).clamp(lo, hi));
        }
    });
    Ok(Raster::from_vec_unchecked(w, h, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inpaint::patchmatch::NnfEntry;
    use crate::raster::Coord;

    #[test]
    fn empty_mask_copies_input() {
        let img = Raster::from_fn(5, 4, |x, y| (x * y) as f32);
        let mask = BinaryMask::empty(5, 4);
        let nnf = NearestNeighborField::new(5, 4, vec![]).unwrap();
        let out = fill_from_nnf(&img, &mask, &nnf, PatchSpec::new(1).unwrap()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn unanimous_zero_distance_votes_copy_the_value() {
        let img = Raster::from_fn(8, 8, |x, _| if x < 4 { 7.5f64 } else { 1.0 });
        let mask = BinaryMask::rect(8, 8, 5, 3, 2, 2);
        let entries = mask
            .coords()
            .map(|t| NnfEntry {
                target: t,
                source: Coord::new(t.x - 4, t.y),
                distance: 0.0,
            })
            .collect();
        let nnf = NearestNeighborField::new(8, 8, entries).unwrap();
        let out = fill_from_nnf(&img, &mask, &nnf, PatchSpec::new(1).unwrap()).unwrap();
        for c in mask.coords() {
            assert_eq!(out.at(c), 7.5);
        }
        for c in mask.complement().coords() {
            assert_eq!(out.at(c), img.at(c));
        }
    }

    #[test]
    fn two_equal_weight_proposals_average() {
        // Masked pixels (3,3) and (4,3). Entry at (3,3) points to a pixel holding 2 whose
        // right neighbour also holds 2; entry at (4,3) points to a pixel whose left
        // neighbour holds 4. Each masked pixel therefore hears a 2 and a 4.
        let mut data = vec![0.0f64; 64];
        let put = |d: &mut Vec<f64>, x: usize, y: usize, v: f64| d[y * 8 + x] = v;
        put(&mut data, 0, 0, 2.0);
        put(&mut data, 1, 0, 2.0);
        put(&mut data, 5, 6, 4.0);
        put(&mut data, 6, 6, 4.0);
        let img = Raster::new(8, 8, data).unwrap();
        let mut mask = BinaryMask::empty(8, 8);
        mask.set(3, 3, true);
        mask.set(4, 3, true);
        let nnf = NearestNeighborField::new(
            8,
            8,
            vec![
                NnfEntry {
                    target: Coord::new(3, 3),
                    source: Coord::new(0, 0),
                    distance: 1.0,
                },
                NnfEntry {
                    target: Coord::new(4, 3),
                    source: Coord::new(6, 6),
                    distance: 1.0,
                },
            ],
        )
        .unwrap();
        let out = fill_from_nnf(&img, &mask, &nnf, PatchSpec::new(1).unwrap()).unwrap();
        assert_eq!(out.get(3, 3), 3.0);
        assert_eq!(out.get(4, 3), 3.0);
    }

    #[test]
    fn bandwidth_is_median_of_nonzero() {
        let mk = |ds: &[f64]| {
            let entries = ds
                .iter()
                .enumerate()
                .map(|(i, &d)| NnfEntry {
                    target: Coord::new(i, 0),
                    source: Coord::new(i, 1),
                    distance: d,
                })
                .collect();
            NearestNeighborField::new(ds.len(), 2, entries).unwrap()
        };
        assert_eq!(vote_bandwidth(&mk(&[0.0, 0.0])), None);
        assert_eq!(vote_bandwidth(&mk(&[0.0, 3.0, 1.0, 2.0])), Some(2.0));
        assert_eq!(vote_bandwidth(&mk(&[4.0, 0.0, 1.0, 2.0, 3.0])), Some(2.5));
    }

    #[test]
    fn field_must_cover_mask() {
        let img = Raster::filled(4, 4, 1.0f32);
        let mask = BinaryMask::rect(4, 4, 1, 1, 2, 1);
        let nnf = NearestNeighborField::new(
            4,
            4,
            vec![NnfEntry {
                target: Coord::new(1, 1),
                source: Coord::new(0, 0),
                distance: 0.0f32,
            }],
        )
        .unwrap();
        assert!(fill_from_nnf(&img, &mask, &nnf, PatchSpec::new(1).unwrap()).is_err());
    }
}
