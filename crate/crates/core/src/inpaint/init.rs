use rayon::prelude::*;

use super::patch::PatchSpec;
use crate::morph::squared_distance_to;
use crate::raster::{BinaryMask, Coord, Raster};
use crate::scalar::Scalar;

/// Onion-peel initialization: masked pixels are visited from the hole boundary inwards and
/// each copies the centre of the best-matching known patch, compared only over pixels that
/// are known or already filled. Returns `None` when the known region is empty.
pub fn onion_peel<T: Scalar>(image: &Raster<T>, mask: &BinaryMask, spec: PatchSpec) -> Option<Raster<T>> {
    let known = mask.complement();
    let sources: Vec<Coord> = known.coords().collect();
    if sources.is_empty() {
        return None;
    }
    let (w, h) = (image.width(), image.height());
    let depth = squared_distance_to(&known);
    let mut order: Vec<Coord> = mask.coords().collect();
    order.sort_by_key(|c| (depth[c.y * w + c.x], c.y, c.x));

    let mut out = image.clone();
    let mut context = known.clone();
    let r = spec.radius() as isize;
    for t in order {
        let offsets: Vec<(isize, isize)> = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| t.offset(dx, dy, w, h).is_some_and(|c| context.at(c)))
            .collect();
        let target: Vec<f64> = offsets
            .iter()
            .map(|&(dx, dy)| out.at(t.offset(dx, dy, w, h).unwrap()).f64())
            .collect();
        let best = sources
            .par_iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut sum = 0.0;
                let mut n = 0usize;
                for (&(dx, dy), &tv) in offsets.iter().zip(&target) {
                    if let Some(c) = s.offset(dx, dy, w, h) {
                        if known.at(c) {
                            let d = tv - image.at(c).f64();
                            sum += d * d;
                            n += 1;
                        }
                    }
                }
                let d = if n == 0 { f64::INFINITY } else { sum / n as f64 };
                (d, i)
            })
            .reduce(
                || (f64::INFINITY, usize::MAX),
                |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        let pick = sources[best.1.min(sources.len() - 1)];
        out.set(t.x, t.y, image.at(pick));
        context.set(t.x, t.y, true);
    }
    Some(out)
}
