//! Randomized nearest-neighbour field search restricted to the known region.

use rayon::prelude::*;

use super::patch::{patch_distance, PatchSpec};
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Coord, Raster};
use crate::scalar::Scalar;
use crate::seed::{self, stage};

/// Random-search draws landing outside K are redrawn this many times before the radius is skipped.
const SEARCH_REDRAWS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnfEntry<T> {
    pub target: Coord,
    pub source: Coord,
    pub distance: T,
}

/// Best known source patch for every masked pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestNeighborField<T> {
    width: usize,
    height: usize,
    entries: Vec<NnfEntry<T>>,
    slot: Vec<u32>,
}

const NO_ENTRY: u32 = u32::MAX;

impl<T: Scalar> NearestNeighborField<T> {
    /// Assemble a field from explicit entries (sorted into row-major target order).
    /// Targets must be unique and in bounds; sources must be in bounds.
    pub fn new(width: usize, height: usize, mut entries: Vec<NnfEntry<T>>) -> Result<Self> {
        entries.sort_by_key(|e| (e.target.y, e.target.x));
        let mut slot = vec![NO_ENTRY; width * height];
        for (i, e) in entries.iter().enumerate() {
            for c in [e.target, e.source] {
                if c.x >= width || c.y >= height {
                    return Err(Error::Dimensions(format!("{c:?} outside {width}x{height}")));
                }
            }
            let s = &mut slot[e.target.y * width + e.target.x];
            if *s != NO_ENTRY {
                return Err(Error::Invalid(format!("duplicate target {:?}", e.target)));
            }
            *s = i as u32;
        }
        Ok(Self {
            width,
            height,
            entries,
            slot,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Entries in row-major order of their targets.
    pub fn entries(&self) -> &[NnfEntry<T>] {
        &self.entries
    }

    pub fn get(&self, target: Coord) -> Option<&NnfEntry<T>> {
        match self.slot[target.y * self.width + target.x] {
            NO_ENTRY => None,
            i => Some(&self.entries[i as usize]),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_distance(&self) -> f64 {
        self.entries.iter().map(|e| e.distance.f64()).sum()
    }

    pub fn mean_distance(&self) -> f64 {
        if self.entries.is_empty() {
            0.0
        } else {
            self.total_distance() / self.entries.len() as f64
        }
    }

    /// Check the field against its invariants: entries exactly on masked pixels, sources in
    /// the known region, and every stored distance equal to a recomputation.
    pub fn verify(&self, image: &Raster<T>, mask: &BinaryMask, spec: PatchSpec) -> Result<()> {
        if !image.matches(mask) || mask.width() != self.width || mask.height() != self.height {
            return Err(Error::Dimensions("field, image and mask differ".into()));
        }
        if self.entries.len() != mask.count() {
            return Err(Error::Invariant(format!(
                "{} entries for {} masked pixels",
                self.entries.len(),
                mask.count()
            )));
        }
        let known = mask.complement();
        for e in &self.entries {
            if !mask.at(e.target) {
                return Err(Error::Invariant(format!("entry on unmasked {:?}", e.target)));
            }
            if mask.at(e.source) {
                return Err(Error::Invariant(format!("source {:?} outside K", e.source)));
            }
            let d = patch_distance(image, &known, e.target, e.source, spec);
            if d != e.distance {
                return Err(Error::Invariant(format!(
                    "stored distance {:?} != recomputed {:?} at {:?}",
                    e.distance, d, e.target
                )));
            }
        }
        Ok(())
    }
}

/// Search schedule and randomness address of one PatchMatch run.
#[derive(Debug, Clone, Copy)]
pub struct SearchSchedule {
    pub iterations: usize,
    pub seed: u64,
    /// Extra key component so runs at different pyramid levels draw independent numbers.
    pub level: u64,
}

/// Approximate nearest-neighbour field for every masked pixel.
pub fn patchmatch<T: Scalar>(
    image: &Raster<T>,
    mask: &BinaryMask,
    spec: PatchSpec,
    iterations: usize,
    rng_seed: u64,
) -> Result<NearestNeighborField<T>> {
    let schedule = SearchSchedule {
        iterations,
        seed: rng_seed,
        level: 0,
    };
    patchmatch_traced(image, mask, spec, schedule).map(|(nnf, _)| nnf)
}

/// Like [`patchmatch`], also returning the total field distance after initialization and
/// after every sweep.
pub fn patchmatch_traced<T: Scalar>(
    image: &Raster<T>,
    mask: &BinaryMask,
    spec: PatchSpec,
    schedule: SearchSchedule,
) -> Result<(NearestNeighborField<T>, Vec<f64>)> {
    if schedule.iterations == 0 {
        return Err(Error::Precondition("patchmatch needs at least one iteration".into()));
    }
    patchmatch_from(image, mask, spec, schedule, None)
}

/// PatchMatch starting from the sources of `init` where they are still valid, and from
/// uniform draws over K elsewhere. Distances are always recomputed against `image`.
/// Zero iterations only scores the initial field.
pub fn patchmatch_from<T: Scalar>(
    image: &Raster<T>,
    mask: &BinaryMask,
    spec: PatchSpec,
    schedule: SearchSchedule,
    init: Option<&NearestNeighborField<T>>,
) -> Result<(NearestNeighborField<T>, Vec<f64>)> {
    if !image.matches(mask) {
        return Err(Error::Dimensions(format!(
            "image {}x{} vs mask {}x{}",
            image.width(),
            image.height(),
            mask.width(),
            mask.height()
        )));
    }
    let known_mask = mask.complement();
    let known: Vec<Coord> = known_mask.coords().collect();
    if known.is_empty() {
        return Err(Error::Precondition("known region is empty".into()));
    }
    let (w, h) = (image.width(), image.height());
    let SearchSchedule { seed, level, .. } = schedule;

    let mut entries: Vec<NnfEntry<T>> = mask
        .coords()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| {
            let prior = init
                .filter(|f| f.width == w && f.height == h)
                .and_then(|f| f.get(t))
                .map(|e| e.source)
                .filter(|&c| known_mask.at(c));
            let source = prior.unwrap_or_else(|| {
                known[seed::below(&[seed, stage::PM_INIT, level, t.x as u64, t.y as u64], known.len())]
            });
            NnfEntry {
                target: t,
                source,
                distance: patch_distance(image, &known_mask, t, source, spec),
            }
        })
        .collect();

    let mut slot = vec![NO_ENTRY; w * h];
    for (i, e) in entries.iter().enumerate() {
        slot[e.target.y * w + e.target.x] = i as u32;
    }

    let mut trace = vec![total(&entries)];
    let max_radius = w.max(h) as isize;

    for sweep in 0..schedule.iterations {
        let forward = sweep % 2 == 0;
        propagate(image, &known_mask, spec, &mut entries, &slot, forward);

        entries.par_iter_mut().for_each(|e| {
            random_search(image, &known_mask, spec, e, max_radius, [seed, level, sweep as u64]);
        });

        trace.push(total(&entries));
    }

    let nnf = NearestNeighborField {
        width: w,
        height: h,
        entries,
        slot,
    };
    Ok((nnf, trace))
}

/// Exact nearest-neighbour field by scanning all of K for every masked pixel. Ties keep
/// the first source in row-major order.
pub fn exhaustive_field<T: Scalar>(
    image: &Raster<T>,
    mask: &BinaryMask,
    spec: PatchSpec,
) -> Result<NearestNeighborField<T>> {
    if !image.matches(mask) {
        return Err(Error::Dimensions("image and mask differ".into()));
    }
    let known_mask = mask.complement();
    let known: Vec<Coord> = known_mask.coords().collect();
    if known.is_empty() {
        return Err(Error::Precondition("known region is empty".into()));
    }
    let entries = mask
        .coords()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| {
            let mut best = NnfEntry {
                target: t,
                source: known[0],
                distance: patch_distance(image, &known_mask, t, known[0], spec),
            };
            for &s in &known[1..] {
                let d = patch_distance(image, &known_mask, t, s, spec);
                if d < best.distance {
                    best.source = s;
                    best.distance = d;
                }
            }
            best
        })
        .collect();
    NearestNeighborField::new(image.width(), image.height(), entries)
}

fn total<T: Scalar>(entries: &[NnfEntry<T>]) -> f64 {
    entries.iter().map(|e| e.distance.f64()).sum()
}

/// Scanline propagation: each pixel tries its already-visited neighbours' sources, shifted.
fn propagate<T: Scalar>(
    image: &Raster<T>,
    known: &BinaryMask,
    spec: PatchSpec,
    entries: &mut [NnfEntry<T>],
    slot: &[u32],
    forward: bool,
) {
    let (w, h) = (image.width(), image.height());
    let step: isize = if forward { -1 } else { 1 };
    let n = entries.len();
    for k in 0..n {
        let i = if forward { k } else { n - 1 - k };
        let t = entries[i].target;
        for (dx, dy) in [(step, 0), (0, step)] {
            let Some(nb) = t.offset(dx, dy, w, h) else {
                continue;
            };
            let j = slot[nb.y * w + nb.x];
            if j == NO_ENTRY {
                continue;
            }
            let Some(cand) = entries[j as usize].source.offset(-dx, -dy, w, h) else {
                continue;
            };
            if !known.at(cand) || cand == entries[i].source {
                continue;
            }
            let d = patch_distance(image, known, t, cand, spec);
            if d < entries[i].distance {
                entries[i].source = cand;
                entries[i].distance = d;
            }
        }
    }
}

/// Exponentially shrinking window around the current best source.
fn random_search<T: Scalar>(
    image: &Raster<T>,
    known: &BinaryMask,
    spec: PatchSpec,
    e: &mut NnfEntry<T>,
    max_radius: isize,
    address: [u64; 3],
) {
    let (w, h) = (image.width(), image.height());
    let [seed, level, sweep] = address;
    let (tx, ty) = (e.target.x as u64, e.target.y as u64);
    let mut radius = max_radius;
    let mut step = 0u64;
    while radius >= 1 {
        let span = (2 * radius + 1) as usize;
        for draw in 0..SEARCH_REDRAWS {
            let k = step * SEARCH_REDRAWS + draw;
            let dx = seed::below(&[seed, stage::PM_SEARCH, level, sweep, tx, ty, k, 0], span) as isize - radius;
            let dy = seed::below(&[seed, stage::PM_SEARCH, level, sweep, tx, ty, k, 1], span) as isize - radius;
            let Some(cand) = e.source.offset(dx, dy, w, h) else {
                continue;
            };
            if !known.at(cand) {
                continue;
            }
            if cand != e.source {
                let d = patch_distance(image, known, e.target, cand, spec);
                if d < e.distance {
                    e.source = cand;
                    e.distance = d;
                }
            }
            break;
        }
        radius /= 2;
        step += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(w: usize, h: usize, s: u64) -> Raster<f64> {
        Raster::from_fn(w, h, |x, y| seed::unit(&[s, x as u64, y as u64]) * 10.0)
    }

    #[test]
    fn empty_known_region_is_an_error() {
        let img = Raster::filled(4, 4, 1.0f32);
        let r = patchmatch(&img, &BinaryMask::full(4, 4), PatchSpec::new(1).unwrap(), 2, 0);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_iterations_is_an_error() {
        let img = Raster::filled(4, 4, 1.0f32);
        let r = patchmatch(
            &img,
            &BinaryMask::rect(4, 4, 1, 1, 1, 1),
            PatchSpec::new(1).unwrap(),
            0,
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn field_satisfies_invariants() {
        let img = noise(24, 20, 3);
        let mask = BinaryMask::rect(24, 20, 6, 5, 7, 6);
        let spec = PatchSpec::new(2).unwrap();
        let nnf = patchmatch(&img, &mask, spec, 4, 11).unwrap();
        nnf.verify(&img, &mask, spec).unwrap();
        assert_eq!(nnf.len(), 42);
    }

    #[test]
    fn sweeps_never_increase_total_distance() {
        let img = noise(32, 32, 9);
        let mask = BinaryMask::rect(32, 32, 10, 12, 9, 8);
        let schedule = SearchSchedule {
            iterations: 6,
            seed: 5,
            level: 0,
        };
        let (_, trace) = patchmatch_traced(&img, &mask, PatchSpec::new(1).unwrap(), schedule).unwrap();
        assert_eq!(trace.len(), 7);
        for pair in trace.windows(2) {
            assert!(pair[1] <= pair[0], "{trace:?}");
        }
    }

    #[test]
    fn more_sweeps_never_hurt() {
        let img = noise(32, 32, 21);
        let mask = BinaryMask::rect(32, 32, 4, 4, 10, 10);
        let spec = PatchSpec::new(1).unwrap();
        let one = patchmatch(&img, &mask, spec, 1, 77).unwrap();
        let five = patchmatch(&img, &mask, spec, 5, 77).unwrap();
        assert!(five.mean_distance() <= one.mean_distance());
    }

    fn texture(w: usize, h: usize) -> Raster<f64> {
        Raster::from_fn(w, h, |x, y| {
            let (x, y) = (x as f64, y as f64);
            10.0 + 3.0 * (0.37 * x + 0.11 * y).sin() + 2.0 * (0.23 * y - 0.05 * x).cos() + (0.013 * x * y).sin()
        })
    }

    #[test]
    fn exact_copy_is_found() {
        // A 12x12 region is duplicated; the mask sits strictly inside the copy.
        let mut img = texture(48, 48);
        for y in 0..12 {
            for x in 0..12 {
                let v = img.get(4 + x, 30 + y);
                img.set(30 + x, 6 + y, v);
            }
        }
        let mask = BinaryMask::rect(48, 48, 33, 9, 6, 6);
        let spec = PatchSpec::new(2).unwrap();
        let nnf = patchmatch(&img, &mask, spec, 6, 1).unwrap();
        for e in nnf.entries() {
            assert_eq!(e.distance, 0.0, "{e:?}");
            assert_eq!((e.source.x + 26, e.source.y - 24), (e.target.x, e.target.y));
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let img = noise(20, 20, 8);
        let mask = BinaryMask::rect(20, 20, 5, 5, 6, 6);
        let spec = PatchSpec::new(1).unwrap();
        let a = patchmatch(&img, &mask, spec, 3, 99).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| patchmatch(&img, &mask, spec, 3, 99).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn never_below_exhaustive_minimum() {
        let img = noise(16, 16, 12);
        let mask = BinaryMask::rect(16, 16, 5, 6, 5, 4);
        let spec = PatchSpec::new(1).unwrap();
        let known = mask.complement();
        let nnf = patchmatch(&img, &mask, spec, 5, 3).unwrap();
        let mut gap = 0.0;
        for e in nnf.entries() {
            let best = known
                .coords()
                .map(|s| patch_distance(&img, &known, e.target, s, spec))
                .fold(f64::INFINITY, f64::min);
            assert!(e.distance >= best);
            gap += e.distance - best;
        }
        eprintln!(
            "mean absolute gap over {} entries: {}",
            nnf.len(),
            gap / nnf.len() as f64
        );
    }
}
