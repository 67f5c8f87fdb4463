use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pixel coordinate: `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coord {
    pub x: usize,
    pub y: usize,
}

impl Coord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Offset by a signed delta, returning `None` outside `width × height`.
    #[inline]
    pub fn offset(self, dx: isize, dy: isize, width: usize, height: usize) -> Option<Coord> {
        let x = self.x as isize + dx;
        let y = self.y as isize + dy;
        if x < 0 || y < 0 || x >= width as isize || y >= height as isize {
            None
        } else {
            Some(Coord::new(x as usize, y as usize))
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimensions(format!("empty raster {width}x{height}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Dimensions(format!("{width}x{height} overflows")))?;
    if n != len {
        return Err(Error::Dimensions(format!(
            "{width}x{height} needs {n} pixels, got {len}"
        )));
    }
    Ok(())
}

/// Row-major grid of nonnegative, finite intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> Raster<T> {
    /// Validating constructor; rejects non-finite and negative pixels.
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some((i, v)) = data.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < T::zero()) {
            return Err(Error::Invalid(format!(
                "pixel {i} = {v:?} is not a finite nonnegative intensity"
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        assert!(value.is_finite() && value >= T::zero());
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Build from a closure over (x, y). Panics if the closure yields an invalid intensity.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("from_fn produced an invalid intensity")
    }

    /// Construct without validation. Callers guarantee the invariants.
    pub(crate) fn from_vec_unchecked(width: usize, height: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(width * height, data.len());
        debug_assert!(data.iter().all(|v| v.is_finite() && *v >= T::zero()));
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn pixels(&self) -> &[T] {
        &self.data
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn at(&self, c: Coord) -> T {
        self.data[c.y * self.width + c.x]
    }

    /// Replace one pixel. Panics on an invalid intensity.
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        assert!(v.is_finite() && v >= T::zero(), "invalid intensity {v:?}");
        let i = self.index(x, y);
        self.data[i] = v;
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn same_shape<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn matches(&self, mask: &BinaryMask) -> bool {
        self.width == mask.width() && self.height == mask.height()
    }

    pub fn cast<U: Scalar>(&self) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| U::of(v.f64())).collect(),
        }
    }

    /// Apply `f` to every pixel; the result must stay a valid intensity.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Values at the set pixels of `mask`, in row-major order.
    pub fn values_in(&self, mask: &BinaryMask) -> Vec<T> {
        debug_assert!(self.matches(mask));
        self.data
            .iter()
            .zip(mask.bits())
            .filter_map(|(&v, &b)| b.then_some(v))
            .collect()
    }

    /// Copy of `self` with pixels inside `mask` taken from `other`.
    pub fn blend_masked(&self, other: &Self, mask: &BinaryMask) -> Self {
        debug_assert!(self.same_shape(other) && self.matches(mask));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .zip(mask.bits())
            .map(|((&a, &b), &m)| if m { b } else { a })
            .collect();
        Self::from_vec_unchecked(self.width, self.height, data)
    }

    pub fn min_max(&self) -> (T, T) {
        self.data
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Row-major membership flags.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::filled(width, height, false)
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self::filled(width, height, true)
    }

    fn filled(width: usize, height: usize, v: bool) -> Self {
        assert!(width > 0 && height > 0, "empty mask");
        Self {
            width,
            height,
            bits: vec![v; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    /// Axis-aligned rectangle `[x0, x0+w) × [y0, y0+h)`, clipped to the grid.
    pub fn rect(width: usize, height: usize, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        Self::from_fn(width, height, |x, y| x >= x0 && x < x0 + w && y >= y0 && y < y0 + h)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn at(&self, c: Coord) -> bool {
        self.bits[c.y * self.width + c.x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn none(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn all(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| Coord::new(i % w, i / w))
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert!(self.same_shape(other), "mask dimensions differ");
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.same_shape(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &BinaryMask) -> bool {
        self.same_shape(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !(a && b))
    }
}

/// Highest valid class id.
pub const MAX_LABEL: u8 = 4;

/// Per-pixel class ids in `0..=4`: 0 sea, 1 oil, 2 look-alike, 3 vessel, 4 land.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMask {
    pub const SEA: u8 = 0;
    pub const OIL: u8 = 1;
    pub const LOOK_ALIKE: u8 = 2;
    pub const VESSEL: u8 = 3;
    pub const LAND: u8 = 4;

    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        if let Some((i, l)) = labels.iter().enumerate().find(|(_, &l)| l > MAX_LABEL) {
            return Err(Error::Invalid(format!("label {l} at pixel {i} is outside 0..=4")));
        }
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, label: u8) -> Self {
        assert!(label <= MAX_LABEL);
        Self::new(width, height, vec![label; width * height]).expect("valid label fill")
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: u8) {
        assert!(label <= MAX_LABEL, "label {label} outside 0..=4");
        self.labels[y * self.width + x] = label;
    }

    /// Pixels carrying class `label`.
    pub fn class_mask(&self, label: u8) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| l == label).collect(),
        }
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn matches<T>(&self, raster: &Raster<T>) -> bool {
        self.width == raster.width && self.height == raster.height
    }
}
