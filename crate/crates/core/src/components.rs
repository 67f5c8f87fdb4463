use std::collections::VecDeque;

use crate::raster::{BinaryMask, Coord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// Inclusive bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    /// Member pixels in row-major order.
    pub pixels: Vec<Coord>,
    pub bbox: BBox,
}

impl Component {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        let mut m = BinaryMask::empty(width, height);
        for c in &self.pixels {
            m.set(c.x, c.y, true);
        }
        m
    }
}

/// Maximal connected sets of set pixels, ordered by (min row, min col) of their bounding boxes.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if !mask.bits()[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(Coord::new(start % w, start / w));
        let mut pixels = Vec::new();
        while let Some(c) = queue.pop_front() {
            pixels.push(c);
            for &(dx, dy) in connectivity.offsets() {
                if let Some(n) = c.offset(dx, dy, w, h) {
                    let i = n.y * w + n.x;
                    if mask.bits()[i] && !seen[i] {
                        seen[i] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        pixels.sort_unstable_by_key(|c| (c.y, c.x));
        let bbox = pixels.iter().fold(
            BBox {
                min_row: usize::MAX,
                min_col: usize::MAX,
                max_row: 0,
                max_col: 0,
            },
            |b, c| BBox {
                min_row: b.min_row.min(c.y),
                min_col: b.min_col.min(c.x),
                max_row: b.max_row.max(c.y),
                max_col: b.max_col.max(c.x),
            },
        );
        out.push(Component { id: 0, pixels, bbox });
    }

    // Discovery order is by first pixel; re-sort by bounding-box corner, first pixel breaks ties.
    out.sort_by_key(|c| (c.bbox.min_row, c.bbox.min_col, c.pixels[0].y, c.pixels[0].x));
    for (i, c) in out.iter_mut().enumerate() {
        c.id = i;
    }
    out
}
