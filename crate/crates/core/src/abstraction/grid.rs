use crate::cfg::Label;
use crate::model::Model;

/// Per-object cut lists for one label; cell `i` of object `o` spans
/// `starts[o][i] ..= starts[o][i + 1] - 1`, the last cell ends at the range top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    starts: Vec<Vec<i64>>,
    his: Vec<i64>,
}

impl Grid {
    /// `g` equal-width cells per object, the last absorbing the remainder.
    pub fn uniform(ranges: &[(i64, i64)], g: u64) -> Self {
        let starts = ranges
            .iter()
            .map(|&(lo, hi)| {
                let width = (hi - lo) as u64 + 1;
                let n = g.clamp(1, width);
                let step = width / n;
                (0..n).map(|i| lo + (i * step) as i64).collect()
            })
            .collect();
        Self { starts, his: ranges.iter().map(|r| r.1).collect() }
    }

    pub fn objects(&self) -> usize {
        self.starts.len()
    }

    pub fn cells(&self, o: usize) -> usize {
        self.starts[o].len()
    }

    pub fn cell_of(&self, o: usize, v: i64) -> u32 {
        (self.starts[o].partition_point(|&s| s <= v) - 1) as u32
    }

    pub fn bounds(&self, o: usize, c: u32) -> (i64, i64) {
        let s = &self.starts[o];
        let c = c as usize;
        let hi = if c + 1 < s.len() { s[c + 1] - 1 } else { self.his[o] };
        (s[c], hi)
    }

    /// Cells meeting `[lo, hi]`, as an inclusive index range.
    pub fn overlapping(&self, o: usize, lo: i64, hi: i64) -> (u32, u32) {
        (self.cell_of(o, lo), self.cell_of(o, hi))
    }

    pub fn is_unit(&self) -> bool {
        (0..self.objects()).all(|o| self.starts[o].len() as i64 == self.his[o] - self.starts[o][0] + 1)
    }

    /// Splits every non-unit cell in two; returns whether anything changed.
    pub fn bisect(&mut self) -> bool {
        let mut changed = false;
        for o in 0..self.objects() {
            let mut next = Vec::with_capacity(self.starts[o].len() * 2);
            for c in 0..self.starts[o].len() {
                let (lo, hi) = self.bounds(o, c as u32);
                next.push(lo);
                if hi > lo {
                    next.push(lo + (hi - lo) / 2 + 1);
                    changed = true;
                }
            }
            self.starts[o] = next;
        }
        changed
    }

    /// All cell intervals of object `o`.
    pub fn intervals(&self, o: usize) -> Vec<(i64, i64)> {
        (0..self.cells(o)).map(|c| self.bounds(o, c as u32)).collect()
    }
}

/// One grid per label: the partition of each `(t, l, caller, ids)` key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub grids: Vec<Grid>,
}

pub fn object_ranges(model: &Model) -> Vec<(i64, i64)> {
    model.objects.iter().map(|o| (o.lo, o.hi)).collect()
}

impl Partition {
    pub fn initial(model: &Model, granularity: u64) -> Self {
        let g = Grid::uniform(&object_ranges(model), granularity);
        Self { grids: vec![g; model.lc.label_count()] }
    }

    /// Every box a single valuation.
    pub fn unit(model: &Model) -> Self {
        Self::initial(model, u64::MAX)
    }

    pub fn is_unit(&self) -> bool {
        self.grids.iter().all(Grid::is_unit)
    }

    pub fn refine_label(&mut self, l: Label) -> bool {
        self.grids[l as usize].bisect()
    }

    /// Total number of cells over all labels and objects.
    pub fn size(&self) -> usize {
        self.grids.iter().map(|g| (0..g.objects()).map(|o| g.cells(o)).sum::<usize>()).sum()
    }
}
