//! Uniform grids on the unit cube, cell-wise constant functions, and the
//! dyadic (optionally one-third shifted) cube families used for every
//! supremum over cubes.
//!
//! Cells are indexed row-major: `index = x + 2^L * y`. In dimension one the
//! second axis is degenerate (`y = 0`). Functions vanish outside `[0,1)^d`;
//! shifted cubes that stick out of the domain are clipped, and the measure of
//! a clipped cube is the measure of its part inside the domain.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, Compensated};

/// Uniform dyadic grid with `2^level` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    dim: usize,
    level: u32,
}

impl Grid {
    pub const MIN_LEVEL: u32 = 2;
    pub const MAX_LEVEL: u32 = 14;

    pub fn new(dim: usize, level: u32) -> Result<Self> {
        if !(1..=2).contains(&dim) || !(Self::MIN_LEVEL..=Self::MAX_LEVEL).contains(&level) {
            return Err(Error::InvalidGrid { dim, level });
        }
        Ok(Grid { dim, level })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cells per axis.
    pub fn side_cells(&self) -> usize {
        1 << self.level
    }

    pub fn cell_count(&self) -> usize {
        self.side_cells().pow(self.dim as u32)
    }

    pub fn cell_width(&self) -> f64 {
        math::exp2i(-(self.level as i32))
    }

    pub fn cell_volume(&self) -> f64 {
        math::exp2i(-((self.dim as u32 * self.level) as i32))
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        coords[0] + self.side_cells() * coords[1]
    }

    pub fn coords(&self, index: usize) -> [usize; 2] {
        let n = self.side_cells();
        [index % n, index / n]
    }

    /// Cell containing the point `x` (coordinates in `[0,1)`).
    pub fn cell_at(&self, x: [f64; 2]) -> usize {
        let n = self.side_cells();
        let clamp = |t: f64| -> usize {
            let c = (t * n as f64) as isize;
            c.clamp(0, n as isize - 1) as usize
        };
        if self.dim == 1 {
            clamp(x[0])
        } else {
            self.index([clamp(x[0]), clamp(x[1])])
        }
    }

    /// Lower-left corner of a cell.
    pub fn cell_origin(&self, index: usize) -> [f64; 2] {
        let c = self.coords(index);
        let h = self.cell_width();
        [c[0] as f64 * h, c[1] as f64 * h]
    }

    /// The whole domain as a box of cells.
    pub fn domain(&self) -> CellBox {
        let n = self.side_cells();
        CellBox { lo: [0, 0], hi: [n, if self.dim == 1 { 1 } else { n }] }
    }

    pub fn refine(&self) -> Result<Grid> {
        Grid::new(self.dim, self.level + 1)
    }
}

/// Axis-parallel box of cells, `lo` inclusive and `hi` exclusive per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellBox {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl CellBox {
    pub fn cell_count(&self) -> usize {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    pub fn is_empty(&self) -> bool {
        self.hi[0] <= self.lo[0] || self.hi[1] <= self.lo[1]
    }

    pub fn volume(&self, grid: &Grid) -> f64 {
        self.cell_count() as f64 * grid.cell_volume()
    }

    pub fn contains(&self, coords: [usize; 2]) -> bool {
        (0..2).all(|a| self.lo[a] <= coords[a] && coords[a] < self.hi[a])
    }

    pub fn intersect(&self, other: &CellBox) -> CellBox {
        let mut out = *self;
        for a in 0..2 {
            out.lo[a] = self.lo[a].max(other.lo[a]);
            out.hi[a] = self.hi[a].min(other.hi[a]).max(out.lo[a]);
        }
        out
    }

    /// Visits the row-major indices of the cells in the box.
    #[inline]
    pub fn for_each_index(&self, grid: &Grid, mut f: impl FnMut(usize)) {
        let n = grid.side_cells();
        for y in self.lo[1]..self.hi[1] {
            let row = y * n;
            for x in self.lo[0]..self.hi[0] {
                f(row + x);
            }
        }
    }

    pub fn indices(&self, grid: &Grid) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cell_count());
        self.for_each_index(grid, |i| out.push(i));
        out
    }
}

/// Member of a dyadic family: level `ℓ`, integer position per axis, and a
/// shift index `s ∈ {0,1,2}` per axis. The cube covers cells
/// `[k·side + ⌊s·side/3⌋, (k+1)·side + ⌊s·side/3⌋)` with `side = 2^(L-ℓ)`
/// cells, clipped to the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicCube {
    pub level: u32,
    pub index: [i64; 2],
    pub shift: [u8; 2],
}

impl DyadicCube {
    pub fn new(level: u32, index: [i64; 2], shift: [u8; 2]) -> Self {
        DyadicCube { level, index, shift }
    }

    /// The unit cube `[0,1)^d`.
    pub fn unit() -> Self {
        DyadicCube { level: 0, index: [0, 0], shift: [0, 0] }
    }

    /// Unshifted dyadic cube of the given level containing `cell`.
    pub fn containing(grid: &Grid, level: u32, cell: usize) -> Self {
        let c = grid.coords(cell);
        let shift_bits = grid.level().saturating_sub(level);
        DyadicCube {
            level,
            index: [(c[0] >> shift_bits) as i64, (c[1] >> shift_bits) as i64],
            shift: [0, 0],
        }
    }

    fn axis_range(&self, grid: &Grid, axis: usize) -> (i64, i64) {
        let side = 1i64 << (grid.level() - self.level);
        let off = self.shift[axis] as i64 * side / 3;
        let start = self.index[axis] * side + off;
        (start, start + side)
    }

    /// Cells covered by the cube after clipping to the domain.
    pub fn cell_box(&self, grid: &Grid) -> Result<CellBox> {
        if self.level > grid.level() {
            return Err(Error::CubeMismatch(alloc::format!(
                "cube level {} exceeds grid level {}",
                self.level,
                grid.level()
            )));
        }
        if self.shift.iter().any(|&s| s > 2) {
            return Err(Error::CubeMismatch(alloc::format!("shift {:?} out of range", self.shift)));
        }
        if grid.dim() == 1 && (self.index[1] != 0 || self.shift[1] != 0) {
            return Err(Error::CubeMismatch("second axis used on a one-dimensional grid".into()));
        }
        let n = grid.side_cells() as i64;
        let mut out = CellBox { lo: [0, 0], hi: [1, 1] };
        for axis in 0..grid.dim() {
            let (a, b) = self.axis_range(grid, axis);
            let (a, b) = (a.clamp(0, n), b.clamp(0, n));
            if b <= a {
                return Err(Error::EmptyCube);
            }
            out.lo[axis] = a as usize;
            out.hi[axis] = b as usize;
        }
        Ok(out)
    }

    /// Side length before clipping.
    pub fn side_length(&self) -> f64 {
        math::exp2i(-(self.level as i32))
    }

    /// `3Q`: the cube enlarged by one side length in every direction, clipped.
    pub fn triple_box(&self, grid: &Grid) -> Result<CellBox> {
        self.cell_box(grid)?;
        let n = grid.side_cells() as i64;
        let side = 1i64 << (grid.level() - self.level);
        let mut out = CellBox { lo: [0, 0], hi: [1, 1] };
        for axis in 0..grid.dim() {
            let (a, b) = self.axis_range(grid, axis);
            out.lo[axis] = (a - side).clamp(0, n) as usize;
            out.hi[axis] = (b + side).clamp(0, n) as usize;
        }
        Ok(out)
    }

    /// The `2^d` dyadic children of an unshifted cube.
    pub fn children(&self, grid: &Grid) -> Result<Vec<DyadicCube>> {
        if self.shift != [0, 0] {
            return Err(Error::CubeMismatch("children are defined for unshifted cubes".into()));
        }
        if self.level >= grid.level() {
            return Err(Error::CubeMismatch("cube is a single cell".into()));
        }
        let ys: &[i64] = if grid.dim() == 1 { &[0] } else { &[0, 1] };
        let mut out = Vec::new();
        for &by in ys {
            for bx in 0..2 {
                let iy = if grid.dim() == 1 { 0 } else { 2 * self.index[1] + by };
                out.push(DyadicCube::new(self.level + 1, [2 * self.index[0] + bx, iy], [0, 0]));
            }
        }
        Ok(out)
    }
}

/// Which cubes take part in a supremum "over all cubes".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilySpec {
    /// Add the one-third shifted dyadic systems.
    pub shifted: bool,
    /// Coarsest level used (0 includes the unit cube).
    pub coarsest: u32,
}

impl FamilySpec {
    pub const DYADIC: FamilySpec = FamilySpec { shifted: false, coarsest: 0 };
    pub const SHIFTED: FamilySpec = FamilySpec { shifted: true, coarsest: 0 };
}

/// One level of one dyadic system: a partition of the domain into clipped
/// cubes of equal (unclipped) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    pub level: u32,
    pub shift: [u8; 2],
    side: usize,
    off: [usize; 2],
}

impl Layer {
    /// Position of the layer cube containing cell coordinate `c` on `axis`.
    #[inline]
    fn position(&self, c: usize, axis: usize) -> i64 {
        (c as i64 - self.off[axis] as i64).div_euclid(self.side as i64)
    }

    #[inline]
    fn interval(&self, k: i64, axis: usize, n: usize) -> (usize, usize) {
        let start = k * self.side as i64 + self.off[axis] as i64;
        let a = start.clamp(0, n as i64) as usize;
        let b = (start + self.side as i64).clamp(0, n as i64) as usize;
        (a, b)
    }

    fn positions(&self, axis: usize, dim: usize) -> core::ops::Range<i64> {
        if axis >= dim {
            return 0..1;
        }
        let first = if self.off[axis] > 0 { -1 } else { 0 };
        first..(1i64 << self.level)
    }
}

/// A cube family on a fixed grid, organised as layers.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFamily {
    grid: Grid,
    spec: FamilySpec,
    layers: Vec<Layer>,
}

impl CubeFamily {
    pub fn new(grid: Grid, spec: FamilySpec) -> Self {
        let mut layers = Vec::new();
        let shifts: &[u8] = if spec.shifted { &[0, 1, 2] } else { &[0] };
        let coarsest = spec.coarsest.min(grid.level());
        for level in coarsest..=grid.level() {
            let side = 1usize << (grid.level() - level);
            for &sy in if grid.dim() == 2 { shifts } else { &[0u8][..] } {
                for &sx in shifts {
                    let shift = [sx, sy];
                    let off = [sx as usize * side / 3, sy as usize * side / 3];
                    // a nonzero shift that rounds to zero cells repeats the
                    // unshifted system on that axis
                    if (0..2).any(|a| shift[a] > 0 && off[a] == 0) {
                        continue;
                    }
                    layers.push(Layer { level, shift, side, off });
                }
            }
        }
        CubeFamily { grid, spec, layers }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> FamilySpec {
        self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Visits every (layer, cube) pair; duplicates across layers are possible
    /// after clipping and are harmless for suprema.
    pub fn for_each_cube(&self, mut f: impl FnMut(&DyadicCube, &CellBox)) {
        let n = self.grid.side_cells();
        let dim = self.grid.dim();
        for layer in &self.layers {
            for ky in layer.positions(1, dim) {
                let (y0, y1) = if dim == 2 { layer.interval(ky, 1, n) } else { (0, 1) };
                if y1 <= y0 {
                    continue;
                }
                for kx in layer.positions(0, dim) {
                    let (x0, x1) = layer.interval(kx, 0, n);
                    if x1 <= x0 {
                        continue;
                    }
                    let cube = DyadicCube::new(layer.level, [kx, ky], layer.shift);
                    f(&cube, &CellBox { lo: [x0, y0], hi: [x1, y1] });
                }
            }
        }
    }

    /// Visits the cubes that meet `region`, passing the full clipped cube box.
    pub fn for_each_cube_meeting(
        &self,
        region: &CellBox,
        mut f: impl FnMut(&DyadicCube, &CellBox),
    ) {
        if region.is_empty() {
            return;
        }
        let n = self.grid.side_cells();
        let dim = self.grid.dim();
        for layer in &self.layers {
            let (ky0, ky1) = if dim == 2 {
                (layer.position(region.lo[1], 1), layer.position(region.hi[1] - 1, 1))
            } else {
                (0, 0)
            };
            let (kx0, kx1) = (layer.position(region.lo[0], 0), layer.position(region.hi[0] - 1, 0));
            for ky in ky0..=ky1 {
                let (y0, y1) = if dim == 2 { layer.interval(ky, 1, n) } else { (0, 1) };
                for kx in kx0..=kx1 {
                    let (x0, x1) = layer.interval(kx, 0, n);
                    if x1 <= x0 || y1 <= y0 {
                        continue;
                    }
                    let cube = DyadicCube::new(layer.level, [kx, ky], layer.shift);
                    f(&cube, &CellBox { lo: [x0, y0], hi: [x1, y1] });
                }
            }
        }
    }

    /// Number of (layer, cube) visits.
    pub fn visit_count(&self) -> usize {
        let mut count = 0;
        self.for_each_cube(|_, _| count += 1);
        count
    }

    /// Supremum of `eval` over the family, keeping the first maximizing cube.
    pub fn sup(&self, mut eval: impl FnMut(&DyadicCube, &CellBox) -> f64) -> ConstantEstimate {
        let mut best = f64::NEG_INFINITY;
        let mut witness = DyadicCube::unit();
        self.for_each_cube(|cube, cells| {
            let v = eval(cube, cells);
            if v > best {
                best = v;
                witness = *cube;
            }
        });
        ConstantEstimate { value: best, witness, family: self.spec, level: self.grid.level() }
    }
}

/// Distinct cubes of the family (distinct clipped cell boxes), coarse first.
pub fn cube_family(grid: &Grid, shifted: bool) -> Vec<DyadicCube> {
    let family = CubeFamily::new(*grid, FamilySpec { shifted, coarsest: 0 });
    let mut seen: Vec<CellBox> = Vec::new();
    let mut out = Vec::new();
    family.for_each_cube(|cube, cells| {
        seen.push(*cells);
        out.push(*cube);
    });
    // stable dedup on the boxes
    let mut order: Vec<usize> = (0..seen.len()).collect();
    order.sort_by(|&a, &b| seen[a].cmp(&seen[b]).then(a.cmp(&b)));
    let mut keep = alloc::vec![false; seen.len()];
    for (j, &i) in order.iter().enumerate() {
        if j == 0 || seen[order[j - 1]] != seen[i] {
            keep[i] = true;
        }
    }
    out.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

/// A supremum over a cube family together with the cube attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantEstimate {
    pub value: f64,
    pub witness: DyadicCube,
    pub family: FamilySpec,
    /// Grid level the estimate was computed at.
    pub level: u32,
}

/// Nonnegative cell-wise constant function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::LengthMismatch { expected: grid.cell_count(), got: values.len() });
        }
        if let Some(cell) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidValue { cell });
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0));
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: alloc::vec![0.0; grid.cell_count()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        GridFunction::new(grid, alloc::vec![c; grid.cell_count()])
    }

    /// Builds values from the cell index.
    pub fn from_cells(grid: Grid, f: impl FnMut(usize) -> f64) -> Result<Self> {
        GridFunction::new(grid, (0..grid.cell_count()).map(f).collect())
    }

    /// `c · χ_box`.
    pub fn indicator(grid: Grid, cells: &CellBox, c: f64) -> Result<Self> {
        let mut values = alloc::vec![0.0; grid.cell_count()];
        cells.for_each_index(&grid, |i| values[i] = c);
        GridFunction::new(grid, values)
    }

    /// Indicator of a cell mask.
    pub fn from_mask(grid: Grid, mask: &[bool]) -> Result<Self> {
        if mask.len() != grid.cell_count() {
            return Err(Error::LengthMismatch { expected: grid.cell_count(), got: mask.len() });
        }
        Ok(GridFunction::from_raw(grid, mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        GridFunction::new(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        GridFunction::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        )
    }

    /// Restriction to a cell box (zero elsewhere).
    pub fn restrict(&self, cells: &CellBox) -> Self {
        let mut values = alloc::vec![0.0; self.values.len()];
        cells.for_each_index(&self.grid, |i| values[i] = self.values[i]);
        GridFunction::from_raw(self.grid, values)
    }

    /// Cells where the function is positive.
    pub fn support(&self) -> Vec<bool> {
        self.values.iter().map(|&v| v > 0.0).collect()
    }
}

/// Strictly positive grid function; also used as the density of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::LengthMismatch { expected: grid.cell_count(), got: values.len() });
        }
        if let Some(cell) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NotPositive { cell });
        }
        Ok(Weight(GridFunction { grid, values }))
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Weight::new(grid, alloc::vec![c; grid.cell_count()])
    }

    pub fn ones(grid: Grid) -> Self {
        Weight(GridFunction { grid, values: alloc::vec![1.0; grid.cell_count()] })
    }

    pub fn from_function(f: GridFunction) -> Result<Self> {
        Weight::new(f.grid, f.values)
    }

    pub fn grid(&self) -> &Grid {
        &self.0.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.0.values
    }

    pub fn as_function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_function(self) -> GridFunction {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values().iter().copied().fold(0.0, f64::max)
    }

    /// `max / min`, finite by construction.
    pub fn dynamic_range(&self) -> f64 {
        self.max() / self.min()
    }

    pub fn pow(&self, e: f64) -> Result<Self> {
        Weight::new(*self.grid(), self.values().iter().map(|&v| math::powf(v, e)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Weight::new(*self.grid(), self.values().iter().map(|&v| v * c).collect())
    }

    /// `∏ wᵢ^{eᵢ}` cell by cell.
    pub fn product(factors: &[(&Weight, f64)]) -> Result<Self> {
        let Some((first, _)) = factors.first() else {
            return Err(crate::error::param("empty product of weights"));
        };
        let grid = *first.grid();
        for (w, _) in factors {
            same_grid(&grid, w.grid())?;
        }
        let values = (0..grid.cell_count())
            .map(|i| {
                factors.iter().fold(1.0, |acc, (w, e)| {
                    if *e == 0.0 {
                        acc
                    } else {
                        acc * math::powf(w.values()[i], *e)
                    }
                })
            })
            .collect();
        Weight::new(grid, values)
    }
}

pub(crate) fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `Σ_{cells in box} f·μ·vol` with compensated summation.
pub(crate) fn box_integral(
    grid: &Grid,
    values: &[f64],
    measure: Option<&[f64]>,
    cells: &CellBox,
) -> f64 {
    let mut acc = Compensated::default();
    match measure {
        Some(mu) => cells.for_each_index(grid, |i| acc.add(values[i] * mu[i])),
        None => cells.for_each_index(grid, |i| acc.add(values[i])),
    }
    acc.value() * grid.cell_volume()
}

/// `μ(box)`, or the Lebesgue measure when `measure` is `None`.
pub(crate) fn box_measure(grid: &Grid, measure: Option<&[f64]>, cells: &CellBox) -> f64 {
    match measure {
        Some(mu) => {
            let mut acc = Compensated::default();
            cells.for_each_index(grid, |i| acc.add(mu[i]));
            acc.value() * grid.cell_volume()
        }
        None => cells.volume(grid),
    }
}

/// `∫_Q f dμ` with `dμ = μ dx` (Lebesgue measure when `mu` is `None`).
pub fn integrate(f: &GridFunction, cube: &DyadicCube, mu: Option<&Weight>) -> Result<f64> {
    if let Some(mu) = mu {
        same_grid(f.grid(), mu.grid())?;
    }
    let cells = cube.cell_box(f.grid())?;
    Ok(box_integral(f.grid(), f.values(), mu.map(|m| m.values()), &cells))
}

/// Discrete essential infimum and supremum over the cells of `Q`.
pub fn ess_bounds(f: &GridFunction, cube: &DyadicCube) -> Result<(f64, f64)> {
    let cells = cube.cell_box(f.grid())?;
    Ok(box_bounds(f.grid(), f.values(), &cells))
}

pub(crate) fn box_bounds(grid: &Grid, values: &[f64], cells: &CellBox) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    cells.for_each_index(grid, |i| {
        lo = lo.min(values[i]);
        hi = hi.max(values[i]);
    });
    (lo, hi)
}

/// `w({f > t})`; Lebesgue measure when `w` is `None`.
pub fn level_measure(f: &GridFunction, t: f64, w: Option<&Weight>) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(crate::error::param("level must be nonnegative"));
    }
    if let Some(w) = w {
        same_grid(f.grid(), w.grid())?;
    }
    let mut acc = Compensated::default();
    for (i, &v) in f.values().iter().enumerate() {
        if v > t {
            acc.add(w.map_or(1.0, |w| w.values()[i]));
        }
    }
    Ok(acc.value() * f.grid().cell_volume())
}
