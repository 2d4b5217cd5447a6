//! Uniform MAC (marker-and-cell) grid geometry and staggered field storage.
//!
//! Layout on an `nx × ny` cell grid with spacings `h`, `k`:
//!
//! | location | points                  | dims                | houses        |
//! |----------|-------------------------|---------------------|---------------|
//! | center   | `(x_{i+1/2}, y_{j+1/2})` | `nx × ny`           | Z, W, P       |
//! | x-face   | `(x_i, y_{j+1/2})`       | `(nx+1) × ny`       | U1            |
//! | y-face   | `(x_{i+1/2}, y_j)`       | `nx × (ny+1)`       | U2            |
//! | corner   | `(x_i, y_j)`             | `(nx+1) × (ny+1)`   | mixed terms   |
//!
//! All fields are stored row-major with the y-index outer: `data[j * cols + i]`.

use std::fmt;
use std::marker::PhantomData;
use std::ops::{Index, IndexMut};

use crate::error::{ChnsError, Result};

/// Uniform staggered grid on `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub h: f64,
    pub k: f64,
}

impl StaggeredGrid {
    pub fn new(nx: usize, ny: usize, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(ChnsError::Validation {
                key: "nx/ny".into(),
                reason: format!("need at least 2 cells per direction, got {nx}x{ny}"),
            });
        }
        if !(x_hi > x_lo) || !(y_hi > y_lo) || !x_lo.is_finite() || !y_hi.is_finite() {
            return Err(ChnsError::Validation {
                key: "bounds".into(),
                reason: format!("empty domain [{x_lo},{x_hi}]x[{y_lo},{y_hi}]"),
            });
        }
        Ok(Self {
            nx,
            ny,
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            h: (x_hi - x_lo) / nx as f64,
            k: (y_hi - y_lo) / ny as f64,
        })
    }

    /// Unit square with `n × n` cells.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 0.0, 1.0, 0.0, 1.0)
    }

    /// Node coordinate `x_i`.
    #[inline]
    pub fn x_node(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.h
    }

    #[inline]
    pub fn y_node(&self, j: usize) -> f64 {
        self.y_lo + j as f64 * self.k
    }

    /// Cell-center coordinate `x_{i+1/2}`.
    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn y_center(&self, j: usize) -> f64 {
        self.y_lo + (j as f64 + 0.5) * self.k
    }

    /// Dual spacing `h_i`: `h` in the interior, `h/2` at the two boundary nodes.
    #[inline]
    pub fn h_node(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx {
            0.5 * self.h
        } else {
            self.h
        }
    }

    #[inline]
    pub fn k_node(&self, j: usize) -> f64 {
        if j == 0 || j == self.ny {
            0.5 * self.k
        } else {
            self.k
        }
    }

    pub fn area(&self) -> f64 {
        (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)
    }

    /// The grid with every cell split into four.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx,
            ny: 2 * self.ny,
            h: 0.5 * self.h,
            k: 0.5 * self.k,
            ..*self
        }
    }

    /// True when `fine` is the exact 2x refinement of `self`.
    pub fn is_refined_by(&self, fine: &StaggeredGrid) -> bool {
        let tol = 1e-12 * (self.x_hi - self.x_lo).abs().max(self.y_hi - self.y_lo);
        fine.nx == 2 * self.nx
            && fine.ny == 2 * self.ny
            && (fine.x_lo - self.x_lo).abs() <= tol
            && (fine.x_hi - self.x_hi).abs() <= tol
            && (fine.y_lo - self.y_lo).abs() <= tol
            && (fine.y_hi - self.y_hi).abs() <= tol
    }

    pub fn cell(&self) -> CellField {
        Field::zeros(self)
    }

    pub fn xface(&self) -> XFaceField {
        Field::zeros(self)
    }

    pub fn yface(&self) -> YFaceField {
        Field::zeros(self)
    }

    pub fn corner(&self) -> CornerField {
        Field::zeros(self)
    }
}

/// A staggered location: determines field dimensions and sample coordinates.
pub trait Location: Copy + fmt::Debug + Default + PartialEq + 'static {
    const NAME: &'static str;
    /// `(cols, rows)` = (x-count, y-count).
    fn dims(g: &StaggeredGrid) -> (usize, usize);
    fn coords(g: &StaggeredGrid, i: usize, j: usize) -> (f64, f64);
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Center;
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct XFace;
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct YFace;
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Corner;

impl Location for Center {
    const NAME: &'static str = "center";
    fn dims(g: &StaggeredGrid) -> (usize, usize) {
        (g.nx, g.ny)
    }
    fn coords(g: &StaggeredGrid, i: usize, j: usize) -> (f64, f64) {
        (g.x_center(i), g.y_center(j))
    }
}

impl Location for XFace {
    const NAME: &'static str = "x-face";
    fn dims(g: &StaggeredGrid) -> (usize, usize) {
        (g.nx + 1, g.ny)
    }
    fn coords(g: &StaggeredGrid, i: usize, j: usize) -> (f64, f64) {
        (g.x_node(i), g.y_center(j))
    }
}

impl Location for YFace {
    const NAME: &'static str = "y-face";
    fn dims(g: &StaggeredGrid) -> (usize, usize) {
        (g.nx, g.ny + 1)
    }
    fn coords(g: &StaggeredGrid, i: usize, j: usize) -> (f64, f64) {
        (g.x_center(i), g.y_node(j))
    }
}

impl Location for Corner {
    const NAME: &'static str = "corner";
    fn dims(g: &StaggeredGrid) -> (usize, usize) {
        (g.nx + 1, g.ny + 1)
    }
    fn coords(g: &StaggeredGrid, i: usize, j: usize) -> (f64, f64) {
        (g.x_node(i), g.y_node(j))
    }
}

/// Scalar field sampled at one staggered location.
#[derive(Clone, PartialEq)]
pub struct Field<L: Location> {
    cols: usize,
    rows: usize,
    data: Vec<f64>,
    _loc: PhantomData<L>,
}

pub type CellField = Field<Center>;
pub type XFaceField = Field<XFace>;
pub type YFaceField = Field<YFace>;
pub type CornerField = Field<Corner>;

impl<L: Location> fmt::Debug for Field<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field<{}>({}x{}) {:?}", L::NAME, self.cols, self.rows, self.data)
    }
}

impl<L: Location> Field<L> {
    pub fn zeros(g: &StaggeredGrid) -> Self {
        Self::constant(g, 0.0)
    }

    pub fn constant(g: &StaggeredGrid, c: f64) -> Self {
        let (cols, rows) = L::dims(g);
        Self { cols, rows, data: vec![c; cols * rows], _loc: PhantomData }
    }

    /// Sample `f(x, y)` at every point of this location.
    pub fn from_fn(g: &StaggeredGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_index_fn(g, |i, j| {
            let (x, y) = L::coords(g, i, j);
            f(x, y)
        })
    }

    pub fn from_index_fn(g: &StaggeredGrid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let (cols, rows) = L::dims(g);
        let mut data = Vec::with_capacity(cols * rows);
        for j in 0..rows {
            for i in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { cols, rows, data, _loc: PhantomData }
    }

    pub fn from_vec(g: &StaggeredGrid, data: Vec<f64>) -> Result<Self> {
        let (cols, rows) = L::dims(g);
        if data.len() != cols * rows {
            return Err(ChnsError::ShapeMismatch {
                what: L::NAME,
                expected: (cols, rows),
                found_len: data.len(),
            });
        }
        Ok(Self { cols, rows, data, _loc: PhantomData })
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Shape check against a grid.
    pub fn check(&self, g: &StaggeredGrid) -> Result<()> {
        let (cols, rows) = L::dims(g);
        if (cols, rows) != (self.cols, self.rows) {
            return Err(ChnsError::ShapeMismatch {
                what: L::NAME,
                expected: (cols, rows),
                found_len: self.data.len(),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.data.len(), other.data.len());
        Self {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone()
        }
    }

    /// `a * self + b * other`
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn fill(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v = c);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<L: Location> Index<(usize, usize)> for Field<L> {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.cols && j < self.rows);
        &self.data[j * self.cols + i]
    }
}

impl<L: Location> IndexMut<(usize, usize)> for Field<L> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.cols && j < self.rows);
        &mut self.data[j * self.cols + i]
    }
}

/// A staggered velocity `(U1, U2)`. Wall-normal components vanish on walls.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub u1: XFaceField,
    pub u2: YFaceField,
}

impl Velocity {
    pub fn zeros(g: &StaggeredGrid) -> Self {
        Self { u1: g.xface(), u2: g.yface() }
    }

    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        Self { u1: self.u1.lincomb(a, &other.u1, b), u2: self.u2.lincomb(a, &other.u2, b) }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { u1: self.u1.scale(a), u2: self.u2.scale(a) }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.u1.axpy(a, &other.u1);
        self.u2.axpy(a, &other.u2);
    }

    /// Zero the wall-normal components (`U1` on x-walls, `U2` on y-walls).
    pub fn enforce_walls(&mut self) {
        let (c1, r1) = (self.u1.cols(), self.u1.rows());
        for j in 0..r1 {
            self.u1[(0, j)] = 0.0;
            self.u1[(c1 - 1, j)] = 0.0;
        }
        let (c2, r2) = (self.u2.cols(), self.u2.rows());
        for i in 0..c2 {
            self.u2[(i, 0)] = 0.0;
            self.u2[(i, r2 - 1)] = 0.0;
        }
    }

    pub fn walls_are_zero(&self) -> bool {
        let mut w = self.clone();
        w.enforce_walls();
        w == *self
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    /// Number of interior (unknown) velocity values.
    pub fn interior_len(g: &StaggeredGrid) -> usize {
        (g.nx - 1) * g.ny + g.nx * (g.ny - 1)
    }

    /// Pack interior faces (x-faces `i=1..nx-1`, then y-faces `j=1..ny-1`).
    pub fn pack_interior(&self, out: &mut [f64]) {
        let g_nx = self.u2.cols();
        let g_ny = self.u1.rows();
        let mut n = 0;
        for j in 0..g_ny {
            for i in 1..g_nx {
                out[n] = self.u1[(i, j)];
                n += 1;
            }
        }
        for j in 1..g_ny {
            for i in 0..g_nx {
                out[n] = self.u2[(i, j)];
                n += 1;
            }
        }
        debug_assert_eq!(n, out.len());
    }

    pub fn to_interior_vec(&self) -> Vec<f64> {
        let g_nx = self.u2.cols();
        let g_ny = self.u1.rows();
        let mut v = vec![0.0; (g_nx - 1) * g_ny + g_nx * (g_ny - 1)];
        self.pack_interior(&mut v);
        v
    }

    /// Inverse of [`Velocity::pack_interior`]; wall values set to zero.
    pub fn from_interior(g: &StaggeredGrid, v: &[f64]) -> Self {
        let mut u = Self::zeros(g);
        let mut n = 0;
        for j in 0..g.ny {
            for i in 1..g.nx {
                u.u1[(i, j)] = v[n];
                n += 1;
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                u.u2[(i, j)] = v[n];
                n += 1;
            }
        }
        debug_assert_eq!(n, v.len());
        u
    }
}
