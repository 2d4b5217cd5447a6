//! Fast diagonalization of separable operators `f(Ax (x) I + I (x) Ay)`.
//!
//! Every constant-coefficient operator in the scheme is a function of a
//! Kronecker sum of 1-D second-difference matrices, so it is diagonalized by
//! the tensor product of the 1-D eigenbases. Applying an inverse then costs
//! two dense transforms per direction.

use nalgebra::{DMatrix, SymmetricEigen};

use super::LinearOperator;

/// Eigen-decomposition of a symmetric 1-D matrix.
#[derive(Debug, Clone)]
pub struct SymEig1d {
    /// Orthonormal eigenvectors as columns.
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

impl SymEig1d {
    pub fn new(m: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(m);
        Self { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the eigenvalue closest to zero.
    pub fn null_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() < self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    /// Cell-centered second difference with zero-flux ends.
    pub fn neumann_cells(n: usize, h: f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        let ih2 = 1.0 / (h * h);
        for i in 0..n {
            if i > 0 {
                m[(i, i - 1)] = ih2;
                m[(i, i)] -= ih2;
            }
            if i + 1 < n {
                m[(i, i + 1)] = ih2;
                m[(i, i)] -= ih2;
            }
        }
        Self::new(m)
    }

    /// `[1, -2, 1] / h^2` on `n` interior nodes with zero end values.
    pub fn dirichlet_nodes(n: usize, h: f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        let ih2 = 1.0 / (h * h);
        for i in 0..n {
            m[(i, i)] = -2.0 * ih2;
            if i > 0 {
                m[(i, i - 1)] = ih2;
            }
            if i + 1 < n {
                m[(i, i + 1)] = ih2;
            }
        }
        Self::new(m)
    }

    /// Cell-centered second difference with a zero value half a cell beyond
    /// each end (end diagonal `-3/h^2`).
    pub fn dirichlet_cells(n: usize, h: f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        let ih2 = 1.0 / (h * h);
        for i in 0..n {
            m[(i, i)] = -2.0 * ih2;
            if i > 0 {
                m[(i, i - 1)] = ih2;
            } else {
                m[(i, i)] -= ih2;
            }
            if i + 1 < n {
                m[(i, i + 1)] = ih2;
            } else {
                m[(i, i)] -= ih2;
            }
        }
        Self::new(m)
    }
}

/// Tensor-product basis for a 2-D block stored row-major (`y` outer).
#[derive(Debug, Clone)]
pub struct Separable2d {
    pub x: SymEig1d,
    pub y: SymEig1d,
}

impl Separable2d {
    pub fn new(x: SymEig1d, y: SymEig1d) -> Self {
        Self { x, y }
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out = Q diag(f(lx_i, ly_j)) Q^T data` with `Q = Qx (x) Qy`.
    pub fn apply_spectral(&self, data: &[f64], out: &mut [f64], f: impl Fn(usize, usize) -> f64) {
        let (nx, ny) = (self.x.len(), self.y.len());
        debug_assert_eq!(data.len(), nx * ny);
        // rows = y, cols = x
        let m = DMatrix::from_row_slice(ny, nx, data);
        let mut hat = self.y.vectors.transpose() * m * &self.x.vectors;
        for i in 0..nx {
            for j in 0..ny {
                hat[(j, i)] *= f(i, j);
            }
        }
        let back = &self.y.vectors * hat * self.x.vectors.transpose();
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = back[(j, i)];
            }
        }
    }
}

/// `x -> Q diag(symbol) Q^T x` as a [`LinearOperator`].
pub struct SpectralOperator<'a, F> {
    pub basis: &'a Separable2d,
    pub symbol: F,
}

impl<F: Fn(usize, usize) -> f64> LinearOperator for SpectralOperator<'_, F> {
    fn dim(&self) -> usize {
        self.basis.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.basis.apply_spectral(x, y, &self.symbol);
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}
