//! Dense complex matrices, reproducible RNG streams, and the few
//! linear-algebra kernels the simulator needs.
//!
//! Matrices are small (tens of rows, hundreds of columns), so everything is
//! row-major `Vec<Complex64>` with straightforward loops. The solver is a
//! complex Cholesky factorization on Hermitian positive definite systems,
//! which covers every Gram matrix this crate produces.
//!
//! Randomness comes from ChaCha8 keyed by a root seed, with one keystream
//! per stream index. Streams with the same `(seed, index)` are bitwise
//! reproducible and different indices never overlap, which is what makes
//! parallel Monte Carlo runs independent of worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Conditioning bound under which the accuracy contracts here are guaranteed
/// (e.g. the pseudoinverse residual below). Factorization itself only fails
/// hard when positive definiteness is lost: worse-conditioned inputs still
/// produce an answer, just with weaker accuracy.
pub const MAX_SAFE_CONDITION: f64 = 1e8;

// ── Matrices ────────────────────────────────────────────────────────────────

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_norm_sqr(&self, i: usize) -> f64 {
        self.row(i).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn col_norm_sqr(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self[(i, j)].norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Plain triple-loop product; panics on inner-dimension mismatch.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

// ── RNG streams ─────────────────────────────────────────────────────────────

/// One reproducible random stream out of a family keyed by a root seed.
///
/// Equal `(seed, index)` pairs always yield the identical draw sequence;
/// distinct indices select disjoint ChaCha8 keystreams, so realizations can
/// be evaluated in any order or in parallel without coupling.
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Standard normal draw (Ziggurat).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw from `[lo, hi)`; degenerate bounds return `lo`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    /// Circularly symmetric complex Gaussian with E[|z|^2] = `variance`,
    /// drawn as two real normals at half the variance (real part first).
    #[inline]
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let s = (variance / 2.0).sqrt();
        let re = s * self.standard_normal();
        let im = s * self.standard_normal();
        Complex64::new(re, im)
    }
}

/// Derive stream `index` of the family keyed by `seed`.
pub fn derive_stream(seed: u64, index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    RngStream { seed, index, rng }
}

/// Matrix of i.i.d. complex Gaussian entries, filled row by row.
pub fn sample_complex_gaussian_matrix(
    rows: usize,
    cols: usize,
    variance: f64,
    stream: &mut RngStream,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| stream.complex_gaussian(variance))
}

// ── Kernels ─────────────────────────────────────────────────────────────────

/// Gram matrix `H H^H`, built symmetrically so it is Hermitian to the bit:
/// the lower triangle is the conjugate of the upper, diagonals are real.
pub fn gram(h: &ComplexMatrix) -> ComplexMatrix {
    let k = h.rows();
    let mut g = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        g[(i, i)] = Complex64::new(h.row_norm_sqr(i), 0.0);
        for j in i + 1..k {
            let mut acc = Complex64::ZERO;
            for (a, b) in h.row(i).iter().zip(h.row(j)) {
                acc += a * b.conj();
            }
            g[(i, j)] = acc;
            g[(j, i)] = acc.conj();
        }
    }
    g
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
/// A non-positive (or non-finite) pivot means `a` is not positive definite;
/// the error carries the pivot index where factorization broke down.
fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for p in 0..j {
            d -= l[(j, p)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::SingularMatrix { pivot: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut acc = a[(i, j)];
            for p in 0..j {
                acc -= l[(i, p)] * l[(j, p)].conj();
            }
            l[(i, j)] = acc / djj;
        }
    }
    Ok(l)
}

/// Solve `A X = B` for Hermitian positive definite `A` via Cholesky.
pub fn hermitian_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "hermitian_solve expects square A, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    let n = a.rows();
    let l = cholesky(a)?;
    let mut x = b.clone();
    // Forward: L Y = B.
    for i in 0..n {
        for c in 0..x.cols() {
            let mut acc = x[(i, c)];
            for p in 0..i {
                acc -= l[(i, p)] * x[(p, c)];
            }
            x[(i, c)] = acc / l[(i, i)].re;
        }
    }
    // Backward: L^H X = Y.
    for i in (0..n).rev() {
        for c in 0..x.cols() {
            let mut acc = x[(i, c)];
            for p in i + 1..n {
                acc -= l[(p, i)].conj() * x[(p, c)];
            }
            x[(i, c)] = acc / l[(i, i)].re;
        }
    }
    Ok(x)
}

/// Right pseudoinverse `H^H (H H^H)^{-1}` of a wide matrix (rows < cols).
///
/// For `condition(H H^H) <= MAX_SAFE_CONDITION` the residual satisfies
/// `||H pinv(H) - I||_F <= 1e-8 * sqrt(rows)`.
pub fn right_pseudoinverse(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h.rows() >= h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "right pseudoinverse needs a wide matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let inv = hermitian_solve(&gram(h), &ComplexMatrix::identity(h.rows()))?;
    Ok(h.adjoint().mul(&inv))
}
