//! Dense exact linear algebra over a prime field.
//!
//! Every linear map in the crate (arrow actions, morphism components,
//! differentials) is a [`Matrix`] over [`Field`]. Arithmetic is exact, so all
//! identities are checked with `==`, never with a tolerance.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default modulus, the Mersenne prime 2^31 - 1.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// The prime field 𝔽_p. Products of two residues fit in a `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    p: u64,
}

impl Default for Field {
    fn default() -> Self {
        Field { p: DEFAULT_PRIME }
    }
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..(1 << 32)).contains(&p) || !is_prime(p) {
            return Err(Error::Config(format!(
                "modulus {p} must be a prime below 2^32"
            )));
        }
        Ok(Field { p })
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in F_{}", self.p);
        self.pow(a, self.p - 2)
    }

    pub fn from_i64(self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    /// Symmetric representative in (-p/2, p/2], used for display.
    pub fn to_i64(self, v: u64) -> i64 {
        if v > self.p / 2 {
            v as i64 - self.p as i64
        } else {
            v as i64
        }
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Dense row-major matrix over 𝔽_p. `0 × n` and `n × 0` shapes are legal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols)
                .map(|c| self.field.to_i64(self.get(r, c)).to_string())
                .collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Reduced row echelon data: the reduced matrix, its pivot columns, and rank.
pub struct Echelon {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            field,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(field: Field, rows: usize, cols: usize, data: Vec<u64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        let p = field.modulus();
        assert!(data.iter().all(|&x| x < p), "entry out of range");
        Matrix {
            rows,
            cols,
            field,
            data,
        }
    }

    /// Builds from signed integer rows; all rows must have length `cols`.
    pub fn from_rows(field: Field, cols: usize, rows: &[Vec<i64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r.iter().map(|&v| field.from_i64(v)));
        }
        Matrix {
            rows: rows.len(),
            cols,
            field,
            data,
        }
    }

    /// Single column from a vector of residues.
    pub fn column(field: Field, v: &[u64]) -> Self {
        Matrix::from_vec(field, v.len(), 1, v.to_vec())
    }

    pub fn random<R: Rng + ?Sized>(field: Field, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        Matrix {
            rows,
            cols,
            field,
            data,
        }
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v % self.field.modulus();
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    /// Rows as signed integers in the symmetric range.
    pub fn to_signed_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|&v| self.field.to_i64(v)).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "shape mismatch in product: {:?} * {:?}",
            self.shape(),
            other.shape()
        );
        let f = self.field;
        let p = f.modulus();
        let n = other.cols;
        let mut out = vec![0u64; self.rows * n];
        // Accumulate with delayed reduction: each product is < 2^62, so we
        // reduce once the accumulator could exceed 2^63.
        let mut acc = vec![0u64; n];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            let mut pending = 0u32;
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0 {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                for (slot, &b) in acc.iter_mut().zip(orow) {
                    *slot += a * b;
                }
                pending += 1;
                if pending == 2 {
                    acc.iter_mut().for_each(|a| *a %= p);
                    pending = 0;
                }
            }
            for (o, a) in out[r * n..(r + 1) * n].iter_mut().zip(&acc) {
                *o = a % p;
            }
        }
        Matrix {
            rows: self.rows,
            cols: n,
            field: f,
            data: out,
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sum");
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Matrix { data, ..*self.shallow() }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in difference");
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Matrix { data, ..*self.shallow() }
    }

    pub fn scale(&self, s: u64) -> Matrix {
        let f = self.field;
        let data = self.data.iter().map(|&a| f.mul(a, s)).collect();
        Matrix { data, ..*self.shallow() }
    }

    pub fn neg(&self) -> Matrix {
        let f = self.field;
        let data = self.data.iter().map(|&a| f.neg(a)).collect();
        Matrix { data, ..*self.shallow() }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled_assign(&mut self, s: u64, other: &Matrix) {
        assert_eq!(self.shape(), other.shape());
        if s == 0 {
            return;
        }
        let f = self.field;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = (*a + s * b) % f.modulus();
        }
    }

    fn shallow(&self) -> Box<Matrix> {
        Box::new(Matrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            data: Vec::new(),
        })
    }

    pub fn trace(&self) -> u64 {
        assert!(self.is_square());
        (0..self.rows).fold(0, |acc, i| self.field.add(acc, self.get(i, i)))
    }

    pub fn hstack(field: Field, rows: usize, parts: &[&Matrix]) -> Matrix {
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut off = 0;
        for m in parts {
            assert_eq!(m.rows, rows, "hstack row mismatch");
            out.set_block(0, off, m);
            off += m.cols;
        }
        out
    }

    pub fn vstack(field: Field, cols: usize, parts: &[&Matrix]) -> Matrix {
        let rows: usize = parts.iter().map(|m| m.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for m in parts {
            assert_eq!(m.cols, cols, "vstack column mismatch");
            data.extend_from_slice(&m.data);
        }
        Matrix {
            rows,
            cols,
            field,
            data,
        }
    }

    pub fn block_diag(field: Field, parts: &[&Matrix]) -> Matrix {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r, mut c) = (0, 0);
        for m in parts {
            out.set_block(r, c, m);
            r += m.rows;
            c += m.cols;
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(r));
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = Matrix::zeros(self.field, rows, cols);
        for r in 0..rows {
            let src = (r0 + r) * self.cols + c0;
            out.data[r * cols..(r + 1) * cols].copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            field: self.field,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + j] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Reduced row echelon form. Pivots are searched only among the first
    /// `pivot_cols` columns, which lets callers reduce augmented systems.
    pub fn echelon_limited(&self, pivot_cols: usize) -> Echelon {
        let f = self.field;
        let p = f.modulus();
        let cols = self.cols;
        let mut a = self.data.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        let mut nz: Vec<usize> = Vec::with_capacity(cols);
        for c in 0..pivot_cols.min(cols) {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| a[r * cols + c] != 0) else {
                continue;
            };
            if pr != row {
                for j in c..cols {
                    a.swap(pr * cols + j, row * cols + j);
                }
            }
            let inv = f.inv(a[row * cols + c]);
            nz.clear();
            for j in c..cols {
                let v = a[row * cols + j];
                if v != 0 {
                    let v = v * inv % p;
                    a[row * cols + j] = v;
                    nz.push(j);
                }
            }
            let (before, rest) = a.split_at_mut(row * cols);
            let (pivot_row, after) = rest.split_at_mut(cols);
            let eliminate = |target: &mut [u64]| {
                let factor = target[c];
                if factor == 0 {
                    return;
                }
                let m = p - factor;
                for &j in &nz {
                    target[j] = (target[j] + m * pivot_row[j]) % p;
                }
            };
            for chunk in before.chunks_exact_mut(cols) {
                eliminate(chunk);
            }
            for chunk in after.chunks_exact_mut(cols) {
                eliminate(chunk);
            }
            pivots.push(c);
            row += 1;
        }
        Echelon {
            reduced: Matrix {
                rows: self.rows,
                cols,
                field: f,
                data: a,
            },
            pivots,
        }
    }

    pub fn echelon(&self) -> Echelon {
        self.echelon_limited(self.cols)
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // Row reduce whichever orientation has fewer rows to eliminate.
        if self.rows > self.cols {
            self.transpose().echelon().rank()
        } else {
            self.echelon().rank()
        }
    }

    /// Columns form a basis of `{v : self · v = 0}`. Each basis vector has a
    /// single `1` in its free coordinate and zeros in the other free coordinates.
    pub fn kernel_basis(&self) -> Matrix {
        let ech = self.echelon();
        let free: Vec<usize> = free_columns(self.cols, &ech.pivots);
        let mut k = Matrix::zeros(self.field, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            k.data[fc * free.len() + j] = 1;
            for (i, &pc) in ech.pivots.iter().enumerate() {
                let v = ech.reduced.get(i, fc);
                k.data[pc * free.len() + j] = self.field.neg(v);
            }
        }
        k
    }

    /// Solves `self · x = b`; returns `NoSolution` if a column of `b` is not in
    /// the column space of `self`. Free variables are set to zero.
    pub fn solve_right(&self, b: &Matrix) -> Result<Matrix> {
        assert_eq!(self.rows, b.rows, "solve_right: row mismatch");
        let aug = Matrix::hstack(self.field, self.rows, &[self, b]);
        let ech = aug.echelon_limited(self.cols);
        let r = ech.rank();
        for i in r..self.rows {
            if (0..b.cols).any(|j| ech.reduced.get(i, self.cols + j) != 0) {
                return Err(Error::NoSolution);
            }
        }
        let mut x = Matrix::zeros(self.field, self.cols, b.cols);
        for (i, &pc) in ech.pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.data[pc * b.cols + j] = ech.reduced.get(i, self.cols + j);
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let x = self.solve_right(&Matrix::identity(self.field, n)).ok()?;
        // solve_right succeeds for any b in the image; invertibility needs full rank.
        if self.mul(&x) == Matrix::identity(self.field, n) && n == self.rank() {
            Some(x)
        } else {
            None
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// A basis (as columns) of the column space, chosen among the columns.
    pub fn image_basis(&self) -> Matrix {
        let ech = self.echelon();
        self.select_cols(&ech.pivots)
    }

    /// Indices of standard basis vectors that extend the column space of
    /// `self` to the whole ambient space.
    pub fn complement_indices(&self) -> Vec<usize> {
        let n = self.rows;
        let aug = Matrix::hstack(self.field, n, &[self, &Matrix::identity(self.field, n)]);
        let ech = aug.echelon();
        ech.pivots
            .iter()
            .filter(|&&c| c >= self.cols)
            .map(|&c| c - self.cols)
            .collect()
    }

    pub fn pow(&self, mut e: u32) -> Matrix {
        assert!(self.is_square());
        let mut acc = Matrix::identity(self.field, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

fn free_columns(cols: usize, pivots: &[usize]) -> Vec<usize> {
    let mut is_pivot = vec![false; cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..cols).filter(|&c| !is_pivot[c]).collect()
}

/// Coordinates with respect to a fixed full-column-rank basis.
///
/// Precomputes a set of rows on which the basis is invertible so that
/// coordinates of vectors known to lie in the span cost one small product.
#[derive(Clone, Debug)]
pub struct Coordinates {
    basis: Matrix,
    rows: Vec<usize>,
    inverse: Matrix,
}

impl Coordinates {
    pub fn new(basis: &Matrix) -> Self {
        let f = basis.field();
        let ech = basis.transpose().echelon();
        assert_eq!(ech.rank(), basis.cols(), "basis is not linearly independent");
        let rows = ech.pivots.clone();
        let square = basis.select_rows(&rows);
        let inverse = square
            .inverse()
            .unwrap_or_else(|| Matrix::zeros(f, 0, 0));
        Coordinates {
            basis: basis.clone(),
            rows,
            inverse,
        }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Coordinates of the columns of `v`, which must lie in the span.
    pub fn of(&self, v: &Matrix) -> Result<Matrix> {
        let x = self.inverse.mul(&v.select_rows(&self.rows));
        if self.basis.mul(&x) != *v {
            return Err(Error::NoSolution);
        }
        Ok(x)
    }

    /// Same as [`Coordinates::of`] without the membership check.
    pub fn of_unchecked(&self, v: &Matrix) -> Matrix {
        self.inverse.mul(&v.select_rows(&self.rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f() -> Field {
        Field::default()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::identity(f(), 2).rank(), 2);
        assert_eq!(Matrix::zeros(f(), 3, 5).rank(), 0);
        let m = Matrix::from_rows(f(), 2, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Matrix::identity(f(), 3).kernel_basis().cols(), 0);
        assert_eq!(
            Matrix::zeros(f(), 4, 4).kernel_basis(),
            Matrix::identity(f(), 4)
        );
        let k = Matrix::from_rows(f(), 2, &[vec![1, 1]]).kernel_basis();
        assert_eq!(k.to_signed_rows(), vec![vec![-1], vec![1]]);
    }

    #[test]
    fn solve_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = Matrix::random(f(), 3, 2, &mut rng);
        assert_eq!(Matrix::identity(f(), 3).solve_right(&b).unwrap(), b);
        let z = Matrix::zeros(f(), 2, 2);
        assert!(z.solve_right(&z).unwrap().is_zero());
        let a = Matrix::from_rows(f(), 1, &[vec![1], vec![0]]);
        let b = Matrix::from_rows(f(), 1, &[vec![0], vec![1]]);
        assert!(matches!(a.solve_right(&b), Err(Error::NoSolution)));
    }

    #[test]
    fn degenerate_shapes() {
        let a = Matrix::zeros(f(), 0, 3);
        assert_eq!(a.rank(), 0);
        assert_eq!(a.kernel_basis().shape(), (3, 3));
        let b = Matrix::zeros(f(), 3, 0);
        assert_eq!(b.kernel_basis().shape(), (0, 0));
        assert_eq!(a.mul(&Matrix::zeros(f(), 3, 2)).shape(), (0, 2));
        assert_eq!(b.mul(&Matrix::zeros(f(), 0, 2)), Matrix::zeros(f(), 3, 2));
    }

    #[test]
    fn field_rejects_composites() {
        assert!(Field::new(15).is_err());
        assert!(Field::new(1).is_err());
        assert!(Field::new(101).is_ok());
    }

    #[test]
    fn inverse_and_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = Matrix::random(f(), 5, 5, &mut rng);
        let inv = m.inverse().expect("random matrix is invertible");
        assert_eq!(m.mul(&inv), Matrix::identity(f(), 5));
        let basis = Matrix::random(f(), 6, 3, &mut rng);
        let c = Coordinates::new(&basis);
        let x = Matrix::random(f(), 3, 2, &mut rng);
        assert_eq!(c.of(&basis.mul(&x)).unwrap(), x);
    }

    fn small_matrix() -> impl Strategy<Value = Matrix> {
        (0usize..6, 0usize..6, any::<u64>()).prop_map(|(r, c, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Low-rank-ish entries from a small alphabet to exercise dependencies.
            let field = Field::new(7).unwrap();
            let data = (0..r * c).map(|_| rng.gen_range(0..3)).collect();
            Matrix::from_vec(field, r, c, data)
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in small_matrix()) {
            let k = m.kernel_basis();
            prop_assert_eq!(m.rank() + k.cols(), m.cols());
            prop_assert!(m.mul(&k).is_zero());
            prop_assert_eq!(k.rank(), k.cols());
        }

        #[test]
        fn solve_is_exact(m in small_matrix(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = Matrix::random(m.field(), m.cols(), 2, &mut rng);
            let b = m.mul(&x0);
            let x = m.solve_right(&b).unwrap();
            prop_assert_eq!(m.mul(&x), b);
        }
    }
}
