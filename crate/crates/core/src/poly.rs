//! Univariate polynomials over 𝔽_p, just enough to split endomorphisms:
//! Krylov minimal polynomials, gcds, and factor finding.

use rand::Rng;

use crate::exactla::{Field, Matrix};

/// Coefficients from the constant term upward; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1] }
    }

    pub fn x() -> Self {
        Poly { coeffs: vec![0, 1] }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lead(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn monic(&self, f: Field) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = f.inv(self.lead());
        Poly::new(self.coeffs.iter().map(|&c| f.mul(c, inv)).collect())
    }

    pub fn add(&self, other: &Poly, f: Field) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                f.add(a, b)
            })
            .collect();
        Poly::new(c)
    }

    pub fn sub(&self, other: &Poly, f: Field) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                f.sub(a, b)
            })
            .collect();
        Poly::new(c)
    }

    pub fn mul(&self, other: &Poly, f: Field) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] = f.add(c[i + j], f.mul(a, b));
            }
        }
        Poly::new(c)
    }

    pub fn divrem(&self, d: &Poly, f: Field) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let inv = f.inv(d.lead());
        let mut r = self.coeffs.clone();
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = f.mul(r[i + dd], inv);
            q[i] = c;
            if c == 0 {
                continue;
            }
            for (j, &b) in d.coeffs.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(c, b));
            }
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn rem(&self, d: &Poly, f: Field) -> Poly {
        self.divrem(d, f).1
    }

    pub fn gcd(&self, other: &Poly, f: Field) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn derivative(&self, f: Field) -> Poly {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| f.mul(a, i as u64 % f.modulus()))
            .collect();
        Poly::new(c)
    }

    /// `self^e mod m`.
    pub fn powmod(&self, mut e: u64, m: &Poly, f: Field) -> Poly {
        let mut acc = Poly::one().rem(m, f);
        let mut base = self.rem(m, f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f).rem(m, f);
            }
            base = base.mul(&base, f).rem(m, f);
            e >>= 1;
        }
        acc
    }

    /// Evaluates the polynomial at a square matrix (Horner's rule).
    pub fn eval_matrix(&self, a: &Matrix) -> Matrix {
        let f = a.field();
        let n = a.rows();
        let mut acc = Matrix::zeros(f, n, n);
        let id = Matrix::identity(f, n);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(a);
            acc.add_scaled_assign(c, &id);
        }
        acc
    }
}

/// Minimal polynomial of `a` (monic), via Krylov sequences of the standard basis.
pub fn min_poly(a: &Matrix) -> Poly {
    let f = a.field();
    let n = a.rows();
    let mut acc = Poly::one();
    for i in 0..n {
        let mut e = vec![0u64; n];
        e[i] = 1;
        let v = Matrix::column(f, &e);
        // Skip vectors already killed by the running polynomial.
        if acc.eval_matrix(a).mul(&v).is_zero() {
            continue;
        }
        let q = krylov_poly(a, &v);
        let g = acc.gcd(&q, f);
        acc = acc.mul(&q, f).divrem(&g, f).0.monic(f);
    }
    acc
}

/// Monic polynomial of least degree annihilating `v` under `a`.
pub fn krylov_poly(a: &Matrix, v: &Matrix) -> Poly {
    let f = a.field();
    let n = a.rows();
    let mut vecs: Vec<Matrix> = vec![v.clone()];
    loop {
        let k = vecs.len();
        let cols: Vec<&Matrix> = vecs.iter().collect();
        let stack = Matrix::hstack(f, n, &cols);
        let next = a.mul(vecs.last().expect("nonempty"));
        if let Ok(x) = stack.solve_right(&next) {
            let mut c: Vec<u64> = (0..k).map(|i| f.neg(x.get(i, 0))).collect();
            c.push(1);
            return Poly::new(c);
        }
        vecs.push(next);
    }
}

/// A monic divisor `F` of the squarefree part of `q` such that `F` shares
/// some but not all irreducible factors with `q`. `None` when `q` is a power
/// of a single irreducible.
pub fn proper_factor<R: Rng + ?Sized>(q: &Poly, f: Field, rng: &mut R) -> Option<Poly> {
    let q = q.monic(f);
    let g = q.gcd(&q.derivative(f), f);
    let rad = if g.degree() == Some(0) {
        q.clone()
    } else {
        q.divrem(&g, f).0.monic(f)
    };
    let n = rad.degree()?;
    if n <= 1 {
        return None;
    }
    let p = f.modulus();
    let x = Poly::x();
    let mut h = x.clone();
    for d in 1..=n {
        h = h.powmod(p, &rad, f);
        let part = rad.gcd(&h.sub(&x, f), f);
        let dp = part.degree().unwrap_or(0);
        if dp == 0 {
            continue;
        }
        if dp < n {
            return Some(part);
        }
        // Every irreducible factor has degree d.
        if n == d {
            return None;
        }
        return equal_degree_split(&rad, d, f, rng);
    }
    None
}

fn equal_degree_split<R: Rng + ?Sized>(q: &Poly, d: usize, f: Field, rng: &mut R) -> Option<Poly> {
    let n = q.degree()?;
    let p = f.modulus();
    for _ in 0..64 {
        let a = Poly::new((0..n).map(|_| f.random(rng)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let g0 = a.gcd(q, f);
        if g0.degree().is_some_and(|k| k > 0 && k < n) {
            return Some(g0);
        }
        let b = if p == 2 {
            // Absolute trace a + a^2 + ... + a^(2^(d-1)).
            let mut t = a.rem(q, f);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mul(&t, f).rem(q, f);
                acc = acc.add(&t, f);
            }
            acc
        } else {
            let mut t = a.rem(q, f);
            let mut norm = t.clone();
            for _ in 1..d {
                t = t.powmod(p, q, f);
                norm = norm.mul(&t, f).rem(q, f);
            }
            norm.powmod((p - 1) / 2, q, f).sub(&Poly::one(), f)
        };
        let g = b.gcd(q, f);
        if g.degree().is_some_and(|k| k > 0 && k < n) {
            return Some(g);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn poly_from(f: Field, c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&v| f.from_i64(v)).collect())
    }

    #[test]
    fn divrem_roundtrip() {
        let f = Field::new(101).unwrap();
        let a = poly_from(f, &[3, 0, 5, 7, 1]);
        let b = poly_from(f, &[1, 2, 1]);
        let (q, r) = a.divrem(&b, f);
        assert_eq!(q.mul(&b, f).add(&r, f), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn min_poly_of_diagonal() {
        let f = Field::new(101).unwrap();
        let a = Matrix::from_rows(f, 3, &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 5]]);
        // (x-2)(x-5) = x^2 - 7x + 10
        assert_eq!(min_poly(&a), poly_from(f, &[10, -7, 1]));
    }

    #[test]
    fn factor_finding() {
        let f = Field::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // (x-1)(x-2)(x-3): all linear, found by the equal-degree split.
        let q = poly_from(f, &[-1, 1])
            .mul(&poly_from(f, &[-2, 1]), f)
            .mul(&poly_from(f, &[-3, 1]), f);
        let g = proper_factor(&q, f, &mut rng).unwrap();
        assert!(q.rem(&g, f).is_zero());
        // x^2 + 1 has no roots mod 103 (103 = 3 mod 4): irreducible.
        let f = Field::new(103).unwrap();
        assert!(proper_factor(&poly_from(f, &[1, 0, 1]), f, &mut rng).is_none());
        // (x^2+1)(x-4): mixed degrees.
        let q = poly_from(f, &[1, 0, 1]).mul(&poly_from(f, &[-4, 1]), f);
        let g = proper_factor(&q, f, &mut rng).unwrap();
        assert_eq!(g, poly_from(f, &[-4, 1]));
        // A prime power has no proper factor.
        let q = poly_from(f, &[-4, 1]).mul(&poly_from(f, &[-4, 1]), f);
        assert!(proper_factor(&q, f, &mut rng).is_none());
    }
}
