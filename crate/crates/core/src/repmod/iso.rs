use rand::Rng;
use sha2::{Digest, Sha256};

use super::hom::Presentation;
use super::{same_algebra, Module, Morphism};

const TRIALS: usize = 20;

/// A verified isomorphism `M → N`.
#[derive(Clone, Debug)]
pub struct IsoWitness {
    pub map: Morphism,
}

impl IsoWitness {
    /// SHA-256 over the witness entries, for compact reporting.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.map.components {
            h.update((c.rows() as u64).to_le_bytes());
            h.update((c.cols() as u64).to_le_bytes());
            for &x in c.data() {
                h.update(x.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Cheap necessary conditions: equal dimension vectors and equal ranks of
/// every arrow matrix.
pub fn iso_invariants_match(m: &Module, n: &Module) -> bool {
    same_algebra(m.algebra(), n.algebra())
        && m.dims() == n.dims()
        && m.actions()
            .iter()
            .zip(n.actions())
            .all(|(a, b)| a.rank() == b.rank())
}

/// Decides `M ≅ N`. A positive answer carries a verified witness; a negative
/// answer means no random element of `Hom(M, N)` in [`TRIALS`] draws was
/// invertible, which happens for isomorphic modules with probability at
/// most `(dim M / p)^TRIALS`.
pub fn is_isomorphic<R: Rng + ?Sized>(m: &Module, n: &Module, rng: &mut R) -> Option<IsoWitness> {
    if !iso_invariants_match(m, n) {
        return None;
    }
    if m.is_zero() {
        return Some(IsoWitness {
            map: Morphism::zero(m, n),
        });
    }
    if m == n {
        return Some(IsoWitness {
            map: Morphism::identity(m),
        });
    }
    let pres = Presentation::of(m);
    if pres.cover.top_dims() != super::top_and_cover(n).top_dims() {
        return None;
    }
    let basis = pres.hom_basis(n);
    if basis.is_empty() {
        return None;
    }
    let f = m.field();
    for _ in 0..TRIALS {
        let mut x = Morphism::zero(m, n);
        for b in &basis {
            x = x.add(&b.scale(f.random(rng)));
        }
        if x.is_iso() && x.check(m, n).is_ok() {
            return Some(IsoWitness { map: x });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::exactla::Field;
    use crate::quiver::Algebra;
    use crate::repmod::syzygy;

    fn alg_a() -> Arc<Algebra> {
        Algebra::builtin("A", Field::default()).unwrap()
    }

    #[test]
    fn iso_examples() {
        let a = alg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s3 = Module::simple(&a, 2);
        let s4 = Module::simple(&a, 3);
        let w = is_isomorphic(&s3, &s3, &mut rng).unwrap();
        assert_eq!(w.map, Morphism::identity(&s3));
        assert!(is_isomorphic(&s3, &s4, &mut rng).is_none());
        let omega = syzygy(&s3);
        let w = is_isomorphic(&omega, &Module::simple(&a, 0), &mut rng).unwrap();
        w.map.check(&omega, &Module::simple(&a, 0)).unwrap();
        assert_eq!(w.digest().len(), 64);
    }

    #[test]
    fn conjugates_are_isomorphic() {
        let a = alg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = Module::direct_sum(&[
            &Module::projective(&a, 1),
            &Module::simple(&a, 2),
            &Module::projective(&a, 0),
        ])
        .unwrap();
        let (c, _) = m.random_conjugate(&mut rng);
        let w = is_isomorphic(&m, &c, &mut rng).unwrap();
        assert!(w.map.is_iso());
        w.map.check(&m, &c).unwrap();
    }

    #[test]
    fn same_dims_different_structure() {
        let a = alg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // P3 versus S3 ⊕ S1: same dimension vector, different arrow ranks.
        let p3 = Module::projective(&a, 2);
        let split = Module::direct_sum(&[&Module::simple(&a, 2), &Module::simple(&a, 0)]).unwrap();
        assert_eq!(p3.dims(), split.dims());
        assert!(is_isomorphic(&p3, &split, &mut rng).is_none());
    }
}
