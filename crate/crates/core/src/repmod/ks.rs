//! Krull–Schmidt multiplicities without decomposing.
//!
//! For an indecomposable `Z` with `End(Z)/rad = K`, the multiplicity of `Z`
//! in `M` equals the rank of the pairing
//! `Hom(Z, M) × Hom(M, Z) → K, (f, g) ↦ tr(g ∘ f) / dim Z`,
//! since radical endomorphisms are nilpotent and have trace zero. This scales
//! to modules far too large to decompose directly.

use crate::error::{Error, Result};
use crate::exactla::Matrix;

use super::hom::Presentation;
use super::Module;

fn check_local(z: &Module) -> Result<()> {
    let f = z.field();
    if (f.modulus() as usize) <= z.total_dim() {
        return Err(Error::Config(format!(
            "prime {} must exceed dim Z = {}",
            f.modulus(),
            z.total_dim()
        )));
    }
    let end = Presentation::of(z).hom_basis(z);
    if end.len() > 1 {
        let k = end.len();
        let mut g = Matrix::zeros(f, k, k);
        for i in 0..k {
            for j in 0..k {
                g.set(i, j, end[i].compose(&end[j]).trace());
            }
        }
        if g.rank() != 1 {
            return Err(Error::Invalid(format!(
                "module with dims {} is not split local",
                z.dims_string()
            )));
        }
    }
    Ok(())
}

fn pairing_rank(z: &Module, z_pres: &Presentation, m: &Module, m_pres: &Presentation) -> usize {
    let f = m.field();
    let into_m = z_pres.hom_basis(m);
    let from_m = m_pres.hom_basis(z);
    if into_m.is_empty() || from_m.is_empty() {
        return 0;
    }
    let len: usize = (0..m.dims().len()).map(|w| z.dim(w) * m.dim(w)).sum();
    // tr(g ∘ f) = Σ_w Σ_{a,b} g_w[a,b] f_w[b,a].
    let mut gm = Matrix::zeros(f, from_m.len(), len);
    for (r, g) in from_m.iter().enumerate() {
        let mut c = 0;
        for comp in &g.components {
            for a in 0..comp.rows() {
                for b in 0..comp.cols() {
                    gm.set(r, c, comp.get(a, b));
                    c += 1;
                }
            }
        }
    }
    let mut fm = Matrix::zeros(f, len, into_m.len());
    for (col, h) in into_m.iter().enumerate() {
        let mut c = 0;
        for comp in &h.components {
            // comp is dim M_w × dim Z_w; visit (b, a) in the order g's (a, b) was laid out.
            for a in 0..comp.cols() {
                for b in 0..comp.rows() {
                    fm.set(c, col, comp.get(b, a));
                    c += 1;
                }
            }
        }
    }
    gm.mul(&fm).rank()
}

/// Multiplicity of the split-local indecomposable `z` as a summand of `m`.
pub fn multiplicity(z: &Module, m: &Module) -> Result<usize> {
    check_local(z)?;
    Ok(pairing_rank(z, &Presentation::of(z), m, &Presentation::of(m)))
}

/// Multiplicities of a list of pairwise non-isomorphic candidates in `M`.
#[derive(Clone, Debug)]
pub struct KsProfile {
    pub multiplicities: Vec<usize>,
    /// `Σ μ_i · dim Z_i = dim M`: the candidates account for all of `M`.
    pub complete: bool,
}

impl KsProfile {
    pub fn compute(m: &Module, candidates: &[Module]) -> Result<Self> {
        let m_pres = Presentation::of(m);
        let mut multiplicities = Vec::with_capacity(candidates.len());
        for z in candidates {
            check_local(z)?;
            multiplicities.push(pairing_rank(z, &Presentation::of(z), m, &m_pres));
        }
        let covered: usize = candidates
            .iter()
            .zip(&multiplicities)
            .map(|(z, k)| z.total_dim() * k)
            .sum();
        Ok(KsProfile {
            multiplicities,
            complete: covered == m.total_dim(),
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::exactla::Field;
    use crate::quiver::Algebra;

    fn alg_a() -> Arc<Algebra> {
        Algebra::builtin("A", Field::default()).unwrap()
    }

    #[test]
    fn multiplicities_match_construction() {
        let a = alg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s3 = Module::simple(&a, 2);
        let p3 = Module::projective(&a, 2);
        let s1 = Module::simple(&a, 0);
        let m = Module::direct_sum(&[&s3, &p3, &s3, &s1, &p3, &p3]).unwrap();
        let (m, _) = m.random_conjugate(&mut rng);
        assert_eq!(multiplicity(&s3, &m).unwrap(), 2);
        assert_eq!(multiplicity(&p3, &m).unwrap(), 3);
        assert_eq!(multiplicity(&s1, &m).unwrap(), 1);
        assert_eq!(multiplicity(&Module::simple(&a, 3), &m).unwrap(), 0);
        let prof = KsProfile::compute(&m, &[s3.clone(), p3.clone(), s1.clone()]).unwrap();
        assert!(prof.complete);
        let prof = KsProfile::compute(&m, &[s3, p3]).unwrap();
        assert!(!prof.complete);
    }

    #[test]
    fn decomposable_candidates_are_rejected() {
        let a = alg_a();
        let z = Module::direct_sum(&[&Module::simple(&a, 2), &Module::simple(&a, 3)]).unwrap();
        assert!(multiplicity(&z, &z).is_err());
    }
}
