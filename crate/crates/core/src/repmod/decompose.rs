//! Krull–Schmidt decomposition.
//!
//! Two stages: a deterministic split by connected components of the basis
//! graph (which keeps bases adapted to obvious block structure), then a
//! Fitting-lemma split using random endomorphisms. A piece is declared
//! indecomposable only with a certificate: `End` is one-dimensional, the trace
//! form on `End` has rank one, or `End/rad End` is shown to be a field.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exactla::{Coordinates, Matrix};
use crate::poly::{min_poly, proper_factor, Poly};

use super::hom::hom_basis;
use super::iso::{is_isomorphic, iso_invariants_match};
use super::{Module, Morphism};

const SPLIT_ATTEMPTS: usize = 40;

/// One indecomposable summand with its embedding into the original module.
#[derive(Clone, Debug)]
pub struct Part {
    /// Index into [`Decomposition::summands`].
    pub class: usize,
    pub module: Module,
    pub embedding: Morphism,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Pairwise non-isomorphic indecomposables with multiplicities.
    pub summands: Vec<(Module, usize)>,
    /// Every summand occurrence, ordered by class.
    pub parts: Vec<Part>,
    /// Isomorphism from the direct sum of `parts` (in order) to the module.
    pub iso: Morphism,
}

impl Decomposition {
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn summand_count(&self) -> usize {
        self.parts.len()
    }

    /// Sorted `(dims, multiplicity)` pairs, a basis-independent fingerprint.
    pub fn signature(&self) -> Vec<(Vec<usize>, usize)> {
        let mut s: Vec<(Vec<usize>, usize)> = self
            .summands
            .iter()
            .map(|(m, k)| (m.dims().to_vec(), *k))
            .collect();
        s.sort();
        s
    }
}

struct Piece {
    module: Module,
    /// Columns in the coordinates of the module being decomposed.
    embed: Vec<Matrix>,
}

/// Splits by connected components of the graph on basis vectors whose edges
/// are the nonzero entries of the arrow matrices. Returns the per-vertex
/// coordinate lists of each component.
pub fn split_components(m: &Module) -> Vec<Vec<Vec<usize>>> {
    let q = m.algebra().quiver();
    let n = q.vertex_count();
    let mut off = vec![0usize; n + 1];
    for v in 0..n {
        off[v + 1] = off[v] + m.dim(v);
    }
    let total = off[n];
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (ai, a) in q.arrows().iter().enumerate() {
        let mat = m.action(ai);
        for i in 0..mat.rows() {
            for j in 0..mat.cols() {
                if mat.get(i, j) != 0 {
                    let (x, y) = (find(&mut parent, off[a.target] + i), find(&mut parent, off[a.source] + j));
                    if x != y {
                        parent[x.max(y)] = x.min(y);
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<Vec<usize>>> = Vec::new();
    for v in 0..n {
        for i in 0..m.dim(v) {
            let r = find(&mut parent, off[v] + i);
            let c = match roots.iter().position(|&x| x == r) {
                Some(c) => c,
                None => {
                    roots.push(r);
                    comps.push(vec![Vec::new(); n]);
                    roots.len() - 1
                }
            };
            comps[c][v].push(i);
        }
    }
    comps
}

fn component_pieces(piece: Piece) -> Vec<Piece> {
    let comps = split_components(&piece.module);
    if comps.len() <= 1 {
        return vec![piece];
    }
    comps
        .into_iter()
        .map(|idx| Piece {
            module: piece.module.restrict_coordinates(&idx),
            embed: piece
                .embed
                .iter()
                .zip(&idx)
                .map(|(e, i)| e.select_cols(i))
                .collect(),
        })
        .collect()
}

fn flatten(m: &Morphism) -> Vec<u64> {
    m.components.iter().flat_map(|c| c.data().iter().copied()).collect()
}

fn random_endo<R: Rng + ?Sized>(basis: &[Morphism], m: &Module, rng: &mut R) -> Morphism {
    let f = m.field();
    let mut acc = Morphism::zero(m, m);
    for e in basis {
        acc = acc.add(&e.scale(f.random(rng)));
    }
    acc
}

/// Gram matrix of the trace form on `End`.
fn trace_gram(basis: &[Morphism], m: &Module) -> Matrix {
    let f = m.field();
    let k = basis.len();
    let mut g = Matrix::zeros(f, k, k);
    for i in 0..k {
        for j in i..k {
            let t = basis[i].compose(&basis[j]).trace();
            g.set(i, j, t);
            g.set(j, i, t);
        }
    }
    g
}

/// Fitting decomposition `M = ker g^∞ ⊕ im g^∞`, if both parts are nonzero.
fn fitting(m: &Module, g: &Morphism) -> Option<(Vec<Matrix>, Vec<Matrix>)> {
    let mut ker = Vec::new();
    let mut im = Vec::new();
    for (v, c) in g.components.iter().enumerate() {
        let d = m.dim(v);
        let power = c.pow(d.max(1) as u32);
        ker.push(power.kernel_basis());
        im.push(power.image_basis());
    }
    let kd: usize = ker.iter().map(Matrix::cols).sum();
    let id: usize = im.iter().map(Matrix::cols).sum();
    (kd > 0 && id > 0).then_some((ker, im))
}

/// Whether `End/rad End` is a field, witnessed by a random element whose
/// minimal polynomial modulo the radical is irreducible of full degree.
fn semisimple_quotient_is_field<R: Rng + ?Sized>(
    basis: &[Morphism],
    gram: &Matrix,
    m: &Module,
    rng: &mut R,
) -> bool {
    let f = m.field();
    let r = gram.rank();
    let flat: Vec<Vec<u64>> = basis.iter().map(flatten).collect();
    let len = flat[0].len();
    let mut bm = Matrix::zeros(f, len, basis.len());
    for (j, col) in flat.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            bm.set(i, j, v);
        }
    }
    let coords = Coordinates::new(&bm);
    let rad = gram.kernel_basis();
    for _ in 0..8 {
        let x = random_endo(basis, m, rng);
        let mut powers = vec![Morphism::identity(m)];
        for _ in 0..r {
            let next = x.compose(powers.last().unwrap());
            powers.push(next);
        }
        let cols: Vec<Matrix> = powers
            .iter()
            .map(|p| coords.of_unchecked(&Matrix::column(f, &flatten(p))))
            .collect();
        // First power dependent on lower powers modulo the radical.
        for d in 1..=r {
            let mut span: Vec<&Matrix> = cols[..d].iter().collect();
            span.push(&rad);
            let a = Matrix::hstack(f, basis.len(), &span);
            if let Ok(sol) = a.solve_right(&cols[d]) {
                if d < r {
                    break;
                }
                let mut c: Vec<u64> = (0..d).map(|i| f.neg(sol.get(i, 0))).collect();
                c.push(1);
                let q = Poly::new(c);
                let squarefree = q.gcd(&q.derivative(f), f).degree() == Some(0);
                if squarefree && proper_factor(&q, f, rng).is_none() {
                    return true;
                }
                break;
            }
        }
    }
    false
}

/// Splits `m` into two nonzero summands, or certifies it indecomposable.
fn try_split<R: Rng + ?Sized>(m: &Module, rng: &mut R) -> Result<Option<(Vec<Matrix>, Vec<Matrix>)>> {
    let end = hom_basis(m, m);
    if end.len() <= 1 {
        return Ok(None);
    }
    let f = m.field();
    let p = f.modulus() as usize;
    let gram = trace_gram(&end, m);
    let trace_certified = p > m.total_dim() && p > end.len();
    if trace_certified && gram.rank() == 1 {
        return Ok(None);
    }
    for _ in 0..SPLIT_ATTEMPTS {
        let x = random_endo(&end, m, rng);
        for (v, c) in x.components.iter().enumerate() {
            if m.dim(v) == 0 {
                continue;
            }
            let Some(factor) = proper_factor(&min_poly(c), f, rng) else {
                continue;
            };
            let g = Morphism {
                components: x.components.iter().map(|c| factor.eval_matrix(c)).collect(),
            };
            if let Some(split) = fitting(m, &g) {
                return Ok(Some(split));
            }
        }
    }
    if trace_certified && semisimple_quotient_is_field(&end, &gram, m, rng) {
        return Ok(None);
    }
    Err(Error::DecompositionFailure(format!(
        "no idempotent found for module with dims {} after {SPLIT_ATTEMPTS} attempts",
        m.dims_string()
    )))
}

fn class_key(m: &Module) -> (usize, Vec<usize>, Vec<usize>) {
    (m.total_dim(), m.dims().to_vec(), m.rank_profile())
}

/// Full Krull–Schmidt decomposition with an explicit isomorphism.
pub fn decompose<R: Rng + ?Sized>(m: &Module, rng: &mut R) -> Result<Decomposition> {
    let f = m.field();
    let start = Piece {
        module: m.clone(),
        embed: m.dims().iter().map(|&d| Matrix::identity(f, d)).collect(),
    };
    let mut stack: Vec<Piece> = component_pieces(start);
    stack.reverse();
    let mut leaves: Vec<Piece> = Vec::new();
    while let Some(piece) = stack.pop() {
        if piece.module.is_zero() {
            continue;
        }
        match try_split(&piece.module, rng)? {
            None => leaves.push(piece),
            Some((a, b)) => {
                let mut subs = Vec::new();
                for basis in [a, b] {
                    let sub = piece.module.submodule(&basis)?;
                    let embed = piece.embed.iter().zip(&basis).map(|(e, x)| e.mul(x)).collect();
                    subs.extend(component_pieces(Piece { module: sub, embed }));
                }
                subs.reverse();
                stack.extend(subs);
            }
        }
    }
    // Group isomorphic leaves.
    let mut classes: Vec<(Module, Vec<usize>)> = Vec::new();
    for (li, leaf) in leaves.iter().enumerate() {
        let mut found = None;
        for (ci, (rep, _)) in classes.iter().enumerate() {
            if iso_invariants_match(rep, &leaf.module) && is_isomorphic(rep, &leaf.module, rng).is_some() {
                found = Some(ci);
                break;
            }
        }
        match found {
            Some(ci) => classes[ci].1.push(li),
            None => classes.push((leaf.module.clone(), vec![li])),
        }
    }
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by_key(|&c| class_key(&classes[c].0));
    let mut summands = Vec::with_capacity(classes.len());
    let mut parts = Vec::with_capacity(leaves.len());
    let mut leaves: Vec<Option<Piece>> = leaves.into_iter().map(Some).collect();
    for (new_idx, &c) in order.iter().enumerate() {
        let (rep, members) = &classes[c];
        summands.push((rep.clone(), members.len()));
        for &li in members {
            let leaf = leaves[li].take().expect("each leaf used once");
            parts.push(Part {
                class: new_idx,
                module: leaf.module,
                embedding: Morphism {
                    components: leaf.embed,
                },
            });
        }
    }
    let n = m.dims().len();
    let iso = Morphism {
        components: (0..n)
            .map(|v| {
                let cols: Vec<&Matrix> = parts.iter().map(|p| &p.embedding.components[v]).collect();
                Matrix::hstack(f, m.dim(v), &cols)
            })
            .collect(),
    };
    if !iso.is_iso() {
        return Err(Error::DecompositionFailure("summand embeddings do not span".into()));
    }
    Ok(Decomposition {
        summands,
        parts,
        iso,
    })
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
    fn decompose_examples() {
        let a = alg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p1 = Module::projective(&a, 0);
        let s1 = Module::simple(&a, 0);
        let d = decompose(&Module::direct_sum(&[&p1, &s1]).unwrap(), &mut rng).unwrap();
        assert_eq!(d.summands.len(), 2);
        assert_eq!(d.summands[0].0, s1);
        assert_eq!(d.summands[1].1, 1);
        let s3 = Module::simple(&a, 2);
        let d = decompose(&s3.power(2), &mut rng).unwrap();
        assert_eq!(d.summands.len(), 1);
        assert_eq!(d.summands[0].1, 2);
        assert!(decompose(&Module::zero(&a), &mut rng).unwrap().is_empty());
    }

    #[test]
    fn hidden_sum_is_found_after_conjugation() {
        let a = alg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let parts = [
            Module::projective(&a, 1),
            Module::projective(&a, 1),
            Module::simple(&a, 2),
            Module::projective(&a, 2),
        ];
        let refs: Vec<&Module> = parts.iter().collect();
        let sum = Module::direct_sum(&refs).unwrap();
        let (hidden, _) = sum.random_conjugate(&mut rng);
        let d = decompose(&hidden, &mut rng).unwrap();
        assert_eq!(d.summand_count(), 4);
        assert_eq!(d.signature(), decompose(&sum, &mut rng).unwrap().signature());
        assert!(d.iso.is_iso());
    }

    #[test]
    fn components_follow_nonzero_entries() {
        let a = alg_a();
        let m = Module::direct_sum(&[&Module::projective(&a, 2), &Module::simple(&a, 1)]).unwrap();
        assert_eq!(split_components(&m).len(), 2);
        assert_eq!(split_components(&Module::projective(&a, 1)).len(), 1);
    }
}
