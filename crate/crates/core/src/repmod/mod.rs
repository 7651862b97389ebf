//! Finite-dimensional modules over bound quiver algebras.

mod cover;
mod decompose;
mod hom;
mod iso;
mod ks;
mod serial;

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exactla::{Coordinates, Field, Matrix};
use crate::quiver::{Algebra, Path};

pub use cover::{syzygy, syzygy_with_data, top_and_cover, Cover, Syzygy};
pub use decompose::{decompose, split_components, Decomposition, Part};
pub use hom::{hom_basis, hom_dimension_naive, Presentation};
pub use iso::{is_isomorphic, iso_invariants_match, IsoWitness};
pub use ks::{multiplicity, KsProfile};
pub use serial::ModuleJson;

pub use crate::igusa::{projective_dimension, ProjDim};

/// A representation of the bound quiver: one space per vertex, one matrix
/// per arrow, with every relation acting as zero.
#[derive(Clone, Debug)]
pub struct Module {
    algebra: Arc<Algebra>,
    dims: Vec<usize>,
    action: Vec<Matrix>,
}

impl PartialEq for Module {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.algebra, &other.algebra)
            && self.dims == other.dims
            && self.action == other.action
    }
}

pub(crate) fn same_algebra(a: &Arc<Algebra>, b: &Arc<Algebra>) -> bool {
    Arc::ptr_eq(a, b) || (a.name() == b.name() && a.quiver() == b.quiver())
}

impl Module {
    pub fn new(algebra: Arc<Algebra>, dims: Vec<usize>, action: Vec<Matrix>) -> Result<Self> {
        let q = algebra.quiver();
        if dims.len() != q.vertex_count() || action.len() != q.arrow_count() {
            return Err(Error::Invalid(format!(
                "module data has {} dims and {} matrices, algebra needs {} and {}",
                dims.len(),
                action.len(),
                q.vertex_count(),
                q.arrow_count()
            )));
        }
        for (i, (a, m)) in q.arrows().iter().zip(&action).enumerate() {
            if m.shape() != (dims[a.target], dims[a.source]) {
                return Err(Error::Invalid(format!(
                    "arrow {} (#{i}) has shape {:?}, expected {:?}",
                    a.label,
                    m.shape(),
                    (dims[a.target], dims[a.source])
                )));
            }
            if m.field() != algebra.field() {
                return Err(Error::Invalid("matrix over a different field".into()));
            }
        }
        let m = Module {
            algebra,
            dims,
            action,
        };
        m.check_relations()?;
        Ok(m)
    }

    fn check_relations(&self) -> Result<()> {
        let q = self.algebra.quiver();
        for rel in self.algebra.relations() {
            let Some((_, p0)) = rel.terms.first() else {
                continue;
            };
            let (s, t) = (p0.start, p0.end(q));
            let mut acc = Matrix::zeros(self.field(), self.dims[t], self.dims[s]);
            for (c, p) in &rel.terms {
                acc.add_scaled_assign(*c, &self.path_action(p));
            }
            if !acc.is_zero() {
                let rendered: Vec<String> = rel.terms.iter().map(|(_, p)| p.render(q)).collect();
                return Err(Error::RelationViolation(format!(
                    "relation {} does not act as zero",
                    rendered.join(" - ")
                )));
            }
        }
        Ok(())
    }

    pub fn zero(algebra: &Arc<Algebra>) -> Self {
        let n = algebra.vertex_count();
        let f = algebra.field();
        let action = algebra
            .quiver()
            .arrows()
            .iter()
            .map(|_| Matrix::zeros(f, 0, 0))
            .collect();
        Module {
            algebra: algebra.clone(),
            dims: vec![0; n],
            action,
        }
    }

    pub fn simple(algebra: &Arc<Algebra>, v: usize) -> Self {
        assert!(v < algebra.vertex_count(), "vertex out of range");
        let mut dims = vec![0; algebra.vertex_count()];
        dims[v] = 1;
        let f = algebra.field();
        let action = algebra
            .quiver()
            .arrows()
            .iter()
            .map(|a| Matrix::zeros(f, dims[a.target], dims[a.source]))
            .collect();
        Module {
            algebra: algebra.clone(),
            dims,
            action,
        }
    }

    /// The indecomposable projective `P_v`: basis the words starting at `v`,
    /// arrows acting by concatenation.
    pub fn projective(algebra: &Arc<Algebra>, v: usize) -> Self {
        assert!(v < algebra.vertex_count(), "vertex out of range");
        let f = algebra.field();
        let q = algebra.quiver();
        let words = algebra.projective_words(v);
        let mut dims = vec![0; q.vertex_count()];
        let mut index: HashMap<&Path, usize> = HashMap::new();
        let mut by_vertex: Vec<Vec<&Path>> = vec![Vec::new(); q.vertex_count()];
        for (w, p) in &words {
            index.insert(p, dims[*w]);
            dims[*w] += 1;
            by_vertex[*w].push(p);
        }
        let mut action = Vec::with_capacity(q.arrow_count());
        for (ai, a) in q.arrows().iter().enumerate() {
            let mut m = Matrix::zeros(f, dims[a.target], dims[a.source]);
            for (j, p) in by_vertex[a.source].iter().enumerate() {
                if let Some(ext) = algebra.extend_word(p, ai) {
                    let i = *index
                        .get(&ext)
                        .expect("extended word is a projective basis word");
                    m.set(i, j, 1);
                }
            }
            action.push(m);
        }
        Module {
            algebra: algebra.clone(),
            dims,
            action,
        }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn field(&self) -> Field {
        self.algebra.field()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, v: usize) -> usize {
        self.dims[v]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn action(&self, arrow: usize) -> &Matrix {
        &self.action[arrow]
    }

    pub fn actions(&self) -> &[Matrix] {
        &self.action
    }

    /// Matrix of a path (arrows in application order).
    pub fn path_action(&self, p: &Path) -> Matrix {
        let mut m = Matrix::identity(self.field(), self.dims[p.start]);
        for &a in &p.arrows {
            m = self.action[a].mul(&m);
        }
        m
    }

    /// Applies a word to a column vector at the word's start vertex.
    pub fn apply_word(&self, p: &Path, v: &Matrix) -> Matrix {
        let mut x = v.clone();
        for &a in &p.arrows {
            x = self.action[a].mul(&x);
        }
        x
    }

    /// Ranks of the arrow matrices, an isomorphism invariant.
    pub fn rank_profile(&self) -> Vec<usize> {
        self.action.iter().map(Matrix::rank).collect()
    }

    pub fn direct_sum(parts: &[&Module]) -> Result<Module> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Invalid("direct sum of no modules".into()))?;
        let alg = first.algebra.clone();
        if parts.iter().any(|m| !same_algebra(&m.algebra, &alg)) {
            return Err(Error::Invalid("direct sum across algebras".into()));
        }
        let f = alg.field();
        let n = alg.vertex_count();
        let dims = (0..n).map(|v| parts.iter().map(|m| m.dims[v]).sum()).collect();
        let action = (0..alg.arrow_count())
            .map(|a| {
                let blocks: Vec<&Matrix> = parts.iter().map(|m| &m.action[a]).collect();
                Matrix::block_diag(f, &blocks)
            })
            .collect();
        Ok(Module {
            algebra: alg,
            dims,
            action,
        })
    }

    pub fn power(&self, n: usize) -> Module {
        if n == 0 {
            return Module::zero(&self.algebra);
        }
        let parts: Vec<&Module> = std::iter::repeat_n(self, n).collect();
        Module::direct_sum(&parts).expect("same algebra")
    }

    /// Transports the structure along per-vertex invertible matrices: the new
    /// module is isomorphic to `self` via `bases`.
    pub fn conjugate(&self, bases: &[Matrix]) -> Result<Module> {
        let q = self.algebra.quiver();
        let mut inverses = Vec::with_capacity(bases.len());
        for (v, b) in bases.iter().enumerate() {
            if b.shape() != (self.dims[v], self.dims[v]) {
                return Err(Error::Invalid("basis change has the wrong shape".into()));
            }
            inverses.push(b.inverse().ok_or_else(|| {
                Error::Invalid("basis change is not invertible".into())
            })?);
        }
        let action = q
            .arrows()
            .iter()
            .zip(&self.action)
            .map(|(a, m)| inverses[a.target].mul(m).mul(&bases[a.source]))
            .collect();
        Module::new(self.algebra.clone(), self.dims.clone(), action)
    }

    pub fn random_conjugate<R: Rng + ?Sized>(&self, rng: &mut R) -> (Module, Vec<Matrix>) {
        let f = self.field();
        let bases: Vec<Matrix> = self
            .dims
            .iter()
            .map(|&d| loop {
                let b = Matrix::random(f, d, d, rng);
                if b.is_invertible() {
                    break b;
                }
            })
            .collect();
        let m = self.conjugate(&bases).expect("random invertible basis change");
        (m, bases)
    }

    /// Submodule spanned per vertex by the columns of `basis` (which must be
    /// linearly independent and closed under the action).
    pub fn submodule(&self, basis: &[Matrix]) -> Result<Module> {
        let q = self.algebra.quiver();
        let coords: Vec<Coordinates> = basis.iter().map(Coordinates::new).collect();
        let dims: Vec<usize> = basis.iter().map(Matrix::cols).collect();
        let mut action = Vec::with_capacity(q.arrow_count());
        for (a, m) in q.arrows().iter().zip(&self.action) {
            let image = m.mul(&basis[a.source]);
            action.push(coords[a.target].of(&image).map_err(|_| {
                Error::Invalid(format!("subspace not closed under arrow {}", a.label))
            })?);
        }
        Ok(Module {
            algebra: self.algebra.clone(),
            dims,
            action,
        })
    }

    /// Restriction to the coordinates listed per vertex, assuming they span a
    /// submodule whose complement in those coordinates is also preserved.
    pub fn restrict_coordinates(&self, idx: &[Vec<usize>]) -> Module {
        let q = self.algebra.quiver();
        let dims = idx.iter().map(Vec::len).collect();
        let action = q
            .arrows()
            .iter()
            .zip(&self.action)
            .map(|(a, m)| m.select_rows(&idx[a.target]).select_cols(&idx[a.source]))
            .collect();
        Module {
            algebra: self.algebra.clone(),
            dims,
            action,
        }
    }

    /// The same representation viewed over an isomorphic copy of the algebra
    /// obtained by permuting vertices and arrows.
    pub fn relabel(&self, vertex_perm: &[usize], arrow_perm: &[usize]) -> Module {
        let n = self.dims.len();
        let mut dims = vec![0; n];
        for v in 0..n {
            dims[vertex_perm[v]] = self.dims[v];
        }
        let mut action = vec![Matrix::zeros(self.field(), 0, 0); self.action.len()];
        for (a, m) in self.action.iter().enumerate() {
            action[arrow_perm[a]] = m.clone();
        }
        Module {
            algebra: self.algebra.clone(),
            dims,
            action,
        }
    }

    pub fn is_projective(&self) -> bool {
        let c = top_and_cover(self);
        c.module.total_dim() == self.total_dim()
    }

    /// Human-readable dimension vector, e.g. `(0,1,1,1)`.
    pub fn dims_string(&self) -> String {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// A module map given by one matrix per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism {
    pub components: Vec<Matrix>,
}

impl Morphism {
    /// Checks shapes and naturality against `source` and `target`.
    pub fn new(source: &Module, target: &Module, components: Vec<Matrix>) -> Result<Self> {
        let m = Morphism { components };
        m.check(source, target)?;
        Ok(m)
    }

    pub fn check(&self, source: &Module, target: &Module) -> Result<()> {
        let q = source.algebra.quiver();
        if self.components.len() != q.vertex_count() {
            return Err(Error::Invalid("morphism has the wrong number of components".into()));
        }
        for (v, c) in self.components.iter().enumerate() {
            if c.shape() != (target.dims[v], source.dims[v]) {
                return Err(Error::Invalid(format!("component at vertex {} has wrong shape", v + 1)));
            }
        }
        for (i, a) in q.arrows().iter().enumerate() {
            let lhs = target.action[i].mul(&self.components[a.source]);
            let rhs = self.components[a.target].mul(&source.action[i]);
            if lhs != rhs {
                return Err(Error::RelationViolation(format!(
                    "morphism does not commute with arrow {}",
                    a.label
                )));
            }
        }
        Ok(())
    }

    pub fn identity(m: &Module) -> Self {
        Morphism {
            components: m.dims.iter().map(|&d| Matrix::identity(m.field(), d)).collect(),
        }
    }

    pub fn zero(source: &Module, target: &Module) -> Self {
        Morphism {
            components: source
                .dims
                .iter()
                .zip(&target.dims)
                .map(|(&s, &t)| Matrix::zeros(source.field(), t, s))
                .collect(),
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Morphism) -> Morphism {
        Morphism {
            components: self
                .components
                .iter()
                .zip(&first.components)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Morphism) -> Morphism {
        Morphism {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: u64) -> Morphism {
        Morphism {
            components: self.components.iter().map(|a| a.scale(s)).collect(),
        }
    }

    pub fn neg(&self) -> Morphism {
        Morphism {
            components: self.components.iter().map(Matrix::neg).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Matrix::is_zero)
    }

    pub fn is_injective(&self) -> bool {
        self.components.iter().all(|c| c.rank() == c.cols())
    }

    pub fn is_surjective(&self) -> bool {
        self.components.iter().all(|c| c.rank() == c.rows())
    }

    pub fn is_iso(&self) -> bool {
        self.components.iter().all(Matrix::is_invertible)
    }

    pub fn trace(&self) -> u64 {
        let f = self
            .components
            .first()
            .map(Matrix::field)
            .unwrap_or_default();
        self.components
            .iter()
            .fold(0, |acc, c| f.add(acc, c.trace()))
    }

    /// Per-vertex kernel bases (as columns in source coordinates).
    pub fn kernel_bases(&self) -> Vec<Matrix> {
        self.components.iter().map(Matrix::kernel_basis).collect()
    }

    /// Block morphism between direct sums: `blocks[i][j]` maps source summand
    /// `j` to target summand `i`; `None` is a zero block.
    pub fn from_blocks(
        sources: &[&Module],
        targets: &[&Module],
        blocks: &[Vec<Option<&Morphism>>],
    ) -> Morphism {
        let f = sources
            .first()
            .or(targets.first())
            .map(|m| m.field())
            .expect("at least one summand");
        let n = sources
            .first()
            .or(targets.first())
            .map(|m| m.dims.len())
            .expect("at least one summand");
        let mut components = Vec::with_capacity(n);
        for v in 0..n {
            let rows: usize = targets.iter().map(|m| m.dims[v]).sum();
            let cols: usize = sources.iter().map(|m| m.dims[v]).sum();
            let mut c = Matrix::zeros(f, rows, cols);
            let mut r0 = 0;
            for (i, t) in targets.iter().enumerate() {
                let mut c0 = 0;
                for (j, s) in sources.iter().enumerate() {
                    if let Some(Some(b)) = blocks.get(i).map(|row| row.get(j).copied().flatten()) {
                        c.set_block(r0, c0, &b.components[v]);
                    }
                    c0 += s.dims[v];
                }
                r0 += t.dims[v];
            }
            components.push(c);
        }
        Morphism { components }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg_a() -> Arc<Algebra> {
        Algebra::builtin("A", Field::default()).unwrap()
    }

    #[test]
    fn simples_and_projectives() {
        let a = alg_a();
        assert_eq!(Module::simple(&a, 2).dims(), &[0, 0, 1, 0]);
        assert_eq!(Module::projective(&a, 2).dims(), &[1, 0, 1, 0]);
        assert_eq!(Module::projective(&a, 1).dims(), &[0, 1, 1, 1]);
        let c = Algebra::builtin("A3CT", Field::default()).unwrap();
        assert_eq!(Module::simple(&c, 0).dims(), &[1, 0, 0]);
        for v in 0..3 {
            assert_eq!(Module::projective(&c, v).total_dim(), 2);
        }
    }

    #[test]
    fn tensor_projectives_are_disks() {
        let t = Algebra::builtin("A_tensor_A3CT", Field::default()).unwrap();
        let total: usize = (0..12).map(|v| Module::projective(&t, v).total_dim()).sum();
        assert_eq!(total, 54);
        // P at vertex (3, layer 0): P_3 in layers 0 and 2.
        let p = Module::projective(&t, 2);
        assert_eq!(p.dims(), &[1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn relations_are_enforced() {
        let a = alg_a();
        let f = a.field();
        // Nonzero x2 * x1 violates rad^2 = 0.
        let dims = vec![1, 1, 1, 0];
        let one = Matrix::identity(f, 1);
        let action = vec![
            one.clone(),
            one.clone(),
            Matrix::zeros(f, 0, 1),
            Matrix::zeros(f, 1, 1),
            Matrix::zeros(f, 1, 0),
        ];
        assert!(matches!(
            Module::new(a, dims, action),
            Err(Error::RelationViolation(_))
        ));
    }

    #[test]
    fn morphism_naturality_is_checked() {
        let a = alg_a();
        let p3 = Module::projective(&a, 2);
        let s3 = Module::simple(&a, 2);
        let f = a.field();
        let top = vec![
            Matrix::zeros(f, 0, 1),
            Matrix::zeros(f, 0, 0),
            Matrix::identity(f, 1),
            Matrix::zeros(f, 0, 0),
        ];
        assert!(Morphism::new(&p3, &s3, top.clone()).is_ok());
        // The other direction is not a module map: S3 has no socle image in P3's top.
        let bad = vec![
            Matrix::zeros(f, 1, 0),
            Matrix::zeros(f, 0, 0),
            Matrix::identity(f, 1),
            Matrix::zeros(f, 0, 0),
        ];
        assert!(Morphism::new(&s3, &p3, bad).is_err());
    }
}
