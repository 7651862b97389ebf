use std::collections::HashMap;

use crate::exactla::Matrix;
use crate::quiver::Path;

use super::cover::{syzygy_with_data, top_generators, Cover};
use super::{Module, Morphism};

/// A presentation `P₁ → P₀ → M → 0` in the form needed for Hom
/// computations: the cover, a linear section of it, and the top generators
/// of the syzygy written in cover coordinates.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub cover: Cover,
    /// `s_w : M_w → P₀_w` with `surj_w · s_w = 1`.
    pub sections: Vec<Matrix>,
    /// Generators of `ΩM` as (vertex, column vector in `P₀_w`).
    pub relations: Vec<(usize, Matrix)>,
}

impl Presentation {
    pub fn of(m: &Module) -> Self {
        let syz = syzygy_with_data(m);
        let relations = top_generators(&syz.module)
            .into_iter()
            .map(|(w, e)| (w, syz.inclusion.components[w].mul(&e)))
            .collect();
        let f = m.field();
        let sections = syz
            .cover
            .surj
            .components
            .iter()
            .map(|s| {
                s.solve_right(&Matrix::identity(f, s.rows()))
                    .expect("cover map is surjective")
            })
            .collect();
        Presentation {
            cover: syz.cover,
            sections,
            relations,
        }
    }

    /// Basis of `Hom(M, N)` where `M` is the presented module.
    pub fn hom_basis(&self, n: &Module) -> Vec<Morphism> {
        let f = n.field();
        let gens = &self.cover.generators;
        let mut offsets = Vec::with_capacity(gens.len() + 1);
        offsets.push(0);
        for (v, _) in gens {
            offsets.push(offsets.last().unwrap() + n.dim(*v));
        }
        let unknowns = *offsets.last().unwrap();
        let vertices = n.dims().len();
        if unknowns == 0 {
            return Vec::new();
        }
        let mut cache: HashMap<&Path, Matrix> = HashMap::new();
        for labels in &self.cover.labels {
            for (_, word) in labels {
                cache
                    .entry(word)
                    .or_insert_with(|| n.path_action(word));
            }
        }
        let rows: usize = self.relations.iter().map(|(w, _)| n.dim(*w)).sum();
        let mut system = Matrix::zeros(f, rows, unknowns);
        let mut r0 = 0;
        for (w, z) in &self.relations {
            let dw = n.dim(*w);
            if dw == 0 {
                continue;
            }
            for (b, (g, word)) in self.cover.labels[*w].iter().enumerate() {
                let c = z.get(b, 0);
                if c == 0 {
                    continue;
                }
                let block = &cache[word];
                let c0 = offsets[*g];
                for i in 0..dw {
                    for j in 0..block.cols() {
                        let v = block.get(i, j);
                        if v != 0 {
                            let old = system.get(r0 + i, c0 + j);
                            system.set(r0 + i, c0 + j, f.add(old, f.mul(c, v)));
                        }
                    }
                }
            }
            r0 += dw;
        }
        let kernel = system.kernel_basis();
        let mut out = Vec::with_capacity(kernel.cols());
        for k in 0..kernel.cols() {
            let u = kernel.select_cols(&[k]);
            let components = (0..vertices)
                .map(|w| {
                    let labels = &self.cover.labels[w];
                    let mut phi = Matrix::zeros(f, n.dim(w), labels.len());
                    for (b, (g, word)) in labels.iter().enumerate() {
                        let ug = u.block(offsets[*g], 0, offsets[*g + 1] - offsets[*g], 1);
                        phi.set_block(0, b, &cache[word].mul(&ug));
                    }
                    phi.mul(&self.sections[w])
                })
                .collect();
            out.push(Morphism { components });
        }
        out
    }
}

/// A basis of `Hom(M, N)`.
pub fn hom_basis(m: &Module, n: &Module) -> Vec<Morphism> {
    Presentation::of(m).hom_basis(n)
}

/// `dim Hom(M, N)` from the raw commutation equations, with one unknown per
/// matrix entry. Independent of covers; used as a cross-check.
pub fn hom_dimension_naive(m: &Module, n: &Module) -> usize {
    let f = m.field();
    let q = m.algebra().quiver();
    let nv = q.vertex_count();
    let mut off = vec![0usize; nv + 1];
    for v in 0..nv {
        off[v + 1] = off[v] + n.dim(v) * m.dim(v);
    }
    let unknowns = off[nv];
    let var = |v: usize, i: usize, j: usize| off[v] + i * m.dim(v) + j;
    let mut rows: Vec<Vec<(usize, u64)>> = Vec::new();
    for (ai, a) in q.arrows().iter().enumerate() {
        let (s, t) = (a.source, a.target);
        let (na, ma) = (n.action(ai), m.action(ai));
        for i in 0..n.dim(t) {
            for j in 0..m.dim(s) {
                let mut row = Vec::new();
                for k in 0..n.dim(s) {
                    let c = na.get(i, k);
                    if c != 0 {
                        row.push((var(s, k, j), c));
                    }
                }
                for l in 0..m.dim(t) {
                    let c = ma.get(l, j);
                    if c != 0 {
                        row.push((var(t, i, l), f.neg(c)));
                    }
                }
                rows.push(row);
            }
        }
    }
    let mut system = Matrix::zeros(f, rows.len(), unknowns);
    for (r, row) in rows.iter().enumerate() {
        for &(c, v) in row {
            let old = system.get(r, c);
            system.set(r, c, f.add(old, v));
        }
    }
    unknowns - system.rank()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exactla::Field;
    use crate::quiver::Algebra;

    fn alg_a() -> Arc<Algebra> {
        Algebra::builtin("A", Field::default()).unwrap()
    }

    #[test]
    fn hom_examples() {
        let a = alg_a();
        let s = |v| Module::simple(&a, v);
        let p = |v| Module::projective(&a, v);
        assert!(hom_basis(&s(0), &s(1)).is_empty());
        assert_eq!(hom_basis(&p(2), &s(2)).len(), 1);
        assert_eq!(hom_basis(&s(2), &s(2)).len(), 1);
        // S1 is the socle of P3 and of P4.
        assert_eq!(hom_basis(&s(0), &p(2)).len(), 1);
        assert_eq!(hom_basis(&p(1), &p(1)).len(), 1);
    }

    #[test]
    fn presentation_agrees_with_naive_count() {
        let a = alg_a();
        let mut mods: Vec<Module> = (0..4).map(|v| Module::simple(&a, v)).collect();
        mods.extend((0..4).map(|v| Module::projective(&a, v)));
        mods.push(Module::direct_sum(&[&mods[2], &mods[6], &mods[5]]).unwrap());
        for x in &mods {
            for y in &mods {
                let basis = hom_basis(x, y);
                assert_eq!(basis.len(), hom_dimension_naive(x, y));
                for h in &basis {
                    h.check(x, y).unwrap();
                }
            }
        }
    }

    #[test]
    fn tensor_hom_agrees_with_naive_count() {
        let t = Algebra::builtin("A_tensor_A3CT", Field::default()).unwrap();
        let mods: Vec<Module> = [0, 5, 9]
            .iter()
            .flat_map(|&v| [Module::simple(&t, v), Module::projective(&t, v)])
            .collect();
        let sum = Module::direct_sum(&[&mods[0], &mods[3], &mods[5]]).unwrap();
        for x in mods.iter().chain([&sum]) {
            for y in mods.iter().chain([&sum]) {
                assert_eq!(hom_basis(x, y).len(), hom_dimension_naive(x, y));
            }
        }
    }
}
