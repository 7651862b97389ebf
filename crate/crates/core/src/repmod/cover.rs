use crate::exactla::Matrix;
use crate::quiver::Path;

use super::{Module, Morphism};

/// A projective cover `⊕_g P_{v(g)} → M`, one summand per top generator.
#[derive(Clone, Debug)]
pub struct Cover {
    pub module: Module,
    pub surj: Morphism,
    /// Top generators: the vertex and the generating vector in `M_v`.
    pub generators: Vec<(usize, Matrix)>,
    /// For each vertex, the (generator, word) labelling each basis vector of
    /// the cover at that vertex.
    pub labels: Vec<Vec<(usize, Path)>>,
}

impl Cover {
    /// Top multiplicities per vertex.
    pub fn top_dims(&self) -> Vec<usize> {
        let mut t = vec![0; self.module.dims().len()];
        for (v, _) in &self.generators {
            t[*v] += 1;
        }
        t
    }
}

/// The syzygy `ΩM = ker(P → M)` together with its embedding into the cover.
#[derive(Clone, Debug)]
pub struct Syzygy {
    pub module: Module,
    pub inclusion: Morphism,
    pub cover: Cover,
}

/// Top generators of `M`: standard basis vectors completing `rad M` at each
/// vertex.
pub(super) fn top_generators(m: &Module) -> Vec<(usize, Matrix)> {
    let alg = m.algebra();
    let q = alg.quiver();
    let f = m.field();
    let mut gens = Vec::new();
    for w in 0..q.vertex_count() {
        let d = m.dim(w);
        if d == 0 {
            continue;
        }
        let incoming: Vec<&Matrix> = q.arrows_into(w).map(|a| m.action(a)).collect();
        let rad = Matrix::hstack(f, d, &incoming);
        for i in rad.complement_indices() {
            let mut e = Matrix::zeros(f, d, 1);
            e.set(i, 0, 1);
            gens.push((w, e));
        }
    }
    gens
}

/// Minimal projective cover of `m`.
pub fn top_and_cover(m: &Module) -> Cover {
    let alg = m.algebra();
    let f = m.field();
    let n = alg.vertex_count();
    let generators = top_generators(m);
    let mut labels: Vec<Vec<(usize, Path)>> = vec![Vec::new(); n];
    let mut projectives = Vec::with_capacity(generators.len());
    for (gi, (v, _)) in generators.iter().enumerate() {
        projectives.push(Module::projective(alg, *v));
        for (w, word) in alg.projective_words(*v) {
            labels[w].push((gi, word));
        }
    }
    let module = if projectives.is_empty() {
        Module::zero(alg)
    } else {
        let refs: Vec<&Module> = projectives.iter().collect();
        Module::direct_sum(&refs).expect("projectives over one algebra")
    };
    let components = (0..n)
        .map(|w| {
            let cols: Vec<Matrix> = labels[w]
                .iter()
                .map(|(gi, word)| m.apply_word(word, &generators[*gi].1))
                .collect();
            let refs: Vec<&Matrix> = cols.iter().collect();
            Matrix::hstack(f, m.dim(w), &refs)
        })
        .collect();
    let surj = Morphism { components };
    debug_assert!(surj.check(&module, m).is_ok());
    debug_assert!(surj.is_surjective());
    Cover {
        module,
        surj,
        generators,
        labels,
    }
}

/// `ΩM` with its inclusion into the projective cover.
pub fn syzygy_with_data(m: &Module) -> Syzygy {
    let cover = top_and_cover(m);
    let kernels = cover.surj.kernel_bases();
    let module = cover
        .module
        .submodule(&kernels)
        .expect("kernel of a module map is a submodule");
    Syzygy {
        module,
        inclusion: Morphism {
            components: kernels,
        },
        cover,
    }
}

pub fn syzygy(m: &Module) -> Module {
    syzygy_with_data(m).module
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
    fn covers_of_simples_and_projectives() {
        let a = alg_a();
        let s2 = Module::simple(&a, 1);
        let c = top_and_cover(&s2);
        assert_eq!(c.module, Module::projective(&a, 1));
        let p2 = Module::projective(&a, 1);
        let c = top_and_cover(&p2);
        assert_eq!(c.module.total_dim(), p2.total_dim());
        assert!(c.surj.is_iso());
        let s34 = Module::direct_sum(&[&Module::simple(&a, 2), &Module::simple(&a, 3)]).unwrap();
        let c = top_and_cover(&s34);
        assert_eq!(c.top_dims(), vec![0, 0, 1, 1]);
        assert_eq!(c.module.dims(), &[2, 0, 1, 1]);
    }

    #[test]
    fn base_syzygies_by_dimension() {
        let a = alg_a();
        let dims = |v| syzygy(&Module::simple(&a, v)).dims().to_vec();
        assert_eq!(dims(2), vec![1, 0, 0, 0]);
        assert_eq!(dims(3), vec![1, 0, 0, 0]);
        assert_eq!(dims(0), vec![0, 1, 0, 0]);
        assert_eq!(dims(1), vec![0, 0, 1, 1]);
        assert!(syzygy(&Module::projective(&a, 0)).is_zero());
    }

    #[test]
    fn cover_is_minimal() {
        let a = alg_a();
        let m = Module::direct_sum(&[&Module::simple(&a, 1), &Module::projective(&a, 2)]).unwrap();
        let c = top_and_cover(&m);
        let n = c.generators.len();
        assert_eq!(n, 2);
        // Dropping any generator loses surjectivity.
        for drop in 0..n {
            let keep: Vec<Vec<usize>> = c
                .labels
                .iter()
                .map(|l| (0..l.len()).filter(|&i| l[i].0 != drop).collect())
                .collect();
            let part = Morphism {
                components: c
                    .surj
                    .components
                    .iter()
                    .zip(&keep)
                    .map(|(s, k)| s.select_cols(k))
                    .collect(),
            };
            assert!(!part.is_surjective());
        }
    }
}
