#![allow(dead_code)]

use std::sync::Arc;

use philab_core::exactla::{Field, Matrix};
use philab_core::igusa::ClassRegistry;
use philab_core::quiver::{parse_presentation, Algebra};
use philab_core::repmod::Module;
use philab_core::trunres::{build, Peel, PlanStep, SplitPlan, TruncatedResolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn algebra(name: &str) -> Arc<Algebra> {
    Algebra::builtin(name, Field::default()).unwrap()
}

/// `1 → 2 → 3`, `2 → 4` modulo paths of length two: acyclic, so every
/// module has finite projective dimension.
pub fn acyclic() -> Arc<Algebra> {
    let text = "name T\nvertices 4\narrow a 1 2\narrow b 2 3\narrow c 2 4\nrad2\n";
    Arc::new(parse_presentation(text, Field::default()).unwrap())
}

/// A random module over a radical-square-zero algebra, in a random basis.
///
/// Each space is split as top ⊕ radical; arrows send top to radical at
/// random and kill the radical, which is every such module up to
/// isomorphism.
pub fn random_rad2_module(alg: &Arc<Algebra>, rng: &mut ChaCha8Rng, max_part: usize) -> Module {
    let f = alg.field();
    let n = alg.vertex_count();
    loop {
        let top: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=max_part)).collect();
        let rad: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=max_part)).collect();
        let dims: Vec<usize> = (0..n).map(|v| top[v] + rad[v]).collect();
        if dims.iter().sum::<usize>() == 0 {
            continue;
        }
        let action = alg
            .quiver()
            .arrows()
            .iter()
            .map(|a| {
                let mut m = Matrix::zeros(f, dims[a.target], dims[a.source]);
                for r in 0..rad[a.target] {
                    for c in 0..top[a.source] {
                        m.set(top[a.target] + r, c, f.random(rng));
                    }
                }
                m
            })
            .collect();
        let m = Module::new(alg.clone(), dims, action).unwrap();
        return m.random_conjugate(rng).0;
    }
}

/// A truncated resolution over `A` with a random base (sum of simples), a
/// random length `2..=max_m`, and random peels of simple summands; plans
/// that `build` rejects are redrawn.
pub fn random_resolution(alg: &Arc<Algebra>, reg: &mut ClassRegistry, rng: &mut ChaCha8Rng, max_m: usize) -> TruncatedResolution {
    let simples = reg.seed_simples(rng).unwrap();
    loop {
        let mut parts = Vec::new();
        for v in 0..alg.vertex_count() {
            for _ in 0..rng.gen_range(0..=1) {
                parts.push(Module::simple(alg, v));
            }
        }
        if parts.is_empty() {
            continue;
        }
        let base = Module::direct_sum(&parts.iter().collect::<Vec<_>>()).unwrap();
        let m = rng.gen_range(2..=max_m);
        let mut steps = Vec::new();
        for step in 1..m {
            if rng.gen_bool(0.4) {
                let class = simples[rng.gen_range(0..simples.len())];
                steps.push(PlanStep {
                    step,
                    peel: vec![Peel { class, mult: 1 }],
                });
            }
        }
        if let Ok(t) = build(&base, m, &SplitPlan(steps), reg, rng) {
            return t;
        }
    }
}
