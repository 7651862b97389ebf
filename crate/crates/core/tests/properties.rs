mod common;

use common::{acyclic, algebra, random_rad2_module, random_resolution, rng};
use philab_core::counterex::{FamilySpec, Workbench, SWAP_34};
use philab_core::engine::engine;
use philab_core::igusa::{phi, projective_dimension, psi, ClassRegistry, ProjDim, PsiValue, DEFAULT_ORBIT_CAP};
use philab_core::perchain::{periodic_iso, periodic_syzygy_power, wrap, BoundedComplex, PeriodicComplex, PeriodicJson};
use philab_core::quiver::Algebra;
use philab_core::repmod::{decompose, is_isomorphic, KsProfile, Module, ModuleJson};
use philab_core::trunres::{build, iterate_syzygy, ResolutionJson, SplitPlan};
use philab_core::Field;
use proptest::prelude::*;
use rand::Rng;

fn bounded_d_squared(x: &BoundedComplex) -> bool {
    (x.lo()..=x.hi() + 1).all(|n| x.differential(n - 1).compose(&x.differential(n)).is_zero())
}

fn periodic_d_squared(p: &PeriodicComplex) -> bool {
    (0..3).all(|c| p.differential((c + 2) % 3).compose(p.differential(c)).is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn syzygies_keep_d_squared_zero(seed in any::<u64>()) {
        let a = algebra("A");
        let mut g = rng(seed);
        let mut reg = ClassRegistry::new(&a);
        let x = random_resolution(&a, &mut reg, &mut g, 5);
        prop_assert!(bounded_d_squared(&x.to_complex()));
        for t in 1..=3 {
            for piece in iterate_syzygy(&x, t).unwrap() {
                prop_assert!(bounded_d_squared(&piece.to_complex()));
            }
            let p = periodic_syzygy_power(&wrap(&x.to_complex()), t).unwrap();
            prop_assert!(periodic_d_squared(&p));
        }
    }

    #[test]
    fn wrapping_is_additive(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = algebra("A");
        let mut g = rng(s1 ^ s2.rotate_left(7));
        let mut reg = ClassRegistry::new(&a);
        let x = random_resolution(&a, &mut reg, &mut g, 4).to_complex();
        let y = random_resolution(&a, &mut reg, &mut g, 4).to_complex();
        let sum = BoundedComplex::direct_sum(&[&x, &y]).unwrap();
        let w = wrap(&sum);
        prop_assert!(periodic_d_squared(&w));
        let parts = PeriodicComplex::direct_sum(&[&wrap(&x), &wrap(&y)]).unwrap();
        prop_assert!(periodic_iso(&w, &parts, &mut g).unwrap().is_some());
        prop_assert_eq!(w.total_dim(), x.total_dim() + y.total_dim());
    }

    #[test]
    fn serial_round_trips(seed in any::<u64>()) {
        let a = algebra("A");
        let mut g = rng(seed);
        let m = random_rad2_module(&a, &mut g, 2);
        let text = serde_json::to_string(&ModuleJson::from_module(&m)).unwrap();
        let back: ModuleJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_module(&a).unwrap(), m);

        let mut reg = ClassRegistry::new(&a);
        let x = random_resolution(&a, &mut reg, &mut g, 5);
        let j = serde_json::to_string(&ResolutionJson::from_resolution(&x)).unwrap();
        let back: ResolutionJson = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(back.to_resolution(&a).unwrap().to_complex(), x.to_complex());

        let w = wrap(&x.to_complex());
        let j = serde_json::to_string(&PeriodicJson::from_complex(&w)).unwrap();
        let back: PeriodicJson = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(back.to_complex(&a).unwrap(), w);
    }
}

/// Decompositions and multiplicities do not depend on the basis.
#[test]
fn krull_schmidt_is_basis_independent() {
    let mut g = rng(41);
    for round in 0..100 {
        let alg = algebra(if round % 2 == 0 { "A" } else { "A3CT" });
        let m = random_rad2_module(&alg, &mut g, 2);
        let d = decompose(&m, &mut g).unwrap();
        let (c, _) = m.random_conjugate(&mut g);
        let dc = decompose(&c, &mut g).unwrap();
        assert_eq!(d.signature(), dc.signature(), "round {round}");
        assert!(is_isomorphic(&m, &c, &mut g).is_some(), "round {round}");
        let cands: Vec<Module> = d.summands.iter().map(|(z, _)| z.clone()).collect();
        let p = KsProfile::compute(&m, &cands).unwrap();
        let pc = KsProfile::compute(&c, &cands).unwrap();
        assert!(p.complete && pc.complete, "round {round}");
        assert_eq!(p.multiplicities, pc.multiplicities, "round {round}");
        let expected: Vec<usize> = d.summands.iter().map(|(_, k)| *k).collect();
        assert_eq!(p.multiplicities, expected, "round {round}");
    }
}

#[test]
fn rank_sequences_never_increase() {
    let mut g = rng(7);
    for name in ["A", "A3CT"] {
        let alg = algebra(name);
        let mut reg = ClassRegistry::new(&alg);
        for _ in 0..25 {
            let m = random_rad2_module(&alg, &mut g, 2);
            let r = phi(&m, &mut reg, &mut g, DEFAULT_ORBIT_CAP).unwrap();
            assert!(r.ranks.windows(2).all(|w| w[0] >= w[1]), "{:?}", r.ranks);
            assert_eq!(r.ranks[r.phi..].iter().min(), r.ranks.last());
            assert!(r.ranks[r.phi..].windows(2).all(|w| w[0] == w[1]));
        }
    }
}

#[test]
fn projective_summands_do_not_change_phi() {
    let alg = algebra("A");
    let mut g = rng(8);
    let mut reg = ClassRegistry::new(&alg);
    for _ in 0..25 {
        let m = random_rad2_module(&alg, &mut g, 2);
        let v = g.gen_range(0..alg.vertex_count());
        let p = Module::projective(&alg, v).power(g.gen_range(1..=2));
        let mp = Module::direct_sum(&[&m, &p]).unwrap();
        let a = phi(&m, &mut reg, &mut g, DEFAULT_ORBIT_CAP).unwrap().phi;
        let b = phi(&mp, &mut reg, &mut g, DEFAULT_ORBIT_CAP).unwrap().phi;
        assert_eq!(a, b);
    }
}

/// Over an acyclic algebra every pd is finite, and φ, ψ and pd agree.
#[test]
fn phi_psi_pd_agree_when_pd_is_finite() {
    let alg = acyclic();
    let mut g = rng(9);
    let mut reg = ClassRegistry::new(&alg);
    for _ in 0..50 {
        let m = random_rad2_module(&alg, &mut g, 2);
        let ProjDim::Finite(pd) = projective_dimension(&m, 10, &mut reg, &mut g).unwrap() else {
            panic!("pd over an acyclic algebra must be finite");
        };
        assert_eq!(phi(&m, &mut reg, &mut g, DEFAULT_ORBIT_CAP).unwrap().phi, pd);
        assert_eq!(psi(&m, 10, &mut reg, &mut g).unwrap(), PsiValue::Exact(pd));
    }
}

/// `Y_k` obtained by relabelling `X_k` is the family built directly from
/// `S4` with `S4` peeled.
#[test]
fn relabelled_family_matches_direct_build() {
    let mut wb = Workbench::new(Field::default(), 12, "formula").unwrap();
    let a = wb.algebra().clone();
    let mut reg = ClassRegistry::new(&a);
    let mut g = rng(12);
    let s4 = reg.register(&Module::simple(&a, 3), &mut g).unwrap();
    for k in 1..=2 {
        let y = wb.family(FamilySpec::y(k)).unwrap();
        let plan = SplitPlan::peel_at((1..=k).map(|j| 3 * j), s4);
        let direct = build(&Module::simple(&a, 3), 3 + 3 * k, &plan, &mut reg, &mut g).unwrap();
        let (wy, wd) = (wrap(&y.to_complex()), wrap(&direct.to_complex()));
        assert!(periodic_iso(&wy, &wd, &mut g).unwrap().is_some(), "k = {k}");
    }
}

/// Syzygies commute with exchanging the vertices 3 and 4.
#[test]
fn syzygies_commute_with_the_symmetry() {
    let mut wb = Workbench::new(Field::default(), 13, "formula").unwrap();
    let a: std::sync::Arc<Algebra> = wb.algebra().clone();
    let arrows = a.arrow_permutation(&SWAP_34).unwrap();
    let x = wb.family(FamilySpec::x(1)).unwrap();
    let y = wb.family(FamilySpec::y(1)).unwrap();
    let mut g = rng(13);
    let formula = engine("formula").unwrap();
    for t in 0..=4 {
        let ox: Vec<_> = iterate_syzygy(&x, t).unwrap().iter().map(|s| s.relabel(&SWAP_34, &arrows)).collect();
        let relabelled = PeriodicComplex::direct_sum(&ox.iter().map(|s| wrap(&s.to_complex())).collect::<Vec<_>>().iter().collect::<Vec<_>>()).unwrap();
        let oy = formula.syzygy(&y, t).unwrap();
        assert!(periodic_iso(&relabelled, &oy, &mut g).unwrap().is_some(), "t = {t}");
    }
}
