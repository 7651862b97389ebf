//! Bounded and 3-periodic chain complexes of modules, the wrapping functor,
//! and the identification of 3-periodic complexes with modules over the
//! tensor algebra on `Q × C₃`.
//!
//! Degree classes are numbered by layer: layer `c` holds the degrees `n`
//! with `n + 1 ≡ c (mod 3)`, so degree `-1` lives in layer 0.

use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::quiver::{tensor_cycle3, Algebra, TensorLayout};
use crate::repmod::{decompose, is_isomorphic, same_algebra, syzygy, IsoWitness, Module, ModuleJson, Morphism};

/// `d_{n}: X_n → X_{n-1}` for `n` in `lo+1..=hi`.
#[derive(Clone, Debug)]
pub struct BoundedComplex {
    algebra: Arc<Algebra>,
    lo: i64,
    modules: Vec<Module>,
    diffs: Vec<Morphism>,
}

impl PartialEq for BoundedComplex {
    fn eq(&self, other: &Self) -> bool {
        self.lo == other.lo && self.modules == other.modules && self.diffs == other.diffs
    }
}

impl PartialEq for PeriodicComplex {
    fn eq(&self, other: &Self) -> bool {
        self.modules == other.modules && self.diffs == other.diffs
    }
}

fn check_square_zero(first: &Morphism, second: &Morphism, what: &str) -> Result<()> {
    if second.compose(first).is_zero() {
        Ok(())
    } else {
        Err(Error::RelationViolation(format!("d² ≠ 0 {what}")))
    }
}

impl BoundedComplex {
    /// `modules[j]` sits in degree `lo + j`; `diffs[j]` maps `modules[j+1]`
    /// to `modules[j]`.
    pub fn new(algebra: &Arc<Algebra>, lo: i64, modules: Vec<Module>, diffs: Vec<Morphism>) -> Result<Self> {
        if modules.is_empty() {
            return Err(Error::Invalid("a complex needs at least one degree".into()));
        }
        if diffs.len() + 1 != modules.len() {
            return Err(Error::Invalid("need one differential between consecutive degrees".into()));
        }
        for m in &modules {
            if !same_algebra(m.algebra(), algebra) {
                return Err(Error::Invalid("complex mixes algebras".into()));
            }
        }
        for (j, d) in diffs.iter().enumerate() {
            d.check(&modules[j + 1], &modules[j])?;
        }
        for j in 1..diffs.len() {
            check_square_zero(&diffs[j], &diffs[j - 1], &format!("at degree {}", lo + j as i64))?;
        }
        Ok(BoundedComplex {
            algebra: algebra.clone(),
            lo,
            modules,
            diffs,
        })
    }

    pub fn stalk(m: &Module, degree: i64) -> Self {
        BoundedComplex {
            algebra: m.algebra().clone(),
            lo: degree,
            modules: vec![m.clone()],
            diffs: Vec::new(),
        }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.modules.len() as i64 - 1
    }

    /// The module in degree `n`; zero outside the range.
    pub fn module(&self, n: i64) -> Module {
        if n < self.lo || n > self.hi() {
            Module::zero(&self.algebra)
        } else {
            self.modules[(n - self.lo) as usize].clone()
        }
    }

    pub fn modules(&self) -> &[Module] {
        &self.modules
    }

    /// `d_n: X_n → X_{n-1}`.
    pub fn differential(&self, n: i64) -> Morphism {
        if n <= self.lo || n > self.hi() {
            return Morphism::zero(&self.module(n), &self.module(n - 1));
        }
        self.diffs[(n - self.lo - 1) as usize].clone()
    }

    pub fn total_dim(&self) -> usize {
        self.modules.iter().map(Module::total_dim).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.modules.iter().all(Module::is_zero)
    }

    /// Degree-wise direct sum over the union of the degree ranges.
    pub fn direct_sum(parts: &[&BoundedComplex]) -> Result<BoundedComplex> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty direct sum".into()))?;
        let lo = parts.iter().map(|c| c.lo).min().unwrap_or(0);
        let hi = parts.iter().map(|c| c.hi()).max().unwrap_or(0);
        let modules: Vec<Module> = (lo..=hi)
            .map(|n| {
                let ms: Vec<Module> = parts.iter().map(|c| c.module(n)).collect();
                let refs: Vec<&Module> = ms.iter().collect();
                Module::direct_sum(&refs)
            })
            .collect::<Result<_>>()?;
        let diffs = (lo + 1..=hi)
            .map(|n| block_diagonal(&parts.iter().map(|c| c.differential(n)).collect::<Vec<_>>()))
            .collect();
        BoundedComplex::new(&first.algebra, lo, modules, diffs)
    }

    pub fn dims_by_degree(&self) -> Vec<(i64, Vec<usize>)> {
        (self.lo..=self.hi()).map(|n| (n, self.module(n).dims().to_vec())).collect()
    }

    /// One line per degree, lowest degree first.
    pub fn render(&self) -> String {
        (self.lo..=self.hi())
            .map(|n| format!("{n:>3}: {}", self.module(n).dims_string()))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn block_diagonal(maps: &[Morphism]) -> Morphism {
    let f = maps
        .iter()
        .flat_map(|m| m.components.first())
        .map(Matrix::field)
        .next()
        .unwrap_or_default();
    let n = maps.first().map_or(0, |m| m.components.len());
    Morphism {
        components: (0..n)
            .map(|v| {
                let parts: Vec<&Matrix> = maps.iter().map(|m| &m.components[v]).collect();
                Matrix::block_diag(f, &parts)
            })
            .collect(),
    }
}

/// Three modules indexed by layer with `d[c]: layer c → layer c-1`.
#[derive(Clone, Debug)]
pub struct PeriodicComplex {
    algebra: Arc<Algebra>,
    modules: [Module; 3],
    diffs: [Morphism; 3],
}

impl PeriodicComplex {
    pub fn new(algebra: &Arc<Algebra>, modules: [Module; 3], diffs: [Morphism; 3]) -> Result<Self> {
        for c in 0..3 {
            if !same_algebra(modules[c].algebra(), algebra) {
                return Err(Error::Invalid("periodic complex mixes algebras".into()));
            }
            diffs[c].check(&modules[c], &modules[(c + 2) % 3])?;
        }
        for c in 0..3 {
            check_square_zero(&diffs[c], &diffs[(c + 2) % 3], &format!("leaving layer {c}"))?;
        }
        Ok(PeriodicComplex {
            algebra: algebra.clone(),
            modules,
            diffs,
        })
    }

    pub fn zero(algebra: &Arc<Algebra>) -> Self {
        let z = Module::zero(algebra);
        let d = Morphism::zero(&z, &z);
        PeriodicComplex {
            algebra: algebra.clone(),
            modules: [z.clone(), z.clone(), z],
            diffs: [d.clone(), d.clone(), d],
        }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn layer(&self, c: usize) -> &Module {
        &self.modules[c]
    }

    /// The module in the class of degree `n`.
    pub fn class_module(&self, degree: i64) -> &Module {
        &self.modules[TensorLayout::class_of_degree(degree)]
    }

    pub fn differential(&self, c: usize) -> &Morphism {
        &self.diffs[c]
    }

    pub fn total_dim(&self) -> usize {
        self.modules.iter().map(Module::total_dim).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.modules.iter().all(Module::is_zero)
    }

    pub fn direct_sum(parts: &[&PeriodicComplex]) -> Result<PeriodicComplex> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty direct sum".into()))?;
        let mut modules = Vec::with_capacity(3);
        let mut diffs = Vec::with_capacity(3);
        for c in 0..3 {
            let refs: Vec<&Module> = parts.iter().map(|p| &p.modules[c]).collect();
            modules.push(Module::direct_sum(&refs)?);
            diffs.push(block_diagonal(&parts.iter().map(|p| p.diffs[c].clone()).collect::<Vec<_>>()));
        }
        let modules: [Module; 3] = modules.try_into().expect("three layers");
        let diffs: [Morphism; 3] = diffs.try_into().expect("three layers");
        PeriodicComplex::new(&first.algebra, modules, diffs)
    }

    /// Dimension vectors of the layers `[-1]`, `[0]`, `[1]`.
    pub fn layer_dims(&self) -> [Vec<usize>; 3] {
        [0, 1, 2].map(|c| self.modules[c].dims().to_vec())
    }

    pub fn render(&self) -> String {
        ["[-1]", "[0]", "[1]"]
            .iter()
            .enumerate()
            .map(|(c, name)| format!("{name:>4}: {}", self.modules[c].dims_string()))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// `WX`: per layer, the sum of the degrees in that class in ascending order.
pub fn wrap(x: &BoundedComplex) -> PeriodicComplex {
    let alg = &x.algebra;
    let degrees: [Vec<i64>; 3] =
        [0, 1, 2].map(|c| (x.lo()..=x.hi()).filter(|&n| TensorLayout::class_of_degree(n) == c).collect());
    let modules: [Module; 3] = [0, 1, 2].map(|c| {
        let ms: Vec<Module> = degrees[c].iter().map(|&n| x.module(n)).collect();
        if ms.is_empty() {
            Module::zero(alg)
        } else {
            Module::direct_sum(&ms.iter().collect::<Vec<_>>()).expect("one algebra")
        }
    });
    let diffs: [Morphism; 3] = [0, 1, 2].map(|c| {
        let below = (c + 2) % 3;
        if degrees[c].is_empty() || degrees[below].is_empty() {
            return Morphism::zero(&modules[c], &modules[below]);
        }
        let sources: Vec<Module> = degrees[c].iter().map(|&n| x.module(n)).collect();
        let targets: Vec<Module> = degrees[below].iter().map(|&n| x.module(n)).collect();
        let maps: Vec<Morphism> = degrees[c].iter().map(|&n| x.differential(n)).collect();
        let blocks: Vec<Vec<Option<&Morphism>>> = degrees[below]
            .iter()
            .map(|&t| {
                degrees[c]
                    .iter()
                    .zip(&maps)
                    .map(|(&n, d)| (n - 1 == t).then_some(d))
                    .collect()
            })
            .collect();
        Morphism::from_blocks(
            &sources.iter().collect::<Vec<_>>(),
            &targets.iter().collect::<Vec<_>>(),
            &blocks,
        )
    });
    PeriodicComplex {
        algebra: alg.clone(),
        modules,
        diffs,
    }
}

static TENSOR_CACHE: Mutex<Vec<(Arc<Algebra>, Arc<Algebra>)>> = Mutex::new(Vec::new());

/// The tensor algebra on `Q × C₃`, built once per base algebra.
pub fn tensor_algebra(base: &Arc<Algebra>) -> Result<Arc<Algebra>> {
    let mut cache = TENSOR_CACHE.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, t)) = cache
        .iter()
        .find(|(b, _)| same_algebra(b, base) && b.field() == base.field())
    {
        return Ok(t.clone());
    }
    let t = Arc::new(tensor_cycle3(base)?);
    cache.push((base.clone(), t.clone()));
    Ok(t)
}

pub fn periodic_to_module(p: &PeriodicComplex) -> Result<Module> {
    let tensor = tensor_algebra(&p.algebra)?;
    let lay = TensorLayout::of(&p.algebra);
    let mut dims = Vec::with_capacity(3 * lay.n);
    for c in 0..3 {
        dims.extend_from_slice(p.modules[c].dims());
    }
    let mut action = Vec::with_capacity(3 * (lay.arrows + lay.n));
    for c in 0..3 {
        action.extend(p.modules[c].actions().iter().cloned());
    }
    for c in 0..3 {
        action.extend(p.diffs[c].components.iter().cloned());
    }
    Module::new(tensor, dims, action)
}

pub fn module_to_periodic(m: &Module) -> Result<PeriodicComplex> {
    let base = m
        .algebra()
        .tensor_base()
        .ok_or_else(|| Error::Invalid("module is not over a Q × C₃ tensor algebra".into()))?
        .clone();
    let lay = TensorLayout::of(&base);
    let modules: [Module; 3] = [0, 1, 2].map(|c| {
        let dims = m.dims()[c * lay.n..(c + 1) * lay.n].to_vec();
        let action = m.actions()[c * lay.arrows..(c + 1) * lay.arrows].to_vec();
        Module::new(base.clone(), dims, action).expect("layer of a tensor module is a module")
    });
    let diffs: [Morphism; 3] = [0, 1, 2].map(|c| Morphism {
        components: (0..lay.n).map(|v| m.action(lay.d_arrow(v, c)).clone()).collect(),
    });
    Ok(PeriodicComplex {
        algebra: base,
        modules,
        diffs,
    })
}

/// Syzygy in the category of 3-periodic complexes, computed in the module
/// category of the tensor algebra.
pub fn periodic_syzygy(p: &PeriodicComplex) -> Result<PeriodicComplex> {
    module_to_periodic(&syzygy(&periodic_to_module(p)?))
}

pub fn periodic_syzygy_power(p: &PeriodicComplex, t: usize) -> Result<PeriodicComplex> {
    let mut m = periodic_to_module(p)?;
    for _ in 0..t {
        m = syzygy(&m);
    }
    module_to_periodic(&m)
}

/// Indecomposable summands with multiplicities.
pub fn periodic_decompose<R: Rng + ?Sized>(p: &PeriodicComplex, rng: &mut R) -> Result<Vec<(PeriodicComplex, usize)>> {
    let m = periodic_to_module(p)?;
    if m.is_zero() {
        return Ok(Vec::new());
    }
    decompose(&m, rng)?
        .summands
        .iter()
        .map(|(z, k)| Ok((module_to_periodic(z)?, *k)))
        .collect()
}

pub fn periodic_iso<R: Rng + ?Sized>(p: &PeriodicComplex, q: &PeriodicComplex, rng: &mut R) -> Result<Option<IsoWitness>> {
    Ok(is_isomorphic(&periodic_to_module(p)?, &periodic_to_module(q)?, rng))
}

/// Projective iff it is a sum of complexes `P ← P` with identity differential.
pub fn is_projective_periodic(p: &PeriodicComplex) -> Result<bool> {
    Ok(periodic_to_module(p)?.is_projective())
}

type Rows = Vec<Vec<u64>>;

fn rows_of(m: &Matrix) -> Rows {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

fn matrix_of(alg: &Algebra, rows: &Rows, shape: (usize, usize)) -> Result<Matrix> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::Invalid("differential block has the wrong shape".into()));
    }
    let f = alg.field();
    let data: Vec<u64> = rows.iter().flatten().copied().collect();
    if data.iter().any(|&x| x >= f.modulus()) {
        return Err(Error::Invalid("differential entry out of range".into()));
    }
    Ok(Matrix::from_vec(f, shape.0, shape.1, data))
}

fn morphism_of(alg: &Algebra, comps: &[Rows], src: &Module, dst: &Module) -> Result<Morphism> {
    if comps.len() != alg.vertex_count() {
        return Err(Error::Invalid("differential has the wrong number of components".into()));
    }
    let components = comps
        .iter()
        .enumerate()
        .map(|(v, rows)| matrix_of(alg, rows, (dst.dim(v), src.dim(v))))
        .collect::<Result<_>>()?;
    Ok(Morphism { components })
}

/// Wire form of a bounded complex; `differentials[j]` leaves degree `lo + j + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedJson {
    pub lo: i64,
    pub modules: Vec<ModuleJson>,
    pub differentials: Vec<Vec<Rows>>,
}

impl BoundedJson {
    pub fn from_complex(x: &BoundedComplex) -> Self {
        BoundedJson {
            lo: x.lo,
            modules: x.modules.iter().map(ModuleJson::from_module).collect(),
            differentials: x.diffs.iter().map(|d| d.components.iter().map(rows_of).collect()).collect(),
        }
    }

    pub fn to_complex(&self, algebra: &Arc<Algebra>) -> Result<BoundedComplex> {
        let modules: Vec<Module> = self.modules.iter().map(|m| m.to_module(algebra)).collect::<Result<_>>()?;
        if self.differentials.len() + 1 != modules.len() {
            return Err(Error::Invalid("need one differential between consecutive degrees".into()));
        }
        let diffs = self
            .differentials
            .iter()
            .enumerate()
            .map(|(j, d)| morphism_of(algebra, d, &modules[j + 1], &modules[j]))
            .collect::<Result<_>>()?;
        BoundedComplex::new(algebra, self.lo, modules, diffs)
    }
}

/// Wire form of a periodic complex, keyed by class `[-1]`, `[0]`, `[1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicJson {
    pub classes: Vec<String>,
    pub modules: Vec<ModuleJson>,
    /// `differentials[c]` maps class `c` to the class below it.
    pub differentials: Vec<Vec<Rows>>,
}

const CLASS_NAMES: [&str; 3] = ["[-1]", "[0]", "[1]"];

impl PeriodicJson {
    pub fn from_complex(p: &PeriodicComplex) -> Self {
        PeriodicJson {
            classes: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
            modules: p.modules.iter().map(ModuleJson::from_module).collect(),
            differentials: p.diffs.iter().map(|d| d.components.iter().map(rows_of).collect()).collect(),
        }
    }

    pub fn to_complex(&self, algebra: &Arc<Algebra>) -> Result<PeriodicComplex> {
        if self.modules.len() != 3 || self.differentials.len() != 3 {
            return Err(Error::Invalid("a periodic complex has exactly three classes".into()));
        }
        let ms: Vec<Module> = self.modules.iter().map(|m| m.to_module(algebra)).collect::<Result<_>>()?;
        let modules: [Module; 3] = ms.try_into().expect("three layers");
        let ds: Vec<Morphism> = (0..3)
            .map(|c| morphism_of(algebra, &self.differentials[c], &modules[c], &modules[(c + 2) % 3]))
            .collect::<Result<_>>()?;
        let diffs: [Morphism; 3] = ds.try_into().expect("three layers");
        PeriodicComplex::new(algebra, modules, diffs)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::exactla::Field;

    fn alg_a() -> Arc<Algebra> {
        Algebra::builtin("A", Field::default()).unwrap()
    }

    /// `0 ← S3 ← P3 ← P1 ← P2`: the start of the minimal resolution of S3.
    fn resolution_start(a: &Arc<Algebra>) -> BoundedComplex {
        let s3 = Module::simple(a, 2);
        let (p3, p1, p2) = (Module::projective(a, 2), Module::projective(a, 0), Module::projective(a, 1));
        let d0 = crate::repmod::top_and_cover(&s3).surj;
        let d1 = crate::repmod::hom_basis(&p1, &p3).remove(0);
        let d2 = crate::repmod::hom_basis(&p2, &p1).remove(0);
        BoundedComplex::new(a, -1, vec![s3, p3, p1, p2], vec![d0, d1, d2]).unwrap()
    }

    #[test]
    fn stalk_wraps_to_one_layer() {
        let a = alg_a();
        let m = Module::projective(&a, 1);
        let w = wrap(&BoundedComplex::stalk(&m, -1));
        assert_eq!(w.layer(0), &m);
        assert!(w.layer(1).is_zero() && w.layer(2).is_zero());
        assert!(w.differential(0).is_zero());
        assert_eq!(wrap(&BoundedComplex::stalk(&m, 2)), w);
        let t = periodic_to_module(&w).unwrap();
        assert_eq!(&t.dims()[..4], m.dims());
        assert!(t.dims()[4..].iter().all(|&d| d == 0));
    }

    #[test]
    fn wrapping_puts_degrees_in_ascending_blocks() {
        let a = alg_a();
        let x = resolution_start(&a);
        let w = wrap(&x);
        // Layer [-1] holds degrees -1 and 2.
        let expect = Module::direct_sum(&[&Module::simple(&a, 2), &Module::projective(&a, 1)]).unwrap();
        assert_eq!(w.layer(0), &expect);
        // d from layer [-1] to layer [1] carries d_2 out of the P2 block.
        let d = w.differential(0);
        let d2 = x.differential(2);
        assert_eq!(d.components[1].block(0, 0, 1, 1), d2.components[1]);
        let back = module_to_periodic(&periodic_to_module(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn projective_periodic_has_zero_syzygy() {
        let a = alg_a();
        let p = Module::projective(&a, 0);
        let x = BoundedComplex::new(&a, 0, vec![p.clone(), p.clone()], vec![Morphism::identity(&p)]).unwrap();
        let w = wrap(&x);
        assert!(is_projective_periodic(&w).unwrap());
        assert!(periodic_syzygy(&w).unwrap().is_zero());
    }

    #[test]
    fn square_zero_is_enforced() {
        let a = alg_a();
        let p = Module::projective(&a, 0);
        let id = Morphism::identity(&p);
        let err = BoundedComplex::new(&a, 0, vec![p.clone(), p.clone(), p.clone()], vec![id.clone(), id]);
        assert!(matches!(err, Err(Error::RelationViolation(_))));
    }

    #[test]
    fn json_round_trips() {
        let a = alg_a();
        let x = resolution_start(&a);
        let j = serde_json::to_string(&BoundedJson::from_complex(&x)).unwrap();
        let back: BoundedJson = serde_json::from_str(&j).unwrap();
        assert_eq!(back.to_complex(&a).unwrap(), x);
        let w = wrap(&x);
        let j = serde_json::to_string(&PeriodicJson::from_complex(&w)).unwrap();
        let back: PeriodicJson = serde_json::from_str(&j).unwrap();
        assert_eq!(back.to_complex(&a).unwrap(), w);
    }

    #[test]
    fn decompose_and_iso() {
        let a = alg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w3 = wrap(&BoundedComplex::stalk(&Module::simple(&a, 2), -1));
        let w4 = wrap(&BoundedComplex::stalk(&Module::simple(&a, 3), -1));
        assert!(periodic_iso(&w3, &w3, &mut rng).unwrap().is_some());
        assert!(periodic_iso(&w3, &w4, &mut rng).unwrap().is_none());
        let s = PeriodicComplex::direct_sum(&[&w3, &w4, &w3]).unwrap();
        let parts = periodic_decompose(&s, &mut rng).unwrap();
        let mut mults: Vec<usize> = parts.iter().map(|(_, k)| *k).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 2]);
    }
}
