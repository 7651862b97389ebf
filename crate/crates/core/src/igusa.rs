//! The split Grothendieck group, the syzygy operator `L`, and the
//! Igusa–Todorov functions φ and ψ.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quiver::Algebra;
use crate::repmod::{decompose, is_isomorphic, iso_invariants_match, syzygy, Module, ModuleJson};

/// Default cap on the number of classes explored by [`phi`].
pub const DEFAULT_ORBIT_CAP: usize = 400;

/// Canonical ids for isomorphism classes of indecomposable non-projective
/// modules. Insertion takes `&mut self`, so concurrent readers and a single
/// writer are enforced by the borrow checker.
#[derive(Debug)]
pub struct ClassRegistry {
    algebra: Arc<Algebra>,
    reps: Vec<Module>,
    syzygy_classes: Vec<Option<K0Vector>>,
    journal: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct JournalLine {
    id: usize,
    module: ModuleJson,
}

impl ClassRegistry {
    pub fn new(algebra: &Arc<Algebra>) -> Self {
        ClassRegistry {
            algebra: algebra.clone(),
            reps: Vec::new(),
            syzygy_classes: Vec::new(),
            journal: None,
        }
    }

    /// Opens a JSON-lines journal, loading any stored representatives; new
    /// classes are appended one line at a time.
    pub fn open(algebra: &Arc<Algebra>, path: &Path) -> Result<Self> {
        let mut reg = ClassRegistry::new(algebra);
        if path.exists() {
            let file = BufReader::new(File::open(path)?);
            for (i, line) in file.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: JournalLine = serde_json::from_str(&line)?;
                if entry.id != reg.reps.len() {
                    return Err(Error::parse(i + 1, "registry ids must be consecutive"));
                }
                reg.reps.push(entry.module.to_module(algebra)?);
                reg.syzygy_classes.push(None);
            }
        }
        reg.journal = Some(path.to_path_buf());
        Ok(reg)
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn representative(&self, id: usize) -> &Module {
        &self.reps[id]
    }

    /// Registers the simples (that are not projective) in vertex order.
    pub fn seed_simples<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<usize>> {
        let mut ids = Vec::new();
        for v in 0..self.algebra.vertex_count() {
            let s = Module::simple(&self.algebra, v);
            if !s.is_projective() {
                ids.push(self.register(&s, rng)?);
            }
        }
        Ok(ids)
    }

    /// Id of a stored class isomorphic to `m`, if any.
    pub fn lookup<R: Rng + ?Sized>(&self, m: &Module, rng: &mut R) -> Option<usize> {
        self.reps
            .iter()
            .position(|r| iso_invariants_match(r, m) && is_isomorphic(r, m, rng).is_some())
    }

    /// Id for the class of the indecomposable non-projective `m`, inserting a
    /// new class when needed.
    pub fn register<R: Rng + ?Sized>(&mut self, m: &Module, rng: &mut R) -> Result<usize> {
        if let Some(id) = self.lookup(m, rng) {
            return Ok(id);
        }
        let id = self.reps.len();
        if let Some(path) = &self.journal {
            let line = serde_json::to_string(&JournalLine {
                id,
                module: ModuleJson::from_module(m),
            })?;
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            file.write_all(format!("{line}\n").as_bytes())?;
            file.flush()?;
        }
        self.reps.push(m.clone());
        self.syzygy_classes.push(None);
        Ok(id)
    }
}

/// An element of `K₀`: sparse class multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct K0Vector(pub BTreeMap<usize, i64>);

impl K0Vector {
    pub fn zero() -> Self {
        K0Vector(BTreeMap::new())
    }

    pub fn unit(id: usize) -> Self {
        K0Vector(BTreeMap::from([(id, 1)]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: usize) -> i64 {
        self.0.get(&id).copied().unwrap_or(0)
    }

    pub fn add_scaled(&mut self, other: &K0Vector, s: i64) {
        for (&k, &v) in &other.0 {
            let e = self.0.entry(k).or_insert(0);
            *e += s * v;
            if *e == 0 {
                self.0.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &K0Vector) -> K0Vector {
        let mut out = self.clone();
        out.add_scaled(other, 1);
        out
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.0.keys().copied().collect()
    }
}

/// `[M]`: decompose, drop projective summands, register the rest.
pub fn k0_class<R: Rng + ?Sized>(m: &Module, reg: &mut ClassRegistry, rng: &mut R) -> Result<K0Vector> {
    let mut out = K0Vector::zero();
    if m.is_zero() {
        return Ok(out);
    }
    let d = decompose(m, rng)?;
    for (z, mult) in &d.summands {
        if z.is_projective() {
            continue;
        }
        let id = reg.register(z, rng)?;
        out.add_scaled(&K0Vector::unit(id), *mult as i64);
    }
    Ok(out)
}

/// `L[c] = [Ω rep(c)]`, cached per class.
pub fn l_of_class<R: Rng + ?Sized>(id: usize, reg: &mut ClassRegistry, rng: &mut R) -> Result<K0Vector> {
    if let Some(v) = &reg.syzygy_classes[id] {
        return Ok(v.clone());
    }
    let omega = syzygy(&reg.reps[id]);
    let v = k0_class(&omega, reg, rng)?;
    reg.syzygy_classes[id] = Some(v.clone());
    Ok(v)
}

pub fn l_apply<R: Rng + ?Sized>(v: &K0Vector, reg: &mut ClassRegistry, rng: &mut R) -> Result<K0Vector> {
    let mut out = K0Vector::zero();
    for (&id, &k) in &v.0 {
        let img = l_of_class(id, reg, rng)?;
        out.add_scaled(&img, k);
    }
    Ok(out)
}

/// Projective dimension, with `MinusInfinity` for the zero module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjDim {
    MinusInfinity,
    Finite(usize),
    Infinite,
    /// Not projective through `Ω^cutoff`; no cycle detected yet.
    AtLeast(usize),
}

impl std::fmt::Display for ProjDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjDim::MinusInfinity => write!(f, "-inf"),
            ProjDim::Finite(n) => write!(f, "{n}"),
            ProjDim::Infinite => write!(f, "inf"),
            ProjDim::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

/// `pd M` by iterating the set of summand classes of `Ω^k M`. A repeated
/// set means the syzygies never become projective.
pub fn projective_dimension<R: Rng + ?Sized>(
    m: &Module,
    cutoff: usize,
    reg: &mut ClassRegistry,
    rng: &mut R,
) -> Result<ProjDim> {
    if m.is_zero() {
        return Ok(ProjDim::MinusInfinity);
    }
    let mut support = k0_class(m, reg, rng)?.support();
    let mut seen: Vec<BTreeSet<usize>> = Vec::new();
    let mut k = 0;
    loop {
        if support.is_empty() {
            return Ok(ProjDim::Finite(k));
        }
        if seen.contains(&support) {
            return Ok(ProjDim::Infinite);
        }
        if k >= cutoff {
            return Ok(ProjDim::AtLeast(cutoff));
        }
        let mut next = BTreeSet::new();
        for &c in &support {
            next.extend(l_of_class(c, reg, rng)?.support());
        }
        seen.push(support);
        support = next;
        k += 1;
    }
}

/// Rank over ℚ of integer vectors, by fraction-free (Bareiss) elimination.
pub fn integer_rank(vectors: &[Vec<BigInt>]) -> usize {
    let mut rows: Vec<Vec<BigInt>> = vectors.iter().filter(|v| v.iter().any(|x| *x != BigInt::from(0))).cloned().collect();
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    let zero = BigInt::from(0);
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != zero) else {
            continue;
        };
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            for c in col + 1..width {
                let v = (&rows[rank][col] * &rows[r][c] - &rows[r][col] * &rows[rank][c]) / &prev;
                rows[r][c] = v;
            }
            rows[r][col] = zero.clone();
        }
        prev = rows[rank][col].clone();
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// φ together with the data that determines it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiReport {
    pub phi: usize,
    /// `r_t = rank L^t ⟨add M⟩` for `t = 0..=D+10`, `D` the orbit size.
    pub ranks: Vec<usize>,
    /// Class ids of the non-projective summands of `M`.
    pub summand_classes: Vec<usize>,
    /// Every class reachable from them under `L`.
    pub orbit: Vec<usize>,
}

/// φ(M) = least `t` with `rank L^t⟨add M⟩ = rank L^{t+j}⟨add M⟩` for all `j`.
///
/// The classes reachable from the summands of `M` span an `L`-stable lattice
/// of rank `D`; on it the image of `L^D` is where the ranks settle, so φ is the
/// first `t` with `r_t = r_D`. Consecutive equal ranks do not suffice: a
/// rank can stay flat for several steps and then drop.
pub fn phi<R: Rng + ?Sized>(
    m: &Module,
    reg: &mut ClassRegistry,
    rng: &mut R,
    orbit_cap: usize,
) -> Result<PhiReport> {
    let start = k0_class(m, reg, rng)?;
    let summand_classes: Vec<usize> = start.support().into_iter().collect();
    let mut orbit: Vec<usize> = summand_classes.clone();
    let mut images: BTreeMap<usize, K0Vector> = BTreeMap::new();
    let mut i = 0;
    while i < orbit.len() {
        let c = orbit[i];
        let img = l_of_class(c, reg, rng)?;
        for id in img.support() {
            if !orbit.contains(&id) {
                orbit.push(id);
                if orbit.len() > orbit_cap {
                    return Err(Error::OrbitUnbounded(orbit_cap));
                }
            }
        }
        images.insert(c, img);
        i += 1;
    }
    let dim = orbit.len();
    let pos: BTreeMap<usize, usize> = orbit.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let apply = |v: &Vec<BigInt>| -> Vec<BigInt> {
        let mut out = vec![BigInt::from(0); dim];
        for (j, x) in v.iter().enumerate() {
            if *x == BigInt::from(0) {
                continue;
            }
            for (&id, &k) in &images[&orbit[j]].0 {
                out[pos[&id]] += x * BigInt::from(k);
            }
        }
        out
    };
    let mut gens: Vec<Vec<BigInt>> = summand_classes
        .iter()
        .map(|c| {
            let mut v = vec![BigInt::from(0); dim];
            v[pos[c]] = BigInt::from(1);
            v
        })
        .collect();
    let mut ranks = Vec::with_capacity(dim + 11);
    for t in 0..=dim + 10 {
        if t > 0 {
            gens = gens.iter().map(&apply).collect();
        }
        ranks.push(integer_rank(&gens));
    }
    let settled = ranks[dim];
    let phi = ranks.iter().position(|&r| r == settled).unwrap_or(0);
    Ok(PhiReport {
        phi,
        ranks,
        summand_classes,
        orbit,
    })
}

/// ψ, or the partial information available when some pd is undetermined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiValue {
    Exact(usize),
    AtLeastUnknown { phi: usize, finite_max: usize, undetermined: usize },
}

pub fn psi<R: Rng + ?Sized>(
    m: &Module,
    cutoff: usize,
    reg: &mut ClassRegistry,
    rng: &mut R,
) -> Result<PsiValue> {
    let t = phi(m, reg, rng, DEFAULT_ORBIT_CAP)?.phi;
    let mut omega = m.clone();
    for _ in 0..t {
        omega = syzygy(&omega);
    }
    let mut finite_max = 0;
    let mut undetermined = 0;
    if !omega.is_zero() {
        for (z, _) in decompose(&omega, rng)?.summands {
            match projective_dimension(&z, cutoff, reg, rng)? {
                ProjDim::Finite(n) => finite_max = finite_max.max(n),
                ProjDim::AtLeast(_) => undetermined += 1,
                ProjDim::Infinite | ProjDim::MinusInfinity => {}
            }
        }
    }
    Ok(if undetermined == 0 {
        PsiValue::Exact(t + finite_max)
    } else {
        PsiValue::AtLeastUnknown {
            phi: t,
            finite_max,
            undetermined,
        }
    })
}

/// Outcome of checking the hypotheses `Ω^t M ≅ Ω^t N`, `Ω^{t-1} M ≇ Ω^{t-1} N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowerBound {
    /// φdim(M ⊕ N) ≥ `bound` (= t − 1), with the iso witness digest.
    Certificate { t: usize, bound: usize, witness: String },
    Refuted { reason: String },
}

impl LowerBound {
    pub fn bound(&self) -> Option<usize> {
        match self {
            LowerBound::Certificate { bound, .. } => Some(*bound),
            LowerBound::Refuted { .. } => None,
        }
    }
}

/// The bound from already-established verdicts at `t` and `t − 1`.
pub fn bound_from_verdicts(t: usize, iso_at_t: Option<String>, noniso_at_t_minus_1: bool) -> LowerBound {
    if t == 0 {
        return LowerBound::Refuted {
            reason: "t must be at least 1".into(),
        };
    }
    match (iso_at_t, noniso_at_t_minus_1) {
        (Some(witness), true) => LowerBound::Certificate {
            t,
            bound: t - 1,
            witness,
        },
        (None, _) => LowerBound::Refuted {
            reason: format!("syzygies at step {t} are not isomorphic"),
        },
        (Some(_), false) => LowerBound::Refuted {
            reason: format!("syzygies at step {} are already isomorphic", t - 1),
        },
    }
}

/// Checks both hypotheses by computing the syzygies of `M` and `N`.
pub fn phi_lower_bound<R: Rng + ?Sized>(m: &Module, n: &Module, t: usize, rng: &mut R) -> LowerBound {
    if t == 0 {
        return bound_from_verdicts(0, None, false);
    }
    let (mut a, mut b) = (m.clone(), n.clone());
    for _ in 0..t - 1 {
        a = syzygy(&a);
        b = syzygy(&b);
    }
    let before = is_isomorphic(&a, &b, rng).is_none();
    let (a, b) = (syzygy(&a), syzygy(&b));
    let at = is_isomorphic(&a, &b, rng).map(|w| w.digest());
    bound_from_verdicts(t, at, before)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::exactla::Field;

    fn setup() -> (Arc<Algebra>, ClassRegistry, ChaCha8Rng) {
        let a = Algebra::builtin("A", Field::default()).unwrap();
        let reg = ClassRegistry::new(&a);
        (a, reg, ChaCha8Rng::seed_from_u64(11))
    }

    #[test]
    fn k0_examples() {
        let (a, mut reg, mut rng) = setup();
        let p12 = Module::direct_sum(&[&Module::projective(&a, 0), &Module::projective(&a, 1)]).unwrap();
        assert!(k0_class(&p12, &mut reg, &mut rng).unwrap().is_zero());
        let s3 = Module::simple(&a, 2);
        let v = k0_class(&s3.power(2), &mut reg, &mut rng).unwrap();
        assert_eq!(v.0.values().copied().collect::<Vec<_>>(), vec![2]);
        let s34 = Module::direct_sum(&[&s3, &Module::simple(&a, 3)]).unwrap();
        let v = k0_class(&s34, &mut reg, &mut rng).unwrap();
        assert_eq!(v.0.len(), 2);
    }

    #[test]
    fn l_examples() {
        let (a, mut reg, mut rng) = setup();
        let ids = reg.seed_simples(&mut rng).unwrap();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert_eq!(l_of_class(2, &mut reg, &mut rng).unwrap(), K0Vector::unit(0));
        let l2 = l_of_class(1, &mut reg, &mut rng).unwrap();
        assert_eq!(l2, K0Vector::unit(2).add(&K0Vector::unit(3)));
        assert!(l_apply(&K0Vector::zero(), &mut reg, &mut rng).unwrap().is_zero());
        let _ = a;
    }

    #[test]
    fn pd_examples() {
        let (a, mut reg, mut rng) = setup();
        assert_eq!(
            projective_dimension(&Module::projective(&a, 0), 5, &mut reg, &mut rng).unwrap(),
            ProjDim::Finite(0)
        );
        assert_eq!(
            projective_dimension(&Module::simple(&a, 2), 20, &mut reg, &mut rng).unwrap(),
            ProjDim::Infinite
        );
        assert_eq!(
            projective_dimension(&Module::zero(&a), 5, &mut reg, &mut rng).unwrap(),
            ProjDim::MinusInfinity
        );
        let k = Algebra::builtin("A3CT", Field::default()).unwrap();
        let semi = Arc::new(
            crate::quiver::parse_presentation("vertices 2\n", Field::default()).unwrap(),
        );
        let mut reg2 = ClassRegistry::new(&semi);
        assert_eq!(
            projective_dimension(&Module::simple(&semi, 1), 3, &mut reg2, &mut rng).unwrap(),
            ProjDim::Finite(0)
        );
        let _ = k;
    }

    #[test]
    fn phi_and_psi_of_s3_plus_s4() {
        let (a, mut reg, mut rng) = setup();
        let s34 = Module::direct_sum(&[&Module::simple(&a, 2), &Module::simple(&a, 3)]).unwrap();
        let rep = phi(&s34, &mut reg, &mut rng, 50).unwrap();
        assert_eq!(rep.phi, 1);
        assert_eq!(&rep.ranks[..3], &[2, 1, 1]);
        assert_eq!(psi(&s34, 20, &mut reg, &mut rng).unwrap(), PsiValue::Exact(1));
        let p = Module::projective(&a, 0);
        assert_eq!(phi(&p, &mut reg, &mut rng, 50).unwrap().phi, 0);
        assert_eq!(psi(&p, 5, &mut reg, &mut rng).unwrap(), PsiValue::Exact(0));
    }

    #[test]
    fn integer_rank_examples() {
        let v = |xs: &[i64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(integer_rank(&[v(&[1, 2]), v(&[2, 4])]), 1);
        assert_eq!(integer_rank(&[v(&[1, 0, 1]), v(&[0, 1, 1]), v(&[1, 1, 2])]), 2);
        assert_eq!(integer_rank(&[v(&[0, 0])]), 0);
        assert_eq!(integer_rank(&[v(&[3, 1]), v(&[1, 3])]), 2);
    }

    #[test]
    fn lower_bound_refutations() {
        let (a, _, mut rng) = setup();
        let s3 = Module::simple(&a, 2);
        assert!(matches!(phi_lower_bound(&s3, &s3, 2, &mut rng), LowerBound::Refuted { .. }));
        let p = Module::projective(&a, 0);
        assert!(matches!(phi_lower_bound(&p, &p, 1, &mut rng), LowerBound::Refuted { .. }));
        // S3 and S4 differ but have isomorphic first syzygies.
        let lb = phi_lower_bound(&s3, &Module::simple(&a, 3), 1, &mut rng);
        assert_eq!(lb.bound(), Some(0));
    }

    #[test]
    fn journal_round_trip() {
        let (a, _, mut rng) = setup();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reg.jsonl");
        {
            let mut reg = ClassRegistry::open(&a, &path).unwrap();
            reg.seed_simples(&mut rng).unwrap();
        }
        let mut reg = ClassRegistry::open(&a, &path).unwrap();
        assert_eq!(reg.len(), 4);
        let id = reg.register(&Module::simple(&a, 3), &mut rng).unwrap();
        assert_eq!(id, 3);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
    }
}
