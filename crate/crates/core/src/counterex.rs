//! The families `X_k`, `Y_k`, `Z_k^i` over `A` and the checks built on them:
//! small and big syzygy identities, the φ lower-bound certificate, and the
//! non-projectivity sweep.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{engine, SyzygyEngine};
use crate::error::{Error, Result};
use crate::exactla::Field;
use crate::igusa::{bound_from_verdicts, phi, ClassRegistry, LowerBound, DEFAULT_ORBIT_CAP};
use crate::perchain::{is_projective_periodic, periodic_iso, periodic_to_module, tensor_algebra, wrap, PeriodicComplex};
use crate::quiver::Algebra;
use crate::repmod::{is_isomorphic, iso_invariants_match, multiplicity, KsProfile, Module};
use crate::trunres::{build, check_indecomposability_criterion, SplitPlan, TruncatedResolution};

/// Largest `k` accepted; sizes grow like `2^k`.
pub const MAX_K: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyKind {
    X,
    Y,
    Z,
}

/// `X_k`, `Y_k`, or `Z_k^i` (with `i` in `1..=4`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub k: usize,
    pub i: Option<usize>,
}

impl FamilySpec {
    pub fn x(k: usize) -> Self {
        FamilySpec { kind: FamilyKind::X, k, i: None }
    }

    pub fn y(k: usize) -> Self {
        FamilySpec { kind: FamilyKind::Y, k, i: None }
    }

    pub fn z(k: usize, i: usize) -> Self {
        FamilySpec { kind: FamilyKind::Z, k, i: Some(i) }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.i) {
            (FamilyKind::Z, Some(i)) if (1..=4).contains(&i) => Ok(()),
            (FamilyKind::Z, _) => Err(Error::Config("Z needs a vertex in 1..=4".into())),
            (_, None) => Ok(()),
            (_, Some(_)) => Err(Error::Config("only Z takes a vertex".into())),
        }?;
        if self.k > MAX_K {
            return Err(Error::Config(format!("k = {} exceeds the limit {MAX_K}", self.k)));
        }
        Ok(())
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.i) {
            (FamilyKind::X, _) => write!(f, "X{}", self.k),
            (FamilyKind::Y, _) => write!(f, "Y{}", self.k),
            (FamilyKind::Z, i) => write!(f, "Z{}_{}", self.k, i.unwrap_or(0)),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// `X1`, `Y2`, `Z0_3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse family {s:?}; expected e.g. X1, Y2, Z0_3"));
        let (head, rest) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        let spec = match head {
            "X" | "x" => FamilySpec::x(rest.parse().map_err(|_| bad())?),
            "Y" | "y" => FamilySpec::y(rest.parse().map_err(|_| bad())?),
            "Z" | "z" => {
                let (k, i) = rest.split_once('_').ok_or_else(bad)?;
                FamilySpec::z(k.parse().map_err(|_| bad())?, i.parse().map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Vertex permutation exchanging 3 and 4.
pub const SWAP_34: [usize; 4] = [0, 1, 3, 2];

/// The algebra `A`, its simple-class registry, randomness and the chosen
/// syzygy engine, with caches for the families.
pub struct Workbench {
    algebra: Arc<Algebra>,
    registry: ClassRegistry,
    rng: ChaCha8Rng,
    engine: Box<dyn SyzygyEngine>,
    simple_class: Vec<usize>,
    families: HashMap<FamilySpec, TruncatedResolution>,
    wrapped_z: HashMap<(usize, usize), PeriodicComplex>,
    pub record_timings: bool,
}

impl Workbench {
    pub fn new(field: Field, seed: u64, engine_name: &str) -> Result<Self> {
        let algebra = Algebra::builtin("A", field)?;
        let registry = ClassRegistry::new(&algebra);
        Workbench::with_registry(algebra, registry, seed, engine_name)
    }

    /// Uses a caller-supplied registry over `A` (for example a persisted one).
    pub fn with_registry(algebra: Arc<Algebra>, mut registry: ClassRegistry, seed: u64, engine_name: &str) -> Result<Self> {
        if algebra.name() != "A" || algebra.vertex_count() != 4 {
            return Err(Error::Config("the families live over the algebra A".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let simple_class = (0..4)
            .map(|v| registry.register(&Module::simple(&algebra, v), &mut rng))
            .collect::<Result<_>>()?;
        Ok(Workbench {
            algebra,
            registry,
            rng,
            engine: engine(engine_name)?,
            simple_class,
            families: HashMap::new(),
            wrapped_z: HashMap::new(),
            record_timings: false,
        })
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn registry(&self) -> &ClassRegistry {
        &self.registry
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn engine_name(&self) -> &'static str {
        self.engine.name()
    }

    /// The truncated resolution named by `spec`.
    pub fn family(&mut self, spec: FamilySpec) -> Result<TruncatedResolution> {
        spec.validate()?;
        if let Some(t) = self.families.get(&spec) {
            return Ok(t.clone());
        }
        let m = 3 + 3 * spec.k;
        let t = match spec.kind {
            FamilyKind::X => {
                let plan = SplitPlan::peel_at((1..=spec.k).map(|j| 3 * j), self.simple_class[2]);
                build(&Module::simple(&self.algebra, 2), m, &plan, &mut self.registry, &mut self.rng)?
            }
            FamilyKind::Y => {
                let x = self.family(FamilySpec::x(spec.k))?;
                let arrows = self
                    .algebra
                    .arrow_permutation(&SWAP_34)
                    .ok_or_else(|| Error::Invalid("3 ↔ 4 is not an automorphism".into()))?;
                x.relabel(&SWAP_34, &arrows)
            }
            FamilyKind::Z => {
                let v = spec.i.expect("validated") - 1;
                build(&Module::simple(&self.algebra, v), m, &SplitPlan::none(), &mut self.registry, &mut self.rng)?
            }
        };
        self.families.insert(spec, t.clone());
        Ok(t)
    }

    pub fn wrapped(&mut self, spec: FamilySpec) -> Result<PeriodicComplex> {
        if let (FamilyKind::Z, Some(i)) = (spec.kind, spec.i) {
            if let Some(p) = self.wrapped_z.get(&(spec.k, i)) {
                return Ok(p.clone());
            }
            let p = wrap(&self.family(spec)?.to_complex());
            self.wrapped_z.insert((spec.k, i), p.clone());
            return Ok(p);
        }
        Ok(wrap(&self.family(spec)?.to_complex()))
    }

    fn iso(&mut self, a: &PeriodicComplex, b: &PeriodicComplex) -> Result<Option<String>> {
        Ok(periodic_iso(a, b, &mut self.rng)?.map(|w| w.digest()))
    }

    /// The three identities `ΩZ³ ≅ Z¹ ≅ ΩZ⁴`, `ΩZ¹ ≅ Z²`, `ΩZ² ≅ Z³ ⊕ Z⁴`
    /// at level `k`, checked after wrapping.
    pub fn small_syzygy_checks(&mut self, k: usize) -> Result<Vec<ClaimCheck>> {
        let z: Vec<PeriodicComplex> = (1..=4).map(|i| self.wrapped(FamilySpec::z(k, i))).collect::<Result<_>>()?;
        let omega: Vec<PeriodicComplex> = (1..=4)
            .map(|i| {
                let t = self.family(FamilySpec::z(k, i))?;
                self.engine.syzygy(&t, 1)
            })
            .collect::<Result<_>>()?;
        let z34 = PeriodicComplex::direct_sum(&[&z[2], &z[3]])?;
        let cases = [
            (format!("ΩZ{k}_3 ≅ Z{k}_1"), &omega[2], &z[0]),
            (format!("ΩZ{k}_4 ≅ Z{k}_1"), &omega[3], &z[0]),
            (format!("ΩZ{k}_1 ≅ Z{k}_2"), &omega[0], &z[1]),
            (format!("ΩZ{k}_2 ≅ Z{k}_3 ⊕ Z{k}_4"), &omega[1], &z34),
        ];
        let mut out = Vec::new();
        for (claim, a, b) in cases {
            let witness = self.iso(a, b)?;
            out.push(ClaimCheck {
                claim,
                holds: witness.is_some(),
                witness,
            });
        }
        Ok(out)
    }

    pub fn verify_small_syzygy(&mut self, k: usize) -> Result<bool> {
        Ok(self.small_syzygy_checks(k)?.iter().all(|c| c.holds))
    }

    /// The multiset of `Ω^{3k}` of `X_k` (or `Y_k`), keyed by `(j, i)` for
    /// `Z_j^i`: `Z_k^4 ⊕ Z_{k-1}^3 ⊕ ⊕_{j ≤ k-2} (Z_j^3 ⊕ Z_j^4)^{2^{k-j-2}}`
    /// for `X_k` whatever the parity of `k`, with 3 and 4 exchanged for `Y_k`.
    ///
    /// The exponent doubles because `Ω³Z_j^3 ≅ Ω³Z_j^4 ≅ Z_j^3 ⊕ Z_j^4`.
    pub fn expected_big_syzygy(kind: FamilyKind, k: usize) -> BTreeMap<(usize, usize), usize> {
        big_syzygy_multiset(kind == FamilyKind::Y, k, |e| 1 << (e - 1))
    }

    /// The parity-dependent variant with linear multiplicities `k - j - 1`:
    /// the leading terms swap 3 and 4 for even `k`. It agrees with
    /// [`Workbench::expected_big_syzygy`] for `k ∈ {1, 3}` only.
    pub fn parity_big_syzygy(kind: FamilyKind, k: usize) -> BTreeMap<(usize, usize), usize> {
        big_syzygy_multiset((kind == FamilyKind::Y) != k.is_multiple_of(2), k, |e| e)
    }

    /// Identifies the summands of the given pieces among `WZ_j^i`
    /// (`j ≤ k`, `i ∈ {3, 4}`): first by a direct isomorphism, otherwise by
    /// Krull–Schmidt multiplicities. `None` if something is left over.
    pub fn classify(&mut self, parts: &[PeriodicComplex], k: usize) -> Result<Option<BTreeMap<(usize, usize), usize>>> {
        let keys: Vec<(usize, usize)> = (0..=k).flat_map(|j| [(j, 3), (j, 4)]).collect();
        let cands: Vec<PeriodicComplex> = keys.iter().map(|&(j, i)| self.wrapped(FamilySpec::z(j, i))).collect::<Result<_>>()?;
        let cand_modules: Vec<Module> = cands.iter().map(periodic_to_module).collect::<Result<_>>()?;
        let mut out = BTreeMap::new();
        for part in parts {
            let pm = periodic_to_module(part)?;
            let direct = cand_modules
                .iter()
                .position(|c| iso_invariants_match(c, &pm) && is_isomorphic(c, &pm, &mut self.rng).is_some());
            if let Some(ci) = direct {
                *out.entry(keys[ci]).or_insert(0) += 1;
                continue;
            }
            let fitting: Vec<usize> = (0..cands.len())
                .filter(|&ci| cand_modules[ci].dims().iter().zip(pm.dims()).all(|(a, b)| a <= b))
                .collect();
            let sub: Vec<Module> = fitting.iter().map(|&ci| cand_modules[ci].clone()).collect();
            let prof = KsProfile::compute(&pm, &sub)?;
            if !prof.complete {
                return Ok(None);
            }
            for (&ci, &mu) in fitting.iter().zip(&prof.multiplicities) {
                if mu > 0 {
                    *out.entry(keys[ci]).or_insert(0) += mu;
                }
            }
        }
        Ok(Some(out))
    }

    /// `Ω^{3k}` of `WX_k` and `WY_k` match the closed formula exactly.
    pub fn verify_big_syzygy(&mut self, k: usize) -> Result<bool> {
        Ok(self.big_syzygy_report(k)?.matches)
    }

    pub fn big_syzygy_report(&mut self, k: usize) -> Result<BigSyzygyReport> {
        if k == 0 {
            return Err(Error::Config("the big syzygy identity needs k ≥ 1".into()));
        }
        let mut sides = Vec::new();
        for kind in [FamilyKind::X, FamilyKind::Y] {
            let spec = FamilySpec { kind, k, i: None };
            let t = self.family(spec)?;
            let parts = self.engine.syzygy_parts(&t, 3 * k)?;
            let found = self.classify(&parts, k)?;
            let expected = Workbench::expected_big_syzygy(kind, k);
            let parity = Workbench::parity_big_syzygy(kind, k);
            sides.push(SideMultiset {
                family: spec.to_string(),
                matches: found.as_ref() == Some(&expected),
                matches_parity_formula: found.as_ref() == Some(&parity),
                expected: render_multiset(&expected),
                found: found.as_ref().map(render_multiset),
            });
        }
        let matches = sides.iter().all(|s| s.matches);
        let matches_parity_formula = sides.iter().all(|s| s.matches_parity_formula);
        Ok(BigSyzygyReport {
            k,
            sides,
            matches,
            matches_parity_formula,
        })
    }

    /// φ(WX_k ⊕ WY_k) computed from the rank sequence over the tensor algebra.
    pub fn exact_phi(&mut self, k: usize) -> Result<(usize, Vec<usize>)> {
        let wx = self.wrapped(FamilySpec::x(k))?;
        let wy = self.wrapped(FamilySpec::y(k))?;
        let sum = periodic_to_module(&PeriodicComplex::direct_sum(&[&wx, &wy])?)?;
        let tensor = tensor_algebra(&self.algebra)?;
        let mut reg = ClassRegistry::new(&tensor);
        let rep = phi(&sum, &mut reg, &mut self.rng, DEFAULT_ORBIT_CAP)?;
        Ok((rep.phi, rep.ranks))
    }

    /// Runs every check for one `k`.
    pub fn verify_main(&mut self, k: usize, compute_exact_phi: bool) -> Result<VerificationReport> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let mut timings = BTreeMap::new();
        let mut clock = Instant::now();
        let mut lap = |name: &str, timings: &mut BTreeMap<String, u128>| {
            timings.insert(name.to_string(), clock.elapsed().as_millis());
            clock = Instant::now();
        };
        let x = self.family(FamilySpec::x(k))?;
        let y = self.family(FamilySpec::y(k))?;
        let criterion = check_indecomposability_criterion(&x, &mut self.rng)? && check_indecomposability_criterion(&y, &mut self.rng)?;
        lap("families", &mut timings);

        let t = 3 * k;
        let x_parts = self.engine.syzygy_parts(&x, t)?;
        let y_parts = self.engine.syzygy_parts(&y, t)?;
        let x_found = self.classify(&x_parts, k)?;
        let y_found = self.classify(&y_parts, k)?;
        let big_syzygy_match = x_found.as_ref() == Some(&Workbench::expected_big_syzygy(FamilyKind::X, k))
            && y_found.as_ref() == Some(&Workbench::expected_big_syzygy(FamilyKind::Y, k));
        let parity_formula_match = x_found.as_ref() == Some(&Workbench::parity_big_syzygy(FamilyKind::X, k))
            && y_found.as_ref() == Some(&Workbench::parity_big_syzygy(FamilyKind::Y, k));
        // Different Krull–Schmidt multisets certify non-isomorphism.
        let noniso_at_3k = matches!((&x_found, &y_found), (Some(a), Some(b)) if a != b);
        lap("syzygy_3k", &mut timings);

        let x_next = self.engine.syzygy(&x, t + 1)?;
        let y_next = self.engine.syzygy(&y, t + 1)?;
        let iso_witness = self.iso(&x_next, &y_next)?;
        lap("syzygy_3k_plus_1", &mut timings);

        let bound = bound_from_verdicts(t + 1, iso_witness.clone(), noniso_at_3k);
        let distinguishing = self.distinguishing_data(k, &x_found, &y_found)?;
        let exact = if compute_exact_phi { Some(self.exact_phi(k)?) } else { None };
        lap("phi", &mut timings);

        let sweep = self.nonprojective_sweep(FamilySpec::x(k), 3 * k + 6)?;
        lap("sweep", &mut timings);

        let wx = wrap(&x.to_complex());
        let omega_dims = |ps: &[PeriodicComplex]| ps.iter().map(PeriodicComplex::total_dim).sum();
        Ok(VerificationReport {
            k,
            engine: self.engine.name().to_string(),
            indecomposability_criterion: criterion,
            iso_at_3k_plus_1: iso_witness.is_some(),
            iso_witness,
            noniso_at_3k,
            distinguishing,
            phi_lower_bound: bound.bound(),
            certificate: bound,
            exact_phi: exact.as_ref().map(|e| e.0),
            phi_ranks: exact.map(|e| e.1),
            big_syzygy_match,
            parity_formula_match,
            x_syzygy_3k: x_found.as_ref().map(render_multiset),
            y_syzygy_3k: y_found.as_ref().map(render_multiset),
            nonprojective_through: sweep,
            stats: DimensionStats {
                wrapped_dim: wx.total_dim(),
                layer_dims: wx.layer_dims().to_vec(),
                syzygy_3k_dim: omega_dims(&x_parts),
                syzygy_3k_pieces: x_parts.len(),
            },
            shape: describe_resolution(&x),
            runtimes_ms: self.record_timings.then_some(timings),
        })
    }

    fn distinguishing_data(
        &mut self,
        k: usize,
        x_found: &Option<BTreeMap<(usize, usize), usize>>,
        y_found: &Option<BTreeMap<(usize, usize), usize>>,
    ) -> Result<Distinguishing> {
        let layer = |p: &PeriodicComplex| p.layer(0).clone();
        let z3 = self.wrapped(FamilySpec::z(k, 3))?;
        let z4 = self.wrapped(FamilySpec::z(k, 4))?;
        let s3 = Module::simple(&self.algebra, 2);
        let only = |a: &Option<BTreeMap<(usize, usize), usize>>, b: &Option<BTreeMap<(usize, usize), usize>>| -> Vec<String> {
            match (a, b) {
                (Some(a), Some(b)) => a
                    .iter()
                    .filter(|(key, &n)| b.get(key).copied().unwrap_or(0) < n)
                    .map(|(&(j, i), _)| format!("Z{j}_{i}"))
                    .collect(),
                _ => Vec::new(),
            }
        };
        Ok(Distinguishing {
            only_in_x: only(x_found, y_found),
            only_in_y: only(y_found, x_found),
            s3_in_z3_layer: multiplicity(&s3, &layer(&z3))?,
            s3_in_z4_layer: multiplicity(&s3, &layer(&z4))?,
        })
    }

    /// Largest `t ≤ limit` such that `Ω^s W(spec)` is nonzero and
    /// non-projective for every `s ≤ t`.
    pub fn nonprojective_sweep(&mut self, spec: FamilySpec, limit: usize) -> Result<usize> {
        let t0 = self.family(spec)?;
        let mut reached = 0;
        for t in 0..=limit {
            let parts = self.engine.syzygy_parts(&t0, t)?;
            let mut nonprojective = false;
            for p in &parts {
                if !p.is_zero() && !is_projective_periodic(p)? {
                    nonprojective = true;
                    break;
                }
            }
            if !nonprojective {
                break;
            }
            reached = t;
        }
        Ok(reached)
    }
}

/// `mult(k - j - 1)` copies of `Z_j^3 ⊕ Z_j^4` for `j ≤ k - 2`.
fn big_syzygy_multiset(swapped: bool, k: usize, mult: impl Fn(usize) -> usize) -> BTreeMap<(usize, usize), usize> {
    let (a, b) = if swapped { (3, 4) } else { (4, 3) };
    let mut out = BTreeMap::new();
    *out.entry((k, a)).or_insert(0) += 1;
    if k >= 1 {
        *out.entry((k - 1, b)).or_insert(0) += 1;
    }
    for j in 0..k.saturating_sub(1) {
        for i in [3, 4] {
            *out.entry((j, i)).or_insert(0) += mult(k - j - 1);
        }
    }
    out
}

fn render_multiset(m: &BTreeMap<(usize, usize), usize>) -> Vec<String> {
    m.iter()
        .map(|(&(j, i), &n)| if n == 1 { format!("Z{j}_{i}") } else { format!("Z{j}_{i}^{n}") })
        .collect()
}

/// Names a module over `A` when it is projective or semisimple, e.g.
/// `P3+P4`, `S1^2`; otherwise prints its dimension vector.
pub fn describe_module(m: &Module) -> String {
    if m.is_zero() {
        return "0".into();
    }
    let sum = |letter: char, counts: &[usize]| -> String {
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| if c == 1 { format!("{letter}{}", v + 1) } else { format!("{letter}{}^{c}", v + 1) })
            .collect::<Vec<_>>()
            .join("+")
    };
    if m.actions().iter().all(|a| a.is_zero()) {
        return sum('S', m.dims());
    }
    let cover = crate::repmod::top_and_cover(m);
    if cover.module.total_dim() == m.total_dim() {
        return sum('P', &cover.top_dims());
    }
    m.dims_string()
}

/// One entry per degree from `-1`: the projective part and the peeled part.
pub fn describe_resolution(t: &TruncatedResolution) -> Vec<String> {
    (-1..=t.m() as i64)
        .map(|k| {
            let p = describe_module(&t.p_or_base(k));
            let q = t.q(k);
            match (q.is_zero(), p.as_str()) {
                (true, _) => p,
                (false, "0") => describe_module(&q),
                (false, _) => format!("{p} | {}", describe_module(&q)),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub holds: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideMultiset {
    pub family: String,
    pub expected: Vec<String>,
    pub found: Option<Vec<String>>,
    pub matches: bool,
    pub matches_parity_formula: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigSyzygyReport {
    pub k: usize,
    pub sides: Vec<SideMultiset>,
    pub matches: bool,
    pub matches_parity_formula: bool,
}

/// Why `Ω^{3k}WX_k` and `Ω^{3k}WY_k` differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distinguishing {
    pub only_in_x: Vec<String>,
    pub only_in_y: Vec<String>,
    /// Multiplicity of `S3` in the degree-class-`[-1]` module of `WZ_k^3`.
    pub s3_in_z3_layer: usize,
    pub s3_in_z4_layer: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionStats {
    pub wrapped_dim: usize,
    pub layer_dims: Vec<Vec<usize>>,
    pub syzygy_3k_dim: usize,
    pub syzygy_3k_pieces: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub k: usize,
    pub engine: String,
    pub indecomposability_criterion: bool,
    pub iso_at_3k_plus_1: bool,
    pub iso_witness: Option<String>,
    pub noniso_at_3k: bool,
    pub distinguishing: Distinguishing,
    pub phi_lower_bound: Option<usize>,
    pub certificate: LowerBound,
    pub exact_phi: Option<usize>,
    pub phi_ranks: Option<Vec<usize>>,
    pub big_syzygy_match: bool,
    /// Whether the parity-dependent variant also matches (it does for odd `k`).
    pub parity_formula_match: bool,
    pub x_syzygy_3k: Option<Vec<String>>,
    pub y_syzygy_3k: Option<Vec<String>>,
    /// Largest `t` checked with every `Ω^s WX_k`, `s ≤ t`, non-projective.
    pub nonprojective_through: usize,
    pub stats: DimensionStats,
    /// `X_k` degree by degree, from `-1`.
    pub shape: Vec<String>,
    /// Present only when timings were requested, so that reports are
    /// reproducible byte for byte by default.
    pub runtimes_ms: Option<BTreeMap<String, u128>>,
}

impl VerificationReport {
    /// Every flag the construction predicts.
    pub fn passes(&self) -> bool {
        self.indecomposability_criterion
            && self.iso_at_3k_plus_1
            && self.noniso_at_3k
            && self.big_syzygy_match
            && self.phi_lower_bound.is_some_and(|b| b >= 3 * self.k)
            && self.exact_phi.is_none_or(|p| p >= 3 * self.k)
            && self.nonprojective_through >= 3 * self.k + 6
            && self.distinguishing.s3_in_z3_layer > 0
            && self.distinguishing.s3_in_z4_layer == 0
    }

    pub fn render_text(&self) -> String {
        let yes = |b: bool| if b { "yes" } else { "NO" };
        let mut out = String::new();
        out.push_str(&format!("k = {} (engine {})\n", self.k, self.engine));
        out.push_str(&format!("X_{}: {}\n", self.k, self.shape.join(" <- ")));
        out.push_str(&format!(
            "WX_{} dims by class [-1],[0],[1]: {:?} (total {})\n",
            self.k, self.stats.layer_dims, self.stats.wrapped_dim
        ));
        out.push_str(&format!("criterion for indecomposability: {}\n", yes(self.indecomposability_criterion)));
        out.push_str(&format!("Ω^{} WX ≅ Ω^{} WY: {}", 3 * self.k + 1, 3 * self.k + 1, yes(self.iso_at_3k_plus_1)));
        if let Some(w) = &self.iso_witness {
            out.push_str(&format!(" (witness {})", &w[..16.min(w.len())]));
        }
        out.push('\n');
        out.push_str(&format!(
            "Ω^{} WX ≇ Ω^{} WY: {} (only in X: {}; only in Y: {})\n",
            3 * self.k,
            3 * self.k,
            yes(self.noniso_at_3k),
            self.distinguishing.only_in_x.join(", "),
            self.distinguishing.only_in_y.join(", ")
        ));
        let show = |m: &Option<Vec<String>>| m.as_ref().map_or("?".to_string(), |v| v.join(" ⊕ "));
        out.push_str(&format!("Ω^{} WX = {}\n", 3 * self.k, show(&self.x_syzygy_3k)));
        out.push_str(&format!("Ω^{} WY = {}\n", 3 * self.k, show(&self.y_syzygy_3k)));
        out.push_str(&format!(
            "decomposition matches: {} (parity-dependent form: {})\n",
            yes(self.big_syzygy_match),
            yes(self.parity_formula_match)
        ));
        match self.phi_lower_bound {
            Some(b) => out.push_str(&format!("certified φ(WX ⊕ WY) ≥ {b}\n")),
            None => out.push_str(&format!("no certificate: {:?}\n", self.certificate)),
        }
        if let Some(p) = self.exact_phi {
            out.push_str(&format!("φ(WX ⊕ WY) = {p}, ranks {:?}\n", self.phi_ranks.as_deref().unwrap_or(&[])));
        }
        out.push_str(&format!("non-projective syzygies through t = {}\n", self.nonprojective_through));
        out.push_str(&format!("overall: {}\n", if self.passes() { "pass" } else { "FAIL" }));
        out
    }
}
