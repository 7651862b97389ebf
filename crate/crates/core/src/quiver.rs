//! Quivers, bound quiver algebras and the `Q × C₃` tensor construction.
//!
//! Paths store their arrows in application order: the path `βα` (first `α`,
//! then `β`) is `[α, β]`. Presentation files list relations in composition
//! order (leftmost applied last), so the parser reverses them.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactla::Field;

const A_PRESENTATION: &str = include_str!("../algebras/A.quiver");
const A3CT_PRESENTATION: &str = include_str!("../algebras/A3CT.quiver");

/// Names accepted by [`Algebra::builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["A", "A3CT", "A_tensor_A3CT"];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quiver {
    vertex_count: usize,
    arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new(vertex_count: usize, arrows: Vec<Arrow>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Invalid("quiver needs at least one vertex".into()));
        }
        let mut labels = BTreeSet::new();
        for a in &arrows {
            if a.source >= vertex_count || a.target >= vertex_count {
                return Err(Error::Invalid(format!("arrow {} out of range", a.label)));
            }
            if !labels.insert(a.label.as_str()) {
                return Err(Error::Invalid(format!("duplicate arrow label {}", a.label)));
            }
        }
        Ok(Quiver {
            vertex_count,
            arrows,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, i: usize) -> &Arrow {
        &self.arrows[i]
    }

    pub fn arrow_index(&self, label: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.label == label)
    }

    pub fn arrows_from(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&i| self.arrows[i].source == v)
    }

    pub fn arrows_into(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&i| self.arrows[i].target == v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub start: usize,
    pub arrows: Vec<usize>,
}

impl Path {
    pub fn trivial(v: usize) -> Self {
        Path {
            start: v,
            arrows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn end(&self, q: &Quiver) -> usize {
        self.arrows.last().map_or(self.start, |&a| q.arrow(a).target)
    }

    pub fn is_composable(&self, q: &Quiver) -> bool {
        let mut at = self.start;
        for &a in &self.arrows {
            if a >= q.arrow_count() || q.arrow(a).source != at {
                return false;
            }
            at = q.arrow(a).target;
        }
        true
    }

    fn has_suffix(&self, suffix: &[usize]) -> bool {
        self.arrows.ends_with(suffix)
    }

    /// Labels in composition order, e.g. `x2*x1` for "x1 then x2".
    pub fn render(&self, q: &Quiver) -> String {
        if self.arrows.is_empty() {
            return format!("e{}", self.start + 1);
        }
        let parts: Vec<&str> = self
            .arrows
            .iter()
            .rev()
            .map(|&a| q.arrow(a).label.as_str())
            .collect();
        parts.join("*")
    }
}

/// A relation `Σ coeff · path` among parallel paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub terms: Vec<(u64, Path)>,
}

impl Relation {
    pub fn monomial(p: Path) -> Self {
        Relation { terms: vec![(1, p)] }
    }
}

#[derive(Clone, Debug)]
pub enum AlgebraKind {
    /// Relations are single paths; `basis` is the surviving path basis.
    Monomial { basis: Vec<Path> },
    /// `base ⊗ A₃^CT` on the quiver `Q × C₃`.
    TensorCycle3 { base: Arc<Algebra> },
}

/// A bound quiver algebra `KQ/I` over a prime field.
#[derive(Clone, Debug)]
pub struct Algebra {
    name: String,
    quiver: Quiver,
    relations: Vec<Relation>,
    field: Field,
    kind: AlgebraKind,
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} vertices, {} arrows, {} relations)",
            self.name,
            self.quiver.vertex_count(),
            self.quiver.arrow_count(),
            self.relations.len()
        )
    }
}

impl Algebra {
    /// Monomial algebra from forbidden paths (each of length at least 2).
    pub fn monomial(
        name: impl Into<String>,
        quiver: Quiver,
        relations: Vec<Path>,
        field: Field,
    ) -> Result<Self> {
        for r in &relations {
            if r.len() < 2 || !r.is_composable(&quiver) {
                return Err(Error::Invalid(format!(
                    "monomial relation {} must be a composable path of length >= 2",
                    r.render(&quiver)
                )));
            }
        }
        let basis = path_basis(&quiver, &relations)?;
        Ok(Algebra {
            name: name.into(),
            quiver,
            relations: relations.into_iter().map(Relation::monomial).collect(),
            field,
            kind: AlgebraKind::Monomial { basis },
        })
    }

    /// `KQ/rad²KQ`: every path of length two is a relation.
    pub fn rad2(name: impl Into<String>, quiver: Quiver, field: Field) -> Result<Self> {
        let rels = length_two_paths(&quiver);
        Algebra::monomial(name, quiver, rels, field)
    }

    pub fn builtin(name: &str, field: Field) -> Result<Arc<Self>> {
        match name {
            "A" => Ok(Arc::new(parse_presentation(A_PRESENTATION, field)?)),
            "A3CT" => Ok(Arc::new(parse_presentation(A3CT_PRESENTATION, field)?)),
            "A_tensor_A3CT" => {
                let a = Algebra::builtin("A", field)?;
                Ok(Arc::new(tensor_cycle3(&a)?))
            }
            _ => Err(Error::Config(format!(
                "unknown algebra {name}; builtins are {}",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn vertex_count(&self) -> usize {
        self.quiver.vertex_count()
    }

    pub fn arrow_count(&self) -> usize {
        self.quiver.arrow_count()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    /// The path basis of a monomial algebra.
    pub fn basis(&self) -> Option<&[Path]> {
        match &self.kind {
            AlgebraKind::Monomial { basis } => Some(basis),
            AlgebraKind::TensorCycle3 { .. } => None,
        }
    }

    pub fn tensor_base(&self) -> Option<&Arc<Algebra>> {
        match &self.kind {
            AlgebraKind::TensorCycle3 { base } => Some(base),
            AlgebraKind::Monomial { .. } => None,
        }
    }

    pub fn is_tensor(&self) -> bool {
        self.tensor_base().is_some()
    }

    /// Words spanning the indecomposable projective at `v`, each with the
    /// vertex it ends at. Within a target vertex the order is the basis order
    /// of the projective module.
    pub fn projective_words(&self, v: usize) -> Vec<(usize, Path)> {
        match &self.kind {
            AlgebraKind::Monomial { basis } => basis
                .iter()
                .filter(|p| p.start == v)
                .map(|p| (p.end(&self.quiver), p.clone()))
                .collect(),
            AlgebraKind::TensorCycle3 { base } => {
                let n = base.vertex_count();
                let (bv, r) = (v % n, v / n);
                let below = (r + 2) % 3;
                let layout = TensorLayout::of(base);
                let mut out = Vec::new();
                for (w, p) in base.projective_words(bv) {
                    let arrows = p.arrows.iter().map(|&a| layout.copy_arrow(a, r)).collect();
                    out.push((layout.vertex(w, r), Path { start: v, arrows }));
                }
                for (w, p) in base.projective_words(bv) {
                    let mut arrows = vec![layout.d_arrow(bv, r)];
                    arrows.extend(p.arrows.iter().map(|&a| layout.copy_arrow(a, below)));
                    out.push((layout.vertex(w, below), Path { start: v, arrows }));
                }
                out
            }
        }
    }

    /// Normal form of `word · arrow` among the projective words starting at
    /// `word.start`, or `None` when the product vanishes in the algebra.
    pub fn extend_word(&self, word: &Path, arrow: usize) -> Option<Path> {
        let q = &self.quiver;
        if q.arrow(arrow).source != word.end(q) {
            return None;
        }
        match &self.kind {
            AlgebraKind::Monomial { .. } => {
                let mut next = word.clone();
                next.arrows.push(arrow);
                let dead = self.relations.iter().any(|r| {
                    r.terms.iter().any(|(_, p)| next.has_suffix(&p.arrows))
                });
                (!dead).then_some(next)
            }
            AlgebraKind::TensorCycle3 { base } => {
                let lay = TensorLayout::of(base);
                let n = lay.n;
                let (bv, r) = (word.start % n, word.start / n);
                let lower = word.arrows.first() == Some(&lay.d_arrow(bv, r));
                let copies = if lower { &word.arrows[1..] } else { &word.arrows[..] };
                let layer = if lower { (r + 2) % 3 } else { r };
                let base_path = Path {
                    start: bv,
                    arrows: copies.iter().map(|&a| a - layer * lay.arrows).collect(),
                };
                if arrow >= 3 * lay.arrows {
                    // A d-arrow: moves an upper word down, kills a lower one.
                    if lower {
                        return None;
                    }
                    let mut arrows = vec![lay.d_arrow(bv, r)];
                    arrows.extend(base_path.arrows.iter().map(|&a| lay.copy_arrow(a, (r + 2) % 3)));
                    return Some(Path { start: word.start, arrows });
                }
                if arrow / lay.arrows != layer {
                    return None;
                }
                let ext = base.extend_word(&base_path, arrow % lay.arrows)?;
                let mut arrows = if lower { vec![lay.d_arrow(bv, r)] } else { Vec::new() };
                arrows.extend(ext.arrows.iter().map(|&a| lay.copy_arrow(a, layer)));
                Some(Path { start: word.start, arrows })
            }
        }
    }

    /// Vector-space dimension of the algebra.
    pub fn dimension(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.projective_words(v).len())
            .sum()
    }

    pub fn vertex_label(&self, v: usize) -> String {
        match &self.kind {
            AlgebraKind::Monomial { .. } => format!("{}", v + 1),
            AlgebraKind::TensorCycle3 { base } => {
                let n = base.vertex_count();
                format!("({},{})", v % n + 1, v / n + 1)
            }
        }
    }

    /// Arrow images under a vertex permutation (old index to new index), or
    /// `None` if the permutation is not a quiver automorphism.
    pub fn arrow_permutation(&self, vertex_perm: &[usize]) -> Option<Vec<usize>> {
        let q = &self.quiver;
        let mut used = vec![false; q.arrow_count()];
        let mut out = Vec::with_capacity(q.arrow_count());
        for a in q.arrows() {
            let (s, t) = (vertex_perm[a.source], vertex_perm[a.target]);
            let j = (0..q.arrow_count())
                .find(|&j| !used[j] && q.arrow(j).source == s && q.arrow(j).target == t)?;
            used[j] = true;
            out.push(j);
        }
        Some(out)
    }
}

/// Index arithmetic for `Q × C₃`.
///
/// Layer `r ∈ {0,1,2}` is the degree class `[r-1]`, so layer 0 holds degree
/// `-1`. Vertex `(v, r)` is `r·n + v`; the copy of arrow `γ` in layer `r` is
/// `r·|Q₁| + γ`; the arrow `d` at `(v, r)` goes to `(v, r-1 mod 3)`.
#[derive(Clone, Copy, Debug)]
pub struct TensorLayout {
    pub n: usize,
    pub arrows: usize,
}

impl TensorLayout {
    pub fn of(base: &Algebra) -> Self {
        TensorLayout {
            n: base.vertex_count(),
            arrows: base.arrow_count(),
        }
    }

    pub fn vertex(&self, v: usize, r: usize) -> usize {
        r * self.n + v
    }

    pub fn copy_arrow(&self, a: usize, r: usize) -> usize {
        r * self.arrows + a
    }

    pub fn d_arrow(&self, v: usize, r: usize) -> usize {
        3 * self.arrows + r * self.n + v
    }

    /// Layer of a degree: degree `-1` is layer 0.
    pub fn class_of_degree(degree: i64) -> usize {
        (degree + 1).rem_euclid(3) as usize
    }
}

/// `alg ⊗ A₃^CT` presented on `Q × C₃` with copied relations, `d² = 0`,
/// and the commutativity relations `γ d = d γ`.
pub fn tensor_cycle3(alg: &Arc<Algebra>) -> Result<Algebra> {
    if alg.is_tensor() {
        return Err(Error::Invalid("tensor_cycle3 expects a monomial algebra".into()));
    }
    let q = alg.quiver();
    let n = q.vertex_count();
    let lay = TensorLayout::of(alg);
    let mut arrows = Vec::new();
    for r in 0..3 {
        for a in q.arrows() {
            arrows.push(Arrow {
                source: lay.vertex(a.source, r),
                target: lay.vertex(a.target, r),
                label: format!("{}[{}]", a.label, r + 1),
            });
        }
    }
    for r in 0..3 {
        for v in 0..n {
            arrows.push(Arrow {
                source: lay.vertex(v, r),
                target: lay.vertex(v, (r + 2) % 3),
                label: format!("d{}[{}]", v + 1, r + 1),
            });
        }
    }
    let tq = Quiver::new(3 * n, arrows)?;
    let f = alg.field();
    let mut relations = Vec::new();
    for r in 0..3 {
        for rel in alg.relations() {
            let terms = rel
                .terms
                .iter()
                .map(|(c, p)| {
                    let arrows = p.arrows.iter().map(|&a| lay.copy_arrow(a, r)).collect();
                    (*c, Path { start: lay.vertex(p.start, r), arrows })
                })
                .collect();
            relations.push(Relation { terms });
        }
    }
    for r in 0..3 {
        for v in 0..n {
            let below = (r + 2) % 3;
            relations.push(Relation::monomial(Path {
                start: lay.vertex(v, r),
                arrows: vec![lay.d_arrow(v, r), lay.d_arrow(v, below)],
            }));
        }
    }
    for r in 0..3 {
        let below = (r + 2) % 3;
        for (g, a) in q.arrows().iter().enumerate() {
            let start = lay.vertex(a.source, r);
            let d_then_g = Path {
                start,
                arrows: vec![lay.d_arrow(a.source, r), lay.copy_arrow(g, below)],
            };
            let g_then_d = Path {
                start,
                arrows: vec![lay.copy_arrow(g, r), lay.d_arrow(a.target, r)],
            };
            relations.push(Relation {
                terms: vec![(1, d_then_g), (f.neg(1), g_then_d)],
            });
        }
    }
    Ok(Algebra {
        name: format!("{}_tensor_A3CT", alg.name()),
        quiver: tq,
        relations,
        field: f,
        kind: AlgebraKind::TensorCycle3 { base: alg.clone() },
    })
}

fn length_two_paths(q: &Quiver) -> Vec<Path> {
    let mut out = Vec::new();
    for (i, a) in q.arrows().iter().enumerate() {
        for j in q.arrows_from(a.target) {
            out.push(Path {
                start: a.source,
                arrows: vec![i, j],
            });
        }
    }
    out
}

/// Enumerates the paths avoiding every forbidden subpath.
///
/// Fails with `NonAdmissible` once a surviving path is longer than
/// `vertex_count × (1 + longest relation)`.
pub fn path_basis(q: &Quiver, relations: &[Path]) -> Result<Vec<Path>> {
    let max_rel = relations.iter().map(Path::len).max().unwrap_or(0);
    let bound = q.vertex_count() * (1 + max_rel);
    let mut out = Vec::new();
    let mut queue: VecDeque<Path> = (0..q.vertex_count()).map(Path::trivial).collect();
    while let Some(p) = queue.pop_front() {
        if p.len() > bound {
            return Err(Error::NonAdmissible(format!(
                "path {} survives beyond length {bound}",
                p.render(q)
            )));
        }
        let end = p.end(q);
        for a in q.arrows_from(end) {
            let mut next = p.clone();
            next.arrows.push(a);
            if relations.iter().any(|r| next.has_suffix(&r.arrows)) {
                continue;
            }
            queue.push_back(next);
        }
        out.push(p);
    }
    out.sort_by(|x, y| {
        let lx: Vec<&str> = x.arrows.iter().map(|&a| q.arrow(a).label.as_str()).collect();
        let ly: Vec<&str> = y.arrows.iter().map(|&a| q.arrow(a).label.as_str()).collect();
        (x.len(), x.start, lx).cmp(&(y.len(), y.start, ly))
    });
    Ok(out)
}

/// Parses the text presentation format (see the crate README).
pub fn parse_presentation(text: &str, field: Field) -> Result<Algebra> {
    let mut name = String::from("custom");
    let mut vertices: Option<usize> = None;
    let mut arrows: Vec<Arrow> = Vec::new();
    let mut rel_labels: Vec<(usize, Vec<String>)> = Vec::new();
    let mut rad2 = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "name" if toks.len() == 2 => name = toks[1].to_string(),
            "vertices" if toks.len() == 2 => {
                let n: usize = toks[1]
                    .parse()
                    .map_err(|_| Error::parse(line_no, "vertex count must be an integer"))?;
                if n == 0 {
                    return Err(Error::parse(line_no, "vertex count must be positive"));
                }
                vertices = Some(n);
            }
            "arrow" if toks.len() == 4 => {
                let n = vertices.ok_or_else(|| Error::parse(line_no, "arrow before vertices"))?;
                let mut ends = [0usize; 2];
                for (slot, tok) in ends.iter_mut().zip(&toks[2..4]) {
                    let v: usize = tok
                        .parse()
                        .map_err(|_| Error::parse(line_no, "arrow endpoints must be integers"))?;
                    if v == 0 || v > n {
                        return Err(Error::parse(line_no, format!("vertex {v} out of range")));
                    }
                    *slot = v - 1;
                }
                arrows.push(Arrow {
                    source: ends[0],
                    target: ends[1],
                    label: toks[1].to_string(),
                });
            }
            "relation" if toks.len() >= 3 => {
                rel_labels.push((line_no, toks[1..].iter().map(|s| s.to_string()).collect()));
            }
            "rad2" if toks.len() == 1 => rad2 = true,
            other => {
                return Err(Error::parse(line_no, format!("unrecognised line starting with {other}")))
            }
        }
    }
    let n = vertices.ok_or_else(|| Error::parse(0, "missing vertices line"))?;
    let quiver = Quiver::new(n, arrows).map_err(|e| Error::parse(0, e.to_string()))?;
    let mut rels = if rad2 { length_two_paths(&quiver) } else { Vec::new() };
    for (line_no, labels) in rel_labels {
        let mut idx = Vec::new();
        for l in labels.iter().rev() {
            idx.push(
                quiver
                    .arrow_index(l)
                    .ok_or_else(|| Error::parse(line_no, format!("unknown arrow {l}")))?,
            );
        }
        let start = quiver.arrow(idx[0]).source;
        let p = Path { start, arrows: idx };
        if !p.is_composable(&quiver) {
            return Err(Error::parse(line_no, "relation is not a composable path"));
        }
        if !rels.contains(&p) {
            rels.push(p);
        }
    }
    Algebra::monomial(name, quiver, rels, field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> Field {
        Field::default()
    }

    #[test]
    fn builtin_bases() {
        let a = Algebra::builtin("A", f()).unwrap();
        assert_eq!(a.basis().unwrap().len(), 9);
        assert_eq!(a.relations().len(), 6);
        let c = Algebra::builtin("A3CT", f()).unwrap();
        assert_eq!(c.basis().unwrap().len(), 6);
    }

    #[test]
    fn single_vertex_and_a2() {
        let q = Quiver::new(1, vec![]).unwrap();
        let k = Algebra::rad2("K", q, f()).unwrap();
        assert_eq!(k.basis().unwrap(), &[Path::trivial(0)]);
        let a2 = parse_presentation("vertices 2\narrow a 1 2\n", f()).unwrap();
        assert_eq!(a2.basis().unwrap().len(), 3);
    }

    #[test]
    fn free_cycle_is_not_admissible() {
        let text = "vertices 3\narrow y1 1 3\narrow y2 2 1\narrow y3 3 2\n";
        assert!(matches!(
            parse_presentation(text, f()),
            Err(Error::NonAdmissible(_))
        ));
    }

    #[test]
    fn relation_order_is_composition_order() {
        // "relation b a" forbids a then b.
        let text = "vertices 3\narrow a 1 2\narrow b 2 3\nrelation b a\n";
        let alg = parse_presentation(text, f()).unwrap();
        assert_eq!(alg.basis().unwrap().len(), 5);
        assert_eq!(alg.relations()[0].terms[0].1.arrows, vec![0, 1]);
        let bad = "vertices 3\narrow a 1 2\narrow b 2 3\nrelation a b\n";
        assert!(parse_presentation(bad, f()).is_err());
    }

    #[test]
    fn basis_is_sorted_and_deterministic() {
        let a = Algebra::builtin("A", f()).unwrap();
        let b = Algebra::builtin("A", f()).unwrap();
        assert_eq!(a.basis(), b.basis());
        let rendered: Vec<String> = a
            .basis()
            .unwrap()
            .iter()
            .map(|p| p.render(a.quiver()))
            .collect();
        assert_eq!(rendered, ["e1", "e2", "e3", "e4", "x1", "x2", "x2p", "x3", "x4"]);
    }

    #[test]
    fn tensor_counts() {
        let t = Algebra::builtin("A_tensor_A3CT", f()).unwrap();
        assert_eq!(t.vertex_count(), 12);
        assert_eq!(t.arrow_count(), 27);
        assert_eq!(t.relations().len(), 18 + 12 + 15);
        assert_eq!(t.dimension(), 6 * 9);
    }

    #[test]
    fn tensor_of_the_field_is_a3ct() {
        let k = Arc::new(Algebra::rad2("K", Quiver::new(1, vec![]).unwrap(), f()).unwrap());
        let t = tensor_cycle3(&k).unwrap();
        assert_eq!((t.vertex_count(), t.arrow_count()), (3, 3));
        assert_eq!(t.relations().len(), 3);
        assert_eq!(t.dimension(), 6);
        // The d-arrows form the oriented 3-cycle.
        for a in t.quiver().arrows() {
            assert_eq!(a.target, (a.source + 2) % 3);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_presentation("vertices 2\narrow a 1 5\n", f()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_presentation("vertices 2\nbogus\n", f()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
