//! Cocycles over finite covers: [n]-manifold cocycles and symmetric n-fold
//! vector bundle cocycles, their verification and their identification.
//!
//! A cover is a finite set of labelled sample points with one point set per
//! chart; overlaps are intersections. Transitions are stored per ordered chart
//! pair and per overlap point in symmetric form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::io::{self, Lines};
use crate::nman::{self, Components, GradedMorphism, SampleBase, SplitModel};
use crate::partitions::{canonical_partition_in, IntPartition};
use crate::random::{pick, random_symmetric, TestRng};
use crate::snvb::{compose_general, compose_sym, expand, invert_sym, SymModel, SymMorphism};
use crate::tensors::{linear_inverse, MultiTensor};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    charts: Vec<String>,
    points: Vec<String>,
    members: Vec<BTreeSet<usize>>,
}

impl Cover {
    /// Charts with their point labels; the base is the union of all labels in
    /// order of first appearance.
    pub fn new(charts: Vec<(String, Vec<String>)>) -> Result<Self> {
        let mut names = Vec::new();
        let mut points: Vec<String> = Vec::new();
        let mut members = Vec::new();
        for (name, pts) in charts {
            if names.contains(&name) {
                return Err(Error::Domain(format!("duplicate chart {name:?}")));
            }
            let mut set = BTreeSet::new();
            for p in pts {
                let idx = match points.iter().position(|q| *q == p) {
                    Some(i) => i,
                    None => {
                        points.push(p);
                        points.len() - 1
                    }
                };
                if !set.insert(idx) {
                    return Err(Error::Domain(format!("chart {name:?} lists a point twice")));
                }
            }
            names.push(name);
            members.push(set);
        }
        Ok(Cover { charts: names, points, members })
    }

    pub fn charts(&self) -> &[String] {
        &self.charts
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn chart_points(&self, alpha: usize) -> &BTreeSet<usize> {
        &self.members[alpha]
    }

    /// Points lying in every listed chart.
    pub fn overlap(&self, charts: &[usize]) -> Vec<usize> {
        (0..self.points.len()).filter(|x| charts.iter().all(|&a| self.members[a].contains(x))).collect()
    }

    pub fn chart_index(&self, name: &str) -> Option<usize> {
        self.charts.iter().position(|c| c == name)
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|c| c == name)
    }

    /// Chart α becomes chart perm[α].
    pub fn relabel(&self, perm: &[usize]) -> Cover {
        let mut charts = vec![String::new(); self.charts.len()];
        let mut members = vec![BTreeSet::new(); self.charts.len()];
        for (a, &b) in perm.iter().enumerate() {
            charts[b] = self.charts[a].clone();
            members[b] = self.members[a].clone();
        }
        Cover { charts, points: self.points.clone(), members }
    }
}

pub type Transitions = BTreeMap<(usize, usize), BTreeMap<usize, SymMorphism>>;

/// Per chart, per point of the chart, an isomorphism to the reference model.
pub type Trivializations = Vec<BTreeMap<usize, SymMorphism>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnCocycle {
    pub cover: Cover,
    pub model: SymModel,
    pub transitions: Transitions,
}

impl SnCocycle {
    pub fn new(cover: Cover, model: SymModel, transitions: Transitions) -> Result<Self> {
        let k = cover.charts.len();
        for (&(a, b), per_point) in &transitions {
            if a >= k || b >= k {
                return Err(Error::Domain(format!("transition ({a},{b}) names an unknown chart")));
            }
            let overlap = cover.overlap(&[a, b]);
            for (x, m) in per_point {
                if !overlap.contains(x) {
                    return Err(Error::Domain(format!(
                        "transition {},{} is given at {}, outside the overlap",
                        cover.charts[a], cover.charts[b], cover.points[*x]
                    )));
                }
                if m.source != model || m.target != model {
                    return Err(Error::ShapeMismatch(format!(
                        "transition {},{} at {} is not an endomorphism of the model",
                        cover.charts[a], cover.charts[b], cover.points[*x]
                    )));
                }
            }
        }
        Ok(SnCocycle { cover, model, transitions })
    }

    pub fn identity(cover: Cover, model: SymModel) -> Self {
        let id = SymMorphism::identity(&model);
        let mut transitions = Transitions::new();
        for a in 0..cover.charts.len() {
            for b in 0..cover.charts.len() {
                let pts = cover.overlap(&[a, b]);
                if !pts.is_empty() {
                    transitions.insert((a, b), pts.into_iter().map(|x| (x, id.clone())).collect());
                }
            }
        }
        SnCocycle { cover, model, transitions }
    }

    pub fn transition(&self, a: usize, b: usize, x: usize) -> Option<&SymMorphism> {
        self.transitions.get(&(a, b))?.get(&x)
    }

    pub fn relabel(&self, perm: &[usize]) -> SnCocycle {
        let transitions = self.transitions.iter().map(|(&(a, b), m)| ((perm[a], perm[b]), m.clone())).collect();
        SnCocycle { cover: self.cover.relabel(perm), model: self.model.clone(), transitions }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cover");
        for (a, name) in self.cover.charts.iter().enumerate() {
            let pts: Vec<&str> = self.cover.members[a].iter().map(|&x| self.cover.points[x].as_str()).collect();
            let _ = writeln!(s, "chart {name} {}", pts.join(" "));
        }
        let _ = writeln!(s, "dims {}", io::format_list(self.model.dims()));
        for (&(a, b), per_point) in &self.transitions {
            for (&x, m) in per_point {
                let _ = writeln!(s, "transition {},{} {}", self.cover.charts[a], self.cover.charts[b], self.cover.points[x]);
                io::write_components(&mut s, &m.components);
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        lines.expect("cover")?;
        let mut charts = Vec::new();
        while lines.peek_keyword() == Some("chart") {
            let words = lines.expect("chart")?;
            let (name, pts) = words.split_first().ok_or_else(|| lines.error("chart name missing"))?;
            charts.push((name.to_string(), pts.iter().map(|p| p.to_string()).collect()));
        }
        let ln = lines.line_no();
        let cover = Cover::new(charts).map_err(|e| io::relocate(e, ln))?;
        let ln = lines.line_no();
        let dims = lines.expect("dims")?;
        let [dims] = dims.as_slice() else {
            return Err(Error::Parse { line: ln, msg: "expected `dims a_1,...,a_n`".into() });
        };
        let dims = dims.split(',').map(|d| io::parse_usize(&lines, d)).collect::<Result<Vec<_>>>()?;
        let model = SymModel::new(dims).map_err(|e| io::relocate(e, ln))?;
        let mut transitions = Transitions::new();
        while !lines.is_done() {
            let ln = lines.line_no();
            let words = lines.expect("transition")?;
            let [pair, point] = words.as_slice() else {
                return Err(Error::Parse { line: ln, msg: "expected `transition <alpha>,<beta> <point>`".into() });
            };
            let (a, b) = pair.split_once(',').ok_or(Error::Parse { line: ln, msg: format!("bad chart pair {pair:?}") })?;
            let chart = |c: &str| cover.chart_index(c).ok_or(Error::Parse { line: ln, msg: format!("unknown chart {c:?}") });
            let (a, b) = (chart(a)?, chart(b)?);
            let x = cover.point_index(point).ok_or(Error::Parse { line: ln, msg: format!("unknown point {point:?}") })?;
            let comps = lines.components()?;
            let m = SymMorphism::new(model.clone(), model.clone(), comps).map_err(|e| io::relocate(e, ln))?;
            if transitions.entry((a, b)).or_default().insert(x, m).is_some() {
                return Err(Error::Parse { line: ln, msg: "duplicate transition".into() });
            }
        }
        SnCocycle::new(cover, model, transitions).map_err(|e| io::relocate(e, lines.line_no()))
    }
}

/// Which composition law checks the triple condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Route {
    /// Composition of graded morphisms of split [n]-manifolds.
    Nman,
    /// The symmetric composition over coarsements.
    Sym,
    /// Expansion to set-partition components, then general composition.
    General,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Nman => "nman",
            Route::Sym => "sym",
            Route::General => "general",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    Missing,
    NotIsomorphism,
    Asymmetric,
    Identity,
    Triple,
}

/// One failed condition. For triples, ω^{αβ} ≠ ω^{αγ}∘ω^{γβ} at `point`, component `partition`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub kind: ViolationKind,
    pub alpha: usize,
    pub beta: usize,
    pub gamma: Option<usize>,
    pub point: usize,
    pub partition: Option<IntPartition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleReport {
    pub violations: Vec<Violation>,
    pub triples_checked: usize,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self, cover: &Cover) -> String {
        let mut s = String::new();
        for v in &self.violations {
            let _ = write!(s, "{:?} alpha={} beta={}", v.kind, cover.charts[v.alpha], cover.charts[v.beta]);
            if let Some(g) = v.gamma {
                let _ = write!(s, " gamma={}", cover.charts[g]);
            }
            let _ = write!(s, " point={}", cover.points[v.point]);
            if let Some(p) = &v.partition {
                let _ = write!(s, " partition={p}");
            }
            s.push('\n');
        }
        s
    }
}

fn differing(lhs: &Components, rhs: &Components) -> Vec<IntPartition> {
    let keys: BTreeSet<&IntPartition> = lhs.keys().chain(rhs.keys()).collect();
    keys.into_iter()
        .filter(|p| match (lhs.get(*p), rhs.get(*p)) {
            (Some(a), Some(b)) => a != b,
            (Some(t), None) | (None, Some(t)) => !t.is_zero(),
            (None, None) => false,
        })
        .cloned()
        .collect()
}

fn restrict_graded(m: &GradedMorphism, points: &[usize], labels: &[String]) -> Result<GradedMorphism> {
    let base = SampleBase::new(labels.to_vec())?;
    let model = SplitModel::new(m.source.ranks.clone(), base)?;
    let idx: Vec<usize> = points
        .iter()
        .map(|x| m.source.base.points().iter().position(|p| *p == labels[points.iter().position(|y| y == x).unwrap()]))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Domain("restriction to points outside the base".into()))?;
    let fibers = idx.iter().map(|&i| m.fibers[i].clone()).collect();
    GradedMorphism::new(model.clone(), model, (0..points.len()).collect(), fibers)
}

/// The right-hand sides ω^{αγ}∘ω^{γβ} over U_αβγ, keyed by point.
fn compose_triple(c: &SnCocycle, route: Route, a: usize, b: usize, g: usize, points: &[usize]) -> Result<BTreeMap<usize, Components>> {
    let dims = c.model.dims();
    let n = c.model.n();
    let mut out = BTreeMap::new();
    match route {
        Route::Nman => {
            let view = nman_transitions(c, &[(a, g), (g, b)])?;
            let labels: Vec<String> = points.iter().map(|&x| c.cover.points[x].clone()).collect();
            let outer = restrict_graded(&view[&(a, g)], points, &labels)?;
            let inner = restrict_graded(&view[&(g, b)], points, &labels)?;
            let comp = nman::compose(&outer, &inner)?;
            for (k, &x) in points.iter().enumerate() {
                out.insert(x, comp.fibers[k].clone());
            }
        }
        Route::Sym => {
            for &x in points {
                let (Some(ag), Some(gb)) = (c.transition(a, g, x), c.transition(g, b, x)) else { continue };
                out.insert(x, compose_sym(ag, gb)?.components);
            }
        }
        Route::General => {
            for &x in points {
                let (Some(ag), Some(gb)) = (c.transition(a, g, x), c.transition(g, b, x)) else { continue };
                let composed = compose_general(&expand(ag)?, &expand(gb)?)?;
                let mut comps = Components::new();
                for p in nman::component_keys(n, n) {
                    let rho = canonical_partition_in(p.parts(), n)?;
                    let t = composed.get(&rho).cloned().unwrap_or_else(|| {
                        MultiTensor::zeros(nman::component_shape(&p, dims), dims[p.sum() - 1])
                    });
                    comps.insert(p, t);
                }
                out.insert(x, comps);
            }
        }
    }
    Ok(out)
}

type TripleKey = (usize, usize, usize);

fn triples(c: &SnCocycle) -> Vec<(TripleKey, Vec<usize>)> {
    let k = c.cover.charts.len();
    let mut out = Vec::new();
    for a in 0..k {
        for b in 0..k {
            for g in 0..k {
                let pts: Vec<usize> = c
                    .cover
                    .overlap(&[a, b, g])
                    .into_iter()
                    .filter(|&x| c.transition(a, b, x).is_some() && c.transition(a, g, x).is_some() && c.transition(g, b, x).is_some())
                    .collect();
                if !pts.is_empty() {
                    out.push(((a, b, g), pts));
                }
            }
        }
    }
    out
}

fn is_iso(m: &SymMorphism) -> bool {
    (1..=m.n()).all(|i| linear_inverse(m.component(&IntPartition::single(i))).is_some())
}

/// All composites ω^{αγ}∘ω^{γβ} over triple overlaps along one route.
pub fn composition_table(c: &SnCocycle, route: Route, exec: Exec) -> Result<BTreeMap<(TripleKey, usize), Components>> {
    let work = triples(c);
    let results = exec.map(&work, |(key, pts)| compose_triple(c, route, key.0, key.1, key.2, pts).map(|m| (*key, m)));
    let mut table = BTreeMap::new();
    for r in results {
        let (key, per_point) = r?;
        for (x, comps) in per_point {
            table.insert((key, x), comps);
        }
    }
    Ok(table)
}

/// Checks ω^{αα} = id and ω^{αβ} = ω^{αγ}∘ω^{γβ} on every triple overlap,
/// listing every violation.
pub fn check_cocycle(c: &SnCocycle, route: Route, exec: Exec) -> Result<CocycleReport> {
    let k = c.cover.charts.len();
    let mut violations = Vec::new();
    let id = nman::identity_local(c.model.dims());
    for a in 0..k {
        for b in 0..k {
            for x in c.cover.overlap(&[a, b]) {
                let base = Violation { kind: ViolationKind::Missing, alpha: a, beta: b, gamma: None, point: x, partition: None };
                let Some(m) = c.transition(a, b, x) else {
                    violations.push(base);
                    continue;
                };
                if !is_iso(m) {
                    violations.push(Violation { kind: ViolationKind::NotIsomorphism, ..base.clone() });
                }
                for (p, t) in &m.components {
                    if !t.is_graded_symmetric() {
                        violations.push(Violation { kind: ViolationKind::Asymmetric, partition: Some(p.clone()), ..base.clone() });
                    }
                }
                if a == b {
                    for p in differing(&m.components, &id) {
                        violations.push(Violation { kind: ViolationKind::Identity, partition: Some(p), ..base.clone() });
                    }
                }
            }
        }
    }
    let table = composition_table(c, route, exec)?;
    for (&((a, b, g), x), rhs) in &table {
        let lhs = &c.transition(a, b, x).expect("triples only list present transitions").components;
        for p in differing(lhs, rhs) {
            violations.push(Violation { kind: ViolationKind::Triple, alpha: a, beta: b, gamma: Some(g), point: x, partition: Some(p) });
        }
    }
    violations.sort();
    Ok(CocycleReport { violations, triples_checked: table.len() })
}

/// Route-by-route comparison: composite tables and reports must coincide.
pub fn routes_agree(c: &SnCocycle, exec: Exec) -> Result<bool> {
    let routes = [Route::Nman, Route::Sym, Route::General];
    let tables = routes.iter().map(|&r| composition_table(c, r, exec)).collect::<Result<Vec<_>>>()?;
    let reports = routes.iter().map(|&r| check_cocycle(c, r, exec)).collect::<Result<Vec<_>>>()?;
    Ok(tables.windows(2).all(|w| w[0] == w[1]) && reports.windows(2).all(|w| w[0] == w[1]))
}

/// ω^{αβ} := φ_α∘φ_β^{-1} on every overlap.
pub fn from_trivializations(cover: &Cover, model: &SymModel, phis: &Trivializations) -> Result<SnCocycle> {
    let k = cover.charts.len();
    if phis.len() != k {
        return Err(Error::ShapeMismatch("one trivialization per chart required".into()));
    }
    let mut inverses = Vec::with_capacity(k);
    for (a, per_point) in phis.iter().enumerate() {
        let mut inv = BTreeMap::new();
        for &x in cover.chart_points(a) {
            let phi = per_point.get(&x).ok_or_else(|| {
                Error::Domain(format!("chart {} has no trivialization at {}", cover.charts[a], cover.points[x]))
            })?;
            if phi.source != *model || phi.target != *model {
                return Err(Error::ShapeMismatch("trivializations must be endomorphisms of the model".into()));
            }
            inv.insert(x, invert_sym(phi)?);
        }
        inverses.push(inv);
    }
    let mut transitions = Transitions::new();
    for a in 0..k {
        for b in 0..k {
            let pts = cover.overlap(&[a, b]);
            if pts.is_empty() {
                continue;
            }
            let mut per_point = BTreeMap::new();
            for x in pts {
                per_point.insert(x, compose_sym(&phis[a][&x], &inverses[b][&x])?);
            }
            transitions.insert((a, b), per_point);
        }
    }
    SnCocycle::new(cover.clone(), model.clone(), transitions)
}

/// The same transitions read as isomorphisms of split [n]-manifolds over U_αβ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NmanCocycle {
    pub cover: Cover,
    pub ranks: Vec<usize>,
    pub transitions: BTreeMap<(usize, usize), GradedMorphism>,
}

fn nman_transitions(c: &SnCocycle, pairs: &[(usize, usize)]) -> Result<BTreeMap<(usize, usize), GradedMorphism>> {
    let mut out = BTreeMap::new();
    for &(a, b) in pairs {
        let Some(per_point) = c.transitions.get(&(a, b)) else { continue };
        let labels: Vec<String> = per_point.keys().map(|&x| c.cover.points[x].clone()).collect();
        let model = SplitModel::new(c.model.dims().to_vec(), SampleBase::new(labels)?)?;
        let fibers: Vec<Components> = per_point.values().map(|m| m.components.clone()).collect();
        let count = fibers.len();
        out.insert((a, b), GradedMorphism::new(model.clone(), model, (0..count).collect(), fibers)?);
    }
    Ok(out)
}

pub fn as_nman_cocycle(c: &SnCocycle) -> Result<NmanCocycle> {
    let pairs: Vec<(usize, usize)> = c.transitions.keys().copied().collect();
    Ok(NmanCocycle { cover: c.cover.clone(), ranks: c.model.dims().to_vec(), transitions: nman_transitions(c, &pairs)? })
}

pub fn as_snvb_cocycle(c: &NmanCocycle) -> Result<SnCocycle> {
    let model = SymModel::new(c.ranks.clone())?;
    let mut transitions = Transitions::new();
    for (&pair, g) in &c.transitions {
        let mut per_point = BTreeMap::new();
        for (k, label) in g.source.base.points().iter().enumerate() {
            let x = c
                .cover
                .point_index(label)
                .ok_or_else(|| Error::Domain(format!("unknown point {label:?}")))?;
            per_point.insert(x, SymMorphism::new(model.clone(), model.clone(), g.fibers[k].clone())?);
        }
        transitions.insert(pair, per_point);
    }
    SnCocycle::new(c.cover.clone(), model, transitions)
}

/// Φ_{α′α} per source chart α, target chart α′ and point of U_α ∩ Φ_0^{-1}(V_{α′}).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleMorphism {
    pub base_map: Vec<usize>,
    pub maps: BTreeMap<(usize, usize), BTreeMap<usize, SymMorphism>>,
}

fn domain(m: &CocycleMorphism, src: &Cover, dst: &Cover, a: usize, a2: usize) -> Vec<usize> {
    src.chart_points(a).iter().copied().filter(|&x| dst.chart_points(a2).contains(&m.base_map[x])).collect()
}

/// Φ_{α′α} := ψ_{α′}∘F∘φ_α^{-1} for a pointwise morphism F between the models.
pub fn induced_morphism(
    src: &Cover,
    dst: &Cover,
    phis: &Trivializations,
    psis: &Trivializations,
    base_map: &[usize],
    f: &BTreeMap<usize, SymMorphism>,
) -> Result<CocycleMorphism> {
    let mut m = CocycleMorphism { base_map: base_map.to_vec(), maps: BTreeMap::new() };
    for a in 0..src.charts.len() {
        for a2 in 0..dst.charts.len() {
            let mut per_point = BTreeMap::new();
            for x in domain(&m, src, dst, a, a2) {
                let fx = f.get(&x).ok_or_else(|| Error::Domain(format!("no map at {}", src.points[x])))?;
                let right = compose_sym(fx, &invert_sym(&phis[a][&x])?)?;
                per_point.insert(x, compose_sym(&psis[a2][&base_map[x]], &right)?);
            }
            if !per_point.is_empty() {
                m.maps.insert((a2, a), per_point);
            }
        }
    }
    Ok(m)
}

/// A failure of Φ_{β′β} = ψ_{β′α′}∘Φ_{α′α}∘φ_{αβ}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MorphismViolation {
    pub alpha: usize,
    pub beta: usize,
    pub alpha2: usize,
    pub beta2: usize,
    pub point: usize,
    pub partition: Option<IntPartition>,
}

pub fn check_cocycle_morphism(m: &CocycleMorphism, src: &SnCocycle, dst: &SnCocycle, exec: Exec) -> Result<Vec<MorphismViolation>> {
    if m.base_map.len() != src.cover.points.len() || m.base_map.iter().any(|&y| y >= dst.cover.points.len()) {
        return Err(Error::ShapeMismatch("the base map does not fit the covers".into()));
    }
    let (k, k2) = (src.cover.charts.len(), dst.cover.charts.len());
    let mut work = Vec::new();
    for a in 0..k {
        for b in 0..k {
            for a2 in 0..k2 {
                for b2 in 0..k2 {
                    work.push((a, b, a2, b2));
                }
            }
        }
    }
    let results = exec.map(&work, |&(a, b, a2, b2)| -> Result<Vec<MorphismViolation>> {
        let mut out = Vec::new();
        let pts: Vec<usize> = src
            .cover
            .overlap(&[a, b])
            .into_iter()
            .filter(|&x| dst.cover.chart_points(a2).contains(&m.base_map[x]) && dst.cover.chart_points(b2).contains(&m.base_map[x]))
            .collect();
        for x in pts {
            let y = m.base_map[x];
            let v = MorphismViolation { alpha: a, beta: b, alpha2: a2, beta2: b2, point: x, partition: None };
            let lhs = m.maps.get(&(b2, b)).and_then(|p| p.get(&x));
            let mid = m.maps.get(&(a2, a)).and_then(|p| p.get(&x));
            let (Some(lhs), Some(mid), Some(phi), Some(psi)) = (lhs, mid, src.transition(a, b, x), dst.transition(b2, a2, y))
            else {
                out.push(v);
                continue;
            };
            let rhs = compose_sym(psi, &compose_sym(mid, phi)?)?;
            for p in differing(&lhs.components, &rhs.components) {
                out.push(MorphismViolation { partition: Some(p), ..v.clone() });
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    all.sort();
    Ok(all)
}

/// Three charts over `points` sample points; all charts share point 0 and each
/// other point lies in a random nonempty set of charts.
pub fn random_cover(rng: &mut TestRng, charts: usize, points: usize) -> Cover {
    let mut members: Vec<Vec<String>> = vec![Vec::new(); charts];
    for x in 0..points {
        let label = format!("p{x}");
        let mask = if x == 0 { (1 << charts) - 1 } else { 1 + pick(rng, (1 << charts) - 1) };
        for (a, m) in members.iter_mut().enumerate() {
            if mask & (1 << a) != 0 {
                m.push(label.clone());
            }
        }
    }
    let names = ["a", "b", "c", "d", "e", "f", "g", "h"];
    Cover::new(
        members
            .into_iter()
            .enumerate()
            .map(|(a, pts)| (names.get(a).map(|s| s.to_string()).unwrap_or_else(|| format!("u{a}")), pts))
            .collect(),
    )
    .expect("labels are distinct")
}

pub fn random_trivializations(rng: &mut TestRng, cover: &Cover, model: &SymModel, linear_only: bool, bound: i64) -> Trivializations {
    (0..cover.charts.len())
        .map(|a| {
            cover
                .chart_points(a)
                .iter()
                .map(|&x| {
                    let mut phi = SymMorphism::random(rng, model, model, true, bound);
                    if linear_only {
                        phi.components = nman::linear_part(&phi.components);
                    }
                    (x, phi)
                })
                .collect()
        })
        .collect()
}

/// Where a perturbation was applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perturbation {
    pub alpha: usize,
    pub beta: usize,
    pub point: usize,
    pub partition: IntPartition,
}

/// Adds a nonzero graded-symmetric delta to one component of ω^{αβ}, α ≠ β,
/// at a point of a triple overlap when there is one.
pub fn perturb(rng: &mut TestRng, c: &SnCocycle) -> Option<(SnCocycle, Perturbation)> {
    let k = c.cover.charts.len();
    let mut candidates = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            for x in c.cover.overlap(&[a, b]) {
                let in_triple = (0..k).any(|g| g != a && g != b && c.cover.members[g].contains(&x));
                candidates.push((in_triple, a, b, x));
            }
        }
    }
    if candidates.iter().any(|t| t.0) {
        candidates.retain(|t| t.0);
    }
    if candidates.is_empty() {
        return None;
    }
    let (_, a, b, x) = candidates[pick(rng, candidates.len())];
    let dims = c.model.dims();
    let mut keys = nman::component_keys(dims.len(), dims.len());
    while !keys.is_empty() {
        let p = keys.remove(pick(rng, keys.len()));
        for _ in 0..8 {
            let delta = random_symmetric(rng, nman::component_shape(&p, dims), dims[p.sum() - 1], 3);
            if delta.is_zero() {
                continue;
            }
            let mut out = c.clone();
            let m = out.transitions.get_mut(&(a, b)).and_then(|pp| pp.get_mut(&x))?;
            let t = m.components.get_mut(&p)?;
            *t = t.add(&delta).ok()?;
            return Some((out, Perturbation { alpha: a, beta: b, point: x, partition: p }));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    fn model(dims: &[usize]) -> SymModel {
        SymModel::new(dims.to_vec()).unwrap()
    }

    fn cover(charts: &[(&str, &[&str])]) -> Cover {
        Cover::new(charts.iter().map(|(n, p)| (n.to_string(), p.iter().map(|s| s.to_string()).collect())).collect()).unwrap()
    }

    #[test]
    fn single_chart_identity_passes() {
        let c = SnCocycle::identity(cover(&[("a", &["x", "y"])]), model(&[1, 2, 1]));
        for route in [Route::Nman, Route::Sym, Route::General] {
            let r = check_cocycle(&c, route, Exec::Sequential).unwrap();
            assert!(r.passed());
            assert_eq!(r.triples_checked, 2);
        }
    }

    #[test]
    fn overlaps_are_intersections() {
        let cv = cover(&[("a", &["p", "q", "r"]), ("b", &["q", "r", "s"]), ("c", &["r", "s"])]);
        assert_eq!(cv.points(), ["p", "q", "r", "s"]);
        assert_eq!(cv.overlap(&[0, 1]), [1, 2]);
        assert_eq!(cv.overlap(&[0, 1, 2]), [2]);
        assert!(Cover::new(vec![("a".into(), vec!["x".into(), "x".into()])]).is_err());
    }

    #[test]
    fn two_charts_with_inverse_pass() {
        let mut r = rng(1);
        let m = model(&[2, 1]);
        let cv = cover(&[("a", &["x"]), ("b", &["x"])]);
        let w = SymMorphism::random(&mut r, &m, &m, true, 3);
        let mut c = SnCocycle::identity(cv, m);
        c.transitions.get_mut(&(0, 1)).unwrap().insert(0, w.clone());
        c.transitions.get_mut(&(1, 0)).unwrap().insert(0, invert_sym(&w).unwrap());
        assert!(check_cocycle(&c, Route::Sym, Exec::Sequential).unwrap().passed());
    }

    #[test]
    fn trivializations_give_cocycles_and_perturbations_fail() {
        let mut r = rng(2);
        let m = model(&[1, 2, 1]);
        for _ in 0..4 {
            let cv = random_cover(&mut r, 3, 5);
            let phis = random_trivializations(&mut r, &cv, &m, false, 2);
            let c = from_trivializations(&cv, &m, &phis).unwrap();
            for route in [Route::Nman, Route::Sym, Route::General] {
                assert!(check_cocycle(&c, route, Exec::Sequential).unwrap().passed());
            }
            assert!(routes_agree(&c, Exec::Sequential).unwrap());
            let (bad, at) = perturb(&mut r, &c).unwrap();
            let report = check_cocycle(&bad, Route::Sym, Exec::Sequential).unwrap();
            assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Triple
                && v.alpha == at.alpha
                && v.beta == at.beta
                && v.point == at.point
                && v.partition.as_ref() == Some(&at.partition)));
            assert!(routes_agree(&bad, Exec::Sequential).unwrap());
        }
    }

    #[test]
    fn linear_trivializations_give_linear_transitions() {
        let mut r = rng(3);
        let m = model(&[2, 1, 1]);
        let cv = random_cover(&mut r, 3, 4);
        let phis = random_trivializations(&mut r, &cv, &m, true, 2);
        let c = from_trivializations(&cv, &m, &phis).unwrap();
        for per_point in c.transitions.values() {
            for w in per_point.values() {
                assert!(w.components.iter().all(|(p, t)| p.len() == 1 || t.is_zero()));
            }
        }
        let id: Trivializations =
            (0..3).map(|a| cv.chart_points(a).iter().map(|&x| (x, SymMorphism::identity(&m))).collect()).collect();
        assert_eq!(from_trivializations(&cv, &m, &id).unwrap(), SnCocycle::identity(cv, m));
    }

    #[test]
    fn singular_trivialization_is_rejected() {
        let m = model(&[1, 1]);
        let cv = cover(&[("a", &["x"])]);
        let mut phi = SymMorphism::identity(&m);
        phi.components.insert(IntPartition::single(1), MultiTensor::zeros(nman::component_shape(&IntPartition::single(1), &[1, 1]), 1));
        let phis = vec![BTreeMap::from([(0, phi)])];
        assert!(matches!(from_trivializations(&cv, &m, &phis), Err(Error::NotAnIsomorphism(_))));
    }

    #[test]
    fn relabeling_charts_relabels_the_report() {
        let mut r = rng(4);
        let m = model(&[1, 1, 1]);
        let cv = random_cover(&mut r, 3, 4);
        let c = from_trivializations(&cv, &m, &random_trivializations(&mut r, &cv, &m, false, 2)).unwrap();
        let (bad, _) = perturb(&mut r, &c).unwrap();
        let perm = [2, 0, 1];
        let report = check_cocycle(&bad, Route::Sym, Exec::Sequential).unwrap();
        let relabeled = check_cocycle(&bad.relabel(&perm), Route::Sym, Exec::Sequential).unwrap();
        let mut mapped: Vec<Violation> = report
            .violations
            .iter()
            .map(|v| Violation { alpha: perm[v.alpha], beta: perm[v.beta], gamma: v.gamma.map(|g| perm[g]), ..v.clone() })
            .collect();
        mapped.sort();
        assert_eq!(mapped, relabeled.violations);
    }

    #[test]
    fn nman_view_round_trips() {
        let mut r = rng(5);
        let m = model(&[1, 2, 1]);
        let cv = random_cover(&mut r, 3, 4);
        let c = from_trivializations(&cv, &m, &random_trivializations(&mut r, &cv, &m, false, 2)).unwrap();
        assert_eq!(as_snvb_cocycle(&as_nman_cocycle(&c).unwrap()).unwrap(), c);
        let id = SnCocycle::identity(cv, m);
        let view = as_nman_cocycle(&id).unwrap();
        assert!(view.transitions.values().all(|g| *g == GradedMorphism::identity(&g.source)));
    }

    #[test]
    fn text_round_trip() {
        let mut r = rng(6);
        let m = model(&[1, 1, 2]);
        let cv = random_cover(&mut r, 3, 4);
        let c = from_trivializations(&cv, &m, &random_trivializations(&mut r, &cv, &m, false, 2)).unwrap();
        assert_eq!(SnCocycle::from_text(&c.to_text()).unwrap(), c);
        let err = SnCocycle::from_text("cover\nchart a x\ndims 1\ntransition a,b x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn missing_and_asymmetric_transitions_are_reported() {
        let m = model(&[2, 1]);
        let mut c = SnCocycle::identity(cover(&[("a", &["x"]), ("b", &["x"])]), m);
        c.transitions.remove(&(0, 1));
        let r = check_cocycle(&c, Route::Sym, Exec::Sequential).unwrap();
        assert_eq!(r.violations[0].kind, ViolationKind::Missing);
        let mut c = SnCocycle::identity(cover(&[("a", &["x"])]), model(&[2, 1]));
        let t = c.transitions.get_mut(&(0, 0)).unwrap().get_mut(&0).unwrap();
        let key = IntPartition::parse("1,1").unwrap();
        t.components.get_mut(&key).unwrap().coeffs_mut()[0] = crate::tensors::int(1);
        let r = check_cocycle(&c, Route::Nman, Exec::Sequential).unwrap();
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Asymmetric));
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Identity));
    }

    #[test]
    fn cocycle_morphisms() {
        let mut r = rng(7);
        let m = model(&[1, 2, 1]);
        let m2 = model(&[2, 1, 1]);
        let cv = random_cover(&mut r, 3, 4);
        let cv2 = random_cover(&mut r, 2, 3);
        let phis = random_trivializations(&mut r, &cv, &m, false, 2);
        let psis = random_trivializations(&mut r, &cv2, &m2, false, 2);
        let src = from_trivializations(&cv, &m, &phis).unwrap();
        let dst = from_trivializations(&cv2, &m2, &psis).unwrap();
        let base_map: Vec<usize> = (0..cv.points().len()).map(|x| x % cv2.points().len()).collect();
        let f: BTreeMap<usize, SymMorphism> =
            (0..cv.points().len()).map(|x| (x, SymMorphism::random(&mut r, &m, &m2, false, 2))).collect();
        let mor = induced_morphism(&cv, &cv2, &phis, &psis, &base_map, &f).unwrap();
        assert!(check_cocycle_morphism(&mor, &src, &dst, Exec::Sequential).unwrap().is_empty());

        let mut bad = mor.clone();
        let (_, per_point) = bad.maps.iter_mut().next().unwrap();
        let (_, w) = per_point.iter_mut().next().unwrap();
        let t = w.components.get_mut(&IntPartition::single(1)).unwrap();
        t.coeffs_mut()[0] += crate::tensors::int(1);
        assert!(!check_cocycle_morphism(&bad, &src, &dst, Exec::Sequential).unwrap().is_empty());

        let id_c = SnCocycle::identity(cv.clone(), m.clone());
        let id_maps = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter_map(|(a2, a)| {
                let pts = cv.overlap(&[a, a2]);
                (!pts.is_empty()).then(|| ((a2, a), pts.into_iter().map(|x| (x, SymMorphism::identity(&m))).collect()))
            })
            .collect();
        let id_m = CocycleMorphism { base_map: (0..cv.points().len()).collect(), maps: id_maps };
        assert!(check_cocycle_morphism(&id_m, &id_c, &id_c, Exec::Sequential).unwrap().is_empty());
    }
}
