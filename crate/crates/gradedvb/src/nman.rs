//! Split [n]-manifolds over finite sample bases and their morphisms.
//!
//! A morphism μ from a split model of degree n (ranks r) to one of degree m
//! (ranks s) stores, at every source point, one multilinear map
//! μ_p: E_{p_1}⊗…⊗E_{p_l} → F_{Σp} for each p ∈ P(m) with parts ≤ n.
//! Graded functions store one graded-symmetric scalar-valued tensor per
//! integer partition.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::io::{self, Lines};
use crate::partitions::{integer_partitions, ordered_splits, IntPartition};
use crate::random::{random_invertible, random_symmetric, TestRng};
use crate::tensors::{accumulate_composite, int, linear_inverse, GradedShape, Inner, MultiTensor, Rational};

pub type Components = BTreeMap<IntPartition, MultiTensor>;

/// A graded function at one point: component p lives in Γ(E*_{p_1}⊙…⊙E*_{p_l}).
pub type LocalFunction = BTreeMap<IntPartition, MultiTensor>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBase {
    points: Vec<String>,
}

impl SampleBase {
    pub fn new(points: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &points {
            if !seen.insert(p) {
                return Err(Error::Domain(format!("duplicate point label {p:?}")));
            }
        }
        Ok(SampleBase { points })
    }

    /// Points labelled `p0, p1, …`.
    pub fn numbered(count: usize) -> Self {
        SampleBase { points: (0..count).map(|i| format!("p{i}")).collect() }
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitModel {
    pub ranks: Vec<usize>,
    pub base: SampleBase,
}

impl SplitModel {
    pub fn new(ranks: Vec<usize>, base: SampleBase) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::Domain("a split model needs degree at least 1".into()));
        }
        Ok(SplitModel { ranks, base })
    }

    pub fn degree(&self) -> usize {
        self.ranks.len()
    }
}

/// The component keys of a morphism from degree `n` to degree `m`.
pub fn component_keys(n: usize, m: usize) -> Vec<IntPartition> {
    integer_partitions(m).into_iter().filter(|p| p.max_part() <= n).collect()
}

/// Integer partitions of exactly `k` with parts at most `max_part`.
pub fn partitions_of(k: usize, max_part: usize) -> Vec<IntPartition> {
    integer_partitions(k).into_iter().filter(|p| p.sum() == k && p.max_part() <= max_part).collect()
}

pub fn component_shape(p: &IntPartition, src_ranks: &[usize]) -> GradedShape {
    GradedShape::from_ranks(p.parts(), src_ranks)
}

/// Fills in missing components with zeros and checks shapes.
pub fn normalize(comps: &Components, src_ranks: &[usize], tgt_ranks: &[usize]) -> Result<Components> {
    let keys = component_keys(src_ranks.len(), tgt_ranks.len());
    for (p, t) in comps {
        if !keys.contains(p) {
            return Err(Error::ShapeMismatch(format!("unexpected component {p}")));
        }
        let shape = component_shape(p, src_ranks);
        if *t.shape() != shape || t.out_dim() != tgt_ranks[p.sum() - 1] {
            return Err(Error::ShapeMismatch(format!("component {p} has the wrong shape")));
        }
    }
    Ok(keys
        .into_iter()
        .map(|p| {
            let t = comps.get(&p).cloned().unwrap_or_else(|| {
                MultiTensor::zeros(component_shape(&p, src_ranks), tgt_ranks[p.sum() - 1])
            });
            (p, t)
        })
        .collect())
}

pub fn identity_local(ranks: &[usize]) -> Components {
    let mut comps = Components::new();
    for (i, &r) in ranks.iter().enumerate() {
        comps.insert(IntPartition::single(i + 1), MultiTensor::identity(i + 1, r));
    }
    normalize(&comps, ranks, ranks).expect("identity shapes are consistent")
}

/// Σ over ordered splits of ρ_can^p of sgn·outer_{(Σ|ρ_j|)}∘(inner_{|ρ_j|}).
///
/// `outer` is keyed by the group sums, `inner` by the group types. Absent keys
/// contribute nothing.
pub fn split_sum(
    outer: &BTreeMap<IntPartition, MultiTensor>,
    inner: &Components,
    p: &IntPartition,
    src_ranks: &[usize],
    out_dim: usize,
) -> MultiTensor {
    let mut acc = MultiTensor::zeros(component_shape(p, src_ranks), out_dim);
    for split in ordered_splits(p) {
        let key = IntPartition::new((0..split.groups.len()).map(|j| split.group_sum(p, j)).collect())
            .expect("group sums are positive");
        let Some(outer_map) = outer.get(&key) else { continue };
        let mut inners = Vec::with_capacity(split.groups.len());
        let mut missing = false;
        for (j, group) in split.groups.iter().enumerate() {
            match inner.get(&split.group_type(p, j)) {
                Some(map) => inners.push(Inner { map, slots: group.clone() }),
                None => {
                    missing = true;
                    break;
                }
            }
        }
        if missing {
            continue;
        }
        accumulate_composite(&mut acc, &int(split.sign as i64), outer_map, &inners);
    }
    acc
}

/// (ν∘μ) at one point. `src_ranks` are the ranks of μ's source, `out_ranks`
/// those of ν's target.
pub fn compose_local(nu: &Components, mu: &Components, src_ranks: &[usize], out_ranks: &[usize]) -> Components {
    component_keys(src_ranks.len(), out_ranks.len())
        .into_iter()
        .map(|p| {
            let t = split_sum(nu, mu, &p, src_ranks, out_ranks[p.sum() - 1]);
            (p, t)
        })
        .collect()
}

/// μ*(f) at one point for a graded function f on μ's target.
pub fn pullback_local(mu: &Components, f: &LocalFunction, src_ranks: &[usize]) -> LocalFunction {
    let degrees: std::collections::BTreeSet<usize> = f.keys().map(|q| q.sum()).collect();
    let mut out = LocalFunction::new();
    for k in degrees {
        for p in partitions_of(k, src_ranks.len()) {
            let t = split_sum(f, mu, &p, src_ranks, 1);
            out.insert(p, t);
        }
    }
    out
}

/// The inverse at one point, solved by partition length.
pub fn invert_local(mu: &Components, ranks: &[usize]) -> Result<Components> {
    let mut lambda = Components::new();
    let mut lin_inv = Vec::with_capacity(ranks.len());
    for i in 1..=ranks.len() {
        let m = mu
            .get(&IntPartition::single(i))
            .ok_or_else(|| Error::NotAnIsomorphism(format!("missing linear component ({i})")))?;
        let inv = linear_inverse(m)
            .ok_or_else(|| Error::NotAnIsomorphism(format!("linear component ({i}) is singular")))?;
        lambda.insert(IntPartition::single(i), inv.clone());
        lin_inv.push(inv);
    }
    let mut keys = component_keys(ranks.len(), ranks.len());
    keys.retain(|p| p.len() >= 2);
    keys.sort_by_key(|p| p.len());
    for p in keys {
        // all splits except the all-singleton one only involve known λ's
        let mut rest = split_sum(&lambda, mu, &p, ranks, ranks[p.sum() - 1]);
        let singles: Vec<&MultiTensor> = p.parts().iter().map(|&d| &lin_inv[d - 1]).collect();
        rest = rest.neg();
        lambda.insert(p, rest.precompose_linear(&singles)?);
    }
    let lambda = normalize(&lambda, ranks, ranks)?;
    let id = identity_local(ranks);
    if compose_local(&lambda, mu, ranks, ranks) != id || compose_local(mu, &lambda, ranks, ranks) != id {
        return Err(Error::NotAnIsomorphism("two-sided inverse check failed".into()));
    }
    Ok(lambda)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMorphism {
    pub source: SplitModel,
    pub target: SplitModel,
    pub base_map: Vec<usize>,
    pub fibers: Vec<Components>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedFunction {
    pub model: SplitModel,
    pub values: Vec<LocalFunction>,
}

impl GradedMorphism {
    pub fn new(source: SplitModel, target: SplitModel, base_map: Vec<usize>, fibers: Vec<Components>) -> Result<Self> {
        if base_map.len() != source.base.len() || fibers.len() != source.base.len() {
            return Err(Error::ShapeMismatch("one base image and one fiber per source point required".into()));
        }
        if let Some(&bad) = base_map.iter().find(|&&y| y >= target.base.len()) {
            return Err(Error::ShapeMismatch(format!("base point {bad} is outside the target base")));
        }
        let fibers =
            fibers.iter().map(|c| normalize(c, &source.ranks, &target.ranks)).collect::<Result<Vec<_>>>()?;
        Ok(GradedMorphism { source, target, base_map, fibers })
    }

    pub fn identity(model: &SplitModel) -> Self {
        let id = identity_local(&model.ranks);
        GradedMorphism {
            source: model.clone(),
            target: model.clone(),
            base_map: (0..model.base.len()).collect(),
            fibers: vec![id; model.base.len()],
        }
    }

    pub fn component(&self, point: usize, p: &IntPartition) -> Option<&MultiTensor> {
        self.fibers.get(point)?.get(p)
    }

    fn base_is_bijective(&self) -> bool {
        if self.source.base.len() != self.target.base.len() {
            return false;
        }
        let mut hit = vec![false; self.target.base.len()];
        for &y in &self.base_map {
            if hit[y] {
                return false;
            }
            hit[y] = true;
        }
        true
    }

    pub fn is_isomorphism(&self) -> bool {
        self.source.ranks == self.target.ranks
            && self.base_is_bijective()
            && self.fibers.iter().all(|c| {
                (1..=self.source.degree())
                    .all(|i| c.get(&IntPartition::single(i)).and_then(linear_inverse).is_some())
            })
    }
}

/// ν∘μ.
pub fn compose(nu: &GradedMorphism, mu: &GradedMorphism) -> Result<GradedMorphism> {
    if mu.target != nu.source {
        return Err(Error::ShapeMismatch("target of the first map is not the source of the second".into()));
    }
    let fibers = mu
        .fibers
        .iter()
        .zip(&mu.base_map)
        .map(|(m, &y)| compose_local(&nu.fibers[y], m, &mu.source.ranks, &nu.target.ranks))
        .collect();
    let base_map = mu.base_map.iter().map(|&y| nu.base_map[y]).collect();
    Ok(GradedMorphism { source: mu.source.clone(), target: nu.target.clone(), base_map, fibers })
}

pub fn invert(mu: &GradedMorphism) -> Result<GradedMorphism> {
    if mu.source.ranks != mu.target.ranks {
        return Err(Error::NotAnIsomorphism("source and target ranks differ".into()));
    }
    if !mu.base_is_bijective() {
        return Err(Error::NotAnIsomorphism("base map is not bijective".into()));
    }
    let count = mu.target.base.len();
    let mut base_map = vec![0; count];
    let mut fibers = vec![Components::new(); count];
    for (x, &y) in mu.base_map.iter().enumerate() {
        base_map[y] = x;
        fibers[y] = invert_local(&mu.fibers[x], &mu.source.ranks)?;
    }
    Ok(GradedMorphism { source: mu.target.clone(), target: mu.source.clone(), base_map, fibers })
}

pub fn pullback(mu: &GradedMorphism, f: &GradedFunction) -> Result<GradedFunction> {
    if f.model != mu.target {
        return Err(Error::ShapeMismatch("function does not live on the target".into()));
    }
    for local in &f.values {
        for (q, t) in local {
            if q.max_part() > mu.target.degree() || *t.shape() != component_shape(q, &mu.target.ranks) || t.out_dim() != 1
            {
                return Err(Error::ShapeMismatch(format!("function component {q} has the wrong shape")));
            }
        }
    }
    let values = mu
        .fibers
        .iter()
        .zip(&mu.base_map)
        .map(|(m, &y)| pullback_local(m, &f.values[y], &mu.source.ranks))
        .collect();
    Ok(GradedFunction { model: mu.source.clone(), values })
}

/// The generator function ε^a of degree k (the a-th dual basis vector of F_k^*)
/// at every point.
pub fn generator(model: &SplitModel, k: usize, a: usize) -> GradedFunction {
    let mut t = MultiTensor::zeros(GradedShape::from_ranks(&[k], &model.ranks), 1);
    t.set(&[a], 0, Rational::one());
    let mut local = LocalFunction::new();
    local.insert(IntPartition::single(k), t);
    GradedFunction { model: model.clone(), values: vec![local; model.base.len()] }
}

/// Drops zero components so functions compare by value.
pub fn trim(f: &LocalFunction) -> LocalFunction {
    f.iter().filter(|(_, t)| !t.is_zero()).map(|(k, t)| (k.clone(), t.clone())).collect()
}

/// Random graded-symmetric components; linear parts invertible when
/// `invertible` is set (requires equal ranks).
pub fn random_local(
    rng: &mut TestRng,
    src_ranks: &[usize],
    tgt_ranks: &[usize],
    invertible: bool,
    bound: i64,
) -> Components {
    component_keys(src_ranks.len(), tgt_ranks.len())
        .into_iter()
        .map(|p| {
            let out = tgt_ranks[p.sum() - 1];
            let t = if invertible && p.len() == 1 {
                random_invertible(rng, p.sum(), out, bound)
            } else {
                random_symmetric(rng, component_shape(&p, src_ranks), out, bound)
            };
            (p, t)
        })
        .collect()
}

pub fn random_morphism(
    rng: &mut TestRng,
    source: &SplitModel,
    target: &SplitModel,
    invertible: bool,
    bound: i64,
) -> GradedMorphism {
    let count = source.base.len();
    GradedMorphism {
        source: source.clone(),
        target: target.clone(),
        base_map: (0..count).map(|x| x % target.base.len().max(1)).collect(),
        fibers: (0..count).map(|_| random_local(rng, &source.ranks, &target.ranks, invertible, bound)).collect(),
    }
}

/// Components with only linear parts kept.
pub fn linear_part(comps: &Components) -> Components {
    comps
        .iter()
        .map(|(p, t)| (p.clone(), if p.len() == 1 { t.clone() } else { t.scale(&Rational::zero()) }))
        .collect()
}

impl GradedMorphism {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "morphism source={} target={}",
            io::format_list(&self.source.ranks),
            io::format_list(&self.target.ranks)
        );
        let _ = writeln!(s, "source_points {}", self.source.base.points().join(" "));
        let _ = writeln!(s, "target_points {}", self.target.base.points().join(" "));
        for (x, comps) in self.fibers.iter().enumerate() {
            let _ = writeln!(s, "point {} -> {}", self.source.base.points()[x], self.target.base.points()[self.base_map[x]]);
            io::write_components(&mut s, comps);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let head = lines.expect("morphism")?;
        if head.len() != 2 {
            return Err(lines.error("morphism header needs source= and target="));
        }
        let src = io::parse_list_field(&lines, head[0], "source")?;
        let tgt = io::parse_list_field(&lines, head[1], "target")?;
        let sp = lines.expect("source_points")?.iter().map(|s| s.to_string()).collect();
        let tp: Vec<String> = lines.expect("target_points")?.iter().map(|s| s.to_string()).collect();
        let source = SplitModel::new(src, SampleBase::new(sp)?)?;
        let target = SplitModel::new(tgt, SampleBase::new(tp.clone())?)?;
        let mut base_map = Vec::new();
        let mut fibers = Vec::new();
        while !lines.is_done() {
            let line_no = lines.line_no();
            let words = lines.expect("point")?;
            if words.len() != 3 || words[1] != "->" {
                return Err(Error::Parse { line: line_no, msg: "expected `point <x> -> <y>`".into() });
            }
            if source.base.points().get(fibers.len()).map(String::as_str) != Some(words[0]) {
                return Err(Error::Parse { line: line_no, msg: format!("unexpected point {:?}", words[0]) });
            }
            let y = tp
                .iter()
                .position(|t| t == words[2])
                .ok_or(Error::Parse { line: line_no, msg: format!("unknown target point {:?}", words[2]) })?;
            base_map.push(y);
            fibers.push(lines.components()?);
        }
        GradedMorphism::new(source, target, base_map, fibers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    fn model(ranks: &[usize], points: usize) -> SplitModel {
        SplitModel::new(ranks.to_vec(), SampleBase::numbered(points)).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let mut r = rng(1);
        let a = model(&[2, 1, 2], 2);
        let b = model(&[1, 2], 2);
        let mu = random_morphism(&mut r, &a, &b, false, 3);
        assert_eq!(compose(&GradedMorphism::identity(&b), &mu).unwrap(), mu);
        assert_eq!(compose(&mu, &GradedMorphism::identity(&a)).unwrap(), mu);
    }

    #[test]
    fn linear_only_compose_blockwise() {
        let mut r = rng(2);
        let a = model(&[2, 2], 1);
        let mu_full = random_morphism(&mut r, &a, &a, true, 3);
        let nu_full = random_morphism(&mut r, &a, &a, true, 3);
        let mu = GradedMorphism { fibers: vec![linear_part(&mu_full.fibers[0])], ..mu_full };
        let nu = GradedMorphism { fibers: vec![linear_part(&nu_full.fibers[0])], ..nu_full };
        let c = compose(&nu, &mu).unwrap();
        for (p, t) in &c.fibers[0] {
            if p.len() == 1 {
                let expect = mu.fibers[0][p].postcompose_linear(&nu.fibers[0][p]).unwrap();
                assert_eq!(t, &expect);
            } else {
                assert!(t.is_zero(), "{p}");
            }
        }
    }

    #[test]
    fn generator_pullback_sums_components() {
        let mut r = rng(3);
        let a = model(&[1, 2, 1], 1);
        let mu = random_morphism(&mut r, &a, &a, false, 3);
        let f = pullback(&mu, &generator(&a, 3, 0)).unwrap();
        for (p, t) in &f.values[0] {
            assert_eq!(p.sum(), 3);
            // the degree-3 fiber is one-dimensional, so ε^0∘μ_p is μ_p itself
            assert_eq!(t.coeffs(), mu.fibers[0][p].coeffs());
        }
    }

    #[test]
    fn inverse_is_two_sided() {
        let mut r = rng(4);
        let a = model(&[2, 1, 1], 2);
        let mu = random_morphism(&mut r, &a, &a, true, 2);
        assert!(mu.is_isomorphism());
        let inv = invert(&mu).unwrap();
        assert_eq!(compose(&inv, &mu).unwrap(), GradedMorphism::identity(&a));
        assert_eq!(compose(&mu, &inv).unwrap(), GradedMorphism::identity(&a));
        assert_eq!(invert(&inv).unwrap(), mu);
        let id = GradedMorphism::identity(&a);
        assert_eq!(invert(&id).unwrap(), id);
    }

    #[test]
    fn singular_linear_part_is_not_iso() {
        let a = model(&[2], 1);
        let mut mu = GradedMorphism::identity(&a);
        let t = mu.fibers[0].get_mut(&IntPartition::single(1)).unwrap();
        t.set(&[1], 1, Rational::zero());
        assert!(!mu.is_isomorphism());
        assert!(matches!(invert(&mu), Err(Error::NotAnIsomorphism(_))));
    }

    #[test]
    fn text_round_trip() {
        let mut r = rng(5);
        let a = model(&[1, 2], 2);
        let b = model(&[2, 1, 1], 1);
        let mu = random_morphism(&mut r, &a, &b, false, 2);
        assert_eq!(GradedMorphism::from_text(&mu.to_text()).unwrap(), mu);
        assert!(matches!(GradedMorphism::from_text("morphism source=1\n"), Err(Error::Parse { .. })));
    }
}
