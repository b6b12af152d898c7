//! Decomposed symmetric n-fold vector bundles, fiberwise.
//!
//! A point of E^A(n̄) over a fixed base point is a tuple (a_I) indexed by the
//! nonempty I ⊆ n̄ with a_I ∈ A_{#I}. Morphisms are stored in symmetric form,
//! one multilinear map τ_p per p ∈ P(n), or in general form, one map τ_ρ per
//! canonically ordered set partition ρ of a nonempty I ⊆ n̄.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::io::{self, Lines};
use crate::nman::{self, Components};
use crate::partitions::{
    canonical_partition_in, check_n, coarsements, cube_objects, epsilon, is_object, restrict_to, set_partitions, sgn,
    IntPartition, OrderedPartition, Permutation, Subset,
};
use crate::random::{random_vector, TestRng};
use crate::tensors::{accumulate_composite, for_each_index, int, GradedShape, Inner, MultiTensor, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymModel {
    n: usize,
    dims: Vec<usize>,
}

impl SymModel {
    /// Building dims a_1,…,a_n.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let n = dims.len();
        if n == 0 {
            return Err(Error::Domain("a symmetric model needs n ≥ 1".into()));
        }
        check_n(n)?;
        Ok(SymModel { n, dims })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// dim A_{#I}.
    pub fn dim_of(&self, set: &Subset) -> usize {
        self.dims[set.len() - 1]
    }

    pub fn dim_of_bits(&self, bits: u32) -> usize {
        self.dims[bits.count_ones() as usize - 1]
    }
}

/// A point of E^A(n̄) in a single fiber; entry 0 (the empty set) is unused.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecTuple {
    n: usize,
    entries: Vec<Vec<Rational>>,
}

impl DecTuple {
    pub fn zeros(model: &SymModel) -> Self {
        let entries =
            (0..1u32 << model.n).map(|b| if b == 0 { Vec::new() } else { vec![Rational::zero(); model.dim_of_bits(b)] }).collect();
        DecTuple { n: model.n, entries }
    }

    pub fn random(rng: &mut TestRng, model: &SymModel, bound: i64) -> Self {
        let mut x = DecTuple::zeros(model);
        for b in 1..x.entries.len() {
            x.entries[b] = random_vector(rng, model.dim_of_bits(b as u32), bound);
        }
        x
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, set: &Subset) -> &[Rational] {
        &self.entries[set.bits() as usize]
    }

    pub fn entry_bits(&self, bits: u32) -> &[Rational] {
        &self.entries[bits as usize]
    }

    pub fn entry_mut(&mut self, bits: u32) -> &mut Vec<Rational> {
        &mut self.entries[bits as usize]
    }

    pub fn set_entry(&mut self, set: &Subset, v: Vec<Rational>) {
        assert_eq!(v.len(), self.entries[set.bits() as usize].len(), "entry dimension");
        self.entries[set.bits() as usize] = v;
    }

    pub fn entry_is_zero(&self, bits: u32) -> bool {
        self.entries[bits as usize].iter().all(Zero::is_zero)
    }

    pub fn is_zero(&self) -> bool {
        (1..self.entries.len() as u32).all(|b| self.entry_is_zero(b))
    }

    pub fn fits(&self, model: &SymModel) -> bool {
        self.n == model.n && (1..self.entries.len()).all(|b| self.entries[b].len() == model.dim_of_bits(b as u32))
    }

    /// Nonempty subsets whose entry is nonzero.
    pub fn support(&self) -> Vec<u32> {
        (1..self.entries.len() as u32).filter(|&b| !self.entry_is_zero(b)).collect()
    }
}

/// Ψ_σ: the entry at J becomes ε(σ^{-1},J)·a_{σ^{-1}(J)}.
pub fn sn_action(sigma: &Permutation, x: &DecTuple) -> DecTuple {
    assert_eq!(sigma.n(), x.n, "permutation size");
    let inv = sigma.inverse();
    let mut y = x.clone();
    for b in 1..(1u32 << x.n) {
        let j = Subset::from_bits(x.n, b);
        let pre = j.image(&inv);
        let v = &x.entries[pre.bits() as usize];
        y.entries[b as usize] = if epsilon(&inv, &j) == 1 { v.clone() } else { v.iter().map(|c| -c).collect() };
    }
    y
}

/// One term of a top map: the partition ρ of I (as block bitmasks), the key of
/// its component and sgn(ρ).
#[derive(Clone, Debug)]
pub struct Term {
    pub target: u32,
    pub blocks: Vec<u32>,
    pub rho: OrderedPartition,
    pub sizes: IntPartition,
    pub sign: i32,
}

/// All (I, ρ ∈ P(I)) for nonempty I ⊆ n̄.
pub fn terms(n: usize) -> Arc<Vec<Term>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Term>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&n) {
        return t.clone();
    }
    let mut out = Vec::new();
    for set in Subset::all(n).filter(|s| !s.is_empty()) {
        for rho in set_partitions(&set) {
            out.push(Term {
                target: set.bits(),
                blocks: rho.blocks().iter().map(|b| b.bits()).collect(),
                sizes: rho.sizes(),
                sign: sgn(&rho),
                rho,
            });
        }
    }
    let out = Arc::new(out);
    cache.lock().unwrap().insert(n, out.clone());
    out
}

fn apply_terms<'a>(
    x: &DecTuple,
    target: &SymModel,
    map_for: impl Fn(&Term) -> Option<(&'a MultiTensor, i32)>,
) -> DecTuple {
    let n = x.n;
    let nonzero: Vec<bool> = (0..1u32 << n).map(|b| b != 0 && !x.entry_is_zero(b)).collect();
    let mut y = DecTuple::zeros(target);
    for term in terms(n).iter() {
        if !term.blocks.iter().all(|&b| nonzero[b as usize]) {
            continue;
        }
        let Some((map, sign)) = map_for(term) else { continue };
        let vecs: Vec<&[Rational]> = term.blocks.iter().map(|&b| x.entry_bits(b)).collect();
        map.accumulate(&vecs, &int(sign as i64), &mut y.entries[term.target as usize]);
    }
    y
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMorphism {
    pub source: SymModel,
    pub target: SymModel,
    pub components: Components,
}

impl SymMorphism {
    /// Checks shapes and fills in zero components; symmetry is not required.
    pub fn new(source: SymModel, target: SymModel, components: Components) -> Result<Self> {
        if source.n != target.n {
            return Err(Error::ShapeMismatch("source and target have different n".into()));
        }
        let components = nman::normalize(&components, &source.dims, &target.dims)?;
        Ok(SymMorphism { source, target, components })
    }

    pub fn identity(model: &SymModel) -> Self {
        SymMorphism { source: model.clone(), target: model.clone(), components: nman::identity_local(&model.dims) }
    }

    pub fn n(&self) -> usize {
        self.source.n
    }

    pub fn component(&self, p: &IntPartition) -> &MultiTensor {
        &self.components[p]
    }

    /// The (skew-)symmetry conditions: symmetric in equal even-degree entries,
    /// skew-symmetric in equal odd-degree entries.
    pub fn satisfies_symmetry(&self) -> bool {
        self.components.values().all(MultiTensor::is_graded_symmetric)
    }

    pub fn random(rng: &mut TestRng, source: &SymModel, target: &SymModel, invertible: bool, bound: i64) -> Self {
        SymMorphism {
            source: source.clone(),
            target: target.clone(),
            components: nman::random_local(rng, &source.dims, &target.dims, invertible, bound),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "symmorphism source={} target={}", io::format_list(&self.source.dims), io::format_list(&self.target.dims));
        io::write_components(&mut s, &self.components);
        s
    }

    pub fn from_lines(lines: &mut Lines<'_>) -> Result<Self> {
        let line_no = lines.line_no();
        let head = lines.expect("symmorphism")?;
        if head.len() != 2 {
            return Err(lines.error("symmorphism header needs source= and target="));
        }
        let src = io::parse_list_field(lines, head[0], "source")?;
        let tgt = io::parse_list_field(lines, head[1], "target")?;
        let comps = lines.components()?;
        let wrap = |e: Error| io::relocate(e, line_no);
        SymMorphism::new(SymModel::new(src).map_err(wrap)?, SymModel::new(tgt).map_err(wrap)?, comps).map_err(wrap)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let m = SymMorphism::from_lines(&mut lines)?;
        if !lines.is_done() {
            return Err(lines.error("trailing content"));
        }
        Ok(m)
    }
}

/// Entry I of the image is Σ_{ρ∈P(I)} sgn(ρ)·τ_{(#I_1,…,#I_k)}(a_{I_1},…,a_{I_k}).
pub fn top_map(tau: &SymMorphism, x: &DecTuple) -> DecTuple {
    assert!(x.fits(&tau.source), "tuple does not fit the source model");
    apply_terms(x, &tau.target, |t| tau.components.get(&t.sizes).map(|m| (m, t.sign)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralDecMorphism {
    pub source: SymModel,
    pub target: SymModel,
    pub components: BTreeMap<OrderedPartition, MultiTensor>,
}

impl GeneralDecMorphism {
    pub fn n(&self) -> usize {
        self.source.n
    }

    pub fn shape_of(rho: &OrderedPartition, model: &SymModel) -> GradedShape {
        let sizes = rho.sizes();
        GradedShape::from_ranks(sizes.parts(), &model.dims)
    }

    pub fn zero(source: &SymModel, target: &SymModel) -> Self {
        GeneralDecMorphism { source: source.clone(), target: target.clone(), components: BTreeMap::new() }
    }

    /// Identity components on every (I).
    pub fn identity(model: &SymModel) -> Self {
        let mut m = GeneralDecMorphism::zero(model, model);
        for set in Subset::all(model.n).filter(|s| !s.is_empty()) {
            let rho = OrderedPartition::new(model.n, vec![set]).expect("one block");
            m.components.insert(rho, MultiTensor::identity(set.len(), model.dim_of(&set)));
        }
        m
    }

    pub fn get(&self, rho: &OrderedPartition) -> Option<&MultiTensor> {
        self.components.get(rho)
    }

    /// Removes zero components.
    pub fn trimmed(&self) -> Self {
        let mut m = self.clone();
        m.components.retain(|_, t| !t.is_zero());
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "decmorphism source={} target={}", io::format_list(&self.source.dims), io::format_list(&self.target.dims));
        for (rho, t) in &self.components {
            let _ = writeln!(s, "block {rho}");
            let _ = writeln!(s, "{t}");
        }
        s
    }

    pub fn from_lines(lines: &mut Lines<'_>) -> Result<Self> {
        let line_no = lines.line_no();
        let head = lines.expect("decmorphism")?;
        if head.len() != 2 {
            return Err(lines.error("decmorphism header needs source= and target="));
        }
        let wrap = |e: Error| io::relocate(e, line_no);
        let source = SymModel::new(io::parse_list_field(lines, head[0], "source")?).map_err(wrap)?;
        let target = SymModel::new(io::parse_list_field(lines, head[1], "target")?).map_err(wrap)?;
        let mut m = GeneralDecMorphism::zero(&source, &target);
        while lines.peek_keyword() == Some("block") {
            let ln = lines.line_no();
            let words = lines.expect("block")?;
            let key = words.first().ok_or_else(|| lines.error("block key missing"))?;
            let rho = OrderedPartition::parse(key, Some(source.n)).map_err(|e| io::relocate(e, ln))?;
            if !rho.is_canonical() {
                return Err(Error::Parse { line: ln, msg: format!("{rho} is not canonically ordered") });
            }
            let t = lines.tensor()?;
            let shape = GeneralDecMorphism::shape_of(&rho, &source);
            if *t.shape() != shape || t.out_dim() != target.dim_of(&rho.ambient()) {
                return Err(Error::Parse { line: ln, msg: format!("component {rho} has the wrong shape") });
            }
            m.components.insert(rho, t);
        }
        Ok(m)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let m = GeneralDecMorphism::from_lines(&mut lines)?;
        if !lines.is_done() {
            return Err(lines.error("trailing content"));
        }
        Ok(m)
    }
}

/// Entry I of the image is Σ_{ρ∈P(I)} τ_ρ(a_{I_1},…,a_{I_k}).
pub fn general_top_map(m: &GeneralDecMorphism, x: &DecTuple) -> DecTuple {
    assert!(x.fits(&m.source), "tuple does not fit the source model");
    apply_terms(x, &m.target, |t| m.components.get(&t.rho).map(|c| (c, 1)))
}

/// τ_ρ := sgn(ρ)·τ_{(#I_1,…,#I_k)} for every set partition ρ.
pub fn expand(tau: &SymMorphism) -> Result<GeneralDecMorphism> {
    for (p, t) in &tau.components {
        if !t.is_graded_symmetric() {
            return Err(Error::InvalidMorphism(format!("component {p} violates the (skew-)symmetry conditions")));
        }
    }
    let mut m = GeneralDecMorphism::zero(&tau.source, &tau.target);
    for term in terms(tau.n()).iter() {
        if let Some(t) = tau.components.get(&term.sizes) {
            let c = if term.sign == 1 { t.clone() } else { t.neg() };
            m.components.insert(term.rho.clone(), c);
        }
    }
    Ok(m)
}

/// τ_ρ for an arbitrarily ordered ρ: sgn(ρ)·τ_{sizes} with slot k fed by block k.
pub fn component_for(tau: &SymMorphism, rho: &OrderedPartition) -> Result<MultiTensor> {
    let canon = rho.canonical();
    let t = tau
        .components
        .get(&canon.sizes())
        .ok_or_else(|| Error::Domain(format!("no component for {rho}")))?;
    let order: Vec<usize> = rho
        .blocks()
        .iter()
        .map(|b| canon.blocks().iter().position(|c| c == b).expect("same blocks"))
        .collect();
    let t = t.permute_slots(&order);
    Ok(if sgn(rho) == 1 { t } else { t.neg() })
}

/// Tuples carrying one basis vector on each block of `blocks` and zeros elsewhere,
/// together with the chosen basis indices.
pub fn basis_feeds(model: &SymModel, blocks: &[Subset], mut f: impl FnMut(&[usize], &DecTuple)) {
    let dims: Vec<usize> = blocks.iter().map(|b| model.dim_of(b)).collect();
    let mut x = DecTuple::zeros(model);
    for_each_index(&dims, |index| {
        for (b, &i) in blocks.iter().zip(index) {
            let e = x.entry_mut(b.bits());
            e.iter_mut().for_each(|c| c.set_zero());
            e[i] = int(1);
        }
        f(index, &x);
    });
}

/// Recovers τ_p from a top map by feeding basis vectors on ρ_can^p and reading
/// the {1,…,Σp}-entry, then re-checks symmetry and agreement on all feeds.
pub fn extract(top: &dyn Fn(&DecTuple) -> DecTuple, source: &SymModel, target: &SymModel) -> Result<SymMorphism> {
    let n = source.n;
    let mut comps = Components::new();
    for p in nman::component_keys(n, n) {
        let rho = canonical_partition_in(p.parts(), n)?;
        let out_set = rho.ambient();
        let mut t = MultiTensor::zeros(GeneralDecMorphism::shape_of(&rho, source), target.dim_of(&out_set));
        basis_feeds(source, rho.blocks(), |index, x| {
            let y = top(x);
            for (o, c) in y.entry(&out_set).iter().enumerate() {
                t.set(index, o, c.clone());
            }
        });
        comps.insert(p, t);
    }
    let tau = SymMorphism::new(source.clone(), target.clone(), comps)?;
    if let Some((p, _)) = tau.components.iter().find(|(_, t)| !t.is_graded_symmetric()) {
        return Err(Error::ExtractionMismatch(format!("extracted component {p} is not (skew-)symmetric")));
    }
    if let Some(x) = find_disagreement(source, None, &|x| top_map(&tau, x), top) {
        return Err(Error::ExtractionMismatch(format!(
            "re-expanded map differs from the given one on the feed supported at {:?}",
            x.support()
        )));
    }
    Ok(tau)
}

/// Every collection of pairwise disjoint nonempty subsets of n̄ (the empty
/// collection included), optionally restricted to blocks that are objects of ρ.
pub fn feed_collections(n: usize, restrict: Option<&OrderedPartition>) -> Vec<Vec<Subset>> {
    let mut out = vec![Vec::new()];
    for t in terms(n).iter() {
        let blocks: Vec<Subset> = t.rho.blocks().to_vec();
        if let Some(r) = restrict {
            if !blocks.iter().all(|b| is_object(r, b)) {
                continue;
            }
        }
        out.push(blocks);
    }
    out
}

/// The first basis feed on which `f` and `g` differ.
///
/// For maps that are sums of terms multilinear in distinct entries, agreement
/// on all feeds is equality.
pub fn find_disagreement(
    model: &SymModel,
    restrict: Option<&OrderedPartition>,
    f: &dyn Fn(&DecTuple) -> DecTuple,
    g: &dyn Fn(&DecTuple) -> DecTuple,
) -> Option<DecTuple> {
    for blocks in feed_collections(model.n, restrict) {
        let mut bad = None;
        basis_feeds(model, &blocks, |_, x| {
            if bad.is_none() && f(x) != g(x) {
                bad = Some(x.clone());
            }
        });
        if bad.is_some() {
            return bad;
        }
    }
    None
}

pub fn agree_on_feeds(
    model: &SymModel,
    restrict: Option<&OrderedPartition>,
    f: &dyn Fn(&DecTuple) -> DecTuple,
    g: &dyn Fn(&DecTuple) -> DecTuple,
) -> bool {
    find_disagreement(model, restrict, f, g).is_none()
}

/// top_map∘Ψ_σ = Ψ_σ∘top_map for every σ ∈ S_n.
pub fn check_equivariance(tau: &SymMorphism) -> bool {
    Permutation::all(tau.n()).iter().all(|sigma| {
        agree_on_feeds(&tau.source, None, &|x| top_map(tau, &sn_action(sigma, x)), &|x| {
            sn_action(sigma, &top_map(tau, x))
        })
    })
}

fn chain_check(outer: &SymMorphism, inner: &SymMorphism) -> Result<()> {
    if inner.target != outer.source {
        return Err(Error::ShapeMismatch("the inner morphism's target is not the outer one's source".into()));
    }
    Ok(())
}

/// (τ∘η)_p as a sum over coarsements J of ρ_can^p with sign
/// sgn(J)·Π sgn(ρ_can^p ∩ J_i).
pub fn compose_sym(tau: &SymMorphism, eta: &SymMorphism) -> Result<SymMorphism> {
    chain_check(tau, eta)?;
    let n = tau.n();
    let mut comps = Components::new();
    for p in nman::component_keys(n, n) {
        let rho = canonical_partition_in(p.parts(), n)?;
        let out_dim = tau.target.dim_of(&rho.ambient());
        let mut acc = MultiTensor::zeros(GeneralDecMorphism::shape_of(&rho, &eta.source), out_dim);
        for coarse in coarsements(&rho) {
            let Some(outer) = tau.components.get(&coarse.sizes()) else { continue };
            let mut sign = sgn(&coarse);
            let mut inners = Vec::with_capacity(coarse.len());
            for block in coarse.blocks() {
                let slots: Vec<usize> = (0..rho.len()).filter(|&k| rho.blocks()[k].is_subset_of(block)).collect();
                let sub = restrict_to(&rho, block);
                sign *= sgn(&sub);
                match eta.components.get(&sub.sizes()) {
                    Some(map) => inners.push(Inner { map, slots }),
                    None => break,
                }
            }
            if inners.len() == coarse.len() {
                accumulate_composite(&mut acc, &int(sign as i64), outer, &inners);
            }
        }
        comps.insert(p, acc);
    }
    SymMorphism::new(eta.source.clone(), tau.target.clone(), comps)
}

/// (μ∘τ)_ρ = Σ_{J∈coars(ρ)} μ_J∘(τ_{ρ∩J_1},…,τ_{ρ∩J_l}).
pub fn compose_general(mu: &GeneralDecMorphism, tau: &GeneralDecMorphism) -> Result<GeneralDecMorphism> {
    if tau.target != mu.source {
        return Err(Error::ShapeMismatch("the inner morphism's target is not the outer one's source".into()));
    }
    let mut out = GeneralDecMorphism::zero(&tau.source, &mu.target);
    for term in terms(tau.n()).iter() {
        let rho = &term.rho;
        let mut acc = MultiTensor::zeros(GeneralDecMorphism::shape_of(rho, &tau.source), mu.target.dim_of(&rho.ambient()));
        let mut touched = false;
        for coarse in coarsements(rho) {
            let Some(outer) = mu.components.get(&coarse) else { continue };
            let mut inners = Vec::with_capacity(coarse.len());
            for block in coarse.blocks() {
                let slots: Vec<usize> = (0..rho.len()).filter(|&k| rho.blocks()[k].is_subset_of(block)).collect();
                match tau.components.get(&restrict_to(rho, block)) {
                    Some(map) => inners.push(Inner { map, slots }),
                    None => break,
                }
            }
            if inners.len() == coarse.len() {
                accumulate_composite(&mut acc, &int(1), outer, &inners);
                touched = true;
            }
        }
        if touched {
            out.components.insert(rho.clone(), acc);
        }
    }
    Ok(out)
}

/// The inverse of a symmetric morphism with invertible linear components.
pub fn invert_sym(tau: &SymMorphism) -> Result<SymMorphism> {
    if tau.source != tau.target {
        return Err(Error::NotAnIsomorphism("source and target models differ".into()));
    }
    let comps = nman::invert_local(&tau.components, &tau.source.dims)?;
    SymMorphism::new(tau.source.clone(), tau.target.clone(), comps)
}

/// The n-pullback P of a decomposed symmetric bundle: n-tuples (e_1,…,e_n)
/// with e_i ∈ E(n̄∖{i}) agreeing on overlaps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackBundle {
    pub base: SymModel,
    pub pulled: SymModel,
}

/// e_i is stored as a tuple whose entries meeting i are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackTuple(pub Vec<DecTuple>);

pub fn pullback_bundle(model: &SymModel) -> PullbackBundle {
    let mut dims = model.dims.clone();
    *dims.last_mut().expect("n ≥ 1") = 0;
    PullbackBundle { base: model.clone(), pulled: SymModel { n: model.n, dims } }
}

impl PullbackBundle {
    /// π: E(n̄) → P, forgetting the n̄-entry.
    pub fn project(&self, x: &DecTuple) -> PullbackTuple {
        let n = self.base.n;
        PullbackTuple(
            (1..=n)
                .map(|i| {
                    let mut e = x.clone();
                    for b in 1..(1u32 << n) {
                        if b & (1 << (i - 1)) != 0 {
                            e.entries[b as usize].iter_mut().for_each(|c| c.set_zero());
                        }
                    }
                    e
                })
                .collect(),
        )
    }

    /// Φ_σ: slot i of the image is Ψ_σ(e_{σ^{-1}(i)}).
    pub fn action(&self, sigma: &Permutation, e: &PullbackTuple) -> PullbackTuple {
        let inv = sigma.inverse();
        PullbackTuple((1..=self.base.n).map(|i| sn_action(sigma, &e.0[inv.apply(i) - 1])).collect())
    }

    pub fn is_consistent(&self, e: &PullbackTuple) -> bool {
        let n = self.base.n;
        e.0.len() == n
            && (1..=n).all(|i| {
                (1..(1u32 << n)).all(|b| b & (1 << (i - 1)) == 0 || e.0[i - 1].entry_is_zero(b))
            })
            && (1..(1u32 << n)).all(|b| {
                let owners: Vec<usize> = (1..=n).filter(|&i| b & (1 << (i - 1)) == 0).collect();
                owners.windows(2).all(|w| e.0[w[0] - 1].entry_bits(b) == e.0[w[1] - 1].entry_bits(b))
            })
    }

    /// The same point as a tuple of the pulled-back decomposed model.
    pub fn as_decomposed(&self, e: &PullbackTuple) -> DecTuple {
        let n = self.base.n;
        let full = (1u32 << n) - 1;
        let mut y = DecTuple::zeros(&self.pulled);
        for b in 1..full {
            let owner = (1..=n).find(|&i| b & (1 << (i - 1)) == 0).expect("proper subset");
            y.entries[b as usize] = e.0[owner - 1].entry_bits(b).to_vec();
        }
        y
    }

    /// π∘Ψ_σ = Φ_σ∘π on `x`, and Φ_σ agrees with Ψ_σ of the pulled model.
    pub fn check_equivariance(&self, sigma: &Permutation, x: &DecTuple) -> bool {
        let lhs = self.project(&sn_action(sigma, x));
        let px = self.project(x);
        let rhs = self.action(sigma, &px);
        lhs == rhs
            && self.is_consistent(&rhs)
            && self.as_decomposed(&rhs) == sn_action(sigma, &self.as_decomposed(&px))
    }
}

/// The sign factor of the intermediate lemma:
/// sgn(σ(ρ))·ε(σ,I) / (sgn(ρ)·Π ε(σ,I_l)), with σ(ρ) canonically reordered.
pub fn lemma_sign(sigma: &Permutation, rho: &OrderedPartition) -> i32 {
    let image = rho.image(sigma).canonical();
    let mut s = sgn(&image) * epsilon(sigma, &rho.ambient()) * sgn(rho);
    for b in rho.blocks() {
        s *= epsilon(sigma, b);
    }
    s
}

/// Objects of the cube category, excluding ∅, as bitmasks.
pub fn object_bits(rho: &OrderedPartition) -> Vec<u32> {
    cube_objects(rho).into_iter().filter(|s| !s.is_empty()).map(|s| s.bits()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    fn tuple(model: &SymModel, vals: &[(&str, Vec<i64>)]) -> DecTuple {
        let mut x = DecTuple::zeros(model);
        for (s, v) in vals {
            x.set_entry(&Subset::parse(model.n(), s).unwrap(), v.iter().map(|&c| int(c)).collect());
        }
        x
    }

    #[test]
    fn swap_action_on_two_entries() {
        let m = SymModel::new(vec![1, 1]).unwrap();
        let x = tuple(&m, &[("1", vec![3]), ("2", vec![5]), ("1,2", vec![7])]);
        let y = sn_action(&Permutation::transposition(2, 1, 2), &x);
        assert_eq!(y, tuple(&m, &[("1", vec![5]), ("2", vec![3]), ("1,2", vec![-7])]));
        assert_eq!(sn_action(&Permutation::identity(2), &x), x);
    }

    #[test]
    fn action_is_a_left_action() {
        let m = SymModel::new(vec![2, 1, 1]).unwrap();
        let mut r = rng(9);
        let x = DecTuple::random(&mut r, &m, 3);
        for s in Permutation::all(3) {
            for t in Permutation::all(3) {
                assert_eq!(sn_action(&s.compose(&t), &x), sn_action(&s, &sn_action(&t, &x)));
            }
        }
    }

    #[test]
    fn identity_top_map_is_identity() {
        let m = SymModel::new(vec![2, 1, 2]).unwrap();
        let x = DecTuple::random(&mut rng(1), &m, 4);
        assert_eq!(top_map(&SymMorphism::identity(&m), &x), x);
        let e = expand(&SymMorphism::identity(&m)).unwrap();
        assert_eq!(e.trimmed(), GeneralDecMorphism::identity(&m));
    }

    #[test]
    fn expand_applies_partition_sign() {
        let m = SymModel::new(vec![1; 6]).unwrap();
        let tau = SymMorphism::random(&mut rng(2), &m, &m, false, 3);
        let e = expand(&tau).unwrap();
        let rho = OrderedPartition::parse("1|2,3|4,5,6", Some(6)).unwrap();
        let p = IntPartition::new(vec![1, 2, 3]).unwrap();
        assert_eq!(e.get(&rho).unwrap(), tau.component(&p));
        let rho = OrderedPartition::parse("4,5,6|1|2,3", Some(6)).unwrap();
        assert_eq!(sgn(&rho), -1);
        let expect = tau.component(&p).permute_slots(&[2, 0, 1]).neg();
        assert_eq!(component_for(&tau, &rho).unwrap(), expect);
        let rho = OrderedPartition::parse("2|1,3", Some(6)).unwrap();
        let p = IntPartition::new(vec![1, 2]).unwrap();
        assert_eq!(e.get(&rho).unwrap(), &tau.component(&p).neg());
    }

    #[test]
    fn skew_on_one_dimension_forces_zero() {
        let m = SymModel::new(vec![1, 1]).unwrap();
        let tau = SymMorphism::random(&mut rng(3), &m, &m, false, 3);
        assert!(tau.component(&IntPartition::new(vec![1, 1]).unwrap()).is_zero());
    }

    #[test]
    fn asymmetric_family_is_rejected() {
        let m = SymModel::new(vec![2, 1]).unwrap();
        let mut tau = SymMorphism::identity(&m);
        let key = IntPartition::new(vec![1, 1]).unwrap();
        tau.components.get_mut(&key).unwrap().set(&[0, 1], 0, int(1));
        assert!(!tau.satisfies_symmetry());
        assert!(!check_equivariance(&tau));
        assert!(matches!(expand(&tau), Err(Error::InvalidMorphism(_))));
        assert!(check_equivariance(&SymMorphism::identity(&m)));
        let zero = SymMorphism::new(m.clone(), m.clone(), Components::new()).unwrap();
        assert!(check_equivariance(&zero));
    }

    #[test]
    fn extract_inverts_top_map() {
        let src = SymModel::new(vec![2, 1, 2]).unwrap();
        let tgt = SymModel::new(vec![1, 2, 1]).unwrap();
        let tau = SymMorphism::random(&mut rng(4), &src, &tgt, false, 3);
        let back = extract(&|x| top_map(&tau, x), &src, &tgt).unwrap();
        assert_eq!(back, tau);
    }

    #[test]
    fn extract_rejects_non_equivariant_map() {
        let m = SymModel::new(vec![1, 1]).unwrap();
        // doubles the {1}-entry only
        let f = |x: &DecTuple| {
            let mut y = x.clone();
            y.entry_mut(1).iter_mut().for_each(|c| *c *= int(2));
            y
        };
        assert!(matches!(extract(&f, &m, &m), Err(Error::ExtractionMismatch(_))));
    }

    #[test]
    fn canonical_feed_reads_component() {
        let m = SymModel::new(vec![2, 2, 1]).unwrap();
        let tau = SymMorphism::random(&mut rng(5), &m, &m, false, 3);
        let p = IntPartition::new(vec![1, 2]).unwrap();
        let x = tuple(&m, &[("1", vec![1, 0]), ("2,3", vec![0, 1])]);
        let y = top_map(&tau, &x);
        assert_eq!(y.entry(&Subset::full(3)), tau.component(&p).column(&[0, 1]));
    }

    #[test]
    fn compose_routes_agree() {
        let mut r = rng(6);
        let a = SymModel::new(vec![2, 1, 1]).unwrap();
        let b = SymModel::new(vec![1, 2, 1]).unwrap();
        let c = SymModel::new(vec![2, 2, 1]).unwrap();
        let eta = SymMorphism::random(&mut r, &a, &b, false, 3);
        let tau = SymMorphism::random(&mut r, &b, &c, false, 3);
        let sym = compose_sym(&tau, &eta).unwrap();
        let nm = nman::compose_local(&tau.components, &eta.components, a.dims(), c.dims());
        assert_eq!(sym.components, nm);
        let gen = compose_general(&expand(&tau).unwrap(), &expand(&eta).unwrap()).unwrap();
        assert_eq!(gen.trimmed(), expand(&sym).unwrap().trimmed());
        let x = DecTuple::random(&mut r, &a, 3);
        assert_eq!(top_map(&sym, &x), top_map(&tau, &top_map(&eta, &x)));
    }

    #[test]
    fn identity_absorbs_in_compose() {
        let m = SymModel::new(vec![1, 2, 1]).unwrap();
        let tau = SymMorphism::random(&mut rng(7), &m, &m, false, 3);
        let id = SymMorphism::identity(&m);
        assert_eq!(compose_sym(&id, &tau).unwrap(), tau);
        assert_eq!(compose_sym(&tau, &id).unwrap(), tau);
    }

    #[test]
    fn pullback_bundle_dims_and_equivariance() {
        let m = SymModel::new(vec![2, 3]).unwrap();
        let pb = pullback_bundle(&m);
        assert_eq!(pb.pulled.dims(), &[2, 0]);
        let m1 = SymModel::new(vec![4]).unwrap();
        assert_eq!(pullback_bundle(&m1).pulled.dims(), &[0]);
        let m4 = SymModel::new(vec![1, 2, 1, 1]).unwrap();
        let pb = pullback_bundle(&m4);
        let x = DecTuple::random(&mut rng(8), &m4, 3);
        for s in Permutation::all(4) {
            assert!(pb.check_equivariance(&s, &x));
        }
    }

    #[test]
    fn building_entry_scales_by_epsilon() {
        let m = SymModel::new(vec![1, 1, 1]).unwrap();
        let x = DecTuple::random(&mut rng(10), &m, 3);
        for s in Permutation::all(3) {
            let y = sn_action(&s, &x);
            for set in Subset::all(3).filter(|s| !s.is_empty()) {
                let img = set.image(&s);
                let e = int(epsilon(&s, &set) as i64);
                let expect: Vec<Rational> = x.entry(&set).iter().map(|c| c * &e).collect();
                assert_eq!(y.entry(&img), &expect[..]);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let m = SymModel::new(vec![1, 2]).unwrap();
        let tau = SymMorphism::random(&mut rng(11), &m, &m, true, 2);
        assert_eq!(SymMorphism::from_text(&tau.to_text()).unwrap(), tau);
        let e = expand(&tau).unwrap();
        let text = e.to_text();
        let mut lines = Lines::new(&text);
        assert_eq!(GeneralDecMorphism::from_lines(&mut lines).unwrap(), e);
    }
}
