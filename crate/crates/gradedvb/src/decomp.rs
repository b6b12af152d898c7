//! From a linear splitting and decompositions of the highest order cores to a
//! decomposition, on decomposed data; and the symmetric averaging of 2-core
//! decompositions.
//!
//! The target bundle is itself a decomposed model, so a decomposition is a
//! [`GeneralDecMorphism`] whose one-block components are identities.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{One, Zero};

use crate::cores::{restrict_morphism, CoreMorphism};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::io::{self, Lines};
use crate::partitions::{
    cube_intersection, is_object, set_partitions, OrderedPartition, Permutation, Subset,
};
use crate::random::{random_tensor, TestRng};
use crate::snvb::{
    agree_on_feeds, basis_feeds, general_top_map, sn_action, terms, DecTuple, GeneralDecMorphism, SymModel,
};
use crate::tensors::{int, GradedShape, MultiTensor, Rational};

fn full(n: usize) -> Subset {
    Subset::full(n)
}

/// x +_{base} y: entries inside `base` must agree and are kept, the others are added.
pub fn add_over(x: &DecTuple, y: &DecTuple, base: &Subset) -> Result<DecTuple> {
    let n = x.n();
    let mut out = x.clone();
    for b in 1u32..(1 << n) {
        if Subset::from_bits(n, b).is_subset_of(base) {
            if x.entry_bits(b) != y.entry_bits(b) {
                return Err(Error::ProjectionMismatch(format!(
                    "the summands differ at entry {} over {base}",
                    Subset::from_bits(n, b)
                )));
            }
        } else {
            for (o, c) in out.entry_mut(b).iter_mut().zip(y.entry_bits(b)) {
                *o += c;
            }
        }
    }
    Ok(out)
}

/// Addition in the fibres of E(n̄) → E(n̄∖{s}).
pub fn add_in_direction(x: &DecTuple, y: &DecTuple, s: usize) -> Result<DecTuple> {
    let n = x.n();
    add_over(x, y, &full(n).difference(&Subset::singleton(n, s)))
}

/// c ·_{base} x.
pub fn scale_over(x: &DecTuple, c: &Rational, base: &Subset) -> DecTuple {
    let n = x.n();
    let mut out = x.clone();
    for b in 1u32..(1 << n) {
        if !Subset::from_bits(n, b).is_subset_of(base) {
            out.entry_mut(b).iter_mut().for_each(|v| *v *= c);
        }
    }
    out
}

/// The zero of the fibre over the projection of x to `base`.
pub fn zero_over(x: &DecTuple, base: &Subset) -> DecTuple {
    scale_over(x, &Rational::zero(), base)
}

/// Σ: components Σ_K: A_1^{⊗#K} → A_{#K} for #K ≥ 2; Σ_{{i}} is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    pub model: SymModel,
    pub components: BTreeMap<Subset, MultiTensor>,
}

fn splitting_shape(model: &SymModel, set: &Subset) -> (GradedShape, usize) {
    let k = set.len();
    (GradedShape { degrees: vec![1; k], dims: vec![model.dims()[0]; k] }, model.dim_of(set))
}

impl Splitting {
    /// Checks shapes and fills in zero components.
    pub fn new(model: &SymModel, components: BTreeMap<Subset, MultiTensor>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for set in Subset::all(model.n()).filter(|s| s.len() >= 2) {
            let (shape, dim) = splitting_shape(model, &set);
            let t = match components.get(&set) {
                Some(t) if *t.shape() == shape && t.out_dim() == dim => t.clone(),
                Some(_) => return Err(Error::ShapeMismatch(format!("splitting component {set} has the wrong shape"))),
                None => MultiTensor::zeros(shape, dim),
            };
            out.insert(set, t);
        }
        if let Some(k) = components.keys().find(|k| k.len() < 2 || k.n() != model.n()) {
            return Err(Error::Domain(format!("no splitting component is stored for {k}")));
        }
        Ok(Splitting { model: model.clone(), components: out })
    }

    /// The canonical inclusion of the vacant model.
    pub fn inclusion(model: &SymModel) -> Self {
        Splitting::new(model, BTreeMap::new()).expect("zero components fit")
    }

    pub fn random(rng: &mut TestRng, model: &SymModel, bound: i64) -> Self {
        let comps = Subset::all(model.n())
            .filter(|s| s.len() >= 2)
            .map(|s| {
                let (shape, dim) = splitting_shape(model, &s);
                (s, random_tensor(rng, shape, dim, bound))
            })
            .collect();
        Splitting::new(model, comps).expect("shapes fit")
    }

    /// S∘ι.
    pub fn from_decomposition(s: &GeneralDecMorphism) -> Self {
        let n = s.n();
        let comps = Subset::all(n)
            .filter(|k| k.len() >= 2)
            .filter_map(|k| s.get(&OrderedPartition::singletons(&k)).map(|t| (k, t.clone())))
            .collect();
        Splitting::new(&s.source, comps).expect("components of a decomposition fit")
    }

    /// Σ as a morphism defined on all tuples; only singleton entries are read.
    pub fn as_general(&self) -> GeneralDecMorphism {
        let n = self.model.n();
        let mut m = GeneralDecMorphism::zero(&self.model, &self.model);
        for i in 1..=n {
            let s = Subset::singleton(n, i);
            m.components.insert(OrderedPartition::singletons(&s), MultiTensor::identity(1, self.model.dims()[0]));
        }
        for (k, t) in &self.components {
            m.components.insert(OrderedPartition::singletons(k), t.clone());
        }
        m
    }

    pub fn apply(&self, x: &DecTuple) -> DecTuple {
        general_top_map(&self.as_general(), x)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, t) in &self.components {
            if !t.is_zero() {
                let _ = writeln!(s, "sigma {k}");
                let _ = writeln!(s, "{t}");
            }
        }
        s
    }
}

/// ρ_J: J together with the singletons outside J.
pub fn rho_j(n: usize, j: &Subset) -> Result<OrderedPartition> {
    let mut blocks = vec![*j];
    blocks.extend((1..=n).filter(|&i| !j.contains(i)).map(|i| Subset::singleton(n, i)));
    Ok(OrderedPartition::new(n, blocks)?.canonical())
}

/// The 2-element subsets of n̄ in canonical order.
pub fn two_subsets(n: usize) -> Vec<Subset> {
    let mut out: Vec<Subset> = Subset::all(n).filter(|s| s.len() == 2).collect();
    out.sort();
    out
}

/// Partitions of objects of ◊^ρ into at least two objects, canonically ordered.
fn core_keys(rho: &OrderedPartition) -> Vec<OrderedPartition> {
    terms(rho.n())
        .iter()
        .filter(|t| t.rho.len() >= 2 && t.rho.blocks().iter().all(|b| is_object(rho, b)))
        .map(|t| t.rho.clone())
        .collect()
}

/// A decomposition of the ρ-core: the components of length ≥ 2; the one-block
/// components are identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreDecomposition {
    pub rho: OrderedPartition,
    pub model: SymModel,
    pub components: BTreeMap<OrderedPartition, MultiTensor>,
}

impl CoreDecomposition {
    pub fn new(
        model: &SymModel,
        rho: &OrderedPartition,
        components: BTreeMap<OrderedPartition, MultiTensor>,
    ) -> Result<Self> {
        let rho = rho.canonical();
        if rho.n() != model.n() || rho.ambient() != full(model.n()) {
            return Err(Error::Domain(format!("{rho} is not a partition of the full index set")));
        }
        let keys = core_keys(&rho);
        if let Some(k) = components.keys().find(|k| !keys.contains(k)) {
            return Err(Error::Domain(format!("{k} is not a partition into at least two objects of {rho}")));
        }
        let mut out = BTreeMap::new();
        for key in keys {
            let shape = GeneralDecMorphism::shape_of(&key, model);
            let dim = model.dim_of(&key.ambient());
            let t = match components.get(&key) {
                Some(t) if *t.shape() == shape && t.out_dim() == dim => t.clone(),
                Some(_) => return Err(Error::ShapeMismatch(format!("core component {key} has the wrong shape"))),
                None => MultiTensor::zeros(shape, dim),
            };
            out.insert(key, t);
        }
        Ok(CoreDecomposition { rho, model: model.clone(), components: out })
    }

    pub fn identity(model: &SymModel, rho: &OrderedPartition) -> Result<Self> {
        CoreDecomposition::new(model, rho, BTreeMap::new())
    }

    pub fn random(rng: &mut TestRng, model: &SymModel, rho: &OrderedPartition, bound: i64) -> Result<Self> {
        let comps = core_keys(&rho.canonical())
            .into_iter()
            .map(|k| {
                let t = random_tensor(rng, GeneralDecMorphism::shape_of(&k, model), model.dim_of(&k.ambient()), bound);
                (k, t)
            })
            .collect();
        CoreDecomposition::new(model, rho, comps)
    }

    /// The core morphism induced on the ρ-core by a decomposition of the whole model.
    pub fn from_decomposition(s: &GeneralDecMorphism, rho: &OrderedPartition) -> Result<Self> {
        let core = restrict_morphism(s, rho)?;
        let comps = core.map.components.into_iter().filter(|(k, _)| k.len() >= 2).collect();
        CoreDecomposition::new(&s.source, rho, comps)
    }

    pub fn as_morphism(&self) -> CoreMorphism {
        let mut map = GeneralDecMorphism::zero(&self.model, &self.model);
        for set in crate::partitions::cube_objects(&self.rho).into_iter().filter(|s| !s.is_empty()) {
            let one = OrderedPartition::new(self.model.n(), vec![set]).expect("one block");
            map.components.insert(one, MultiTensor::identity(set.len(), self.model.dim_of(&set)));
        }
        map.components.extend(self.components.iter().map(|(k, t)| (k.clone(), t.clone())));
        CoreMorphism { rho: self.rho.clone(), map }
    }

    /// The image at the full object: entry L is x_L + Σ_π S_π(x_π) over
    /// partitions π of L into objects.
    pub fn top(&self, x: &DecTuple) -> DecTuple {
        general_top_map(&self.as_morphism().map, x)
    }

    pub fn component(&self, key: &OrderedPartition) -> Option<&MultiTensor> {
        self.components.get(key)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "core {}", self.rho);
        for (k, t) in &self.components {
            if !t.is_zero() {
                let _ = writeln!(s, "block {k}");
                let _ = writeln!(s, "{t}");
            }
        }
        s
    }
}

pub type CoreFamily = BTreeMap<OrderedPartition, CoreDecomposition>;

/// The inputs of the construction: Σ and one decomposition per highest order core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionInput {
    pub sigma: Splitting,
    pub cores: CoreFamily,
}

impl DecompositionInput {
    /// Σ and the highest order core decompositions induced by a decomposition.
    pub fn from_decomposition(s: &GeneralDecMorphism) -> Result<Self> {
        let n = s.n();
        let mut cores = CoreFamily::new();
        for j in two_subsets(n) {
            let rho = rho_j(n, &j)?;
            cores.insert(rho.clone(), CoreDecomposition::from_decomposition(s, &rho)?);
        }
        Ok(DecompositionInput { sigma: Splitting::from_decomposition(s), cores })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "decomposition-input dims={}", io::format_list(self.sigma.model.dims()));
        s.push_str(&self.sigma.to_text());
        for c in self.cores.values() {
            s.push_str(&c.to_text());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let ln = lines.line_no();
        let head = lines.expect("decomposition-input")?;
        let [dims] = head.as_slice() else {
            return Err(lines.error("header needs dims="));
        };
        let model = SymModel::new(io::parse_list_field(&lines, dims, "dims")?).map_err(|e| io::relocate(e, ln))?;
        let n = model.n();
        let mut sigma = BTreeMap::new();
        while lines.peek_keyword() == Some("sigma") {
            let ln = lines.line_no();
            let words = lines.expect("sigma")?;
            let key = words.first().ok_or_else(|| lines.error("sigma key missing"))?;
            let set = Subset::parse(n, key).map_err(|e| io::relocate(e, ln))?;
            let t = lines.tensor()?;
            if sigma.insert(set, t).is_some() {
                return Err(Error::Parse { line: ln, msg: format!("duplicate sigma {key}") });
            }
        }
        let sigma = Splitting::new(&model, sigma).map_err(|e| io::relocate(e, ln))?;
        let mut cores = CoreFamily::new();
        while lines.peek_keyword() == Some("core") {
            let ln = lines.line_no();
            let words = lines.expect("core")?;
            let key = words.first().ok_or_else(|| lines.error("core key missing"))?;
            let rho = OrderedPartition::parse(key, Some(n)).map_err(|e| io::relocate(e, ln))?;
            let mut comps = BTreeMap::new();
            while lines.peek_keyword() == Some("block") {
                let bl = lines.line_no();
                let words = lines.expect("block")?;
                let key = words.first().ok_or_else(|| lines.error("block key missing"))?;
                let pi = OrderedPartition::parse(key, Some(n)).map_err(|e| io::relocate(e, bl))?;
                comps.insert(pi, lines.tensor()?);
            }
            let c = CoreDecomposition::new(&model, &rho, comps).map_err(|e| io::relocate(e, ln))?;
            if cores.insert(c.rho.clone(), c).is_some() {
                return Err(Error::Parse { line: ln, msg: format!("duplicate core {key}") });
            }
        }
        if !lines.is_done() {
            return Err(lines.error("trailing content"));
        }
        Ok(DecompositionInput { sigma, cores })
    }
}

fn zero_like(key: &OrderedPartition, model: &SymModel) -> MultiTensor {
    MultiTensor::zeros(GeneralDecMorphism::shape_of(key, model), model.dim_of(&key.ambient()))
}

fn component_or_zero(c: &CoreDecomposition, key: &OrderedPartition) -> MultiTensor {
    c.component(key).cloned().unwrap_or_else(|| zero_like(key, &c.model))
}

/// Σ agrees with every core decomposition on the components fed by singletons,
/// and core decompositions agree pairwise on their common (l−2)-core.
pub fn check_compatibility(sigma: &Splitting, cores: &CoreFamily) -> Result<()> {
    for (rho, c) in cores {
        if c.model != sigma.model {
            return Err(Error::Incompatible(format!("the {rho} core decomposition lives on another model")));
        }
        for key in core_keys(rho).into_iter().filter(|k| k.is_singletons()) {
            if component_or_zero(c, &key) != sigma.components[&key.ambient()] {
                return Err(Error::Incompatible(format!("the {rho} core decomposition differs from the splitting at {key}")));
            }
        }
    }
    let list: Vec<&OrderedPartition> = cores.keys().collect();
    for (a, ra) in list.iter().enumerate() {
        for rb in &list[a + 1..] {
            if ra.len() != rb.len() {
                continue;
            }
            let Ok(common) = cube_intersection(ra, rb) else { continue };
            for key in core_keys(&common) {
                if component_or_zero(&cores[*ra], &key) != component_or_zero(&cores[*rb], &key) {
                    return Err(Error::Incompatible(format!(
                        "the {ra} and {rb} core decompositions differ on their common core {common} at {key}"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn contains_any(set: &Subset, earlier: &[Subset]) -> bool {
    earlier.iter().any(|j| j.is_subset_of(set))
}

/// S^k(x) for x ∈ E^k.
fn recursion(input: &DecompositionInput, ordering: &[Subset], core_of: &[&CoreDecomposition], k: usize, x: &DecTuple) -> Result<DecTuple> {
    let n = x.n();
    if k == 0 {
        return Ok(input.sigma.apply(x));
    }
    let j = ordering[k - 1];
    let earlier = &ordering[..k - 1];
    let outside = full(n).difference(&j);
    let mut y = DecTuple::zeros(&input.sigma.model);
    let mut z = DecTuple::zeros(&input.sigma.model);
    for b in 1u32..(1 << n) {
        let set = Subset::from_bits(n, b);
        if set.len() == 1 || contains_any(&set, earlier) {
            y.entry_mut(b).clone_from_slice(x.entry_bits(b));
        }
    }
    for b in 1u32..(1 << n) {
        let set = Subset::from_bits(n, b);
        if set.is_subset_of(&outside) {
            z.entry_mut(b).clone_from_slice(y.entry_bits(b));
        } else if j.is_subset_of(&set) && !contains_any(&set, earlier) {
            z.entry_mut(b).clone_from_slice(x.entry_bits(b));
        }
    }
    let w = recursion(input, ordering, core_of, k - 1, &y)?;
    let st = j.elements();
    let (s, t) = (st[0], st[1]);
    let not = |i: usize| full(n).difference(&Subset::singleton(n, i));
    let incompatible = |e: Error| Error::Incompatible(format!("step {k} (J = {j}): {e}"));
    let inner = add_over(&zero_over(&w, &not(s)), &core_of[k - 1].top(&z), &not(t)).map_err(incompatible)?;
    add_over(&w, &inner, &not(s)).map_err(incompatible)
}

fn check_ordering(n: usize, ordering: &[Subset]) -> Result<()> {
    let mut sorted = ordering.to_vec();
    sorted.sort();
    if sorted != two_subsets(n) {
        return Err(Error::Domain("an ordering must list every 2-element subset exactly once".into()));
    }
    Ok(())
}

/// Reads the components of a map that is a sum of multilinear terms in
/// distinct entries.
pub fn extract_general(
    model: &SymModel,
    map: &dyn Fn(&DecTuple) -> Result<DecTuple>,
) -> Result<GeneralDecMorphism> {
    let mut out = GeneralDecMorphism::zero(model, model);
    for term in terms(model.n()).iter() {
        let rho = &term.rho;
        let set = rho.ambient();
        let mut t = zero_like(rho, model);
        let mut err = None;
        basis_feeds(model, rho.blocks(), |index, x| {
            if err.is_some() {
                return;
            }
            match map(x) {
                Ok(y) => {
                    for (o, c) in y.entry(&set).iter().enumerate() {
                        t.set(index, o, c.clone());
                    }
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        out.components.insert(rho.clone(), t);
    }
    Ok(out)
}

/// The unique decomposition S with S∘ι = Σ and core morphisms the given ones,
/// computed by the recursion along `ordering`.
pub fn build_decomposition(input: &DecompositionInput, ordering: &[Subset]) -> Result<GeneralDecMorphism> {
    let model = &input.sigma.model;
    let n = model.n();
    check_ordering(n, ordering)?;
    let mut core_of = Vec::with_capacity(ordering.len());
    for j in ordering {
        let rho = rho_j(n, j)?;
        core_of.push(input.cores.get(&rho).ok_or_else(|| Error::Domain(format!("no decomposition of the {rho} core")))?);
    }
    check_compatibility(&input.sigma, &input.cores)?;
    let k = ordering.len();
    extract_general(model, &|x| recursion(input, ordering, &core_of, k, x))
}

/// The post-conditions: one-block components are identities, S∘ι = Σ, and the
/// induced core morphisms are the given ones.
pub fn verify_decomposition(s: &GeneralDecMorphism, input: &DecompositionInput) -> Result<()> {
    let model = &input.sigma.model;
    for set in Subset::all(model.n()).filter(|x| !x.is_empty()) {
        let one = OrderedPartition::new(model.n(), vec![set])?;
        if s.get(&one) != Some(&MultiTensor::identity(set.len(), model.dim_of(&set))) {
            return Err(Error::InvalidMorphism(format!("component ({set}) is not the identity")));
        }
    }
    if Splitting::from_decomposition(s) != input.sigma {
        return Err(Error::InvalidMorphism("S∘ι differs from the splitting".into()));
    }
    for (rho, c) in &input.cores {
        if CoreDecomposition::from_decomposition(s, rho)? != *c {
            return Err(Error::InvalidMorphism(format!("the induced {rho} core morphism differs from the given one")));
        }
    }
    Ok(())
}

/// Builds along every ordering and compares the outputs exactly.
pub fn check_order_independence(input: &DecompositionInput, orderings: &[Vec<Subset>], exec: Exec) -> Result<bool> {
    let built = exec.map(orderings, |o| build_decomposition(input, o).map(|s| s.trimmed()));
    let mut first: Option<GeneralDecMorphism> = None;
    for b in built {
        let b = b?;
        match &first {
            None => first = Some(b),
            Some(f) if *f != b => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

pub fn all_orderings(n: usize) -> Vec<Vec<Subset>> {
    let base = two_subsets(n);
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; base.len()];
    fn rec(base: &[Subset], used: &mut [bool], cur: &mut Vec<Subset>, out: &mut Vec<Vec<Subset>>) {
        if cur.len() == base.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..base.len() {
            if !used[i] {
                used[i] = true;
                cur.push(base[i]);
                rec(base, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(&base, &mut used, &mut cur, &mut out);
    out
}

/// `count` distinct orderings, or all of them if there are fewer.
pub fn sample_orderings(rng: &mut TestRng, n: usize, count: usize) -> Vec<Vec<Subset>> {
    let all = all_orderings(n);
    if count >= all.len() {
        return all;
    }
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, all.len(), count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| all[i].clone()).collect()
}

/// A random decomposition: identity one-block components, random others.
pub fn random_decomposition(rng: &mut TestRng, model: &SymModel, bound: i64) -> GeneralDecMorphism {
    let mut s = GeneralDecMorphism::identity(model);
    for term in terms(model.n()).iter().filter(|t| t.rho.len() >= 2) {
        let t = random_tensor(rng, GeneralDecMorphism::shape_of(&term.rho, model), model.dim_of(&term.rho.ambient()), bound);
        s.components.insert(term.rho.clone(), t);
    }
    s
}

/// Independent random core decompositions for every 2-partition.
pub fn random_core_family(rng: &mut TestRng, model: &SymModel, bound: i64) -> Result<CoreFamily> {
    two_partitions(model.n())
        .into_iter()
        .map(|rho| CoreDecomposition::random(rng, model, &rho, bound).map(|c| (rho, c)))
        .collect()
}

/// The 2-partitions {I, n̄∖I} of n̄, canonically ordered.
pub fn two_partitions(n: usize) -> Vec<OrderedPartition> {
    set_partitions(&full(n)).into_iter().filter(|r| r.len() == 2).collect()
}

/// Which block of a 2-partition serves as the base of the averaging sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    First,
    Second,
}

/// S^ρ(n̄) = (1/n!) ·_I Σ^I_σ Ψ_{σ^{-1}}∘S̃^{σ(ρ)}∘Ψ_σ for every 2-partition ρ,
/// with sums and scaling over the base block I.
pub fn symmetrize_2core(family: &CoreFamily, base: Base) -> Result<CoreFamily> {
    let Some(model) = family.values().next().map(|c| c.model.clone()) else {
        return Ok(CoreFamily::new());
    };
    let n = model.n();
    let parts = two_partitions(n);
    for rho in &parts {
        if !family.contains_key(rho) {
            return Err(Error::Domain(format!("no decomposition of the {rho} core")));
        }
    }
    let perms = Permutation::all(n);
    let count = Rational::from_integer(perms.len().into());
    let mut out = CoreFamily::new();
    for rho in &parts {
        let block = match base {
            Base::First => rho.blocks()[0],
            Base::Second => rho.blocks()[1],
        };
        let averaged = |x: &DecTuple| -> Result<DecTuple> {
            let mut acc: Option<DecTuple> = None;
            for sigma in &perms {
                let image = rho.image(sigma).canonical();
                let term = sn_action(&sigma.inverse(), &family[&image].top(&sn_action(sigma, x)));
                acc = Some(match acc {
                    None => term,
                    Some(a) => add_over(&a, &term, &block)?,
                });
            }
            Ok(scale_over(&acc.expect("S_n is nonempty"), &(Rational::one() / &count), &block))
        };
        let key = rho.clone();
        let mut t = zero_like(&key, &model);
        let mut err = None;
        basis_feeds(&model, key.blocks(), |index, x| match averaged(x) {
            Ok(y) => {
                for (o, c) in y.entry(&full(n)).iter().enumerate() {
                    t.set(index, o, c.clone());
                }
            }
            Err(e) => err = Some(e),
        });
        if let Some(e) = err {
            return Err(e);
        }
        out.insert(rho.clone(), CoreDecomposition::new(&model, rho, BTreeMap::from([(key, t)]))?);
    }
    Ok(out)
}

/// The first (σ, ρ) with Ψ_σ∘S^ρ ≠ S^{σ(ρ)}∘Ψ_σ on ρ-core members.
pub fn equivariance_violation(family: &CoreFamily) -> Option<(Permutation, OrderedPartition)> {
    for (rho, c) in family {
        let n = rho.n();
        for sigma in Permutation::all(n) {
            let image = rho.image(&sigma).canonical();
            let Some(other) = family.get(&image) else {
                return Some((sigma, rho.clone()));
            };
            let ok = agree_on_feeds(&c.model, Some(rho), &|x| sn_action(&sigma, &c.top(x)), &|x| {
                other.top(&sn_action(&sigma, x))
            });
            if !ok {
                return Some((sigma, rho.clone()));
            }
        }
    }
    None
}

/// Ψ_σ∘Σ = Σ∘Ψ_σ on vacant tuples.
pub fn splitting_is_symmetric(sigma: &Splitting) -> bool {
    let n = sigma.model.n();
    let vacant = OrderedPartition::singletons(&full(n));
    let g = sigma.as_general();
    Permutation::all(n).iter().all(|p| {
        agree_on_feeds(&sigma.model, Some(&vacant), &|x| sn_action(p, &general_top_map(&g, x)), &|x| {
            general_top_map(&g, &sn_action(p, x))
        })
    })
}

/// Equivariance of the family and, when given, symmetry of Σ and the
/// compatibility of Σ with every member of the family.
pub fn check_symmetric_compatibility(family: &CoreFamily, sigma: Option<&Splitting>) -> bool {
    if equivariance_violation(family).is_some() {
        return false;
    }
    match sigma {
        None => true,
        Some(s) => {
            splitting_is_symmetric(s)
                && family.iter().all(|(rho, c)| {
                    core_keys(rho)
                        .into_iter()
                        .filter(|k| k.is_singletons())
                        .all(|k| component_or_zero(c, &k) == s.components[&k.ambient()])
                })
        }
    }
}

/// Negates the first nonzero component of the family, or sets one coefficient
/// to 1 when all vanish.
pub fn break_family(family: &CoreFamily) -> CoreFamily {
    let mut out = family.clone();
    let hit = out.values_mut().flat_map(|c| c.components.values_mut()).find(|t| !t.is_zero());
    match hit {
        Some(t) => *t = t.neg(),
        None => {
            if let Some(t) = out.values_mut().flat_map(|c| c.components.values_mut()).next() {
                if let Some(c) = t.coeffs_mut().first_mut() {
                    *c = int(1);
                }
            }
        }
    }
    out
}
