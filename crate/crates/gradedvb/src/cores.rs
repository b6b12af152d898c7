//! Iterated highest order cores of a decomposed model, indexed by partitions of n̄.
//!
//! Cores are kept intensionally: a membership predicate on tuples of the parent
//! plus the building dims. A core point at an object I is a tuple whose entries
//! outside I are ignored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::partitions::{cube_objects, is_object, merge_blocks, OrderedPartition, Permutation, Subset};
use crate::snvb::{general_top_map, sn_action, DecTuple, GeneralDecMorphism, SymModel, SymMorphism};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreModel {
    parent: SymModel,
    rho: OrderedPartition,
    objects: Vec<Subset>,
    dims: BTreeMap<Subset, usize>,
}

impl CoreModel {
    pub fn new(parent: &SymModel, rho: &OrderedPartition) -> Result<Self> {
        check_covers(parent, rho)?;
        Ok(CoreModel {
            parent: parent.clone(),
            rho: rho.canonical(),
            objects: cube_objects(rho).into_iter().filter(|s| !s.is_empty()).collect(),
            dims: building_bundles(rho, parent)?,
        })
    }

    pub fn parent(&self) -> &SymModel {
        &self.parent
    }

    pub fn rho(&self) -> &OrderedPartition {
        &self.rho
    }

    /// Nonempty objects of the cube category, canonically ordered.
    pub fn objects(&self) -> &[Subset] {
        &self.objects
    }

    pub fn building_dims(&self) -> &BTreeMap<Subset, usize> {
        &self.dims
    }

    /// dim of the core space at I: the sum of dim A_K over objects K ⊆ I.
    pub fn space_dim(&self, set: &Subset) -> usize {
        self.dims.iter().filter(|(k, _)| k.is_subset_of(set)).map(|(_, d)| d).sum()
    }

    pub fn contains(&self, x: &DecTuple, set: &Subset) -> Result<bool> {
        core_membership(x, &self.rho, set)
    }
}

fn check_covers(model: &SymModel, rho: &OrderedPartition) -> Result<()> {
    if rho.n() != model.n() || rho.ambient() != Subset::full(model.n()) {
        return Err(Error::Domain(format!("{rho} is not a partition of the full index set of the model")));
    }
    Ok(())
}

fn check_object(rho: &OrderedPartition, set: &Subset) -> Result<()> {
    if !is_object(rho, set) {
        return Err(Error::Domain(format!("{set} is not an object of the cube category of {rho}")));
    }
    Ok(())
}

/// For every block I_s ⊆ I and j ∈ I_s, the projection of x to I∖{j} is the
/// zero section over its projection to I∖I_s.
pub fn core_membership(x: &DecTuple, rho: &OrderedPartition, set: &Subset) -> Result<bool> {
    check_object(rho, set)?;
    for block in rho.blocks().iter().filter(|b| b.is_subset_of(set)) {
        let base = set.difference(block);
        for j in block.elements() {
            let face = set.difference(&Subset::singleton(set.n(), j));
            for k in face.subsets() {
                if !k.is_empty() && !k.is_subset_of(&base) && !x.entry_is_zero(k.bits()) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Membership via a chain of highest order core constructions
/// singletons = ρ_0, ρ_1, …, ρ_m = ρ, each step merging two blocks.
pub fn chain_membership(x: &DecTuple, chain: &[OrderedPartition], set: &Subset) -> Result<bool> {
    let Some((last, rest)) = chain.split_last() else {
        return Err(Error::Domain("empty chain".into()));
    };
    check_object(last, set)?;
    let Some(prev) = rest.last() else {
        if !last.is_singletons() {
            return Err(Error::Domain(format!("a chain starts at the singleton partition, not {last}")));
        }
        return Ok(true);
    };
    let new: Vec<&Subset> = last.blocks().iter().filter(|b| !prev.blocks().contains(b)).collect();
    let old: Vec<&Subset> = prev.blocks().iter().filter(|b| !last.blocks().contains(b)).collect();
    if new.len() != 1 || old.len() != 2 || old[0].union(old[1]) != *new[0] {
        return Err(Error::Domain(format!("{last} does not merge two blocks of {prev}")));
    }
    if !chain_membership(x, rest, set)? {
        return Ok(false);
    }
    let merged = new[0];
    if !merged.is_subset_of(set) {
        return Ok(true);
    }
    let base = set.difference(merged);
    for b in old {
        let face = set.difference(b);
        for k in face.subsets() {
            if !k.is_empty() && !k.is_subset_of(&base) && !x.entry_is_zero(k.bits()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every chain of single merges from the singleton partition to ρ.
pub fn chains(rho: &OrderedPartition) -> Vec<Vec<OrderedPartition>> {
    let start = OrderedPartition::singletons(&rho.ambient());
    let mut out = Vec::new();
    let mut path = vec![start];
    extend_chains(rho, &mut path, &mut out);
    out
}

fn extend_chains(target: &OrderedPartition, path: &mut Vec<OrderedPartition>, out: &mut Vec<Vec<OrderedPartition>>) {
    let cur = path.last().expect("nonempty path").clone();
    if cur.len() == target.len() {
        out.push(path.clone());
        return;
    }
    for i in 0..cur.len() {
        for j in i + 1..cur.len() {
            let next = merge_blocks(&cur, i, j);
            let stays_fine = next.blocks().iter().all(|b| target.blocks().iter().any(|t| b.is_subset_of(t)));
            if stays_fine {
                path.push(next);
                extend_chains(target, path, out);
                path.pop();
            }
        }
    }
}

/// (E^ρ)^J_J = A_{#J} for every nonempty object J.
pub fn building_bundles(rho: &OrderedPartition, model: &SymModel) -> Result<BTreeMap<Subset, usize>> {
    check_covers(model, rho)?;
    Ok(cube_objects(rho).into_iter().filter(|s| !s.is_empty()).map(|s| (s, model.dim_of(&s))).collect())
}

/// A morphism restricted to the ρ-core: the components indexed by partitions
/// of objects into objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreMorphism {
    pub rho: OrderedPartition,
    pub map: GeneralDecMorphism,
}

impl CoreMorphism {
    pub fn identity(model: &SymModel, rho: &OrderedPartition) -> Result<Self> {
        restrict_morphism(&GeneralDecMorphism::identity(model), rho)
    }

    /// The image of a core member at the full object.
    pub fn top_map(&self, x: &DecTuple) -> Result<DecTuple> {
        let full = Subset::full(self.rho.n());
        if !core_membership(x, &self.rho, &full)? {
            return Err(Error::Domain(format!("the tuple is not a member of the {} core", self.rho)));
        }
        Ok(general_top_map(&self.map, x))
    }
}

pub fn restrict_morphism(m: &GeneralDecMorphism, rho: &OrderedPartition) -> Result<CoreMorphism> {
    check_covers(&m.source, rho)?;
    let mut map = GeneralDecMorphism::zero(&m.source, &m.target);
    for (pi, t) in &m.components {
        if pi.blocks().iter().all(|b| is_object(rho, b)) {
            map.components.insert(pi.clone(), t.clone());
        }
    }
    Ok(CoreMorphism { rho: rho.canonical(), map })
}

pub fn restrict_sym(tau: &SymMorphism, rho: &OrderedPartition) -> Result<CoreMorphism> {
    restrict_morphism(&crate::snvb::expand(tau)?, rho)
}

/// Ψ_σ on a ρ-core member; the image is a σ(ρ)-core member.
pub fn restrict_action(sigma: &Permutation, rho: &OrderedPartition, x: &DecTuple) -> Result<DecTuple> {
    let full = Subset::full(rho.n());
    if !core_membership(x, rho, &full)? {
        return Err(Error::Domain(format!("the tuple is not a member of the {rho} core")));
    }
    let y = sn_action(sigma, x);
    debug_assert!(core_membership(&y, &rho.image(sigma).canonical(), &full).unwrap_or(false));
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::set_partitions;
    use crate::random::{coin, rng};
    use crate::tensors::int;

    fn part(s: &str, n: usize) -> OrderedPartition {
        OrderedPartition::parse(s, Some(n)).unwrap()
    }

    fn unit_at(model: &SymModel, bits: u32) -> DecTuple {
        let mut x = DecTuple::zeros(model);
        x.entry_mut(bits)[0] = int(1);
        x
    }

    #[test]
    fn singleton_core_is_everything() {
        let m = SymModel::new(vec![1, 1, 1]).unwrap();
        let x = DecTuple::random(&mut rng(1), &m, 3);
        let rho = part("1|2|3", 3);
        assert!(core_membership(&x, &rho, &Subset::full(3)).unwrap());
        assert!(core_membership(&DecTuple::zeros(&m), &part("1,2,3", 3), &Subset::full(3)).unwrap());
    }

    #[test]
    fn entry_outside_objects_is_rejected() {
        let m = SymModel::new(vec![1, 1, 1]).unwrap();
        let rho = part("1,2|3", 3);
        let x = unit_at(&m, 0b001);
        assert!(!core_membership(&x, &rho, &Subset::full(3)).unwrap());
        assert!(core_membership(&unit_at(&m, 0b011), &rho, &Subset::full(3)).unwrap());
        assert!(core_membership(&x, &rho, &Subset::parse(3, "1,2").unwrap()).is_ok());
        assert!(core_membership(&x, &rho, &Subset::parse(3, "1").unwrap()).is_err());
    }

    #[test]
    fn literal_description_matches_objects() {
        for n in 1..=4 {
            let m = SymModel::new(vec![1; n]).unwrap();
            for rho in set_partitions(&Subset::full(n)) {
                for set in cube_objects(&rho) {
                    for bits in 1u32..(1 << n) {
                        let x = unit_at(&m, bits);
                        let k = Subset::from_bits(n, bits);
                        let expected = !k.is_subset_of(&set) || is_object(&rho, &k);
                        assert_eq!(core_membership(&x, &rho, &set).unwrap(), expected, "{rho} {set} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn every_chain_gives_the_same_core() {
        let mut r = rng(4);
        for n in 2..=4 {
            let m = SymModel::new(vec![1; n]).unwrap();
            let full = Subset::full(n);
            let mut probes: Vec<DecTuple> = (1u32..(1 << n)).map(|b| unit_at(&m, b)).collect();
            for _ in 0..20 {
                let mut x = DecTuple::random(&mut r, &m, 3);
                for b in 1u32..(1 << n) {
                    if coin(&mut r) {
                        x.entry_mut(b).iter_mut().for_each(|c| *c = int(0));
                    }
                }
                probes.push(x);
            }
            for rho in set_partitions(&full) {
                let all = chains(&rho);
                assert!(!all.is_empty());
                for chain in &all {
                    for set in cube_objects(&rho) {
                        for x in &probes {
                            assert_eq!(
                                chain_membership(x, chain, &set).unwrap(),
                                core_membership(x, &rho, &set).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chain_count_for_full_block() {
        assert_eq!(chains(&part("1,2,3", 3)).len(), 3);
        assert_eq!(chains(&part("1,2,3,4", 4)).len(), 18);
    }

    #[test]
    fn building_dims_of_a_two_block_core() {
        let m = SymModel::new(vec![2, 3, 5]).unwrap();
        let dims = building_bundles(&part("1,2|3", 3), &m).unwrap();
        let shown: Vec<(String, usize)> = dims.iter().map(|(k, d)| (k.to_string(), *d)).collect();
        assert_eq!(shown, [("3".to_string(), 2), ("1,2".to_string(), 3), ("1,2,3".to_string(), 5)]);
        let one = building_bundles(&part("1,2,3", 3), &m).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[&Subset::full(3)], 5);
        let all = building_bundles(&part("1|2|3", 3), &m).unwrap();
        assert_eq!(all.len(), 7);
        assert!(all.iter().all(|(k, d)| *d == m.dim_of(k)));
    }

    #[test]
    fn core_model_space_dims() {
        let m = SymModel::new(vec![2, 3, 5]).unwrap();
        let core = CoreModel::new(&m, &part("1,2|3", 3)).unwrap();
        assert_eq!(core.space_dim(&Subset::full(3)), 10);
        assert_eq!(core.space_dim(&Subset::parse(3, "1,2").unwrap()), 3);
        assert_eq!(core.objects().len(), 3);
    }

    #[test]
    fn restriction_agrees_with_parent_on_members() {
        let mut r = rng(11);
        for n in 2..=4 {
            let m = SymModel::new((1..=n).map(|k| 1 + k % 2).collect()).unwrap();
            let tau = SymMorphism::random(&mut r, &m, &m, false, 3);
            let full = crate::snvb::expand(&SymMorphism {
                components: tau.components.iter().map(|(p, t)| (p.clone(), t.graded_symmetrize())).collect(),
                ..tau.clone()
            })
            .unwrap();
            for rho in set_partitions(&Subset::full(n)) {
                let core = restrict_morphism(&full, &rho).unwrap();
                for _ in 0..5 {
                    let mut x = DecTuple::random(&mut r, &m, 3);
                    for b in 1u32..(1 << n) {
                        if !is_object(&rho, &Subset::from_bits(n, b)) {
                            x.entry_mut(b).iter_mut().for_each(|c| *c = int(0));
                        }
                    }
                    let y = core.top_map(&x).unwrap();
                    assert_eq!(y, general_top_map(&full, &x));
                    assert!(core_membership(&y, &rho, &Subset::full(n)).unwrap());
                }
            }
        }
    }

    #[test]
    fn identity_and_ultracore_restrictions() {
        let m = SymModel::new(vec![1, 2, 1]).unwrap();
        let id = CoreMorphism::identity(&m, &part("1,3|2", 3)).unwrap();
        assert_eq!(id.map.components.len(), 3);
        let mut x = DecTuple::zeros(&m);
        x.entry_mut(0b101)[0] = int(4);
        x.entry_mut(0b111)[0] = int(-1);
        assert_eq!(id.top_map(&x).unwrap(), x);
        let ultra = CoreMorphism::identity(&m, &part("1,2,3", 3)).unwrap();
        assert_eq!(ultra.map.components.len(), 1);
        assert!(ultra.top_map(&x).is_err());
    }

    #[test]
    fn action_maps_cores_to_cores() {
        let mut r = rng(5);
        for n in 1..=4 {
            let m = SymModel::new(vec![1; n]).unwrap();
            let full = Subset::full(n);
            for rho in set_partitions(&full) {
                for sigma in Permutation::all(n) {
                    let image = rho.image(&sigma).canonical();
                    let mapped: Vec<Subset> = cube_objects(&rho).iter().map(|s| s.image(&sigma)).collect();
                    let mut mapped = mapped;
                    mapped.sort();
                    assert_eq!(mapped, cube_objects(&image));
                    let mut x = DecTuple::random(&mut r, &m, 3);
                    for b in 1u32..(1 << n) {
                        if !is_object(&rho, &Subset::from_bits(n, b)) {
                            x.entry_mut(b).iter_mut().for_each(|c| *c = int(0));
                        }
                    }
                    let y = restrict_action(&sigma, &rho, &x).unwrap();
                    assert!(core_membership(&y, &image, &full).unwrap());
                    if sigma.is_identity() {
                        assert_eq!(y, x);
                    }
                }
            }
        }
    }
}
