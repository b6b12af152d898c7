//! Subsets of n̄ = {1,…,n}, ordered set partitions, integer partitions,
//! permutations and the sign bookkeeping built on them.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Hard ceiling imposed by the bitmask representation of subsets.
pub const HARD_MAX_N: usize = 31;

const DEFAULT_MAX_N: usize = 8;

/// The configured cap on n. Reads `GRADEDVB_MAX_N` once, defaults to 8.
pub fn max_n() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("GRADEDVB_MAX_N")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .map(|v| v.min(HARD_MAX_N))
            .unwrap_or(DEFAULT_MAX_N)
    })
}

/// Errors unless `n` is within the configured cap.
pub fn check_n(n: usize) -> Result<()> {
    let cap = max_n();
    if n > cap {
        return Err(Error::NTooLarge { n, cap });
    }
    Ok(())
}

fn check_hard(n: usize) -> Result<()> {
    if n > HARD_MAX_N {
        return Err(Error::NTooLarge { n, cap: HARD_MAX_N });
    }
    Ok(())
}

/// A subset of n̄, stored as a bitmask (bit i-1 set iff i is an element).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Subset {
    n: usize,
    bits: u32,
}

impl Subset {
    pub fn new(n: usize, elements: &[usize]) -> Result<Self> {
        check_hard(n)?;
        let mut bits = 0u32;
        for &e in elements {
            if e == 0 || e > n {
                return Err(Error::Domain(format!("element {e} outside 1..={n}")));
            }
            let b = 1u32 << (e - 1);
            if bits & b != 0 {
                return Err(Error::Domain(format!("element {e} repeated")));
            }
            bits |= b;
        }
        Ok(Subset { n, bits })
    }

    pub fn from_bits(n: usize, bits: u32) -> Self {
        debug_assert!(n <= HARD_MAX_N);
        debug_assert!(n == 32 || bits >> n == 0);
        Subset { n, bits }
    }

    pub fn empty(n: usize) -> Self {
        Subset { n, bits: 0 }
    }

    pub fn full(n: usize) -> Self {
        Subset { n, bits: full_mask(n) }
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        debug_assert!(i >= 1 && i <= n);
        Subset { n, bits: 1 << (i - 1) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.n && self.bits & (1 << (i - 1)) != 0
    }

    pub fn elements(&self) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.contains(i)).collect()
    }

    pub fn min(&self) -> Option<usize> {
        if self.bits == 0 {
            None
        } else {
            Some(self.bits.trailing_zeros() as usize + 1)
        }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        Subset { n: self.n, bits: self.bits | other.bits }
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        Subset { n: self.n, bits: self.bits & other.bits }
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        Subset { n: self.n, bits: self.bits & !other.bits }
    }

    pub fn complement(&self) -> Subset {
        Subset { n: self.n, bits: full_mask(self.n) & !self.bits }
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.bits & other.bits == 0
    }

    /// σ(I).
    pub fn image(&self, sigma: &Permutation) -> Subset {
        let mut bits = 0u32;
        for i in self.elements() {
            bits |= 1 << (sigma.apply(i) - 1);
        }
        Subset { n: self.n, bits }
    }

    /// All subsets of n̄ (including ∅), ordered by bitmask.
    pub fn all(n: usize) -> impl Iterator<Item = Subset> {
        (0..=full_mask(n)).map(move |bits| Subset { n, bits })
    }

    /// All subsets of `self` (including ∅ and `self`).
    pub fn subsets(&self) -> Vec<Subset> {
        let mut out = Vec::with_capacity(1 << self.len());
        let mut sub = self.bits;
        loop {
            out.push(Subset { n: self.n, bits: sub });
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & self.bits;
        }
        out.reverse();
        out
    }

    /// Parse `"1,2,3"`; `"-"` is the empty set.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(Subset::empty(n));
        }
        let elems = parse_usize_list(s)?;
        Subset::new(n, &elems)
    }
}

fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// The canonical order on subsets: cardinality first, then lexicographic on
/// the sorted element lists.
impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            // the set holding the smallest element of the symmetric difference comes first
            let diff = self.bits ^ other.bits;
            if diff == 0 {
                self.n.cmp(&other.n)
            } else if self.bits & diff & diff.wrapping_neg() != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "-");
        }
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidPartition(format!("bad integer {t:?}")))
        })
        .collect()
}

/// A permutation of n̄, stored by its images `σ(1),…,σ(n)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        check_hard(n)?;
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(Error::Domain(format!("{images:?} is not a permutation of 1..={n}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    /// The transposition (i j).
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(i - 1, j - 1);
        Permutation { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// `self ∘ other`, i.e. `other` is applied first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&i| self.apply(i)).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v - 1] = i + 1;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn sign(&self) -> i32 {
        epsilon(self, &Subset::full(self.n()))
    }

    /// All of S_n in lexicographic order of the image lists.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Permutation { images: current.clone() });
            // next lexicographic permutation
            let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// ε(σ, I) = (−1)^{#{(i,j) ∈ I×I : i<j, σ(i)>σ(j)}}.
pub fn epsilon(sigma: &Permutation, set: &Subset) -> i32 {
    let elems = set.elements();
    let mut inversions = 0usize;
    for (a, &i) in elems.iter().enumerate() {
        for &j in &elems[a + 1..] {
            if sigma.apply(i) > sigma.apply(j) {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign of a sequence of distinct integers relative to its sorted order.
pub fn sequence_sign(seq: &[usize]) -> i32 {
    let mut inversions = 0usize;
    for (a, &x) in seq.iter().enumerate() {
        for &y in &seq[a + 1..] {
            if x > y {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// An integer partition, stored as its list of parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntPartition(Vec<usize>);

impl IntPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("integer partition with no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("integer partitions have positive parts".into()));
        }
        Ok(IntPartition(parts))
    }

    pub fn single(k: usize) -> Self {
        IntPartition(vec![k])
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_part(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_natural(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn sorted(&self) -> IntPartition {
        let mut parts = self.0.clone();
        parts.sort_unstable();
        IntPartition(parts)
    }

    pub fn parse(s: &str) -> Result<Self> {
        IntPartition::new(parse_usize_list(s.trim())?)
    }
}

/// Ordered by sum, then lexicographically, matching the listing of P(n).
impl Ord for IntPartition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sum().cmp(&other.sum()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for IntPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IntPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// P(n): the naturally ordered integer partitions of every j with 1 ≤ j ≤ n.
pub fn integer_partitions(n: usize) -> Vec<IntPartition> {
    let mut out = Vec::new();
    for total in 1..=n {
        let mut acc = Vec::new();
        partitions_of(total, 1, &mut acc, &mut out);
    }
    out
}

fn partitions_of(rest: usize, min_part: usize, acc: &mut Vec<usize>, out: &mut Vec<IntPartition>) {
    if rest == 0 {
        out.push(IntPartition(acc.clone()));
        return;
    }
    for part in min_part..=rest {
        acc.push(part);
        partitions_of(rest - part, part, acc, out);
        acc.pop();
    }
}

/// An ordered partition: disjoint nonempty blocks in a chosen order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OrderedPartition {
    n: usize,
    blocks: Vec<Subset>,
}

impl OrderedPartition {
    pub fn new(n: usize, blocks: Vec<Subset>) -> Result<Self> {
        check_hard(n)?;
        let mut seen = 0u32;
        for b in &blocks {
            if b.n() != n {
                return Err(Error::InvalidPartition(format!(
                    "block {b} has ambient {} but the partition has ambient {n}",
                    b.n()
                )));
            }
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            if seen & b.bits() != 0 {
                return Err(Error::InvalidPartition(format!("block {b} overlaps an earlier block")));
            }
            seen |= b.bits();
        }
        Ok(OrderedPartition { n, blocks })
    }

    /// Parse the `"2|1,4|3"` syntax. The ambient n defaults to the largest element.
    pub fn parse(s: &str, n: Option<usize>) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidPartition("empty partition string".into()));
        }
        let lists: Vec<Vec<usize>> =
            s.split('|').map(|b| parse_usize_list(b.trim())).collect::<Result<_>>()?;
        let largest = lists.iter().flatten().copied().max().unwrap_or(0);
        let n = n.unwrap_or(largest);
        if largest > n {
            return Err(Error::InvalidPartition(format!("element {largest} exceeds n = {n}")));
        }
        let blocks = lists.iter().map(|l| Subset::new(n, l)).collect::<Result<Vec<_>>>()?;
        OrderedPartition::new(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The union I of the blocks.
    pub fn ambient(&self) -> Subset {
        self.blocks.iter().fold(Subset::empty(self.n), |acc, b| acc.union(b))
    }

    /// True iff the blocks are sorted by (cardinality, lexicographic order).
    pub fn is_canonical(&self) -> bool {
        self.blocks.windows(2).all(|w| w[0] < w[1])
    }

    pub fn canonical(&self) -> OrderedPartition {
        let mut blocks = self.blocks.clone();
        blocks.sort();
        OrderedPartition { n: self.n, blocks }
    }

    /// The order on the ambient set induced by listing the blocks one after another.
    pub fn induced_order(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|b| b.elements()).collect()
    }

    /// The block sizes in block order.
    pub fn sizes(&self) -> IntPartition {
        IntPartition(self.blocks.iter().map(|b| b.len()).collect())
    }

    /// σ(ρ), keeping the block order.
    pub fn image(&self, sigma: &Permutation) -> OrderedPartition {
        OrderedPartition { n: self.n, blocks: self.blocks.iter().map(|b| b.image(sigma)).collect() }
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// The singleton partition of `set` in natural order.
    pub fn singletons(set: &Subset) -> OrderedPartition {
        OrderedPartition {
            n: set.n(),
            blocks: set.elements().into_iter().map(|i| Subset::singleton(set.n(), i)).collect(),
        }
    }
}

impl Ord for OrderedPartition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.blocks.cmp(&other.blocks))
    }
}

impl PartialOrd for OrderedPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// Sort disjoint nonempty blocks into canonical order.
pub fn canonical_order(n: usize, blocks: &[Subset]) -> Result<OrderedPartition> {
    let rho = OrderedPartition::new(n, blocks.to_vec())?;
    Ok(rho.canonical())
}

/// sgn(ρ): the sign of the permutation of I taking the natural order to the
/// order induced by ρ.
pub fn sgn(rho: &OrderedPartition) -> i32 {
    sequence_sign(&rho.induced_order())
}

/// ρ_can^p on {1,…,Σp}: consecutive blocks of the given sizes, in the given order.
pub fn canonical_partition(p: &[usize]) -> Result<OrderedPartition> {
    canonical_partition_in(p, p.iter().sum())
}

/// ρ_can^p inside the ambient n̄, which must satisfy Σp ≤ n.
pub fn canonical_partition_in(p: &[usize], n: usize) -> Result<OrderedPartition> {
    let total: usize = p.iter().sum();
    if total > n {
        return Err(Error::Domain(format!("Σp = {total} exceeds n = {n}")));
    }
    if p.contains(&0) {
        return Err(Error::InvalidPartition("zero part".into()));
    }
    check_hard(n)?;
    let mut blocks = Vec::with_capacity(p.len());
    let mut start = 0u32;
    for &k in p {
        let bits = ((1u32 << k) - 1) << start;
        blocks.push(Subset::from_bits(n, bits));
        start += k as u32;
    }
    Ok(OrderedPartition { n, blocks })
}

/// The quotient Πε(σ,K_j) / ε(σ,{1,…,i}) for a σ with σ(K_j) = I_j, where
/// (K_j) = ρ_can^{(#I_1,…,#I_l)}. Returns `None` if σ does not map K_j onto I_j.
pub fn sign_quotient(rho: &OrderedPartition, sigma: &Permutation) -> Option<i32> {
    let sizes: Vec<usize> = rho.blocks().iter().map(|b| b.len()).collect();
    let k = canonical_partition_in(&sizes, rho.n()).ok()?;
    let mut q = 1;
    for (kj, ij) in k.blocks().iter().zip(rho.blocks()) {
        if kj.image(sigma) != *ij {
            return None;
        }
        q *= epsilon(sigma, kj);
    }
    let total: usize = sizes.iter().sum();
    let first = Subset::from_bits(rho.n(), full_mask(total));
    Some(q * epsilon(sigma, &first))
}

/// P(I): all canonically ordered set partitions of `set` into nonempty blocks.
pub fn set_partitions(set: &Subset) -> Vec<OrderedPartition> {
    let mut out = Vec::new();
    let elems = set.elements();
    let mut blocks: Vec<u32> = Vec::new();
    set_partitions_rec(&elems, 0, &mut blocks, &mut out, set.n());
    out.sort();
    out
}

fn set_partitions_rec(
    elems: &[usize],
    idx: usize,
    blocks: &mut Vec<u32>,
    out: &mut Vec<OrderedPartition>,
    n: usize,
) {
    if idx == elems.len() {
        if !blocks.is_empty() {
            let bl: Vec<Subset> = blocks.iter().map(|&b| Subset::from_bits(n, b)).collect();
            out.push(OrderedPartition { n, blocks: bl }.canonical());
        }
        return;
    }
    let bit = 1u32 << (elems[idx] - 1);
    for i in 0..blocks.len() {
        blocks[i] |= bit;
        set_partitions_rec(elems, idx + 1, blocks, out, n);
        blocks[i] &= !bit;
    }
    blocks.push(bit);
    set_partitions_rec(elems, idx + 1, blocks, out, n);
    blocks.pop();
}

/// All set partitions of {0,…,count-1}, each group ascending, groups ordered by
/// first element.
pub fn index_set_partitions(count: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    index_partitions_rec(count, 0, &mut groups, &mut out);
    out
}

fn index_partitions_rec(
    count: usize,
    idx: usize,
    groups: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    if idx == count {
        out.push(groups.clone());
        return;
    }
    for i in 0..groups.len() {
        groups[i].push(idx);
        index_partitions_rec(count, idx + 1, groups, out);
        groups[i].pop();
    }
    groups.push(vec![idx]);
    index_partitions_rec(count, idx + 1, groups, out);
    groups.pop();
}

/// All canonically ordered coarsements of ρ (including ρ and the one-block partition).
pub fn coarsements(rho: &OrderedPartition) -> Vec<OrderedPartition> {
    let mut out: Vec<OrderedPartition> = index_set_partitions(rho.len())
        .into_iter()
        .map(|groups| {
            let blocks: Vec<Subset> = groups
                .iter()
                .map(|g| g.iter().fold(Subset::empty(rho.n()), |acc, &i| acc.union(&rho.blocks[i])))
                .collect();
            OrderedPartition { n: rho.n(), blocks }.canonical()
        })
        .collect();
    out.sort();
    out
}

/// ρ ∩ J: the canonically ordered blocks of ρ contained in J.
pub fn restrict_to(rho: &OrderedPartition, set: &Subset) -> OrderedPartition {
    let blocks: Vec<Subset> = rho.blocks().iter().filter(|b| b.is_subset_of(set)).copied().collect();
    OrderedPartition { n: rho.n(), blocks }.canonical()
}

/// True iff every block of `fine` lies inside a block of `coarse`, and both
/// cover the same set.
pub fn is_refinement(fine: &OrderedPartition, coarse: &OrderedPartition) -> bool {
    fine.ambient() == coarse.ambient()
        && fine.blocks().iter().all(|b| coarse.blocks().iter().any(|c| b.is_subset_of(c)))
}

/// Obj(◊^ρ): all unions of blocks of ρ, ∅ and the ambient included, in canonical order.
pub fn cube_objects(rho: &OrderedPartition) -> Vec<Subset> {
    let l = rho.len();
    let mut out = Vec::with_capacity(1 << l);
    for mask in 0u32..(1u32 << l) {
        let mut s = Subset::empty(rho.n());
        for (i, b) in rho.blocks().iter().enumerate() {
            if mask & (1 << i) != 0 {
                s = s.union(b);
            }
        }
        out.push(s);
    }
    out.sort();
    out
}

/// True iff `set` is a union of blocks of ρ.
pub fn is_object(rho: &OrderedPartition, set: &Subset) -> bool {
    rho.blocks().iter().all(|b| b.is_disjoint(set) || b.is_subset_of(set))
}

/// The coarsement of ρ merging blocks i and j (0-based, any order), canonically ordered.
pub fn merge_blocks(rho: &OrderedPartition, i: usize, j: usize) -> OrderedPartition {
    let mut blocks = Vec::with_capacity(rho.len() - 1);
    for (k, b) in rho.blocks().iter().enumerate() {
        if k == i {
            blocks.push(b.union(&rho.blocks()[j]));
        } else if k != j {
            blocks.push(*b);
        }
    }
    OrderedPartition { n: rho.n(), blocks }.canonical()
}

/// The common refinement: all nonempty pairwise intersections of blocks.
pub fn meet(a: &OrderedPartition, b: &OrderedPartition) -> OrderedPartition {
    let mut blocks = Vec::new();
    for x in a.blocks() {
        for y in b.blocks() {
            let z = x.intersection(y);
            if !z.is_empty() {
                blocks.push(z);
            }
        }
    }
    OrderedPartition { n: a.n(), blocks }.canonical()
}

/// ρ_ij ⊓ ρ_rs for two distinct (l−1)-coarsements of a common l-partition ρ.
pub fn cube_intersection(rho_ij: &OrderedPartition, rho_rs: &OrderedPartition) -> Result<OrderedPartition> {
    if rho_ij.n() != rho_rs.n() || rho_ij.ambient() != rho_rs.ambient() {
        return Err(Error::Domain("the two partitions cover different sets".into()));
    }
    let rho = meet(rho_ij, rho_rs);
    let l = rho.len();
    if rho_ij.len() + 1 != l || rho_rs.len() + 1 != l || rho_ij.canonical() == rho_rs.canonical() {
        return Err(Error::Domain(format!(
            "{rho_ij} and {rho_rs} are not distinct (l-1)-coarsements of a common l-partition"
        )));
    }
    let merged_pair = |c: &OrderedPartition| -> Option<(usize, usize)> {
        let big = c.blocks().iter().find(|b| !rho.blocks().contains(b))?;
        let idx: Vec<usize> = (0..l).filter(|&k| rho.blocks()[k].is_subset_of(big)).collect();
        (idx.len() == 2).then(|| (idx[0], idx[1]))
    };
    let (Some((i, j)), Some((r, s))) = (merged_pair(rho_ij), merged_pair(rho_rs)) else {
        return Err(Error::Domain("inputs are not single-merge coarsements".into()));
    };
    let blocks = rho.blocks();
    let mut out: Vec<Subset> = Vec::with_capacity(l - 2);
    if i == r || i == s || j == r || j == s {
        let mut three = blocks[i].union(&blocks[j]);
        three = three.union(&blocks[r]).union(&blocks[s]);
        out.push(three);
        for (k, b) in blocks.iter().enumerate() {
            if k != i && k != j && k != r && k != s {
                out.push(*b);
            }
        }
    } else {
        out.push(blocks[i].union(&blocks[j]));
        out.push(blocks[r].union(&blocks[s]));
        for (k, b) in blocks.iter().enumerate() {
            if k != i && k != j && k != r && k != s {
                out.push(*b);
            }
        }
    }
    Ok(OrderedPartition { n: rho.n(), blocks: out }.canonical())
}

/// One way of distributing the blocks of ρ_can^p among l groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// Block indices (0-based into ρ_can^p) for each group, ascending.
    pub groups: Vec<Vec<usize>>,
    /// sgn(ρ_1,…,ρ_l) of the concatenated list.
    pub sign: i32,
}

impl Split {
    /// The integer partition |ρ_j| of block sizes for group j.
    pub fn group_type(&self, p: &IntPartition, j: usize) -> IntPartition {
        IntPartition(self.groups[j].iter().map(|&b| p.parts()[b]).collect())
    }

    pub fn group_sum(&self, p: &IntPartition, j: usize) -> usize {
        self.groups[j].iter().map(|&b| p.parts()[b]).sum()
    }
}

fn split_sign(rho: &OrderedPartition, groups: &[Vec<usize>]) -> i32 {
    let seq: Vec<usize> =
        groups.iter().flat_map(|g| g.iter().flat_map(|&b| rho.blocks()[b].elements())).collect();
    sequence_sign(&seq)
}

/// All ways to split ρ_can^p (p the sorted union of the p_j) into canonically
/// ordered ρ_j with |ρ_j| = p_j, each with sgn(ρ_1,…,ρ_l).
pub fn enumerate_splits(p_list: &[IntPartition]) -> Result<(IntPartition, Vec<Split>)> {
    let mut all_parts: Vec<usize> = p_list.iter().flat_map(|p| p.parts().iter().copied()).collect();
    all_parts.sort_unstable();
    for p in p_list {
        if !p.is_natural() {
            return Err(Error::InvalidPartition(format!("{p} is not naturally ordered")));
        }
    }
    let rho = canonical_partition(&all_parts)?;
    let mut needs: Vec<Vec<usize>> = p_list.iter().map(|p| p.parts().to_vec()).collect();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); p_list.len()];
    let mut out = Vec::new();
    assign_blocks(&all_parts, 0, &mut needs, &mut groups, &mut |g| {
        out.push(Split { groups: g.to_vec(), sign: split_sign(&rho, g) });
    });
    let p = IntPartition(all_parts);
    Ok((p, out))
}

fn assign_blocks(
    sizes: &[usize],
    idx: usize,
    needs: &mut [Vec<usize>],
    groups: &mut [Vec<usize>],
    emit: &mut dyn FnMut(&[Vec<usize>]),
) {
    if idx == sizes.len() {
        emit(groups);
        return;
    }
    let size = sizes[idx];
    for j in 0..needs.len() {
        if let Some(pos) = needs[j].iter().position(|&k| k == size) {
            needs[j].remove(pos);
            groups[j].push(idx);
            assign_blocks(sizes, idx + 1, needs, groups, emit);
            groups[j].pop();
            needs[j].insert(pos, size);
        }
    }
}

/// Like [`enumerate_splits`], keeping only splits with ∪ρ_1 < … < ∪ρ_l in the
/// canonical subset order.
pub fn enumerate_splits_ordered(p_list: &[IntPartition]) -> Result<(IntPartition, Vec<Split>)> {
    let (p, splits) = enumerate_splits(p_list)?;
    let rho = canonical_partition(p.parts())?;
    let kept = splits.into_iter().filter(|s| unions_increasing(&rho, &s.groups)).collect();
    Ok((p, kept))
}

fn group_union(rho: &OrderedPartition, group: &[usize]) -> Subset {
    group.iter().fold(Subset::empty(rho.n()), |acc, &b| acc.union(&rho.blocks()[b]))
}

fn unions_increasing(rho: &OrderedPartition, groups: &[Vec<usize>]) -> bool {
    groups.windows(2).all(|w| group_union(rho, &w[0]) < group_union(rho, &w[1]))
}

/// All ordered splits of ρ_can^p into l ≥ 1 nonempty canonically ordered
/// pieces with ∪ρ_1 < … < ∪ρ_l. These index the composition formulas.
pub fn ordered_splits(p: &IntPartition) -> Vec<Split> {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<Vec<usize>, Vec<Split>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(p.parts()) {
        return hit.clone();
    }
    let rho = canonical_partition(p.parts()).expect("parts are positive");
    let mut out: Vec<Split> = index_set_partitions(p.len())
        .into_iter()
        .map(|mut groups| {
            groups.sort_by_key(|g| group_union(&rho, g));
            let sign = split_sign(&rho, &groups);
            Split { groups, sign }
        })
        .collect();
    out.sort_by(|a, b| a.groups.len().cmp(&b.groups.len()).then_with(|| a.groups.cmp(&b.groups)));
    cache.lock().unwrap().insert(p.parts().to_vec(), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(s: &str) -> OrderedPartition {
        OrderedPartition::parse(s, None).unwrap()
    }

    #[test]
    fn canonical_order_sorts_by_size_then_lex() {
        let n = 4;
        let blocks = [Subset::new(n, &[2, 3]).unwrap(), Subset::new(n, &[1]).unwrap(), Subset::new(n, &[4]).unwrap()];
        assert_eq!(canonical_order(n, &blocks).unwrap().to_string(), "1|4|2,3");
        let blocks = [Subset::new(n, &[1, 2]).unwrap(), Subset::new(n, &[3, 4]).unwrap()];
        assert_eq!(canonical_order(n, &blocks).unwrap().to_string(), "1,2|3,4");
    }

    #[test]
    fn canonical_order_of_ten_element_example() {
        let rho = part("1|2,3|4|5,6,7|8,9,10");
        let sorted = canonical_order(10, rho.blocks()).unwrap();
        assert_eq!(sorted.to_string(), "1|4|2,3|5,6,7|8,9,10");
        assert!(sorted.is_canonical());
    }

    #[test]
    fn canonical_order_rejects_overlaps() {
        let n = 3;
        let blocks = [Subset::new(n, &[1, 2]).unwrap(), Subset::new(n, &[2]).unwrap()];
        assert!(matches!(canonical_order(n, &blocks), Err(Error::InvalidPartition(_))));
        let blocks = [Subset::empty(n)];
        assert!(canonical_order(n, &blocks).is_err());
    }

    #[test]
    fn epsilon_basics() {
        let id = Permutation::identity(4);
        for s in Subset::all(4) {
            assert_eq!(epsilon(&id, &s), 1);
        }
        let t = Permutation::transposition(2, 1, 2);
        assert_eq!(epsilon(&t, &Subset::full(2)), -1);
    }

    #[test]
    fn sgn_examples() {
        assert_eq!(sgn(&part("4,5,6|1|2,3")), -1);
        assert_eq!(sgn(&part("2|1,4|3")), 1);
        assert_eq!(sgn(&part("1|2,3|4|5,6,7|8,9,10")), 1);
    }

    #[test]
    fn canonical_partition_examples() {
        assert_eq!(canonical_partition(&[1, 2, 1, 3, 3]).unwrap().to_string(), "1|2,3|4|5,6,7|8,9,10");
        assert_eq!(canonical_partition(&[4]).unwrap().to_string(), "1,2,3,4");
        assert_eq!(canonical_partition(&[1, 1]).unwrap().to_string(), "1|2");
        assert!(canonical_partition_in(&[2, 2], 3).is_err());
    }

    #[test]
    fn integer_partition_listing() {
        let p3: Vec<String> = integer_partitions(3).iter().map(|p| p.to_string()).collect();
        assert_eq!(p3, ["1", "1,1", "2", "1,1,1", "1,2", "3"]);
        assert_eq!(integer_partitions(1).len(), 1);
        assert_eq!(integer_partitions(4).len(), 11);
    }

    #[test]
    fn coarsement_counts() {
        assert_eq!(coarsements(&part("1|2")).len(), 2);
        assert_eq!(coarsements(&part("1|2|3")).len(), 5);
        let rho = part("1|2,3");
        let j = Subset::new(3, &[2, 3]).unwrap();
        assert_eq!(restrict_to(&rho, &j).to_string(), "2,3");
    }

    #[test]
    fn cube_object_examples() {
        let objs: Vec<String> = cube_objects(&part("1,2|3")).iter().map(|s| s.to_string()).collect();
        assert_eq!(objs, ["-", "3", "1,2", "1,2,3"]);
        assert_eq!(cube_objects(&part("1|2|3|4")).len(), 16);
    }

    #[test]
    fn cube_intersection_cases() {
        let a = OrderedPartition::parse("1,2|3|4", Some(4)).unwrap();
        let b = OrderedPartition::parse("1|2|3,4", Some(4)).unwrap();
        assert_eq!(cube_intersection(&a, &b).unwrap().to_string(), "1,2|3,4");
        let a = OrderedPartition::parse("1,2|3", Some(3)).unwrap();
        let b = OrderedPartition::parse("1,3|2", Some(3)).unwrap();
        assert_eq!(cube_intersection(&a, &b).unwrap().to_string(), "1,2,3");
        assert!(cube_intersection(&a, &a).is_err());
    }

    #[test]
    fn split_footnote_example() {
        let p1 = IntPartition::parse("1,3").unwrap();
        let p2 = IntPartition::parse("1,2").unwrap();
        let (p, splits) = enumerate_splits(&[p1.clone(), p2.clone()]).unwrap();
        assert_eq!(p.to_string(), "1,1,2,3");
        let rho = canonical_partition(p.parts()).unwrap();
        assert_eq!(rho.to_string(), "1|2|3,4|5,6,7");
        assert_eq!(splits.len(), 2);
        // the listed ρ_1 has block sizes (1,2), so it belongs to the swapped input order
        let (_, splits) = enumerate_splits(&[p2, p1]).unwrap();
        let hit = splits.iter().find(|s| s.groups == vec![vec![1, 2], vec![0, 3]]).unwrap();
        let listed: Vec<Subset> = hit.groups.iter().flatten().map(|&b| rho.blocks()[b]).collect();
        let listed = OrderedPartition::new(7, listed).unwrap();
        assert_eq!(listed.to_string(), "2|3,4|1|5,6,7");
        assert_eq!(hit.sign, sgn(&listed));
    }

    #[test]
    fn split_example_one_signs() {
        let ps = ["1", "1,2", "2,3"].map(|s| IntPartition::parse(s).unwrap());
        let (_, splits) = enumerate_splits(&ps).unwrap();
        let signs: Vec<i32> = splits.iter().map(|s| s.sign).collect();
        assert_eq!(splits.len(), 4);
        assert_eq!(signs.iter().filter(|&&s| s == 1).count(), 2);
        assert_eq!(signs.iter().filter(|&&s| s == -1).count(), 2);
    }

    #[test]
    fn single_input_has_one_positive_split() {
        let (_, splits) = enumerate_splits(&[IntPartition::parse("1,1,2").unwrap()]).unwrap();
        assert_eq!(splits.len(), 1);
        assert_eq!(splits[0].sign, 1);
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["2|1,4|3", "1|2,3|4|5,6,7|8,9,10", "3"] {
            assert_eq!(part(s).to_string(), s);
        }
        assert!(OrderedPartition::parse("1,x|2", None).is_err());
        assert!(OrderedPartition::parse("1|1", None).is_err());
    }

    #[test]
    fn permutation_group_laws() {
        let all = Permutation::all(4);
        assert_eq!(all.len(), 24);
        for s in &all {
            assert!(s.compose(&s.inverse()).is_identity());
        }
        assert!(Permutation::new(vec![1, 1]).is_err());
    }
}
