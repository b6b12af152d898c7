//! The acceptance suite: eleven exact, seeded criteria.
//!
//! Every randomized case draws from its own stream `sub_rng(seed, case)`, so
//! results do not depend on the execution mode.

use std::fmt::Write;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cocycles::{self, Route, ViolationKind};
use crate::cores::CoreModel;
use crate::decomp::{
    self, all_orderings, build_decomposition, check_order_independence, equivariance_violation, random_core_family,
    random_decomposition, sample_orderings, symmetrize_2core, Base, DecompositionInput,
};
use crate::error::Result;
use crate::exec::Exec;
use crate::nman::{self, SampleBase, SplitModel};
use crate::oracle;
use crate::partitions::{
    coarsements, cube_intersection, cube_objects, epsilon, merge_blocks, set_partitions, sgn, sign_quotient,
    IntPartition, Permutation, Subset,
};
use crate::random::{pick, random_symmetric, random_tensor, sub_rng, TestRng};
use crate::snvb::{
    check_equivariance, compose_general, compose_sym, expand, extract, pullback_bundle, top_map, DecTuple, SymModel,
    SymMorphism,
};
use crate::tensors::{graded_product, int, GradedShape, MultiTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Caps every n used by the criteria; `None` runs them as stated.
    pub max_n: Option<usize>,
    pub exec: Exec,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        SuiteConfig { seed, max_n: None, exec: Exec::default() }
    }

    fn clip(&self, n: usize) -> usize {
        self.max_n.map_or(n, |m| n.min(m)).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub budget: Duration,
    pub elapsed: Duration,
}

impl CriterionResult {
    /// One machine-parsable line; timing is left out so reports are reproducible.
    pub fn line(&self) -> String {
        format!("{} {:>2} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.detail)
    }
}

pub const CRITERIA: [(usize, &str, u64); 11] = [
    (1, "sign well-definedness", 30),
    (2, "sign product formula", 10),
    (3, "graded product", 60),
    (4, "pullback coherence", 60),
    (5, "symmetric morphism characterization", 60),
    (6, "composition agreement", 60),
    (7, "cocycle equivalence", 60),
    (8, "decomposition order independence", 120),
    (9, "2-core averaging", 30),
    (10, "cube-category intersection", 30),
    (11, "pullback bundle", 10),
];

/// Failures collected by a criterion; each entry names one failing case.
#[derive(Default)]
struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.cases += other.cases;
        self.failures.extend(other.failures);
    }

    fn absorb_result(&mut self, case: &str, r: Result<Tally>) {
        match r {
            Ok(t) => self.absorb(t),
            Err(e) => {
                self.cases += 1;
                self.failures.push(format!("{case}: error: {e}"));
            }
        }
    }

    fn finish(self, summary: String) -> (bool, String) {
        if self.failures.is_empty() {
            (true, format!("{summary}; {} checks", self.cases))
        } else {
            let shown: Vec<&str> = self.failures.iter().take(3).map(String::as_str).collect();
            (false, format!("{summary}; {} of {} checks failed: {}", self.failures.len(), self.cases, shown.join("; ")))
        }
    }
}

/// Runs case i on the stream `offset + i`.
fn cases<R: Send>(
    cfg: &SuiteConfig,
    offset: usize,
    count: usize,
    f: impl Fn(usize, &mut TestRng) -> R + Sync + Send,
) -> Vec<R> {
    let ids: Vec<usize> = (0..count).collect();
    cfg.exec.map(&ids, |&i| f(i, &mut sub_rng(cfg.seed, (offset + i) as u64)))
}

fn random_dims(rng: &mut TestRng, n: usize, lo: usize, hi: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn random_permutation(rng: &mut TestRng, n: usize) -> Permutation {
    let mut images: Vec<usize> = (1..=n).collect();
    images.shuffle(rng);
    Permutation::new(images).expect("a shuffle is a permutation")
}

fn all_nonempty_subsets(n: usize) -> Vec<Subset> {
    let mut v: Vec<Subset> = Subset::all(n).filter(|s| !s.is_empty()).collect();
    v.sort();
    v
}

fn criterion_1(cfg: &SuiteConfig) -> (bool, String) {
    let top = cfg.clip(5);
    let mut tally = Tally::default();
    for n in 1..=top {
        let perms = Permutation::all(n);
        let subsets = all_nonempty_subsets(n);
        let results = cfg.exec.map(&subsets, |set| {
            let mut t = Tally::default();
            for rho in set_partitions(set) {
                let values: Vec<i32> = perms.iter().filter_map(|s| sign_quotient(&rho, s)).collect();
                let expected = oracle::sgn(&rho);
                t.check(!values.is_empty() && values.iter().all(|&v| v == expected) && sgn(&rho) == expected, || {
                    format!("rho={rho}: quotients {values:?}, inversion sign {expected}")
                });
            }
            t
        });
        results.into_iter().for_each(|t| tally.absorb(t));
    }
    tally.finish(format!("all canonically ordered partitions, n ≤ {top}, all valid σ"))
}

fn criterion_2(cfg: &SuiteConfig) -> (bool, String) {
    let top = cfg.clip(4);
    let mut tally = Tally::default();
    for n in 1..=top {
        let perms = Permutation::all(n);
        let results = cfg.exec.map(&perms, |s| {
            let mut t = Tally::default();
            for v in &perms {
                let sv = s.compose(v);
                for set in Subset::all(n) {
                    let lhs = epsilon(&sv, &set);
                    let rhs = epsilon(s, &set.image(v)) * epsilon(v, &set);
                    t.check(lhs == rhs && lhs == oracle::epsilon(&sv, &set), || format!("σ={s} ν={v} I={set}"));
                }
            }
            t
        });
        results.into_iter().for_each(|t| tally.absorb(t));
    }
    let big = cfg.clip(6);
    let results = cases(cfg, 0, 1000, |_, r| {
        let s = random_permutation(r, big);
        let v = random_permutation(r, big);
        let set = Subset::from_bits(big, r.gen_range(0..(1u32 << big)));
        let sv = s.compose(&v);
        let lhs = epsilon(&sv, &set);
        let mut t = Tally::default();
        t.check(lhs == epsilon(&s, &set.image(&v)) * epsilon(&v, &set) && lhs == oracle::epsilon(&sv, &set), || {
            format!("σ={s} ν={v} I={set}")
        });
        t
    });
    results.into_iter().for_each(|t| tally.absorb(t));
    tally.finish(format!("exhaustive n ≤ {top}, 1000 random cases at n = {big}"))
}

fn generator(k: usize, a: usize, dims: &[usize]) -> MultiTensor {
    let mut t = MultiTensor::zeros(GradedShape { degrees: vec![k], dims: vec![dims[k - 1]] }, 1);
    t.set(&[a], 0, int(1));
    t
}

fn koszul(a: usize, b: usize) -> MultiTensor {
    MultiTensor::scalar(int(if (a * b).is_multiple_of(2) { 1 } else { -1 }))
}

fn total_degree(t: &MultiTensor) -> usize {
    t.degrees().iter().sum()
}

fn commutes(x: &MultiTensor, y: &MultiTensor) -> Result<bool> {
    let sign = koszul(total_degree(x), total_degree(y));
    Ok(graded_product(&[x, y])? == graded_product(&[&sign, y, x])?)
}

fn criterion_3(cfg: &SuiteConfig) -> (bool, String) {
    const MAX_DEGREE: usize = 6;
    let configs: [[usize; MAX_DEGREE]; 3] = [[2; MAX_DEGREE], [1, 2, 1, 2, 1, 2], [2, 1, 2, 1, 2, 1]];
    let mut tally = Tally::default();
    for dims in &configs {
        let gens: Vec<MultiTensor> = (1..=MAX_DEGREE)
            .flat_map(|k| (0..dims[k - 1]).map(move |a| generator(k, a, dims)))
            .collect();
        let count = gens.len();
        let triples: Vec<(usize, usize, usize)> = (0..count)
            .flat_map(|i| (0..count).flat_map(move |j| (0..count).map(move |k| (i, j, k))))
            .filter(|&(i, j, k)| total_degree(&gens[i]) + total_degree(&gens[j]) + total_degree(&gens[k]) <= MAX_DEGREE)
            .collect();
        let results = cfg.exec.map(&triples, |&(i, j, k)| {
            let (a, b, c) = (&gens[i], &gens[j], &gens[k]);
            let run = || -> Result<Tally> {
                let mut t = Tally::default();
                let ab = graded_product(&[a, b])?;
                let bc = graded_product(&[b, c])?;
                let left = graded_product(&[&ab, c])?;
                let right = graded_product(&[a, &bc])?;
                let flat = graded_product(&[a, b, c])?;
                t.check(left == right && right == flat, || format!("associativity fails for generators {i},{j},{k}"));
                t.check(commutes(a, b)? && commutes(&ab, c)? && commutes(a, &bc)?, || {
                    format!("graded commutativity fails for generators {i},{j},{k}")
                });
                Ok(t)
            };
            run()
        });
        for r in results {
            tally.absorb_result(&format!("dims {dims:?}"), r);
        }
    }
    // degree-1 inputs against the alternation formula
    let mut shapes = Vec::new();
    for dim in 1..=3usize {
        for p in 1..=3usize {
            for q in 1..=(4 - p) {
                for rep in 0..5 {
                    shapes.push((dim, p, q, rep));
                }
            }
        }
    }
    let results = cases(cfg, 0, shapes.len(), |i, r| {
        let (dim, p, q, _) = shapes[i];
        let form = |r: &mut TestRng, k: usize| random_symmetric(r, GradedShape { degrees: vec![1; k], dims: vec![dim; k] }, 1, 4);
        let f = form(r, p);
        let g = form(r, q);
        let run = || -> Result<Tally> {
            let mut t = Tally::default();
            t.check(graded_product(&[&f, &g])? == oracle::alternation_wedge(&f, &g)?, || {
                format!("⊙ differs from ∧ for dim {dim}, arities {p},{q}")
            });
            Ok(t)
        };
        run()
    });
    for r in results {
        tally.absorb_result("wedge", r);
    }
    tally.finish(format!("generator triples of total degree ≤ {MAX_DEGREE}, dims ≤ 2; {} wedge cases", shapes.len()))
}

fn criterion_4(cfg: &SuiteConfig) -> (bool, String) {
    let top = cfg.clip(4);
    let results = cases(cfg, 0, 100, |case, r| {
        let n = 1 + case % top;
        let run = |r: &mut TestRng| -> Result<Tally> {
            let model = |r: &mut TestRng| SplitModel::new(random_dims(r, n, 1, 2), SampleBase::numbered(2));
            let (m1, m2, m3) = (model(r)?, model(r)?, model(r)?);
            let mu = nman::random_morphism(r, &m1, &m2, false, 2);
            let nu = nman::random_morphism(r, &m2, &m3, false, 2);
            let composite = nman::compose(&nu, &mu)?;
            let mut t = Tally::default();
            for k in 1..=n {
                for a in 0..m3.ranks[k - 1] {
                    let g = nman::generator(&m3, k, a);
                    let direct = nman::pullback(&composite, &g)?;
                    let pulled = nman::pullback(&nu, &g)?;
                    let stepwise = nman::pullback(&mu, &pulled)?;
                    for x in 0..m1.base.len() {
                        t.check(nman::trim(&direct.values[x]) == nman::trim(&stepwise.values[x]), || {
                            format!("case {case}: generator ({k},{a}) at point {x}")
                        });
                        let oracle = oracle::pullback_by_products(&mu.fibers[x], &pulled.values[mu.base_map[x]], &m1.ranks)?;
                        t.check(oracle == nman::trim(&stepwise.values[x]), || {
                            format!("case {case}: product-expansion oracle disagrees at generator ({k},{a})")
                        });
                    }
                }
            }
            Ok(t)
        };
        run(r)
    });
    let mut tally = Tally::default();
    for (i, r) in results.into_iter().enumerate() {
        tally.absorb_result(&format!("case {i}"), r);
    }
    tally.finish(format!("100 cases, degrees 1..={top}, ranks ≤ 2"))
}

/// A component key admitting a non-(skew-)symmetric tensor, and such a tensor.
fn asymmetric_delta(r: &mut TestRng, tau: &SymMorphism) -> Option<(IntPartition, MultiTensor)> {
    let src = tau.source.dims();
    let tgt = tau.target.dims();
    let mut keys: Vec<IntPartition> = tau
        .components
        .keys()
        .filter(|p| p.parts().windows(2).any(|w| w[0] == w[1]) && tgt[p.sum() - 1] > 0)
        .cloned()
        .collect();
    while !keys.is_empty() {
        let p = keys.remove(pick(r, keys.len()));
        for _ in 0..16 {
            let d = random_tensor(r, nman::component_shape(&p, src), tgt[p.sum() - 1], 3);
            if !d.is_graded_symmetric() {
                return Some((p, d));
            }
        }
    }
    None
}

fn criterion_5(cfg: &SuiteConfig) -> (bool, String) {
    let top = cfg.clip(4);
    let results = cases(cfg, 0, 200, |case, r| -> Result<(Tally, usize, usize)> {
        let n = 1 + case % top;
        let source = SymModel::new(random_dims(r, n, 1, 2))?;
        let target = SymModel::new(random_dims(r, n, 1, 2))?;
        let tau = SymMorphism::random(r, &source, &target, false, 3);
        let mut t = Tally::default();
        t.check(tau.satisfies_symmetry() && check_equivariance(&tau), || format!("case {case}: symmetric family not equivariant"));
        let (mut built, mut caught) = (0, 0);
        if let Some((p, d)) = asymmetric_delta(r, &tau) {
            let mut bad = tau.clone();
            let slot = bad.components.get_mut(&p).expect("key exists");
            *slot = slot.add(&d)?;
            built += 1;
            let detected = !check_equivariance(&bad);
            caught += usize::from(detected);
            t.check(detected && !bad.satisfies_symmetry(), || format!("case {case}: violation at {p} not detected"));
        }
        Ok((t, built, caught))
    });
    let mut tally = Tally::default();
    let (mut built, mut caught) = (0, 0);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((t, b, c)) => {
                tally.absorb(t);
                built += b;
                caught += c;
            }
            Err(e) => tally.absorb_result(&format!("case {i}"), Err(e)),
        }
    }
    let expected = (0..200).filter(|c| 1 + c % top >= 2).count();
    tally.check(built == expected, || format!("only {built} of {expected} violations could be constructed"));
    tally.finish(format!("200 cases, n ≤ {top}, {caught}/{built} constructed violations detected"))
}

fn criterion_6(cfg: &SuiteConfig) -> (bool, String) {
    let top = cfg.clip(4);
    let results = cases(cfg, 0, 100, |case, r| -> Result<Tally> {
        let n = 1 + case % top;
        let a = SymModel::new(random_dims(r, n, 1, 2))?;
        let b = SymModel::new(random_dims(r, n, 1, 2))?;
        let c = SymModel::new(random_dims(r, n, 1, 2))?;
        let eta = SymMorphism::random(r, &a, &b, false, 2);
        let tau = SymMorphism::random(r, &b, &c, false, 2);
        let composed = compose_sym(&tau, &eta)?;
        let via_top = extract(&|x: &DecTuple| top_map(&tau, &top_map(&eta, x)), &a, &c)?;
        let general = compose_general(&expand(&tau)?, &expand(&eta)?)?;
        let mut t = Tally::default();
        t.check(composed == via_top, || format!("case {case}: compose_sym differs from the composed top maps"));
        t.check(general.trimmed() == expand(&composed)?.trimmed(), || {
            format!("case {case}: compose_general∘expand differs from expand∘compose_sym")
        });
        Ok(t)
    });
    let mut tally = Tally::default();
    for (i, r) in results.into_iter().enumerate() {
        tally.absorb_result(&format!("case {i}"), r);
    }
    tally.finish(format!("100 cases, n ≤ {top}"))
}

fn criterion_7(cfg: &SuiteConfig) -> (bool, String) {
    let n = cfg.clip(3);
    let routes = [Route::Nman, Route::Sym, Route::General];
    let results = cases(cfg, 0, 50, |case, r| -> Result<Tally> {
        let model = SymModel::new(random_dims(r, n, 1, 2))?;
        let cover = cocycles::random_cover(r, 3, 4);
        let phis = cocycles::random_trivializations(r, &cover, &model, false, 2);
        let c = cocycles::from_trivializations(&cover, &model, &phis)?;
        let mut t = Tally::default();
        let reports = routes.iter().map(|&rt| cocycles::check_cocycle(&c, rt, Exec::Sequential)).collect::<Result<Vec<_>>>()?;
        t.check(reports.iter().all(|rep| rep.passed()), || format!("case {case}: a cocycle from trivializations failed"));
        t.check(cocycles::routes_agree(&c, Exec::Sequential)?, || format!("case {case}: routes disagree"));
        t.check(cocycles::as_snvb_cocycle(&cocycles::as_nman_cocycle(&c)?)? == c, || {
            format!("case {case}: the [n]-manifold view does not round-trip")
        });
        let Some((bad, at)) = cocycles::perturb(r, &c) else {
            t.check(false, || format!("case {case}: no perturbation possible"));
            return Ok(t);
        };
        let reports =
            routes.iter().map(|&rt| cocycles::check_cocycle(&bad, rt, Exec::Sequential)).collect::<Result<Vec<_>>>()?;
        t.check(reports.windows(2).all(|w| w[0] == w[1]), || format!("case {case}: routes report differently"));
        t.check(
            reports[0].violations.iter().any(|v| {
                v.kind == ViolationKind::Triple
                    && (v.alpha, v.beta, v.point) == (at.alpha, at.beta, at.point)
                    && v.partition.as_ref() == Some(&at.partition)
            }),
            || format!("case {case}: perturbation at {} not reported", at.partition),
        );
        Ok(t)
    });
    let mut tally = Tally::default();
    for (i, r) in results.into_iter().enumerate() {
        tally.absorb_result(&format!("case {i}"), r);
    }
    tally.finish(format!("50 three-chart cocycles at n = {n}, three routes"))
}

fn order_cases(cfg: &SuiteConfig, offset: usize, n: usize, inputs: usize, orderings: Option<usize>) -> Tally {
    let results = cases(cfg, offset, inputs, |case, r| -> Result<Tally> {
        let model = SymModel::new(random_dims(r, n, 1, 2))?;
        let s = random_decomposition(r, &model, 3);
        let input = DecompositionInput::from_decomposition(&s)?;
        let orders = match orderings {
            None => all_orderings(n),
            Some(k) => sample_orderings(r, n, k),
        };
        let mut t = Tally::default();
        t.check(check_order_independence(&input, &orders, Exec::Sequential)?, || {
            format!("n={n} input {case}: outputs depend on the ordering")
        });
        t.check(build_decomposition(&input, &orders[0])?.trimmed() == s.trimmed(), || {
            format!("n={n} input {case}: the source decomposition is not recovered")
        });
        Ok(t)
    });
    let mut tally = Tally::default();
    for (i, r) in results.into_iter().enumerate() {
        tally.absorb_result(&format!("n={n} input {i}"), r);
    }
    tally
}

fn criterion_8(cfg: &SuiteConfig) -> (bool, String) {
    let (n3, n4) = (cfg.clip(3), cfg.clip(4));
    let mut tally = order_cases(cfg, 0, n3, 20, None);
    tally.absorb(order_cases(cfg, 1000, n4, 5, Some(20)));
    let count3 = all_orderings(n3).len();
    let count4 = all_orderings(n4).len().min(20);
    tally.finish(format!("{count3} orderings × 20 inputs at n = {n3}, {count4} orderings × 5 inputs at n = {n4}"))
}

fn criterion_9(cfg: &SuiteConfig) -> (bool, String) {
    let n = cfg.clip(3);
    let results = cases(cfg, 0, 50, |case, r| -> Result<Tally> {
        let model = SymModel::new(random_dims(r, n, 1, 2))?;
        let family = random_core_family(r, &model, 3)?;
        let sym = symmetrize_2core(&family, Base::First)?;
        let mut t = Tally::default();
        t.check(equivariance_violation(&sym).is_none(), || format!("case {case}: averaged family is not equivariant"));
        t.check(symmetrize_2core(&family, Base::Second)? == sym, || format!("case {case}: depends on the base direction"));
        t.check(symmetrize_2core(&sym, Base::First)? == sym, || format!("case {case}: not idempotent"));
        // with a single 2-partition a sign flip stays equivariant
        if n >= 3 {
            t.check(equivariance_violation(&decomp::break_family(&sym)).is_some(), || {
                format!("case {case}: a broken family passes")
            });
        }
        Ok(t)
    });
    let mut tally = Tally::default();
    for (i, r) in results.into_iter().enumerate() {
        tally.absorb_result(&format!("case {i}"), r);
    }
    tally.finish(format!("50 inputs at n = {n}, all σ ∈ S_{n}"))
}

fn criterion_10(cfg: &SuiteConfig) -> (bool, String) {
    let top = cfg.clip(5);
    let mut tally = Tally::default();
    for n in 1..=top {
        let subsets = all_nonempty_subsets(n);
        let results = cfg.exec.map(&subsets, |set| {
            let mut t = Tally::default();
            for rho in set_partitions(set).into_iter().filter(|r| r.len() >= 2) {
                let l = rho.len();
                let merges: Vec<_> = (0..l).flat_map(|i| (i + 1..l).map(move |j| (i, j))).collect();
                for (x, &(i, j)) in merges.iter().enumerate() {
                    for &(r, s) in &merges[x + 1..] {
                        let a = merge_blocks(&rho, i, j);
                        let b = merge_blocks(&rho, r, s);
                        match cube_intersection(&a, &b) {
                            Ok(c) => {
                                let common: std::collections::BTreeSet<u32> =
                                    oracle::objects(&a).intersection(&oracle::objects(&b)).copied().collect();
                                let listed: std::collections::BTreeSet<u32> =
                                    cube_objects(&c).iter().map(|s| s.bits()).collect();
                                t.check(common == oracle::objects(&c) && listed == common, || {
                                    format!("rho={rho}: Obj({a}) ∩ Obj({b}) ≠ Obj({c})")
                                });
                            }
                            Err(e) => t.check(false, || format!("rho={rho}, {a} and {b}: {e}")),
                        }
                    }
                }
                t.check(coarsements(&rho).iter().filter(|c| c.len() + 1 == l).count() == merges.len(), || {
                    format!("rho={rho}: unexpected number of single merges")
                });
            }
            t
        });
        results.into_iter().for_each(|t| tally.absorb(t));
    }
    tally.finish(format!("all pairs of distinct single-merge coarsements, n ≤ {top}"))
}

fn criterion_11(cfg: &SuiteConfig) -> (bool, String) {
    let top = cfg.clip(4);
    let mut tally = Tally::default();
    for n in 1..=top {
        let results = cases(cfg, n * 100, 50, |case, r| -> Result<Tally> {
            let model = SymModel::new(random_dims(r, n, 1, 2))?;
            let bundle = pullback_bundle(&model);
            let full = Subset::full(n);
            let mut t = Tally::default();
            let core = CoreModel::new(&bundle.pulled, &crate::partitions::OrderedPartition::singletons(&full))?;
            let ultra = bundle.pulled.dim_of(&full);
            t.check(ultra == 0 && core.space_dim(&full) == (1..(1u32 << n)).map(|b| model.dim_of_bits(b)).sum::<usize>() - model.dim_of(&full), || {
                format!("n={n} tuple {case}: ultracore has dimension {ultra}")
            });
            let x = DecTuple::random(r, &model, 4);
            let px = bundle.project(&x);
            t.check(bundle.is_consistent(&px), || format!("n={n} tuple {case}: projection is not a pullback point"));
            for sigma in Permutation::all(n) {
                t.check(bundle.check_equivariance(&sigma, &x), || format!("n={n} tuple {case}: σ={sigma}"));
            }
            Ok(t)
        });
        for (i, r) in results.into_iter().enumerate() {
            tally.absorb_result(&format!("n={n} tuple {i}"), r);
        }
    }
    tally.finish(format!("50 tuples for each n ≤ {top}, all σ"))
}

pub fn run_criterion(id: usize, cfg: &SuiteConfig) -> Option<CriterionResult> {
    let &(_, name, budget) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        11 => criterion_11(cfg),
        _ => return None,
    };
    Some(CriterionResult { id, name, passed, detail, budget: Duration::from_secs(budget), elapsed: start.elapsed() })
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0, cfg)).collect()
}

/// The report: a header naming the seed, one line per criterion, a summary.
pub fn render(cfg: &SuiteConfig, results: &[CriterionResult]) -> String {
    let mut s = String::new();
    let cap = cfg.max_n.map_or("none".to_string(), |n| n.to_string());
    let _ = writeln!(s, "gradedvb selftest seed={} max_n={cap}", cfg.seed);
    for r in results {
        let _ = writeln!(s, "{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(s, "{} {passed}/{} criteria passed", if passed == results.len() { "PASS" } else { "FAIL" }, results.len());
    s
}
