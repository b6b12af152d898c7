//! Slow reference computations, written independently of the main
//! algorithms, used as test oracles.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::nman::{component_shape, partitions_of, Components, LocalFunction};
use crate::partitions::{OrderedPartition, Permutation, Subset};
use crate::tensors::{for_each_index, graded_product, int, GradedShape, MultiTensor, Rational};

/// Sign of the permutation i ↦ images[i] of {0,…,k−1}, by counting cycles.
pub fn cycle_sign(images: &[usize]) -> i32 {
    let mut seen = vec![false; images.len()];
    let mut even_cycles = 0;
    for start in 0..images.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = images[i];
            len += 1;
        }
        if len % 2 == 0 {
            even_cycles += 1;
        }
    }
    if even_cycles % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Rank of every entry of `seq` within the sorted sequence.
fn ranks(seq: &[usize]) -> Vec<usize> {
    let mut sorted = seq.to_vec();
    sorted.sort_unstable();
    seq.iter().map(|v| sorted.binary_search(v).expect("present")).collect()
}

/// ε(σ, I): the sign of the bijection I → σ(I) after identifying both with
/// {0,…,#I−1} by their natural order.
pub fn epsilon(sigma: &Permutation, set: &Subset) -> i32 {
    let images: Vec<usize> = set.elements().iter().map(|&i| sigma.apply(i)).collect();
    cycle_sign(&ranks(&images))
}

/// sgn(ρ) as the sign of the listing of ∪ρ block by block.
pub fn sgn(rho: &OrderedPartition) -> i32 {
    let seq: Vec<usize> = rho.blocks().iter().flat_map(|b| b.elements()).collect();
    cycle_sign(&ranks(&seq))
}

/// All unions of blocks of ρ, ∅ included, as bitmasks.
pub fn objects(rho: &OrderedPartition) -> BTreeSet<u32> {
    let blocks = rho.blocks();
    (0u32..(1 << blocks.len()))
        .map(|choice| {
            blocks.iter().enumerate().filter(|(k, _)| choice & (1 << k) != 0).fold(0, |acc, (_, b)| acc | b.bits())
        })
        .collect()
}

fn factorial(k: usize) -> Rational {
    (1..=k).fold(Rational::one(), |acc, i| acc * int(i as i64))
}

/// (f∧g)(v_1,…,v_{p+q}) = 1/(p!q!)·Σ_{σ∈S_{p+q}} sgn σ·f(v_σ(1),…)·g(…,v_σ(p+q))
/// for scalar-valued alternating forms on a single space.
pub fn alternation_wedge(f: &MultiTensor, g: &MultiTensor) -> Result<MultiTensor> {
    let degree_one = |t: &MultiTensor| t.out_dim() == 1 && t.degrees().iter().all(|&d| d == 1);
    if !degree_one(f) || !degree_one(g) {
        return Err(Error::ShapeMismatch("the wedge oracle takes scalar forms in degree-1 slots".into()));
    }
    let dim = f.dims().first().or(g.dims().first()).copied().unwrap_or(0);
    if f.dims().iter().chain(g.dims()).any(|&d| d != dim) {
        return Err(Error::ShapeMismatch("forms on different spaces".into()));
    }
    let (p, q) = (f.slots(), g.slots());
    let k = p + q;
    let shape = GradedShape { degrees: vec![1; k], dims: vec![dim; k] };
    let mut out = MultiTensor::zeros(shape, 1);
    let perms: Vec<(Vec<usize>, i32)> = if k == 0 {
        vec![(Vec::new(), 1)]
    } else {
        Permutation::all(k)
            .into_iter()
            .map(|s| {
                let images: Vec<usize> = s.images().iter().map(|v| v - 1).collect();
                let sign = cycle_sign(&images);
                (images, sign)
            })
            .collect()
    };
    let norm = factorial(p) * factorial(q);
    for_each_index(&vec![dim; k], |index| {
        let mut total = Rational::zero();
        for (images, sign) in &perms {
            let permuted: Vec<usize> = images.iter().map(|&i| index[i]).collect();
            let term = f.get(&permuted[..p], 0) * g.get(&permuted[p..], 0);
            if sign > &0 {
                total += term;
            } else {
                total -= term;
            }
        }
        out.set(index, 0, total / &norm);
    });
    Ok(out)
}

/// μ*(ε^a) for the degree-k generator: Σ_p ε^a∘μ_p, keyed by p.
fn pulled_generator(mu: &Components, k: usize, a: usize, src_ranks: &[usize]) -> Vec<MultiTensor> {
    partitions_of(k, src_ranks.len())
        .into_iter()
        .filter_map(|p| {
            let m = mu.get(&p)?;
            let shape = component_shape(&p, src_ranks);
            let mut t = MultiTensor::zeros(shape.clone(), 1);
            for_each_index(&shape.dims, |index| t.set(index, 0, m.get(index, a).clone()));
            (!t.is_zero()).then_some(t)
        })
        .collect()
}

/// μ*(f) computed as an algebra morphism: f is expanded as
/// f_q = (1/ΠN_d!)·Σ_a f_q(e_a)·ε^{a_1}⊙…⊙ε^{a_l}, with N_d the number of
/// slots of degree d, and every generator is pulled back separately.
pub fn pullback_by_products(mu: &Components, f: &LocalFunction, src_ranks: &[usize]) -> Result<LocalFunction> {
    let mut out = LocalFunction::new();
    for (q, fq) in f {
        let mut norm = Rational::one();
        let mut run = 1;
        for w in 0..q.len() {
            if w + 1 < q.len() && q.parts()[w + 1] == q.parts()[w] {
                run += 1;
            } else {
                norm *= factorial(run);
                run = 1;
            }
        }
        let mut failure = None;
        for_each_index(fq.dims(), |index| {
            if failure.is_some() {
                return;
            }
            let c = fq.get(index, 0);
            if c.is_zero() {
                return;
            }
            let pulled: Vec<Vec<MultiTensor>> =
                q.parts().iter().zip(index).map(|(&k, &a)| pulled_generator(mu, k, a, src_ranks)).collect();
            let mut choice = vec![0usize; pulled.len()];
            if pulled.iter().any(|v| v.is_empty()) {
                return;
            }
            loop {
                let factors: Vec<&MultiTensor> = choice.iter().zip(&pulled).map(|(&i, v)| &v[i]).collect();
                match graded_product(&factors) {
                    Ok(prod) => {
                        let key = crate::IntPartition::new(prod.degrees().to_vec()).expect("positive degrees");
                        let term = prod.scale(&(c / &norm));
                        match out.get_mut(&key) {
                            Some(acc) => {
                                if let Err(e) = MultiTensor::add_assign(acc, &term) {
                                    failure = Some(e);
                                    return;
                                }
                            }
                            None => {
                                out.insert(key, term);
                            }
                        }
                    }
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                }
                let mut slot = 0;
                loop {
                    if slot == choice.len() {
                        return;
                    }
                    choice[slot] += 1;
                    if choice[slot] < pulled[slot].len() {
                        break;
                    }
                    choice[slot] = 0;
                    slot += 1;
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(out.into_iter().filter(|(_, t)| !t.is_zero()).collect())
}
