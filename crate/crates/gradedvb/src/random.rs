//! Seeded generators for random exact test data.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tensors::{int, linear_inverse, GradedShape, MultiTensor, Rational};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for sub-case `case` of a run seeded with `seed`.
pub fn sub_rng(seed: u64, case: u64) -> TestRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(case.wrapping_add(1));
    r
}

pub fn small_int(rng: &mut TestRng, bound: i64) -> Rational {
    int(rng.gen_range(-bound..=bound))
}

pub fn nonzero_int(rng: &mut TestRng, bound: i64) -> Rational {
    loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return int(v);
        }
    }
}

pub fn random_vector(rng: &mut TestRng, dim: usize, bound: i64) -> Vec<Rational> {
    (0..dim).map(|_| small_int(rng, bound)).collect()
}

pub fn random_tensor(rng: &mut TestRng, shape: GradedShape, out: usize, bound: i64) -> MultiTensor {
    let len = shape.input_size() * out;
    let coeffs = (0..len).map(|_| small_int(rng, bound)).collect();
    MultiTensor::from_coeffs(shape, out, coeffs).expect("length matches")
}

/// A random graded-symmetric tensor.
pub fn random_symmetric(rng: &mut TestRng, shape: GradedShape, out: usize, bound: i64) -> MultiTensor {
    random_tensor(rng, shape, out, bound).graded_symmetrize()
}

/// A random invertible linear map with integer entries.
pub fn random_invertible(rng: &mut TestRng, degree: usize, dim: usize, bound: i64) -> MultiTensor {
    loop {
        let t = random_tensor(rng, GradedShape { degrees: vec![degree], dims: vec![dim] }, dim, bound);
        if linear_inverse(&t).is_some() {
            return t;
        }
    }
}

pub fn coin(rng: &mut TestRng) -> bool {
    rng.gen_bool(0.5)
}

pub fn pick(rng: &mut TestRng, n: usize) -> usize {
    rng.gen_range(0..n)
}
