use gradedvb::nman::{self, SampleBase, SplitModel};
use gradedvb::oracle;
use gradedvb::random::{random_symmetric, rng};
use gradedvb::snvb::{
    compose_general, compose_sym, expand, extract, invert_sym, top_map, DecTuple, SymModel, SymMorphism,
};
use gradedvb::tensors::{graded_product, int, GradedShape, MultiTensor};
use proptest::prelude::*;

fn dims(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1usize..=2, 1..=max_n)
}

/// A scalar-valued graded-symmetric tensor with naturally ordered degrees.
fn scalar_form(seed: u64, degrees: &[usize], dims: &[usize]) -> MultiTensor {
    let mut degrees = degrees.to_vec();
    degrees.sort_unstable();
    let slot_dims = degrees.iter().map(|&d| dims[d - 1]).collect();
    random_symmetric(&mut rng(seed), GradedShape { degrees, dims: slot_dims }, 1, 3)
}

fn degrees() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1usize..=3, 1..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graded_product_is_associative(seed in any::<u64>(), a in degrees(), b in degrees(), c in degrees(), d in dims(3)) {
        prop_assume!(d.len() == 3);
        let (x, y, z) = (scalar_form(seed, &a, &d), scalar_form(seed ^ 1, &b, &d), scalar_form(seed ^ 2, &c, &d));
        let xy = graded_product(&[&x, &y]).unwrap();
        let yz = graded_product(&[&y, &z]).unwrap();
        prop_assert_eq!(graded_product(&[&xy, &z]).unwrap(), graded_product(&[&x, &yz]).unwrap());
    }

    #[test]
    fn graded_product_commutes_up_to_sign(seed in any::<u64>(), a in degrees(), b in degrees(), d in dims(3)) {
        prop_assume!(d.len() == 3);
        let (x, y) = (scalar_form(seed, &a, &d), scalar_form(seed ^ 3, &b, &d));
        let (p, q): (usize, usize) = (a.iter().sum(), b.iter().sum());
        let sign = MultiTensor::scalar(int(if p * q % 2 == 0 { 1 } else { -1 }));
        prop_assert_eq!(graded_product(&[&x, &y]).unwrap(), graded_product(&[&sign, &y, &x]).unwrap());
    }

    #[test]
    fn symmetrization_is_a_projection(seed in any::<u64>(), a in proptest::collection::vec(1usize..=3, 1..=3)) {
        let t = scalar_form(seed, &a, &[2, 2, 2]);
        prop_assert!(t.is_graded_symmetric());
        prop_assert_eq!(t.graded_symmetrize(), t);
    }

    #[test]
    fn degree_one_products_are_wedges(seed in any::<u64>(), p in 1usize..=2, q in 1usize..=2, dim in 1usize..=3) {
        let d = [dim];
        let f = scalar_form(seed, &vec![1; p], &d);
        let g = scalar_form(seed ^ 5, &vec![1; q], &d);
        prop_assert_eq!(graded_product(&[&f, &g]).unwrap(), oracle::alternation_wedge(&f, &g).unwrap());
    }

    #[test]
    fn nman_composition_is_associative(seed in any::<u64>(), n in 1usize..=4, pts in 1usize..=3) {
        let mut r = rng(seed);
        let model = |r: &mut _| {
            let ranks = (0..n).map(|_| 1 + gradedvb::random::pick(r, 2)).collect();
            SplitModel::new(ranks, SampleBase::numbered(pts)).unwrap()
        };
        let (a, b, c, d) = (model(&mut r), model(&mut r), model(&mut r), model(&mut r));
        let f = nman::random_morphism(&mut r, &a, &b, false, 2);
        let g = nman::random_morphism(&mut r, &b, &c, false, 2);
        let h = nman::random_morphism(&mut r, &c, &d, false, 2);
        let left = nman::compose(&h, &nman::compose(&g, &f).unwrap()).unwrap();
        let right = nman::compose(&nman::compose(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(nman::compose(&nman::GradedMorphism::identity(&b), &f).unwrap(), f.clone());
    }

    #[test]
    fn nman_inverse_is_two_sided(seed in any::<u64>(), d in dims(4)) {
        let model = SplitModel::new(d, SampleBase::numbered(2)).unwrap();
        let mu = nman::random_morphism(&mut rng(seed), &model, &model, true, 3);
        let inv = nman::invert(&mu).unwrap();
        let id = nman::GradedMorphism::identity(&model);
        prop_assert_eq!(nman::compose(&inv, &mu).unwrap(), id.clone());
        prop_assert_eq!(nman::compose(&mu, &inv).unwrap(), id);
    }

    #[test]
    fn pullback_matches_product_expansion(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=3) {
        prop_assume!(k <= n);
        let mut r = rng(seed);
        let model = SplitModel::new(vec![2; n], SampleBase::numbered(1)).unwrap();
        let mu = nman::random_morphism(&mut r, &model, &model, false, 2);
        let nu = nman::random_morphism(&mut r, &model, &model, false, 2);
        let f = nman::pullback(&nu, &nman::generator(&model, k, 0)).unwrap();
        let direct = nman::pullback(&mu, &f).unwrap();
        let expanded = oracle::pullback_by_products(&mu.fibers[0], &f.values[0], &model.ranks).unwrap();
        prop_assert_eq!(nman::trim(&direct.values[0]), expanded);
    }

    #[test]
    fn nman_text_round_trips(seed in any::<u64>(), d in dims(3)) {
        let model = SplitModel::new(d, SampleBase::numbered(2)).unwrap();
        let mu = nman::random_morphism(&mut rng(seed), &model, &model, false, 3);
        prop_assert_eq!(nman::GradedMorphism::from_text(&mu.to_text()).unwrap(), mu);
    }

    #[test]
    fn symmetric_composition_is_the_manifold_composition(seed in any::<u64>(), a in dims(4), b in dims(4), c in dims(4)) {
        let n = a.len().min(b.len()).min(c.len());
        let (a, b, c) = (SymModel::new(a[..n].to_vec()).unwrap(), SymModel::new(b[..n].to_vec()).unwrap(), SymModel::new(c[..n].to_vec()).unwrap());
        let mut r = rng(seed);
        let eta = SymMorphism::random(&mut r, &a, &b, false, 2);
        let tau = SymMorphism::random(&mut r, &b, &c, false, 2);
        let sym = compose_sym(&tau, &eta).unwrap();
        prop_assert_eq!(&sym.components, &nman::compose_local(&tau.components, &eta.components, a.dims(), c.dims()));
        prop_assert_eq!(compose_general(&expand(&tau).unwrap(), &expand(&eta).unwrap()).unwrap().trimmed(), expand(&sym).unwrap().trimmed());
    }

    #[test]
    fn symmetric_composition_is_associative(seed in any::<u64>(), d in dims(3)) {
        let m = SymModel::new(d).unwrap();
        let mut r = rng(seed);
        let (f, g, h) = (SymMorphism::random(&mut r, &m, &m, false, 2), SymMorphism::random(&mut r, &m, &m, false, 2), SymMorphism::random(&mut r, &m, &m, false, 2));
        prop_assert_eq!(
            compose_sym(&h, &compose_sym(&g, &f).unwrap()).unwrap(),
            compose_sym(&compose_sym(&h, &g).unwrap(), &f).unwrap()
        );
    }

    #[test]
    fn extraction_inverts_the_top_map(seed in any::<u64>(), d in dims(4)) {
        let m = SymModel::new(d).unwrap();
        let tau = SymMorphism::random(&mut rng(seed), &m, &m, false, 3);
        prop_assert_eq!(extract(&|x: &DecTuple| top_map(&tau, x), &m, &m).unwrap(), tau);
    }

    #[test]
    fn symmetric_inverse_undoes_the_top_map(seed in any::<u64>(), d in dims(4)) {
        let m = SymModel::new(d).unwrap();
        let mut r = rng(seed);
        let tau = SymMorphism::random(&mut r, &m, &m, true, 3);
        let inv = invert_sym(&tau).unwrap();
        let x = DecTuple::random(&mut r, &m, 5);
        prop_assert_eq!(top_map(&inv, &top_map(&tau, &x)), x);
    }

    #[test]
    fn symmorphism_text_round_trips(seed in any::<u64>(), a in dims(3)) {
        let m = SymModel::new(a).unwrap();
        let tau = SymMorphism::random(&mut rng(seed), &m, &m, false, 3);
        prop_assert_eq!(SymMorphism::from_text(&tau.to_text()).unwrap(), tau);
    }
}
