use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use loccw_core::asymmetry::{
    constraint_residual, first_move_report, orthogonality_constraints, BipartiteStates, Party,
};
use loccw_core::constructions::{
    build_l_v, factorization_params, gamma_d_set, gamma_e_set, lp_sigma_labels, named_example, shifted_product_set,
    xi_set, ProductStateSet, XiVariant,
};
use loccw_core::cyclotomic::CycNumber;
use loccw_core::detector::{asymmetric_bound, build_mixed_detector, compress_to_00_11, general_detector_lambda1};
use loccw_core::linalg::{build_unitary, hermitian_eigen, mes_vector, random, weyl_matrix, ComplexMatrix, StateVector};
use loccw_core::weyl::{
    check_orthogonality, criterion_verdict, difference_set, gamma, kernel_set, MesSet, PhasedWeyl, WeylLabel,
    WeylStructure,
};
use loccw_core::witness::{contradiction_ledger, rank_obstruction, WitnessOperators};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_label(rng: &mut ChaCha8Rng, s: &WeylStructure) -> WeylLabel {
    let pairs: Vec<(i64, i64)> =
        s.factors().iter().map(|&d| (rng.gen_range(0..d as i64), rng.gen_range(0..d as i64))).collect();
    s.label(&pairs).unwrap()
}

fn random_structure(rng: &mut ChaCha8Rng) -> WeylStructure {
    let n = rng.gen_range(1..=2);
    WeylStructure::new((0..n).map(|_| rng.gen_range(2..=4)).collect()).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, s: &WeylStructure, size: usize) -> MesSet {
    let mut all = s.all_labels();
    all.shuffle(rng);
    MesSet::from_labels(s.clone(), all.into_iter().take(size).collect()).unwrap()
}

fn cyc_strategy() -> impl Strategy<Value = (u32, Vec<i64>, Vec<i64>)> {
    (2u32..=24).prop_flat_map(|d| {
        (Just(d), prop::collection::vec(-10i64..=10, d as usize), prop::collection::vec(-10i64..=10, d as usize))
    })
}

fn product_states(seed: u64, d: usize) -> BipartiteStates {
    let mut r = rng(seed);
    let set = shifted_product_set(d).unwrap();
    // a random global phase on each member
    let pairs = set
        .pairs
        .iter()
        .map(|(a, b)| {
            let phase = Complex64::from_polar(1.0, r.gen_range(0.0..std::f64::consts::TAU));
            (a.scale(phase), b.clone())
        })
        .collect();
    BipartiteStates::Product(ProductStateSet::new(d, pairs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cyclotomic_multiplication_embeds((d, a, b) in cyc_strategy()) {
        let x = CycNumber::from_dense_integers(d, &a);
        let y = CycNumber::from_dense_integers(d, &b);
        let prod = x.checked_mul(&y).unwrap().to_complex();
        prop_assert!((prod - x.to_complex() * y.to_complex()).norm() < 1e-9);
    }

    #[test]
    fn cyclotomic_zero_test_matches_embedding((d, a, _b) in cyc_strategy()) {
        let x = CycNumber::from_dense_integers(d, &a);
        let z = x.to_complex().norm();
        if x.is_zero() {
            prop_assert!(z < 1e-9);
        } else {
            prop_assert!(z > 1e-9);
        }
        let diff = x.checked_sub(&x).unwrap();
        prop_assert!(diff.is_zero());
    }

    #[test]
    fn weyl_multiplication_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_structure(&mut r);
        let [a, b, c] = [0, 1, 2].map(|_| PhasedWeyl {
            label: random_label(&mut r, &s),
            phase_exp: r.gen_range(0..s.phase_order()),
        });
        let left = s.mul(&s.mul(&a, &b).unwrap(), &c).unwrap();
        let right = s.mul(&a, &s.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let id = s.mul(&a, &s.dagger(&a).unwrap()).unwrap();
        prop_assert!(id.label.is_identity());
        prop_assert_eq!(id.phase_exp, 0);
    }

    #[test]
    fn weyl_multiplication_matches_matrices(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_structure(&mut r);
        let a = PhasedWeyl::new(random_label(&mut r, &s));
        let b = PhasedWeyl::new(random_label(&mut r, &s));
        let ab = s.mul(&a, &b).unwrap();
        let dense = &build_unitary(&a.label, &s).unwrap() * &build_unitary(&b.label, &s).unwrap();
        let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * ab.phase_exp as f64 / s.phase_order() as f64);
        let expect = build_unitary(&ab.label, &s).unwrap().scale(phase);
        prop_assert!((&dense - &expect).max_abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gamma_matches_matrix_traces(seed in any::<u64>(), d in 2u32..=9) {
        let mut r = rng(seed);
        let s = WeylStructure::single(d).unwrap();
        let size = r.gen_range(1..=d as usize);
        let set = random_set(&mut r, &s, size);
        let us = set.unitaries();
        for u_label in s.all_labels() {
            let exact = gamma(&set, &u_label).unwrap().to_complex();
            let u = build_unitary(&u_label, &s).unwrap();
            let dense: Complex64 =
                us.iter().map(|l| (&(&(l * &u) * &l.dagger()) * &u.dagger()).trace()).sum::<Complex64>() / d as f64;
            prop_assert!((exact - dense).norm() < 1e-9, "{u_label}: {exact} vs {dense}");
        }
        let at_identity = gamma(&set, &s.identity()).unwrap();
        prop_assert_eq!(at_identity.as_rational().unwrap(), num_rational::BigRational::from_integer(size.into()));
    }

    #[test]
    fn kernel_and_difference_are_translation_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_structure(&mut r);
        let size = r.gen_range(1..=s.total_dim());
        let set = random_set(&mut r, &s, size);
        let shift = random_label(&mut r, &s);
        let (_, labels) = set.labels().unwrap();
        let moved = MesSet::from_labels(s.clone(), labels.iter().map(|l| s.add(&shift, l)).collect()).unwrap();
        prop_assert_eq!(kernel_set(&set).unwrap(), kernel_set(&moved).unwrap());
        prop_assert_eq!(difference_set(&set).unwrap(), difference_set(&moved).unwrap());
    }

    #[test]
    fn verdict_ignores_member_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_structure(&mut r);
        let set = random_set(&mut r, &s, s.total_dim());
        let mut labels = set.labels().unwrap().1.to_vec();
        labels.shuffle(&mut r);
        let shuffled = MesSet::from_labels(s.clone(), labels).unwrap();
        let (a, b) = (criterion_verdict(&set).unwrap(), criterion_verdict(&shuffled).unwrap());
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.kernel, b.kernel);
        prop_assert_eq!(a.difference, b.difference);
    }

    #[test]
    fn weyl_basis_expansion_reconstructs(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let m = random::hermitian(&mut r, d);
        let mut rebuilt = ComplexMatrix::zeros(d, d);
        for s in 0..d as u32 {
            for t in 0..d as u32 {
                let u = weyl_matrix(d, s, t);
                rebuilt = &rebuilt + &u.dagger().scale((&m * &u).trace() / d as f64);
            }
        }
        prop_assert!((&rebuilt - &m).max_abs() < 1e-9);
    }

    #[test]
    fn eigenvalues_shift_with_identity(seed in any::<u64>(), n in 1usize..=12, c in -5.0f64..5.0) {
        let mut r = rng(seed);
        let a = random::hermitian(&mut r, n);
        let shifted = &a + &ComplexMatrix::identity(n).scale_real(c);
        let (ea, eb) = (hermitian_eigen(&a).unwrap(), hermitian_eigen(&shifted).unwrap());
        for (x, y) in ea.values.iter().zip(&eb.values) {
            prop_assert!((x + c - y).abs() < 1e-9);
        }
    }

    #[test]
    fn mes_vectors_have_flat_marginals(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let u = random::unitary(&mut r, d);
        let v = mes_vector(&u).unwrap();
        let rho = v.projector().partial_trace(&[d, d], 1).unwrap();
        for e in hermitian_eigen(&rho).unwrap().values {
            prop_assert!((e - 1.0 / d as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn general_detector_is_capped(seed in any::<u64>(), d in 3usize..=6) {
        let mut r = rng(seed);
        let s = WeylStructure::single(d as u32).unwrap();
        let set = random_set(&mut r, &s, d);
        let aux = random_set(&mut r, &s, d);
        let raw: Vec<f64> = (0..d).map(|_| r.gen_range(1e-3..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let l1 = general_detector_lambda1(&set, &w, &aux).unwrap();
        prop_assert!(l1 <= 1.0 / d as f64 + 1e-9);
    }

    #[test]
    fn asymmetric_bound_is_sound(seed in any::<u64>(), d in 3usize..=6) {
        let mut r = rng(seed);
        let set = if r.gen_bool(0.5) { gamma_d_set(d.max(4)).unwrap() } else {
            let s = WeylStructure::single(d as u32).unwrap();
            random_set(&mut r, &s, d)
        };
        let n = set.dim();
        let rank = r.gen_range(1..=n);
        let m = random::psd(&mut r, n, rank);
        let res = asymmetric_bound(&m, &set).unwrap();
        prop_assert!(res.lambda1_numeric >= res.bound - 1e-9);
    }

    #[test]
    fn first_move_identity_is_feasible_and_phase_invariant(seed in any::<u64>(), d in 3usize..=6) {
        let plain = BipartiteStates::Product(shifted_product_set(d).unwrap());
        let phased = product_states(seed, d);
        for party in [Party::Alice, Party::Bob] {
            let c = orthogonality_constraints(&phased, party).unwrap();
            prop_assert!(constraint_residual(&c, &ComplexMatrix::identity(d)) < 1e-12);
            let a = first_move_report(&plain, party).unwrap().solution_dim;
            let b = first_move_report(&phased, party).unwrap().solution_dim;
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn first_move_party_swap_symmetry(seed in any::<u64>(), d in 3usize..=5) {
        let mut r = rng(seed);
        let s = WeylStructure::single(d as u32).unwrap();
        let size = r.gen_range(2..=d);
        let set = random_set(&mut r, &s, size);
        // swapping tensor factors of (U ⊗ I)|Φ⟩ gives (U^T ⊗ I)|Φ⟩
        let swapped = MesSet::from_matrices(set.unitaries().iter().map(|u| u.transpose()).collect(), 1e-10).unwrap();
        let a = first_move_report(&BipartiteStates::Mes(set), Party::Alice).unwrap();
        let b = first_move_report(&BipartiteStates::Mes(swapped), Party::Bob).unwrap();
        prop_assert_eq!(a.solution_dim, b.solution_dim);
    }

    #[test]
    fn first_move_witness_preserves_orthogonality(seed in any::<u64>(), d in 3usize..=5) {
        let mut r = rng(seed);
        let s = WeylStructure::single(d as u32).unwrap();
        let size = r.gen_range(2..=d);
        let states = BipartiteStates::Mes(random_set(&mut r, &s, size));
        let rep = first_move_report(&states, Party::Alice).unwrap();
        if let Some(w) = rep.witness {
            prop_assert!(w.max_gram_offdiag < 1e-9);
            prop_assert!(hermitian_eigen(&w.operator).unwrap().min() >= -1e-12);
        }
    }

    #[test]
    fn witness_two_sided_evaluations_agree(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let ops = WitnessOperators::new(d).unwrap();
        let p = ops.params.p;
        let q = ops.params.q;
        let gens: Vec<(u32, u32)> = ops.h_of.iter().map(|w| w.v).collect();
        let v = gens[r.gen_range(0..gens.len())];
        let x = random::state(&mut r, 2 * p);
        let y = random::state(&mut r, 2 * p);
        let single = ops.product_value(&x, &y, v).unwrap();
        prop_assert!(single.gap() < 1e-10);
        prop_assert!(single.operator >= -1e-12);
        let z = random::state(&mut r, 2 * p * q);
        let w = random::state(&mut r, 2 * p * q);
        let block = ops.block_product_value(&z, &w, v).unwrap();
        prop_assert!(block.gap() < 1e-10);
        prop_assert!(block.operator >= -1e-12);
    }
}

#[test]
fn cyclotomic_polynomials_rebuild_x_pow_d_minus_one() {
    use loccw_core::cyclotomic::cyclotomic_polynomial;
    fn mul(a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    for d in 1..=64u32 {
        let mut acc = vec![1i64];
        for k in (1..=d).filter(|k| d % k == 0) {
            acc = mul(&acc, &cyclotomic_polynomial(k).unwrap());
        }
        let mut expect = vec![0i64; d as usize + 1];
        expect[0] = -1;
        expect[d as usize] = 1;
        assert_eq!(acc, expect, "d={d}");
    }
}

#[test]
fn factories_are_orthogonal() {
    for d in 4..=9 {
        assert!(check_orthogonality(&gamma_d_set(d).unwrap(), 1e-12).orthogonal);
    }
    for d in (4..=10).step_by(2) {
        assert!(check_orthogonality(&gamma_e_set(d).unwrap(), 1e-12).orthogonal);
    }
    for name in ["quintuple5", "quadrupleBGK", "pauliL4"] {
        assert!(check_orthogonality(&named_example(name).unwrap(), 1e-12).orthogonal);
    }
    for d in 3..=8 {
        assert!(shifted_product_set(d).unwrap().extended().is_orthogonal(1e-12));
    }
    for d in 2..=8 {
        for variant in [XiVariant::ExtraOnce, XiVariant::FullProduct] {
            assert!(check_orthogonality(&xi_set(d, variant).unwrap().members, 1e-12).orthogonal, "d={d}");
        }
    }
}

#[test]
fn xi_sizes_for_both_readings() {
    for d in 2..=12 {
        let f = factorization_params(d).unwrap();
        assert_eq!(xi_set(d, XiVariant::ExtraOnce).unwrap().len(), 2 * d - f.q + f.sigma, "d={d}");
        assert_eq!(xi_set(d, XiVariant::FullProduct).unwrap().len(), f.q * (2 * f.p - 1 + f.sigma), "d={d}");
    }
}

#[test]
fn product_members_have_rank_one_marginals() {
    for d in 3..=7 {
        for (a, b) in shifted_product_set(d).unwrap().extended().pairs {
            let v: StateVector = a.kron(&b);
            let rho = v.projector().partial_trace(&[d, d], 1).unwrap();
            let eig = hermitian_eigen(&rho).unwrap();
            let nonzero = eig.values.iter().filter(|e| e.abs() > 1e-12).count();
            assert_eq!(nonzero, 1);
        }
    }
}

#[test]
fn mixed_detector_normalized_and_dominates_block() {
    for d in 3..=10 {
        let det = build_mixed_detector(d).unwrap();
        assert!((det.norm_sq() - 1.0).abs() < 1e-10);
        let m = det.m_ac();
        let block = compress_to_00_11(&m, d);
        let block_top = hermitian_eigen(&block).unwrap().max();
        assert!(det.lambda1().unwrap() >= block_top - 1e-12);
    }
}

#[test]
fn l_v_is_antisymmetric_for_every_generator() {
    for p in [2usize, 3, 5, 7] {
        for sigma in 0..=1 {
            for (s, t) in lp_sigma_labels(p, sigma) {
                let l = build_l_v(&weyl_matrix(p, s, t)).unwrap();
                assert!((&l.transpose() + &l).max_abs() < 1e-12, "p={p} ({s},{t})");
            }
        }
    }
}

#[test]
fn trace_ledger_for_small_dimensions() {
    for d in 2..=12 {
        let l = contradiction_ledger(d).unwrap();
        assert_eq!(l.trace_h_2d, (2 * d - l.q) as i64, "d={d}");
        assert_eq!(l.k_sigma_minus_trace, l.sigma as i64, "d={d}");
        assert!(l.consistent);
    }
}

#[test]
fn rank_obstruction_for_odd_primes() {
    for p in [3usize, 5, 7, 11, 13, 17, 19, 23] {
        let t = rank_obstruction(p).unwrap();
        assert!(t.contradiction, "p={p}");
        assert_eq!((4 * t.contradiction_index + 1) % p, 0, "p={p}");
        let offsets: BTreeSet<usize> = t.facts.iter().map(|f| f.offset).collect();
        assert!(offsets.iter().all(|&o| o < p));
    }
}
