use std::collections::BTreeMap;

use circsym::algorithms::QuboInstance;
use circsym::gates::{gate_library, hadamard, rx, rzz};
use circsym::linalg::ONE;
use circsym::random::{random_channel, random_density, random_pure_state, random_unitary};
use circsym::sts::{instrument, CheckMode};
use circsym::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let data = (0..d * d).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    ComplexMatrix::from_vec(d, d, data).unwrap()
}

fn kind_strategy() -> impl Strategy<Value = ChannelKind> {
    prop_oneof![
        Just(ChannelKind::BitFlip),
        Just(ChannelKind::PhaseFlip),
        Just(ChannelKind::YError),
        Just(ChannelKind::Depolarizing),
        Just(ChannelKind::None),
    ]
}

const NAMED: [(&str, usize); 12] = [
    ("h", 0),
    ("x", 0),
    ("y", 0),
    ("z", 0),
    ("zx", 0),
    ("cx", 0),
    ("cz", 0),
    ("rx", 1),
    ("rz", 1),
    ("rxx", 1),
    ("rzz", 1),
    ("p", 1),
];

/// Random circuit of library gates on `n` qubits.
fn random_circuit(r: &mut ChaCha8Rng, n: usize, moments: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for _ in 0..moments {
        let (name, np) = NAMED[r.gen_range(0..NAMED.len())];
        let params: Vec<f64> = (0..np).map(|_| r.gen_range(-3.0..3.0)).collect();
        let g = gate_library(name, &params).unwrap();
        let g = if r.gen_bool(0.2) { controlled(&g, Polarity::OnOne) } else { g };
        if g.arity > n {
            continue;
        }
        let mut qs: Vec<usize> = (0..n).collect();
        for i in 0..g.arity {
            let j = r.gen_range(i..n);
            qs.swap(i, j);
        }
        qs.truncate(g.arity);
        c.push(g, &qs).unwrap();
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..3) {
        let mut r = rng(seed);
        let (a, b, c) = (random_matrix(&mut r, da), random_matrix(&mut r, db), random_matrix(&mut r, dc));
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn dagger_identities(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (a, b) = (random_matrix(&mut r, d), random_matrix(&mut r, d));
        prop_assert!(a.dagger().dagger().max_abs_diff(&a) < 1e-12);
        let ab = a.matmul(&b).unwrap();
        prop_assert!(ab.dagger().max_abs_diff(&b.dagger().matmul(&a.dagger()).unwrap()) < 1e-12);
    }

    #[test]
    fn commutator_plus_anticommutator(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (a, b) = (random_matrix(&mut r, d), random_matrix(&mut r, d));
        let sum = &commutator(&a, &b).unwrap() + &anticommutator(&a, &b).unwrap();
        let twice = a.matmul(&b).unwrap().scale(C64::new(2.0, 0.0));
        prop_assert!(sum.max_abs_diff(&twice) < 1e-12);
    }

    #[test]
    fn partial_trace_keeps_trace(seed in any::<u64>(), n in 1usize..5, mask in 0u32..16) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, n);
        let keep: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        let red = partial_trace(&rho, &keep).unwrap();
        prop_assert!((red.trace() - rho.trace()).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (random_density(&mut r, 1), random_density(&mut r, 2));
        // b on qubits 1, 2 and a on qubit 0
        let joint = a.tensor(&b);
        prop_assert!(partial_trace(&joint, &[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-12);
        prop_assert!(partial_trace(&joint, &[1, 2]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn purity_one_only_for_pure(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let pure = DensityMatrix::from_pure(&random_pure_state(&mut r, n)).unwrap();
        prop_assert!((purity(&pure) - 1.0).abs() < 1e-10);
        let mixed = random_density(&mut r, n);
        prop_assert!(purity(&mixed) < 1.0 - 1e-6);
    }

    #[test]
    fn library_gates_are_unitary(theta in -10.0f64..10.0) {
        for (name, np) in NAMED {
            let params = vec![theta; np];
            let g = gate_library(name, &params).unwrap();
            prop_assert!(g.matrix.is_unitary(1e-12), "{name}");
            prop_assert!(controlled(&g, Polarity::OnZero).matrix.is_unitary(1e-12));
        }
    }

    #[test]
    fn standard_channels_trace_preserving(kind in kind_strategy(), p in 0.0f64..=1.0) {
        let ch = KrausChannel::standard(kind, p).unwrap();
        prop_assert!(ch.is_trace_preserving(1e-12));
    }

    #[test]
    fn channels_keep_hermiticity_and_trace(seed in any::<u64>(), n in 1usize..4, kraus in 1usize..4) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, n);
        let ch = random_channel(&mut r, 1, kraus);
        let q = r.gen_range(0..n);
        let out = apply_channel(&rho, &ch, &[q]).unwrap();
        prop_assert!(out.matrix().is_hermitian(1e-10));
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bit_flip_commutes_with_rx(seed in any::<u64>(), theta in -7.0f64..7.0, p in 0.0f64..0.5) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, 2);
        let ch = KrausChannel::standard(ChannelKind::BitFlip, p).unwrap();
        let g = rx(theta);
        let a = apply_unitary(&apply_channel(&rho, &ch, &[1]).unwrap(), &g, &[1]).unwrap();
        let b = apply_channel(&apply_unitary(&rho, &g, &[1]).unwrap(), &ch, &[1]).unwrap();
        prop_assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn simulate_is_trace_preserving(seed in any::<u64>(), n in 1usize..6, m in 1usize..9, kind in kind_strategy()) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, n, m);
        let noise = NoiseSpec::new(kind, r.gen_range(0.0..0.1), r.gen_range(0.0..0.2)).unwrap();
        let (rho, w) = c.simulate(&noise).unwrap();
        prop_assert!((w - 1.0).abs() < 1e-10);
        prop_assert!(rho.validate().is_ok());
    }

    #[test]
    fn noiseless_library_circuits_stay_pure(seed in any::<u64>(), n in 1usize..6, m in 1usize..9) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, n, m);
        let out = c.run(&NoiseSpec::noiseless()).unwrap();
        prop_assert!((out.purity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn postselection_outcomes_sum_to_one(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, n);
        let q = r.gen_range(0..n);
        let total: f64 = (0..2u8)
            .map(|o| circsym::circuit::post_select(&rho, &BTreeMap::from([(q, o)])).unwrap().p_pass)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn channel_of_matches_simulate(seed in any::<u64>(), n in 1usize..4, m in 1usize..6, kind in kind_strategy()) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, n, m);
        let noise = NoiseSpec::new(kind, r.gen_range(0.0..0.1), r.gen_range(0.0..0.2)).unwrap();
        let ch = c.channel_of(&noise).unwrap();
        let d = 1usize << n;
        for i in 0..d {
            for j in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e.set(i, j, ONE);
                // matrix units are not states, so compare through linearity on
                // the Hermitian parts
                let herm = (&e + &e.dagger()).scale(C64::new(0.5, 0.0));
                let shifted = &herm + &ComplexMatrix::identity(d).scale(C64::new(2.0, 0.0));
                let tr = shifted.trace();
                let rho = DensityMatrix::new(shifted.scale(C64::new(1.0 / tr.re, 0.0))).unwrap();
                let (sim, _) = c.simulate_from(&rho, &noise).unwrap();
                prop_assert!(sim.matrix().max_abs_diff(&ch.apply_to(rho.matrix())) < 1e-10);
            }
        }
    }

    #[test]
    fn random_unitaries_are_unitary(seed in any::<u64>(), d in 1usize..9) {
        let mut r = rng(seed);
        prop_assert!(random_unitary(&mut r, d).is_unitary(1e-10));
    }

    #[test]
    fn instrumented_x_diagonal_blocks_are_transparent(seed in any::<u64>(), n in 1usize..5, m in 1usize..6) {
        // products of X rotations and XX rotations commute with X on every qubit
        let mut r = rng(seed);
        let mut c = Circuit::new(n, 0);
        c.push_moment((0..n).map(|q| Placement::new(hadamard(), vec![q])).collect()).unwrap();
        let start = c.len();
        for _ in 0..m {
            if n > 1 && r.gen_bool(0.5) {
                let a = r.gen_range(0..n);
                let b = (a + r.gen_range(1..n)) % n;
                c.push(gate_library("rxx", &[r.gen_range(-3.0..3.0)]).unwrap(), &[a, b]).unwrap();
            } else {
                c.push(rx(r.gen_range(-3.0..3.0)), &[r.gen_range(0..n)]).unwrap();
            }
        }
        let u = PauliString::uniform(Pauli::X, 0..n);
        let s = StsDescriptor::new([(u.clone(), start), (u, c.len())]);
        let inst = instrument(&c, &s, CheckMode::SingleAncilla).unwrap();
        let plain = c.run(&NoiseSpec::noiseless()).unwrap();
        let checked = inst.run(&NoiseSpec::noiseless()).unwrap();
        prop_assert!((checked.p_pass - 1.0).abs() < 1e-10);
        prop_assert!(checked.rho_data.matrix().max_abs_diff(plain.rho_data.matrix()) < 1e-10);
    }

    #[test]
    fn even_phase_part_commutes_with_global_paulis(seed in any::<u64>(), n in 2usize..6, gamma in -3.0f64..3.0) {
        let mut r = rng(seed);
        let q = QuboInstance::random(&mut r, n);
        let (even, _, _) = circsym::algorithms::qaoa_hamiltonians(&q).unwrap();
        let u = even.exp_i_hermitian(-gamma).unwrap();
        for p in [Pauli::X, Pauli::Z] {
            let g = PauliString::uniform(p, 0..n).to_matrix(n).unwrap();
            prop_assert!(commutator(&u, &g).unwrap().max_abs() < 1e-10);
        }
    }
}

#[test]
fn pauli_parity_exhaustive() {
    let all = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];
    for n in 1..=4usize {
        let xs = PauliString::uniform(Pauli::X, 0..n);
        let xm = xs.to_matrix(n).unwrap();
        for code in 0..4usize.pow(n as u32) {
            let factors = (0..n).filter_map(|q| all[code / 4usize.pow(q as u32) % 4].map(|p| (q, p)));
            let p = PauliString::from_factors(Phase::PLUS_ONE, factors);
            let even = p.z_count() % 2 == 0;
            assert_eq!(p.commutes_with(&xs), even, "{p}");
            let pm = p.to_matrix(n).unwrap();
            assert_eq!(commutator(&pm, &xm).unwrap().max_abs() < 1e-12, even, "{p}");
        }
    }
}

#[test]
fn rzz_noise_is_symmetric_in_qubit_order() {
    let noise = NoiseSpec::new(ChannelKind::Depolarizing, 0.01, 0.02).unwrap();
    let mut a = Circuit::new(2, 0);
    a.push(hadamard(), &[0]).unwrap();
    a.push(rzz(0.7), &[0, 1]).unwrap();
    let mut b = Circuit::new(2, 0);
    b.push(hadamard(), &[0]).unwrap();
    b.push(rzz(0.7), &[1, 0]).unwrap();
    let (ra, _) = a.simulate(&noise).unwrap();
    let (rb, _) = b.simulate(&noise).unwrap();
    assert!(ra.matrix().max_abs_diff(rb.matrix()) < 1e-12);
}
