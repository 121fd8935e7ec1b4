use eavesprobe::qsim::prepare_product;
use eavesprobe::strategy::{post_interaction_state, probe_states, AliceInput, QUBIT_E, QUBIT_F};
use eavesprobe::{Basis, ProbeParams, Statevector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_state(n: usize) -> impl Strategy<Value = Statevector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
        "nonzero norm",
        |pairs| {
            let raw: Vec<Complex64> = pairs.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
            let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| {
                Statevector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect()).unwrap()
            })
        },
    )
}

fn arb_pair() -> impl Strategy<Value = (usize, usize)> {
    (0usize..3, 0usize..3).prop_filter("distinct", |(c, t)| c != t)
}

proptest! {
    #[test]
    fn gates_preserve_norm(s in arb_state(3), (c, t) in arb_pair(), q in 0usize..3) {
        let after = s.apply_cnot(c, t).unwrap().apply_hadamard(q).unwrap();
        prop_assert!((after.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cnot_is_exact_involution(s in arb_state(3), (c, t) in arb_pair()) {
        prop_assert_eq!(s.apply_cnot(c, t).unwrap().apply_cnot(c, t).unwrap(), s);
    }

    #[test]
    fn hadamard_is_involution(s in arb_state(3), q in 0usize..3) {
        let back = s.apply_hadamard(q).unwrap().apply_hadamard(q).unwrap();
        prop_assert!(back.max_deviation(&s).unwrap() < 1e-12);
    }

    #[test]
    fn gates_are_linear(
        a in arb_state(2), b in arb_state(2),
        ar in -1.0f64..1.0, ai in -1.0f64..1.0, br in -1.0f64..1.0, bi in -1.0f64..1.0,
    ) {
        let (alpha, beta) = (Complex64::new(ar, ai), Complex64::new(br, bi));
        // Compare unnormalized combinations amplitude by amplitude.
        let combine = |x: &Statevector, y: &Statevector| -> Vec<Complex64> {
            x.amplitudes().iter().zip(y.amplitudes()).map(|(p, q)| alpha * p + beta * q).collect()
        };
        let before = combine(&a, &b);
        let gated = combine(&a.apply_cnot(0, 1).unwrap(), &b.apply_cnot(0, 1).unwrap());
        // CNOT(0,1) swaps indices 2 and 3.
        let expected = [before[0], before[1], before[3], before[2]];
        for (g, e) in gated.iter().zip(expected.iter()) {
            prop_assert!((g - e).norm() < 1e-12);
        }
        let h = combine(&a.apply_hadamard(1).unwrap(), &b.apply_hadamard(1).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [
            (before[0] + before[1]) * s, (before[0] - before[1]) * s,
            (before[2] + before[3]) * s, (before[2] - before[3]) * s,
        ];
        for (g, e) in h.iter().zip(expected.iter()) {
            prop_assert!((g - e).norm() < 1e-12);
        }
    }

    #[test]
    fn marginals_are_consistent(s in arb_state(3), basis in prop_oneof![Just(Basis::Xy), Just(Basis::Uv)]) {
        let joint = s.measurement_distribution(&[1, 2], basis).unwrap();
        prop_assert!((joint.total() - 1.0).abs() < 1e-12);
        let direct = s.measurement_distribution(&[1], basis).unwrap();
        let marginal = joint.marginal(&[1]).unwrap();
        for (x, y) in direct.probs.iter().zip(&marginal.probs) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn duality_on_basis_states() {
    for (c, t) in [(0, 1), (1, 0)] {
        for idx in 0..4 {
            let s = Statevector::basis_state(2, idx).unwrap();
            let hh = |x: &Statevector| x.apply_hadamard(0).unwrap().apply_hadamard(1).unwrap();
            let lhs = hh(&hh(&s).apply_cnot(c, t).unwrap());
            let rhs = s.apply_cnot(t, c).unwrap();
            assert!(lhs.max_deviation(&rhs).unwrap() < 1e-12);
        }
    }
}

#[test]
fn product_matches_triple_loop_oracle() {
    let params = ProbeParams::from_xy_amplitudes(0.1, 0.2).unwrap();
    let (e0, f0) = probe_states(&params);
    let y = Statevector::ket(Basis::Xy, 1);
    let product = prepare_product(&[y.clone(), e0.clone(), f0.clone()]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let want = y.amplitude(i) * e0.amplitude(j) * f0.amplitude(k);
                let got = product.amplitude(i * 4 + j * 2 + k);
                assert!((want - got).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn sampled_probe_frequencies_match_distribution() {
    let params = ProbeParams::new(0.2, 0.3).unwrap();
    let state = post_interaction_state(&params, AliceInput::X).state;
    let dist = state.measurement_distribution(&[QUBIT_E, QUBIT_F], Basis::Xy).unwrap();
    let n = 100_000;
    let mut counts = [0usize; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..n {
        let out = state.sample_measurement(&[QUBIT_E, QUBIT_F], Basis::Xy, &mut rng).unwrap();
        counts[(out.bits[0] * 2 + out.bits[1]) as usize] += 1;
        assert!(out.probability > 0.0);
        assert_eq!(out.collapsed.as_ref().unwrap().num_qubits(), 1);
    }
    for (c, p) in counts.iter().zip(&dist.probs) {
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let freq = *c as f64 / n as f64;
        assert!((freq - p).abs() <= 4.0 * sigma + 1e-12, "{freq} vs {p}");
    }
}
