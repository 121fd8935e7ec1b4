//! Closed-form mathematics of the two-CNOT probe.
//!
//! Eve's probe is two qubits `e` and `f` prepared as
//!
//! ```text
//! |e0> = √(1-Δuv)|x> + √Δuv|y>  =  √(1-Duv)|u> + √Duv|v>
//! |f0> = √(1-Dxy)|x> + √Dxy|y>  =  √(1-Δxy)|u> + √Δxy|v>
//! ```
//!
//! with `Δ = ½ - √(D(1-D))`. The register `(a, e, f)` then passes through
//! CNOT(a → e) followed by CNOT(f → a). In the xy basis `f` decides whether
//! Bob's bit is flipped and `e` carries a copy of Alice's bit flipped with
//! probability Δuv; in the uv basis the roles of the two probe qubits swap.
//!
//! Information is measured in nats throughout.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{prepare_product, Basis, Statevector};

/// Register positions.
pub const QUBIT_A: usize = 0;
pub const QUBIT_E: usize = 1;
pub const QUBIT_F: usize = 2;

/// Relative gap below which two posterior weights count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

fn check_unit_interval(name: &'static str, value: f64, hi: f64) -> Result<()> {
    if !(0.0..=hi).contains(&value) {
        let domain = if hi == 0.5 { "[0, 1/2]" } else { "[0, 1]" };
        return Err(Error::Domain {
            name,
            value,
            domain,
        });
    }
    Ok(())
}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Quarter-circle map `Δ = ½ - √(D(1-D))` on `[0, ½]`. It is its own inverse,
/// so the same function turns Δ back into D.
pub fn delta_from_d(d: f64) -> Result<f64> {
    check_unit_interval("d", d, 0.5)?;
    // Same value as ½ - √(d(1-d)) without the cancellation near d = ½.
    let gap = 0.5 - d;
    Ok((gap * gap / (0.5 + (d * (1.0 - d)).sqrt())).clamp(0.0, 0.5))
}

/// Alias of [`delta_from_d`] read in the other direction.
pub fn d_from_delta(delta: f64) -> Result<f64> {
    check_unit_interval("delta", delta, 0.5)?;
    delta_from_d(delta)
}

/// `φ(z) = (1+z) ln(1+z) + (1-z) ln(1-z)` on `[0, 1]`, with `φ(1) = 2 ln 2`.
pub fn phi(z: f64) -> Result<f64> {
    check_unit_interval("z", z, 1.0)?;
    if z == 1.0 {
        return Ok(2.0 * LN_2);
    }
    Ok((1.0 + z) * z.ln_1p() + (1.0 - z) * (-z).ln_1p())
}

/// Upper bound on Eve's information in one basis given the error rate she
/// causes in the conjugate basis: `½ φ(2√(D(1-D)))`.
pub fn info_bound(d_conjugate: f64) -> Result<f64> {
    check_unit_interval("d_conjugate", d_conjugate, 0.5)?;
    let z = (2.0 * (d_conjugate * (1.0 - d_conjugate)).sqrt()).min(1.0);
    Ok(0.5 * phi(z)?)
}

/// Mutual information of a binary symmetric channel with uniform input.
pub fn bsc_mutual_information(flip_prob: f64) -> Result<f64> {
    check_unit_interval("flip_prob", flip_prob, 1.0)?;
    Ok((LN_2 + xlnx(flip_prob) + xlnx(1.0 - flip_prob)).max(0.0))
}

/// Mutual information of a 2×2 joint table (counts or probabilities).
pub fn joint_mutual_information(joint: &[[f64; 2]; 2]) -> f64 {
    let total: f64 = joint.iter().flatten().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let row = [
        (joint[0][0] + joint[0][1]) / total,
        (joint[1][0] + joint[1][1]) / total,
    ];
    let col = [
        (joint[0][0] + joint[1][0]) / total,
        (joint[0][1] + joint[1][1]) / total,
    ];
    let mut mi = 0.0;
    for (a, r) in joint.iter().enumerate() {
        for (b, &count) in r.iter().enumerate() {
            let p = count / total;
            if p > 0.0 {
                mi += p * (p / (row[a] * col[b])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Eve's disturbance budget. Only the two error rates are stored; the
/// flip probabilities Δ are always derived from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    d_xy: f64,
    d_uv: f64,
}

impl ProbeParams {
    pub fn new(d_xy: f64, d_uv: f64) -> Result<Self> {
        check_unit_interval("d_xy", d_xy, 0.5)?;
        check_unit_interval("d_uv", d_uv, 0.5)?;
        Ok(Self { d_xy, d_uv })
    }

    /// Parameters from the two quantities that fix the initial xy amplitudes
    /// of the probe: `D_xy` (for `f`) and `Δ_uv` (for `e`).
    pub fn from_xy_amplitudes(d_xy: f64, delta_uv: f64) -> Result<Self> {
        Self::new(d_xy, d_from_delta(delta_uv)?)
    }

    pub fn d_xy(&self) -> f64 {
        self.d_xy
    }

    pub fn d_uv(&self) -> f64 {
        self.d_uv
    }

    pub fn delta_xy(&self) -> f64 {
        delta_from_d(self.d_xy).expect("validated on construction")
    }

    pub fn delta_uv(&self) -> f64 {
        delta_from_d(self.d_uv).expect("validated on construction")
    }

    /// Alice→Bob error rate Eve targets in `basis`.
    pub fn d(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Xy => self.d_xy,
            Basis::Uv => self.d_uv,
        }
    }

    /// Alice→Eve flip probability in `basis`.
    pub fn delta(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Xy => self.delta_uv(),
            Basis::Uv => self.delta_xy(),
        }
    }
}

/// One of Alice's four BB84 signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AliceInput {
    X,
    Y,
    U,
    V,
}

impl AliceInput {
    pub const ALL: [AliceInput; 4] = [AliceInput::X, AliceInput::Y, AliceInput::U, AliceInput::V];

    pub fn new(basis: Basis, bit: u8) -> Self {
        match (basis, bit & 1) {
            (Basis::Xy, 0) => AliceInput::X,
            (Basis::Xy, _) => AliceInput::Y,
            (Basis::Uv, 0) => AliceInput::U,
            (Basis::Uv, _) => AliceInput::V,
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            AliceInput::X | AliceInput::Y => Basis::Xy,
            AliceInput::U | AliceInput::V => Basis::Uv,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            AliceInput::X | AliceInput::U => 0,
            AliceInput::Y | AliceInput::V => 1,
        }
    }

    pub fn ket(self) -> Statevector {
        Statevector::ket(self.basis(), self.bit())
    }
}

/// Initial probe qubits `(e0, f0)`.
pub fn probe_states(params: &ProbeParams) -> (Statevector, Statevector) {
    let amp = |p: f64| {
        Statevector::from_real(&[(1.0 - p).sqrt(), p.sqrt()]).expect("unit norm by construction")
    };
    (amp(params.delta_uv()), amp(params.d_xy()))
}

/// `|a> ⊗ |e0> ⊗ |f0>` for a given signal qubit.
pub fn initial_state(params: &ProbeParams, alice: &Statevector) -> Result<Statevector> {
    let (e0, f0) = probe_states(params);
    prepare_product(&[alice.clone(), e0, f0])
}

/// The two-gate circuit: CNOT(a → e) then CNOT(f → a), xy basis.
pub fn eve_circuit(state: &Statevector) -> Result<Statevector> {
    if state.num_qubits() != 3 {
        return Err(Error::InvalidArgument(format!(
            "the probe circuit acts on 3 qubits, got {}",
            state.num_qubits()
        )));
    }
    state
        .apply_cnot(QUBIT_A, QUBIT_E)?
        .apply_cnot(QUBIT_F, QUBIT_A)
}

/// Register state right after the circuit for a given signal.
#[derive(Clone, Debug, PartialEq)]
pub struct PostInteractionState {
    pub alice_input: AliceInput,
    pub state: Statevector,
}

pub fn post_interaction_state(params: &ProbeParams, input: AliceInput) -> PostInteractionState {
    let initial = initial_state(params, &input.ket()).expect("normalized factors");
    PostInteractionState {
        alice_input: input,
        state: eve_circuit(&initial).expect("three-qubit register"),
    }
}

/// `|X>, |Y>, |U>, |V>` for the given probe.
pub fn post_interaction_states(params: &ProbeParams) -> BTreeMap<AliceInput, PostInteractionState> {
    AliceInput::ALL
        .iter()
        .map(|&input| (input, post_interaction_state(params, input)))
        .collect()
}

/// Eve's fixed estimate from her two measured probe bits: `e` in xy, `e ⊕ f`
/// in uv (the `e` outcome tells her whether `a` was flipped before it was
/// copied onto `f`).
pub fn fixed_estimate(basis: Basis, e: u8, f: u8) -> u8 {
    match basis {
        Basis::Xy => e,
        Basis::Uv => e ^ f,
    }
}

/// Exact per-basis statistics of the Alice→Bob and Alice→Eve channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelAnalysis {
    pub basis: Basis,
    /// Probability Bob's bit differs from Alice's when both use `basis`.
    pub error_rate: f64,
    /// `joint[alice_bit][eve_estimate]`.
    pub joint: [[f64; 2]; 2],
    pub mutual_information_nats: f64,
    /// Information bound set by the conjugate-basis error rate.
    pub bound_nats: f64,
}

pub fn analyze_channel(params: &ProbeParams, basis: Basis) -> ChannelAnalysis {
    let mut error_rate = 0.0;
    let mut joint = [[0.0; 2]; 2];
    for bit in 0..2u8 {
        let post = post_interaction_state(params, AliceInput::new(basis, bit)).state;
        let bob = post
            .measurement_distribution(&[QUBIT_A], basis)
            .expect("valid subset");
        error_rate += 0.5 * bob.probs[(1 - bit) as usize];
        let eve = post
            .measurement_distribution(&[QUBIT_E, QUBIT_F], basis)
            .expect("valid subset");
        for (outcome, p) in eve.probs.iter().enumerate() {
            let bits = eve.bits_of(outcome);
            let est = fixed_estimate(basis, bits[0], bits[1]);
            joint[bit as usize][est as usize] += 0.5 * p;
        }
    }
    ChannelAnalysis {
        basis,
        error_rate,
        joint,
        mutual_information_nats: joint_mutual_information(&joint),
        bound_nats: info_bound(params.d(basis.conjugate())).expect("validated params"),
    }
}

/// Maximum-a-posteriori decision for one of Eve's outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapDecision {
    Bit(u8),
    /// Both of Alice's bits are equally likely.
    Tie,
    /// The outcome cannot occur for either bit.
    Unreachable,
}

/// Brute-force MAP estimator: for each `(e, f)` outcome in `basis`, the
/// Alice bit with the larger posterior. Indexed `[e][f]`.
pub fn map_estimator(params: &ProbeParams, basis: Basis) -> [[MapDecision; 2]; 2] {
    let likelihood: Vec<Vec<f64>> = (0..2u8)
        .map(|bit| {
            post_interaction_state(params, AliceInput::new(basis, bit))
                .state
                .measurement_distribution(&[QUBIT_E, QUBIT_F], basis)
                .expect("valid subset")
                .probs
        })
        .collect();
    let mut table = [[MapDecision::Tie; 2]; 2];
    for e in 0..2usize {
        for f in 0..2usize {
            let outcome = e * 2 + f;
            let (p0, p1) = (likelihood[0][outcome], likelihood[1][outcome]);
            table[e][f] = if p0 + p1 <= TIE_TOLERANCE {
                MapDecision::Unreachable
            } else if (p0 - p1).abs() <= TIE_TOLERANCE * (p0 + p1) {
                MapDecision::Tie
            } else if p0 > p1 {
                MapDecision::Bit(0)
            } else {
                MapDecision::Bit(1)
            };
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn delta_examples() {
        assert_eq!(delta_from_d(0.0).unwrap(), 0.5);
        assert_eq!(delta_from_d(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(delta_from_d(0.1).unwrap(), 0.2, epsilon = EPS);
    }

    #[test]
    fn delta_domain() {
        assert!(matches!(delta_from_d(-0.01), Err(Error::Domain { .. })));
        assert!(delta_from_d(0.51).is_err());
        assert!(delta_from_d(f64::NAN).is_err());
        assert!(ProbeParams::new(0.6, 0.1).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(phi(1.0).unwrap(), 2.0 * LN_2, epsilon = EPS);
        // 1.5 ln 1.5 + 0.5 ln 0.5, evaluated at 50 digits.
        assert_abs_diff_eq!(phi(0.5).unwrap(), 0.261624071882273918, epsilon = 1e-14);
        assert!(phi(1.0001).is_err());
        assert!(phi(-0.1).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(info_bound(0.5).unwrap(), LN_2, epsilon = EPS);
        assert_eq!(info_bound(0.0).unwrap(), 0.0);
        let via_channel = bsc_mutual_information(delta_from_d(0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(info_bound(0.1).unwrap(), via_channel, epsilon = EPS);
    }

    #[test]
    fn bsc_examples() {
        assert_abs_diff_eq!(bsc_mutual_information(0.0).unwrap(), LN_2, epsilon = EPS);
        assert_abs_diff_eq!(bsc_mutual_information(0.5).unwrap(), 0.0, epsilon = EPS);
        for p in [0.1, 0.3] {
            assert_abs_diff_eq!(
                bsc_mutual_information(p).unwrap(),
                bsc_mutual_information(1.0 - p).unwrap(),
                epsilon = EPS
            );
        }
        assert!(bsc_mutual_information(1.2).is_err());
    }

    #[test]
    fn probe_states_at_zero_disturbance_are_x() {
        let params = ProbeParams::new(0.0, 0.5).unwrap();
        let (e0, f0) = probe_states(&params);
        let x = Statevector::ket(Basis::Xy, 0);
        assert_eq!(e0, x);
        assert_eq!(f0, x);
    }

    #[test]
    fn probe_e0_probabilities() {
        let params = ProbeParams::from_xy_amplitudes(0.1, 0.2).unwrap();
        let (e0, _) = probe_states(&params);
        let xy = e0.measurement_distribution(&[0], Basis::Xy).unwrap();
        assert_abs_diff_eq!(xy.probs[0], 0.8, epsilon = EPS);
        assert_abs_diff_eq!(xy.probs[1], 0.2, epsilon = EPS);
    }

    #[test]
    fn probe_uv_expansions() {
        for &(dxy, duv) in &[(0.0, 0.5), (0.1, 0.25), (0.37, 0.02), (0.5, 0.5)] {
            let params = ProbeParams::new(dxy, duv).unwrap();
            let (e0, f0) = probe_states(&params);
            let e_uv = e0.apply_hadamard(0).unwrap();
            assert_abs_diff_eq!(e_uv.amplitude(0).re, (1.0 - duv).sqrt(), epsilon = EPS);
            assert_abs_diff_eq!(e_uv.amplitude(1).re, duv.sqrt(), epsilon = EPS);
            let f_uv = f0.apply_hadamard(0).unwrap();
            let dxy_delta = params.delta_xy();
            assert_abs_diff_eq!(f_uv.amplitude(0).re, (1.0 - dxy_delta).sqrt(), epsilon = EPS);
            assert_abs_diff_eq!(f_uv.amplitude(1).re, dxy_delta.sqrt(), epsilon = EPS);
        }
    }

    #[test]
    fn circuit_examples() {
        let out = eve_circuit(&Statevector::from_labels("yxy").unwrap()).unwrap();
        assert_eq!(out, Statevector::from_labels("xyy").unwrap());
        let xxx = Statevector::from_labels("xxx").unwrap();
        assert_eq!(eve_circuit(&xxx).unwrap(), xxx);
        assert!(eve_circuit(&Statevector::from_labels("xx").unwrap()).is_err());
    }

    #[test]
    fn gate_one_in_uv_basis() {
        // |uv> on (a, e) goes to |vv> under CNOT(a -> e).
        let input = Statevector::from_labels("uvu").unwrap();
        let out = input.apply_cnot(QUBIT_A, QUBIT_E).unwrap();
        let expected = Statevector::from_labels("vvu").unwrap();
        assert!(out.max_deviation(&expected).unwrap() < EPS);
    }

    #[test]
    fn post_interaction_at_perfect_copy() {
        let params = ProbeParams::from_xy_amplitudes(0.0, 0.0).unwrap();
        let states = post_interaction_states(&params);
        assert_eq!(states[&AliceInput::X].state, Statevector::from_labels("xxx").unwrap());
        assert_eq!(states[&AliceInput::Y].state, Statevector::from_labels("yyx").unwrap());
    }

    #[test]
    fn post_interaction_uv_from_xy() {
        let params = ProbeParams::new(0.13, 0.31).unwrap();
        let s = post_interaction_states(&params);
        let one = Complex64::new(1.0, 0.0);
        let u = s[&AliceInput::X].state.superpose(one, &s[&AliceInput::Y].state, one).unwrap();
        let v = s[&AliceInput::X].state.superpose(one, &s[&AliceInput::Y].state, -one).unwrap();
        assert!(u.max_deviation(&s[&AliceInput::U].state).unwrap() < EPS);
        assert!(v.max_deviation(&s[&AliceInput::V].state).unwrap() < EPS);
        let overlap = s[&AliceInput::X].state.inner(&s[&AliceInput::Y].state).unwrap();
        assert!(overlap.norm() < EPS);
    }

    #[test]
    fn analyze_at_perfect_copy() {
        let params = ProbeParams::new(0.0, 0.5).unwrap();
        let xy = analyze_channel(&params, Basis::Xy);
        assert_abs_diff_eq!(xy.error_rate, 0.0, epsilon = EPS);
        assert_abs_diff_eq!(xy.mutual_information_nats, LN_2, epsilon = EPS);
        let uv = analyze_channel(&params, Basis::Uv);
        assert_abs_diff_eq!(uv.mutual_information_nats, 0.0, epsilon = EPS);
        assert_abs_diff_eq!(uv.error_rate, 0.5, epsilon = EPS);
    }

    /// Independent oracle: measure all three qubits at once, then read off
    /// Bob's error and Eve's estimate per outcome.
    fn brute_force(params: &ProbeParams, basis: Basis) -> (f64, f64) {
        let mut err = 0.0;
        let mut joint = [[0.0; 2]; 2];
        for bit in 0..2u8 {
            let amps = post_interaction_state(params, AliceInput::new(basis, bit))
                .state
                .amplitudes_in(basis);
            for (idx, amp) in amps.iter().enumerate() {
                let p = 0.5 * amp.norm_sqr();
                let (a, e, f) = ((idx >> 2) & 1, (idx >> 1) & 1, idx & 1);
                if a as u8 != bit {
                    err += p;
                }
                let est = if basis == Basis::Xy { e } else { e ^ f };
                joint[bit as usize][est] += p;
            }
        }
        // Direct entropy form: H(A) + H(E) - H(A, E).
        let h = |ps: &[f64]| -ps.iter().map(|&p| xlnx(p)).sum::<f64>();
        let pa = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
        let pe = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
        let mi = h(&pa) + h(&pe) - h(&[joint[0][0], joint[0][1], joint[1][0], joint[1][1]]);
        (err, mi)
    }

    #[test]
    fn saturation_matches_brute_force() {
        let params = ProbeParams::new(0.1, 0.25).unwrap();
        for basis in Basis::ALL {
            let a = analyze_channel(&params, basis);
            let (err, mi) = brute_force(&params, basis);
            assert_abs_diff_eq!(a.error_rate, err, epsilon = 1e-12);
            assert_abs_diff_eq!(a.mutual_information_nats, mi, epsilon = 1e-10);
            assert_abs_diff_eq!(a.error_rate, params.d(basis), epsilon = 1e-12);
            assert_abs_diff_eq!(a.mutual_information_nats, a.bound_nats, epsilon = 1e-10);
        }
    }

    #[test]
    fn map_perfect_copy_reads_e() {
        let params = ProbeParams::from_xy_amplitudes(0.2, 0.0).unwrap();
        let table = map_estimator(&params, Basis::Xy);
        for f in 0..2 {
            assert_eq!(table[0][f], MapDecision::Bit(0));
            assert_eq!(table[1][f], MapDecision::Bit(1));
        }
    }

    #[test]
    fn map_uv_corrects_flip() {
        // Δxy = 0 means D_xy = ½; e = v, f = v must be read as u.
        let params = ProbeParams::new(0.5, 0.3).unwrap();
        assert_abs_diff_eq!(params.delta_xy(), 0.0, epsilon = EPS);
        let table = map_estimator(&params, Basis::Uv);
        assert_eq!(table[1][1], MapDecision::Bit(0));
        assert_eq!(table[0][0], MapDecision::Bit(0));
        assert_eq!(table[0][1], MapDecision::Bit(1));
        assert_eq!(table[1][0], MapDecision::Bit(1));
    }

    #[test]
    fn map_reports_ties_and_unreachable() {
        // Δuv = ½: e carries nothing about the xy bit.
        let params = ProbeParams::new(0.2, 0.0).unwrap();
        let table = map_estimator(&params, Basis::Xy);
        assert!(table.iter().flatten().all(|d| *d == MapDecision::Tie));
        // D_xy = 0: f is never |y>, so outcomes with f = 1 are unreachable.
        let params = ProbeParams::new(0.0, 0.2).unwrap();
        let table = map_estimator(&params, Basis::Xy);
        assert_eq!(table[0][1], MapDecision::Unreachable);
        assert_eq!(table[1][1], MapDecision::Unreachable);
    }

    #[test]
    fn map_equals_fixed_rule_on_grid() {
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 * 0.05).collect();
        for &dxy in &grid {
            for &duv in &grid {
                let params = ProbeParams::new(dxy, duv).unwrap();
                for basis in Basis::ALL {
                    let table = map_estimator(&params, basis);
                    for e in 0..2u8 {
                        for f in 0..2u8 {
                            assert_eq!(
                                table[e as usize][f as usize],
                                MapDecision::Bit(fixed_estimate(basis, e, f)),
                                "{dxy} {duv} {basis} {e}{f}"
                            );
                        }
                    }
                }
            }
        }
    }

    /// CNOT(e -> a) then CNOT(a -> f): the uv-basis picture used in xy.
    fn swapped_circuit(state: &Statevector) -> Statevector {
        state
            .apply_cnot(QUBIT_E, QUBIT_A)
            .unwrap()
            .apply_cnot(QUBIT_A, QUBIT_F)
            .unwrap()
    }

    #[test]
    fn swapped_circuit_gives_swapped_statistics() {
        let params = ProbeParams::new(0.12, 0.34).unwrap();
        let (e0, f0) = probe_states(&params);
        let (e0, f0) = (e0.apply_hadamard(0).unwrap(), f0.apply_hadamard(0).unwrap());
        for basis in Basis::ALL {
            let mut err = 0.0;
            let mut joint = [[0.0; 2]; 2];
            for bit in 0..2u8 {
                let init =
                    prepare_product(&[Statevector::ket(basis, bit), e0.clone(), f0.clone()]).unwrap();
                let post = swapped_circuit(&init);
                let bob = post.measurement_distribution(&[QUBIT_A], basis).unwrap();
                err += 0.5 * bob.probs[(1 - bit) as usize];
                let eve = post.measurement_distribution(&[QUBIT_E, QUBIT_F], basis).unwrap();
                for (o, p) in eve.probs.iter().enumerate() {
                    let b = eve.bits_of(o);
                    let est = fixed_estimate(basis.conjugate(), b[0], b[1]);
                    joint[bit as usize][est as usize] += 0.5 * p;
                }
            }
            let original = analyze_channel(&params, basis.conjugate());
            assert_abs_diff_eq!(err, original.error_rate, epsilon = EPS);
            assert_abs_diff_eq!(
                joint_mutual_information(&joint),
                original.mutual_information_nats,
                epsilon = 1e-10
            );
        }
    }

    proptest! {
        #[test]
        fn delta_is_involution(d in 0.0f64..=0.5) {
            let back = delta_from_d(delta_from_d(d).unwrap()).unwrap();
            prop_assert!((back - d).abs() < 1e-12);
            let delta = delta_from_d(d).unwrap();
            prop_assert!(((d - 0.5).powi(2) + (delta - 0.5).powi(2) - 0.25).abs() < 1e-12);
        }

        #[test]
        fn bound_is_channel_information(d in 0.0f64..=0.5) {
            let lhs = info_bound(d).unwrap();
            let rhs = bsc_mutual_information(delta_from_d(d).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn phi_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(phi(lo).unwrap() <= phi(hi).unwrap() + 1e-15);
        }

        #[test]
        fn post_states_are_real_nonnegative(dxy in 0.0f64..=0.5, duv in 0.0f64..=0.5) {
            let params = ProbeParams::new(dxy, duv).unwrap();
            for input in [AliceInput::X, AliceInput::Y] {
                let s = post_interaction_state(&params, input).state;
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
                for a in s.amplitudes() {
                    prop_assert!(a.im.abs() < 1e-12 && a.re >= -1e-12);
                }
            }
        }
    }
}
