//! Monte Carlo simulation of BB84 rounds with the probe interposed.
//!
//! A round is compiled into a short program of gates and single-qubit
//! measurements ([`round_program`]). The same program is either sampled with
//! a seeded stream ([`run_round`]) or enumerated branch by branch to get exact
//! distributions ([`variant_equivalence_report`]).
//!
//! Randomness: round `i` of a session with seed `s` draws from a ChaCha8
//! stream keyed by `s` with stream id `i`, so sessions give identical results
//! whether rounds run serially or in parallel.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Basis, Statevector};
use crate::strategy::{
    eve_circuit, initial_state, joint_mutual_information, AliceInput, ProbeParams, QUBIT_A,
    QUBIT_E, QUBIT_F,
};

/// How Eve stores her probe while waiting for the basis announcement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyVariant {
    /// Keep both `e` and `f`; measure both in the announced basis.
    TwoQubitStorage,
    /// Measure `f` in uv right after gate 2, keep only `e`.
    ImmediateFMeasure,
    /// Add CNOT(e → f), discard `f`, keep only `e`.
    ThirdGate,
}

impl StrategyVariant {
    pub const ALL: [StrategyVariant; 3] = [
        StrategyVariant::TwoQubitStorage,
        StrategyVariant::ImmediateFMeasure,
        StrategyVariant::ThirdGate,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            StrategyVariant::TwoQubitStorage => "two",
            StrategyVariant::ImmediateFMeasure => "immediate",
            StrategyVariant::ThirdGate => "third",
        }
    }
}

impl fmt::Display for StrategyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for StrategyVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" => Ok(StrategyVariant::TwoQubitStorage),
            "immediate" => Ok(StrategyVariant::ImmediateFMeasure),
            "third" => Ok(StrategyVariant::ThirdGate),
            other => Err(Error::InvalidArgument(format!(
                "unknown variant {other:?} (expected two, immediate or third)"
            ))),
        }
    }
}

/// Where a measurement result is recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Eve's notebook entry for `f`, taken before Bob measures.
    EarlyF,
    Bob,
    EveE,
    EveF,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Cnot { control: usize, target: usize },
    Measure { slot: Slot, qubit: usize, basis: Basis },
    /// Alice announces her basis; rounds with mismatched bases stop here.
    Announce,
}

/// Everything that happens to the register after the two-gate circuit.
pub fn round_program(variant: StrategyVariant, alice_basis: Basis, bob_basis: Basis) -> Vec<Step> {
    let mut steps = Vec::with_capacity(6);
    match variant {
        StrategyVariant::TwoQubitStorage => {}
        StrategyVariant::ImmediateFMeasure => steps.push(Step::Measure {
            slot: Slot::EarlyF,
            qubit: QUBIT_F,
            basis: Basis::Uv,
        }),
        StrategyVariant::ThirdGate => steps.push(Step::Cnot {
            control: QUBIT_E,
            target: QUBIT_F,
        }),
    }
    steps.push(Step::Measure {
        slot: Slot::Bob,
        qubit: QUBIT_A,
        basis: bob_basis,
    });
    steps.push(Step::Announce);
    if alice_basis == bob_basis {
        steps.push(Step::Measure {
            slot: Slot::EveE,
            qubit: QUBIT_E,
            basis: alice_basis,
        });
        if variant == StrategyVariant::TwoQubitStorage {
            steps.push(Step::Measure {
                slot: Slot::EveF,
                qubit: QUBIT_F,
                basis: alice_basis,
            });
        }
    }
    steps
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Slots {
    early_f: Option<u8>,
    bob: Option<u8>,
    eve_e: Option<u8>,
    eve_f: Option<u8>,
}

impl Slots {
    fn set(&mut self, slot: Slot, bit: u8) {
        let target = match slot {
            Slot::EarlyF => &mut self.early_f,
            Slot::Bob => &mut self.bob,
            Slot::EveE => &mut self.eve_e,
            Slot::EveF => &mut self.eve_f,
        };
        *target = Some(bit);
    }
}

fn eve_estimate(variant: StrategyVariant, basis: Basis, slots: &Slots) -> Option<u8> {
    let e = slots.eve_e?;
    match (variant, basis) {
        (StrategyVariant::TwoQubitStorage, Basis::Uv) => Some(e ^ slots.eve_f?),
        (StrategyVariant::ImmediateFMeasure, Basis::Uv) => Some(e ^ slots.early_f?),
        _ => Some(e),
    }
}

/// One protocol round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub alice_basis: Basis,
    pub alice_bit: u8,
    pub bob_basis: Basis,
    pub bob_bit: u8,
    pub sifted: bool,
    /// Present exactly on sifted rounds.
    pub eve_estimate: Option<u8>,
    pub transmission_error: bool,
}

fn finish(
    variant: StrategyVariant,
    alice: AliceInput,
    bob_basis: Basis,
    slots: &Slots,
) -> RoundRecord {
    let sifted = alice.basis() == bob_basis;
    let bob_bit = slots.bob.expect("bob always measures");
    RoundRecord {
        alice_basis: alice.basis(),
        alice_bit: alice.bit(),
        bob_basis,
        bob_bit,
        sifted,
        eve_estimate: if sifted {
            eve_estimate(variant, alice.basis(), slots)
        } else {
            None
        },
        transmission_error: sifted && bob_bit != alice.bit(),
    }
}

fn apply_gate(state: &Statevector, control: usize, target: usize) -> Statevector {
    state
        .apply_cnot(control, target)
        .expect("fixed three-qubit program")
}

fn prepared(params: &ProbeParams, alice: AliceInput) -> Statevector {
    let init = initial_state(params, &alice.ket()).expect("normalized factors");
    eve_circuit(&init).expect("three-qubit register")
}

/// Events in the order they happen during a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Prepare,
    Circuit,
    Gate { control: usize, target: usize },
    Measure { slot: Slot, basis: Basis, bit: u8 },
    Announce { sifted: bool },
}

/// Round simulator with the four post-circuit states precomputed.
#[derive(Clone, Debug)]
pub struct RoundSimulator {
    variant: StrategyVariant,
    /// Indexed like [`AliceInput::ALL`].
    prepared: [Statevector; 4],
}

impl RoundSimulator {
    pub fn new(params: &ProbeParams, variant: StrategyVariant) -> Self {
        Self {
            variant,
            prepared: AliceInput::ALL.map(|input| prepared(params, input)),
        }
    }

    /// One round plus the ordered event trace.
    pub fn run_traced<R: Rng + ?Sized>(&self, rng: &mut R) -> (RoundRecord, Vec<TraceEvent>) {
        let alice_basis = if rng.random::<bool>() { Basis::Uv } else { Basis::Xy };
        let alice = AliceInput::new(alice_basis, rng.random::<bool>() as u8);
        let bob_basis = if rng.random::<bool>() { Basis::Uv } else { Basis::Xy };

        let mut trace = vec![TraceEvent::Prepare, TraceEvent::Circuit];
        let mut state = self.prepared[alice as usize].clone();
        let mut slots = Slots::default();
        for step in round_program(self.variant, alice_basis, bob_basis) {
            match step {
                Step::Cnot { control, target } => {
                    state = apply_gate(&state, control, target);
                    trace.push(TraceEvent::Gate { control, target });
                }
                Step::Measure { slot, qubit, basis } => {
                    let (bits, _, post) = state
                        .sample_projective(&[qubit], basis, rng)
                        .expect("valid qubit");
                    state = post;
                    slots.set(slot, bits[0]);
                    trace.push(TraceEvent::Measure {
                        slot,
                        basis,
                        bit: bits[0],
                    });
                }
                Step::Announce => trace.push(TraceEvent::Announce {
                    sifted: alice_basis == bob_basis,
                }),
            }
        }
        (finish(self.variant, alice, bob_basis, &slots), trace)
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> RoundRecord {
        self.run_traced(rng).0
    }
}

/// [`run_round`] plus the ordered event trace.
pub fn run_round_traced<R: Rng + ?Sized>(
    params: &ProbeParams,
    variant: StrategyVariant,
    rng: &mut R,
) -> (RoundRecord, Vec<TraceEvent>) {
    RoundSimulator::new(params, variant).run_traced(rng)
}

/// Simulates one round: Alice's and Bob's bases and Alice's bit are uniform.
pub fn run_round<R: Rng + ?Sized>(
    params: &ProbeParams,
    variant: StrategyVariant,
    rng: &mut R,
) -> RoundRecord {
    run_round_traced(params, variant, rng).0
}

/// Random stream for round `index` of a session seeded with `seed`.
pub fn round_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Aggregated counts of a session. Unsifted rounds only enter `n_rounds`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStats {
    pub seed: u64,
    pub variant: StrategyVariant,
    pub n_rounds: u64,
    /// Sifted rounds per basis, indexed by [`Basis::index`].
    pub sifted: [u64; 2],
    pub errors: [u64; 2],
    /// `joint[basis][alice_bit][eve_estimate]`.
    pub joint: [[[u64; 2]; 2]; 2],
}

impl SessionStats {
    pub fn empty(seed: u64, variant: StrategyVariant) -> Self {
        Self {
            seed,
            variant,
            n_rounds: 0,
            sifted: [0; 2],
            errors: [0; 2],
            joint: [[[0; 2]; 2]; 2],
        }
    }

    pub fn record(&mut self, round: &RoundRecord) {
        self.n_rounds += 1;
        if !round.sifted {
            return;
        }
        let b = round.alice_basis.index();
        self.sifted[b] += 1;
        if round.transmission_error {
            self.errors[b] += 1;
        }
        let est = round.eve_estimate.expect("sifted rounds carry an estimate");
        self.joint[b][round.alice_bit as usize][est as usize] += 1;
    }

    /// Associative merge of two partial aggregates.
    pub fn merge(mut self, other: &SessionStats) -> Self {
        self.n_rounds += other.n_rounds;
        for b in 0..2 {
            self.sifted[b] += other.sifted[b];
            self.errors[b] += other.errors[b];
            for a in 0..2 {
                for e in 0..2 {
                    self.joint[b][a][e] += other.joint[b][a][e];
                }
            }
        }
        self
    }

    pub fn sifted_count(&self, basis: Basis) -> u64 {
        self.sifted[basis.index()]
    }

    pub fn sifting_rate(&self) -> f64 {
        (self.sifted[0] + self.sifted[1]) as f64 / self.n_rounds.max(1) as f64
    }

    /// Fraction of sifted rounds in `basis` where Bob's bit differs.
    pub fn empirical_error_rate(&self, basis: Basis) -> Option<f64> {
        let n = self.sifted[basis.index()];
        (n > 0).then(|| self.errors[basis.index()] as f64 / n as f64)
    }

    /// Plug-in mutual information (nats) between Alice's bit and Eve's
    /// estimate, no bias correction.
    pub fn empirical_mi(&self, basis: Basis) -> Option<f64> {
        let counts = self.joint[basis.index()];
        if self.sifted[basis.index()] == 0 {
            return None;
        }
        let as_f64 = [
            [counts[0][0] as f64, counts[0][1] as f64],
            [counts[1][0] as f64, counts[1][1] as f64],
        ];
        Some(joint_mutual_information(&as_f64))
    }
}

fn check_rounds(n_rounds: u64) -> Result<()> {
    if n_rounds == 0 {
        return Err(Error::InvalidArgument("n_rounds must be at least 1".into()));
    }
    Ok(())
}

/// Runs `n_rounds` rounds in parallel. Bit-identical to
/// [`run_session_serial`] for the same arguments.
pub fn run_session(
    n_rounds: u64,
    params: &ProbeParams,
    variant: StrategyVariant,
    seed: u64,
) -> Result<SessionStats> {
    check_rounds(n_rounds)?;
    let sim = RoundSimulator::new(params, variant);
    Ok((0..n_rounds)
        .into_par_iter()
        .fold(
            || SessionStats::empty(seed, variant),
            |mut acc, i| {
                acc.record(&sim.run(&mut round_rng(seed, i)));
                acc
            },
        )
        .reduce(
            || SessionStats::empty(seed, variant),
            |a, b| a.merge(&b),
        ))
}

pub fn run_session_serial(
    n_rounds: u64,
    params: &ProbeParams,
    variant: StrategyVariant,
    seed: u64,
) -> Result<SessionStats> {
    check_rounds(n_rounds)?;
    let sim = RoundSimulator::new(params, variant);
    let mut stats = SessionStats::empty(seed, variant);
    for i in 0..n_rounds {
        stats.record(&sim.run(&mut round_rng(seed, i)));
    }
    Ok(stats)
}

/// Exact sifted-round statistics of one variant in one basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactChannel {
    pub basis: Basis,
    pub error_rate: f64,
    /// `joint[alice_bit][eve_estimate]`, sums to 1.
    pub joint: [[f64; 2]; 2],
    pub mutual_information_nats: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantChannels {
    pub variant: StrategyVariant,
    pub xy: ExactChannel,
    pub uv: ExactChannel,
}

impl VariantChannels {
    pub fn channel(&self, basis: Basis) -> &ExactChannel {
        match basis {
            Basis::Xy => &self.xy,
            Basis::Uv => &self.uv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantEquivalenceReport {
    pub params: ProbeParams,
    pub variants: Vec<VariantChannels>,
    /// Largest joint-table entry difference between any two variants.
    pub max_joint_deviation: f64,
}

fn enumerate_branches(
    state: &Statevector,
    steps: &[Step],
    prob: f64,
    slots: Slots,
    leaf: &mut dyn FnMut(f64, &Slots),
) {
    let Some((step, rest)) = steps.split_first() else {
        leaf(prob, &slots);
        return;
    };
    match *step {
        Step::Cnot { control, target } => {
            enumerate_branches(&apply_gate(state, control, target), rest, prob, slots, leaf)
        }
        Step::Announce => enumerate_branches(state, rest, prob, slots, leaf),
        Step::Measure { slot, qubit, basis } => {
            for bit in 0..2u8 {
                let (p, post) = state.project(&[qubit], basis, &[bit]).expect("valid qubit");
                if let Some(post) = post {
                    let mut next = slots;
                    next.set(slot, bit);
                    enumerate_branches(&post, rest, prob * p, next, leaf);
                }
            }
        }
    }
}

/// Exact sifted statistics of `variant` in `basis`, by walking every
/// measurement branch.
pub fn exact_channel(params: &ProbeParams, variant: StrategyVariant, basis: Basis) -> ExactChannel {
    let mut joint = [[0.0; 2]; 2];
    let mut error_rate = 0.0;
    for bit in 0..2u8 {
        let alice = AliceInput::new(basis, bit);
        let program = round_program(variant, basis, basis);
        enumerate_branches(
            &prepared(params, alice),
            &program,
            0.5,
            Slots::default(),
            &mut |p, slots| {
                let record = finish(variant, alice, basis, slots);
                let est = record.eve_estimate.expect("sifted");
                joint[bit as usize][est as usize] += p;
                if record.transmission_error {
                    error_rate += p;
                }
            },
        );
    }
    ExactChannel {
        basis,
        error_rate,
        joint,
        mutual_information_nats: joint_mutual_information(&joint),
    }
}

/// Exact joint distributions of all three storage variants.
pub fn variant_equivalence_report(params: &ProbeParams) -> VariantEquivalenceReport {
    let variants: Vec<VariantChannels> = StrategyVariant::ALL
        .iter()
        .map(|&variant| VariantChannels {
            variant,
            xy: exact_channel(params, variant, Basis::Xy),
            uv: exact_channel(params, variant, Basis::Uv),
        })
        .collect();
    let mut max_joint_deviation: f64 = 0.0;
    for basis in Basis::ALL {
        let reference = variants[0].channel(basis).joint;
        for v in &variants[1..] {
            let joint = v.channel(basis).joint;
            for a in 0..2 {
                for e in 0..2 {
                    max_joint_deviation =
                        max_joint_deviation.max((joint[a][e] - reference[a][e]).abs());
                }
            }
        }
    }
    VariantEquivalenceReport {
        params: *params,
        variants,
        max_joint_deviation,
    }
}
