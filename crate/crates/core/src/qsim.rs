//! Exact statevector engine for registers of one to three qubits.
//!
//! Index convention: qubit 0 is the most significant bit of an amplitude
//! index, so the three-qubit ket `|aef>` sits at index `a·4 + e·2 + f`. Bit
//! value 0 stands for `|x>` (or `|u>` in the conjugate basis) and 1 for `|y>`
//! (or `|v>`).
//!
//! States are immutable values: every operation returns a new [`Statevector`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register this engine handles.
pub const MAX_QUBITS: usize = 3;

/// Allowed deviation from unit norm for externally supplied states.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Measurement / preparation basis.
///
/// `Xy` is the computational basis `{|x>, |y>}`; `Uv` is the conjugate basis
/// `|u> = (|x> + |y>)/√2`, `|v> = (|x> - |y>)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Xy,
    Uv,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Xy, Basis::Uv];

    pub fn conjugate(self) -> Basis {
        match self {
            Basis::Xy => Basis::Uv,
            Basis::Uv => Basis::Xy,
        }
    }

    /// Ket letter for a bit value in this basis.
    pub fn ket_label(self, bit: u8) -> char {
        match (self, bit) {
            (Basis::Xy, 0) => 'x',
            (Basis::Xy, _) => 'y',
            (Basis::Uv, 0) => 'u',
            (Basis::Uv, _) => 'v',
        }
    }

    /// Position in [`Basis::ALL`]; handy for per-basis arrays.
    pub fn index(self) -> usize {
        match self {
            Basis::Xy => 0,
            Basis::Uv => 1,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Xy => f.write_str("xy"),
            Basis::Uv => f.write_str("uv"),
        }
    }
}

#[inline]
fn bit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Complex amplitudes of a 1-3 qubit register, unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// Builds a state from raw amplitudes. The qubit count is inferred from the
    /// length, which must be 2, 4 or 8.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        let num_qubits = match len {
            2 => 1,
            4 => 2,
            8 => 3,
            _ => {
                return Err(Error::InvalidState(format!(
                    "amplitude count {len} is not 2^n for n in 1..={MAX_QUBITS}"
                )))
            }
        };
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "squared norm {norm} deviates from 1"
            )));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis ket `|index>` on `num_qubits` qubits.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&num_qubits) {
            return Err(Error::InvalidArgument(format!(
                "qubit count {num_qubits} not in 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1 << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Single-qubit basis ket: `|x>`, `|y>`, `|u>` or `|v>`.
    pub fn ket(basis: Basis, bit: u8) -> Self {
        let s = FRAC_1_SQRT_2;
        let (a0, a1) = match (basis, bit & 1) {
            (Basis::Xy, 0) => (1.0, 0.0),
            (Basis::Xy, _) => (0.0, 1.0),
            (Basis::Uv, 0) => (s, s),
            (Basis::Uv, _) => (s, -s),
        };
        Self {
            num_qubits: 1,
            amplitudes: vec![Complex64::new(a0, 0.0), Complex64::new(a1, 0.0)],
        }
    }

    /// Product state from ket letters, e.g. `"yxy"` or `"uv"`.
    pub fn from_labels(labels: &str) -> Result<Self> {
        let factors = labels
            .chars()
            .map(|c| match c {
                'x' => Ok(Self::ket(Basis::Xy, 0)),
                'y' => Ok(Self::ket(Basis::Xy, 1)),
                'u' => Ok(Self::ket(Basis::Uv, 0)),
                'v' => Ok(Self::ket(Basis::Uv, 1)),
                other => Err(Error::InvalidArgument(format!("unknown ket label {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        prepare_product(&factors)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check_same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest absolute amplitude difference to `other`.
    pub fn max_deviation(&self, other: &Statevector) -> Result<f64> {
        self.check_same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Unnormalized linear combination `alpha·self + beta·other`, renormalized.
    pub fn superpose(
        &self,
        alpha: Complex64,
        other: &Statevector,
        beta: Complex64,
    ) -> Result<Statevector> {
        self.check_same_size(other)?;
        let raw: Vec<Complex64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidState("superposition has zero norm".into()));
        }
        Ok(Statevector {
            num_qubits: self.num_qubits,
            amplitudes: raw.into_iter().map(|a| a / norm).collect(),
        })
    }

    fn check_same_size(&self, other: &Statevector) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::InvalidArgument(format!(
                "register sizes differ: {} vs {}",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::InvalidArgument(format!(
                "qubit {qubit} out of range for a {}-qubit register",
                self.num_qubits
            )));
        }
        Ok(())
    }

    fn check_subset(&self, qubits: &[usize]) -> Result<()> {
        if qubits.is_empty() {
            return Err(Error::InvalidArgument("empty qubit subset".into()));
        }
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
            }
        }
        Ok(())
    }

    /// Bit of `qubit` in amplitude index `index`.
    pub fn bit(&self, index: usize, qubit: usize) -> u8 {
        ((index & bit_mask(self.num_qubits, qubit)) != 0) as u8
    }

    /// Controlled-not in the xy basis: flips `target` on every index whose
    /// `control` bit is 1. This is a pure amplitude permutation.
    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<Statevector> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidGate(format!(
                "control and target are both qubit {control}"
            )));
        }
        let cmask = bit_mask(self.num_qubits, control);
        let tmask = bit_mask(self.num_qubits, target);
        let mut out = self.amplitudes.clone();
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let j = if i & cmask != 0 { i ^ tmask } else { i };
            out[j] = *amp;
        }
        Ok(Statevector {
            num_qubits: self.num_qubits,
            amplitudes: out,
        })
    }

    /// Hadamard on one qubit: the xy ↔ uv change of basis. Self-inverse.
    pub fn apply_hadamard(&self, qubit: usize) -> Result<Statevector> {
        self.check_qubit(qubit)?;
        let mut out = self.clone();
        out.hadamard_in_place(qubit);
        Ok(out)
    }

    fn hadamard_in_place(&mut self, qubit: usize) {
        let mask = bit_mask(self.num_qubits, qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | mask];
                self.amplitudes[i] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[i | mask] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    /// Amplitudes with the listed qubits rotated into `basis` (no-op for xy).
    fn rotated(&self, qubits: &[usize], basis: Basis) -> Statevector {
        let mut work = self.clone();
        if basis == Basis::Uv {
            for &q in qubits {
                work.hadamard_in_place(q);
            }
        }
        work
    }

    /// Amplitudes of this state expanded in `basis` on every qubit.
    pub fn amplitudes_in(&self, basis: Basis) -> Vec<Complex64> {
        let all: Vec<usize> = (0..self.num_qubits).collect();
        self.rotated(&all, basis).amplitudes
    }

    fn outcome_index(&self, index: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | self.bit(index, q) as usize)
    }

    /// Born-rule distribution of measuring `qubits` in `basis`.
    pub fn measurement_distribution(
        &self,
        qubits: &[usize],
        basis: Basis,
    ) -> Result<OutcomeDistribution> {
        self.check_subset(qubits)?;
        let work = self.rotated(qubits, basis);
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, amp) in work.amplitudes.iter().enumerate() {
            probs[self.outcome_index(i, qubits)] += amp.norm_sqr();
        }
        Ok(OutcomeDistribution {
            qubits: qubits.to_vec(),
            basis,
            probs,
        })
    }

    /// Projects onto outcome `bits` of measuring `qubits` in `basis`.
    ///
    /// Returns the outcome probability and the renormalized full-register
    /// post-measurement state (measured qubits left in the observed basis
    /// kets), or `None` when the outcome has zero probability.
    pub fn project(
        &self,
        qubits: &[usize],
        basis: Basis,
        bits: &[u8],
    ) -> Result<(f64, Option<Statevector>)> {
        self.check_subset(qubits)?;
        if bits.len() != qubits.len() {
            return Err(Error::InvalidArgument(format!(
                "{} outcome bits for {} measured qubits",
                bits.len(),
                qubits.len()
            )));
        }
        let wanted = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let mut work = self.rotated(qubits, basis);
        let mut prob = 0.0;
        for i in 0..work.amplitudes.len() {
            if self.outcome_index(i, qubits) == wanted {
                prob += work.amplitudes[i].norm_sqr();
            } else {
                work.amplitudes[i] = Complex64::new(0.0, 0.0);
            }
        }
        if prob <= 0.0 {
            return Ok((0.0, None));
        }
        let scale = prob.sqrt().recip();
        for a in work.amplitudes.iter_mut() {
            *a *= scale;
        }
        Ok((prob, Some(work.rotated(qubits, basis))))
    }

    /// Samples a measurement of `qubits` in `basis` and returns the outcome
    /// bits plus the full-register post-measurement state.
    pub fn sample_projective<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        basis: Basis,
        rng: &mut R,
    ) -> Result<(Vec<u8>, f64, Statevector)> {
        let dist = self.measurement_distribution(qubits, basis)?;
        let outcome = dist.sample(rng);
        let bits = dist.bits_of(outcome);
        let (prob, post) = self.project(qubits, basis, &bits)?;
        let post = post.ok_or_else(|| {
            Error::InvalidState("sampled an outcome with zero probability".into())
        })?;
        Ok((bits, prob, post))
    }

    /// Samples a measurement and traces out the measured qubits.
    pub fn sample_measurement<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        let (bits, probability, post) = self.sample_projective(qubits, basis, rng)?;
        let collapsed = post.discard_measured(qubits, basis, &bits);
        Ok(MeasurementOutcome {
            bits,
            basis,
            probability,
            collapsed,
        })
    }

    /// Drops qubits known to be in the product ket `bits` of `basis`.
    fn discard_measured(&self, qubits: &[usize], basis: Basis, bits: &[u8]) -> Option<Statevector> {
        let remaining: Vec<usize> = (0..self.num_qubits)
            .filter(|q| !qubits.contains(q))
            .collect();
        if remaining.is_empty() {
            return None;
        }
        let work = self.rotated(qubits, basis);
        let wanted = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << remaining.len()];
        for (i, amp) in work.amplitudes.iter().enumerate() {
            if self.outcome_index(i, qubits) == wanted {
                amplitudes[self.outcome_index(i, &remaining)] = *amp;
            }
        }
        Some(Statevector {
            num_qubits: remaining.len(),
            amplitudes,
        })
    }
}

/// Tensor product of single-qubit states, in list order (first = qubit 0).
pub fn prepare_product(qubit_states: &[Statevector]) -> Result<Statevector> {
    if qubit_states.is_empty() || qubit_states.len() > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "need 1..={MAX_QUBITS} factors, got {}",
            qubit_states.len()
        )));
    }
    let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
    for (k, factor) in qubit_states.iter().enumerate() {
        if factor.num_qubits != 1 {
            return Err(Error::InvalidState(format!(
                "factor {k} has {} qubits, expected 1",
                factor.num_qubits
            )));
        }
        let norm = factor.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "factor {k} has squared norm {norm}"
            )));
        }
        amplitudes = amplitudes
            .iter()
            .flat_map(|a| factor.amplitudes.iter().map(move |b| a * b))
            .collect();
    }
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(Statevector {
        num_qubits: qubit_states.len(),
        amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
    })
}

/// Probability table over the outcomes of measuring a qubit subset.
///
/// Outcome indices pack the measured bits in the order the qubits were
/// listed, first listed qubit most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub qubits: Vec<usize>,
    pub basis: Basis,
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, bits: &[u8]) -> f64 {
        let idx = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        self.probs[idx]
    }

    pub fn bits_of(&self, outcome: usize) -> Vec<u8> {
        let k = self.qubits.len();
        (0..k).map(|i| ((outcome >> (k - 1 - i)) & 1) as u8).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal over a subset of the measured qubits.
    pub fn marginal(&self, keep: &[usize]) -> Result<OutcomeDistribution> {
        let positions = keep
            .iter()
            .map(|q| {
                self.qubits.iter().position(|m| m == q).ok_or_else(|| {
                    Error::InvalidArgument(format!("qubit {q} was not measured"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut probs = vec![0.0; 1 << keep.len()];
        for (outcome, p) in self.probs.iter().enumerate() {
            let bits = self.bits_of(outcome);
            let idx = positions
                .iter()
                .fold(0usize, |acc, &pos| (acc << 1) | bits[pos] as usize);
            probs[idx] += p;
        }
        Ok(OutcomeDistribution {
            qubits: keep.to_vec(),
            basis: self.basis,
            probs,
        })
    }

    /// Inverse-CDF draw; never returns a zero-probability outcome.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.random::<f64>() * self.total();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            last_nonzero = i;
            acc += p;
            if r < acc {
                return i;
            }
        }
        last_nonzero
    }
}

/// Result of a sampled measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub bits: Vec<u8>,
    pub basis: Basis,
    /// Probability of `bits` under the pre-measurement state.
    pub probability: f64,
    /// State of the unmeasured qubits, `None` when every qubit was measured.
    pub collapsed: Option<Statevector>,
}
