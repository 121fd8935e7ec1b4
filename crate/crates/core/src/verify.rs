//! Self-checks behind the `verify` command.

use std::fmt;

use num_complex::Complex64;

use crate::error::Result;
use crate::numfmt::format_sig;
use crate::protocol::variant_equivalence_report;
use crate::qsim::{Basis, Statevector};
use crate::strategy::{
    analyze_channel, bsc_mutual_information, delta_from_d, eve_circuit, fixed_estimate,
    info_bound, map_estimator, post_interaction_states, MapDecision, ProbeParams,
};

/// The eight xy-basis kets and their images under the probe circuit.
pub const PERMUTATION_TABLE: [(&str, &str); 8] = [
    ("xxx", "xxx"),
    ("xxy", "yxy"),
    ("xyx", "xyx"),
    ("xyy", "yyy"),
    ("yxx", "yyx"),
    ("yxy", "xyy"),
    ("yyx", "yxx"),
    ("yyy", "xxy"),
];

/// Deliberate corruptions for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Apply the two gates in the wrong order.
    ReversedGates,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Intervals per axis of the 2-D parameter grid; 1-D grids use ten times
    /// as many.
    pub grid_density: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid_density: 10,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        if self.max_deviation == 0.0 {
            write!(f, "{}: {status} (max dev 0)", self.name)
        } else {
            write!(
                f,
                "{}: {status} (max dev {:.3e}, tol {})",
                self.name,
                self.max_deviation,
                format_sig(self.tolerance)
            )
        }
    }
}

fn check(name: &'static str, max_deviation: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        passed: max_deviation.is_finite() && max_deviation <= tolerance,
        max_deviation,
        tolerance,
    }
}

fn grid(intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|i| 0.5 * i as f64 / intervals as f64)
        .collect()
}

fn circuit(state: &Statevector, fault: Option<Fault>) -> Result<Statevector> {
    match fault {
        None => eve_circuit(state),
        Some(Fault::ReversedGates) => state.apply_cnot(2, 0)?.apply_cnot(0, 1),
    }
}

pub fn permutation_table(fault: Option<Fault>) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for (input, output) in PERMUTATION_TABLE {
        let got = circuit(&Statevector::from_labels(input)?, fault)?;
        let want = Statevector::from_labels(output)?;
        dev = dev.max(got.max_deviation(&want)?);
    }
    Ok(check("eq6-permutation-table", dev, 0.0))
}

pub fn cnot_duality() -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for (c, t) in [(0, 1), (1, 0)] {
        for idx in 0..4 {
            let s = Statevector::basis_state(2, idx)?;
            let lhs = s
                .apply_hadamard(0)?
                .apply_hadamard(1)?
                .apply_cnot(c, t)?
                .apply_hadamard(0)?
                .apply_hadamard(1)?;
            let rhs = s.apply_cnot(t, c)?;
            dev = dev.max(lhs.max_deviation(&rhs)?);
        }
    }
    Ok(check("cnot-duality", dev, 1e-12))
}

pub fn quarter_circle(intervals: usize) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for d in grid(intervals) {
        let delta = delta_from_d(d)?;
        let circle = (d - 0.5).powi(2) + (delta - 0.5).powi(2) - 0.25;
        dev = dev.max(circle.abs());
        dev = dev.max((delta_from_d(delta)? - d).abs());
    }
    Ok(check("quarter-circle", dev, 1e-12))
}

pub fn bound_identity(intervals: usize) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for d in grid(intervals) {
        dev = dev.max((info_bound(d)? - bsc_mutual_information(delta_from_d(d)?)?).abs());
    }
    Ok(check("bound-channel-identity", dev, 1e-12))
}

pub fn saturation(intervals: usize) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for dxy in grid(intervals) {
        for duv in grid(intervals) {
            let params = ProbeParams::new(dxy, duv)?;
            let xy = analyze_channel(&params, Basis::Xy);
            let uv = analyze_channel(&params, Basis::Uv);
            dev = dev.max((xy.mutual_information_nats - info_bound(duv)?).abs());
            dev = dev.max((uv.mutual_information_nats - info_bound(dxy)?).abs());
        }
    }
    Ok(check("saturation-grid", dev, 1e-10))
}

pub fn realized_disturbance(intervals: usize) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for dxy in grid(intervals) {
        for duv in grid(intervals) {
            let params = ProbeParams::new(dxy, duv)?;
            dev = dev.max((analyze_channel(&params, Basis::Xy).error_rate - dxy).abs());
            dev = dev.max((analyze_channel(&params, Basis::Uv).error_rate - duv).abs());
        }
    }
    Ok(check("realized-disturbance", dev, 1e-12))
}

pub fn endpoints() -> Result<CheckResult> {
    let params = ProbeParams::from_xy_amplitudes(0.0, 0.0)?;
    let xy = analyze_channel(&params, Basis::Xy);
    let uv = analyze_channel(&params, Basis::Uv);
    let dev = [
        xy.error_rate,
        xy.mutual_information_nats - std::f64::consts::LN_2,
        params.d_uv() - 0.5,
        uv.mutual_information_nats,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(check("tradeoff-endpoints", dev, 1e-12))
}

/// Counts MAP/fixed-rule disagreements at interior grid points. An interior
/// tie counts as a disagreement.
pub fn map_optimality(intervals: usize) -> Result<CheckResult> {
    let mut bad = 0usize;
    for dxy in grid(intervals) {
        for duv in grid(intervals) {
            let interior = dxy > 0.0 && dxy < 0.5 && duv > 0.0 && duv < 0.5;
            if !interior {
                continue;
            }
            let params = ProbeParams::new(dxy, duv)?;
            for basis in Basis::ALL {
                let table = map_estimator(&params, basis);
                for e in 0..2u8 {
                    for f in 0..2u8 {
                        if table[e as usize][f as usize]
                            != MapDecision::Bit(fixed_estimate(basis, e, f))
                        {
                            bad += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(check("map-estimator-optimality", bad as f64, 0.0))
}

pub fn variant_equivalence(intervals: usize) -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for dxy in grid(intervals) {
        for duv in grid(intervals) {
            let report = variant_equivalence_report(&ProbeParams::new(dxy, duv)?);
            dev = dev.max(report.max_joint_deviation);
        }
    }
    Ok(check("variant-equivalence", dev, 1e-12))
}

/// Real, nonnegative post-interaction amplitudes and the `|U>`, `|V>`
/// superposition identities.
pub fn post_interaction(intervals: usize) -> Result<CheckResult> {
    use crate::strategy::AliceInput::*;
    let mut dev: f64 = 0.0;
    let one = Complex64::new(1.0, 0.0);
    for dxy in grid(intervals) {
        for duv in grid(intervals) {
            let s = post_interaction_states(&ProbeParams::new(dxy, duv)?);
            for input in [X, Y] {
                for a in s[&input].state.amplitudes() {
                    dev = dev.max(a.im.abs()).max((-a.re).max(0.0));
                }
            }
            let u = s[&X].state.superpose(one, &s[&Y].state, one)?;
            let v = s[&X].state.superpose(one, &s[&Y].state, -one)?;
            dev = dev.max(u.max_deviation(&s[&U].state)?);
            dev = dev.max(v.max_deviation(&s[&V].state)?);
        }
    }
    Ok(check("post-interaction-states", dev, 1e-12))
}

pub fn run_checks(options: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let k = options.grid_density.max(1);
    Ok(vec![
        permutation_table(options.fault)?,
        cnot_duality()?,
        quarter_circle(10 * k)?,
        bound_identity(10 * k)?,
        saturation(k)?,
        realized_disturbance(k)?,
        endpoints()?,
        map_optimality(k)?,
        variant_equivalence(k)?,
        post_interaction(k)?,
    ])
}
