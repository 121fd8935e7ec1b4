//! Optimal two-CNOT eavesdropping probe for BB84.
//!
//! The crate is split into four layers:
//!
//! * [`qsim`]: a tiny exact statevector engine for up to three qubits.
//! * [`strategy`]: closed-form probe preparation, the two-gate circuit and
//!   analytic error rates / mutual information in both conjugate bases.
//! * [`protocol`]: seeded Monte Carlo simulation of full BB84 rounds with the
//!   probe interposed, including the three storage variants.
//! * [`sweep`] and [`verify`]: the tradeoff-curve export and the self-check
//!   report used by the command-line driver.
//!
//! Qubit 0 is always the most significant bit of an amplitude index. In the
//! three-qubit register the order is `(a, e, f)`: Alice's qubit followed by the
//! two probe qubits.

pub mod error;
pub mod numfmt;
pub mod protocol;
pub mod qsim;
pub mod strategy;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use protocol::{
    run_round, run_session, run_session_serial, variant_equivalence_report, RoundRecord,
    SessionStats, StrategyVariant, VariantEquivalenceReport,
};
pub use qsim::{Basis, MeasurementOutcome, OutcomeDistribution, Statevector};
pub use strategy::{
    analyze_channel, bsc_mutual_information, delta_from_d, eve_circuit, info_bound, map_estimator,
    phi, post_interaction_states, probe_states, AliceInput, ChannelAnalysis, MapDecision,
    PostInteractionState, ProbeParams,
};
pub use sweep::{run_sweep, SweepConfig, SweepMode, TradeoffPoint};
