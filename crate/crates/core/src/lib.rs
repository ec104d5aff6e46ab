//! Exact degrees-of-freedom (DoF) analysis and slot-level simulation of
//! multi-phase retrospective interference-alignment schemes for the K-user
//! SISO interference channel (IC) and the M×K SISO X channel under three
//! transmitter side-information models:
//!
//! * full-duplex transmitter cooperation with delayed CSIT,
//! * output feedback,
//! * Shannon feedback (delayed CSIT plus output feedback).
//!
//! The crate has two halves:
//!
//! * [`dof`] — an exact-rational engine for every achievable-DoF expression:
//!   recursions, closed forms, integer maximizations over the phase-1 fan-out
//!   width, asymptotic limits, and a recursion-vs-closed-form consistency
//!   sweep.
//! * [`sim`] / [`schemes`] — a noise-free, slot-level executor for the
//!   transmission schemes themselves.  Channel realizations are drawn over a
//!   prime field (for exact generic-rank verification) or complex doubles,
//!   every transmission is checked against the transmitter's accumulated
//!   side information, and decodability is settled by rank tests on each
//!   receiver's reception history.
//!
//! Every DoF value is an exact [`Rational`]; the simulator's empirical DoF
//! (symbols delivered over slots used) must match the analytic value exactly,
//! which is what the `verify` module and the acceptance suite check.

pub mod channel;
pub mod combin;
pub mod dof;
pub mod expr;
pub mod field;
pub mod rational;
pub mod schemes;
pub mod sim;
pub mod verify;

pub use rational::{rat, Rational};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Channel topology: K-user interference channel or M×K X channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Ic,
    X,
}

/// Transmitter side-information model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feedback {
    /// Delayed CSIT plus full-duplex reception at the transmitters.
    FullDuplexDelayedCsit,
    /// Each receiver's channel output fed back to its paired transmitter
    /// with one slot delay; no CSI at the transmitters.
    OutputFeedback,
    /// Output feedback plus delayed CSIT.
    ShannonFeedback,
}

/// A (channel, feedback) pair naming one of the six studied models.
///
/// X-channel output/Shannon feedback requires M = K (feedback links pair each
/// transmitter with one receiver), so those models carry no separate M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelId {
    pub channel: ChannelKind,
    pub feedback: Feedback,
}

impl ModelId {
    pub const IC_FD: ModelId = ModelId {
        channel: ChannelKind::Ic,
        feedback: Feedback::FullDuplexDelayedCsit,
    };
    pub const IC_OF: ModelId = ModelId {
        channel: ChannelKind::Ic,
        feedback: Feedback::OutputFeedback,
    };
    pub const IC_SF: ModelId = ModelId {
        channel: ChannelKind::Ic,
        feedback: Feedback::ShannonFeedback,
    };
    pub const X_FD: ModelId = ModelId {
        channel: ChannelKind::X,
        feedback: Feedback::FullDuplexDelayedCsit,
    };
    pub const X_OF: ModelId = ModelId {
        channel: ChannelKind::X,
        feedback: Feedback::OutputFeedback,
    };
    pub const X_SF: ModelId = ModelId {
        channel: ChannelKind::X,
        feedback: Feedback::ShannonFeedback,
    };

    pub const ALL: [ModelId; 6] = [
        Self::IC_FD,
        Self::IC_OF,
        Self::IC_SF,
        Self::X_FD,
        Self::X_OF,
        Self::X_SF,
    ];

    pub fn short_name(&self) -> &'static str {
        match (self.channel, self.feedback) {
            (ChannelKind::Ic, Feedback::FullDuplexDelayedCsit) => "icfd",
            (ChannelKind::Ic, Feedback::OutputFeedback) => "icof",
            (ChannelKind::Ic, Feedback::ShannonFeedback) => "icsf",
            (ChannelKind::X, Feedback::FullDuplexDelayedCsit) => "xfd",
            (ChannelKind::X, Feedback::OutputFeedback) => "xof",
            (ChannelKind::X, Feedback::ShannonFeedback) => "xsf",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "icfd" => Ok(Self::IC_FD),
            "icof" => Ok(Self::IC_OF),
            "icsf" => Ok(Self::IC_SF),
            "xfd" => Ok(Self::X_FD),
            "xof" => Ok(Self::X_OF),
            "xsf" => Ok(Self::X_SF),
            other => Err(format!(
                "unknown model `{other}` (expected one of icfd, icof, icsf, xfd, xof, xsf)"
            )),
        }
    }
}

/// Errors from the exact DoF engine.
#[derive(Debug, Clone, thiserror::Error)]
pub enum DofError {
    /// A parameter violated the stated domain of a formula.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    /// The requested network size is outside the regime the schemes cover.
    /// Carries the trivially achievable DoF (one) so callers can still
    /// tabulate a value.
    #[error("unsupported regime: {reason} (trivial DoF {fallback})")]
    UnsupportedRegime { reason: String, fallback: Rational },
    /// An exact integer count overflowed the fixed-width combinatorics path.
    #[error("combinatorial count overflow: {0}")]
    Overflow(String),
}

/// Errors raised by scheme construction and simulation.
#[derive(Debug, thiserror::Error)]
pub enum SchemeError {
    #[error("unsupported scheme configuration: {0}")]
    Unsupported(String),
    #[error("slot {slot}: transmitter {tx} cannot form its scheduled expression")]
    Infeasible { slot: usize, tx: usize },
    #[error("slot {slot}: transmitter {tx} requires channel state it does not have")]
    CsiUnavailable { slot: usize, tx: usize },
    #[error("phase ledger mismatch: {0}")]
    LedgerMismatch(String),
    #[error("decode failure: {0}")]
    DecodeFailure(String),
    #[error("simulation error: {0}")]
    Sim(String),
    #[error(transparent)]
    Dof(#[from] DofError),
}
