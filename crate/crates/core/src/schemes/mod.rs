//! Builders and executors for the six multi-phase transmission schemes, the
//! scripted small-network examples, and standalone per-phase verification.
//!
//! A [`Policy`] fixes a model, a network size, and the exact replication
//! factor of every phase so that symbol flows between phases balance with no
//! remainder; its ledger is computed at build time and the analytic DoF must
//! already equal delivered-symbols over slots there.  Executing a policy
//! drives a [`Simulation`] slot by slot: transmissions are built from node
//! side information only (the executor is an orchestrator with global view,
//! but every scheduled expression is feasibility-checked against the
//! transmitter's own span), and the final report's empirical DoF comes from
//! the receivers' rank tests alone.

mod ic;
mod phase_verify;
mod sf;
mod x;

pub use phase_verify::{verify_phase, PhaseReport};

use crate::channel::generate_channel;
use crate::expr::SymbolSpec;
use crate::field::Field;
use crate::rational::{rat_u128, Rational};
use crate::sim::{SimReport, Simulation};
use crate::{ChannelKind, Feedback, ModelId, SchemeError};
use num_integer::Integer;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub(crate) type Subset = Vec<usize>;

pub(crate) fn union_needs<F: Field>(syms: &[SymbolSpec<F>], tx: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for s in syms {
        out.extend(s.needs_for(tx));
    }
    out
}

/// FIFO stock of symbols per class, keyed deterministically.
#[derive(Debug)]
pub(crate) struct ClassStock<F: Field, K: Ord> {
    map: BTreeMap<K, VecDeque<SymbolSpec<F>>>,
}

impl<F: Field, K: Ord + std::fmt::Debug> ClassStock<F, K> {
    pub fn new() -> Self {
        ClassStock {
            map: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, key: K, sym: SymbolSpec<F>) {
        self.map.entry(key).or_default().push_back(sym);
    }

    pub fn pop_n(&mut self, key: &K, n: usize) -> Result<Vec<SymbolSpec<F>>, SchemeError> {
        let queue = self.map.get_mut(key).ok_or_else(|| {
            SchemeError::Sim(format!("class stock underflow: no symbols for {key:?}"))
        })?;
        if queue.len() < n {
            return Err(SchemeError::Sim(format!(
                "class stock underflow for {key:?}: need {n}, have {}",
                queue.len()
            )));
        }
        Ok(queue.drain(..n).collect())
    }

    pub fn total(&self) -> usize {
        self.map.values().map(|q| q.len()).sum()
    }
}

/// Exact per-phase accounting: inputs consumed, slots spent, outputs
/// produced, as run totals (per-pass counts times `passes`).
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PhaseLedger {
    pub label: String,
    pub passes: u64,
    pub consumed: u128,
    pub slots: u128,
    pub produced: u128,
}

/// Scheme identity with its fixed parameters.
#[derive(Debug, Clone, Serialize)]
pub enum SchemeKind {
    IcFullDuplex { k: u32 },
    IcOutputFeedback { k: u32, mu: u32 },
    IcShannon { k: u32, nu: u32 },
    XOutputFeedback { k: u32 },
    XFullDuplex { m_tx: u32, k: u32 },
    XShannon { k: u32 },
}

/// A fully scheduled scheme: model, phase ledgers with replication factors,
/// and the analytic DoF its execution must reproduce exactly.
#[derive(Debug, Clone, Serialize)]
pub struct Policy {
    pub model: ModelId,
    pub k: u32,
    pub m_tx: Option<u32>,
    /// Later-phase transmissions depend on realized channel coefficients.
    pub adaptive: bool,
    pub kind: SchemeKind,
    pub phases: Vec<PhaseLedger>,
    pub symbols_total: u64,
    pub slots_total: u64,
    #[serde(serialize_with = "ser_rat")]
    pub analytic_dof: Rational,
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rational::render(r))
}

impl Policy {
    /// Builds the policy for a supported (model, K, M) configuration.
    pub fn build(model: ModelId, k: u32, m_tx: Option<u32>) -> Result<Policy, SchemeError> {
        match (model.channel, model.feedback) {
            (ChannelKind::Ic, Feedback::FullDuplexDelayedCsit) => ic::build_icfd(k),
            (ChannelKind::Ic, Feedback::OutputFeedback) => ic::build_icof(k),
            (ChannelKind::Ic, Feedback::ShannonFeedback) => sf::build_icsf(k),
            (ChannelKind::X, Feedback::OutputFeedback) => x::build_xof(k),
            (ChannelKind::X, Feedback::ShannonFeedback) => x::build_xsf(k),
            (ChannelKind::X, Feedback::FullDuplexDelayedCsit) => {
                let m_tx = m_tx.ok_or_else(|| {
                    SchemeError::Unsupported("xfd needs a transmitter count (--m-tx)".into())
                })?;
                x::build_xfd(m_tx, k)
            }
        }
    }

    /// Runs the scheme against a fresh channel realization.
    pub fn execute<F: Field>(
        &self,
        seed: u64,
        strict: bool,
        trace: bool,
    ) -> Result<(SimReport, Option<Vec<serde_json::Value>>), SchemeError> {
        let fullduplex = self.model.feedback == Feedback::FullDuplexDelayedCsit;
        let (rx_count, tx_count) = match self.model.channel {
            ChannelKind::Ic => (self.k as usize, self.k as usize),
            ChannelKind::X => (self.k as usize, self.m_tx.unwrap_or(self.k) as usize),
        };
        let channel = generate_channel::<F>(
            rx_count,
            tx_count,
            self.slots_total as usize,
            seed,
            fullduplex,
        );
        let mut sim = Simulation::new(self.model.feedback, channel, seed, strict);
        if trace {
            sim.enable_trace();
        }
        match &self.kind {
            SchemeKind::IcFullDuplex { k } => ic::run_icfd(&mut sim, *k, &self.phases)?,
            SchemeKind::IcOutputFeedback { k, mu } => {
                ic::run_icof(&mut sim, *k, *mu, &self.phases)?
            }
            SchemeKind::IcShannon { k, nu } => sf::run_icsf(&mut sim, *k, *nu, &self.phases)?,
            SchemeKind::XOutputFeedback { k } => x::run_xof(&mut sim, *k)?,
            SchemeKind::XFullDuplex { m_tx, k } => x::run_xfd(&mut sim, *m_tx, *k, &self.phases)?,
            SchemeKind::XShannon { k } => x::run_xsf(&mut sim, *k, &self.phases)?,
        }
        if sim.t as u64 != self.slots_total {
            return Err(SchemeError::LedgerMismatch(format!(
                "{}: executed {} slots, ledger says {}",
                self.model, sim.t, self.slots_total
            )));
        }
        let report = sim.finalize(self.model.short_name(), seed);
        if report.symbols_injected != self.symbols_total {
            return Err(SchemeError::LedgerMismatch(format!(
                "{}: injected {} symbols, ledger says {}",
                self.model, report.symbols_injected, self.symbols_total
            )));
        }
        let lines = sim.trace_lines().map(|l| l.to_vec());
        Ok((report, lines))
    }
}

/// Minimal positive pass counts `P_0..P_n` balancing a supply/demand chain:
/// `P_i * supply_i = P_{i+1} * demand_{i+1}` for each consecutive pair.
pub(crate) fn solve_passes(chain: &[(u128, u128)]) -> Result<Vec<u64>, SchemeError> {
    // Track P_i as exact fractions, then clear denominators and divide by
    // the common factor.
    let mut nums: Vec<u128> = vec![1];
    let mut dens: Vec<u128> = vec![1];
    for &(supply, demand) in chain {
        if supply == 0 || demand == 0 {
            return Err(SchemeError::LedgerMismatch(
                "degenerate supply/demand in phase chain".into(),
            ));
        }
        let n = nums.last().unwrap() * supply;
        let d = dens.last().unwrap() * demand;
        let g = n.gcd(&d);
        nums.push(n / g);
        dens.push(d / g);
    }
    let lcm_den = dens.iter().fold(1u128, |acc, &d| acc.lcm(&d));
    let scaled: Vec<u128> = nums
        .iter()
        .zip(&dens)
        .map(|(&n, &d)| n * (lcm_den / d))
        .collect();
    let g = scaled.iter().fold(0u128, |acc, &x| acc.gcd(&x));
    scaled
        .iter()
        .map(|&x| {
            u64::try_from(x / g)
                .map_err(|_| SchemeError::LedgerMismatch("pass count overflow".into()))
        })
        .collect()
}

/// Fills in the run totals and checks that the ledger reproduces the
/// analytic DoF exactly.
pub(crate) fn seal_policy(mut policy: Policy) -> Result<Policy, SchemeError> {
    let symbols: u128 = policy.phases.first().map(|p| p.consumed).unwrap_or(0);
    let slots: u128 = policy.phases.iter().map(|p| p.slots).sum();
    policy.symbols_total = u64::try_from(symbols)
        .map_err(|_| SchemeError::LedgerMismatch("symbol count overflow".into()))?;
    policy.slots_total = u64::try_from(slots)
        .map_err(|_| SchemeError::LedgerMismatch("slot count overflow".into()))?;
    let empirical = rat_u128(symbols, slots);
    if empirical != policy.analytic_dof {
        return Err(SchemeError::LedgerMismatch(format!(
            "{}: ledger DoF {}/{} != analytic {}",
            policy.model,
            symbols,
            slots,
            crate::rational::render(&policy.analytic_dof)
        )));
    }
    Ok(policy)
}

pub(crate) fn combinations(pool: impl IntoIterator<Item = usize>, r: usize) -> Vec<Subset> {
    use itertools::Itertools;
    let items: Vec<usize> = pool.into_iter().collect();
    if r == 0 {
        return vec![Vec::new()];
    }
    items.into_iter().combinations(r).collect()
}

pub(crate) fn complement(k: u32, subset: &[usize]) -> Vec<usize> {
    (0..k as usize).filter(|i| !subset.contains(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_solver_minimal_integers() {
        // supply 1 -> demand 6, supply 3 -> demand 2, supply 2 -> demand 1.
        let p = solve_passes(&[(1, 6), (3, 2), (2, 1)]).unwrap();
        assert_eq!(p, vec![12, 2, 3, 6]);
        let p = solve_passes(&[(2, 2)]).unwrap();
        assert_eq!(p, vec![1, 1]);
    }

    #[test]
    fn subset_enumeration_is_lexicographic() {
        let subs = combinations(0..4, 2);
        assert_eq!(subs[0], vec![0, 1]);
        assert_eq!(subs[1], vec![0, 2]);
        assert_eq!(subs.last().unwrap(), &vec![2, 3]);
        assert_eq!(combinations(0..3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(complement(5, &[1, 3]), vec![0, 2, 4]);
    }
}
