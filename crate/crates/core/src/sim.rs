//! Slot-by-slot execution of transmissions under the three side-information
//! models, with per-node knowledge tracking.
//!
//! Knowledge is tracked as value spans: the set of linear combinations of
//! fresh symbols a node can compute.  A transmitter may send an expression
//! only if it lies in the span of its own symbols and accumulated side
//! information (checked by [`Simulation::tx_can_form`]) and, coarsely, only
//! if the channel coefficients baked into the expression come from slots the
//! model lets it see: delayed-CSIT models expose every past cross matrix,
//! output feedback exposes none.
//!
//! Receivers accumulate one reception per slot (noise-free, bounded noise
//! does not move DoF); decodability at the end of a run is a rank test on
//! that history, nothing else.

use crate::channel::ChannelRealization;
use crate::expr::{decodable_in, Eliminator, LinearExpr, SymbolId, SymbolPool};
use crate::field::Field;
use crate::rational::{rat_u128, render, Rational};
use crate::{Feedback, SchemeError};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// One scheduled transmission: the value to put on the air plus the slots
/// whose cross-channel matrices the transmitter needed to construct it.
#[derive(Clone, Debug)]
pub struct Transmission<F: Field> {
    pub expr: LinearExpr<F>,
    pub needs_csi: BTreeSet<usize>,
}

impl<F: Field> Transmission<F> {
    pub fn new(expr: LinearExpr<F>) -> Self {
        Transmission {
            expr,
            needs_csi: BTreeSet::new(),
        }
    }

    pub fn with_csi(expr: LinearExpr<F>, needs_csi: BTreeSet<usize>) -> Self {
        Transmission { expr, needs_csi }
    }
}

/// What goes on the air in one slot; absent transmitters stay silent.
#[derive(Clone, Debug, Default)]
pub struct SlotPlan<F: Field> {
    pub t: usize,
    pub transmissions: BTreeMap<usize, Transmission<F>>,
}

impl<F: Field> SlotPlan<F> {
    pub fn new(t: usize) -> Self {
        SlotPlan {
            t,
            transmissions: BTreeMap::new(),
        }
    }

    pub fn send(&mut self, tx: usize, tr: Transmission<F>) {
        self.transmissions.insert(tx, tr);
    }
}

#[derive(Clone, Debug)]
pub struct ReceiverState<F: Field> {
    /// One entry per elapsed slot.
    pub received: Vec<LinearExpr<F>>,
}

#[derive(Clone, Debug)]
pub struct TransmitterState<F: Field> {
    /// Everything the transmitter can compute, in arrival order: own fresh
    /// symbols, feedback values, full-duplex receptions.  Only grows.
    pub side_info: Vec<LinearExpr<F>>,
    span: Eliminator<F>,
}

impl<F: Field> TransmitterState<F> {
    fn new() -> Self {
        TransmitterState {
            side_info: Vec::new(),
            span: Eliminator::new(),
        }
    }

    fn learn(&mut self, expr: LinearExpr<F>) {
        self.span.insert(&expr);
        self.side_info.push(expr);
    }

    /// True iff `target` lies in the span of what this transmitter knows.
    pub fn can_form(&self, target: &LinearExpr<F>) -> bool {
        self.span.contains(target)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// The expression is outside the transmitter's value span.
    SpanInfeasible,
    /// The expression needs channel coefficients the model withholds.
    CsiUnavailable,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub slot: usize,
    pub tx: usize,
    pub kind: ViolationKind,
}

fn serialize_dof<S: serde::Serializer>(dof: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match dof {
        Some(r) => s.serialize_some(&render(r)),
        None => s.serialize_none(),
    }
}

/// Outcome of a finished run.
#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub scheme: String,
    pub field: String,
    pub seed: u64,
    pub symbols_injected: u64,
    pub slots_used: u64,
    pub per_rx_decodable: BTreeMap<usize, bool>,
    pub all_decodable: bool,
    /// symbols/slots; `None` (flagged) when no slot was consumed.
    #[serde(serialize_with = "serialize_dof")]
    pub empirical_dof: Option<Rational>,
    pub feasibility_violations: Vec<Violation>,
    pub flags: Vec<String>,
}

impl SimReport {
    pub fn ok(&self) -> bool {
        self.all_decodable && self.feasibility_violations.is_empty()
    }
}

/// Mutable state of one run: channel, node knowledge, symbol pool, and the
/// offline coefficient stream shared by all nodes.
pub struct Simulation<F: Field> {
    pub feedback: Feedback,
    pub channel: ChannelRealization<F>,
    pub pool: SymbolPool,
    pub coeff_rng: ChaCha12Rng,
    pub rx: Vec<ReceiverState<F>>,
    pub tx: Vec<TransmitterState<F>>,
    pub t: usize,
    pub strict: bool,
    pub violations: Vec<Violation>,
    desired: BTreeMap<usize, BTreeSet<SymbolId>>,
    info_symbols: u64,
    trace: Option<Vec<Value>>,
}

impl<F: Field> Simulation<F> {
    pub fn new(
        feedback: Feedback,
        channel: ChannelRealization<F>,
        seed: u64,
        strict: bool,
    ) -> Self {
        let mut coeff_rng = ChaCha12Rng::seed_from_u64(seed);
        coeff_rng.set_stream(1);
        let rx = (0..channel.rx_count)
            .map(|_| ReceiverState {
                received: Vec::new(),
            })
            .collect();
        let tx = (0..channel.tx_count)
            .map(|_| TransmitterState::new())
            .collect();
        Simulation {
            feedback,
            channel,
            pool: SymbolPool::new(),
            coeff_rng,
            rx,
            tx,
            t: 0,
            strict,
            violations: Vec::new(),
            desired: BTreeMap::new(),
            info_symbols: 0,
            trace: None,
        }
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    /// Mints fresh information symbols: they enter the owner's span, and the
    /// intended receiver's decode targets.
    pub fn mint_info(
        &mut self,
        count: usize,
        owner_tx: usize,
        intended_rx: usize,
    ) -> Vec<SymbolId> {
        let ids = self.pool.mint_fresh(count, owner_tx, intended_rx);
        for &id in &ids {
            self.tx[owner_tx].learn(LinearExpr::single(id, F::one()));
            self.desired.entry(intended_rx).or_default().insert(id);
        }
        self.info_symbols += count as u64;
        ids
    }

    /// Mints opaque atoms for standalone phase fixtures; they count as
    /// pre-delivered inputs, not as injected information symbols, and each
    /// listed holder's span absorbs them.
    pub fn mint_atoms(&mut self, count: usize, holders: &[usize], rep_rx: usize) -> Vec<SymbolId> {
        let owner = *holders.first().expect("at least one holder");
        let ids = self.pool.mint_fresh(count, owner, rep_rx);
        for &id in &ids {
            for &h in holders {
                self.tx[h].learn(LinearExpr::single(id, F::one()));
            }
        }
        ids
    }

    /// Grants a transmitter an already-known value (fixture side info).
    pub fn grant_tx(&mut self, tx: usize, expr: LinearExpr<F>) {
        self.tx[tx].learn(expr);
    }

    pub fn tx_can_form(&self, tx: usize, target: &LinearExpr<F>) -> bool {
        self.tx[tx].can_form(target)
    }

    fn csi_allowed(&self, needs: &BTreeSet<usize>, now: usize) -> bool {
        match self.feedback {
            // Output feedback carries no CSI to the transmitters at all.
            Feedback::OutputFeedback => needs.is_empty(),
            // Delayed CSIT: every strictly past cross matrix is available.
            Feedback::FullDuplexDelayedCsit | Feedback::ShannonFeedback => {
                needs.iter().all(|&s| s < now)
            }
        }
    }

    /// Executes one slot: feasibility checks, receptions, side-information
    /// updates per the feedback model.
    pub fn apply_slot(&mut self, plan: SlotPlan<F>) -> Result<(), SchemeError> {
        if plan.t != self.t {
            return Err(SchemeError::Sim(format!(
                "slot plan out of order: got {}, expected {}",
                plan.t, self.t
            )));
        }
        if self.t >= self.channel.horizon {
            return Err(SchemeError::Sim(format!(
                "slot {} beyond channel horizon {}",
                self.t, self.channel.horizon
            )));
        }
        let t = self.t;

        for (&tx, tr) in &plan.transmissions {
            if !self.csi_allowed(&tr.needs_csi, t) {
                self.violations.push(Violation {
                    slot: t,
                    tx,
                    kind: ViolationKind::CsiUnavailable,
                });
                if self.strict {
                    return Err(SchemeError::CsiUnavailable { slot: t, tx });
                }
            }
            if !self.tx[tx].can_form(&tr.expr) {
                self.violations.push(Violation {
                    slot: t,
                    tx,
                    kind: ViolationKind::SpanInfeasible,
                });
                if self.strict {
                    return Err(SchemeError::Infeasible { slot: t, tx });
                }
            }
        }

        // Receptions: y_j = sum_i h[j][i] x_i.
        for j in 0..self.channel.rx_count {
            let mut y = LinearExpr::zero();
            for (&tx, tr) in &plan.transmissions {
                y = y.add_scaled(&tr.expr, self.channel.cross(t, j, tx));
            }
            self.rx[j].received.push(y);
        }

        // Side information, available from the next slot on.
        match self.feedback {
            Feedback::FullDuplexDelayedCsit => {
                for i in 0..self.channel.tx_count {
                    let mut y = LinearExpr::zero();
                    for (&tx, tr) in &plan.transmissions {
                        y = y.add_scaled(&tr.expr, self.channel.fullduplex(t, i, tx));
                    }
                    self.tx[i].learn(y);
                }
            }
            Feedback::OutputFeedback | Feedback::ShannonFeedback => {
                debug_assert_eq!(self.channel.rx_count, self.channel.tx_count);
                for i in 0..self.channel.tx_count {
                    let y = self.rx[i].received[t].clone();
                    self.tx[i].learn(y);
                }
            }
        }

        if let Some(trace) = &mut self.trace {
            trace.push(slot_record(&self.channel, t, &plan));
        }
        self.t += 1;
        Ok(())
    }

    /// The expression receiver `rx` heard in slot `t`.
    pub fn reception(&self, rx: usize, t: usize) -> &LinearExpr<F> {
        &self.rx[rx].received[t]
    }

    pub fn desired(&self) -> &BTreeMap<usize, BTreeSet<SymbolId>> {
        &self.desired
    }

    /// Per-receiver decodability verdicts over the full reception history,
    /// plus the slot and symbol accounting.
    pub fn finalize(&self, scheme: &str, seed: u64) -> SimReport {
        let mut per_rx = BTreeMap::new();
        for j in 0..self.channel.rx_count {
            let verdict = match self.desired.get(&j) {
                None => true,
                Some(targets) => {
                    let mut span = Eliminator::new();
                    for e in &self.rx[j].received {
                        span.insert(e);
                    }
                    decodable_in(&span, targets)
                }
            };
            per_rx.insert(j, verdict);
        }
        let all = per_rx.values().all(|&v| v);
        let mut flags = Vec::new();
        let empirical = if self.t == 0 {
            flags.push("division-undefined".to_string());
            None
        } else {
            Some(rat_u128(self.info_symbols as u128, self.t as u128))
        };
        SimReport {
            scheme: scheme.to_string(),
            field: F::NAME.to_string(),
            seed,
            symbols_injected: self.info_symbols,
            slots_used: self.t as u64,
            per_rx_decodable: per_rx,
            all_decodable: all,
            empirical_dof: empirical,
            feasibility_violations: self.violations.clone(),
            flags,
        }
    }

    /// Line-oriented trace: one object per slot, if tracing was enabled.
    pub fn trace_lines(&self) -> Option<&[Value]> {
        self.trace.as_deref()
    }
}

fn slot_record<F: Field>(ch: &ChannelRealization<F>, t: usize, plan: &SlotPlan<F>) -> Value {
    let h: Vec<Vec<Value>> = (0..ch.rx_count)
        .map(|j| {
            (0..ch.tx_count)
                .map(|i| ch.cross(t, j, i).to_json())
                .collect()
        })
        .collect();
    let mut record = json!({
        "t": t,
        "H": h,
        "transmissions": plan
            .transmissions
            .iter()
            .map(|(tx, tr)| (tx.to_string(), tr.expr.to_json()))
            .collect::<serde_json::Map<String, Value>>(),
    });
    if ch.has_fullduplex() {
        let ht: Vec<Vec<Value>> = (0..ch.tx_count)
            .map(|i| {
                (0..ch.tx_count)
                    .map(|i2| ch.fullduplex(t, i, i2).to_json())
                    .collect()
            })
            .collect();
        record["H_tilde"] = json!(ht);
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_channel;
    use crate::field::Fp61;

    fn small_sim(feedback: Feedback, fullduplex: bool) -> Simulation<Fp61> {
        let ch = generate_channel(3, 3, 8, 42, fullduplex);
        Simulation::new(feedback, ch, 42, true)
    }

    #[test]
    fn reception_is_channel_combination() {
        let mut sim = small_sim(Feedback::OutputFeedback, false);
        let u = sim.mint_info(1, 0, 0)[0];
        let v = sim.mint_info(1, 1, 1)[0];
        let mut plan = SlotPlan::new(0);
        plan.send(0, Transmission::new(LinearExpr::single(u, Fp61::new(1))));
        plan.send(1, Transmission::new(LinearExpr::single(v, Fp61::new(1))));
        sim.apply_slot(plan).unwrap();
        let y2 = sim.reception(2, 0);
        assert_eq!(y2.coeff(u), sim.channel.cross(0, 2, 0));
        assert_eq!(y2.coeff(v), sim.channel.cross(0, 2, 1));
        assert_eq!(sim.rx[0].received.len(), 1);
    }

    #[test]
    fn silent_slot_appends_zero_and_advances() {
        let mut sim = small_sim(Feedback::OutputFeedback, false);
        sim.apply_slot(SlotPlan::new(0)).unwrap();
        assert!(sim.reception(0, 0).is_zero());
        assert_eq!(sim.t, 1);
        // Out-of-order plans are rejected.
        assert!(sim.apply_slot(SlotPlan::new(0)).is_err());
    }

    #[test]
    fn full_duplex_lets_the_partner_learn_a_symbol() {
        let mut sim = small_sim(Feedback::FullDuplexDelayedCsit, true);
        let u = sim.mint_info(1, 0, 0)[0];
        let v = sim.mint_info(1, 1, 1)[0];
        let mut plan = SlotPlan::new(0);
        plan.send(0, Transmission::new(LinearExpr::single(u, Fp61::new(1))));
        plan.send(1, Transmission::new(LinearExpr::single(v, Fp61::new(1))));
        sim.apply_slot(plan).unwrap();
        // After the slot TX0 spans its partner's symbol outright and can
        // reconstruct RX2's reception using the past cross matrix.
        assert!(sim.tx_can_form(0, &LinearExpr::single(v, Fp61::new(1))));
        let target = sim.reception(2, 0).clone();
        assert!(sim.tx_can_form(0, &target));
        // An unrelated fresh symbol of TX1 stays out of reach.
        let w = sim.mint_info(1, 1, 1)[0];
        assert!(!sim.tx_can_form(0, &LinearExpr::single(w, Fp61::new(1))));
    }

    #[test]
    fn shannon_feedback_reconstructs_the_idle_receiver_equation() {
        // Two transmitters send fresh symbols, the third stays silent.  With
        // Shannon feedback each sender cancels its own symbol from its
        // fed-back output, decodes the other, and can then rebuild what the
        // idle receiver heard.
        let mut sim = small_sim(Feedback::ShannonFeedback, false);
        let u = sim.mint_info(1, 0, 0)[0];
        let v = sim.mint_info(1, 1, 1)[0];
        let mut plan = SlotPlan::new(0);
        plan.send(0, Transmission::new(LinearExpr::single(u, Fp61::new(1))));
        plan.send(1, Transmission::new(LinearExpr::single(v, Fp61::new(1))));
        sim.apply_slot(plan).unwrap();
        let idle = sim.reception(2, 0).clone();
        assert!(sim.tx_can_form(0, &idle));
        assert!(sim.tx_can_form(1, &idle));
        // TX2 holds that equation too (its own feedback), but neither pure
        // symbol on its own.
        assert!(sim.tx_can_form(2, &idle));
        assert!(!sim.tx_can_form(2, &LinearExpr::single(u, Fp61::new(1))));
    }

    #[test]
    fn output_feedback_grants_only_the_paired_output() {
        let mut sim = small_sim(Feedback::OutputFeedback, false);
        let u = sim.mint_info(1, 0, 0)[0];
        let v = sim.mint_info(1, 1, 1)[0];
        let w = sim.mint_info(1, 2, 2)[0];
        let mut plan = SlotPlan::new(0);
        plan.send(0, Transmission::new(LinearExpr::single(u, Fp61::new(1))));
        plan.send(1, Transmission::new(LinearExpr::single(v, Fp61::new(1))));
        plan.send(2, Transmission::new(LinearExpr::single(w, Fp61::new(1))));
        sim.apply_slot(plan).unwrap();
        let y0 = sim.reception(0, 0).clone();
        let y2 = sim.reception(2, 0).clone();
        assert!(sim.tx_can_form(0, &y0));
        // TX0 holds u and one combination of (v, w); another generic
        // combination of them is out of reach under output feedback.
        assert!(!sim.tx_can_form(0, &y2));
        assert!(!sim.tx_can_form(0, &LinearExpr::single(v, Fp61::new(1))));
    }

    #[test]
    fn strict_mode_rejects_infeasible_transmissions() {
        let mut sim = small_sim(Feedback::OutputFeedback, false);
        let _ = sim.mint_info(1, 0, 0);
        let v = sim.mint_info(1, 1, 1)[0];
        let mut plan = SlotPlan::new(0);
        // TX0 does not know v.
        plan.send(0, Transmission::new(LinearExpr::single(v, Fp61::new(1))));
        match sim.apply_slot(plan) {
            Err(SchemeError::Infeasible { slot: 0, tx: 0 }) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn csi_rules_per_model() {
        // Output feedback: any CSI requirement is a violation.
        let mut sim = small_sim(Feedback::OutputFeedback, false);
        let u = sim.mint_info(1, 0, 0)[0];
        let mut plan = SlotPlan::new(0);
        plan.send(
            0,
            Transmission::with_csi(
                LinearExpr::single(u, Fp61::new(1)),
                [0usize].into_iter().collect(),
            ),
        );
        assert!(matches!(
            sim.apply_slot(plan),
            Err(SchemeError::CsiUnavailable { .. })
        ));

        // Delayed CSIT: past slots fine, current slot not yet fed back.
        let mut sim = small_sim(Feedback::ShannonFeedback, false);
        let u = sim.mint_info(1, 0, 0)[0];
        let mut plan = SlotPlan::new(0);
        plan.send(
            0,
            Transmission::with_csi(
                LinearExpr::single(u, Fp61::new(1)),
                [0usize].into_iter().collect(),
            ),
        );
        assert!(sim.apply_slot(plan).is_err());
    }

    #[test]
    fn finalize_counts_and_flags() {
        let sim = small_sim(Feedback::OutputFeedback, false);
        let report = sim.finalize("empty", 42);
        assert_eq!(report.slots_used, 0);
        assert!(report.empirical_dof.is_none());
        assert_eq!(report.flags, vec!["division-undefined".to_string()]);

        let mut sim = small_sim(Feedback::OutputFeedback, false);
        let u = sim.mint_info(1, 0, 0)[0];
        let mut plan = SlotPlan::new(0);
        plan.send(0, Transmission::new(LinearExpr::single(u, Fp61::new(1))));
        sim.apply_slot(plan).unwrap();
        let report = sim.finalize("one-shot", 42);
        assert_eq!(report.symbols_injected, 1);
        assert_eq!(report.slots_used, 1);
        assert!(report.all_decodable);
        assert_eq!(report.empirical_dof, Some(crate::rat(1, 1)));
    }

    #[test]
    fn withholding_an_equation_breaks_decodability() {
        // Two symbols for RX0, only one slot of evidence.
        let mut sim = small_sim(Feedback::OutputFeedback, false);
        let ids = sim.mint_info(2, 0, 0);
        let mut plan = SlotPlan::new(0);
        plan.send(
            0,
            Transmission::new(LinearExpr::from_terms(vec![
                (ids[0], Fp61::new(3)),
                (ids[1], Fp61::new(5)),
            ])),
        );
        sim.apply_slot(plan).unwrap();
        let report = sim.finalize("short", 42);
        assert!(!report.per_rx_decodable[&0]);
        assert!(!report.ok());
    }
}
