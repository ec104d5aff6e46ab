//! Standalone verification of a single transmission phase: synthesized,
//! already-delivered inputs go in; the phase must hit its exact
//! consumed/slots/produced identity and every participating receiver must
//! be able to decode its inputs once the phase's outputs are granted as
//! side information.
//!
//! Inputs are synthesized as opaque atoms (one fresh id per input symbol,
//! registered with the transmitters that would hold it under the model).
//! Atoms are the canonical generic expressions: a real run's inputs differ
//! from them by a generically invertible change of basis, which leaves
//! every rank verdict unchanged.

use super::ic::{run_ic_phase, IcUnitRecord, IcVariant};
use super::sf::{run_sf_phase, sf_phase_ledger, SfUnitRecord};
use super::{combinations, complement, ClassStock, PhaseLedger, Subset};
use crate::channel::generate_channel;
use crate::combin::{binomial, l_lcm, q_min};
use crate::expr::{decodable, random_coeffs, LinearExpr, SymbolId, SymbolSpec};
use crate::field::{Field, Fp61};
use crate::sim::{Simulation, SlotPlan, Transmission};
use crate::{ChannelKind, Feedback, ModelId, SchemeError};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Outcome of a standalone phase run.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    pub model: ModelId,
    pub m: u32,
    pub k: u32,
    pub m_tx: Option<u32>,
    pub measured: PhaseLedger,
    pub expected: PhaseLedger,
    pub decodable: bool,
    pub feasibility_violations: usize,
}

fn c(n: u32, r: u32) -> u128 {
    binomial(n as u64, r as u64)
}

/// Runs one pass of phase `m` of the given model over synthesized inputs
/// and checks the ledger identity and post-grant decodability.
///
/// Supported: IC full-duplex and output feedback for 2 <= m <= K-1, the
/// Shannon-feedback order-raising machinery (IC, and the X channel's round
/// 2, which is the same machinery) for 2 <= m <= K, and the full-duplex
/// X-channel phase for M > ceil(K/2), 2 <= m <= K/2.
pub fn verify_phase(
    model: ModelId,
    m: u32,
    k: u32,
    m_tx: Option<u32>,
    seed: u64,
) -> Result<PhaseReport, SchemeError> {
    match (model.channel, model.feedback) {
        (ChannelKind::Ic, Feedback::FullDuplexDelayedCsit) => {
            verify_ic_phase(model, m, k, IcVariant::FullDuplex, seed)
        }
        (ChannelKind::Ic, Feedback::OutputFeedback) => {
            verify_ic_phase(model, m, k, IcVariant::OutputFeedback, seed)
        }
        (ChannelKind::Ic, Feedback::ShannonFeedback)
        | (ChannelKind::X, Feedback::ShannonFeedback) => verify_sf_phase(model, m, k, seed),
        (ChannelKind::X, Feedback::FullDuplexDelayedCsit) => {
            let m_tx = m_tx.ok_or_else(|| {
                SchemeError::Unsupported("xfd phase verification needs --m-tx".into())
            })?;
            verify_xfd_phase(model, m, k, m_tx, seed)
        }
        (ChannelKind::X, Feedback::OutputFeedback) => Err(SchemeError::Unsupported(
            "xof is a two-phase scheme without an order-raising cascade; run the end-to-end simulation instead".into(),
        )),
    }
}

fn verify_ic_phase(
    model: ModelId,
    m: u32,
    k: u32,
    variant: IcVariant,
    seed: u64,
) -> Result<PhaseReport, SchemeError> {
    if !(2 <= m && m < k) {
        return Err(SchemeError::Unsupported(format!(
            "IC phase verification needs 2 <= m <= K-1, got m={m}, K={k}"
        )));
    }
    let q = q_min(m, k)?;
    let l = l_lcm(m, k)?;
    let demand_per_class = (c(k - m - 1, q - 1) * (l / m) as u128) as usize;
    let units = c(k, m + 1) * c(k - m - 1, q - 1);
    let expected = PhaseLedger {
        label: format!("phase-{m}"),
        passes: 1,
        consumed: units * (m as u128 + 1) * (l / m) as u128,
        slots: units * (l / q) as u128,
        produced: units * (q as u128 - 1) * (l / q) as u128,
    };

    let horizon = expected.slots as usize;
    let fullduplex = variant == IcVariant::FullDuplex;
    let channel = generate_channel::<Fp61>(k as usize, k as usize, horizon, seed, fullduplex);
    let mut sim = Simulation::new(model.feedback, channel, seed, true);

    let mut stock = ClassStock::new();
    let mut consumed_total = 0u128;
    for class in combinations(0..k as usize, m as usize) {
        for &j in &complement(k, &class) {
            let holders: Vec<usize> = match variant {
                IcVariant::FullDuplex => class.clone(),
                IcVariant::OutputFeedback => vec![j],
            };
            let ids = sim.mint_atoms(demand_per_class, &holders, j);
            consumed_total += ids.len() as u128;
            for id in ids {
                let mut spec = SymbolSpec::new(
                    LinearExpr::single(id, Fp61::one()),
                    holders.clone(),
                    class.clone(),
                    vec![j],
                );
                if variant == IcVariant::OutputFeedback {
                    spec = spec.with_feedback_holder(j);
                }
                stock.push((class.clone(), j), spec);
            }
        }
    }

    let mut records: Vec<IcUnitRecord<Fp61>> = Vec::new();
    run_ic_phase(&mut sim, k, m, variant, &mut stock, 1, Some(&mut records))?;

    let produced_total: u128 = records.iter().map(|r| r.outputs.len() as u128).sum();
    let measured = PhaseLedger {
        label: expected.label.clone(),
        passes: 1,
        consumed: consumed_total,
        slots: sim.t as u128,
        produced: produced_total,
    };
    check_ledger(model, m, k, &measured, &expected)?;

    // Post-grant decodability, unit by unit: each active receiver cancels
    // its own class and solves for the other classes' atoms from its direct
    // receptions plus the granted outputs.
    for record in &records {
        let granted: Vec<LinearExpr<Fp61>> =
            record.outputs.iter().map(|o| o.expr.clone()).collect();
        for &j in &record.active {
            let eqs: Vec<LinearExpr<Fp61>> = (record.slot_start
                ..record.slot_start + record.slot_count)
                .map(|t| sim.reception(j, t).clone())
                .collect();
            let mut known = granted.clone();
            let mut targets: BTreeSet<SymbolId> = BTreeSet::new();
            for (member, syms) in &record.inputs {
                for s in syms {
                    if *member == j {
                        known.push(s.expr.clone());
                    } else {
                        targets.extend(s.expr.support());
                    }
                }
            }
            if !decodable(&eqs, &known, &targets) {
                return Err(SchemeError::DecodeFailure(format!(
                    "{model} phase {m} at K={k}: receiver {j} cannot decode its unit inputs after the grant"
                )));
            }
        }
    }

    Ok(PhaseReport {
        model,
        m,
        k,
        m_tx: None,
        measured,
        expected,
        decodable: true,
        feasibility_violations: sim.violations.len(),
    })
}

fn verify_sf_phase(model: ModelId, m: u32, k: u32, seed: u64) -> Result<PhaseReport, SchemeError> {
    if !(2 <= m && m <= k) {
        return Err(SchemeError::Unsupported(format!(
            "Shannon-feedback phase verification needs 2 <= m <= K, got m={m}, K={k}"
        )));
    }
    let q = q_min(m, k + 1)?;
    let demand_per_group = (q as u128 * c(k - m, q - 1)) as usize;
    let expected = sf_phase_ledger(k, m, 1, format!("phase-{m}"))?;

    let horizon = expected.slots as usize;
    let channel = generate_channel::<Fp61>(k as usize, k as usize, horizon, seed, false);
    let mut sim = Simulation::new(Feedback::ShannonFeedback, channel, seed, true);

    let mut stock = ClassStock::new();
    let mut consumed_total = 0u128;
    for group in combinations(0..k as usize, m as usize) {
        let ids = sim.mint_atoms(demand_per_group, &group, group[0]);
        consumed_total += ids.len() as u128;
        for id in ids {
            stock.push(
                group.clone(),
                SymbolSpec::new(
                    LinearExpr::single(id, Fp61::one()),
                    group.clone(),
                    group.clone(),
                    Vec::new(),
                ),
            );
        }
    }

    let mut records: Vec<SfUnitRecord<Fp61>> = Vec::new();
    run_sf_phase(&mut sim, k, m, &mut stock, 1, Some(&mut records))?;

    let measured = PhaseLedger {
        label: expected.label.clone(),
        passes: 1,
        consumed: consumed_total,
        slots: sim.t as u128,
        // Next-order combinations now sitting in the stock.
        produced: if m < k { stock.total() as u128 } else { 0 },
    };
    check_ledger(model, m, k, &measured, &expected)?;

    for record in &records {
        let granted: Vec<LinearExpr<Fp61>> =
            record.outputs.iter().map(|o| o.expr.clone()).collect();
        let targets: BTreeSet<SymbolId> = record
            .inputs
            .iter()
            .flat_map(|s| s.expr.support())
            .collect();
        for &j in &record.active {
            let eqs = vec![sim.reception(j, record.slot).clone()];
            if !decodable(&eqs, &granted, &targets) {
                return Err(SchemeError::DecodeFailure(format!(
                    "{model} phase {m} at K={k}: receiver {j} cannot decode after the grant"
                )));
            }
        }
    }

    Ok(PhaseReport {
        model,
        m,
        k,
        m_tx: None,
        measured,
        expected,
        decodable: true,
        feasibility_violations: sim.violations.len(),
    })
}

/// Full-duplex X-channel phase for M > ceil(K/2): per (2m-receiver fixture,
/// (m+1)-transmitter set) group, one slot per m-subset of fixture receivers
/// in which the active transmitters send one stocked symbol each (cyclic
/// windows of length m cover every m-subset of the active transmitters);
/// the fixture's idle receivers catch equations that regroup, (m+1)-subset
/// by (m+1)-subset, into m random next-order combinations.
fn verify_xfd_phase(
    model: ModelId,
    m: u32,
    k: u32,
    m_tx: u32,
    seed: u64,
) -> Result<PhaseReport, SchemeError> {
    let half_up = k.div_ceil(2);
    if !(m_tx > half_up && 2 <= m && 2 * m <= k && m < m_tx) {
        return Err(SchemeError::Unsupported(format!(
            "xfd phase verification covers M > ceil(K/2) with 2 <= m <= K/2, got m={m}, M={m_tx}, K={k}"
        )));
    }
    let expected = PhaseLedger {
        label: format!("phase-{m}"),
        passes: 1,
        consumed: (m as u128 + 1) * c(m_tx, m + 1) * c(k, 2 * m) * c(2 * m, m),
        slots: c(m_tx, m + 1) * c(k, 2 * m) * c(2 * m, m),
        produced: m as u128 * c(m_tx, m + 1) * c(k, 2 * m) * c(2 * m, m + 1),
    };
    let horizon = expected.slots as usize;
    let channel = generate_channel::<Fp61>(k as usize, m_tx as usize, horizon, seed, true);
    let mut sim = Simulation::new(Feedback::FullDuplexDelayedCsit, channel, seed, true);

    // Demand per (transmitter window, receiver set) class.
    let demand = ((m_tx - m) as u128 * c(k - m, m)) as usize;
    let mut stock: ClassStock<Fp61, (Subset, Subset)> = ClassStock::new();
    let mut consumed_total = 0u128;
    for window in combinations(0..m_tx as usize, m as usize) {
        for rx_set in combinations(0..k as usize, m as usize) {
            let ids = sim.mint_atoms(demand, &window, rx_set[0]);
            consumed_total += ids.len() as u128;
            for id in ids {
                stock.push(
                    (window.clone(), rx_set.clone()),
                    SymbolSpec::new(
                        LinearExpr::single(id, Fp61::one()),
                        window.clone(),
                        rx_set.clone(),
                        Vec::new(),
                    ),
                );
            }
        }
    }

    let mut produced_total = 0u128;
    let width = m as usize + 1;
    for rx_fixture in combinations(0..k as usize, 2 * m as usize) {
        for tx_set in combinations(0..m_tx as usize, width) {
            // (receiver set -> targets) and (receiver set, idle rx) -> side
            // equation, local to this group.
            let mut unit_targets: BTreeMap<Subset, BTreeSet<SymbolId>> = BTreeMap::new();
            let mut side_eqs: BTreeMap<(Subset, usize), LinearExpr<Fp61>> = BTreeMap::new();
            let mut unit_slot: BTreeMap<Subset, usize> = BTreeMap::new();
            for rx_set in combinations(rx_fixture.iter().copied(), m as usize) {
                let t = sim.t;
                let mut plan = SlotPlan::new(t);
                let mut targets = BTreeSet::new();
                for n in 0..width {
                    let mut window: Subset =
                        (0..m as usize).map(|d| tx_set[(n + d) % width]).collect();
                    window.sort_unstable();
                    let sym = stock.pop_n(&(window, rx_set.clone()), 1)?.remove(0);
                    targets.extend(sym.expr.support());
                    plan.send(tx_set[n], Transmission::new(sym.expr));
                }
                sim.apply_slot(plan)?;
                for &j in rx_fixture.iter().filter(|j| !rx_set.contains(j)) {
                    side_eqs.insert((rx_set.clone(), j), sim.reception(j, t).clone());
                }
                unit_targets.insert(rx_set.clone(), targets);
                unit_slot.insert(rx_set, t);
            }
            // Regroup: m random combinations per (m+1)-subset of fixture
            // receivers, over the equations its members caught for each
            // other.
            let mut granted: BTreeMap<Subset, Vec<LinearExpr<Fp61>>> = BTreeMap::new();
            for rx_next in combinations(rx_fixture.iter().copied(), width) {
                let parts: Vec<&LinearExpr<Fp61>> = rx_next
                    .iter()
                    .map(|&j| {
                        let rx_set: Subset = rx_next.iter().copied().filter(|&x| x != j).collect();
                        &side_eqs[&(rx_set, j)]
                    })
                    .collect();
                let combos: Vec<LinearExpr<Fp61>> = (0..m)
                    .map(|_| {
                        let coeffs: Vec<Fp61> = random_coeffs(parts.len(), &mut sim.coeff_rng);
                        LinearExpr::combination(&parts, &coeffs)
                    })
                    .collect();
                produced_total += combos.len() as u128;
                granted.insert(rx_next, combos);
            }
            // Decodability: each fixture receiver must resolve every atom it
            // wants from its own group receptions plus the combinations
            // addressed to subsets containing it.
            for &j in &rx_fixture {
                let mut eqs: Vec<LinearExpr<Fp61>> = unit_slot
                    .values()
                    .map(|&t| sim.reception(j, t).clone())
                    .collect();
                for (rx_next, combos) in &granted {
                    if rx_next.contains(&j) {
                        eqs.extend(combos.iter().cloned());
                    }
                }
                let targets: BTreeSet<SymbolId> = unit_targets
                    .iter()
                    .filter(|(rx_set, _)| rx_set.contains(&j))
                    .flat_map(|(_, t)| t.iter().copied())
                    .collect();
                if !decodable(&eqs, &[], &targets) {
                    return Err(SchemeError::DecodeFailure(format!(
                        "xfd phase {m} at (M={m_tx}, K={k}): receiver {j} cannot decode its group inputs"
                    )));
                }
            }
        }
    }

    let measured = PhaseLedger {
        label: expected.label.clone(),
        passes: 1,
        consumed: consumed_total,
        slots: sim.t as u128,
        produced: produced_total,
    };
    check_ledger(model, m, k, &measured, &expected)?;
    Ok(PhaseReport {
        model,
        m,
        k,
        m_tx: Some(m_tx),
        measured,
        expected,
        decodable: true,
        feasibility_violations: sim.violations.len(),
    })
}

fn check_ledger(
    model: ModelId,
    m: u32,
    k: u32,
    measured: &PhaseLedger,
    expected: &PhaseLedger,
) -> Result<(), SchemeError> {
    if measured.consumed != expected.consumed
        || measured.slots != expected.slots
        || measured.produced != expected.produced
    {
        return Err(SchemeError::LedgerMismatch(format!(
            "{model} phase {m} at K={k}: measured (consumed {}, slots {}, produced {}) vs expected (consumed {}, slots {}, produced {})",
            measured.consumed,
            measured.slots,
            measured.produced,
            expected.consumed,
            expected.slots,
            expected.produced
        )));
    }
    Ok(())
}
