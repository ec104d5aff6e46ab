//! X-channel schemes: output feedback for any K, the scripted full-duplex
//! 2×2 and 3×3 networks, and Shannon feedback.

use super::ic::drained;
use super::sf::{run_sf_phase, sf_demand_per_group, sf_phase_ledger, sf_supply_per_group};
use super::{
    combinations, seal_policy, solve_passes, ClassStock, PhaseLedger, Policy, SchemeKind, Subset,
};
use crate::combin::binomial;
use crate::dof;
use crate::expr::{random_coeffs, LinearExpr, SymbolSpec};
use crate::field::Field;
use crate::sim::{Simulation, SlotPlan, Transmission};
use crate::{ModelId, SchemeError};
use std::collections::BTreeSet;

pub const XOF_SIM_MAX_K: u32 = 8;
pub const XSF_SIM_MAX_K: u32 = 5;

fn c(n: u32, r: u32) -> u128 {
    binomial(n as u64, r as u64)
}

// ---------------------------------------------------------------------------
// Output feedback
// ---------------------------------------------------------------------------

pub(crate) fn build_xof(k: u32) -> Result<Policy, SchemeError> {
    if !(2..=XOF_SIM_MAX_K).contains(&k) {
        return Err(SchemeError::Unsupported(format!(
            "xof simulation supports 2 <= K <= {XOF_SIM_MAX_K}, got K={k} (analytic DoF remains available)"
        )));
    }
    let k_u = k as u128;
    let phases = vec![
        PhaseLedger {
            label: "phase-1".into(),
            passes: 1,
            consumed: k_u * k_u,
            slots: k_u,
            produced: k_u * (k_u - 1),
        },
        PhaseLedger {
            label: "phase-2".into(),
            passes: 1,
            consumed: k_u * (k_u - 1),
            slots: k_u * (k_u - 1) / 2,
            produced: 0,
        },
    ];
    seal_policy(Policy {
        model: ModelId::X_OF,
        k,
        m_tx: Some(k),
        adaptive: false,
        kind: SchemeKind::XOutputFeedback { k },
        phases,
        symbols_total: 0,
        slots_total: 0,
        analytic_dof: dof::dof_xof(k)?,
    })
}

/// Phase 1: one slot per receiver in which every transmitter sends it a
/// fresh symbol.  Phase 2: one slot per receiver pair in which each of the
/// two paired transmitters resends the fed-back equation the other receiver
/// wants; each receiver cancels its own known reception.
pub(crate) fn run_xof<F: Field>(sim: &mut Simulation<F>, k: u32) -> Result<(), SchemeError> {
    let k = k as usize;
    let base = sim.t;
    for j in 0..k {
        let mut plan = SlotPlan::new(sim.t);
        for i in 0..k {
            let id = sim.mint_info(1, i, j)[0];
            plan.send(i, Transmission::new(LinearExpr::single(id, F::one())));
        }
        sim.apply_slot(plan)?;
    }
    for pair in combinations(0..k, 2) {
        let (a, b) = (pair[0], pair[1]);
        let mut plan = SlotPlan::new(sim.t);
        // Raw feedback values; no CSI enters the transmit side.
        plan.send(a, Transmission::new(sim.reception(a, base + b).clone()));
        plan.send(b, Transmission::new(sim.reception(b, base + a).clone()));
        sim.apply_slot(plan)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Full duplex: scripted 2x2 and 3x3 networks
// ---------------------------------------------------------------------------

pub(crate) fn build_xfd(m_tx: u32, k: u32) -> Result<Policy, SchemeError> {
    let phases = match (m_tx, k) {
        (2, 2) => vec![
            PhaseLedger {
                label: "phase-1".into(),
                passes: 1,
                consumed: 4,
                slots: 2,
                produced: 2,
            },
            PhaseLedger {
                label: "phase-2".into(),
                passes: 1,
                consumed: 2,
                slots: 1,
                produced: 0,
            },
        ],
        (3, 3) => vec![
            PhaseLedger {
                label: "phase-1".into(),
                passes: 3,
                consumed: 72,
                slots: 36,
                produced: 18,
            },
            PhaseLedger {
                label: "phase-2".into(),
                passes: 3,
                consumed: 18,
                slots: 9,
                produced: 9,
            },
            PhaseLedger {
                label: "phase-3".into(),
                passes: 3,
                consumed: 9,
                slots: 6,
                produced: 0,
            },
        ],
        _ => {
            return Err(SchemeError::Unsupported(format!(
                "xfd end-to-end simulation covers (M,K) in {{(2,2),(3,3)}}, got ({m_tx},{k}): analytic-only"
            )))
        }
    };
    seal_policy(Policy {
        model: ModelId::X_FD,
        k,
        m_tx: Some(m_tx),
        adaptive: true,
        kind: SchemeKind::XFullDuplex { m_tx, k },
        phases,
        symbols_total: 0,
        slots_total: 0,
        analytic_dof: dof::dof_xfd(m_tx, k)?,
    })
}

pub(crate) fn run_xfd<F: Field>(
    sim: &mut Simulation<F>,
    m_tx: u32,
    k: u32,
    phases: &[PhaseLedger],
) -> Result<(), SchemeError> {
    match (m_tx, k) {
        (2, 2) => run_xfd22(sim),
        (3, 3) => {
            for anchor in 0..phases[0].passes as usize {
                run_xfd33_block(sim, anchor % 3)?;
            }
            Ok(())
        }
        _ => Err(SchemeError::Unsupported(format!(
            "xfd simulation for ({m_tx},{k})"
        ))),
    }
}

/// 2×2: two slots of fresh pairs (one per receiver), then one slot in which
/// a single transmitter sends the sum of the two cross receptions; each
/// receiver cancels the one it already holds.
fn run_xfd22<F: Field>(sim: &mut Simulation<F>) -> Result<(), SchemeError> {
    let base = sim.t;
    for j in 0..2 {
        let mut plan = SlotPlan::new(sim.t);
        for i in 0..2 {
            let id = sim.mint_info(1, i, j)[0];
            plan.send(i, Transmission::new(LinearExpr::single(id, F::one())));
        }
        sim.apply_slot(plan)?;
    }
    // RX1's equation from slot 0 plus RX0's equation from slot 1; both
    // transmitters can reconstruct it, the lower-indexed one sends.
    let expr = sim.reception(1, base).add(sim.reception(0, base + 1));
    let mut plan = SlotPlan::new(sim.t);
    plan.send(
        0,
        Transmission::with_csi(expr, [base, base + 1].into_iter().collect()),
    );
    sim.apply_slot(plan)
}

/// One 24-symbol, 17-slot block of the 3×3 full-duplex scheme, with the
/// anchor transmitter (the one active in both phase-1 pairings and alone in
/// phase 3) rotated across blocks so the three blocks together load all nine
/// messages evenly.
fn run_xfd33_block<F: Field>(sim: &mut Simulation<F>, anchor: usize) -> Result<(), SchemeError> {
    let partners = [(anchor + 1) % 3, (anchor + 2) % 3];
    let rx_pairs: Vec<Subset> = combinations(0..3, 2);
    // combos[p][pr]: sum of the two cross receptions of partner-p's pairing
    // for receiver pair pr, reconstructable by {anchor, partner}.
    let mut combos: Vec<Vec<(LinearExpr<F>, BTreeSet<usize>)>> = vec![Vec::new(), Vec::new()];
    for (p, &partner) in partners.iter().enumerate() {
        for pr in &rx_pairs {
            let (j1, j2) = (pr[0], pr[1]);
            let slot_a = sim.t;
            for &j in &[j1, j2] {
                let mut plan = SlotPlan::new(sim.t);
                for &i in &[anchor, partner] {
                    let id = sim.mint_info(1, i, j)[0];
                    plan.send(i, Transmission::new(LinearExpr::single(id, F::one())));
                }
                sim.apply_slot(plan)?;
            }
            let expr = sim.reception(j2, slot_a).add(sim.reception(j1, slot_a + 1));
            combos[p].push((expr, [slot_a, slot_a + 1].into_iter().collect()));
        }
    }
    // Phase 2: per receiver pair, the anchor sends its second-pairing combo
    // and the first partner sends the first-pairing one; the third
    // receiver's equation is wanted by both and only the anchor can form it.
    let mut primes: Vec<(LinearExpr<F>, BTreeSet<usize>)> = Vec::new();
    for (idx, pr) in rx_pairs.iter().enumerate() {
        let third = (0..3).find(|j| !pr.contains(j)).expect("third receiver");
        let t = sim.t;
        let mut plan = SlotPlan::new(t);
        let (e2, n2) = combos[1][idx].clone();
        let (e1, n1) = combos[0][idx].clone();
        plan.send(anchor, Transmission::with_csi(e2, n2.clone()));
        plan.send(partners[0], Transmission::with_csi(e1, n1.clone()));
        sim.apply_slot(plan)?;
        let mut needs: BTreeSet<usize> = n1.into_iter().chain(n2).collect();
        needs.insert(t);
        primes.push((sim.reception(third, t).clone(), needs));
    }
    // Phase 3: two offline random combinations of the three third-receiver
    // equations, sent by the anchor alone.
    let refs: Vec<&LinearExpr<F>> = primes.iter().map(|(e, _)| e).collect();
    let needs: BTreeSet<usize> = primes.iter().flat_map(|(_, n)| n.iter().copied()).collect();
    for _ in 0..2 {
        let coeffs: Vec<F> = random_coeffs(3, &mut sim.coeff_rng);
        let expr = LinearExpr::combination(&refs, &coeffs);
        let mut plan = SlotPlan::new(sim.t);
        plan.send(anchor, Transmission::with_csi(expr, needs.clone()));
        sim.apply_slot(plan)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shannon feedback
// ---------------------------------------------------------------------------

pub(crate) fn build_xsf(k: u32) -> Result<Policy, SchemeError> {
    if !(2..=XSF_SIM_MAX_K).contains(&k) {
        return Err(SchemeError::Unsupported(format!(
            "xsf simulation supports 2 <= K <= {XSF_SIM_MAX_K}, got K={k} (analytic DoF remains available)"
        )));
    }
    let k_u = k as u128;
    let rep_slots = k_u + c(k - 1, 2);
    let round1 = |passes: u64| PhaseLedger {
        label: "round-1".into(),
        passes,
        consumed: k_u * k_u * k_u * passes as u128,
        slots: k_u * rep_slots * passes as u128,
        produced: k_u * (k_u - 1) * passes as u128,
    };
    let phases = if k == 2 {
        vec![
            round1(1),
            PhaseLedger {
                label: "round-2".into(),
                passes: 1,
                consumed: 2,
                slots: 2,
                produced: 0,
            },
        ]
    } else {
        // Chain: round 1 feeds ordered-pair order-2 symbols, round-2 phase 2
        // converts them into order-3 group combos, then the Shannon IC
        // machinery runs phases 3..=K.
        let mut chain = vec![(1u128, k_u - 2), (2, sf_demand_per_group(k, 3)?)];
        let mut supply = sf_supply_per_group(k, 3)?;
        for m in 4..=k {
            chain.push((supply, sf_demand_per_group(k, m)?));
            supply = sf_supply_per_group(k, m)?;
        }
        let passes = solve_passes(&chain)?;
        let mut phases = vec![
            round1(passes[0]),
            PhaseLedger {
                label: "round-2-phase-2".into(),
                passes: passes[1],
                consumed: 6 * c(k, 3) * passes[1] as u128,
                slots: 3 * c(k, 3) * passes[1] as u128,
                produced: 2 * c(k, 3) * passes[1] as u128,
            },
        ];
        for (idx, m) in (3..=k).enumerate() {
            phases.push(sf_phase_ledger(
                k,
                m,
                passes[idx + 2],
                format!("round-2-phase-{m}"),
            )?);
        }
        phases
    };
    seal_policy(Policy {
        model: ModelId::X_SF,
        k,
        m_tx: Some(k),
        adaptive: true,
        kind: SchemeKind::XShannon { k },
        phases,
        symbols_total: 0,
        slots_total: 0,
        analytic_dof: dof::dof_xsf(k)?,
    })
}

/// Round 1, one repetition per excluded receiver `j0`: an output-feedback
/// opening (fresh symbols, then pair deliveries avoiding `j0`), after which
/// each remaining transmitter has decoded every symbol aimed at its paired
/// receiver and can fold the two leftover deliveries involving `j0` into one
/// order-2 symbol.
fn run_xsf_round1<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    o2: &mut ClassStock<F, (usize, usize)>,
    passes: u64,
) -> Result<(), SchemeError> {
    let k = k as usize;
    for _ in 0..passes {
        for j0 in 0..k {
            let base = sim.t;
            for j in 0..k {
                let mut plan = SlotPlan::new(sim.t);
                for i in 0..k {
                    let id = sim.mint_info(1, i, j)[0];
                    plan.send(i, Transmission::new(LinearExpr::single(id, F::one())));
                }
                sim.apply_slot(plan)?;
            }
            let others: Vec<usize> = (0..k).filter(|&j| j != j0).collect();
            let rep_end_estimate = base + k + others.len() * (others.len() - 1) / 2;
            for pair in combinations(others.iter().copied(), 2) {
                let (a, b) = (pair[0], pair[1]);
                let mut plan = SlotPlan::new(sim.t);
                plan.send(a, Transmission::new(sim.reception(a, base + b).clone()));
                plan.send(b, Transmission::new(sim.reception(b, base + a).clone()));
                sim.apply_slot(plan)?;
            }
            debug_assert_eq!(sim.t, rep_end_estimate);
            // Order-2 leftovers: own fed-back reception of slot j0 plus the
            // reconstructed reception of RX j0 in slot j.
            for &j in &others {
                let expr = sim.reception(j, base + j0).add(sim.reception(j0, base + j));
                let needs: BTreeSet<usize> = (base..sim.t).collect();
                let mut desired = vec![j, j0];
                desired.sort_unstable();
                o2.push(
                    (j, j0),
                    SymbolSpec::new(expr, vec![j], desired, Vec::new()).with_needs_csi(needs),
                );
            }
        }
    }
    Ok(())
}

/// Round-2 phase 2 (K >= 3): per 3-set, three pair slots deliver the order-2
/// symbols; the third receiver's equation each time is reconstructable by
/// the whole 3-set and fed back to its own transmitter, and the three of
/// them collapse into two offline random order-3 combinations.
fn run_xsf_phase2<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    o2: &mut ClassStock<F, (usize, usize)>,
    groups: &mut ClassStock<F, Subset>,
    passes: u64,
) -> Result<(), SchemeError> {
    for _ in 0..passes {
        for s3 in combinations(0..k as usize, 3) {
            let mut parts: Vec<SymbolSpec<F>> = Vec::new();
            for (a, b) in [(s3[0], s3[1]), (s3[0], s3[2]), (s3[1], s3[2])] {
                let third = *s3.iter().find(|&&x| x != a && x != b).expect("third");
                let sym_a = o2.pop_n(&(a, b), 1)?.remove(0);
                let sym_b = o2.pop_n(&(b, a), 1)?.remove(0);
                let t = sim.t;
                let mut plan = SlotPlan::new(t);
                plan.send(
                    a,
                    Transmission::with_csi(sym_a.expr.clone(), sym_a.needs_for(a)),
                );
                plan.send(
                    b,
                    Transmission::with_csi(sym_b.expr.clone(), sym_b.needs_for(b)),
                );
                sim.apply_slot(plan)?;
                let mut needs: BTreeSet<usize> = sym_a
                    .needs_csi
                    .iter()
                    .chain(sym_b.needs_csi.iter())
                    .copied()
                    .collect();
                needs.insert(t);
                parts.push(
                    SymbolSpec::new(
                        sim.reception(third, t).clone(),
                        s3.clone(),
                        vec![a, b],
                        vec![third],
                    )
                    .with_feedback_holder(third)
                    .with_needs_csi(needs),
                );
            }
            let refs: Vec<&LinearExpr<F>> = parts.iter().map(|p| &p.expr).collect();
            let needs: BTreeSet<usize> = parts
                .iter()
                .flat_map(|p| p.needs_csi.iter().copied())
                .collect();
            for _ in 0..2 {
                let coeffs: Vec<F> = random_coeffs(3, &mut sim.coeff_rng);
                groups.push(
                    s3.clone(),
                    SymbolSpec::new(
                        LinearExpr::combination(&refs, &coeffs),
                        s3.clone(),
                        s3.clone(),
                        Vec::new(),
                    )
                    .with_needs_csi(needs.clone()),
                );
            }
        }
    }
    Ok(())
}

pub(crate) fn run_xsf<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    phases: &[PhaseLedger],
) -> Result<(), SchemeError> {
    let mut o2 = ClassStock::new();
    run_xsf_round1(sim, k, &mut o2, phases[0].passes)?;
    if k == 2 {
        for key in [(0usize, 1usize), (1, 0)] {
            let sym = o2.pop_n(&key, 1)?.remove(0);
            let tx = sym.tx_holders[0];
            let mut plan = SlotPlan::new(sim.t);
            plan.send(
                tx,
                Transmission::with_csi(sym.expr.clone(), sym.needs_for(tx)),
            );
            sim.apply_slot(plan)?;
        }
        return drained(&o2);
    }
    let mut groups = ClassStock::new();
    run_xsf_phase2(sim, k, &mut o2, &mut groups, phases[1].passes)?;
    drained(&o2)?;
    for (idx, m) in (3..=k).enumerate() {
        run_sf_phase(sim, k, m, &mut groups, phases[idx + 2].passes, None)?;
    }
    drained(&groups)
}
