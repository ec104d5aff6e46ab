//! Shannon-feedback interference-channel scheme and the order-raising
//! machinery it shares with the Shannon-feedback X channel.
//!
//! Round 1 (width 2): for every transmitter pair and side receiver, one slot
//! of fresh symbols.  Each pair transmitter decodes its partner's symbol
//! from its own fed-back output, so both can reconstruct the side receiver's
//! equation, which the side transmitter also holds via feedback — a symbol
//! wanted by the pair and held by all three.  Per 3-set, the three such
//! symbols collapse into two offline random combinations wanted by the whole
//! 3-set, the inputs of round 2.
//!
//! Round 2 phase m: per fixture of Q_m(K+1)+m-1 users and m-subset inside
//! it, one slot in which the Q lowest-indexed transmitters of the subset
//! each send one stocked combination.  The fixture's other receivers catch
//! equations that recombine into order-(m+1) inputs, down to phase K's
//! one-symbol-per-slot delivery.

use super::ic::drained;
use super::{
    combinations, seal_policy, solve_passes, ClassStock, PhaseLedger, Policy, SchemeKind, Subset,
};
use crate::combin::{binomial, q_min};
use crate::dof;
use crate::expr::{random_coeffs, LinearExpr, SymbolSpec};
use crate::field::Field;
use crate::sim::{Simulation, SlotPlan, Transmission};
use crate::{ModelId, SchemeError};
use std::collections::BTreeMap;
use std::collections::BTreeSet;

/// Largest K simulated end-to-end with Shannon feedback.
pub const ICSF_SIM_MAX_K: u32 = 5;

pub(crate) type GroupKey = Subset;

/// Per-unit trace for standalone phase verification.
pub(crate) struct SfUnitRecord<F: Field> {
    pub active: Subset,
    pub slot: usize,
    pub inputs: Vec<SymbolSpec<F>>,
    pub outputs: Vec<SymbolSpec<F>>,
}

fn c(n: u32, r: u32) -> u128 {
    binomial(n as u64, r as u64)
}

/// Per-pass ledger of the Shannon-feedback phase m.
pub(crate) fn sf_phase_ledger(
    k: u32,
    m: u32,
    passes: u64,
    label: String,
) -> Result<PhaseLedger, SchemeError> {
    let q = q_min(m, k + 1)?;
    let fixture = q + m - 1;
    let units = c(k, fixture) * c(fixture, m);
    let produced = if m < k {
        m as u128 * c(fixture, m + 1) * c(k, fixture)
    } else {
        0
    };
    Ok(PhaseLedger {
        label,
        passes,
        consumed: q as u128 * units * passes as u128,
        slots: units * passes as u128,
        produced: produced * passes as u128,
    })
}

/// Per-pass demand of phase m on each order-m group.
pub(crate) fn sf_demand_per_group(k: u32, m: u32) -> Result<u128, SchemeError> {
    let q = q_min(m, k + 1)?;
    Ok(q as u128 * c(k - m, q - 1))
}

/// Per-pass supply of phase m into each order-(m+1) group.
pub(crate) fn sf_supply_per_group(k: u32, m: u32) -> Result<u128, SchemeError> {
    let q = q_min(m, k + 1)?;
    if q < 2 {
        return Ok(0);
    }
    Ok(m as u128 * c(k - m - 1, q - 2))
}

/// Runs `passes` sweeps of Shannon-feedback phase m over the group stock.
pub(crate) fn run_sf_phase<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    m: u32,
    stock: &mut ClassStock<F, GroupKey>,
    passes: u64,
    mut records: Option<&mut Vec<SfUnitRecord<F>>>,
) -> Result<(), SchemeError> {
    let q = q_min(m, k + 1)? as usize;
    let fixture_size = q + m as usize - 1;
    for _ in 0..passes {
        for fixture in combinations(0..k as usize, fixture_size) {
            // Collect the fixture's unit outputs per next-order group.
            let mut next_groups: BTreeMap<Subset, Vec<SymbolSpec<F>>> = BTreeMap::new();
            for s_m in combinations(fixture.iter().copied(), m as usize) {
                let syms = stock.pop_n(&s_m, q)?;
                let t = sim.t;
                let mut plan = SlotPlan::new(t);
                // The q lowest-indexed members of the subset each send one
                // stocked combination as-is.
                for (idx, &tx) in s_m.iter().take(q).enumerate() {
                    plan.send(
                        tx,
                        Transmission::with_csi(syms[idx].expr.clone(), syms[idx].needs_for(tx)),
                    );
                }
                sim.apply_slot(plan)?;
                let mut unit_outputs = Vec::new();
                for &j_side in fixture.iter().filter(|j| !s_m.contains(j)) {
                    let mut needs: BTreeSet<usize> = syms
                        .iter()
                        .flat_map(|s| s.needs_csi.iter().copied())
                        .collect();
                    needs.insert(t);
                    let mut holders = s_m.clone();
                    holders.push(j_side);
                    holders.sort_unstable();
                    let out = SymbolSpec::new(
                        sim.reception(j_side, t).clone(),
                        holders.clone(),
                        s_m.clone(),
                        vec![j_side],
                    )
                    .with_feedback_holder(j_side)
                    .with_needs_csi(needs);
                    if records.is_some() {
                        unit_outputs.push(out.clone());
                    }
                    next_groups.entry(holders).or_default().push(out);
                }
                if let Some(recs) = records.as_deref_mut() {
                    recs.push(SfUnitRecord {
                        active: s_m.clone(),
                        slot: t,
                        inputs: syms,
                        outputs: unit_outputs,
                    });
                }
            }
            // Each next-order group collected one equation per member; fold
            // them into m offline random combinations.
            for (group, parts) in next_groups {
                debug_assert_eq!(parts.len(), m as usize + 1);
                debug_assert_eq!(group.len(), m as usize + 1, "combos are one order up");
                let refs: Vec<&LinearExpr<F>> = parts.iter().map(|p| &p.expr).collect();
                let needs: BTreeSet<usize> = parts
                    .iter()
                    .flat_map(|p| p.needs_csi.iter().copied())
                    .collect();
                for _ in 0..m {
                    let coeffs: Vec<F> = random_coeffs(refs.len(), &mut sim.coeff_rng);
                    stock.push(
                        group.clone(),
                        SymbolSpec::new(
                            LinearExpr::combination(&refs, &coeffs),
                            group.clone(),
                            group.clone(),
                            Vec::new(),
                        )
                        .with_needs_csi(needs.clone()),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Round 1 of the Shannon-feedback IC scheme at width 2: per (pair, side
/// receiver) unit one slot of fresh symbols, then per 3-set the three side
/// equations become two random order-3 combinations.
fn run_icsf_round1<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    stock: &mut ClassStock<F, GroupKey>,
    passes: u64,
) -> Result<(), SchemeError> {
    for _ in 0..passes {
        let mut tuples: BTreeMap<Subset, Vec<SymbolSpec<F>>> = BTreeMap::new();
        for pair in combinations(0..k as usize, 2) {
            let (a, b) = (pair[0], pair[1]);
            for j0 in (0..k as usize).filter(|j| !pair.contains(j)) {
                let t = sim.t;
                let mut plan = SlotPlan::new(t);
                let ua = sim.mint_info(1, a, a)[0];
                let ub = sim.mint_info(1, b, b)[0];
                plan.send(a, Transmission::new(LinearExpr::single(ua, F::one())));
                plan.send(b, Transmission::new(LinearExpr::single(ub, F::one())));
                sim.apply_slot(plan)?;
                // Both pair members decode each other's symbol from their
                // own feedback, so all of {a, b, j0} can form RX_j0's
                // equation.
                let mut group = vec![a, b, j0];
                group.sort_unstable();
                tuples.entry(group.clone()).or_default().push(
                    SymbolSpec::new(sim.reception(j0, t).clone(), group, pair.clone(), vec![j0])
                        .with_feedback_holder(j0)
                        .with_needs_csi([t].into_iter().collect()),
                );
            }
        }
        for (group, parts) in tuples {
            debug_assert_eq!(parts.len(), 3);
            let refs: Vec<&LinearExpr<F>> = parts.iter().map(|p| &p.expr).collect();
            let needs: BTreeSet<usize> = parts
                .iter()
                .flat_map(|p| p.needs_csi.iter().copied())
                .collect();
            for _ in 0..2 {
                let coeffs: Vec<F> = random_coeffs(3, &mut sim.coeff_rng);
                stock.push(
                    group.clone(),
                    SymbolSpec::new(
                        LinearExpr::combination(&refs, &coeffs),
                        group.clone(),
                        group.clone(),
                        Vec::new(),
                    )
                    .with_needs_csi(needs.clone()),
                );
            }
        }
    }
    Ok(())
}

pub(crate) fn build_icsf(k: u32) -> Result<Policy, SchemeError> {
    if !(3..=ICSF_SIM_MAX_K).contains(&k) {
        return Err(SchemeError::Unsupported(format!(
            "icsf simulation supports 3 <= K <= {ICSF_SIM_MAX_K}, got K={k} (analytic DoF remains available)"
        )));
    }
    let nu = dof::nu_star(k)?;
    if nu != 2 {
        // All simulated sizes have nu = 2; the builder guards the assumption.
        return Err(SchemeError::Unsupported(format!(
            "icsf simulation implements the width-2 opening, got nu={nu}"
        )));
    }
    // Supply/demand chain: round 1 feeds order-3 groups, then phases
    // m = 3..=K.
    let mut chain = Vec::new();
    let mut supply = 2u128; // combos per order-3 group per round-1 pass
    for m in 3..=k {
        chain.push((supply, sf_demand_per_group(k, m)?));
        supply = sf_supply_per_group(k, m)?;
    }
    let passes = solve_passes(&chain)?;

    let round1_units = c(k, 2) * (k as u128 - 2);
    let mut phases = vec![PhaseLedger {
        label: "round-1".into(),
        passes: passes[0],
        consumed: 2 * round1_units * passes[0] as u128,
        slots: round1_units * passes[0] as u128,
        produced: 2 * c(k, 3) * passes[0] as u128,
    }];
    for (idx, m) in (3..=k).enumerate() {
        phases.push(sf_phase_ledger(
            k,
            m,
            passes[idx + 1],
            format!("phase-{m}"),
        )?);
    }
    seal_policy(Policy {
        model: ModelId::IC_SF,
        k,
        m_tx: None,
        adaptive: true,
        kind: SchemeKind::IcShannon { k, nu },
        phases,
        symbols_total: 0,
        slots_total: 0,
        analytic_dof: dof::dof_icsf(k)?,
    })
}

pub(crate) fn run_icsf<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    nu: u32,
    phases: &[PhaseLedger],
) -> Result<(), SchemeError> {
    debug_assert_eq!(nu, 2);
    let mut stock = ClassStock::new();
    run_icsf_round1(sim, k, &mut stock, phases[0].passes)?;
    for (idx, m) in (3..=k).enumerate() {
        run_sf_phase(sim, k, m, &mut stock, phases[idx + 1].passes, None)?;
    }
    drained(&stock)
}
