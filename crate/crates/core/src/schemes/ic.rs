//! Interference-channel cascades: full-duplex delayed CSIT and output
//! feedback.
//!
//! Both schemes share the phase-m machinery.  A phase-m unit fixes an active
//! set of m+1 users and a side set of Q_m(K)-1 idle receivers, spends
//! L_m(K)/Q_m(K) slots in which every active transmitter sends fresh random
//! combinations of its L_m(K)/m assigned input symbols, and turns each side
//! receiver's receptions into order-(m+1) symbols for the next phase.  The
//! variants differ in who can put which class on the air:
//!
//! * full duplex: the transmitter one step behind the class's side receiver
//!   in the cyclic order reconstructs it from its over-the-air receptions
//!   and delayed CSI;
//! * output feedback: each transmitter resends its own paired receiver's
//!   fed-back equations, no CSI involved.
//!
//! Phase K-1 is the degenerate unit (side set empty, one slot batch of
//! repetitions) and falls out of the same code path.

use super::{
    combinations, complement, seal_policy, solve_passes, union_needs, ClassStock, PhaseLedger,
    Policy, SchemeKind, Subset,
};
use crate::combin::{binomial, l_lcm, q_min};
use crate::dof;
use crate::expr::{random_coeffs, LinearExpr, SymbolSpec};
use crate::field::Field;
use crate::sim::{Simulation, SlotPlan, Transmission};
use crate::{ModelId, SchemeError};
use std::collections::BTreeSet;

/// Largest K simulated end-to-end; combinatorial slot growth beyond this
/// adds cost without adding verification power (larger K is covered by
/// standalone phase verification).
pub const IC_SIM_MAX_K: u32 = 6;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum IcVariant {
    FullDuplex,
    OutputFeedback,
}

pub(crate) type IcClassKey = (Subset, usize);

/// Per-unit trace used by standalone phase verification.
pub(crate) struct IcUnitRecord<F: Field> {
    pub active: Subset,
    pub slot_start: usize,
    pub slot_count: usize,
    /// Input symbols per active member's class.
    pub inputs: Vec<(usize, Vec<SymbolSpec<F>>)>,
    pub outputs: Vec<SymbolSpec<F>>,
}

/// Runs `passes` full sweeps of phase m over every (active set, side set)
/// unit, consuming order-m stock and producing order-(m+1) stock.
pub(crate) fn run_ic_phase<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    m: u32,
    variant: IcVariant,
    stock: &mut ClassStock<F, IcClassKey>,
    passes: u64,
    mut records: Option<&mut Vec<IcUnitRecord<F>>>,
) -> Result<(), SchemeError> {
    let q = q_min(m, k)?;
    let l = l_lcm(m, k)?;
    let lm = (l / m) as usize;
    let lq = (l / q) as usize;
    let width = m as usize + 1;
    for _ in 0..passes {
        for s_next in combinations(0..k as usize, width) {
            let comp = complement(k, &s_next);
            for s_side in combinations(comp.iter().copied(), q as usize - 1) {
                let mut inputs: Vec<(usize, Vec<SymbolSpec<F>>)> = Vec::with_capacity(width);
                for &j in &s_next {
                    let class: Subset = s_next.iter().copied().filter(|&x| x != j).collect();
                    let syms = stock.pop_n(&(class, j), lm)?;
                    inputs.push((j, syms));
                }
                let slot_start = sim.t;
                for _ in 0..lq {
                    let mut plan = SlotPlan::new(sim.t);
                    for (pos, &tx) in s_next.iter().enumerate() {
                        // Full duplex: send the predecessor's class (the one
                        // this transmitter picked up over the air).  Output
                        // feedback: send your own fed-back class.
                        let owner_pos = match variant {
                            IcVariant::FullDuplex => (pos + width - 1) % width,
                            IcVariant::OutputFeedback => pos,
                        };
                        let syms = &inputs[owner_pos].1;
                        let coeffs: Vec<F> = random_coeffs(lm, &mut sim.coeff_rng);
                        let refs: Vec<&LinearExpr<F>> = syms.iter().map(|s| &s.expr).collect();
                        let expr = LinearExpr::combination(&refs, &coeffs);
                        plan.send(tx, Transmission::with_csi(expr, union_needs(syms, tx)));
                    }
                    sim.apply_slot(plan)?;
                }
                let mut unit_outputs = Vec::new();
                if q > 1 {
                    let mut base_needs: BTreeSet<usize> = inputs
                        .iter()
                        .flat_map(|(_, syms)| syms.iter().flat_map(|s| s.needs_csi.iter().copied()))
                        .collect();
                    base_needs.extend(slot_start..slot_start + lq);
                    for &j_side in &s_side {
                        for r in 0..lq {
                            let expr = sim.reception(j_side, slot_start + r).clone();
                            let sym = match variant {
                                IcVariant::FullDuplex => SymbolSpec::new(
                                    expr,
                                    s_next.clone(),
                                    s_next.clone(),
                                    vec![j_side],
                                )
                                .with_needs_csi(base_needs.clone()),
                                IcVariant::OutputFeedback => SymbolSpec::new(
                                    expr,
                                    vec![j_side],
                                    s_next.clone(),
                                    vec![j_side],
                                )
                                .with_feedback_holder(j_side),
                            };
                            debug_assert_eq!(sym.order(), width, "outputs are one order up");
                            if records.is_some() {
                                unit_outputs.push(sym.clone());
                            }
                            stock.push((s_next.clone(), j_side), sym);
                        }
                    }
                }
                if let Some(recs) = records.as_deref_mut() {
                    recs.push(IcUnitRecord {
                        active: s_next.clone(),
                        slot_start,
                        slot_count: lq,
                        inputs,
                        outputs: unit_outputs,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Full-duplex phase 1: per 3-subset, three slots of fresh pairs with the
/// roles rotating, each slot leaving the silent member's reception as an
/// order-2 symbol reconstructable by the two senders.
fn run_icfd_phase1<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    stock: &mut ClassStock<F, IcClassKey>,
    passes: u64,
) -> Result<(), SchemeError> {
    for _ in 0..passes {
        for s3 in combinations(0..k as usize, 3) {
            let (a, b, c) = (s3[0], s3[1], s3[2]);
            let ua = sim.mint_info(2, a, a);
            let ub = sim.mint_info(2, b, b);
            let uc = sim.mint_info(2, c, c);
            let rotation = [
                ((a, ua[0]), (b, ub[0]), c),
                ((b, ub[1]), (c, uc[0]), a),
                ((c, uc[1]), (a, ua[1]), b),
            ];
            for ((t1, s1), (t2, s2), silent) in rotation {
                let t = sim.t;
                let mut plan = SlotPlan::new(t);
                plan.send(t1, Transmission::new(LinearExpr::single(s1, F::one())));
                plan.send(t2, Transmission::new(LinearExpr::single(s2, F::one())));
                sim.apply_slot(plan)?;
                let mut class = vec![t1, t2];
                class.sort_unstable();
                stock.push(
                    (class.clone(), silent),
                    SymbolSpec::new(
                        sim.reception(silent, t).clone(),
                        class.clone(),
                        class,
                        vec![silent],
                    )
                    .with_needs_csi([t].into_iter().collect()),
                );
            }
        }
    }
    Ok(())
}

/// Output-feedback phase 1: per (active mu-set, side set) pair, one slot of
/// mu fresh symbols; every side receiver's reception is fed back to its own
/// transmitter as an order-mu symbol.
fn run_icof_phase1<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    mu: u32,
    stock: &mut ClassStock<F, IcClassKey>,
    passes: u64,
) -> Result<(), SchemeError> {
    for _ in 0..passes {
        for s_mu in combinations(0..k as usize, mu as usize) {
            let comp = complement(k, &s_mu);
            for s_side in combinations(comp.iter().copied(), mu as usize - 1) {
                let t = sim.t;
                let mut plan = SlotPlan::new(t);
                for &i in &s_mu {
                    let id = sim.mint_info(1, i, i)[0];
                    plan.send(i, Transmission::new(LinearExpr::single(id, F::one())));
                }
                sim.apply_slot(plan)?;
                for &j in &s_side {
                    stock.push(
                        (s_mu.clone(), j),
                        SymbolSpec::new(
                            sim.reception(j, t).clone(),
                            vec![j],
                            s_mu.clone(),
                            vec![j],
                        )
                        .with_feedback_holder(j),
                    );
                }
            }
        }
    }
    Ok(())
}

fn c(n: u32, r: u32) -> u128 {
    binomial(n as u64, r as u64)
}

/// Per-pass demand of phase m, per order-m class.
fn phase_demand_per_class(k: u32, m: u32) -> Result<u128, SchemeError> {
    let q = q_min(m, k)?;
    let l = l_lcm(m, k)?;
    Ok(c(k - m - 1, q - 1) * (l / m) as u128)
}

/// Per-pass supply of phase m into each order-(m+1) class.
fn phase_supply_per_class(k: u32, m: u32) -> Result<u128, SchemeError> {
    let q = q_min(m, k)?;
    let l = l_lcm(m, k)?;
    if q < 2 {
        return Ok(0);
    }
    Ok(c(k - m - 2, q - 2) * (l / q) as u128)
}

fn phase_ledger(k: u32, m: u32, passes: u64, label: String) -> Result<PhaseLedger, SchemeError> {
    let q = q_min(m, k)?;
    let l = l_lcm(m, k)?;
    let units = c(k, m + 1) * c(k - m - 1, q - 1);
    Ok(PhaseLedger {
        label,
        passes,
        consumed: units * (m as u128 + 1) * (l / m) as u128 * passes as u128,
        slots: units * (l / q) as u128 * passes as u128,
        produced: units * (q as u128 - 1) * (l / q) as u128 * passes as u128,
    })
}

fn build_ic_cascade(
    k: u32,
    variant: IcVariant,
    mu: u32,
) -> Result<(Vec<PhaseLedger>, Vec<u64>), SchemeError> {
    // Supply/demand chain: phase 1, then phases m = start..K-1.
    let start = match variant {
        IcVariant::FullDuplex => 2,
        IcVariant::OutputFeedback => mu,
    };
    let phase1_supply = match variant {
        IcVariant::FullDuplex => 1u128,
        IcVariant::OutputFeedback => c(k - mu - 1, mu - 2),
    };
    let mut chain = Vec::new();
    let mut supply = phase1_supply;
    for m in start..k {
        chain.push((supply, phase_demand_per_class(k, m)?));
        supply = phase_supply_per_class(k, m)?;
    }
    let passes = solve_passes(&chain)?;

    let mut phases = Vec::new();
    let p1 = passes[0];
    match variant {
        IcVariant::FullDuplex => {
            let units = c(k, 3);
            phases.push(PhaseLedger {
                label: "phase-1".into(),
                passes: p1,
                consumed: 6 * units * p1 as u128,
                slots: 3 * units * p1 as u128,
                produced: 3 * units * p1 as u128,
            });
        }
        IcVariant::OutputFeedback => {
            let units = c(k, mu) * c(k - mu, mu - 1);
            phases.push(PhaseLedger {
                label: "phase-1".into(),
                passes: p1,
                consumed: mu as u128 * units * p1 as u128,
                slots: units * p1 as u128,
                produced: (mu as u128 - 1) * units * p1 as u128,
            });
        }
    }
    for (idx, m) in (start..k).enumerate() {
        phases.push(phase_ledger(k, m, passes[idx + 1], format!("phase-{m}"))?);
    }
    Ok((phases, passes))
}

pub(crate) fn build_icfd(k: u32) -> Result<Policy, SchemeError> {
    if !(3..=IC_SIM_MAX_K).contains(&k) {
        return Err(SchemeError::Unsupported(format!(
            "icfd simulation supports 3 <= K <= {IC_SIM_MAX_K}, got K={k} (analytic DoF remains available)"
        )));
    }
    let (phases, _) = build_ic_cascade(k, IcVariant::FullDuplex, 2)?;
    seal_policy(Policy {
        model: ModelId::IC_FD,
        k,
        m_tx: None,
        adaptive: true,
        kind: SchemeKind::IcFullDuplex { k },
        phases,
        symbols_total: 0,
        slots_total: 0,
        analytic_dof: dof::dof_icfd_closed(k)?,
    })
}

pub(crate) fn build_icof(k: u32) -> Result<Policy, SchemeError> {
    if !(3..=IC_SIM_MAX_K).contains(&k) {
        return Err(SchemeError::Unsupported(format!(
            "icof simulation supports 3 <= K <= {IC_SIM_MAX_K}, got K={k} (analytic DoF remains available)"
        )));
    }
    let mu = dof::mu_star(k)?;
    let (phases, _) = build_ic_cascade(k, IcVariant::OutputFeedback, mu)?;
    seal_policy(Policy {
        model: ModelId::IC_OF,
        k,
        m_tx: None,
        adaptive: false,
        kind: SchemeKind::IcOutputFeedback { k, mu },
        phases,
        symbols_total: 0,
        slots_total: 0,
        analytic_dof: dof::dof_icof(k)?,
    })
}

pub(crate) fn run_icfd<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    phases: &[PhaseLedger],
) -> Result<(), SchemeError> {
    let mut stock = ClassStock::new();
    run_icfd_phase1(sim, k, &mut stock, phases[0].passes)?;
    for (idx, m) in (2..k).enumerate() {
        run_ic_phase(
            sim,
            k,
            m,
            IcVariant::FullDuplex,
            &mut stock,
            phases[idx + 1].passes,
            None,
        )?;
    }
    drained(&stock)
}

pub(crate) fn run_icof<F: Field>(
    sim: &mut Simulation<F>,
    k: u32,
    mu: u32,
    phases: &[PhaseLedger],
) -> Result<(), SchemeError> {
    let mut stock = ClassStock::new();
    run_icof_phase1(sim, k, mu, &mut stock, phases[0].passes)?;
    for (idx, m) in (mu..k).enumerate() {
        run_ic_phase(
            sim,
            k,
            m,
            IcVariant::OutputFeedback,
            &mut stock,
            phases[idx + 1].passes,
            None,
        )?;
    }
    drained(&stock)
}

pub(crate) fn drained<F: Field, K: Ord + std::fmt::Debug>(
    stock: &ClassStock<F, K>,
) -> Result<(), SchemeError> {
    if stock.total() != 0 {
        return Err(SchemeError::LedgerMismatch(format!(
            "{} symbols left undelivered in class stock",
            stock.total()
        )));
    }
    Ok(())
}
