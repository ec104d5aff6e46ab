//! Recursion-vs-closed-form consistency sweep across all six models.

use super::ic::{
    dof_icfd_closed, dof_icof, dof_icof_order, dof_icsf, dof_icsf_order, dof_icsf_order_recursive,
    ic_phase_recursion_with, icsf_objective, mu_star, nu_star,
};
use super::x::{dof_xfd, dof_xfd_recursive, dof_xof, dof_xsf, dof_xsf_composed};
use crate::combin::q_min;
use crate::rational::{rat, render, Rational};
use crate::{DofError, ModelId};
use num_traits::One;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub model: String,
    pub k: u32,
    pub m: Option<u32>,
    pub m_tx: Option<u32>,
    pub closed: String,
    pub recursive: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub k_max: u32,
    pub rows_checked: usize,
    /// Comparisons performed per model.
    pub model_rows: BTreeMap<String, usize>,
    pub mismatches: Vec<Mismatch>,
}

impl SweepReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn first_mismatch(&self) -> Option<&Mismatch> {
        self.mismatches.first()
    }
}

/// Compares every model's closed form against its unrolled recursion for all
/// `3 <= K <= k_max`, every valid order `m`, and every `2 <= M <= K` on the
/// full-duplex X channel.  Exact equality; any difference is reported with
/// both values.
pub fn consistency_sweep(k_max: u32) -> Result<SweepReport, DofError> {
    consistency_sweep_with(k_max, |m, n| q_min(m, n).expect("valid phase"))
}

/// Sweep with an injectable side-receiver count for the IC recursion.
/// Production uses `Q_m(K)`; tests feed a corrupted variant to confirm the
/// sweep actually detects divergence.
pub(crate) fn consistency_sweep_with(
    k_max: u32,
    ic_q: impl Fn(u32, u32) -> u32 + Copy,
) -> Result<SweepReport, DofError> {
    if k_max < 3 {
        return Err(DofError::OutOfRange(format!(
            "sweep needs k_max >= 3, got {k_max}"
        )));
    }
    let mut rows = 0usize;
    let mut model_rows: BTreeMap<String, usize> = BTreeMap::new();
    let mut mismatches = Vec::new();
    let mut check = |model: &ModelId,
                     k: u32,
                     m: Option<u32>,
                     m_tx: Option<u32>,
                     closed: Rational,
                     recursive: Rational| {
        rows += 1;
        *model_rows.entry(model.to_string()).or_default() += 1;
        if closed != recursive {
            mismatches.push(Mismatch {
                model: model.to_string(),
                k,
                m,
                m_tx,
                closed: render(&closed),
                recursive: render(&recursive),
            });
        }
    };

    for k in 3..=k_max {
        // Full-duplex IC: scheme-level DoF, phase 1 on top of the cascade.
        let icfd_rec = {
            let d2 = ic_phase_recursion_with(2, k, ic_q)?;
            rat(2, 1) / (Rational::one() + d2.recip())
        };
        check(
            &ModelId::IC_FD,
            k,
            Some(1),
            None,
            dof_icfd_closed(k)?,
            icfd_rec,
        );

        // Output-feedback IC: every order, plus the optimized scheme value
        // recomposed from the recursion at width mu(K).
        for m in 2..=(k - 1) {
            check(
                &ModelId::IC_OF,
                k,
                Some(m),
                None,
                dof_icof_order(m, k)?,
                ic_phase_recursion_with(m, k, ic_q)?,
            );
        }
        let mu = mu_star(k)?;
        let icof_rec = {
            let d_mu = ic_phase_recursion_with(mu, k, ic_q)?;
            rat(mu as i64, 1) / (Rational::one() + rat(mu as i64 - 1, 1) / d_mu)
        };
        check(&ModelId::IC_OF, k, None, None, dof_icof(k)?, icof_rec);

        // Shannon-feedback IC: every order, plus the optimized value.
        for m in 2..=k {
            check(
                &ModelId::IC_SF,
                k,
                Some(m),
                None,
                dof_icsf_order(m, k)?,
                dof_icsf_order_recursive(m, k)?,
            );
        }
        check(
            &ModelId::IC_SF,
            k,
            None,
            None,
            dof_icsf(k)?,
            icsf_objective(k, nu_star(k)?)?,
        );

        // Full-duplex X channel: all transmitter counts up to K.
        for m_tx in 2..=k {
            check(
                &ModelId::X_FD,
                k,
                Some(1),
                Some(m_tx),
                dof_xfd(m_tx, k)?,
                dof_xfd_recursive(1, m_tx, k)?,
            );
        }

        // Output feedback X: closed form against the direct slot count.
        let k_i = k as i64;
        check(
            &ModelId::X_OF,
            k,
            None,
            Some(k),
            dof_xof(k)?,
            rat(k_i * k_i, k_i + k_i * (k_i - 1) / 2),
        );

        // Shannon feedback X: closed form against the round composition.
        check(
            &ModelId::X_SF,
            k,
            None,
            Some(k),
            dof_xsf(k)?,
            dof_xsf_composed(k)?,
        );
    }

    Ok(SweepReport {
        k_max,
        rows_checked: rows,
        model_rows,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_is_clean_to_thirty() {
        let report = consistency_sweep(30).unwrap();
        assert!(report.is_clean(), "{:?}", report.first_mismatch());
        assert!(report.rows_checked > 1000);
    }

    #[test]
    fn minimal_sweep_covers_all_six_models() {
        let report = consistency_sweep(3).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.model_rows.len(), 6);
        // K = 3 only: one ICFD row, ICOF m=2 plus optimized, ICSF m=2,3 plus
        // optimized, XFD M=2,3, XOF, XSF.
        assert_eq!(report.rows_checked, 10);
    }

    #[test]
    fn corrupted_recursion_is_caught_at_smallest_k() {
        // Off-by-one side-receiver count: negative control.
        let report =
            consistency_sweep_with(10, |m, n| q_min(m, n).unwrap().min(n - m - 1).max(1)).unwrap();
        assert!(!report.is_clean());
        let first = report.first_mismatch().unwrap();
        assert_eq!(first.k, 4, "first divergence at the smallest failing K");
    }
}
