//! X-channel DoF: full-duplex delayed CSIT, output feedback, and Shannon
//! feedback (the latter two with M = K).

use super::{ceil_half, floor_half};
use crate::combin::{harmonic_sum, inv_square_sum};
use crate::rational::{pow_i64, rat, Rational};
use crate::DofError;
use num_traits::One;

fn require_x(m_tx: u32, k: u32) -> Result<(), DofError> {
    if m_tx >= 2 && k >= 2 {
        Ok(())
    } else {
        Err(DofError::OutOfRange(format!(
            "X channel needs M >= 2 and K >= 2, got M={m_tx}, K={k}"
        )))
    }
}

/// `Q_m(M, K) = min(M-1, K-m, m)` for the X-channel full-duplex cascade.
pub fn q_x(m: u32, m_tx: u32, k: u32) -> u32 {
    (m_tx - 1).min(k - m).min(m)
}

/// Full-duplex delayed-CSIT X-channel DoF for order-m symbols by recursion
/// unroll: `DoF_m = (m+1)(Q+1) / (m+1 + m Q / DoF_{m+1})`, `DoF_K = 1`.
pub fn dof_xfd_recursive(m: u32, m_tx: u32, k: u32) -> Result<Rational, DofError> {
    require_x(m_tx, k)?;
    if !(1 <= m && m <= k) {
        return Err(DofError::OutOfRange(format!(
            "X-channel recursion needs 1 <= m <= K, got m={m}"
        )));
    }
    let mut dof = Rational::one();
    for phase in (m..k).rev() {
        let q = q_x(phase, m_tx, k) as i64;
        let p = phase as i64;
        dof = rat((p + 1) * (q + 1), 1) / (rat(p + 1, 1) + rat(p * q, 1) / dof);
    }
    Ok(dof)
}

/// Full-duplex delayed-CSIT X-channel DoF, closed form.  The branch split is
/// the literal strict inequality `M > ceil(K/2)`; the opposite branch governs
/// the boundary itself.
pub fn dof_xfd(m_tx: u32, k: u32) -> Result<Rational, DofError> {
    require_x(m_tx, k)?;
    let c = ceil_half(k) as i64;
    let f = floor_half(k) as i64;
    let denom = if m_tx as i64 > c {
        rat(1, c) - rat(1, 1)
            + inv_square_sum(1, c as u64 - 1)
            + rat(1, c * (f + 1)) * harmonic_sum(c as u64, k as u64)
    } else {
        let m_i = m_tx as i64;
        let r = rat(m_i - 1, m_i);
        let mut tail = Rational::from_integer(0.into());
        for l in (m_tx - 1)..=k {
            let exponent = (l.min(k - m_tx + 1) as i64) - m_i;
            tail += rat(1, l as i64) * pow_i64(&r, exponent);
        }
        rat(1, m_i - 1) - rat(1, 1) + inv_square_sum(1, m_tx as u64 - 2) + rat(1, m_i * m_i) * tail
    };
    Ok(denom.recip())
}

/// Output-feedback K×K X-channel DoF: `2K/(K+1)` (K^2 symbols in
/// K + K(K-1)/2 slots).
pub fn dof_xof(k: u32) -> Result<Rational, DofError> {
    if k < 2 {
        return Err(DofError::OutOfRange(format!(
            "X channel with output feedback needs K >= 2, got K={k}"
        )));
    }
    Ok(rat(2 * k as i64, k as i64 + 1))
}

/// Shannon-feedback K×K X-channel DoF, closed form.
pub fn dof_xsf(k: u32) -> Result<Rational, DofError> {
    if k < 2 {
        return Err(DofError::OutOfRange(format!(
            "X channel with Shannon feedback needs K >= 2, got K={k}"
        )));
    }
    let k_i = k as i64;
    let c = ceil_half(k) as i64;
    let f = floor_half(k) as i64;
    let denom = rat(k_i * k_i + 7 * k_i - 6, 2)
        - rat(2 * (k_i - 1), f)
        - rat(2 * (k_i - 1), 1) * inv_square_sum(1, f as u64)
        + rat(2 * (k_i - 1), f * c) * harmonic_sum(f as u64 + 1, k as u64);
    Ok(rat(k_i * k_i, 1) / denom)
}

/// Shannon-feedback DoF recomposed from the round accounting — the oracle
/// route for [`dof_xsf`]:
///
/// ```text
/// DoF_1 = K^2 / (K + (K-1)(K-2)/2 + (K-1)/DoF_2)
/// DoF_2 = 6 / (3 + 2/DoF_3),   DoF_3.. from the Shannon-feedback IC orders
/// ```
///
/// with `DoF_2 = 1` when K = 2 (two symbols repeated over two slots).
pub fn dof_xsf_composed(k: u32) -> Result<Rational, DofError> {
    if k < 2 {
        return Err(DofError::OutOfRange(format!(
            "X channel with Shannon feedback needs K >= 2, got K={k}"
        )));
    }
    let d2 = if k == 2 {
        Rational::one()
    } else {
        let d3 = super::ic::dof_icsf_order(3, k)?;
        rat(6, 1) / (rat(3, 1) + rat(2, 1) / d3)
    };
    let k_i = k as i64;
    let denom = rat(k_i, 1) + rat((k_i - 1) * (k_i - 2), 2) + rat(k_i - 1, 1) / d2;
    Ok(rat(k_i * k_i, 1) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;

    #[test]
    fn xfd_golden_fractions() {
        assert_eq!(dof_xfd(2, 2).unwrap(), rat(4, 3));
        assert_eq!(dof_xfd(3, 3).unwrap(), rat(24, 17));
        assert_eq!(dof_xfd_recursive(1, 2, 2).unwrap(), rat(4, 3));
        assert_eq!(dof_xfd_recursive(1, 3, 3).unwrap(), rat(24, 17));
        assert!(dof_xfd(1, 4).is_err());
        assert!(dof_xfd(3, 1).is_err());
    }

    #[test]
    fn xfd_fixed_m_limits() {
        let d2 = dof_xfd(2, 500).unwrap();
        assert!((to_f64(&d2) - 1.0 / std::f64::consts::LN_2).abs() < 1e-2);
        let d3 = dof_xfd(3, 500).unwrap();
        assert!((to_f64(&d3) - 8.0 / (3.0 * 3f64.ln() + 2.0)).abs() < 1e-2);
    }

    #[test]
    fn xof_values() {
        assert_eq!(dof_xof(2).unwrap(), rat(4, 3));
        assert_eq!(dof_xof(3).unwrap(), rat(3, 2));
        assert_eq!(dof_xof(5).unwrap(), rat(5, 3));
        for k in 2..=100 {
            assert!(dof_xof(k).unwrap() < rat(2, 1));
        }
    }

    #[test]
    fn xsf_golden_and_composed() {
        assert_eq!(dof_xsf(2).unwrap(), rat(4, 3));
        assert_eq!(dof_xsf(3).unwrap(), rat(27, 17));
        assert_eq!(dof_xsf(4).unwrap(), rat(128, 75));
        assert_eq!(dof_xsf(5).unwrap(), rat(1125, 632));
        for k in 2..=30 {
            assert_eq!(dof_xsf(k).unwrap(), dof_xsf_composed(k).unwrap(), "K={k}");
        }
    }

    #[test]
    fn xfd_fixed_m_curves_increase_toward_their_limits() {
        for m_tx in [2u32, 3] {
            let mut prev = dof_xfd(m_tx, m_tx).unwrap();
            for k in (m_tx + 1)..=30 {
                let next = dof_xfd(m_tx, k).unwrap();
                assert!(next > prev, "M={m_tx}, K={k}");
                prev = next;
            }
        }
    }

    #[test]
    fn xsf_beats_xof_beyond_two_users() {
        for k in 4..=30 {
            assert!(dof_xsf(k).unwrap() > dof_xof(k).unwrap(), "K={k}");
        }
    }
}
