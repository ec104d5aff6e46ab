//! Interference-channel DoF: full-duplex delayed CSIT, output feedback, and
//! Shannon feedback.
//!
//! The three schemes share one phase skeleton.  Phase m feeds symbols that a
//! set of m receivers wants, spends slots delivering random combinations of
//! them, and emits higher-order symbols wanted by m+1 receivers; the final
//! phase K-1 delivers by plain repetition.  The per-phase DoF therefore obeys
//!
//! ```text
//! DoF_m = (m+1)/m * Q_m(K) / (1 + (Q_m(K) - 1)/DoF_{m+1}),   2 <= m <= K-2
//! DoF_{K-1} = K/(K-1)
//! ```
//!
//! with `Q_m(K) = min(K-m, m)`, identical for the full-duplex and
//! output-feedback cascades.  They differ in phase 1: full duplex feeds pairs
//! (DoF_1 = 2/(1 + 1/DoF_2)) while output feedback feeds `mu(K)` fresh
//! symbols per slot and phase-1 DoF becomes `f_K(mu)` below, maximized over
//! the integer width `mu`.  Shannon feedback runs its own recursion with
//! `Q_m(K+1)` in place of `Q_m(K)` and a two-round opening.

use super::{ceil_half, floor_half, require_ic_k};
use crate::combin::{harmonic_sum, inv_square_sum, q_min};
use crate::rational::{rat, to_f64, Rational};
use crate::DofError;
use num_traits::One;

fn out_of_range(msg: String) -> DofError {
    DofError::OutOfRange(msg)
}

/// Unrolls the shared IC phase recursion down to phase `m`.
///
/// `q_of` maps a phase index to its per-unit side-receiver count; the
/// standard cascades use `Q_m(K)` but the consistency sweep also drives this
/// with a corrupted variant as a negative control.
pub(crate) fn ic_phase_recursion_with(
    m: u32,
    k: u32,
    q_of: impl Fn(u32, u32) -> u32,
) -> Result<Rational, DofError> {
    require_ic_k(k)?;
    if !(2 <= m && m < k) {
        return Err(out_of_range(format!(
            "IC phase recursion needs 2 <= m <= K-1, got m={m}, K={k}"
        )));
    }
    // DoF_{K-1} = K/(K-1), then walk downward.
    let mut dof = rat(k as i64, (k - 1) as i64);
    for phase in (m..=k.saturating_sub(2)).rev() {
        let q = q_of(phase, k) as i64;
        let numer = rat((phase + 1) as i64, phase as i64) * rat(q, 1);
        dof = numer / (Rational::one() + rat(q - 1, 1) / dof);
    }
    Ok(dof)
}

fn ic_phase_recursion(m: u32, k: u32) -> Result<Rational, DofError> {
    ic_phase_recursion_with(m, k, |p, n| q_min(p, n).expect("valid phase"))
}

/// Full-duplex delayed-CSIT DoF by unrolling the recursion from phase K-1
/// down to phase `m` (phase 1 uses DoF_1 = 2/(1 + 1/DoF_2)).
pub fn dof_icfd_recursive(m: u32, k: u32) -> Result<Rational, DofError> {
    require_ic_k(k)?;
    if m == 1 {
        let d2 = ic_phase_recursion(2, k)?;
        return Ok(rat(2, 1) / (Rational::one() + d2.recip()));
    }
    ic_phase_recursion(m, k)
}

/// Full-duplex delayed-CSIT DoF, closed form:
///
/// ```text
/// 4 / (3 - 2/(c(c-1)) + 4/(f(c-1)) * sum_{l=c+1}^{K} 1/l),  c=ceil(K/2), f=floor(K/2)
/// ```
pub fn dof_icfd_closed(k: u32) -> Result<Rational, DofError> {
    require_ic_k(k)?;
    let c = ceil_half(k) as i64;
    let f = floor_half(k) as i64;
    let denom = rat(3, 1) - rat(2, c * (c - 1))
        + rat(4, f * (c - 1)) * harmonic_sum(c as u64 + 1, k as u64);
    Ok(rat(4, 1) / denom)
}

/// Output-feedback phase-m DoF, closed form with a branch at `ceil(K/2)`.
pub fn dof_icof_order(m: u32, k: u32) -> Result<Rational, DofError> {
    require_ic_k(k)?;
    if !(2 <= m && m < k) {
        return Err(out_of_range(format!(
            "order-m DoF needs 2 <= m <= K-1, got m={m}, K={k}"
        )));
    }
    let c = ceil_half(k) as i64;
    let f = floor_half(k) as i64;
    let m_i = m as i64;
    let denom = if m <= c as u32 {
        rat(1, 2) - rat(m_i * (m_i - 1), 2 * c * (c - 1))
            + rat(m_i * (m_i - 1), f * (c - 1)) * harmonic_sum(c as u64 + 1, k as u64)
    } else {
        rat(m_i, (k as i64) - m_i) * harmonic_sum(m as u64 + 1, k as u64)
    };
    Ok(denom.recip())
}

/// Output-feedback phase-m DoF by recursion unroll (the oracle route for the
/// closed form above).
pub fn dof_icof_order_recursive(m: u32, k: u32) -> Result<Rational, DofError> {
    ic_phase_recursion(m, k)
}

/// `a(K)`, the harmonic coefficient of the output-feedback phase-1 objective.
pub fn a_coeff(k: u32) -> Result<Rational, DofError> {
    require_ic_k(k)?;
    let c = ceil_half(k) as i64;
    let f = floor_half(k) as i64;
    Ok(rat(1, c - 1) * (rat(-1, 2 * c) + rat(1, f) * harmonic_sum(c as u64 + 1, k as u64)))
}

/// Output-feedback phase-1 DoF as a function of the fan-out width `w`:
/// `f_K(w) = w / (a(K) w (w-1)^2 + (w+1)/2)`.
pub fn f_icof(k: u32, w: u32) -> Result<Rational, DofError> {
    let a = a_coeff(k)?;
    let w_i = w as i64;
    Ok(rat(w_i, 1) / (a * rat(w_i * (w_i - 1) * (w_i - 1), 1) + rat(w_i + 1, 2)))
}

/// Real-valued maximizer of `f_K` over `w`, from the closed-form root of the
/// derivative (a depressed cubic).  Used only to pick the two integer
/// candidates; the decision between them is exact.
pub fn w_star(k: u32) -> Result<f64, DofError> {
    let a = to_f64(&a_coeff(k)?);
    let s = (48.0 * a + 81.0).sqrt();
    let term = |x: f64| (x / a).cbrt() / 6.0;
    Ok(1.0 / 3.0 + term(8.0 * a + 3.0 * s + 27.0) + term(8.0 * a - 3.0 * s + 27.0))
}

/// Integer fan-out width `mu(K)`: floor/ceil of `w_star` clamped to
/// `[2, ceil(K/2)]`, decided by exact comparison of `f_K`; ties break to the
/// smaller width.
pub fn mu_star(k: u32) -> Result<u32, DofError> {
    let cap = ceil_half(k).max(2);
    let ws = w_star(k)?;
    let lo = (ws.floor() as i64).clamp(2, cap as i64) as u32;
    let hi = (ws.ceil() as i64).clamp(2, cap as i64) as u32;
    if lo == hi {
        return Ok(lo);
    }
    let f_lo = f_icof(k, lo)?;
    let f_hi = f_icof(k, hi)?;
    Ok(if f_hi > f_lo { hi } else { lo })
}

/// Exhaustive argmax of `f_K` over `w in [2, ceil(K/2)]`, the oracle for
/// [`mu_star`].  Ties break low.
pub fn mu_star_exhaustive(k: u32) -> Result<u32, DofError> {
    require_ic_k(k)?;
    let mut best_w = 2;
    let mut best = f_icof(k, 2)?;
    for w in 3..=ceil_half(k).max(2) {
        let v = f_icof(k, w)?;
        if v > best {
            best = v;
            best_w = w;
        }
    }
    Ok(best_w)
}

/// Output-feedback DoF: `f_K(mu(K))`.
pub fn dof_icof(k: u32) -> Result<Rational, DofError> {
    f_icof(k, mu_star(k)?)
}

/// Shannon-feedback phase-m DoF, closed form with a branch at `floor(K/2)`.
pub fn dof_icsf_order(m: u32, k: u32) -> Result<Rational, DofError> {
    require_ic_k(k)?;
    if !(2 <= m && m <= k) {
        return Err(out_of_range(format!(
            "Shannon-feedback order-m DoF needs 2 <= m <= K, got m={m}, K={k}"
        )));
    }
    let c = ceil_half(k) as i64;
    let f = floor_half(k) as i64;
    let m_i = m as i64;
    let denom = if m_i <= f {
        let bracket = rat(1, m_i) - rat(1, f) - inv_square_sum(m as u64 + 1, f as u64)
            + rat(1, f * c) * harmonic_sum(f as u64 + 1, k as u64);
        rat(1, m_i) + rat(m_i * (m_i - 1), 1) * bracket
    } else {
        rat(m_i, (k as i64) - m_i + 1) * harmonic_sum(m as u64, k as u64)
    };
    Ok(denom.recip())
}

/// Shannon-feedback phase-m DoF by recursion unroll:
/// `DoF_m = (m+1) Q_m(K+1) / (m+1 + m (Q_m(K+1)-1)/DoF_{m+1})`, `DoF_K = 1`.
pub fn dof_icsf_order_recursive(m: u32, k: u32) -> Result<Rational, DofError> {
    require_ic_k(k)?;
    if !(2 <= m && m <= k) {
        return Err(out_of_range(format!(
            "Shannon-feedback recursion needs 2 <= m <= K, got m={m}, K={k}"
        )));
    }
    let mut dof = Rational::one();
    for phase in (m..k).rev() {
        let q = q_min(phase, k + 1)? as i64;
        let p = phase as i64;
        dof = rat((p + 1) * q, 1) / (rat(p + 1, 1) + rat(p * (q - 1), 1) / dof);
    }
    Ok(dof)
}

/// Round-1 objective of the Shannon-feedback scheme at fan-out width `w`:
/// `w / (1 + (w-2)/DoF_w^OF + w/((w+1) DoF_{w+1}^SF))`.
pub fn icsf_objective(k: u32, w: u32) -> Result<Rational, DofError> {
    if !(2 <= w && w <= ceil_half(k).max(2)) {
        return Err(out_of_range(format!(
            "Shannon-feedback width needs 2 <= w <= ceil(K/2), got w={w}, K={k}"
        )));
    }
    let of_term = if w == 2 {
        Rational::from_integer(0.into())
    } else {
        rat((w - 2) as i64, 1) / dof_icof_order(w, k)?
    };
    let sf_term = rat(w as i64, (w + 1) as i64) / dof_icsf_order(w + 1, k)?;
    Ok(rat(w as i64, 1) / (Rational::one() + of_term + sf_term))
}

/// Width `nu(K)` maximizing the Shannon-feedback objective; the search is
/// exhaustive over `[2, ceil(K/2)]` by construction, ties break low.
pub fn nu_star(k: u32) -> Result<u32, DofError> {
    require_ic_k(k)?;
    let mut best_w = 2;
    let mut best = icsf_objective(k, 2)?;
    for w in 3..=ceil_half(k).max(2) {
        let v = icsf_objective(k, w)?;
        if v > best {
            best = v;
            best_w = w;
        }
    }
    Ok(best_w)
}

/// Shannon-feedback DoF: the objective at `nu(K)`.
pub fn dof_icsf(k: u32) -> Result<Rational, DofError> {
    icsf_objective(k, nu_star(k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;

    #[test]
    fn icfd_golden_fractions() {
        assert_eq!(dof_icfd_recursive(1, 3).unwrap(), rat(6, 5));
        assert_eq!(dof_icfd_recursive(1, 4).unwrap(), rat(24, 19));
        assert_eq!(dof_icfd_recursive(4, 5).unwrap(), rat(5, 4));
        assert_eq!(dof_icfd_closed(3).unwrap(), rat(6, 5));
        assert_eq!(dof_icfd_closed(4).unwrap(), rat(24, 19));
        assert_eq!(dof_icfd_closed(6).unwrap(), rat(360, 277));
    }

    #[test]
    fn icfd_large_k_approaches_four_thirds() {
        let d = dof_icfd_closed(1000).unwrap();
        assert!((to_f64(&d) - 4.0 / 3.0).abs() < 1e-2);
    }

    #[test]
    fn two_user_ic_is_flagged() {
        match dof_icfd_closed(2) {
            Err(DofError::UnsupportedRegime { fallback, .. }) => {
                assert_eq!(fallback, rat(1, 1));
            }
            other => panic!("expected unsupported regime, got {other:?}"),
        }
        assert!(dof_icof(2).is_err());
        assert!(dof_icsf(1).is_err());
    }

    #[test]
    fn icof_order_values() {
        assert_eq!(dof_icof_order(4, 5).unwrap(), rat(5, 4));
        // Recursion unroll confirms the first-branch value at (2, 3).
        assert_eq!(dof_icof_order(2, 3).unwrap(), rat(3, 2));
        assert_eq!(dof_icof_order_recursive(2, 3).unwrap(), rat(3, 2));
        assert!(dof_icof_order(1, 5).is_err());
        assert!(dof_icof_order(5, 5).is_err());
    }

    #[test]
    fn icof_branches_meet_at_ceil_half() {
        // Both branch expressions coincide at m = ceil(K/2).
        for k in 6..=12u32 {
            let m = ceil_half(k);
            let first = {
                let c = ceil_half(k) as i64;
                let f = floor_half(k) as i64;
                let m_i = m as i64;
                (rat(1, 2) - rat(m_i * (m_i - 1), 2 * c * (c - 1))
                    + rat(m_i * (m_i - 1), f * (c - 1)) * harmonic_sum(c as u64 + 1, k as u64))
                .recip()
            };
            let second =
                (rat(m as i64, (k - m) as i64) * harmonic_sum(m as u64 + 1, k as u64)).recip();
            assert_eq!(first, second, "K={k}");
        }
    }

    #[test]
    fn icof_golden_and_monotone_limit() {
        assert_eq!(dof_icof(3).unwrap(), rat(6, 5));
        assert_eq!(dof_icof(4).unwrap(), rat(24, 19));
        assert_eq!(dof_icof(5).unwrap(), rat(240, 187));
        assert_eq!(dof_icof(6).unwrap(), rat(90, 67));
        let d100 = dof_icof(100).unwrap();
        let d200 = dof_icof(200).unwrap();
        assert!(d100 < d200 && d200 < rat(2, 1));
    }

    #[test]
    fn mu_star_matches_exhaustive_search() {
        assert_eq!(mu_star(3).unwrap(), 2);
        assert_eq!(mu_star(4).unwrap(), 2);
        assert_eq!(mu_star(30).unwrap(), mu_star_exhaustive(30).unwrap());
        for k in 3..=60 {
            assert_eq!(mu_star(k).unwrap(), mu_star_exhaustive(k).unwrap(), "K={k}");
        }
    }

    #[test]
    fn icsf_order_values() {
        assert_eq!(dof_icsf_order(3, 3).unwrap(), rat(1, 1));
        assert_eq!(dof_icsf_order(4, 4).unwrap(), rat(1, 1));
        // Second branch at (3, 4): (3/2 * (1/3 + 1/4))^-1, confirmed by the
        // recursion unroll.
        assert_eq!(dof_icsf_order(3, 4).unwrap(), rat(8, 7));
        assert_eq!(dof_icsf_order_recursive(3, 4).unwrap(), rat(8, 7));
        for k in 4..=12 {
            assert_eq!(
                dof_icsf_order(2, k).unwrap(),
                dof_icsf_order_recursive(2, k).unwrap(),
                "K={k}"
            );
        }
    }

    #[test]
    fn icsf_golden_and_bounded() {
        assert_eq!(dof_icsf(3).unwrap(), rat(6, 5));
        assert_eq!(dof_icsf(4).unwrap(), rat(24, 19));
        assert_eq!(dof_icsf(5).unwrap(), rat(180, 137));
        for k in 3..=60 {
            assert!(dof_icsf(k).unwrap() < rat(2, 1), "K={k}");
        }
    }

    #[test]
    fn nu_star_small_networks() {
        assert_eq!(nu_star(3).unwrap(), 2);
        assert_eq!(nu_star(4).unwrap(), 2);
        assert_eq!(nu_star(5).unwrap(), 2);
        assert_eq!(nu_star(6).unwrap(), 3);
    }

    #[test]
    fn full_duplex_equals_width_two_output_feedback() {
        // The full-duplex cascade is the width-2 special case of f_K.
        for k in 3..=30 {
            assert_eq!(dof_icfd_closed(k).unwrap(), f_icof(k, 2).unwrap(), "K={k}");
        }
    }
}
