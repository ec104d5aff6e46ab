//! Combinatorial counts shared by the DoF formulas and the phase ledgers:
//! binomial coefficients, exact harmonic partial sums, and the per-phase
//! quantities `Q_m`, `L_m`, `alpha_m`.

use crate::rational::{rat, Rational};
use crate::DofError;
use num_traits::Zero;
use std::sync::{LazyLock, Mutex};

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    acc
}

// Memoized harmonic prefix sums H[n] = 1 + 1/2 + ... + 1/n, exact.
static HARMONIC: LazyLock<Mutex<Vec<Rational>>> =
    LazyLock::new(|| Mutex::new(vec![Rational::zero()]));

fn harmonic_prefix(n: u64) -> Rational {
    let mut table = HARMONIC.lock().expect("harmonic cache poisoned");
    while (table.len() as u64) <= n {
        let next = table.len() as i64;
        let value = table.last().expect("nonempty").clone() + rat(1, next);
        table.push(value);
    }
    table[n as usize].clone()
}

/// Exact `sum_{l=lo}^{hi} 1/l`; empty sums (lo > hi) are zero.
pub fn harmonic_sum(lo: u64, hi: u64) -> Rational {
    if lo > hi {
        return Rational::zero();
    }
    harmonic_prefix(hi) - harmonic_prefix(lo.saturating_sub(1))
}

/// Exact `sum_{l=lo}^{hi} 1/l^2`; empty sums are zero.
pub fn inv_square_sum(lo: u64, hi: u64) -> Rational {
    let mut acc = Rational::zero();
    for l in lo..=hi {
        acc += rat(1, (l * l) as i64);
    }
    acc
}

fn check_phase_range(m: u32, n: u32) -> Result<(), DofError> {
    if m >= 1 && m < n {
        Ok(())
    } else {
        Err(DofError::OutOfRange(format!(
            "phase index m={m} must satisfy 1 <= m < {n}"
        )))
    }
}

/// `Q_m(n) = min(n - m, m)`: equations a side receiver contributes per
/// delivered batch in phase m of an n-node cascade.
pub fn q_min(m: u32, n: u32) -> Result<u32, DofError> {
    check_phase_range(m, n)?;
    Ok((n - m).min(m))
}

/// `L_m(n) = lcm(n - m, m)`: the per-unit symbol batch size of phase m.
pub fn l_lcm(m: u32, n: u32) -> Result<u32, DofError> {
    check_phase_range(m, n)?;
    Ok(num_integer::lcm(n - m, m))
}

/// `alpha_m(K) = C(K, m+1) * C(K-m-1, Q_m(K)-1) * L_m(K)`: the batch size
/// that makes phase m of the IC cascades consume and produce integer symbol
/// counts.
pub fn alpha(m: u32, k: u32) -> Result<u128, DofError> {
    if !(2 <= m && m + 2 <= k) {
        return Err(DofError::OutOfRange(format!(
            "alpha_m(K) needs 2 <= m <= K-2, got m={m}, K={k}"
        )));
    }
    let q = q_min(m, k)?;
    let l = l_lcm(m, k)? as u128;
    let a = binomial(k as u64, (m + 1) as u64);
    let b = binomial((k - m - 1) as u64, (q - 1) as u64);
    a.checked_mul(b)
        .and_then(|x| x.checked_mul(l))
        .ok_or_else(|| DofError::Overflow(format!("alpha({m}, {k})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(4, 7), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn harmonic_sums_exact() {
        assert_eq!(harmonic_sum(1, 4), rat(25, 12));
        assert_eq!(harmonic_sum(3, 3), rat(1, 3));
        assert_eq!(harmonic_sum(5, 4), rat(0, 1));
        assert_eq!(inv_square_sum(1, 3), rat(49, 36));
        assert_eq!(inv_square_sum(4, 3), rat(0, 1));
    }

    #[test]
    fn q_and_l() {
        assert_eq!(q_min(2, 5).unwrap(), 2);
        assert_eq!(q_min(5, 6).unwrap(), 1);
        assert_eq!(q_min(3, 6).unwrap(), 3);
        assert_eq!(l_lcm(2, 5).unwrap(), 6);
        assert_eq!(l_lcm(3, 6).unwrap(), 3);
        assert_eq!(l_lcm(2, 6).unwrap(), 4);
        assert!(q_min(5, 5).is_err());
        assert!(l_lcm(0, 5).is_err());
    }

    #[test]
    fn alpha_values() {
        // Recomputed by hand: C(5,3)*C(2,1)*lcm(3,2) = 10*2*6.
        assert_eq!(alpha(2, 5).unwrap(), 120);
        // C(4,3)*C(1,1)*lcm(2,2) = 4*1*2.
        assert_eq!(alpha(2, 4).unwrap(), 8);
        // C(6,4)*C(2,2)*lcm(3,3) = 15*1*3.
        assert_eq!(alpha(3, 6).unwrap(), 45);
        assert!(alpha(1, 5).is_err());
        assert!(alpha(4, 5).is_err());
    }
}
