//! Large-network limits of the achievable DoF curves.

use crate::rational::{rat, to_f64, Rational};
use crate::{ChannelKind, Feedback, ModelId};

/// An asymptotic limit: exact when rational, otherwise a float.
#[derive(Debug, Clone, PartialEq)]
pub enum Limit {
    Exact(Rational),
    Irrational(f64),
}

impl Limit {
    pub fn as_f64(&self) -> f64 {
        match self {
            Limit::Exact(r) => to_f64(r),
            Limit::Irrational(x) => *x,
        }
    }
}

/// K→∞ limit of the achievable DoF for a model.
///
/// For the full-duplex X channel, `m_tx = Some(M)` gives the fixed-M limit
/// (1/ln 2 at M = 2, 8/(3 ln 3 + 2) at M = 3, ...); `m_tx = None` selects the
/// wide regime M > K/2 whose limit is 6/(pi^2 - 6).
pub fn asymptote(model: ModelId, m_tx: Option<u32>) -> Limit {
    match (model.channel, model.feedback) {
        (ChannelKind::Ic, Feedback::FullDuplexDelayedCsit) => Limit::Exact(rat(4, 3)),
        (ChannelKind::Ic, _) => Limit::Exact(rat(2, 1)),
        (ChannelKind::X, Feedback::FullDuplexDelayedCsit) => match m_tx {
            Some(m) if m >= 2 => Limit::Irrational(xfd_fixed_m_limit(m)),
            _ => Limit::Irrational(6.0 / (std::f64::consts::PI.powi(2) - 6.0)),
        },
        (ChannelKind::X, _) => Limit::Exact(rat(2, 1)),
    }
}

/// Fixed-M limit of the full-duplex X-channel DoF.
///
/// Derived by letting K→∞ in the M <= ceil(K/2) closed form: the geometric
/// harmonic tail converges to `r^{-M} (ln M - sum_{l<M-1} r^l / l)` with
/// `r = (M-1)/M`, giving
///
/// ```text
/// 1 / ( 1/(M-1) - 1 + sum_{l=1}^{M-2} 1/l^2
///       + 1/(M-1)^2 [ (M/(M-1))^{M-2} ln M
///                     - sum_{l=1}^{M-2} (M/(M-1))^{M-2-l} / l ] )
/// ```
///
/// This form is exact for all M >= 2 (at M = 2 it reduces to 1/ln 2).
fn xfd_fixed_m_limit(m_tx: u32) -> f64 {
    let m = m_tx as f64;
    let ratio = m / (m - 1.0);
    let mut denom = 1.0 / (m - 1.0) - 1.0;
    for l in 1..=(m_tx.saturating_sub(2)) {
        denom += 1.0 / (l as f64 * l as f64);
    }
    let mut bracket = ratio.powi(m_tx as i32 - 2) * m.ln();
    for l in 1..=(m_tx.saturating_sub(2)) {
        bracket -= ratio.powi((m_tx - 2 - l) as i32) / l as f64;
    }
    denom += bracket / ((m - 1.0) * (m - 1.0));
    1.0 / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dof::{dof_icof, dof_xfd};
    use crate::rational::to_f64;

    #[test]
    fn stated_limits() {
        assert_eq!(asymptote(ModelId::IC_FD, None), Limit::Exact(rat(4, 3)));
        assert_eq!(asymptote(ModelId::IC_OF, None), Limit::Exact(rat(2, 1)));
        assert_eq!(asymptote(ModelId::IC_SF, None), Limit::Exact(rat(2, 1)));
        assert_eq!(asymptote(ModelId::X_OF, None), Limit::Exact(rat(2, 1)));
        assert_eq!(asymptote(ModelId::X_SF, None), Limit::Exact(rat(2, 1)));

        let m2 = asymptote(ModelId::X_FD, Some(2)).as_f64();
        assert!((m2 - 1.0 / std::f64::consts::LN_2).abs() < 1e-12);
        let m3 = asymptote(ModelId::X_FD, Some(3)).as_f64();
        assert!((m3 - 8.0 / (3.0 * 3f64.ln() + 2.0)).abs() < 1e-12);
        let wide = asymptote(ModelId::X_FD, None).as_f64();
        assert!((wide - 6.0 / (std::f64::consts::PI.powi(2) - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn curves_approach_their_limits() {
        let icof_limit = asymptote(ModelId::IC_OF, None).as_f64();
        assert!((to_f64(&dof_icof(400).unwrap()) - icof_limit).abs() < 0.2);
        let m5 = asymptote(ModelId::X_FD, Some(5)).as_f64();
        assert!((to_f64(&dof_xfd(5, 2000).unwrap()) - m5).abs() < 1e-2);
    }
}
