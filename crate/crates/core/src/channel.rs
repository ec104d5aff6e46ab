//! Time-indexed channel realizations.

use crate::field::Field;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Per-slot cross-link matrices H(t) (receivers × transmitters) and, when
/// the model uses full-duplex cooperation, inter-transmitter matrices H~(t).
/// Entries are i.i.d. draws: uniform nonzero in prime mode, circular
/// Gaussian in complex mode; dimensions are constant over the horizon.
#[derive(Clone, Debug)]
pub struct ChannelRealization<F: Field> {
    pub rx_count: usize,
    pub tx_count: usize,
    pub horizon: usize,
    cross: Vec<F>,
    fullduplex: Option<Vec<F>>,
}

impl<F: Field> ChannelRealization<F> {
    /// Coefficient from transmitter `tx` to receiver `rx` in slot `t`.
    #[inline]
    pub fn cross(&self, t: usize, rx: usize, tx: usize) -> F {
        self.cross[(t * self.rx_count + rx) * self.tx_count + tx]
    }

    /// Full-duplex coefficient from transmitter `from` into transmitter
    /// `to`'s receive chain in slot `t`.
    #[inline]
    pub fn fullduplex(&self, t: usize, to: usize, from: usize) -> F {
        let fd = self
            .fullduplex
            .as_ref()
            .expect("model without full-duplex matrices");
        fd[(t * self.tx_count + to) * self.tx_count + from]
    }

    pub fn has_fullduplex(&self) -> bool {
        self.fullduplex.is_some()
    }

    pub fn cross_row(&self, t: usize, rx: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        (0..self.tx_count).map(move |tx| (tx, self.cross(t, rx, tx)))
    }
}

/// Draws a realization deterministically from `seed` (stream 0 of the run's
/// RNG; stream 1 is reserved for offline combination coefficients).
pub fn generate_channel<F: Field>(
    rx_count: usize,
    tx_count: usize,
    horizon: usize,
    seed: u64,
    fullduplex: bool,
) -> ChannelRealization<F> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let cross = (0..horizon * rx_count * tx_count)
        .map(|_| F::random(&mut rng))
        .collect();
    let fullduplex = fullduplex.then(|| {
        (0..horizon * tx_count * tx_count)
            .map(|_| F::random(&mut rng))
            .collect()
    });
    ChannelRealization {
        rx_count,
        tx_count,
        horizon,
        cross,
        fullduplex,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Cf64, Fp61};

    #[test]
    fn deterministic_per_seed() {
        let a: ChannelRealization<Fp61> = generate_channel(3, 3, 5, 7, true);
        let b: ChannelRealization<Fp61> = generate_channel(3, 3, 5, 7, true);
        for t in 0..5 {
            for j in 0..3 {
                for i in 0..3 {
                    assert_eq!(a.cross(t, j, i), b.cross(t, j, i));
                    assert_eq!(a.fullduplex(t, j, i), b.fullduplex(t, j, i));
                }
            }
        }
        let c: ChannelRealization<Fp61> = generate_channel(3, 3, 5, 8, true);
        assert_ne!(a.cross(0, 0, 0), c.cross(0, 0, 0));
    }

    #[test]
    fn prime_entries_are_nonzero() {
        let ch: ChannelRealization<Fp61> = generate_channel(4, 4, 20, 123, false);
        for t in 0..20 {
            for j in 0..4 {
                for i in 0..4 {
                    assert!(!ch.cross(t, j, i).is_zero());
                }
            }
        }
    }

    #[test]
    fn complex_mode_has_expected_shape() {
        let ch: ChannelRealization<Cf64> = generate_channel(3, 2, 5, 1, false);
        assert_eq!(ch.rx_count, 3);
        assert_eq!(ch.tx_count, 2);
        assert_eq!(ch.horizon, 5);
    }
}
