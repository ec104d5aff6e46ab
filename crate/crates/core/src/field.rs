//! Coefficient fields for channel realizations and linear expressions.
//!
//! Two backends implement [`Field`]:
//!
//! * [`Fp61`] — the prime field modulo 2^61 - 1.  Channel coefficients drawn
//!   uniformly from a field this large behave generically (a random square
//!   system of size n is singular with probability at most n/p by
//!   Schwartz–Zippel), so rank verdicts over it certify the almost-sure rank
//!   claims that decodability rests on.  This is the default for acceptance
//!   runs: floating-point rank thresholds cannot certify almost-sure
//!   statements.
//! * [`Cf64`] — complex doubles with circularly symmetric Gaussian
//!   coefficients, matching the physical channel model.  Rank decisions use
//!   relative tolerances and are observational, not certifying.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};
use std::fmt::Debug;

/// Modulus of the prime backend: the Mersenne prime 2^61 - 1.
pub const MERSENNE_P: u64 = (1u64 << 61) - 1;

/// Relative magnitude below which a float coefficient counts as zero during
/// elimination.
pub const FLOAT_PRUNE_EPS: f64 = 1e-12;

/// Relative pivot tolerance for float-mode rank decisions.
pub const FLOAT_RANK_TOL: f64 = 1e-9;

pub trait Field: Copy + Clone + PartialEq + Debug + Send + Sync + 'static {
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
    fn neg(self) -> Self;
    /// Multiplicative inverse; `None` for (numerically) zero.
    fn inv(self) -> Option<Self>;

    fn is_zero(&self) -> bool;
    /// Magnitude used for pivot selection and zero pruning; exact fields
    /// return 1 for any nonzero element.
    fn magnitude(&self) -> f64;
    /// True when the coefficient should be pruned from a sparse expression.
    fn is_negligible(&self) -> bool;

    fn from_u64(x: u64) -> Self;
    /// Uniform nonzero (prime mode) or standard circular Gaussian (complex).
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// JSON wire form: decimal string for prime elements, `[re, im]` for
    /// complex.
    fn to_json(&self) -> Value;
}

/// Residue modulo 2^61 - 1, stored reduced.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Fp61(pub u64);

#[inline]
fn reduce_mersenne(x: u128) -> u64 {
    // Fold twice: x mod (2^61 - 1) for x < 2^122.
    let folded = (x & MERSENNE_P as u128) + (x >> 61);
    let folded = (folded & MERSENNE_P as u128) + (folded >> 61);
    let mut r = folded as u64;
    if r >= MERSENNE_P {
        r -= MERSENNE_P;
    }
    r
}

impl Fp61 {
    pub fn new(x: u64) -> Self {
        Fp61(x % MERSENNE_P)
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp61(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }
}

impl Field for Fp61 {
    const NAME: &'static str = "prime";

    fn zero() -> Self {
        Fp61(0)
    }

    fn one() -> Self {
        Fp61(1)
    }

    #[inline]
    fn add(self, other: Self) -> Self {
        let mut s = self.0 + other.0;
        if s >= MERSENNE_P {
            s -= MERSENNE_P;
        }
        Fp61(s)
    }

    #[inline]
    fn sub(self, other: Self) -> Self {
        let s = self.0.wrapping_sub(other.0);
        Fp61(if self.0 >= other.0 {
            s
        } else {
            s.wrapping_add(MERSENNE_P)
        })
    }

    #[inline]
    fn mul(self, other: Self) -> Self {
        Fp61(reduce_mersenne(self.0 as u128 * other.0 as u128))
    }

    fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            Fp61(MERSENNE_P - self.0)
        }
    }

    fn inv(self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(MERSENNE_P - 2))
        }
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn magnitude(&self) -> f64 {
        if self.0 == 0 {
            0.0
        } else {
            1.0
        }
    }

    fn is_negligible(&self) -> bool {
        self.0 == 0
    }

    fn from_u64(x: u64) -> Self {
        Fp61::new(x)
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Fp61(rng.random_range(1..MERSENNE_P))
    }

    fn to_json(&self) -> Value {
        Value::String(self.0.to_string())
    }
}

/// Complex double coefficient.
#[derive(Copy, Clone, PartialEq, Debug)]
pub struct Cf64(pub Complex64);

impl Field for Cf64 {
    const NAME: &'static str = "complex";

    fn zero() -> Self {
        Cf64(Complex64::new(0.0, 0.0))
    }

    fn one() -> Self {
        Cf64(Complex64::new(1.0, 0.0))
    }

    fn add(self, other: Self) -> Self {
        Cf64(self.0 + other.0)
    }

    fn sub(self, other: Self) -> Self {
        Cf64(self.0 - other.0)
    }

    fn mul(self, other: Self) -> Self {
        Cf64(self.0 * other.0)
    }

    fn neg(self) -> Self {
        Cf64(-self.0)
    }

    fn inv(self) -> Option<Self> {
        if self.is_negligible() {
            None
        } else {
            Some(Cf64(self.0.finv()))
        }
    }

    fn is_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }

    fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    fn is_negligible(&self) -> bool {
        self.0.norm() < FLOAT_PRUNE_EPS
    }

    fn from_u64(x: u64) -> Self {
        Cf64(Complex64::new(x as f64, 0.0))
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cf64(Complex64::new(
            re / std::f64::consts::SQRT_2,
            im / std::f64::consts::SQRT_2,
        ))
    }

    fn to_json(&self) -> Value {
        json!([self.0.re, self.0.im])
    }
}
