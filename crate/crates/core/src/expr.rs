//! Symbol algebra: fresh-symbol pool, sparse linear expressions over a
//! field, span maintenance (Gaussian elimination), and the rank-based
//! decodability test.
//!
//! A [`LinearExpr`] over [`SymbolId`]s is the universal currency of the
//! simulator — transmissions, receptions, and side information are all
//! linear combinations of the fresh information symbols minted at phase 1.
//! A receiver can decode symbol `t` from a set of equations exactly when the
//! unit functional on `t` lies in their row span, which [`decodable`] decides
//! by reduction against an incrementally maintained reduced echelon basis.

use crate::field::Field;
use rand::Rng;
use std::collections::BTreeSet;

/// Identifier of one fresh information symbol (or synthesized atom).
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SymbolId(pub u32);

/// Who minted a symbol and which receiver wants it.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    pub owner_tx: usize,
    pub intended_rx: usize,
}

/// Issues run-unique [`SymbolId`]s and records their metadata.
#[derive(Default, Debug, Clone)]
pub struct SymbolPool {
    info: Vec<SymbolInfo>,
}

impl SymbolPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mints `count` distinct fresh symbols owned by `owner_tx` and intended
    /// for `intended_rx`.
    pub fn mint_fresh(
        &mut self,
        count: usize,
        owner_tx: usize,
        intended_rx: usize,
    ) -> Vec<SymbolId> {
        let start = self.info.len();
        self.info.extend(std::iter::repeat_n(
            SymbolInfo {
                owner_tx,
                intended_rx,
            },
            count,
        ));
        (start..start + count).map(|i| SymbolId(i as u32)).collect()
    }

    pub fn len(&self) -> usize {
        self.info.len()
    }

    pub fn is_empty(&self) -> bool {
        self.info.is_empty()
    }

    pub fn info(&self, id: SymbolId) -> SymbolInfo {
        self.info[id.0 as usize]
    }
}

/// Sparse linear combination of symbols; terms sorted by id, no explicit
/// zeros stored.
#[derive(Clone, PartialEq, Debug)]
pub struct LinearExpr<F: Field> {
    terms: Vec<(SymbolId, F)>,
}

impl<F: Field> Default for LinearExpr<F> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<F: Field> LinearExpr<F> {
    pub fn zero() -> Self {
        LinearExpr { terms: Vec::new() }
    }

    pub fn single(id: SymbolId, coeff: F) -> Self {
        if coeff.is_negligible() {
            Self::zero()
        } else {
            LinearExpr {
                terms: vec![(id, coeff)],
            }
        }
    }

    /// Builds from unsorted (id, coeff) pairs, merging duplicates.
    pub fn from_terms(mut terms: Vec<(SymbolId, F)>) -> Self {
        terms.sort_by_key(|(id, _)| *id);
        let mut out: Vec<(SymbolId, F)> = Vec::with_capacity(terms.len());
        for (id, c) in terms {
            match out.last_mut() {
                Some((last, acc)) if *last == id => *acc = acc.add(c),
                _ => out.push((id, c)),
            }
        }
        out.retain(|(_, c)| !c.is_negligible());
        LinearExpr { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SymbolId, F)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.terms.iter().map(|(id, _)| *id)
    }

    pub fn coeff(&self, id: SymbolId) -> F {
        self.terms
            .binary_search_by_key(&id, |(i, _)| *i)
            .map(|pos| self.terms[pos].1)
            .unwrap_or_else(|_| F::zero())
    }

    pub fn scale(&self, c: F) -> Self {
        if c.is_negligible() {
            return Self::zero();
        }
        LinearExpr {
            terms: self
                .terms
                .iter()
                .map(|(id, x)| (*id, x.mul(c)))
                .filter(|(_, x)| !x.is_negligible())
                .collect(),
        }
    }

    /// `self + c * other`, merging sorted term lists.
    pub fn add_scaled(&self, other: &Self, c: F) -> Self {
        if c.is_negligible() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a_id, a) = self.terms[i];
            let (b_id, b) = other.terms[j];
            match a_id.cmp(&b_id) {
                std::cmp::Ordering::Less => {
                    out.push((a_id, a));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    let v = b.mul(c);
                    if !v.is_negligible() {
                        out.push((b_id, v));
                    }
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let v = a.add(b.mul(c));
                    if !v.is_negligible() {
                        out.push((a_id, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        for &(id, b) in &other.terms[j..] {
            let v = b.mul(c);
            if !v.is_negligible() {
                out.push((id, v));
            }
        }
        LinearExpr { terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, F::one())
    }

    /// Random linear combination of `exprs` with the given coefficients.
    pub fn combination(exprs: &[&Self], coeffs: &[F]) -> Self {
        debug_assert_eq!(exprs.len(), coeffs.len());
        let mut acc = Self::zero();
        for (e, &c) in exprs.iter().zip(coeffs) {
            acc = acc.add_scaled(e, c);
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(id, c)| serde_json::json!([id.0, c.to_json()]))
                .collect(),
        )
    }
}

/// An abstract coded symbol: a linear-combination value together with the
/// transmitters that can put it on the air, the receivers that want it, and
/// the receivers that already hold it.  A symbol wanted by m receivers is an
/// order-m symbol.
///
/// The two trailing fields track how holders came by the value: a feedback
/// holder observed it directly and can resend it with no channel knowledge,
/// while every other holder reconstructs it from the listed slots' cross
/// matrices (available only under delayed CSIT).
#[derive(Clone, Debug)]
pub struct SymbolSpec<F: Field> {
    pub expr: LinearExpr<F>,
    pub tx_holders: Vec<usize>,
    pub rx_desired: Vec<usize>,
    pub rx_known: Vec<usize>,
    pub feedback_holder: Option<usize>,
    pub needs_csi: BTreeSet<usize>,
}

impl<F: Field> SymbolSpec<F> {
    pub fn new(
        expr: LinearExpr<F>,
        tx_holders: Vec<usize>,
        rx_desired: Vec<usize>,
        rx_known: Vec<usize>,
    ) -> Self {
        debug_assert!(!tx_holders.is_empty(), "a generated symbol has holders");
        debug_assert!(!rx_desired.is_empty(), "order >= 1");
        debug_assert!(
            rx_known.iter().all(|j| !rx_desired.contains(j)),
            "rx_known and rx_desired are disjoint"
        );
        SymbolSpec {
            expr,
            tx_holders,
            rx_desired,
            rx_known,
            feedback_holder: None,
            needs_csi: BTreeSet::new(),
        }
    }

    pub fn with_feedback_holder(mut self, tx: usize) -> Self {
        self.feedback_holder = Some(tx);
        self
    }

    pub fn with_needs_csi(mut self, needs: BTreeSet<usize>) -> Self {
        self.needs_csi = needs;
        self
    }

    /// Number of receivers that simultaneously want this symbol.
    pub fn order(&self) -> usize {
        self.rx_desired.len()
    }

    /// Slots whose cross matrices transmitter `tx` must know to form the
    /// value.
    pub fn needs_for(&self, tx: usize) -> BTreeSet<usize> {
        if self.feedback_holder == Some(tx) {
            BTreeSet::new()
        } else {
            self.needs_csi.clone()
        }
    }
}

/// Incrementally maintained reduced echelon basis of a set of expressions.
///
/// Pivot rows are normalized (unit leading coefficient) and mutually reduced,
/// so membership of a new expression in the span is a single reduction pass.
/// In float mode, candidate pivots below [`crate::field::FLOAT_RANK_TOL`]
/// relative to the row's largest magnitude are treated as zero, a
/// rank-revealing fallback for near-singular pivots.
#[derive(Clone, Debug)]
pub struct Eliminator<F: Field> {
    /// Normalized pivot rows, keyed by leading (smallest) symbol id.
    pivots: std::collections::BTreeMap<SymbolId, LinearExpr<F>>,
}

impl<F: Field> Default for Eliminator<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Field> Eliminator<F> {
    pub fn new() -> Self {
        Eliminator {
            pivots: Default::default(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `expr` modulo the current span.
    pub fn reduce(&self, expr: &LinearExpr<F>) -> LinearExpr<F> {
        let mut row = expr.clone();
        loop {
            // Rows and pivots are mutually reduced, so each subtraction can
            // only introduce non-pivot columns; one sweep over the current
            // support suffices per iteration and the loop ends when no pivot
            // column remains.
            let hit = row
                .iter()
                .find(|(id, _)| self.pivots.contains_key(id))
                .map(|(id, c)| (*id, *c));
            match hit {
                None => break,
                Some((id, c)) => {
                    row = row.add_scaled(&self.pivots[&id], c.neg());
                }
            }
        }
        self.prune_small(row)
    }

    fn prune_small(&self, row: LinearExpr<F>) -> LinearExpr<F> {
        if row.is_zero() {
            return row;
        }
        let max_mag = row
            .iter()
            .map(|(_, c)| c.magnitude())
            .fold(0.0f64, f64::max);
        if max_mag == 0.0 {
            return LinearExpr::zero();
        }
        let kept: Vec<(SymbolId, F)> = row
            .iter()
            .filter(|(_, c)| c.magnitude() > crate::field::FLOAT_RANK_TOL * max_mag.max(1.0))
            .cloned()
            .collect();
        LinearExpr { terms: kept }
    }

    /// Inserts an expression; returns true when it enlarged the span.
    pub fn insert(&mut self, expr: &LinearExpr<F>) -> bool {
        let reduced = self.reduce(expr);
        if reduced.is_zero() {
            return false;
        }
        // Pivot on the largest-magnitude coordinate (partial pivoting); for
        // exact fields every nonzero magnitude ties at 1 and the earliest,
        // i.e. smallest, id wins.
        let (pivot_id, pivot_coeff) = reduced
            .iter()
            .fold(None::<(SymbolId, F)>, |best, (id, c)| match best {
                None => Some((*id, *c)),
                Some((_, bc)) if c.magnitude() > bc.magnitude() => Some((*id, *c)),
                other => other,
            })
            .expect("nonzero row has a pivot");
        let inv = pivot_coeff.inv().expect("pivot is nonzero");
        let normalized = reduced.scale(inv);
        // Keep existing rows reduced against the new pivot.
        let col = pivot_id;
        let updates: Vec<SymbolId> = self
            .pivots
            .iter()
            .filter(|(_, row)| !row.coeff(col).is_negligible())
            .map(|(id, _)| *id)
            .collect();
        for id in updates {
            let row = self.pivots[&id].clone();
            let c = row.coeff(col).neg();
            self.pivots.insert(id, row.add_scaled(&normalized, c));
        }
        self.pivots.insert(col, normalized);
        true
    }

    /// True when `expr` already lies in the span.
    pub fn contains(&self, expr: &LinearExpr<F>) -> bool {
        self.reduce(expr).is_zero()
    }
}

/// Reduces `eqs` modulo the span of `known`; the results have no component
/// in span(known).
pub fn eliminate<F: Field>(known: &[LinearExpr<F>], eqs: &[LinearExpr<F>]) -> Vec<LinearExpr<F>> {
    let mut elim = Eliminator::new();
    for k in known {
        elim.insert(k);
    }
    eqs.iter().map(|e| elim.reduce(e)).collect()
}

/// True when every target symbol's value is determined by
/// `span(eqs ∪ known)`, i.e. the unit functional on each target lies in the
/// row space.
pub fn decodable<F: Field>(
    eqs: &[LinearExpr<F>],
    known: &[LinearExpr<F>],
    targets: &BTreeSet<SymbolId>,
) -> bool {
    let mut elim = Eliminator::new();
    for e in eqs.iter().chain(known) {
        elim.insert(e);
    }
    decodable_in(&elim, targets)
}

/// Decodability against a prebuilt span.
pub fn decodable_in<F: Field>(elim: &Eliminator<F>, targets: &BTreeSet<SymbolId>) -> bool {
    targets
        .iter()
        .all(|t| elim.contains(&LinearExpr::single(*t, F::one())))
}

/// Draws `n` coefficients from the stream: uniform nonzero in prime mode,
/// standard circular Gaussian in complex mode.  Deterministic for a fixed
/// stream state.
pub fn random_coeffs<F: Field, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<F> {
    (0..n).map(|_| F::random(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Cf64, Fp61, MERSENNE_P};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn ids(v: &[u32]) -> Vec<SymbolId> {
        v.iter().map(|&i| SymbolId(i)).collect()
    }

    fn e(terms: &[(u32, u64)]) -> LinearExpr<Fp61> {
        LinearExpr::from_terms(
            terms
                .iter()
                .map(|&(i, c)| (SymbolId(i), Fp61::new(c)))
                .collect(),
        )
    }

    #[test]
    fn pool_mints_distinct_ids() {
        let mut pool = SymbolPool::new();
        let a = pool.mint_fresh(2, 1, 1);
        let b = pool.mint_fresh(3, 0, 2);
        assert_eq!(a.len(), 2);
        assert!(pool.mint_fresh(0, 0, 0).is_empty());
        let mut all: BTreeSet<_> = a.iter().collect();
        all.extend(b.iter());
        assert_eq!(all.len(), 5);
        assert_eq!(pool.info(a[0]).owner_tx, 1);
        assert_eq!(pool.info(b[2]).intended_rx, 2);
    }

    #[test]
    fn eliminate_examples() {
        // known = [x + y], eqs = [x + y + z] -> [z] up to scaling.
        let known = vec![e(&[(0, 1), (1, 1)])];
        let eqs = vec![e(&[(0, 1), (1, 1), (2, 1)])];
        let out = eliminate(&known, &eqs);
        assert_eq!(out[0].support().collect::<Vec<_>>(), ids(&[2]));

        // Empty known leaves eqs unchanged.
        let out = eliminate(&[], &eqs);
        assert_eq!(out[0], eqs[0]);

        // known spanning eqs reduces them to zero.
        let out = eliminate(&eqs, &eqs);
        assert!(out[0].is_zero());
    }

    #[test]
    fn eliminate_is_idempotent() {
        let known = vec![e(&[(0, 3), (2, 5)]), e(&[(1, 7), (2, 11)])];
        let eqs = vec![e(&[(0, 1), (1, 1), (2, 1), (3, 9)]), e(&[(2, 4), (3, 2)])];
        let once = eliminate(&known, &eqs);
        let twice = eliminate(&known, &once);
        assert_eq!(once, twice);
    }

    #[test]
    fn decodable_examples() {
        // Identity rows on targets.
        let eqs = vec![e(&[(0, 1)]), e(&[(1, 1)])];
        let targets: BTreeSet<_> = ids(&[0, 1]).into_iter().collect();
        assert!(decodable(&eqs, &[], &targets));

        // One equation, two targets.
        let eqs = vec![e(&[(0, 1), (1, 4)])];
        assert!(!decodable(&eqs, &[], &targets));

        // Side information closes the gap.
        let known = vec![e(&[(1, 1)])];
        assert!(decodable(&eqs, &known, &targets));
    }

    #[test]
    fn decodable_random_square_system_matches_determinant() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a: Vec<Vec<Fp61>> = (0..3)
                .map(|_| (0..3).map(|_| Fp61::random(&mut rng)).collect())
                .collect();
            let eqs: Vec<LinearExpr<Fp61>> = a
                .iter()
                .map(|row| {
                    LinearExpr::from_terms(
                        row.iter()
                            .enumerate()
                            .map(|(j, &c)| (SymbolId(j as u32), c))
                            .collect(),
                    )
                })
                .collect();
            // 3x3 determinant by cofactor expansion.
            let det = {
                let m = |i: usize, j: usize| a[i][j];
                let minor = |r: usize, c: usize| {
                    let rs: Vec<usize> = (0..3).filter(|&x| x != r).collect();
                    let cs: Vec<usize> = (0..3).filter(|&x| x != c).collect();
                    m(rs[0], cs[0])
                        .mul(m(rs[1], cs[1]))
                        .sub(m(rs[0], cs[1]).mul(m(rs[1], cs[0])))
                };
                m(0, 0)
                    .mul(minor(0, 0))
                    .sub(m(0, 1).mul(minor(0, 1)))
                    .add(m(0, 2).mul(minor(0, 2)))
            };
            let targets: BTreeSet<_> = ids(&[0, 1, 2]).into_iter().collect();
            assert_eq!(decodable(&eqs, &[], &targets), !det.is_zero());
        }
    }

    #[test]
    fn decodable_is_monotone_in_equations() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let targets: BTreeSet<_> = ids(&[0, 1, 2, 3]).into_iter().collect();
        let mut eqs: Vec<LinearExpr<Fp61>> = Vec::new();
        let mut was_true = false;
        for _ in 0..8 {
            eqs.push(LinearExpr::from_terms(
                (0..4)
                    .map(|j| (SymbolId(j), Fp61::random(&mut rng)))
                    .collect(),
            ));
            let now = decodable(&eqs, &[], &targets);
            assert!(!was_true || now, "adding equations flipped true -> false");
            was_true = now;
        }
        assert!(was_true);
    }

    #[test]
    fn random_coeffs_deterministic_and_nonzero() {
        let mut a = ChaCha12Rng::seed_from_u64(42);
        let mut b = ChaCha12Rng::seed_from_u64(42);
        let xs: Vec<Fp61> = random_coeffs(5, &mut a);
        let ys: Vec<Fp61> = random_coeffs(5, &mut b);
        assert_eq!(xs, ys);
        assert_eq!(xs.len(), 5);
        assert!(xs.iter().all(|x| !x.is_zero()));
    }

    #[test]
    fn prime_and_float_agree_on_small_integer_systems() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = 4;
            let entries: Vec<Vec<u64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(0..50)).collect())
                .collect();
            let prime_eqs: Vec<LinearExpr<Fp61>> = entries
                .iter()
                .map(|row| {
                    LinearExpr::from_terms(
                        row.iter()
                            .enumerate()
                            .map(|(j, &c)| (SymbolId(j as u32), Fp61::new(c)))
                            .collect(),
                    )
                })
                .collect();
            let float_eqs: Vec<LinearExpr<Cf64>> = entries
                .iter()
                .map(|row| {
                    LinearExpr::from_terms(
                        row.iter()
                            .enumerate()
                            .map(|(j, &c)| (SymbolId(j as u32), Cf64::from_u64(c)))
                            .collect(),
                    )
                })
                .collect();
            let targets: BTreeSet<_> = (0..n).map(|j| SymbolId(j as u32)).collect();
            assert_eq!(
                decodable(&prime_eqs, &[], &targets),
                decodable(&float_eqs, &[], &targets)
            );
        }
    }

    #[test]
    fn mersenne_boundary_coefficients() {
        let big = e(&[(0, MERSENNE_P - 1), (1, MERSENNE_P - 2)]);
        let sum = big.add_scaled(&e(&[(0, 1), (1, 2)]), Fp61::new(1));
        assert!(sum.is_zero());
    }
}
