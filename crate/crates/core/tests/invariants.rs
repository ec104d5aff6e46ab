//! Property tests for the exact engine and the symbol algebra.

use proptest::prelude::*;
use retroalign_core::combin::{binomial, harmonic_sum};
use retroalign_core::dof;
use retroalign_core::expr::{decodable, eliminate, LinearExpr, SymbolId};
use retroalign_core::field::Fp61;
use retroalign_core::rat;
use std::collections::BTreeSet;

fn expr(terms: Vec<(u32, u64)>) -> LinearExpr<Fp61> {
    LinearExpr::from_terms(
        terms
            .into_iter()
            .map(|(i, c)| (SymbolId(i), Fp61::new(c)))
            .collect(),
    )
}

fn arb_expr(vars: u32) -> impl Strategy<Value = LinearExpr<Fp61>> {
    prop::collection::vec((0..vars, 0u64..1_000_000), 0..6).prop_map(expr)
}

proptest! {
    #[test]
    fn pascal_identity(n in 1u64..40, k in 1u64..40) {
        prop_assume!(k <= n);
        prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
    }

    #[test]
    fn harmonic_sums_split(a in 1u64..50, b in 1u64..50, c in 1u64..50) {
        let (lo, mid, hi) = {
            let mut v = [a, b, c];
            v.sort_unstable();
            (v[0], v[1], v[2])
        };
        prop_assert_eq!(
            harmonic_sum(lo, hi),
            harmonic_sum(lo, mid) + harmonic_sum(mid + 1, hi)
        );
    }

    #[test]
    fn dof_values_live_in_the_unit_band(k in 3u32..40) {
        // 1 <= DoF < 2 for every model at finite K.
        let two = rat(2, 1);
        let one = rat(1, 1);
        for d in [
            dof::dof_icfd_closed(k).unwrap(),
            dof::dof_icof(k).unwrap(),
            dof::dof_icsf(k).unwrap(),
            dof::dof_xfd(k, k).unwrap(),
            dof::dof_xof(k).unwrap(),
            dof::dof_xsf(k).unwrap(),
        ] {
            prop_assert!(d >= one && d < two);
        }
    }

    #[test]
    fn dof_strictly_increasing_in_k(k in 3u32..30) {
        prop_assert!(dof::dof_icfd_closed(k + 1).unwrap() > dof::dof_icfd_closed(k).unwrap());
        prop_assert!(dof::dof_icof(k + 1).unwrap() > dof::dof_icof(k).unwrap());
        prop_assert!(dof::dof_icsf(k + 1).unwrap() > dof::dof_icsf(k).unwrap());
        prop_assert!(dof::dof_xof(k + 1).unwrap() > dof::dof_xof(k).unwrap());
        prop_assert!(dof::dof_xsf(k + 1).unwrap() > dof::dof_xsf(k).unwrap());
    }

    #[test]
    fn eliminate_is_idempotent_on_spans(
        known in prop::collection::vec(arb_expr(8), 0..5),
        eqs in prop::collection::vec(arb_expr(8), 0..5),
    ) {
        let once = eliminate(&known, &eqs);
        let twice = eliminate(&known, &once);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn eliminated_expressions_have_no_component_in_known(
        known in prop::collection::vec(arb_expr(6), 1..4),
        eqs in prop::collection::vec(arb_expr(6), 1..4),
    ) {
        // Reducing any output against the known span changes nothing.
        let reduced = eliminate(&known, &eqs);
        let again = eliminate(&known, &reduced);
        prop_assert_eq!(reduced, again);
    }

    #[test]
    fn decodable_is_monotone(
        eqs in prop::collection::vec(arb_expr(6), 1..8),
        extra in arb_expr(6),
        targets in prop::collection::btree_set(0u32..6, 1..4),
    ) {
        let targets: BTreeSet<SymbolId> = targets.into_iter().map(SymbolId).collect();
        let before = decodable(&eqs, &[], &targets);
        let mut more = eqs.clone();
        more.push(extra);
        let after = decodable(&more, &[], &targets);
        prop_assert!(!before || after, "adding an equation flipped true -> false");
    }
}
