use bracelab::brace::verify_power_expansion;
use bracelab::prelie::{make_section, SectionPolicy};
use bracelab::workbench::BraceDocument;
use bracelab::{Brace, CheckMode, GroupElement};
use proptest::prelude::*;

/// (p, α, s) with s ≥ 1 and a small carrier.
fn ring_params() -> impl Strategy<Value = (u64, u32, u32)> {
    prop_oneof![Just(3u64), Just(5), Just(7)]
        .prop_flat_map(|p| (Just(p), 1u32..=if p == 7 { 3 } else { 4 }))
        .prop_flat_map(|(p, a)| (Just(p), Just(a), 1u32..=a + 1))
}

fn small_ring_params() -> impl Strategy<Value = (u64, u32, u32)> {
    (prop_oneof![Just(3u64), Just(5), Just(7)], 1u32..=2).prop_flat_map(|(p, a)| (Just(p), Just(a), 1u32..=a + 1))
}

fn elem(b: &Brace, i: u64) -> GroupElement {
    b.group().element_at_unchecked(i % b.order())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_brace_axioms((p, a, s) in ring_params(), x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
        let b = Brace::ring(p, a, s).unwrap();
        let g = b.group();
        let (x, y, z) = (elem(&b, x), elem(&b, y), elem(&b, z));
        // a∘(b+c) + a = a∘b + a∘c
        prop_assert_eq!(g.add(&b.circle(&x, &g.add(&y, &z)), &x), g.add(&b.circle(&x, &y), &b.circle(&x, &z)));
        prop_assert_eq!(b.circle(&b.circle(&x, &y), &z), b.circle(&x, &b.circle(&y, &z)));
        prop_assert_eq!(b.lambda(&b.circle(&x, &y), &z), b.lambda(&x, &b.lambda(&y, &z)));
        let inv = b.circle_inv(&x).unwrap();
        prop_assert!(b.circle(&x, &inv).is_zero());
    }

    #[test]
    fn circle_powers_add((p, a, s) in ring_params(), x in any::<u64>(), m1 in 0u64..40, m2 in 0u64..40) {
        let b = Brace::ring(p, a, s).unwrap();
        let x = elem(&b, x);
        prop_assert_eq!(b.circle_pow(&x, m1 + m2), b.circle(&b.circle_pow(&x, m1), &b.circle_pow(&x, m2)));
    }

    #[test]
    fn power_expansion_holds((p, a, s) in ring_params(), x in any::<u64>(), y in any::<u64>(), j in 1u64..30) {
        let b = Brace::ring(p, a, s).unwrap();
        let r = verify_power_expansion(&b, &elem(&b, x), &elem(&b, y), j).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn products_multiply_componentwise(s1 in 1u32..3, s2 in 1u32..3, x in any::<u64>(), y in any::<u64>()) {
        let b1 = Brace::ring(5, 2, s1).unwrap();
        let b2 = Brace::ring(5, 1, s2).unwrap();
        let b = Brace::product(&b1, &b2).unwrap();
        let (x, y) = (elem(&b, x), elem(&b, y));
        let v = b.star(&x, &y);
        let u1 = b1.star(&GroupElement::from_slice(&x.coords()[..1]), &GroupElement::from_slice(&y.coords()[..1]));
        let u2 = b2.star(&GroupElement::from_slice(&x.coords()[1..]), &GroupElement::from_slice(&y.coords()[1..]));
        prop_assert_eq!(v.coords(), &[u1.coords()[0], u2.coords()[0]][..]);
    }

    #[test]
    fn sections_invert_p_power(seed in any::<u64>(), x in any::<u64>(), y in any::<u64>(), k in 1u32..3) {
        let b = Brace::ring(5, 4, 1).unwrap();
        let g = b.group();
        let s = make_section(&b, k, SectionPolicy::Random { seed }, &CheckMode::default()).unwrap();
        let (x, y) = (g.scale_p(&elem(&b, x), k), g.scale_p(&elem(&b, y), k));
        let sx = s.apply(&x).unwrap();
        prop_assert_eq!(g.scale_p(&sx, k), x.clone());
        // additive up to ann(p^k)
        let d = g.sub(&s.apply(&g.add(&x, &y)).unwrap(), &g.add(&sx, &s.apply(&y).unwrap()));
        prop_assert!(g.in_annihilator(&d, k));
    }
}

proptest! {
    // documents are revalidated on load, so keep these small
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn documents_round_trip((p, a, s) in small_ring_params(), x in any::<u64>(), y in any::<u64>()) {
        let b = Brace::ring(p, a, s).unwrap();
        for src in [b.clone(), b.tabulated().unwrap()] {
            let text = BraceDocument::from_brace(&src).unwrap().to_json();
            let back = BraceDocument::from_json(&text).unwrap().to_brace().unwrap();
            prop_assert_eq!(BraceDocument::from_json(&text).unwrap().to_json(), text);
            let (x, y) = (elem(&b, x), elem(&b, y));
            prop_assert_eq!(back.star(&x, &y), b.star(&x, &y));
        }
    }
}
