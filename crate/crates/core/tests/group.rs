use hyptutte::fuchsian::{SurfaceGroup, Word};
use hyptutte::hyp2::{self, dist, HPoint, Isometry};
use proptest::prelude::*;

fn word(genus: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..4 * genus, 0..max_len).prop_map(|letters| {
        letters
            .into_iter()
            .fold(Word::identity(), |w, s| w.concat(&Word::generator(s)))
    })
}

/// Product of the letter Frobenius norms, which bounds every partial product.
fn growth(g: &SurfaceGroup, w: &Word) -> f64 {
    let top = g.generators().iter().map(|m| m.matrix().norm()).fold(1.0, f64::max);
    (w.len() as f64).max(1.0) * top.powi(w.len() as i32)
}

proptest! {
    #[test]
    fn word_text_roundtrip(w in word(3, 12)) {
        let text = w.to_string();
        prop_assert_eq!(text.parse::<Word>().unwrap(), w);
    }

    #[test]
    fn word_times_inverse_is_identity(w in word(2, 7)) {
        let g = SurfaceGroup::regular(2).unwrap();
        prop_assert!(w.concat(&w.inverse()).is_empty());
        let m = g.evaluate(&w).unwrap().compose(&g.evaluate(&w.inverse()).unwrap());
        prop_assert!(m.max_abs_diff(&Isometry::identity()) < 1e-15 * growth(&g, &w).powi(2));
    }

    #[test]
    fn evaluation_is_a_homomorphism(u in word(2, 5), v in word(2, 5)) {
        let g = SurfaceGroup::regular(2).unwrap();
        let lhs = g.evaluate(&u.concat(&v)).unwrap();
        let rhs = g.evaluate(&u).unwrap().compose(&g.evaluate(&v).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-15 * (growth(&g, &u) * growth(&g, &v)).powi(2));
    }

    #[test]
    fn canonical_keeps_the_element(w in word(2, 8)) {
        let g = SurfaceGroup::regular(2).unwrap();
        let e = g.element(w.clone()).unwrap();
        let c = g.canonical(&e).unwrap();
        let scale = e.iso.matrix().amax();
        prop_assert!(c.iso.max_abs_diff(&e.iso) < 1e-12 * scale * scale);
        prop_assert!(c.word.len() <= w.len());
        prop_assert_eq!(c.iso, g.evaluate(&c.word).unwrap());
    }

    #[test]
    fn reduce_descends_and_is_gauge_consistent(r in 0.0..6.0f64, t in 0.0..6.3f64, s in 0..8usize) {
        let g = SurfaceGroup::regular(2).unwrap();
        let p = HPoint::polar(r, t);
        let (q, h) = g.reduce(&p);
        prop_assert!(dist(&q, &g.base()) <= dist(&p, &g.base()) + 1e-12);
        prop_assert!(dist(&h.iso.apply(&p), &q) < 1e-14 * h.iso.matrix().amax().powi(2).max(1e5));
        for gen in g.generators() {
            prop_assert!(dist(&gen.apply(&q), &g.base()) >= dist(&q, &g.base()) - 1e-12);
        }
        let moved = g.generators()[s].apply(&p);
        let (q2, _) = g.reduce(&moved);
        prop_assert!(dist(&q, &q2) < 1e-9);
    }
}

#[test]
fn relator_word_is_identity() {
    for genus in [2, 3] {
        let g = SurfaceGroup::regular(genus).unwrap();
        let text: String = (1..=genus).map(|j| format!("a{j}b{j}A{j}B{j}")).collect();
        let w: Word = text.parse().unwrap();
        assert_eq!(w.len(), 4 * genus);
        assert!(g.evaluate(&w).unwrap().max_abs_diff(&Isometry::identity()) < 1e-9);
        assert!(g.relator_residual() < 1e-9);
    }
}

#[test]
fn polygon_and_pairings() {
    for genus in [2, 3] {
        let g = SurfaceGroup::regular(genus).unwrap();
        assert!(g.side_pairing_check().iter().all(|&r| r < 1e-9));
        let total: f64 = g.polygon_angles().iter().sum();
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        let expected = 2.0 * std::f64::consts::PI * (2.0 * genus as f64 - 2.0);
        assert!((g.polygon_area() - expected).abs() < 1e-9);
        assert!(g.generators().iter().all(|m| m.is_valid(1e-10)));
    }
}

#[test]
fn unknown_generator_is_rejected() {
    let g = SurfaceGroup::regular(2).unwrap();
    assert!(g.evaluate(&"a3".parse().unwrap()).is_err());
    assert!("x1".parse::<Word>().is_err());
    assert!("a0".parse::<Word>().is_err());
    assert!(hyp2::dist(&g.base(), &HPoint::ORIGIN) == 0.0);
}
