use hyptutte::hyp2::{self, dist, HPoint};
use hyptutte_cli::render::{geodesic_arc, to_disk, Segment};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = HPoint> {
    (0.0..4.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| HPoint::polar(r, t))
}

proptest! {
    #[test]
    fn arc_is_the_projected_geodesic(p in point(), q in point()) {
        prop_assume!(dist(&p, &q) > 1e-3);
        let (a, b) = (to_disk(&p), to_disk(&q));
        let mid = to_disk(&hyp2::exp(&hyp2::log(&p, &q).scale(0.5)));
        match geodesic_arc(a, b) {
            Segment::Arc { center, radius, ccw } => {
                let on = |x: (f64, f64)| ((x.0 - center.0).hypot(x.1 - center.1) - radius).abs();
                let scale = radius.max(1.0);
                prop_assert!(on(a) < 1e-9 * scale && on(b) < 1e-9 * scale && on(mid) < 1e-9 * scale);
                // orthogonal to the unit circle
                prop_assert!((center.0 * center.0 + center.1 * center.1 - radius * radius - 1.0).abs() < 1e-8 * scale * scale);
                // turning from a in the stated direction reaches the midpoint first
                let turn = (a.0 - center.0) * (mid.1 - center.1) - (a.1 - center.1) * (mid.0 - center.0);
                prop_assert_eq!(ccw, turn > 0.0);
            }
            Segment::Line => {
                let cross = a.0 * b.1 - a.1 * b.0;
                prop_assert!(cross.abs() < 1e-9);
            }
        }
    }
}

#[test]
fn diameters_are_lines() {
    let p = HPoint::polar(1.0, 0.4);
    let q = HPoint::polar(2.0, 0.4 + std::f64::consts::PI);
    assert_eq!(geodesic_arc(to_disk(&p), to_disk(&q)), Segment::Line);
    let (x, y) = to_disk(&HPoint::polar(1.0, 0.0));
    assert!((x - (0.5f64).tanh()).abs() < 1e-15 && y == 0.0);
}
