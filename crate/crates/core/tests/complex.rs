use hyptutte::fuchsian::SurfaceGroup;
use hyptutte::simplicial::{builtin_mesh, subdivide, Complex, Issue};
use proptest::prelude::*;

fn builtin() -> Complex {
    builtin_mesh(&SurfaceGroup::regular(2).unwrap())
        .unwrap()
        .complex()
        .clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deleting_an_edge_is_reported(k in 0..852usize) {
        let c = builtin();
        let mut edges = c.edges().to_vec();
        edges.remove(k % edges.len());
        let report = Complex::new(c.vertex_count(), edges, c.faces().to_vec()).validate();
        prop_assert!(!report.is_valid());
        let found = report.issues.iter().any(|i| matches!(i, Issue::MissingEdge { .. }));
        prop_assert!(found);
    }

    #[test]
    fn flipping_a_face_is_reported(k in 0..288usize) {
        let c = builtin();
        let mut faces = c.faces().to_vec();
        let n = faces.len();
        faces[k % n].swap(1, 2);
        let report = Complex::new(c.vertex_count(), c.edges().to_vec(), faces).validate();
        prop_assert!(!report.is_valid());
        let found = report.issues.iter().any(|i| matches!(i, Issue::InconsistentOrientation { .. }));
        prop_assert!(found);
    }

    #[test]
    fn deleting_a_face_is_reported(k in 0..288usize) {
        let c = builtin();
        let mut faces = c.faces().to_vec();
        faces.remove(k % faces.len());
        let report = Complex::new(c.vertex_count(), c.edges().to_vec(), faces).validate();
        prop_assert!(!report.is_valid());
    }
}

#[test]
fn builtin_counts() {
    let c = builtin();
    assert!(c.validate().is_valid());
    assert_eq!(c.euler_char(), -2);
    assert_eq!(c.faces().len(), 288);
    assert_eq!(c.dart_count(), 2 * c.edges().len());
    assert!((0..c.dart_count()).all(|d| c.reverse(c.reverse(d)) == d && c.dart_face(d).is_some()));
}

#[test]
fn subdivision_preserves_topology_and_labels() {
    let m = builtin_mesh(&SurfaceGroup::regular(2).unwrap()).unwrap();
    let s = subdivide(&m).unwrap();
    let ss = subdivide(&s).unwrap();
    for (prev, next) in [(&m, &s), (&s, &ss)] {
        assert_eq!(next.complex().faces().len(), 4 * prev.complex().faces().len());
        assert_eq!(next.complex().euler_char(), -2);
        assert!(next.complex().validate().is_valid());
        assert!(next.cocycle_residuals().iter().all(|&r| r < 1e-9));
        assert!(next.involution_residuals().iter().all(|&r| r < 1e-10));
        assert_eq!(&next.lifts()[..prev.lifts().len()], prev.lifts());
    }
}
