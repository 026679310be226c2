use approx::assert_relative_eq;
use proptest::prelude::*;

use sommerville::io::{parse_mesh_file, write_mesh_file};
use sommerville::metrics::{enumerate_w, enumerate_w_hat, objective, objective_over};
use sommerville::validation::{check_face_to_face, permutations};
use sommerville::{build, ParamVector, PermutationVector, Window};

fn params(d: usize) -> impl Strategy<Value = ParamVector> {
    prop::collection::vec(0.01f64..10.0, d).prop_map(|v| ParamVector::new(v).unwrap())
}

fn perm_vector(d: usize) -> impl Strategy<Value = PermutationVector> {
    let levels: Vec<_> = (2..=d)
        .map(|i| {
            let all = permutations(i);
            (0..all.len()).prop_map(move |k| all[k].clone())
        })
        .collect();
    levels.prop_map(move |perms| PermutationVector::new(d, perms).unwrap())
}

fn window(d: usize) -> impl Strategy<Value = Window> {
    prop::collection::vec((-6i64..6, 1i64..7), d)
        .prop_map(|v| Window::new(v.into_iter().map(|(lo, len)| (lo, lo + len)).collect()).unwrap())
}

proptest! {
    #[test]
    fn objective_is_scale_free((p, kappa) in (2usize..=6).prop_flat_map(|d| (params(d), 1e-3f64..1e3))) {
        let a = objective(&p).unwrap();
        let b = objective(&p.scale(kappa).unwrap()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn dominating_classes_suffice(p in (2usize..=6).prop_flat_map(params)) {
        let d = p.dim();
        let a = objective_over(&p, &enumerate_w(d).unwrap()).unwrap();
        let b = objective_over(&p, &enumerate_w_hat(d).unwrap()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn random_meshes_are_conforming(
        (pv, w) in (2usize..=4).prop_flat_map(|d| (perm_vector(d), window(d)))
    ) {
        let mesh = build(pv.dim(), &pv, &w).unwrap();
        let r = check_face_to_face(&mesh);
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn mesh_files_round_trip(
        (pv, w, p) in (1usize..=4).prop_flat_map(|d| (perm_vector(d), window(d), params(d)))
    ) {
        let mesh = build(pv.dim(), &pv, &w).unwrap();
        let text = write_mesh_file(&mesh, &p, &pv).unwrap();
        let back = parse_mesh_file(&text).unwrap();
        prop_assert_eq!(&back.mesh, &mesh);
        prop_assert_eq!(&back.perms, &pv);
        for (a, b) in back.params.as_slice().iter().zip(p.as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
