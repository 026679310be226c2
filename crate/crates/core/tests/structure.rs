use std::collections::{BTreeSet, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sommerville::metrics::{
    cell_diameter, diameter_candidate, enumerate_w, enumerate_w_hat, objective, theta,
};
use sommerville::optimize::{kkt_check, maximize};
use sommerville::params::oeis_denominators;
use sommerville::validation::{
    check_coloring, check_face_to_face, edge_census, kuhn_partition, KuhnSimplex,
};
use sommerville::{build, optimal_params, ParamVector, PermutationVector, Window};

fn identity_mesh(d: usize, ranges: Vec<(i64, i64)>) -> sommerville::Mesh {
    build(d, &PermutationVector::identity(d).unwrap(), &Window::new(ranges).unwrap()).unwrap()
}

#[test]
fn small_4d_window() {
    let mesh = identity_mesh(4, vec![(0, 1), (0, 2), (0, 12), (0, 20)]);
    assert_eq!(mesh.num_cells(), 480);
    let r = check_face_to_face(&mesh);
    assert!(r.passed, "{r:?}");
    assert!(check_coloring(&mesh).passed);
}

#[test]
fn optimal_params_are_nested() {
    for d in 2..8 {
        let a = optimal_params(d).unwrap();
        let b = optimal_params(d + 1).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    let seq = oeis_denominators(40).unwrap();
    for (j, a) in seq.iter().enumerate().skip(2) {
        assert_eq!(*a, 3 * (j as u64) * (j as u64));
    }
}

#[test]
fn cells_stack_consecutive_heights() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 2..=4 {
        let perms: Vec<Vec<usize>> = (2..=d)
            .map(|i| {
                let mut p: Vec<usize> = (0..i).collect();
                for k in (1..i).rev() {
                    p.swap(k, rng.random_range(0..=k));
                }
                p
            })
            .collect();
        let pv = PermutationVector::new(d, perms).unwrap();
        let mesh = build(d, &pv, &Window::census_default(d).unwrap()).unwrap();
        for cell in mesh.cells() {
            let mut last: Vec<i64> = cell.vertex_ids.iter().map(|&v| mesh.coords(v)[d - 1]).collect();
            last.sort_unstable();
            assert!(last.windows(2).all(|w| w[1] == w[0] + 1), "{last:?}");
        }
        let c = check_coloring(&mesh);
        assert!(c.passed && c.residue_law);
    }
}

#[test]
fn swapped_recoloring_in_2d_is_a_translate() {
    let swap = PermutationVector::new(2, vec![vec![1, 0]]).unwrap();
    let small = build(2, &swap, &Window::new(vec![(0, 4), (0, 8)]).unwrap()).unwrap();
    let big = identity_mesh(2, vec![(-2, 8), (-4, 12)]);
    let key = |m: &sommerville::Mesh, ids: &[u32], shift: i64| {
        let mut pts: Vec<Vec<i64>> = ids
            .iter()
            .map(|&v| {
                let z = m.coords(v);
                vec![z[0] + shift, z[1]]
            })
            .collect();
        pts.sort();
        pts
    };
    let cells: HashSet<Vec<Vec<i64>>> = big.cells().map(|c| key(&big, c.vertex_ids, 0)).collect();
    // colors of the swapped mesh match the identity colors one step over, up to a fixed relabeling
    let mut relabel = [None; 3];
    let color_at: std::collections::HashMap<Vec<i64>, u8> =
        big.vertices().map(|v| (v.z.to_vec(), v.color)).collect();
    for cell in small.cells() {
        assert!(cells.contains(&key(&small, cell.vertex_ids, 1)));
        for &v in cell.vertex_ids {
            let z = small.coords(v);
            let c = color_at[&vec![z[0] + 1, z[1]]];
            let slot = &mut relabel[small.color(v) as usize];
            assert_eq!(*slot.get_or_insert(c), c);
        }
    }
}

#[test]
fn w_sets() {
    for d in 2..=8 {
        let w = enumerate_w(d).unwrap();
        let hat = enumerate_w_hat(d).unwrap();
        assert_eq!(w.len(), d);
        assert!(w.iter().all(|x| hat.contains(x)));
        assert!(hat.iter().all(|h| w.iter().any(|x| h.dominated_by(x))));
    }
    assert_eq!(enumerate_w_hat(2).unwrap().len(), 2);
    assert_eq!(enumerate_w_hat(3).unwrap().len(), 5);
}

#[test]
fn census_stays_inside_candidates() {
    for d in 2..=6 {
        let window = if d <= 5 {
            Window::census_default(d).unwrap()
        } else {
            Window::new(vec![(0, 2), (0, 6), (0, 8), (0, 10), (0, 12), (0, 14)]).unwrap()
        };
        let mesh = build(d, &PermutationVector::identity(d).unwrap(), &window).unwrap();
        let census = edge_census(&mesh);
        let hat: BTreeSet<_> = enumerate_w_hat(d).unwrap().into_iter().collect();
        assert!(census.is_subset(&hat), "d={d}: {:?}", census.difference(&hat).collect::<Vec<_>>());
    }
}

#[test]
fn diameters_come_from_realized_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 2..=4 {
        let mesh = build(d, &PermutationVector::identity(d).unwrap(), &Window::census_default(d).unwrap()).unwrap();
        let census = edge_census(&mesh);
        let mut params = vec![optimal_params(d).unwrap()];
        params.extend((0..5).map(|_| ParamVector::new((0..d).map(|_| rng.random_range(0.1..2.0)).collect()).unwrap()));
        for p in &params {
            let from_cells = mesh.cells().map(|c| cell_diameter(&mesh, &c, p).unwrap()).fold(0.0, f64::max);
            let from_classes = census.iter().map(|w| diameter_candidate(p, w).unwrap()).fold(0.0, f64::max);
            assert!((from_cells - from_classes).abs() <= 1e-12 * from_classes, "d={d}");
        }
        let p = optimal_params(d).unwrap();
        let worst = mesh.cells().map(|c| theta(&mesh, &c, &p).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(worst >= objective(&p).unwrap() * (1.0 - 1e-12));
    }
}

/// Barycentric coordinates by a dense solve, independent of the chain test.
fn barycentric(s: &KuhnSimplex, x: &[f64]) -> Vec<f64> {
    let d = s.dim();
    let v0 = &s.vertices[0];
    let m = DMatrix::from_fn(d, d, |r, c| (s.vertices[c + 1][r] - v0[r]) as f64);
    let rhs = DVector::from_fn(d, |r, _| x[r] - v0[r] as f64);
    let lam = m.lu().solve(&rhs).expect("nonsingular");
    let mut out = vec![1.0 - lam.sum()];
    out.extend(lam.iter());
    out
}

#[test]
fn kuhn_simplices_cover_the_cube_once() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=5 {
        let parts = kuhn_partition(d).unwrap();
        for _ in 0..10_000 / d {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let by_bary = parts.iter().filter(|s| barycentric(s, &x).iter().all(|&l| l > 0.0)).count();
            let by_chain = parts.iter().filter(|s| s.contains_strict(&x)).count();
            assert_eq!(by_bary, 1, "d={d} x={x:?}");
            assert_eq!(by_chain, 1);
        }
    }
}

#[test]
fn maximizer_never_beats_the_optimum() {
    for d in 2..=6 {
        let r = maximize(d, 6, 1e-9).unwrap();
        let best = objective(&optimal_params(d).unwrap()).unwrap();
        assert!(r.f_value <= best + 1e-9, "d={d}");
    }
}

#[test]
fn analytic_gradient_matches_differences() {
    for d in 2..=6 {
        let r = kkt_check(&optimal_params(d).unwrap()).unwrap();
        assert!(r.gradient_fd_mismatch <= 1e-5, "d={d}: {}", r.gradient_fd_mismatch);
    }
}
