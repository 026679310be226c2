//! Metric quantities: embeddings, exact and floating volumes, diameters, the
//! regularity ratio `theta = vol / diam^d`, the edge-class sets and the
//! shape objective.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::tessellation::{LatticeVertex, Mesh, SimplexCell};

/// Per-axis absolute lattice difference of an edge. Its squared length under
/// parameters `p` is `sum w_i^2 p_i^2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeClass(pub Vec<u32>);

impl EdgeClass {
    pub fn new(w: Vec<u32>) -> Result<Self> {
        if w.iter().all(|&x| x == 0) {
            return Err(Error::InvalidBase("an edge class cannot be the zero vector".into()));
        }
        Ok(Self(w))
    }

    /// Componentwise absolute difference of two lattice points.
    pub fn between(a: &[i64], b: &[i64]) -> Self {
        Self(a.iter().zip(b).map(|(x, y)| x.abs_diff(*y) as u32).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// 1-based position of the first nonzero entry.
    pub fn label(&self) -> usize {
        self.0.iter().position(|&x| x != 0).map_or(0, |i| i + 1)
    }

    /// `w <= other` in every component.
    pub fn dominated_by(&self, other: &EdgeClass) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

/// Worst-cell regularity of a mesh and its comparison against the cube split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub worst_theta: f64,
    pub worst_cell_index: Vec<i64>,
    pub max_diameter: f64,
    pub volume: f64,
    pub kuhn_theta: f64,
    pub ratio_vs_kuhn: f64,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Embedded position `x_i = z_i * p_i`.
pub fn embed(v: &LatticeVertex<'_>, p: &ParamVector) -> Result<Vec<f64>> {
    embed_point(v.z, p)
}

pub fn embed_point(z: &[i64], p: &ParamVector) -> Result<Vec<f64>> {
    check_dim(p.dim(), z.len())?;
    Ok(z.iter().zip(p.as_slice()).map(|(&z, &p)| z as f64 * p).collect())
}

/// Exact determinant of an integer matrix by fraction-free elimination.
///
/// Every intermediate entry is a minor of the input, so the divisions are
/// exact. Overflow of `i64` is reported instead of wrapping.
pub fn bareiss_determinant(mut m: Vec<Vec<i64>>) -> Result<i64> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
        });
    }
    if n == 0 {
        return Ok(1);
    }
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = (m[i][j] as i128) * (m[k][k] as i128);
                let b = (m[i][k] as i128) * (m[k][j] as i128);
                let v = (a - b) / prev as i128;
                m[i][j] = i64::try_from(v).map_err(|_| Error::Overflow)?;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    m[n - 1][n - 1].checked_mul(sign).ok_or(Error::Overflow)
}

/// Rows `B_{z+i} - B_z`, `i = 1..=d`, in lattice coordinates.
pub fn lattice_edge_matrix(mesh: &Mesh, cell: &SimplexCell<'_>) -> Vec<Vec<i64>> {
    let origin = mesh.coords(cell.vertex_ids[0]);
    cell.vertex_ids[1..]
        .iter()
        .map(|&v| {
            mesh.coords(v)
                .iter()
                .zip(origin)
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect()
}

/// Integer volume determinant of a cell; `+-d!` for every cell of the tiling.
pub fn lattice_volume_det(mesh: &Mesh, cell: &SimplexCell<'_>) -> Result<i64> {
    bareiss_determinant(lattice_edge_matrix(mesh, cell))
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `|det| / d! * prod p_i`.
pub fn cell_volume(mesh: &Mesh, cell: &SimplexCell<'_>, p: &ParamVector) -> Result<f64> {
    check_dim(mesh.dim(), p.dim())?;
    let det = lattice_volume_det(mesh, cell)?;
    if det == 0 {
        return Err(Error::Degenerate);
    }
    Ok(det.unsigned_abs() as f64 / factorial(mesh.dim()) as f64 * p.product())
}

/// Largest vertex-to-vertex distance of the embedded cell.
pub fn cell_diameter(mesh: &Mesh, cell: &SimplexCell<'_>, p: &ParamVector) -> Result<f64> {
    check_dim(mesh.dim(), p.dim())?;
    let ids = cell.vertex_ids;
    let mut best = 0.0f64;
    for (a, &va) in ids.iter().enumerate() {
        for &vb in &ids[a + 1..] {
            let w = EdgeClass::between(mesh.coords(va), mesh.coords(vb));
            best = best.max(squared_length(p, &w));
        }
    }
    Ok(best.sqrt())
}

/// `vol / diam^d`; defined for `d >= 2`.
pub fn theta(mesh: &Mesh, cell: &SimplexCell<'_>, p: &ParamVector) -> Result<f64> {
    if mesh.dim() < 2 {
        return Err(Error::InvalidDimension {
            got: mesh.dim(),
            reason: "the regularity ratio needs d >= 2",
        });
    }
    let vol = cell_volume(mesh, cell, p)?;
    let diam = cell_diameter(mesh, cell, p)?;
    Ok(vol / diam.powi(mesh.dim() as i32))
}

fn require_d2(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "edge class sets are defined for d >= 2",
        });
    }
    Ok(())
}

/// The `d` dominating classes `w_k`: `w_k = k`, zeros before, `w_j = j - 1` after.
pub fn enumerate_w(d: usize) -> Result<Vec<EdgeClass>> {
    require_d2(d)?;
    Ok((1..=d)
        .map(|k| {
            EdgeClass(
                (1..=d)
                    .map(|i| match i.cmp(&k) {
                        std::cmp::Ordering::Less => 0,
                        std::cmp::Ordering::Equal => k as u32,
                        std::cmp::Ordering::Greater => (i - 1) as u32,
                    })
                    .collect(),
            )
        })
        .collect())
}

/// All candidate classes: `w_k = k`, zeros before, `w_j in 1..=j-1` after.
///
/// Ordered by label `k`, then lexicographically within a label.
pub fn enumerate_w_hat(d: usize) -> Result<Vec<EdgeClass>> {
    require_d2(d)?;
    let mut out = Vec::new();
    for k in 1..=d {
        let mut prefix = vec![0u32; k - 1];
        prefix.push(k as u32);
        let mut partial = vec![prefix];
        for j in k + 1..=d {
            partial = partial
                .into_iter()
                .flat_map(|w| {
                    (1..j as u32).map(move |x| {
                        let mut w = w.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out.extend(partial.into_iter().map(EdgeClass));
    }
    Ok(out)
}

/// `|W_hat_d| = sum_k prod_{j=k+1}^{d} (j - 1)`.
pub fn w_hat_cardinality(d: usize) -> u128 {
    (1..=d)
        .map(|k| (k + 1..=d).map(|j| (j - 1) as u128).product::<u128>())
        .sum()
}

fn squared_length(p: &ParamVector, w: &EdgeClass) -> f64 {
    w.0.iter()
        .zip(p.as_slice())
        .map(|(&w, &p)| {
            let s = w as f64 * p;
            s * s
        })
        .sum()
}

/// Edge length `sqrt(sum w_i^2 p_i^2)` of class `w`.
pub fn diameter_candidate(p: &ParamVector, w: &EdgeClass) -> Result<f64> {
    check_dim(p.dim(), w.dim())?;
    Ok(squared_length(p, w).sqrt())
}

/// Candidate lengths `D_1, ..., D_d` of the dominating classes.
pub fn diameter_candidates(p: &ParamVector) -> Result<Vec<f64>> {
    enumerate_w(p.dim())?
        .iter()
        .map(|w| diameter_candidate(p, w))
        .collect()
}

/// `(max_k D_k, k)`. Values within a relative `1e-12` of the maximum count
/// as ties and the smallest such `k` is reported.
pub fn dominant_diameter(p: &ParamVector) -> Result<(f64, usize)> {
    let ds = diameter_candidates(p)?;
    let max = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = ds
        .iter()
        .position(|&v| v >= max * (1.0 - 1e-12))
        .expect("nonempty");
    Ok((max, k + 1))
}

/// Worst-case regularity `prod p_i / D(p)^d` over the dominating classes.
pub fn objective(p: &ParamVector) -> Result<f64> {
    let (dmax, _) = dominant_diameter(p)?;
    Ok(p.product() / dmax.powi(p.dim() as i32))
}

/// `min_w prod p_i / |w|_p^d` over an arbitrary set of classes.
pub fn objective_over(p: &ParamVector, classes: &[EdgeClass]) -> Result<f64> {
    let d = p.dim();
    let mut worst = f64::INFINITY;
    for w in classes {
        let len = diameter_candidate(p, w)?;
        worst = worst.min(p.product() / len.powi(d as i32));
    }
    Ok(worst)
}

/// Closed-form optimum value `(sqrt(3)/2) * d / (d^{d/2} d!)`.
pub fn optimal_objective_value(d: usize) -> f64 {
    let df = d as f64;
    3f64.sqrt() / 2.0 * df / (df.powf(df / 2.0) * factorial(d) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{optimal_params, PermutationVector};
    use crate::tessellation::{build, build_base_1d, Window};

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    fn two_triangles() -> Mesh {
        build(
            2,
            &PermutationVector::identity(2).unwrap(),
            &Window::new(vec![(0, 1), (0, 2)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn embedding() {
        let z = [0i64, 0, 0];
        let v = LatticeVertex { id: 0, z: &z, color: 0 };
        assert_eq!(embed(&v, &pv(&[0.3, 2.0, 5.0])).unwrap(), vec![0.0, 0.0, 0.0]);
        let z = [1i64, 2];
        let v = LatticeVertex { id: 0, z: &z, color: 0 };
        assert_eq!(embed(&v, &pv(&[1.0, 0.5])).unwrap(), vec![1.0, 1.0]);
        let x = embed_point(&[0, 3], &optimal_params(2).unwrap()).unwrap();
        assert!((x[1] - 1.7320508075688772).abs() < 1e-15);
        assert!(embed(&v, &pv(&[1.0])).is_err());
    }

    #[test]
    fn bareiss_small_cases() {
        assert_eq!(bareiss_determinant(vec![vec![1, 1], vec![0, 2]]).unwrap(), 2);
        assert_eq!(bareiss_determinant(vec![vec![0, 1], vec![1, 0]]).unwrap(), -1);
        assert_eq!(
            bareiss_determinant(vec![vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]]).unwrap(),
            // cofactor expansion: 2(3-2) - 0 + 1(1-3)
            0
        );
        assert_eq!(
            bareiss_determinant(vec![vec![1, 2], vec![2, 4]]).unwrap(),
            0
        );
        let big = i64::MAX / 2;
        assert_eq!(
            bareiss_determinant(vec![vec![big, 1], vec![-1, big]]),
            Err(Error::Overflow)
        );
    }

    #[test]
    fn lattice_volume() {
        let m = two_triangles();
        assert_eq!(lattice_volume_det(&m, &m.cell(0)).unwrap().abs(), 2);
        let m3 = build(
            3,
            &PermutationVector::identity(3).unwrap(),
            &Window::new(vec![(0, 1), (0, 3), (0, 6)]).unwrap(),
        )
        .unwrap();
        for c in m3.cells() {
            assert_eq!(lattice_volume_det(&m3, &c).unwrap().abs(), 6);
        }
        // synthetic degenerate cell: repeated vertex
        let bad = Mesh::from_parts(
            2,
            vec![0, 0, 1, 1],
            vec![0, 1],
            vec![0, 1, 1],
            vec![0, 0],
            Window::new(vec![(0, 1), (0, 1)]).unwrap(),
        )
        .unwrap();
        assert_eq!(lattice_volume_det(&bad, &bad.cell(0)).unwrap(), 0);
        assert_eq!(
            cell_volume(&bad, &bad.cell(0), &pv(&[1.0, 1.0])),
            Err(Error::Degenerate)
        );
    }

    #[test]
    fn volumes() {
        let m = two_triangles();
        assert_eq!(cell_volume(&m, &m.cell(0), &pv(&[1.0, 1.0])).unwrap(), 1.0);
        let m3 = build(
            3,
            &PermutationVector::identity(3).unwrap(),
            &Window::new(vec![(0, 1), (0, 1), (0, 1)]).unwrap(),
        )
        .unwrap();
        let v = cell_volume(&m3, &m3.cell(0), &pv(&[1.0, 0.5, 0.25])).unwrap();
        assert!((v - 0.125).abs() < 1e-15);

        // shoelace on the embedded triangle
        let p = optimal_params(2).unwrap();
        let pts: Vec<Vec<f64>> = m
            .cell(0)
            .vertex_ids
            .iter()
            .map(|&i| embed(&m.vertex(i), &p).unwrap())
            .collect();
        let shoelace = 0.5
            * ((pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1])
                - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]))
                .abs();
        let v = cell_volume(&m, &m.cell(0), &p).unwrap();
        assert!((v - shoelace).abs() < 1e-15);
        assert!((v - 0.5773502691896258).abs() < 1e-15);
    }

    #[test]
    fn diameters() {
        let m = two_triangles();
        for c in m.cells() {
            let d = cell_diameter(&m, &c, &pv(&[1.0, 0.5])).unwrap();
            assert!((d - 1.25f64.sqrt()).abs() < 1e-15);
            let d = cell_diameter(&m, &c, &optimal_params(2).unwrap()).unwrap();
            assert!((d - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        let seg = build_base_1d(0..1).unwrap();
        assert_eq!(cell_diameter(&seg, &seg.cell(0), &pv(&[1.0])).unwrap(), 1.0);
    }

    #[test]
    fn theta_values() {
        let m = two_triangles();
        for c in m.cells() {
            let t = theta(&m, &c, &optimal_params(2).unwrap()).unwrap();
            assert!((t - 3f64.sqrt() / 4.0).abs() < 1e-15);
            let t = theta(&m, &c, &pv(&[1.0, 1.0])).unwrap();
            assert!((t - 0.25).abs() < 1e-15);
        }
        let seg = build_base_1d(0..1).unwrap();
        assert!(theta(&seg, &seg.cell(0), &pv(&[1.0])).is_err());
    }

    #[test]
    fn w_sets() {
        let w3: Vec<Vec<u32>> = enumerate_w(3).unwrap().into_iter().map(|w| w.0).collect();
        assert_eq!(w3, vec![vec![1, 1, 2], vec![0, 2, 2], vec![0, 0, 3]]);
        let w2: Vec<Vec<u32>> = enumerate_w(2).unwrap().into_iter().map(|w| w.0).collect();
        assert_eq!(w2, vec![vec![1, 1], vec![0, 2]]);
        let w5 = enumerate_w(5).unwrap();
        assert_eq!(w5.len(), 5);
        assert_eq!(w5[0].0, vec![1, 1, 2, 3, 4]);
        for (k, w) in w5.iter().enumerate() {
            assert_eq!(w.label(), k + 1);
        }
        assert!(enumerate_w(1).is_err());

        let mut h3: Vec<Vec<u32>> = enumerate_w_hat(3).unwrap().into_iter().map(|w| w.0).collect();
        h3.sort();
        assert_eq!(
            h3,
            vec![vec![0, 0, 3], vec![0, 2, 1], vec![0, 2, 2], vec![1, 1, 1], vec![1, 1, 2]]
        );
        let mut h2: Vec<Vec<u32>> = enumerate_w_hat(2).unwrap().into_iter().map(|w| w.0).collect();
        h2.sort();
        assert_eq!(h2, vec![vec![0, 2], vec![1, 1]]);
        let h4 = enumerate_w_hat(4).unwrap();
        assert_eq!(h4.len(), 16);
        assert!(h4.contains(&EdgeClass(vec![1, 1, 2, 3])));

        for d in 2..=8 {
            let hat = enumerate_w_hat(d).unwrap();
            assert_eq!(hat.len() as u128, w_hat_cardinality(d));
            let w = enumerate_w(d).unwrap();
            assert_eq!(w.len(), d);
            assert!(w.iter().all(|x| hat.contains(x)));
            // every candidate is dominated by the dominating class of its label
            for h in &hat {
                assert!(h.dominated_by(&w[h.label() - 1]));
            }
        }
    }

    #[test]
    fn candidates() {
        let ds = diameter_candidates(&pv(&[1.0, 1.0, 1.0])).unwrap();
        assert!((ds[0] - 6f64.sqrt()).abs() < 1e-15);
        assert!((ds[1] - 8f64.sqrt()).abs() < 1e-15);
        assert!((ds[2] - 3.0).abs() < 1e-15);
        assert_eq!(dominant_diameter(&pv(&[1.0, 1.0, 1.0])).unwrap(), (3.0, 3));

        let ds = diameter_candidates(&optimal_params(2).unwrap()).unwrap();
        assert!((ds[0] - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((ds[1] - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(dominant_diameter(&optimal_params(2).unwrap()).unwrap().1, 1);

        let e1 = EdgeClass::new(vec![1, 0, 0]).unwrap();
        assert_eq!(diameter_candidate(&pv(&[0.7, 3.0, 9.0]), &e1).unwrap(), 0.7);
        assert!(EdgeClass::new(vec![0, 0]).is_err());
        assert_eq!(dominant_diameter(&pv(&[1.0, 10.0])).unwrap(), (20.0, 2));
        for d in 2..=10 {
            let (dm, k) = dominant_diameter(&optimal_params(d).unwrap()).unwrap();
            assert!((dm * dm - 2.0 * d as f64 / 3.0).abs() < 1e-12);
            assert_eq!(k, 1);
        }
    }

    #[test]
    fn objective_values() {
        let f = objective(&optimal_params(2).unwrap()).unwrap();
        assert!((f - 3f64.sqrt() / 4.0).abs() < 1e-15);
        for d in 2..=6 {
            let f = objective(&optimal_params(d).unwrap()).unwrap();
            let expect = optimal_objective_value(d);
            assert!(((f - expect) / expect).abs() < 1e-12, "d = {d}");
        }
    }
}
