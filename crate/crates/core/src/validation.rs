//! Structural checkers, the empirical edge-class census, the cube split into
//! `d!` path simplices and the regularity comparison against it.

use std::collections::{BTreeSet, HashSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    bareiss_determinant, cell_diameter, factorial, lattice_volume_det, theta, EdgeClass,
    RegularityReport,
};
use crate::params::{ParamVector, PermutationVector};
use crate::tessellation::{build, facet_crossing, facets, Mesh, Window};

/// Default cap on the number of cube simplices generated (`9! = 362880`).
pub const KUHN_CELL_BUDGET: usize = 362_880;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceToFaceReport {
    pub passed: bool,
    pub interior_facets: usize,
    pub boundary_facets: usize,
    pub max_multiplicity: usize,
    /// A facet shared by three or more cells, or an unmatched facet away from
    /// the window boundary.
    pub counterexample: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub passed: bool,
    /// Two vertices of one cell carrying the same color.
    pub counterexample_edge: Option<(u32, u32)>,
    /// A vertex whose color lies outside `0..=d`.
    pub out_of_range_vertex: Option<u32>,
    /// Whether `color == z_d mod (d+1)` holds for every vertex.
    pub residue_law: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivolumeReport {
    pub passed: bool,
    /// Every lattice determinant equals `+-d!` exactly.
    pub exact_determinants: bool,
    pub worst_relative_deviation: f64,
    pub worst_cell: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub face_to_face: FaceToFaceReport,
    pub coloring: ColoringReport,
    pub equivolume: EquivolumeReport,
    pub interior_facets: usize,
    pub boundary_facets: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.face_to_face.passed && self.coloring.passed && self.equivolume.passed
    }
}

/// Runs every structural check.
pub fn validate(mesh: &Mesh, p: &ParamVector, rel_tol: f64) -> Result<ValidationReport> {
    let face_to_face = check_face_to_face(mesh);
    let coloring = check_coloring(mesh);
    let equivolume = check_equivolume(mesh, p, rel_tol)?;
    Ok(ValidationReport {
        interior_facets: face_to_face.interior_facets,
        boundary_facets: face_to_face.boundary_facets,
        face_to_face,
        coloring,
        equivolume,
    })
}

/// Facet multiplicity census.
///
/// Passes iff every facet belongs to one or two cells and every unmatched
/// facet faces out of the window: the neighbor it would have in the full
/// tiling has a construction chain outside the window. For meshes without
/// the lifted structure the owning cell must at least sit at an extreme
/// construction index.
pub fn check_face_to_face(mesh: &Mesh) -> FaceToFaceReport {
    let d = mesh.dim();
    let n = mesh.num_cells();
    // flat buffer of sorted facets, `d` ids each, `d + 1` per cell
    let mut buf = Vec::with_capacity(n * (d + 1) * d);
    for cell in mesh.cells() {
        for f in facets(&cell) {
            buf.extend_from_slice(&f);
        }
    }
    let total = n * (d + 1);
    let key = |i: usize| &buf[i * d..(i + 1) * d];
    let mut order: Vec<u32> = (0..total as u32).collect();
    order.sort_unstable_by(|&a, &b| key(a as usize).cmp(key(b as usize)));

    let window = mesh.window();
    let mut report = FaceToFaceReport {
        passed: true,
        interior_facets: 0,
        boundary_facets: 0,
        max_multiplicity: 0,
        counterexample: None,
    };
    let fail = |report: &mut FaceToFaceReport, f: &[u32]| {
        report.passed = false;
        if report.counterexample.is_none() {
            report.counterexample = Some(f.to_vec());
        }
    };
    let mut start = 0;
    while start < total {
        let first = order[start] as usize;
        let mut end = start + 1;
        while end < total && key(order[end] as usize) == key(first) {
            end += 1;
        }
        let mult = end - start;
        report.max_multiplicity = report.max_multiplicity.max(mult);
        match mult {
            1 => {
                report.boundary_facets += 1;
                let cell = mesh.cell(first / (d + 1));
                let omitted = first % (d + 1);
                let on_boundary = match facet_crossing(mesh, &cell, omitted) {
                    Some((level, delta)) => {
                        let mut other = cell.index.to_vec();
                        other[level - 1] += delta;
                        !window.contains(&other)
                    }
                    None => cell
                        .index
                        .iter()
                        .zip(window.ranges())
                        .any(|(&z, &(lo, hi))| z == lo || z == hi - 1),
                };
                if !on_boundary {
                    fail(&mut report, key(first));
                }
            }
            2 => report.interior_facets += 1,
            _ => fail(&mut report, key(first)),
        }
        start = end;
    }
    report
}

/// Proper `(d+1)`-coloring of the cell graph plus the top-level residue law.
pub fn check_coloring(mesh: &Mesh) -> ColoringReport {
    let d = mesh.dim();
    let mut report = ColoringReport {
        passed: true,
        counterexample_edge: None,
        out_of_range_vertex: None,
        residue_law: true,
    };
    for v in mesh.vertices() {
        if v.color as usize > d {
            report.passed = false;
            report.out_of_range_vertex.get_or_insert(v.id);
        }
        if (v.color as i64) != v.z[d - 1].rem_euclid(d as i64 + 1) {
            report.residue_law = false;
        }
    }
    'cells: for cell in mesh.cells() {
        let ids = cell.vertex_ids;
        for (a, &va) in ids.iter().enumerate() {
            for &vb in &ids[a + 1..] {
                if mesh.color(va) == mesh.color(vb) {
                    report.passed = false;
                    report.counterexample_edge = Some((va, vb));
                    break 'cells;
                }
            }
        }
    }
    report
}

/// Exact `|det| = d!` for every cell and floating volume `prod p_i` within `rel_tol`.
pub fn check_equivolume(mesh: &Mesh, p: &ParamVector, rel_tol: f64) -> Result<EquivolumeReport> {
    if p.dim() != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            got: p.dim(),
        });
    }
    let fact = factorial(mesh.dim());
    let expected = p.product();
    let mut report = EquivolumeReport {
        passed: true,
        exact_determinants: true,
        worst_relative_deviation: 0.0,
        worst_cell: None,
    };
    for cell in mesh.cells() {
        let det = lattice_volume_det(mesh, &cell)?;
        if det.unsigned_abs() as u128 != fact {
            report.exact_determinants = false;
            report.passed = false;
            report.worst_cell.get_or_insert_with(|| cell.index.to_vec());
        }
        let vol = det.unsigned_abs() as f64 / fact as f64 * expected;
        let dev = ((vol - expected) / expected).abs();
        if dev > report.worst_relative_deviation {
            report.worst_relative_deviation = dev;
            if report.exact_determinants {
                report.worst_cell = Some(cell.index.to_vec());
            }
        }
    }
    if report.worst_relative_deviation > rel_tol {
        report.passed = false;
    }
    Ok(report)
}

/// Distinct absolute lattice differences over all cell edges.
pub fn edge_census(mesh: &Mesh) -> BTreeSet<EdgeClass> {
    let d = mesh.dim();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut w = vec![0u32; d];
    for cell in mesh.cells() {
        let ids = cell.vertex_ids;
        for (a, &va) in ids.iter().enumerate() {
            let za = mesh.coords(va);
            for &vb in &ids[a + 1..] {
                for (slot, (x, y)) in w.iter_mut().zip(za.iter().zip(mesh.coords(vb))) {
                    *slot = x.abs_diff(*y) as u32;
                }
                if !seen.contains(w.as_slice()) {
                    seen.insert(w.clone());
                }
            }
        }
    }
    seen.into_iter().map(EdgeClass).collect()
}

/// All recoloring vectors `(pi_2, ..., pi_d)` in lexicographic order.
pub fn all_permutation_vectors(d: usize) -> Result<Vec<PermutationVector>> {
    let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for level in 2..=d {
        let perms = permutations(level);
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p.clone());
                    v
                })
            })
            .collect();
    }
    acc.into_iter().map(|v| PermutationVector::new(d, v)).collect()
}

/// Union of the census over every recoloring vector on the given window.
pub fn census_union(d: usize, window: &Window) -> Result<BTreeSet<EdgeClass>> {
    let mut union = BTreeSet::new();
    for pv in all_permutation_vectors(d)? {
        union.extend(edge_census(&build(d, &pv, window)?));
    }
    Ok(union)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// One simplex `0 <= x_{pi(1)} <= ... <= x_{pi(d)} <= 1` of the unit cube.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KuhnSimplex {
    /// Axis ordering, 0-based: `x[permutation[0]]` is the smallest coordinate.
    pub permutation: Vec<usize>,
    /// The origin followed by partial sums of unit vectors, largest axis first.
    pub vertices: Vec<Vec<i64>>,
}

impl KuhnSimplex {
    pub fn new(permutation: Vec<usize>) -> Self {
        let d = permutation.len();
        let mut v = vec![0i64; d];
        let mut vertices = vec![v.clone()];
        for &axis in permutation.iter().rev() {
            v[axis] = 1;
            vertices.push(v.clone());
        }
        Self { permutation, vertices }
    }

    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    pub fn lattice_det(&self) -> Result<i64> {
        let rows = self.vertices[1..]
            .iter()
            .map(|v| v.iter().zip(&self.vertices[0]).map(|(a, b)| a - b).collect())
            .collect();
        bareiss_determinant(rows)
    }

    /// Exact volume `|det| / d!`.
    pub fn volume(&self) -> Result<Ratio<i64>> {
        let fact = i64::try_from(factorial(self.dim())).map_err(|_| Error::Overflow)?;
        Ok(Ratio::new(self.lattice_det()?.abs(), fact))
    }

    /// The long diagonal, `sqrt(d)`.
    pub fn diameter(&self) -> f64 {
        let mut best = 0i64;
        for (a, va) in self.vertices.iter().enumerate() {
            for vb in &self.vertices[a + 1..] {
                let s: i64 = va.iter().zip(vb).map(|(x, y)| (x - y) * (x - y)).sum();
                best = best.max(s);
            }
        }
        (best as f64).sqrt()
    }

    pub fn theta(&self) -> Result<f64> {
        let vol = self.volume()?;
        Ok(*vol.numer() as f64 / *vol.denom() as f64 / self.diameter().powi(self.dim() as i32))
    }

    /// Strict interior membership by the defining chain of inequalities.
    pub fn contains_strict(&self, x: &[f64]) -> bool {
        let mut prev = 0.0;
        for &axis in &self.permutation {
            if !(x[axis] > prev) {
                return false;
            }
            prev = x[axis];
        }
        prev < 1.0
    }
}

/// The `d!` simplices of the unit cube, one per axis ordering.
pub fn kuhn_partition(d: usize) -> Result<Vec<KuhnSimplex>> {
    kuhn_partition_with_budget(d, KUHN_CELL_BUDGET)
}

pub fn kuhn_partition_with_budget(d: usize, budget: usize) -> Result<Vec<KuhnSimplex>> {
    if d < 1 {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "dimension must be at least 1",
        });
    }
    let count = factorial(d);
    if count > budget as u128 {
        return Err(Error::Budget {
            count: usize::try_from(count).unwrap_or(usize::MAX),
            budget,
        });
    }
    Ok(permutations(d).into_iter().map(KuhnSimplex::new).collect())
}

/// `(d^{d/2} d!)^{-1}`.
pub fn kuhn_theta(d: usize) -> f64 {
    let df = d as f64;
    1.0 / (df.powf(df / 2.0) * factorial(d) as f64)
}

/// Worst cell of the mesh under `p` and its ratio to the cube simplices.
pub fn compare_regularity(mesh: &Mesh, p: &ParamVector) -> Result<RegularityReport> {
    let d = mesh.dim();
    if d < 2 {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "the regularity ratio needs d >= 2",
        });
    }
    if mesh.num_cells() == 0 {
        return Err(Error::InvalidWindow("mesh has no cells".into()));
    }
    let mut worst = f64::INFINITY;
    let mut worst_index = Vec::new();
    let mut max_diameter = 0.0f64;
    for cell in mesh.cells() {
        let t = theta(mesh, &cell, p)?;
        if t < worst {
            worst = t;
            worst_index = cell.index.to_vec();
        }
        max_diameter = max_diameter.max(cell_diameter(mesh, &cell, p)?);
    }
    let kt = kuhn_theta(d);
    Ok(RegularityReport {
        worst_theta: worst,
        worst_cell_index: worst_index,
        max_diameter,
        volume: p.product(),
        kuhn_theta: kt,
        ratio_vs_kuhn: worst / kt,
    })
}
