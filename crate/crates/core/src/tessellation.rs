//! Construction of bounded windows of the tiling by repeated prism lifting.
//!
//! Everything here is integer lattice data: a vertex is a point `z` of `Z^d`
//! together with a color, and its embedded position is `x_i = z_i * p_i`
//! (see [`crate::metrics::embed`]). A cell of the `d`-mesh is the convex hull
//! of `d + 1` consecutive lifted vertices `B_z, ..., B_{z+d}` above a cell of
//! the `(d-1)`-mesh, where `B_j` sits at height `j` above the base vertex whose
//! color is `j mod d`.
//!
//! Storage is flat (strided arrays) so that windows with millions of cells
//! stay compact; [`LatticeVertex`] and [`SimplexCell`] are borrowed views.

use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{validate_permutation, PermutationVector};

/// Borrowed view of a mesh vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeVertex<'a> {
    pub id: u32,
    pub z: &'a [i64],
    pub color: u8,
}

/// Borrowed view of a `d`-simplex.
///
/// `vertex_ids` are ordered by ascending last lattice coordinate and `index`
/// is the construction chain `(z_1, ..., z_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexCell<'a> {
    pub vertex_ids: &'a [u32],
    pub index: &'a [i64],
}

/// Half-open construction index ranges, one per level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    ranges: Vec<(i64, i64)>,
}

impl Window {
    pub fn new(ranges: Vec<(i64, i64)>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::InvalidWindow("a window needs at least one range".into()));
        }
        for (i, &(lo, hi)) in ranges.iter().enumerate() {
            if hi <= lo {
                return Err(Error::InvalidWindow(format!(
                    "range {} is empty ({lo}:{hi})",
                    i + 1
                )));
            }
        }
        Ok(Self { ranges })
    }

    /// `[0, 2)` at level 1 and `[0, 2i(i+1))` at level `i >= 2`.
    ///
    /// Every level spans at least two full color periods, so each edge class
    /// the construction can produce shows up in the window.
    pub fn census_default(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension {
                got: 0,
                reason: "dimension must be at least 1",
            });
        }
        let ranges = (1..=d as i64)
            .map(|i| if i == 1 { (0, 2) } else { (0, 2 * i * (i + 1)) })
            .collect();
        Self::new(ranges)
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    /// Range of level `level` (1-based).
    pub fn range(&self, level: usize) -> Range<i64> {
        let (lo, hi) = self.ranges[level - 1];
        lo..hi
    }

    /// Number of cells a mesh built on this window has.
    pub fn cell_count(&self) -> u128 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi - lo) as u128)
            .product()
    }

    pub fn truncate(&self, d: usize) -> Self {
        Self {
            ranges: self.ranges[..d].to_vec(),
        }
    }

    /// Whether a construction chain lies inside the window.
    pub fn contains(&self, index: &[i64]) -> bool {
        index.len() == self.ranges.len()
            && index
                .iter()
                .zip(&self.ranges)
                .all(|(&z, &(lo, hi))| lo <= z && z < hi)
    }
}

/// A bounded, purely combinatorial piece of the tiling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mesh {
    d: usize,
    coords: Vec<i64>,
    colors: Vec<u8>,
    cell_vertices: Vec<u32>,
    cell_indices: Vec<i64>,
    window: Window,
}

impl Mesh {
    /// Assembles a mesh from raw strided arrays, checking only shapes and id ranges.
    ///
    /// Used by the mesh file reader and by tests that need deliberately broken meshes.
    pub fn from_parts(
        d: usize,
        coords: Vec<i64>,
        colors: Vec<u8>,
        cell_vertices: Vec<u32>,
        cell_indices: Vec<i64>,
        window: Window,
    ) -> Result<Self> {
        if d == 0 || window.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: window.dim(),
            });
        }
        let nv = colors.len();
        if coords.len() != nv * d {
            return Err(Error::InvalidBase(format!(
                "{} coordinates for {nv} vertices in dimension {d}",
                coords.len()
            )));
        }
        if cell_vertices.len() % (d + 1) != 0 || cell_indices.len() % d != 0 {
            return Err(Error::InvalidBase("ragged cell arrays".into()));
        }
        if cell_vertices.len() / (d + 1) != cell_indices.len() / d {
            return Err(Error::InvalidBase("cell vertex and index counts differ".into()));
        }
        if let Some(&bad) = cell_vertices.iter().find(|&&v| v as usize >= nv) {
            return Err(Error::InvalidBase(format!("vertex id {bad} out of range")));
        }
        Ok(Self {
            d,
            coords,
            colors,
            cell_vertices,
            cell_indices,
            window,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn num_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_vertices.len() / (self.d + 1)
    }

    pub fn vertex(&self, id: u32) -> LatticeVertex<'_> {
        let i = id as usize;
        LatticeVertex {
            id,
            z: &self.coords[i * self.d..(i + 1) * self.d],
            color: self.colors[i],
        }
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = LatticeVertex<'_>> + '_ {
        (0..self.num_vertices() as u32).map(move |id| self.vertex(id))
    }

    pub fn cell(&self, i: usize) -> SimplexCell<'_> {
        let n = self.d + 1;
        SimplexCell {
            vertex_ids: &self.cell_vertices[i * n..(i + 1) * n],
            index: &self.cell_indices[i * self.d..(i + 1) * self.d],
        }
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = SimplexCell<'_>> + '_ {
        (0..self.num_cells()).map(move |i| self.cell(i))
    }

    pub fn coords(&self, id: u32) -> &[i64] {
        self.vertex(id).z
    }

    pub fn color(&self, id: u32) -> u8 {
        self.colors[id as usize]
    }

    /// Overwrites a vertex color; exists to build counterexamples for the checkers.
    pub fn set_color(&mut self, id: u32, color: u8) {
        self.colors[id as usize] = color;
    }

    /// Appends a copy of cell `i`; exists to build counterexamples for the checkers.
    pub fn duplicate_cell(&mut self, i: usize) {
        let n = self.d + 1;
        let verts = self.cell_vertices[i * n..(i + 1) * n].to_vec();
        let index = self.cell_indices[i * self.d..(i + 1) * self.d].to_vec();
        self.cell_vertices.extend(verts);
        self.cell_indices.extend(index);
    }

    #[cfg(test)]
    pub(crate) fn raw_parts(&self) -> (&[i64], &[u8], &[u32], &[i64]) {
        (
            &self.coords,
            &self.colors,
            &self.cell_vertices,
            &self.cell_indices,
        )
    }
}

/// The one-dimensional tiling: vertices `lo..=hi`, segments `[z, z+1]`, colors `z mod 2`.
pub fn build_base_1d(range: Range<i64>) -> Result<Mesh> {
    if range.end <= range.start {
        return Err(Error::InvalidWindow(format!(
            "empty base range {}:{}",
            range.start, range.end
        )));
    }
    let coords: Vec<i64> = (range.start..=range.end).collect();
    let colors = coords.iter().map(|z| z.rem_euclid(2) as u8).collect();
    let n = (range.end - range.start) as u32;
    let cell_vertices = (0..n).flat_map(|k| [k, k + 1]).collect();
    let cell_indices = range.clone().collect();
    Ok(Mesh {
        d: 1,
        coords,
        colors,
        cell_vertices,
        cell_indices,
        window: Window::new(vec![(range.start, range.end)])?,
    })
}

/// Lifts a `(d-1)`-mesh to a `d`-mesh.
///
/// Base colors are first relabelled through `perm`; above each base cell the
/// vertex `B_j` is placed at height `j` over the base vertex whose relabelled
/// color is `j mod d`, and the cells `{B_z, ..., B_{z+d}}` for `z` in
/// `z_range` are emitted. New vertices get color `j mod (d+1)`.
pub fn lift(base: &Mesh, perm: &[usize], z_range: Range<i64>) -> Result<Mesh> {
    let base_d = base.dim();
    let d = base_d + 1;
    validate_permutation(d, perm)?;
    if z_range.end <= z_range.start {
        return Err(Error::InvalidWindow(format!(
            "empty range {}:{} at level {d}",
            z_range.start, z_range.end
        )));
    }
    if d > u8::MAX as usize {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "colors are stored in a byte",
        });
    }

    let recolored: Vec<usize> = base
        .colors
        .iter()
        .map(|&c| perm.get(c as usize).copied().unwrap_or(usize::MAX))
        .collect();

    let per_base = (z_range.end - z_range.start) as usize;
    let num_cells = base.num_cells() * per_base;
    let mut coords = Vec::new();
    let mut colors = Vec::new();
    let mut cell_vertices = Vec::with_capacity(num_cells * (d + 1));
    let mut cell_indices = Vec::with_capacity(num_cells * d);
    // (base vertex, height) identifies the lifted lattice point uniquely
    let mut lookup: HashMap<(u32, i64), u32> = HashMap::new();
    let mut by_color = vec![0u32; d];
    let modulus = d as i64;
    let new_modulus = (d + 1) as i64;

    for (ci, cell) in base.cells().enumerate() {
        let mut seen = vec![false; d];
        for &v in cell.vertex_ids {
            let c = recolored[v as usize];
            if c >= d || seen[c] {
                return Err(Error::InvalidBase(format!(
                    "cell {ci} (index {:?}) is not properly {d}-colored",
                    cell.index
                )));
            }
            seen[c] = true;
            by_color[c] = v;
        }
        for z in z_range.clone() {
            for j in z..=z + modulus {
                let base_vertex = by_color[j.rem_euclid(modulus) as usize];
                let next_id = colors.len();
                let id = *lookup.entry((base_vertex, j)).or_insert_with(|| {
                    coords.extend_from_slice(base.coords(base_vertex));
                    coords.push(j);
                    colors.push(j.rem_euclid(new_modulus) as u8);
                    next_id as u32
                });
                cell_vertices.push(id);
            }
            cell_indices.extend_from_slice(cell.index);
            cell_indices.push(z);
        }
    }
    if colors.len() > u32::MAX as usize {
        return Err(Error::Budget {
            count: colors.len(),
            budget: u32::MAX as usize,
        });
    }

    let mut ranges = base.window.ranges.clone();
    ranges.push((z_range.start, z_range.end));
    Ok(Mesh {
        d,
        coords,
        colors,
        cell_vertices,
        cell_indices,
        window: Window::new(ranges)?,
    })
}

/// Builds the window of the tiling for the recoloring vector `perms`.
pub fn build(d: usize, perms: &PermutationVector, window: &Window) -> Result<Mesh> {
    if d == 0 {
        return Err(Error::InvalidDimension {
            got: 0,
            reason: "dimension must be at least 1",
        });
    }
    if perms.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: perms.dim(),
        });
    }
    if window.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: window.dim(),
        });
    }
    let mut mesh = build_base_1d(window.range(1))?;
    for level in 2..=d {
        mesh = lift(&mesh, perms.level(level), window.range(level))?;
    }
    Ok(mesh)
}

/// The `d + 1` facets of a cell; facet `k` omits `vertex_ids[k]` and is sorted.
pub fn facets(cell: &SimplexCell<'_>) -> Vec<Vec<u32>> {
    (0..cell.vertex_ids.len())
        .map(|k| {
            let mut f: Vec<u32> = cell
                .vertex_ids
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, &v)| v)
                .collect();
            f.sort_unstable();
            f
        })
        .collect()
}

/// Which neighbor lies across the facet opposite `vertex_ids[omitted]`.
///
/// Returns `(level, delta)`: the neighbor's construction chain equals this
/// cell's chain with entry `level` (1-based) shifted by `delta` (`+1` or `-1`).
/// Dropping the lowest vertex of a prism stack moves up the stack, dropping
/// the highest moves down, and dropping an interior vertex crosses to the
/// neighboring prism through a facet of the base cell, which is resolved
/// recursively on the lattice projection. Returns `None` for cells that do
/// not have the lifted structure.
pub fn facet_crossing(mesh: &Mesh, cell: &SimplexCell<'_>, omitted: usize) -> Option<(usize, i64)> {
    let d = mesh.dim();
    let points: Vec<&[i64]> = cell.vertex_ids.iter().map(|&v| mesh.coords(v)).collect();
    let mut removed = points.get(omitted)?.to_vec();
    let mut current: Vec<Vec<i64>> = points.iter().map(|p| p.to_vec()).collect();
    for level in (1..=d).rev() {
        current.iter_mut().for_each(|p| p.truncate(level));
        removed.truncate(level);
        current.sort_by_key(|p| p[level - 1]);
        current.dedup();
        if current.len() != level + 1 {
            return None;
        }
        let base = current[0][level - 1];
        if current
            .iter()
            .enumerate()
            .any(|(k, p)| p[level - 1] != base + k as i64)
        {
            return None;
        }
        let pos = current.iter().position(|p| *p == removed)?;
        if pos == 0 {
            return Some((level, 1));
        }
        if pos == level {
            return Some((level, -1));
        }
    }
    None
}
