//! Browser bindings: an interactive 2D tiling, objective profiles and the
//! optimizer. Every export has a plain Rust twin so the logic runs natively
//! in tests.

use wasm_bindgen::prelude::*;

use sommerville::metrics::{embed, objective, theta};
use sommerville::optimize::{default_starts, maximize};
use sommerville::validation::kuhn_theta;
use sommerville::{build, optimal_params, ParamVector, PermutationVector, Window};

/// A finished 2D tiling, flattened for canvas drawing.
#[wasm_bindgen]
pub struct Tiling {
    positions: Vec<f64>,
    triangles: Vec<u32>,
    colors: Vec<u8>,
    thetas: Vec<f64>,
    worst_theta: f64,
}

#[wasm_bindgen]
impl Tiling {
    /// `x_0, y_0, x_1, y_1, ...`
    pub fn positions(&self) -> Vec<f64> {
        self.positions.clone()
    }

    /// Three vertex ids per triangle.
    pub fn triangles(&self) -> Vec<u32> {
        self.triangles.clone()
    }

    /// Vertex colors in `{0, 1, 2}`.
    pub fn colors(&self) -> Vec<u8> {
        self.colors.clone()
    }

    /// Regularity ratio per triangle.
    pub fn thetas(&self) -> Vec<f64> {
        self.thetas.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn worst_theta(&self) -> f64 {
        self.worst_theta
    }

    /// Worst triangle against a half unit square.
    #[wasm_bindgen(getter)]
    pub fn ratio_vs_kuhn(&self) -> f64 {
        self.worst_theta / kuhn_theta(2)
    }
}

pub fn build_tiling(p2: f64, swap: bool, columns: u32, rows: u32) -> Result<Tiling, String> {
    let p = ParamVector::new(vec![1.0, p2]).map_err(|e| e.to_string())?;
    let perm = if swap { vec![1, 0] } else { vec![0, 1] };
    let pv = PermutationVector::new(2, vec![perm]).map_err(|e| e.to_string())?;
    let window = Window::new(vec![(0, columns.max(1) as i64), (0, rows.max(1) as i64)]).map_err(|e| e.to_string())?;
    let mesh = build(2, &pv, &window).map_err(|e| e.to_string())?;

    let mut positions = Vec::with_capacity(2 * mesh.num_vertices());
    let mut colors = Vec::with_capacity(mesh.num_vertices());
    for v in mesh.vertices() {
        positions.extend(embed(&v, &p).map_err(|e| e.to_string())?);
        colors.push(v.color);
    }
    let mut triangles = Vec::with_capacity(3 * mesh.num_cells());
    let mut thetas = Vec::with_capacity(mesh.num_cells());
    for cell in mesh.cells() {
        triangles.extend_from_slice(cell.vertex_ids);
        thetas.push(theta(&mesh, &cell, &p).map_err(|e| e.to_string())?);
    }
    let worst_theta = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Tiling { positions, triangles, colors, thetas, worst_theta })
}

/// Tiling with `p = (1, p2)`; `swap` recolors the line before lifting.
#[wasm_bindgen]
pub fn tiling(p2: f64, swap: bool, columns: u32, rows: u32) -> Result<Tiling, JsError> {
    build_tiling(p2, swap, columns, rows).map_err(|e| JsError::new(&e))
}

pub fn profile(d: usize, j: usize, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(2..=d).contains(&j) {
        return Err(format!("component {j} is outside 2..={d}"));
    }
    if !(lo > 0.0 && hi > lo) || samples < 2 {
        return Err("need 0 < lo < hi and at least two samples".into());
    }
    let base = optimal_params(d).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * samples);
    for i in 0..samples {
        let t = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let mut v = base.as_slice().to_vec();
        v[j - 1] = t;
        let p = ParamVector::new(v).map_err(|e| e.to_string())?;
        out.push(t);
        out.push(objective(&p).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// `(t, F)` pairs, flattened, with `p_j = t` and every other component optimal.
#[wasm_bindgen]
pub fn objective_profile(d: usize, j: usize, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    profile(d, j, lo, hi, samples).map_err(|e| JsError::new(&e))
}

pub fn run_optimizer(d: usize, starts: usize) -> Result<Vec<f64>, String> {
    let starts = if starts == 0 { default_starts(d) } else { starts };
    let r = maximize(d, starts, 1e-10).map_err(|e| e.to_string())?;
    let mut out = r.p_hat.as_slice().to_vec();
    out.push(r.f_value);
    Ok(out)
}

/// `p_hat` followed by `F(p_hat)`; zero starts picks the default count.
#[wasm_bindgen]
pub fn optimize(d: usize, starts: usize) -> Result<Vec<f64>, JsError> {
    run_optimizer(d, starts).map_err(|e| JsError::new(&e))
}

/// The closed-form optimal parameters, for comparison.
#[wasm_bindgen]
pub fn optimal(d: usize) -> Result<Vec<f64>, JsError> {
    optimal_params(d).map(|p| p.as_slice().to_vec()).map_err(|e| JsError::new(&e.to_string()))
}
