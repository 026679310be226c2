//! Text mesh files and VTK legacy export.
//!
//! Mesh file layout (UTF-8, one record per line, `#` starts a comment):
//!
//! ```text
//! format sommerville-mesh 1
//! dim <d>
//! params <p_1> ... <p_d>
//! perm <pi_2>;<pi_3>;...        (comma-separated entries, `-` when d = 1)
//! window <lo>:<hi>,<lo>:<hi>,...
//! vertices <n>
//! <id> <z_1> ... <z_d> <color> <x_1> ... <x_d>
//! cells <m>
//! <index_1> ... <index_d> : <v_0> ... <v_d>
//! end
//! ```
//!
//! Lattice coordinates and colors are authoritative; embedded coordinates
//! are written for convenience and ignored on input.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::metrics::{embed_point, theta};
use crate::params::{ParamVector, PermutationVector};
use crate::tessellation::{Mesh, Window};

pub const FORMAT_TAG: &str = "sommerville-mesh";
pub const FORMAT_VERSION: u32 = 1;

/// A mesh together with the parameters and recoloring it was written with.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFile {
    pub mesh: Mesh,
    pub params: ParamVector,
    pub perms: PermutationVector,
}

pub fn format_window(w: &Window) -> String {
    w.ranges()
        .iter()
        .map(|(lo, hi)| format!("{lo}:{hi}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_window(s: &str) -> Result<Window> {
    let ranges = s
        .split(',')
        .map(|r| {
            let (lo, hi) = r
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::InvalidWindow(format!("range {r:?} is not lo:hi")))?;
            let lo = lo
                .trim()
                .parse()
                .map_err(|_| Error::InvalidWindow(format!("bad bound {lo:?}")))?;
            let hi = hi
                .trim()
                .parse()
                .map_err(|_| Error::InvalidWindow(format!("bad bound {hi:?}")))?;
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    Window::new(ranges)
}

pub fn format_perms(p: &PermutationVector) -> String {
    if p.levels().is_empty() {
        return "-".into();
    }
    p.levels()
        .iter()
        .map(|l| l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_perms(d: usize, s: &str) -> Result<PermutationVector> {
    let s = s.trim();
    if s == "-" || s.is_empty() {
        return PermutationVector::new(d, Vec::new());
    }
    let levels = s
        .split(';')
        .enumerate()
        .map(|(k, part)| {
            part.split(',')
                .map(|x| {
                    x.trim().parse::<usize>().map_err(|_| Error::InvalidPermutation {
                        level: k + 2,
                        reason: format!("bad entry {x:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PermutationVector::new(d, levels)
}

pub fn parse_params(s: &str) -> Result<ParamVector> {
    let values = s
        .split([',', ' '])
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: 0,
                message: format!("bad parameter {x:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ParamVector::new(values)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Serializes a mesh. Floats use the shortest round-trip representation.
pub fn write_mesh_file(mesh: &Mesh, params: &ParamVector, perms: &PermutationVector) -> Result<String> {
    let d = mesh.dim();
    if params.dim() != d || perms.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if params.dim() != d { params.dim() } else { perms.dim() },
        });
    }
    let mut out = String::new();
    let _ = writeln!(out, "format {FORMAT_TAG} {FORMAT_VERSION}");
    let _ = writeln!(out, "dim {d}");
    let _ = writeln!(out, "params {}", join(params.as_slice()));
    let _ = writeln!(out, "perm {}", format_perms(perms));
    let _ = writeln!(out, "window {}", format_window(mesh.window()));
    let _ = writeln!(out, "vertices {}", mesh.num_vertices());
    for v in mesh.vertices() {
        let x = embed_point(v.z, params)?;
        let _ = writeln!(out, "{} {} {} {}", v.id, join(v.z), v.color, join(&x));
    }
    let _ = writeln!(out, "cells {}", mesh.num_cells());
    for c in mesh.cells() {
        let _ = writeln!(out, "{} : {}", join(c.index), join(c.vertex_ids));
    }
    out.push_str("end\n");
    Ok(out)
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_record(&mut self) -> Result<String> {
        loop {
            self.line += 1;
            let raw = self
                .inner
                .next()
                .ok_or_else(|| self.err("unexpected end of file"))?
                .map_err(|e| self.err(&e.to_string()))?;
            let trimmed = raw.split('#').next().unwrap_or("").trim();
            if !trimmed.is_empty() {
                return Ok(trimmed.to_string());
            }
        }
    }

    fn err(&self, message: &str) -> Error {
        Error::Parse {
            line: self.line,
            message: message.to_string(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let rec = self.next_record()?;
        match rec.split_once(char::is_whitespace) {
            Some((k, rest)) if k == key => Ok(rest.trim().to_string()),
            _ => Err(self.err(&format!("expected `{key} ...`, found {rec:?}"))),
        }
    }

    fn numbers<T: std::str::FromStr>(&self, s: &str) -> Result<Vec<T>> {
        s.split_whitespace()
            .map(|x| x.parse::<T>().map_err(|_| self.err(&format!("bad number {x:?}"))))
            .collect()
    }
}

pub fn read_mesh_file<R: BufRead>(reader: R) -> Result<MeshFile> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let header = lines.keyed("format")?;
    let expected = format!("{FORMAT_TAG} {FORMAT_VERSION}");
    if header.split_whitespace().collect::<Vec<_>>().join(" ") != expected {
        return Err(lines.err(&format!("unsupported format {header:?}")));
    }
    let d: usize = lines
        .keyed("dim")?
        .parse()
        .map_err(|_| lines.err("bad dimension"))?;
    if d == 0 {
        return Err(lines.err("dimension must be positive"));
    }
    let params_line = lines.keyed("params")?;
    let params = ParamVector::new(lines.numbers(&params_line)?)?;
    let perms = parse_perms(d, &lines.keyed("perm")?)?;
    let window = parse_window(&lines.keyed("window")?)?;
    if params.dim() != d || window.dim() != d {
        return Err(lines.err("header dimensions disagree"));
    }

    let nv: usize = lines
        .keyed("vertices")?
        .parse()
        .map_err(|_| lines.err("bad vertex count"))?;
    let mut coords = Vec::with_capacity(nv * d);
    let mut colors = Vec::with_capacity(nv);
    for id in 0..nv {
        let rec = lines.next_record()?;
        let fields: Vec<&str> = rec.split_whitespace().collect();
        if fields.len() != 2 * d + 2 {
            return Err(lines.err(&format!("vertex record needs {} fields", 2 * d + 2)));
        }
        let got: usize = fields[0].parse().map_err(|_| lines.err("bad vertex id"))?;
        if got != id {
            return Err(lines.err(&format!("vertex id {got} out of sequence (expected {id})")));
        }
        coords.extend(lines.numbers::<i64>(&fields[1..=d].join(" "))?);
        colors.push(fields[d + 1].parse::<u8>().map_err(|_| lines.err("bad color"))?);
    }

    let nc: usize = lines
        .keyed("cells")?
        .parse()
        .map_err(|_| lines.err("bad cell count"))?;
    let mut cell_vertices = Vec::with_capacity(nc * (d + 1));
    let mut cell_indices = Vec::with_capacity(nc * d);
    for _ in 0..nc {
        let rec = lines.next_record()?;
        let (idx, verts) = rec
            .split_once(':')
            .ok_or_else(|| lines.err("cell record needs `index : vertices`"))?;
        let idx: Vec<i64> = lines.numbers(idx)?;
        let verts: Vec<u32> = lines.numbers(verts)?;
        if idx.len() != d || verts.len() != d + 1 {
            return Err(lines.err("cell record has the wrong arity"));
        }
        cell_indices.extend(idx);
        cell_vertices.extend(verts);
    }
    if lines.next_record()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    let mesh = Mesh::from_parts(d, coords, colors, cell_vertices, cell_indices, window)?;
    Ok(MeshFile { mesh, params, perms })
}

pub fn parse_mesh_file(s: &str) -> Result<MeshFile> {
    read_mesh_file(s.as_bytes())
}

/// VTK legacy ASCII unstructured grid for `d = 2` (triangles) and `d = 3`
/// (tetrahedra), with the regularity ratio per cell and colors per point.
pub fn write_vtk_legacy(mesh: &Mesh, params: &ParamVector) -> Result<String> {
    let d = mesh.dim();
    let cell_type = match d {
        2 => 5,
        3 => 10,
        _ => {
            return Err(Error::Unsupported(format!(
                "VTK export covers d = 2 and d = 3 (got d = {d}); use the mesh file format instead"
            )))
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "simplicial tiling d={d} p=[{}]", join(params.as_slice()));
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", mesh.num_vertices());
    for v in mesh.vertices() {
        let mut x = embed_point(v.z, params)?;
        x.resize(3, 0.0);
        let _ = writeln!(out, "{}", join(&x));
    }
    let n = mesh.num_cells();
    let _ = writeln!(out, "CELLS {n} {}", n * (d + 2));
    for c in mesh.cells() {
        let _ = writeln!(out, "{} {}", d + 1, join(c.vertex_ids));
    }
    let _ = writeln!(out, "CELL_TYPES {n}");
    for _ in 0..n {
        let _ = writeln!(out, "{cell_type}");
    }
    let _ = writeln!(out, "CELL_DATA {n}");
    let _ = writeln!(out, "SCALARS theta double 1");
    let _ = writeln!(out, "LOOKUP_TABLE default");
    for c in mesh.cells() {
        let _ = writeln!(out, "{}", theta(mesh, &c, params)?);
    }
    let _ = writeln!(out, "POINT_DATA {}", mesh.num_vertices());
    let _ = writeln!(out, "SCALARS color int 1");
    let _ = writeln!(out, "LOOKUP_TABLE default");
    for v in mesh.vertices() {
        let _ = writeln!(out, "{}", v.color);
    }
    Ok(out)
}
