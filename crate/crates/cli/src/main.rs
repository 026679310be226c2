//! `sommerville` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or runtime
//! error, 2 on malformed invocations.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sommerville::io::{
    format_perms, format_window, parse_mesh_file, parse_params, parse_perms, parse_window,
    write_mesh_file, write_vtk_legacy, MeshFile,
};
use sommerville::metrics::{enumerate_w_hat, objective, EdgeClass};
use sommerville::optimize::{default_starts, kkt_check, maximize, KktReport, OptimizeResult};
use sommerville::params::oeis_denominators;
use sommerville::validation::{census_union, compare_regularity, edge_census, validate, ValidationReport};
use sommerville::{build, optimal_params, ParamVector, PermutationVector, RegularityReport, Window};

#[derive(Parser)]
#[command(name = "sommerville", version, about = "Generalized Sommerville tessellations")]
struct Cli {
    /// Emit a JSON report on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a mesh and write it as a mesh file.
    Build {
        #[command(flatten)]
        spec: MeshSpec,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Face-to-face, coloring and equivolume checks.
    Validate {
        #[command(flatten)]
        source: Source,
        /// Relative tolerance of the floating volume check.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Edge classes realized by a mesh.
    Census {
        #[command(flatten)]
        source: Source,
        /// Union over every recoloring vector (needs --dim).
        #[arg(long)]
        all_perms: bool,
    },
    /// Numerical maximization of the regularity objective.
    Optimize {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Worst-cell regularity against the cube split.
    Compare {
        #[command(flatten)]
        source: Source,
    },
    /// Integer denominators of the rescaled optimal parameters.
    Sequence {
        #[arg(long, default_value_t = 11)]
        n: usize,
    },
    /// Geometry export for visual inspection (d = 2 or 3).
    Export {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::VtkLegacyAscii)]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    VtkLegacyAscii,
}

#[derive(Args)]
struct MeshSpec {
    #[arg(long)]
    dim: usize,
    /// `lo:hi` per level, comma-separated; census default when omitted.
    #[arg(long)]
    window: Option<String>,
    /// Recolorings `pi_2;...;pi_d`, entries comma-separated; identity when omitted.
    #[arg(long)]
    perm: Option<String>,
    /// `p_1,...,p_d`; optimal parameters when omitted.
    #[arg(long)]
    params: Option<String>,
}

#[derive(Args)]
struct Source {
    /// Read the mesh from a mesh file.
    #[arg(long, conflicts_with_all = ["dim", "window", "perm", "params"])]
    mesh: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    perm: Option<String>,
    #[arg(long)]
    params: Option<String>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<sommerville::Error> for Failure {
    fn from(e: sommerville::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<bool, Failure>;

fn usage<T, E: std::fmt::Display>(r: Result<T, E>, flag: &str) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(format!("invalid {flag}: {e}")))
}

struct Resolved {
    window: Window,
    perms: PermutationVector,
    params: ParamVector,
}

impl MeshSpec {
    fn resolve(&self) -> Result<Resolved, Failure> {
        resolve(self.dim, self.window.as_deref(), self.perm.as_deref(), self.params.as_deref())
    }
}

fn resolve(
    d: usize,
    window: Option<&str>,
    perm: Option<&str>,
    params: Option<&str>,
) -> Result<Resolved, Failure> {
    if d == 0 {
        return Err(Failure::Usage("--dim must be at least 1".into()));
    }
    let window = match window {
        Some(s) => usage(parse_window(s), "--window")?,
        None => usage(Window::census_default(d), "--dim")?,
    };
    if window.dim() != d {
        return Err(Failure::Usage(format!("--window has {} ranges, expected {d}", window.dim())));
    }
    let perms = match perm {
        Some(s) => usage(parse_perms(d, s), "--perm")?,
        None => usage(PermutationVector::identity(d), "--dim")?,
    };
    let params = match params {
        Some(s) => usage(parse_params(s), "--params")?,
        None if d >= 2 => optimal_params(d)?,
        None => ParamVector::unit(1)?,
    };
    if params.dim() != d {
        return Err(Failure::Usage(format!("--params has {} entries, expected {d}", params.dim())));
    }
    Ok(Resolved { window, perms, params })
}

fn load(path: &Path) -> Result<MeshFile, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_mesh_file(&text).with_context(|| format!("corrupt mesh file {}", path.display()))?)
}

impl Source {
    fn load(&self) -> Result<MeshFile, Failure> {
        if let Some(path) = &self.mesh {
            return load(path);
        }
        let Some(d) = self.dim else {
            return Err(Failure::Usage("either --mesh or --dim is required".into()));
        };
        let r = resolve(d, self.window.as_deref(), self.perm.as_deref(), self.params.as_deref())?;
        let mesh = build(d, &r.perms, &r.window)?;
        Ok(MeshFile { mesh, params: r.params, perms: r.perms })
    }
}

fn emit<T: Serialize>(json: bool, report: &T, text: impl FnOnce() -> String) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    if json {
        serde_json::to_writer_pretty(&mut out, report)?;
        writeln!(out)?;
    } else {
        write!(out, "{}", text())?;
    }
    Ok(())
}

fn write_output(out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, contents).with_context(|| format!("cannot write {}", path.display())),
        None => Ok(io::stdout().lock().write_all(contents.as_bytes())?),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("({})", parts.join(", "))
}

#[derive(Serialize)]
struct BuildReport {
    dim: usize,
    cells: usize,
    vertices: usize,
    window: String,
    perm: String,
    params: ParamVector,
}

fn cmd_build(json: bool, spec: &MeshSpec, out: Option<&Path>) -> CmdResult {
    let r = spec.resolve()?;
    let mesh = build(spec.dim, &r.perms, &r.window)?;
    let file = write_mesh_file(&mesh, &r.params, &r.perms)?;
    write_output(out, &file)?;
    let report = BuildReport {
        dim: spec.dim,
        cells: mesh.num_cells(),
        vertices: mesh.num_vertices(),
        window: format_window(&r.window),
        perm: format_perms(&r.perms),
        params: r.params,
    };
    if out.is_some() {
        emit(json, &report, || format!("{} cells, {} vertices\n", report.cells, report.vertices))?;
    } else {
        eprintln!("{} cells, {} vertices", report.cells, report.vertices);
    }
    Ok(true)
}

#[derive(Serialize)]
struct ValidateOutput {
    passed: bool,
    cells: usize,
    #[serde(flatten)]
    report: ValidationReport,
}

fn cmd_validate(json: bool, source: &Source, tol: f64) -> CmdResult {
    let f = source.load()?;
    let report = validate(&f.mesh, &f.params, tol)?;
    let out = ValidateOutput { passed: report.passed(), cells: f.mesh.num_cells(), report };
    emit(json, &out, || {
        let r = &out.report;
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        let mut s = format!("cells: {}\n", out.cells);
        s += &format!(
            "face-to-face: {} ({} interior, {} boundary facets, max multiplicity {})\n",
            mark(r.face_to_face.passed),
            r.interior_facets,
            r.boundary_facets,
            r.face_to_face.max_multiplicity
        );
        if let Some(c) = &r.face_to_face.counterexample {
            s += &format!("  offending facet: {c:?}\n");
        }
        s += &format!("coloring: {} (residue law {})\n", mark(r.coloring.passed), mark(r.coloring.residue_law));
        if let Some(e) = &r.coloring.counterexample_edge {
            s += &format!("  monochromatic edge: {e:?}\n");
        }
        s += &format!(
            "equivolume: {} (exact determinants {}, worst relative deviation {:.3e})\n",
            mark(r.equivolume.passed),
            mark(r.equivolume.exact_determinants),
            r.equivolume.worst_relative_deviation
        );
        s += &format!("overall: {}\n", mark(out.passed));
        s
    })?;
    Ok(out.passed)
}

#[derive(Serialize)]
struct CensusReport {
    dim: usize,
    union_over_perms: bool,
    count: usize,
    classes: Vec<EdgeClass>,
    /// Candidate classes that were not realized.
    missing: Vec<EdgeClass>,
    /// Realized classes outside the candidate set.
    unexpected: Vec<EdgeClass>,
}

fn cmd_census(json: bool, source: &Source, all_perms: bool) -> CmdResult {
    let (d, classes) = if all_perms {
        let Some(d) = source.dim else {
            return Err(Failure::Usage("--all-perms requires --dim".into()));
        };
        if source.perm.is_some() {
            return Err(Failure::Usage("--all-perms cannot be combined with --perm".into()));
        }
        let r = resolve(d, source.window.as_deref(), None, source.params.as_deref())?;
        (d, census_union(d, &r.window)?)
    } else {
        let f = source.load()?;
        (f.mesh.dim(), edge_census(&f.mesh))
    };
    let hat = if d >= 2 { enumerate_w_hat(d)? } else { Vec::new() };
    let report = CensusReport {
        dim: d,
        union_over_perms: all_perms,
        count: classes.len(),
        missing: hat.iter().filter(|w| !classes.contains(w)).cloned().collect(),
        unexpected: if d >= 2 { classes.iter().filter(|w| !hat.contains(w)).cloned().collect() } else { Vec::new() },
        classes: classes.into_iter().collect(),
    };
    emit(json, &report, || {
        let mut s = format!("{} edge classes\n", report.count);
        for w in &report.classes {
            s += &format!("{w}\n");
        }
        if !report.missing.is_empty() {
            let m: Vec<String> = report.missing.iter().map(ToString::to_string).collect();
            s += &format!("not realized: {}\n", m.join(" "));
        }
        for w in &report.unexpected {
            s += &format!("unexpected class {w}\n");
        }
        s
    })?;
    Ok(report.unexpected.is_empty())
}

#[derive(Serialize)]
struct OptimizeReport {
    dim: usize,
    #[serde(flatten)]
    result: OptimizeResult,
    p_star: ParamVector,
    f_star: f64,
    max_deviation: f64,
    kkt: KktReport,
    kkt_passed: bool,
}

fn cmd_optimize(json: bool, d: usize, starts: Option<usize>, tol: f64) -> CmdResult {
    if d < 2 {
        return Err(Failure::Usage("--dim must be at least 2".into()));
    }
    if !(tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let result = maximize(d, starts.unwrap_or_else(|| default_starts(d)), tol)?;
    let p_star = optimal_params(d)?;
    let max_deviation = result
        .p_hat
        .as_slice()
        .iter()
        .zip(p_star.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let kkt = kkt_check(&p_star)?;
    let report = OptimizeReport {
        dim: d,
        f_star: objective(&p_star)?,
        kkt_passed: kkt.is_kkt_point(1e-7),
        result,
        p_star,
        max_deviation,
        kkt,
    };
    emit(json, &report, || {
        let mut s = format!("p_hat    = {}\n", fmt_vec(report.result.p_hat.as_slice()));
        s += &format!("F(p_hat) = {:.15e}\n", report.result.f_value);
        s += &format!("p*       = {}\n", fmt_vec(report.p_star.as_slice()));
        s += &format!("F(p*)    = {:.15e}\n", report.f_star);
        s += &format!("max |p_hat - p*| = {:.3e}\n", report.max_deviation);
        s += &format!(
            "KKT at p*: active set {:?}, multipliers {}, residual {:.3e}, {}\n",
            report.kkt.active_set,
            fmt_vec(&report.kkt.multipliers),
            report.kkt.stationarity_residual,
            if report.kkt_passed { "pass" } else { "FAIL" }
        );
        s
    })?;
    Ok(report.kkt_passed && report.max_deviation <= 1e-4)
}

#[derive(Serialize)]
struct CompareReport {
    dim: usize,
    params: ParamVector,
    #[serde(flatten)]
    report: RegularityReport,
    /// `(sqrt(3)/2) d`, the guaranteed ratio at the optimal parameters.
    optimal_bound: f64,
}

fn cmd_compare(json: bool, source: &Source) -> CmdResult {
    let f = source.load()?;
    let d = f.mesh.dim();
    if d < 2 {
        return Err(Failure::Runtime(anyhow::anyhow!("regularity comparison needs d >= 2")));
    }
    let report = CompareReport {
        dim: d,
        report: compare_regularity(&f.mesh, &f.params)?,
        params: f.params,
        optimal_bound: 3f64.sqrt() / 2.0 * d as f64,
    };
    emit(json, &report, || {
        let r = &report.report;
        format!(
            "worst theta {:.12e} at cell {:?}\nkuhn theta  {:.12e}\nratio       {:.12}\nbound       {:.12}\n",
            r.worst_theta, r.worst_cell_index, r.kuhn_theta, r.ratio_vs_kuhn, report.optimal_bound
        )
    })?;
    Ok(true)
}

#[derive(Serialize)]
struct SequenceReport {
    n: usize,
    denominators: Vec<u64>,
}

fn cmd_sequence(json: bool, n: usize) -> CmdResult {
    let report = SequenceReport { n, denominators: oeis_denominators(n)? };
    emit(json, &report, || {
        let parts: Vec<String> = report.denominators.iter().map(u64::to_string).collect();
        format!("{}\n", parts.join(", "))
    })?;
    Ok(true)
}

fn cmd_export(mesh: &Path, _format: ExportFormat, out: Option<&Path>) -> CmdResult {
    let f = load(mesh)?;
    let vtk = write_vtk_legacy(&f.mesh, &f.params)?;
    write_output(out, &vtk)?;
    Ok(true)
}

fn run(cli: &Cli) -> CmdResult {
    let json = cli.json;
    match &cli.command {
        Command::Build { spec, out } => cmd_build(json, spec, out.as_deref()),
        Command::Validate { source, tol } => cmd_validate(json, source, *tol),
        Command::Census { source, all_perms } => cmd_census(json, source, *all_perms),
        Command::Optimize { dim, starts, tol } => cmd_optimize(json, *dim, *starts, *tol),
        Command::Compare { source } => cmd_compare(json, source),
        Command::Sequence { n } => cmd_sequence(json, *n),
        Command::Export { mesh, format, out } => cmd_export(mesh, *format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
