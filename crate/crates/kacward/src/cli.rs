//! Command-line front end. `run` parses arguments, dispatches, and returns
//! the exit code with the serialized result.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::double;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::graph::{CutKind, Graph};
use crate::io::GraphInput;
use crate::ising::{self, IsingWeights, Source, WeightMode};
use crate::kacward::{build_corner_bundle, build_kacward, build_propagation, check_kasteleyn, fisher_graph, kacward_determinant};
use crate::linalg::C64;
use crate::oracle::{self, EnumerationBudget};
use crate::surface::{self, PuncturedDisk};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

/// Oracle agreement threshold, relative to `max(1, |oracle|)`.
const VERIFY_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "kacward", version, about = "Exact planar and toroidal Ising computations through Kac-Ward matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    High,
    Low,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Graph JSON file, `-` for stdin.
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Cross-check against exhaustive enumeration when within budget.
    #[arg(long)]
    pub verify: bool,
    /// Read edge weights as couplings J and convert them at this β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Coupling-to-weight conversion used with --beta.
    #[arg(long, value_enum, default_value = "high")]
    pub mode: Mode,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected x,y but got {s:?}"));
    }
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([f(parts[0])?, f(parts[1])?])
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Partition function Z = |Pf K̂|.
    Partition {
        #[command(flatten)]
        common: Common,
    },
    /// Spin correlation of the faces containing the given points.
    SpinCorr {
        #[command(flatten)]
        common: Common,
        #[arg(long = "face", value_parser = parse_point)]
        faces: Vec<[f64; 2]>,
    },
    /// Energy correlation of unoriented edges (input order).
    EnergyCorr {
        #[command(flatten)]
        common: Common,
        #[arg(long = "edge")]
        edges: Vec<usize>,
    },
    /// Pfaffian minor of K̂⁻¹ at oriented edges (2k: u→v of edge k, 2k+1: v→u).
    Fermion {
        #[command(flatten)]
        common: Common,
        #[arg(long = "label")]
        labels: Vec<usize>,
        /// Twist by a spin at the face containing this point.
        #[arg(long = "twist-face", value_parser = parse_point)]
        twist: Vec<[f64; 2]>,
    },
    /// Disorder correlation at vertex ids, optionally with spins.
    Disorder {
        #[command(flatten)]
        common: Common,
        #[arg(long = "vertex")]
        vertices: Vec<i64>,
        #[arg(long = "face", value_parser = parse_point)]
        faces: Vec<[f64; 2]>,
    },
    /// Fermionic observable values at midedges and corners.
    Observable {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        source_edge: Option<usize>,
        #[arg(long)]
        source_corner: Option<usize>,
    },
    /// Double-Ising partition function (−1)^{|E|} det K̃.
    DoublePartition {
        #[command(flatten)]
        common: Common,
    },
    /// Double-Ising spin correlation.
    DoubleSpinCorr {
        #[command(flatten)]
        common: Common,
        #[arg(long = "face", value_parser = parse_point)]
        faces: Vec<[f64; 2]>,
    },
    /// Double-Ising partition function with Dobrushin conditions between two
    /// boundary vertices.
    Dobrushin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        b: i64,
        #[arg(long, default_value_t = 3)]
        paths: usize,
    },
    /// Torus partition functions from the four spin structures.
    TorusPartition {
        #[command(flatten)]
        common: Common,
    },
    /// Punctured-disk partition function and spin correlation.
    SurfaceCorr {
        #[command(flatten)]
        common: Common,
        #[arg(long = "puncture", value_parser = parse_point)]
        punctures: Vec<[f64; 2]>,
        #[arg(long = "face", value_parser = parse_point)]
        faces: Vec<[f64; 2]>,
    },
    /// Run the oracle suite on the input graph, or on the built-in corpus.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Timing of the Pfaffian path on N×N blocks against enumeration.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,10,12,14,16,20")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.4)]
        x: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Partition { .. } => "partition",
            Command::SpinCorr { .. } => "spin-corr",
            Command::EnergyCorr { .. } => "energy-corr",
            Command::Fermion { .. } => "fermion",
            Command::Disorder { .. } => "disorder",
            Command::Observable { .. } => "observable",
            Command::DoublePartition { .. } => "double-partition",
            Command::DoubleSpinCorr { .. } => "double-spin-corr",
            Command::Dobrushin { .. } => "dobrushin",
            Command::TorusPartition { .. } => "torus-partition",
            Command::SurfaceCorr { .. } => "surface-corr",
            Command::Verify { .. } => "verify",
            Command::Bench { .. } => "bench",
        }
    }

    fn common(&self) -> Option<&Common> {
        match self {
            Command::Partition { common }
            | Command::SpinCorr { common, .. }
            | Command::EnergyCorr { common, .. }
            | Command::Fermion { common, .. }
            | Command::Disorder { common, .. }
            | Command::Observable { common, .. }
            | Command::DoublePartition { common }
            | Command::DoubleSpinCorr { common, .. }
            | Command::Dobrushin { common, .. }
            | Command::TorusPartition { common }
            | Command::SurfaceCorr { common, .. }
            | Command::Verify { common } => Some(common),
            Command::Bench { .. } => None,
        }
    }

    fn format(&self) -> Format {
        match self {
            Command::Bench { format, .. } => *format,
            _ => self.common().map_or(Format::Json, |c| c.format),
        }
    }
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Schema { reason: String, message: String },
    Numerical { reason: String, message: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (reason, message) = (e.reason().to_string(), e.to_string());
        if e.is_numerical() {
            Failure::Numerical { reason, message }
        } else {
            Failure::Schema { reason, message }
        }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn schema(reason: &str, message: impl Into<String>) -> Failure {
    Failure::Schema { reason: reason.into(), message: message.into() }
}

/// Oracle cross-check attached to a result.
pub enum Check {
    Done { oracle: Value, delta: f64, scale: f64 },
    Skipped(String),
}

pub struct Outcome {
    pub value: Value,
    pub components: Map<String, Value>,
    pub check: Option<Check>,
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn oracle_check(r: Result<(Value, f64, f64)>) -> CmdResult<Check> {
    match r {
        Ok((oracle, delta, scale)) => Ok(Check::Done { oracle, delta, scale }),
        Err(Error::Budget(m)) => Ok(Check::Skipped(m)),
        Err(e) => Err(e.into()),
    }
}

fn scalar_check(fast: f64, oracle: Result<f64>) -> CmdResult<Check> {
    oracle_check(oracle.map(|o| (json!(o), (fast - o).abs(), o.abs())))
}

fn load_graph(common: &Common) -> CmdResult<Graph> {
    let path = common.input.as_ref().ok_or_else(|| schema("missing_input", "--input is required"))?;
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| schema("io", e.to_string()))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| schema("io", format!("{}: {e}", path.display())))?
    };
    let input = GraphInput::from_json(&text).map_err(|e| schema("json", e.to_string()))?;
    let g = input.build()?;
    match common.beta {
        None => Ok(g),
        Some(beta) => {
            let mode = match common.mode {
                Mode::High => WeightMode::High,
                Mode::Low => WeightMode::Low,
            };
            Ok(g.with_weights(IsingWeights::from_couplings(beta, g.weights(), mode).x)?)
        }
    }
}

fn faces_at(g: &Graph, points: &[[f64; 2]]) -> CmdResult<Vec<usize>> {
    Ok(points.iter().map(|p| g.face_at_point(*p)).collect::<Result<Vec<_>>>()?)
}

fn vertex_index(g: &Graph, id: i64) -> CmdResult<usize> {
    (0..g.n_vertices()).find(|&v| g.vertex_id(v) == id).ok_or_else(|| schema("unknown_vertex", format!("no vertex with id {id}")))
}

fn budget(g: &Graph) -> EnumerationBudget {
    EnumerationBudget::for_graph(g)
}

fn partition(common: &Common) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let rep = ising::partition_report(&g)?;
    let mut c = Map::new();
    c.insert("pfaffian".into(), json!(rep.pfaffian));
    c.insert("reference_sign".into(), json!(rep.reference_sign));
    c.insert("sign_determined".into(), json!(rep.sign_determined));
    c.insert("det_kw".into(), complex(kacward_determinant(&g)));
    if let Some(beta) = common.beta {
        let text = std::fs::read_to_string(common.input.as_ref().unwrap()).ok();
        let coupling = text.and_then(|t| GraphInput::from_json(&t).ok()).and_then(|i| i.build().ok()).map(|h| h.weights().to_vec());
        if let Some(j) = coupling {
            let mode = match common.mode {
                Mode::High => WeightMode::High,
                Mode::Low => WeightMode::Low,
            };
            let w = IsingWeights { x: g.weights().to_vec() };
            c.insert("spin_partition".into(), json!(w.spin_partition(&g, beta, &j, mode, rep.z)));
        }
    }
    let check = common.verify.then(|| scalar_check(rep.z, oracle::ising_partition(&g, &budget(&g)).map(f64::abs))).transpose()?;
    Ok(Outcome { value: json!(rep.z), components: c, check })
}

fn spin_corr(common: &Common, points: &[[f64; 2]]) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let faces = faces_at(&g, points)?;
    let v = ising::spin_correlation(&g, &faces)?;
    let mut c = Map::new();
    c.insert("faces".into(), json!(faces));
    let check = common.verify.then(|| scalar_check(v, oracle::spin_correlation(&g, &faces, &budget(&g)))).transpose()?;
    Ok(Outcome { value: json!(v), components: c, check })
}

fn energy_corr(common: &Common, edges: &[usize]) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let en = ising::energy_correlation(&g, edges)?;
    let mut c = Map::new();
    c.insert("indicator".into(), json!(en.indicator));
    c.insert("inclusion_exclusion_residual".into(), json!(en.inclusion_exclusion_residual));
    let check = common
        .verify
        .then(|| {
            let b = budget(&g);
            let o = oracle::ising_partition(&g, &b).and_then(|z| {
                let s = oracle::even_sum(&g, &b, |m| {
                    let walls = edges.iter().filter(|&&k| m >> k & 1 == 1).count();
                    if walls % 2 == 1 {
                        -oracle::mask_weight(&g, m)
                    } else {
                        oracle::mask_weight(&g, m)
                    }
                })?;
                Ok(s / z)
            });
            scalar_check(en.product, o)
        })
        .transpose()?;
    Ok(Outcome { value: json!(en.product), components: c, check })
}

fn fermion(common: &Common, labels: &[usize], twist: &[[f64; 2]]) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let tf = faces_at(&g, twist)?;
    let cut = if tf.is_empty() { None } else { Some(g.find_cut_set(&tf, CutKind::Dual)?) };
    let v = ising::fermion_pfaffian(&g, labels, cut.as_ref())?;
    let mut c = Map::new();
    c.insert("labels".into(), json!(labels));
    c.insert("twist_faces".into(), json!(tf));
    let check = common
        .verify
        .then(|| {
            let b = budget(&g);
            let o = (|| {
                let z = match &cut {
                    Some(k) => oracle::twisted_even_sum(&g, k, &b)?,
                    None => oracle::ising_partition(&g, &b)?,
                };
                Ok(oracle::fermion_sum(&g, labels, cut.as_ref(), &b)?.re / z)
            })();
            scalar_check(v, o)
        })
        .transpose()?;
    Ok(Outcome { value: json!(v), components: c, check })
}

fn disorder(common: &Common, ids: &[i64], points: &[[f64; 2]]) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let vs = ids.iter().map(|&id| vertex_index(&g, id)).collect::<CmdResult<Vec<_>>>()?;
    let faces = faces_at(&g, points)?;
    let (primal, dual) = ising::mixed_cuts(&g, &vs, &faces)?;
    let v = ising::disorder_correlation_with_cuts(&g, &primal, dual.as_ref())?;
    let mut c = Map::new();
    c.insert("vertices".into(), json!(vs));
    c.insert("faces".into(), json!(faces));
    c.insert("primal_cut".into(), json!(primal.crossed()));
    c.insert("dual_cut".into(), json!(dual.as_ref().map(|d| d.crossed())));
    let check = common
        .verify
        .then(|| {
            let b = budget(&g);
            let o = (|| {
                let z = oracle::ising_partition(&g, &b)?;
                let overlap = dual.as_ref().map_or(0, |d| (0..g.n_edges()).filter(|&k| d.crosses(k) && primal.crosses(k)).count());
                let s = if overlap % 2 == 1 { -1.0 } else { 1.0 };
                Ok(s * oracle::disorder_sum(&g, &vs, dual.as_ref(), &b)? / z)
            })();
            scalar_check(v, o)
        })
        .transpose()?;
    Ok(Outcome { value: json!(v), components: c, check })
}

fn observable(common: &Common, source_edge: Option<usize>, source_corner: Option<usize>) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let source = match (source_edge, source_corner) {
        (Some(a), None) => Source::Edge(a),
        (None, Some(c)) => Source::Corner(c),
        _ => return Err(schema("arguments", "give exactly one of --source-edge and --source-corner")),
    };
    let obs = ising::observable(&g, source, None)?;
    let mut c = Map::new();
    c.insert("midedge".into(), Value::Array(obs.midedge.iter().map(|&z| complex(z)).collect()));
    c.insert("corner".into(), Value::Array(obs.corner.iter().map(|&z| complex(z)).collect()));
    c.insert("s_hol_max_residual".into(), json!(ising::max_s_hol_residual(&g, &obs)));
    let s_matrix = if (0..g.n_vertices()).all(|v| g.degree(v) >= 2) { Some(ising::s_matrix_residual(&g, &obs)?) } else { None };
    c.insert("s_matrix_residual".into(), json!(s_matrix));
    let bd = ising::boundary_residuals(&g, &obs).into_iter().map(|r| r.1).fold(0.0, f64::max);
    c.insert("boundary_max_residual".into(), json!(bd));
    let check = common.verify.then(|| oracle_check(observable_oracle(&g, &obs))).transpose()?;
    Ok(Outcome { value: Value::Null, components: c, check })
}

/// Midedge (edge source) or corner (corner source) values recomputed from
/// configuration sums.
fn observable_oracle(g: &Graph, obs: &ising::Observable) -> Result<(Value, f64, f64)> {
    let b = budget(g);
    let z = oracle::ising_partition(g, &b)?;
    let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let mut vals = Vec::new();
    let mut delta: f64 = 0.0;
    let mut scale: f64 = 0.0;
    match obs.source {
        Source::Edge(a) => {
            let entry = |e: usize| -> Result<C64> {
                if e == a {
                    return Ok(C64::new(0.0, 0.0));
                }
                Ok(oracle::fermion_sum(g, &[e, a], None, &b)? / z)
            };
            for k in 0..g.n_edges() {
                let e = 2 * k;
                if e == a || e ^ 1 == a {
                    continue;
                }
                let f = ising::t_factor(g.x(e)) * w * (g.eta(e).conj() * entry(e)? + g.eta(e ^ 1).conj() * entry(e ^ 1)?);
                delta = delta.max((f - obs.midedge[e]).norm());
                scale = scale.max(f.norm());
                vals.push(json!({"edge": e, "value": complex(f)}));
            }
        }
        Source::Corner(c0) => {
            let v0 = g.corners()[c0].vertex;
            for c in 0..g.n_corners() {
                if g.corners()[c].vertex == v0 {
                    continue;
                }
                let chi = oracle::corner_sum(g, &[c, c0], None, &b)? / z;
                let f = w * g.corners()[c].eta.conj() * chi;
                delta = delta.max((f - obs.corner[c]).norm());
                scale = scale.max(f.norm());
                vals.push(json!({"corner": c, "value": complex(f)}));
            }
        }
    }
    Ok((Value::Array(vals), delta, scale))
}

fn double_partition(common: &Common) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let v = double::double_partition(&g)?;
    let mut c = Map::new();
    c.insert("boundary_edges".into(), json!(double::boundary_cycle(&g)?));
    let check = common.verify.then(|| scalar_check(v, oracle::double_partition_sum(&g, None, &budget(&g)))).transpose()?;
    Ok(Outcome { value: json!(v), components: c, check })
}

fn double_spin_corr(common: &Common, points: &[[f64; 2]]) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let faces = faces_at(&g, points)?;
    let v = double::double_spin_correlation(&g, &faces)?;
    let mut c = Map::new();
    c.insert("faces".into(), json!(faces));
    let check = common
        .verify
        .then(|| {
            let b = budget(&g);
            let o = (|| {
                if faces.is_empty() {
                    return Ok(1.0);
                }
                let cut = g.find_cut_set(&faces, CutKind::Dual)?;
                Ok(oracle::double_partition_sum(&g, Some(&cut), &b)? / oracle::double_partition_sum(&g, None, &b)?)
            })();
            scalar_check(v, o)
        })
        .transpose()?;
    Ok(Outcome { value: json!(v), components: c, check })
}

fn boundary_edge(g: &Graph, id: i64) -> CmdResult<usize> {
    let v = vertex_index(g, id)?;
    if !g.is_boundary(v) {
        return Err(schema("not_boundary", format!("vertex {id} is not a boundary vertex")));
    }
    Ok(g.out_edges(v)[0])
}

fn dobrushin(common: &Common, a: i64, b: i64, paths: usize) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let (ea, eb) = (boundary_edge(&g, a)?, boundary_edge(&g, b)?);
    let r = double::dobrushin_partition(&g, ea, eb, paths)?;
    let mut c = Map::new();
    c.insert("edges".into(), json!([ea, eb]));
    c.insert("phases".into(), Value::Array(r.phases.iter().map(|&z| complex(z)).collect()));
    c.insert("path_spread".into(), json!(r.path_spread));
    let check = common.verify.then(|| scalar_check(r.value, oracle::dobrushin_sum(&g, ea, eb, &budget(&g)))).transpose()?;
    Ok(Outcome { value: json!(r.value), components: c, check })
}

fn torus_partition(common: &Common) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let tp = surface::torus_partition(&g)?;
    let mut c = Map::new();
    c.insert("low".into(), json!(tp.low));
    let terms: Vec<Value> = tp
        .terms
        .iter()
        .map(|t| json!({"phi": t.lambda.phi, "q": t.q.q, "arf": t.arf, "sqrt_det": t.sqrt_det}))
        .collect();
    c.insert("structures".into(), Value::Array(terms));
    let check = common
        .verify
        .then(|| {
            let o = oracle::even_sum_by_homology(&g, &EnumerationBudget::torus()).map(|bins| {
                let total: f64 = bins.iter().sum();
                let delta = (tp.high - total).abs().max((tp.low - bins[0]).abs());
                (json!({"high": total, "low": bins[0], "bins": bins}), delta, total)
            });
            oracle_check(o)
        })
        .transpose()?;
    Ok(Outcome { value: json!(tp.high), components: c, check })
}

fn surface_corr(common: &Common, punctures: &[[f64; 2]], points: &[[f64; 2]]) -> CmdResult<Outcome> {
    let g = load_graph(common)?;
    let pu = faces_at(&g, punctures)?;
    let faces = faces_at(&g, points)?;
    let disk = PuncturedDisk::new(&g, &pu)?;
    let z = disk.partition(&g)?;
    let v = disk.spin_correlation(&g, &faces)?;
    let mut c = Map::new();
    c.insert("punctures".into(), json!(pu));
    c.insert("faces".into(), json!(faces));
    c.insert("partition".into(), json!(z));
    let check = common
        .verify
        .then(|| {
            let b = budget(&g);
            let o = (|| {
                let zo = oracle::dual_spin_sum(&g, &pu, &b, |_| 1.0)?;
                let num = oracle::dual_spin_sum(&g, &pu, &b, |s| faces.iter().map(|&f| s[f] as f64).product())?;
                Ok((json!({"partition": zo, "correlation": num / zo}), (v - num / zo).abs().max((z - zo).abs() / zo), 1.0))
            })();
            oracle_check(o)
        })
        .transpose()?;
    Ok(Outcome { value: json!(v), components: c, check })
}

struct CheckRow {
    graph: String,
    check: &'static str,
    value: f64,
    oracle: Option<f64>,
    delta: Option<f64>,
    pass: bool,
}

fn rel_row(graph: &str, check: &'static str, value: f64, oracle: Result<f64>, tol: f64) -> CheckRow {
    match oracle {
        Ok(o) => {
            let delta = (value - o).abs() / o.abs().max(1.0);
            CheckRow { graph: graph.into(), check, value, oracle: Some(o), delta: Some(delta), pass: delta <= tol }
        }
        Err(_) => CheckRow { graph: graph.into(), check, value, oracle: None, delta: None, pass: true },
    }
}

fn verify_graph(name: &str, g: &Graph, rows: &mut Vec<CheckRow>) -> Result<()> {
    let b = budget(g);
    if !g.is_planar() {
        let tp = surface::torus_partition(g)?;
        let bins = oracle::even_sum_by_homology(g, &EnumerationBudget::torus());
        rows.push(rel_row(name, "torus_high", tp.high, bins.as_ref().map(|b| b.iter().sum()).map_err(|e| Error::Invalid(e.to_string())), 1e-9));
        rows.push(rel_row(name, "torus_low", tp.low, bins.map(|b| b[0]), 1e-9));
        return Ok(());
    }
    let z = oracle::ising_partition(g, &b);
    let det = kacward_determinant(g);
    rows.push(rel_row(name, "kw_determinant", det.re, z.as_ref().map(|z| z * z).map_err(|e| Error::Invalid(e.to_string())), 1e-9));
    let kw = build_kacward(g)?;
    rows.push(rel_row(name, "signed_pfaffian", kw.signed_sum(), z.as_ref().copied().map_err(|e| Error::Invalid(e.to_string())), 1e-9));
    if g.n_edges() <= 10 {
        rows.push(rel_row(name, "terminal_dimers", kw.signed_sum(), oracle::signed_dimer_sum(g, None, &[], &b), 1e-9));
    }
    let cb = build_corner_bundle(g, &kw)?;
    let fisher = fisher_graph(g)?;
    let ok = check_kasteleyn(&fisher, &cb.fhat).all_ok();
    rows.push(CheckRow { graph: name.into(), check: "kasteleyn", value: ok as u8 as f64, oracle: None, delta: None, pass: ok });
    for u in g.inner_faces() {
        let v = ising::spin_correlation(g, &[u])?;
        rows.push(rel_row(name, "spin_correlation", v, oracle::spin_correlation(g, &[u], &b), 1e-9));
    }
    if let Ok(zv) = z {
        for labels in [[0usize, 1], [0, 2.min(g.n_oriented() - 1)]] {
            if labels[0] == labels[1] {
                continue;
            }
            let v = ising::fermion_pfaffian(g, &labels, None)?;
            rows.push(rel_row(name, "fermion_pair", v, oracle::fermion_sum(g, &labels, None, &b).map(|s| s.re / zv), 1e-9));
        }
    }
    if (0..g.n_vertices()).all(|v| g.degree(v) >= 2) {
        let res = build_propagation(g, &kw)?.residuals(g, &cb.c)?.max();
        rows.push(CheckRow { graph: name.into(), check: "propagation", value: res, oracle: None, delta: Some(res), pass: res <= 1e-9 });
    }
    Ok(())
}

fn verify(common: &Common) -> CmdResult<Outcome> {
    let graphs = match &common.input {
        Some(_) => vec![("input".to_string(), load_graph(common)?)],
        None => fixtures::corpus(),
    };
    let mut rows = Vec::new();
    for (name, g) in &graphs {
        verify_graph(name, g, &mut rows)?;
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let table: Vec<Value> = rows
        .iter()
        .map(|r| json!({"graph": r.graph, "check": r.check, "value": r.value, "oracle": r.oracle, "delta": r.delta, "pass": r.pass}))
        .collect();
    let mut c = Map::new();
    c.insert("checks".into(), Value::Array(table));
    c.insert("failed".into(), json!(failed));
    let worst = rows.iter().filter_map(|r| r.delta).fold(0.0, f64::max);
    let check = Check::Done { oracle: json!(rows.len() - failed), delta: if failed > 0 { f64::INFINITY } else { worst }, scale: 1.0 };
    Ok(Outcome { value: json!(failed == 0), components: c, check: Some(check) })
}

/// Least-squares slope of `ln t` against `ln n`.
pub fn fitted_exponent(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |a, &(n, t)| (a.0 + n.ln(), a.1 + t.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = points.iter().fold((0.0, 0.0), |a, &(n, t)| (a.0 + (n.ln() - mx) * (t.ln() - my), a.1 + (n.ln() - mx).powi(2)));
    Some(num / den)
}

fn bench(sizes: &[usize], x: f64) -> CmdResult<Outcome> {
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    for &n in sizes {
        let g = fixtures::block(n, n, x);
        let start = Instant::now();
        let z = ising::partition_function(&g)?;
        let secs = start.elapsed().as_secs_f64();
        let b = EnumerationBudget::bulk();
        let oracle = if g.n_edges() <= b.max_edges {
            let s = Instant::now();
            let zo = oracle::ising_partition(&g, &b)?;
            json!({"seconds": s.elapsed().as_secs_f64(), "z": zo})
        } else {
            json!({"skipped": format!("2^{} subsets", g.n_edges())})
        };
        if n >= 8 {
            timing.push((n as f64, secs));
        }
        rows.push(json!({"n": n, "edges": g.n_edges(), "dim": g.n_oriented(), "seconds": secs, "ln_z": z.ln(), "oracle": oracle}));
    }
    let mut c = Map::new();
    c.insert("rows".into(), Value::Array(rows));
    Ok(Outcome { value: json!(fitted_exponent(&timing)), components: c, check: None })
}

/// Decimal text with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    // folds −0 into 0
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn write_value(v: &Value, out: &mut String, indent: Option<usize>) {
    let nl = |out: &mut String, d: usize| {
        if let Some(step) = indent {
            out.push('\n');
            out.push_str(&" ".repeat(step * d));
        }
    };
    fn go(v: &Value, out: &mut String, indent: Option<usize>, depth: usize, nl: &dyn Fn(&mut String, usize)) {
        match v {
            Value::Number(n) => match (n.as_i64(), n.as_u64()) {
                (Some(i), _) => out.push_str(&i.to_string()),
                (_, Some(u)) => out.push_str(&u.to_string()),
                _ => out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN))),
            },
            Value::Array(a) => {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    nl(out, depth + 1);
                    go(x, out, indent, depth + 1, nl);
                }
                if !a.is_empty() {
                    nl(out, depth);
                }
                out.push(']');
            }
            Value::Object(m) => {
                out.push('{');
                for (i, (k, x)) in m.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    nl(out, depth + 1);
                    out.push_str(&Value::String(k.clone()).to_string());
                    out.push(':');
                    if indent.is_some() {
                        out.push(' ');
                    }
                    go(x, out, indent, depth + 1, nl);
                }
                if !m.is_empty() {
                    nl(out, depth);
                }
                out.push('}');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    go(v, out, indent, 0, &nl);
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(text) => out.push((prefix.to_string(), text.clone())),
        other => {
            let mut s = String::new();
            write_value(other, &mut s, None);
            out.push((prefix.to_string(), s));
        }
    }
}

pub fn render(v: &Value, format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Json => write_value(v, &mut s, None),
        Format::Pretty => write_value(v, &mut s, Some(2)),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            s.push_str("key,value");
            for (k, x) in rows {
                s.push('\n');
                s.push_str(&k);
                s.push(',');
                if x.contains([',', '"', '\n']) {
                    s.push('"');
                    s.push_str(&x.replace('"', "\"\""));
                    s.push('"');
                } else {
                    s.push_str(&x);
                }
            }
        }
    }
    s.push('\n');
    s
}

fn dispatch(cmd: &Command) -> CmdResult<Outcome> {
    match cmd {
        Command::Partition { common } => partition(common),
        Command::SpinCorr { common, faces } => spin_corr(common, faces),
        Command::EnergyCorr { common, edges } => energy_corr(common, edges),
        Command::Fermion { common, labels, twist } => fermion(common, labels, twist),
        Command::Disorder { common, vertices, faces } => disorder(common, vertices, faces),
        Command::Observable { common, source_edge, source_corner } => observable(common, *source_edge, *source_corner),
        Command::DoublePartition { common } => double_partition(common),
        Command::DoubleSpinCorr { common, faces } => double_spin_corr(common, faces),
        Command::Dobrushin { common, a, b, paths } => dobrushin(common, *a, *b, *paths),
        Command::TorusPartition { common } => torus_partition(common),
        Command::SurfaceCorr { common, punctures, faces } => surface_corr(common, punctures, faces),
        Command::Verify { common } => verify(common),
        Command::Bench { sizes, x, .. } => bench(sizes, *x),
    }
}

/// Caps rayon workers at `KACWARD_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("KACWARD_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs one request and returns the exit code with the text to print.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                return (EXIT_OK, e.to_string());
            }
            let v = json!({"command": null, "error": {"reason": "usage", "message": e.to_string()}});
            return (EXIT_SCHEMA, render(&v, Format::Json));
        }
    };
    init_threads();
    let name = cli.command.name();
    let format = cli.command.format();
    match dispatch(&cli.command) {
        Ok(out) => {
            let (verify, code) = match out.check {
                None => (Value::Null, EXIT_OK),
                Some(Check::Skipped(why)) => (json!({"oracle": null, "delta": null, "skipped": why}), EXIT_OK),
                Some(Check::Done { oracle, delta, scale }) => {
                    let ok = delta <= VERIFY_TOL * scale.max(1.0);
                    let d = if delta.is_finite() { json!(delta) } else { Value::Null };
                    (json!({"oracle": oracle, "delta": d, "pass": ok}), if ok { EXIT_OK } else { EXIT_MISMATCH })
                }
            };
            let v = json!({"command": name, "value": out.value, "components": Value::Object(out.components), "verify": verify});
            (code, render(&v, format))
        }
        Err(f) => {
            let (code, reason, message) = match f {
                Failure::Schema { reason, message } => (EXIT_SCHEMA, reason, message),
                Failure::Numerical { reason, message } => (EXIT_NUMERICAL, reason, message),
            };
            let v = json!({"command": name, "error": {"reason": reason, "message": message}});
            (code, render(&v, Format::Json))
        }
    }
}
