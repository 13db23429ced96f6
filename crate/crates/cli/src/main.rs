//! `qchart` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 unreadable or invalid field definition,
//! 3 numerical failure, 4 a checked property does not hold.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qchart::calculus::lie_bracket;
use qchart::catalog::{Definition, EntryKind, CATALOG};
use qchart::chart::{build_chart, trace_slice, ChartConfig};
use qchart::distortion::{
    commutation_defect, flow_jacobian, liouville_check, mollification_stability, qc_growth_profile,
};
use qchart::io::{load_definition, write_mesh_csv, write_trajectory_csv};
use qchart::linalg::norm;
use qchart::plane::{involutivity_residual, INVOLUTIVITY_GATE, INVOLUTIVITY_MIN_SAMPLES};
use qchart::seminorms::{
    estimate_lipschitz, estimate_q, estimate_sf_esssup, estimate_zygmund, geometric_radii,
};
use qchart::{
    load_catalog, DomainBox, ErrorClass, FlowMap, FlowSettings, PlaneField, SamplingConfig, VectorField,
};

use report::{AnalysisReport, RunConfig, Source, Timing};

/// Slack on both sides of the seminorm chain inequality.
const CHAIN_SLACK: f64 = 1.05;

#[derive(Parser)]
#[command(name = "qchart", version, about = "Seminorms, flows and foliation charts of rough vector fields")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed of every sampler.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance of the flow integrator.
    #[arg(long, global = true, default_value_t = 1e-9)]
    rel_tol: f64,
    /// Finite-difference step; scale-aware default when absent.
    #[arg(long, global = true)]
    fd_step: Option<f64>,
    /// Points per axis of evaluation grids.
    #[arg(long, global = true, default_value_t = 5)]
    grid: usize,
    /// Half-width of the grid cube around the domain centre used by flow
    /// commands; a tenth of the smallest domain half-width when absent.
    #[arg(long, global = true)]
    grid_radius: Option<f64>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Input {
    /// Built-in example, e.g. `rotation2d` or `coords:2,3`.
    #[arg(long)]
    catalog: Option<String>,
    /// JSON definition file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Q, Zygmund, Lipschitz and Sf estimates with the chain inequality verdict.
    Seminorm {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 200)]
        base_points: usize,
        #[arg(long, default_value_t = 400)]
        direction_pairs: usize,
    },
    /// Lie brackets on the grid: frame pairs of a plane field, or the field against `--with`.
    Bracket {
        #[command(flatten)]
        input: Input,
        /// Second field as `expr; expr; ...`.
        #[arg(long)]
        with: Option<String>,
    },
    /// Out-of-plane bracket residual of a plane field.
    Involutivity {
        #[command(flatten)]
        input: Input,
    },
    /// One trajectory, written as CSV.
    Flow {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        t: f64,
    },
    /// Flow Jacobians, distortion growth and determinant bounds.
    Distortion {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,-0.5,0.5,1")]
        times: Vec<f64>,
        /// Divergence bound to check the determinant against; fails with exit 4 when violated.
        #[arg(long)]
        div_bound: Option<f64>,
    },
    /// Commutation defect of two flows over a table of times.
    Commute {
        #[command(flatten)]
        input: Input,
        /// Second field as `expr; expr; ...`; plane fields use their first two frame fields.
        #[arg(long)]
        with: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.5,-0.25,0.25,0.5")]
        times: Vec<f64>,
    },
    /// Flow error of mollified fields.
    Mollify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        eps: Vec<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        t: f64,
    },
    /// Foliation chart of an involutive plane field with slice meshes.
    Chart {
        #[command(flatten)]
        input: Input,
        /// Base point; the domain centre when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p: Option<Vec<f64>>,
        #[arg(long, default_value_t = 3)]
        slices: usize,
        #[arg(long, default_value_t = 33)]
        resolution: usize,
        #[arg(long, default_value_t = 0.25)]
        eps0: f64,
    },
    /// List the built-in examples.
    Catalog,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Seminorm { .. } => "seminorm",
            Command::Bracket { .. } => "bracket",
            Command::Involutivity { .. } => "involutivity",
            Command::Flow { .. } => "flow",
            Command::Distortion { .. } => "distortion",
            Command::Commute { .. } => "commute",
            Command::Mollify { .. } => "mollify",
            Command::Chart { .. } => "chart",
            Command::Catalog => "catalog",
        }
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, msg: msg.into() }
    }
}

impl From<qchart::Error> for Failure {
    fn from(e: qchart::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Input => 2,
            ErrorClass::Numerical => 3,
            ErrorClass::Property => 4,
        };
        Self { code, msg: e.to_string() }
    }
}

type Run<T> = std::result::Result<T, Failure>;

/// What a subcommand hands back to the single writer in `main`.
struct Outcome {
    results: Value,
    extra: Value,
    source: Option<Source>,
    /// File name and contents.
    files: Vec<(String, Vec<u8>)>,
    /// Set when a checked property failed; the report is still written.
    violation: Option<String>,
}

impl Outcome {
    fn new(results: Value, extra: Value, source: Option<Source>) -> Self {
        Self {
            results,
            extra,
            source,
            files: Vec::new(),
            violation: None,
        }
    }
}

fn load(input: &Input) -> Run<(Definition, Source)> {
    if let Some(name) = &input.catalog {
        let d = load_catalog(name)?;
        let description = describe(&d);
        return Ok((d, Source { kind: "catalog", name: name.clone(), description }));
    }
    let path = input.spec.as_ref().expect("clap enforces one input");
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    let d = load_definition(&text)?;
    let description = describe(&d);
    Ok((
        d,
        Source {
            kind: "file",
            name: path.display().to_string(),
            description,
        },
    ))
}

fn describe(d: &Definition) -> String {
    match d {
        Definition::Field(f) => f.describe(),
        Definition::Plane(e) => {
            let parts: Vec<String> = e.frame().iter().map(VectorField::describe).collect();
            format!("span[{}]", parts.join(", "))
        }
    }
}

fn load_field(input: &Input) -> Run<(VectorField, Source)> {
    let (d, s) = load(input)?;
    Ok((d.field()?, s))
}

fn load_plane(input: &Input) -> Run<(PlaneField, Source)> {
    let (d, s) = load(input)?;
    Ok((d.plane()?, s))
}

fn half_widths(d: &DomainBox) -> impl Iterator<Item = f64> + '_ {
    d.lo().iter().zip(d.hi()).map(|(l, h)| 0.5 * (h - l))
}

/// The domain pulled in by 5% so finite differences stay inside.
fn sweep_box(d: &DomainBox) -> Run<DomainBox> {
    let margin = 0.05 * half_widths(d).fold(f64::INFINITY, f64::min);
    Ok(d.shrink(margin)?)
}

/// Cube around the domain centre where flows of moderate length stay inside.
fn probe_box(g: &Global, d: &DomainBox) -> Run<DomainBox> {
    let half = half_widths(d).fold(f64::INFINITY, f64::min);
    Ok(DomainBox::centered(&d.center(), g.grid_radius.unwrap_or(0.1 * half))?)
}

fn sampling(g: &Global, d: &DomainBox, base_points: usize, direction_pairs: usize) -> SamplingConfig {
    let half = half_widths(d).fold(f64::INFINITY, f64::min);
    SamplingConfig {
        base_points,
        direction_pairs,
        radii: geometric_radii(0.5f64.min(0.25 * half), 8),
        rng_seed: g.seed,
        ..SamplingConfig::default()
    }
}

fn flow_settings(g: &Global) -> FlowSettings {
    FlowSettings {
        rel_tol: g.rel_tol,
        ..FlowSettings::default()
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialise")
}

fn second_field(with: &Option<String>, f: &VectorField) -> Run<VectorField> {
    let text = with
        .as_ref()
        .ok_or_else(|| Failure::usage("a vector field input needs --with for the second field"))?;
    Ok(VectorField::parse(text, f.dim(), f.domain().clone())?)
}

/// The two fields of `bracket` and `commute`.
fn field_pairs(input: &Input, with: &Option<String>) -> Run<(Vec<(usize, usize)>, Vec<VectorField>, Source)> {
    let (d, s) = load(input)?;
    match d {
        Definition::Field(f) => {
            let g = second_field(with, &f)?;
            Ok((vec![(0, 1)], vec![f, g], s))
        }
        Definition::Plane(e) => {
            if with.is_some() {
                return Err(Failure::usage("--with applies to vector field inputs only"));
            }
            let k = e.k();
            if k < 2 {
                return Err(Failure::usage("the plane field has a single frame field"));
            }
            let pairs = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
            Ok((pairs, e.frame().to_vec(), s))
        }
    }
}

fn seminorm(g: &Global, input: &Input, base_points: usize, direction_pairs: usize) -> Run<Outcome> {
    if base_points == 0 || direction_pairs == 0 {
        return Err(Failure::usage("--base-points and --direction-pairs must be positive"));
    }
    let (f, source) = load_field(input)?;
    let cfg = sampling(g, f.domain(), base_points, direction_pairs);
    let q = estimate_q(&f, &cfg)?;
    let z = estimate_zygmund(&f, &cfg)?;
    let l = estimate_lipschitz(&f, &cfg)?;
    let sf = estimate_sf_esssup(&f, &cfg, g.fd_step)?;
    let z_le_4q = z.value <= 4.0 * q.value * CHAIN_SLACK;
    let q_le_2l = 4.0 * q.value <= 8.0 * l.value * CHAIN_SLACK;
    let verdict = if z_le_4q && q_le_2l { "PASS" } else { "FAIL" };
    let results = json!({
        "q": q, "zygmund": z, "lipschitz": l, "sf_esssup": sf,
        "chain": {
            "slack": CHAIN_SLACK,
            "zygmund_le_4q": z_le_4q,
            "4q_le_8lipschitz": q_le_2l,
            "verdict": verdict,
        },
    });
    let mut out = Outcome::new(results, to_value(&cfg), Some(source));
    if verdict == "FAIL" {
        out.violation = Some("chain inequality violated".into());
    }
    Ok(out)
}

fn bracket(g: &Global, input: &Input, with: &Option<String>) -> Run<Outcome> {
    let (pairs, fields, source) = field_pairs(input, with)?;
    let grid = sweep_box(fields[0].domain())?.grid(g.grid);
    let mut rows = Vec::new();
    let mut skipped = 0;
    let mut max_norm: f64 = 0.0;
    for x in &grid {
        for &(i, j) in &pairs {
            match lie_bracket(&fields[i], &fields[j], x, g.fd_step) {
                Ok(b) => {
                    let nb = norm(&b);
                    max_norm = max_norm.max(nb);
                    rows.push(json!({"point": x, "pair": [i + 1, j + 1], "bracket": b, "norm": nb}));
                }
                Err(e) if e.is_pointwise() => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let results = json!({"max_norm": max_norm, "skipped": skipped, "table": rows});
    Ok(Outcome::new(results, json!({"with": with}), Some(source)))
}

fn involutivity(g: &Global, input: &Input) -> Run<Outcome> {
    let (e, source) = load_plane(input)?;
    let n = e.n() as u32;
    // enough points per axis for the sample floor of the gate
    let mut m = g.grid.max(2);
    while m.pow(n) < INVOLUTIVITY_MIN_SAMPLES {
        m += 1;
    }
    let grid = sweep_box(e.domain())?.grid(m);
    let rep = involutivity_residual(&e, &grid, g.fd_step)?;
    let passed = rep.passes(INVOLUTIVITY_GATE);
    let results = json!({"report": rep, "gate": INVOLUTIVITY_GATE, "passed": passed});
    let mut out = Outcome::new(results, json!({"points_per_axis": m}), Some(source));
    if !passed {
        out.violation = Some(format!(
            "not involutive: residual p99 {:e}, max {:e} (gate {:e})",
            rep.p99_residual, rep.max_residual, INVOLUTIVITY_GATE
        ));
    }
    Ok(out)
}

fn flow(g: &Global, input: &Input, x0: &[f64], t: f64) -> Run<Outcome> {
    let (f, source) = load_field(input)?;
    if x0.len() != f.dim() {
        return Err(Failure::usage(format!("--x0 needs {} coordinates", f.dim())));
    }
    let fm = FlowMap::with_settings(f, flow_settings(g))?;
    let tr = fm.trajectory(x0, t)?;
    let mut csv = Vec::new();
    write_trajectory_csv(&tr, &mut csv).map_err(|e| Failure { code: 3, msg: e.to_string() })?;
    let results = json!({
        "x0": x0, "t": t, "end": tr.end(),
        "accepted_steps": tr.steps.len(), "rejected_steps": tr.rejected,
    });
    let mut out = Outcome::new(results, to_value(fm.settings()), Some(source));
    out.files.push(("trajectory.csv".into(), csv));
    Ok(out)
}

fn distortion(g: &Global, input: &Input, times: &[f64], div_bound: Option<f64>) -> Run<Outcome> {
    let (f, source) = load_field(input)?;
    let domain = f.domain().clone();
    let grid = probe_box(g, &domain)?.grid(g.grid);
    let fm = FlowMap::with_settings(f, flow_settings(g))?;
    // points where the field is singular along some trajectory are skipped
    let mut reports = Vec::new();
    let mut regular = Vec::new();
    let mut skipped = 0;
    'points: for x in &grid {
        let mut here = Vec::new();
        for &t in times {
            match flow_jacobian(&fm, x, t, g.fd_step) {
                Ok(r) => here.push(r),
                Err(e) if e.is_pointwise() => {
                    skipped += 1;
                    continue 'points;
                }
                Err(e) => return Err(e.into()),
            }
        }
        reports.extend(here);
        regular.push(x.clone());
    }
    if regular.is_empty() {
        return Err(Failure { code: 3, msg: "every grid point is singular".into() });
    }
    let grid = regular;
    let profile = qc_growth_profile(&fm, &grid, times)?;
    // without an explicit bound the largest sampled divergence is used, advisory only
    let bound = match div_bound {
        Some(b) => b,
        None => liouville_check(&fm, &sweep_box(&domain)?.grid(g.grid), &[], 0.0)?.sampled_div_sup,
    };
    let liouville = liouville_check(&fm, &grid, times, bound)?;
    let results = json!({
        "reports": reports, "qc_profile": profile, "liouville": liouville,
        "bound_given": div_bound.is_some(), "skipped_points": skipped,
    });
    let mut out = Outcome::new(results, json!({"times": times, "div_bound": div_bound}), Some(source));
    if div_bound.is_some() && !liouville.passed {
        out.violation = Some(format!("{} determinant bound violations", liouville.violations.len()));
    }
    Ok(out)
}

fn commute(g: &Global, input: &Input, with: &Option<String>, times: &[f64]) -> Run<Outcome> {
    let (pairs, fields, source) = field_pairs(input, with)?;
    let (i, j) = pairs[0];
    let grid = probe_box(g, fields[i].domain())?.grid(g.grid);
    let fx = FlowMap::with_settings(fields[i].clone(), flow_settings(g))?;
    let fy = FlowMap::with_settings(fields[j].clone(), flow_settings(g))?;
    let mut table = Vec::new();
    for &s in times {
        for &t in times {
            let d = commutation_defect(&fx, &fy, &grid, s, t)?;
            table.push(json!({"s": s, "t": t, "defect": d}));
        }
    }
    let results = json!({"pair": [i + 1, j + 1], "table": table});
    Ok(Outcome::new(results, json!({"times": times, "with": with}), Some(source)))
}

fn mollify(g: &Global, input: &Input, eps: &[f64], t: f64) -> Run<Outcome> {
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Failure::usage("--eps values must be positive"));
    }
    let (f, source) = load_field(input)?;
    let grid = probe_box(g, f.domain())?.grid(g.grid);
    let seq = mollification_stability(&f, eps, &grid, t, flow_settings(g))?;
    let decreasing = seq.windows(2).all(|w| w[1].error < w[0].error);
    let results = json!({"sequence": seq, "strictly_decreasing": decreasing});
    Ok(Outcome::new(results, json!({"eps": eps, "t": t}), Some(source)))
}

fn chart(
    g: &Global,
    input: &Input,
    p: &Option<Vec<f64>>,
    slices: usize,
    resolution: usize,
    eps0: f64,
) -> Run<Outcome> {
    if slices == 0 || resolution < 2 || !(eps0 > 0.0) {
        return Err(Failure::usage("need --slices >= 1, --resolution >= 2 and --eps0 > 0"));
    }
    let (e, source) = load_plane(input)?;
    let p = p.clone().unwrap_or_else(|| e.domain().center());
    if p.len() != e.n() {
        return Err(Failure::usage(format!("--p needs {} coordinates", e.n())));
    }
    let cfg = ChartConfig {
        eps0,
        flow: flow_settings(g),
        fd_step: g.fd_step,
        ..ChartConfig::default()
    };
    let chart = build_chart(&e, &p, &cfg)?;
    let eps = chart.eps();
    let normals = chart.n() - chart.k();
    let mut out = Outcome::new(Value::Null, to_value(&cfg), Some(source));
    let mut meshes = Vec::new();
    for s in 0..slices {
        // evenly inside (-eps, eps) along the first normal coordinate
        let mut c = vec![0.0; normals];
        if normals > 0 {
            c[0] = eps * (2.0 * (s + 1) as f64 / (slices + 1) as f64 - 1.0);
        }
        let mesh = trace_slice(&chart, &c, resolution)?;
        let name = format!("slice-{}.csv", s + 1);
        let mut csv = Vec::new();
        write_mesh_csv(&mesh, &mut csv).map_err(|e| Failure { code: 3, msg: e.to_string() })?;
        meshes.push(json!({"file": name, "c": c, "max_residual": mesh.max_residual()}));
        out.files.push((name, csv));
    }
    let scfg = SamplingConfig {
        base_points: 64,
        direction_pairs: 128,
        ..sampling(g, e.domain(), 64, 128)
    };
    let mut lifted = Vec::new();
    for (i, x) in chart.lifted().iter().enumerate() {
        lifted.push(json!({
            "index": i + 1,
            "q": estimate_q(x, &scfg)?.value,
            "zygmund": estimate_zygmund(x, &scfg)?.value,
            "lipschitz": estimate_lipschitz(x, &scfg)?.value,
        }));
    }
    out.results = json!({
        "metadata": chart.metadata(),
        "slices": meshes,
        "lifted_seminorms": {"config": scfg, "fields": lifted},
    });
    out.extra = json!({"chart": cfg, "slices": slices, "resolution": resolution});
    Ok(out)
}

fn catalog() -> Outcome {
    let entries: Vec<Value> = CATALOG
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "kind": if e.kind == EntryKind::Field { "field" } else { "plane" },
                "params": e.params,
                "description": e.description,
            })
        })
        .collect();
    for e in CATALOG {
        let name = if e.params.is_empty() {
            e.name.to_string()
        } else {
            format!("{}:{}", e.name, e.params)
        };
        println!("{name:<28} {}", e.description);
    }
    Outcome::new(json!({"entries": entries}), Value::Null, None)
}

fn dispatch(g: &Global, cmd: &Command) -> Run<Outcome> {
    match cmd {
        Command::Seminorm {
            input,
            base_points,
            direction_pairs,
        } => seminorm(g, input, *base_points, *direction_pairs),
        Command::Bracket { input, with } => bracket(g, input, with),
        Command::Involutivity { input } => involutivity(g, input),
        Command::Flow { input, x0, t } => flow(g, input, x0, *t),
        Command::Distortion { input, times, div_bound } => distortion(g, input, times, *div_bound),
        Command::Commute { input, with, times } => commute(g, input, with, times),
        Command::Mollify { input, eps, t } => mollify(g, input, eps, *t),
        Command::Chart {
            input,
            p,
            slices,
            resolution,
            eps0,
        } => chart(g, input, p, *slices, *resolution, *eps0),
        Command::Catalog => Ok(catalog()),
    }
}

fn write_all(dir: &Path, report_name: &str, report: &AnalysisReport, files: &[(String, Vec<u8>)]) -> Run<()> {
    let io = |e: std::io::Error| Failure {
        code: 3,
        msg: format!("cannot write to {}: {e}", dir.display()),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes).map_err(io)?;
    }
    report.write(&dir.join(report_name)).map_err(io)
}

fn run(cli: Cli, argv: Vec<String>) -> Run<u8> {
    let g = &cli.global;
    if !(g.rel_tol > 0.0) || g.grid < 2 || g.grid_radius.is_some_and(|r| !(r > 0.0)) || g.fd_step.is_some_and(|h| !(h > 0.0)) || g.threads == Some(0) {
        return Err(Failure::usage("need --rel-tol > 0, --grid >= 2, --grid-radius > 0, --fd-step > 0 and --threads >= 1"));
    }
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let start = Instant::now();
    let out = dispatch(g, &cli.command)?;
    let report = AnalysisReport {
        command: argv,
        config: RunConfig {
            seed: g.seed,
            rel_tol: g.rel_tol,
            fd_step: g.fd_step,
            grid: g.grid,
            threads: g.threads,
            extra: out.extra,
        },
        source: out.source,
        results: out.results,
        artifacts: out.files.iter().map(|(n, _)| n.clone()).collect(),
        timing: Timing {
            seconds: start.elapsed().as_secs_f64(),
        },
    };
    let report_name = format!("{}.json", cli.command.name());
    write_all(&g.out_dir, &report_name, &report, &out.files)?;
    eprintln!("wrote {}", g.out_dir.join(&report_name).display());
    match out.violation {
        Some(msg) => {
            eprintln!("property violated: {msg}");
            Ok(4)
        }
        None => Ok(0),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli, argv.into_iter().skip(1).collect()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
