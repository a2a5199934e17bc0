//! Command-line front end.
//!
//! Exit codes: 0 pass, 2 check or probe failure, 3 configuration error,
//! 4 indeterminate probe. JSON and CSV output are stable; text is not.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chentype::{
    self, classify_expected, random_samples, Agreement, ProbeConfig, TypeProbeResult, Verdict,
};
use crate::geometry::{
    frame_with, value_vec, Field, FormKind, FrameData, GeometryConfig, GeometryError,
};
use crate::identities::{self, GridSpec, IdentityConfig, IdentityReport};
use crate::oracle::{cross_validate, CrossReport, FdConfig};
use crate::surfaces::{catalog_listing, catalog_names, parse_selector, SurfaceSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INDETERMINATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "beltrami",
    version,
    about = "Fundamental forms, Beltrami operators and finite-type probes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Surface selector, e.g. `sphere:r=2` or `parallel:catenoid:rho=0.5`.
    #[arg(long, short)]
    pub surface: String,
    /// Restrict the parameter box: `u0:u1,v0:v1`.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub eps_k: Option<f64>,
    /// Treat II as an indefinite metric where K < 0.
    #[arg(long)]
    pub indefinite_second_form: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog surfaces with parameters and expected types.
    Catalog,
    /// Fundamental forms, curvatures and Christoffel traces at a point.
    Forms {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// `u,v`
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Run the identity suite on a grid.
    Identities {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// `NxM`
        #[arg(long, default_value = "20x20")]
        grid: String,
        #[arg(long, default_value_t = 5)]
        order: usize,
        #[arg(long, default_value_t = 1e-8)]
        eps_id: f64,
        /// Comma-separated check ids; all when omitted.
        #[arg(long)]
        checks: Option<String>,
        /// Offset of the synthesized parallel partner.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Fit the minimal polynomial of Δ^J on the position or normal field.
    Probe {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value = "III")]
        form: FormKind,
        #[arg(long, default_value = "position")]
        field: Field,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-7)]
        eps_type: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps_root: f64,
        /// Largest trusted condition number of the scaled fit.
        #[arg(long, default_value_t = 1e10)]
        cond_max: f64,
    },
    /// Cross-validate jet geometry against finite differences.
    Verify {
        #[arg(long, required = true)]
        cross: bool,
        /// Surface selector; every catalog surface when omitted.
        #[arg(long, short)]
        surface: Option<String>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
        /// Base finite-difference step as a fraction of the narrower domain side.
        #[arg(long, default_value_t = 1e-3)]
        rel_step: f64,
    },
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

struct Output {
    body: String,
    code: i32,
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(out) => match emit(cli, &out.body) {
            Ok(()) => out.code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
        Err(ConfigError(msg)) => {
            if cli.format == Format::Json {
                let body = json(
                    &serde_json::json!({ "error": { "kind": "ConfigError", "message": msg } }),
                );
                let _ = emit(cli, &body);
            }
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
    }
}

fn emit(cli: &Cli, body: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn execute(cli: &Cli) -> Result<Output, ConfigError> {
    match &cli.command {
        Command::Catalog => Ok(catalog(cli.format)),
        Command::Forms { surface, point } => forms(cli.format, surface, point),
        Command::Identities {
            surface,
            grid,
            order,
            eps_id,
            checks,
            rho,
        } => {
            let (spec, geometry) = load_surface(surface)?;
            let (nu, nv) = parse_grid(grid)?;
            if *eps_id <= 0.0 {
                return Err(ConfigError("eps-id must be positive".into()));
            }
            if *order < 2 {
                return Err(ConfigError("order must be at least 2".into()));
            }
            let checks = checks
                .as_ref()
                .map(|list| {
                    list.split(',')
                        .map(|id| {
                            identities::lookup(id.trim())
                                .map(|c| c.id.to_string())
                                .ok_or_else(|| ConfigError(format!("unknown check `{id}`")))
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            let cfg = IdentityConfig {
                order: *order,
                eps_id: *eps_id,
                checks,
                geometry,
                parallel_offset: *rho,
                ..IdentityConfig::default()
            };
            let report = identities::run_identities(&spec, &GridSpec::over(&spec, nu, nv), &cfg);
            let code = if report.all_pass() {
                EXIT_OK
            } else {
                EXIT_FAIL
            };
            let body = match cli.format {
                Format::Json => json(&report),
                Format::Csv => {
                    csv_string(|w| identities::write_csv(std::slice::from_ref(&report), w))?
                }
                Format::Text => identities_text(&report),
            };
            Ok(Output { body, code })
        }
        Command::Probe {
            surface,
            form,
            field,
            kmax,
            samples,
            seed,
            eps_type,
            eps_root,
            cond_max,
        } => {
            let (spec, geometry) = load_surface(surface)?;
            if *eps_type <= 0.0 || *eps_root <= 0.0 || *cond_max <= 0.0 {
                return Err(ConfigError("tolerances must be positive".into()));
            }
            let cfg = ProbeConfig {
                k_max: *kmax,
                eps_type: *eps_type,
                eps_root: *eps_root,
                cond_max: *cond_max,
                geometry,
            };
            let pts = random_samples(&spec, *samples, *seed);
            let result = chentype::probe(&spec, *form, *field, &pts, &cfg)?;
            let agreement = classify_expected(&result, spec.expected());
            let code = match (&result.verdict, &agreement) {
                (Verdict::Indeterminate(_), _) => EXIT_INDETERMINATE,
                (_, Some(a)) if !a.agrees => EXIT_FAIL,
                _ => EXIT_OK,
            };
            let out = ProbeOutput {
                result,
                seed: *seed,
                expected: agreement,
            };
            let body = match cli.format {
                Format::Json => json(&out),
                Format::Csv => probe_csv(&out)?,
                Format::Text => probe_text(&out),
            };
            Ok(Output { body, code })
        }
        Command::Verify {
            cross: _,
            surface,
            samples,
            seed,
            tolerance,
            rel_step,
        } => {
            let surfaces: Vec<SurfaceSpec> = match surface {
                Some(sel) => vec![parse_selector(sel)?],
                None => catalog_names()
                    .into_iter()
                    .map(parse_selector)
                    .collect::<Result<_, _>>()?,
            };
            let mut reports = Vec::new();
            for s in &surfaces {
                let pts = random_samples(s, *samples, *seed);
                reports.push(cross_validate(
                    s,
                    &pts,
                    &FdConfig::for_surface(s, *rel_step),
                    *tolerance,
                )?);
            }
            let code = if reports.iter().all(|r| r.pass) {
                EXIT_OK
            } else {
                EXIT_FAIL
            };
            let body = match cli.format {
                Format::Json => json(&CrossOutput {
                    schema_version: 1,
                    seed: *seed,
                    reports: &reports,
                }),
                Format::Csv => cross_csv(&reports)?,
                Format::Text => cross_text(&reports),
            };
            Ok(Output { body, code })
        }
    }
}

fn load_surface(args: &SurfaceArgs) -> Result<(SurfaceSpec, GeometryConfig), ConfigError> {
    let mut spec = parse_selector(&args.surface)?;
    if let Some(d) = &args.domain {
        let box_ = parse_domain(d)?;
        let [(u0, u1), (v0, v1)] = box_;
        if !(spec.contains([u0, v0]) && spec.contains([u1, v1])) {
            return Err(ConfigError(format!(
                "domain {d} is not inside the surface domain {:?}",
                spec.domain()
            )));
        }
        spec = spec.with_domain(box_);
    }
    let mut geometry = GeometryConfig::default();
    if let Some(k) = args.eps_k {
        if k <= 0.0 {
            return Err(ConfigError("eps-k must be positive".into()));
        }
        geometry.eps_k = k;
    }
    geometry.indefinite_second_form = args.indefinite_second_form;
    Ok((spec, geometry))
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), ConfigError> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| ConfigError(format!("grid `{s}` is not of the form NxM")))?;
    let n: usize = a.trim().parse()?;
    let m: usize = b.trim().parse()?;
    if n < 2 || m < 2 {
        return Err(ConfigError(format!("grid {n}x{m} is smaller than 2x2")));
    }
    Ok((n, m))
}

pub fn parse_point(s: &str) -> Result<[f64; 2], ConfigError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| ConfigError(format!("point `{s}` is not of the form u,v")))?;
    Ok([a.trim().parse()?, b.trim().parse()?])
}

/// `u0:u1,v0:v1`
pub fn parse_domain(s: &str) -> Result<[(f64, f64); 2], ConfigError> {
    let bad = || ConfigError(format!("domain `{s}` is not of the form u0:u1,v0:v1"));
    let (u, v) = s.split_once(',').ok_or_else(bad)?;
    let interval = |t: &str| -> Result<(f64, f64), ConfigError> {
        let (lo, hi) = t.split_once(':').ok_or_else(bad)?;
        let (lo, hi): (f64, f64) = (lo.trim().parse()?, hi.trim().parse()?);
        if lo < hi {
            Ok((lo, hi))
        } else {
            Err(bad())
        }
    };
    Ok([interval(u)?, interval(v)?])
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<String, ConfigError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn catalog(format: Format) -> Output {
    let entries = catalog_listing();
    let body = match format {
        Format::Json => json(&serde_json::json!({ "schema_version": 1, "surfaces": entries })),
        Format::Csv => {
            let mut s =
                String::from("name,params,variants,domain_u0,domain_u1,domain_v0,domain_v1\n");
            for e in &entries {
                let params: Vec<String> = e
                    .params
                    .iter()
                    .map(|p| format!("{}={}", p.name, p.default))
                    .collect();
                let [(u0, u1), (v0, v1)] = e.domain;
                let _ = writeln!(
                    s,
                    "{},\"{}\",\"{}\",{u0},{u1},{v0},{v1}",
                    e.name,
                    params.join(";"),
                    e.variants.join(";")
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for e in &entries {
                let params: Vec<String> = e
                    .params
                    .iter()
                    .map(|p| format!("{}={}", p.name, p.default))
                    .collect();
                let _ = writeln!(s, "{}  [{}]", e.name, params.join(", "));
                if !e.variants.is_empty() {
                    let _ = writeln!(s, "  variants: {}", e.variants.join(", "));
                }
                let [(u0, u1), (v0, v1)] = e.domain;
                let _ = writeln!(
                    s,
                    "  domain: u in ({u0:.4}, {u1:.4}), v in ({v0:.4}, {v1:.4})"
                );
                if e.expected.is_minimal {
                    let _ = writeln!(s, "  minimal");
                }
                for t in &e.expected.types {
                    let _ = writeln!(
                        s,
                        "  expected {} {}: {}",
                        t.form,
                        field_name(t.field),
                        outcome_text(&t.outcome)
                    );
                }
            }
            s
        }
    };
    Output {
        body,
        code: EXIT_OK,
    }
}

fn field_name(f: Field) -> &'static str {
    match f {
        Field::Position => "position",
        Field::Normal => "normal",
    }
}

fn outcome_text(o: &crate::surfaces::ExpectedOutcome) -> String {
    use crate::surfaces::ExpectedOutcome::*;
    match o {
        Typed {
            degree,
            eigenvalues,
        } => format!("type {degree}, eigenvalues {eigenvalues:?}"),
        TypedEither { degrees } => format!("type {} or {}", degrees[0], degrees[1]),
        NotTyped { up_to } => format!("not of type <= {up_to}"),
    }
}

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
}

impl From<&GeometryError> for ErrorBody {
    fn from(e: &GeometryError) -> Self {
        ErrorBody {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Section {
    Ok {
        matrix: [[f64; 2]; 2],
        inverse: Option<[[f64; 2]; 2]>,
        christoffel_trace: [f64; 2],
    },
    Error(ErrorBody),
}

#[derive(Serialize)]
struct FormsReport {
    schema_version: u32,
    surface: String,
    point: [f64; 2],
    x: [f64; 3],
    n: [f64; 3],
    mean: f64,
    gauss: f64,
    #[serde(rename = "I")]
    first: Section,
    #[serde(rename = "II")]
    second: Section,
    #[serde(rename = "III")]
    third: Section,
}

fn section(frame: &FrameData, form: FormKind) -> Section {
    match frame.christoffel_trace(form) {
        Ok(trace) => {
            let f = frame.form(form);
            Section::Ok {
                matrix: f.values(),
                inverse: f.inverse_values(),
                christoffel_trace: trace,
            }
        }
        Err(e) => Section::Error((&e).into()),
    }
}

fn forms(format: Format, args: &SurfaceArgs, point: &str) -> Result<Output, ConfigError> {
    let (spec, geometry) = load_surface(args)?;
    let pt = parse_point(point)?;
    let frame = match frame_with(&spec, pt, 0, &geometry) {
        Ok(f) => f,
        Err(e) => {
            let err = serde_json::json!({ "schema_version": 1, "surface": spec.label(), "point": pt, "error": ErrorBody::from(&e) });
            return Ok(Output {
                body: match format {
                    Format::Text => format!("error: {e}\n"),
                    _ => json(&err),
                },
                code: EXIT_CONFIG,
            });
        }
    };
    let report = FormsReport {
        schema_version: 1,
        surface: spec.label().to_string(),
        point: pt,
        x: value_vec(&frame.x),
        n: value_vec(&frame.n),
        mean: frame.mean.value(),
        gauss: frame.gauss.value(),
        first: section(&frame, FormKind::I),
        second: section(&frame, FormKind::II),
        third: section(&frame, FormKind::III),
    };
    let sections = [&report.first, &report.second, &report.third];
    let code = if sections.iter().any(|s| matches!(s, Section::Error(_))) {
        EXIT_FAIL
    } else {
        EXIT_OK
    };
    let body = match format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            let _ = writeln!(s, "H,{}", report.mean);
            let _ = writeln!(s, "K,{}", report.gauss);
            for (name, sec) in ["I", "II", "III"].iter().zip(sections) {
                if let Section::Ok { matrix, .. } = sec {
                    let _ = writeln!(
                        s,
                        "{name}_11,{}\n{name}_12,{}\n{name}_22,{}",
                        matrix[0][0], matrix[0][1], matrix[1][1]
                    );
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "{} at ({}, {})", report.surface, pt[0], pt[1]);
            let _ = writeln!(s, "x = {:?}\nn = {:?}", report.x, report.n);
            let _ = writeln!(s, "H = {:.12}\nK = {:.12}", report.mean, report.gauss);
            for (name, sec) in ["I", "II", "III"].iter().zip(sections) {
                match sec {
                    Section::Ok {
                        matrix,
                        christoffel_trace,
                        ..
                    } => {
                        let _ = writeln!(s, "{name}: {matrix:?}  trace {christoffel_trace:?}");
                    }
                    Section::Error(e) => {
                        let _ = writeln!(s, "{name}: {}: {}", e.kind, e.message);
                    }
                }
            }
            s
        }
    };
    Ok(Output { body, code })
}

fn identities_text(r: &IdentityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}  grid {}x{}  order {}  eps_id {:e}",
        r.surface, r.grid.nu, r.grid.nv, r.order, r.eps_id
    );
    for c in &r.checks {
        let res = c
            .max_residual
            .map(|m| format!("{m:.3e}"))
            .unwrap_or_else(|| "-".into());
        let _ = write!(
            s,
            "{} {:<5} {:>10}  {}",
            c.id,
            c.verdict.to_string(),
            res,
            c.description
        );
        if let Some(reason) = c.reason.as_ref().filter(|_| c.evaluated == 0) {
            let _ = write!(s, "  ({reason})");
        }
        s.push('\n');
    }
    let m = &r.summary;
    let _ = writeln!(
        s,
        "passed {} failed {} skipped {} n/a {}",
        m.passed, m.failed, m.skipped, m.not_applicable
    );
    s
}

#[derive(Serialize)]
struct ProbeOutput {
    #[serde(flatten)]
    result: TypeProbeResult,
    seed: u64,
    expected: Option<Agreement>,
}

fn probe_csv(out: &ProbeOutput) -> Result<String, ConfigError> {
    let r = &out.result;
    csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record([
            "surface",
            "form",
            "field",
            "degree",
            "verdict",
            "residual",
            "eigenvalues",
            "center",
            "null_type",
        ])?;
        let eig: Vec<String> = r
            .eigenvalues
            .iter()
            .map(|e| format!("{}{:+}i", e[0], e[1]))
            .collect();
        let center = r
            .center
            .map(|c| format!("{};{};{}", c[0], c[1], c[2]))
            .unwrap_or_default();
        w.write_record([
            r.surface.clone(),
            r.form.to_string(),
            field_name(r.field).into(),
            r.degree.map(|d| d.to_string()).unwrap_or_default(),
            r.verdict.to_string(),
            r.residual.map(|x| x.to_string()).unwrap_or_default(),
            eig.join(";"),
            center,
            r.null_type.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    })
}

fn probe_text(out: &ProbeOutput) -> String {
    let r = &out.result;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}  J = {}  field {}",
        r.surface,
        r.form,
        field_name(r.field)
    );
    let _ = writeln!(s, "verdict {}", r.verdict);
    if !r.eigenvalues.is_empty() {
        let _ = writeln!(s, "eigenvalues {:?}", r.real_eigenvalues());
    }
    if let Some(c) = r.center {
        let _ = writeln!(s, "center {c:?}");
    }
    if r.null_type {
        let _ = writeln!(s, "null type");
    }
    for (k, (res, cond)) in r
        .residuals_by_degree
        .iter()
        .zip(&r.condition_numbers)
        .enumerate()
    {
        let _ = writeln!(s, "  degree {}: residual {res:.3e}  cond {cond:.3e}", k + 1);
    }
    let _ = writeln!(
        s,
        "samples {} used, {} skipped",
        r.samples_used, r.samples_skipped
    );
    if let Some(a) = &out.expected {
        let _ = writeln!(
            s,
            "expected {}: {}",
            outcome_text(&a.expected),
            if a.agrees { "agrees" } else { "MISMATCH" }
        );
    }
    s
}

#[derive(Serialize)]
struct CrossOutput<'a> {
    schema_version: u32,
    seed: u64,
    reports: &'a [CrossReport],
}

fn cross_csv(reports: &[CrossReport]) -> Result<String, ConfigError> {
    csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["surface", "u", "v", "quantity", "jet", "fd", "rel_error"])?;
        for r in reports {
            for row in &r.rows {
                w.write_record([
                    r.surface.clone(),
                    row.point[0].to_string(),
                    row.point[1].to_string(),
                    row.quantity.to_string(),
                    row.jet.to_string(),
                    row.fd.to_string(),
                    row.rel_error.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    })
}

fn cross_text(reports: &[CrossReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(
            s,
            "{:<40} {} max rel error {:.3e} (tol {:e}, {} values)",
            r.surface,
            if r.pass { "PASS" } else { "FAIL" },
            r.max_rel_error,
            r.tolerance,
            r.rows.len()
        );
    }
    s
}
