//! Command-line front end.
//!
//! Exit codes: 0 success, 1 data or model error, 2 usage error. Diagnostics
//! go to standard error; the run summary goes to standard output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::dataset;
use crate::error::{Error, Result};
use crate::export::{self, json_number, ExportFormat};
use crate::inference;
use crate::model::{self, CanonicalForm, StandardizedModel, Table};
use crate::paths::{self, ShrinkagePath};
use crate::risk::{self, RiskMode};
use crate::svg::{self, RenderOptions};
use crate::trace::{self, TraceBundle, TraceType};

#[derive(Debug, Parser)]
#[command(
    name = "ridge-trace",
    version,
    about = "Efficient generalized ridge shrinkage paths and TRACE diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Efficient two-piece path with all TRACE diagnostics.
    Fit(Common),
    /// q-shape path, for a given q or the best q on a mesh.
    Qm(QmArgs),
    /// Single-predictor shrinkage with the three-slope display.
    Yonx(Common),
    /// Confidence ellipses for a coefficient pair with the efficient path overlaid.
    Ellipse(EllipseArgs),
    /// Canonical-form summary.
    Info(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// CSV file with a header row.
    #[arg(long, conflicts_with = "dataset")]
    data: Option<PathBuf>,
    /// Bundled dataset name (default: portland).
    #[arg(long)]
    dataset: Option<String>,
    /// Response column.
    #[arg(long)]
    y: String,
    /// Comma-separated predictor columns.
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<String>,
    /// Lattice points per unit of m.
    #[arg(long, default_value_t = paths::DEFAULT_STEPS, value_parser = parse_steps)]
    steps: usize,
    /// Bias plug-in used by the risk diagnostics: ml or unbiased.
    #[arg(long, default_value = "ml")]
    mode: RiskMode,
    /// Output directory for traces and plots.
    #[arg(long, default_value = "ridge-trace-out")]
    out: PathBuf,
    /// Export format (csv or json); json also switches the summary to JSON.
    #[arg(long, default_value = "csv")]
    format: ExportFormat,
    /// Also render SVG plots.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Args)]
struct QmArgs {
    #[command(flatten)]
    common: Common,
    /// q-shape value, or `best2` for the optimal shape of a two-predictor model.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "search")]
    q: Option<String>,
    /// Search the default q mesh for the most likely shape.
    #[arg(long)]
    search: bool,
}

#[derive(Debug, Args)]
struct EllipseArgs {
    #[command(flatten)]
    common: Common,
    /// Two predictor names, comma-separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1)]
    pair: Vec<String>,
    /// Confidence levels in (0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.10,0.90")]
    levels: Vec<f64>,
}

fn parse_steps(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if (1..=10_000).contains(&v) => Ok(v),
        _ => Err(format!("`{s}` is not an integer in 1..=10000")),
    }
}

/// Runs the CLI with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing to the given streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(c) => cmd_fit(c, out, err),
        Command::Qm(q) => cmd_qm(q, out, err),
        Command::Yonx(c) => cmd_yonx(c, out, err),
        Command::Ellipse(e) => cmd_ellipse(e, out, err),
        Command::Info(c) => cmd_info(c, out),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Model(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Model(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Model(Error::io("<stdout>", e))
    }
}

type CliResult = std::result::Result<(), CliError>;

struct Loaded {
    model: StandardizedModel,
    cf: CanonicalForm,
}

fn load(c: &Common) -> std::result::Result<Loaded, CliError> {
    let table = match (&c.data, &c.dataset) {
        (Some(path), _) => Table::from_csv_path(path)?,
        (None, name) => {
            let name = name.as_deref().unwrap_or("portland");
            dataset::by_name(name)
                .ok_or_else(|| CliError::Usage(format!("unknown dataset `{name}`")))?
        }
    };
    let xs: Vec<&str> = c.x.iter().map(String::as_str).collect();
    let model = model::standardize(&table, &c.y, &xs)?;
    let cf = model::canonicalize(&model)?;
    Ok(Loaded { model, cf })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn warn_degenerate(path: &ShrinkagePath, cf: &CanonicalForm, err: &mut dyn Write) {
    if path.degenerate_knot {
        let why = if cf.exact_fit {
            "exact fit (R-squared = 1)"
        } else {
            "knot at a path endpoint"
        };
        let _ = writeln!(
            err,
            "warning: degenerate knot at m = {:.4}: {why}; the path is a single straight line",
            path.m_star
        );
    }
}

fn write_outputs(
    c: &Common,
    bundle: &TraceBundle,
    compare: Option<&TraceBundle>,
) -> Result<Vec<PathBuf>> {
    let mut files = export::export_traces(bundle, c.format, &c.out)?;
    if c.svg {
        for t in TraceType::ALL {
            let doc = svg::render_trace(bundle, t, &RenderOptions::default())?;
            files.push(write_svg(&c.out, &format!("{}.svg", t.name()), &doc)?);
        }
        if let Some(other) = compare {
            let opts = RenderOptions {
                compare: Some(other),
                ..Default::default()
            };
            let doc = svg::render_trace(bundle, TraceType::Lr, &opts)?;
            files.push(write_svg(&c.out, "lr_compare.svg", &doc)?);
        }
    }
    Ok(files)
}

fn write_svg(dir: &Path, name: &str, doc: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    export::write_atomic(&path, doc.as_bytes())?;
    Ok(path)
}

fn files_json(files: &[PathBuf]) -> Value {
    Value::Array(
        files
            .iter()
            .map(|f| Value::String(f.display().to_string()))
            .collect(),
    )
}

fn emit_json(out: &mut dyn Write, v: &Value) -> CliResult {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(v).map_err(Error::from)?
    )?;
    Ok(())
}

fn model_line(model: &StandardizedModel) -> String {
    format!(
        "{} ~ {} (n = {}, p = {})",
        model.y_name,
        model.x_names.join(" + "),
        model.n,
        model.p
    )
}

fn cmd_fit(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let Loaded { model, cf } = load(c)?;
    let path = paths::build_efficient_path(&cf, c.steps)?;
    warn_degenerate(&path, &cf, err);
    let bundle = trace::assemble_traces(&cf, &path, c.mode, &model.x_names)?;
    let files = write_outputs(c, &bundle, None)?;
    if c.format == ExportFormat::Json {
        return emit_json(
            out,
            &json!({
                "command": "fit",
                "r2": cf.r2,
                "mStar": path.m_star,
                "deltaStar": path.delta_star,
                "degenerateKnot": path.degenerate_knot,
                "files": files_json(&files),
            }),
        );
    }
    writeln!(out, "efficient path: {}", model_line(&model))?;
    writeln!(out, "R-squared = {:.4}", cf.r2)?;
    writeln!(out, "mStar = {:.4} (m = {:.2})", path.m_star, path.m_star)?;
    writeln!(out, "delta* = {}", fmt_vec(&path.delta_star))?;
    writeln!(out, "wrote {} files to {}", files.len(), c.out.display())?;
    Ok(())
}

fn cmd_qm(a: &QmArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let c = &a.common;
    let Loaded { model, cf } = load(c)?;
    let mut search = None;
    let q = match a.q.as_deref() {
        Some("best2") => risk::q_best_p2(&cf)?,
        Some(s) => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("invalid --q value `{s}`")))?,
        None => {
            let s = risk::q_search(&cf, &risk::default_q_mesh(), c.steps)?;
            search = Some(s);
            s.q_best
        }
    };
    let path = paths::build_qm_path(&cf, q, c.steps)?;
    let bundle = trace::assemble_traces(&cf, &path, c.mode, &model.x_names)?;
    let eff = paths::build_efficient_path(&cf, c.steps)?;
    warn_degenerate(&eff, &cf, err);
    let eff_bundle = trace::assemble_traces(&cf, &eff, c.mode, &model.x_names)?;
    let mut files = write_outputs(c, &bundle, None)?;
    if c.svg {
        let opts = RenderOptions {
            compare: Some(&bundle),
            ..Default::default()
        };
        let doc = svg::render_trace(&eff_bundle, TraceType::Lr, &opts)?;
        files.push(write_svg(&c.out, "lr_compare.svg", &doc)?);
    }
    let lr_min = bundle.lr[path.knot_index.expect("qm knot")];
    if c.format == ExportFormat::Json {
        return emit_json(
            out,
            &json!({
                "command": "qm",
                "q": q,
                "qBest": search.map(|s| s.q_best),
                "mStar": path.m_star,
                "lrMin": json_number(lr_min),
                "deltaStar": path.delta_star,
                "files": files_json(&files),
            }),
        );
    }
    writeln!(out, "q-shape path: {}", model_line(&model))?;
    match (a.q.as_deref(), search) {
        (Some("best2"), _) => writeln!(out, "Q = {q:.4}")?,
        (_, Some(s)) => writeln!(
            out,
            "qBest = {} (mesh minimum -2 log LR = {:.4})",
            s.q_best, s.lr_min
        )?,
        _ => writeln!(out, "Q = {q}")?,
    }
    writeln!(
        out,
        "mStar = {:.4} (lattice minimum of -2 log LR = {:.4})",
        path.m_star, lr_min
    )?;
    writeln!(out, "delta at mStar = {}", fmt_vec(&path.delta_star))?;
    writeln!(out, "wrote {} files to {}", files.len(), c.out.display())?;
    Ok(())
}

fn cmd_yonx(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let Loaded { model, cf } = load(c)?;
    let path = paths::build_yonx_path(&model, c.steps)?;
    warn_degenerate(&path, &cf, err);
    let bundle = trace::assemble_traces(&cf, &path, c.mode, &model.x_names)?;
    let mut files = write_outputs(c, &bundle, None)?;
    if c.svg {
        files.push(write_svg(
            &c.out,
            "yonx.svg",
            &svg::render_yonx(&model, &path)?,
        )?);
    }
    let slopes = path.display_slopes.expect("yonx slopes");
    if c.format == ExportFormat::Json {
        return emit_json(
            out,
            &json!({
                "command": "yonx",
                "mStar": path.m_star,
                "deltaStar": path.delta_star,
                "slopes": {"ols": slopes[0], "minMse": slopes[1], "double": slopes[2]},
                "files": files_json(&files),
            }),
        );
    }
    writeln!(out, "YonX: {}", model_line(&model))?;
    writeln!(
        out,
        "mStar = {:.4} (delta* = {:.4})",
        path.m_star, path.delta_star[0]
    )?;
    writeln!(
        out,
        "slopes (original units): OLS {:.4}, minimum MSE {:.4}, double shrunk {:.4}",
        slopes[0], slopes[1], slopes[2]
    )?;
    writeln!(out, "wrote {} files to {}", files.len(), c.out.display())?;
    Ok(())
}

fn cmd_ellipse(a: &EllipseArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let c = &a.common;
    if a.pair.len() != 2 {
        return Err(CliError::Usage(format!(
            "--pair needs exactly two names, got {}",
            a.pair.len()
        )));
    }
    if let Some(bad) = a.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(CliError::Usage(format!(
            "confidence level {bad} is outside (0, 1)"
        )));
    }
    let Loaded { model, cf } = load(c)?;
    let index =
        |name: &str| {
            model.x_names.iter().position(|n| n == name).ok_or_else(|| {
                CliError::Usage(format!("`{name}` is not one of the --x predictors"))
            })
        };
    let (i, j) = (index(&a.pair[0])?, index(&a.pair[1])?);
    let path = paths::build_efficient_path(&cf, c.steps)?;
    warn_degenerate(&path, &cf, err);
    let spec =
        inference::confidence_ellipse(&cf, i, j, &a.levels, &path, (&a.pair[0], &a.pair[1]))?;
    std::fs::create_dir_all(&c.out).map_err(|e| Error::io(&c.out, e))?;
    let json_path = c.out.join("ellipse.json");
    export::write_atomic(
        &json_path,
        serde_json::to_string_pretty(&spec)
            .map_err(Error::from)?
            .as_bytes(),
    )?;
    let mut files = vec![json_path];
    if c.svg {
        files.push(write_svg(
            &c.out,
            "ellipse.svg",
            &svg::render_ellipse(&spec),
        )?);
    }
    let origin: Vec<bool> = (0..spec.levels.len())
        .map(|k| spec.contains(k, [0.0, 0.0]))
        .collect();
    if c.format == ExportFormat::Json {
        return emit_json(
            out,
            &json!({
                "command": "ellipse",
                "pair": [a.pair[0], a.pair[1]],
                "center": spec.center,
                "levels": spec.levels,
                "originInside": origin,
                "files": files_json(&files),
            }),
        );
    }
    writeln!(
        out,
        "ellipses for ({}, {}): {}",
        a.pair[0],
        a.pair[1],
        model_line(&model)
    )?;
    writeln!(
        out,
        "center = ({:.4}, {:.4})",
        spec.center[0], spec.center[1]
    )?;
    for (level, inside) in spec.levels.iter().zip(origin) {
        writeln!(
            out,
            "{:>5.1}% region: origin {}",
            level * 100.0,
            if inside { "inside" } else { "outside" }
        )?;
    }
    writeln!(out, "wrote {} files to {}", files.len(), c.out.display())?;
    Ok(())
}

fn cmd_info(c: &Common, out: &mut dyn Write) -> CliResult {
    let Loaded { model, cf } = load(c)?;
    let (beta, intercept) = model::back_transform(&model, &cf.beta_ols)?;
    let dstar = risk::delta_knot(&cf);
    if c.format == ExportFormat::Json {
        return emit_json(
            out,
            &json!({
                "command": "info",
                "n": cf.n,
                "p": cf.p,
                "canonical": serde_json::to_value(&cf).map_err(Error::from)?,
                "deltaStar": dstar,
                "betaOriginal": beta,
                "intercept": intercept,
            }),
        );
    }
    writeln!(out, "{}", model_line(&model))?;
    writeln!(out, "R-squared = {:.6}", cf.r2)?;
    writeln!(
        out,
        "sigma2 (ML) = {:.6}, sigma2 (unbiased) = {:.6}",
        cf.sigma2_ml, cf.sigma2_unb
    )?;
    writeln!(
        out,
        "{:>4} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "j", "lambda", "rho", "c", "F", "delta*"
    )?;
    for (j, d) in dstar.iter().enumerate() {
        writeln!(
            out,
            "{:>4} {:>12.6} {:>12.6} {:>12.6} {:>12.4} {:>10.4}",
            j + 1,
            cf.lambda[j],
            cf.rho[j],
            cf.c[j],
            cf.f_ratios[j],
            d
        )?;
    }
    writeln!(out, "OLS coefficients:")?;
    for (k, name) in model.x_names.iter().enumerate() {
        writeln!(
            out,
            "  {name:<12} standardized {:>10.6}   original {:>12.6}",
            cf.beta_ols[k], beta[k]
        )?;
    }
    writeln!(out, "  intercept (original) {intercept:.6}")?;
    Ok(())
}
