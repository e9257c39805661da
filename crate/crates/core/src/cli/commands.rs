use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use gsqc::detection::DetectionReport;
use gsqc::eigensolve::solve;
use gsqc::hamiltonian::assemble_with;
use gsqc::lattice::Program;
use gsqc::semantics::{run_program_with, LogicalState};
use gsqc::sweep::{
    detect_scan, expand_grid, fit_groups, gap_scan as scan, FitLine, GridPoint, Layout,
    RangeField, SweepOptions, SweepSpec,
};
use gsqc::verify::{run_suite, VerifyOptions};
use gsqc::{Error, Result};

use super::{Config, Format, GridArgs};

/// Amplitudes below this magnitude are left out of `run` output.
const SUPPORT_THRESHOLD: f64 = 1e-9;

pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn amplitude(z: Complex64) -> Value {
    if z.im.abs() < 1e-12 {
        json!(round12(z.re))
    } else {
        json!([round12(z.re), round12(z.im)])
    }
}

fn support(state: &LogicalState) -> Value {
    Value::Array(
        state
            .support(SUPPORT_THRESHOLD)
            .into_iter()
            .map(|(label, z)| json!([label, amplitude(z)]))
            .collect(),
    )
}

pub fn run(path: &Path, config: &Config, out: Option<&Path>) -> Result<i32> {
    if config.format == Some(Format::Csv) {
        return Err(Error::Validation("run writes JSON only".into()));
    }
    let program = Program::load(path)?;
    let opts = config.solver(program.epsilon, config.k.max(2));
    let r = run_program_with(&program, &opts)?;
    let input: String = r.input.iter().map(|b| char::from(b'0' + b)).collect();
    let d = &r.diagnostics;
    let doc = json!({
        "input": input,
        "output": support(&r.output),
        "reference": support(&r.reference),
        "fidelity": d.fidelity,
        "residual": d.residual,
        "ground_energy": d.ground_energy,
        "gap": d.gap,
        "dimension": d.dimension,
        "method": d.method,
        "matvecs": d.matvecs,
        "detection": detection_json(&r.detection),
    });
    emit(out, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(0)
}

fn detection_json(d: &DetectionReport) -> Value {
    serde_json::to_value(d).unwrap_or(Value::Null)
}

fn grid(args: &GridArgs, default_beta: &str, config: &Config) -> Result<Vec<GridPoint>> {
    let spec = match &args.spec {
        Some(path) => SweepSpec::from_json(&std::fs::read_to_string(path)?)?,
        None => {
            let n = args
                .n
                .clone()
                .ok_or_else(|| Error::Validation("--n or --spec is required".into()))?;
            let layouts = args
                .layout
                .as_deref()
                .unwrap_or("free")
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<Layout>>>()?;
            let beta = args
                .beta
                .as_deref()
                .unwrap_or(default_beta)
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<_>>>()?;
            let m = args.m.clone().unwrap_or_else(|| {
                if layouts.iter().all(|l| *l == Layout::Free) { "1" } else { "2" }.to_string()
            });
            SweepSpec {
                n: RangeField::Text(n),
                m: RangeField::Text(m),
                layouts,
                beta,
                epsilon: 1.0,
            }
        }
    };
    expand_grid(&spec, config.dimension_cap)
}

fn sweep_options(config: &Config) -> SweepOptions {
    SweepOptions {
        k: config.k,
        solver: config.relative_solver(),
        assemble: config.assemble(),
        timing: config.timing,
    }
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

fn fit_footer(fits: &[FitLine]) -> String {
    let mut s = String::new();
    for f in fits {
        let _ = write!(s, "# fit m={} layout={} beta={} samples={}", f.m, f.layout, f.beta, f.samples);
        match (&f.fit, &f.note) {
            (Some(fit), _) => {
                let _ = writeln!(
                    s,
                    " exponent={:.6} constant={:.6} max_log_residual={:.3e}",
                    fit.exponent, fit.constant, fit.residual
                );
            }
            (None, note) => {
                let _ = writeln!(s, " skipped ({})", note.as_deref().unwrap_or("no data"));
            }
        }
    }
    s
}

fn finish(ok_rows: usize, text: String, out: Option<&Path>) -> Result<i32> {
    emit(out, &text)?;
    if ok_rows == 0 {
        eprintln!("error: every grid point failed");
        return Ok(3);
    }
    Ok(0)
}

pub fn gap_scan(args: &GridArgs, config: &Config, out: Option<&Path>) -> Result<i32> {
    let points = grid(args, "1", config)?;
    let rows = scan(&points, &sweep_options(config));
    let fits = fit_groups(&rows);
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    let text = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_text(&rows)? + &fit_footer(&fits),
        Format::Json => serde_json::to_string_pretty(&json!({ "rows": rows, "fits": fits }))? + "\n",
    };
    finish(ok, text, out)
}

pub fn detect(args: &GridArgs, config: &Config, out: Option<&Path>) -> Result<i32> {
    let points = grid(args, "1,auto", config)?;
    let rows = detect_scan(&points, &sweep_options(config));
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    let text = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_text(&rows)?,
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    finish(ok, text, out)
}

#[derive(Serialize)]
struct Level {
    index: usize,
    energy: f64,
}

pub fn spectrum(
    path: &Path,
    matrix: Option<&Path>,
    config: &Config,
    out: Option<&Path>,
) -> Result<i32> {
    let program = Program::load(path)?;
    let (_, h) = assemble_with(&program, &config.assemble())?;
    if let Some(m) = matrix {
        let file = std::io::BufWriter::new(std::fs::File::create(m)?);
        h.write_coordinate(file)?;
    }
    let k = if config.k == 0 { 8 } else { config.k }.min(h.dim());
    let res = solve(&h, &config.solver(program.epsilon, k))?;
    let levels: Vec<Level> = res
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(index, &energy)| Level { index, energy })
        .collect();
    let text = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_text(&levels)?,
        Format::Json => {
            serde_json::to_string_pretty(&json!({
                "eigenvalues": res.eigenvalues,
                "ground_dim": res.ground_manifold_dim,
                "gap": res.gap,
                "dimension": h.dim(),
                "method": res.method,
                "matvecs": res.matvecs,
            }))? + "\n"
        }
    };
    emit(out, &text)?;
    Ok(0)
}

pub fn verify(inject_fault: bool, config: &Config, out: Option<&Path>) -> Result<i32> {
    let mut opts = VerifyOptions {
        solver: config.solver(1.0, 1),
        assemble: config.assemble(),
    };
    if inject_fault {
        opts.assemble.two_body_penalty_scale = 0.5;
    }
    let outcomes = run_suite(&opts);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let text = match config.format {
        Some(Format::Json) => serde_json::to_string_pretty(&outcomes)? + "\n",
        _ => {
            let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
            let mut s = String::new();
            for o in &outcomes {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "{tag}  {:width$}  {}", o.name, o.detail);
            }
            let _ = writeln!(s, "{} of {} checks passed", outcomes.len() - failed, outcomes.len());
            s
        }
    };
    emit(out, &text)?;
    for o in outcomes.iter().filter(|o| !o.passed) {
        eprintln!("error: invariant failed: {}", o.name);
    }
    Ok(if failed == 0 { 0 } else { 1 })
}
