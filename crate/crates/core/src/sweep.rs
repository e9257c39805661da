//! Parameter sweeps over `(N, M, β, layout)` grids: gap scans and
//! detection scans. Points run in parallel; rows come back in grid order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{scaling_fit, upper_bound, ScalingFit};
use crate::detection::{choose_beta, detection_probability, predicted_probability};
use crate::eigensolve::{solve, solve_with_gap, Method, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble_with, AssembleOptions};
use crate::lattice::Program;

/// Two-body gate placement applied to each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Layout {
    /// No gates at all.
    Free,
    /// CNOT 0 -> 1 at row `ceil(N/2)`.
    CnotMid,
    /// CNOT 0 -> 1 at a fixed row.
    CnotAt(usize),
    /// One grid point per admissible row `j = 1..=N`.
    CnotEach,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "free" => Ok(Layout::Free),
            "cnot-mid" => Ok(Layout::CnotMid),
            "cnot-each" => Ok(Layout::CnotEach),
            other => other
                .strip_prefix("cnot:")
                .and_then(|j| j.parse().ok())
                .filter(|&j: &usize| j >= 1)
                .map(Layout::CnotAt)
                .ok_or_else(|| {
                    Error::Validation(format!(
                        "unknown layout {other:?}; expected free, cnot-mid, cnot-each or cnot:J"
                    ))
                }),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layout::Free => f.write_str("free"),
            Layout::CnotMid => f.write_str("cnot-mid"),
            Layout::CnotAt(j) => write!(f, "cnot:{j}"),
            Layout::CnotEach => f.write_str("cnot-each"),
        }
    }
}

impl Serialize for Layout {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Layout {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A `β` entry; `Auto` resolves to `1/sqrt(MN)` per grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaChoice {
    Value(f64),
    Auto,
}

impl FromStr for BetaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "auto" {
            return Ok(BetaChoice::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Validation(format!("beta {s:?} is not a number")))?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("beta must lie in (0, 1], got {v}")));
        }
        Ok(BetaChoice::Value(v))
    }
}

impl Serialize for BetaChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BetaChoice::Value(v) => s.serialize_f64(*v),
            BetaChoice::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for BetaChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(v) => v.to_string(),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `"2-12,15"` into `[2, 3, ..., 12, 15]`, keeping first occurrences.
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Validation(format!("bad range element {part:?}"));
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (
                a.trim().parse::<usize>().map_err(|_| bad())?,
                b.trim().parse::<usize>().map_err(|_| bad())?,
            ),
            None => {
                let v = part.parse::<usize>().map_err(|_| bad())?;
                (v, v)
            }
        };
        for v in lo..=hi {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Validation(format!("range {text:?} is empty")));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeField {
    Text(String),
    List(Vec<usize>),
}

impl RangeField {
    pub fn values(&self) -> Result<Vec<usize>> {
        match self {
            RangeField::Text(t) => parse_range(t),
            RangeField::List(v) if v.is_empty() => {
                Err(Error::Validation("range list is empty".into()))
            }
            RangeField::List(v) => Ok(v.clone()),
        }
    }
}

/// Grid description, also readable from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: RangeField,
    pub m: RangeField,
    #[serde(default = "default_layouts")]
    pub layouts: Vec<Layout>,
    #[serde(default = "default_betas")]
    pub beta: Vec<BetaChoice>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_layouts() -> Vec<Layout> {
    vec![Layout::Free]
}

fn default_betas() -> Vec<BetaChoice> {
    vec![BetaChoice::Value(1.0)]
}

fn default_epsilon() -> f64 {
    1.0
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("sweep spec: {e}")))
    }
}

/// One concrete program of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub num_steps: usize,
    pub num_qubits: usize,
    pub beta: f64,
    /// Resolved layout; `CnotMid` and `CnotEach` become `CnotAt`.
    pub layout: Layout,
    /// Layout as requested, used to group rows for fitting.
    pub family: Layout,
    pub program: Program,
}

fn layout_program(m: usize, n: usize, layout: Layout, eps: f64) -> Result<Program> {
    let p = Program::new(m, n).with_epsilon(eps);
    let p = match layout {
        Layout::Free => p,
        Layout::CnotAt(j) => p.cnot(0, 1, j),
        Layout::CnotMid | Layout::CnotEach => unreachable!("resolved before building"),
    };
    p.validate()?;
    Ok(p)
}

/// Expands the spec in `N`-major order, then `M`, layout and `β`.
/// Every point must validate and fit under `dimension_cap`.
pub fn expand_grid(spec: &SweepSpec, dimension_cap: usize) -> Result<Vec<GridPoint>> {
    if !(spec.epsilon.is_finite() && spec.epsilon > 0.0) {
        return Err(Error::Validation(format!(
            "epsilon must be positive, got {}",
            spec.epsilon
        )));
    }
    let ns = spec.n.values()?;
    let ms = spec.m.values()?;
    if spec.layouts.is_empty() || spec.beta.is_empty() {
        return Err(Error::Validation("layout and beta lists must be non-empty".into()));
    }
    let mut points = Vec::new();
    for &n in &ns {
        for &m in &ms {
            if n == 0 || m == 0 {
                return Err(Error::Validation("N and M must be at least 1".into()));
            }
            let dim = ((2 * (n + 1)) as u128).pow(m as u32);
            if dim > dimension_cap as u128 {
                return Err(Error::Size {
                    dim,
                    cap: dimension_cap,
                });
            }
            for &layout in &spec.layouts {
                let resolved: Vec<Layout> = match layout {
                    Layout::Free => vec![Layout::Free],
                    Layout::CnotMid => vec![Layout::CnotAt(n.div_ceil(2))],
                    Layout::CnotAt(j) => vec![Layout::CnotAt(j)],
                    Layout::CnotEach => (1..=n).map(Layout::CnotAt).collect(),
                };
                for lay in resolved {
                    for &b in &spec.beta {
                        let beta = match b {
                            BetaChoice::Value(v) => v,
                            BetaChoice::Auto => choose_beta(m, n)?,
                        };
                        let mut program = layout_program(m, n, lay, spec.epsilon)?;
                        if beta != 1.0 {
                            program = program.tipped(beta);
                        }
                        points.push(GridPoint {
                            num_steps: n,
                            num_qubits: m,
                            beta,
                            layout: lay,
                            family: layout,
                            program,
                        });
                    }
                }
            }
        }
    }
    Ok(points)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub m: usize,
    pub beta: f64,
    pub layout: String,
    #[serde(skip)]
    pub family: String,
    pub status: String,
    pub e0: Option<f64>,
    pub gap: Option<f64>,
    pub upper: Option<f64>,
    pub within_bound: Option<bool>,
    pub gap_n4: Option<f64>,
    pub ground_dim: Option<usize>,
    pub matvecs: Option<usize>,
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

/// Solver and assembly settings shared by every point of a sweep.
#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Eigenpairs requested; the solver always asks for at least `2^M + 1`.
    pub k: usize,
    pub solver: SolverOptions,
    pub assemble: AssembleOptions,
    pub timing: bool,
}

fn solver_for(point: &GridPoint, opts: &SweepOptions, min_k: usize) -> SolverOptions {
    let eps = point.program.epsilon;
    let mut s = opts.solver.clone();
    s.k = opts.k.max(min_k);
    // tolerances in the options are in units of epsilon
    s.tol *= eps;
    s.cluster_tol *= eps;
    s
}

fn gap_point(point: &GridPoint, opts: &SweepOptions) -> Result<GapRow> {
    let (_, h) = assemble_with(&point.program, &opts.assemble)?;
    let s = solver_for(point, opts, (1 << point.num_qubits) + 1);
    let res = solve_with_gap(&h, &s)?;
    let upper = upper_bound(&point.program)?;
    let gap = res.gap;
    Ok(GapRow {
        e0: Some(res.ground_energy()),
        gap,
        upper: Some(upper),
        within_bound: gap.map(|g| g <= upper * (1.0 + 1e-9)),
        gap_n4: gap.map(|g| g * ((point.num_steps + 1) as f64).powi(4)),
        ground_dim: Some(res.ground_manifold_dim),
        matvecs: Some(res.matvecs),
        method: Some(res.method),
        ..GapRow::default()
    })
}

pub fn gap_scan(points: &[GridPoint], opts: &SweepOptions) -> Vec<GapRow> {
    points
        .par_iter()
        .map(|p| {
            let start = Instant::now();
            let mut row = gap_point(p, opts).unwrap_or_else(|e| GapRow {
                status: format!("{}: {e}", e.kind()),
                ..GapRow::default()
            });
            if row.status.is_empty() {
                row.status = "ok".into();
            }
            row.n = p.num_steps;
            row.m = p.num_qubits;
            row.beta = p.beta;
            row.layout = p.layout.to_string();
            row.family = p.family.to_string();
            if opts.timing {
                row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            row
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitLine {
    pub m: usize,
    pub layout: String,
    pub beta: f64,
    pub samples: usize,
    pub fit: Option<ScalingFit>,
    pub note: Option<String>,
}

/// Power-law fit of `gap` against `N + 1` for each `(M, layout, β)` group,
/// where layout is the requested family (`cnot-mid`, not `cnot:3`).
pub fn fit_groups(rows: &[GapRow]) -> Vec<FitLine> {
    let mut groups: BTreeMap<(usize, String, u64), Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        let key = (r.m, r.family.clone(), r.beta.to_bits());
        let entry = groups.entry(key).or_default();
        if let (true, Some(g)) = (r.status == "ok", r.gap) {
            entry.push((r.n, g));
        }
    }
    groups
        .into_iter()
        .map(|((m, layout, beta), samples)| {
            let (fit, note) = match scaling_fit(&samples) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            FitLine {
                m,
                layout,
                beta: f64::from_bits(beta),
                samples: samples.len(),
                fit,
                note,
            }
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DetectRow {
    pub n: usize,
    pub m: usize,
    pub beta: f64,
    pub layout: String,
    pub status: String,
    pub p_all_final: Option<f64>,
    pub predicted: Option<f64>,
    pub expected_attempts: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

fn detect_point(point: &GridPoint, opts: &SweepOptions) -> Result<(f64, f64)> {
    // pinning to |0...0> makes the ground state unique without changing
    // the row distribution
    let program = point.program.clone().pin_all(&vec![0; point.num_qubits]);
    let (set, h) = assemble_with(&program, &opts.assemble)?;
    let s = solve(&h, &solver_for(point, opts, 1))?;
    let r = detection_probability(s.ground_state(), &set.basis, &program);
    Ok((r.p_all_final, predicted_probability(point.num_qubits, point.num_steps, point.beta)))
}

pub fn detect_scan(points: &[GridPoint], opts: &SweepOptions) -> Vec<DetectRow> {
    points
        .par_iter()
        .map(|p| {
            let start = Instant::now();
            let mut row = match detect_point(p, opts) {
                Ok((measured, predicted)) => DetectRow {
                    status: "ok".into(),
                    p_all_final: Some(measured),
                    predicted: Some(predicted),
                    expected_attempts: Some(1.0 / measured),
                    ..DetectRow::default()
                },
                Err(e) => DetectRow {
                    status: format!("{}: {e}", e.kind()),
                    ..DetectRow::default()
                },
            };
            row.n = p.num_steps;
            row.m = p.num_qubits;
            row.beta = p.beta;
            row.layout = p.layout.to_string();
            if opts.timing {
                row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: &str, m: &str, layouts: &[Layout], beta: &[BetaChoice]) -> SweepSpec {
        SweepSpec {
            n: RangeField::Text(n.into()),
            m: RangeField::Text(m.into()),
            layouts: layouts.to_vec(),
            beta: beta.to_vec(),
            epsilon: 1.0,
        }
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("2-5,8").unwrap(), vec![2, 3, 4, 5, 8]);
        assert_eq!(parse_range(" 3 , 3,1-2").unwrap(), vec![3, 1, 2]);
        assert!(parse_range("").is_err());
        assert!(parse_range("5-3").is_err());
        assert!(parse_range("a-3").is_err());
        assert_eq!("cnot:3".parse::<Layout>().unwrap(), Layout::CnotAt(3));
        assert!("cnot:0".parse::<Layout>().is_err());
        assert!("zero".parse::<BetaChoice>().is_err());
        assert!(matches!("0".parse::<BetaChoice>(), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_order_and_resolution() {
        let s = spec("2-3", "2", &[Layout::CnotMid, Layout::CnotEach], &[BetaChoice::Value(1.0)]);
        let g = expand_grid(&s, 1 << 20).unwrap();
        let labels: Vec<String> = g
            .iter()
            .map(|p| format!("{}:{}", p.num_steps, p.layout))
            .collect();
        assert_eq!(
            labels,
            ["2:cnot:1", "2:cnot:1", "2:cnot:2", "3:cnot:2", "3:cnot:1", "3:cnot:2", "3:cnot:3"]
        );
        let big = spec("40", "3", &[Layout::Free], &[BetaChoice::Value(1.0)]);
        assert!(matches!(expand_grid(&big, 1 << 16), Err(Error::Size { .. })));
        let bad = spec("3", "1", &[Layout::CnotMid], &[BetaChoice::Value(1.0)]);
        assert!(expand_grid(&bad, 1 << 20).is_err());
    }

    #[test]
    fn single_qubit_scan_fits_inverse_square() {
        let s = spec("2-12", "1", &[Layout::Free], &[BetaChoice::Value(1.0)]);
        let rows = gap_scan(&expand_grid(&s, 1 << 20).unwrap(), &SweepOptions::default());
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().all(|r| r.status == "ok" && r.within_bound == Some(true)));
        let fits = fit_groups(&rows);
        assert_eq!(fits.len(), 1);
        // curvature at N = 2 pulls the slope to -1.948; from N = 4 it is
        // inside -2 +- 0.05
        let exact: Vec<(usize, f64)> = (2..=12)
            .map(|n| (n, 2.0 * (1.0 - (std::f64::consts::PI / (n + 1) as f64).cos())))
            .collect();
        let want = scaling_fit(&exact).unwrap().exponent;
        let got = fits[0].fit.unwrap().exponent;
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        assert!((got + 1.948).abs() < 1e-3);
        let tail: Vec<GapRow> = rows.into_iter().filter(|r| r.n >= 4).collect();
        assert!((fit_groups(&tail)[0].fit.unwrap().exponent + 2.0).abs() < 0.05);
    }

    #[test]
    fn detection_rows() {
        let s = spec("3", "1", &[Layout::Free], &[BetaChoice::Value(1.0)]);
        let rows = detect_scan(&expand_grid(&s, 1 << 20).unwrap(), &SweepOptions::default());
        assert!((rows[0].p_all_final.unwrap() - 0.25).abs() < 1e-10);
        let s = spec("4", "2", &[Layout::Free], &[BetaChoice::Auto]);
        let rows = detect_scan(&expand_grid(&s, 1 << 20).unwrap(), &SweepOptions::default());
        let p = rows[0].p_all_final.unwrap();
        assert!((p - 4.0 / 9.0).abs() < 0.1 * 4.0 / 9.0);
        assert!((rows[0].beta - 1.0 / 8f64.sqrt()).abs() < 1e-15);
    }
}
