use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::anyhow;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use simplex_bundle::acceptance::run_all;
use simplex_bundle::gradient::entropy as shannon_entropy;
use simplex_bundle::poly::{
    as_binomial, binomial_score_relation, model_tangent_system, parse_polynomial, VarNames,
};
use simplex_bundle::simplex::SUPPORT_TOL;
use simplex_bundle::zoo::{entropy_curve, zoo_curve, ZooCurve};
use simplex_bundle::{
    center, entropy_production, make_distribution, natural_gradient_flow, score, velocity, Error,
    ExpGeodesic, FlowDirection, Functional, ParamCurve, ProbabilityVector, SampleSpace,
};

use crate::grid::{parse_numbers, Grid};
use crate::table::{Cell, Format, Table};
use crate::{GridArgs, ModelArgs, OutputArgs};

pub const TOL_ENV: &str = "SIMPLEX_BUNDLE_TOL";

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub source: anyhow::Error,
    /// Already reported on stdout.
    pub quiet: bool,
}

type Outcome = Result<(), Failure>;

fn fail(code: u8, e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        source: e.into(),
        quiet: false,
    }
}

fn config(e: impl Into<anyhow::Error>) -> Failure {
    fail(2, e)
}

fn model(e: impl Into<anyhow::Error>) -> Failure {
    fail(3, e)
}

fn output(e: impl Into<anyhow::Error>) -> Failure {
    fail(4, e)
}

fn config_msg(msg: String) -> Failure {
    config(anyhow!(msg))
}

/// Support tolerance, overridable through the environment.
fn support_tol() -> Result<f64, Failure> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(SUPPORT_TOL),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => Err(config_msg(format!("{TOL_ENV} must be a nonnegative number, got {s:?}"))),
        },
    }
}

/// snake_case name of an error, used in status columns.
pub fn status(e: &Error) -> &'static str {
    match e {
        Error::EmptySpace => "empty_space",
        Error::DuplicateLabel(_) => "duplicate_label",
        Error::UnknownLabel(_) => "unknown_label",
        Error::LengthMismatch { .. } => "length_mismatch",
        Error::NegativeWeight { .. } => "negative_weight",
        Error::NotNormalized { .. } => "not_normalized",
        Error::NonFinite { .. } => "non_finite",
        Error::NotContrast { .. } => "not_contrast",
        Error::NotCentered { .. } => "not_centered",
        Error::BaseMismatch => "base_mismatch",
        Error::EmptySubset => "empty_subset",
        Error::OutOfDomain { .. } => "out_of_domain",
        Error::AbsoluteContinuityViolation { .. } => "abs_continuity_violation",
        Error::SupportNotNested { .. } => "support_not_nested",
        Error::SupportMismatch { .. } => "support_mismatch",
        Error::GradientUnavailable(_) => "gradient_unavailable",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::VertexStart => "vertex_start",
        Error::StepRejected { .. } => "step_rejected",
        Error::UnsupportedIndeterminate(_) => "unsupported_indeterminate",
        Error::EqualExponents => "equal_exponents",
        Error::RankDeficientBasis { .. } => "rank_deficient_basis",
        Error::BoundaryPoint { .. } => "boundary_point",
        Error::BetaZero => "beta_zero",
        Error::InvalidModel(_) => "invalid_model",
        Error::Parse { .. } => "parse",
    }
}

fn with_output(out: &OutputArgs, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
    write_to(out.output.as_deref(), write)
}

fn write_to(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
    match path {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| output(anyhow!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| output(anyhow!("cannot write {}: {e}", p.display())))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match write(&mut lock).and_then(|_| lock.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(output(e)),
                _ => Ok(()),
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    model: String,
    params: Option<serde_json::Value>,
}

fn resolve_model(args: &ModelArgs) -> Result<ZooCurve, Failure> {
    let path = Path::new(&args.model);
    let z = if path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| model(anyhow!("cannot read {}: {e}", path.display())))?;
        let file: ModelFile = serde_json::from_str(&text)
            .map_err(|e| model(anyhow!("malformed model file {}: {e}", path.display())))?;
        if file.params.is_some() && args.params.is_some() {
            return Err(config_msg("parameters given both in the model file and on the command line".into()));
        }
        let params = file.params.map(|p| p.to_string()).or_else(|| args.params.clone());
        zoo_curve(&file.model, params.as_deref())
    } else {
        zoo_curve(&args.model, args.params.as_deref())
    };
    z.map_err(model)
}

fn grid_points(args: &GridArgs) -> Result<Vec<f64>, Failure> {
    match (&args.grid, &args.ts) {
        (Some(g), _) => Ok(g.points()),
        (None, Some(ts)) => parse_numbers(ts).map_err(config_msg),
        (None, None) => Err(config_msg("give --grid min:max:n or --ts".into())),
    }
}

fn labelled(prefix: &str, space: &SampleSpace) -> Vec<String> {
    space.labels().iter().map(|l| format!("{prefix}{l}")).collect()
}

fn empties(n: usize) -> Vec<Cell> {
    vec![Cell::Empty; n]
}

fn nums(xs: &[f64]) -> Vec<Cell> {
    xs.iter().map(|&x| Cell::Num(x)).collect()
}

/// `param, w_*, [vdot_*], [s_*], fisher_info, status, determined_mask`.
fn curve_table(curve: &ParamCurve, param: &str, ts: &[f64], with_velocity: bool, with_score: bool) -> Table {
    let space = curve.space();
    let d = space.dim();
    let mut headers = vec![param.to_string()];
    headers.extend(labelled("w_", space));
    if with_velocity {
        headers.extend(labelled("vdot_", space));
    }
    if with_score {
        headers.extend(labelled("s_", space));
    }
    headers.extend(["fisher_info".into(), "status".into(), "determined_mask".into()]);
    let rows = ts
        .par_iter()
        .map(|&t| {
            let mut row = vec![Cell::Num(t)];
            let mut state: Option<&'static str> = None;
            let point = curve.point(t);
            match &point {
                Ok(p) => row.extend(nums(p.weights())),
                Err(e) => {
                    state = Some(status(e));
                    row.extend(empties(d));
                }
            }
            if with_velocity {
                match velocity(curve, t) {
                    Ok(v) => row.extend(nums(v.values())),
                    Err(e) => {
                        state.get_or_insert(status(&e));
                        row.extend(empties(d));
                    }
                }
            }
            let scored = if state.is_none() { Some(score(curve, t)) } else { None };
            let fisher = match &scored {
                Some(Ok(r)) => {
                    if with_score {
                        row.extend(nums(r.values()));
                    }
                    Cell::Num(
                        r.determined
                            .cells()
                            .map(|x| r.velocity[x] * r.velocity[x] / r.base.weight(x))
                            .sum(),
                    )
                }
                Some(Err(e)) => {
                    state.get_or_insert(status(e));
                    if with_score {
                        row.extend(empties(d));
                    }
                    Cell::Empty
                }
                None => {
                    if with_score {
                        row.extend(empties(d));
                    }
                    Cell::Empty
                }
            };
            row.push(fisher);
            row.push(Cell::from(state.unwrap_or("ok")));
            row.push(match &point {
                Ok(p) => Cell::Text(p.support().to_bits()),
                Err(_) => Cell::Empty,
            });
            row
        })
        .collect();
    Table { headers, rows }
}

pub fn eval(m: &ModelArgs, g: &GridArgs, with_velocity: bool, with_score: bool, out: &OutputArgs) -> Outcome {
    let tol = support_tol()?;
    let ts = grid_points(g)?;
    let z = resolve_model(m)?;
    let curve = z.curve.with_support_tol(tol);
    let table = curve_table(&curve, "t", &ts, with_velocity, with_score);
    with_output(out, |w| table.write(w, out.format))
}

pub fn gibbs(beta: &Grid, params: Option<&str>, out: &OutputArgs) -> Outcome {
    let tol = support_tol()?;
    let z = zoo_curve("gibbs", params).map_err(model)?;
    let curve = z.curve.with_support_tol(tol);
    let table = curve_table(&curve, "beta", &beta.points(), true, false);
    with_output(out, |w| table.write(w, out.format))
}

fn production_table(grid: &Grid, tol: f64) -> Table {
    let curve = entropy_curve().with_support_tol(tol);
    let rows = grid
        .points()
        .par_iter()
        .map(|&t| {
            let h = curve.point(t).map(|p| shannon_entropy(&p));
            let dh = entropy_production(&curve, t);
            let state = match (&h, &dh) {
                (Err(e), _) | (_, Err(e)) => status(e),
                _ => "ok",
            };
            vec![
                Cell::Num(t),
                h.map_or(Cell::Empty, Cell::Num),
                dh.map_or(Cell::Empty, Cell::Num),
                Cell::from(state),
            ]
        })
        .collect();
    Table {
        headers: ["t", "H", "dHdt", "status"].map(String::from).to_vec(),
        rows,
    }
}

fn heatmap_table(resolution: usize, tol: f64) -> Table {
    let space = SampleSpace::numbered(3).expect("three labels");
    let m = (resolution - 1) as f64;
    let cells: Vec<(usize, usize)> = (0..resolution)
        .flat_map(|i| (0..resolution).map(move |j| (i, j)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(i, j)| {
            let (u, v) = (i as f64 / m, j as f64 / m);
            let w = [(1.0 - v) * u, (1.0 - v) * (1.0 - u), v];
            let h = make_distribution(&space, &w, 1e-9)
                .map(|p| shannon_entropy(&p.with_support_tol(tol)))
                .map_or(Cell::Empty, Cell::Num);
            let mut row = vec![Cell::from(i), Cell::from(j)];
            row.extend(nums(&w));
            row.push(h);
            row
        })
        .collect();
    Table {
        headers: ["i", "j", "p1", "p2", "p3", "H"].map(String::from).to_vec(),
        rows,
    }
}

pub fn entropy(production: bool, heatmap: bool, grid: &Grid, resolution: usize, out: &OutputArgs) -> Outcome {
    let tol = support_tol()?;
    if resolution < 2 {
        return Err(config_msg("--resolution must be at least 2".into()));
    }
    let (production, heatmap) = if production || heatmap {
        (production, heatmap)
    } else {
        (true, true)
    };
    if production && heatmap {
        let dir = out
            .output
            .as_deref()
            .ok_or_else(|| config_msg("both entropy outputs need --output <directory>".into()))?;
        fs::create_dir_all(dir).map_err(|e| output(anyhow!("cannot create {}: {e}", dir.display())))?;
        let ext = match out.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let prod = production_table(grid, tol);
        write_to(Some(&dir.join(format!("entropy_production.{ext}"))), |w| prod.write(w, out.format))?;
        let heat = heatmap_table(resolution, tol);
        return write_to(Some(&dir.join(format!("entropy_heatmap.{ext}"))), |w| heat.write(w, out.format));
    }
    let table = if production {
        production_table(grid, tol)
    } else {
        heatmap_table(resolution, tol)
    };
    with_output(out, |w| table.write(w, out.format))
}

fn parse_point(text: &str, what: &str, tol: f64) -> Result<ProbabilityVector, Failure> {
    let w = parse_numbers(text).map_err(|e| config_msg(format!("{what}: {e}")))?;
    let space = SampleSpace::numbered(w.len()).map_err(config)?;
    Ok(make_distribution(&space, &w, 1e-9)
        .map_err(|e| config(anyhow!("{what}: {e}")))?
        .with_support_tol(tol))
}

pub fn geodesic(base: &str, direction: &str, grid: &Grid, out: &OutputArgs) -> Outcome {
    let tol = support_tol()?;
    let p = parse_point(base, "--base", tol)?;
    let u = parse_numbers(direction).map_err(|e| config_msg(format!("--direction: {e}")))?;
    let dir = center(&u, &p).map_err(|e| config(anyhow!("--direction: {e}")))?;
    let geo = ExpGeodesic::new(dir);
    let mut headers = vec!["t".to_string()];
    headers.extend(labelled("q_", p.space()));
    headers.push("psi".into());
    let rows = grid
        .points()
        .par_iter()
        .map(|&t| {
            let mut row = vec![Cell::Num(t)];
            row.extend(nums(geo.point(t).weights()));
            row.push(Cell::Num(geo.psi(t)));
            row
        })
        .collect();
    let table = Table { headers, rows };
    with_output(out, |w| table.write(w, out.format))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FunctionalKind {
    Entropy,
    Expectation,
}

pub fn flow(
    kind: FunctionalKind,
    g: Option<&str>,
    start: &str,
    step: f64,
    steps: usize,
    descent: bool,
    out: &OutputArgs,
) -> Outcome {
    let tol = support_tol()?;
    let p0 = parse_point(start, "--start", tol)?;
    let functional = match (kind, g) {
        (FunctionalKind::Entropy, None) => Functional::entropy(),
        (FunctionalKind::Entropy, Some(_)) => {
            return Err(config_msg("--g applies only to --functional expectation".into()))
        }
        (FunctionalKind::Expectation, Some(g)) => {
            let g = parse_numbers(g).map_err(|e| config_msg(format!("--g: {e}")))?;
            if g.len() != p0.dim() {
                return Err(config_msg(format!("--g needs {} values, got {}", p0.dim(), g.len())));
            }
            Functional::expectation(g)
        }
        (FunctionalKind::Expectation, None) => {
            return Err(config_msg("--functional expectation needs --g".into()))
        }
    };
    let direction = if descent {
        FlowDirection::Descent
    } else {
        FlowDirection::Ascent
    };
    let traj = natural_gradient_flow(&functional, &p0, step, steps, direction).map_err(config)?;
    let mut headers = vec!["iteration".to_string(), "t".into()];
    headers.extend(labelled("w_", p0.space()));
    headers.extend(["value".into(), "grad_norm".into()]);
    let rows = traj
        .points
        .iter()
        .enumerate()
        .map(|(k, pt)| {
            let mut row = vec![Cell::from(k), Cell::Num(pt.t)];
            row.extend(nums(pt.point.weights()));
            row.extend([Cell::Num(pt.value), Cell::Num(pt.grad_norm)]);
            row
        })
        .collect();
    let table = Table { headers, rows };
    with_output(out, |w| table.write(w, out.format))
}

pub fn algebra(path: &Path, labels: Option<&str>, dim: Option<usize>, out: Option<&Path>, as_json: bool) -> Outcome {
    let space = match (labels, dim) {
        (Some(l), _) => SampleSpace::new(l.split(',').map(str::trim)).map_err(config)?,
        (None, Some(d)) => SampleSpace::numbered(d).map_err(config)?,
        (None, None) => return Err(config_msg("give --labels or --dim".into())),
    };
    let text = fs::read_to_string(path)
        .map_err(|e| model(anyhow!("cannot read {}: {e}", path.display())))?;
    let names = VarNames::new(space.clone());
    let mut polys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f = parse_polynomial(body, &names)
            .map_err(|e| model(anyhow!("{}:{}: {e}", path.display(), lineno + 1)))?;
        polys.push(f);
    }
    let system = model_tangent_system(&polys, &space).map_err(model)?;
    let mut relations = Vec::new();
    for f in &polys {
        if let Some((alpha, beta)) = as_binomial(f, space.dim()) {
            let form = binomial_score_relation(&alpha, &beta).map_err(model)?;
            relations.push((f.display(&names).to_string(), form.display(&space).to_string()));
        }
    }
    let shown: Vec<String> = polys.iter().map(|f| f.display(&names).to_string()).collect();
    let system: Vec<String> = system.iter().map(|f| f.display(&names).to_string()).collect();
    write_to(out, |w| {
        if as_json {
            let doc = json!({
                "labels": space.labels(),
                "model": shown,
                "tangent_system": system,
                "score_relations": relations
                    .iter()
                    .map(|(f, r)| json!({"polynomial": f, "relation": r}))
                    .collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        } else {
            writeln!(w, "# model")?;
            for f in &shown {
                writeln!(w, "{f}")?;
            }
            writeln!(w, "# tangent system")?;
            for f in &system {
                writeln!(w, "{f}")?;
            }
            writeln!(w, "# score relations")?;
            for (f, r) in &relations {
                writeln!(w, "{r} = 0  # from {f}")?;
            }
            Ok(())
        }
    })
}

pub fn verify(only: Option<&str>, seed: u64) -> Outcome {
    let results = run_all(seed, only).map_err(config)?;
    let mut failed = 0;
    for r in &results {
        println!("{r}");
        failed += usize::from(!r.passed());
    }
    println!("{}/{} checks passed (seed {seed})", results.len() - failed, results.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            source: anyhow!("{failed} checks failed"),
            quiet: true,
        })
    }
}
