use std::sync::Arc;

use serde_json::{json, Value};

use magicflow::analysis::{
    box_counting_dimension, concat_survey, cost_estimate, error_curve, flow_field, log_grid,
    reed_muller_gamma, write_box_counting_csv, write_error_curve_csv, write_flow_csv,
    write_survey_csv, CostModel, FitWindow, SurveyOptions,
};
use magicflow::catalog::{default_plane, load_map, load_protocol};
use magicflow::code::{validate, Protocol};
use magicflow::dynamics::{
    circle_roots, classify_fixed_point, compose, convergence_order, find_fixed_points, iterate,
    linalg, norm, residual, CircleCondition, ComposedMap, Parameterization, RationalMap,
    SearchRegion, Stage, RESIDUAL_TOL,
};
use magicflow::map::{fixed_plane_check, MapExport, PlanarMap, Plane};

use crate::args::*;
use crate::error::CliError;
use crate::output::{num, Payload};

/// Result of a command: data to emit, and an error to report after emitting it.
pub type Outcome = Result<(Payload, Option<CliError>), CliError>;

fn ok(p: Payload) -> Outcome {
    Ok((p, None))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn csv_bytes(
    write: impl FnOnce(&mut Vec<u8>) -> magicflow::Result<()>,
) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn table(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for r in rows {
        w.write_record(&r).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn exactly<const N: usize, T: Copy>(flag: &str, values: &[T]) -> Result<[T; N], CliError> {
    <[T; N]>::try_from(values)
        .map_err(|_| CliError::usage(format!("--{flag} takes {N} comma-separated values")))
}

fn parse_plane(s: &str) -> Result<Plane, CliError> {
    s.parse()
        .map_err(|_| CliError::usage(format!("unknown plane {s:?}; expected z0, y0 or x0")))
}

/// `name` or `name@plane`.
fn split_stage(item: &str) -> Result<(&str, Option<Plane>), CliError> {
    match item.rsplit_once('@') {
        Some((name, plane)) => Ok((name, Some(parse_plane(plane)?))),
        None => Ok((item, None)),
    }
}

fn axis_names(plane: Option<Plane>) -> Vec<String> {
    match plane {
        Some(p) => strings(&p.axis_names()),
        None => strings(&["x", "y", "z"]),
    }
}

/// Each base is reduced in its own plane (the `@plane` suffix, else
/// `--plane`, else its catalog plane) and relabeled into the common frame
/// (`--plane`, else the first base's plane).
fn planar_bases(args: &StageArgs) -> Result<(Plane, Vec<PlanarMap>), CliError> {
    let requested = args.plane.as_deref().map(parse_plane).transpose()?;
    let mut bases = Vec::with_capacity(args.codes.len());
    for item in &args.codes {
        let (name, own) = split_stage(item)?;
        let plane = own.or(requested).unwrap_or_else(|| default_plane(name));
        bases.push(load_map(name)?.planar(plane, args.output_index)?);
    }
    let frame = requested.unwrap_or(bases[0].plane);
    let bases = bases.into_iter().map(|b| b.transported_to(frame)).collect();
    Ok((frame, bases))
}

fn planar_map(args: &StageArgs) -> Result<ComposedMap<2>, CliError> {
    let (_, bases) = planar_bases(args)?;
    Ok(compose(
        bases.into_iter().map(|b| Arc::new(b) as Stage<2>).collect(),
    )?)
}

fn bloch_map(args: &StageArgs) -> Result<ComposedMap<3>, CliError> {
    let mut stages: Vec<Stage<3>> = Vec::with_capacity(args.codes.len());
    for item in &args.codes {
        let (name, own) = split_stage(item)?;
        if own.is_some() {
            return Err(CliError::usage(
                "`@plane` suffixes need --plane or a planar command",
            ));
        }
        stages.push(Arc::new(load_map(name)?.output_map(args.output_index)?));
    }
    Ok(compose(stages)?)
}

fn require_plane(args: &StageArgs) -> StageArgs {
    let mut a = args.clone();
    if a.plane.is_none() {
        let (name, own) = split_stage(&a.codes[0]).unwrap_or((&a.codes[0], None));
        a.plane = Some(own.unwrap_or_else(|| default_plane(name)).to_string());
    }
    a
}

pub fn map(args: &MapArgs) -> Outcome {
    let m = load_map(&args.code.code)?;
    match &args.plane {
        None => {
            let export = MapExport::from_map(&m);
            let mut rows = vec![];
            for r in &export.denominator {
                rows.push(vec![
                    "p_s".into(),
                    String::new(),
                    r[0].to_string(),
                    r[1].to_string(),
                    r[2].to_string(),
                    r[3].to_string(),
                ]);
            }
            for (i, o) in export.outputs.iter().enumerate() {
                for (axis, terms) in [
                    ("x", &o.numerator_x),
                    ("y", &o.numerator_y),
                    ("z", &o.numerator_z),
                ] {
                    for r in terms {
                        rows.push(vec![
                            format!("numerator_{axis}"),
                            i.to_string(),
                            r[0].to_string(),
                            r[1].to_string(),
                            r[2].to_string(),
                            r[3].to_string(),
                        ]);
                    }
                }
            }
            let header = strings(&["polynomial", "output", "w_x", "w_y", "w_z", "coeff"]);
            let mut json = to_value(&export);
            json["n"] = json!(m.code.as_ref().map(|c| c.n));
            json["k"] = json!(m.k());
            Ok((Payload::new(json, Some(table(&header, rows))), None))
        }
        Some(p) => {
            let pm = m.planar(parse_plane(p)?, args.output_index)?;
            let json = pm.export_json();
            let mut rows = vec![];
            for key in ["denominator".to_string()].into_iter().chain(
                pm.plane
                    .axis_names()
                    .iter()
                    .map(|a| format!("numerator_{a}")),
            ) {
                for r in json[&key].as_array().into_iter().flatten() {
                    let mut row = vec![key.clone()];
                    row.extend(r.as_array().into_iter().flatten().map(|v| v.to_string()));
                    rows.push(row);
                }
            }
            let header = strings(&["polynomial", "w_x", "w_y", "w_z", "coeff"]);
            let warning = pm.warning.clone();
            Ok((
                Payload::new(json, Some(table(&header, rows))),
                warning.map(CliError::validation),
            ))
        }
    }
}

pub fn validate_cmd(args: &CodeArgs) -> Outcome {
    let protocol = load_protocol(&args.code)?;
    let code = match protocol {
        Protocol::Manual { name, .. } => {
            return ok(Payload::json(json!({
                "name": name,
                "manual": true,
                "valid": true,
                "violations": [],
            })))
        }
        Protocol::Code(c) => c,
    };
    let report = validate(&code);
    let mut json = json!({
        "name": code.name,
        "manual": false,
        "n": code.n,
        "k": code.k,
        "generators": code.generators.len(),
        "gauge_count": code.gauge_count(),
        "valid": report.is_valid(),
        "violations": report.violations,
    });
    if report.is_valid() {
        let m = load_map(&args.code)?;
        let planes: serde_json::Map<String, Value> = [Plane::Z0, Plane::Y0, Plane::X0]
            .iter()
            .map(|&p| (p.to_string(), to_value(&fixed_plane_check(&m, p))))
            .collect();
        json["invariant_planes"] = Value::Object(planes);
        return ok(Payload::json(json));
    }
    let err = CliError::validation(format!(
        "{} is not a valid code: {}",
        code.name,
        report.violations.join("; ")
    ));
    Ok((Payload::json(json), Some(err)))
}

pub fn verify(args: &VerifyArgs, seed: u64) -> Outcome {
    let m = load_map(&args.code.code)?;
    let report = magicflow::oracle::verify_map(&m, args.samples, args.tol, seed);
    let err = (report.status == magicflow::oracle::VerificationStatus::Failed).then(|| {
        CliError::validation(format!(
            "{}: deviation {:e} exceeds {:e}",
            report.name, report.max_deviation, args.tol
        ))
    });
    Ok((Payload::json(to_value(&report)), err))
}

fn fixed_points_generic<const D: usize>(
    map: &dyn RationalMap<D>,
    plane: Option<Plane>,
    args: &FixedPointArgs,
) -> Outcome {
    let [lo, hi] = exactly("bounds", &args.bounds)?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(CliError::usage("--bounds needs lo < hi"));
    }
    let region = SearchRegion {
        lo: [lo; D],
        hi: [hi; D],
    };
    let grid = args.grid.unwrap_or(if D == 2 { 200 } else { 40 });
    let search = find_fixed_points(map, &region, grid);
    let mut records = Vec::new();
    for r in &search.records {
        let mut v = to_value(r);
        if args.order {
            let p: [f64; D] = std::array::from_fn(|i| r.point[i]);
            let mut dir = p.map(|x| -x);
            if norm(&dir) < 1e-12 {
                dir = std::array::from_fn(|i| if i == 0 { 1.0 } else { 0.0 });
            }
            v["convergence"] = match convergence_order(map, r, dir) {
                Ok(c) => to_value(&c),
                Err(e) => json!({ "error": e.to_string() }),
            };
        }
        records.push(v);
    }
    let axes = axis_names(plane);
    let mut header = axes.clone();
    header.extend(strings(&["residual", "stability", "theta", "max_modulus"]));
    let rows = search.records.iter().map(|r| {
        let mut row: Vec<String> = r.point.iter().map(|&x| num(x)).collect();
        row.push(num(r.residual));
        row.push(
            to_value(&r.stability)
                .as_str()
                .unwrap_or_default()
                .to_string(),
        );
        row.push(r.theta.map(num).unwrap_or_default());
        row.push(num(r
            .eigenvalue_moduli()
            .first()
            .copied()
            .unwrap_or(f64::NAN)));
        row
    });
    let csv = table(&header, rows);
    let json = json!({
        "map": map.label(),
        "plane": plane.map(|p| p.to_string()),
        "identity": search.identity,
        "seeds": search.seeds,
        "fixed_points": records,
    });
    let err = search
        .identity
        .then(|| CliError::numerical("map is the identity; every point is fixed"));
    Ok((Payload::new(json, Some(csv)), err))
}

pub fn fixed_points(args: &FixedPointArgs) -> Outcome {
    if args.stages.plane.is_some() {
        let m = planar_map(&args.stages)?;
        fixed_points_generic(&m, m.frame(), args)
    } else {
        let m = bloch_map(&args.stages)?;
        fixed_points_generic(&m, None, args)
    }
}

fn start_point<const D: usize>(
    args: &PointArgs,
    plane: Option<Plane>,
) -> Result<[f64; D], CliError> {
    match (&args.point, args.theta) {
        (Some(p), _) => {
            if p.len() != D {
                return Err(CliError::usage(format!(
                    "--point needs {D} coordinates, got {}",
                    p.len()
                )));
            }
            Ok(std::array::from_fn(|i| p[i]))
        }
        (None, Some(t)) => {
            let plane = plane.ok_or_else(|| CliError::usage("--theta needs --plane"))?;
            let c = plane.circle_point(t);
            Ok(std::array::from_fn(|i| c[i]))
        }
        (None, None) => Err(CliError::usage("give --point or --theta")),
    }
}

fn jacobian_generic<const D: usize>(
    map: &dyn RationalMap<D>,
    plane: Option<Plane>,
    args: &PointArgs,
) -> Outcome {
    let p = start_point::<D>(args, plane)?;
    let res = residual(map, &p)?;
    let json = if res < RESIDUAL_TOL {
        let mut v = to_value(&classify_fixed_point(map, p)?);
        v["fixed"] = json!(true);
        v
    } else {
        let j = linalg::to_rows(&map.jacobian(&p)?);
        let eig: Vec<[f64; 2]> = linalg::eigenvalues(&j)
            .iter()
            .map(|c| [c.re, c.im])
            .collect();
        json!({
            "point": p.to_vec(),
            "residual": res,
            "jacobian": j,
            "eigenvalues": eig,
            "fixed": false,
        })
    };
    ok(Payload::json(json))
}

pub fn jacobian(args: &PointArgs) -> Outcome {
    if args.stages.plane.is_some() {
        let m = planar_map(&args.stages)?;
        jacobian_generic(&m, m.frame(), args)
    } else {
        let m = bloch_map(&args.stages)?;
        jacobian_generic(&m, None, args)
    }
}

fn iterate_generic<const D: usize>(
    map: &dyn RationalMap<D>,
    plane: Option<Plane>,
    args: &IterateArgs,
) -> Outcome {
    let p = start_point::<D>(&args.at, plane)?;
    let t = iterate(map, p, args.rounds);
    let mut header = vec!["step".to_string()];
    header.extend(axis_names(plane));
    header.push("p_s".into());
    let rows = t.points.iter().enumerate().map(|(i, q)| {
        let mut row = vec![i.to_string()];
        row.extend(q.iter().map(|&x| num(x)));
        row.push(if i == 0 {
            String::new()
        } else {
            num(t.p_s[i - 1])
        });
        row
    });
    let csv = table(&header, rows);
    let err = t.message.clone().map(CliError::numerical);
    Ok((Payload::new(to_value(&t), Some(csv)), err))
}

pub fn iterate_cmd(args: &IterateArgs) -> Outcome {
    if args.at.stages.plane.is_some() {
        let m = planar_map(&args.at.stages)?;
        iterate_generic(&m, m.frame(), args)
    } else {
        let m = bloch_map(&args.at.stages)?;
        iterate_generic(&m, None, args)
    }
}

pub fn flow(args: &FlowArgs) -> Outcome {
    let stages = require_plane(&args.stages);
    let m = planar_map(&stages)?;
    let plane = m.frame().expect("planar");
    let region: [f64; 4] = exactly("region", &args.region)?;
    let rows = flow_field(&m, args.grid, region);
    let csv = csv_bytes(|b| write_flow_csv(b, plane, &rows))?;
    let json = json!({ "map": m.label(), "plane": plane.to_string(), "grid": args.grid, "rows": to_value(&rows) });
    ok(Payload::new(json, Some(csv)))
}

pub fn error_curve_cmd(args: &ErrorCurveArgs) -> Outcome {
    if !(args.eps_min > 0.0 && args.eps_min <= args.eps_max) {
        return Err(CliError::usage("need 0 < --eps-min <= --eps-max"));
    }
    let stages = require_plane(&args.stages);
    let m = planar_map(&stages)?;
    let grid = log_grid(args.eps_min, args.eps_max, args.points);
    let curve = error_curve(&m, args.theta, &grid, args.rounds)?;
    let fit = curve.fit(args.eps_min, args.eps_max).ok();
    let csv = csv_bytes(|b| write_error_curve_csv(b, &curve))?;
    let mut json = to_value(&curve);
    json["map"] = json!(m.label());
    json["fit"] = to_value(&fit);
    ok(Payload::new(json, Some(csv)))
}

pub fn circle_poly(args: &CirclePolyArgs) -> Outcome {
    if args.stages.codes.len() != 1 {
        return Err(CliError::usage("circle-poly takes a single --code"));
    }
    let (plane, bases) = planar_bases(&require_plane(&args.stages))?;
    let pm = &bases[0];
    let param = match &args.param {
        Some(text) => {
            Parameterization::parse(text, plane).map_err(|e| CliError::usage(e.to_string()))?
        }
        None => Parameterization::for_plane(plane),
    };
    let condition: CircleCondition = args
        .condition
        .parse()
        .map_err(|e: magicflow::Error| CliError::usage(e.to_string()))?;
    let (f, roots) = circle_roots(pm, param, condition)?;
    let coeffs: Vec<Value> = f
        .coeffs()
        .iter()
        .map(|c| match i64::try_from(c) {
            Ok(v) => json!(v),
            Err(_) => json!(c.to_string()),
        })
        .collect();
    let factors: Vec<Value> = f
        .square_free_decomposition()
        .iter()
        .map(|(g, m)| json!({ "factor": g.to_string(), "multiplicity": m }))
        .collect();
    let csv = table(
        &strings(&["power", "coefficient"]),
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| vec![i.to_string(), c.to_string()]),
    );
    let json = json!({
        "map": pm.name,
        "plane": plane.to_string(),
        "param": param.label(plane),
        "condition": condition.to_string(),
        "degree": f.degree(),
        "polynomial": f.to_string(),
        "coefficients": coeffs,
        "square_free": factors,
        "roots": to_value(&roots),
    });
    ok(Payload::new(json, Some(csv)))
}

pub fn survey(args: &SurveyArgs) -> Outcome {
    let (_, bases) = planar_bases(&require_plane(&args.stages))?;
    let opts = SurveyOptions {
        grid: args.grid,
        sequence_cap: args.cap,
        ..SurveyOptions::default()
    };
    let s = concat_survey(&bases, args.levels, &opts)?;
    let csv = csv_bytes(|b| write_survey_csv(b, &s))?;
    let mut json = to_value(&s);
    json["range"] = to_value(&s.range());
    json["total"] = json!(s.all_thetas().len());
    ok(Payload::new(json, Some(csv)))
}

fn read_values(path: &std::path::Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let column = match lines.peek() {
        Some(first) if first.trim().parse::<f64>().is_err() => {
            let header: Vec<&str> = first.split(',').map(str::trim).collect();
            let col = header
                .iter()
                .position(|h| *h == "theta")
                .ok_or_else(|| CliError::usage("CSV input needs a `theta` column"))?;
            lines.next();
            col
        }
        _ => 0,
    };
    lines
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .nth(column)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| CliError::usage(format!("bad value on data line {}", i + 1)))
        })
        .collect()
}

pub fn fractal(args: &FractalArgs) -> Outcome {
    let points = match &args.input {
        Some(path) => read_values(path)?,
        None => {
            if args.code.is_empty() {
                return Err(CliError::usage("give --input or at least one --code"));
            }
            let stages = StageArgs {
                codes: args.code.clone(),
                plane: args.plane.clone(),
                output_index: 0,
            };
            let (_, bases) = planar_bases(&require_plane(&stages))?;
            concat_survey(&bases, args.levels, &SurveyOptions::default())?.all_thetas()
        }
    };
    let window = FitWindow {
        fixed: match &args.window {
            Some(w) => {
                let [a, b] = exactly("window", w)?;
                Some((a, b))
            }
            None => None,
        },
        min_window: args.min_window,
    };
    let b = box_counting_dimension(&points, args.max_exponent, window)?;
    let csv = csv_bytes(|buf| write_box_counting_csv(buf, &b))?;
    let mut json = to_value(&b);
    json["points"] = json!(points.len());
    ok(Payload::new(json, Some(csv)))
}

pub fn cost(args: &CostArgs) -> Outcome {
    let model = match args.model {
        CostKindArg::Linear => {
            let need = |name: &str| CliError::usage(format!("the linear model needs --{name}"));
            CostModel::linear(
                args.n.ok_or_else(|| need("n"))?,
                args.k,
                args.p_s.ok_or_else(|| need("p-s"))?,
                args.k_prime.ok_or_else(|| need("k-prime"))?,
            )
        }
        CostKindArg::ReedMuller => CostModel::reed_muller(),
        CostKindArg::Synthesis => CostModel::synthesis(args.c),
    };
    let cost = cost_estimate(&model, args.eps_in, args.eps_tar)?;
    let exponent = match args.model {
        CostKindArg::Linear => json!({ "beta": model.beta()? }),
        CostKindArg::ReedMuller => json!({ "gamma": reed_muller_gamma() }),
        CostKindArg::Synthesis => json!({}),
    };
    let json = json!({
        "model": to_value(&model),
        "eps_in": args.eps_in,
        "eps_tar": args.eps_tar,
        "exponent": exponent,
        "cost": cost,
    });
    let csv = table(
        &strings(&["model", "eps_in", "eps_tar", "cost"]),
        [vec![
            to_value(&model.kind)
                .as_str()
                .unwrap_or_default()
                .to_string(),
            num(args.eps_in),
            num(args.eps_tar),
            num(cost),
        ]],
    );
    ok(Payload::new(json, Some(csv)))
}
