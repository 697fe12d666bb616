//! One function per subcommand. Each returns the report body and optional CSV text.

use serde_json::{json, Value};
use tangent_hp::carleson::{carleson_constant, rectangle_sup, BoxShape, CarlesonMethod};
use tangent_hp::control::{
    admissibility_check, approx_controllability_check, exact_controllability_check, heat_demo, joint_admissible_exact_check,
    null_controllability_check, sobolev_controllability_check, ControlOptions, ControlVerdict, DivergenceRule, InputSpace,
    Verdict,
};
use tangent_hp::interpolation::{
    build_interpolant, m_ap_weighted, m_estimate_angle_route, m_estimate_general, m_s1_route, m_sobolev, m_weighted_p2,
    required_decay_order, InterpolationProblem, MEstimate, RouteOptions,
};
use tangent_hp::quadrature::AxisQuadrature;

use crate::report::{self, cell, csv_line, num};
use crate::schema::{InterpProblem, MeasureProblem, SystemProblem, WeightKind};
use crate::{CliError, ControlProperty, InterpRoute, MethodArg};

/// Result of a subcommand before it is wrapped into a report.
pub struct Outcome {
    pub results: Value,
    pub csv: Option<String>,
    /// The command reached an inconclusive verdict.
    pub inconclusive: bool,
}

fn method_of(m: MethodArg) -> Option<CarlesonMethod> {
    match m {
        MethodArg::Auto => None,
        MethodArg::Rectangle => Some(CarlesonMethod::Rectangle),
        MethodArg::Kernel => Some(CarlesonMethod::Kernel),
        MethodArg::Balayage => Some(CarlesonMethod::Balayage),
        MethodArg::FiniteMass => Some(CarlesonMethod::FiniteMass),
    }
}

pub fn carleson(file: &MeasureProblem, alpha: f64, method: MethodArg) -> Result<Outcome, CliError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(CliError::Schema("--alpha must be a nonnegative number".into()));
    }
    let mu = file.to_measure()?;
    let quad = file.options.quadrature();
    let r = carleson_constant(&mu, alpha, method_of(method), &quad)?;
    let mut body = report::carleson(&r);
    body["truncation"] = json!(mu.len());
    let sweep = rectangle_sup(&mu, alpha, BoxShape::carleson_square());
    let mut csv = csv_line(&["route", "truncation", "height", "center", "atoms", "log_value"].map(String::from));
    for s in &sweep.samples {
        csv.push_str(&csv_line(&[
            "rectangle".into(),
            mu.len().to_string(),
            cell(s.height),
            cell(s.center),
            s.atoms.to_string(),
            cell(s.log_value),
        ]));
    }
    Ok(Outcome { results: json!({ "carleson": body }), csv: Some(csv), inconclusive: false })
}

fn route_options(quad: AxisQuadrature<f64>) -> RouteOptions<f64> {
    RouteOptions { quad, ..RouteOptions::default() }
}

fn weighted(file: &InterpProblem, prob: &InterpolationProblem<f64>, opts: &RouteOptions<f64>) -> tangent_hp::Result<MEstimate<f64>> {
    match &file.weight {
        Some(w) if w.kind == WeightKind::Sobolev => m_sobolev(prob, w.beta.unwrap_or(f64::NAN), opts),
        _ if prob.p == 2.0 && prob.s == 2.0 && prob.weight.is_some() => m_weighted_p2(prob, opts),
        _ => m_ap_weighted(prob, opts),
    }
}

/// Route chosen by `auto`: weight present, then `s = 1`, then projection multiples.
fn auto_route(prob: &InterpolationProblem<f64>, opts: &RouteOptions<f64>) -> InterpRoute {
    if prob.weight.is_some() {
        InterpRoute::Weighted
    } else if prob.s == 1.0 {
        InterpRoute::S1
    } else if prob.projection_multiples(opts.structure_tol).is_ok() {
        InterpRoute::Angle
    } else {
        InterpRoute::General
    }
}

pub fn interp(file: &InterpProblem, route: InterpRoute) -> Result<Outcome, CliError> {
    let prob = file.to_problem()?;
    let opts = route_options(file.options.quadrature());
    let chosen = match route {
        InterpRoute::Auto => auto_route(&prob, &opts),
        r => r,
    };
    let est = match chosen {
        InterpRoute::Angle => m_estimate_angle_route(&prob, &opts)?,
        InterpRoute::General => m_estimate_general(&prob, &opts)?,
        InterpRoute::S1 => m_s1_route(&prob)?,
        InterpRoute::Weighted => weighted(file, &prob, &opts)?,
        InterpRoute::Auto => unreachable!("auto is resolved above"),
    };
    let mut results = json!({
        "requested_route": route.name(),
        "estimate": report::m_estimate(&est, prob.len()),
    });
    if let Some(targets) = &prob.targets {
        let order = required_decay_order(prob.weight.as_ref());
        let f = build_interpolant(&prob, order)?;
        let res = f.residuals(&prob.data, targets);
        let max = res.iter().copied().fold(0.0, f64::max);
        results["interpolant"] = json!({
            "route": "explicit-interpolant",
            "truncation": prob.len(),
            "decay_order": f.decay_order(),
            "residuals": res.iter().map(|&r| num(r)).collect::<Vec<_>>(),
            "max_residual": num(max),
        });
    }
    Ok(Outcome { results, csv: None, inconclusive: false })
}

fn summand_csv(v: &ControlVerdict<f64>) -> String {
    let mut csv = csv_line(
        &["route", "truncation", "index", "eigenvalue_re", "eigenvalue_im", "b_norm", "log_sin_angle", "log_weight"].map(String::from),
    );
    for m in &v.summands {
        csv.push_str(&csv_line(&[
            format!("\"{}\"", v.theorem_route),
            v.truncation.to_string(),
            m.index.to_string(),
            cell(m.eigenvalue.re),
            cell(m.eigenvalue.im),
            cell(m.b_norm),
            cell(m.log_sin_angle),
            cell(m.log_weight),
        ]));
    }
    csv
}

pub fn control(
    file: &SystemProblem,
    property: ControlProperty,
    tau: Option<f64>,
    truncations: Option<Vec<usize>>,
) -> Result<Outcome, CliError> {
    if let Some(t) = tau {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CliError::Schema("--tau must be positive".into()));
        }
    }
    if let Some(t) = &truncations {
        if t.is_empty() || t.contains(&0) {
            return Err(CliError::Schema("--truncations must list positive integers".into()));
        }
    }
    if property == ControlProperty::Null && tau.is_none() {
        return Err(CliError::Schema("--property null needs --tau".into()));
    }
    let sys = file.to_system()?;
    let opts = ControlOptions {
        truncations: truncations.or_else(|| file.options.truncations.clone()).unwrap_or_default(),
        rule: DivergenceRule::default(),
        quad: file.options.quadrature(),
        ..ControlOptions::default()
    };
    let sobolev = matches!(sys.input_space(), InputSpace::Sobolev(_));
    let verdict = match property {
        ControlProperty::Admissible => admissibility_check(&sys, &opts)?,
        ControlProperty::Exact if sobolev => sobolev_controllability_check(&sys, None, &opts)?,
        ControlProperty::Exact => exact_controllability_check(&sys, &opts)?,
        ControlProperty::Null if sobolev => sobolev_controllability_check(&sys, tau, &opts)?,
        ControlProperty::Null => null_controllability_check(&sys, tau.unwrap_or(f64::NAN), &opts)?,
        ControlProperty::Approx => approx_controllability_check(&sys),
        ControlProperty::Joint => {
            let j = joint_admissible_exact_check(&sys, &opts)?;
            let results = json!({
                "joint": {
                    "route": "joint admissibility and exact controllability",
                    "truncation": sys.len(),
                    "caveat": j.caveat.name(),
                    "ratio_min": num(j.ratio_min),
                    "ratio_max": num(j.ratio_max),
                    "evaluation": report::evaluation(&j.evaluation, sys.len()),
                }
            });
            return Ok(Outcome { results, csv: None, inconclusive: false });
        }
    };
    Ok(Outcome {
        results: json!({ "verdict": report::control_verdict(&verdict) }),
        csv: Some(summand_csv(&verdict)),
        inconclusive: verdict.verdict == Verdict::Inconclusive,
    })
}

pub fn heat(p: f64, taus: &[f64], truncation: usize) -> Result<Outcome, CliError> {
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(CliError::Schema("--taus must be a nonempty list of positive numbers".into()));
    }
    let rule = DivergenceRule::default();
    let r = heat_demo(taus, truncation, p, &rule, &AxisQuadrature::default())?;
    let route = "heat Poisson-sum criterion";
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|x| {
            json!({
                "route": route,
                "tau": num(x.tau),
                "truncation": x.truncation,
                "log_criterion": num(x.log_criterion),
                "log_increment": num(x.log_increment),
            })
        })
        .collect();
    let last = r.truncations.last().copied().unwrap_or(truncation);
    let verdicts: Vec<Value> = r
        .verdicts
        .iter()
        .map(|v| {
            json!({
                "route": route,
                "truncation": last,
                "tau": num(v.tau),
                "verdict": v.verdict.name(),
                "above_threshold": v.above_threshold,
            })
        })
        .collect();
    let bounds: Vec<Value> = r
        .product_bounds
        .iter()
        .map(|b| {
            json!({
                "route": "excluded product bound",
                "truncation": last,
                "n": b.n,
                "log_reciprocal": num(b.log_reciprocal),
                "log_upper": num(b.log_upper),
                "certificate": num(b.certificate),
                "within": b.within,
            })
        })
        .collect();
    let mut header: Vec<String> = ["route", "truncation", "n", "eigenvalue", "log_excluded_product", "certificate"].map(String::from).into();
    header.extend(taus.iter().map(|t| format!("log_weight_tau_{t:?}")));
    let mut csv = csv_line(&header);
    for m in &r.modes {
        let mut row = vec![format!("\"{route}\""), last.to_string(), m.n.to_string(), cell(m.eigenvalue), cell(m.log_excluded_product), cell(m.certificate)];
        row.extend(m.log_weights.iter().map(|&w| cell(w)));
        csv.push_str(&csv_line(&row));
    }
    let results = json!({
        "p": num(r.p),
        "threshold": num(r.threshold),
        "truncations": r.truncations,
        "lp_caveat": r.lp_caveat.name(),
        "rows": rows,
        "verdicts": verdicts,
        "product_bounds": bounds,
    });
    Ok(Outcome { results, csv: Some(csv), inconclusive: false })
}
