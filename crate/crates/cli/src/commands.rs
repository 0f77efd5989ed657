use std::path::Path;

use kummer_secant::hierarchy::{self, HierarchySeed, HierarchyState};
use kummer_secant::scenarios::{self, ThetaDivisorPoint};
use kummer_secant::secant::{self, SearchOptions};
use kummer_secant::{
    sampling, theta, ComplexPoint, DerivativeSpec, Error, Lift, PeriodMatrix, SecantConfiguration,
    SecondOrderBasis,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::io::{self, Report, Table};
use crate::{Command, Failure, Options};

/// Coefficient fits whose bilinear residual exceeds this fail `secant-check`.
const BILINEAR_TOLERANCE: f64 = 1e-6;

pub fn run(command: Command, opts: &Options) -> Result<Report, Failure> {
    let input = match &opts.input {
        Some(path) => Some((path.as_path(), io::read_value(path)?)),
        None => None,
    };
    let input = input.as_ref().map(|(p, v)| (*p, v));
    match command {
        Command::Theta => theta_values(opts, input),
        Command::Kummer => kummer_points(opts, input),
        Command::SecantCheck => secant_check(opts, require(input)?),
        Command::SecantSearch => secant_search(opts, require(input)?),
        Command::SecantPropagate => secant_propagate(opts, require(input)?),
        Command::Involution => involution(opts, require(input)?),
        Command::HierarchyRun => hierarchy_run(opts, require(input)?),
        Command::PremiseCheck => premise_check(opts, require(input)?),
        Command::ScenarioFay => scenario_fay(opts),
        Command::ScenarioDegenerate => scenario_degenerate(opts),
    }
}

type Input<'a> = (&'a Path, &'a Value);

fn require(input: Option<Input<'_>>) -> Result<Input<'_>, Failure> {
    input.ok_or_else(|| Failure::input("this command needs --input".into()))
}

fn tolerance(msg: String, report: Report) -> Failure {
    Failure::Tolerance(msg, Some(report))
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn points_or_samples(
    opts: &Options,
    pm: &PeriodMatrix,
    input: Option<Input<'_>>,
) -> Result<Vec<ComplexPoint>, Failure> {
    let points: Vec<ComplexPoint> = match input {
        Some((path, v)) => io::extract(path, v, &["points"])?,
        None => sampling::reduced_points(pm, opts.samples, opts.seed),
    };
    if let Some(p) = points.iter().find(|p| p.dim() != pm.g()) {
        return Err(Failure::input(format!(
            "point has {} coordinates, genus is {}",
            p.dim(),
            pm.g()
        )));
    }
    Ok(points)
}

fn theta_values(opts: &Options, input: Option<Input<'_>>) -> Result<Report, Failure> {
    let pm = io::period_matrix(opts.tau.as_deref(), input)?;
    let points = points_or_samples(opts, &pm, input)?;
    let values = theta::theta_batch(&pm, &points, &DerivativeSpec::none(), opts.eps)?;
    let mut table = Table::new(&["index", "re", "im", "abs"]);
    for (i, v) in values.iter().enumerate() {
        table.push(vec![i.to_string(), fmt(v.re), fmt(v.im), fmt(v.norm())]);
    }
    let rows: Vec<Value> = points
        .iter()
        .zip(&values)
        .map(|(z, v)| json!({ "z": z, "theta": v }))
        .collect();
    Ok(Report::new(&json!({ "values": rows }), Some(table)))
}

fn kummer_points(opts: &Options, input: Option<Input<'_>>) -> Result<Report, Failure> {
    let pm = io::period_matrix(opts.tau.as_deref(), input)?;
    let points = points_or_samples(opts, &pm, input)?;
    let basis = SecondOrderBasis::new(pm);
    let rows = points
        .iter()
        .map(|z| Ok(json!({ "z": z, "kummer": basis.kummer(z, opts.eps)? })))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Report::new(
        &json!({ "labels": basis.labels(), "points": rows }),
        None,
    ))
}

fn secant_check(opts: &Options, (path, v): Input<'_>) -> Result<Report, Failure> {
    let pm = io::period_matrix(opts.tau.as_deref(), Some((path, v)))?;
    let basis = SecondOrderBasis::new(pm);
    let mut cfg: SecantConfiguration = io::extract(path, v, &["config"])?;
    let residual = secant::secant_residual(&basis, &mut cfg, opts.eps)?;
    let (alpha, bilinear) = if residual <= opts.tol {
        let alpha = secant::secant_coefficients(&basis, &mut cfg, opts.tol, opts.eps)?;
        let b = secant::bilinear_residual(&basis, &cfg, &alpha, opts.samples, opts.seed, opts.eps)?;
        (Some(alpha), Some(b))
    } else {
        (None, None)
    };
    let report = Report::new(
        &json!({
            "residual": residual,
            "tolerance": opts.tol,
            "alpha": alpha,
            "bilinear_residual": bilinear,
            "config": cfg,
        }),
        None,
    );
    if residual > opts.tol {
        return Err(tolerance(
            format!("secant residual {residual:e} exceeds {:e}", opts.tol),
            report,
        ));
    }
    if let Some(b) = bilinear.filter(|&b| !(b <= BILINEAR_TOLERANCE)) {
        return Err(tolerance(
            format!("bilinear residual {b:e} exceeds {BILINEAR_TOLERANCE:e}"),
            report,
        ));
    }
    Ok(report)
}

fn secant_search(opts: &Options, (path, v): Input<'_>) -> Result<Report, Failure> {
    let pm = io::period_matrix(opts.tau.as_deref(), Some((path, v)))?;
    let basis = SecondOrderBasis::new(pm);
    let cfg: SecantConfiguration = io::extract(path, v, &["config"])?;
    let options = SearchOptions {
        tolerance: opts.tol,
        eps: opts.eps,
        ..SearchOptions::default()
    };
    let (found, converged, iterations) =
        match secant::secant_search(&basis, cfg.m, &cfg.points, &cfg.zeta, &options) {
            Ok(found) => (found, true, None),
            Err(Error::SearchNotConverged { best, iterations, .. }) => (*best, false, Some(iterations)),
            Err(e) => return Err(e.into()),
        };
    let residual = found.residual.unwrap_or(f64::INFINITY);
    let report = Report::new(
        &json!({
            "converged": converged,
            "iterations": iterations,
            "residual": residual,
            "tolerance": opts.tol,
            "config": found,
        }),
        None,
    );
    if !converged {
        return Err(tolerance("search did not converge".into(), report));
    }
    if residual > opts.tol {
        return Err(tolerance(
            format!("search stalled at residual {residual:e} (tolerance {:e})", opts.tol),
            report,
        ));
    }
    Ok(report)
}

fn lift_table(rows: &[(Lift, f64)]) -> Table {
    let mut table = Table::new(&["lift", "residual"]);
    for (lift, r) in rows {
        table.push(vec![lift.to_string(), fmt(*r)]);
    }
    table
}

fn divisor_zeta_prime(pm: &PeriodMatrix, opts: &Options) -> Result<ComplexPoint, Failure> {
    let p = scenarios::find_theta_divisor_point(pm, opts.seed, opts.eps)?;
    Ok(&p.z * -0.5)
}

fn secant_propagate(opts: &Options, (path, v): Input<'_>) -> Result<Report, Failure> {
    let pm = io::period_matrix(opts.tau.as_deref(), Some((path, v)))?;
    let cfg: SecantConfiguration = io::extract(path, v, &["config"])?;
    let zeta_prime: ComplexPoint = match v.get("zeta_prime") {
        Some(_) => io::extract(path, v, &["zeta_prime"])?,
        None => divisor_zeta_prime(&pm, opts)?,
    };
    let basis = SecondOrderBasis::new(pm.clone());
    if let Some(lift) = &opts.lift {
        let prop = secant::propagate(&pm, &cfg, &zeta_prime, lift)?;
        let mut next = SecantConfiguration::new(cfg.m, prop.b_points.clone(), cfg.zeta.clone())?;
        let residual = secant::secant_residual(&basis, &mut next, opts.eps)?;
        let report = Report::new(
            &json!({ "zeta_prime": zeta_prime, "lift": lift, "residual": residual, "config": next }),
            Some(lift_table(&[(lift.clone(), residual)])),
        );
        if residual > opts.tol {
            return Err(tolerance(
                format!("lift {lift} gives residual {residual:e}"),
                report,
            ));
        }
        return Ok(report);
    }
    match secant::propagation_secant_check(&basis, &cfg, &zeta_prime, opts.tol, opts.eps) {
        Ok(check) => {
            let prop = secant::propagate(&pm, &cfg, &zeta_prime, &check.best_lift)?;
            let next = SecantConfiguration::new(cfg.m, prop.b_points, cfg.zeta.clone())?;
            Ok(Report::new(
                &json!({
                    "zeta_prime": zeta_prime,
                    "lift": check.best_lift,
                    "residual": check.best_residual,
                    "config": next,
                    "table": check.table,
                }),
                Some(lift_table(&check.table)),
            ))
        }
        Err(Error::NoSecantLift { best, table }) => Err(tolerance(
            format!("no lift reaches {:e} (best {best:e})", opts.tol),
            Report::new(
                &json!({ "zeta_prime": zeta_prime, "residual": best, "table": table }),
                Some(lift_table(&table)),
            ),
        )),
        Err(e) => Err(e.into()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InvolutionInput {
    points: Vec<ComplexPoint>,
    zeta_prime: ComplexPoint,
    #[serde(default)]
    #[allow(dead_code)]
    tau: Option<Value>,
}

fn involution(opts: &Options, (path, v): Input<'_>) -> Result<Report, Failure> {
    let pm = io::period_matrix(opts.tau.as_deref(), Some((path, v)))?;
    let inp: InvolutionInput = io::extract(path, v, &[])?;
    let lift = opts.lift.clone().unwrap_or_else(|| Lift::zero(pm.g()));
    let discrepancy = secant::involution_identity(&pm, &inp.points, &inp.zeta_prime, &lift)?;
    let cfg = SecantConfiguration::new(2, inp.points, ComplexPoint::zeros(pm.g()))?;
    let prop = secant::propagate(&pm, &cfg, &inp.zeta_prime, &lift)?;
    let report = Report::new(
        &json!({ "discrepancy": discrepancy, "b_points": prop.b_points, "lift": lift }),
        None,
    );
    if discrepancy > opts.tol {
        return Err(tolerance(format!("involution discrepancy {discrepancy:e}"), report));
    }
    Ok(report)
}

/// A full state (it carries `pm`), or a seed with the period matrix supplied
/// separately; either bare or under `state` / `seed`.
fn hierarchy_state(opts: &Options, (path, v): Input<'_>) -> Result<HierarchyState, Failure> {
    let inner = v.get("state").unwrap_or(v);
    if inner.get("pm").is_some() {
        let state: HierarchyState = io::extract(path, v, &["state"])?;
        return Ok(state.with_order(opts.order)?);
    }
    let pm = io::period_matrix(opts.tau.as_deref(), Some((path, v)))?;
    let seed: HierarchySeed = io::extract(path, v, &["seed"])?;
    Ok(HierarchyState::from_seed(pm, &seed, opts.order)?)
}

fn residual_table(state: &HierarchyState) -> Table {
    let mut table = Table::new(&["order", "residual", "rank"]);
    for (i, (r, k)) in state.per_order_residuals.iter().zip(&state.solve_ranks).enumerate() {
        table.push(vec![(i + 1).to_string(), fmt(*r), k.to_string()]);
    }
    table
}

fn hierarchy_run(opts: &Options, input: Input<'_>) -> Result<Report, Failure> {
    if opts.order == 0 {
        return Err(Failure::input("order must be at least 1".into()));
    }
    let state = hierarchy_state(opts, input)?;
    let samples = sampling::reduced_points(&state.pm, opts.samples, opts.seed);
    match hierarchy::run_hierarchy(state, opts.order, &samples, opts.eps) {
        Ok(state) => {
            let table = residual_table(&state);
            let ok = state.succeeded();
            let report = Report::new(&state, Some(table));
            if !ok {
                return Err(tolerance(
                    format!(
                        "residuals {:?} exceed {:e}",
                        state.per_order_residuals,
                        hierarchy::SUCCESS_RESIDUAL
                    ),
                    report,
                ));
            }
            Ok(report)
        }
        Err(Error::HierarchyAborted { order, residual, state }) => Err(tolerance(
            format!("aborted at order {order}: residual {residual:e}"),
            Report::new(&*state, Some(residual_table(&state))),
        )),
        Err(e) => Err(e.into()),
    }
}

fn premise_check(opts: &Options, input: Input<'_>) -> Result<Report, Failure> {
    let (path, v) = input;
    let inner = v.get("state").unwrap_or(v);
    let (pm, seed) = if inner.get("pm").is_some() {
        let state: HierarchyState = io::extract(path, v, &["state"])?;
        let seed = state.seed();
        (state.pm, seed)
    } else {
        let pm = io::period_matrix(opts.tau.as_deref(), Some(input))?;
        (pm, io::extract::<HierarchySeed>(path, v, &["seed"])?)
    };
    let report = hierarchy::premise_check(&pm, seed.m, &seed.u, &seed.b, Some(&seed.w1), opts.eps)?;
    let passes = report.passes(opts.tol);
    let out = Report::new(&report, None);
    if !passes {
        return Err(tolerance(
            format!("premise residual {:e} exceeds {:e}", report.max_residual(), opts.tol),
            out,
        ));
    }
    Ok(out)
}

fn screened_matrix(opts: &Options) -> Result<PeriodMatrix, Failure> {
    match &opts.tau {
        Some(path) => {
            let pm = io::period_matrix(Some(path), None)?;
            if pm.g() != 2 {
                return Err(Failure::input(format!("scenarios need genus 2, got {}", pm.g())));
            }
            let least = scenarios::min_even_theta_constant(&pm, opts.eps)?;
            if least < scenarios::THETA_CONSTANT_FLOOR {
                return Err(Error::Decomposable { modulus: least }.into());
            }
            Ok(pm)
        }
        None => Ok(scenarios::random_period_matrix_genus2(opts.seed, opts.eps)?),
    }
}

fn divisor_points(pm: &PeriodMatrix, count: usize, opts: &Options) -> Result<Vec<ThetaDivisorPoint>, Failure> {
    Ok(scenarios::separated_divisor_points(pm, count, opts.seed, opts.eps)?)
}

fn scenario_fay(opts: &Options) -> Result<Report, Failure> {
    let pm = screened_matrix(opts)?;
    let points = divisor_points(&pm, 4, opts)?;
    let four = [points[0].clone(), points[1].clone(), points[2].clone(), points[3].clone()];
    let fay = scenarios::fay_configuration(&pm, &four, opts.eps)?;
    Ok(Report::new(
        &json!({
            "tau": pm,
            "points": points,
            "lift": fay.lift,
            "table": fay.table,
            "config": fay.config,
        }),
        Some(lift_table(&fay.table)),
    ))
}

fn scenario_degenerate(opts: &Options) -> Result<Report, Failure> {
    let pm = screened_matrix(opts)?;
    let points = divisor_points(&pm, 3, opts)?;
    let three = [points[0].clone(), points[1].clone(), points[2].clone()];
    let deg = scenarios::degenerate_fay_configuration(&pm, &three, opts.eps)?;
    Ok(Report::new(
        &json!({
            "tau": pm,
            "points": points,
            "lift": deg.lift,
            "table": deg.table,
            "premise": deg.premise,
            "collision_gap": deg.collision_gap,
            "seed": deg.seed,
        }),
        Some(lift_table(&deg.table)),
    ))
}
