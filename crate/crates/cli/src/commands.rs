//! Run orchestration for each subcommand.

use cbfem::analytics::{greeks, GreekPoint};
use cbfem::fdm::{fdm_solve, FdGrid};
use cbfem::fem::interpolate_nodal;
use cbfem::mms::{mms_run, MmsSweep};
use cbfem::stepper::SolverSettings;
use cbfem::{assemble, ElementOrder, Mesh, PenaltyTfSolver, PriceSurface, SolveReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Report;

pub struct FemRun {
    pub mesh: Mesh<f64>,
    pub surface: PriceSurface<f64>,
    pub report: SolveReport<f64>,
}

impl FemRun {
    /// `U(t = 0, S = S_int)`, read at the node `x = 0` when there is one.
    pub fn price(&self) -> Result<f64, CliError> {
        let today = self.surface.today();
        Ok(match self.mesh.node_index(0.0) {
            Some(i) => today[i],
            None => interpolate_nodal(&self.mesh, today, 0.0)?,
        })
    }
}

pub fn solve_fem(
    cfg: &RunConfig,
    order: ElementOrder,
    n_elements: usize,
    n_t: usize,
) -> Result<FemRun, CliError> {
    let contract = cfg.contract()?;
    let market = cfg.market()?;
    let mesh = Mesh::new(cfg.numerics.x_min, cfg.numerics.x_max, n_elements, order)?;
    let ops = assemble(&mesh)?;
    let settings = SolverSettings {
        theta: cfg.numerics.theta,
        n_t,
        newton: cfg.newton(),
    };
    let (surface, report) =
        PenaltyTfSolver::new(&ops, &mesh.nodes, &contract, &market, settings)?.surface()?;
    Ok(FemRun {
        mesh,
        surface,
        report,
    })
}

fn solve_fdm_price(cfg: &RunConfig, n: usize, n_t: usize) -> Result<f64, CliError> {
    let contract = cfg.contract()?;
    let market = cfg.market()?;
    let grid = FdGrid::new(cfg.numerics.x_min, cfg.numerics.x_max, n)?;
    let (surface, _) = fdm_solve(
        &grid,
        &contract,
        &market,
        cfg.numerics.theta,
        n_t,
        &cfg.newton(),
    )?;
    let today = surface.today();
    Ok(match grid.node_index(0.0) {
        Some(i) => today[i],
        None => {
            // piecewise-linear reading between grid nodes
            let mesh = Mesh::new(grid.x_min, grid.x_max, n, ElementOrder::P1)?;
            interpolate_nodal(&mesh, today, 0.0)?
        }
    })
}

fn order_label(order: ElementOrder) -> &'static str {
    match order {
        ElementOrder::P1 => "p1",
        ElementOrder::P2 => "p2",
    }
}

fn run_summary(report: &mut Report, run: &FemRun) {
    report.summary.insert(
        "max_newton_iterations".into(),
        json!(run.report.max_interior_iterations()),
    );
    report
        .summary
        .insert("warnings".into(), json!(run.report.warnings));
}

pub fn price(cfg: &RunConfig) -> Result<Report, CliError> {
    let n = &cfg.numerics;
    let order = cfg.element_order();
    let run = solve_fem(cfg, order, n.n_elements, n.n_t)?;
    let value = run.price()?;
    let mut report = Report::new(
        "price",
        vec!["order", "n_elements", "n_t", "t", "s", "price"],
    );
    report.push(vec![
        order_label(order).into(),
        n.n_elements.into(),
        n.n_t.into(),
        0.0.into(),
        cfg.market.s_int.into(),
        value.into(),
    ]);
    report.summary.insert("price".into(), json!(value));
    run_summary(&mut report, &run);
    Ok(report)
}

pub fn surface(cfg: &RunConfig) -> Result<Report, CliError> {
    let n = &cfg.numerics;
    let run = solve_fem(cfg, cfg.element_order(), n.n_elements, n.n_t)?;
    let s = &run.surface;
    let mut report = Report::new("surface", vec!["t", "s", "u", "v"]);
    for m in 0..s.taus.len() {
        let t = s.forward_time(m);
        for i in 0..s.x.len() {
            report.push(vec![
                t.into(),
                s.s_values[i].into(),
                s.u[m][i].into(),
                s.v[m][i].into(),
            ]);
        }
    }
    run_summary(&mut report, &run);
    Ok(report)
}

/// Delta and Gamma at every level. P1 places Delta at element midpoints and Gamma at
/// nodes, so each row carries only the Greek defined at its `S`.
pub fn greeks_table(cfg: &RunConfig) -> Result<Report, CliError> {
    let n = &cfg.numerics;
    let market = cfg.market()?;
    let run = solve_fem(cfg, cfg.element_order(), n.n_elements, n.n_t)?;
    let s = &run.surface;
    let mut report = Report::new("greeks", vec!["t", "s", "delta", "gamma"]);
    for m in 0..s.taus.len() {
        let t = s.forward_time(m);
        let g = greeks(&run.mesh, &market, &s.u[m])?;
        for (s_value, delta, gamma) in merge_greeks(&g.delta, &g.gamma) {
            report.push(vec![t.into(), s_value.into(), delta.into(), gamma.into()]);
        }
    }
    run_summary(&mut report, &run);
    Ok(report)
}

fn merge_greeks(
    delta: &[GreekPoint<f64>],
    gamma: &[GreekPoint<f64>],
) -> Vec<(f64, Option<f64>, Option<f64>)> {
    let mut rows: Vec<(f64, Option<f64>, Option<f64>)> =
        Vec::with_capacity(delta.len() + gamma.len());
    let (mut i, mut j) = (0, 0);
    while i < delta.len() || j < gamma.len() {
        let d = delta.get(i);
        let g = gamma.get(j);
        match (d, g) {
            (Some(d), Some(g)) if d.s == g.s => {
                rows.push((d.s, Some(d.value), Some(g.value)));
                i += 1;
                j += 1;
            }
            (Some(d), Some(g)) if d.s < g.s => {
                rows.push((d.s, Some(d.value), None));
                i += 1;
            }
            (Some(_), Some(g)) | (None, Some(g)) => {
                rows.push((g.s, None, Some(g.value)));
                j += 1;
            }
            (Some(d), None) => {
                rows.push((d.s, Some(d.value), None));
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    rows
}

/// Price at `S = S_int` over the configured mesh sizes, `n_t = n_E`.
pub fn converge(cfg: &RunConfig) -> Result<Report, CliError> {
    let order = cfg.element_order();
    let prices = cfg
        .sweep
        .sizes
        .par_iter()
        .map(|&n| solve_fem(cfg, order, n, n).and_then(|r| r.price()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new(
        "converge",
        vec!["order", "n_elements", "n_t", "price", "change"],
    );
    for (k, (&n, &p)) in cfg.sweep.sizes.iter().zip(&prices).enumerate() {
        let change = (k > 0).then(|| p - prices[k - 1]);
        report.push(vec![
            order_label(order).into(),
            n.into(),
            n.into(),
            p.into(),
            change.into(),
        ]);
    }
    Ok(report)
}

/// FEM against finite differences on `n` and `2n` intervals, `n_t = n_E`.
pub fn compare_fdm(cfg: &RunConfig) -> Result<Report, CliError> {
    let order = cfg.element_order();
    let rows = cfg
        .sweep
        .sizes
        .par_iter()
        .map(|&n| -> Result<[f64; 3], CliError> {
            let fem = solve_fem(cfg, order, n, n)?.price()?;
            Ok([
                fem,
                solve_fdm_price(cfg, n, n)?,
                solve_fdm_price(cfg, 2 * n, n)?,
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new(
        "compare-fdm",
        vec![
            "order",
            "n_elements",
            "n_t",
            "fem",
            "fdm_n",
            "fdm_2n",
            "fem_minus_fdm_n",
            "fem_minus_fdm_2n",
        ],
    );
    for (&n, [fem, fdm, fdm2]) in cfg.sweep.sizes.iter().zip(rows) {
        report.push(vec![
            order_label(order).into(),
            n.into(),
            n.into(),
            fem.into(),
            fdm.into(),
            fdm2.into(),
            (fem - fdm).into(),
            (fem - fdm2).into(),
        ]);
    }
    Ok(report)
}

/// Temporal (fixed mesh) and spatial (fixed step) manufactured-solution studies.
pub fn mms(cfg: &RunConfig) -> Result<Report, CliError> {
    let order = cfg.element_order();
    let case = cfg.mms_case()?;
    let mms_cfg = cfg.mms_config();
    let m = &cfg.mms;
    let n_fixed = match order {
        ElementOrder::P1 => m.temporal_n_p1,
        ElementOrder::P2 => m.temporal_n_p2,
    };
    let temporal = m
        .temporal_dtaus
        .par_iter()
        .map(|&dt| mms_run(order, n_fixed, dt, &case, &mms_cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let spatial = m
        .spatial_sizes
        .par_iter()
        .map(|&n| mms_run(order, n, m.spatial_dtau, &case, &mms_cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let temporal = MmsSweep::from_records(temporal, |r| r.dtau)?;
    let spatial = MmsSweep::from_records(spatial, |r| r.h)?;

    let mut report = Report::new(
        "mms",
        vec![
            "study",
            "order",
            "n_elements",
            "h",
            "n_t",
            "dtau",
            "l2",
            "linf_l2",
            "observed_order_l2",
            "observed_order_linf_l2",
        ],
    );
    for (study, sweep) in [("temporal", &temporal), ("spatial", &spatial)] {
        for r in &sweep.records {
            report.push(vec![
                study.into(),
                order_label(order).into(),
                r.n_elements.into(),
                r.h.into(),
                r.n_t.into(),
                r.dtau.into(),
                r.l2.into(),
                r.linf_l2.into(),
                sweep.order_l2.into(),
                sweep.order_linf_l2.into(),
            ]);
        }
        report.summary.insert(
            study.into(),
            json!({ "order_l2": sweep.order_l2, "order_linf_l2": sweep.order_linf_l2 }),
        );
    }
    Ok(report)
}

/// Extracts a summary number, for callers that print it.
pub fn summary_number(report: &Report, key: &str) -> Option<f64> {
    report.summary.get(key).and_then(Value::as_f64)
}
