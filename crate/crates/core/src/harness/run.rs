//! Experiment drivers. Each returns in-memory tables; [`super::output`] writes them.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Limits, MeshPlan, ProblemKind, RunConfig};
use crate::assembly::{assemble, FoslsSystem, ProblemSpec};
use crate::error::{Error, Result};
use crate::manufactured::{bessel_exact, bessel_j0, polynomial_exact, ExactSolution, RobinSign};
use crate::mesh::{build_uniform_mesh, cells_for_condition, uniform_mesh_h, Mesh};
use crate::metrics::{compute_errors, coercivity_probe_limited, sample_grid, sample_trace, ErrorReport};
use crate::solve::{estimate_factor_bytes, solve, SolveReport, SolverChoice};
use crate::space::{build_spaces, predicted_dofs, FESpacePair};

/// Column order of every results table.
pub const RESULT_HEADER: [&str; 12] =
    ["k", "p_plus_1", "n", "h", "kh_over_p", "ndof", "rel_err_u", "rel_err_phi", "residual", "iters", "time_s", "status"];

/// One results row. Numeric fields are empty when a row failed or was skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub k: f64,
    pub p_plus_1: usize,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub kh_over_p: Option<f64>,
    pub ndof: Option<usize>,
    pub rel_err_u: Option<f64>,
    pub rel_err_phi: Option<f64>,
    pub residual: Option<f64>,
    pub iters: Option<usize>,
    pub time_s: Option<f64>,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn unsolved(case: &Case, err: &Error) -> Self {
        let status = match err {
            Error::ResourceCap(m) => format!("skipped: {m}"),
            other => format!("failed: {other}"),
        };
        Self {
            k: case.k,
            p_plus_1: case.p_plus_1,
            n: Some(case.n),
            h: Some(case.h),
            kh_over_p: Some(case.kh_over_p()),
            ndof: Some(case.ndof),
            rel_err_u: None,
            rel_err_phi: None,
            residual: None,
            iters: None,
            time_s: None,
            status,
        }
    }
}

/// Observed convergence order between two meshes of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub k: f64,
    pub p_plus_1: usize,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub order_u: f64,
    pub order_phi: f64,
    /// `interval` for consecutive meshes, `fit` for the least-squares slope over the series.
    pub span: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityRow {
    pub k: f64,
    pub p_plus_1: usize,
    pub n: usize,
    pub h: f64,
    pub kh_over_p: f64,
    pub ndof: usize,
    pub lambda_min: Option<f64>,
    pub iterations: Option<usize>,
    pub time_s: Option<f64>,
    pub status: String,
}

/// A discrete sample next to the exact solution at the same point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub x: f64,
    pub re_u: f64,
    pub im_u: f64,
    pub re_u_exact: f64,
    pub im_u_exact: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub x: f64,
    pub y: f64,
    pub re_u: f64,
    pub im_u: f64,
    pub re_u_exact: f64,
    pub im_u_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestRow {
    pub check: String,
    pub value: f64,
    pub limit: f64,
    pub status: String,
}

pub fn exact_solution(kind: ProblemKind, k: f64, sigma: RobinSign) -> Result<ExactSolution> {
    match kind {
        ProblemKind::Bessel => bessel_exact(k, sigma),
        ProblemKind::Polynomial => polynomial_exact(k, sigma),
    }
}

/// A single `(k, p+1, n)` configuration, sized before anything is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case {
    pub k: f64,
    pub p_plus_1: usize,
    pub n: usize,
    pub h: f64,
    pub ndof: usize,
}

impl Case {
    pub fn new(exact: &ExactSolution, p_plus_1: usize, n: usize) -> Self {
        let h = uniform_mesh_h(&exact.domain, n);
        let ndof = predicted_dofs((n + 1) * (n + 1), 3 * n * n + 2 * n, 2 * n * n, p_plus_1);
        Self { k: exact.k, p_plus_1, n, h, ndof }
    }

    pub fn kh_over_p(&self) -> f64 {
        self.k * self.h / self.p_plus_1 as f64
    }
}

/// Every `(k, p+1)` pair of a config expanded into cases, `p+1` outermost.
pub fn plan_cases(cfg: &RunConfig) -> Result<Vec<(ExactSolution, Case)>> {
    let sigma = cfg.robin_sign()?;
    let plan = cfg.mesh_plan()?;
    let mut out = Vec::new();
    for p in cfg.orders() {
        for k in cfg.ks() {
            let exact = exact_solution(cfg.problem, k, sigma)?;
            let ns = match &plan {
                MeshPlan::Cells(ns) => ns.clone(),
                MeshPlan::Ratio(c) => vec![cells_for_condition(&exact.domain, k, p, *c)?],
            };
            for n in ns {
                out.push((exact, Case::new(&exact, p, n)));
            }
        }
    }
    Ok(out)
}

/// A solved case with everything needed to sample it afterwards.
pub struct Solved {
    pub mesh: Mesh,
    pub spaces: FESpacePair,
    pub coeff: Vec<Complex64>,
    pub system: FoslsSystem,
    pub report: ErrorReport,
    pub solve: SolveReport,
    pub time_s: f64,
}

impl Solved {
    pub fn row(&self) -> ResultRow {
        let r = &self.report;
        ResultRow {
            k: r.k,
            p_plus_1: r.p_plus_1,
            n: Some(r.n),
            h: Some(r.h),
            kh_over_p: Some(r.kh_over_p),
            ndof: Some(r.ndof),
            rel_err_u: Some(r.rel_err_u),
            rel_err_phi: Some(r.rel_err_phi),
            residual: Some(r.fosls_residual),
            iters: Some(self.solve.iterations),
            time_s: Some(self.time_s),
            status: "ok".into(),
        }
    }
}

fn check_dofs(case: &Case, limits: &Limits) -> Result<()> {
    if case.ndof > limits.max_dofs {
        return Err(Error::ResourceCap(format!("{} dofs exceed the limit {}", case.ndof, limits.max_dofs)));
    }
    Ok(())
}

/// Build, assemble, solve and measure one case.
pub fn solve_case(cfg: &RunConfig, exact: &ExactSolution, case: &Case, limits: &Limits) -> Result<Solved> {
    check_dofs(case, limits)?;
    let start = Instant::now();
    let mesh = build_uniform_mesh(exact.domain, case.n)?;
    let spaces = build_spaces(&mesh, case.p_plus_1)?;
    let system = assemble(&mesh, &spaces, &ProblemSpec::from_exact(exact))?;
    let opts = cfg.solver_options(limits);
    if opts.choice == SolverChoice::Direct {
        let bytes = estimate_factor_bytes(&system.matrix)?;
        if bytes > opts.max_factor_bytes {
            return Err(Error::ResourceCap(format!(
                "estimated factor of {:.2} GiB exceeds the limit of {} GiB",
                bytes as f64 / (1u64 << 30) as f64,
                limits.max_memory_gib
            )));
        }
    }
    let (coeff, solve_report) = solve(&system, &opts)?;
    let report = compute_errors(&mesh, &spaces, &coeff, exact)?;
    let time_s = start.elapsed().as_secs_f64();
    Ok(Solved { mesh, spaces, coeff, system, report, solve: solve_report, time_s })
}

fn sweep(cfg: &RunConfig, limits: &Limits) -> Result<Vec<ResultRow>> {
    Ok(plan_cases(cfg)?
        .iter()
        .map(|(exact, case)| match solve_case(cfg, exact, case, limits) {
            Ok(s) => s.row(),
            Err(e) => ResultRow::unsolved(case, &e),
        })
        .collect())
}

/// Single configuration; the solved state is returned for sampling or dumps.
pub fn run_solve(cfg: &RunConfig, limits: &Limits) -> Result<(ResultRow, Option<Solved>)> {
    let cases = plan_cases(cfg)?;
    let [(exact, case)] = cases.as_slice() else {
        return Err(Error::Config(format!("solve needs exactly one configuration, got {}", cases.len())));
    };
    match solve_case(cfg, exact, case, limits) {
        Ok(s) => Ok((s.row(), Some(s))),
        Err(e) => Ok((ResultRow::unsolved(case, &e), None)),
    }
}

/// Fixed `k`, every `p+1` over the `n` list, with observed orders.
pub fn run_convergence(cfg: &RunConfig, limits: &Limits) -> Result<(Vec<ResultRow>, Vec<OrderRow>)> {
    let rows = sweep(cfg, limits)?;
    let orders = observed_orders(&rows);
    Ok((rows, orders))
}

/// Every `(k, p+1)` on the mesh picked by the ratio `k h/(p+1) <= c`.
pub fn run_pollution(cfg: &RunConfig, limits: &Limits) -> Result<Vec<ResultRow>> {
    sweep(cfg, limits)
}

/// `log(e₁/e₂)/log(h₁/h₂)` between consecutive successful rows of each
/// `(k, p+1)` series, then the least-squares slope over the whole series.
pub fn observed_orders(rows: &[ResultRow]) -> Vec<OrderRow> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let key = (rows[i].k, rows[i].p_plus_1);
        let mut j = i;
        while j < rows.len() && (rows[j].k, rows[j].p_plus_1) == key {
            j += 1;
        }
        let series: Vec<(usize, f64, f64, f64)> = rows[i..j]
            .iter()
            .filter(|r| r.is_ok())
            .filter_map(|r| Some((r.n?, r.h?, r.rel_err_u?, r.rel_err_phi?)))
            .collect();
        for w in series.windows(2) {
            let (a, b) = (w[0], w[1]);
            let lh = (a.1 / b.1).ln();
            out.push(OrderRow {
                k: key.0,
                p_plus_1: key.1,
                n_coarse: a.0,
                n_fine: b.0,
                order_u: (a.2 / b.2).ln() / lh,
                order_phi: (a.3 / b.3).ln() / lh,
                span: "interval".into(),
            });
        }
        if series.len() > 2 {
            let hs: Vec<f64> = series.iter().map(|s| s.1).collect();
            let eu: Vec<f64> = series.iter().map(|s| s.2).collect();
            let ep: Vec<f64> = series.iter().map(|s| s.3).collect();
            out.push(OrderRow {
                k: key.0,
                p_plus_1: key.1,
                n_coarse: series[0].0,
                n_fine: series[series.len() - 1].0,
                order_u: loglog_slope(&hs, &eu),
                order_phi: loglog_slope(&hs, &ep),
                span: "fit".into(),
            });
        }
        i = j;
    }
    out
}

/// Least-squares slope of `log e` against `log h`.
pub fn loglog_slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Samples of `u_h` along `y = trace_y`, next to the exact solution.
pub fn run_trace(cfg: &RunConfig, limits: &Limits) -> Result<(ResultRow, Vec<TraceRow>)> {
    let (row, solved) = run_solve(cfg, limits)?;
    let Some(s) = solved else {
        return Err(Error::InvalidArgument(format!("trace run did not produce a solution ({})", row.status)));
    };
    let exact = exact_solution(cfg.problem, row.k, cfg.robin_sign()?)?;
    let samples = sample_trace(&s.mesh, &s.spaces, &s.coeff, cfg.trace_y, cfg.samples)?;
    let rows = samples
        .into_iter()
        .map(|t| {
            let u = exact.u([t.x, cfg.trace_y]);
            TraceRow { x: t.x, re_u: t.re_u, im_u: t.im_u, re_u_exact: u.re, im_u_exact: u.im }
        })
        .collect();
    Ok((row, rows))
}

/// `u_h` on a `grid x grid` lattice, next to the exact solution.
pub fn run_surface(cfg: &RunConfig, limits: &Limits) -> Result<(ResultRow, Vec<SurfaceRow>)> {
    let (row, solved) = run_solve(cfg, limits)?;
    let Some(s) = solved else {
        return Err(Error::InvalidArgument(format!("surface run did not produce a solution ({})", row.status)));
    };
    let exact = exact_solution(cfg.problem, row.k, cfg.robin_sign()?)?;
    let samples = sample_grid(&s.mesh, &s.spaces, &s.coeff, cfg.grid)?;
    let rows = samples
        .into_iter()
        .map(|g| {
            let u = exact.u([g.x, g.y]);
            SurfaceRow { x: g.x, y: g.y, re_u: g.re_u, im_u: g.im_u, re_u_exact: u.re, im_u_exact: u.im }
        })
        .collect();
    Ok((row, rows))
}

/// Smallest eigenvalue of the discrete pencil for every planned case.
pub fn run_coercivity(cfg: &RunConfig, limits: &Limits) -> Result<Vec<CoercivityRow>> {
    let sigma = cfg.robin_sign()?;
    Ok(plan_cases(cfg)?
        .iter()
        .map(|(exact, case)| {
            let start = Instant::now();
            let result = check_dofs(case, limits).and_then(|_| {
                let mesh = build_uniform_mesh(exact.domain, case.n)?;
                let spaces = build_spaces(&mesh, case.p_plus_1)?;
                coercivity_probe_limited(&mesh, &spaces, case.k, sigma, limits.probe_max_dofs)
            });
            let mut row = CoercivityRow {
                k: case.k,
                p_plus_1: case.p_plus_1,
                n: case.n,
                h: case.h,
                kh_over_p: case.kh_over_p(),
                ndof: case.ndof,
                lambda_min: None,
                iterations: None,
                time_s: None,
                status: String::new(),
            };
            match result {
                Ok(rep) => {
                    row.lambda_min = Some(rep.lambda_min);
                    row.iterations = Some(rep.iterations);
                    row.time_s = Some(start.elapsed().as_secs_f64());
                    row.status = "ok".into();
                }
                Err(Error::ResourceCap(m)) => row.status = format!("skipped: {m}"),
                Err(e) => row.status = format!("failed: {e}"),
            }
            row
        })
        .collect())
}

/// Quick end-to-end checks that need no configuration.
pub fn run_selftest() -> Result<Vec<SelftestRow>> {
    let mut rows = Vec::new();
    let mut push = |check: String, value: f64, limit: f64| {
        let status = if value <= limit { "ok" } else { "failed" };
        rows.push(SelftestRow { check, value, limit, status: status.into() });
    };

    push("bessel_j0_first_zero".into(), bessel_j0(2.404825557695773)?.abs(), 1e-14);
    push("bessel_j0_origin".into(), (bessel_j0(0.0)? - 1.0).abs(), 0.0);

    let cfg = RunConfig::from_json(r#"{"problem": "polynomial", "k": 3, "p_plus_1": 1, "n": 2, "sigma": 1}"#)?;
    let limits = Limits::default();
    for p in 1..=crate::refelem::MAX_ORDER {
        let exact = exact_solution(ProblemKind::Polynomial, 3.0, RobinSign::Plus)?;
        let s = solve_case(&cfg, &exact, &Case::new(&exact, p, 2), &limits)?;
        push(format!("hermitian_defect_p{p}"), s.system.matrix.hermitian_defect(), 1e-12);
        push(format!("polynomial_rel_err_u_p{p}"), s.report.rel_err_u, 1e-8);
        push(format!("polynomial_rel_err_phi_p{p}"), s.report.rel_err_phi, 1e-8);
    }
    Ok(rows)
}
