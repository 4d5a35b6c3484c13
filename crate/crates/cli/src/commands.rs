use canard_core::blowup::{k1_fixed_points, k1_jacobian_eigen_check};
use canard_core::conserved::{
    conservation_monitor, derive, first_integral, gamma_h_from, phi_h, phi_h_eps, FormalConservedQuantity,
};
use canard_core::hamiltonian::{
    drift_report, h_hat, identity_residual, rho_det_exact, rho_det_fd, rho_inv, symplectic_orbit,
    symplectic_step_det_fd, HamiltonianState,
};
use canard_core::integrators::{
    iterate, CanardParams, EventKind, K2Params, PlanarMap, PlanarState, Trajectory, TrajectoryEvent,
};
use canard_core::melnikov::{melnikov_sums, MelnikovResult};
use rayon::prelude::*;

use crate::config::{Format, MapId, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::{emit, Cell, Table};

pub fn event_note(e: &TrajectoryEvent) -> String {
    match e.kind {
        EventKind::NonFinite => format!("non-finite after n={}", e.index),
        EventKind::SingularStep | EventKind::DenominatorSignChange => format!("singular at n={}", e.index),
    }
}

fn termination(notes: &[String]) -> CliResult<()> {
    match notes.first() {
        Some(note) => Err(CliError::Singular(format!("orbit terminated early: {note}"))),
        None => Ok(()),
    }
}

pub fn build_map(cfg: &RunConfig) -> CliResult<PlanarMap> {
    let a = cfg.coefficients();
    Ok(match cfg.map {
        MapId::Kahan => PlanarMap::Kahan(CanardParams::new(cfg.epsilon, cfg.lambda, cfg.h, a)?),
        MapId::Euler => PlanarMap::Euler(CanardParams::new(cfg.epsilon, cfg.lambda, cfg.h, a)?),
        MapId::K2Kahan => PlanarMap::K2Kahan(K2Params::new(cfg.h, cfg.lambda, cfg.r, a)?),
        MapId::K2Euler => PlanarMap::K2Euler(K2Params::new(cfg.h, cfg.lambda, cfg.r, a)?),
        MapId::SymplecticEuler => {
            return Err(CliError::Usage("the symplectic-euler map acts on (v, w); use it with simulate".into()))
        }
    })
}

fn steps_i64(cfg: &RunConfig) -> CliResult<i64> {
    i64::try_from(cfg.steps).map_err(|_| CliError::Usage(format!("steps too large: {}", cfg.steps)))
}

/// Emit the table, then report early termination as a singular-step error.
fn finish(cfg: &RunConfig, table: &Table, extra: &str) -> CliResult<()> {
    emit(cfg.output.as_deref(), &table.render(cfg, extra)?)?;
    termination(&table.notes)
}

pub fn simulate(cfg: &RunConfig) -> CliResult<()> {
    if cfg.map == MapId::SymplecticEuler {
        return symplectic_table(cfg, HamiltonianState::new(cfg.x0, cfg.y0), "");
    }
    let map = build_map(cfg)?;
    let traj = iterate(&map, PlanarState::new(cfg.x0, cfg.y0), 0, steps_i64(cfg)?)?;
    let mut table = Table::new(&["n", "x", "y"]);
    for (n, s) in traj.indexed() {
        table.push(vec![n.into(), s.x.into(), s.y.into()]);
    }
    table.notes = traj.events.iter().map(event_note).collect();
    finish(cfg, &table, "")
}

fn symplectic_table(cfg: &RunConfig, s0: HamiltonianState, extra: &str) -> CliResult<()> {
    let steps = usize::try_from(cfg.steps).map_err(|_| CliError::Usage("steps too large".into()))?;
    let (orbit, err) = symplectic_orbit(s0, cfg.h, steps);
    let mut table = Table::new(&["n", "v", "w", "Hhat"]);
    for (n, s) in orbit.iter().enumerate() {
        table.push(vec![(n as i64).into(), s.v.into(), s.w.into(), h_hat(s.v, s.w).into()]);
    }
    if err.is_some() {
        table.notes.push(format!("singular at n={}", orbit.len() - 1));
    }
    finish(cfg, &table, extra)
}

type CurveResidual = Box<dyn Fn(PlanarState) -> f64>;

/// Iterate from a point of the invariant curve and record the curve residual
/// and the deviation of the x-advance from its exact value.
pub fn invariant_check(cfg: &RunConfig) -> CliResult<()> {
    if cfg.lambda != 0.0 || cfg.r != 0.0 || !cfg.coefficients().is_zero() {
        return Err(CliError::Usage(
            "invariant-check needs the unperturbed map: lambda = r = 0 and a1..a5 = 0".into(),
        ));
    }
    let (map, s0, advance, phi): (PlanarMap, PlanarState, f64, CurveResidual) = match cfg.map {
        MapId::K2Kahan => {
            let h = cfg.h;
            (build_map(cfg)?, gamma_h_from(cfg.x0, 0, h), 0.5 * h, Box::new(move |s| phi_h(s.x, s.y, h)))
        }
        MapId::Kahan => {
            let (h, e) = (cfg.h, cfg.epsilon);
            let y0 = cfg.x0 * cfg.x0 - 0.5 * e - e * e * h * h / 8.0;
            (
                build_map(cfg)?,
                PlanarState::new(cfg.x0, y0),
                0.5 * h * e,
                Box::new(move |s| phi_h_eps(s.x, s.y, h, e)),
            )
        }
        other => {
            return Err(CliError::Usage(format!(
                "invariant-check applies to the Kahan maps, not {}",
                other.as_str()
            )))
        }
    };
    let traj = iterate(&map, s0, 0, steps_i64(cfg)?)?;
    let mut table = Table::new(&["n", "x", "y", "phi", "advance_residual"]);
    let (mut max_phi, mut max_adv) = (0.0_f64, 0.0_f64);
    let mut prev: Option<PlanarState> = None;
    for (n, s) in traj.indexed() {
        let p = phi(s);
        let adv = prev.map_or(0.0, |q| s.x - q.x - advance);
        max_phi = max_phi.max(p.abs());
        max_adv = max_adv.max(adv.abs());
        table.push(vec![n.into(), s.x.into(), s.y.into(), p.into(), adv.into()]);
        prev = Some(s);
    }
    table.notes = traj.events.iter().map(event_note).collect();
    eprintln!(
        "invariant-check: {} iterates, max |phi| = {max_phi:.3e}, max |advance residual| = {max_adv:.3e}",
        traj.states.len()
    );
    finish(cfg, &table, "")
}

#[derive(Debug, Clone, Default)]
pub struct MelnikovOptions {
    pub boundary_corrected: bool,
    pub sweep: bool,
    pub hs: Option<Vec<f64>>,
    pub stride: Option<i64>,
}

/// Thread pool sized by `CANARD_LAB_THREADS` when set.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CANARD_LAB_THREADS") {
        let n = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("CANARD_LAB_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

pub fn melnikov_jobs(cfg: &RunConfig, opts: &MelnikovOptions) -> CliResult<Vec<(f64, i64)>> {
    let hs = opts.hs.clone().unwrap_or_else(|| vec![cfg.h]);
    if let Some(h) = hs.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(CliError::Usage(format!("h must be > 0, got {h}")));
    }
    if !opts.sweep {
        return Ok(hs.into_iter().map(|h| (h, cfg.n)).collect());
    }
    let stride = opts.stride.unwrap_or((cfg.n / 20).max(1));
    if stride < 1 {
        return Err(CliError::Usage(format!("stride must be >= 1, got {stride}")));
    }
    Ok(hs
        .into_iter()
        .flat_map(|h| (1..=cfg.n / stride).map(move |k| (h, k * stride)))
        .collect())
}

pub fn melnikov_table(results: &[MelnikovResult], json: bool) -> Table {
    let mut cols = vec!["h", "N", "d_lambda", "d_r", "err_lambda", "err_r"];
    if json {
        cols.extend(["d_lambda_over_h", "d_r_over_h", "telescope_residual"]);
    }
    let mut table = Table::new(&cols);
    for m in results {
        let mut row: Vec<Cell> = vec![
            m.h.into(),
            m.n.into(),
            m.d_lambda.into(),
            m.d_r.into(),
            m.err_lambda().into(),
            m.err_r().into(),
        ];
        if json {
            row.extend([m.d_lambda_over_h().into(), m.d_r_over_h().into(), m.telescope_residual.into()]);
        }
        table.push(row);
    }
    table
}

pub fn melnikov(cfg: &RunConfig, opts: &MelnikovOptions) -> CliResult<()> {
    let jobs = melnikov_jobs(cfg, opts)?;
    let a = cfg.coefficients();
    let results: Vec<MelnikovResult> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(h, n)| melnikov_sums(h, n, &a, opts.boundary_corrected))
            .collect::<Result<_, _>>()
    })?;
    let table = melnikov_table(&results, cfg.format == Format::Json);
    let extra = format!(
        "boundary_corrected={} sweep={}{}",
        opts.boundary_corrected,
        opts.sweep,
        opts.hs
            .as_ref()
            .map(|hs| format!(" hs={}", hs.iter().map(|h| format!("{h:?}")).collect::<Vec<_>>().join(";")))
            .unwrap_or_default()
    );
    emit(cfg.output.as_deref(), &table.render(cfg, &extra)?)
}

fn derive_order(order: usize) -> CliResult<FormalConservedQuantity> {
    if order == 0 || order % 2 != 0 {
        return Err(CliError::Usage(format!("order must be a positive even number, got {order}")));
    }
    Ok(derive(order)?)
}

/// Print the polynomial part of `H̄_order`; the full correction is `poly(x, y) e^{-2y}`.
pub fn conserved_derive(cfg: &RunConfig, order: usize) -> CliResult<()> {
    let fcq = derive_order(order)?;
    let poly = fcq.corrections[order / 2 - 1].poly.to_string();
    let text = match cfg.format {
        Format::Json => {
            let doc = serde_json::json!({ "order": order, "weight": "exp(-2*y)", "poly": poly });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv => format!("{poly}\n"),
    };
    emit(cfg.output.as_deref(), &text)
}

pub fn monitor_table(traj: &Trajectory, fcq: &FormalConservedQuantity) -> Table {
    let report = conservation_monitor(traj, fcq);
    let mut table = Table::new(&["n", "H", "Hbar"]);
    for (n, h, hbar) in report.rows {
        table.push(vec![n.into(), h.into(), hbar.into()]);
    }
    table.notes = traj.events.iter().map(event_note).collect();
    table
}

pub fn conserved_monitor(cfg: &RunConfig, order: usize) -> CliResult<()> {
    let fcq = derive_order(order)?;
    let map = build_map(cfg)?;
    let traj = iterate(&map, PlanarState::new(cfg.x0, cfg.y0), 0, steps_i64(cfg)?)?;
    let report = conservation_monitor(&traj, &fcq);
    eprintln!(
        "conserved monitor: ptp H = {:.3e}, ptp Hbar = {:.3e}",
        report.ptp_h, report.ptp_hbar
    );
    finish(cfg, &monitor_table(&traj, &fcq), &format!("action=monitor order={order}"))
}

pub fn blowup(cfg: &RunConfig, h1s: &[f64]) -> CliResult<()> {
    let mut reports = Vec::with_capacity(h1s.len());
    for &h1 in h1s {
        let (pa, pr) = k1_fixed_points(h1)?;
        reports.push((pa, pr, k1_jacobian_eigen_check(h1)?));
    }
    let extra = format!(
        "h1={}",
        h1s.iter().map(|h| format!("{h:?}")).collect::<Vec<_>>().join(";")
    );
    if cfg.format_explicit {
        let json = cfg.format == Format::Json;
        let mut cols = vec!["h1", "alpha", "dev_a", "dev_r"];
        if json {
            cols.push("dev_r_from_jacobian");
        }
        let mut table = Table::new(&cols);
        for (_, _, e) in &reports {
            let mut row: Vec<Cell> = vec![e.h1.into(), e.alpha.into(), e.dev_a.into(), e.dev_r.into()];
            if json {
                row.push(e.dev_r_from_jacobian.into());
            }
            table.push(row);
        }
        return emit(cfg.output.as_deref(), &table.render(cfg, &extra)?);
    }
    let mut text = String::new();
    for (pa, pr, e) in &reports {
        let pt = |p: &canard_core::blowup::ChartPointK1| {
            format!("(x1, r1, eps1, lambda1, h1) = ({}, {}, {}, {}, {})", p.x1, p.r1, p.eps1, p.lambda1, p.h1)
        };
        text.push_str(&format!("h1 = {}\n", e.h1));
        text.push_str(&format!("  p_a {}  x1-derivative alpha = {:.12}\n", pt(&pa.point), pa.derivative));
        text.push_str(&format!("  p_r {}  x1-derivative 1/alpha = {:.12}\n", pt(&pr.point), pr.derivative));
        text.push_str(&format!("  dev_a = {:.3e}  (J v_a against v_a + (0, 0, -2 h1^2))\n", e.dev_a));
        text.push_str(&format!("  dev_r = {:.3e}  (J v_r against v_r + (0, 0, +2 h1^2))\n", e.dev_r));
        text.push_str(&format!(
            "  dev_r_from_jacobian = {:.3e}  (J v_r against v_r + (0, 0, -2 h1^2))\n",
            e.dev_r_from_jacobian
        ));
    }
    emit(cfg.output.as_deref(), &text)
}

/// Sample points above the parabola `y = x² - 1/2`, where `ρ` is defined.
fn hamiltonian_samples() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in -4..=4 {
        let x = 0.25 * i as f64;
        for dy in [0.1, 0.5, 1.0, 2.0] {
            pts.push((x, x * x - 0.5 + dy));
        }
    }
    pts
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HamiltonianCheck {
    pub samples: usize,
    pub max_identity_residual: f64,
    pub max_det_rho_minus_one: f64,
    pub max_det_rho_times_phi_minus_one: f64,
    pub max_det_rho_exact_error: f64,
    pub max_step_det_minus_one: f64,
    pub v0: f64,
    pub w0: f64,
    pub h: f64,
    pub steps: usize,
    pub h0: f64,
    pub max_drift: f64,
    pub drift_trend: f64,
    pub completed: bool,
}

pub fn hamiltonian_check_report(h: f64, steps: usize, s0: HamiltonianState) -> CliResult<HamiltonianCheck> {
    let pts = hamiltonian_samples();
    let (mut id, mut lit, mut corr, mut exact) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for &(x, y) in &pts {
        id = id.max(identity_residual(x, y)?.abs());
        let det = rho_det_fd(x, y)?;
        let phi = 2.0 * y - 2.0 * x * x + 1.0;
        lit = lit.max((det - 1.0).abs());
        corr = corr.max((det * phi - 1.0).abs());
        exact = exact.max((det - rho_det_exact(x, y)?).abs());
    }
    let drift = drift_report(s0, h, steps);
    let (orbit, _) = symplectic_orbit(s0, h, steps.min(1000));
    let mut step_det = 0.0_f64;
    for s in orbit.iter().step_by(10) {
        if let Ok(d) = symplectic_step_det_fd(*s, h) {
            step_det = step_det.max((d - 1.0).abs());
        }
    }
    Ok(HamiltonianCheck {
        samples: pts.len(),
        max_identity_residual: id,
        max_det_rho_minus_one: lit,
        max_det_rho_times_phi_minus_one: corr,
        max_det_rho_exact_error: exact,
        max_step_det_minus_one: step_det,
        v0: s0.v,
        w0: s0.w,
        h,
        steps: drift.steps,
        h0: drift.h0,
        max_drift: drift.max_drift,
        drift_trend: (drift.late_mean - drift.early_mean).abs(),
        completed: drift.completed,
    })
}

pub fn hamiltonian_check(cfg: &RunConfig, v0: f64, w0: f64) -> CliResult<()> {
    let steps = usize::try_from(cfg.steps).map_err(|_| CliError::Usage("steps too large".into()))?;
    let r = hamiltonian_check_report(cfg.h, steps, HamiltonianState::new(v0, w0))?;
    let text = if cfg.format_explicit && cfg.format == Format::Json {
        serde_json::to_string_pretty(&r)? + "\n"
    } else {
        let x = rho_inv(v0, w0);
        format!(
            "identity H(x, y) = Hhat(rho(x, y)): max residual {:.3e} over {} points\n\
             det D rho - 1 (literal area preservation): max {:.3e}\n\
             det D rho * phi - 1, phi = 2y - 2x^2 + 1: max {:.3e}\n\
             det D rho against 1/phi: max error {:.3e}\n\
             symplectic Euler step det - 1: max {:.3e}\n\
             drift from (v0, w0) = ({}, {}) [(x, y) = ({:.6}, {:.6})], h = {}, {} steps{}:\n  \
             Hhat0 = {:.12}, max |Hhat - Hhat0| = {:.3e}, |late mean - early mean| = {:.3e}\n",
            r.max_identity_residual,
            r.samples,
            r.max_det_rho_minus_one,
            r.max_det_rho_times_phi_minus_one,
            r.max_det_rho_exact_error,
            r.max_step_det_minus_one,
            v0,
            w0,
            x.x,
            x.y,
            r.h,
            r.steps,
            if r.completed { "" } else { " (stopped at a singular step)" },
            r.h0,
            r.max_drift,
            r.drift_trend
        )
    };
    emit(cfg.output.as_deref(), &text)?;
    if r.completed {
        Ok(())
    } else {
        Err(CliError::Singular(format!("symplectic orbit stopped at n={}", r.steps)))
    }
}

pub fn hamiltonian_simulate(cfg: &RunConfig, v0: f64, w0: f64) -> CliResult<()> {
    symplectic_table(cfg, HamiltonianState::new(v0, w0), &format!("action=simulate v0={v0:?} w0={w0:?}"))
}

/// `H` at a state; used by figure tables.
pub fn h_of(s: PlanarState) -> f64 {
    first_integral(s.x, s.y)
}
