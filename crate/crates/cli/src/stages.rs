//! Pipeline stages behind the subcommands. Every stage reads the resolved
//! configuration, consumes prior-stage artifacts from the output
//! directory, and emits its snapshots plus a JSON-lines log; human
//! summaries go to standard output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use subsol::certify::{
    check_ei_x3, check_energy_budget, check_initial_closeness, check_strict_subsolution,
    check_symmetry_breaking, fold_linear_system, fold_strict_margins, linear_system_pair,
    strict_margin_field, BudgetInputs, BudgetSample, CertReport, CheckRecord, CheckStatus,
    RunMeta,
};
use subsol::energy;
use subsol::euler2d::{exact_triplet, read_mode_file, step};
use subsol::grid::{Grid, GridField};
use subsol::lift3d::{lift, lift_energy_identity_check, max_trace_defect};
use subsol::profiles::{e0_at, ebar_at, kinetic_energy_density, total_energy};
use subsol::pump::{defect_sweep, pump_initial, saturation_defect};
use subsol::residual::TripletRef;
use subsol::snapshot::{read_snapshot, snapshot_name, write_snapshot};

use crate::config::RunConfig;

/// Exit code for certification failures.
pub const EXIT_CHECK_FAILED: i32 = 1;

fn snap_path(out: &Path, prefix: &str, idx: usize) -> PathBuf {
    out.join(snapshot_name(prefix, idx))
}

fn jsonl_writer(path: &Path) -> Result<BufWriter<File>, String> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("cannot create {}: {e}", path.display()))
}

fn write_jsonl<T: Serialize>(w: &mut BufWriter<File>, record: &T) -> Result<(), String> {
    let line = serde_json::to_string(record).map_err(|e| e.to_string())?;
    writeln!(w, "{line}").map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct EnergyLogRecord {
    t: f64,
    e2: f64,
    enstrophy: f64,
}

/// `solve2d`: evolve the smooth 2-D flow and emit (v, u, q) snapshots
/// plus the energy log.
pub fn solve2d(cfg: &RunConfig) -> Result<i32, String> {
    let ic = cfg
        .ic
        .as_ref()
        .ok_or("no initial condition; pass --ic <mode file>")?;
    let grid = Grid::new(2, cfg.n).map_err(|e| e.to_string())?;
    let (mut state, trunc) =
        read_mode_file(ic, grid, cfg.complete_conjugates).map_err(|e| e.to_string())?;

    let max_dt = state.cfl_max_dt();
    if cfg.dt > max_dt {
        return Err(format!(
            "CFL violation at t = 0: dt = {:.3e} exceeds max admissible dt = {max_dt:.3e} \
             (dt * max|v| * N must stay below 0.5)",
            cfg.dt
        ));
    }

    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| format!("cannot create {}: {e}", cfg.out.display()))?;
    cfg.write_resolved()?;
    let mut energy_log = jsonl_writer(&cfg.out.join("energy.jsonl"))?;

    let n_steps = (cfg.t_end / cfg.dt + 0.5).floor() as usize;
    let mut snap_idx = 0usize;
    let e2_initial = state.kinetic_energy();
    for s in 0..=n_steps {
        if s % cfg.stride == 0 || s == n_steps {
            let triplet = exact_triplet(&state).map_err(|e| e.to_string())?;
            write_snapshot(&triplet.v, snap_path(&cfg.out, "v", snap_idx))
                .map_err(|e| e.to_string())?;
            write_snapshot(&triplet.u, snap_path(&cfg.out, "u", snap_idx))
                .map_err(|e| e.to_string())?;
            write_snapshot(&triplet.q, snap_path(&cfg.out, "q", snap_idx))
                .map_err(|e| e.to_string())?;
            write_jsonl(
                &mut energy_log,
                &EnergyLogRecord {
                    t: state.time(),
                    e2: state.kinetic_energy(),
                    enstrophy: state.enstrophy(),
                },
            )?;
            snap_idx += 1;
        }
        if s < n_steps {
            state = step(&state, cfg.dt).map_err(|e| e.to_string())?;
        }
    }
    energy_log.flush().map_err(|e| e.to_string())?;

    let e2_final = state.kinetic_energy();
    let drift = if e2_initial > 0.0 {
        (e2_final - e2_initial).abs() / e2_initial
    } else {
        e2_final.abs()
    };
    if trunc.dropped_modes > 0 {
        println!(
            "initial data truncated: {} modes dropped, omega L2 distance {:.3e}, \
             velocity L2 distance {:.3e}",
            trunc.dropped_modes, trunc.omega_l2, trunc.velocity_l2
        );
    }
    println!(
        "solve2d: N = {}, {} steps of dt = {}, {} snapshots, relative energy drift {:.3e}",
        cfg.n, n_steps, cfg.dt, snap_idx, drift
    );
    Ok(0)
}

/// `pump`: emit the pumped initial data and the convergence sweep.
pub fn pump(cfg: &RunConfig) -> Result<i32, String> {
    let v0_path = snap_path(&cfg.out, "v", 0);
    if !v0_path.exists() {
        return Err(format!(
            "missing {}; run `subsol solve2d` first",
            v0_path.display()
        ));
    }
    let v0 = read_snapshot(&v0_path).map_err(|e| e.to_string())?;
    let pcfg = cfg.pump_config()?;
    let vp = pump_initial(&v0, &pcfg).map_err(|e| e.to_string())?;
    write_snapshot(&vp, snap_path(&cfg.out, "vprime0", 0)).map_err(|e| e.to_string())?;

    let ke = kinetic_energy_density(&v0).map_err(|e| e.to_string())?;
    let e0 = e0_at(0.0, &ke, cfg.eta).map_err(|e| e.to_string())?;
    let defect = saturation_defect(&vp, &e0).map_err(|e| e.to_string())?;
    let mut diff_sq = 0.0;
    for (a, b) in vp.data().iter().zip(v0.data()) {
        diff_sq += (a - b) * (a - b);
    }
    let closeness = (diff_sq / v0.grid().points() as f64).sqrt();

    // canonical convergence sweep against rest data on the same grid
    let grid = v0.grid();
    let zero = GridField::zeros(grid, 2, 0.0);
    let ke_zero = kinetic_energy_density(&zero).map_err(|e| e.to_string())?;
    let e0_zero = e0_at(0.0, &ke_zero, cfg.eta).map_err(|e| e.to_string())?;
    let cutoff = grid.n() as f64 / 3.0;
    let xi_norm = ((pcfg.xi[0].pow(2) + pcfg.xi[1].pow(2)) as f64).sqrt();
    let admissible: Vec<u32> = [2u32, 4, 8, 16]
        .into_iter()
        .filter(|&n| n as f64 * xi_norm <= cutoff)
        .collect();
    let rows = defect_sweep(&zero, &e0_zero, &pcfg, &admissible).map_err(|e| e.to_string())?;
    let mut sweep_log = jsonl_writer(&cfg.out.join("pump_sweep.jsonl"))?;
    for row in &rows {
        write_jsonl(&mut sweep_log, row)?;
    }
    sweep_log.flush().map_err(|e| e.to_string())?;

    println!(
        "pump: n_osc = {}, xi = {:?}, amplitude {:.6}, ||v'(0) - v(0)||_L2 = {:.9} \
         (epsilon = {:.9})",
        pcfg.n_osc,
        pcfg.xi,
        pcfg.amplitude(),
        closeness,
        cfg.epsilon
    );
    println!(
        "pump: saturation defect L2 = {:.6e}, H^-1 = {:.6e}, mean = {:.3e}",
        defect.l2, defect.hminus1, defect.mean
    );
    for row in &rows {
        println!(
            "pump sweep: n_osc = {:2}  defect_l2 = {:.6e}  defect_hm1 = {:.6e}  mean = {:.3e}",
            row.n_osc, row.defect_l2, row.defect_hm1, row.mean_defect
        );
    }
    Ok(0)
}

#[derive(Serialize)]
struct LiftLogRecord {
    t: f64,
    e_identity_defect: f64,
    trace_max: f64,
}

/// `lift`: lift every 2-D triplet snapshot to the 3-D torus.
pub fn lift_stage(cfg: &RunConfig) -> Result<i32, String> {
    let count = count_series(&cfg.out, "v")?;
    require_series(&cfg.out, &["v", "u", "q"], count)?;
    let mut log = jsonl_writer(&cfg.out.join("lift.jsonl"))?;
    for idx in 0..count {
        let v = read_snapshot(snap_path(&cfg.out, "v", idx)).map_err(|e| e.to_string())?;
        let u = read_snapshot(snap_path(&cfg.out, "u", idx)).map_err(|e| e.to_string())?;
        let q = read_snapshot(snap_path(&cfg.out, "q", idx)).map_err(|e| e.to_string())?;
        let e2 = energy::energy_density_field(&v, &u).map_err(|e| e.to_string())?;
        let s = lift(&v, &u, &q, &e2).map_err(|e| e.to_string())?;
        let defect = lift_energy_identity_check(&s, &e2).map_err(|e| e.to_string())?;
        write_snapshot(&s.v, snap_path(&cfg.out, "v3", idx)).map_err(|e| e.to_string())?;
        write_snapshot(&s.u, snap_path(&cfg.out, "u3", idx)).map_err(|e| e.to_string())?;
        write_snapshot(&s.q, snap_path(&cfg.out, "q3", idx)).map_err(|e| e.to_string())?;
        write_jsonl(
            &mut log,
            &LiftLogRecord {
                t: v.time(),
                e_identity_defect: defect,
                trace_max: max_trace_defect(&s),
            },
        )?;
    }
    log.flush().map_err(|e| e.to_string())?;
    println!("lift: {count} snapshots lifted to the 3-D torus");
    Ok(0)
}

#[derive(Serialize)]
struct BudgetSampleRecord {
    t: f64,
    int_2ebar: f64,
    int_2e0: f64,
    e2: f64,
    slack_vs_initial: f64,
}

fn budget_inputs(cfg: &RunConfig) -> Result<BudgetInputs, String> {
    let count = count_series(&cfg.out, "v")?;
    let mut samples = Vec::with_capacity(count);
    for idx in 0..count {
        let v = read_snapshot(snap_path(&cfg.out, "v", idx)).map_err(|e| e.to_string())?;
        let t = v.time();
        let ke = kinetic_energy_density(&v).map_err(|e| e.to_string())?;
        let e0 = e0_at(t, &ke, cfg.eta).map_err(|e| e.to_string())?;
        let ebar = ebar_at(t, &e0, cfg.eta).map_err(|e| e.to_string())?;
        samples.push(BudgetSample {
            t,
            int_2ebar: total_energy(&ebar),
            int_2e0: total_energy(&e0),
            e2: total_energy(&ke),
        });
    }
    let vprime0_path = snap_path(&cfg.out, "vprime0", 0);
    let vprime0_l2sq = if vprime0_path.exists() {
        let vp = read_snapshot(&vprime0_path).map_err(|e| e.to_string())?;
        Some(vp.l2_norm().powi(2))
    } else {
        None
    };
    Ok(BudgetInputs { eta: cfg.eta, samples, vprime0_l2sq })
}

/// `budget`: evaluate and certify the energy chain on sampled times.
pub fn budget(cfg: &RunConfig) -> Result<i32, String> {
    let inputs = budget_inputs(cfg)?;
    let (record, links) =
        check_energy_budget(&inputs, cfg.tolerances.budget_equality, cfg.tolerances.energy_conservation)
            .map_err(|e| e.to_string())?;

    let anchor = inputs
        .samples
        .iter()
        .find(|s| s.t == 0.0)
        .map(|s| s.int_2e0)
        .unwrap_or(f64::NAN);
    let mut log = jsonl_writer(&cfg.out.join("budget.jsonl"))?;
    for s in &inputs.samples {
        write_jsonl(
            &mut log,
            &BudgetSampleRecord {
                t: s.t,
                int_2ebar: s.int_2ebar,
                int_2e0: s.int_2e0,
                e2: s.e2,
                slack_vs_initial: anchor - s.int_2ebar,
            },
        )?;
    }
    for link in &links {
        write_jsonl(&mut log, link)?;
    }
    log.flush().map_err(|e| e.to_string())?;

    println!("budget: int 2 e0(0) dx = {anchor:.12}");
    for s in &inputs.samples {
        println!(
            "budget: t = {:6.3}  int 2 ebar = {:.12}  slack = {:+.6e}",
            s.t,
            s.int_2ebar,
            anchor - s.int_2ebar
        );
    }
    let ok = record.status == CheckStatus::Pass;
    println!(
        "budget: {} (worst margin {:+.3e})",
        if ok { "PASS" } else { "FAIL" },
        record.margin
    );
    Ok(if ok { 0 } else { EXIT_CHECK_FAILED })
}

/// `certify`: run all six checks and emit the certificate. With
/// `dump_margins`, the pointwise strictness margin of every snapshot is
/// written as `strict_margin_t<idx>.fld`.
pub fn certify(cfg: &RunConfig, dump_margins: bool) -> Result<i32, String> {
    let count2 = count_series(&cfg.out, "v")?;
    require_series(&cfg.out, &["v", "u", "q"], count2)?;
    let count3 = count_series(&cfg.out, "v3")?;
    require_series(&cfg.out, &["v3", "u3", "q3"], count3)?;
    if count3 != count2 {
        return Err(format!(
            "snapshot series disagree: {count2} planar vs {count3} lifted; re-run `subsol lift`"
        ));
    }
    let tol = &cfg.tolerances;

    // planar series is small; load it whole
    let mut series2: Vec<(GridField, GridField, GridField)> = Vec::with_capacity(count2);
    for idx in 0..count2 {
        series2.push((
            read_snapshot(snap_path(&cfg.out, "v", idx)).map_err(|e| e.to_string())?,
            read_snapshot(snap_path(&cfg.out, "u", idx)).map_err(|e| e.to_string())?,
            read_snapshot(snap_path(&cfg.out, "q", idx)).map_err(|e| e.to_string())?,
        ));
    }
    let lin2d = if count2 >= 2 {
        let refs: Vec<TripletRef> = series2
            .iter()
            .map(|(v, u, q)| TripletRef { v, u, q })
            .collect();
        let mut pairs = Vec::new();
        for w in refs.windows(2) {
            pairs.push(linear_system_pair(&w[0], &w[1]).map_err(|e| e.to_string())?);
        }
        fold_linear_system("linear_system_2d", &pairs, tol.linear_system_2d)
    } else {
        CheckRecord::skipped("linear_system_2d", "fewer than 2 snapshots")
    };

    // lifted series is large; stream it
    let mut pairs3 = Vec::new();
    let mut strict = Vec::new();
    let mut ei_series = Vec::new();
    let mut prev: Option<(GridField, GridField, GridField)> = None;
    for idx in 0..count3 {
        let v3 = read_snapshot(snap_path(&cfg.out, "v3", idx)).map_err(|e| e.to_string())?;
        let u3 = read_snapshot(snap_path(&cfg.out, "u3", idx)).map_err(|e| e.to_string())?;
        let q3 = read_snapshot(snap_path(&cfg.out, "q3", idx)).map_err(|e| e.to_string())?;
        let t = v3.time();
        let t2 = series2[idx].0.time();
        if (t - t2).abs() > 1e-12 {
            return Err(format!(
                "lifted snapshot {idx} is at t = {t} but the planar one is at t = {t2}; \
                 re-run `subsol lift`"
            ));
        }

        // profile at this sample, from the planar velocity
        let ke = kinetic_energy_density(&series2[idx].0).map_err(|e| e.to_string())?;
        let e0 = e0_at(t, &ke, cfg.eta).map_err(|e| e.to_string())?;
        let ebar = ebar_at(t, &e0, cfg.eta).map_err(|e| e.to_string())?;
        strict.push(check_strict_subsolution(&v3, &u3, &ebar).map_err(|e| e.to_string())?);
        if dump_margins {
            let margin = strict_margin_field(&v3, &u3, &ebar).map_err(|e| e.to_string())?;
            write_snapshot(&margin, snap_path(&cfg.out, "strict_margin", idx))
                .map_err(|e| e.to_string())?;
        }
        ei_series.push((t, check_ei_x3(&ebar, tol.ei_x3).map_err(|e| e.to_string())?));

        if let Some((pv, pu, pq)) = &prev {
            let a = TripletRef { v: pv, u: pu, q: pq };
            let b = TripletRef { v: &v3, u: &u3, q: &q3 };
            pairs3.push(linear_system_pair(&a, &b).map_err(|e| e.to_string())?);
        }
        prev = Some((v3, u3, q3));
    }
    let lin3d = if count3 >= 2 {
        fold_linear_system("linear_system_3d", &pairs3, tol.linear_system_3d)
    } else {
        CheckRecord::skipped("linear_system_3d", "fewer than 2 snapshots")
    };
    let strict_rec = fold_strict_margins(&strict, tol.strict_subsolution);
    let symmetry_rec = check_symmetry_breaking(&ei_series, tol.ei_x3);

    let inputs = budget_inputs(cfg)?;
    let (budget_rec, _links) =
        check_energy_budget(&inputs, tol.budget_equality, tol.energy_conservation)
            .map_err(|e| e.to_string())?;

    let v0 = &series2[0].0;
    let vprime0_path = snap_path(&cfg.out, "vprime0", 0);
    let closeness_rec = if vprime0_path.exists() {
        let vp = read_snapshot(&vprime0_path).map_err(|e| e.to_string())?;
        check_initial_closeness(&vp, v0, cfg.epsilon, tol.initial_closeness_slack)
            .map_err(|e| e.to_string())?
    } else {
        // without pumped data the realized initial datum is v(0) itself
        check_initial_closeness(v0, v0, cfg.epsilon, tol.initial_closeness_slack)
            .map_err(|e| e.to_string())?
    };

    let checks = vec![lin2d, lin3d, strict_rec, symmetry_rec, budget_rec, closeness_rec];
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = RunMeta {
        n: cfg.n,
        dt: cfg.dt,
        eta: cfg.eta,
        epsilon: cfg.epsilon,
        timestamp,
    };
    let report = CertReport::new(meta, checks).map_err(|e| e.to_string())?;
    report
        .write(cfg.out.join("report.json"))
        .map_err(|e| e.to_string())?;
    let mut log = jsonl_writer(&cfg.out.join("certify.jsonl"))?;
    for check in &report.checks {
        write_jsonl(&mut log, check)?;
    }
    log.flush().map_err(|e| e.to_string())?;

    print_checks(&report);
    let ok = report.all_passed();
    println!("certify: {}", if ok { "ALL CHECKS PASS" } else { "CHECKS FAILED" });
    Ok(if ok { 0 } else { EXIT_CHECK_FAILED })
}

/// `report`: pretty-print an existing certificate.
pub fn report(path: &Path) -> Result<i32, String> {
    let report = CertReport::read(path).map_err(|e| e.to_string())?;
    println!(
        "run: N = {}, dt = {}, eta = {}, epsilon = {}, timestamp = {}",
        report.meta.n, report.meta.dt, report.meta.eta, report.meta.epsilon, report.meta.timestamp
    );
    print_checks(&report);
    Ok(if report.all_passed() { 0 } else { EXIT_CHECK_FAILED })
}

fn print_checks(report: &CertReport) {
    for c in &report.checks {
        let status = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        let mut line = format!(
            "{status}  {:<22} margin = {:+.6e}  tolerance = {:.3e}",
            c.name, c.margin, c.tolerance
        );
        if let Some(t) = c.worst_t {
            line.push_str(&format!("  worst_t = {t:.4}"));
        }
        if let Some(reason) = &c.reason {
            line.push_str(&format!("  ({reason})"));
        }
        println!("{line}");
    }
}

/// Number of consecutive snapshots with the given prefix, starting at 0.
fn count_series(out: &Path, prefix: &str) -> Result<usize, String> {
    let mut idx = 0;
    while snap_path(out, prefix, idx).exists() {
        idx += 1;
    }
    if idx == 0 {
        let stage = if prefix.ends_with('3') { "lift" } else { "solve2d" };
        return Err(format!(
            "missing {}; run `subsol {stage}` first",
            snap_path(out, prefix, 0).display()
        ));
    }
    Ok(idx)
}

/// Every prefix must cover indices 0..count; report all gaps at once.
fn require_series(out: &Path, prefixes: &[&str], count: usize) -> Result<(), String> {
    let mut missing = Vec::new();
    for prefix in prefixes {
        for idx in 0..count {
            let p = snap_path(out, prefix, idx);
            if !p.exists() {
                missing.push(p.display().to_string());
            }
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(format!("missing stage outputs: {}", missing.join(", ")))
    }
}
