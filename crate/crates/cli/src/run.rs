//! Scenario execution, sweeps, Zeno tables and kernel validation.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde_json::{json, Value};

use wqed::analysis::{instantaneous_rate, peak, plateau, population_change, Scope};
use wqed::dde::solve_retard;
use wqed::field::{default_t_grid, default_x_grid, intensity_const, intensity_retard};
use wqed::model::{markovian_rate, zeno_time_array, zeno_time_single};
use wqed::volterra::{self, validate_kernels};
use wqed::{AmplitudeTrajectory, CouplingModel, Framework};

use crate::config::{Scenario, ScenarioConfig};
use crate::CliError;

/// Long-time and peak rates of one framework run, in units of `Γ0`.
#[derive(Debug, Clone, Copy)]
pub struct FrameworkSummary {
    pub framework: Framework,
    pub plateau: f64,
    pub peak: f64,
    pub peak_time: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub stem: String,
    pub hash: String,
    pub files: Vec<PathBuf>,
    pub summaries: Vec<FrameworkSummary>,
    pub notes: Vec<String>,
    pub config: ScenarioConfig,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish_file(path: &Path, w: std::io::Result<()>) -> Result<(), CliError> {
    w.map_err(|e| CliError::io(path, e))
}

/// `Γ_Mar` for a single emitter of the layout, when its legs are uniform.
pub fn markovian_reference(s: &Scenario) -> Option<f64> {
    if s.layout.n_atoms() != 1 {
        return None;
    }
    let m = s.layout.n_legs();
    let spacing = if m == 1 { Some(0.0) } else { s.layout.within_atom_spacing() };
    spacing.map(|d| markovian_rate(1.0, m, s.setup.k0() * d))
}

fn solve(s: &Scenario, fw: Framework) -> Result<AmplitudeTrajectory, CliError> {
    let traj = match fw {
        Framework::Const => volterra::solve(&s.setup.with_model(CouplingModel::ConstWQED)?, &s.layout, &s.state, s.t_end, s.dt)?,
        Framework::Lin => volterra::solve(&s.setup.with_model(CouplingModel::LinWQED)?, &s.layout, &s.state, s.t_end, s.dt)?,
        Framework::Retard => solve_retard(&s.layout, s.setup.gamma0, s.setup.omega0, &s.state, s.t_end, s.dt)?,
    };
    Ok(traj)
}

/// Runs every framework of the scenario and writes the requested artifacts
/// into `out_dir`.
pub fn execute(s: &Scenario, stem: &str, out_dir: &Path) -> Result<ScenarioResult, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let hash = s.config.hash();
    let which = |k: &str| s.config.outputs.which.iter().any(|w| w == k);
    let base = format!("{stem}-{hash}");
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    let mut notes: Vec<String> = s.setup.warnings().to_vec();
    let w0 = s.setup.omega0;

    for &fw in &s.frameworks {
        let traj = solve(s, fw)?;
        let tag = fw.as_str();
        if which("trajectories") {
            let path = out_dir.join(format!("{base}-{tag}-trajectory.csv"));
            finish_file(&path, traj.write_csv(create(&path)?))?;
            files.push(path);
            if fw == Framework::Retard {
                notes.push("retard trajectory: N_B column holds the closure 1 - sum |c_n|^2".into());
            }
        }
        let total = instantaneous_rate(&traj, Scope::Total)?;
        if which("rates") {
            let path = out_dir.join(format!("{base}-{tag}-rates-total.csv"));
            finish_file(&path, total.write_csv(create(&path)?))?;
            files.push(path);
            for n in 0..traj.n_atoms() {
                let series = instantaneous_rate(&traj, Scope::Atom(n))?;
                let path = out_dir.join(format!("{base}-{tag}-rates-atom{}.csv", n + 1));
                finish_file(&path, series.write_csv(create(&path)?))?;
                files.push(path);
            }
            let path = out_dir.join(format!("{base}-{tag}-population-change.csv"));
            let changes: Vec<Vec<f64>> = (0..traj.n_atoms()).map(|n| population_change(&traj, n)).collect::<Result<_, _>>()?;
            let write = |mut w: BufWriter<File>| -> std::io::Result<()> {
                write!(w, "t*omega0")?;
                for n in 1..=traj.n_atoms() {
                    write!(w, ",dPe{n}*omega0/gamma0")?;
                }
                writeln!(w)?;
                for j in 0..traj.len() {
                    write!(w, "{:.10e}", traj.time(j) * w0)?;
                    for c in &changes {
                        write!(w, ",{:.12e}", c[j])?;
                    }
                    writeln!(w)?;
                }
                w.flush()
            };
            finish_file(&path, write(create(&path)?))?;
            files.push(path);
        }
        if which("field") {
            let xs = default_x_grid(&s.layout, s.config.outputs.field_points_per_d, s.config.outputs.field_margin_d);
            let ts = default_t_grid(&traj, s.config.outputs.field_time_stride);
            let map = match fw {
                Framework::Retard => Some(intensity_retard(&traj, &s.layout, &xs, &ts)?),
                Framework::Const => Some(intensity_const(&traj, &s.layout, &s.setup.with_model(CouplingModel::ConstWQED)?, &xs, &ts)?),
                Framework::Lin => {
                    notes.push("field map skipped for lin: no intensity formula for this coupling".into());
                    None
                }
            };
            if let Some(map) = map {
                let map = map.with_label(s.state.label().as_str());
                let path = out_dir.join(format!("{base}-{tag}-field.csv"));
                finish_file(&path, map.write_csv(create(&path)?, w0))?;
                files.push(path);
                let path = out_dir.join(format!("{base}-{tag}-field.dat"));
                finish_file(&path, map.write_matrix(create(&path)?, w0))?;
                files.push(path);
            }
        }
        let (peak_time, pk) = peak(&total).unwrap_or((f64::NAN, f64::NAN));
        let pl = plateau(&total, 0.1).unwrap_or(f64::NAN);
        summaries.push(FrameworkSummary { framework: fw, plateau: pl, peak: pk, peak_time });
    }
    if which("zeno") {
        let path = out_dir.join(format!("{base}-zeno.csv"));
        let rows = zeno_rows(s);
        let write = |mut w: BufWriter<File>| -> std::io::Result<()> {
            writeln!(w, "quantity,value")?;
            for (k, v) in &rows {
                writeln!(w, "{k},{}", v.map_or("nan".to_string(), |v| format!("{v:.12e}")))?;
            }
            w.flush()
        };
        finish_file(&path, write(create(&path)?))?;
        files.push(path);
    }
    Ok(ScenarioResult { stem: stem.to_string(), hash, files, summaries, notes, config: s.config.clone() })
}

/// Zeno times and Markovian rates of the scenario, in `1/ω0` and `Γ0`.
pub fn zeno_rows(s: &Scenario) -> Vec<(String, Option<f64>)> {
    let mut rows = Vec::new();
    let m = s.layout.n_legs();
    let spacing = if m == 1 { Some(s.layout.min_spacing()) } else { s.layout.within_atom_spacing() };
    rows.push(("tau_z_single_omega0".to_string(), spacing.and_then(|d| zeno_time_single(&s.setup, m, d).ok()).map(|t| t * s.setup.omega0)));
    let k0 = s.setup.k0();
    rows.push(("tau_zn_plus_omega0".to_string(), zeno_time_array(&s.setup, &s.layout, k0).ok().map(|t| t * s.setup.omega0)));
    rows.push(("tau_zn_minus_omega0".to_string(), zeno_time_array(&s.setup, &s.layout, -k0).ok().map(|t| t * s.setup.omega0)));
    for legs in 1..=m.max(4) {
        rows.push((format!("gamma_mar_M{legs}_over_gamma0"), spacing.map(|d| markovian_rate(1.0, legs, k0 * d))));
        rows.push((format!("tau_z_M{legs}_omega0"), spacing.and_then(|d| zeno_time_single(&s.setup, legs, d).ok()).map(|t| t * s.setup.omega0)));
    }
    rows
}

fn scenario_json(r: &ScenarioResult) -> Value {
    json!({
        "stem": r.stem,
        "hash": r.hash,
        "config": r.config,
        "files": r.files.iter().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "summary": r.summaries.iter().map(|s| json!({
            "framework": s.framework.as_str(),
            "plateau_rate_over_gamma0": finite(s.plateau),
            "peak_rate_over_gamma0": finite(s.peak),
            "peak_t_omega0": finite(s.peak_time),
        })).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Writes the manifest; the only place wall-clock data appears.
pub fn write_manifest(path: &Path, command: &str, results: &[ScenarioResult], started: Instant, extra: Value) -> Result<(), CliError> {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let doc = json!({
        "engine": "wqed",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "finished_unix": now,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "scenarios": results.iter().map(scenario_json).collect::<Vec<_>>(),
        "extra": extra,
    });
    let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
}

fn out_dir(config: &ScenarioConfig, cfg_path: &Path, override_dir: Option<&Path>) -> PathBuf {
    match override_dir {
        Some(d) => d.to_path_buf(),
        None => {
            let d = PathBuf::from(&config.outputs.directory);
            if d.is_absolute() {
                d
            } else {
                cfg_path.parent().unwrap_or(Path::new(".")).join(d)
            }
        }
    }
}

/// `run <cfg>`.
pub fn run_command(cfg_path: &Path, override_dir: Option<&Path>) -> Result<ScenarioResult, CliError> {
    let started = Instant::now();
    let (config, src) = ScenarioConfig::load(cfg_path)?;
    let scenario = config.build(&src)?;
    let dir = out_dir(&config, cfg_path, override_dir);
    let stem = stem_of(cfg_path);
    let result = execute(&scenario, &stem, &dir)?;
    let manifest = dir.join(format!("{stem}-{}-manifest.json", result.hash));
    write_manifest(&manifest, "run", std::slice::from_ref(&result), started, Value::Null)?;
    Ok(result)
}

pub const SWEEP_AXES: [&str; 5] = ["d", "M", "N", "gamma0_over_omega0", "cutoff_ratio"];

fn apply_axis(config: &ScenarioConfig, axis: &str, value: f64) -> Result<ScenarioConfig, CliError> {
    let mut c = config.clone();
    let as_count = |v: f64| -> Result<usize, CliError> {
        if v >= 1.0 && v.fract() == 0.0 && v <= 1e6 {
            Ok(v as usize)
        } else {
            Err(CliError::config(format!("axis {axis} needs positive integers, got {v}")))
        }
    };
    match axis {
        "d" => c.layout.d_in_units_of_pi_over_k0 = Some(value),
        "M" => c.layout.n_legs = Some(as_count(value)?),
        "N" => c.layout.n_atoms = Some(as_count(value)?),
        "gamma0_over_omega0" => c.setup.gamma0_over_omega0 = value,
        "cutoff_ratio" => c.setup.cutoff_ratio = value,
        other => return Err(CliError::config(format!("unknown sweep axis {other:?}; expected one of {SWEEP_AXES:?}"))),
    }
    Ok(c)
}

/// `sweep <cfg> --axis <p> --values <list>`.
pub fn sweep_command(cfg_path: &Path, axis: &str, values: &[f64], override_dir: Option<&Path>) -> Result<(PathBuf, Vec<ScenarioResult>), CliError> {
    let started = Instant::now();
    if !SWEEP_AXES.contains(&axis) {
        return Err(CliError::config(format!("unknown sweep axis {axis:?}; expected one of {SWEEP_AXES:?}")));
    }
    if values.is_empty() {
        return Err(CliError::config("sweep needs at least one value"));
    }
    let (config, src) = ScenarioConfig::load(cfg_path)?;
    let scenarios: Vec<Scenario> = values
        .iter()
        .map(|&v| apply_axis(&config, axis, v)?.build(&src).map_err(|e| CliError { code: e.code, message: format!("{axis} = {v}: {}", e.message) }))
        .collect::<Result<_, _>>()?;
    let dir = out_dir(&config, cfg_path, override_dir);
    let stem = stem_of(cfg_path);
    let results: Vec<ScenarioResult> = scenarios
        .par_iter()
        .enumerate()
        .map(|(i, s)| execute(s, &format!("{stem}-{axis}-{}", i + 1), &dir))
        .collect::<Result<_, _>>()?;

    let summary = dir.join(format!("{stem}-sweep-{axis}-summary.csv"));
    let write = |mut w: BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{axis},framework,plateau_rate_over_gamma0,peak_rate_over_gamma0,peak_t_omega0,markovian_rate_over_gamma0")?;
        for ((v, s), r) in values.iter().zip(&scenarios).zip(&results) {
            let mar = markovian_reference(s).map_or("nan".to_string(), |m| format!("{m:.10e}"));
            for f in &r.summaries {
                writeln!(w, "{v:e},{},{:.10e},{:.10e},{:.10e},{mar}", f.framework.as_str(), f.plateau, f.peak, f.peak_time)?;
            }
        }
        w.flush()
    };
    finish_file(&summary, write(create(&summary)?))?;
    let manifest = dir.join(format!("{stem}-sweep-{axis}-manifest.json"));
    write_manifest(&manifest, "sweep", &results, started, json!({ "axis": axis, "values": values, "summary": summary.file_name().map(|f| f.to_string_lossy().into_owned()) }))?;
    Ok((summary, results))
}

/// `zeno <cfg>`: a printable table.
pub fn zeno_command(cfg_path: &Path) -> Result<String, CliError> {
    let (config, src) = ScenarioConfig::load(cfg_path)?;
    let s = config.build(&src)?;
    let mut out = String::new();
    let phi = s.layout.within_atom_spacing().map(|d| d * s.setup.k0() / PI);
    out.push_str(&format!(
        "model {}, gamma0/omega0 = {:e}, cutoff = {:e}, N = {}, M = {}, k0 d/pi = {}\n",
        s.setup.coupling_model.as_str(),
        s.setup.gamma0 / s.setup.omega0,
        s.setup.cutoff_ratio,
        s.layout.n_atoms(),
        s.layout.n_legs(),
        phi.map_or("n/a".into(), |p| format!("{p}"))
    ));
    for (k, v) in zeno_rows(&s) {
        out.push_str(&format!("{k:<28} {}\n", v.map_or("n/a".to_string(), |v| format!("{v:.6}"))));
    }
    Ok(out)
}

/// `validate-kernels`: the report text and whether it passed.
pub fn validate_command(samples: usize, seed: u64) -> Result<(String, Result<(), CliError>), CliError> {
    let v = validate_kernels(samples, seed)?;
    let mut buf = Vec::new();
    v.write_report(&mut buf).expect("in-memory write");
    let text = String::from_utf8(buf).expect("report is utf-8");
    let w = v.worst();
    let verdict = if v.max_error() <= 1e-7 {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "kernel mismatch {:.3e} > 1e-7 at model = {}, phase = {:.17e}, lag = {:.17e}, cutoff = {:e}",
            v.max_error(),
            w.model.as_str(),
            w.phase,
            w.lag,
            w.cutoff
        )))
    };
    Ok((text, verdict))
}
