use std::fs;
use std::path::{Path, PathBuf};

use antipt_core::design::{overlap_and_area, phase_calibration_fit, CalibrationFit, CalibrationSample, FieldGrid, WaveguideDesign};
use antipt_core::fock::{DensityMatrix, StateVector};
use antipt_core::gaussian::{moment_ode, moment_ode_with_step};
use antipt_core::observables::{
    argmax, argmin, correlation_record, r3, r3_label, r4, sweep_phase_points, theta_grid, visibility,
    CorrelationRecord, Engine, SweepOptions, G3_TRIPLES,
};
use antipt_core::propagate::{evolve_master_with, evolve_nhh_with, MasterOptions, NhhOptions};
use antipt_core::units::{per_m_to_per_cm, UM};
use antipt_core::validation::{rel_diff, CriterionReport, ValidationOptions, Validator, CRITERIA};
use serde::Serialize;
use serde_json::json;

use crate::config::{sha256_hex, EngineName, FileConfig, Reader, RunConfig, Source};
use crate::output::{ensure_dir, num, output_paths, record_fields, record_header, to_json, write_file, Table};
use crate::quantity::Dim;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Files written by a command.
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

fn master_options(cfg: &RunConfig) -> MasterOptions {
    MasterOptions { step: cfg.step, include_jumps: cfg.jumps, ..Default::default() }
}

fn nhh_options(cfg: &RunConfig) -> NhhOptions {
    NhhOptions { step: cfg.step, ..Default::default() }
}

fn sidecar(cfg: &RunConfig, command: &str, csv: &Path, extra: serde_json::Value) -> serde_json::Value {
    json!({
        "command": command,
        "version": VERSION,
        "config_hash": cfg.hash(),
        "config": cfg,
        "threads": cfg.threads,
        "csv": csv.file_name().map(|n| n.to_string_lossy().into_owned()),
        "summary": extra,
    })
}

/// z-resolved correlators for one phase.
pub fn trajectory(cfg: &RunConfig, theta: f64) -> Result<Vec<CorrelationRecord>, CliError> {
    let p = cfg.params(theta)?;
    let records = match cfg.engine {
        EngineName::Master => {
            evolve_master_with(&p, &DensityMatrix::vacuum(p.basis()?), &master_options(cfg))?.records
        }
        EngineName::Nhh => evolve_nhh_with(&p, &StateVector::vacuum(p.basis()?), &nhh_options(cfg))?.records,
        EngineName::Gaussian => {
            let covs = match cfg.step {
                Some(h) => moment_ode_with_step(&p, &p.z_grid, h)?,
                None => moment_ode(&p, &p.z_grid)?,
            };
            p.z_grid
                .iter()
                .zip(&covs)
                .map(|(&z, c)| correlation_record(c, z, p.theta()))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(records)
}

pub fn evolve(cfg: &RunConfig) -> Result<Written, CliError> {
    if cfg.theta_grid.is_some() {
        return Err(CliError::Config("evolve takes a single theta; use sweep for a theta grid".into()));
    }
    if cfg.engine == EngineName::Gaussian && !cfg.jumps {
        log::warn!("the moment engine always includes the jump term; --no-jumps is ignored");
    }
    ensure_dir(&cfg.out_dir)?;
    let theta = cfg.theta.unwrap_or(0.0);
    log::info!("evolving {} engine at theta = {theta}", cfg.engine.as_str());
    let records = trajectory(cfg, theta)?;
    let table = Table {
        header: record_header(),
        rows: records.iter().map(|r| record_fields(r).into_iter().map(num).collect()).collect(),
        footer: vec![
            ("config_hash".into(), cfg.hash()),
            ("engine".into(), cfg.engine.as_str().into()),
            ("theta_rad".into(), num(theta)),
        ],
    };
    let (csv, side) = output_paths(&cfg.out_dir, &cfg.name);
    write_file(&csv, &table.to_bytes()?)?;
    let end = records.last().expect("non-empty trajectory");
    let summary = json!({ "rows": records.len(), "endpoint_G4": end.g4, "endpoint_norm": end.norm });
    write_file(&side, &to_json(&sidecar(cfg, "evolve", &csv, summary)))?;
    Ok(Written { csv, sidecar: side })
}

fn core_engine(e: EngineName) -> Engine {
    match e {
        EngineName::Master => Engine::Master,
        EngineName::Nhh => Engine::Nhh,
        EngineName::Gaussian => Engine::Gaussian,
    }
}

type PointResults = Vec<(f64, antipt_core::Result<CorrelationRecord>)>;

fn sweep_points(cfg: &RunConfig, engine: EngineName, grid: &[f64]) -> Result<PointResults, CliError> {
    let mut c = cfg.clone();
    c.engine = engine;
    let template = c.params(0.0)?;
    let opts = SweepOptions { threads: cfg.threads, master: master_options(cfg), nhh: nhh_options(cfg) };
    Ok(sweep_phase_points(&template, grid, core_engine(engine), &opts)?)
}

fn derived(r: &CorrelationRecord) -> Vec<f64> {
    let mut v = vec![r.g4_normalized().unwrap_or(f64::NAN), r4(r).unwrap_or(f64::NAN)];
    v.extend(G3_TRIPLES.iter().map(|t| r3(r, t).unwrap_or(f64::NAN)));
    v
}

pub fn sweep_grid(cfg: &RunConfig) -> Vec<f64> {
    match (&cfg.theta_grid, cfg.theta) {
        (Some(g), _) => g.clone(),
        (None, Some(t)) => vec![t],
        (None, None) => theta_grid(33),
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<Written, CliError> {
    ensure_dir(&cfg.out_dir)?;
    let grid = sweep_grid(cfg);
    log::info!("sweeping {} phases with the {} engine", grid.len(), cfg.engine.as_str());
    let points = sweep_points(cfg, cfg.engine, &grid)?;

    let mut header: Vec<String> = vec!["theta_rad".into(), "status".into()];
    header.extend(record_header());
    header.extend(["g4_normalized".to_string(), "R4".to_string()]);
    header.extend((0..4).map(r3_label));
    header.push("error".into());
    let width = header.len();

    let mut rows = Vec::with_capacity(points.len());
    let mut ok: Vec<&CorrelationRecord> = Vec::new();
    let mut failures: Vec<&antipt_core::Error> = Vec::new();
    for (theta, r) in &points {
        let mut row = vec![num(*theta)];
        match r {
            Ok(rec) => {
                row.push("ok".into());
                row.extend(record_fields(rec).into_iter().chain(derived(rec)).map(num));
                row.push(String::new());
                ok.push(rec);
            }
            Err(e) => {
                log::warn!("{e}");
                row.push("failed".into());
                row.resize(width - 1, num(f64::NAN));
                row.push(e.to_string());
                failures.push(e);
            }
        }
        rows.push(row);
    }

    let g4s: Vec<f64> = ok.iter().map(|r| r.g4).collect();
    let vis = visibility(&g4s).unwrap_or(f64::NAN);
    let at = |i: Option<usize>| i.map(|i| num(ok[i].theta)).unwrap_or_else(|| num(f64::NAN));
    let mut footer = vec![
        ("config_hash".to_string(), cfg.hash()),
        ("engine".into(), cfg.engine.as_str().into()),
        ("points".into(), points.len().to_string()),
        ("failed_points".into(), failures.len().to_string()),
        ("G4_visibility".into(), num(vis)),
        ("G4_min_theta_rad".into(), at(argmin(&g4s))),
        ("G4_max_theta_rad".into(), at(argmax(&g4s))),
    ];
    let mut summary = json!({
        "points": points.len(),
        "failed_points": failures.len(),
        "G4_visibility": vis,
    });
    if let Some(other) = cfg.compare {
        let reference = sweep_points(cfg, other, &grid)?;
        let dev = points
            .iter()
            .zip(&reference)
            .filter_map(|((_, a), (_, b))| match (a, b) {
                (Ok(a), Ok(b)) => Some(rel_diff(a.g4, b.g4)),
                _ => None,
            })
            .fold(0.0, f64::max);
        let key = format!("max_rel_G4_deviation_vs_{}", other.as_str());
        footer.push((key.clone(), num(dev)));
        summary[key] = json!(dev);
    }
    let table = Table { header, rows, footer };
    let (csv, side) = output_paths(&cfg.out_dir, &cfg.name);
    write_file(&csv, &table.to_bytes()?)?;
    write_file(&side, &to_json(&sidecar(cfg, "sweep", &csv, summary)))?;

    if let Some(e) = failures.first() {
        let msg = format!("{} of {} phase points failed; first: {e}", failures.len(), points.len());
        return Err(if failures.iter().any(|e| e.is_numerical()) { CliError::Numerical(msg) } else { CliError::Config(msg) });
    }
    Ok(Written { csv, sidecar: side })
}

/// Reads `P_heater_mW, P_a_W, P_b_W` rows; a non-numeric first row is taken as a header.
pub fn read_calibration(path: &Path) -> Result<(Vec<CalibrationSample>, String), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let vals: Vec<Option<f64>> = rec.iter().map(|s| s.parse().ok()).collect();
        if k == 0 && vals.first().is_some_and(Option::is_none) {
            continue;
        }
        let bad = |m: &str| CliError::Config(format!("{}:{line}: {m}", path.display()));
        if vals.len() != 3 {
            return Err(bad(&format!("expected 3 columns (P_heater_mW, P_a_W, P_b_W), found {}", vals.len())));
        }
        match vals[..] {
            [Some(h), Some(a), Some(b)] => out.push(CalibrationSample { heater_mw: h, p_a: a, p_b: b }),
            _ => return Err(bad("non-numeric value")),
        }
    }
    Ok((out, sha256_hex(&bytes)))
}

fn fit_json(fit: &CalibrationFit, samples: usize) -> serde_json::Value {
    json!({
        "a_W": fit.a,
        "b_rad_per_mW": fit.b,
        "c_W": fit.c,
        "theta0_rad": fit.theta0,
        "residual_W": fit.residual,
        "samples": samples,
        "evaluations": fit.evaluations,
    })
}

fn fit_samples(samples: &[CalibrationSample]) -> Result<CalibrationFit, CliError> {
    // Bad data is a user error even when it surfaces inside the fitter.
    phase_calibration_fit(samples).map_err(|e| CliError::Config(e.to_string()))
}

pub fn fit(path: &Path) -> Result<serde_json::Value, CliError> {
    let (samples, hash) = read_calibration(path)?;
    let fit = fit_samples(&samples)?;
    let mut v = fit_json(&fit, samples.len());
    v["input_sha256"] = json!(hash);
    v["version"] = json!(VERSION);
    Ok(v)
}

/// Design inputs not covered by the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct DesignArgs {
    /// Field profile at ω (plain-text matrix with an `nx ny dx dy` header).
    #[arg(long)]
    pub field_omega: Option<PathBuf>,
    /// Field profile at 2ω.
    #[arg(long)]
    pub field_2omega: Option<PathBuf>,
    /// Heater-scan CSV (P_heater_mW, P_a_W, P_b_W).
    #[arg(long)]
    pub calibration: Option<PathBuf>,
}

#[derive(Serialize)]
struct Inputs<'a> {
    #[serde(flatten)]
    design: &'a WaveguideDesign,
}

fn read_field(path: &Path) -> Result<FieldGrid, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e: antipt_core::Error| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn design(file: &FileConfig, source: Option<&Source>, args: &DesignArgs) -> Result<serde_json::Value, CliError> {
    let r = Reader { source };
    let s = &file.design;
    let mut d = WaveguideDesign::paper();
    let set = |slot: &mut f64, item, key: &str, dim| -> Result<(), CliError> {
        if let Some(v) = r.quantity(item, &format!("design.{key}"), dim)? {
            *slot = v;
        }
        Ok(())
    };
    set(&mut d.n_pump, &s.n_pump, "n_pump", Dim::Number)?;
    set(&mut d.n_fund, &s.n_fund, "n_fund", Dim::Number)?;
    set(&mut d.lambda_fund, &s.lambda_fund, "lambda_fund", Dim::Length)?;
    set(&mut d.lambda_pump, &s.lambda_pump, "lambda_pump", Dim::Length)?;
    set(&mut d.l_beat, &s.l_beat, "l_beat", Dim::Length)?;
    set(&mut d.gamma_c, &s.gamma_c, "gamma_c", Dim::InverseLength)?;
    set(&mut d.d_eff, &s.d_eff, "d_eff", Dim::Nonlinear)?;
    set(&mut d.zeta, &s.zeta, "zeta", Dim::Number)?;
    set(&mut d.a_eff, &s.a_eff, "a_eff", Dim::Area)?;
    set(&mut d.n_omega, &s.n_omega, "n_omega", Dim::Number)?;
    set(&mut d.n_2omega, &s.n_2omega, "n_2omega", Dim::Number)?;
    set(&mut d.pump_power, &s.pump_power, "pump_power", Dim::Power)?;

    let path_of = |flag: &Option<PathBuf>, item, key: &str| -> Result<Option<PathBuf>, CliError> {
        Ok(match flag {
            Some(p) => Some(p.clone()),
            None => r.text(item, key)?.map(|p| source.map(|s| s.resolve(&p)).unwrap_or_else(|| PathBuf::from(p))),
        })
    };
    let f1 = path_of(&args.field_omega, &s.field_omega, "design.field_omega")?;
    let f2 = path_of(&args.field_2omega, &s.field_2omega, "design.field_2omega")?;
    let mut overlap = serde_json::Value::Null;
    match (f1, f2) {
        (Some(a), Some(b)) => {
            let (zeta, a_eff) = overlap_and_area(&read_field(&a)?, &read_field(&b)?)
                .map_err(|e| CliError::Config(format!("field grids: {e}")))?;
            d.zeta = zeta;
            d.a_eff = a_eff;
            overlap = json!({ "zeta": zeta, "a_eff": { "m^2": a_eff, "um^2": a_eff / (UM * UM) } });
        }
        (None, None) => {}
        _ => return Err(CliError::Config("field_omega and field_2omega must be given together".into())),
    }

    let rep = d.report().map_err(|e| CliError::Config(e.to_string()))?;
    let rate = |x: f64| json!({ "m^-1": x, "cm^-1": per_m_to_per_cm(x) });
    let inputs = serde_json::to_value(Inputs { design: &d }).expect("serializable");
    let mut out = json!({
        "version": VERSION,
        "config_hash": sha256_hex(inputs.to_string().as_bytes()),
        "inputs_si": inputs,
        "outputs": {
            "poling_period": { "m": rep.poling_period, "um": rep.poling_period / UM },
            "kappa": rate(rep.kappa),
            "gamma": rate(rep.gamma),
            "g": { "m^-1 J^-1/2": rep.g },
            "epsilon": { "J^1/2": rep.epsilon },
            "g_eps": rate(rep.g_eps),
        },
        "overlap": overlap,
    });
    if let Some(p) = path_of(&args.calibration, &s.calibration, "design.calibration")? {
        let (samples, hash) = read_calibration(&p)?;
        let fit = fit_samples(&samples)?;
        let mut v = fit_json(&fit, samples.len());
        v["input_sha256"] = json!(hash);
        out["calibration"] = v;
    }
    Ok(out)
}

#[derive(Debug, Clone, clap::Args)]
pub struct ValidateArgs {
    /// Total photon cap of the master-equation runs.
    #[arg(long, default_value_t = 6)]
    pub cap: usize,
    /// Negate Λ_co (mutation check: the bright/dark consistency test must fail).
    #[arg(long)]
    pub flip_lambda_co: bool,
    #[arg(long, default_value_t = 33)]
    pub theta_points: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run only these criteria (e.g. A1,A5).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Write the full report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Serialize)]
struct ReportEntry<'a> {
    passed: bool,
    #[serde(flatten)]
    report: &'a CriterionReport,
}

pub fn validate(args: &ValidateArgs, mut print: impl FnMut(&str)) -> Result<Vec<CriterionReport>, CliError> {
    let ids: Vec<&str> = if args.only.is_empty() {
        CRITERIA.iter().map(|(id, _)| *id).collect()
    } else {
        args.only.iter().map(String::as_str).collect()
    };
    let opts = ValidationOptions {
        cap: args.cap,
        flip_lambda_co: args.flip_lambda_co,
        theta_points: args.theta_points,
        threads: args.threads,
    };
    let v = Validator::new(opts);
    let mut reports = Vec::new();
    for id in ids {
        let rep = v.run(id).ok_or_else(|| CliError::Config(format!("unknown criterion `{id}`")))?;
        print(&rep.to_string());
        reports.push(rep);
    }
    if let Some(path) = &args.json {
        let entries: Vec<ReportEntry> = reports.iter().map(|r| ReportEntry { passed: r.passed(), report: r }).collect();
        let all = reports.iter().all(CriterionReport::passed);
        write_file(path, &to_json(&json!({ "version": VERSION, "passed": all, "criteria": entries })))?;
    }
    Ok(reports)
}
