//! Subcommand implementations: resolve the model, run the core machinery,
//! and serialize reports deterministically.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use epkit::chirality::{classify, Handedness, WidthVariant};
use epkit::cmatrix::{t_product, CSymMatrix};
use epkit::continuation::monodromy;
use epkit::epsearch::{locate_ep2, locate_ep3};
use epkit::model::{
    build_generic, build_special, ep2_control_family, ep3_couplings, ep_vector,
    first_order_energy_coeff, special_coupling_family, validate_ep3, Family, GenericFamilyParams,
    Sign,
};
use epkit::puiseux::{
    energy_fits, fit_power, log_spaced, overlap_fits, sample_ray, triangle_stats,
};
use epkit::{CSymMatrix64, Family64, C64};

use crate::args::{ModelArgs, SweepArgsCommon};
use crate::fmt::{fmt_f64, to_json};

/// CLI failure: verification findings exit 1, usage/config problems exit
/// 2, numerical errors from the library exit 3.
#[derive(Debug)]
pub enum CliError {
    ChecksFailed { failed: usize, total: usize },
    Usage(String),
    Numeric(epkit::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::ChecksFailed { failed, total } => {
                write!(f, "{failed} of {total} verification checks failed")
            }
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Numeric(e) => write!(f, "error[{}]: {e}", e.name()),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::ChecksFailed { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<epkit::Error> for CliError {
    fn from(e: epkit::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// ---------------------------------------------------------------------------
// config file

#[derive(Deserialize, Debug, Default)]
struct ConfigFile {
    model: Option<ModelConfig>,
    sweep: Option<SweepConfig>,
    tolerances: Option<TolerancesConfig>,
}

#[derive(Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
enum ModelConfig {
    Special {
        e: [[f64; 2]; 3],
        signs: [i8; 2],
    },
    Generic {
        e: [[f64; 2]; 3],
        o: [[f64; 2]; 3],
        angles: [f64; 3],
    },
    Explicit {
        h0: Vec<Vec<[f64; 2]>>,
        h1: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Deserialize, Debug)]
struct SweepConfig {
    center: Option<[f64; 2]>,
    direction: Option<[f64; 2]>,
    radii: Option<RadiiConfig>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum RadiiConfig {
    List(Vec<f64>),
    Range { min: f64, max: f64, count: usize },
}

#[derive(Deserialize, Debug)]
struct TolerancesConfig {
    validate_ep3: Option<f64>,
}

/// Characteristic-polynomial tolerance for the construct rank check;
/// overridable through the config file.
fn validate_tolerance(args: &ModelArgs) -> CliResult<f64> {
    if let Some(path) = &args.config {
        if let Some(tols) = load_config(path)?.tolerances {
            if let Some(tol) = tols.validate_ep3 {
                return Ok(tol);
            }
        }
    }
    Ok(1e-10)
}

fn load_config(path: &Path) -> CliResult<ConfigFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("malformed config {}: {e}", path.display())))
}

fn complex_of(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

fn matrix_of(rows: &[Vec<[f64; 2]>]) -> CliResult<CSymMatrix64> {
    let converted: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&p| complex_of(p)).collect())
        .collect();
    CSymMatrix::from_rows(&converted).map_err(CliError::from)
}

// ---------------------------------------------------------------------------
// model resolution

/// A resolved model: the pencil plus, when it is the special construction,
/// the data the construct/classify paths need.
pub struct ResolvedModel {
    pub family: Family64,
    pub special: Option<SpecialData>,
}

pub struct SpecialData {
    pub e: [C64; 3],
    pub signs: (Sign, Sign),
}

fn sign_of(v: i8) -> CliResult<Sign> {
    match v {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        other => Err(usage(format!("sign selector must be 1 or -1, got {other}"))),
    }
}

pub fn resolve_model(args: &ModelArgs) -> CliResult<ResolvedModel> {
    // explicit energies on the command line take precedence
    if let Some(e) = &args.e {
        if e.len() != 3 {
            return Err(usage("--e needs exactly three complex values"));
        }
        let signs = match &args.signs {
            Some(s) if s.len() == 2 => (s[0], s[1]),
            Some(_) => return Err(usage("--signs needs exactly two selectors")),
            None => (Sign::Plus, Sign::Plus),
        };
        return special_model([e[0], e[1], e[2]], signs);
    }
    if let Some(name) = &args.model {
        return builtin_model(name);
    }
    if let Some(path) = &args.config {
        let config = load_config(path)?;
        let model = config
            .model
            .ok_or_else(|| usage("config has no model section"))?;
        return match model {
            ModelConfig::Special { e, signs } => special_model(
                [complex_of(e[0]), complex_of(e[1]), complex_of(e[2])],
                (sign_of(signs[0])?, sign_of(signs[1])?),
            ),
            ModelConfig::Generic { e, o, angles } => {
                let params = GenericFamilyParams {
                    e: [complex_of(e[0]), complex_of(e[1]), complex_of(e[2])],
                    o: [complex_of(o[0]), complex_of(o[1]), complex_of(o[2])],
                    angles,
                };
                Ok(ResolvedModel {
                    family: build_generic(&params)?,
                    special: None,
                })
            }
            ModelConfig::Explicit { h0, h1 } => {
                let family = Family::new(matrix_of(&h0)?, matrix_of(&h1)?)?;
                Ok(ResolvedModel {
                    family,
                    special: None,
                })
            }
        };
    }
    Err(usage("no model given: use --e, --model, or --config"))
}

fn special_model(e: [C64; 3], signs: (Sign, Sign)) -> CliResult<ResolvedModel> {
    let params = ep3_couplings(e[0], e[1], e[2], signs.0, signs.1)?;
    let family = build_special(&params)?;
    Ok(ResolvedModel {
        family,
        special: Some(SpecialData { e, signs }),
    })
}

fn builtin_model(name: &str) -> CliResult<ResolvedModel> {
    match name {
        "e013" => special_model(
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(3.0, 0.0)],
            (Sign::Plus, Sign::Plus),
        ),
        "ep2" => Ok(ResolvedModel {
            family: ep2_control_family(),
            special: None,
        }),
        other => Err(usage(format!(
            "unknown builtin model {other:?} (try e013 or ep2)"
        ))),
    }
}

fn sweep_window(args: &SweepArgsCommon, model_args: &ModelArgs) -> CliResult<(C64, C64, Vec<f64>)> {
    let mut center = C64::new(0.0, 0.0);
    let mut direction = C64::new(1.0, 0.0);
    let mut radii: Option<Vec<f64>> = None;
    if let Some(path) = &model_args.config {
        if let Some(sweep) = load_config(path)?.sweep {
            if let Some(c) = sweep.center {
                center = complex_of(c);
            }
            if let Some(d) = sweep.direction {
                direction = complex_of(d);
            }
            radii = match sweep.radii {
                Some(RadiiConfig::List(list)) => Some(list),
                Some(RadiiConfig::Range { min, max, count }) => Some(log_spaced(min, max, count)),
                None => None,
            };
        }
    }
    if let Some(c) = args.center {
        center = c;
    }
    if let Some(d) = args.direction {
        direction = d;
    }
    if args.rmin.is_some() || args.rmax.is_some() || args.count.is_some() {
        let min = args.rmin.unwrap_or(1e-6);
        let max = args.rmax.unwrap_or(1e-2);
        let count = args.count.unwrap_or(9);
        radii = Some(log_spaced(min, max, count));
    }
    Ok((
        center,
        direction,
        radii.unwrap_or_else(epkit::puiseux::default_radii),
    ))
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cj(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

// ---------------------------------------------------------------------------
// construct

#[derive(Serialize)]
struct ConstructReport {
    s2: [f64; 2],
    s3: [f64; 2],
    #[serde(rename = "E_c")]
    e_c: [f64; 2],
    psi_ep: Vec<[f64; 2]>,
    a1_abs: f64,
    validated: bool,
}

pub fn run_construct(model: &ModelArgs, out: &Option<PathBuf>) -> CliResult<()> {
    let resolved = resolve_model(model)?;
    let special = resolved
        .special
        .as_ref()
        .ok_or_else(|| usage("construct needs the special model (--e or a special config)"))?;
    let [e1, e2, e3] = special.e;
    let params = ep3_couplings(e1, e2, e3, special.signs.0, special.signs.1)?;
    let psi = ep_vector(e1, e2, e3, special.signs.0, special.signs.1)?;
    let a1 = first_order_energy_coeff(e1, e2, e3)?;
    let validated = validate_ep3(&resolved.family.h0, params.e_c, validate_tolerance(model)?)?;
    let report = ConstructReport {
        s2: cj(params.s2),
        s3: cj(params.s3),
        e_c: cj(params.e_c),
        psi_ep: psi.iter().map(|&z| cj(z)).collect(),
        a1_abs: a1.norm(),
        validated,
    };
    emit(out, &to_json(&report))
}

// ---------------------------------------------------------------------------
// sweep

pub const SWEEP_HEADER: &str = "lambda_re,lambda_im,sheet,E_re,E_im,t_norm_abs,overlap_abs";

pub fn run_sweep(
    model: &ModelArgs,
    sweep: &SweepArgsCommon,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let resolved = resolve_model(model)?;
    let (center, direction, radii) = sweep_window(sweep, model)?;
    let samples = sample_ray(&resolved.family, center, direction, &radii)?;
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for state in &samples.states {
        for (j, e) in state.energies.iter().enumerate() {
            let overlap = t_product(&state.vectors[j], &samples.psi_ep)?.norm();
            let row = [
                fmt_f64(state.lambda.re),
                fmt_f64(state.lambda.im),
                (j + 1).to_string(),
                fmt_f64(e.re),
                fmt_f64(e.im),
                fmt_f64(state.t_norms[j].norm()),
                fmt_f64(overlap),
            ];
            text.push_str(&row.join(","));
            text.push('\n');
        }
    }
    emit(out, &text)
}

// ---------------------------------------------------------------------------
// fit

#[derive(Serialize)]
struct FitEntry {
    exponent: f64,
    prefactor_magnitude: f64,
    r_squared: f64,
    /// Per-sample log-space residuals, in the sampled radius order.
    residuals: Vec<f64>,
}

impl FitEntry {
    fn of(fit: &epkit::puiseux::PowerFit<f64>) -> Self {
        Self {
            exponent: fit.exponent,
            prefactor_magnitude: fit.prefactor_magnitude,
            r_squared: fit.r_squared,
            residuals: fit.residuals.clone(),
        }
    }
}

#[derive(Serialize)]
struct FitReport {
    #[serde(rename = "E_c")]
    e_c: [f64; 2],
    energy: Vec<FitEntry>,
    norm: FitEntry,
    overlap: FitEntry,
    norm_prefactor_spread: f64,
    overlap_prefactor_spread: f64,
}

pub fn run_fit(
    model: &ModelArgs,
    sweep: &SweepArgsCommon,
    csv: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let report = match csv {
        Some(path) => fit_from_csv(path, sweep.center.unwrap_or(C64::new(0.0, 0.0)))?,
        None => {
            let resolved = resolve_model(model)?;
            let (center, direction, radii) = sweep_window(sweep, model)?;
            let samples = sample_ray(&resolved.family, center, direction, &radii)?;
            let energies = energy_fits(&samples)?;
            let overlaps = overlap_fits(&samples)?;
            FitReport {
                e_c: cj(energies.e_c),
                energy: energies.per_sheet.iter().map(FitEntry::of).collect(),
                norm: FitEntry::of(&overlaps.norm_fit),
                overlap: FitEntry::of(&overlaps.overlap_fit),
                norm_prefactor_spread: overlaps.norm_prefactor_spread,
                overlap_prefactor_spread: overlaps.overlap_prefactor_spread,
            }
        }
    };
    emit(out, &to_json(&report))
}

fn fit_from_csv(path: &Path, center: C64) -> CliResult<FitReport> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SWEEP_HEADER => {}
        other => return Err(usage(format!("unexpected CSV header {other:?}"))),
    }
    // per-sheet row: (sheet, E, t_norm_abs, overlap_abs)
    type SheetRow = (usize, C64, f64, f64);
    // (lambda, rows) in file order
    let mut groups: Vec<(C64, Vec<SheetRow>)> = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(usage(format!(
                "row {} has {} columns, expected 7",
                k + 2,
                cols.len()
            )));
        }
        let num = |s: &str| -> CliResult<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("row {}: {e}", k + 2)))
        };
        let lambda = C64::new(num(cols[0])?, num(cols[1])?);
        let sheet = cols[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| usage(format!("row {}: {e}", k + 2)))?;
        let entry = (
            sheet,
            C64::new(num(cols[3])?, num(cols[4])?),
            num(cols[5])?,
            num(cols[6])?,
        );
        match groups.last_mut() {
            Some((lam, rows)) if *lam == lambda => rows.push(entry),
            _ => groups.push((lambda, vec![entry])),
        }
    }
    if groups.len() < 3 {
        return Err(usage("need at least three radii to fit"));
    }
    let n_sheets = groups[0].1.len();
    if groups.iter().any(|(_, rows)| rows.len() != n_sheets) {
        return Err(usage("inconsistent sheet count across radii"));
    }

    // coalescence estimate: eigenvalue centroid at the smallest radius
    let (last_lambda, last_rows) = groups
        .iter()
        .min_by(|a, b| {
            (a.0 - center)
                .norm()
                .partial_cmp(&(b.0 - center).norm())
                .unwrap()
        })
        .unwrap();
    let _ = last_lambda;
    let e_c = last_rows.iter().fold(C64::new(0.0, 0.0), |a, r| a + r.1) / n_sheets as f64;

    let mut energy = Vec::with_capacity(n_sheets);
    let mut pooled_norm = Vec::new();
    let mut pooled_overlap = Vec::new();
    let mut norm_limits = Vec::with_capacity(n_sheets);
    let mut overlap_limits = Vec::with_capacity(n_sheets);
    for sheet in 1..=n_sheets {
        let mut e_data = Vec::new();
        let mut n_data = Vec::new();
        let mut o_data = Vec::new();
        for (lambda, rows) in &groups {
            let r = (lambda - center).norm();
            let row = rows
                .iter()
                .find(|(s, ..)| *s == sheet)
                .ok_or_else(|| usage(format!("sheet {sheet} missing at λ = {lambda}")))?;
            e_data.push((r, (row.1 - e_c).norm()));
            n_data.push((r, row.2));
            o_data.push((r, row.3));
        }
        // sort descending in r to match the sampler's convention
        let by_r_desc = |a: &(f64, f64), b: &(f64, f64)| b.0.partial_cmp(&a.0).unwrap();
        e_data.sort_by(by_r_desc);
        n_data.sort_by(by_r_desc);
        o_data.sort_by(by_r_desc);
        energy.push(FitEntry::of(&fit_power(&e_data)?));
        norm_limits.push(extrapolate_prefactor(&n_data, n_sheets as f64));
        overlap_limits.push(extrapolate_prefactor(&o_data, n_sheets as f64));
        pooled_norm.extend(n_data);
        pooled_overlap.extend(o_data);
    }
    let spread = |prefs: &[f64]| {
        let max = prefs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = prefs.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / (prefs.iter().sum::<f64>() / prefs.len() as f64)
    };
    Ok(FitReport {
        e_c: cj(e_c),
        energy,
        norm: FitEntry::of(&fit_power(&pooled_norm)?),
        overlap: FitEntry::of(&fit_power(&pooled_overlap)?),
        norm_prefactor_spread: spread(&norm_limits),
        overlap_prefactor_spread: spread(&overlap_limits),
    })
}

/// r → 0 limit of `y/r^((n-1)/n)`, linear in `r^(1/n)` from the two
/// smallest radii; mirrors the in-memory spread estimator.
fn extrapolate_prefactor(data: &[(f64, f64)], n: f64) -> f64 {
    let expected = (n - 1.0) / n;
    let k = data.len();
    let (r1, y1) = data[k - 1];
    let (r2, y2) = data[k - 2];
    let p1 = y1 / r1.powf(expected);
    let p2 = y2 / r2.powf(expected);
    let x1 = r1.powf(1.0 / n);
    let x2 = r2.powf(1.0 / n);
    p1 - x1 * (p2 - p1) / (x2 - x1)
}

// ---------------------------------------------------------------------------
// monodromy

#[derive(Serialize)]
struct MonodromyReport {
    permutation: Vec<usize>,
    vector_factors: Vec<[f64; 2]>,
    loops: i32,
}

pub fn run_monodromy(
    model: &ModelArgs,
    center: Option<C64>,
    radius: f64,
    loops: i32,
    steps: usize,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let resolved = resolve_model(model)?;
    let center = center.unwrap_or(C64::new(0.0, 0.0));
    let result = monodromy(&resolved.family, center, radius, loops, steps)?;
    let report = MonodromyReport {
        permutation: result.permutation,
        vector_factors: result.vector_factors.iter().map(|&z| cj(z)).collect(),
        loops: result.loops,
    };
    emit(out, &to_json(&report))
}

// ---------------------------------------------------------------------------
// locate

#[derive(Serialize)]
struct LocateReport {
    lambda_c: [f64; 2],
    tuning_at_solution: Vec<f64>,
    #[serde(rename = "E_c")]
    e_c: [f64; 2],
    order: usize,
    final_residual: f64,
    validated: bool,
    iterations: usize,
}

pub fn run_locate(
    model: &ModelArgs,
    order: usize,
    lambda0: Option<C64>,
    p0: &Option<Vec<f64>>,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let location = match order {
        2 => {
            let resolved = resolve_model(model)?;
            let guess = lambda0.ok_or_else(|| usage("locate --order 2 needs --lambda0"))?;
            locate_ep2(&resolved.family, guess)?
        }
        3 => {
            let resolved = resolve_model(model)?;
            let special = resolved.special.as_ref().ok_or_else(|| {
                usage("locate --order 3 tunes the special couplings: give --e or a special config")
            })?;
            let tf = special_coupling_family(special.e);
            let start = match p0 {
                Some(values) => values.clone(),
                None => {
                    let p = ep3_couplings(
                        special.e[0],
                        special.e[1],
                        special.e[2],
                        special.signs.0,
                        special.signs.1,
                    )?;
                    vec![p.s2.re, p.s2.im, p.s3.re, p.s3.im]
                }
            };
            locate_ep3(&tf, lambda0.unwrap_or(C64::new(0.0, 0.0)), &start)?
        }
        other => return Err(usage(format!("--order must be 2 or 3, got {other}"))),
    };
    let report = LocateReport {
        lambda_c: cj(location.lambda_c),
        tuning_at_solution: location.tuning_at_solution,
        e_c: cj(location.e_c),
        order: location.order,
        final_residual: location.final_residual,
        validated: location.validated,
        iterations: location.iterations,
    };
    emit(out, &to_json(&report))
}

// ---------------------------------------------------------------------------
// classify / helix

#[derive(Serialize)]
struct OrderedJson {
    energies: Vec<[f64; 2]>,
    perm_from_sheets: Vec<usize>,
    re_gaps: [f64; 2],
}

#[derive(Serialize)]
struct WidthJson {
    variant: String,
    margin: f64,
}

#[derive(Serialize)]
struct PhasesJson {
    c: Vec<[f64; 2]>,
    xi_magnitude: f64,
    perm: Vec<usize>,
    phase_offsets_deg: [f64; 3],
}

#[derive(Serialize)]
struct ClassifyReport {
    ordered: OrderedJson,
    width: WidthJson,
    phases: PhasesJson,
    assigned_phases_deg: [f64; 3],
    handedness: String,
    helix: Vec<[f64; 3]>,
}

fn classify_at(
    model: &ModelArgs,
    lambda: C64,
    center: Option<C64>,
) -> CliResult<epkit::chirality::ChiralityReport<f64>> {
    let resolved = resolve_model(model)?;
    let special = resolved
        .special
        .as_ref()
        .ok_or_else(|| usage("classify needs the special model (--e or a special config)"))?;
    let psi = ep_vector(
        special.e[0],
        special.e[1],
        special.e[2],
        special.signs.0,
        special.signs.1,
    )?;
    let center = center.unwrap_or(C64::new(0.0, 0.0));
    Ok(classify(&resolved.family, lambda, center, &psi)?)
}

pub fn run_classify(
    model: &ModelArgs,
    lambda: C64,
    center: Option<C64>,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let report = classify_at(model, lambda, center)?;
    let json = ClassifyReport {
        ordered: OrderedJson {
            energies: report.ordered.energies.iter().map(|&z| cj(z)).collect(),
            perm_from_sheets: report.ordered.perm_from_sheets.to_vec(),
            re_gaps: report.ordered.re_gaps,
        },
        width: WidthJson {
            variant: match report.width.variant {
                WidthVariant::MiddleBroadest => "MiddleBroadest".into(),
                WidthVariant::MiddleNarrowest => "MiddleNarrowest".into(),
            },
            margin: report.width.margin,
        },
        phases: PhasesJson {
            c: report.phases.c.iter().map(|&z| cj(z)).collect(),
            xi_magnitude: report.phases.xi_magnitude,
            perm: report.phases.perm.to_vec(),
            phase_offsets_deg: report.phases.phase_offsets_deg,
        },
        assigned_phases_deg: report.assigned_phases_deg,
        handedness: report.handedness.to_string(),
        helix: report.helix.to_vec(),
    };
    emit(out, &to_json(&json))
}

pub fn run_helix(
    model: &ModelArgs,
    lambda: C64,
    center: Option<C64>,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let report = classify_at(model, lambda, center)?;
    let mut text = String::from("x,y,z,kind\n");
    for point in &report.helix {
        text.push_str(&format!(
            "{},{},{},point\n",
            fmt_f64(point[0]),
            fmt_f64(point[1]),
            fmt_f64(point[2])
        ));
    }
    // continuous lift of the assigned phases: +120°/step for a right-handed
    // helix, −120°/step for a left-handed one
    let unwrapped: [f64; 3] = match report.handedness {
        Handedness::Right => [0.0, 120.0, 240.0],
        Handedness::Left => [0.0, -120.0, -240.0],
    };
    let z: Vec<f64> = report.helix.iter().map(|p| p[2]).collect();
    let samples = 60usize;
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let height = z[0] + (z[2] - z[0]) * t;
        // piecewise-linear azimuth in height through the three points
        let phi = if height <= z[1] {
            unwrapped[0] + (unwrapped[1] - unwrapped[0]) * (height - z[0]) / (z[1] - z[0])
        } else {
            unwrapped[1] + (unwrapped[2] - unwrapped[1]) * (height - z[1]) / (z[2] - z[1])
        };
        let rad = phi.to_radians();
        text.push_str(&format!(
            "{},{},{},curve\n",
            fmt_f64(rad.cos()),
            fmt_f64(rad.sin()),
            fmt_f64(height)
        ));
    }
    emit(out, &text)
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn verify_e013() -> CliResult<Vec<Check>> {
    let e = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(3.0, 0.0)];
    let params = ep3_couplings(e[0], e[1], e[2], Sign::Plus, Sign::Plus)?;
    let family = build_special(&params)?;
    let mut checks = Vec::new();

    let validated = validate_ep3(&family.h0, params.e_c, 1e-10)?;
    checks.push(Check {
        name: "construction: triple root with a size-3 Jordan block",
        passed: validated,
        detail: format!("E_c = {}", fmt_f64(params.e_c.re)),
    });

    let psi = ep_vector(e[0], e[1], e[2], Sign::Plus, Sign::Plus)?;
    let self_orth = t_product(&psi, &psi)?.norm();
    checks.push(Check {
        name: "self-orthogonality of the coalesced vector",
        passed: self_orth <= 1e-10,
        detail: format!("|psi^T psi| = {self_orth:.3e}"),
    });

    let radii = epkit::puiseux::default_radii::<f64>();
    let samples = sample_ray(&family, C64::new(0.0, 0.0), C64::new(1.0, 0.0), &radii)?;
    let energies = energy_fits(&samples)?;
    let a1 = first_order_energy_coeff(e[0], e[1], e[2])?.norm();
    let worst_exp = energies
        .per_sheet
        .iter()
        .map(|f| (f.exponent - 1.0 / 3.0).abs())
        .fold(0.0, f64::max);
    let worst_pref = energies
        .per_sheet
        .iter()
        .map(|f| (f.prefactor_magnitude - a1).abs() / a1)
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "energy splitting exponent 1/3",
        passed: worst_exp <= 0.005,
        detail: format!("worst deviation {worst_exp:.2e}"),
    });
    checks.push(Check {
        name: "energy prefactor |a1|",
        passed: worst_pref <= 0.005,
        detail: format!("worst relative error {worst_pref:.2e}"),
    });

    let overlaps = overlap_fits(&samples)?;
    checks.push(Check {
        name: "norm and overlap exponents 2/3",
        passed: (overlaps.norm_fit.exponent - 2.0 / 3.0).abs() <= 0.01
            && (overlaps.overlap_fit.exponent - 2.0 / 3.0).abs() <= 0.01,
        detail: format!(
            "{} and {}",
            fmt_f64(overlaps.norm_fit.exponent),
            fmt_f64(overlaps.overlap_fit.exponent)
        ),
    });
    checks.push(Check {
        name: "sheet-independent prefactors",
        passed: overlaps.norm_prefactor_spread <= 0.02 && overlaps.overlap_prefactor_spread <= 0.02,
        detail: format!(
            "spreads {:.2e} / {:.2e}",
            overlaps.norm_prefactor_spread, overlaps.overlap_prefactor_spread
        ),
    });

    let stats = triangle_stats(&samples)?;
    let worst_side = stats.iter().map(|s| s.side_spread).fold(0.0, f64::max);
    let worst_angle = stats
        .iter()
        .map(|s| s.max_angle_deviation_deg)
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "equilateral triangle at every radius",
        passed: worst_side <= 0.02 && worst_angle <= 1.0,
        detail: format!("side spread {worst_side:.2e}, angle deviation {worst_angle:.2}°"),
    });

    let single = monodromy(&family, C64::new(0.0, 0.0), 1e-3, 1, 360)?;
    let triple = monodromy(&family, C64::new(0.0, 0.0), 1e-3, 3, 360)?;
    let worst_factor = triple
        .vector_factors
        .iter()
        .map(|v| (v - C64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "monodromy: third-order branch point",
        passed: single.permutation_order() == 3 && triple.is_identity() && worst_factor <= 1e-6,
        detail: format!(
            "single-loop order {}, three-loop factors within {worst_factor:.2e} of 1",
            single.permutation_order()
        ),
    });

    let phases = epkit::chirality::phase_coefficients(
        &family,
        C64::new(1e-6, 0.0),
        C64::new(0.0, 0.0),
        &psi,
    )?;
    let mags: Vec<f64> = phases.c.iter().map(|z| z.norm()).collect();
    let spread = mags.iter().cloned().fold(0.0, f64::max)
        / mags.iter().cloned().fold(f64::INFINITY, f64::min)
        - 1.0;
    let offsets = [phases.phase_offsets_deg[1], phases.phase_offsets_deg[2]];
    let offsets_ok = offsets.iter().any(|&o| (o - 120.0).abs() <= 0.5)
        && offsets.iter().any(|&o| (o + 120.0).abs() <= 0.5);
    checks.push(Check {
        name: "phase coefficients: equal magnitudes, ±120° offsets",
        passed: spread <= 0.005 && offsets_ok,
        detail: format!("magnitude spread {spread:.2e}, offsets {offsets:?}"),
    });

    let report = classify(&family, C64::new(1e-3, 0.0), C64::new(0.0, 0.0), &psi)?;
    checks.push(Check {
        name: "chirality at small positive real λ",
        passed: report.width.variant == WidthVariant::MiddleBroadest
            && report.handedness == Handedness::Right,
        detail: format!("{:?}, {}", report.width.variant, report.handedness),
    });

    Ok(checks)
}

fn verify_ep2() -> CliResult<Vec<Check>> {
    let family = ep2_control_family::<f64>();
    let mut checks = Vec::new();

    let up = locate_ep2(&family, C64::new(0.0, 0.4))?;
    let down = locate_ep2(&family, C64::new(0.0, -0.4))?;
    checks.push(Check {
        name: "EP2 pair at λ = ±i/2",
        passed: (up.lambda_c - C64::new(0.0, 0.5)).norm() <= 1e-10
            && (down.lambda_c - C64::new(0.0, -0.5)).norm() <= 1e-10
            && up.validated,
        detail: format!("found {} and {}", up.lambda_c, down.lambda_c),
    });

    let two = monodromy(&family, C64::new(0.0, 0.5), 1e-3, 2, 360)?;
    let four = monodromy(&family, C64::new(0.0, 0.5), 1e-3, 4, 360)?;
    let worst2 = two
        .vector_factors
        .iter()
        .map(|v| (v - C64::new(-1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let worst4 = four
        .vector_factors
        .iter()
        .map(|v| (v - C64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "fourfold-loop restoration",
        passed: two.is_identity() && four.is_identity() && worst2 <= 1e-6 && worst4 <= 1e-6,
        detail: format!("two-loop factors ≈ −1 ({worst2:.2e}), four-loop ≈ +1 ({worst4:.2e})"),
    });

    let radii = log_spaced(1e-6, 1e-2, 9);
    let report = epkit::puiseux::appendix_report(
        &family,
        C64::new(0.0, 0.5),
        C64::new(1.0, 0.0),
        2,
        &radii,
    )?;
    checks.push(Check {
        name: "square-root scaling of energies and overlaps",
        passed: (report.overlap_fit.exponent - 0.5).abs() <= 0.01,
        detail: format!("overlap exponent {}", fmt_f64(report.overlap_fit.exponent)),
    });

    Ok(checks)
}

pub fn run_verify(model: &str) -> CliResult<()> {
    let checks = match model {
        "e013" => verify_e013()?,
        "ep2" => verify_ep2()?,
        other => return Err(usage(format!("unknown model {other:?} (try e013 or ep2)"))),
    };
    let mut all_ok = true;
    for check in &checks {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {:<55} {}", check.name, check.detail);
        all_ok &= check.passed;
    }
    if all_ok {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(CliError::ChecksFailed {
            failed: checks.iter().filter(|c| !c.passed).count(),
            total: checks.len(),
        })
    }
}
