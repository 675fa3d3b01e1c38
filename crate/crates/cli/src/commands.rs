//! One function per subcommand. Each reads its section of the config and
//! writes deterministic CSV/JSON into the output directory.

use crate::config::{invalid, ContourSpec, FrontSection, OracleSection, RunConfig};
use crate::output::OutDir;
use frontlab::essential_spectrum::{
    classify_regime, default_k_grid, dispersion, stability_verdict, write_dispersion_csv, StabilityMargins,
};
use frontlab::evans::{
    circle_contour, discrete_spectrum_oracle, evans, evans_scan, lambda_edge_predict, oracle_eigenvector,
    parity_check, real_zero, rectangle_contour, winding_count, write_scan_csv, EvansMethod, LinearizationContext,
    Parity,
};
use frontlab::existence::{
    build_composite_front, classify_destabilization_type, default_gamma_scan, find_branches, find_fold,
    refine_front_bvp, regular_front_v_peak, write_branches_csv, FrontProfile,
};
use frontlab::model::{validate_reaction_spec, ModelDescriptor};
use frontlab::pde_sim::{simulate, SimOutcome, Verdict};
use frontlab::{Error, Model, Regime};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Tolerance for real Evans zeros.
const ROOT_TOL: f64 = 1e-10;

/// Builds the model and rejects reactions that fail the structural checks.
pub fn checked_model(desc: &ModelDescriptor) -> anyhow::Result<Model> {
    let model = desc.build()?;
    let report = validate_reaction_spec(&model.reaction)?;
    if !report.passed() {
        let failed: Vec<String> =
            report.failures().map(|c| format!("{} (residual {:.3e})", c.name, c.residual)).collect();
        return Err(invalid(format!("reaction fails validation: {}", failed.join("; "))));
    }
    if model.params.epsilon > 0.2 {
        log::warn!("epsilon = {} is outside the asymptotic regime", model.params.epsilon);
    }
    Ok(model)
}

/// Plateau level of the selected front.
pub fn front_level(model: &Model, front: &FrontSection) -> anyhow::Result<f64> {
    if let Some(v0) = front.v0 {
        return Ok(v0);
    }
    match model.params.regime {
        Regime::Regular { .. } => Ok(regular_front_v_peak(&model.params, &model.reaction)?),
        Regime::SuperSlow { gamma } => {
            let roots = find_branches(&model.params, &model.reaction, frontlab::existence::DEFAULT_V_MAX)?;
            let index = front.branch.checked_sub(1).ok_or_else(|| invalid("front.branch is 1-based"))?;
            roots.get(index).map(|r| r.v0).ok_or_else(|| {
                Error::Precondition(format!("gamma = {gamma} has {} branch(es), no branch {}", roots.len(), front.branch))
                    .into()
            })
        }
    }
}

pub fn build_front(model: &Model, front: &FrontSection) -> anyhow::Result<FrontProfile> {
    let v0 = front_level(model, front)?;
    let seed = build_composite_front(v0, &model.params, front.half_width, front.nodes)?;
    Ok(if front.refine { refine_front_bvp(&seed, &model.reaction)? } else { seed })
}

fn context(model: &Model, front: &FrontSection) -> anyhow::Result<LinearizationContext> {
    Ok(LinearizationContext::new(build_front(model, front)?, model.reaction.clone()))
}

/// Eigenvalue report shared by the Evans and oracle commands.
#[derive(Serialize)]
pub struct EigenvalueRecord {
    pub value: Complex64,
    pub method: String,
    pub error_estimate: f64,
    pub parity: Option<Parity>,
}

fn parity_of(ctx: &LinearizationContext, oracle: &OracleSection, lambda: Complex64) -> anyhow::Result<Parity> {
    let vec = oracle_eigenvector(ctx, &oracle.config(), lambda)?;
    Ok(parity_check(&vec)?.parity)
}

pub fn decompose(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = cfg.model.build()?;
    let spec = &model.reaction;
    let report = validate_reaction_spec(spec)?;
    out.json("validation.json", &report)?;
    out.write_with("decompose.csv", |w| {
        writeln!(w, "u_sq,v,F,H,G,reconstruction_residual")?;
        for u_sq in [0.0, 0.5, 1.0, 2.0, 4.0, 9.0] {
            for v in [-0.5, 0.0, 0.5, 1.0, 2.0, 5.0] {
                let (h, g, f) = (spec.h(u_sq, v), spec.g(v), spec.f(u_sq, v));
                let residual = (1.0 + v - u_sq) * h + g - f;
                writeln!(w, "{u_sq},{v},{f:.17e},{h:.17e},{g:.17e},{residual:.3e}")?;
            }
        }
        Ok(())
    })?;
    if !report.passed() {
        return Err(invalid("reaction fails validation; see validation.json"));
    }
    Ok(())
}

#[derive(Serialize)]
struct FrontSummary {
    v0: f64,
    construction: String,
    nodes: usize,
    half_width: f64,
    v_max_abs: f64,
    symmetry_defect: (f64, f64),
}

pub fn front(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let front = build_front(&model, &cfg.front)?;
    out.write_with("front.csv", |w| front.write_csv(w))?;
    out.json(
        "front.json",
        &FrontSummary {
            v0: front.v0,
            construction: format!("{:?}", front.construction),
            nodes: front.len(),
            half_width: front.half_width(),
            v_max_abs: front.v_max_abs(),
            symmetry_defect: front.symmetry_defect(),
        },
    )
}

pub fn branches(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let roots = find_branches(&model.params, &model.reaction, cfg.branches.v_max)?;
    out.write_with("branches.csv", |w| write_branches_csv(&roots, w))
}

pub fn fold(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let fold = find_fold(&model.reaction, cfg.fold.v_window)?;
    out.json("fold.json", &fold)
}

#[derive(Serialize)]
struct UnstableSpectrum {
    stable: bool,
    margins: StabilityMargins,
}

pub fn spectrum(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let k_grid = cfg.spectrum.k_grid.clone().unwrap_or_else(default_k_grid);
    if k_grid.is_empty() || k_grid.iter().any(|k| !k.is_finite()) {
        return Err(invalid("spectrum.k_grid must be non-empty and finite"));
    }
    let points = dispersion(&model.params, &model.reaction, &k_grid);
    out.write_with("dispersion.csv", |w| write_dispersion_csv(&points, w))?;
    let (stable, margins) = stability_verdict(&model.params, &model.reaction, &k_grid);
    if stable {
        out.json("spectrum.json", &classify_regime(&model.params, &model.reaction, &k_grid)?)
    } else {
        out.json("spectrum.json", &UnstableSpectrum { stable, margins })
    }
}

#[derive(Serialize)]
struct WindingRecord<'a> {
    contour: &'a ContourSpec,
    count: i64,
}

pub fn evans_cmd(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let section = &cfg.evans;
    if section.scan.is_none() && section.contours.is_empty() && section.real_zeros.is_empty() {
        return Err(invalid("the evans section requests nothing: give scan, contours or real_zeros"));
    }
    let ctx = context(&model, &cfg.front)?;
    if let Regime::SuperSlow { .. } = model.params.regime {
        if model.reaction.quadratic_h0().is_some() {
            let v0 = front_level(&model, &cfg.front)?;
            out.json("edge.json", &lambda_edge_predict(v0, &model.params, &model.reaction)?)?;
        }
    }
    if let Some((re, im)) = &section.scan {
        let lambdas: Vec<Complex64> =
            im.values().into_iter().flat_map(|y| re.values().into_iter().map(move |x| Complex64::new(x, y))).collect();
        let scan = evans_scan(&lambdas, &ctx);
        let failed = scan.iter().filter(|r| r.is_err()).count();
        if failed > 0 {
            log::warn!("{failed} of {} scan points failed and are omitted", scan.len());
        }
        out.write_with("evans_scan.csv", |w| write_scan_csv(&scan, w))?;
    }
    if !section.contours.is_empty() {
        let mut records = Vec::new();
        for c in &section.contours {
            let points = match *c {
                ContourSpec::Circle { center, radius, points } => {
                    circle_contour(Complex64::new(center.0, center.1), radius, points)
                }
                ContourSpec::Rectangle { lo, hi } => {
                    rectangle_contour(Complex64::new(lo.0, lo.1), Complex64::new(hi.0, hi.1))
                }
            };
            records.push(WindingRecord { contour: c, count: winding_count(&points, &ctx)? });
        }
        out.json("winding.json", &records)?;
    }
    if !section.real_zeros.is_empty() {
        // the same zero on a front with half the nodes gauges the discretization error
        let coarse_front = FrontSection { nodes: cfg.front.nodes / 2 + 1, ..cfg.front.clone() };
        let coarse = context(&model, &coarse_front)?;
        let mut records = Vec::new();
        for &(lo, hi) in &section.real_zeros {
            let root = real_zero(lo, hi, ROOT_TOL, &ctx)?;
            let error_estimate = (root - real_zero(lo, hi, ROOT_TOL, &coarse)?).abs().max(ROOT_TOL);
            let lambda = Complex64::new(root, 0.0);
            let method: EvansMethod = evans(lambda, &ctx)?.method;
            let parity = if section.parity { Some(parity_of(&ctx, &cfg.oracle, lambda)?) } else { None };
            records.push(EigenvalueRecord {
                value: lambda,
                method: format!("evans_{}", snake(&format!("{method:?}"))),
                error_estimate,
                parity,
            });
        }
        out.json("eigenvalues.json", &records)?;
    }
    Ok(())
}

/// `CamelCase` to `snake_case`.
fn snake(name: &str) -> String {
    let mut s = String::new();
    for (i, ch) in name.chars().enumerate() {
        if ch.is_uppercase() && i > 0 {
            s.push('_');
        }
        s.push(ch.to_ascii_lowercase());
    }
    s
}

#[derive(Serialize)]
struct OracleRecord {
    #[serde(flatten)]
    eigenvalue: EigenvalueRecord,
    truncation_estimate: f64,
    essential_distance: f64,
    cluster: bool,
}

#[derive(Serialize)]
struct OracleSummary {
    n: usize,
    half_width: f64,
    eigenvalues: Vec<OracleRecord>,
}

pub fn oracle(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let ctx = context(&model, &cfg.front)?;
    let report = discrete_spectrum_oracle(&ctx, &cfg.oracle.config())?;
    let mut eigenvalues = Vec::with_capacity(report.eigenvalues.len());
    for e in &report.eigenvalues {
        let parity = if cfg.oracle.parity && !e.cluster { Some(parity_of(&ctx, &cfg.oracle, e.value)?) } else { None };
        eigenvalues.push(OracleRecord {
            eigenvalue: EigenvalueRecord {
                value: e.value,
                method: "oracle".into(),
                error_estimate: e.error_estimate,
                parity,
            },
            truncation_estimate: e.truncation_estimate,
            essential_distance: e.essential_distance,
            cluster: e.cluster,
        });
    }
    out.json("oracle.json", &OracleSummary { n: report.n, half_width: report.half_width, eigenvalues })
}

#[derive(Serialize)]
struct OutcomeSummary {
    v0: f64,
    verdict: Verdict,
    drift: f64,
    t_end: f64,
    background_deviation: f64,
    snapshots: Vec<f64>,
}

pub fn simulate_cmd(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let section = &cfg.simulate;
    section.solver.validate()?;
    let v0 = match section.v0 {
        Some(v0) => v0,
        None => front_level(&model, &cfg.front)?,
    };
    let mut targets: Vec<f64> = section.snapshots.clone();
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(invalid("snapshot times must be finite"));
    }
    targets.sort_by(f64::total_cmp);
    let mut written = Vec::new();
    let mut io_error = None;
    let mut next = 0;
    let outcome: SimOutcome = simulate(&section.solver, &model.params, &model.reaction, v0, |state| {
        // a snapshot is the first sample at or after its requested time
        while next < targets.len() && state.t >= targets[next] - 1e-9 {
            let name = format!("snapshot_{next:03}.csv");
            if let Err(e) = out.write_with(&name, |w| state.write_csv(w)) {
                io_error.get_or_insert(e);
            }
            written.push(state.t);
            next += 1;
        }
    })?;
    if let Some(e) = io_error {
        return Err(e);
    }
    out.write_with("series.csv", |w| outcome.write_series_csv(w))?;
    out.json(
        "outcome.json",
        &OutcomeSummary {
            v0,
            verdict: outcome.verdict,
            drift: outcome.drift,
            t_end: outcome.t_end,
            background_deviation: outcome.background_deviation,
            snapshots: written,
        },
    )
}

#[derive(Serialize)]
struct ClassifySummary {
    gamma_scan: Vec<f64>,
    destabilization: frontlab::existence::DestabilizationType,
}

pub fn classify(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<()> {
    let model = checked_model(&cfg.model)?;
    let gamma_scan = match &cfg.classify.gamma_scan {
        Some(scan) => scan.clone(),
        None => default_gamma_scan(model.params.gamma().unwrap_or(1.0).abs()),
    };
    let destabilization = classify_destabilization_type(&model.reaction, &gamma_scan)?;
    out.json("classify.json", &ClassifySummary { gamma_scan, destabilization })
}
