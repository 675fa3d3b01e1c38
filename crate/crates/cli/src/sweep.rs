//! Parameter sweeps: one CSV row per grid point, in lexicographic grid order.

use crate::commands::{build_front, checked_model, front_level};
use crate::config::{invalid, model_at, Analysis, Grid, RunConfig};
use crate::output::OutDir;
use frontlab::essential_spectrum::{classify_regime, default_k_grid};
use frontlab::evans::{discrete_spectrum_oracle, lambda_edge_predict, LinearizationContext};
use frontlab::existence::{find_branches, find_fold};
use rayon::prelude::*;

fn header(analysis: Analysis) -> &'static [&'static str] {
    match analysis {
        Analysis::Branches => &["branch_count", "v0"],
        Analysis::Fold => &["gamma_double", "v_fold"],
        Analysis::Spectrum => &["stable", "regime", "margin"],
        Analysis::Edge => &["lambda_edge_predicted", "lambda_edge_oracle", "error"],
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// Grid indices, axis values and result columns of one point.
type Row = (Vec<usize>, Vec<f64>, anyhow::Result<Vec<String>>);

/// Result columns at one grid point.
fn analyse(cfg: &RunConfig, analysis: Analysis, grid: &Grid, point: &[f64]) -> anyhow::Result<Vec<String>> {
    let model = checked_model(&model_at(&cfg.model, &grid.names, point))?;
    let (params, spec) = (&model.params, &model.reaction);
    Ok(match analysis {
        Analysis::Branches => {
            let roots = find_branches(params, spec, cfg.branches.v_max)?;
            let levels: Vec<String> = roots.iter().map(|r| fmt(r.v0)).collect();
            vec![roots.len().to_string(), levels.join(";")]
        }
        Analysis::Fold => {
            let f = find_fold(spec, cfg.fold.v_window)?;
            vec![fmt(f.gamma_double), fmt(f.v_fold)]
        }
        Analysis::Spectrum => {
            let k_grid = cfg.spectrum.k_grid.clone().unwrap_or_else(default_k_grid);
            match classify_regime(params, spec, &k_grid) {
                Ok(r) => vec!["true".into(), format!("{:?}", r.regime), fmt(r.margin)],
                Err(frontlab::Error::Precondition(_)) => vec!["false".into(), String::new(), String::new()],
                Err(e) => return Err(e.into()),
            }
        }
        Analysis::Edge => {
            // the prediction uses the leading-order level, not the refined V(0)
            let predicted = lambda_edge_predict(front_level(&model, &cfg.front)?, params, spec)?.lambda_edge;
            let front = build_front(&model, &cfg.front)?;
            let ctx = LinearizationContext::new(front, spec.clone());
            let report = discrete_spectrum_oracle(&ctx, &cfg.oracle.config())?;
            // the edge eigenvalue is the rightmost isolated real one below zero
            let edge = report
                .isolated()
                .filter(|e| e.value.im == 0.0 && e.value.re < -1e-6)
                .max_by(|a, b| a.value.re.total_cmp(&b.value.re))
                .ok_or_else(|| anyhow::anyhow!("no isolated edge eigenvalue"))?;
            vec![fmt(predicted), fmt(edge.value.re), fmt((edge.value.re - predicted).abs())]
        }
    })
}

pub fn sweep(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<usize> {
    let section = cfg.sweep.as_ref().ok_or_else(|| invalid("config has no sweep section"))?;
    // the base model must be valid even if some grid points are not
    cfg.model.build()?;
    let grid = section.grid(&cfg.model)?;
    log::info!("sweep: {} points over {}", grid.len(), grid.names.join(" x "));
    let rows: Vec<Row> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let idx = grid.indices(k);
            let point: Vec<f64> = idx.iter().zip(&grid.values).map(|(&i, v)| v[i]).collect();
            let result = analyse(cfg, section.analysis, &grid, &point);
            (idx, point, result)
        })
        .collect();

    let columns = header(section.analysis);
    let mut failures = 0;
    let mut w = csv::Writer::from_path(out.path("sweep.csv"))?;
    let mut head: Vec<String> = grid.names.iter().map(|n| format!("i_{n}")).collect();
    head.extend(grid.names.iter().map(|n| n.to_string()));
    head.extend(columns.iter().map(|c| c.to_string()));
    head.push("status".into());
    w.write_record(&head)?;
    for (idx, point, result) in rows {
        let mut rec: Vec<String> = idx.iter().map(usize::to_string).collect();
        rec.extend(point.iter().map(|&x| format!("{x}")));
        match result {
            Ok(cols) => {
                rec.extend(cols);
                rec.push("ok".into());
            }
            Err(e) => {
                failures += 1;
                rec.extend(columns.iter().map(|_| String::new()));
                rec.push(format!("error: {e:#}"));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    if failures > 0 {
        log::warn!("{failures} of {} sweep points failed; see the status column", grid.len());
    }
    Ok(failures)
}
