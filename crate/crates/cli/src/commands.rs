//! One function per subcommand. Grid rows are evaluated in parallel and
//! written in grid order; a failing row keeps its place with empty value
//! columns, `status = fail` and a reason code.

use std::path::Path;

use magtube::config::{Monomial, RunConfig};
use magtube::flow::{flow_complex, flow_real, ComplexTime, FlowOptions, FlowState};
use magtube::geometry::{ChartedGeometry, PhasePoint};
use magtube::kahler::{extension_dbar_residual, potential_sample, section_weight};
use magtube::linalg::{real_part, C, I};
use magtube::sampling::{box_point, stream};
use magtube::structure::{assemble_j, frame_at, transversality_check, vertical_margin, DEFAULT_TRANSVERSALITY_TOL};
use magtube::verify::{self, VerifyOptions};
use magtube::{Error, Result};
use rand::Rng;
use rayon::prelude::*;

use crate::output::{num, write_text, Table};
use crate::{Cli, Failure};

fn coordinate_names(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("x{j}")).chain((1..=n).map(|j| format!("p{j}"))).collect()
}

fn complex_cols(prefix: &str) -> [String; 2] {
    [format!("re_{prefix}"), format!("im_{prefix}")]
}

/// Evaluate `eval` on every grid point; `columns` names its output.
fn grid_table<F>(geo: &ChartedGeometry, config: &RunConfig, columns: Vec<String>, eval: F) -> Table
where
    F: Fn(&PhasePoint) -> Result<Vec<f64>> + Sync,
{
    let n = geo.dim();
    let points = config.grid_points();
    let width = columns.len();
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, coords)| {
            let z = PhasePoint::real(&coords[..n], &coords[n..]);
            let mut row = vec![index.to_string()];
            row.extend(coords.iter().map(|v| num(*v)));
            // Grid points must lie in the chart box; others are flagged, not evaluated.
            let evaluated = if geo.in_chart_box(&coords[..n]) {
                eval(&z)
            } else {
                Err(Error::ChartExit { time: C::new(0.0, 0.0) })
            };
            match evaluated {
                Ok(values) => {
                    debug_assert_eq!(values.len(), width);
                    row.extend(values.into_iter().map(num));
                    row.extend(["ok".to_string(), String::new()]);
                }
                Err(e) => {
                    log::debug!("row {index}: {e}");
                    row.extend(std::iter::repeat_n(String::new(), width));
                    row.extend(["fail".to_string(), e.reason_code().to_string()]);
                }
            }
            row
        })
        .collect();
    let mut header = vec!["index".to_string()];
    header.extend(coordinate_names(n));
    header.extend(columns);
    header.extend(["status".to_string(), "reason".to_string()]);
    Table { header, rows }
}

pub fn flow(geo: &ChartedGeometry, config: &RunConfig) -> Table {
    let n = geo.dim();
    let opts = config.flow;
    let t = config.time.clone();
    grid_table(geo, config, FlowState::csv_header(n), |z| {
        let state =
            if t.is_real() { flow_real(geo, z, t.target().re, &opts)? } else { flow_complex(geo, z, &t, &opts)? };
        Ok(state.csv_row())
    })
}

pub fn frame(geo: &ChartedGeometry, config: &RunConfig) -> Table {
    let n = geo.dim();
    let mut columns = Vec::new();
    for a in 1..=2 * n {
        for b in 1..=n {
            columns.extend(complex_cols(&format!("f{a}_{b}")));
        }
    }
    columns.extend(["transversality", "lagrangian_residual", "vertical_margin"].map(String::from));
    grid_table(geo, config, columns, |z| {
        let f = frame_at(geo, z, &config.time, &config.flow)?;
        let mut row = Vec::new();
        for a in 0..2 * n {
            for b in 0..n {
                row.extend([f.raw[(a, b)].re, f.raw[(a, b)].im]);
            }
        }
        row.extend([transversality_check(&f), f.lagrangian_residual(), vertical_margin(&f)]);
        Ok(row)
    })
}

pub fn acs(geo: &ChartedGeometry, config: &RunConfig) -> Table {
    let n = geo.dim();
    let mut columns = Vec::new();
    for a in 1..=2 * n {
        for b in 1..=2 * n {
            columns.push(format!("j{a}_{b}"));
        }
    }
    columns.extend((1..=n).map(|k| format!("positivity{k}")));
    columns.extend(
        ["transversality", "imag_residual", "square_residual", "compatibility_residual", "metric_min_eigenvalue"]
            .map(String::from),
    );
    grid_table(geo, config, columns, |z| {
        let f = frame_at(geo, z, &config.time, &config.flow)?;
        let d = assemble_j(&f)?;
        let omega = real_part(&f.omega);
        let mut row: Vec<f64> = d.j.transpose().iter().copied().collect();
        row.extend(&d.positivity_spectrum);
        row.extend([
            d.transversality,
            d.imag_residual,
            d.square_residual(),
            d.compatibility_residual(&omega),
            d.metric_min_eigenvalue(&omega),
        ]);
        Ok(row)
    })
}

pub fn potential(geo: &ChartedGeometry, config: &RunConfig) -> Table {
    let mut columns = Vec::new();
    columns.extend(complex_cols("f_minus_i"));
    columns.extend(complex_cols("f_plus_i"));
    columns.extend(["kappa2", "kde_residual", "dbar_residual", "weight_modulus", "section_norm_sq"].map(String::from));
    grid_table(geo, config, columns, |z| {
        let s = potential_sample(geo, z, config.kde_sigma, config.step, &config.flow)?;
        let w = section_weight(geo, z, config.level, &config.flow)?;
        Ok(vec![
            s.f_minus_i[0],
            s.f_minus_i[1],
            s.f_plus_i[0],
            s.f_plus_i[1],
            s.kappa2,
            s.kde_residual,
            s.dbar_residual,
            s.weight_modulus,
            w.norm_sqr(),
        ])
    })
}

pub fn extend(geo: &ChartedGeometry, config: &RunConfig) -> Table {
    let f = config.function.clone().unwrap_or_else(|| Monomial::parse("x1", geo.dim()).expect("x1 is valid"));
    log::info!("extending {}", f.text);
    let eval = |x: &[C]| f.eval(x);
    let mut columns = complex_cols("value").to_vec();
    columns.push("dbar_residual".into());
    grid_table(geo, config, columns, |z| {
        let v = magtube::kahler::holomorphic_extension(geo, &eval, z, &config.flow)?;
        let r = extension_dbar_residual(geo, &eval, z, config.step, &config.flow)?;
        Ok(vec![v.re, v.im, r])
    })
}

/// Real point with `x` uniform in the box and metric length of `p` equal to `len`.
fn shell_point(rng: &mut magtube::sampling::SampleRng, geo: &ChartedGeometry, half_width: f64, len: f64) -> PhasePoint {
    let n = geo.dim();
    let x = box_point(rng, n, half_width);
    let dir: Vec<f64> = loop {
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            break d;
        }
    };
    let scale = geo.metric_norm_sq(&PhasePoint::real(&x, &dir)).re.sqrt();
    PhasePoint::real(&x, &dir.iter().map(|v| v * len / scale).collect::<Vec<_>>())
}

pub fn sweep(geo: &ChartedGeometry, config: &RunConfig) -> Table {
    let sw = &config.sweep;
    let t = if config.time_given { config.time.clone() } else { ComplexTime::new(I) };
    let half_width = sw.half_width.min(0.99 * geo.chart_radius());
    let rows = (1..=sw.shells)
        .into_par_iter()
        .map(|k| {
            let len = sw.p_max * k as f64 / sw.shells as f64;
            let mut rng = stream(config.seed, &format!("sweep/{k}"));
            let points: Vec<PhasePoint> =
                (0..sw.per_shell).map(|_| shell_point(&mut rng, geo, half_width, len)).collect();
            let outcomes: Vec<Result<(f64, f64)>> = points
                .iter()
                .map(|z| {
                    let f = frame_at(geo, z, &t, &config.flow)?;
                    let d = assemble_j(&f)?;
                    Ok((d.transversality, d.min_positivity()))
                })
                .collect();
            let ok: Vec<(f64, f64)> = outcomes
                .iter()
                .filter_map(|o| o.as_ref().ok().copied())
                .filter(|(tr, pos)| *tr > DEFAULT_TRANSVERSALITY_TOL && *pos > 0.0)
                .collect();
            let failure = outcomes.iter().find_map(|o| o.as_ref().err()).map(|e| e.reason_code()).unwrap_or("");
            let min_tr = ok.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
            let min_pos = ok.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
            let opt = |v: f64| if v.is_finite() { num(v) } else { String::new() };
            vec![
                k.to_string(),
                num(len),
                sw.per_shell.to_string(),
                ok.len().to_string(),
                num(ok.len() as f64 / sw.per_shell.max(1) as f64),
                opt(min_tr),
                opt(min_pos),
                failure.to_string(),
            ]
        })
        .collect();
    let header = [
        "shell",
        "p",
        "attempts",
        "successes",
        "success_rate",
        "min_transversality",
        "min_positivity",
        "first_failure",
    ]
    .map(String::from)
    .to_vec();
    Table { header, rows }
}

/// Runs the requested suite and writes the JSON report; returns whether every check passed.
pub fn verify(
    cli: &Cli,
    config: Option<&RunConfig>,
    name: Option<&str>,
    out: Option<&Path>,
) -> std::result::Result<bool, Failure> {
    let name = name
        .map(str::to_string)
        .or_else(|| cli.suite.clone())
        .or_else(|| config.and_then(|c| c.suite.clone()))
        .unwrap_or_else(|| "all".to_string());
    let mut opts = VerifyOptions::default();
    if let Some(c) = config {
        opts.seed = c.seed;
        opts.flow = c.flow;
        opts.step = c.step;
    }
    if let Some(seed) = cli.seed {
        opts.seed = seed;
    }
    if let Some(tol) = cli.tol {
        opts.flow = FlowOptions { rel_tol: tol, abs_tol: tol * 1e-2, ..opts.flow };
    }
    let started = std::time::Instant::now();
    let report = verify::run(&name, &opts)?;
    for suite in &report.suites {
        let failed = suite.checks.iter().filter(|c| !c.passed).count();
        eprintln!(
            "{:<14} {:>3} checks  {}",
            suite.suite.name(),
            suite.checks.len(),
            if failed == 0 { "pass".to_string() } else { format!("FAIL ({failed})") }
        );
        for c in suite.checks.iter().filter(|c| !c.passed) {
            eprintln!("  {}: {:.3e} vs {:.1e} ({} errors)", c.name, c.value, c.tolerance, c.errors);
        }
    }
    eprintln!(
        "verify {name}: {} in {:.1} s",
        if report.passed { "pass" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Run(e.to_string()))?;
    write_text(&json, out)?;
    Ok(report.passed)
}
