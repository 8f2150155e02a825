//! Check orchestration: tabulate the surface once, dispatch the requested
//! checks, and collect reports. Per-check failures become failed entries;
//! only surface construction failure aborts the sweep (and still produces a
//! report, with error entries for every requested check).

use std::time::Instant;

use biharm_core::residuals::{
    check_codazzi, check_height_bilaplacian, check_height_laplacian, check_htheta_eigen,
    check_scalar_curvature, check_theta_laplacian, check_vertical_decomposition, cmc_cross_check,
    lambda_residual_einstein_sweep, lambda_residual_sweep, surface_data, CheckOutcome,
    ResidualReport, SurfaceData,
};

use crate::config::RunConfig;
use crate::report::RunReport;

pub fn run(config: &RunConfig, jobs: usize) -> RunReport {
    let started = Instant::now();
    let data = match surface_data(&config.entry.immersion, &config.grid, jobs) {
        Ok(data) => data,
        Err(e) => {
            let message = format!("surface construction failed: {e}");
            let checks = config
                .checks
                .iter()
                .map(|name| {
                    ResidualReport::failed(name, message.clone(), &config.grid, &config.space)
                })
                .collect();
            return RunReport::new(
                config.echo.clone(),
                config.seed,
                checks,
                started.elapsed().as_secs_f64() * 1e3,
            );
        }
    };

    let mut reports = Vec::new();
    for name in &config.checks {
        dispatch(name, config, &data, &mut reports);
    }
    RunReport::new(
        config.echo.clone(),
        config.seed,
        reports,
        started.elapsed().as_secs_f64() * 1e3,
    )
}

fn dispatch(name: &str, config: &RunConfig, data: &SurfaceData, reports: &mut Vec<ResidualReport>) {
    let finish = |outcome: CheckOutcome| {
        ResidualReport::from_outcome(
            &outcome,
            config.tolerances.base(name),
            &config.grid,
            &config.space,
        )
    };
    let fail = |e: biharm_core::GeomError| {
        ResidualReport::failed(name, e.to_string(), &config.grid, &config.space)
    };
    // checks needing a lambda are rejected at parse time when none is set
    let lambda = config.lambda.unwrap_or(0.0);
    match name {
        "lambda_residual" => match lambda_residual_sweep(data, lambda) {
            Ok((normal, tangent)) => {
                reports.push(finish(normal));
                reports.push(finish(tangent));
            }
            Err(e) => reports.push(fail(e)),
        },
        "lambda_residual_einstein" => {
            match lambda_residual_einstein_sweep(data, lambda, config.space.mu()) {
                Ok((normal, tangent)) => {
                    reports.push(finish(normal));
                    reports.push(finish(tangent));
                }
                Err(e) => reports.push(fail(e)),
            }
        }
        "height_laplacian" => reports.push(check_height_laplacian(data).map_or_else(fail, finish)),
        "theta_laplacian" => reports.push(check_theta_laplacian(data).map_or_else(fail, finish)),
        "vertical_decomposition" => {
            reports.push(check_vertical_decomposition(data).map_or_else(fail, finish))
        }
        "scalar_curvature" => reports.push(check_scalar_curvature(data).map_or_else(fail, finish)),
        "htheta_eigen" => {
            reports.push(check_htheta_eigen(data, lambda).map_or_else(fail, finish))
        }
        "height_bilaplacian" => {
            reports.push(check_height_bilaplacian(data, lambda).map_or_else(fail, finish))
        }
        "codazzi" => reports.push(check_codazzi(data).map_or_else(fail, finish)),
        "cmc_pivot" => reports.push(cmc_cross_check(data, lambda).map_or_else(fail, finish)),
        other => reports.push(ResidualReport::failed(
            other,
            "unknown check (should have been rejected at parse time)".into(),
            &config.grid,
            &config.space,
        )),
    }
}
