//! Run-configuration schema: JSON in, validated runnable setup out.
//!
//! Validation failures carry the offending field path; the binary maps them
//! to exit code 2.

use std::collections::BTreeMap;

use serde::Deserialize;

use biharm_core::calculus::ChartGrid;
use biharm_core::catalog::{self, CatalogEntry, LambdaStar};
use biharm_core::residuals::{ToleranceTable, CHECK_NAMES};
use biharm_core::AmbientSpace;

use crate::expr::Expr;

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at {}: {}", self.path, self.message)
    }
}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    ambient: RawAmbient,
    surface: RawSurface,
    #[serde(default)]
    lambda: Option<serde_json::Value>,
    #[serde(default)]
    grid: Option<RawGrid>,
    #[serde(default)]
    checks: Option<Vec<String>>,
    #[serde(default)]
    tolerances: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAmbient {
    c: f64,
    m: usize,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum RawSurface {
    #[serde(rename = "slice")]
    Slice {
        #[serde(default)]
        t0: f64,
    },
    #[serde(rename = "graph")]
    Graph {
        #[serde(default)]
        amplitude: Option<f64>,
    },
    #[serde(rename = "euclidean_cylinder")]
    EuclideanCylinder { k: usize, a: f64 },
    #[serde(rename = "spherical_vertical_cylinder")]
    SphericalVerticalCylinder { rho: f64 },
    #[serde(rename = "hyperbolic_vertical_cylinder")]
    HyperbolicVerticalCylinder { rho: f64 },
    #[serde(rename = "rotation_minimal")]
    RotationMinimal {
        initial_slope: f64,
        #[serde(default)]
        s0: Option<f64>,
        #[serde(default)]
        s1: Option<f64>,
        #[serde(default)]
        step: Option<f64>,
    },
    #[serde(rename = "custom-graph-expression")]
    CustomGraphExpression { expression: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(default)]
    resolution: Option<Vec<usize>>,
    #[serde(default)]
    domain: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    margin: Option<usize>,
}

/// A validated, runnable configuration.
pub struct RunConfig {
    pub space: AmbientSpace,
    pub entry: CatalogEntry,
    /// Resolved lambda; `None` when the surface has no distinguished value
    /// and none was supplied.
    pub lambda: Option<f64>,
    pub grid: ChartGrid,
    pub checks: Vec<String>,
    pub tolerances: ToleranceTable,
    pub seed: u64,
    /// Raw JSON as parsed, echoed into reports.
    pub echo: serde_json::Value,
}

/// Checks run by default when the config lists none: the full identity
/// chain, plus the lambda checks when a lambda is available.
pub fn default_checks(has_lambda: bool) -> Vec<String> {
    let mut names = vec![
        "height_laplacian".to_string(),
        "theta_laplacian".to_string(),
        "vertical_decomposition".to_string(),
        "scalar_curvature".to_string(),
        "codazzi".to_string(),
    ];
    if has_lambda {
        names.insert(0, "lambda_residual".to_string());
        names.push("htheta_eigen".to_string());
        names.push("height_bilaplacian".to_string());
    }
    names
}

pub fn parse_config(text: &str, seed_override: Option<u64>) -> Result<RunConfig, ConfigError> {
    let echo: serde_json::Value =
        serde_json::from_str(text).map_err(|e| err("<root>", e.to_string()))?;
    let raw: RawConfig =
        serde_json::from_value(echo.clone()).map_err(|e| err("<root>", e.to_string()))?;

    let space = AmbientSpace::new(raw.ambient.c, raw.ambient.m)
        .map_err(|e| err("ambient", e.to_string()))?;
    let m = space.m();
    let seed = seed_override.or(raw.seed).unwrap_or(0);

    let entry = build_entry(&raw.surface, space, seed)?;

    let lambda = match &raw.lambda {
        // omitted: use the solved value when the surface has one
        None => entry.lambda_star.numeric(),
        Some(serde_json::Value::String(s)) if s == "auto" => match entry.lambda_star {
            LambdaStar::None => {
                return Err(err(
                    "lambda",
                    "\"auto\" needs a surface with a solved lambda (this one has none)",
                ))
            }
            star => star.resolve(),
        },
        Some(serde_json::Value::Number(n)) => Some(n.as_f64().ok_or_else(|| {
            err("lambda", "not representable as a floating point number")
        })?),
        Some(other) => {
            return Err(err(
                "lambda",
                format!("expected a number or \"auto\", got {other}"),
            ))
        }
    };

    let domain = raw
        .grid
        .as_ref()
        .and_then(|g| g.domain.clone())
        .unwrap_or_else(|| entry.immersion.domain().to_vec());
    if domain.len() != m {
        return Err(err(
            "grid.domain",
            format!("needs {m} axes, got {}", domain.len()),
        ));
    }
    let resolution = raw
        .grid
        .as_ref()
        .and_then(|g| g.resolution.clone())
        .unwrap_or_else(|| vec![if m == 2 { 81 } else { 41 }; m]);
    if resolution.len() != m {
        return Err(err(
            "grid.resolution",
            format!("needs {m} axes, got {}", resolution.len()),
        ));
    }
    let margin = raw.grid.as_ref().and_then(|g| g.margin).unwrap_or(4);
    let grid = ChartGrid::new(domain, resolution, margin).map_err(|e| err("grid", e.to_string()))?;

    let checks = match raw.checks {
        None => default_checks(lambda.is_some()),
        Some(list) => {
            if list.is_empty() {
                return Err(err("checks", "list must not be empty"));
            }
            for (i, name) in list.iter().enumerate() {
                if !CHECK_NAMES.contains(&name.as_str()) {
                    return Err(err(
                        &format!("checks[{i}]"),
                        format!(
                            "unknown check '{name}'; known: {}",
                            CHECK_NAMES.join(", ")
                        ),
                    ));
                }
            }
            list
        }
    };
    let needs_lambda = ["lambda_residual", "lambda_residual_einstein", "htheta_eigen", "height_bilaplacian", "cmc_pivot"];
    if lambda.is_none() {
        if let Some(name) = checks.iter().find(|c| needs_lambda.contains(&c.as_str())) {
            return Err(err(
                "lambda",
                format!("check '{name}' needs a lambda; supply a number or \"auto\""),
            ));
        }
    }

    let mut tolerances = ToleranceTable {
        closed_form: entry.closed_form,
        overrides: BTreeMap::new(),
    };
    if let Some(map) = raw.tolerances {
        for (name, tol) in map {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(err(
                    &format!("tolerances.{name}"),
                    "unknown check name".to_string(),
                ));
            }
            if !tol.is_finite() || tol <= 0.0 {
                return Err(err(
                    &format!("tolerances.{name}"),
                    "tolerance must be positive".to_string(),
                ));
            }
            tolerances.overrides.insert(name, tol);
        }
    }

    Ok(RunConfig {
        space,
        entry,
        lambda,
        grid,
        checks,
        tolerances,
        seed,
        echo,
    })
}

fn build_entry(
    surface: &RawSurface,
    space: AmbientSpace,
    seed: u64,
) -> Result<CatalogEntry, ConfigError> {
    let m = space.m();
    match surface {
        RawSurface::Slice { t0 } => {
            catalog::slice(space, *t0).map_err(|e| err("surface", e.to_string()))
        }
        RawSurface::Graph { amplitude } => {
            catalog::seeded_graph(space, seed, amplitude.unwrap_or(0.15))
                .map_err(|e| err("surface.amplitude", e.to_string()))
        }
        RawSurface::EuclideanCylinder { k, a } => {
            if space.c() != 0.0 {
                return Err(err("ambient.c", "euclidean_cylinder needs c = 0"));
            }
            catalog::euclidean_cylinder(m, *k, *a).map_err(|e| err("surface", e.to_string()))
        }
        RawSurface::SphericalVerticalCylinder { rho } => {
            if space.c() != 1.0 {
                return Err(err("ambient.c", "spherical_vertical_cylinder needs c = 1"));
            }
            catalog::spherical_vertical_cylinder(m, *rho)
                .map_err(|e| err("surface.rho", e.to_string()))
        }
        RawSurface::HyperbolicVerticalCylinder { rho } => {
            if space.c() != -1.0 {
                return Err(err("ambient.c", "hyperbolic_vertical_cylinder needs c = -1"));
            }
            catalog::hyperbolic_vertical_cylinder(m, *rho)
                .map_err(|e| err("surface.rho", e.to_string()))
        }
        RawSurface::RotationMinimal {
            initial_slope,
            s0,
            s1,
            step,
        } => {
            if space.c() == 0.0 {
                return Err(err("ambient.c", "rotation_minimal needs c = 1 or c = -1"));
            }
            catalog::rotation_minimal(
                space.c(),
                m,
                *initial_slope,
                s0.unwrap_or(0.4),
                s1.unwrap_or(1.1),
                step.unwrap_or(1e-3),
            )
            .map_err(|e| err("surface", e.to_string()))
        }
        RawSurface::CustomGraphExpression { expression } => {
            let expr = Expr::parse(expression, m)
                .map_err(|e| err("surface.expression", e.to_string()))?;
            let mut entry =
                catalog::graph(space, vec![(-0.5, 0.5); m], move |x| expr.eval(x))
                    .map_err(|e| err("surface", e.to_string()))?;
            entry.name = "custom-graph-expression".into();
            entry.description = format!("graph of '{expression}'");
            Ok(entry)
        }
    }
}
