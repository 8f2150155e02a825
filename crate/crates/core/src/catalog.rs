//! Named example surfaces with analytically solved lambda values: the
//! ground-truth instances every residual check runs against.
//!
//! The lambda values are derived from the CMC reduction of the normal
//! equation (`lap H = 0`, solve the bracket for lambda) and confirmed by
//! residual sweeps in the test suite: `-(m-k)/a^2` for flat cylinders,
//! `(m-1)(1 - cot^2 rho)` over spherical distance spheres,
//! `-(m-1)(1 + coth^2 rho)` over hyperbolic ones. Geodesic spheres are built
//! from their standard embeddings through the stereographic-type chart
//! conversion rather than re-deriving chart equations.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientPoint, AmbientSpace};
use crate::calculus::ChartGrid;
use crate::error::{GeomError, Result};
use crate::immersion::{AmbientJet, Immersion};
use crate::jet::{Analytic, Jet2};
use crate::linalg::MAX_DIM;
use crate::rotation::Profile;

/// The lambda making an entry biharmonic in the penalized sense: a number,
/// any value (minimal examples), or none (generic test instances).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaStar {
    Any,
    Value(f64),
    None,
}

impl LambdaStar {
    pub fn numeric(&self) -> Option<f64> {
        match self {
            LambdaStar::Value(v) => Some(*v),
            _ => None,
        }
    }

    /// The lambda a run should use when the config says "auto".
    pub fn resolve(&self) -> Option<f64> {
        match self {
            LambdaStar::Value(v) => Some(*v),
            LambdaStar::Any => Some(0.0),
            LambdaStar::None => None,
        }
    }
}

/// A named surface with its chart, default grid, and solved lambda.
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub immersion: Immersion,
    pub lambda_star: LambdaStar,
    pub default_grid: ChartGrid,
    /// Whether the fields are constant in the chart (tightest tolerances).
    pub closed_form: bool,
    pub minimal: bool,
}

fn snap_zero(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

/// Angle chart of the unit sphere S^n in R^{n+1}, n <= 3.
pub fn unit_sphere_chart(n: usize, v: &[Jet2]) -> [Jet2; MAX_DIM] {
    let mut out = [Jet2::constant(0.0); MAX_DIM];
    match n {
        1 => {
            out[0] = v[0].cos();
            out[1] = v[0].sin();
        }
        2 => {
            out[0] = v[0].sin() * v[1].cos();
            out[1] = v[0].sin() * v[1].sin();
            out[2] = v[0].cos();
        }
        3 => {
            out[0] = v[0].sin() * v[1].sin() * v[2].cos();
            out[1] = v[0].sin() * v[1].sin() * v[2].sin();
            out[2] = v[0].sin() * v[1].cos();
            out[3] = v[0].cos();
        }
        _ => unreachable!("sphere chart dimension out of range"),
    }
    out
}

fn sphere_angle_domain(n: usize) -> Vec<(f64, f64)> {
    // first angle bounded away from the chart poles, the rest free-ish
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 && n >= 2 {
            out.push((0.4, 1.1));
        } else {
            out.push((0.3, 1.3));
        }
    }
    out
}

/// Stereographic-type conversion from the standard embedding into the
/// conformal chart. For `c = 1` the input is a point of the unit sphere in
/// R^{m+1} (projection centered at the pole opposite the last coordinate);
/// for `c = -1` a point of the hyperboloid, first coordinate timelike.
pub fn embedding_chart_convert(
    space: &AmbientSpace,
    embedding: &[f64],
    t: f64,
) -> Result<AmbientPoint> {
    let m = space.m();
    if embedding.len() != m + 1 {
        return Err(GeomError::InvalidParameter(format!(
            "embedding point needs {} coordinates, got {}",
            m + 1,
            embedding.len()
        )));
    }
    match space.c() {
        c if c > 0.0 => {
            let norm_sq: f64 = embedding.iter().map(|y| y * y).sum();
            if (norm_sq - 1.0).abs() > 1e-9 {
                return Err(GeomError::InvalidParameter(
                    "embedding point is not on the unit sphere".into(),
                ));
            }
            let denom = 1.0 + embedding[m];
            if denom.abs() < 1e-12 {
                return Err(GeomError::ConversionPole);
            }
            let mut base = [0.0; MAX_DIM - 1];
            for i in 0..m {
                base[i] = 2.0 * embedding[i] / denom;
            }
            Ok(AmbientPoint { base, t })
        }
        c if c < 0.0 => {
            let mink: f64 = -embedding[0] * embedding[0]
                + embedding[1..].iter().map(|y| y * y).sum::<f64>();
            if (mink + 1.0).abs() > 1e-9 || embedding[0] <= 0.0 {
                return Err(GeomError::InvalidParameter(
                    "embedding point is not on the upper hyperboloid".into(),
                ));
            }
            let denom = 1.0 + embedding[0];
            let mut base = [0.0; MAX_DIM - 1];
            for i in 0..m {
                base[i] = 2.0 * embedding[i + 1] / denom;
            }
            Ok(AmbientPoint { base, t })
        }
        _ => Err(GeomError::InvalidParameter(
            "chart conversion applies to curved bases only".into(),
        )),
    }
}

/// Inverse of [`embedding_chart_convert`].
pub fn chart_embedding_convert(space: &AmbientSpace, p: &AmbientPoint) -> Result<(Vec<f64>, f64)> {
    let m = space.m();
    let r2 = p.base_norm_sq(m);
    match space.c() {
        c if c > 0.0 => {
            let f = 1.0 / (1.0 + 0.25 * r2);
            let mut y = vec![0.0; m + 1];
            for i in 0..m {
                y[i] = p.base[i] * f;
            }
            y[m] = (1.0 - 0.25 * r2) * f;
            Ok((y, p.t))
        }
        c if c < 0.0 => {
            if r2 >= 4.0 {
                return Err(GeomError::OutsideChartDomain { norm_sq: r2 });
            }
            let f = 1.0 / (1.0 - 0.25 * r2);
            let mut y = vec![0.0; m + 1];
            y[0] = (1.0 + 0.25 * r2) * f;
            for i in 0..m {
                y[i + 1] = p.base[i] * f;
            }
            Ok((y, p.t))
        }
        _ => Err(GeomError::InvalidParameter(
            "chart conversion applies to curved bases only".into(),
        )),
    }
}

/// Horizontal slice: totally geodesic, minimal for every lambda.
pub fn slice(space: AmbientSpace, t0: f64) -> Result<CatalogEntry> {
    let domain = vec![(-0.5, 0.5); space.m()];
    let immersion = Immersion::slice(space, domain.clone(), t0)?;
    Ok(CatalogEntry {
        name: "slice".into(),
        description: format!("horizontal slice t = {t0}"),
        immersion,
        lambda_star: LambdaStar::Any,
        default_grid: ChartGrid::default_for(domain)?,
        closed_form: true,
        minimal: true,
    })
}

/// Generic graph `x -> (x, f(x))`; no solved lambda, identity checks only.
pub fn graph<F>(space: AmbientSpace, domain: Vec<(f64, f64)>, f: F) -> Result<CatalogEntry>
where
    F: Fn(&[Jet2]) -> Jet2 + Send + Sync + 'static,
{
    let immersion = Immersion::graph(space, domain.clone(), f)?;
    Ok(CatalogEntry {
        name: "graph".into(),
        description: "graph immersion".into(),
        immersion,
        lambda_star: LambdaStar::None,
        default_grid: ChartGrid::default_for(domain)?,
        closed_form: false,
        minimal: false,
    })
}

/// Deterministic splitmix64 stream for seeded random instances; fixed here
/// so reports are reproducible independent of any external generator.
pub struct SeededStream(u64);

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Seeded random trigonometric-polynomial graph with the given amplitude.
pub fn seeded_graph(space: AmbientSpace, seed: u64, amplitude: f64) -> Result<CatalogEntry> {
    let m = space.m();
    let mut rng = SeededStream::new(seed ^ (m as u64) << 32);
    let terms = 4usize;
    let mut waves = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut k = [0.0f64; 4];
        for kj in k.iter_mut().take(m) {
            *kj = rng.uniform(-2.0, 2.0);
        }
        let coeff = rng.uniform(0.5, 1.0) * amplitude / terms as f64;
        let phase = rng.uniform(0.0, TAU);
        waves.push((k, coeff, phase));
    }
    let mut entry = graph(space, vec![(-0.5, 0.5); m], move |x: &[Jet2]| {
        let mut f = Jet2::constant(0.0);
        for (k, coeff, phase) in &waves {
            let mut arg = Jet2::constant(*phase);
            for (i, xi) in x.iter().enumerate() {
                arg = arg + xi.scale(k[i]);
            }
            f = f + arg.sin().scale(*coeff);
        }
        f
    })?;
    entry.name = "seeded_graph".into();
    entry.description = format!("random trigonometric graph, seed {seed}, amplitude {amplitude}");
    Ok(entry)
}

/// Flat cylinder `R^k x S^{m-k}(a)` in Euclidean space, ruling aligned with
/// the vertical axis; biharmonic in the penalized sense at
/// `lambda = -(m-k)/a^2`.
pub fn euclidean_cylinder(m: usize, k: usize, a: f64) -> Result<CatalogEntry> {
    if k == 0 || k >= m {
        return Err(GeomError::InvalidParameter(format!(
            "need 1 <= k <= m-1, got k = {k}, m = {m}"
        )));
    }
    if !(a > 0.0) {
        return Err(GeomError::InvalidParameter("radius must be positive".into()));
    }
    let space = AmbientSpace::new(0.0, m)?;
    let n = m - k; // sphere factor dimension
    let mut domain = vec![(-0.5, 0.5); k];
    domain.extend(sphere_angle_domain(n));
    let immersion = Immersion::new(space, domain.clone(), move |x: &[Jet2]| {
        let mut coords = [Jet2::constant(0.0); MAX_DIM];
        // flat directions u_2..u_k fill the first base slots
        coords[..k - 1].copy_from_slice(&x[1..k]);
        let sphere = unit_sphere_chart(n, &x[k..]);
        for (slot, y) in sphere.iter().take(n + 1).enumerate() {
            coords[k - 1 + slot] = y.scale(a);
        }
        coords[m] = x[0]; // ruling along the vertical axis
        AmbientJet::new(coords)
    })?;
    let lambda = -(n as f64) / (a * a);
    Ok(CatalogEntry {
        name: "euclidean_cylinder".into(),
        description: format!("R^{k} x S^{n}({a}) in flat ambient, lambda* = {lambda}"),
        immersion,
        lambda_star: LambdaStar::Value(lambda),
        default_grid: ChartGrid::default_for(domain)?,
        closed_form: true,
        minimal: false,
    })
}

/// Vertical cylinder over the geodesic sphere of radius `rho` in the
/// spherical base: `lambda = (m-1)(1 - cot^2 rho)`, snapped to exact zero at
/// the biharmonic radius pi/4. At `rho = pi/2` the base is totally geodesic
/// and the entry is minimal.
pub fn spherical_vertical_cylinder(m: usize, rho: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0 && rho <= FRAC_PI_2 + 1e-12) {
        return Err(GeomError::InvalidParameter(
            "need 0 < rho <= pi/2".into(),
        ));
    }
    let space = AmbientSpace::new(1.0, m)?;
    let n = m - 1;
    let (sin_r, cos_r) = rho.sin_cos();
    let mut domain = sphere_angle_domain(n);
    domain.push((-0.5, 0.5)); // vertical coordinate last
    let immersion = Immersion::new(space, domain.clone(), move |x: &[Jet2]| {
        let sphere = unit_sphere_chart(n, &x[..n]);
        // embedding (sin rho * phi, cos rho), stereographic conversion with
        // the pole along the last embedding coordinate
        let denom = (Jet2::constant(cos_r) + Jet2::constant(1.0)).recip();
        let mut coords = [Jet2::constant(0.0); MAX_DIM];
        for i in 0..m {
            coords[i] = sphere[i].scale(2.0 * sin_r) * denom;
        }
        coords[m] = x[n];
        AmbientJet::new(coords)
    })?;
    let cot = cos_r / sin_r;
    let lambda = snap_zero((m as f64 - 1.0) * (1.0 - cot * cot));
    let minimal = cot.abs() < 1e-12;
    Ok(CatalogEntry {
        name: "spherical_vertical_cylinder".into(),
        description: format!(
            "S^{n}(rho = {rho}) x R in the spherical product, lambda* = {lambda}"
        ),
        immersion,
        lambda_star: LambdaStar::Value(lambda),
        default_grid: ChartGrid::default_for(domain)?,
        closed_form: true,
        minimal,
    })
}

/// Vertical cylinder over the geodesic sphere of radius `rho` in the
/// hyperbolic base: `lambda = -(m-1)(1 + coth^2 rho)`.
pub fn hyperbolic_vertical_cylinder(m: usize, rho: f64) -> Result<CatalogEntry> {
    if !(rho > 0.0) {
        return Err(GeomError::InvalidParameter("need rho > 0".into()));
    }
    let space = AmbientSpace::new(-1.0, m)?;
    let n = m - 1;
    let (sinh_r, cosh_r) = (rho.sinh(), rho.cosh());
    let mut domain = sphere_angle_domain(n);
    domain.push((-0.5, 0.5));
    let immersion = Immersion::new(space, domain.clone(), move |x: &[Jet2]| {
        let sphere = unit_sphere_chart(n, &x[..n]);
        // embedding (cosh rho, sinh rho * phi) on the hyperboloid
        let denom = (Jet2::constant(cosh_r) + Jet2::constant(1.0)).recip();
        let mut coords = [Jet2::constant(0.0); MAX_DIM];
        for i in 0..m {
            coords[i] = sphere[i].scale(2.0 * sinh_r) * denom;
        }
        coords[m] = x[n];
        AmbientJet::new(coords)
    })?;
    let coth = cosh_r / sinh_r;
    let lambda = -(m as f64 - 1.0) * (1.0 + coth * coth);
    Ok(CatalogEntry {
        name: "hyperbolic_vertical_cylinder".into(),
        description: format!(
            "S^{n}(rho = {rho}) x R over the hyperbolic base, lambda* = {lambda}"
        ),
        immersion,
        lambda_star: LambdaStar::Value(lambda),
        default_grid: ChartGrid::default_for(domain)?,
        closed_form: true,
        minimal: false,
    })
}

/// Rotation hypersurface of the curved products from a profile: chart
/// `(s, angles)`, embedding swept from the profile curve, then converted to
/// the conformal chart.
pub fn rotation_immersion(
    c: f64,
    m: usize,
    profile: Arc<dyn Profile>,
    v_domain: Option<Vec<(f64, f64)>>,
) -> Result<Immersion> {
    let space = AmbientSpace::new(c, m)?;
    let n = m - 1;
    let (s_lo, s_hi) = profile.s_domain();
    let mut domain = vec![(s_lo, s_hi)];
    domain.extend(v_domain.unwrap_or_else(|| sphere_angle_domain(n)));
    Immersion::new(space, domain, move |x: &[Jet2]| {
        let s = x[0];
        let h = match profile.h_jet(s.val) {
            Ok(j) => {
                let mut out = Jet2::constant(j.val);
                out.grad[0] = j.d1;
                out.hess[0][0] = j.d2;
                out
            }
            Err(_) => Jet2::constant(f64::NAN),
        };
        let sphere = unit_sphere_chart(n, &x[1..]);
        let mut coords = [Jet2::constant(0.0); MAX_DIM];
        if c > 0.0 {
            // embedding (cos s, phi sin s); pole along the last component
            let last = sphere[n] * s.sin();
            let denom = (last + Jet2::constant(1.0)).recip();
            coords[0] = s.cos().scale(2.0) * denom;
            for i in 0..n {
                coords[i + 1] = sphere[i] * s.sin().scale(2.0) * denom;
            }
        } else {
            // embedding (cosh s, phi sinh s); project from the vertex
            let denom = (s.cosh() + Jet2::constant(1.0)).recip();
            for i in 0..=n {
                coords[i] = sphere[i] * s.sinh().scale(2.0) * denom;
            }
        }
        coords[m] = h;
        AmbientJet::new(coords)
    })
}

/// Catalog entry for an integrated minimal rotation hypersurface.
pub fn rotation_minimal(
    c: f64,
    m: usize,
    initial_slope: f64,
    s0: f64,
    s1: f64,
    step: f64,
) -> Result<CatalogEntry> {
    let sampled = crate::rotation::minimal_profile_integrate(c, m, initial_slope, s0, s1, step)?;
    let profile: Arc<dyn Profile> = Arc::new(sampled);
    let immersion = rotation_immersion(c, m, Arc::clone(&profile), None)?;
    let domain = immersion.domain().to_vec();
    Ok(CatalogEntry {
        name: "rotation_minimal".into(),
        description: format!(
            "minimal rotation hypersurface, c = {c}, initial slope {initial_slope}"
        ),
        immersion,
        lambda_star: LambdaStar::Any,
        default_grid: ChartGrid::default_for(domain)?,
        closed_form: false,
        minimal: true,
    })
}

/// The entries the command-line catalog lists: one of each family with
/// representative parameters.
pub fn standard_entries() -> Result<Vec<CatalogEntry>> {
    Ok(vec![
        slice(AmbientSpace::new(0.0, 2)?, 0.0)?,
        slice(AmbientSpace::new(1.0, 3)?, 0.0)?,
        euclidean_cylinder(2, 1, 1.0)?,
        euclidean_cylinder(3, 1, 2.0)?,
        euclidean_cylinder(3, 2, 1.0)?,
        spherical_vertical_cylinder(2, std::f64::consts::FRAC_PI_3)?,
        spherical_vertical_cylinder(3, std::f64::consts::FRAC_PI_4)?,
        hyperbolic_vertical_cylinder(3, 0.5)?,
        hyperbolic_vertical_cylinder(3, 1.0)?,
        rotation_minimal(1.0, 3, 0.6, 0.4, 1.1, 1e-3)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residuals::{lambda_residual_sweep, surface_data};

    #[test]
    fn chart_conversion_round_trips() {
        let sphere = AmbientSpace::new(1.0, 3).unwrap();
        let north = embedding_chart_convert(&sphere, &[0.0, 0.0, 0.0, 1.0], 0.3).unwrap();
        assert!(north.base_norm_sq(3) < 1e-24);
        let equator = embedding_chart_convert(&sphere, &[1.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        assert!((equator.base_norm_sq(3) - 4.0).abs() < 1e-12);
        assert!(matches!(
            embedding_chart_convert(&sphere, &[0.0, 0.0, 0.0, -1.0], 0.0),
            Err(GeomError::ConversionPole)
        ));

        let mut rng = SeededStream::new(7);
        for _ in 0..32 {
            let raw: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y: Vec<f64> = raw.iter().map(|v| v / norm).collect();
            if y[3] < -0.9 {
                continue;
            }
            let p = embedding_chart_convert(&sphere, &y, 1.7).unwrap();
            let (back, t) = chart_embedding_convert(&sphere, &p).unwrap();
            assert!((t - 1.7).abs() < 1e-15);
            for (a, b) in y.iter().zip(back.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }

        let hyp = AmbientSpace::new(-1.0, 2).unwrap();
        for _ in 0..32 {
            let u = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
            let y0 = (1.0 + u[0] * u[0] + u[1] * u[1]).sqrt();
            let p = embedding_chart_convert(&hyp, &[y0, u[0], u[1]], -0.4).unwrap();
            assert!(p.base_norm_sq(2) < 4.0);
            let (back, _) = chart_embedding_convert(&hyp, &p).unwrap();
            assert!((back[0] - y0).abs() < 1e-12);
            assert!((back[1] - u[0]).abs() < 1e-12);
            assert!((back[2] - u[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_cylinder_lambda_star() {
        let entry = euclidean_cylinder(2, 1, 1.0).unwrap();
        assert_eq!(entry.lambda_star, LambdaStar::Value(-1.0));
        let frame = entry.immersion.frame_at(&[0.1, 0.8]).unwrap();
        assert!(frame.theta.abs() < 1e-13);
        assert!((frame.shape_norm_sq - 1.0).abs() < 1e-12);

        let entry = euclidean_cylinder(3, 1, 2.0).unwrap();
        assert_eq!(entry.lambda_star, LambdaStar::Value(-0.5));

        // radius growth sends lambda* and H to zero monotonically
        let mut last = f64::NEG_INFINITY;
        for a in [1.0, 2.0, 4.0, 8.0] {
            let e = euclidean_cylinder(3, 2, a).unwrap();
            let l = e.lambda_star.numeric().unwrap();
            assert!(l > last && l < 0.0);
            last = l;
        }

        assert!(euclidean_cylinder(3, 3, 1.0).is_err());
        assert!(euclidean_cylinder(3, 0, 1.0).is_err());
    }

    #[test]
    fn flat_cylinder_residual_at_lambda_star() {
        let entry = euclidean_cylinder(2, 1, 1.0).unwrap();
        let grid = ChartGrid::new(entry.default_grid.domain().to_vec(), vec![17, 17], 4).unwrap();
        let data = surface_data(&entry.immersion, &grid, 1).unwrap();
        let (normal, tangent) = lambda_residual_sweep(&data, -1.0).unwrap();
        assert!(normal.max_abs_residual < 1e-9, "{:.3e}", normal.max_abs_residual);
        assert!(tangent.max_abs_residual < 1e-9);
        // at lambda = 0 the normal residual is |H| |A|^2 = 1/2
        let (normal, tangent) = lambda_residual_sweep(&data, 0.0).unwrap();
        assert!((normal.max_abs_residual - 0.5).abs() < 1e-9);
        assert!(tangent.max_abs_residual < 1e-9);
    }

    #[test]
    fn spherical_cylinder_biharmonic_radius() {
        let entry = spherical_vertical_cylinder(3, std::f64::consts::FRAC_PI_4).unwrap();
        assert_eq!(entry.lambda_star, LambdaStar::Value(0.0));
        let frame = entry.immersion.frame_at(&[0.7, 0.9, 0.1]).unwrap();
        assert!(frame.theta.abs() < 1e-12);
        assert!((frame.shape_norm_sq - 2.0).abs() < 1e-10);

        let entry = spherical_vertical_cylinder(3, std::f64::consts::FRAC_PI_3).unwrap();
        let l = entry.lambda_star.numeric().unwrap();
        assert!((l - 4.0 / 3.0).abs() < 1e-12);

        // equatorial base is totally geodesic
        let entry = spherical_vertical_cylinder(3, FRAC_PI_2).unwrap();
        assert!(entry.minimal);
        let frame = entry.immersion.frame_at(&[0.7, 0.9, 0.1]).unwrap();
        assert!(frame.mean_curvature.abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_cylinder_lambda_star() {
        let entry = hyperbolic_vertical_cylinder(3, 1.0).unwrap();
        let coth = 1.0f64.cosh() / 1.0f64.sinh();
        let want = -2.0 * (1.0 + coth * coth);
        assert!((entry.lambda_star.numeric().unwrap() - want).abs() < 1e-12);
        let frame = entry.immersion.frame_at(&[0.7, 0.9, 0.1]).unwrap();
        assert!(frame.theta.abs() < 1e-12);
        // principal curvatures: coth(rho) twice, 0 along the ruling
        let kappa = frame.principal_curvatures();
        let mut mags: Vec<f64> = kappa.iter().map(|k| k.abs()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(mags[0] < 1e-10);
        assert!((mags[1] - coth).abs() < 1e-10);
        assert!((mags[2] - coth).abs() < 1e-10);

        // coth -> 1: lambda* -> -2(m-1)
        let far = hyperbolic_vertical_cylinder(3, 30.0).unwrap();
        assert!((far.lambda_star.numeric().unwrap() + 4.0).abs() < 1e-9);
    }

    #[test]
    fn seeded_graph_reproducible_and_theta_limit() {
        let space = AmbientSpace::new(1.0, 2).unwrap();
        let a = seeded_graph(space, 42, 0.15).unwrap();
        let b = seeded_graph(space, 42, 0.15).unwrap();
        let fa = a.immersion.frame_at(&[0.2, -0.3]).unwrap();
        let fb = b.immersion.frame_at(&[0.2, -0.3]).unwrap();
        assert_eq!(fa.mean_curvature, fb.mean_curvature);
        assert_eq!(fa.theta, fb.theta);

        // amplitude -> 0 sends theta -> 1 uniformly
        let tiny = seeded_graph(space, 42, 1e-6).unwrap();
        let f = tiny.immersion.frame_at(&[0.2, -0.3]).unwrap();
        assert!((f.theta - 1.0).abs() < 1e-11);
    }

    #[test]
    fn slice_entry_passes_for_any_lambda() {
        let space = AmbientSpace::new(-1.0, 2).unwrap();
        let entry = slice(space, 0.1).unwrap();
        assert_eq!(entry.lambda_star, LambdaStar::Any);
        assert!(entry.minimal);
        let grid = ChartGrid::new(entry.default_grid.domain().to_vec(), vec![17, 17], 4).unwrap();
        let data = surface_data(&entry.immersion, &grid, 1).unwrap();
        for lambda in [-1.0, 0.0, 1.0] {
            let (normal, tangent) = lambda_residual_sweep(&data, lambda).unwrap();
            assert!(normal.max_abs_residual < 1e-10);
            assert!(tangent.max_abs_residual < 1e-10);
        }
    }
}
