//! The ambient product space: a constant-curvature base of dimension `m` and
//! curvature `c` in {-1, 0, 1}, times a flat vertical line.
//!
//! The base is modelled on the conformal chart with factor
//! `F(x) = 1 / (1 + (c/4) |x|^2)`, so the product metric is
//! `F^2 I_m (+) 1`: identity at the chart origin for every `c`, Poincaré ball
//! of radius 2 for `c = -1`, stereographic sphere chart for `c = +1`.
//! Christoffel symbols are closed-form in `F`; the curvature operator is the
//! rank-one combination that constant base curvature forces, so nothing here
//! is differenced numerically.

use crate::error::{GeomError, Result};
use crate::linalg::{metric_dot, zero_mat, zero_vec, SMat, SVec, MAX_DIM};

/// Rank-3 Christoffel array, `gamma[a][b][c]` = Γ^a_{bc}.
pub type Christoffel = [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM];

/// The product of an `m`-dimensional constant-curvature space and a line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientSpace {
    curvature: f64,
    base_dim: usize,
    einstein_constant: f64,
}

impl AmbientSpace {
    /// A product space with base curvature `c` in {-1, 0, 1} and base
    /// dimension `m` (hypersurfaces inside have dimension `m`). The Einstein
    /// constant of the base is `c (m - 1)`.
    pub fn new(c: f64, m: usize) -> Result<Self> {
        if c != -1.0 && c != 0.0 && c != 1.0 {
            return Err(GeomError::InvalidCurvature(c));
        }
        if !(2..MAX_DIM).contains(&m) {
            return Err(GeomError::InvalidDimension(m));
        }
        Ok(AmbientSpace {
            curvature: c,
            base_dim: m,
            einstein_constant: c * (m as f64 - 1.0),
        })
    }

    pub fn c(&self) -> f64 {
        self.curvature
    }

    /// Hypersurface (= base) dimension.
    pub fn m(&self) -> usize {
        self.base_dim
    }

    /// Einstein constant of the base, `mu = c (m - 1)`.
    pub fn mu(&self) -> f64 {
        self.einstein_constant
    }

    pub fn ambient_dim(&self) -> usize {
        self.base_dim + 1
    }

    /// Coordinate index of the vertical (height) direction.
    pub fn t_index(&self) -> usize {
        self.base_dim
    }

    /// Scalar curvature of the product, `c m (m - 1)`; the line contributes
    /// nothing.
    pub fn scalar_curvature(&self) -> f64 {
        let m = self.base_dim as f64;
        self.curvature * m * (m - 1.0)
    }

    fn check_base(&self, base_norm_sq: f64) -> Result<()> {
        if self.curvature < 0.0 && base_norm_sq >= 4.0 {
            return Err(GeomError::OutsideChartDomain {
                norm_sq: base_norm_sq,
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: &AmbientPoint) -> bool {
        self.check_base(p.base_norm_sq(self.base_dim)).is_ok()
    }

    /// Conformal factor of the base chart at `base` coordinates.
    pub fn conformal_factor(&self, p: &AmbientPoint) -> Result<f64> {
        let r2 = p.base_norm_sq(self.base_dim);
        self.check_base(r2)?;
        Ok(1.0 / (1.0 + 0.25 * self.curvature * r2))
    }

    /// Product metric at `p`: `F(p)^2 I_m (+) 1`, indices `0..m` base, `m`
    /// vertical.
    pub fn metric_at(&self, p: &AmbientPoint) -> Result<SMat> {
        let f = self.conformal_factor(p)?;
        let mut g = zero_mat();
        for i in 0..self.base_dim {
            g[i][i] = f * f;
        }
        g[self.t_index()][self.t_index()] = 1.0;
        Ok(g)
    }

    /// Christoffel symbols of the product metric at `p`. Every component
    /// with a vertical index vanishes: the vertical field is parallel.
    pub fn christoffel_at(&self, p: &AmbientPoint) -> Result<Christoffel> {
        let f = self.conformal_factor(p)?;
        let mut gamma = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
        if self.curvature == 0.0 {
            return Ok(gamma);
        }
        let s = -0.5 * self.curvature * f;
        let m = self.base_dim;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut v = 0.0;
                    if a == b {
                        v += p.base[c];
                    }
                    if a == c {
                        v += p.base[b];
                    }
                    if b == c {
                        v -= p.base[a];
                    }
                    gamma[a][b][c] = s * v;
                }
            }
        }
        Ok(gamma)
    }

    /// Curvature operator R(X, Y)Z of the product space, evaluated on
    /// coordinate-basis components at `p`. All inner products are taken in
    /// the product metric; pairing with the vertical field is just the
    /// vertical component since the metric is 1 there.
    pub fn curvature_op(&self, p: &AmbientPoint, x: &SVec, y: &SVec, z: &SVec) -> Result<SVec> {
        let c = self.curvature;
        if c == 0.0 {
            self.check_base(p.base_norm_sq(self.base_dim))?;
            return Ok(zero_vec());
        }
        let g = self.metric_at(p)?;
        let dim = self.ambient_dim();
        let t = self.t_index();
        let yz = metric_dot(dim, &g, y, z);
        let xz = metric_dot(dim, &g, x, z);
        let (xt, yt, zt) = (x[t], y[t], z[t]);
        let mut out = zero_vec();
        for a in 0..dim {
            out[a] = c * (yz * x[a] - xz * y[a] - yt * zt * x[a] + xt * zt * y[a]);
        }
        out[t] += c * (xz * yt - yz * xt);
        Ok(out)
    }

    /// `Ric(xi, xi)` for a unit normal with angle function `theta`:
    /// `mu (1 - theta^2)`, i.e. `c (m-1) sin^2(alpha)`.
    pub fn ricci_normal_scalar(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(self.einstein_constant * (1.0 - theta * theta))
    }

    /// Coefficient of `T` in the tangential projection of `Ric(xi)`:
    /// `-mu theta`.
    pub fn ricci_normal_tangential_coefficient(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(-self.einstein_constant * theta)
    }
}

/// Tolerance on |theta| <= 1; overshoot beyond it means the frame upstream is
/// broken, not a rounding artifact.
const THETA_SLACK: f64 = 1e-8;

fn check_theta(theta: f64) -> Result<()> {
    if theta.abs() > 1.0 + THETA_SLACK {
        return Err(GeomError::ThetaOutOfRange(theta.abs()));
    }
    Ok(())
}

/// A point of the product space: base chart coordinates plus height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint {
    pub base: [f64; MAX_DIM - 1],
    pub t: f64,
}

impl AmbientPoint {
    pub fn new(base: &[f64], t: f64) -> Self {
        let mut b = [0.0; MAX_DIM - 1];
        b[..base.len()].copy_from_slice(base);
        AmbientPoint { base: b, t }
    }

    pub fn base_norm_sq(&self, m: usize) -> f64 {
        self.base[..m].iter().map(|v| v * v).sum()
    }

    /// Flat coordinate vector with base first, height last.
    pub fn coords(&self, m: usize) -> SVec {
        let mut v = zero_vec();
        v[..m].copy_from_slice(&self.base[..m]);
        v[m] = self.t;
        v
    }
}
