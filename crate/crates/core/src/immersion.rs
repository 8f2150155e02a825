//! Hypersurface charts and the pointwise extrinsic frame.
//!
//! An [`Immersion`] wraps a chart map evaluated in order-2 jets, so the
//! induced metric and second fundamental form come out with exact
//! derivatives. [`frame_at`](Immersion::frame_at) assembles the full frame:
//! induced metric, unit normal, shape operator, mean curvature, principal
//! curvatures, the angle function and the tangential part of the vertical
//! field.
//!
//! Sign conventions, fixed once and validated by the identity checks
//! downstream: `b_ij = <D_i d_j phi, xi>`, `A = g^{-1} b` (equivalently
//! `A X = -(D_X xi)^tan`), `H = tr(A)/m`, `theta = <dt, xi>`. The normal sign
//! is deterministic: the first component of the orthogonal complement vector
//! that is nonzero, scanning the vertical component first and then the base
//! components in order, is made positive; an orientation flag on the
//! immersion flips it.

use std::sync::Arc;

use crate::ambient::{AmbientPoint, AmbientSpace};
use crate::error::{GeomError, Result};
use crate::jet::{Jet2, MAX_VARS};
use crate::linalg::{
    self, determinant, generalized_symmetric_eigenvalues, invert, metric_dot,
    orthogonal_complement, zero_mat, zero_vec, SMat, SVec,
};

/// Ambient coordinates of a mapped chart point, as jets in the chart
/// variables. Entries `0..m` are base coordinates, entry `m` the height.
#[derive(Clone, Copy, Debug)]
pub struct AmbientJet {
    pub coords: [Jet2; linalg::MAX_DIM],
}

impl AmbientJet {
    pub fn new(coords: [Jet2; linalg::MAX_DIM]) -> Self {
        AmbientJet { coords }
    }
}

pub type ChartMap = dyn Fn(&[Jet2]) -> AmbientJet + Send + Sync;

/// Minimum allowed determinant of the induced metric; below this the chart
/// is treated as rank deficient and evaluation is a hard error.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A smooth chart from an axis-aligned box into the ambient product space.
#[derive(Clone)]
pub struct Immersion {
    space: AmbientSpace,
    domain: Vec<(f64, f64)>,
    map: Arc<ChartMap>,
    flip_normal: bool,
}

impl Immersion {
    pub fn new<F>(space: AmbientSpace, domain: Vec<(f64, f64)>, map: F) -> Result<Self>
    where
        F: Fn(&[Jet2]) -> AmbientJet + Send + Sync + 'static,
    {
        if domain.len() != space.m() {
            return Err(GeomError::InvalidParameter(format!(
                "domain has {} axes but the chart dimension is {}",
                domain.len(),
                space.m()
            )));
        }
        if domain.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(GeomError::InvalidParameter(
                "domain box must have lo < hi on every axis".into(),
            ));
        }
        Ok(Immersion {
            space,
            domain,
            map: Arc::new(map),
            flip_normal: false,
        })
    }

    /// Graph immersion `x -> (x, f(x))`.
    pub fn graph<F>(space: AmbientSpace, domain: Vec<(f64, f64)>, f: F) -> Result<Self>
    where
        F: Fn(&[Jet2]) -> Jet2 + Send + Sync + 'static,
    {
        let m = space.m();
        Immersion::new(space, domain, move |x: &[Jet2]| {
            let mut coords = [Jet2::constant(0.0); linalg::MAX_DIM];
            coords[..m].copy_from_slice(&x[..m]);
            coords[m] = f(x);
            AmbientJet::new(coords)
        })
    }

    /// Horizontal slice `x -> (x, t0)`.
    pub fn slice(space: AmbientSpace, domain: Vec<(f64, f64)>, t0: f64) -> Result<Self> {
        Immersion::graph(space, domain, move |_| Jet2::constant(t0))
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn map_arc(&self) -> Arc<ChartMap> {
        Arc::clone(&self.map)
    }

    pub fn is_flipped(&self) -> bool {
        self.flip_normal
    }

    /// Same chart with the normal orientation reversed.
    pub fn with_flipped_normal(&self) -> Self {
        let mut out = self.clone();
        out.flip_normal = !out.flip_normal;
        out
    }

    fn check_in_domain(&self, x: &[f64]) -> Result<()> {
        for (i, (lo, hi)) in self.domain.iter().enumerate() {
            let slack = 1e-12 * (hi - lo).abs();
            if x[i] < lo - slack || x[i] > hi + slack {
                return Err(GeomError::InvalidParameter(format!(
                    "chart point {:?} leaves the domain box on axis {}",
                    x, i
                )));
            }
        }
        Ok(())
    }

    /// Evaluate the chart map with seeded jets.
    pub fn jet_at(&self, x: &[f64]) -> Result<AmbientJet> {
        self.check_in_domain(x)?;
        let m = self.m();
        let mut seeds = [Jet2::constant(0.0); MAX_VARS];
        for i in 0..m {
            seeds[i] = Jet2::variable(x[i], i);
        }
        let jet = (self.map)(&seeds[..m]);
        for a in 0..=m {
            if !jet.coords[a].is_finite() {
                return Err(GeomError::InvalidParameter(format!(
                    "immersion map produced a non-finite jet at {:?}",
                    x
                )));
            }
        }
        Ok(jet)
    }

    pub fn ambient_point_at(&self, x: &[f64]) -> Result<AmbientPoint> {
        let jet = self.jet_at(x)?;
        let m = self.m();
        let mut base = [0.0; linalg::MAX_DIM - 1];
        for i in 0..m {
            base[i] = jet.coords[i].val;
        }
        Ok(AmbientPoint {
            base,
            t: jet.coords[m].val,
        })
    }

    /// The full extrinsic frame at a chart point.
    pub fn frame_at(&self, x: &[f64]) -> Result<GeometryFrame> {
        let m = self.m();
        let dim = m + 1;
        let t_idx = self.space.t_index();
        let jet = self.jet_at(x)?;

        let mut base = [0.0; linalg::MAX_DIM - 1];
        for i in 0..m {
            base[i] = jet.coords[i].val;
        }
        let point = AmbientPoint {
            base,
            t: jet.coords[m].val,
        };
        let ambient_metric = self.space.metric_at(&point)?;
        let gamma = self.space.christoffel_at(&point)?;

        // tangents[i][a] = d_i phi^a
        let mut tangents = [zero_vec(); MAX_VARS];
        for i in 0..m {
            for a in 0..dim {
                tangents[i][a] = jet.coords[a].grad[i];
            }
        }

        let mut metric = zero_mat();
        for i in 0..m {
            for j in 0..m {
                metric[i][j] = metric_dot(dim, &ambient_metric, &tangents[i], &tangents[j]);
            }
        }
        let det_metric = determinant(m, &metric);
        if !(det_metric > RANK_TOLERANCE) {
            return Err(GeomError::RankDeficient {
                at: x.to_vec(),
                det: det_metric,
            });
        }
        let metric_inv = invert(m, &metric).ok_or(GeomError::RankDeficient {
            at: x.to_vec(),
            det: det_metric,
        })?;

        // unit normal: orthogonal complement of the tangent rows in the
        // ambient metric, normalized, sign fixed by the component priority
        // rule (vertical first, then base order), then the orientation flag
        let mut rows = [zero_vec(); MAX_VARS];
        for i in 0..m {
            rows[i] = linalg::mat_vec(dim, &ambient_metric, &tangents[i]);
        }
        let raw = orthogonal_complement(m, &rows[..m]);
        let norm_sq = metric_dot(dim, &ambient_metric, &raw, &raw);
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(GeomError::NormalizationFailure { at: x.to_vec() });
        }
        let inv_norm = 1.0 / norm_sq.sqrt();
        let mut normal = zero_vec();
        for a in 0..dim {
            normal[a] = raw[a] * inv_norm;
        }
        let max_abs = normal[..dim].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut priority = [0usize; linalg::MAX_DIM];
        priority[0] = t_idx;
        for (slot, a) in (0..m).enumerate() {
            priority[slot + 1] = a;
        }
        let mut sign = 1.0;
        for &a in &priority[..dim] {
            if normal[a].abs() > 1e-10 * max_abs {
                if normal[a] < 0.0 {
                    sign = -1.0;
                }
                break;
            }
        }
        if self.flip_normal {
            sign = -sign;
        }
        for a in 0..dim {
            normal[a] *= sign;
        }

        // b_ij = <d_i d_j phi + Gamma(d_i phi, d_j phi), xi>
        let mut second_fundamental = zero_mat();
        for i in 0..m {
            for j in 0..m {
                let mut w = zero_vec();
                for a in 0..dim {
                    w[a] = jet.coords[a].hess[i][j];
                }
                for a in 0..dim {
                    let mut corr = 0.0;
                    for c in 0..dim {
                        for d in 0..dim {
                            corr += gamma[a][c][d] * tangents[i][c] * tangents[j][d];
                        }
                    }
                    w[a] += corr;
                }
                second_fundamental[i][j] = metric_dot(dim, &ambient_metric, &w, &normal);
            }
        }

        let shape = linalg::mat_mul(m, &metric_inv, &second_fundamental);
        let mean_curvature = linalg::trace(m, &shape) / m as f64;
        let mut shape_norm_sq = 0.0;
        for i in 0..m {
            for k in 0..m {
                shape_norm_sq += shape[i][k] * shape[k][i];
            }
        }

        let principal = generalized_symmetric_eigenvalues(m, &second_fundamental, &metric)
            .ok_or(GeomError::RankDeficient {
                at: x.to_vec(),
                det: det_metric,
            })?;

        let theta = normal[t_idx];
        let mut tangential_vertical = [0.0; MAX_VARS];
        for i in 0..m {
            for j in 0..m {
                tangential_vertical[i] += metric_inv[i][j] * tangents[j][t_idx];
            }
        }

        let mut chart_point = [0.0; MAX_VARS];
        chart_point[..m].copy_from_slice(&x[..m]);

        Ok(GeometryFrame {
            m,
            chart_point,
            point,
            ambient_metric,
            tangents,
            metric,
            metric_inv,
            det_metric,
            second_fundamental,
            shape,
            mean_curvature,
            shape_norm_sq,
            principal,
            theta,
            tangential_vertical,
            normal,
            height: point.t,
        })
    }
}

/// All pointwise extrinsic data at one chart point.
#[derive(Clone, Copy, Debug)]
pub struct GeometryFrame {
    pub m: usize,
    pub chart_point: [f64; MAX_VARS],
    pub point: AmbientPoint,
    pub ambient_metric: SMat,
    /// `tangents[i]` = ambient components of the i-th coordinate tangent.
    pub tangents: [SVec; MAX_VARS],
    pub metric: SMat,
    pub metric_inv: SMat,
    pub det_metric: f64,
    pub second_fundamental: SMat,
    /// Shape operator in mixed indices, `A = g^{-1} b`.
    pub shape: SMat,
    pub mean_curvature: f64,
    /// `|A|^2 = tr(A A)`.
    pub shape_norm_sq: f64,
    /// Principal curvatures, ascending; the first `m` entries are valid.
    pub principal: SVec,
    /// Angle function `theta = <dt, xi>`.
    pub theta: f64,
    /// Chart components of the tangential part of the vertical field.
    pub tangential_vertical: [f64; MAX_VARS],
    /// Ambient components of the unit normal.
    pub normal: SVec,
    pub height: f64,
}

impl GeometryFrame {
    pub fn principal_curvatures(&self) -> &[f64] {
        &self.principal[..self.m]
    }

    /// `g(T, T)`; together with `theta^2` this sums to 1.
    pub fn vertical_tangent_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                s += self.metric[i][j] * self.tangential_vertical[i] * self.tangential_vertical[j];
            }
        }
        s
    }

    /// Pointwise distance from total umbilicity: the components of
    /// `b - H g` in the orthonormal principal frame, i.e. `max_i |k_i - H|`.
    /// Zero iff the point is umbilical, and invariant under chart changes.
    pub fn umbilicity_defect(&self) -> f64 {
        self.principal_curvatures()
            .iter()
            .map(|k| (k - self.mean_curvature).abs())
            .fold(0.0, f64::max)
    }

    /// The same frame with the opposite normal: odd quantities change sign,
    /// the metric and the vertical tangent stay put.
    pub fn flipped(&self) -> GeometryFrame {
        let mut out = *self;
        for a in 0..=self.m {
            out.normal[a] = -out.normal[a];
        }
        for i in 0..self.m {
            for j in 0..self.m {
                out.second_fundamental[i][j] = -out.second_fundamental[i][j];
                out.shape[i][j] = -out.shape[i][j];
            }
        }
        out.mean_curvature = -out.mean_curvature;
        out.theta = -out.theta;
        let mut flipped = zero_vec();
        for k in 0..self.m {
            flipped[k] = -self.principal[self.m - 1 - k];
        }
        out.principal = flipped;
        out
    }
}
