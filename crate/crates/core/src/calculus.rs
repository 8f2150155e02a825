//! Scalar-field calculus on chart lattices.
//!
//! Pointwise data (metric, curvatures, angle function) is exact from jets;
//! everything that needs a third or fourth derivative of the immersion goes
//! through 4th-order 5-point central stencils on the lattice instead. The
//! Laplace-Beltrami operator uses the divergence form
//! `(1/sqrt g) d_i (sqrt g g^{ij} d_j f)` with nested stencils, which is the
//! convention under which the height identity `lap h = m theta H` holds.
//!
//! Stencil reach bookkeeping: a gradient needs 2 lattice layers, the
//! Laplacian 4 (nested), the bilaplacian 8. Each operator checks its inset.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jet::MAX_VARS;

/// A regular lattice over an axis-aligned box, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGrid {
    domain: Vec<(f64, f64)>,
    resolution: Vec<usize>,
    margin: usize,
}

/// Lattice layers a 5-point stencil consumes.
pub const GRAD_INSET: usize = 2;
/// Layers the nested divergence-form Laplacian consumes.
pub const LAPLACE_INSET: usize = 4;
/// Layers the bilaplacian consumes.
pub const BILAPLACE_INSET: usize = 8;

impl ChartGrid {
    pub fn new(domain: Vec<(f64, f64)>, resolution: Vec<usize>, margin: usize) -> Result<Self> {
        if domain.is_empty() || domain.len() > MAX_VARS {
            return Err(GeomError::InvalidGrid(format!(
                "grid dimension {} out of range 1..={}",
                domain.len(),
                MAX_VARS
            )));
        }
        if domain.len() != resolution.len() {
            return Err(GeomError::InvalidGrid(
                "domain and resolution dimension mismatch".into(),
            ));
        }
        for (axis, &n) in resolution.iter().enumerate() {
            if !(9..=1025).contains(&n) {
                return Err(GeomError::InvalidGrid(format!(
                    "resolution {} on axis {} outside [9, 1025]",
                    n, axis
                )));
            }
        }
        for (axis, (lo, hi)) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GeomError::InvalidGrid(format!(
                    "domain on axis {} must be a finite interval",
                    axis
                )));
            }
        }
        if margin < 2 {
            return Err(GeomError::InvalidGrid("margin must be at least 2".into()));
        }
        Ok(ChartGrid {
            domain,
            resolution,
            margin,
        })
    }

    /// Default resolution for identity sweeps: 81 per axis for surfaces,
    /// 41 per axis for 3-dimensional charts, margin 4.
    pub fn default_for(domain: Vec<(f64, f64)>) -> Result<Self> {
        let n = if domain.len() <= 2 { 81 } else { 41 };
        let res = vec![n; domain.len()];
        ChartGrid::new(domain, res, 4)
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.domain[axis];
        (hi - lo) / (self.resolution[axis] - 1) as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn point(&self, idx: &[usize]) -> [f64; MAX_VARS] {
        let mut x = [0.0; MAX_VARS];
        for a in 0..self.dim() {
            x[a] = self.domain[a].0 + idx[a] as f64 * self.spacing(a);
        }
        x
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim() {
            flat = flat * self.resolution[a] + idx[a];
        }
        flat
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; MAX_VARS] {
        let mut idx = [0usize; MAX_VARS];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.resolution[a];
            flat /= self.resolution[a];
        }
        idx
    }

    pub fn is_interior(&self, idx: &[usize], inset: usize) -> bool {
        (0..self.dim()).all(|a| idx[a] >= inset && idx[a] + inset < self.resolution[a])
    }

    /// Multi-indices of all lattice points at least `inset` layers from the
    /// boundary, in flat-index order.
    pub fn interior_indices(&self, inset: usize) -> Vec<[usize; MAX_VARS]> {
        let mut out = Vec::new();
        for flat in 0..self.len() {
            let idx = self.multi_index(flat);
            if self.is_interior(&idx, inset) {
                out.push(idx);
            }
        }
        out
    }

    /// Same box with the spacing halved (resolution 2n - 1 per axis): the
    /// original lattice points sit at the doubled indices.
    pub fn refined(&self) -> Result<ChartGrid> {
        let res = self.resolution.iter().map(|n| 2 * n - 1).collect();
        ChartGrid::new(self.domain.clone(), res, self.margin)
    }

    fn check_inset(&self, idx: &[usize], inset: usize) -> Result<()> {
        if !self.is_interior(idx, inset) {
            return Err(GeomError::StencilOutOfRange {
                index: idx[..self.dim()].to_vec(),
                inset,
            });
        }
        Ok(())
    }

    /// Errors unless `idx` is at least `inset` layers from the boundary.
    pub fn require_inset(&self, idx: &[usize], inset: usize) -> Result<()> {
        self.check_inset(idx, inset)
    }
}

/// 4th-order central first derivative from the four neighbor values.
#[inline]
pub fn stencil5(fm2: f64, fm1: f64, fp1: f64, fp2: f64, h: f64) -> f64 {
    (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h)
}

/// Values of a scalar on a chart lattice.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: Arc<ChartGrid>,
    pub name: String,
    values: Vec<f64>,
    /// Layers from the boundary inside which values are meaningful; derived
    /// fields (fluxes, Laplacians) shrink their validity region.
    valid_inset: usize,
}

impl ScalarField {
    pub fn new(grid: Arc<ChartGrid>, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        ScalarField::with_inset(grid, name, values, 0)
    }

    pub fn with_inset(
        grid: Arc<ChartGrid>,
        name: impl Into<String>,
        values: Vec<f64>,
        valid_inset: usize,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeomError::InvalidGrid(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        for flat in 0..grid.len() {
            let idx = grid.multi_index(flat);
            if grid.is_interior(&idx, valid_inset) && !values[flat].is_finite() {
                return Err(GeomError::NonFiniteField(idx[..grid.dim()].to_vec()));
            }
        }
        Ok(ScalarField {
            grid,
            name: name.into(),
            values,
            valid_inset,
        })
    }

    /// Lattice that is only stamped at the points a caller will actually
    /// read; skips the finiteness scan.
    pub(crate) fn sparse(
        grid: Arc<ChartGrid>,
        name: impl Into<String>,
        values: Vec<f64>,
        valid_inset: usize,
    ) -> Self {
        ScalarField {
            grid,
            name: name.into(),
            values,
            valid_inset,
        }
    }

    /// Tabulate a closure over the whole lattice.
    pub fn tabulate(
        grid: Arc<ChartGrid>,
        name: impl Into<String>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let mut values = vec![0.0; grid.len()];
        for (flat, v) in values.iter_mut().enumerate() {
            let idx = grid.multi_index(flat);
            let x = grid.point(&idx[..grid.dim()]);
            *v = f(&x[..grid.dim()]);
        }
        ScalarField::new(grid, name, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid_inset(&self) -> usize {
        self.valid_inset
    }

    #[inline]
    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat_index(idx)]
    }

    /// Maximum |value| over the region valid for this field.
    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0f64;
        for flat in 0..self.grid.len() {
            let idx = self.grid.multi_index(flat);
            if self.grid.is_interior(&idx, self.valid_inset) {
                worst = worst.max(self.values[flat].abs());
            }
        }
        worst
    }

    #[inline]
    fn shifted(&self, idx: &[usize], axis: usize, offset: isize) -> f64 {
        let mut nb = [0usize; MAX_VARS];
        nb[..self.grid.dim()].copy_from_slice(&idx[..self.grid.dim()]);
        nb[axis] = (nb[axis] as isize + offset) as usize;
        self.values[self.grid.flat_index(&nb[..self.grid.dim()])]
    }

    /// 4th-order partial derivative along `axis`. Needs inset 2 beyond the
    /// field's own validity region.
    pub fn partial(&self, idx: &[usize], axis: usize) -> Result<f64> {
        self.grid.check_inset(idx, self.valid_inset + GRAD_INSET)?;
        Ok(self.partial_unchecked(idx, axis))
    }

    #[inline]
    pub fn partial_unchecked(&self, idx: &[usize], axis: usize) -> f64 {
        stencil5(
            self.shifted(idx, axis, -2),
            self.shifted(idx, axis, -1),
            self.shifted(idx, axis, 1),
            self.shifted(idx, axis, 2),
            self.grid.spacing(axis),
        )
    }
}

/// Borrowed view of the pointwise metric data a differential operator needs:
/// inverse metric components (row-major, stride `m * m`) and the metric
/// volume factor, both on the same lattice as the fields.
#[derive(Clone, Copy)]
pub struct MetricView<'a> {
    pub m: usize,
    pub inv: &'a [f64],
    pub sqrt_det: &'a [f64],
}

impl<'a> MetricView<'a> {
    #[inline]
    pub fn inv_at(&self, flat: usize, i: usize, j: usize) -> f64 {
        self.inv[flat * self.m * self.m + i * self.m + j]
    }
}

/// Contravariant gradient `(grad f)^i = g^{ij} d_j f`.
pub fn gradient(field: &ScalarField, metric: &MetricView, idx: &[usize]) -> Result<[f64; MAX_VARS]> {
    field
        .grid
        .check_inset(idx, field.valid_inset() + GRAD_INSET)?;
    Ok(gradient_unchecked(field, metric, idx))
}

pub fn gradient_unchecked(
    field: &ScalarField,
    metric: &MetricView,
    idx: &[usize],
) -> [f64; MAX_VARS] {
    let m = metric.m;
    let flat = field.grid.flat_index(idx);
    let mut partials = [0.0; MAX_VARS];
    for j in 0..m {
        partials[j] = field.partial_unchecked(idx, j);
    }
    let mut out = [0.0; MAX_VARS];
    for i in 0..m {
        for j in 0..m {
            out[i] += metric.inv_at(flat, i, j) * partials[j];
        }
    }
    out
}

#[inline]
fn flux_component(field: &ScalarField, metric: &MetricView, idx: &[usize], axis: usize) -> f64 {
    let m = metric.m;
    let flat = field.grid.flat_index(idx);
    let mut s = 0.0;
    for j in 0..m {
        s += metric.inv_at(flat, axis, j) * field.partial_unchecked(idx, j);
    }
    metric.sqrt_det[flat] * s
}

/// Divergence-form Laplace-Beltrami operator at an interior point. Needs
/// inset 4: the outer stencil reads fluxes two layers away, each of which is
/// itself a stencil.
pub fn laplace_beltrami(field: &ScalarField, metric: &MetricView, idx: &[usize]) -> Result<f64> {
    field
        .grid
        .check_inset(idx, field.valid_inset() + LAPLACE_INSET)?;
    Ok(laplace_beltrami_unchecked(field, metric, idx))
}

pub fn laplace_beltrami_unchecked(
    field: &ScalarField,
    metric: &MetricView,
    idx: &[usize],
) -> f64 {
    let grid = &field.grid;
    let dim = grid.dim();
    let flat = grid.flat_index(idx);
    let mut div = 0.0;
    let mut nb = [0usize; MAX_VARS];
    nb[..dim].copy_from_slice(&idx[..dim]);
    for axis in 0..metric.m {
        let base = idx[axis];
        let mut samples = [0.0; 4];
        for (slot, off) in [-2isize, -1, 1, 2].iter().enumerate() {
            nb[axis] = (base as isize + off) as usize;
            samples[slot] = flux_component(field, metric, &nb[..dim], axis);
        }
        nb[axis] = base;
        div += stencil5(samples[0], samples[1], samples[2], samples[3], grid.spacing(axis));
    }
    div / metric.sqrt_det[flat]
}

/// Laplacian of `field` on every point that admits it; the result is a field
/// whose validity inset grows by 4.
pub fn laplace_field(field: &ScalarField, metric: &MetricView) -> Result<ScalarField> {
    let grid = Arc::clone(&field.grid);
    let inset = field.valid_inset() + LAPLACE_INSET;
    let mut values = vec![f64::NAN; grid.len()];
    for flat in 0..grid.len() {
        let idx = grid.multi_index(flat);
        if grid.is_interior(&idx, inset) {
            values[flat] = laplace_beltrami_unchecked(field, metric, &idx[..grid.dim()]);
        }
    }
    ScalarField::with_inset(
        grid,
        format!("lap({})", field.name),
        values,
        inset,
    )
}

/// Bilaplacian by applying the Laplacian to the lattice of Laplacian values.
/// Needs inset 8.
pub fn bilaplacian(field: &ScalarField, metric: &MetricView, idx: &[usize]) -> Result<f64> {
    field
        .grid
        .check_inset(idx, field.valid_inset() + BILAPLACE_INSET)?;
    let grid = &field.grid;
    let dim = grid.dim();
    // only the Laplacian values the outer stencil touches are materialized
    let mut store = vec![f64::NAN; grid.len()];
    let stamp = |at: &[usize], store: &mut Vec<f64>| {
        let flat = grid.flat_index(at);
        if store[flat].is_nan() {
            store[flat] = laplace_beltrami_unchecked(field, metric, at);
        }
    };
    // the outer stencil reads fluxes at idx + a e_i, and each flux reads
    // partials in every direction, so the inner Laplacian must be stamped on
    // the whole { idx + a e_i + b e_j : |a|, |b| <= 2 } set
    let mut nb = [0usize; MAX_VARS];
    for i in 0..metric.m {
        for a in -2isize..=2 {
            for j in 0..metric.m {
                for b in -2isize..=2 {
                    nb[..dim].copy_from_slice(&idx[..dim]);
                    nb[i] = (nb[i] as isize + a) as usize;
                    nb[j] = (nb[j] as isize + b) as usize;
                    stamp(&nb[..dim], &mut store);
                }
            }
        }
    }
    let inner = ScalarField::sparse(
        Arc::clone(&field.grid),
        "lap_local",
        store,
        field.valid_inset() + LAPLACE_INSET,
    );
    Ok(laplace_beltrami_unchecked(&inner, metric, idx))
}

/// Christoffel symbols of the induced metric from stencils of the metric
/// lattice: `G[k][i][j]` = Gamma^k_{ij}. `g` is row-major with stride m*m.
pub fn intrinsic_christoffel(
    grid: &ChartGrid,
    g: &[f64],
    g_inv: &[f64],
    m: usize,
    idx: &[usize],
) -> Result<[[[f64; MAX_VARS]; MAX_VARS]; MAX_VARS]> {
    grid.check_inset(idx, GRAD_INSET)?;
    let stride = m * m;
    let comp = |flat: usize, i: usize, j: usize| g[flat * stride + i * m + j];
    let partial_g = |i: usize, j: usize, axis: usize| {
        let mut nb = [0usize; MAX_VARS];
        nb[..grid.dim()].copy_from_slice(&idx[..grid.dim()]);
        let base = nb[axis];
        let mut s = [0.0; 4];
        for (slot, off) in [-2isize, -1, 1, 2].iter().enumerate() {
            nb[axis] = (base as isize + off) as usize;
            s[slot] = comp(grid.flat_index(&nb[..grid.dim()]), i, j);
        }
        stencil5(s[0], s[1], s[2], s[3], grid.spacing(axis))
    };
    let flat = grid.flat_index(idx);
    let mut dg = [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS];
    for i in 0..m {
        for j in 0..m {
            for a in 0..m {
                dg[a][i][j] = partial_g(i, j, a);
            }
        }
    }
    let mut gamma = [[[0.0; MAX_VARS]; MAX_VARS]; MAX_VARS];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for l in 0..m {
                    s += g_inv[flat * stride + k * m + l]
                        * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}
